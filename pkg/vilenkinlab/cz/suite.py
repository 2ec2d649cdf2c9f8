from vilenkinlab.algebra.martingale import cz_decompose, offdiag_rows
from vilenkinlab.algebra.matrix import TOLERANCE
from vilenkinlab.algebra.vilenkin import KernelBank
from vilenkinlab.base import BaseSuite
from vilenkinlab.utils.common import identity_row


class CalderonZygmund(BaseSuite):
    """
    Calderon-Zygmund decompositions of random positive fields over a lambda
    grid and the L_1 bound of the off-diagonal kernel pieces.
    """

    name = 'cz'
    claims = ('cz-reconstruction', 'cz-g-l1', 'cz-g-sup', 'cz-diagonal-l1', 'offdiag-l1')

    def __init__(self, order_tolerance=1e-8, **kwargs):
        """
        Initialize decomposition settings.
        Args:
            order_tolerance: Tolerance of the Cuculescu and decomposition checks.
            **kwargs: kwargs passed to vilenkinlab.base.BaseSuite
        """
        super(CalderonZygmund, self).__init__(**kwargs)
        self.order_tolerance = order_tolerance
        self.banks = {}

    def bank(self, radix):
        if radix not in self.banks:
            self.banks[radix] = KernelBank(self.system, radix)
        return self.banks[radix]

    def decomposition_rows(self, claim, decomposition, f):
        level = decomposition.level
        if claim == 'cz-reconstruction':
            residual = decomposition.residuals['reconstruction']
            return [identity_row(residual, TOLERANCE * max(1.0, f.sup_norm()), **{'lambda': level})]
        if claim == 'cz-g-l1':
            return [{'lambda': level, 'lhs': decomposition.g.norm(1), 'rhs': f.norm(1)}]
        if claim == 'cz-g-sup':
            if 'g_sup' not in decomposition.residuals:
                return []
            return [
                {
                    'lambda': level,
                    'lhs': decomposition.g.sup_norm(),
                    'rhs': decomposition.ratio * level,
                }
            ]
        if claim == 'cz-diagonal-l1':
            return [
                {
                    'lambda': level,
                    'lhs': sum(piece.norm(1) for piece in decomposition.diagonal),
                    'rhs': 2 * f.norm(1),
                }
            ]
        return offdiag_rows(decomposition, self.bank(f.radix))

    def run_trial(self, claim, radix, rng):
        f = self.random_field(radix, rng, positive=True)
        rows = []
        for level in self.lambda_grid(f):
            decomposition = cz_decompose(f, level, self.order_tolerance)
            rows.extend(self.decomposition_rows(claim, decomposition, f))
        return rows
