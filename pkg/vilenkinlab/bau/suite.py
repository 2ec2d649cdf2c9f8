from vilenkinlab.algebra.convergence import (
    PROBE_EPSILONS,
    TERMINAL_TOLERANCE,
    bau_probe,
    cesaro_deficits,
)
from vilenkinlab.algebra.factor import FactorContext, build_W
from vilenkinlab.algebra.matrix import operator_norm
from vilenkinlab.base import BaseSuite
from vilenkinlab.utils.common import identity_row, random_operator

DEFICIT_TOLERANCE = 1e-12


class ConvergenceProbe(BaseSuite):
    """
    Finite depth substitutes for bilateral almost uniform convergence of
    Cesaro means, on the factor and on operator fields.
    """

    name = 'bau-probe'
    claims = ('cesaro-deficit', 'decay', 'field-decay')
    deterministic = ('cesaro-deficit',)

    def __init__(self, epsilons=PROBE_EPSILONS, **kwargs):
        """
        Initialize probe settings.
        Args:
            epsilons: Trace budgets of the probe projections, each in (0, 1].
            **kwargs: kwargs passed to vilenkinlab.base.BaseSuite
        """
        super(ConvergenceProbe, self).__init__(**kwargs)
        for epsilon in epsilons:
            assert 0 < epsilon <= 1, f'Expected epsilons in (0, 1], got {epsilon}'
        self.epsilons = tuple(epsilons)
        self.contexts = {}

    def estimate(self, depth):
        size = self.radix_at(depth).size
        return max(size * self.fiber_dim, size**2)

    def context(self, radix):
        if radix not in self.contexts:
            self.contexts[radix] = FactorContext(radix)
        return self.contexts[radix]

    def check_deficit(self, radix):
        """
        ||sigma_n(W_1) - W_1|| = 1 / n for every n <= M_2N.
        """
        context = self.context(radix)
        deficits = cesaro_deficits(build_W(1, context), context)
        return [
            identity_row(abs(deficit - 1 / n), DEFICIT_TOLERANCE, n=n, deficit=deficit)
            for n, deficit in enumerate(deficits.tolist(), 1)
        ]

    def decay_rows(self, table, scale):
        rows = [{**row, 'lhs': row['cesaro_tail'], 'rhs': scale} for row in table.rows]
        terminal = table.terminal()
        if not table.is_monotone():
            rows[-1].update(status='FAIL', failure='Decay table increases in n_0')
        elif terminal > TERMINAL_TOLERANCE * max(1.0, scale):
            rows[-1].update(status='FAIL', failure=f'Terminal partial sum tail {terminal}')
        return rows

    def run_trial(self, claim, radix, rng):
        if claim == 'cesaro-deficit':
            return self.check_deficit(radix)
        if claim == 'decay':
            context = self.context(radix)
            x = random_operator(context.dimension, rng)
            table = bau_probe(x, self.epsilons, context=context)
            return self.decay_rows(table, float(operator_norm(x)))
        f = self.random_field(radix, rng)
        table = bau_probe(f, self.epsilons, system=self.system)
        return self.decay_rows(table, f.sup_norm())
