from vilenkinlab.algebra.factor import FactorContext
from vilenkinlab.algebra.matrix import TOLERANCE, as_matrix, operator_norm
from vilenkinlab.algebra.transference import (
    intertwine,
    transfer_certificate,
    verify_transference,
)
from vilenkinlab.base import BaseSuite
from vilenkinlab.utils.common import identity_row, random_operator, random_projection


class Transference(BaseSuite):
    """
    The transference map gamma of the truncated factor R_N into the
    semi-commutative algebra over the doubled group: *-homomorphism, trace,
    L_p isometry, singular value profiles, level sets, intertwining of Cesaro
    means and conditional expectations, and transfer of Lambda certificates.
    """

    name = 'transference'
    claims = ('transference', 'intertwine', 'certificate-transfer')

    def __init__(self, sequence_length=3, **kwargs):
        """
        Initialize transference settings.
        Args:
            sequence_length: Length of the sequences whose Lambda certificates
                are transferred.
            **kwargs: kwargs passed to vilenkinlab.base.BaseSuite
        """
        super(Transference, self).__init__(**kwargs)
        assert sequence_length >= 1, f'Expected sequence_length >= 1, got {sequence_length}'
        self.sequence_length = sequence_length
        self.contexts = {}

    def depths(self):
        return (self.depth,)

    def estimate(self, depth):
        """
        M_2N, the size of the doubled group carrying gamma(x).
        """
        return self.radix_at(depth).size ** 2

    def context(self, radix):
        if radix not in self.contexts:
            self.contexts[radix] = FactorContext(radix)
        return self.contexts[radix]

    def check_transference(self, context, rng):
        x = random_operator(context.dimension, rng)
        y = random_operator(context.dimension, rng)
        report = verify_transference(x, y, context, self.factor_system())
        scale = max(1.0, float(operator_norm(x)), float(operator_norm(y))) ** 2
        return [
            identity_row(value, TOLERANCE * scale, check=check)
            for check, value in sorted(report.residuals.items())
        ]

    def check_intertwine(self, context, rng):
        """
        Every n <= M_2N once, with k cycling over 0 .. N and the Hardy norms
        compared on the first n only.
        """
        x = random_operator(context.dimension, rng)
        scale = max(1.0, float(operator_norm(x)))
        depth, rows = context.radix.depth, []
        for n in range(1, context.size + 1):
            exponents = (1, 2) if n == 1 else ()
            k = n % (depth + 1)
            report = intertwine(x, n, k, context, self.factor_system(), exponents)
            rows.append(
                identity_row(
                    max(report.residuals.values()), TOLERANCE * scale, n=n, k=k, **report.residuals
                )
            )
        return rows

    def check_certificate_transfer(self, context, rng):
        xs = [
            random_operator(context.dimension, rng) for _ in range(self.sequence_length)
        ]
        e = as_matrix(random_projection(context.dimension, rng))
        rows = []
        for flavor in ('two-sided', 'column', 'row'):
            if flavor == 'two-sided':
                level = max(float(operator_norm(e @ x @ e)) for x in xs)
            elif flavor == 'column':
                level = max(float(operator_norm(x @ e)) for x in xs)
            else:
                level = max(float(operator_norm(e @ x)) for x in xs)
            source, transferred = transfer_certificate(
                xs, e, level, 1, context, self.factor_system(), flavor
            )
            row = identity_row(
                abs(source.value - transferred.value),
                TOLERANCE,
                flavor=flavor,
                value=source.value,
            )
            if not (source.passed and transferred.passed):
                row.update(status='FAIL', failure='certificate rejected')
            rows.append(row)
        return rows

    def run_trial(self, claim, radix, rng):
        context = self.context(radix)
        if claim == 'transference':
            return self.check_transference(context, rng)
        if claim == 'intertwine':
            return self.check_intertwine(context, rng)
        return self.check_certificate_transfer(context, rng)
