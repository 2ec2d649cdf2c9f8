from vilenkinlab.algebra.martingale import cuculescu
from vilenkinlab.base import BaseSuite


class CuculescuProjections(BaseSuite):
    """
    Cuculescu projections of random positive fields over a lambda grid:
    commutation, compression below lambda, monotonicity and the weak type
    bound lambda phi(1 - q) <= ||f||_1.
    """

    name = 'cuculescu'
    claims = ('cuculescu',)

    def __init__(self, order_tolerance=1e-8, **kwargs):
        """
        Initialize Cuculescu settings.
        Args:
            order_tolerance: Tolerance of the commutation, compression and order checks.
            **kwargs: kwargs passed to vilenkinlab.base.BaseSuite
        """
        super(CuculescuProjections, self).__init__(**kwargs)
        self.order_tolerance = order_tolerance

    def run_trial(self, claim, radix, rng):
        f = self.random_field(radix, rng, positive=True)
        rows = []
        for level in self.lambda_grid(f):
            result = cuculescu(f, level, self.order_tolerance)
            rows.append(
                {
                    'lambda': level,
                    'lhs': level * result.tail,
                    'rhs': f.norm(1),
                    **result.residuals,
                }
            )
        return rows
