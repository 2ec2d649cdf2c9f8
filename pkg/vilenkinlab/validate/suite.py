import numpy as np

from vilenkinlab.algebra.vilenkin import (
    KERNEL_TOLERANCE,
    KernelBank,
    multiplier,
    validate_system,
    verify_dirichlet_identity,
)
from vilenkinlab.base import BaseSuite
from vilenkinlab.utils.common import identity_row

AXIOM_CHECKS = ('normalized', 'measurable', 'energy', 'orthogonal')


class ValidateSystem(BaseSuite):
    """
    Exhaustive checks of the configured system: the generating function
    axioms with delta, orthonormality, the Dirichlet identity at M_n and the
    Fejer multiplier formula.
    """

    name = 'validate-system'
    claims = ('assumptions', 'orthonormality', 'dirichlet-identity', 'fejer-multiplier')
    deterministic = claims

    def __init__(self, tolerance=1e-10, **kwargs):
        """
        Initialize validation settings.
        Args:
            tolerance: Residual tolerance of the generating function checks.
            **kwargs: kwargs passed to vilenkinlab.base.BaseSuite
        """
        super(ValidateSystem, self).__init__(**kwargs)
        self.tolerance = tolerance
        self.checks = {
            'assumptions': self.check_assumptions,
            'orthonormality': self.check_orthonormality,
            'dirichlet-identity': self.check_dirichlet_identity,
            'fejer-multiplier': self.check_fejer_multiplier,
        }

    def check_assumptions(self, radix):
        report = validate_system(self.system, radix, self.tolerance)
        failure = report.failure or {}
        rows = []
        for check in AXIOM_CHECKS:
            row = identity_row(report.residuals.get(check, 0.0), self.tolerance, check=check)
            if failure.get('check') == check:
                row.update(
                    {key: failure[key] for key in ('k', 'n', 'l') if key in failure},
                    failure=f'first violation of `{check}`',
                )
            rows.append(row)
        rows.append(
            {
                'check': 'bounded',
                'lhs': 1.0,
                'rhs': report.delta_max,
                'status': 'PASS' if report.delta_max > 1 else 'FAIL',
            }
        )
        return rows

    def check_orthonormality(self, radix):
        psi = self.system.table(radix)
        gram = psi @ np.conj(psi.T) / radix.size
        residual = np.max(np.abs(gram - np.eye(radix.size)))
        return [identity_row(residual, self.tolerance, size=radix.size)]

    def check_dirichlet_identity(self, radix):
        bank = KernelBank(self.system, radix)
        return [identity_row(verify_dirichlet_identity(bank), KERNEL_TOLERANCE)]

    def check_fejer_multiplier(self, radix):
        """
        Integral of K_n against psi_j at both arguments against (n - j) / n.
        """
        bank, psi, rows = KernelBank(self.system, radix), self.system.table(radix), []
        for n in range(1, radix.size + 1):
            integrals = np.einsum(
                'jp,pq,jq->j', np.conj(psi), bank.fejer(n), psi
            ) / radix.size**2
            residual = np.max(np.abs(integrals - multiplier('fejer', n, radix.size)))
            rows.append(identity_row(residual, KERNEL_TOLERANCE, n=n))
        return rows

    def run_trial(self, claim, radix, rng):
        return self.checks[claim](radix)
