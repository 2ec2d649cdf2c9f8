from dataclasses import dataclass, field

import numpy as np

from vilenkinlab.algebra.factor import (
    factor_cond_exp,
    factor_hardy_norm,
    nc_cesaro,
    nc_coefficients,
)
from vilenkinlab.algebra.field import (
    OperatorField,
    cesaro,
    cond_exp,
    hardy_norm,
    lambda_certificate,
    partial_sum,
)
from vilenkinlab.algebra.matrix import (
    TOLERANCE,
    as_matrix,
    norm,
    operator_norm,
    projection_residual,
    singular_values,
)

NORM_EXPONENTS = (1, 2, 4, np.inf)
LEVEL_GAP = 1e-6


@dataclass
class TransferredElement:
    """
    gamma(x) = sum_j x^(j) psi_j (x) W_j over the doubled group, with its source.
    """

    field: OperatorField
    source: np.ndarray

    @property
    def values(self):
        return self.field.values


def gamma(x, context, system):
    """
    Transference of an element of R_N to L_inf(G_2m) (x) R_N.
    Args:
        x: Operator in R_N
        context: FactorContext
        system: Character system evaluated on the doubled radix.

    Returns:
        TransferredElement
    """
    coefficients = nc_coefficients(x, context)
    psi = system.table(context.doubled)
    values = np.einsum('j,jp,jab->pab', coefficients, psi, context.basis)
    return TransferredElement(
        OperatorField(context.doubled, values), context.check_operator(x)
    )


def doubled_levels(context):
    return [2 * k for k in range(1, context.radix.depth + 1)]


@dataclass
class TransferenceReport:
    """
    Residuals of the transference identities, each expected below 1e-9.
    """

    residuals: dict = field(default_factory=dict)
    tolerance: float = TOLERANCE

    @property
    def passed(self):
        return all(value <= self.tolerance for value in self.residuals.values())

    @property
    def failures(self):
        return {
            key: value for key, value in self.residuals.items() if value > self.tolerance
        }

    def to_json(self):
        return {'passed': self.passed, 'residuals': dict(sorted(self.residuals.items()))}


@dataclass
class IntertwineReport(TransferenceReport):
    """
    Intertwining residuals of gamma at index n and level k.
    """

    n: int = 1
    k: int = 0

    def to_json(self):
        return {**super(IntertwineReport, self).to_json(), 'n': self.n, 'k': self.k}


def profile_residual(transferred, x):
    """
    Largest quantile gap between the singular value profile of gamma(x),
    weights 1 / (M_2N D), and that of x repeated on every point.
    """
    points = transferred.values.shape[0]
    merged = np.sort(singular_values(transferred.values).ravel())[::-1]
    reference = np.sort(np.tile(singular_values(x), points))[::-1]
    return float(np.max(np.abs(merged - reference)))


def level_grid(x, count=16, gap=LEVEL_GAP):
    """
    Levels in (0, ||x||) at least `gap` away from every singular value of x.
    """
    values = singular_values(x)
    candidates = np.linspace(0, values.max(initial=0.0) * 1.1, count + 2)[1:-1]
    distance = np.min(np.abs(candidates[:, None] - values[None]), axis=1)
    return candidates[distance > gap]


def level_set_residual(transferred, x, levels):
    """
    max over levels of |phi(chi_(t, inf)(|gamma x|)) - tau(chi_(t, inf)(|x|))|
    """
    field_values = singular_values(transferred.values)
    source_values = singular_values(x)
    return max(
        (
            abs(np.mean(field_values > level) - np.mean(source_values > level))
            for level in levels
        ),
        default=0.0,
    )


def verify_transference(x, y, context, system):
    """
    Check gamma is a trace preserving *-homomorphism that preserves L_p norms,
    singular value profiles and level sets.
    Args:
        x: Operator in R_N
        y: Operator in R_N
        context: FactorContext
        system: Character system on the doubled radix.

    Returns:
        TransferenceReport
    """
    x, y = context.check_operator(x), context.check_operator(y)
    gx, gy = gamma(x, context, system), gamma(y, context, system)
    product = gamma(x @ y, context, system).values
    star = gamma(np.conj(x.T), context, system).values
    residuals = {
        'homomorphism': float(np.max(operator_norm(product - gx.values @ gy.values))),
        'adjoint': float(
            np.max(operator_norm(star - np.conj(np.swapaxes(gx.values, -1, -2))))
        ),
        'trace': abs(gx.field.trace() - np.trace(x) / context.dimension),
        'profile': profile_residual(gx, x),
        'level_sets': level_set_residual(gx, x, level_grid(x)),
    }
    for p in NORM_EXPONENTS:
        residuals[f'norm_{p}'] = abs(gx.field.norm(p) - norm(x, p))
    return TransferenceReport(residuals)


def transfer_projection(e, context, system, tolerance=TOLERANCE):
    """
    gamma(e) for a projection e, checked to be a projection field.
    """
    image = gamma(e, context, system).values
    residual = projection_residual(image)
    assert residual <= tolerance, f'gamma(e) is not a projection, residual {residual}'
    return image


def transfer_certificate(xs, e, t, p, context, system, flavor='two-sided'):
    """
    Lambda certificates of (x_n) with witness e and of (gamma(x_n)) with
    witness gamma(e).
    Returns:
        (source certificate, transferred certificate)
    """
    source = lambda_certificate([as_matrix(x) for x in xs], e, t, p, flavor)
    image = transfer_projection(e, context, system)
    transferred = lambda_certificate(
        [gamma(x, context, system).field for x in xs], image, t, p, flavor
    )
    return source, transferred


def intertwine(x, n, k, context, system, exponents=(1, 2)):
    """
    Residuals of gamma(sigma_n^R(x)) = sigma_n(gamma(x)) and
    gamma(E_k(x)) = S_{M_2k}(gamma(x)) = E_{2k}(gamma(x)), plus the Hardy norm
    transfer over the doubled filtration.
    Args:
        x: Operator in R_N
        n: Index in [1, M_2N]
        k: Level in [0, N]
        context: FactorContext
        system: Character system on the doubled radix.
        exponents: Hardy exponents checked.

    Returns:
        IntertwineReport
    """
    transferred = gamma(x, context, system).field
    averaged = gamma(nc_cesaro(x, n, context), context, system).field
    expected = gamma(factor_cond_exp(x, k, context), context, system).field
    cutoff = context.doubled.cumulative[2 * k]
    residuals = {
        'cesaro': float(
            np.max(operator_norm(averaged.values - cesaro(transferred, n, system).values))
        ),
        'partial_sum': float(
            np.max(
                operator_norm(
                    expected.values - partial_sum(transferred, cutoff, system).values
                )
            )
        ),
        'cond_exp': float(
            np.max(operator_norm(expected.values - cond_exp(transferred, 2 * k).values))
        ),
    }
    for p in exponents:
        residuals[f'hardy_{p}'] = abs(
            hardy_norm(transferred, p, levels=doubled_levels(context))
            - factor_hardy_norm(x, p, context)
        )
    return IntertwineReport(residuals, n=n, k=k)
