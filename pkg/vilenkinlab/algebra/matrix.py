import numpy as np
from scipy import linalg

TOLERANCE = 1e-9
MEET_TOLERANCE = 1e-7


def as_matrix(x):
    """
    View an Operator, Projection or array-like as a complex numpy array.
    Args:
        x: Operator, numpy array or nested lists of shape (..., d, d).

    Returns:
        numpy.ndarray
    """
    return np.asarray(x, dtype=complex)


def like(x, result):
    """
    Wrap `result` as an Operator if `x` is one, otherwise return the array.
    Args:
        x: Original input.
        result: numpy array computed from `x`.

    Returns:
        Operator or numpy.ndarray
    """
    if isinstance(x, Operator):
        return Operator(result)
    return result


class Operator:
    """
    Trace-normalized dense complex square matrix, immutable.
    """

    def __init__(self, entries):
        """
        Validate and freeze entries.
        Args:
            entries: d x d array-like of complex values.
        """
        entries = np.array(entries, dtype=complex)
        assert (
            entries.ndim == 2 and entries.shape[0] == entries.shape[1]
        ), f'Expected a square matrix, got shape {entries.shape}'
        assert np.isfinite(entries).all(), 'Operator entries must be finite'
        entries.setflags(write=False)
        self.entries = entries
        self.dim = entries.shape[0]

    @classmethod
    def identity(cls, dim):
        return cls(np.eye(dim))

    @classmethod
    def zeros(cls, dim):
        return cls(np.zeros((dim, dim)))

    def __array__(self, dtype=None, copy=None):
        if dtype is not None:
            return self.entries.astype(dtype)
        return self.entries

    def __repr__(self):
        return f'{self.__class__.__name__}(dim={self.dim})'

    def __matmul__(self, other):
        return Operator(self.entries @ as_matrix(other))

    def __add__(self, other):
        return Operator(self.entries + as_matrix(other))

    def __sub__(self, other):
        return Operator(self.entries - as_matrix(other))

    def __mul__(self, scalar):
        return Operator(self.entries * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Operator(self.entries / scalar)

    def __neg__(self):
        return Operator(-self.entries)

    def adjoint(self):
        return Operator(adjoint(self.entries))

    def trace(self):
        return normalized_trace(self.entries)

    def allclose(self, other, tolerance=TOLERANCE):
        """
        Compare with another operator in operator norm.
        Args:
            other: Operator or array-like.
            tolerance: Maximum allowed ||self - other||_inf

        Returns:
            bool
        """
        return operator_norm(self.entries - as_matrix(other)) <= tolerance


class Projection(Operator):
    """
    Self-adjoint idempotent Operator.
    """

    def __init__(self, entries, tolerance=TOLERANCE):
        """
        Validate projection invariants.
        Args:
            entries: d x d array-like.
            tolerance: Allowed deviation from self-adjointness and idempotence.
        """
        super(Projection, self).__init__(entries)
        assert (
            projection_residual(self.entries) <= tolerance
        ), f'Not a projection, residual {projection_residual(self.entries)}'

    @classmethod
    def identity(cls, dim):
        return cls(np.eye(dim))

    @classmethod
    def zeros(cls, dim):
        return cls(np.zeros((dim, dim)))

    def complement(self):
        return Projection(np.eye(self.dim) - self.entries)


class Interval:
    """
    Real interval with open or closed endpoints, endpoints may be infinite.
    """

    def __init__(self, low=-np.inf, high=np.inf, closed_low=False, closed_high=False):
        """
        Args:
            low: Lower endpoint.
            high: Upper endpoint.
            closed_low: If True, `low` belongs to the interval.
            closed_high: If True, `high` belongs to the interval.
        """
        assert low <= high, f'Empty interval ({low}, {high})'
        self.low = low
        self.high = high
        self.closed_low = closed_low
        self.closed_high = closed_high

    @classmethod
    def above(cls, level):
        """(level, inf)"""
        return cls(level, np.inf)

    @classmethod
    def at_most(cls, level):
        """[0, level], the sublevel set of a positive operator."""
        return cls(0.0, level, closed_low=True, closed_high=True)

    @classmethod
    def point(cls, value):
        return cls(value, value, True, True)

    def contains(self, values, tolerance=TOLERANCE):
        """
        Classify values, values within `tolerance` of an endpoint count as
        inside a closed endpoint and outside an open one.
        Args:
            values: numpy array of reals.
            tolerance: Endpoint classification width.

        Returns:
            Boolean numpy array.
        """
        values = np.asarray(values)
        if self.closed_low:
            above_low = values >= self.low - tolerance
        else:
            above_low = values > self.low + tolerance
        if self.closed_high:
            below_high = values <= self.high + tolerance
        else:
            below_high = values < self.high - tolerance
        return above_low & below_high

    def __repr__(self):
        left = '[' if self.closed_low else '('
        right = ']' if self.closed_high else ')'
        return f'{left}{self.low}, {self.high}{right}'


class SingularProfile:
    """
    Right-continuous step function t -> mu(t, x) on [0, 1), each value
    carrying weight 1 / len(values).
    """

    def __init__(self, values):
        values = np.sort(np.asarray(values, dtype=float).ravel())[::-1]
        assert values.size, 'Empty singular profile'
        assert (values >= -TOLERANCE).all(), 'Singular values must be nonnegative'
        self.values = np.clip(values, 0, None)
        self.weight = 1 / values.size

    def __call__(self, t):
        """
        Evaluate the step function.
        Args:
            t: float or numpy array in [0, inf)

        Returns:
            mu(t, x)
        """
        t = np.asarray(t, dtype=float)
        index = np.floor(t * self.values.size + TOLERANCE).astype(int)
        padded = np.append(self.values, 0.0)
        return padded[np.clip(index, 0, self.values.size)]

    def norm(self, p=2, weak=False):
        return lp_from_singular_values(self.values, p, weak)


def normalized_trace(x):
    """
    tau(x) = Tr(x) / d, stack aware.
    Args:
        x: Operator or array of shape (..., d, d)

    Returns:
        complex or numpy array of complex.
    """
    x = as_matrix(x)
    return np.trace(x, axis1=-2, axis2=-1) / x.shape[-1]


def adjoint(x):
    return np.conj(np.swapaxes(as_matrix(x), -1, -2))


def operator_norm(x):
    """
    ||x||_inf, the largest singular value, stack aware.
    Args:
        x: Operator or array of shape (..., d, d)

    Returns:
        float or numpy array.
    """
    return np.linalg.norm(as_matrix(x), ord=2, axis=(-2, -1))


def projection_residual(e):
    e = as_matrix(e)
    return max(
        np.max(operator_norm(e - adjoint(e))), np.max(operator_norm(e @ e - e))
    )


def symmetrize(x):
    """
    (x + x*) / 2 without a self-adjointness check, for products such as x* x
    that are self-adjoint up to rounding.
    """
    x = as_matrix(x)
    return (x + adjoint(x)) / 2


def hermitian_part(x, tolerance=TOLERANCE):
    """
    Symmetrize x after checking it is self-adjoint.
    Args:
        x: Operator or array of shape (..., d, d)
        tolerance: Maximum allowed ||x - x*||_inf

    Returns:
        numpy array (x + x*) / 2
    """
    x = as_matrix(x)
    deviation = np.max(operator_norm(x - adjoint(x)), initial=0.0)
    assert (
        deviation <= tolerance
    ), f'Expected a self-adjoint operator, got ||x - x*||_inf = {deviation}'
    return symmetrize(x)


def eigh(x, tolerance=TOLERANCE):
    """
    Eigendecomposition of a self-adjoint operator or stack of operators.
    Args:
        x: Operator or array of shape (..., d, d)
        tolerance: Self-adjointness tolerance.

    Returns:
        eigenvalues (..., d) ascending, eigenvectors (..., d, d) as columns.
    """
    return np.linalg.eigh(hermitian_part(x, tolerance))


def from_spectrum(values, vectors):
    return (vectors * values[..., None, :]) @ adjoint(vectors)


def functional_calculus(x, function, tolerance=TOLERANCE):
    """
    Apply a real function to a self-adjoint operator through its
    spectral decomposition.
    Args:
        x: Self-adjoint Operator or array of shape (..., d, d)
        function: Vectorized real function of the eigenvalues.
        tolerance: Self-adjointness tolerance.

    Returns:
        sum_i function(lambda_i) P_i, same type as x.
    """
    values, vectors = eigh(x, tolerance)
    return like(x, from_spectrum(np.asarray(function(values), float), vectors))


def spectral_projection(x, interval, tolerance=TOLERANCE):
    """
    chi_B(x) for a real interval B.
    Args:
        x: Self-adjoint Operator or array of shape (..., d, d)
        interval: Interval
        tolerance: Self-adjointness and endpoint classification tolerance.

    Returns:
        Projection if x is an Operator, otherwise array of projections.
    """
    values, vectors = eigh(x, tolerance)
    indicator = interval.contains(values, tolerance).astype(float)
    result = from_spectrum(indicator, vectors)
    if isinstance(x, Operator):
        return Projection(result)
    return result


def singular_values(x):
    """
    Singular values sorted nonincreasing along the last axis.
    """
    return np.linalg.svd(as_matrix(x), compute_uv=False)


def mu_profile(x):
    return SingularProfile(singular_values(x))


def lp_from_singular_values(values, p=2, weak=False):
    """
    L_p or weak L_p quasi-norm of equally weighted singular values.
    Args:
        values: Singular values, any shape, all weights equal.
        p: Exponent in [1, inf]
        weak: If True, max_i s_i (i / n)^(1/p) is returned.

    Returns:
        float
    """
    assert p >= 1, f'Expected p >= 1, got {p}'
    values = np.sort(np.abs(np.ravel(values)))[::-1]
    if np.isinf(p):
        return float(values.max(initial=0.0))
    if weak:
        ranks = np.arange(1, values.size + 1) / values.size
        return float(np.max(values * ranks ** (1 / p), initial=0.0))
    return float(np.mean(values**p) ** (1 / p))


def norm(x, p=2, weak=False):
    """
    ||x||_p = tau(|x|^p)^(1/p) or the weak quasi-norm sup_t t^(1/p) mu(t, x).
    Args:
        x: Operator or array.
        p: Exponent in [1, inf]
        weak: If True, the weak L_{p, inf} quasi-norm is returned.

    Returns:
        float
    """
    return lp_from_singular_values(singular_values(x), p, weak)


def absolute_value(x):
    """
    |x| = (x*x)^(1/2)
    """
    matrix = as_matrix(x)
    square = symmetrize(adjoint(matrix) @ matrix)
    return like(
        x, as_matrix(functional_calculus(square, lambda w: np.sqrt(np.clip(w, 0, None))))
    )


def min_eigenvalue(x, tolerance=TOLERANCE):
    """
    Smallest eigenvalue of a self-adjoint operator, stack aware.
    """
    return np.linalg.eigvalsh(hermitian_part(x, tolerance))[..., 0]


def order_residual(smaller, larger, tolerance=TOLERANCE):
    """
    min eigenvalue of larger - smaller, nonnegative iff smaller <= larger.
    Args:
        smaller: Operator or array.
        larger: Operator or array.
        tolerance: Self-adjointness tolerance.

    Returns:
        float
    """
    return float(
        np.min(min_eigenvalue(as_matrix(larger) - as_matrix(smaller), tolerance))
    )


def commutator_norm(x, y):
    x, y = as_matrix(x), as_matrix(y)
    return float(np.max(operator_norm(x @ y - y @ x), initial=0.0))


def projection_meet(e, q, tolerance=MEET_TOLERANCE):
    """
    Projection onto range(e) and range(q), the spectral projection of e + q
    at eigenvalue 2.
    Args:
        e: Projection or array of projections.
        q: Projection or array of projections of the same shape.
        tolerance: Distance from 2 below which eigenvalues are kept.

    Returns:
        Projection if e is a Projection, otherwise array.
    """
    total = as_matrix(e) + as_matrix(q)
    assert total.shape == as_matrix(q).shape, 'Projection dimensions differ'
    values, vectors = eigh(total)
    result = from_spectrum((values >= 2 - tolerance).astype(float), vectors)
    if isinstance(e, Operator):
        return Projection(result)
    return result


def psd_pinv(x, threshold=1e-10):
    """
    Pseudo-inverse of a positive semidefinite operator, eigenvalues below
    `threshold` treated as 0, stack aware.
    """
    x = hermitian_part(x)
    flat = x.reshape(-1, *x.shape[-2:])
    inverses = [linalg.pinvh(item, atol=threshold) for item in flat]
    return np.stack(inverses).reshape(x.shape)


def psd_sqrt(x):
    return functional_calculus(x, lambda w: np.sqrt(np.clip(w, 0, None)))
