from functools import reduce

import numpy as np

from vilenkinlab.algebra.field import psd_sqrt, square_sum
from vilenkinlab.algebra.matrix import (
    TOLERANCE,
    Operator,
    adjoint,
    as_matrix,
    lp_from_singular_values,
    normalized_trace,
    operator_norm,
    singular_values,
)
from vilenkinlab.algebra.vilenkin import multiplier

UNITARY_TOLERANCE = 1e-10


def clock(dim):
    """
    A = sum_j exp(2 pi i j / m) e_jj
    """
    return np.diag(np.exp(2j * np.pi * np.arange(dim) / dim))


def shift(dim):
    """
    B = sum_j e_{j, j + 1}, column index taken mod m.
    """
    matrix = np.zeros((dim, dim), dtype=complex)
    matrix[np.arange(dim), (np.arange(dim) + 1) % dim] = 1
    return matrix


class FactorContext:
    """
    Truncation R_N of the hyperfinite II_1 factor, the tensor product of the
    m_k x m_k matrix algebras, with its matrix Vilenkin basis W_n indexed
    through the doubled radix 2m.
    """

    def __init__(self, radix):
        """
        Args:
            radix: RadixSequence m of the factor.
        """
        self.radix = radix
        self.doubled = radix.doubled()
        self.dimension = radix.size
        self.size = self.doubled.size
        self.clocks = [clock(digit) for digit in radix.digits]
        self.shifts = [shift(digit) for digit in radix.digits]
        self.cached_basis = None

    def __repr__(self):
        return f'FactorContext(radix={self.radix.digits}, dimension={self.dimension})'

    def build(self, n):
        """
        W_n = (x)_k A_k^{eta_{2k}} B_k^{eta_{2k+1}} with eta the digits of n in 2m.
        """
        eta = self.doubled.to_digits(n)
        factors = [
            np.linalg.matrix_power(self.clocks[k], eta[2 * k])
            @ np.linalg.matrix_power(self.shifts[k], eta[2 * k + 1])
            for k in range(self.radix.depth)
        ]
        return reduce(np.kron, factors, np.eye(1, dtype=complex))

    @property
    def basis(self):
        """
        All W_n for n < M_{2N}, read-only array of shape (M_{2N}, D, D).
        """
        if self.cached_basis is None:
            basis = np.stack([self.build(n) for n in range(self.size)])
            basis.setflags(write=False)
            self.cached_basis = basis
        return self.cached_basis

    def check_operator(self, x):
        x = as_matrix(x)
        assert x.shape == (
            self.dimension,
            self.dimension,
        ), f'Expected a {self.dimension} x {self.dimension} operator, got {x.shape}'
        return x


def build_W(n, context):
    """
    W_n as an Operator after checking unitarity and its trace.
    Args:
        n: Index < M_{2N}
        context: FactorContext

    Returns:
        Operator
    """
    context.doubled.check_index(n)
    matrix = context.basis[n]
    residual = operator_norm(matrix @ adjoint(matrix) - np.eye(context.dimension))
    assert residual <= UNITARY_TOLERANCE, f'W_{n} is not unitary, residual {residual}'
    return Operator(matrix)


def structure_constants(m, n, context, tolerance=TOLERANCE):
    """
    omega with W_m W_n = omega W_{m + n} (digitwise sum in 2m) and u with
    W_n* = u W_{-n}.
    Args:
        m: Index < M_{2N}
        n: Index < M_{2N}
        context: FactorContext
        tolerance: Scalar deviation tolerance.

    Returns:
        (omega, u)
    """
    doubled, basis = context.doubled, context.basis
    target = doubled.triangle_add(m, n)
    product = basis[m] @ basis[n]
    omega = complex(normalized_trace(adjoint(basis[target]) @ product))
    residual = float(operator_norm(product - omega * basis[target]))
    assert residual <= tolerance, f'W_{m} W_{n} is not a multiple of W_{target}'
    negated = doubled.negate(n)
    star = adjoint(basis[n])
    u = complex(normalized_trace(adjoint(basis[negated]) @ star))
    residual = float(operator_norm(star - u * basis[negated]))
    assert residual <= tolerance, f'W_{n}* is not a multiple of W_{negated}'
    assert abs(abs(omega) - 1) <= UNITARY_TOLERANCE, f'|omega_{m},{n}| = {abs(omega)}'
    assert abs(abs(u) - 1) <= UNITARY_TOLERANCE, f'|u_{n}| = {abs(u)}'
    return omega, u


def nc_coefficients(x, context):
    """
    x^(k) = tau(x W_k*) for every k < M_{2N}.
    """
    x = context.check_operator(x)
    return np.einsum('kij,ij->k', np.conj(context.basis), x) / context.dimension


def nc_fourier(x, k, context):
    context.doubled.check_index(k)
    return complex(normalized_trace(context.check_operator(x) @ adjoint(context.basis[k])))


def nc_synthesize(coefficients, context):
    return np.einsum('k,kij->ij', coefficients, context.basis)


def nc_multiplier(x, weights, context):
    return nc_synthesize(np.asarray(weights) * nc_coefficients(x, context), context)


def nc_partial_sum(x, n, context):
    assert 0 <= n <= context.size, f'Partial sum index {n} not representable'
    return Operator(nc_multiplier(x, multiplier('dirichlet', n, context.size), context))


def nc_cesaro(x, n, context):
    """
    sigma_n^R(x) = sum_{k < n} (1 - k / n) x^(k) W_k
    Args:
        x: Operator in R_N
        n: Index in [1, M_{2N}]
        context: FactorContext

    Returns:
        Operator
    """
    assert 1 <= n <= context.size, f'Cesaro index {n} not representable'
    return Operator(nc_multiplier(x, multiplier('fejer', n, context.size), context))


def factor_cond_exp(x, k, context):
    """
    E_k(x) onto R_k: normalized partial trace over the factors k .. N - 1,
    tensored back with the identity.
    Args:
        x: Operator in R_N
        k: Level in [0, N]
        context: FactorContext

    Returns:
        Operator
    """
    radix = context.radix
    assert 0 <= k <= radix.depth, f'Level {k} outside [0, {radix.depth}]'
    x = context.check_operator(x)
    kept, traced = radix.cumulative[k], radix.size // radix.cumulative[k]
    blocks = x.reshape(kept, traced, kept, traced)
    reduced = np.einsum('ajbj->ab', blocks) / traced
    return Operator(np.kron(reduced, np.eye(traced)))


def factor_differences(x, context, levels=None):
    """
    dx_1 = E_{l_1}(x), dx_i = E_{l_i}(x) - E_{l_{i-1}}(x) over levels 1 .. N
    by default.
    """
    levels = list(levels or range(1, context.radix.depth + 1))
    expectations = [as_matrix(factor_cond_exp(x, level, context)) for level in levels]
    return [expectations[0]] + [
        current - previous for previous, current in zip(expectations, expectations[1:])
    ]


def factor_hardy_norm(x, p=1, context=None, flavor='column', levels=None):
    """
    ||(sum_k |dx_k|^2)^(1/2)||_p in R_N.
    Args:
        x: Operator in R_N
        p: Exponent in [1, 2]
        context: FactorContext
        flavor: 'column' or 'row'
        levels: Increasing filtration levels, defaults to 1 .. N.

    Returns:
        float
    """
    assert context is not None, 'factor_hardy_norm requires a FactorContext'
    assert 1 <= p <= 2, f'Hardy norms are supported for p in [1, 2], got {p}'
    differences = np.stack(factor_differences(x, context, levels))[:, None]
    square = psd_sqrt(square_sum(differences, flavor))
    return lp_from_singular_values(singular_values(square), p)


def is_pauli_string(matrix, tolerance=UNITARY_TOLERANCE):
    """
    True if a 2^N x 2^N matrix is a tensor product of I, Z, X and ZX factors.
    """
    matrix = as_matrix(matrix)
    depth = int(round(np.log2(matrix.shape[0])))
    z, x = clock(2), shift(2)
    letters = [np.eye(2), z, x, z @ x]
    for word in np.ndindex(*(4,) * depth):
        candidate = reduce(np.kron, [letters[i] for i in word], np.eye(1))
        if np.max(np.abs(candidate - matrix)) <= tolerance:
            return True
    return False
