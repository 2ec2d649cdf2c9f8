import json
from dataclasses import dataclass, field

import numpy as np
import pyarrow as pa
import pyarrow.parquet as pq

from vilenkinlab.algebra.matrix import (
    TOLERANCE,
    Operator,
    Projection,
    adjoint,
    as_matrix,
    from_spectrum,
    lp_from_singular_values,
    min_eigenvalue,
    normalized_trace,
    operator_norm,
    projection_meet,
    projection_residual,
    psd_pinv,
    psd_sqrt,
    singular_values,
    symmetrize,
)
from vilenkinlab.algebra.vilenkin import RadixSequence, multiplier

FIELD_TOLERANCE = 1e-10
LAMBDA_LEVELS = 64
LAMBDA_SPAN = 1e-4


class OperatorField:
    """
    Element of L_inf(G) (x) M at finite depth: one d x d operator per group
    point, with trace phi(f) = mean over points of tau(f(t)).
    """

    def __init__(self, radix, values):
        """
        Validate and freeze values.
        Args:
            radix: RadixSequence
            values: Array-like of shape (M_N, d, d)
        """
        values = np.array(values, dtype=complex)
        assert values.ndim == 3 and values.shape[1] == values.shape[2], (
            f'Expected values of shape (points, d, d), got {values.shape}'
        )
        assert (
            values.shape[0] == radix.size
        ), f'Expected {radix.size} points for radix {radix.digits}, got {values.shape[0]}'
        assert np.isfinite(values).all(), 'Field values must be finite'
        values.setflags(write=False)
        self.radix = radix
        self.values = values
        self.fiber_dim = values.shape[1]

    @classmethod
    def constant(cls, radix, operator):
        operator = as_matrix(operator)
        return cls(radix, np.broadcast_to(operator, (radix.size, *operator.shape)))

    @classmethod
    def identity(cls, radix, fiber_dim):
        return cls.constant(radix, np.eye(fiber_dim))

    @classmethod
    def zeros(cls, radix, fiber_dim):
        return cls.constant(radix, np.zeros((fiber_dim, fiber_dim)))

    @classmethod
    def lift(cls, operator):
        """
        A single operator as a field on the depth 0 group.
        """
        return cls.constant(RadixSequence(()), operator)

    @classmethod
    def from_scalar(cls, radix, scalar, operator):
        """
        scalar (x) operator for a scalar function given per point.
        """
        scalar = np.asarray(scalar, dtype=complex)
        return cls(radix, scalar[:, None, None] * as_matrix(operator))

    def __array__(self, dtype=None, copy=None):
        if dtype is not None:
            return self.values.astype(dtype)
        return self.values

    def __repr__(self):
        return f'OperatorField(radix={self.radix.digits}, fiber_dim={self.fiber_dim})'

    def new(self, values):
        return OperatorField(self.radix, values)

    def check_compatible(self, other):
        assert isinstance(other, OperatorField), f'Expected a field, got {other!r}'
        assert (
            self.radix == other.radix and self.fiber_dim == other.fiber_dim
        ), f'Incompatible fields {self} and {other}'

    def __add__(self, other):
        self.check_compatible(other)
        return self.new(self.values + other.values)

    def __sub__(self, other):
        self.check_compatible(other)
        return self.new(self.values - other.values)

    def __matmul__(self, other):
        if isinstance(other, OperatorField):
            self.check_compatible(other)
            return self.new(self.values @ other.values)
        return self.new(self.values @ as_matrix(other))

    def __rmatmul__(self, other):
        return self.new(as_matrix(other) @ self.values)

    def __mul__(self, scalar):
        return self.new(self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self.new(-self.values)

    def adjoint(self):
        return self.new(adjoint(self.values))

    def masked(self, mask):
        """
        f chi_A for a boolean mask over points.
        """
        return self.new(self.values * np.asarray(mask)[:, None, None])

    def trace(self):
        return complex(np.mean(normalized_trace(self.values)))

    def norm(self, p=2, weak=False):
        """
        ||f||_p in L_p(N), every singular value of every fiber weighted equally.
        """
        return lp_from_singular_values(singular_values(self.values), p, weak)

    def sup_norm(self):
        return float(np.max(operator_norm(self.values)))

    def min_eigenvalue(self, tolerance=TOLERANCE):
        return float(np.min(min_eigenvalue(self.values, tolerance)))

    def is_positive(self, tolerance=TOLERANCE):
        return self.min_eigenvalue() >= -tolerance

    def allclose(self, other, tolerance=TOLERANCE):
        return float(np.max(operator_norm(self.values - as_matrix(other)))) <= tolerance

    def cube_representatives(self, level):
        """
        Value at the first point of every level cube, shape (M_level, d, d).
        """
        return self.values[:: self.radix.cube_size(level)]

    def is_measurable(self, level, tolerance=FIELD_TOLERANCE):
        blocks = self.values.reshape(
            self.radix.cumulative[level], -1, self.fiber_dim, self.fiber_dim
        )
        return float(np.max(np.abs(blocks - blocks[:, :1]), initial=0.0)) <= tolerance

    def save(self, path):
        """
        Write to .parquet with one row per entry and the radix in the metadata.
        Args:
            path: Path to .parquet file.

        Returns:
            None
        """
        points, rows, cols = np.indices(self.values.shape).reshape(3, -1)
        table = pa.Table.from_pydict(
            {
                'point': points,
                'row': rows,
                'col': cols,
                'real': self.values.real.ravel(),
                'imag': self.values.imag.ravel(),
            }
        )
        metadata = {
            'radix': json.dumps(list(self.radix.digits)),
            'depth': str(self.radix.depth),
            'fiber_dim': str(self.fiber_dim),
        }
        pq.write_table(table.replace_schema_metadata(metadata), path)

    @classmethod
    def load(cls, path):
        table = pq.read_table(path)
        metadata = {
            key.decode(): value.decode() for key, value in table.schema.metadata.items()
        }
        radix = RadixSequence(json.loads(metadata['radix']))
        assert radix.depth == int(metadata['depth']), f'Corrupt depth in {path}'
        fiber_dim = int(metadata['fiber_dim'])
        frame = table.to_pandas()
        values = np.zeros((radix.size, fiber_dim, fiber_dim), dtype=complex)
        values[tuple(frame[column].to_numpy() for column in ('point', 'row', 'col'))] = (
            frame['real'].to_numpy() + 1j * frame['imag'].to_numpy()
        )
        return cls(radix, values)


def fourier_coefficients(f, system):
    """
    f^(n) = integral of f(t) conj(psi_n(t)) for every n < M_N.
    Args:
        f: OperatorField
        system: VilenkinLikeSystem

    Returns:
        numpy array of shape (M_N, d, d)
    """
    psi = system.table(f.radix)
    return np.einsum('np,pij->nij', np.conj(psi), f.values) / f.radix.size


def fourier_coeff(f, n, system):
    f.radix.check_index(n)
    psi = system.table(f.radix)[n]
    return Operator(np.einsum('p,pij->ij', np.conj(psi), f.values) / f.radix.size)


def synthesize(coefficients, radix, system):
    """
    sum_n c_n psi_n for coefficients of shape (M_N, d, d).
    """
    psi = system.table(radix)
    return OperatorField(radix, np.einsum('np,nij->pij', psi, coefficients))


def apply_multiplier(f, weights, system):
    """
    sum_n w_n f^(n) psi_n.
    """
    coefficients = fourier_coefficients(f, system)
    return synthesize(
        np.asarray(weights)[:, None, None] * coefficients, f.radix, system
    )


def kernel_operator(f, table):
    """
    eta -> integral of table(eta, t) f(t) over t.
    Args:
        f: OperatorField
        table: Array-like of shape (M_N, M_N), rows are eta.

    Returns:
        OperatorField
    """
    return f.new(np.einsum('et,tij->eij', np.asarray(table), f.values) / f.radix.size)


def partial_sum(f, n, system):
    assert 0 <= n <= f.radix.size, f'Partial sum index {n} not representable'
    return apply_multiplier(f, multiplier('dirichlet', n, f.radix.size), system)


def cesaro(f, n, system, verify=False, bank=None):
    """
    sigma_n(f) in multiplier form, optionally cross-checked against the kernel
    integral with K_n.
    Args:
        f: OperatorField
        n: Index in [1, M_N]
        system: VilenkinLikeSystem
        verify: If True, the kernel form must agree within 1e-9.
        bank: KernelBank reused for the cross-check.

    Returns:
        OperatorField
    """
    assert 1 <= n <= f.radix.size, f'Cesaro index {n} not representable'
    result = apply_multiplier(f, multiplier('fejer', n, f.radix.size), system)
    if verify:
        assert bank is not None, 'Kernel cross-check requires a KernelBank'
        reference = kernel_operator(f, bank.fejer(n))
        gap = float(np.max(operator_norm(result.values - reference.values)))
        assert gap <= TOLERANCE * max(1.0, f.sup_norm()), (
            f'Multiplier and kernel forms of sigma_{n} differ by {gap}'
        )
    return result


def cond_exp(f, k):
    """
    E_k(f), the average of f over each cube of level k.
    """
    radix = f.radix
    assert 0 <= k <= radix.depth, f'Level {k} outside [0, {radix.depth}]'
    blocks = f.values.reshape(radix.cumulative[k], -1, f.fiber_dim, f.fiber_dim)
    return f.new(np.repeat(blocks.mean(axis=1), radix.cube_size(k), axis=0))


def default_levels(radix):
    return list(range(1, radix.depth + 1))


def martingale_differences(f, levels=None):
    """
    df_1 = E_{l_1}(f), df_i = E_{l_i}(f) - E_{l_{i-1}}(f).
    Args:
        f: OperatorField
        levels: Increasing filtration levels, defaults to 1 .. N.

    Returns:
        list of OperatorField
    """
    levels = list(levels or default_levels(f.radix))
    assert levels == sorted(set(levels)), f'Levels must increase, got {levels}'
    expectations = [cond_exp(f, level) for level in levels]
    return [expectations[0]] + [
        current - previous for previous, current in zip(expectations, expectations[1:])
    ]


def check_flavor(flavor):
    assert flavor in ('column', 'row'), f'Unknown flavor `{flavor}`'


def square_sum(values, flavor='column'):
    """
    sum_k x_k* x_k (column) or sum_k x_k x_k* (row) over the first axis.
    """
    check_flavor(flavor)
    values = as_matrix(values)
    if flavor == 'column':
        return symmetrize(np.einsum('kpji,kpjl->pil', np.conj(values), values))
    return symmetrize(np.einsum('kpij,kplj->pil', values, np.conj(values)))


def stack(xs):
    """
    Sequence of fields or operators as an array of shape (n, P, d, d).
    """
    arrays = [as_matrix(getattr(x, 'values', x)) for x in xs]
    assert arrays, 'Empty sequence'
    arrays = [array[None] if array.ndim == 2 else array for array in arrays]
    assert len({array.shape for array in arrays}) == 1, 'Sequence shapes differ'
    return np.stack(arrays)


def square_function(f, levels=None, flavor='column'):
    differences = martingale_differences(f, levels)
    return f.new(psd_sqrt(square_sum(stack(differences), flavor)))


def hardy_norm(f, p=1, flavor='column', levels=None):
    """
    ||S_c(f)||_p (column) or ||S_r(f)||_p (row).
    Args:
        f: OperatorField
        p: Exponent in [1, 2]
        flavor: 'column' or 'row'
        levels: Increasing filtration levels, defaults to 1 .. N.

    Returns:
        float
    """
    assert 1 <= p <= 2, f'Hardy norms are supported for p in [1, 2], got {p}'
    return square_function(f, levels, flavor).norm(p)


def seq_l2c_norm(xs, p, flavor='column'):
    """
    ||(sum |x_k|^2)^(1/2)||_p, the L_p(l_2^c) norm of a finite sequence.
    Args:
        xs: Sequence of OperatorField, Operator or arrays of equal shape.
        p: Exponent >= 1.
        flavor: 'column' or 'row'

    Returns:
        float
    """
    total = square_sum(stack(xs), flavor)
    return lp_from_singular_values(singular_values(psd_sqrt(total)), p)


def check_positive(f, tolerance=TOLERANCE):
    residual = f.min_eigenvalue()
    assert residual >= -tolerance, (
        f'Expected a positive field, got min eigenvalue {residual}'
    )


def tilde_sigma(f, n, bank):
    """
    sigma~_n(f)(eta) = integral of K~_n(eta, t) f(t), for positive f.
    Args:
        f: Positive OperatorField
        n: Level in [0, N)
        bank: KernelBank of the same radix.

    Returns:
        OperatorField
    """
    check_positive(f)
    return kernel_operator(f, bank.sup(n))


def sigma_plus(f, n, bank):
    """
    Integral against |K_n|.
    """
    return kernel_operator(f, np.abs(bank.fejer(n)))


def domination_residual(f, n, bank, system):
    """
    Smallest eigenvalue of sigma~_n(f) -+ Re sigma_l(f) over M_n <= l < M_{n+1},
    nonnegative iff -sigma~_n(f) <= Re sigma_l(f) <= sigma~_n(f).
    """
    upper = tilde_sigma(f, n, bank).values
    residual = np.inf
    radix = f.radix
    for l in range(max(1, radix.cumulative[n]), radix.cumulative[n + 1]):
        mean = cesaro(f, l, system).values
        real = (mean + adjoint(mean)) / 2
        residual = min(
            residual,
            float(np.min(min_eigenvalue(upper - real))),
            float(np.min(min_eigenvalue(upper + real))),
        )
    return residual


def regularity_residual(f):
    """
    min over k of the smallest eigenvalue of R E_{k-1}(f) - E_k(f) with
    R = max_k m_k, nonnegative iff the filtration is regular on f.
    """
    check_positive(f)
    ratio = f.radix.max_digit
    return min(
        (cond_exp(f, k - 1) * ratio - cond_exp(f, k)).min_eigenvalue()
        for k in range(1, f.radix.depth + 1)
    )


@dataclass
class VectorNormCertificate:
    """
    Witnessed upper bound for a vector valued norm of a finite sequence.
    """

    flavor: str
    length: int
    value: float
    passed: bool = True
    witness: dict = field(default_factory=dict)
    failure: dict = None
    upper_bound: float = None
    lower_bound: float = None

    @property
    def gap(self):
        if self.upper_bound is None or self.lower_bound is None:
            return None
        return self.upper_bound - self.lower_bound


def projection_trace(e):
    return float(np.real(np.mean(normalized_trace(e))))


def compressed_norms(values, e, flavor):
    if flavor == 'two-sided':
        compressed = e @ values @ e
    elif flavor == 'column':
        compressed = values @ e
    else:
        compressed = e @ values
    return operator_norm(compressed).reshape(len(values), -1).max(axis=1)


def lambda_certificate(xs, e, t, p, flavor='two-sided', tolerance=TOLERANCE):
    """
    Verify ||e x_n e|| <= t (two-sided), ||x_n e|| <= t (column) or
    ||e x_n|| <= t (row) for every n and certify t phi(1 - e)^(1/p).
    Args:
        xs: Sequence of OperatorField, Operator or arrays of equal shape.
        e: Projection or array of projections matching one element of xs.
        t: Level >= 0.
        p: Exponent >= 1.
        flavor: 'two-sided', 'column' or 'row'
        tolerance: Verification tolerance.

    Returns:
        VectorNormCertificate, failed with the first violating index if any.
    """
    assert flavor in ('two-sided', 'column', 'row'), f'Unknown flavor `{flavor}`'
    assert p >= 1, f'Expected p >= 1, got {p}'
    values = stack(xs)
    e = as_matrix(e)
    e = e[None] if e.ndim == 2 else e
    assert (
        projection_residual(e) <= tolerance
    ), f'Witness is not a projection, residual {projection_residual(e)}'
    norms = compressed_norms(values, e, flavor)
    tail = max(0.0, 1 - projection_trace(e))
    certificate = VectorNormCertificate(
        flavor,
        len(values),
        t * tail ** (1 / p),
        witness={'projection': e, 'level': t},
    )
    violations = np.flatnonzero(norms > t + tolerance)
    if violations.size:
        index = int(violations[0])
        certificate.passed = False
        certificate.failure = {'index': index, 'residual': float(norms[index] - t)}
    return certificate


def is_positive_sequence(values, tolerance=TOLERANCE):
    scale = max(1.0, float(np.max(operator_norm(values), initial=0.0)))
    if np.max(operator_norm(values - adjoint(values)), initial=0.0) > tolerance * scale:
        return False
    hermitian = (values + adjoint(values)) / 2
    return np.min(np.linalg.eigvalsh(hermitian), initial=0.0) >= -tolerance * scale


def sublevel_projection(x, level, width):
    """
    chi_[0, level](x) for self-adjoint x, eigenvalues up to level + width kept.
    """
    values, vectors = np.linalg.eigh((x + adjoint(x)) / 2)
    return from_spectrum((values <= level + width).astype(float), vectors)


def lambda_candidates(values, t, flavor, tolerance=TOLERANCE):
    """
    Projections e satisfying the Lambda condition at level t: the meet of the
    sublevel projections of each |x_n|^2 and the sublevel projection of
    sum |x_n|^2, plus the meet of chi_[0, t](x_n) for positive sequences.
    """
    squares = (
        adjoint(values) @ values if flavor != 'row' else values @ adjoint(values)
    )
    projections = sublevel_projection(squares, t**2, tolerance * t)
    meet = projections[0]
    for projection in projections[1:]:
        meet = projection_meet(meet, projection)
    candidates = [meet, sublevel_projection(squares.sum(axis=0), t**2, tolerance * t)]
    if flavor == 'two-sided' and is_positive_sequence(values, tolerance):
        sublevels = sublevel_projection(values, t, tolerance)
        positive_meet = sublevels[0]
        for projection in sublevels[1:]:
            positive_meet = projection_meet(positive_meet, projection)
        candidates.append(positive_meet)
    return candidates


def search_lambda_certificate(xs, p, flavor='two-sided', levels=LAMBDA_LEVELS):
    """
    Best Lambda_{p, inf} certificates over log spaced levels up to
    t_max = max_n ||x_n||_inf. The value is the largest certified
    t phi(1 - e_t)^(1/p) on the grid, the upper bound covers every t > 0
    (between grid levels the next level's witness is used), and the lower
    bound is sup_n ||x_n||_{p, inf}.
    Args:
        xs: Sequence of OperatorField, Operator or arrays of equal shape.
        p: Exponent >= 1.
        flavor: 'two-sided', 'column' or 'row'
        levels: Grid size.

    Returns:
        VectorNormCertificate
    """
    values = stack(xs)
    lower = max(
        lp_from_singular_values(singular_values(value), p, weak=True)
        for value in values
    )
    t_max = float(np.max(operator_norm(values), initial=0.0))
    identity = np.broadcast_to(np.eye(values.shape[-1]), values.shape[1:])
    if t_max <= TOLERANCE:
        certificate = lambda_certificate(values, identity, 0.0, p, flavor)
        certificate.upper_bound, certificate.lower_bound = 0.0, lower
        return certificate
    grid = t_max * np.geomspace(LAMBDA_SPAN, 1, levels)
    best, tails = None, []
    for t in grid:
        candidates = [
            lambda_certificate(values, candidate, t, p, flavor)
            for candidate in lambda_candidates(values, t, flavor)
        ]
        passing = [candidate for candidate in candidates if candidate.passed]
        assert passing, f'No valid Lambda witness at level {t}'
        chosen = min(passing, key=lambda candidate: candidate.value)
        tails.append(chosen.value / t)
        if best is None or chosen.value > best.value:
            best = chosen
    upper = max(
        [grid[0]] + [grid[i + 1] * tails[i] for i in range(levels - 1)]
    )
    best.upper_bound, best.lower_bound = float(max(upper, best.value)), lower
    return best


def majorant_certificate(xs, a, p, tolerance=TOLERANCE):
    """
    Verify -a <= x_n <= a for a self-adjoint sequence and certify ||a||_p
    as an upper bound of its L_p(l_inf) norm.
    Args:
        xs: Sequence of self-adjoint fields, operators or arrays.
        a: Majorant of the same shape as one element.
        p: Exponent >= 1.
        tolerance: Order tolerance.

    Returns:
        VectorNormCertificate
    """
    values = stack(xs)
    a = as_matrix(getattr(a, 'values', a))
    a = a[None] if a.ndim == 2 else a
    certificate = VectorNormCertificate(
        'majorant',
        len(values),
        lp_from_singular_values(singular_values(a), p),
        witness={'majorant': a},
    )
    for index, value in enumerate(values):
        residual = min(
            float(np.min(min_eigenvalue(a - value))),
            float(np.min(min_eigenvalue(a + value))),
        )
        if residual < -tolerance:
            certificate.passed = False
            certificate.failure = {'index': index, 'residual': residual}
            break
    return certificate


@dataclass
class SimpleAtom:
    """
    Mean zero field a = a e with e = e_Q chi_Q and ||a||_2 <= phi(e)^(-1/2).
    """

    a: OperatorField
    level: int
    cube: int
    projection: Projection

    @property
    def support(self):
        return self.a.radix.cubes(self.level) == self.cube

    @property
    def weight(self):
        """
        phi(e) = |Q| tau(e_Q)
        """
        return self.projection.trace().real / self.a.radix.cumulative[self.level]

    def residuals(self):
        values = self.a.values
        outside = values[~self.support]
        complement = np.eye(self.a.fiber_dim) - as_matrix(self.projection)
        return {
            'support': float(
                max(
                    np.max(operator_norm(values @ complement), initial=0.0),
                    np.max(operator_norm(outside), initial=0.0),
                )
            ),
            'mean': cond_exp(self.a, self.level).sup_norm(),
            'size': self.a.norm(2) - self.weight ** (-1 / 2),
            'l1': self.a.norm(1) - 1,
        }


def make_simple_atom(radix, fiber_dim, k, cube, projection, seed=None):
    """
    Random simple atom on the level k cube `cube`, saturating the L_2 size.
    Args:
        radix: RadixSequence
        fiber_dim: d
        k: Level in [0, N)
        cube: Cube id at level k.
        projection: Nonzero fiber Projection e_Q.
        seed: Random seed.

    Returns:
        SimpleAtom
    """
    assert k < radix.depth, f'Level {k} has no refinement at depth {radix.depth}'
    assert 0 <= cube < radix.cumulative[k], f'Cube {cube} not in level {k}'
    projection = Projection(projection)
    assert projection.trace().real > TOLERANCE, 'Atom projection must be nonzero'
    rng = np.random.default_rng(seed)
    shape = (radix.size, fiber_dim, fiber_dim)
    values = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    values = values * (radix.cubes(k) == cube)[:, None, None] @ as_matrix(projection)
    candidate = OperatorField(radix, values)
    candidate = candidate - cond_exp(candidate, k).masked(radix.cubes(k) == cube)
    atom = SimpleAtom(candidate, k, cube, projection)
    scale = atom.weight ** (-1 / 2) / candidate.norm(2)
    anchor = normalized_trace(candidate.values[atom.support][0])
    if abs(anchor) > TOLERANCE:
        scale *= np.conj(anchor) / abs(anchor)
    atom = SimpleAtom(candidate * scale, k, cube, projection)
    residuals = atom.residuals()
    assert residuals['support'] <= FIELD_TOLERANCE, f'Atom support violated {residuals}'
    assert residuals['mean'] <= FIELD_TOLERANCE, f'Atom mean violated {residuals}'
    assert residuals['size'] <= FIELD_TOLERANCE, f'Atom size violated {residuals}'
    assert residuals['l1'] <= FIELD_TOLERANCE, f'Atom L_1 bound violated {residuals}'
    return atom


def bilinear_factorization(a, b, threshold=1e-10, tolerance=1e-8):
    """
    Factor integral of a* b as A u B with A = (integral a* a)^(1/2),
    B = (integral b* b)^(1/2) and ||u|| <= 1.
    Args:
        a: OperatorField
        b: OperatorField
        threshold: Pseudo-inverse cutoff.
        tolerance: Reconstruction and contraction tolerance.

    Returns:
        (A, u, B) as Operators.
    """
    a.check_compatible(b)
    mixed = np.mean(adjoint(a.values) @ b.values, axis=0)
    left = psd_sqrt(np.mean(adjoint(a.values) @ a.values, axis=0))
    right = psd_sqrt(np.mean(adjoint(b.values) @ b.values, axis=0))
    contraction = psd_pinv(left, threshold) @ mixed @ psd_pinv(right, threshold)
    residual = float(operator_norm(left @ contraction @ right - mixed))
    assert residual <= tolerance, f'Bilinear reconstruction residual {residual}'
    size = float(operator_norm(contraction))
    assert size <= 1 + tolerance, f'Factor u has norm {size} > 1'
    return Operator(left), Operator(contraction), Operator(right)
