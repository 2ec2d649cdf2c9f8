from abc import ABC
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from vilenkinlab.algebra.reports import BoundReport

SYSTEM_TOLERANCE = 1e-10
KERNEL_TOLERANCE = 1e-9


class RadixSequence:
    """
    Finite radix m = (m_0, ..., m_{N-1}) of a truncated Vilenkin group with
    cumulative products M_0 = 1, M_{k+1} = m_k M_k.

    Indices n < M_N are written n = sum_k n_k M_k (n_0 least significant).
    Group points t = (t_0, ..., t_{N-1}) are enumerated lexicographically with
    t_0 most significant, so every cube of level k (points agreeing on the
    first k coordinates) is a contiguous block of M_N / M_k points.
    """

    def __init__(self, digits):
        """
        Args:
            digits: Iterable of integers, each >= 2.
        """
        digits = tuple(int(digit) for digit in digits)
        assert all(
            digit >= 2 for digit in digits
        ), f'Every radix digit must be >= 2, got {digits}'
        self.digits = digits
        self.depth = len(digits)
        cumulative = [1]
        for digit in digits:
            cumulative.append(cumulative[-1] * digit)
        self.cumulative = tuple(cumulative)
        self.size = cumulative[-1]
        self.max_digit = max(digits, default=1)

    @classmethod
    def cycled(cls, pattern, depth):
        """
        Repeat or truncate `pattern` to `depth` digits.
        Args:
            pattern: Nonempty iterable of digits.
            depth: Number of digits in the result.

        Returns:
            RadixSequence
        """
        pattern = tuple(pattern)
        assert pattern, 'Empty radix pattern'
        return cls(pattern[i % len(pattern)] for i in range(depth))

    def __eq__(self, other):
        return isinstance(other, RadixSequence) and self.digits == other.digits

    def __hash__(self):
        return hash(self.digits)

    def __repr__(self):
        return f'RadixSequence({self.digits})'

    def truncated(self, depth):
        return RadixSequence(self.digits[:depth])

    def doubled(self):
        """
        Radix 2m with (2m)_{2k} = (2m)_{2k+1} = m_k.
        """
        return RadixSequence(digit for digit in self.digits for _ in range(2))

    def check_index(self, n):
        assert 0 <= n < self.size, f'Index {n} outside [0, {self.size})'

    def to_digits(self, n):
        """
        Mixed radix digits of n, least significant first.
        Args:
            n: Index in [0, M_N)

        Returns:
            tuple of N digits.
        """
        self.check_index(n)
        digits = []
        for digit in self.digits:
            n, remainder = divmod(n, digit)
            digits.append(remainder)
        return tuple(digits)

    def from_digits(self, digits):
        assert len(digits) == self.depth, f'Expected {self.depth} digits'
        assert all(
            0 <= value < digit for value, digit in zip(digits, self.digits)
        ), f'Digits {digits} out of range for radix {self.digits}'
        return sum(value * weight for value, weight in zip(digits, self.cumulative))

    def upper(self, n, k):
        """
        n^(k), n with the digits below k set to 0.
        """
        return n - n % self.cumulative[min(k, self.depth)]

    def triangle_add(self, a, b):
        return self.from_digits(
            [
                (x + y) % digit
                for x, y, digit in zip(self.to_digits(a), self.to_digits(b), self.digits)
            ]
        )

    def negate(self, n):
        return self.from_digits(
            [(digit - x) % digit for x, digit in zip(self.to_digits(n), self.digits)]
        )

    def group_add(self, s, t):
        """
        Coordinatewise addition of group points.
        """
        return tuple((x + y) % digit for x, y, digit in zip(s, t, self.digits))

    def index_digits(self):
        """
        Digits of every index, shape (M_N, N), least significant first.
        """
        if not self.depth:
            return np.zeros((1, 0), dtype=int)
        return np.stack(
            np.unravel_index(np.arange(self.size), self.digits, order='F'), axis=1
        )

    def points(self):
        """
        Coordinates of every group point in enumeration order, shape (M_N, N).
        """
        if not self.depth:
            return np.zeros((1, 0), dtype=int)
        return np.stack(np.unravel_index(np.arange(self.size), self.digits), axis=1)

    def point_index(self, coords):
        if not self.depth:
            return 0
        return int(np.ravel_multi_index(tuple(coords), self.digits))

    def cube_size(self, level):
        return self.size // self.cumulative[level]

    def cubes(self, level):
        """
        Cube id of every point at the given level, shape (M_N,).
        """
        assert 0 <= level <= self.depth, f'Level {level} outside [0, {self.depth}]'
        return np.arange(self.size) // self.cube_size(level)

    def cube_of(self, coords, level):
        """
        Id of the level cube containing the point with the given coordinates.
        """
        return self.point_index(coords) // self.cube_size(level)

    def block(self, n):
        """
        The k with M_{k-1} <= n < M_k, 0 for n = 0.
        """
        self.check_index(n)
        return next(k for k, weight in enumerate(self.cumulative) if n < weight)


class VilenkinLikeSystem(ABC):
    """
    Provider of generating functions r_k^n whose products psi_n form a
    Vilenkin-like system.
    """

    name = None

    def __init__(self):
        self.tables = {}

    def generator(self, k, n, points, radix):
        """
        Evaluate r_k^n at the given points.
        Args:
            k: Generator level.
            n: Index in [0, M_N)
            points: Array of coordinates, shape (P, N)
            radix: RadixSequence

        Returns:
            Complex numpy array of shape (P,)
        """
        raise NotImplementedError(
            f'generator() should be implemented by {self.__class__.__name__} subclasses'
        )

    def build_table(self, radix):
        points = radix.points()
        table = np.ones((radix.size, radix.size), dtype=complex)
        for n in range(1, radix.size):
            for k in range(radix.depth):
                table[n] *= self.generator(k, radix.upper(n, k), points, radix)
        return table

    def table(self, radix):
        """
        psi_n(t) for every index n and point t, cached per radix.
        Args:
            radix: RadixSequence

        Returns:
            Read-only complex array of shape (M_N, M_N), rows are indices.
        """
        if radix not in self.tables:
            table = self.build_table(radix)
            table.setflags(write=False)
            self.tables[radix] = table
        return self.tables[radix]

    def psi(self, n, radix):
        radix.check_index(n)
        return self.table(radix)[n]

    def __repr__(self):
        return f'{self.__class__.__name__}()'


class CharacterSystem(VilenkinLikeSystem):
    """
    Unimodular systems r_k^n(t) = exp(2 pi i n_k phase_k(t)).
    """

    def phases(self, points, radix):
        raise NotImplementedError(
            f'phases() should be implemented by {self.__class__.__name__} subclasses'
        )

    def generator(self, k, n, points, radix):
        digit = radix.to_digits(n)[k]
        return np.exp(2j * np.pi * digit * self.phases(points, radix)[:, k])

    def build_table(self, radix):
        exponents = radix.index_digits() @ self.phases(radix.points(), radix).T
        return np.exp(2j * np.pi * exponents)


class VilenkinCharacters(CharacterSystem):
    """
    Characters of the Vilenkin group, phase_k(t) = t_k / m_k.
    """

    name = 'vilenkin-characters'

    def phases(self, points, radix):
        return points / np.array(radix.digits, dtype=float)


class AdicCharacters(CharacterSystem):
    """
    Characters of the m-adic integers,
    phase_k(t) = t_k / m_k + t_{k-1} / (m_k m_{k-1}) + ... + t_0 / (m_k ... m_0).
    """

    name = 'm-adic'

    def phases(self, points, radix):
        phases = np.zeros(points.shape, dtype=float)
        for k in range(radix.depth):
            divisor = 1
            for j in range(k, -1, -1):
                divisor *= radix.digits[j]
                phases[:, k] += points[:, j] / divisor
        return phases


@dataclass
class AssumptionReport:
    """
    Outcome of an exhaustive check of the generating function axioms.
    """

    system: str
    radix: tuple
    passed: bool
    delta_max: float
    residuals: dict = field(default_factory=dict)
    failure: dict = None


def cube_average(values, radix, level):
    """
    Conditional expectation of scalar values on level cubes, broadcast back.
    Args:
        values: Array of shape (..., M_N)
        radix: RadixSequence
        level: Cube level.

    Returns:
        Array of the same shape as values.
    """
    blocks = values.reshape(*values.shape[:-1], radix.cumulative[level], -1)
    return np.repeat(blocks.mean(axis=-1), radix.cube_size(level), axis=-1)


def validate_system(system, radix, tolerance=SYSTEM_TOLERANCE):
    """
    Check the generating function axioms exhaustively below M_N: r_k^0 = 1 and
    level k + 1 measurability, the pointwise normalization over j of
    |r_k^{j M_k + n}|^2, the conditional orthogonality at level k, and the sup
    bound giving delta. The first violation in that order is reported.
    Args:
        system: VilenkinLikeSystem
        radix: RadixSequence with depth >= 1
        tolerance: Residual tolerance.

    Returns:
        AssumptionReport
    """
    assert radix.depth >= 1, 'validate_system requires depth >= 1'
    points = radix.points()
    values = np.array(
        [
            [system.generator(k, n, points, radix) for n in range(radix.size)]
            for k in range(radix.depth)
        ]
    )
    violations, residuals = [], {}

    def record(check, residual, **where):
        residuals[check] = max(residuals.get(check, 0.0), residual)
        if residual > tolerance:
            violations.append({'check': check, 'residual': residual, **where})

    for k in range(radix.depth):
        record('normalized', float(np.max(np.abs(values[k, 0] - 1))), k=k, n=0)
        coarse = values[k].reshape(radix.size, radix.cumulative[k + 1], -1)
        spread = np.abs(coarse - coarse[..., :1]).max(axis=(1, 2))
        worst = int(np.argmax(spread))
        record('measurable', float(spread[worst]), k=k, n=worst)
    for k in range(radix.depth):
        m_k, M_k = radix.digits[k], radix.cumulative[k]
        for n in range(0, radix.size, radix.cumulative[k + 1]):
            total = sum(np.abs(values[k, j * M_k + n]) ** 2 for j in range(m_k))
            record('energy', float(np.max(np.abs(total - m_k))), k=k, n=n)
    for k in range(radix.depth):
        m_k, M_k = radix.digits[k], radix.cumulative[k]
        for base in range(0, radix.size, radix.cumulative[k + 1]):
            for n_k, l_k in product(range(m_k), repeat=2):
                n, l = n_k * M_k + base, l_k * M_k + base
                average = cube_average(
                    values[k, n] * np.conj(values[k, l]), radix, k
                )
                expected = 1.0 if n_k == l_k else 0.0
                record(
                    'orthogonal',
                    float(np.max(np.abs(average - expected))),
                    k=k,
                    n=n,
                    l=l,
                )
    order = ['normalized', 'measurable', 'energy', 'orthogonal']
    violations.sort(key=lambda violation: order.index(violation['check']))
    peaks = np.max(np.abs(values) ** 2, axis=(1, 2))
    delta_max = float(np.min(np.array(radix.digits) / peaks))
    residuals['delta'] = delta_max
    if not violations and delta_max <= 1:
        violations.append({'check': 'bounded', 'residual': 1 - delta_max})
    return AssumptionReport(
        system.name or system.__class__.__name__,
        radix.digits,
        not violations,
        delta_max,
        residuals,
        violations[0] if violations else None,
    )


class KernelTable:
    """
    Values K(eta, t) for every pair of group points, rows are eta.
    """

    def __init__(self, values, label):
        values = np.asarray(values)
        values.setflags(write=False)
        assert np.isfinite(values).all(), f'Non finite values in kernel {label}'
        self.values = values
        self.label = label

    def __array__(self, dtype=None, copy=None):
        if dtype is not None:
            return self.values.astype(dtype)
        return self.values

    def __repr__(self):
        return f'KernelTable({self.label}, shape={self.values.shape})'


class KernelBank:
    """
    Dirichlet, Fejer, block and sup kernels of one system at one radix,
    computed from the psi table with a fixed summation order and cached.
    """

    def __init__(self, system, radix):
        """
        Args:
            system: VilenkinLikeSystem
            radix: RadixSequence
        """
        self.system = system
        self.radix = radix
        self.psi = system.table(radix)
        self.cache = {}
        self.sup_tables = None

    def weighted(self, weights):
        """
        sum_j w_j psi_j(eta) conj(psi_j(t)) for a weight per index.
        """
        return (self.psi.T * weights) @ np.conj(self.psi)

    def indices(self):
        return np.arange(self.radix.size)

    def dirichlet(self, n):
        assert 0 <= n <= self.radix.size, f'Dirichlet index {n} not representable'
        return self.cached(
            ('dirichlet', n), lambda: self.weighted((self.indices() < n) * 1.0)
        )

    def fejer(self, n):
        assert 1 <= n <= self.radix.size, f'Fejer index {n} not representable'
        return self.cached(
            ('fejer', n),
            lambda: self.weighted(np.clip(1 - self.indices() / n, 0, None)),
        )

    def block(self, a, b):
        """
        K_{a,b} = sum_{k=a}^{a+b-1} D_k.
        """
        assert a >= 0 and b >= 1, f'Invalid block ({a}, {b})'
        assert a + b - 1 <= self.radix.size, f'Block ({a}, {b}) not representable'
        weights = np.clip(np.minimum(b, a + b - 1 - self.indices()), 0, None)
        return self.cached(('block', a, b), lambda: self.weighted(weights * 1.0))

    def sup(self, n):
        """
        K~_n = max over M_n <= l < M_{n+1} of |K_l|, pointwise.
        """
        assert (
            0 <= n < self.radix.depth
        ), f'Sup kernel index {n} outside [0, {self.radix.depth})'
        if self.sup_tables is None:
            self.sup_tables = self.build_sup_tables()
        return self.sup_tables[n]

    def build_sup_tables(self):
        """
        One pass over l = 1 .. M_N - 1 with D_l and l K_l updated incrementally.
        """
        size = self.radix.size
        dirichlet = np.zeros((size, size), dtype=complex)
        running = np.zeros((size, size), dtype=complex)
        tables, filled = [], 0
        for n in range(self.radix.depth):
            peak = np.zeros((size, size))
            for l in range(max(1, self.radix.cumulative[n]), self.radix.cumulative[n + 1]):
                while filled < l:
                    j = filled
                    dirichlet += np.outer(self.psi[j], np.conj(self.psi[j]))
                    running += dirichlet
                    filled += 1
                np.maximum(peak, np.abs(running) / l, out=peak)
            peak.setflags(write=False)
            tables.append(peak)
        return tables

    def cached(self, key, compute):
        if key not in self.cache:
            table = compute()
            table.setflags(write=False)
            self.cache[key] = table
        return self.cache[key]

    def kernel(self, kind, *args):
        """
        Kernel table by name.
        Args:
            kind: 'dirichlet', 'fejer', 'block' or 'sup'
            *args: Kind specific indices.

        Returns:
            KernelTable
        """
        builders = {
            'dirichlet': self.dirichlet,
            'fejer': self.fejer,
            'block': self.block,
            'sup': self.sup,
        }
        assert kind in builders, f'Unknown kernel kind `{kind}`'
        return KernelTable(builders[kind](*args), f'{kind}{args}')


def kernel(kind, system, radix, *args):
    return KernelBank(system, radix).kernel(kind, *args)


def kernel_coefficient(kind, j, n, bank=None, tolerance=KERNEL_TOLERANCE):
    """
    Multiplier of the kernel at index j: (n - j) / n for the Fejer kernel
    below n, 1 for the Dirichlet kernel below n, and the block counts of
    K_{a, b} where n = (a, b). With a bank the value is cross-checked against
    the double integral of kernel(eta, t) conj(psi_j(eta)) psi_j(t).
    Args:
        kind: 'dirichlet', 'fejer' or 'block'
        j: Index.
        n: Kernel parameter, a pair (a, b) for blocks.
        bank: Optional KernelBank used for the cross-check.
        tolerance: Cross-check tolerance.

    Returns:
        float
    """
    if kind == 'fejer':
        assert n >= 1, f'Fejer index must be >= 1, got {n}'
        value = max(0.0, (n - j) / n)
    elif kind == 'dirichlet':
        value = 1.0 if j < n else 0.0
    elif kind == 'block':
        a, b = n
        value = float(max(0, min(b, a + b - 1 - j)))
    else:
        raise AssertionError(f'Unknown kernel kind `{kind}`')
    if bank is not None:
        bank.radix.check_index(j)
        table = bank.kernel(kind, *(n if kind == 'block' else (n,))).values
        psi = bank.psi[j]
        integral = np.conj(psi) @ table @ psi / bank.radix.size**2
        assert (
            abs(integral - value) <= tolerance
        ), f'Coefficient of {kind}({n}) at {j}: formula {value}, integral {integral}'
    return value


def multiplier(kind, n, size):
    """
    Vector of kernel_coefficient values for j < size.
    """
    j = np.arange(size)
    if kind == 'fejer':
        return np.clip((n - j) / n, 0, None)
    if kind == 'dirichlet':
        return (j < n) * 1.0
    raise AssertionError(f'Unknown kernel kind `{kind}`')


def verify_dirichlet_identity(bank):
    """
    Max residual of D_{M_n}(eta, t) = M_n [eta in I_n(t)] over n <= N.
    """
    residual = 0.0
    for n in range(bank.radix.depth + 1):
        cubes = bank.radix.cubes(n)
        expected = bank.radix.cumulative[n] * (cubes[:, None] == cubes[None, :])
        table = bank.dirichlet(bank.radix.cumulative[n])
        residual = max(residual, float(np.max(np.abs(table - expected))))
    return residual


def verify_lkl(bank, l):
    """
    Residual of l K_l = sum_{b <= n} sum_{j < l_b} K_{l^(b+1) + j M_b, M_b}
    where M_n <= l < M_{n+1}. The blocks sum D_0, ..., D_{l-1} so the
    trailing D_l is added before comparing.
    """
    radix = bank.radix
    assert 1 <= l < radix.size, f'Index {l} outside [1, {radix.size})'
    digits = radix.to_digits(l)
    total = np.array(bank.dirichlet(l), dtype=complex)
    for b in range(radix.block(l)):
        for j in range(digits[b]):
            total += bank.block(
                radix.upper(l, b + 1) + j * radix.cumulative[b], radix.cumulative[b]
            )
    return float(np.max(np.abs(l * bank.fejer(l) - total)))


def annulus_masks(radix):
    """
    masks[a][t, s] is True iff t is in I_a(s) but not in I_{a+1}(s).
    """
    masks = []
    for a in range(radix.depth):
        same = radix.cubes(a)[:, None] == radix.cubes(a)[None, :]
        finer = radix.cubes(a + 1)[:, None] == radix.cubes(a + 1)[None, :]
        masks.append(same & ~finer)
    return masks


def block_starts(radix, n, b):
    """
    Distinct l^(b+1) over M_n <= l < M_{n+1}.
    """
    low, high = max(1, radix.cumulative[n]), radix.cumulative[n + 1]
    return sorted({radix.upper(l, b + 1) for l in range(low, high)})


def sweep_block_pointwise(bank, delta):
    radix, masks, rows = bank.radix, annulus_masks(bank.radix), []
    for n in range(radix.depth):
        for b in range(n + 1):
            for start, j in product(block_starts(radix, n, b), range(radix.digits[b] - 1)):
                table = np.abs(
                    bank.block(start + j * radix.cumulative[b], radix.cumulative[b])
                )
                for a in range(b, n + 1):
                    rows.append(
                        {
                            'n': n,
                            'a': a,
                            'b': b,
                            'j': j,
                            'start': start,
                            'lhs': float(np.max(table[masks[a]])),
                            'rhs': delta ** (a - n)
                            * radix.cumulative[b]
                            * radix.cumulative[n],
                        }
                    )
    return rows


def annulus_integral(table, mask, size):
    return float(np.max(np.where(mask, table, 0.0).sum(axis=0) / size))


def sweep_block_square(bank, delta):
    radix, masks, rows = bank.radix, annulus_masks(bank.radix), []
    for n in range(radix.depth):
        for b in range(1, n + 1):
            for start, j in product(block_starts(radix, n, b), range(radix.digits[b] - 1)):
                table = np.abs(
                    bank.block(start + j * radix.cumulative[b], radix.cumulative[b])
                )
                for a in range(b):
                    rows.append(
                        {
                            'n': n,
                            'a': a,
                            'b': b,
                            'j': j,
                            'start': start,
                            'lhs': annulus_integral(table**2, masks[a], radix.size),
                            'rhs': delta ** (a - n)
                            * radix.cumulative[a]
                            * radix.cumulative[b]
                            * radix.cumulative[n],
                        }
                    )
    return rows


def sweep_fejer_off_cube(bank, delta):
    """
    Sup over n in [M_k, M_N) of |K_n| integrated off I_k(s); the sup is
    truncated at M_N - 1 and is empty for k = N.
    """
    radix, rows = bank.radix, []
    for k in range(radix.depth + 1):
        peak = np.zeros((radix.size, radix.size))
        for n in range(k, radix.depth):
            np.maximum(peak, bank.sup(n), out=peak)
        outside = radix.cubes(k)[:, None] != radix.cubes(k)[None, :]
        rows.append(
            {
                'k': k,
                'truncation': radix.size - 1,
                'lhs': annulus_integral(peak, outside, radix.size),
                'rhs': 1.0,
            }
        )
    return rows


def sweep_sup_annulus(bank, delta, power=1):
    radix, masks, rows = bank.radix, annulus_masks(bank.radix), []
    for n in range(radix.depth):
        for a in range(n + 1):
            lhs = annulus_integral(bank.sup(n) ** power, masks[a], radix.size)
            bound = delta ** (a - n) + (n - a) * delta ** ((a - n) / 2)
            if power == 2:
                rhs = radix.cumulative[a] * bound**2
            else:
                rhs = bound
            rows.append({'n': n, 'a': a, 'lhs': lhs, 'rhs': rhs})
    return rows


def sweep_sup_square(bank, delta):
    return sweep_sup_annulus(bank, delta, power=2)


def sweep_sup_integral(bank, delta):
    radix, rows = bank.radix, []
    for n in range(radix.depth):
        rows.append(
            {
                'n': n,
                'lhs': float(np.max(bank.sup(n).sum(axis=0) / radix.size)),
                'rhs': 1.0,
            }
        )
    return rows


kernel_estimates = {
    'block-pointwise': sweep_block_pointwise,
    'block-square': sweep_block_square,
    'fejer-off-cube': sweep_fejer_off_cube,
    'sup-annulus': sweep_sup_annulus,
    'sup-annulus-square': sweep_sup_square,
    'sup-integral': sweep_sup_integral,
}


def verify_kernel_bound(estimate, bank, delta, params=None):
    """
    Exact left sides of a kernel estimate over its whole admissible parameter
    range, right sides with unit constant, and the fitted constant.
    Args:
        estimate: One of `kernel_estimates`.
        bank: KernelBank
        delta: Delta from validate_system, > 1.
        params: Optional dict restricting the sweep, e.g. {'n': 3}

    Returns:
        BoundReport
    """
    assert estimate in kernel_estimates, f'Unknown kernel estimate `{estimate}`'
    assert delta > 1, f'Expected delta > 1, got {delta}'
    rows = kernel_estimates[estimate](bank, delta)
    if params:
        for key in params:
            assert key in rows[0], f'Estimate `{estimate}` has no parameter `{key}`'
        rows = [row for row in rows if all(row[k] == v for k, v in params.items())]
        assert rows, f'No admissible parameters {params} for `{estimate}`'
    return BoundReport.from_rows(
        estimate,
        rows,
        depth=bank.radix.depth,
        system=bank.system.name,
        delta=delta,
    )
