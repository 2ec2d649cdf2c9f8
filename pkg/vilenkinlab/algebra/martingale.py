from dataclasses import dataclass, field

import numpy as np

from vilenkinlab.algebra.field import (
    OperatorField,
    check_positive,
    cond_exp,
    kernel_operator,
    lambda_certificate,
    sublevel_projection,
)
from vilenkinlab.algebra.matrix import (
    MEET_TOLERANCE,
    TOLERANCE,
    Interval,
    absolute_value,
    adjoint,
    commutator_norm,
    normalized_trace,
    operator_norm,
    order_residual,
    projection_meet,
    spectral_projection,
    symmetrize,
)
from vilenkinlab.algebra.reports import BoundReport

ORDER_TOLERANCE = 1e-8
CERTIFICATE_TOLERANCE = 1e-7


def field_trace(values):
    return float(np.real(np.mean(normalized_trace(values))))


def broadcast_cubes(representatives, radix, level):
    return np.repeat(representatives, radix.cube_size(level), axis=0)


@dataclass
class CuculescuResult:
    """
    Decreasing projections q_1 >= ... >= q_N with q_n constant on level n
    cubes, their differences p_n and the terminal projection q.
    """

    level: float
    q_seq: list
    p_seq: list
    representatives: list
    residuals: dict = field(default_factory=dict)

    @property
    def q(self):
        return self.q_seq[-1]

    @property
    def tail(self):
        """
        phi(1 - q)
        """
        return 1 - field_trace(self.q.values)

    def q_at(self, n):
        """
        q_n for n in [0, N], q_0 = 1.
        """
        if n == 0:
            return OperatorField.identity(self.q.radix, self.q.fiber_dim)
        return self.q_seq[n - 1]

    def p_at(self, n):
        return self.p_seq[n - 1]


def cuculescu(f, level, tolerance=ORDER_TOLERANCE):
    """
    Cuculescu projections of a positive field at a level: q_0 = 1 and
    q_n = q_{n-1} - chi_(level, inf)(q_{n-1} E_n(f) q_{n-1}), computed on cube
    representatives. Eigenvalues within 1e-9 of the level count as <= level.
    Args:
        f: Positive OperatorField
        level: lambda > 0
        tolerance: Verification tolerance.

    Returns:
        CuculescuResult
    """
    assert level > 0, f'Expected a positive level, got {level}'
    check_positive(f)
    assert f.radix.depth >= 1, 'Cuculescu projections require depth >= 1'
    radix, dim = f.radix, f.fiber_dim
    previous = np.eye(dim, dtype=complex)[None]
    q_seq, p_seq, representatives = [], [], []
    residuals = {'commutator': 0.0, 'compression': -np.inf, 'order': np.inf}
    for n in range(1, radix.depth + 1):
        mean = cond_exp(f, n).cube_representatives(n)
        parent = np.repeat(previous, radix.digits[n - 1], axis=0)
        compressed = symmetrize(parent @ mean @ parent)
        exceeding = spectral_projection(compressed, Interval.above(level))
        current = parent - exceeding
        residuals['commutator'] = max(
            residuals['commutator'], commutator_norm(current, compressed)
        )
        block = current @ mean @ current
        top = np.linalg.eigvalsh((block + adjoint(block)) / 2)
        residuals['compression'] = max(residuals['compression'], float(top.max()) - level)
        residuals['order'] = min(residuals['order'], order_residual(current, parent))
        representatives.append(current)
        q_seq.append(OperatorField(radix, broadcast_cubes(current, radix, n)))
        p_seq.append(
            OperatorField(radix, broadcast_cubes(parent - current, radix, n))
        )
        previous = current
    result = CuculescuResult(level, q_seq, p_seq, representatives, residuals)
    complement = OperatorField.identity(radix, dim) - result.q
    total = sum(p_seq[1:], p_seq[0])
    residuals['telescoping'] = float(np.max(operator_norm(total.values - complement.values)))
    residuals['disjoint'] = max(
        float(np.max(operator_norm(p.values @ q.values))) for p, q in zip(p_seq, q_seq)
    )
    weighted = field_trace(complement.values @ f.values)
    residuals['weak_lower'] = level * result.tail - weighted
    residuals['weak_upper'] = weighted - f.norm(1)
    scale = max(1.0, f.sup_norm())
    assert residuals['commutator'] <= tolerance * scale, (
        f'Cuculescu projection does not commute, residual {residuals["commutator"]}'
    )
    assert residuals['compression'] <= tolerance * scale, (
        f'q_n E_n(f) q_n exceeds the level by {residuals["compression"]}'
    )
    assert residuals['order'] >= -tolerance, 'Cuculescu projections not decreasing'
    assert residuals['telescoping'] <= tolerance, 'sum p_n differs from 1 - q'
    assert residuals['disjoint'] <= tolerance, 'p_n q_n does not vanish'
    assert residuals['weak_lower'] <= tolerance * scale, (
        f'Weak type bound violated by {residuals["weak_lower"]}'
    )
    assert residuals['weak_upper'] <= tolerance * scale, (
        f'phi((1 - q) f) exceeds ||f||_1 by {residuals["weak_upper"]}'
    )
    return result


@dataclass
class CZDecomposition:
    """
    f = g + b_d + b_off with level pieces b_d^k, b_off^k supported where
    p_k is nonzero.
    """

    source: OperatorField
    level: float
    ratio: int
    cuculescu: CuculescuResult
    g: OperatorField
    b_d: OperatorField
    b_off: OperatorField
    diagonal: list
    off_diagonal: list
    residuals: dict = field(default_factory=dict)

    def active_cubes(self, k):
        """
        Level k cubes Q with p_Q nonzero.
        """
        norms = operator_norm(self.cuculescu.p_at(k).cube_representatives(k))
        return [int(cube) for cube in np.flatnonzero(norms > TOLERANCE)]

    def pieces(self, kind):
        """
        Yield (k, Q, b^{k, Q}) for kind 'diagonal' or 'off_diagonal'.
        """
        assert kind in ('diagonal', 'off_diagonal'), f'Unknown piece kind `{kind}`'
        radix = self.source.radix
        for k, level_piece in enumerate(getattr(self, kind), 1):
            cubes = radix.cubes(k)
            for cube in self.active_cubes(k):
                yield k, cube, level_piece.masked(cubes == cube)


def cz_decompose(f, level, tolerance=ORDER_TOLERANCE):
    """
    Calderon-Zygmund decomposition of a positive field at a level,
    g = q f q + sum_k p_k f_k p_k, b_d = sum_k p_k (f - f_k) p_k and
    b_off = sum_k p_k f q_k + q_k f p_k.

    ||g||_inf <= R lambda is checked, and recorded as `g_sup`, only when
    lambda >= ||E_0 f||_inf: the bound rests on p_1 E_1(f) p_1 <= R p_1 E_0(f) p_1
    with E_0(f) <= lambda, which fails below the mean. `g_sup` is then absent.
    Args:
        f: Positive OperatorField
        level: lambda > 0
        tolerance: Verification tolerance.

    Returns:
        CZDecomposition
    """
    result = cuculescu(f, level, tolerance)
    radix, q = f.radix, result.q
    ratio = radix.max_digit
    g = q @ f @ q
    b_d = OperatorField.zeros(radix, f.fiber_dim)
    b_off = OperatorField.zeros(radix, f.fiber_dim)
    diagonal, off_diagonal = [], []
    cross = 0.0
    for k in range(1, radix.depth + 1):
        p, q_k, f_k = result.p_at(k), result.q_at(k), cond_exp(f, k)
        g = g + p @ f_k @ p
        piece = p @ (f - f_k) @ p
        off = p @ f @ q_k + q_k @ f @ p
        cross = max(cross, (p @ f_k @ q_k).sup_norm())
        diagonal.append(piece)
        off_diagonal.append(off)
        b_d = b_d + piece
        b_off = b_off + off
    residuals = {
        'reconstruction': (f - g - b_d - b_off).norm(1),
        'cross': cross,
        'g_l1': g.norm(1) - f.norm(1),
        'diagonal_l1': sum(piece.norm(1) for piece in diagonal) - 2 * f.norm(1),
        'level_mean': max(
            max(cond_exp(piece, k).sup_norm(), cond_exp(off, k).sup_norm())
            for k, (piece, off) in enumerate(zip(diagonal, off_diagonal), 1)
        ),
    }
    mean = float(operator_norm(cond_exp(f, 0).values[0]))
    if level >= mean:
        residuals['g_sup'] = g.sup_norm() - ratio * level
    decomposition = CZDecomposition(
        f, level, ratio, result, g, b_d, b_off, diagonal, off_diagonal, residuals
    )
    scale = max(1.0, f.sup_norm())
    assert residuals['reconstruction'] <= TOLERANCE * scale, (
        f'Decomposition does not reconstruct f, residual {residuals["reconstruction"]}'
    )
    assert residuals['cross'] <= tolerance * scale, f'p_k f_k q_k = {cross} != 0'
    assert residuals['g_l1'] <= TOLERANCE * scale, '||g||_1 exceeds ||f||_1'
    assert residuals['diagonal_l1'] <= tolerance * scale, (
        'sum_k ||p_k (f - f_k) p_k||_1 exceeds 2 ||f||_1'
    )
    assert residuals['level_mean'] <= TOLERANCE * scale, 'Pieces have nonzero level means'
    assert residuals.get('g_sup', 0.0) <= tolerance * scale, (
        f'||g||_inf exceeds {ratio} lambda by {residuals["g_sup"]}'
    )
    return decomposition


def off_cube_kernel(table, radix, k):
    """
    table(eta, t) restricted to eta outside the level k cube of t.
    """
    cubes = radix.cubes(k)
    return np.asarray(table) * (cubes[:, None] != cubes[None, :])


def diagonal_majorant(decomposition, bank):
    """
    B_d = sum_k sum_Q sum_{k <= n < N} sigma~_n(|b_d^{k, Q}|) chi_{G \\ Q}.
    """
    radix = decomposition.source.radix
    total = np.zeros_like(decomposition.source.values)
    for k, piece in enumerate(decomposition.diagonal, 1):
        magnitude = piece.new(absolute_value(piece.values))
        for n in range(k, radix.depth):
            total += kernel_operator(
                magnitude, off_cube_kernel(bank.sup(n), radix, k)
            ).values
    return OperatorField(radix, total)


def off_diagonal_terms(decomposition, bank, k, cube):
    """
    A_{k, Q} = sum_{k <= n < N} |sigma~_n(b_off^{k, Q})| chi_{G \\ Q}.
    """
    radix = decomposition.source.radix
    outside = radix.cubes(k) != cube
    piece = decomposition.off_diagonal[k - 1].masked(~outside)
    total = np.zeros_like(piece.values)
    for n in range(k, radix.depth):
        total += absolute_value(kernel_operator(piece, bank.sup(n)).values)
    return OperatorField(radix, total).masked(outside)


def off_diagonal_majorant(decomposition, bank):
    radix = decomposition.source.radix
    total = OperatorField.zeros(radix, decomposition.source.fiber_dim)
    for k in range(1, radix.depth + 1):
        for cube in decomposition.active_cubes(k):
            total = total + off_diagonal_terms(decomposition, bank, k, cube)
    return total


def vanishing_residuals(decomposition, bank):
    """
    max ||q sigma~_n(b_d^{k, Q}) q|| on Q over n >= k, and
    max ||sigma~_n(b_d^{k, Q})|| over n < k.
    """
    radix = decomposition.source.radix
    q = decomposition.cuculescu.q.values
    on_cube, below = 0.0, 0.0
    for k, cube, piece in decomposition.pieces('diagonal'):
        inside = radix.cubes(k) == cube
        for n in range(radix.depth):
            smoothed = kernel_operator(piece, bank.sup(n)).values
            if n < k:
                below = max(below, float(np.max(operator_norm(smoothed))))
            else:
                compressed = (q @ smoothed @ q)[inside]
                on_cube = max(on_cube, float(np.max(operator_norm(compressed))))
    return {'on_cube': on_cube, 'below_level': below}


@dataclass
class WeakTypeCertificate:
    """
    Projection e = e1 ^ e2 <= q with ||e sigma~_n(b) e|| <= lambda for both bad
    parts, its tail phi(1 - e) and the fitted constants. `assembled_bound` is
    g_bound + 2 lambda, the bound on ||e sigma~_n(f) e|| implied by the
    decomposition.
    """

    level: float
    depth: int
    e1: np.ndarray
    e2: np.ndarray
    e: np.ndarray
    sup_bound: float
    tail: float
    fitted_c_bd: float
    fitted_c_boff: float
    fitted_c_total: float
    fitted_c_inf: float
    g_bound: float
    assembled_bound: float
    means: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict)

    def to_json(self, projections=False):
        """
        Certificate fields as a JSON compatible dict.
        Args:
            projections: If True, e1, e2 and e are included as nested lists of
                [real, imag] pairs.

        Returns:
            dict
        """
        result = {
            'lambda': self.level,
            'depth': self.depth,
            'fitted_c_bd': self.fitted_c_bd,
            'fitted_c_boff': self.fitted_c_boff,
            'fitted_c_total': self.fitted_c_total,
            'tail': self.tail,
            'sup_bound': self.sup_bound,
        }
        if projections:
            for name in ('e1', 'e2', 'e'):
                values = getattr(self, name)
                result[name] = np.stack([values.real, values.imag], -1).tolist()
        return result

    def verify(self, p=1):
        """
        Re-check the witness on the sequence (sigma~_n(f))_n against the
        assembled bound with lambda_certificate.
        """
        return lambda_certificate(self.means, self.e, self.assembled_bound, p)


def bound_scale(fields):
    return max([1.0] + [item.sup_norm() for item in fields])


def sup_compressed(e, fields):
    return max(
        (float(np.max(operator_norm(e @ item.values @ e))) for item in fields),
        default=0.0,
    )


def kernel_mass(bank):
    """
    max over n < N and eta of the integral of K~_n(eta, t) over t, so that
    ||sigma~_n(g)||_inf <= kernel_mass ||g||_inf.
    """
    masses = [np.max(bank.sup(n).sum(axis=1)) for n in range(bank.radix.depth)]
    return float(max(masses, default=0.0)) / bank.radix.size


def weak11_certificate(f, level, bank, tolerance=CERTIFICATE_TOLERANCE):
    """
    Weak type (1, 1) certificate for the maximal operator sup_n sigma~_n at a
    level: e1 = chi_[0, lambda](B_d) ^ q, e2 = chi_[0, lambda](B_off) ^ q,
    e = e1 ^ e2. Sums over n stop at N - 1. The good part is bounded through
    ||sigma~_n(g)||_inf <= kernel_mass R lambda when ||g||_inf <= R lambda is
    available, that is lambda >= ||E_0 f||_inf, and by kernel_mass ||g||_inf
    otherwise.
    Args:
        f: Positive OperatorField
        level: lambda > 0
        bank: KernelBank of the same radix.
        tolerance: Verification tolerance for the compressed bounds.

    Returns:
        WeakTypeCertificate
    """
    decomposition = cz_decompose(f, level)
    radix = f.radix
    q = decomposition.cuculescu.q.values
    width = TOLERANCE * max(1.0, level)
    diagonal = diagonal_majorant(decomposition, bank)
    off = off_diagonal_majorant(decomposition, bank)
    e1 = projection_meet(sublevel_projection(diagonal.values, level, width), q)
    e2 = projection_meet(sublevel_projection(off.values, level, width), q)
    e = projection_meet(e1, e2)
    depth_range = range(radix.depth)
    smoothed_d = [kernel_operator(decomposition.b_d, bank.sup(n)) for n in depth_range]
    smoothed_off = [
        kernel_operator(decomposition.b_off, bank.sup(n)) for n in depth_range
    ]
    means = [kernel_operator(f, bank.sup(n)) for n in depth_range]
    smoothed_g = [kernel_operator(decomposition.g, bank.sup(n)) for n in depth_range]
    bound_d = sup_compressed(e, smoothed_d)
    bound_off = sup_compressed(e, smoothed_off)
    sup_bound = sup_compressed(e, means)
    tail = max(0.0, 1 - field_trace(e))
    mass = kernel_mass(bank)
    if 'g_sup' in decomposition.residuals:
        g_bound = mass * decomposition.ratio * level
    else:
        g_bound = mass * decomposition.g.sup_norm()
    scale = max(1.0, f.sup_norm())
    residuals = {
        'below_q': order_residual(e, q),
        'b_d': bound_d - level,
        'b_off': bound_off - level,
        'g_sup': max((item.sup_norm() for item in smoothed_g), default=0.0) - g_bound,
        **vanishing_residuals(decomposition, bank),
    }
    assert residuals['below_q'] >= -MEET_TOLERANCE, 'Certificate projection exceeds q'
    assert residuals['b_d'] <= tolerance * bound_scale(smoothed_d), (
        f'||e sigma~_n(b_d) e|| exceeds lambda by {residuals["b_d"]}'
    )
    assert residuals['b_off'] <= tolerance * bound_scale(smoothed_off), (
        f'||e sigma~_n(b_off) e|| exceeds lambda by {residuals["b_off"]}'
    )
    assert residuals['g_sup'] <= ORDER_TOLERANCE * scale * max(1.0, mass), (
        f'||sigma~_n(g)||_inf exceeds {g_bound} by {residuals["g_sup"]}'
    )
    assert residuals['on_cube'] <= ORDER_TOLERANCE * scale, (
        f'q sigma~_n(b_d^(k, Q)) q does not vanish on Q, {residuals["on_cube"]}'
    )
    assert residuals['below_level'] <= ORDER_TOLERANCE * scale, (
        f'sigma~_n(b_d^(k, Q)) does not vanish below its level, {residuals["below_level"]}'
    )
    slack = tolerance * (bound_scale(smoothed_d) + bound_scale(smoothed_off))
    slack += ORDER_TOLERANCE * scale * max(1.0, mass)
    total = level * tail / f.norm(1) if f.norm(1) > TOLERANCE else 0.0
    return WeakTypeCertificate(
        level=level,
        depth=radix.depth,
        e1=e1,
        e2=e2,
        e=e,
        sup_bound=sup_bound,
        tail=tail,
        fitted_c_bd=bound_d / level,
        fitted_c_boff=bound_off / level,
        fitted_c_total=total,
        fitted_c_inf=sup_bound / level,
        g_bound=g_bound,
        assembled_bound=g_bound + 2 * level + slack,
        means=means,
        residuals=residuals,
    )


def offdiag_row(decomposition, bank, k, cube):
    """
    ||A_{k, Q}||_1 against lambda^(1/2) phi(p_Q chi_Q)^(1/2) phi(p_Q f p_Q chi_Q)^(1/2).
    """
    radix = decomposition.source.radix
    assert 1 <= k <= radix.depth, f'Level {k} outside [1, {radix.depth}]'
    assert 0 <= cube < radix.cumulative[k], f'Cube {cube} not in level {k}'
    inside = radix.cubes(k) == cube
    p = decomposition.cuculescu.p_at(k).values
    q = decomposition.cuculescu.q_at(k).values
    f = decomposition.source.values
    f_k = cond_exp(decomposition.source, k).values
    cross = float(np.max(operator_norm((p @ f_k @ q)[inside])))
    scale = max(1.0, decomposition.source.sup_norm())
    assert cross <= ORDER_TOLERANCE * scale, f'p_k f_k q_k = {cross} != 0 on cube {cube}'
    if float(np.max(operator_norm(p[inside]))) <= TOLERANCE:
        lhs = rhs = 0.0
    else:
        lhs = off_diagonal_terms(decomposition, bank, k, cube).norm(1)
        size = field_trace(p * inside[:, None, None])
        weighted = field_trace((p @ f @ p) * inside[:, None, None])
        rhs = decomposition.level**0.5 * max(size, 0.0) ** 0.5 * max(weighted, 0.0) ** 0.5
    return {'k': k, 'cube': cube, 'lambda': decomposition.level, 'lhs': lhs, 'rhs': rhs}


def verify_offdiag_l1(f, level, k, cube, bank, decomposition=None):
    """
    Exact sides of the L_1 bound for A_{k, Q}; p_Q = 0 gives a degenerate pass.
    Args:
        f: Positive OperatorField
        level: lambda > 0
        k: Level in [1, N]
        cube: Cube id at level k.
        bank: KernelBank of the same radix.
        decomposition: Optional CZDecomposition of (f, level) to reuse.

    Returns:
        BoundReport
    """
    decomposition = decomposition or cz_decompose(f, level)
    row = offdiag_row(decomposition, bank, k, cube)
    return BoundReport.from_rows('offdiag-l1', [row], depth=f.radix.depth)


def offdiag_rows(decomposition, bank):
    radix = decomposition.source.radix
    return [
        offdiag_row(decomposition, bank, k, cube)
        for k in range(1, radix.depth + 1)
        for cube in decomposition.active_cubes(k)
    ]
