from dataclasses import dataclass, field

import numpy as np

from vilenkinlab.algebra.factor import (
    factor_cond_exp,
    factor_hardy_norm,
    nc_cesaro,
)
from vilenkinlab.algebra.field import (
    apply_multiplier,
    cesaro,
    cond_exp,
    hardy_norm,
    psd_sqrt,
    search_lambda_certificate,
    seq_l2c_norm,
    sigma_plus,
    square_sum,
    stack,
)
from vilenkinlab.algebra.matrix import (
    TOLERANCE,
    adjoint,
    as_matrix,
    min_eigenvalue,
    operator_norm,
    psd_pinv,
    symmetrize,
)
from vilenkinlab.algebra.reports import DEGENERATE_RHS, BoundReport
from vilenkinlab.algebra.transference import doubled_levels, gamma
from vilenkinlab.algebra.vilenkin import multiplier

RATIO_TOLERANCE = 1e-8


class LacunarySelection:
    """
    Indices n_1 < n_2 < ... with M_{step(k-1)} <= n_k < M_{step k}, one per
    block of the radix.
    """

    def __init__(self, sequence, radix, step=1, rule='custom'):
        """
        Validate the sandwich condition.
        Args:
            sequence: Iterable of indices, the k-th in block k.
            radix: RadixSequence the indices refer to.
            step: 1 for the classical blocks, 2 on the doubled radix.
            rule: Name of the selection rule.
        """
        sequence = tuple(int(n) for n in sequence)
        assert step in (1, 2), f'Unsupported block step {step}'
        assert sequence, 'Empty lacunary selection'
        assert (
            step * len(sequence) <= radix.depth
        ), f'{len(sequence)} blocks of step {step} exceed depth {radix.depth}'
        for k, n in enumerate(sequence, 1):
            low, high = radix.cumulative[step * (k - 1)], radix.cumulative[step * k]
            assert low <= n < high, f'n_{k} = {n} outside [{low}, {high})'
        self.sequence = sequence
        self.radix = radix
        self.step = step
        self.rule = rule

    @classmethod
    def default(cls, radix, step=1):
        """
        n_k = M_{step (k - 1)} for every block.
        """
        return cls(
            [radix.cumulative[step * (k - 1)] for k in range(1, radix.depth // step + 1)],
            radix,
            step,
            'default',
        )

    def __len__(self):
        return len(self.sequence)

    def __repr__(self):
        return f'LacunarySelection({self.rule}, {self.sequence})'

    def levels(self):
        return [self.step * k for k in range(1, len(self) + 1)]

    def multipliers(self, levels=None):
        """
        m_k(j) = K^_{n_k}(j) - D^_{M_{level_k}}(j), shape (K, M_N), with
        level_k = step k unless given.
        """
        size = self.radix.size
        levels = list(levels or self.levels())
        return np.stack(
            [
                multiplier('fejer', n, size)
                - multiplier('dirichlet', self.radix.cumulative[level], size)
                for n, level in zip(self.sequence, levels)
            ]
        )


def lacunarity_ratio(sequence):
    sequence = np.asarray(sequence, dtype=float)
    if sequence.size < 2:
        return np.inf
    return float(np.min(sequence[1:] / sequence[:-1]))


def split_lacunary(sequence, radix, step=1):
    """
    Split an increasing sequence into selections with one member per block,
    padding blocks that run out of members with the default M_{step(k-1)}.
    Args:
        sequence: Strictly increasing positive indices below M_N.
        radix: RadixSequence
        step: Block step.

    Returns:
        (list of LacunarySelection, lacunarity ratio)
    """
    sequence = [int(n) for n in sequence]
    assert sequence, 'Empty sequence'
    assert all(
        a < b for a, b in zip(sequence, sequence[1:])
    ), f'Sequence must increase strictly, got {sequence}'
    ratio = lacunarity_ratio(sequence)
    assert ratio > 1, f'Lacunarity ratio must exceed 1, got {ratio}'
    count = radix.depth // step
    blocks = {k: [] for k in range(1, count + 1)}
    for n in sequence:
        block = next(
            (
                k
                for k in blocks
                if radix.cumulative[step * (k - 1)] <= n < radix.cumulative[step * k]
            ),
            None,
        )
        assert block is not None, f'Index {n} outside [1, {radix.cumulative[step * count]})'
        blocks[block].append(n)
    multiplicity = max(len(members) for members in blocks.values())
    selections = []
    for j in range(multiplicity):
        chosen = [
            members[j] if j < len(members) else radix.cumulative[step * (k - 1)]
            for k, members in blocks.items()
        ]
        selections.append(LacunarySelection(chosen, radix, step, f'split-{j}'))
    return selections, ratio


def multiplier_sup(selection):
    """
    sup over j < M_N of sum_k m_k(j)^2 from the closed form coefficients.
    """
    return float(np.max(np.sum(selection.multipliers() ** 2, axis=0)))


@dataclass
class SunouchiData:
    """
    T_k(f) = sigma_{n_k}(f) - E_{level_k}(f) and the square function U(f).
    """

    terms: list
    multipliers: np.ndarray
    selection: LacunarySelection
    residual: float = 0.0
    l2_ratio: float = 0.0
    extras: dict = field(default_factory=dict)

    def square(self, flavor='column'):
        reference = self.terms[0]
        return reference.new(psd_sqrt(square_sum(stack(self.terms), flavor)))

    def norm(self, p, flavor='column'):
        return seq_l2c_norm(self.terms, p, flavor)


def apply_U(f, selection, system, levels=None, tolerance=TOLERANCE):
    """
    Sunouchi differences along a lacunary selection, computed as
    sigma_{n_k} - E_{level_k} and cross-checked against the multiplier form.
    Args:
        f: OperatorField
        selection: LacunarySelection on f.radix
        system: VilenkinLikeSystem
        levels: Conditional expectation levels, defaults to the selection's.
        tolerance: Cross-check tolerance.

    Returns:
        SunouchiData
    """
    assert selection.radix == f.radix, 'Selection radix differs from the field'
    levels = list(levels or selection.levels())
    assert len(levels) == len(selection), 'One level per selected index required'
    table = selection.multipliers(levels)
    terms, residual = [], 0.0
    for n, level, weights in zip(selection.sequence, levels, table):
        term = cesaro(f, n, system) - cond_exp(f, level)
        reference = apply_multiplier(f, weights, system)
        residual = max(residual, float(np.max(operator_norm(term.values - reference.values))))
        terms.append(term)
    scale = max(1.0, f.sup_norm())
    assert residual <= tolerance * scale, (
        f'Operator and multiplier forms of T_k differ by {residual}'
    )
    size = f.norm(2)
    ratio = seq_l2c_norm(terms, 2) / size if size > DEGENERATE_RHS else 0.0
    bound = float(np.max(np.sum(table**2, axis=0))) ** 0.5
    assert ratio <= bound + RATIO_TOLERANCE, (
        f'L_2 ratio {ratio} exceeds the multiplier bound {bound}'
    )
    return SunouchiData(terms, table, selection, residual, ratio)


def so1_ratio(f, p, selection, system, flavor='column', hardy_levels=None, **metadata):
    """
    ||(T_k f)||_{L_p(l_2^c)} against ||f||_{H_p^c}.
    Args:
        f: OperatorField
        p: Exponent in [1, 2]
        selection: LacunarySelection
        system: VilenkinLikeSystem
        flavor: 'column' or 'row'
        hardy_levels: Filtration levels of the Hardy norm.
        **metadata: Extra row fields, e.g. input_class.

    Returns:
        BoundReport
    """
    data = apply_U(f, selection, system)
    numerator = data.norm(p, flavor)
    denominator = hardy_norm(f, p, flavor, hardy_levels)
    assert not (denominator <= DEGENERATE_RHS < numerator), (
        f'Zero Hardy norm with Sunouchi numerator {numerator}'
    )
    row = {
        'p': p,
        'flavor': flavor,
        'numerator': numerator,
        'denominator': denominator,
        'lhs': numerator,
        'rhs': denominator,
        **metadata,
    }
    return BoundReport.from_rows(
        'so1-ratio', [row], depth=f.radix.depth, selection=str(selection.sequence)
    )


def kn0_residual(atom, selection, system):
    """
    max ||T_k(a)||_inf over 1 <= k <= level of the atom.
    """
    data = apply_U(atom.a, selection, system)
    return max(
        (term.sup_norm() for term in data.terms[: atom.level]), default=0.0
    )


def atom_tail_rows(atom, selection, system, delta):
    """
    ||sigma_{n_k}(a) chi_{Q^c}||_1 against delta^(n_0 - k) + (k - n_0) delta^((n_0 - k) / 2)
    for k > n_0.
    """
    outside = ~atom.support
    rows = []
    for k, n in enumerate(selection.sequence, 1):
        if k <= atom.level:
            continue
        gap = atom.level - k
        rows.append(
            {
                'k': k,
                'n_k': n,
                'level': atom.level,
                'lhs': cesaro(atom.a, n, system).masked(outside).norm(1),
                'rhs': delta**gap + (k - atom.level) * delta ** (gap / 2),
            }
        )
    return rows


def lebesgue_constant(bank, n):
    """
    max over eta of the integral of |K_n(eta, t)| over t.
    """
    return float(np.max(np.abs(bank.fejer(n)).sum(axis=1) / bank.radix.size))


def fitted_domination(mean, bound):
    """
    Smallest c with mean* mean <= c bound at every point, on the support of
    bound.
    Args:
        mean: Array of shape (P, d, d), sigma_n(f) values.
        bound: Positive array of the same shape, sigma+_n(f* f) values.

    Returns:
        float
    """
    inverse_root = psd_pinv(psd_sqrt(symmetrize(bound)))
    scaled = inverse_root @ adjoint(mean) @ mean @ inverse_root
    return float(np.max(np.linalg.eigvalsh(symmetrize(scaled))))


def full_range_domination(f, bank, system):
    """
    Smallest eigenvalue of c sigma+_n(f* f) - sigma_n(f)* sigma_n(f) over every
    n, with c the largest Lebesgue constant, and the fitted constant that
    makes the domination sharp.
    Returns:
        (c, residual, fitted c)
    """
    constant = max(lebesgue_constant(bank, n) for n in range(1, f.radix.size + 1))
    square = f.new(symmetrize((f.adjoint() @ f).values))
    residual, fitted = np.inf, 0.0
    for n in range(1, f.radix.size + 1):
        mean = cesaro(f, n, system).values
        bound = sigma_plus(square, n, bank).values
        difference = symmetrize(constant * bound - adjoint(mean) @ mean)
        residual = min(residual, float(np.min(min_eigenvalue(difference))))
        fitted = max(fitted, fitted_domination(mean, bound))
    return constant, residual, fitted


def asym_maximal_report(f, p, selection, system, bank=None, full_range=False):
    """
    Certified Lambda_{p, inf}(l_inf^c) bounds of (sigma_{n_k}(f))_k against
    ||f||_{H_p^c}: the direct certificate search, the T_k term through its
    L_p(l_2^c) norm and the E_k term through its own certificate.
    Args:
        f: OperatorField
        p: Exponent in [1, 2]
        selection: LacunarySelection
        system: VilenkinLikeSystem
        bank: KernelBank, required for the full range variant.
        full_range: If True and p == 2, the whole Cesaro sequence is also
            certified with the sigma+ domination checked at every point.

    Returns:
        BoundReport
    """
    assert 1 <= p <= 2, f'Expected p in [1, 2], got {p}'
    data = apply_U(f, selection, system)
    means = [cesaro(f, n, system) for n in selection.sequence]
    expectations = [cond_exp(f, level) for level in selection.levels()]
    direct = search_lambda_certificate(means, p, 'column')
    martingale = search_lambda_certificate(expectations, p, 'column')
    t_component = data.norm(p)
    denominator = hardy_norm(f, p)
    rows = [
        {
            'variant': 'lacunary',
            'p': p,
            'lhs': direct.upper_bound,
            'rhs': denominator,
            'certified': direct.value,
            'lower_bound': direct.lower_bound,
            'gap': direct.gap,
            't_component': t_component,
            'e_component': martingale.upper_bound,
            'assembled': t_component + martingale.upper_bound,
        }
    ]
    metadata = {'depth': f.radix.depth, 'selection': str(selection.sequence)}
    if full_range and p == 2:
        assert bank is not None, 'The full range variant requires a KernelBank'
        constant, residual, fitted = full_range_domination(f, bank, system)
        scale = max(1.0, f.sup_norm() ** 2 * constant)
        assert residual >= -RATIO_TOLERANCE * scale, (
            f'sigma_n(f)* sigma_n(f) exceeds c sigma+_n(f* f) by {-residual}'
        )
        sequence = [cesaro(f, n, system) for n in range(1, f.radix.size + 1)]
        certificate = search_lambda_certificate(sequence, 2, 'column')
        rows.append(
            {
                'variant': 'full-range',
                'p': 2,
                'lhs': certificate.upper_bound,
                'rhs': f.norm(2),
                'certified': certificate.value,
                'lower_bound': certificate.lower_bound,
                'gap': certificate.gap,
                'domination_constant': constant,
                'domination_residual': residual,
                'fitted_domination': fitted,
            }
        )
    return BoundReport.from_rows('asym-maximal', rows, **metadata)


def factor_terms(x, selection, context):
    """
    T_k^R(x) = sigma_{n_k}^R(x) - E_k(x) on the factor, selection on the
    doubled radix with step 2.
    """
    return [
        as_matrix(nc_cesaro(x, n, context)) - as_matrix(factor_cond_exp(x, k, context))
        for k, n in enumerate(selection.sequence, 1)
    ]


def nc_sunouchi_ratio(x, p, selection, context, system, tolerance=TOLERANCE):
    """
    Factor side Sunouchi ratio computed directly and through the transference,
    where gamma(T_k^R(x)) = T_{2k}(gamma(x)).
    Args:
        x: Operator in R_N
        p: Exponent in [1, 2]
        selection: LacunarySelection on the doubled radix with step 2.
        context: FactorContext
        system: Character system on the doubled radix.
        tolerance: Intertwining tolerance.

    Returns:
        BoundReport
    """
    assert (
        selection.radix == context.doubled and selection.step == 2
    ), 'Factor selections live on the doubled radix with step 2'
    terms = factor_terms(x, selection, context)
    numerator = seq_l2c_norm(terms, p)
    denominator = factor_hardy_norm(x, p, context)
    transferred = gamma(x, context, system).field
    data = apply_U(transferred, selection, system, levels=doubled_levels(context))
    residual = max(
        float(
            np.max(
                operator_norm(gamma(term, context, system).values - image.values)
            )
        )
        for term, image in zip(terms, data.terms)
    )
    assert residual <= tolerance, f'gamma(T_k^R x) differs from T_2k(gamma x) by {residual}'
    transferred_numerator = data.norm(p)
    transferred_denominator = hardy_norm(transferred, p, levels=doubled_levels(context))
    direct_ratio = numerator / denominator if denominator > DEGENERATE_RHS else 0.0
    transferred_ratio = (
        transferred_numerator / transferred_denominator
        if transferred_denominator > DEGENERATE_RHS
        else 0.0
    )
    assert abs(direct_ratio - transferred_ratio) <= RATIO_TOLERANCE, (
        f'Direct ratio {direct_ratio} and transferred ratio {transferred_ratio} differ'
    )
    row = {
        'p': p,
        'lhs': numerator,
        'rhs': denominator,
        'transferred_numerator': transferred_numerator,
        'transferred_denominator': transferred_denominator,
        'intertwining_residual': residual,
    }
    return BoundReport.from_rows(
        'nc-sunouchi', [row], depth=context.radix.depth, selection=str(selection.sequence)
    )
