from vilenkinlab.algebra.factor import FactorContext
from vilenkinlab.algebra.field import make_simple_atom
from vilenkinlab.algebra.sunouchi import (
    LacunarySelection,
    apply_U,
    asym_maximal_report,
    atom_tail_rows,
    kn0_residual,
    multiplier_sup,
    nc_sunouchi_ratio,
    so1_ratio,
    split_lacunary,
)
from vilenkinlab.algebra.vilenkin import KernelBank, validate_system
from vilenkinlab.base import BaseSuite
from vilenkinlab.utils.common import identity_row, random_operator, random_projection

KN0_TOLERANCE = 1e-10
STABLE_DEPTH = 10
INCREMENT_SLACK = 1e-12


def report_rows(report):
    return [{**report.metadata, **row} for row in report.rows]


class SunouchiSquare(BaseSuite):
    """
    Sunouchi square functions along lacunary selections: the multiplier
    supremum, L_2 and Hardy space ratios, atom estimates, asymmetric maximal
    certificates and the factor side ratio through the transference.
    """

    name = 'sunouchi'
    claims = (
        'multiplier-sup',
        'l2-ratio',
        'kn0',
        'atom-tail',
        'atom-so1',
        'so1-ratio',
        'asym-maximal',
        'full-range',
        'nc-sunouchi',
    )
    deterministic = ('multiplier-sup',)

    def __init__(self, exponents=(1.0, 1.5, 2.0), reference_depth=12, **kwargs):
        """
        Initialize Sunouchi settings.
        Args:
            exponents: Hardy exponents p in [1, 2].
            reference_depth: Largest depth of the multiplier supremum sweep.
            **kwargs: kwargs passed to vilenkinlab.base.BaseSuite
        """
        super(SunouchiSquare, self).__init__(**kwargs)
        assert exponents, 'Expected at least one exponent'
        for p in exponents:
            assert 1 <= p <= 2, f'Expected exponents in [1, 2], got {p}'
        assert reference_depth >= 1, f'Expected reference_depth >= 1, got {reference_depth}'
        self.exponents = tuple(float(p) for p in exponents)
        self.reference_depth = reference_depth
        self.banks = {}
        self.contexts = {}
        self.checks = {
            'multiplier-sup': self.check_multiplier_sup,
            'l2-ratio': self.check_l2_ratio,
            'kn0': self.check_kn0,
            'atom-tail': self.check_atom_tail,
            'atom-so1': self.check_atom_so1,
            'so1-ratio': self.check_so1_ratio,
            'asym-maximal': self.check_asym_maximal,
            'full-range': self.check_full_range,
            'nc-sunouchi': self.check_nc_sunouchi,
        }

    def estimate(self, depth):
        """
        The larger of the field size and the doubled group carrying gamma(x).
        """
        size = self.radix_at(depth).size
        return max(size * self.fiber_dim, size**2)

    def bank(self, radix):
        if radix not in self.banks:
            self.banks[radix] = KernelBank(self.system, radix)
        return self.banks[radix]

    def context(self, radix):
        if radix not in self.contexts:
            self.contexts[radix] = FactorContext(radix)
        return self.contexts[radix]

    def selections(self, radix, step=1):
        """
        The default selection, or the sub-selections of the configured
        lacunary sequence.
        """
        if self.lacunary == 'default':
            return [LacunarySelection.default(radix, step)]
        selections, _ = split_lacunary(self.lacunary, radix, step)
        return selections

    def random_atom(self, radix, rng):
        level = int(rng.integers(radix.depth))
        cube = int(rng.integers(radix.cumulative[level]))
        projection = random_projection(self.fiber_dim, rng)
        return make_simple_atom(
            radix, self.fiber_dim, level, cube, projection, int(rng.integers(2**31))
        )

    def check_multiplier_sup(self, radix, rng):
        """
        Supremum at the trial depth, and at depth N the sweep of default
        selections up to the reference depth, whose increments must stop
        growing past depth 10.
        """
        rows = [
            {'selection': str(selection.sequence), 'lhs': multiplier_sup(selection), 'rhs': 1.0}
            for selection in self.selections(radix)
        ]
        if radix.depth != self.depth:
            return rows
        previous, increment = 0.0, None
        for depth in range(1, self.reference_depth + 1):
            value = multiplier_sup(LacunarySelection.default(self.radix_at(depth)))
            row = {
                'reference_depth': depth,
                'lhs': value,
                'rhs': 1.0,
                'increment': value - previous,
            }
            if (
                depth > STABLE_DEPTH
                and increment is not None
                and value - previous > increment + INCREMENT_SLACK
            ):
                row.update(status='FAIL', failure=f'Increment grows at depth {depth}')
            previous, increment = value, value - previous
            rows.append(row)
        return rows

    def check_l2_ratio(self, radix, rng):
        f = self.random_field(radix, rng)
        rows = []
        for selection in self.selections(radix):
            data = apply_U(f, selection, self.system)
            rows.append(
                {
                    'selection': str(selection.sequence),
                    'lhs': data.l2_ratio,
                    'rhs': multiplier_sup(selection) ** 0.5,
                    'cross_check': data.residual,
                }
            )
        return rows

    def check_kn0(self, radix, rng):
        atom = self.random_atom(radix, rng)
        rows = []
        for selection in self.selections(radix):
            row = identity_row(
                kn0_residual(atom, selection, self.system),
                KN0_TOLERANCE,
                level=atom.level,
                cube=atom.cube,
                atom_l1=atom.a.norm(1),
            )
            if atom.a.norm(1) > 1 + KN0_TOLERANCE:
                row.update(status='FAIL', failure=f'Atom L_1 norm {atom.a.norm(1)} > 1')
            rows.append(row)
        return rows

    def check_atom_tail(self, radix, rng):
        atom = self.random_atom(radix, rng)
        delta = validate_system(self.system, radix).delta_max
        rows = []
        for selection in self.selections(radix):
            rows.extend(atom_tail_rows(atom, selection, self.system, delta))
        return rows

    def check_atom_so1(self, radix, rng):
        atom = self.random_atom(radix, rng)
        rows = []
        for selection in self.selections(radix):
            report = so1_ratio(atom.a, 1, selection, self.system, input_class='atom')
            row = report.rows[0]
            rows.append({**row, 'level': atom.level, 'lhs': row['numerator'], 'rhs': 1.0})
        return rows

    def check_so1_ratio(self, radix, rng):
        f = self.random_field(radix, rng)
        rows = []
        for selection in self.selections(radix):
            for p in self.exponents:
                for flavor in ('column', 'row'):
                    report = so1_ratio(
                        f, p, selection, self.system, flavor, input_class='random'
                    )
                    rows.extend(report_rows(report))
        return rows

    def check_asym_maximal(self, radix, rng):
        f = self.random_field(radix, rng)
        rows = []
        for selection in self.selections(radix):
            for p in self.exponents:
                rows.extend(report_rows(asym_maximal_report(f, p, selection, self.system)))
        return rows

    def check_full_range(self, radix, rng):
        f = self.random_field(radix, rng)
        rows = []
        for selection in self.selections(radix):
            report = asym_maximal_report(
                f, 2, selection, self.system, self.bank(radix), full_range=True
            )
            rows.extend(row for row in report_rows(report) if row['variant'] == 'full-range')
        return rows

    def check_nc_sunouchi(self, radix, rng):
        context = self.context(radix)
        x = random_operator(context.dimension, rng)
        rows = []
        for selection in self.selections(context.doubled, step=2):
            for p in self.exponents:
                report = nc_sunouchi_ratio(x, p, selection, context, self.factor_system())
                rows.extend(report_rows(report))
        return rows

    def run_trial(self, claim, radix, rng):
        return self.checks[claim](radix, rng)
