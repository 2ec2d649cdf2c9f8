import numpy as np
import pytest

from vilenkinlab.algebra.field import OperatorField, make_simple_atom
from vilenkinlab.algebra.sunouchi import (
    LacunarySelection,
    apply_U,
    asym_maximal_report,
    atom_tail_rows,
    fitted_domination,
    kn0_residual,
    lacunarity_ratio,
    multiplier_sup,
    nc_sunouchi_ratio,
    so1_ratio,
    split_lacunary,
)
from vilenkinlab.algebra.vilenkin import KernelBank, VilenkinCharacters
from vilenkinlab.utils.common import random_operator


@pytest.mark.usefixtures('radixes')
class TestLacunarySelection:
    def test_default(self):
        selection = LacunarySelection.default(self.dyadic)
        assert selection.sequence == (1, 2, 4)
        assert selection.levels() == [1, 2, 3]
        assert repr(selection) == 'LacunarySelection(default, (1, 2, 4))'
        doubled = LacunarySelection.default(self.dyadic.doubled(), 2)
        assert doubled.sequence == (1, 4, 16)

    def test_sandwich(self):
        with pytest.raises(AssertionError, match=r'n_2 = 5 outside \[2, 4\)'):
            LacunarySelection([1, 5], self.dyadic)
        with pytest.raises(AssertionError, match=r'exceed depth'):
            LacunarySelection([1, 2, 4, 8], self.dyadic)
        with pytest.raises(AssertionError, match=r'Unsupported block step'):
            LacunarySelection([1], self.dyadic, 3)

    def test_split(self):
        selections, ratio = split_lacunary([1, 2, 3, 5], self.dyadic)
        assert ratio == pytest.approx(1.5)
        sequences = [selection.sequence for selection in selections]
        assert sequences == [(1, 2, 5), (1, 3, 4)]
        assert lacunarity_ratio([4]) == np.inf
        with pytest.raises(AssertionError, match=r'increase strictly'):
            split_lacunary([3, 2], self.dyadic)
        with pytest.raises(AssertionError, match=r'outside'):
            split_lacunary([1, 9], self.dyadic)

    def test_multipliers(self):
        selection = LacunarySelection.default(self.dyadic)
        table = selection.multipliers()
        assert table.shape == (3, 8)
        assert np.allclose(table[:, 0], 0)
        assert 0 < multiplier_sup(selection) < np.inf


def test_fitted_domination():
    identity = np.stack([np.eye(2)] * 3)
    assert fitted_domination(2 * identity, identity) == pytest.approx(4)
    mean = np.diag([1.0, 5.0])[None]
    assert fitted_domination(mean, np.diag([1.0, 0.0])[None]) == pytest.approx(1)
    assert fitted_domination(mean, 4 * identity[:1]) == pytest.approx(25 / 4)


@pytest.mark.usefixtures('fields')
class TestSunouchiSquare:
    def test_l2_ratio(self):
        selection = LacunarySelection.default(self.general.radix)
        data = apply_U(self.general, selection, VilenkinCharacters())
        assert len(data.terms) == 3
        assert data.residual <= 1e-9
        assert data.l2_ratio <= multiplier_sup(selection) ** 0.5 + 1e-8
        assert data.square().is_positive()

    def test_constant_field(self):
        constant = OperatorField.constant(self.general.radix, [[1, 2], [3, 4]])
        selection = LacunarySelection.default(constant.radix)
        data = apply_U(constant, selection, VilenkinCharacters())
        assert all(term.sup_norm() <= 1e-12 for term in data.terms)

    def test_so1_ratio(self):
        selection = LacunarySelection.default(self.general.radix)
        for flavor in ('column', 'row'):
            report = so1_ratio(
                self.general,
                1,
                selection,
                VilenkinCharacters(),
                flavor,
                input_class='gaussian',
            )
            assert report.claim == 'so1-ratio'
            assert report.status == 'PASS'
            assert report.rows[0]['input_class'] == 'gaussian'

    def test_atoms(self):
        radix = self.general.radix
        selection = LacunarySelection.default(radix)
        atom = make_simple_atom(radix, 2, 1, 0, np.diag([1.0, 0.0]), seed=3)
        assert kn0_residual(atom, selection, VilenkinCharacters()) <= 1e-10
        rows = atom_tail_rows(atom, selection, VilenkinCharacters(), 2.0)
        assert [row['k'] for row in rows] == [2, 3]
        assert rows[0]['rhs'] == pytest.approx(0.5 + 2**-0.5)

    def test_asym_maximal(self):
        radix = self.general.radix
        system = VilenkinCharacters()
        selection = LacunarySelection.default(radix)
        report = asym_maximal_report(
            self.general, 2, selection, system, KernelBank(system, radix), True
        )
        assert [row['variant'] for row in report.rows] == ['lacunary', 'full-range']
        assert report.status == 'PASS'
        assert report.rows[1]['domination_residual'] >= -1e-8 * max(
            1.0, self.general.sup_norm() ** 2 * report.rows[1]['domination_constant']
        )
        fitted = report.rows[1]['fitted_domination']
        assert 0 < fitted <= report.rows[1]['domination_constant'] * (1 + 1e-6) + 1e-9
        with pytest.raises(AssertionError, match=r'requires a KernelBank'):
            asym_maximal_report(self.general, 2, selection, system, full_range=True)


@pytest.mark.usefixtures('context')
class TestFactorSunouchi:
    def test_nc_ratio(self, rng):
        x = random_operator(8, rng) / 4
        selection = LacunarySelection.default(self.context.doubled, 2)
        report = nc_sunouchi_ratio(x, 1, selection, self.context, self.characters)
        assert report.claim == 'nc-sunouchi'
        assert report.rows[0]['intertwining_residual'] <= 1e-9
        assert report.lhs / report.rhs == pytest.approx(
            report.rows[0]['transferred_numerator']
            / report.rows[0]['transferred_denominator']
        )

    def test_selection_radix(self, rng):
        selection = LacunarySelection.default(self.context.doubled)
        with pytest.raises(AssertionError, match=r'step 2'):
            nc_sunouchi_ratio(
                random_operator(8, rng), 1, selection, self.context, self.characters
            )
