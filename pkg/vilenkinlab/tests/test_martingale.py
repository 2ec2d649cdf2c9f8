import dataclasses

import numpy as np
import pytest

from vilenkinlab.algebra import martingale
from vilenkinlab.algebra.field import OperatorField, cond_exp
from vilenkinlab.algebra.martingale import (
    cuculescu,
    cz_decompose,
    kernel_mass,
    verify_offdiag_l1,
    weak11_certificate,
)
from vilenkinlab.algebra.vilenkin import KernelBank, VilenkinCharacters


def level_grid(f):
    return [f.sup_norm() * scale for scale in (0.1, 0.3, 0.6)]


@pytest.mark.usefixtures('fields')
class TestCuculescu:
    def test_projections(self):
        for level in level_grid(self.positive):
            result = cuculescu(self.positive, level)
            assert len(result.q_seq) == 3
            assert result.q_at(0).allclose(np.eye(2))
            for n in range(1, 4):
                assert result.q_at(n).is_measurable(n)
                assert result.p_at(n).is_measurable(n)
            assert 0 <= result.tail <= 1
            scale = max(1.0, self.positive.sup_norm())
            assert level * result.tail <= self.positive.norm(1) + 1e-8 * scale
            assert result.residuals['telescoping'] <= 1e-8

    def test_level_above_sup(self):
        result = cuculescu(self.positive, 1.01 * self.positive.sup_norm())
        assert result.q.allclose(np.eye(2))
        assert result.tail == pytest.approx(0, abs=1e-12)

    def test_invalid_inputs(self):
        with pytest.raises(AssertionError, match=r'positive level'):
            cuculescu(self.positive, 0)
        with pytest.raises(AssertionError, match=r'positive field'):
            cuculescu(-self.positive, 1)


@pytest.mark.usefixtures('fields')
class TestCalderonZygmund:
    def test_decomposition(self):
        for level in level_grid(self.positive):
            decomposition = cz_decompose(self.positive, level)
            total = decomposition.g + decomposition.b_d + decomposition.b_off
            assert total.allclose(self.positive.values, 1e-8)
            for k, piece in enumerate(decomposition.diagonal, 1):
                assert cond_exp(piece, k).sup_norm() <= 1e-8
            assert decomposition.ratio == 2

    def test_good_part_bound(self):
        mean = np.linalg.norm(cond_exp(self.positive, 0).values[0], 2)
        decomposition = cz_decompose(self.positive, 1.5 * mean)
        assert 'g_sup' in decomposition.residuals
        scale = max(1.0, self.positive.sup_norm())
        assert decomposition.g.sup_norm() <= 2 * 1.5 * mean + 1e-8 * scale
        assert 'g_sup' not in cz_decompose(self.positive, 0.5 * mean).residuals

    def test_pieces(self):
        decomposition = cz_decompose(self.positive, level_grid(self.positive)[0])
        for k, cube, piece in decomposition.pieces('diagonal'):
            outside = decomposition.source.radix.cubes(k) != cube
            assert piece.masked(outside).sup_norm() <= 1e-12
        with pytest.raises(AssertionError, match=r'Unknown piece kind'):
            list(decomposition.pieces('middle'))

    def test_offdiag_report(self):
        bank = KernelBank(VilenkinCharacters(), self.positive.radix)
        level = level_grid(self.positive)[0]
        report = verify_offdiag_l1(self.positive, level, 1, 0, bank)
        assert report.claim == 'offdiag-l1'
        assert len(report.rows) == 1
        assert report.rows[0]['lhs'] >= 0
        with pytest.raises(AssertionError, match=r'Cube 5 not in level 1'):
            verify_offdiag_l1(self.positive, 1.0, 1, 5, bank)


@pytest.mark.usefixtures('fields')
class TestWeakType:
    def test_certificate(self):
        bank = KernelBank(VilenkinCharacters(), self.positive.radix)
        level = level_grid(self.positive)[1]
        certificate = weak11_certificate(self.positive, level, bank)
        assert certificate.verify().passed
        assert 0 <= certificate.tail <= 1
        assert len(certificate.means) == 3
        assert certificate.residuals['below_q'] >= -1e-8
        assert certificate.fitted_c_total == pytest.approx(
            level * certificate.tail / self.positive.norm(1)
        )
        scale = max(1.0, self.positive.sup_norm()) * max(1.0, kernel_mass(bank))
        assert certificate.residuals['g_sup'] <= 1e-8 * scale
        assert certificate.assembled_bound >= certificate.g_bound + 2 * level
        assert certificate.sup_bound <= certificate.assembled_bound

    def test_corrupted_good_part(self, monkeypatch):
        bank = KernelBank(VilenkinCharacters(), self.positive.radix)
        identity = OperatorField.identity(self.positive.radix, 2)
        original = martingale.cz_decompose

        def corrupted(f, level):
            decomposition = original(f, level)
            return dataclasses.replace(
                decomposition, g=decomposition.g + identity * (10 * level)
            )

        monkeypatch.setattr(martingale, 'cz_decompose', corrupted)
        with pytest.raises(AssertionError, match=r'sigma~_n\(g\)\|\|_inf exceeds'):
            weak11_certificate(self.positive, 2 * self.positive.sup_norm(), bank)

    def test_verify_rejects_corrupted_means(self):
        bank = KernelBank(VilenkinCharacters(), self.positive.radix)
        level = 2 * self.positive.sup_norm()
        certificate = weak11_certificate(self.positive, level, bank)
        assert certificate.verify().passed
        assert certificate.tail == pytest.approx(0, abs=1e-12)
        shift = OperatorField.identity(self.positive.radix, 2)
        shift = shift * (10 * certificate.assembled_bound)
        means = [item + shift for item in certificate.means]
        failed = dataclasses.replace(certificate, means=means).verify()
        assert not failed.passed
        assert failed.failure['index'] == 0

    def test_good_part_below_mean(self):
        bank = KernelBank(VilenkinCharacters(), self.positive.radix)
        mean = np.linalg.norm(cond_exp(self.positive, 0).values[0], 2)
        decomposition = cz_decompose(self.positive, 0.5 * mean)
        certificate = weak11_certificate(self.positive, 0.5 * mean, bank)
        expected = kernel_mass(bank) * decomposition.g.sup_norm()
        assert certificate.g_bound == pytest.approx(expected)
        assert certificate.verify().passed

    def test_to_json(self):
        bank = KernelBank(VilenkinCharacters(), self.positive.radix)
        level = level_grid(self.positive)[2]
        certificate = weak11_certificate(self.positive, level, bank)
        summary = certificate.to_json()
        assert summary['depth'] == 3
        assert 'e' not in summary
        full = certificate.to_json(projections=True)
        assert np.array(full['e']).shape == (8, 2, 2, 2)

    def test_identity_field(self):
        radix = self.positive.radix
        bank = KernelBank(VilenkinCharacters(), radix)
        certificate = weak11_certificate(OperatorField.identity(radix, 2), 2.0, bank)
        assert certificate.tail == pytest.approx(0, abs=1e-12)
