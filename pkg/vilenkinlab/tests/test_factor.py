import numpy as np
import pytest

from vilenkinlab.algebra.convergence import (
    bau_probe,
    cesaro_deficits,
    probe_projection,
    residual_sequences,
)
from vilenkinlab.algebra.factor import (
    build_W,
    factor_cond_exp,
    factor_hardy_norm,
    is_pauli_string,
    nc_cesaro,
    nc_fourier,
    nc_partial_sum,
    structure_constants,
)
from vilenkinlab.algebra.field import OperatorField, lambda_certificate, projection_trace
from vilenkinlab.algebra.matrix import (
    norm,
    normalized_trace,
    operator_norm,
    projection_residual,
)
from vilenkinlab.algebra.vilenkin import RadixSequence
from vilenkinlab.utils.common import random_operator, random_values


@pytest.mark.usefixtures('context')
class TestMatrixVilenkinSystem:
    def test_basis_is_orthonormal(self):
        basis = self.context.basis
        gram = np.einsum('mij,nij->mn', basis, np.conj(basis)) / self.context.dimension
        assert gram.shape == (64, 64)
        assert np.allclose(gram, np.eye(64), atol=1e-10)
        assert not basis.flags.writeable

    def test_build_W(self):
        assert build_W(0, self.context).allclose(np.eye(8))
        assert all(is_pauli_string(build_W(n, self.context)) for n in range(0, 64, 7))
        with pytest.raises(AssertionError, match=r'outside'):
            build_W(64, self.context)

    def test_structure_constants(self):
        omega, u = structure_constants(1, 2, self.context)
        assert omega == pytest.approx(1)
        assert u == pytest.approx(1)
        omega, _ = structure_constants(2, 1, self.context)
        assert omega == pytest.approx(-1)
        _, u = structure_constants(0, 3, self.context)
        assert u == pytest.approx(-1)

    def test_is_pauli_string(self):
        assert is_pauli_string(np.eye(4))
        assert not is_pauli_string(1j * np.eye(4))
        hadamard = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        assert not is_pauli_string(hadamard)

    def test_check_operator(self):
        with pytest.raises(AssertionError, match=r'Expected a 8 x 8 operator'):
            self.context.check_operator(np.eye(4))
        assert repr(self.context) == 'FactorContext(radix=(2, 2, 2), dimension=8)'


@pytest.mark.usefixtures('context')
class TestFactorAnalysis:
    def test_partial_sums(self, rng):
        x = random_operator(8, rng)
        assert nc_partial_sum(x, 64, self.context).allclose(x)
        for k in range(4):
            expected = factor_cond_exp(x, k, self.context)
            assert nc_partial_sum(x, 4**k, self.context).allclose(expected)
        assert nc_fourier(x, 0, self.context) == pytest.approx(normalized_trace(x))

    def test_cesaro(self, rng):
        x = random_operator(8, rng)
        assert nc_cesaro(x, 1, self.context).allclose(normalized_trace(x) * np.eye(8))
        with pytest.raises(AssertionError, match=r'not representable'):
            nc_cesaro(x, 65, self.context)

    def test_cond_exp(self, rng):
        x = random_operator(8, rng)
        assert factor_cond_exp(x, 3, self.context).allclose(x)
        first = factor_cond_exp(x, 1, self.context)
        assert factor_cond_exp(first, 1, self.context).allclose(first)
        assert first.trace() == pytest.approx(normalized_trace(x))

    def test_hardy_two_is_l2(self, rng):
        x = random_operator(8, rng)
        for flavor in ('column', 'row'):
            assert factor_hardy_norm(x, 2, self.context, flavor) == pytest.approx(
                norm(x, 2)
            )
        with pytest.raises(AssertionError, match=r'requires a FactorContext'):
            factor_hardy_norm(x, 1)

    def test_cesaro_deficit(self):
        deficits = cesaro_deficits(build_W(1, self.context), self.context)
        assert len(deficits) == 64
        expected = 1 / np.arange(1, 65)
        assert np.allclose(deficits, expected, atol=1e-12)


@pytest.mark.usefixtures('context')
class TestConvergenceProbe:
    def test_factor_probe(self, rng):
        table = bau_probe(random_operator(8, rng), context=self.context)
        assert table.is_monotone()
        assert table.is_monotone('partial_tail')
        assert table.terminal() <= 1e-9
        frame = table.frame()
        assert len(frame) == 4 * 64
        assert (frame['trace_tail'] < frame['epsilon']).all()

    def test_field_probe(self, rng):
        radix = RadixSequence((2, 3))
        f = OperatorField(radix, random_values(radix, 2, rng))
        table = bau_probe(f, (0.5,), starts=[1, 3, 6], system=self.characters)
        assert [row['n_0'] for row in table.rows] == [1, 3, 6]
        assert table.is_monotone()
        assert table.terminal() <= 1e-9

    def test_witness_projection(self, rng):
        means, _, _ = residual_sequences(random_operator(8, rng), self.context)
        t_max = float(np.max(operator_norm(means)))
        for epsilon in (1.0, 0.5, 0.1):
            e = probe_projection(means, epsilon)
            assert e.shape == (1, 8, 8)
            assert projection_residual(e) <= 1e-9
            assert 1 - projection_trace(e) < epsilon
            assert lambda_certificate(means, e, t_max, 1).passed
        zeros = np.zeros((3, 1, 2, 2))
        assert np.allclose(probe_projection(zeros, 0.5), np.eye(2))

    def test_invalid_probes(self, rng):
        x = random_operator(8, rng)
        with pytest.raises(AssertionError, match=r'epsilon in \(0, 1\]'):
            bau_probe(x, (0.0,), context=self.context)
        with pytest.raises(AssertionError, match=r'Tail starts'):
            bau_probe(x, starts=[65], context=self.context)
        with pytest.raises(AssertionError, match=r'require a FactorContext'):
            bau_probe(x)
