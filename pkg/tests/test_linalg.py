import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcpo_lab import linalg
from qcpo_lab.exceptions import NotHermitianError, NotPositiveError, SingularError

from oracles import kron_loops, ptrace_loops, ptranspose_loops, random_density, unit

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def _rand(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _herm(rng, n):
    g = _rand(rng, (n, n))
    return 0.5 * (g + g.conj().T)


class TestKron:
    def test_identity(self):
        np.testing.assert_array_equal(linalg.kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_matrix_unit_position(self):
        # e_12 (x) e_12 for n = 2: row (0*2 + 0), column (1*2 + 1).
        out = linalg.kron(unit(2, 0, 1), unit(2, 0, 1))
        expected = np.zeros((4, 4))
        expected[0, 3] = 1
        np.testing.assert_array_equal(out, expected)
        np.testing.assert_array_equal(out, kron_loops(unit(2, 0, 1), unit(2, 0, 1)))

    def test_annihilator(self, rng):
        assert not np.any(linalg.kron(_rand(rng, (3, 3)), np.zeros((2, 2))))

    def test_rectangular_against_loops(self, rng):
        a, b = _rand(rng, (2, 3)), _rand(rng, (4, 2))
        np.testing.assert_allclose(linalg.kron(a, b), kron_loops(a, b), atol=1e-14)


class TestPartialTrace:
    def test_identity_product(self):
        n = 3
        np.testing.assert_allclose(linalg.partial_trace(np.eye(n * n), "B"), n * np.eye(n))

    def test_max_entangled(self):
        n = 3
        np.testing.assert_allclose(linalg.partial_trace(linalg.max_entangled_projector(n), "B"), np.eye(n))

    @pytest.mark.parametrize("slot", ["A", "B"])
    def test_random_against_loops(self, rng, slot):
        x = _rand(rng, (9, 9))
        np.testing.assert_allclose(linalg.partial_trace(x, slot), ptrace_loops(x, 3, 3, slot), atol=1e-14)

    @pytest.mark.parametrize("slot", ["A", "B"])
    def test_unequal_dims(self, rng, slot):
        x = _rand(rng, (6, 6))
        np.testing.assert_allclose(linalg.partial_trace(x, slot, (2, 3)), ptrace_loops(x, 2, 3, slot), atol=1e-14)

    def test_bad_dims(self):
        with pytest.raises(ValueError):
            linalg.partial_trace(np.eye(6), "B")
        with pytest.raises(ValueError):
            linalg.partial_trace(np.eye(6), "C", (2, 3))

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds, na=st.integers(1, 4), nb=st.integers(1, 4), slot=st.sampled_from("AB"))
    def test_trace_preserved(self, seed, na, nb, slot):
        x = _rand(np.random.default_rng(seed), (na * nb, na * nb))
        assert abs(np.trace(linalg.partial_trace(x, slot, (na, nb))) - np.trace(x)) <= 1e-13 * (1 + np.abs(x).sum())


class TestPartialTranspose:
    def test_product(self, rng):
        a, b = _rand(rng, (2, 2)), _rand(rng, (2, 2))
        np.testing.assert_allclose(linalg.partial_transpose(np.kron(a, b), "B"), np.kron(a, b.T), atol=1e-14)
        np.testing.assert_allclose(linalg.partial_transpose(np.kron(a, b), "A"), np.kron(a.T, b), atol=1e-14)

    def test_max_entangled_is_swap(self):
        for n in (2, 3):
            pt = linalg.partial_transpose(linalg.max_entangled_projector(n), "B")
            expected = np.zeros((n * n, n * n))
            for i in range(n):
                for j in range(n):
                    expected[i * n + j, j * n + i] = 1
            np.testing.assert_array_equal(pt, expected)
            w = np.linalg.eigvalsh(pt)
            np.testing.assert_allclose(w, [-1] * (n * (n - 1) // 2) + [1] * (n * (n + 1) // 2), atol=1e-14)

    def test_involution_exact(self, rng):
        x = _rand(rng, (6, 6))
        for slot in "AB":
            np.testing.assert_array_equal(linalg.partial_transpose(linalg.partial_transpose(x, slot, (2, 3)), slot, (2, 3)), x)

    @pytest.mark.parametrize("slot", ["A", "B"])
    def test_against_loops(self, rng, slot):
        x = _rand(rng, (6, 6))
        np.testing.assert_array_equal(linalg.partial_transpose(x, slot, (3, 2)), ptranspose_loops(x, 3, 2, slot))

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds, n=st.integers(2, 4))
    def test_hermiticity_and_trace(self, seed, n):
        h = _herm(np.random.default_rng(seed), n * n)
        pt = linalg.partial_transpose(h, "B")
        assert linalg.hermitian_deviation(pt) <= 1e-13
        assert abs(np.trace(pt) - np.trace(h)) <= 1e-13 * (1 + np.abs(h).sum())


class TestEig:
    def test_diagonal(self):
        w, v = linalg.eig_hermitian(np.diag([3.0, 1.0, 2.0]))
        np.testing.assert_allclose(w, [1, 2, 3])

    def test_swap(self):
        w, _ = linalg.eig_hermitian(linalg.swap(2))
        np.testing.assert_allclose(w, [-1, 1, 1, 1], atol=1e-14)

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds, n=st.integers(1, 8))
    def test_roundtrip(self, seed, n):
        h = _herm(np.random.default_rng(seed), n)
        w, v = linalg.eig_hermitian(h)
        assert np.all(np.diff(w) >= 0)
        scale = max(1.0, np.abs(w).max())
        np.testing.assert_allclose((v * w) @ v.conj().T, h, atol=1e-10 * scale)
        np.testing.assert_allclose(h @ v, v * w, atol=1e-10 * scale)
        np.testing.assert_allclose(v.conj().T @ v, np.eye(n), atol=1e-10)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError) as info:
            linalg.eig_hermitian(np.array([[0, 1], [0, 0]]))
        assert info.value.deviation == pytest.approx(1.0)


class TestPsd:
    def test_identity(self):
        st = linalg.psd_status(np.eye(3))
        assert st.is_psd and st.min_eigenvalue == pytest.approx(1)

    def test_swap(self):
        st = linalg.psd_status(linalg.swap(2))
        assert not st.is_psd
        assert st.min_eigenvalue == pytest.approx(-1)
        # Antisymmetric witness: (e_1 e_2 - e_2 e_1)/sqrt(2) up to phase.
        v = st.witness
        assert abs(v[0]) < 1e-12 and abs(v[3]) < 1e-12
        assert abs(v[1] + v[2]) < 1e-12
        assert np.vdot(v, linalg.swap(2) @ v).real == pytest.approx(-1)

    def test_zero(self):
        st = linalg.psd_status(np.zeros((2, 2)))
        assert st.is_psd and st.min_eigenvalue == 0

    def test_tolerance(self):
        assert linalg.psd_status(np.diag([1, -1e-10])).is_psd
        assert not linalg.psd_status(np.diag([1, -1e-10]), tol=1e-12).is_psd


class TestSqrt:
    def test_identity(self):
        np.testing.assert_allclose(linalg.sqrt_psd(np.eye(3)), np.eye(3))

    def test_diagonal(self):
        np.testing.assert_allclose(linalg.sqrt_psd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds, n=st.integers(1, 6))
    def test_roundtrip(self, seed, n):
        rho = random_density(n, np.random.default_rng(seed))
        s = linalg.sqrt_psd(rho)
        assert linalg.psd_status(s).is_psd
        np.testing.assert_allclose(s @ s, rho, atol=1e-9 * np.linalg.norm(rho, 2))

    def test_clips_tiny_negative(self):
        s = linalg.sqrt_psd(np.diag([1.0, -1e-12]))
        np.testing.assert_allclose(s, np.diag([1.0, 0.0]))

    def test_rejects_negative(self):
        with pytest.raises(NotPositiveError):
            linalg.sqrt_psd(np.diag([1.0, -1e-6]))

    def test_inv_sqrt(self):
        np.testing.assert_allclose(linalg.inv_sqrt_pd(np.eye(2)), np.eye(2))
        np.testing.assert_allclose(linalg.inv_sqrt_pd(np.diag([4.0, 1.0])), np.diag([0.5, 1.0]))

    def test_inv_sqrt_roundtrip(self, rng):
        rho = random_density(4, rng)
        r = linalg.inv_sqrt_pd(rho)
        np.testing.assert_allclose(r @ rho @ r, np.eye(4), atol=1e-8)

    def test_inv_sqrt_singular(self):
        with pytest.raises(SingularError) as info:
            linalg.inv_sqrt_pd(np.diag([1.0, 0.0]))
        assert info.value.min_eigenvalue == 0


class TestTransposeMap:
    def test_unit(self):
        np.testing.assert_array_equal(linalg.transpose_map(unit(2, 0, 1)), unit(2, 1, 0))

    def test_hermitian_is_conjugate(self, rng):
        h = _herm(rng, 3)
        np.testing.assert_allclose(linalg.transpose_map(h), h.conj())

    def test_sum_of_unit_conjugations(self, rng):
        n = 4
        a = _rand(rng, (n, n))
        alt = sum(unit(n, i, j) @ a @ unit(n, i, j) for i in range(n) for j in range(n))
        np.testing.assert_allclose(linalg.transpose_map(a), alt, atol=1e-14)

    @settings(max_examples=20, deadline=None)
    @given(seed=seeds, n=st.integers(1, 5))
    def test_trace_identity(self, seed, n):
        a = _rand(np.random.default_rng(seed), (n, n))
        lhs = sum(unit(n, i, j) @ a @ unit(n, j, i) for i in range(n) for j in range(n))
        np.testing.assert_allclose(lhs, np.trace(a) * np.eye(n), atol=1e-13)


class TestBasis:
    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_orthonormal(self, n):
        b = linalg.OperatorBasis(n)
        for ops in (b.units(), b.gell_mann()):
            assert len(ops) == n * n
            np.testing.assert_allclose(linalg.gram(ops), np.eye(n * n), atol=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_h_conditions(self, n):
        b = linalg.OperatorBasis(n)
        for h in b.h:
            assert abs(np.trace(h)) < 1e-14
            np.testing.assert_allclose(h, h.conj().T)
            for key in b.f:
                assert abs(np.trace(h @ b.f[key])) < 1e-14
                assert abs(np.trace(h @ b.g[key])) < 1e-14

    def test_h_convention(self):
        b = linalg.OperatorBasis(3)
        np.testing.assert_allclose(b.h[0], np.diag([1, -1, 0]) / np.sqrt(2))
        np.testing.assert_allclose(b.h[1], np.diag([1, 1, -2]) / np.sqrt(6))

    def test_f_g_hermitian(self):
        b = linalg.OperatorBasis(3)
        for key in b.f:
            np.testing.assert_allclose(b.g[key], b.g[key].conj().T)
            np.testing.assert_allclose(b.f[key], b.f[key].T)
