import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcpo_lab import classify, families, linalg, matrixio
from qcpo_lab.channels import LinearMap
from qcpo_lab.classify import DiagFamilyParams

from oracles import choi_loops, min_eig, ptranspose_loops, unit

seeds = st.integers(min_value=0, max_value=2**32 - 1)
BAND = 1e-7


def diag_family_choi(c, mu):
    """Choi operator of a -> sum_ij c_ij e_ij a e_ij^dag + mu a, unit by unit."""
    n = c.shape[0]

    def fn(a):
        out = mu * a
        for i in range(n):
            for j in range(n):
                out = out + c[i, j] * unit(n, i, j) @ a @ unit(n, i, j).conj().T
        return out

    return choi_loops(fn, n)


def random_params(rng, n):
    c = rng.uniform(-3, 3, (n, n))
    if rng.random() < 0.5:
        off = ~np.eye(n, dtype=bool)
        c[off] = np.abs(c[off])
    return c, rng.uniform(-3, 3)


class TestVerdicts:
    def test_identity_cp_not_ccp(self):
        phi = LinearMap.identity(3)
        assert classify.is_cp(phi)
        v = classify.is_ccp(phi)
        assert not v and v.min_eigenvalue == pytest.approx(-1)

    def test_transpose_ccp_not_cp(self):
        phi = LinearMap.transpose(2)
        assert classify.is_ccp(phi) and not classify.is_cp(phi)

    def test_depolarizing_both(self):
        phi = LinearMap.depolarizing(3)
        assert classify.is_cp(phi) and classify.is_ccp(phi)

    def test_bell_state_npt(self):
        v = classify.ppt_status(linalg.max_entangled_projector(2) / 2)
        assert not v.holds
        assert v.min_eigenvalue == pytest.approx(-0.5)
        pt = ptranspose_loops(linalg.max_entangled_projector(2) / 2, 2, 2, "B")
        assert np.vdot(v.witness, pt @ v.witness).real == pytest.approx(-0.5)

    def test_product_state_ppt(self):
        rho = np.kron(np.diag([0.3, 0.7]), np.diag([0.5, 0.5]))
        assert classify.ppt_status(rho).holds

    def test_ppt_rejects_non_state(self):
        with pytest.raises(ValueError):
            classify.ppt_status(linalg.swap(2))


class TestCpClosedForm:
    def test_matrix(self):
        p = DiagFamilyParams(np.array([[1.0, 2.0], [3.0, 4.0]]), 0.5)
        np.testing.assert_allclose(classify.thm1_matrix(p), [[1.5, 0.5], [0.5, 4.5]])

    def test_diag_family_choi_matches_oracle(self, rng):
        for n in (2, 3):
            c, mu = random_params(rng, n)
            np.testing.assert_allclose(families.make_diag_family(DiagFamilyParams(c, mu)).choi, diag_family_choi(c, mu), atol=1e-13)

    def test_negative_offdiag_fails(self):
        c = np.full((2, 2), 5.0)
        c[0, 1] = -0.1
        p = DiagFamilyParams(c, 0.0)
        assert not classify.thm1_cp_closed_form(p)
        assert min_eig(diag_family_choi(c, 0.0)) < 0

    def test_mu_boundary(self):
        # n = 2, c = 1: M = I + mu J is PSD iff mu >= -1/2.
        assert classify.thm1_cp_closed_form(DiagFamilyParams.uniform(2, 1.0, -0.5))
        assert not classify.thm1_cp_closed_form(DiagFamilyParams.uniform(2, 1.0, -0.51))

    @settings(max_examples=200, deadline=None)
    @given(seed=seeds, n=st.integers(2, 4))
    def test_oracle_equivalence(self, seed, n):
        c, mu = random_params(np.random.default_rng(seed), n)
        e = min_eig(diag_family_choi(c, mu))
        if abs(e) >= BAND:
            assert classify.thm1_cp_closed_form(DiagFamilyParams(c, mu)) == (e >= 0)


class TestCoCpClosedForm:
    def test_delta_block_hermitian(self):
        p = DiagFamilyParams(np.array([[0.0, 2.0], [1.0, 0.0]]), 0.3)
        d = classify.delta_block(p, 0, 1)
        np.testing.assert_allclose(d, d.conj().T)
        np.testing.assert_allclose(np.linalg.det(d).real, 2.0 - 0.09)

    def test_transpose_map_member(self):
        # c = 0, mu = 1 is the identity map: not co-CP.
        assert not classify.thm2_ccp_closed_form(DiagFamilyParams.uniform(2, 0.0, 1.0))
        # c_ij = 1, mu = -1 is the reduction map a -> tr(a) I - a, which is co-CP.
        assert classify.thm2_ccp_closed_form(DiagFamilyParams.uniform(3, 1.0, -1.0))

    @settings(max_examples=200, deadline=None)
    @given(seed=seeds, n=st.integers(2, 4))
    def test_oracle_equivalence(self, seed, n):
        c, mu = random_params(np.random.default_rng(seed), n)
        p = DiagFamilyParams(c, mu)
        assert classify.thm2_ccp_inequalities(p) == classify.thm2_ccp_blocks(p)
        e = min_eig(ptranspose_loops(diag_family_choi(c, mu), n, n, "B"))
        if abs(e) >= BAND:
            assert classify.thm2_ccp_closed_form(p) == (e >= 0)


class TestCpAndCoCp:
    def test_both(self):
        p = DiagFamilyParams.uniform(3, 1.0, 0.2)
        assert classify.cor3_pnp_closed_form(p)
        assert classify.thm1_cp_closed_form(p) and classify.thm2_ccp_closed_form(p)

    def test_strict_offdiag(self):
        c = np.eye(2)
        assert not classify.cor3_pnp_closed_form(DiagFamilyParams(c, 0.0))
        # The CP checker alone accepts the zero off-diagonal boundary.
        assert classify.thm1_cp_closed_form(DiagFamilyParams(c, 0.0))

    @settings(max_examples=200, deadline=None)
    @given(seed=seeds, n=st.integers(2, 4))
    def test_implies_both_spectra(self, seed, n):
        c, mu = random_params(np.random.default_rng(seed), n)
        if classify.cor3_pnp_closed_form(DiagFamilyParams(c, mu)):
            choi = diag_family_choi(c, mu)
            assert min_eig(choi) >= -1e-9
            assert min_eig(ptranspose_loops(choi, n, n, "B")) >= -1e-9


class TestWindow:
    def test_acceptance_instance(self):
        assert classify.kpos_window_closed_form(4, 2, 2.5, 1.4)
        assert not classify.kpos_window_closed_form(4, 1, 2.5, 1.4)
        assert classify.kpos_window_find(4, 2.5, 1.4 * 1.5) == 2

    def test_bounds(self):
        # k/(n-k) <= r < (k+1)/(n-k-1) with n = 4, k = 2: [1, 3).
        assert classify.kpos_window_closed_form(4, 2, 2.5, 1.0)
        assert not classify.kpos_window_closed_form(4, 2, 2.5, 3.0)
        assert not classify.kpos_window_closed_form(4, 2, 3.0, 1.4)
        assert not classify.kpos_window_closed_form(4, 2, 1.9, 1.4)

    def test_table(self):
        r = np.full((4, 4), 1.4)
        np.fill_diagonal(r, 100.0)
        assert classify.kpos_window_closed_form(4, 2, 2.5, r)
        r[0, 1] = 5.0
        assert not classify.kpos_window_closed_form(4, 2, 2.5, r)

    def test_invalid(self):
        with pytest.raises(ValueError):
            classify.kpos_window_closed_form(4, 1.5, 2.5, 1.4)


def reduction_choi(n, k):
    return k * np.eye(n * n) - linalg.max_entangled_projector(n)


class TestFalsifier:
    @pytest.mark.parametrize("n,k", [(2, 1), (3, 1), (3, 2), (4, 2)])
    def test_reduction_values(self, n, k):
        for r in range(1, n + 1):
            res = classify.schmidt_rank_k_falsifier(reduction_choi(n, k), r, restarts=20, seed=1)
            assert res.min_value == pytest.approx(k - r, abs=1e-6)

    def test_witness_is_valid(self, rng):
        g = rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9))
        h = g + g.conj().T
        res = classify.schmidt_rank_k_falsifier(h, 2, restarts=10, seed=3)
        w = res.witness
        assert np.linalg.norm(w) == pytest.approx(1)
        assert classify.schmidt_rank(w, (3, 3)) <= 2
        assert np.vdot(w, h @ w).real == pytest.approx(res.min_value, abs=1e-10)
        # Never below the unconstrained minimum, never above the product-vector value.
        assert res.min_value >= min_eig(h) - 1e-10
        assert res.min_value <= classify.schmidt_rank_k_falsifier(h, 1, restarts=10, seed=3).min_value + 1e-10

    def test_product_brute_force(self, rng):
        # Dense grid over product vectors of two qubits as the independent route.
        g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        h = g + g.conj().T
        th = np.linspace(0, np.pi, 41)
        ph = np.linspace(0, 2 * np.pi, 41, endpoint=False)
        vecs = np.array([[np.cos(t / 2), np.exp(1j * p) * np.sin(t / 2)] for t in th for p in ph])
        best = np.inf
        for a in vecs:
            psi = np.einsum("i,kj->kij", a, vecs).reshape(len(vecs), 4)
            best = min(best, np.einsum("ki,ij,kj->k", psi.conj(), h, psi).real.min())
        res = classify.schmidt_rank_k_falsifier(h, 1, restarts=30, seed=0)
        assert res.min_value <= best + 1e-10
        assert res.min_value >= best - 0.05

    def test_deterministic(self):
        c = reduction_choi(3, 1)
        a = classify.schmidt_rank_k_falsifier(c, 1, restarts=8, seed=5)
        b = classify.schmidt_rank_k_falsifier(c, 1, restarts=8, seed=5)
        np.testing.assert_array_equal(a.values, b.values)

    def test_thread_count_irrelevant(self, monkeypatch):
        c = reduction_choi(3, 2)
        monkeypatch.setenv("QCPO_LAB_THREADS", "1")
        a = classify.schmidt_rank_k_falsifier(c, 2, restarts=8, seed=2)
        monkeypatch.setenv("QCPO_LAB_THREADS", "4")
        b = classify.schmidt_rank_k_falsifier(c, 2, restarts=8, seed=2)
        np.testing.assert_array_equal(a.values, b.values)

    def test_full_rank_exact(self):
        res = classify.schmidt_rank_k_falsifier(reduction_choi(3, 1), 3)
        assert res.restarts == 0
        assert res.min_value == pytest.approx(-2)

    def test_bad_rank(self):
        with pytest.raises(ValueError):
            classify.schmidt_rank_k_falsifier(np.eye(4), 0)

    def test_schmidt_rank(self):
        assert classify.schmidt_rank(np.array([1, 0, 0, 0]), (2, 2)) == 1
        assert classify.schmidt_rank(np.array([1, 0, 0, 1]) / np.sqrt(2), (2, 2)) == 2


class TestReport:
    def test_bell(self):
        rep = classify.classify_operator(linalg.max_entangled_projector(2) / 2)
        d = rep.to_dict()
        assert d["is_ppt_state"] is False and d["is_npt_state"] is True
        assert d["pt_min_eig"] == pytest.approx(-0.5)
        assert "pt_witness" in d and "min_eig_witness" not in d

    def test_non_psd_state_fields(self):
        d = classify.classify_operator(linalg.swap(2)).to_dict()
        assert d["is_ppt_state"] is None and not d["is_cp"]

    def test_key_order(self):
        d = classify.classify_operator(np.eye(4) / 4).to_dict()
        assert list(d)[:4] == ["n", "trace", "min_eig", "pt_min_eig"]

    def test_serialisable(self):
        rep = classify.classify_operator(reduction_choi(3, 1), kpos=True, restarts=5, seed=0)
        text = matrixio.dumps(rep.to_dict())
        back = json.loads(text)
        assert back["kpos_window"]["k_upper"] == 2
        assert back["kpos_window"]["k_lower"] == 1
