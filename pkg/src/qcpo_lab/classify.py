"""Positivity classifiers for maps and bipartite states.

Spectral verdicts (CP, co-CP, PPT) come from eigenvalues of the Choi operator
and its partial transpose.  The structured family
``phi(a) = sum_ij c_ij e_ij a e_ij^dag + mu a`` additionally has closed-form
criteria, implemented here exactly as printed so they can be compared with
the spectral oracles.  Schmidt-rank-k positivity has no closed form in
general; :func:`schmidt_rank_k_falsifier` searches for violating vectors.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from . import linalg
from ._parallel import parallel_map
from .channels import LinearMap, is_unital, unital_deviation
from .exceptions import NotPositiveError


@dataclass(frozen=True)
class Verdict:
    """Outcome of a PSD test; ``min_eigenvalue`` and ``witness`` certify a negative answer."""

    holds: bool
    min_eigenvalue: float
    witness: np.ndarray = field(repr=False)

    def __bool__(self):
        return self.holds


def _verdict(h, tol: float) -> Verdict:
    st = linalg.psd_status(h, tol)
    return Verdict(st.is_psd, st.min_eigenvalue, st.witness)


def is_cp(phi: LinearMap, tol: float = linalg.PSD_TOL) -> Verdict:
    """Complete positivity: the Choi operator is PSD."""
    return _verdict(phi.choi, tol)


def is_ccp(phi: LinearMap, tol: float = linalg.PSD_TOL) -> Verdict:
    """Complete copositivity: ``T o phi`` is CP, i.e. the partially transposed Choi operator is PSD."""
    return _verdict(linalg.partial_transpose(phi.choi, "B"), tol)


def ppt_status(omega, dims=None, tol: float = linalg.PSD_TOL) -> Verdict:
    """PPT test for a PSD bipartite operator (transpose on slot B).

    Raises :class:`NotPositiveError` if ``omega`` itself is not PSD.
    """
    st = linalg.psd_status(omega, tol)
    if not st.is_psd:
        raise NotPositiveError(st.min_eigenvalue, st.witness, "PPT test needs a PSD operator")
    return _verdict(linalg.partial_transpose(omega, "B", dims), tol)


# -- closed-form criteria for sum_ij c_ij e_ij a e_ij^dag + mu a -------------------


@dataclass(frozen=True)
class DiagFamilyParams:
    c: np.ndarray
    mu: float

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError(f"coefficient table must be square, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "mu", float(self.mu))

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @classmethod
    def uniform(cls, n: int, value: float, mu: float) -> "DiagFamilyParams":
        return cls(np.full((n, n), float(value)), mu)


def _offdiag_pairs(n):
    return [(i, j) for i in range(n) for j in range(n) if i != j]


def thm1_matrix(p: DiagFamilyParams) -> np.ndarray:
    """``[c_ii delta_ij + mu]``."""
    return np.diag(np.diag(p.c)) + p.mu * np.ones((p.n, p.n))


def thm1_cp_closed_form(p: DiagFamilyParams, tol: float = 0.0) -> bool:
    """CP iff ``c_ij >= 0`` for ``i != j`` and ``[c_ii delta_ij + mu]`` is PSD."""
    if any(p.c[i, j] < 0 for i, j in _offdiag_pairs(p.n)):
        return False
    return bool(np.linalg.eigvalsh(thm1_matrix(p))[0] >= -tol)


def thm2_ccp_inequalities(p: DiagFamilyParams) -> bool:
    c, mu = p.c, p.mu
    if any(c[i, i] + mu < 0 for i in range(p.n)):
        return False
    for i, j in _offdiag_pairs(p.n):
        if c[i, j] + c[j, i] < 2 * mu:
            return False
        if c[i, j] + c[j, i] < -2 * mu:
            return False
        if c[i, j] * c[j, i] < mu * mu:
            return False
    return True


def delta_block(p: DiagFamilyParams, k: int, l: int) -> np.ndarray:
    """The 2x2 Hermitian block governing the (k, l) sector of ``T o phi``."""
    s = 0.5 * (p.c[k, l] + p.c[l, k])
    d = 0.5 * (p.c[k, l] - p.c[l, k])
    return np.array([[s + p.mu, -1j * d], [1j * d, s - p.mu]])


def thm2_ccp_blocks(p: DiagFamilyParams, tol: float = 0.0) -> bool:
    if any(p.c[i, i] + p.mu < 0 for i in range(p.n)):
        return False
    for k in range(p.n):
        for l in range(k + 1, p.n):
            if np.linalg.eigvalsh(delta_block(p, k, l))[0] < -tol:
                return False
    return True


def thm2_ccp_closed_form(p: DiagFamilyParams) -> bool:
    """Complete copositivity via the inequality list; the block form must agree.

    Raises ``AssertionError`` if the two forms disagree, which would indicate
    a sample sitting on a measure-zero boundary or an implementation bug.
    """
    ineq = thm2_ccp_inequalities(p)
    blocks = thm2_ccp_blocks(p)
    if ineq != blocks:
        raise AssertionError(f"inequality form ({ineq}) and block form ({blocks}) disagree for {p}")
    return ineq


def cor3_pnp_closed_form(p: DiagFamilyParams) -> bool:
    """CP and co-CP via ``c_ij > 0``, ``c_ij c_ji >= mu^2``, ``c_ii + mu >= 0``, ``[c_ii delta_ij + mu] >= 0``.

    Strict positivity is imposed on off-diagonal coefficients only; the
    diagonal ones enter through the last two conditions.
    """
    c, mu = p.c, p.mu
    for i, j in _offdiag_pairs(p.n):
        if not c[i, j] > 0:
            return False
        if c[i, j] * c[j, i] < mu * mu:
            return False
    if any(c[i, i] + mu < 0 for i in range(p.n)):
        return False
    return bool(np.linalg.eigvalsh(thm1_matrix(p))[0] >= 0)


def kpos_window_closed_form(n: int, k: int, c: float, c_offdiag_ratio) -> bool:
    """Whether ``a -> c sum_i e_ii a e_ii + sum_{i != j} c_ij e_ij a e_ij^dag - a`` is
    k-positive but not (k+1)-positive, by the window
    ``1 <= k <= c < k+1 < n`` and ``k/(n-k) <= c_ij/(n-c) < (k+1)/(n-k-1)``.

    ``c_offdiag_ratio`` is ``c_ij/(n-c)``, a scalar or a table whose
    off-diagonal entries are all tested.
    """
    if int(n) != n or n < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {n!r}")
    if int(k) != k:
        raise ValueError(f"k must be an integer, got {k!r}")
    if not (1 <= k <= c < k + 1 < n):
        return False
    r = np.asarray(c_offdiag_ratio, dtype=float)
    if r.ndim == 2:
        r = r[~np.eye(r.shape[0], dtype=bool)]
    lo, hi = k / (n - k), (k + 1) / (n - k - 1)
    return bool(np.all(r >= lo) and np.all(r < hi))


def kpos_window_find(n: int, c: float, c_offdiag) -> Optional[int]:
    """The k for which the closed-form window holds, given the raw ``c_ij`` (or ``None``)."""
    if c >= n:
        return None
    ratio = np.asarray(c_offdiag, dtype=float) / (n - c)
    for k in range(1, n - 1):
        if kpos_window_closed_form(n, k, c, ratio):
            return k
    return None


# -- Schmidt-rank-k falsifier ----------------------------------------------------


@dataclass(frozen=True)
class FalsifierResult:
    min_value: float
    witness: np.ndarray = field(repr=False)
    rank: int
    restarts: int
    seed: int
    values: np.ndarray = field(repr=False)

    @property
    def negative(self) -> bool:
        return self.min_value < 0


def _orthonormal_rows(m):
    # Rows of the returned k x d matrix are orthonormal.
    q, _ = np.linalg.qr(m.conj().T)
    return q.conj().T


def _seesaw(c, na, nb, k, rng, max_iter, tol):
    lf = rng.standard_normal((na, k)) + 1j * rng.standard_normal((na, k))
    rf = rng.standard_normal((k, nb)) + 1j * rng.standard_normal((k, nb))
    rf = _orthonormal_rows(rf)
    eye_a, eye_b = np.eye(na), np.eye(nb)
    prev = np.inf
    for _ in range(max_iter):
        a = np.kron(eye_a, rf.T)
        w, v = np.linalg.eigh(a.conj().T @ c @ a)
        lf = v[:, 0].reshape(na, k)
        q, _ = np.linalg.qr(lf)
        lf = q
        b = np.kron(lf, eye_b)
        w, v = np.linalg.eigh(b.conj().T @ c @ b)
        val = float(w[0])
        rf = v[:, 0].reshape(k, nb)
        if prev - val < tol:
            break
        prev = val
        rf = _orthonormal_rows(rf)
    psi = np.kron(lf, eye_b) @ v[:, 0]
    return val, psi / np.linalg.norm(psi)


def schmidt_rank_k_falsifier(
    choi,
    k: int,
    restarts: int = 200,
    seed: int = 0,
    dims: Optional[Sequence[int]] = None,
    max_iter: int = 500,
    tol: float = 1e-14,
) -> FalsifierResult:
    """Minimise ``<psi|C|psi>`` over unit vectors of Schmidt rank at most ``k``.

    ``psi`` is parametrised as ``vec(L R)`` with ``L`` of shape ``(nA, k)`` and
    ``R`` of shape ``(k, nB)``; each half-step orthonormalises one factor and
    takes the lowest eigenvector of the compressed operator in the other.
    Restart ``j`` draws its start from ``SeedSequence(seed).spawn(restarts)[j]``,
    so the result does not depend on thread scheduling.

    A negative ``min_value`` certifies that the map with Choi operator ``C`` is
    not k-positive; a nonnegative one is only evidence.
    """
    c = linalg.check_hermitian(choi)
    na, nb = linalg.square_dims(c, dims)
    if int(k) != k or k < 1:
        raise ValueError(f"Schmidt rank must be a positive integer, got {k!r}")
    if k >= min(na, nb):
        w, v = np.linalg.eigh(c)
        return FalsifierResult(float(w[0]), v[:, 0], int(k), 0, seed, np.array([w[0]]))
    children = np.random.SeedSequence(seed).spawn(restarts)
    runs = parallel_map(lambda ss: _seesaw(c, na, nb, int(k), np.random.default_rng(ss), max_iter, tol), children)
    values = np.array([r[0] for r in runs])
    best = int(np.argmin(values))
    return FalsifierResult(float(values[best]), runs[best][1], int(k), restarts, seed, values)


def schmidt_rank(psi, dims: Tuple[int, int], tol: float = 1e-10) -> int:
    """Number of singular values of the coefficient matrix of ``psi`` above ``tol``."""
    s = np.linalg.svd(np.asarray(psi).reshape(dims), compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


# -- reports ---------------------------------------------------------------------


@dataclass
class ClassificationReport:
    """Verdicts on one bipartite operator read both as a Choi operator and as a state.

    State verdicts are ``None`` when the operator is not PSD.
    """

    n: int
    min_eig: float
    pt_min_eig: float
    is_cp: bool
    is_ccp: bool
    is_unital: bool
    unital_deviation: float
    trace: float
    is_ppt_state: Optional[bool]
    is_npt_state: Optional[bool]
    min_eig_witness: np.ndarray = field(repr=False)
    pt_witness: np.ndarray = field(repr=False)
    kpos_window: Optional[dict] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "n": self.n,
            "trace": self.trace,
            "min_eig": self.min_eig,
            "pt_min_eig": self.pt_min_eig,
            "is_cp": self.is_cp,
            "is_ccp": self.is_ccp,
            "is_unital": self.is_unital,
            "unital_deviation": self.unital_deviation,
            "is_ppt_state": self.is_ppt_state,
            "is_npt_state": self.is_npt_state,
        }
        if not self.is_cp:
            out["min_eig_witness"] = self.min_eig_witness
        if not self.is_ccp:
            out["pt_witness"] = self.pt_witness
        if self.kpos_window is not None:
            out["kpos_window"] = self.kpos_window
        out.update(self.extra)
        return out


def kpos_window_falsifier(choi, restarts: int = 200, seed: int = 0, tol: float = linalg.PSD_TOL) -> dict:
    """Bracket the largest k for which the Choi quadratic form is nonnegative on Schmidt-rank-k vectors.

    ``k_lower`` is the largest rank with no negative value found (evidence only);
    ``k_upper`` the smallest rank with a certified negative witness, or ``None``.
    """
    n, _ = linalg.square_dims(choi)
    values = {}
    k_upper = None
    for r in range(1, n + 1):
        res = schmidt_rank_k_falsifier(choi, r, restarts, seed)
        values[str(r)] = res.min_value
        if res.min_value < -tol:
            k_upper = r
            break
    k_lower = (k_upper - 1) if k_upper is not None else n
    return {"k_lower": k_lower, "k_upper": k_upper, "method": "falsifier", "min_values": values}


def classify_operator(x, dims=None, tol: float = linalg.PSD_TOL, kpos: bool = False, restarts: int = 200, seed: int = 0) -> ClassificationReport:
    """Full report on a square bipartite operator on ``C^n (x) C^n``."""
    x = linalg.check_hermitian(x)
    n, _ = linalg.square_dims(x, dims)
    st = linalg.psd_status(x, tol)
    pt = linalg.psd_status(linalg.partial_transpose(x, "B"), tol)
    phi = LinearMap(x)
    dev = unital_deviation(phi)
    ppt = (st.is_psd and pt.is_psd) if st.is_psd else None
    report = ClassificationReport(
        n=n,
        min_eig=st.min_eigenvalue,
        pt_min_eig=pt.min_eigenvalue,
        is_cp=st.is_psd,
        is_ccp=pt.is_psd,
        is_unital=is_unital(phi),
        unital_deviation=dev,
        trace=float(np.trace(x).real),
        is_ppt_state=ppt,
        is_npt_state=(not ppt) if ppt is not None else None,
        min_eig_witness=st.witness,
        pt_witness=pt.witness,
    )
    if kpos:
        report.kpos_window = kpos_window_falsifier(x, restarts, seed, tol)
    return report
