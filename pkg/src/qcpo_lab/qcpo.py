"""Quantum conditional probability operators and compound states.

A QCPO on ``C^n (x) C^m`` is a PSD operator whose partial trace over the
second factor (slot B) is the identity on the first.  Conditioning a joint
state ``sigma`` on its slot-A marginal produces one; conjugating a QCPO with
``rho^{1/2} (x) I`` gives back a compound state with slot-A marginal ``rho``.

Marginal naming: the operator ``sum_ij rho^{1/2} phi(e_ij) rho^{1/2} (x) e_ij``
has ``trace_out_B == rho`` and ``trace_out_A == T(phi*(rho))``.
"""

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from . import linalg
from .channels import LinearMap, apply, dual, require_unital
from .exceptions import NotPositiveError, NotUnitalError, SingularError

QCPO_TOL = 1e-10
DEGENERACY_TOL = 1e-8


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class QcpoReport:
    min_eigenvalue: float
    marginal_deviation: float
    witness: np.ndarray
    tol: float

    @property
    def is_psd(self) -> bool:
        return self.min_eigenvalue >= -self.tol

    @property
    def is_normalized(self) -> bool:
        return self.marginal_deviation <= self.tol

    @property
    def valid(self) -> bool:
        return self.is_psd and self.is_normalized


@dataclass(frozen=True)
class Qcpo:
    """A validated quantum conditional probability operator."""

    operator: np.ndarray
    dims: Tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "operator", _readonly(self.operator))
        object.__setattr__(self, "dims", linalg.square_dims(self.operator, self.dims))

    @classmethod
    def from_operator(cls, pi, dims=None, tol: float = QCPO_TOL) -> "Qcpo":
        """Validate ``pi`` and wrap it; raises if either QCPO condition fails."""
        rep = validate_qcpo(pi, dims, tol)
        if not rep.is_psd:
            raise NotPositiveError(rep.min_eigenvalue, rep.witness, f"not a QCPO: min eigenvalue {rep.min_eigenvalue:.6e}")
        if not rep.is_normalized:
            raise NotUnitalError(rep.marginal_deviation, f"not a QCPO: ||tr_B pi - I|| = {rep.marginal_deviation:.3e}")
        return cls(linalg.as_matrix(pi), linalg.square_dims(pi, dims))


@dataclass(frozen=True)
class CompoundState:
    operator: np.ndarray
    dims: Tuple[int, int]
    provenance: str
    rho: np.ndarray
    source: object = None

    def __post_init__(self):
        object.__setattr__(self, "operator", _readonly(self.operator))
        object.__setattr__(self, "rho", _readonly(self.rho))


@dataclass(frozen=True)
class OhyaDecomposition:
    """Spectral clusters of a density matrix, largest eigenvalue first."""

    eigenvalues: np.ndarray
    multiplicities: Tuple[int, ...]
    projectors: List[np.ndarray] = field(repr=False)

    @property
    def normalized_projectors(self) -> List[np.ndarray]:
        return [p / m for p, m in zip(self.projectors, self.multiplicities)]

    def reconstruct(self) -> np.ndarray:
        return sum(lam * p for lam, p in zip(self.eigenvalues, self.projectors))


def validate_qcpo(pi, dims=None, tol: float = QCPO_TOL) -> QcpoReport:
    """Check positivity and ``tr_B pi = I``.

    ``marginal_deviation`` is the Frobenius distance of the slot-A marginal
    from the identity; for ``I (x) I`` on ``C^n (x) C^n`` it is ``(n-1) sqrt(n)``.
    """
    pi = linalg.as_matrix(pi)
    na, nb = linalg.square_dims(pi, dims)
    st = linalg.psd_status(pi, tol)
    marg = linalg.partial_trace(pi, "B", (na, nb))
    dev = float(np.linalg.norm(marg - np.eye(na)))
    return QcpoReport(st.min_eigenvalue, dev, st.witness, tol)


def qcpo_from_state(sigma, dims=None) -> Qcpo:
    """Condition a joint state on its slot-A marginal.

    Returns ``(s^{-1/2} (x) I) sigma (s^{-1/2} (x) I)`` with ``s = tr_B sigma``.
    A singular marginal raises :class:`SingularError` naming its smallest eigenvalue.
    """
    sigma = linalg.as_matrix(sigma)
    na, nb = linalg.square_dims(sigma, dims)
    st = linalg.psd_status(sigma)
    if not st.is_psd:
        raise NotPositiveError(st.min_eigenvalue, st.witness)
    marg = linalg.partial_trace(sigma, "B", (na, nb))
    try:
        s = linalg.inv_sqrt_pd(marg)
    except SingularError as exc:
        raise SingularError(exc.min_eigenvalue, f"marginal tr_B(sigma) is not strictly positive (min eigenvalue {exc.min_eigenvalue:.6e})") from None
    k = linalg.kron(s, np.eye(nb))
    return Qcpo(k @ sigma @ k, (na, nb))


def _as_density(rho, n: int, tol: float = 1e-10) -> np.ndarray:
    rho = linalg.as_matrix(rho)
    if rho.shape != (n, n):
        raise ValueError(f"density matrix must be {n}x{n}, got {rho.shape}")
    st = linalg.psd_status(rho)
    if not st.is_psd:
        raise NotPositiveError(st.min_eigenvalue, st.witness, "rho is not positive semidefinite")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise ValueError(f"rho must have unit trace, got {tr!r}")
    return 0.5 * (rho + rho.conj().T)


def compound_from_qcpo(pi: Qcpo, rho) -> CompoundState:
    """``omega = (rho^{1/2} (x) I) pi (rho^{1/2} (x) I)``; rank-deficient ``rho`` is allowed."""
    if not isinstance(pi, Qcpo):
        pi = Qcpo.from_operator(pi)
    na, nb = pi.dims
    rho = _as_density(rho, na)
    k = linalg.kron(linalg.sqrt_psd(rho), np.eye(nb))
    return CompoundState(k @ pi.operator @ k, (na, nb), "qcpo", rho, pi)


def channel_of_qcpo(pi: Qcpo) -> LinearMap:
    """Read ``phi(e_ij)`` off the blocks of ``pi = sum_ij phi(e_ij) (x) e_ij``."""
    op = pi.operator if isinstance(pi, Qcpo) else linalg.as_matrix(pi)
    return LinearMap(op)


def qcpo_of_channel(phi: LinearMap, tol: float = QCPO_TOL) -> Qcpo:
    """Choi operator of a unital CP map, as a QCPO.

    Raises :class:`NotPositiveError` (with witness) if ``phi`` is not CP and
    :class:`NotUnitalError` if it is not unital.
    """
    st = linalg.psd_status(phi.choi, tol)
    if not st.is_psd:
        raise NotPositiveError(st.min_eigenvalue, st.witness, f"map is not CP: Choi min eigenvalue {st.min_eigenvalue:.6e}")
    require_unital(phi, tol)
    return Qcpo(phi.choi, (phi.n, phi.n))


def ohya_decompose(rho, degeneracy_tol: float = DEGENERACY_TOL) -> OhyaDecomposition:
    """Group the spectrum of ``rho`` into distinct eigenvalues with their projectors.

    Neighbouring sorted eigenvalues closer than ``degeneracy_tol * max(1, ||rho||)``
    fall into one cluster; a cluster's value is the mean of its members.
    """
    rho = linalg.as_matrix(rho)
    w, v = linalg.eig_hermitian(rho)
    w, v = w[::-1], v[:, ::-1]
    gap = degeneracy_tol * max(1.0, float(np.max(np.abs(w))))
    groups = [[0]]
    for idx in range(1, len(w)):
        if w[groups[-1][-1]] - w[idx] <= gap:
            groups[-1].append(idx)
        else:
            groups.append([idx])
    lams, mults, projs = [], [], []
    for grp in groups:
        vecs = v[:, grp]
        lams.append(float(np.mean(w[grp])))
        mults.append(len(grp))
        projs.append(vecs @ vecs.conj().T)
    return OhyaDecomposition(np.array(lams), tuple(mults), projs)


def ohya_compound(rho, phi_star: LinearMap, degeneracy_tol: float = DEGENERACY_TOL, tol: float = 1e-10) -> CompoundState:
    """Separable compound state ``sum_k lambda_k m_k rho_k (x) phi*(rho_k)``.

    ``phi_star`` must send the normalised spectral projections of ``rho`` to
    states; a non-unit trace or a negative eigenvalue beyond ``tol`` is rejected.
    """
    n = phi_star.n
    rho = _as_density(rho, n)
    dec = ohya_decompose(rho, degeneracy_tol)
    omega = np.zeros((n * n, n * n), dtype=complex)
    for lam, m, rk in zip(dec.eigenvalues, dec.multiplicities, dec.normalized_projectors):
        out = apply(phi_star, rk)
        tr = np.trace(out).real
        if abs(tr - 1.0) > tol:
            raise ValueError(f"phi* does not preserve trace on a spectral projection (trace {tr!r})")
        st = linalg.psd_status(out, tol)
        if not st.is_psd:
            raise NotPositiveError(st.min_eigenvalue, st.witness, "phi* maps a spectral projection outside the PSD cone")
        omega += lam * m * linalg.kron(rk, out)
    return CompoundState(omega, (n, n), "ohya", rho, phi_star)


def marginals(omega, dims=None) -> Tuple[np.ndarray, np.ndarray]:
    """``(trace_out_B, trace_out_A)`` of a bipartite operator."""
    omega = omega.operator if isinstance(omega, CompoundState) else omega
    return linalg.partial_trace(omega, "B", dims), linalg.partial_trace(omega, "A", dims)


def expected_b_marginal(phi: LinearMap, rho) -> np.ndarray:
    """``T(phi*(rho))``, the slot-B marginal of the QCPO-based compound state."""
    return apply(dual(phi), rho).T
