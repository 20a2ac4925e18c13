"""Parametric QCPOs, maps and compound states.

* ``pi_lambda``: isotropic QCPO ``(1-lam)/n I(x)I + lam sum_ij e_ij (x) e_ij``.
* ``pi_gamma``: the ``gamma``-deformed operator with blocks ``n I delta_ij + a_ij``.
* diagonal family ``a -> sum_ij c_ij e_ij a e_ij^dag + mu a``.
* ``phi_k``: CP map whose transpose is the reduction-type map ``k tr(a) I - a``.
* the two-parameter family with ``c_ii = c``, ``mu = -1`` and its transpose companion.

Parameters outside the admissible ranges are accepted; the classifiers
report what goes wrong.
"""

from functools import lru_cache
from typing import Optional

import numpy as np

from . import linalg
from .channels import LinearMap, apply_on_slot_a, require_unital
from .classify import DiagFamilyParams, is_cp
from .exceptions import NotPositiveError, SingularError
from .qcpo import CompoundState, _as_density


_basis = lru_cache(maxsize=None)(linalg.OperatorBasis)


def lambda_range(n: int):
    """Interval of ``lam`` for which ``pi_lambda`` is PSD and PPT."""
    return -1.0 / (n * n - 1), 1.0 / (n + 1)


def make_pi_lambda(n: int, lam: float) -> np.ndarray:
    """``(1-lam)/n I (x) I + lam sum_ij e_ij (x) e_ij``.

    Spectrum: ``(1-lam)/n + n lam`` once and ``(1-lam)/n`` with multiplicity
    ``n^2 - 1``; the partial transpose has eigenvalues ``(1-lam)/n +- lam``.
    """
    return (1 - lam) / n * np.eye(n * n, dtype=complex) + lam * linalg.max_entangled_projector(n)


def make_phi_lambda(n: int, lam: float, psi: Optional[LinearMap] = None) -> LinearMap:
    """``phi_lam(e_ij) = (1-lam)/n I delta_ij + lam psi(e_ij)``; ``psi`` defaults to the identity.

    The Choi operator is ``(psi (x) id) pi_lambda``.  ``psi`` must be unital;
    its positivity is the caller's responsibility.
    """
    if psi is None:
        psi = LinearMap.identity(n)
    require_unital(psi)
    return LinearMap(apply_on_slot_a(psi, make_pi_lambda(n, lam)))


def gamma_normalization(n: int, gamma2: float) -> float:
    return n * n + (1 - 1 / gamma2) * (gamma2 - 1)


def pi_gamma_blocks(n: int, gamma2: float):
    """The blocks ``a_ij``: ``n e_ij`` off the diagonal and
    ``(1 - 1/gamma^2)(gamma^2 e_{i+1,i+1} - e_{i-1,i-1})`` on it, indices mod n."""
    if gamma2 <= 0:
        raise ValueError(f"gamma^2 must be positive, got {gamma2!r}")
    blocks = {}
    t = 1 - 1 / gamma2
    for i in range(n):
        for j in range(n):
            if i != j:
                blocks[i, j] = n * linalg.matrix_unit(n, i, j)
            else:
                up, down = (i + 1) % n, (i - 1) % n
                blocks[i, i] = t * (gamma2 * linalg.matrix_unit(n, up, up) - linalg.matrix_unit(n, down, down))
    return blocks


def make_pi_gamma(n: int, gamma2: float) -> np.ndarray:
    """``N^{-1} (n I (x) I + sum_ij a_ij (x) e_ij)`` with ``N = n^2 + (1 - 1/gamma^2)(gamma^2 - 1)``."""
    if n < 3:
        raise ValueError("pi_gamma needs n >= 3")
    blocks = pi_gamma_blocks(n, gamma2)
    out = n * np.eye(n * n, dtype=complex)
    for (i, j), a in blocks.items():
        out += linalg.kron(a, linalg.matrix_unit(n, i, j))
    return out / gamma_normalization(n, gamma2)


def make_phi_gamma(n: int, gamma2: float) -> LinearMap:
    return LinearMap(make_pi_gamma(n, gamma2))


def make_diag_family(p: DiagFamilyParams) -> LinearMap:
    """``a -> sum_ij c_ij e_ij a e_ij^dag + mu a``.

    Since ``e_ij a e_ji = a_jj e_ii`` the first term is the diagonal matrix
    ``diag(c @ diag(a))``.
    """
    c, mu = p.c, p.mu
    return LinearMap.from_function(lambda a: np.diag(c @ np.diag(a)) + mu * a, p.n)


def diag_family_unit_value(p: DiagFamilyParams) -> np.ndarray:
    """``phi(I) = sum_i e_ii (sum_j c_ij + mu)``."""
    return np.diag(p.c.sum(axis=1) + p.mu).astype(complex)


def _check_k(n: int, k: int):
    if int(k) != k or not 1 <= k < n:
        raise ValueError(f"k must be an integer with 1 <= k < n = {n}, got {k!r}")


def make_phi_k(n: int, k: int) -> LinearMap:
    """``(k-1)(sum_i e_ii a e_ii + sum_{i<j} f_ij a f_ij) + (k+1) sum_{i<j} g_ij a g_ij``.

    Its transpose ``T o phi_k`` is ``a -> k tr(a) I - a`` and ``phi_k(I) = (kn - 1) I``.
    """
    _check_k(n, k)
    basis = _basis(n)

    def fn(a):
        out = np.zeros((n, n), dtype=complex)
        for i in range(n):
            e = basis.e(i, i)
            out += (k - 1) * (e @ a @ e)
        for key, f in basis.f.items():
            g = basis.g[key]
            out += (k - 1) * (f @ a @ f) + (k + 1) * (g @ a @ g)
        return out

    return LinearMap.from_function(fn, n)


def reduction_map(n: int, k: float) -> LinearMap:
    """``a -> k tr(a) I - a``."""
    return LinearMap.from_function(lambda a: k * np.trace(a) * np.eye(n) - a, n)


def make_npt_compound(n: int, k: int, rho, tol: float = 1e-10) -> CompoundState:
    """``(1/(kn-1)) sum_ij rho^{1/2} phi_k(e_ij) rho^{1/2} (x) e_ij`` for full-rank ``rho``."""
    _check_k(n, k)
    rho = _as_density(rho, n)
    w = np.linalg.eigvalsh(rho)
    if w[0] <= tol:
        raise SingularError(w[0], f"rank rho = n required for the NPT construction (min eigenvalue {w[0]:.3e})")
    phi = make_phi_k(n, k)
    s = linalg.kron(linalg.sqrt_psd(rho), np.eye(n))
    omega = s @ phi.choi @ s / (k * n - 1)
    return CompoundState(omega, (n, n), "qcpo", rho, phi)


def _offdiag_table(n: int, c_offdiag) -> np.ndarray:
    t = np.asarray(c_offdiag, dtype=float)
    if t.ndim == 0:
        t = np.full((n, n), float(t))
    if t.shape != (n, n):
        raise ValueError(f"off-diagonal table must be {n}x{n}, got {t.shape}")
    return t


def cor5_params(n: int, c: float, c_offdiag) -> DiagFamilyParams:
    """Diagonal-family parameters with ``c_ii = c``, the given ``c_ij`` and ``mu = -1``."""
    t = _offdiag_table(n, c_offdiag).copy()
    np.fill_diagonal(t, c)
    return DiagFamilyParams(t, -1.0)


def make_cor5_family(n: int, c: float, c_offdiag, check: bool = True) -> LinearMap:
    """``sum_i (c-1) e_ii a e_ii + sum_{i<j} [(s_ij - 1) f a f + (s_ij + 1) g a g
    - (i/2) d_ij f a g + (i/2) d_ij g a f]`` with ``s_ij = (c_ij + c_ji)/2``, ``d_ij = c_ij - c_ji``.

    With ``check`` the CP precondition (``c >= 1``, ``c_ij c_ji >= 1``) is
    enforced and confirmed on the Choi operator; failure raises
    :class:`NotPositiveError` carrying the Choi witness.
    """
    t = _offdiag_table(n, c_offdiag)
    basis = _basis(n)

    def fn(a):
        out = np.zeros((n, n), dtype=complex)
        for i in range(n):
            e = basis.e(i, i)
            out += (c - 1) * (e @ a @ e)
        for (i, j), f in basis.f.items():
            g = basis.g[i, j]
            s = 0.5 * (t[i, j] + t[j, i])
            d = t[i, j] - t[j, i]
            out += (s - 1) * (f @ a @ f) + (s + 1) * (g @ a @ g)
            out += -0.5j * d * (f @ a @ g) + 0.5j * d * (g @ a @ f)
        return out

    phi = LinearMap.from_function(fn, n)
    if check:
        pairs_ok = all(t[i, j] * t[j, i] >= 1 for i in range(n) for j in range(n) if i != j)
        v = is_cp(phi)
        if c < 1 or not pairs_ok or not v.holds:
            raise NotPositiveError(v.min_eigenvalue, v.witness, f"map is not CP (need c >= 1 and c_ij c_ji >= 1; Choi min eigenvalue {v.min_eigenvalue:.6e})")
    return phi


def make_cor5_companion(n: int, c: float, c_offdiag) -> LinearMap:
    """``a -> c sum_i h_i a h_i + sum_{i != j} c_ij e_ij a e_ij^dag - ((n - c)/n) a``."""
    t = _offdiag_table(n, c_offdiag)
    basis = _basis(n)

    def fn(a):
        out = -((n - c) / n) * a
        for h in basis.h:
            out = out + c * (h @ a @ h)
        for i in range(n):
            for j in range(n):
                if i != j:
                    out = out + t[i, j] * a[j, j] * linalg.matrix_unit(n, i, i)
        return out

    return LinearMap.from_function(fn, n)


def _admissible(n: int, lam: float) -> bool:
    pi = make_pi_lambda(n, lam)
    lo = min(np.linalg.eigvalsh(pi)[0], np.linalg.eigvalsh(linalg.partial_transpose(pi, "B"))[0])
    return lo >= 0


def bisect_lambda_interval(n: int, iterations: int = 200, xtol: float = 1e-15):
    """Locate the PSD-and-PPT interval of ``pi_lambda`` by bisection on the spectra.

    The admissible set is an interval containing 0; each end is bracketed
    between 0 and -1 (resp. +1) and bisected to ``xtol``.
    """

    def edge(outside):
        good, bad = 0.0, outside
        for _ in range(iterations):
            if abs(bad - good) <= xtol:
                break
            mid = 0.5 * (good + bad)
            if _admissible(n, mid):
                good = mid
            else:
                bad = mid
        return good

    return edge(-1.0), edge(1.0)
