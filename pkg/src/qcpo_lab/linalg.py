"""Dense complex linear algebra on matrices and bipartite operators.

Bipartite operators are plain square ndarrays of size ``nA*nB`` together with
``dims = (nA, nB)``.  Basis vector ``a*nB + i`` is ``e_a (x) e_i``: slot ``A``
is the slowest-varying index.  For Choi-type operators ``sum_ij phi(e_ij) (x) e_ij``
slot ``A`` carries the map output and slot ``B`` the matrix-unit index.
"""

from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .exceptions import NotHermitianError, NotPositiveError, SingularError

#: Default absolute tolerance for PSD verdicts on unit-normalised operators.
PSD_TOL = 1e-9
#: Relative band below zero that :func:`sqrt_psd` clips to zero.
CLIP_TOL = 1e-10
#: Relative threshold under which :func:`inv_sqrt_pd` treats an operator as singular.
SINGULAR_TOL = 1e-10


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a 2-d complex ndarray."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {arr.shape}")
    return arr


def square_dims(x: np.ndarray, dims: Optional[Sequence[int]] = None) -> Tuple[int, int]:
    """Resolve the factor dimensions of a bipartite operator.

    Without ``dims`` the operator is assumed to act on ``C^n (x) C^n``.
    """
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"bipartite operator must be square, got shape {x.shape}")
    if dims is None:
        n = int(round(np.sqrt(x.shape[0])))
        if n * n != x.shape[0]:
            raise ValueError(f"cannot split dimension {x.shape[0]} into two equal factors; pass dims")
        return n, n
    na, nb = (int(d) for d in dims)
    if na < 1 or nb < 1 or na * nb != x.shape[0]:
        raise ValueError(f"dims {tuple(dims)} do not match operator size {x.shape[0]}")
    return na, nb


def _slot(slot: str) -> str:
    s = str(slot).upper()
    if s not in ("A", "B"):
        raise ValueError(f"slot must be 'A' or 'B', got {slot!r}")
    return s


def kron(a, b) -> np.ndarray:
    """Tensor product with ``(A (x) B)[i*rB + k, j*cB + l] = A[i, j] * B[k, l]``."""
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(x, slot: str = "B", dims: Optional[Sequence[int]] = None) -> np.ndarray:
    """Trace out one tensor factor.

    ``slot="B"`` returns ``sum_k (I (x) <k|) X (I (x) |k>)``, an ``nA x nA`` matrix;
    ``slot="A"`` traces out the first factor instead.
    """
    x = as_matrix(x)
    na, nb = square_dims(x, dims)
    t = x.reshape(na, nb, na, nb)
    if _slot(slot) == "B":
        return np.einsum("ikjk->ij", t)
    return np.einsum("kikj->ij", t)


def partial_transpose(x, slot: str = "B", dims: Optional[Sequence[int]] = None) -> np.ndarray:
    """Transpose the indices of one tensor factor (``id (x) T`` for ``slot="B"``)."""
    x = as_matrix(x)
    na, nb = square_dims(x, dims)
    t = x.reshape(na, nb, na, nb)
    axes = (0, 3, 2, 1) if _slot(slot) == "B" else (2, 1, 0, 3)
    return t.transpose(axes).reshape(na * nb, na * nb)


def hermitian_deviation(h) -> float:
    h = np.asarray(h)
    if h.size == 0:
        return 0.0
    return float(np.max(np.abs(h - h.conj().T)))


def check_hermitian(h, rtol: float = 1e-12) -> np.ndarray:
    """Return the Hermitian part of ``h``, rejecting inputs that are not Hermitian.

    The entrywise deviation ``max|H - H^dag|`` must not exceed ``rtol * (1 + max|H|)``.
    """
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    dev = hermitian_deviation(h)
    scale = 1.0 + (float(np.max(np.abs(h))) if h.size else 0.0)
    if dev > rtol * scale:
        raise NotHermitianError(dev)
    return 0.5 * (h + h.conj().T)


def eig_hermitian(h, rtol: float = 1e-12) -> Tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns
    -------
    eigenvalues : ndarray
        Real eigenvalues in ascending order.
    eigenvectors : ndarray
        Orthonormal eigenvectors as columns, ``H @ V[:, k] = w[k] * V[:, k]``.

    Raises
    ------
    NotHermitianError
        If ``h`` deviates from its adjoint by more than ``rtol * (1 + max|H|)``.
    """
    w, v = np.linalg.eigh(check_hermitian(h, rtol))
    return w, v


def spectral_norm(h) -> float:
    """Largest absolute eigenvalue of a Hermitian matrix (0 for the zero matrix)."""
    w = np.linalg.eigvalsh(check_hermitian(h))
    return float(np.max(np.abs(w))) if w.size else 0.0


class PsdStatus(NamedTuple):
    is_psd: bool
    min_eigenvalue: float
    witness: np.ndarray


def psd_status(h, tol: float = PSD_TOL) -> PsdStatus:
    """Decide positive semidefiniteness of a Hermitian matrix.

    ``is_psd`` holds iff the smallest eigenvalue is ``>= -tol``; ``witness`` is the
    corresponding unit eigenvector, so ``<w|H|w>`` reproduces ``min_eigenvalue``.
    """
    w, v = eig_hermitian(h)
    return PsdStatus(bool(w[0] >= -tol), float(w[0]), v[:, 0])


def sqrt_psd(h) -> np.ndarray:
    """Positive square root of a PSD matrix.

    Eigenvalues in ``(-1e-10 * ||H||, 0)`` are clipped to zero; anything more
    negative raises :class:`NotPositiveError`.
    """
    w, v = eig_hermitian(h)
    norm = float(np.max(np.abs(w))) if w.size else 0.0
    if w.size and w[0] < -CLIP_TOL * norm:
        raise NotPositiveError(w[0], v[:, 0])
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def inv_sqrt_pd(h) -> np.ndarray:
    """Inverse square root of a strictly positive definite matrix.

    Raises :class:`SingularError` when the smallest eigenvalue is not above
    ``1e-10 * ||H||``.
    """
    w, v = eig_hermitian(h)
    norm = float(np.max(np.abs(w))) if w.size else 0.0
    if not w.size or w[0] <= SINGULAR_TOL * norm:
        raise SingularError(w[0] if w.size else 0.0)
    return (v / np.sqrt(w)) @ v.conj().T


def transpose_map(a) -> np.ndarray:
    """Transpose in the fixed computational basis."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"transpose map acts on square matrices, got shape {a.shape}")
    return a.T.copy()


def matrix_unit(n: int, i: int, j: int) -> np.ndarray:
    """The matrix unit ``e_ij = |i><j|`` (zero-based indices)."""
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1.0
    return e


def hs_inner(x, y) -> complex:
    """Hilbert-Schmidt pairing ``tr(x y^dag)``."""
    return complex(np.vdot(np.asarray(y), np.asarray(x)))


def max_entangled_projector(n: int) -> np.ndarray:
    """``sum_ij e_ij (x) e_ij``, which is ``n`` times the maximally entangled projector."""
    v = np.eye(n, dtype=complex).reshape(n * n)
    return np.outer(v, v)


def swap(n: int) -> np.ndarray:
    """Flip operator ``sum_ij e_ij (x) e_ji`` on ``C^n (x) C^n``."""
    return partial_transpose(max_entangled_projector(n), "B")


class OperatorBasis:
    """Hermitian operator units on ``M_n``.

    ``f[(i, j)] = (e_ij + e_ji)/sqrt(2)`` and ``g[(i, j)] = -i (e_ij - e_ji)/sqrt(2)``
    for ``i < j``.  ``h[k-1]`` for ``k = 1..n-1`` is the traceless diagonal unit
    ``(e_11 + ... + e_kk - k e_{k+1,k+1}) / sqrt(k(k+1))`` (one-based indices).
    Together ``{e_ii, f_ij, g_ij}`` and ``{I/sqrt(n), h_k, f_ij, g_ij}`` are
    orthonormal bases of ``M_n`` under ``tr(x y^dag)``.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("dimension must be positive")
        self.n = n
        s = 1.0 / np.sqrt(2.0)
        self.f = {}
        self.g = {}
        for i in range(n):
            for j in range(i + 1, n):
                eij, eji = matrix_unit(n, i, j), matrix_unit(n, j, i)
                self.f[(i, j)] = s * (eij + eji)
                self.g[(i, j)] = -1j * s * (eij - eji)
        self.h = []
        for k in range(1, n):
            d = np.zeros(n)
            d[:k] = 1.0
            d[k] = -k
            self.h.append(np.diag(d / np.sqrt(k * (k + 1))).astype(complex))

    def e(self, i: int, j: int) -> np.ndarray:
        return matrix_unit(self.n, i, j)

    def units(self):
        """The basis ``{e_ii} + {f_ij} + {g_ij}`` as a flat list."""
        out = [self.e(i, i) for i in range(self.n)]
        out += [self.f[key] for key in sorted(self.f)]
        out += [self.g[key] for key in sorted(self.g)]
        return out

    def gell_mann(self):
        """The basis ``{I/sqrt(n)} + {h_k} + {f_ij} + {g_ij}``."""
        out = [np.eye(self.n, dtype=complex) / np.sqrt(self.n)] + list(self.h)
        out += [self.f[key] for key in sorted(self.f)]
        out += [self.g[key] for key in sorted(self.g)]
        return out


def gram(ops) -> np.ndarray:
    """Gram matrix ``G[a, b] = tr(x_a x_b^dag)``."""
    flat = np.array([np.asarray(o).reshape(-1) for o in ops])
    return flat @ flat.conj().T
