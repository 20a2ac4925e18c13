"""Linear maps on M_n in Choi and Kraus form.

The canonical representation of a map ``phi`` is its Choi operator
``C = sum_ij phi(e_ij) (x) e_ij`` (output in slot A, matrix-unit index in slot B),
so that ``C.reshape(n, n, n, n)[a, i, b, j] == phi(e_ij)[a, b]``.
Kraus families keep the weights separate from unit-norm operators:
``phi(x) = sum_k w_k a_k x a_k^dag`` with ``tr(a_k a_l^dag) = delta_kl``.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np

from . import linalg
from .exceptions import NotPositiveError, NotUnitalError

UNITAL_TOL = 1e-10


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class KrausChannel:
    """Weighted Kraus family with Hilbert-Schmidt orthonormal operators."""

    weights: np.ndarray
    operators: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        ops = _readonly(self.operators)
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2] or ops.shape[0] != w.shape[0]:
            raise ValueError("operators must have shape (k, n, n) matching the weights")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "operators", ops)

    @property
    def n(self) -> int:
        return self.operators.shape[1]

    def __len__(self):
        return len(self.weights)

    def __call__(self, x) -> np.ndarray:
        x = linalg.as_matrix(x)
        if x.shape != (self.n, self.n):
            raise ValueError(f"map acts on {self.n}x{self.n} matrices, got {x.shape}")
        out = np.zeros((self.n, self.n), dtype=complex)
        for w, a in zip(self.weights, self.operators):
            out += w * (a @ x @ a.conj().T)
        return out

    def to_map(self) -> "LinearMap":
        return LinearMap.from_kraus(self.operators, self.weights)


@dataclass(frozen=True)
class LinearMap:
    """A linear map ``M_n -> M_n`` stored through its Choi operator."""

    choi: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        c = _readonly(self.choi)
        n, _ = linalg.square_dims(c)
        object.__setattr__(self, "choi", c)
        object.__setattr__(self, "n", n)

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], n: int) -> "LinearMap":
        """Tabulate a linear function on the matrix units."""
        c = np.zeros((n, n, n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                c[:, i, :, j] = fn(linalg.matrix_unit(n, i, j))
        return cls(c.reshape(n * n, n * n))

    @classmethod
    def from_kraus(cls, operators: Sequence, weights: Optional[Sequence[float]] = None) -> "LinearMap":
        """Build ``x -> sum_k w_k K_k x K_k^dag`` (unit weights by default)."""
        ops = [linalg.as_matrix(k) for k in operators]
        if weights is None:
            weights = np.ones(len(ops))
        n = ops[0].shape[0]
        c = np.zeros((n * n, n * n), dtype=complex)
        for w, k in zip(weights, ops):
            # Row-major vec(K) = sum_i (K e_i) (x) e_i.
            v = k.reshape(-1)
            c += w * np.outer(v, v.conj())
        return cls(c)

    @classmethod
    def identity(cls, n: int) -> "LinearMap":
        return cls(linalg.max_entangled_projector(n))

    @classmethod
    def transpose(cls, n: int) -> "LinearMap":
        return cls(linalg.swap(n))

    @classmethod
    def depolarizing(cls, n: int) -> "LinearMap":
        """Completely depolarising map ``x -> tr(x) I / n``."""
        return cls(np.eye(n * n, dtype=complex) / n)

    def __call__(self, x) -> np.ndarray:
        return apply(self, x)

    @cached_property
    def unital(self) -> bool:
        return is_unital(self)

    @cached_property
    def trace_preserving(self) -> bool:
        return is_trace_preserving(self)


def apply(phi: LinearMap, x) -> np.ndarray:
    """Evaluate ``phi(x)`` by contracting the Choi blocks with the entries of ``x``."""
    x = linalg.as_matrix(x)
    n = phi.n
    if x.shape != (n, n):
        raise ValueError(f"map acts on {n}x{n} matrices, got {x.shape}")
    return np.einsum("aibj,ij->ab", phi.choi.reshape(n, n, n, n), x)


def choi_of(phi: LinearMap) -> np.ndarray:
    return phi.choi


def kraus_from_choi(choi, tol: float = linalg.PSD_TOL) -> KrausChannel:
    """Recover a weighted Kraus family from a PSD Choi operator.

    Every eigenvector with eigenvalue above ``tol`` is reshaped row-major into an
    operator ``a`` (the inverse of ``v = sum_i (a e_i) (x) e_i``), with the
    eigenvalue as its weight.

    Raises
    ------
    NotPositiveError
        If the Choi operator has an eigenvalue below ``-tol``; the map is then not CP.
    """
    c = linalg.as_matrix(choi)
    n, _ = linalg.square_dims(c)
    w, v = linalg.eig_hermitian(c)
    if w[0] < -tol:
        raise NotPositiveError(w[0], v[:, 0], f"Choi operator is not PSD (min eigenvalue {w[0]:.6e}); map is not CP")
    keep = w > tol
    ops = v[:, keep].T.reshape(-1, n, n)
    return KrausChannel(w[keep][::-1], ops[::-1])


def dual(phi: LinearMap) -> LinearMap:
    """Hilbert-Schmidt dual: ``tr(phi(a) rho) == tr(a phi*(rho))``."""
    n = phi.n
    c = phi.choi.reshape(n, n, n, n)
    return LinearMap(c.transpose(3, 2, 1, 0).reshape(n * n, n * n))


def compose(outer: LinearMap, inner: LinearMap) -> LinearMap:
    """``outer o inner``."""
    if outer.n != inner.n:
        raise ValueError("maps act on different dimensions")
    return LinearMap.from_function(lambda x: apply(outer, apply(inner, x)), inner.n)


def compose_transpose(phi: LinearMap) -> LinearMap:
    """``phi o T``, so that ``(phi o T)(e_ij) = phi(e_ji)``."""
    return LinearMap(linalg.partial_transpose(phi.choi, "B"))


def transpose_compose(phi: LinearMap) -> LinearMap:
    """``T o phi``."""
    return LinearMap(linalg.partial_transpose(phi.choi, "A"))


def apply_on_slot_a(psi: LinearMap, x, dims=None) -> np.ndarray:
    """``(psi (x) id) X`` for a bipartite operator ``X``."""
    x = linalg.as_matrix(x)
    na, nb = linalg.square_dims(x, dims)
    if na != psi.n:
        raise ValueError(f"map dimension {psi.n} does not match slot A dimension {na}")
    t = x.reshape(na, nb, na, nb)
    out = np.einsum("aibj,ixjy->axby", psi.choi.reshape(na, na, na, na), t)
    return out.reshape(na * nb, na * nb)


def unital_deviation(phi: LinearMap) -> float:
    return float(np.linalg.norm(linalg.partial_trace(phi.choi, "B") - np.eye(phi.n)))


def trace_preserving_deviation(phi: LinearMap) -> float:
    return float(np.linalg.norm(linalg.partial_trace(phi.choi, "A") - np.eye(phi.n)))


def is_unital(phi: LinearMap, tol: float = UNITAL_TOL) -> bool:
    """``phi(I) = I`` within ``tol`` (Frobenius norm)."""
    return unital_deviation(phi) <= tol


def is_trace_preserving(phi: LinearMap, tol: float = UNITAL_TOL) -> bool:
    return trace_preserving_deviation(phi) <= tol


def normalize_map(phi: LinearMap) -> LinearMap:
    """Rescale ``phi`` to the unital map ``phi(I)^{-1/2} phi(.) phi(I)^{-1/2}``.

    Raises :class:`~qcpo_lab.exceptions.SingularError` unless ``phi(I) > 0``.
    """
    s = linalg.inv_sqrt_pd(linalg.partial_trace(phi.choi, "B"))
    k = linalg.kron(s, np.eye(phi.n))
    return LinearMap(k @ phi.choi @ k)


def require_unital(phi: LinearMap, tol: float = UNITAL_TOL) -> None:
    dev = unital_deviation(phi)
    if dev > tol:
        raise NotUnitalError(dev)
