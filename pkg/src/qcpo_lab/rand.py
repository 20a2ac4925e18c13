"""Seeded random states and maps for probes, sweeps and self-checks."""

import numpy as np

from .channels import LinearMap, normalize_map
from . import linalg


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_ginibre(n: int, m: int = None, seed=None) -> np.ndarray:
    rng = _rng(seed)
    m = n if m is None else m
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))


def random_hermitian(n: int, seed=None) -> np.ndarray:
    g = random_ginibre(n, seed=seed)
    return 0.5 * (g + g.conj().T)


def random_density(n: int, rank: int = None, seed=None) -> np.ndarray:
    """``G G^dag / tr(G G^dag)`` with ``G`` an ``n x rank`` Ginibre matrix (full rank by default)."""
    g = random_ginibre(n, rank or n, seed)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_cp_map(n: int, terms: int = None, seed=None) -> LinearMap:
    rng = _rng(seed)
    terms = terms or n
    return LinearMap.from_kraus([random_ginibre(n, seed=rng) for _ in range(terms)])


def random_unital_cp(n: int, terms: int = None, seed=None) -> LinearMap:
    return normalize_map(random_cp_map(n, terms, seed))


def random_cptp(n: int, terms: int = None, seed=None) -> LinearMap:
    """Random trace-preserving CP map: Kraus operators ``K_k S^{-1/2}`` with ``S = sum K^dag K``."""
    rng = _rng(seed)
    terms = terms or n
    ks = [random_ginibre(n, seed=rng) for _ in range(terms)]
    s = linalg.inv_sqrt_pd(sum(k.conj().T @ k for k in ks))
    return LinearMap.from_kraus([k @ s for k in ks])
