"""Dense complex linear algebra kernels: clustered Hermitian eigendecompositions,
spectral and range projections, and the operator norm.

Matrices are plain complex ``numpy`` arrays.  Every operation is a pure
function; tolerances are carried by an explicit :class:`NumericConfig`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonSquare, NotHermitian


@dataclass(frozen=True)
class NumericConfig:
    """Tolerance knobs shared by the whole library.

    rank_tol         relative singular-value cutoff for rank decisions
    membership_tol   residual cutoff for membership / zero tests
    eig_cluster_tol  absolute width used to merge near-degenerate eigenvalues
    """

    rank_tol: float = 1e-9
    membership_tol: float = 1e-8
    eig_cluster_tol: float = 1e-9

    def __post_init__(self):
        if not (self.rank_tol > 0 and self.membership_tol > 0 and self.eig_cluster_tol > 0):
            raise ValueError("tolerances must be strictly positive")
        if self.rank_tol >= 1:
            raise ValueError("rank_tol must be < 1")


DEFAULT_CONFIG = NumericConfig()


def as_matrix(a) -> np.ndarray:
    """Coerce to a 2-d complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise NonSquare(f"expected a matrix, got shape {m.shape}")
    return m


def as_square(a) -> np.ndarray:
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {m.shape}")
    return m


def eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex)


def op_norm(a) -> float:
    """Operator norm (largest singular value); 0 for empty input."""
    m = as_matrix(a)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def hs_norm(a) -> float:
    """Hilbert-Schmidt (Frobenius) norm."""
    return float(np.linalg.norm(np.asarray(a, dtype=complex)))


def hs_inner(a, b) -> complex:
    """tr(b* a), the Hilbert-Schmidt inner product."""
    return complex(np.vdot(np.asarray(b, dtype=complex), np.asarray(a, dtype=complex)))


def is_hermitian(a, cfg: NumericConfig = DEFAULT_CONFIG) -> bool:
    m = as_square(a)
    return op_norm(m - m.conj().T) <= cfg.membership_tol * max(1.0, op_norm(m))


def hermitian_eig(a, cfg: NumericConfig = DEFAULT_CONFIG):
    """Clustered eigendecomposition of a Hermitian matrix.

    Returns ``(eigenvalues, projections)`` with eigenvalues strictly ascending
    after merging values within ``eig_cluster_tol``, and one orthogonal
    projection per cluster.  The input is symmetrized before decomposition.
    """
    m = as_square(a)
    if not is_hermitian(m, cfg):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    h = (m + m.conj().T) / 2
    w, v = np.linalg.eigh(h)
    values = []
    projections = []
    i = 0
    n = len(w)
    while i < n:
        j = i + 1
        # grow the cluster while consecutive gaps stay below the merge width
        while j < n and w[j] - w[j - 1] <= cfg.eig_cluster_tol:
            j += 1
        block = v[:, i:j]
        values.append(float(np.mean(w[i:j])))
        projections.append(block @ block.conj().T)
        i = j
    return values, projections


def spectral_projection(a, kind: str, threshold: float, cfg: NumericConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Spectral projection of a Hermitian matrix onto a closed half-line.

    ``kind`` is ``"le"`` for (-inf, threshold] or ``"ge"`` for [threshold, inf).
    Boundary membership is inclusive within ``eig_cluster_tol``.
    """
    if kind not in ("le", "ge"):
        raise ValueError(f"kind must be 'le' or 'ge', got {kind!r}")
    values, projections = hermitian_eig(a, cfg)
    n = as_square(a).shape[0]
    out = np.zeros((n, n), dtype=complex)
    for lam, p in zip(values, projections):
        if kind == "le" and lam <= threshold + cfg.eig_cluster_tol:
            out += p
        elif kind == "ge" and lam >= threshold - cfg.eig_cluster_tol:
            out += p
    return out


def range_projection(a, cfg: NumericConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Orthogonal projection onto the column span of ``a``.

    Accepts rectangular input (n x k column stacks); the result is n x n.
    """
    m = as_matrix(a)
    n = m.shape[0]
    if m.size == 0:
        return np.zeros((n, n), dtype=complex)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] <= 0:
        return np.zeros((n, n), dtype=complex)
    r = int(np.sum(s > cfg.rank_tol * s[0]))
    basis = u[:, :r]
    return basis @ basis.conj().T


def is_projection(p, cfg: NumericConfig = DEFAULT_CONFIG) -> bool:
    m = as_square(p)
    scale = max(1.0, op_norm(m))
    return (
        op_norm(m - m.conj().T) <= cfg.membership_tol * scale
        and op_norm(m @ m - m) <= cfg.membership_tol * scale
    )


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random unitary via QR of a Ginibre matrix."""
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (z + z.conj().T) / 2
