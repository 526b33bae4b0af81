"""Arithmetic of linear subspaces of M_n(C) under the Hilbert-Schmidt inner
product: spans, sums, intersections, span products, commutants and generated
von Neumann algebras.

A subspace is stored as an HS-orthonormal basis, shape (k, n, n).  The zero
subspace has an empty basis.  All coefficient arithmetic is over C.
"""

from __future__ import annotations

import numpy as np

from .errors import MixedDimensions, NonConvergent
from .numerics import DEFAULT_CONFIG, NumericConfig, as_square, eye, hs_norm

__all__ = [
    "OperatorSubspace",
    "VNAlgebra",
    "span",
    "sum_spaces",
    "intersect",
    "product_span",
    "adjoint",
    "tensor",
    "commutant",
    "generated_vn_algebra",
    "full_space",
    "scalar_space",
]


class OperatorSubspace:
    """A linear subspace of M_n(C) with an HS-orthonormal basis."""

    def __init__(self, ambient_dim: int, basis: np.ndarray):
        self.n = int(ambient_dim)
        basis = np.asarray(basis, dtype=complex)
        if basis.size == 0:
            basis = np.zeros((0, self.n, self.n), dtype=complex)
        if basis.ndim != 3 or basis.shape[1:] != (self.n, self.n):
            raise MixedDimensions(f"basis shape {basis.shape} does not match ambient {self.n}")
        self.basis = basis

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def _flat(self) -> np.ndarray:
        return self.basis.reshape(self.dim, self.n * self.n)

    def coefficients(self, a) -> np.ndarray:
        """HS coordinates of ``a`` against the basis."""
        v = np.asarray(a, dtype=complex).reshape(-1)
        return self._flat().conj() @ v

    def project(self, a) -> np.ndarray:
        """HS-orthogonal projection of ``a`` onto the subspace."""
        if self.dim == 0:
            return np.zeros((self.n, self.n), dtype=complex)
        c = self.coefficients(a)
        return np.tensordot(c, self.basis, axes=(0, 0))

    def contains(self, a, cfg: NumericConfig = DEFAULT_CONFIG) -> bool:
        m = as_square(a)
        if m.shape[0] != self.n:
            raise MixedDimensions(f"matrix of size {m.shape[0]} vs ambient {self.n}")
        residual = hs_norm(m - self.project(m))
        return residual <= cfg.membership_tol * max(1.0, hs_norm(m))

    def contains_space(self, other: "OperatorSubspace", cfg: NumericConfig = DEFAULT_CONFIG) -> bool:
        return all(self.contains(b, cfg) for b in other.basis)

    def equals(self, other: "OperatorSubspace", cfg: NumericConfig = DEFAULT_CONFIG) -> bool:
        """Mutual containment; insensitive to basis order and rotation."""
        if self.n != other.n:
            return False
        return (
            self.dim == other.dim
            and self.contains_space(other, cfg)
            and other.contains_space(self, cfg)
        )

    def is_self_adjoint(self, cfg: NumericConfig = DEFAULT_CONFIG) -> bool:
        return all(self.contains(b.conj().T, cfg) for b in self.basis)

    def is_unital(self, cfg: NumericConfig = DEFAULT_CONFIG) -> bool:
        return self.contains(eye(self.n), cfg)

    def is_operator_system(self, cfg: NumericConfig = DEFAULT_CONFIG) -> bool:
        return self.is_unital(cfg) and self.is_self_adjoint(cfg)

    def __repr__(self):
        return f"OperatorSubspace(n={self.n}, dim={self.dim})"


class VNAlgebra(OperatorSubspace):
    """An OperatorSubspace verified to be a von Neumann algebra
    (unital, self-adjoint, closed under products)."""

    def __init__(self, ambient_dim: int, basis: np.ndarray, cfg: NumericConfig = DEFAULT_CONFIG, verify: bool = True):
        super().__init__(ambient_dim, basis)
        if verify:
            if not self.is_unital(cfg):
                raise MixedDimensions("algebra must contain the identity")
            if not self.is_self_adjoint(cfg):
                raise MixedDimensions("algebra must be closed under adjoints")
            for b in self.basis:
                for c in self.basis:
                    if not self.contains(b @ c, cfg):
                        raise MixedDimensions("algebra must be closed under products")


def _orthonormalize(rows: np.ndarray, n: int, cfg: NumericConfig) -> np.ndarray:
    """SVD-orthonormalize stacked vectorizations; returns (k, n, n)."""
    if rows.shape[0] == 0:
        return np.zeros((0, n, n), dtype=complex)
    norms = np.linalg.norm(rows, axis=1)
    rows = rows[norms > 0]
    if rows.shape[0] == 0:
        return np.zeros((0, n, n), dtype=complex)
    # keep an already-orthonormal family as given (stable matrix-unit bases)
    gram = rows.conj() @ rows.T
    if np.allclose(gram, np.eye(rows.shape[0]), atol=cfg.membership_tol):
        return rows.reshape(-1, n, n)
    _, s, vh = np.linalg.svd(rows, full_matrices=False)
    r = int(np.sum(s > cfg.rank_tol * s[0])) if s.size else 0
    return vh[:r].reshape(-1, n, n)


def span(mats, ambient_dim: int | None = None, cfg: NumericConfig = DEFAULT_CONFIG) -> OperatorSubspace:
    """HS-orthonormal span of a family of n x n matrices."""
    mats = [as_square(m) for m in mats]
    if ambient_dim is None:
        if not mats:
            raise MixedDimensions("cannot infer ambient dimension from an empty family")
        ambient_dim = mats[0].shape[0]
    for m in mats:
        if m.shape[0] != ambient_dim:
            raise MixedDimensions("matrices of mixed sizes")
    if not mats:
        return OperatorSubspace(ambient_dim, np.zeros((0, ambient_dim, ambient_dim)))
    rows = np.stack([m.reshape(-1) for m in mats])
    return OperatorSubspace(ambient_dim, _orthonormalize(rows, ambient_dim, cfg))


def full_space(n: int) -> OperatorSubspace:
    """All of M_n, with the matrix-unit basis."""
    basis = np.zeros((n * n, n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            basis[i * n + j, i, j] = 1.0
    return OperatorSubspace(n, basis)


def scalar_space(n: int) -> OperatorSubspace:
    """The scalars C.I inside M_n."""
    return OperatorSubspace(n, (eye(n) / np.sqrt(n))[None, :, :])


def _common_ambient(s: OperatorSubspace, t: OperatorSubspace) -> int:
    if s.n != t.n:
        raise MixedDimensions(f"ambient dimensions differ: {s.n} vs {t.n}")
    return s.n


def sum_spaces(s: OperatorSubspace, t: OperatorSubspace, cfg: NumericConfig = DEFAULT_CONFIG) -> OperatorSubspace:
    n = _common_ambient(s, t)
    rows = np.concatenate([s._flat(), t._flat()], axis=0)
    return OperatorSubspace(n, _orthonormalize(rows, n, cfg))


def _complement_rows(s: OperatorSubspace, cfg: NumericConfig) -> np.ndarray:
    """Orthonormal basis (as rows) of the HS orthocomplement of ``s``."""
    n2 = s.n * s.n
    if s.dim == 0:
        return np.eye(n2, dtype=complex)
    flat = s._flat()
    # null space of the coefficient map v -> conj(flat) @ v
    _, sv, vh = np.linalg.svd(flat, full_matrices=True)
    r = int(np.sum(sv > cfg.rank_tol * sv[0])) if sv.size else 0
    return vh[r:].conj()


def complement(s: OperatorSubspace, cfg: NumericConfig = DEFAULT_CONFIG) -> OperatorSubspace:
    """HS orthocomplement inside M_n."""
    return OperatorSubspace(s.n, _complement_rows(s, cfg).reshape(-1, s.n, s.n))


def intersect(s: OperatorSubspace, t: OperatorSubspace, cfg: NumericConfig = DEFAULT_CONFIG) -> OperatorSubspace:
    """S cap T computed as the orthocomplement of S-perp + T-perp."""
    n = _common_ambient(s, t)
    rows = np.concatenate([_complement_rows(s, cfg), _complement_rows(t, cfg)], axis=0)
    perp_sum = OperatorSubspace(n, _orthonormalize(rows, n, cfg))
    return complement(perp_sum, cfg)


def product_span(s: OperatorSubspace, t: OperatorSubspace, cfg: NumericConfig = DEFAULT_CONFIG) -> OperatorSubspace:
    """span{B C : B in S, C in T}."""
    n = _common_ambient(s, t)
    if s.dim == 0 or t.dim == 0:
        return OperatorSubspace(n, np.zeros((0, n, n)))
    prods = np.einsum("aij,bjk->abik", s.basis, t.basis).reshape(-1, n * n)
    return OperatorSubspace(n, _orthonormalize(prods, n, cfg))


def adjoint(s: OperatorSubspace) -> OperatorSubspace:
    """span{B* : B in S}; adjoints of an orthonormal family stay orthonormal."""
    return OperatorSubspace(s.n, np.conj(np.transpose(s.basis, (0, 2, 1))))


def tensor(s: OperatorSubspace, t: OperatorSubspace, cfg: NumericConfig = DEFAULT_CONFIG) -> OperatorSubspace:
    """span{B (x) C} inside M_{nm}; Kronecker products of the bases."""
    nm = s.n * t.n
    if s.dim == 0 or t.dim == 0:
        return OperatorSubspace(nm, np.zeros((0, nm, nm)))
    basis = np.stack([np.kron(b, c) for b in s.basis for c in t.basis])
    return OperatorSubspace(nm, basis)


def commutant(gens, n: int, cfg: NumericConfig = DEFAULT_CONFIG) -> VNAlgebra:
    """{X : XA = AX for every generator A}, as a verified algebra.

    Computed as the joint null space of the maps X -> XA - AX.  Row-major
    vectorization gives vec(XA) = (I (x) A^T) vec(X) and vec(AX) =
    (A (x) I) vec(X).
    """
    gens = [as_square(g) for g in gens]
    for g in gens:
        if g.shape[0] != n:
            raise MixedDimensions("generator size does not match ambient dimension")
    if not gens:
        return VNAlgebra(n, full_space(n).basis, cfg, verify=False)
    ident = np.eye(n)
    blocks = [np.kron(ident, g.T) - np.kron(g, ident) for g in gens]
    k = np.concatenate(blocks, axis=0)
    # the cutoff needs an absolute floor at the generator scale: a zero
    # constraint matrix carries pure rounding noise in its singular values
    scale = max(1.0, max(hs_norm(g) for g in gens))
    basis = null_space_rows(k, cfg, scale).reshape(-1, n, n)
    return VNAlgebra(n, basis, cfg)


def null_space_rows(k: np.ndarray, cfg: NumericConfig, scale: float = 1.0) -> np.ndarray:
    """Orthonormal rows spanning the null space of k, with the rank cutoff
    floored at ``rank_tol * scale`` so noise-level matrices count as zero."""
    _, sv, vh = np.linalg.svd(k, full_matrices=True)
    top = sv[0] if sv.size else 0.0
    r = int(np.sum(sv > cfg.rank_tol * max(top, scale)))
    return vh[r:].conj()


def generated_vn_algebra(gens, n: int, cfg: NumericConfig = DEFAULT_CONFIG) -> VNAlgebra:
    """Smallest algebra containing I and the generators, closed under * and
    products; iterates span closure until the dimension stabilizes."""
    mats = [eye(n)]
    for g in gens:
        g = as_square(g)
        if g.shape[0] != n:
            raise MixedDimensions("generator size does not match ambient dimension")
        mats.append(g)
        mats.append(g.conj().T)
    current = span(mats, n, cfg)
    for _ in range(n * n + 1):
        nxt = sum_spaces(current, product_span(current, current, cfg), cfg)
        if nxt.dim == current.dim:
            return VNAlgebra(n, current.basis, cfg)
        current = nxt
    raise NonConvergent("algebra closure did not stabilize")
