"""Projection geometry of a step filtration: the distance function rho on
amplified projections, neighborhoods, closures, Hausdorff distance,
linkability, separation witnesses, and level recovery from probes.

Amplification means working in M_n (x) M_m; the Kronecker convention puts the
base space first, so an operator A acting on the base is A (x) I_m.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import AlreadyInside, DimensionMismatch, NegativeTime
from .filtration import StepFiltration
from .numerics import (
    DEFAULT_CONFIG,
    NumericConfig,
    as_square,
    eye,
    hs_norm,
    is_projection,
    op_norm,
    range_projection,
)
from .opspace import OperatorSubspace, complement, full_space, null_space_rows

__all__ = [
    "AmplifiedProjection",
    "rho",
    "linkable",
    "neighborhood",
    "closure",
    "is_closed",
    "hausdorff_distance",
    "separating_projections",
    "probes_for_level",
    "rebuild_level",
]


class AmplifiedProjection:
    """An orthogonal projection in M_n (x) M_m with declared amplification m."""

    def __init__(self, base_dim: int, amp_degree: int, matrix, cfg: NumericConfig = DEFAULT_CONFIG):
        self.n = int(base_dim)
        self.m = int(amp_degree)
        p = as_square(matrix)
        if self.m < 1:
            raise DimensionMismatch("amplification degree must be >= 1")
        if p.shape[0] != self.n * self.m:
            raise DimensionMismatch(
                f"matrix of size {p.shape[0]} does not match n*m = {self.n * self.m}"
            )
        if not is_projection(p, cfg):
            raise DimensionMismatch("matrix is not an orthogonal projection within tolerance")
        self.matrix = p

    @classmethod
    def base(cls, p, cfg: NumericConfig = DEFAULT_CONFIG) -> "AmplifiedProjection":
        """Wrap an unamplified projection in M_n (m = 1)."""
        p = as_square(p)
        return cls(p.shape[0], 1, p, cfg)

    @classmethod
    def from_vectors(cls, base_dim: int, amp_degree: int, vectors, cfg: NumericConfig = DEFAULT_CONFIG) -> "AmplifiedProjection":
        """Projection onto the span of column vectors in C^n (x) C^m."""
        cols = np.stack([np.asarray(v, dtype=complex).reshape(-1) for v in vectors], axis=1)
        return cls(base_dim, amp_degree, range_projection(cols, cfg), cfg)

    def padded(self, m: int) -> "AmplifiedProjection":
        """Embed into amplification degree m >= self.m by adjoining zero slots."""
        if m < self.m:
            raise DimensionMismatch("padding cannot shrink the amplification")
        if m == self.m:
            return self
        j = np.zeros((m, self.m), dtype=complex)
        j[: self.m, :] = np.eye(self.m)
        emb = np.kron(eye(self.n), j)
        return AmplifiedProjection(self.n, m, emb @ self.matrix @ emb.conj().T)

    @property
    def rank(self) -> int:
        return int(round(float(np.trace(self.matrix).real)))

    def __repr__(self):
        return f"AmplifiedProjection(n={self.n}, m={self.m}, rank={self.rank})"


def _align(p: AmplifiedProjection, q: AmplifiedProjection):
    if p.n != q.n:
        raise DimensionMismatch("base dimensions differ")
    m = max(p.m, q.m)
    return p.padded(m), q.padded(m), m


def _compress_norm(p: np.ndarray, b: np.ndarray, q: np.ndarray, m: int) -> float:
    return op_norm(p @ np.kron(b, np.eye(m)) @ q)


def _batch_compression_norms(p: np.ndarray, basis: np.ndarray, q: np.ndarray, n: int, m: int) -> np.ndarray:
    """HS norms of P (B (x) I_m) Q over a stacked basis, without forming the
    Kronecker products."""
    if basis.shape[0] == 0:
        return np.zeros(0)
    if m == 1:
        out = np.einsum("ij,bjk,kl->bil", p, basis, q, optimize=True)
        return np.linalg.norm(out.reshape(basis.shape[0], -1), axis=1)
    p4 = p.reshape(n, m, n, m)
    q4 = q.reshape(n, m, n, m)
    out = np.einsum("iajc,bjk,kcld->biald", p4, basis, q4, optimize=True)
    return np.linalg.norm(out.reshape(basis.shape[0], -1), axis=1)


def rho(f: StepFiltration, p: AmplifiedProjection, q: AmplifiedProjection, cfg: NumericConfig = DEFAULT_CONFIG) -> float:
    """rho(P, Q) = inf{t : P (A (x) I) Q != 0 for some A in V_t}.

    Scanning an HS basis of each level is exact by linearity (the zero test
    uses the HS norm of the compression).  Returns +inf when no level links
    the pair.
    """
    if p.n != f.n:
        raise DimensionMismatch("projection base dimension does not match filtration")
    pp, qq, m = _align(p, q)
    for t, lv in zip(f.breakpoints, f.levels):
        norms = _batch_compression_norms(pp.matrix, lv.basis, qq.matrix, f.n, m)
        if norms.size and norms.max() > cfg.membership_tol:
            return t
    return math.inf


def linkable(p: AmplifiedProjection, q: AmplifiedProjection, cfg: NumericConfig = DEFAULT_CONFIG) -> bool:
    """True iff P (A (x) I) Q != 0 for some A in M_n; scans matrix units."""
    pp, qq, m = _align(p, q)
    n = p.n
    units = full_space(n).basis
    norms = _batch_compression_norms(pp.matrix, units, qq.matrix, n, m)
    return bool(norms.size and norms.max() > cfg.membership_tol)


def _apply_level(lv: OperatorSubspace, p: AmplifiedProjection, cfg: NumericConfig) -> np.ndarray:
    """Range projection of (S (x) I_m) applied to ran(P)."""
    nm = p.n * p.m
    if lv.dim == 0:
        return np.zeros((nm, nm), dtype=complex)
    im = np.eye(p.m)
    stacked = np.concatenate([np.kron(b, im) @ p.matrix for b in lv.basis], axis=1)
    return range_projection(stacked, cfg)


def neighborhood(f: StepFiltration, p: AmplifiedProjection, eps: float, cfg: NumericConfig = DEFAULT_CONFIG) -> AmplifiedProjection:
    """Open eps-neighborhood: projection onto (V_{<eps} (x) I) ran(P)."""
    if eps <= 0:
        raise NegativeTime("neighborhood radius must be positive")
    lv = f.v_less_than(eps)
    return AmplifiedProjection(p.n, p.m, _apply_level(lv, p, cfg), cfg)


def closure(f: StepFiltration, p: AmplifiedProjection, cfg: NumericConfig = DEFAULT_CONFIG) -> AmplifiedProjection:
    """Projection onto (V_0 (x) I) ran(P), the meet of all step neighborhoods."""
    return AmplifiedProjection(p.n, p.m, _apply_level(f.levels[0], p, cfg), cfg)


def is_closed(f: StepFiltration, p: AmplifiedProjection, cfg: NumericConfig = DEFAULT_CONFIG) -> bool:
    c = closure(f, p, cfg)
    return op_norm(c.matrix - p.matrix) <= cfg.membership_tol * max(1.0, op_norm(p.matrix))


def _leq(a: np.ndarray, b: np.ndarray, cfg: NumericConfig) -> bool:
    """Projection order a <= b, i.e. b a = a."""
    return op_norm(b @ a - a) <= cfg.membership_tol * max(1.0, op_norm(a))


def hausdorff_distance(f: StepFiltration, p: AmplifiedProjection, q: AmplifiedProjection, cfg: NumericConfig = DEFAULT_CONFIG) -> float:
    """inf{eps : P <= (Q)_eps and Q <= (P)_eps}, attained on the breakpoint
    grid for step data (the neighborhood only changes when eps crosses a
    breakpoint)."""
    pp, qq, _ = _align(p, q)
    for t, lv in zip(f.breakpoints, f.levels):
        np_ = _apply_level(lv, pp, cfg)
        nq = _apply_level(lv, qq, cfg)
        if _leq(pp.matrix, nq, cfg) and _leq(qq.matrix, np_, cfg):
            return t
    return math.inf


def separating_projections(f: StepFiltration, t: float, a, cfg: NumericConfig = DEFAULT_CONFIG):
    """Witness pair for A outside the level at t.

    Construction: split A = (component in V_t) + C, take the singular vectors
    of C, and set Q to the orbit of eta = sum v_i (x) e_i under V_0 (x) I and
    P to the complement of (V_t (x) I) ran(Q).  Then P (A (x) I) Q != 0 while
    P (B (x) I) Q = 0 for every B in V_t, so rho(P, Q) exceeds t.  Both
    projections commute with M' (x) I for every compatible context since
    their ranges are invariant under V_0 (x) I.  The postcondition is checked
    numerically before returning.
    """
    m0 = as_square(a)
    if m0.shape[0] != f.n:
        raise DimensionMismatch("matrix size does not match filtration")
    base = f.value_at(t)
    c = m0 - base.project(m0)
    if hs_norm(c) <= cfg.membership_tol * max(1.0, hs_norm(m0)):
        raise AlreadyInside(f"matrix already belongs to the level at t = {t}")
    u, s, vh = np.linalg.svd(c)
    r = int(np.sum(s > cfg.rank_tol * s[0]))
    m = r
    eta = np.zeros(f.n * m, dtype=complex)
    xi = np.zeros(f.n * m, dtype=complex)
    for i in range(m):
        eta += np.kron(vh[i].conj(), _unit(m, i))
        xi += s[i] * np.kron(u[:, i], _unit(m, i))
    im = np.eye(m)
    orbit = [np.kron(b, im) @ eta for b in f.levels[0].basis]
    q = AmplifiedProjection.from_vectors(f.n, m, orbit, cfg)
    qcols = _range_basis(q.matrix, cfg)
    stacked = np.concatenate([np.kron(b, im) @ qcols for b in base.basis], axis=1)
    l_proj = range_projection(stacked, cfg) if stacked.size else np.zeros_like(q.matrix)
    p = AmplifiedProjection(f.n, m, eye(f.n * m) - l_proj, cfg)
    # numerical verification of the separation postcondition
    if _batch_compression_norms(p.matrix, m0[None], q.matrix, f.n, m).max() <= cfg.membership_tol:
        raise AlreadyInside("separation failed: witness compression vanished")
    level_norms = _batch_compression_norms(p.matrix, base.basis, q.matrix, f.n, m)
    if level_norms.size and level_norms.max() > cfg.membership_tol:
        raise AlreadyInside("separation failed: level not annihilated")
    return p, q


def _unit(m: int, i: int) -> np.ndarray:
    e = np.zeros(m, dtype=complex)
    e[i] = 1.0
    return e


def _range_basis(p: np.ndarray, cfg: NumericConfig) -> np.ndarray:
    """Orthonormal columns spanning ran(p) for a projection p."""
    w, v = np.linalg.eigh((p + p.conj().T) / 2)
    keep = w > 0.5
    return v[:, keep]


def probes_for_level(f: StepFiltration, t: float, cfg: NumericConfig = DEFAULT_CONFIG):
    """One separation witness per HS direction missing from the level at t."""
    base = f.value_at(t)
    comp = complement(base, cfg)
    return [separating_projections(f, t, d, cfg) for d in comp.basis]


def rebuild_level(f: StepFiltration, t: float, probes, cfg: NumericConfig = DEFAULT_CONFIG) -> OperatorSubspace:
    """Intersection of the constraint spaces {A : P (A (x) I) Q = 0} over the
    probe pairs; with probes from :func:`probes_for_level` this recovers the
    level at t exactly."""
    n = f.n
    blocks = []
    for p, q in probes:
        pp, qq, m = _align(p, q)
        nm = n * m
        im = np.eye(m)
        cols = []
        e = np.zeros((n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                e[i, j] = 1.0
                cols.append((pp.matrix @ np.kron(e, im) @ qq.matrix).reshape(-1))
                e[i, j] = 0.0
        blocks.append(np.stack(cols, axis=1))
    if not blocks:
        return full_space(n)
    k = np.concatenate(blocks, axis=0)
    basis = null_space_rows(k, cfg).reshape(-1, n, n)
    return OperatorSubspace(n, basis)
