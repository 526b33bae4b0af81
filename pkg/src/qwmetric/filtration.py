"""Step filtrations of M_n(C): the finite-dimensional form of a quantum
pseudometric.

A filtration is a strictly increasing chain of operator systems S_0 c S_1 c
... c S_k attached to breakpoints 0 = t_0 < t_1 < ... < t_k, read as the
right-continuous step function V_t = S_i for the largest t_i <= t.  Infinite
distances are encoded by a top level smaller than M_n; no infinite breakpoint
is ever stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MixedDimensions, NegativeTime, NotAPseudometric, NotDiagonalContext
from .numerics import DEFAULT_CONFIG, NumericConfig, as_square
from .opspace import (
    OperatorSubspace,
    VNAlgebra,
    commutant,
    full_space,
    generated_vn_algebra,
    product_span,
    span,
)

__all__ = [
    "StepFiltration",
    "MetricContext",
    "ValidationReport",
    "validate",
    "from_classical",
    "to_classical",
    "descriptors",
]


class StepFiltration:
    """A quantum pseudometric as a step function of operator systems."""

    def __init__(self, ambient_dim: int, breakpoints, levels, meta: dict | None = None):
        self.n = int(ambient_dim)
        self.breakpoints = [float(t) for t in breakpoints]
        self.levels = list(levels)
        self.meta = dict(meta or {})
        if len(self.breakpoints) != len(self.levels) or not self.levels:
            raise MixedDimensions("breakpoints and levels must align and be nonempty")
        if abs(self.breakpoints[0]) > 0:
            raise MixedDimensions("first breakpoint must be 0")
        for t0, t1 in zip(self.breakpoints, self.breakpoints[1:]):
            if not t1 > t0:
                raise MixedDimensions("breakpoints must be strictly increasing")
        for lv in self.levels:
            if lv.n != self.n:
                raise MixedDimensions("level ambient dimension mismatch")

    @property
    def top(self) -> OperatorSubspace:
        return self.levels[-1]

    def level_index_at(self, t: float) -> int:
        if t < 0:
            raise NegativeTime(f"t = {t} < 0")
        i = 0
        for j, tj in enumerate(self.breakpoints):
            if tj <= t:
                i = j
            else:
                break
        return i

    def value_at(self, t: float) -> OperatorSubspace:
        """V_t: the level at the largest breakpoint <= t."""
        return self.levels[self.level_index_at(t)]

    def v_less_than(self, t: float) -> OperatorSubspace:
        """V_{<t}: union of levels strictly below t; accepts t = +inf."""
        if t == math.inf:
            return self.levels[-1]
        if t <= 0:
            raise NegativeTime("v_less_than needs t > 0")
        i = -1
        for j, tj in enumerate(self.breakpoints):
            if tj < t:
                i = j
            else:
                break
        if i < 0:
            # no level strictly below t; the zero-time level is the floor
            return self.levels[0] if t > self.breakpoints[0] else _zero_like(self)
        return self.levels[i]

    def displacement_gauge(self, a, cfg: NumericConfig = DEFAULT_CONFIG) -> float:
        """D(A) = inf{t : A in V_t}; +inf when A is outside the top level."""
        m = as_square(a)
        if m.shape[0] != self.n:
            raise MixedDimensions("matrix size does not match filtration")
        for t, lv in zip(self.breakpoints, self.levels):
            if lv.contains(m, cfg):
                return t
        return math.inf

    def normalized(self, cfg: NumericConfig = DEFAULT_CONFIG) -> "StepFiltration":
        """Drop levels equal to their predecessor (restores strict inclusion)."""
        bps = [self.breakpoints[0]]
        lvs = [self.levels[0]]
        for t, lv in zip(self.breakpoints[1:], self.levels[1:]):
            if lv.dim != lvs[-1].dim or not lv.equals(lvs[-1], cfg):
                bps.append(t)
                lvs.append(lv)
        return StepFiltration(self.n, bps, lvs, self.meta)

    def __repr__(self):
        dims = [lv.dim for lv in self.levels]
        return f"StepFiltration(n={self.n}, breakpoints={self.breakpoints}, level_dims={dims})"


def _zero_like(f: StepFiltration) -> OperatorSubspace:
    return OperatorSubspace(f.n, np.zeros((0, f.n, f.n)))


@dataclass
class MetricContext:
    """The von Neumann algebra a pseudometric lives on, with cached commutant.

    The bicommutant identity M'' = M is automatic here: VNAlgebra verifies
    unital/self-adjoint/product closure, and such subspaces of M_n equal
    their double commutant."""

    algebra: VNAlgebra
    commutant: VNAlgebra

    @classmethod
    def from_algebra(cls, algebra: VNAlgebra, cfg: NumericConfig = DEFAULT_CONFIG) -> "MetricContext":
        return cls(algebra, commutant(algebra.basis, algebra.n, cfg))

    @classmethod
    def from_generators(cls, gens, n: int, cfg: NumericConfig = DEFAULT_CONFIG) -> "MetricContext":
        return cls.from_algebra(generated_vn_algebra(gens, n, cfg), cfg)

    @classmethod
    def full(cls, n: int, cfg: NumericConfig = DEFAULT_CONFIG) -> "MetricContext":
        """M = M_n, M' = C.I."""
        alg = VNAlgebra(n, full_space(n).basis, cfg, verify=False)
        return cls.from_algebra(alg, cfg)

    @classmethod
    def diagonal(cls, n: int, cfg: NumericConfig = DEFAULT_CONFIG) -> "MetricContext":
        """M = diagonal algebra of M_n (the classical algebra on n points)."""
        basis = np.zeros((n, n, n), dtype=complex)
        for i in range(n):
            basis[i, i, i] = 1.0
        return cls.from_algebra(VNAlgebra(n, basis, cfg, verify=False), cfg)

    def is_diagonal(self, cfg: NumericConfig = DEFAULT_CONFIG) -> bool:
        n = self.algebra.n
        if self.algebra.dim != n:
            return False
        for i in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[i, i] = 1.0
            if not self.algebra.contains(e, cfg):
                return False
        return True


def default_context(f: StepFiltration, cfg: NumericConfig = DEFAULT_CONFIG) -> MetricContext:
    """The canonical context M = (V_0)': every filtration is a metric there."""
    v0 = f.levels[0]
    comm = commutant(v0.basis, f.n, cfg)
    alg = VNAlgebra(f.n, v0.basis, cfg)
    return MetricContext(algebra=comm, commutant=alg)


@dataclass
class ValidationReport:
    is_filtration: bool
    is_pseudometric: bool
    is_metric: bool
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.is_filtration


def validate(f: StepFiltration, ctx: MetricContext | None = None, cfg: NumericConfig = DEFAULT_CONFIG) -> ValidationReport:
    """Check the filtration axioms and, when a context is given, the
    pseudometric (M' <= V_0) and metric (V_0 = M') conditions.

    Every violated axiom is recorded with the witnessing data; the product
    law is checked over all breakpoint pairs, which is necessary and
    sufficient under step semantics.
    """
    violations = []
    for i, lv in enumerate(f.levels):
        if not lv.is_operator_system(cfg):
            violations.append(("not_operator_system", i))
    for i in range(len(f.levels) - 1):
        small, big = f.levels[i], f.levels[i + 1]
        if not (big.contains_space(small, cfg) and big.dim > small.dim):
            violations.append(("not_strictly_increasing", i))
    for i, ti in enumerate(f.breakpoints):
        for j, tj in enumerate(f.breakpoints):
            target = f.value_at(ti + tj)
            prod = product_span(f.levels[i], f.levels[j], cfg)
            if not target.contains_space(prod, cfg):
                violations.append(("product_law", (i, j)))
    is_filtration = not violations
    is_pseudometric = False
    is_metric = False
    if ctx is not None:
        v0 = f.levels[0]
        is_pseudometric = is_filtration and v0.contains_space(ctx.commutant, cfg)
        if not v0.contains_space(ctx.commutant, cfg):
            violations.append(("commutant_not_contained", 0))
        is_metric = is_pseudometric and v0.dim == ctx.commutant.dim
    else:
        # with no context the filtration is a metric on (V_0)' by construction
        is_pseudometric = is_filtration
        is_metric = is_filtration
    return ValidationReport(is_filtration, is_pseudometric, is_metric, violations)


def _check_classical(d: np.ndarray, cfg: NumericConfig):
    n = d.shape[0]
    if d.shape != (n, n):
        raise NotAPseudometric("distance matrix must be square")
    tol = cfg.membership_tol
    for x in range(n):
        if d[x, x] != 0:
            raise NotAPseudometric(f"nonzero self-distance at {x}", witness=(x, x, x))
        for y in range(n):
            if d[x, y] < 0:
                raise NotAPseudometric(f"negative distance at ({x},{y})", witness=(x, y, y))
            if math.isinf(d[x, y]) or math.isinf(d[y, x]):
                if d[x, y] != d[y, x]:
                    raise NotAPseudometric(f"asymmetric at ({x},{y})", witness=(x, y, x))
            elif abs(d[x, y] - d[y, x]) > tol * max(1.0, abs(d[x, y])):
                raise NotAPseudometric(f"asymmetric at ({x},{y})", witness=(x, y, x))
    for x in range(n):
        for y in range(n):
            for z in range(n):
                if d[x, z] > d[x, y] + d[y, z] + tol:
                    raise NotAPseudometric(
                        f"triangle inequality fails at ({x},{y},{z})", witness=(x, y, z)
                    )


def from_classical(d, cfg: NumericConfig = DEFAULT_CONFIG):
    """Quantum pseudometric of a classical distance matrix on n points.

    Level at t is the span of the matrix units E_xy with d(x, y) <= t.
    Entries may be +inf; those pairs never enter, so the top level is the
    block algebra of finite-distance components.  Returns (filtration, ctx)
    with ctx the diagonal algebra.
    """
    d = np.asarray(d, dtype=float)
    _check_classical(d, cfg)
    n = d.shape[0]
    finite = sorted({float(v) for v in d.reshape(-1) if math.isfinite(v)})
    if not finite or finite[0] > 0:
        finite = [0.0] + finite
    breakpoints = []
    levels = []
    prev_dim = -1
    for t in finite:
        basis = np.zeros((0, n, n), dtype=complex)
        mats = []
        for x in range(n):
            for y in range(n):
                if d[x, y] <= t:
                    e = np.zeros((n, n), dtype=complex)
                    e[x, y] = 1.0
                    mats.append(e)
        lv = span(mats, n, cfg)
        if lv.dim != prev_dim:
            breakpoints.append(t)
            levels.append(lv)
            prev_dim = lv.dim
    f = StepFiltration(n, breakpoints, levels)
    return f, MetricContext.diagonal(n, cfg)


def to_classical(f: StepFiltration, ctx: MetricContext, cfg: NumericConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Distance matrix recovered from a filtration over the diagonal algebra:
    d(x, y) is the first breakpoint whose level touches the (x, y) entry."""
    if not ctx.is_diagonal(cfg):
        raise NotDiagonalContext("context algebra is not the diagonal algebra")
    n = f.n
    d = np.full((n, n), math.inf)
    for t, lv in zip(f.breakpoints, f.levels):
        touched = np.zeros((n, n), dtype=bool)
        for b in lv.basis:
            touched |= np.abs(b) > cfg.membership_tol
        d[touched & ~np.isfinite(d)] = t
    return d


def descriptors(f: StepFiltration, cfg: NumericConfig = DEFAULT_CONFIG) -> dict:
    """Scalar shape descriptors: diameter, uniform-discreteness gap, and the
    path property certified on the breakpoint sum grid."""
    n2 = f.n * f.n
    diameter = math.inf
    for t, lv in zip(f.breakpoints, f.levels):
        if lv.dim == n2:
            diameter = t
            break
    if len(f.breakpoints) == 1:
        gap = math.inf
    else:
        gap = f.breakpoints[1]
    grid = sorted({*f.breakpoints, *(a + b for a in f.breakpoints for b in f.breakpoints)})
    path = True
    for s in grid:
        for t in grid:
            lhs = product_span(f.value_at(s), f.value_at(t), cfg)
            if not lhs.equals(f.value_at(s + t), cfg):
                path = False
                break
        if not path:
            break
    return {
        "diameter": diameter,
        "uniformly_discrete": True,
        "gap": gap,
        "path_flag": path,
    }
