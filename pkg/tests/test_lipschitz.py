import math

import numpy as np
import pytest

from qwmetric import AmplifiedProjection, StepFiltration, from_classical, full_space, rho, span
from qwmetric.errors import CommutantMember, NotHermitian, ZeroProjection
from qwmetric.lipschitz import (
    AscentBudget,
    commutation_lipschitz_lower,
    distance_operator,
    lipschitz_witness,
    rho_from_gauge,
    spectral_join,
    spectral_lipschitz,
)
from qwmetric.numerics import op_norm, random_hermitian, range_projection

from conftest import (
    DIAG,
    I2,
    basis_state_projection,
    brute_lipschitz,
    random_metric,
    random_step_filtration,
)


def countersum_metric(n):
    """The two- or three-level metric with the diagonal direction entering at
    2/n and everything else at 1 (defined for n >= 2)."""
    a = 2.0 / n
    if a < 1.0:
        return StepFiltration(2, [0, a, 1], [span([I2]), span([I2, DIAG]), full_space(2)])
    return StepFiltration(2, [0, 1], [span([I2]), full_space(2)])


class TestSpectralLipschitz:
    def test_scalar_is_flat(self, rng):
        f = random_step_filtration(3, rng)
        assert spectral_lipschitz(f, 3.7 * np.eye(3)).value == 0.0

    def test_rejects_non_hermitian(self, rng):
        f = random_step_filtration(2, rng)
        with pytest.raises(NotHermitian):
            spectral_lipschitz(f, np.array([[0, 1], [0, 0]], dtype=complex))

    @pytest.mark.parametrize("n", [2, 5, 10, 100])
    def test_countersum_family(self, n):
        f = countersum_metric(n)
        a = np.diag([1.0, 0.0]).astype(complex)
        b = np.ones((2, 2), dtype=complex) / n
        assert spectral_lipschitz(f, a).value == pytest.approx(1.0, abs=1e-9)
        assert spectral_lipschitz(f, b).value == pytest.approx(1.0, abs=1e-9)
        expected = math.sqrt(n * n + 4) / 2
        assert spectral_lipschitz(f, a + b).value == pytest.approx(expected, abs=1e-9)

    def test_sum_superadditivity_failure_witnessed(self):
        # for n >= 5 the sum exceeds L_s(A) + L_s(B) = 2
        f = countersum_metric(5)
        a = np.diag([1.0, 0.0]).astype(complex)
        b = np.ones((2, 2), dtype=complex) / 5
        assert spectral_lipschitz(f, a + b).value > 2.0

    @pytest.mark.parametrize("seed", range(5))
    def test_classical_multiplier_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 7))
        d = random_metric(n, rng)
        f, _ = from_classical(d)
        fv = rng.uniform(-2, 2, n)
        got = spectral_lipschitz(f, np.diag(fv).astype(complex)).value
        assert got == pytest.approx(brute_lipschitz(fv, d), abs=1e-8)

    def test_witness_reproduces_value(self, rng):
        d = random_metric(4, rng)
        f, _ = from_classical(d)
        fv = rng.uniform(-2, 2, 4)
        rep = spectral_lipschitz(f, np.diag(fv).astype(complex))
        lo, hi = rep.witness["pair"]
        r = rho(f, rep.witness["low"], rep.witness["high"])
        assert (hi - lo) / r == pytest.approx(rep.value, abs=1e-8)


class TestGaugeAxioms:
    """Quantum Lipschitz gauge axioms (translation, homogeneity, join,
    compression) for the spectral gauge."""

    @pytest.mark.parametrize("seed", range(4))
    def test_translation_and_homogeneity(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 5))
        f = random_step_filtration(n, rng, classical=bool(seed % 2))
        a = random_hermitian(n, rng)
        base = spectral_lipschitz(f, a).value
        assert spectral_lipschitz(f, a + np.eye(n)).value == pytest.approx(base, abs=1e-8)
        assert spectral_lipschitz(f, -2.5 * a).value == pytest.approx(2.5 * base, abs=1e-8)

    @pytest.mark.parametrize("seed", range(4))
    def test_spectral_join_bound(self, seed):
        rng = np.random.default_rng(seed)
        n = 3
        f = random_step_filtration(n, rng)
        a = random_hermitian(n, rng)
        b = random_hermitian(n, rng)
        join = spectral_join(a, b)
        la = spectral_lipschitz(f, a).value
        lb = spectral_lipschitz(f, b).value
        lj = spectral_lipschitz(f, join).value
        assert lj <= max(la, lb) + 1e-8

    @pytest.mark.parametrize("seed", range(4))
    def test_compression_axiom(self, seed):
        rng = np.random.default_rng(seed)
        n, m = 2, 2
        f = random_step_filtration(n, rng)
        a = random_hermitian(n * m, rng)
        a = a + (abs(min(np.linalg.eigvalsh(a))) + 0.1) * np.eye(n * m)  # positive
        bm = np.kron(np.eye(n), rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))
        # the transform with spectral projections [B P_{(s,inf)}(A)]
        from qwmetric.numerics import hermitian_eig, spectral_projection

        values, _ = hermitian_eig(a)
        thresholds = sorted(set(values))
        out = np.zeros((n * m, n * m), dtype=complex)
        prev = 0.0
        for t in thresholds:
            mid = (prev + t) / 2 if t > 0 else 0.0
            upper = np.eye(n * m) - spectral_projection(a, "le", mid)
            out = out + (t - prev) * range_projection(bm @ upper)
            prev = t
        la = spectral_lipschitz(f, a, amp_degree=m).value
        lab = spectral_lipschitz(f, out, amp_degree=m).value
        assert lab <= la + 1e-8

    @pytest.mark.parametrize("seed", range(3))
    def test_piecewise_linear_composition(self, seed):
        rng = np.random.default_rng(seed)
        n = 4
        d = random_metric(n, rng)
        f, _ = from_classical(d)
        a = np.diag(rng.uniform(-1, 1, n)).astype(complex)
        slope = 1.7
        fa = slope * np.clip(np.diag(a).real, -0.5, 0.5)
        got = spectral_lipschitz(f, np.diag(fa).astype(complex)).value
        assert got <= slope * spectral_lipschitz(f, a).value + 1e-8


class TestCommutationLower:
    def test_commuting_operator_scores_zero(self, rng):
        f = random_step_filtration(3, rng)
        rep = commutation_lipschitz_lower(f, np.eye(3), budget=AscentBudget.deterministic())
        assert rep.value == 0.0

    @pytest.mark.parametrize("seed", range(4))
    def test_classical_multiplier_exact(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 7))
        d = random_metric(n, rng)
        f, _ = from_classical(d)
        fv = rng.uniform(-2, 2, n)
        rep = commutation_lipschitz_lower(f, np.diag(fv).astype(complex), budget=AscentBudget.deterministic())
        assert rep.value == pytest.approx(brute_lipschitz(fv, d), abs=1e-8)

    def test_m2_pauli_commutator(self):
        from qwmetric.constructions import m2_metric

        f = m2_metric(1, 1, 1)
        a = DIAG  # enters at 1; [diag, real-off] has norm 2
        rep = commutation_lipschitz_lower(f, a, budget=AscentBudget.deterministic())
        assert rep.value >= 2.0 - 1e-9
        assert spectral_lipschitz(f, a).value == pytest.approx(2.0)

    @pytest.mark.parametrize("seed", range(6))
    def test_lower_bound_below_spectral(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 5))
        f = random_step_filtration(n, rng, classical=bool(seed % 2))
        a = random_hermitian(n, rng)
        lc = commutation_lipschitz_lower(f, a, budget=AscentBudget(restarts=4, steps=60), seed=seed)
        ls = spectral_lipschitz(f, a)
        if math.isfinite(ls.value):
            assert lc.value <= ls.value + 1e-6

    def test_witness_reproduces_value(self, rng):
        d = random_metric(4, rng)
        f, _ = from_classical(d)
        fv = rng.uniform(-2, 2, 4)
        a = np.diag(fv).astype(complex)
        rep = commutation_lipschitz_lower(f, a, budget=AscentBudget.deterministic())
        t, c = rep.witness["t"], rep.witness["contraction"]
        assert op_norm(c) <= 1 + 1e-9
        assert op_norm(a @ c - c @ a) / t == pytest.approx(rep.value, abs=1e-8)

    def test_ascent_improves_on_candidates_sometimes(self, rng):
        # non-classical filtration where basis elements are not optimal
        f = random_step_filtration(3, rng)
        a = random_hermitian(3, rng)
        det = commutation_lipschitz_lower(f, a, budget=AscentBudget.deterministic()).value
        asc = commutation_lipschitz_lower(f, a, budget=AscentBudget(restarts=8, steps=100)).value
        assert asc >= det - 1e-12

    def test_derivation_identity_of_commutators(self, rng):
        # the de Leeuw map content: [AB, C] = A [B, C] + [A, C] B
        a, b, c = (random_hermitian(3, rng) for _ in range(3))
        lhs = (a @ b) @ c - c @ (a @ b)
        rhs = a @ (b @ c - c @ b) + (a @ c - c @ a) @ b
        assert op_norm(lhs - rhs) < 1e-9

    def test_non_hermitian_input_supported(self, rng):
        # the commutation number needs no Hermiticity
        d = random_metric(3, rng)
        f, _ = from_classical(d)
        e01 = np.zeros((3, 3), dtype=complex)
        e01[0, 1] = 1.0
        mf = np.diag([0.0, 1.0, 2.5]).astype(complex)
        rep = commutation_lipschitz_lower(f, mf + 0.5j * e01, budget=AscentBudget.deterministic())
        assert rep.value > 0.0
        assert np.isfinite(rep.value)


class TestDistanceOperator:
    def test_full_projection_gives_zero(self, rng):
        f = random_step_filtration(3, rng)
        a = distance_operator(f, AmplifiedProjection.base(np.eye(3)), 2.0)
        assert op_norm(a) < 1e-9

    def test_zero_projection_rejected(self, rng):
        f = random_step_filtration(3, rng)
        with pytest.raises(ZeroProjection):
            distance_operator(f, AmplifiedProjection(3, 1, np.zeros((3, 3))), 1.0)

    @pytest.mark.parametrize("seed", range(4))
    def test_classical_profile(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 7))
        d = random_metric(n, rng)
        f, _ = from_classical(d)
        x = int(rng.integers(0, n))
        c = float(rng.uniform(0.5, d.max() + 1))
        a = distance_operator(f, AmplifiedProjection.base(basis_state_projection(n, x)), c)
        np.testing.assert_allclose(np.diag(a).real, np.minimum(d[x], c), atol=1e-9)

    def test_below_first_jump_single_term(self, rng):
        d = random_metric(3, rng)
        f, _ = from_classical(d)
        c = f.breakpoints[1] / 2
        r = AmplifiedProjection.base(basis_state_projection(3, 0))
        a = distance_operator(f, r, c)
        n0 = np.diag([1.0, 0, 0])
        np.testing.assert_allclose(a, c * (np.eye(3) - n0), atol=1e-9)

    @pytest.mark.parametrize("seed", range(5))
    def test_postconditions(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 5))
        f = random_step_filtration(n, rng, classical=bool(seed % 2))
        x = int(rng.integers(0, n))
        r = AmplifiedProjection.base(basis_state_projection(n, x))
        c = float(rng.uniform(0.3, f.breakpoints[-1] + 1))
        a = distance_operator(f, r, c)
        assert op_norm(a @ r.matrix) < 1e-9
        assert spectral_lipschitz(f, a).value <= 1 + 1e-8
        # far projections see the ceiling
        for y in range(n):
            q = AmplifiedProjection.base(basis_state_projection(n, y))
            if rho(f, q, r) >= c:
                assert op_norm(a @ q.matrix - c * q.matrix) < 1e-8


class TestRhoFromGauge:
    def test_zero_case(self, rng):
        f = random_step_filtration(3, rng)
        p = AmplifiedProjection.base(basis_state_projection(3, 0) + basis_state_projection(3, 1))
        q = AmplifiedProjection.base(basis_state_projection(3, 1))
        assert rho_from_gauge(f, p, q) == 0.0

    @pytest.mark.parametrize("seed", range(4))
    def test_classical_singletons(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 6))
        d = random_metric(n, rng)
        f, _ = from_classical(d)
        x, y = rng.choice(n, size=2, replace=False)
        p = AmplifiedProjection.base(basis_state_projection(n, int(x)))
        q = AmplifiedProjection.base(basis_state_projection(n, int(y)))
        assert rho_from_gauge(f, p, q) == pytest.approx(d[x, y], abs=1e-8)

    def test_m2_eigenprojections(self):
        from qwmetric.constructions import m2_metric

        f = m2_metric(1, 2, 3)
        p = AmplifiedProjection.base(np.diag([1.0, 0.0]))
        q = AmplifiedProjection.base(np.diag([0.0, 1.0]))
        r = rho_from_gauge(f, p, q)
        assert r == rho(f, p, q) == 2.0  # linked by the real off-diagonal

    def test_unlinkable_pair(self):
        d = np.array([[0.0, math.inf], [math.inf, 0.0]])
        f, _ = from_classical(d)
        p = AmplifiedProjection.base(basis_state_projection(2, 0))
        q = AmplifiedProjection.base(basis_state_projection(2, 1))
        assert rho_from_gauge(f, p, q) == math.inf


class TestWitness:
    def test_off_diagonal_unit_on_classical(self, rng):
        d = random_metric(3, rng)
        f, _ = from_classical(d)
        e01 = np.zeros((3, 3), dtype=complex)
        e01[0, 1] = 1.0
        rep = lipschitz_witness(f, e01)
        b = rep.witness["matrix"]
        assert op_norm(b @ e01 - e01 @ b) > 1e-8
        assert rep.witness["amplified_ls"] <= 1 + 1e-8
        assert spectral_lipschitz(f, b).value <= 1 + 1e-8

    def test_commutant_member_rejected(self, rng):
        f = random_step_filtration(3, rng)
        with pytest.raises(CommutantMember):
            lipschitz_witness(f, np.eye(3))

    @pytest.mark.parametrize("seed", range(4))
    def test_random_non_commutant_operators(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 5))
        f = random_step_filtration(n, rng, classical=bool(seed % 2))
        c = random_hermitian(n, rng)
        if f.levels[0].contains(c):
            return
        rep = lipschitz_witness(f, c, seed=seed)
        assert rep.witness["commutator_norm"] > 1e-8
        assert rep.witness["amplified_ls"] <= 1 + 1e-8

    def test_block_algebra_context(self, rng):
        # a metric over M_2 (+) M_2: non-commutant operators get witnesses
        from qwmetric.constructions import direct_sum, m2_metric

        f = direct_sum(m2_metric(1, 1, 2), m2_metric(1, 2, 2), bridge=2.0)
        c = random_hermitian(4, rng)
        assert not f.levels[0].contains(c)
        rep = lipschitz_witness(f, c)
        assert rep.witness["commutator_norm"] > 1e-8
        assert rep.witness["amplified_ls"] <= 1 + 1e-8
