"""Tests for Lyapunov-function hypotheses, evaluators and the empirical checker."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lvolterra.analysis.lyapunov import (
    LyapunovFamily,
    LyapunovFunction,
    alpha_for,
    check_thm1,
    check_thm2,
    check_thm4,
    check_thm5,
    empirical_lyapunov_check,
    eval_linear_phi,
    eval_phi,
    eval_psi,
    eval_ratio,
    p_delta_contains,
    p_delta_witness,
    sample_p_delta,
)
from lvolterra.core.canonical import canonical_of
from lvolterra.core.gen import GenSpec, random_operator
from lvolterra.core.simplex import SimplexPoint, random_interior_point
from lvolterra.core.tensor import HeredityTensor, evolve, step
from lvolterra.errors import DomainError, HypothesisError

UNIFORM = SimplexPoint.uniform(3)


@pytest.fixture
def t3():
    """A 2-Volterra operator whose first two rows are negative on coordinate 3."""
    table = {
        (1, 1, 1): 0.9, (1, 1, 3): 0.1,
        (1, 2, 1): 0.5, (1, 2, 2): 0.5,
        (1, 3, 1): 0.3, (1, 3, 3): 0.7,
        (2, 2, 2): 1.0,
        (2, 3, 2): 0.2, (2, 3, 3): 0.8,
        (3, 3, 3): 1.0,
    }
    return HeredityTensor.from_entries(
        3, [(i - 1, j - 1, k - 1, v) for (i, j, k), v in table.items()]
    )


class TestPDelta:
    """Tests for P_δ membership and the witness construction."""

    def test_positive_delta_rejected(self, t2):
        A = canonical_of(t2).A

        with pytest.raises(DomainError):
            p_delta_contains(A, 2, [1.0, 0.0], 0.1)

    def test_witness_for_t2(self, t2):
        """The witness moves ε/2 = 0.125 of the mass off the vertex."""
        A = canonical_of(t2).A
        witness = p_delta_witness(A, 2, 0, 0.0)

        assert witness.epsilon == pytest.approx(0.25)
        assert witness.p.tolist() == pytest.approx([0.875, 0.125])
        assert p_delta_contains(A, 2, witness.p, 0.0)

    def test_vertex_in_p_delta(self, t5):
        """e^(k0) lies in P_δ when a_{k0,i} <= δ for all i."""
        A = canonical_of(t5).A

        assert p_delta_contains(A, 2, [1.0, 0.0], -0.4)
        assert not p_delta_contains(A, 2, [0.0, 1.0], 0.0)

    def test_hypothesis_failure_names_index(self, t2):
        """Row 2 of T2 has a positive entry at i = 1."""
        A = canonical_of(t2).A

        with pytest.raises(HypothesisError) as exc_info:
            p_delta_witness(A, 2, 1, 0.0)

        assert exc_info.value.index == 0

    def test_k0_must_be_volterra(self, t2):
        A = canonical_of(t2).A

        with pytest.raises(DomainError):
            p_delta_witness(A, 2, 2, 0.0)

    @given(
        ell=st.integers(1, 4),
        extra=st.integers(0, 3),
        data=st.data(),
    )
    @settings(deadline=None, max_examples=300)
    def test_witness_always_contained(self, ell, extra, data):
        """For any matrix satisfying the row hypothesis the witness lies in P_δ."""
        m = ell + extra
        A = data.draw(arrays(np.float64, (m, m), elements=st.floats(-1.0, 1.0)))
        k0 = data.draw(st.integers(0, ell - 1))
        A[k0] = -np.abs(A[k0])
        delta = data.draw(st.floats(float(A[k0].max()), 0.0))
        witness = p_delta_witness(A, ell, k0, delta)

        assert p_delta_contains(A, ell, witness.p, delta)
        if ell == 1:
            assert witness.p.tolist() == [1.0]

    def test_sampler_stays_in_p_delta(self, t2):
        """Every sample passes the membership test; the witness comes first."""
        A = canonical_of(t2).A
        samples = sample_p_delta(A, 2, 0.0, 20, np.random.default_rng(0))

        assert samples[0].tolist() == pytest.approx([0.875, 0.125])
        assert all(p_delta_contains(A, 2, p, 0.0) for p in samples)

    def test_sampler_without_qualifying_row(self, identity):
        """A strictly negative δ needs a strictly negative row."""
        A = canonical_of(identity).A

        with pytest.raises(HypothesisError):
            sample_p_delta(A, 3, -0.1, 5, np.random.default_rng(0))


class TestHypotheses:
    """Tests for the hypothesis predicates."""

    def test_check_thm1(self, t2, identity):
        assert check_thm1(canonical_of(t2).A, 2) == 0
        assert check_thm1(canonical_of(identity).A, 3) == 0

    def test_check_thm2_on_t2(self, t2):
        """T2 satisfies the negative-block hypothesis with r = 1, α = 0.4."""
        hyp = check_thm2(canonical_of(t2).A, 2)

        assert hyp.r == 1
        assert hyp.alpha == pytest.approx(0.4)

    def test_check_thm2_on_t3(self, t3):
        assert check_thm2(canonical_of(t3).A, 2).r == 2
        assert alpha_for(canonical_of(t3).A, 2) == pytest.approx(0.4)

    def test_check_thm2_none_for_identity(self, identity):
        assert check_thm2(canonical_of(identity).A, 3) is None

    def test_alpha_for_rejects_failed_hypothesis(self, identity):
        with pytest.raises(HypothesisError):
            alpha_for(canonical_of(identity).A, 1)

    def test_check_thm4_on_t2(self, t2):
        """Row 1 lies strictly below rows 2 and 3."""
        pairs = check_thm4(canonical_of(t2).A, 2)

        assert [(p.p, p.q, p.strict) for p in pairs] == [(0, 1, True), (0, 2, True)]

    def test_check_thm5_on_t5(self, t5):
        hyp = check_thm5(canonical_of(t5).A, 2)

        assert hyp.k0 == 0
        assert hyp.delta == pytest.approx(0.4)

    def test_check_thm5_none_for_identity(self, identity):
        assert check_thm5(canonical_of(identity).A, 3) is None


class TestEvaluators:
    """Tests for the function evaluators."""

    def test_zero_power_convention(self):
        """A zero coordinate with a zero exponent contributes 1."""
        assert eval_phi([1.0, 0.0], [0.5, 0.0, 0.5]) == 0.5

    def test_linear_phi(self):
        assert eval_linear_phi(2, [0.2, 0.3, 0.5]) == pytest.approx(0.5)

    def test_psi_needs_r_exponents(self):
        with pytest.raises(DomainError):
            eval_psi([0.5, 0.5], 3, [0.2, 0.3, 0.5])

    def test_ratio_undefined_at_zero(self):
        with pytest.raises(DomainError):
            eval_ratio(0, 1, [1.0, 0.0])

    @given(
        b=arrays(np.float64, 4, elements=st.floats(1e-6, 10.0)),
        w=arrays(np.float64, 4, elements=st.floats(1e-3, 1.0)),
    )
    @settings(deadline=None)
    def test_weighted_mean_bound(self, b, w):
        """A weighted geometric mean never exceeds the weighted arithmetic mean."""
        p = w / w.sum()

        assert eval_phi(p, b) <= float(p @ b) * (1.0 + 1e-12) + 1e-12

    def test_from_params(self):
        """Ratio pairs are given 1-based on the command line."""
        f = LyapunovFunction.from_params("ratio_pq", "1,2")

        assert f.pair == (0, 1)
        assert f.parameters() == {"p": 1, "q": 2}

    def test_from_params_rejects_bad_pair(self):
        with pytest.raises(ValueError):
            LyapunovFunction.from_params("ratio_pq", "2,2")

    def test_from_params_rejects_unknown_family(self):
        with pytest.raises(ValueError):
            LyapunovFunction.from_params("entropy", "1")


class TestDecreasingAlongOrbits:
    """The proved inequalities hold numerically."""

    def test_phi_p_non_increasing_for_random_operators(self):
        """When a Volterra row is nonpositive, φ_p with p in P_0 does not grow in one step."""
        fired = 0
        for seed in range(200):
            m = 2 + seed % 4
            ell = 1 + seed % m
            P = random_operator(GenSpec(m, ell, seed))
            A = canonical_of(P).A
            k0 = check_thm1(A, ell)
            if k0 is None:
                continue
            fired += 1
            rng = np.random.default_rng(seed)
            exponents = sample_p_delta(A, ell, 0.0, 10, rng, k0=k0)
            for _ in range(20):
                x = random_interior_point(m, rng).coords
                image = evolve(P, x)
                for p in exponents:
                    assert eval_phi(p.coords, image) <= eval_phi(p.coords, x) + 1e-12
        assert fired > 10

    def test_linear_phi_chain_on_t2(self, t2):
        """φ(x') <= φ(x) (1 - α + α φ(x)) along the orbit of the barycenter."""
        alpha = 0.4
        x = UNIFORM.coords
        for _ in range(200):
            y = step(t2, x, 1e-12)
            phi = eval_linear_phi(1, x)
            assert eval_linear_phi(1, y) <= phi * (1.0 - alpha + alpha * phi) + 1e-12
            x = y

    def test_psi_growth_bound_on_t3(self, t3):
        """ψ_p(x') <= ψ_p(x) (1 + φ(x)) and ψ_p converges."""
        weights = np.array([0.5, 0.5])
        x = UNIFORM.coords
        for _ in range(200):
            y = step(t3, x, 1e-12)
            bound = eval_psi(weights, 2, x) * (1.0 + eval_linear_phi(2, x))
            assert eval_psi(weights, 2, y) <= bound + 1e-12
            x = y

        report = empirical_lyapunov_check(
            t3,
            LyapunovFunction(LyapunovFamily.PSI_P, weights=(0.5, 0.5), r=2),
            UNIFORM,
            window=10,
        )
        assert report.converged

    def test_ratio_pairs_for_random_operators(self):
        """f_pq is non-increasing and f_qp non-decreasing for every qualifying pair."""
        checked = 0
        for seed in range(100):
            m = 2 + seed % 3
            ell = 1 + seed % m
            P = random_operator(GenSpec(m, ell, seed))
            x0 = random_interior_point(m, np.random.default_rng(seed))
            for pair in check_thm4(canonical_of(P).A, ell):
                for family in (LyapunovFamily.RATIO_PQ, LyapunovFamily.RATIO_QP_PLUS):
                    f = LyapunovFunction(family, pair=(pair.p, pair.q))
                    report = empirical_lyapunov_check(P, f, x0, n_steps=300)
                    assert report.violation_count == 0
                    checked += 1
        assert checked > 0


class TestEmpiricalCheck:
    """Tests for empirical_lyapunov_check."""

    def test_t2_linear_phi(self, t2):
        """x_1 decreases strictly to 0 on T2."""
        f = LyapunovFunction(LyapunovFamily.LINEAR_R, r=1)
        report = empirical_lyapunov_check(t2, f, UNIFORM, window=10)

        assert report.monotone
        assert report.violation_count == 0
        assert report.converged
        assert abs(report.limit_estimate) < 1e-6
        assert report.initial_value == pytest.approx(1 / 3)
        assert all(b < a for a, b in zip(report.values, report.values[1:]))

    def test_reciprocal_ratio_increases(self, t2):
        f = LyapunovFunction(LyapunovFamily.RATIO_QP_PLUS, pair=(0, 1))
        report = empirical_lyapunov_check(t2, f, UNIFORM, n_steps=200)

        assert report.monotone
        assert report.final_value > report.initial_value

    def test_identity_is_constant(self, identity):
        """On the identity operator every function is constant and converged."""
        f = LyapunovFunction(LyapunovFamily.PHI_P, weights=(0.5, 0.25, 0.25), r=3)
        report = empirical_lyapunov_check(identity, f, [0.2, 0.3, 0.5], n_steps=100)

        assert report.monotone
        assert report.limit_estimate == pytest.approx(report.initial_value)

    def test_boundary_start_rejected(self, t2):
        f = LyapunovFunction(LyapunovFamily.LINEAR_R, r=1)

        with pytest.raises(DomainError):
            empirical_lyapunov_check(t2, f, [0.0, 0.5, 0.5])

    def test_report_to_dict(self, t2):
        f = LyapunovFunction(LyapunovFamily.RATIO_PQ, pair=(0, 2))
        data = empirical_lyapunov_check(t2, f, UNIFORM, n_steps=20).to_dict()

        assert data["function"] == "ratio_pq"
        assert data["parameters"] == {"p": 1, "q": 3}
        assert data["limit"] == "not converged within n_steps"
