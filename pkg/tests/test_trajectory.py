"""Tests for orbit simulation and stop detection."""

import numpy as np
import pytest

from lvolterra.analysis.trajectory import (
    BoundaryHit,
    Converged,
    CycleDetected,
    MaxSteps,
    NoCycle,
    describe_stop,
    detect_cycle,
    simulate,
)
from lvolterra.core.gen import GenSpec, random_operator
from lvolterra.core.simplex import SimplexPoint
from lvolterra.errors import DomainError, SimplexError

E2 = SimplexPoint.vertex(3, 1)


class TestSimulate:
    """Tests for simulate."""

    def test_identity_converges_immediately(self, identity):
        traj = simulate(identity, [0.2, 0.3, 0.5])

        assert isinstance(traj.stop, Converged)
        assert traj.stop.onset_step == 0
        assert traj.step_count == 10
        assert traj.final.tolist() == pytest.approx([0.2, 0.3, 0.5])

    def test_c1_vertex_cycle(self, c1):
        """e2 and e3 swap: period 2 from step 0."""
        traj = simulate(c1, E2)

        assert isinstance(traj.stop, CycleDetected)
        assert traj.stop.period == 2
        assert traj.stop.phase == 0
        assert traj.stop.step == 16
        assert traj.points[1].tolist() == [0.0, 0.0, 1.0]

    def test_c1_edge_cycle(self, c1):
        traj = simulate(c1, [0.0, 0.3, 0.7])

        assert traj.stop.period == 2
        assert traj.points[1].tolist() == pytest.approx([0.0, 0.7, 0.3])

    def test_cycles_ignored_when_disabled(self, c1):
        traj = simulate(c1, E2, n_max=100, detect_cycles=False)

        assert isinstance(traj.stop, MaxSteps)
        assert traj.step_count == 100
        assert len(traj) == 101

    def test_stride_keeps_final_point(self, c1):
        traj = simulate(c1, E2, n_max=105, stride=10, detect_cycles=False)

        assert traj.steps.tolist() == list(range(0, 101, 10)) + [105]
        assert traj.final.tolist() == [0.0, 0.0, 1.0]

    def test_boundary_hit(self, t2):
        """x_1 decays to zero on T2."""
        traj = simulate(t2, SimplexPoint.uniform(3), stop_on_boundary=True)

        assert isinstance(traj.stop, BoundaryHit)
        assert traj.stop.index == 0
        assert traj.final.coords[0] <= 1e-14
        assert traj.step_count == traj.stop.step

    def test_no_drift_over_long_runs(self):
        P = random_operator(GenSpec(4, 2, seed=1))
        traj = simulate(P, SimplexPoint.uniform(4), stride=100, detect_cycles=False)

        assert np.all(traj.points >= 0.0)
        assert np.allclose(traj.points.sum(axis=1), 1.0, rtol=0.0, atol=1e-12)

    def test_canonical_path_agrees(self, w1):
        direct = simulate(w1, SimplexPoint.uniform(3), n_max=50, detect_cycles=False)
        canonical = simulate(
            w1, SimplexPoint.uniform(3), n_max=50, detect_cycles=False, use_canonical=True
        )

        assert np.allclose(direct.points, canonical.points, rtol=0.0, atol=1e-12)

    def test_zero_steps(self, w1):
        traj = simulate(w1, E2, n_max=0)

        assert traj.step_count == 0
        assert len(traj) == 1
        assert isinstance(traj.stop, MaxSteps)

    def test_invalid_stride(self, w1):
        with pytest.raises(DomainError):
            simulate(w1, E2, stride=0)

    def test_dimension_mismatch(self, w1):
        with pytest.raises(DomainError):
            simulate(w1, [0.5, 0.5])

    def test_invalid_start(self, w1):
        with pytest.raises(SimplexError):
            simulate(w1, [0.5, 0.6, -0.1])


class TestDetectCycle:
    """Tests for detect_cycle on hand-built buffers."""

    @staticmethod
    def _period_three(prefix: int, repeats: int) -> np.ndarray:
        junk = [[0.9, 0.05, 0.05], [0.8, 0.1, 0.1]][:prefix]
        cycle = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        return np.array(junk + cycle * repeats)

    def test_onset_and_phase(self):
        cycle = detect_cycle(self._period_three(2, 5), 1e-9)

        assert cycle == CycleDetected(period=3, phase=2, step=16)

    def test_offset_buffer(self):
        cycle = detect_cycle(self._period_three(2, 5), 1e-9, first_step=10)

        assert cycle.phase == 0
        assert cycle.step == 26

    def test_constant_tail_is_not_a_cycle(self):
        result = detect_cycle(np.tile([0.2, 0.3, 0.5], (20, 1)), 1e-9)

        assert result == NoCycle("period-1", 5)

    def test_too_short(self):
        """Nine points can only test period 2; period 3 needs twelve."""
        result = detect_cycle(self._period_three(0, 3), 1e-9)

        assert result == NoCycle("insufficient-data", 2)

    def test_period_above_limit(self):
        result = detect_cycle(self._period_three(0, 5), 1e-9, max_period=2)

        assert result == NoCycle("no-period", 2)

    def test_short_buffer_with_cycle_is_found(self):
        """A period that fits is reported even when longer ones cannot be tested."""
        cycle = detect_cycle(self._period_three(0, 4), 1e-9)

        assert cycle == CycleDetected(period=3, phase=0, step=11)


def test_describe_stop():
    assert describe_stop(BoundaryHit(index=0, step=5)) == {
        "kind": "boundary-hit",
        "coordinate": 1,
        "step": 5,
    }
    assert describe_stop(MaxSteps()) == {"kind": "max-steps"}
