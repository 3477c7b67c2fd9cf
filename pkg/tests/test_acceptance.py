"""Ensemble-scale checks of the numeric invariants.

These run over large random ensembles and take tens of seconds; deselect
them with ``-m "not slow"``.
"""

import numpy as np
import pytest

from lvolterra.analysis.fixed_points import blend_in_X_ell, in_X_ell_canonical, in_X_j
from lvolterra.analysis.lyapunov import check_thm1, sample_p_delta
from lvolterra.analysis.trajectory import simulate
from lvolterra.core.canonical import apply_canonical, canonical_of, interaction_violations
from lvolterra.core.gen import GenSpec, random_operator
from lvolterra.core.simplex import SimplexPoint
from lvolterra.core.tensor import apply_direct, evolve_batch

pytestmark = pytest.mark.slow


def _ensemble(count: int, max_m: int = 10):
    rng = np.random.default_rng(2024)
    for seed in range(count):
        m = int(rng.integers(2, max_m + 1))
        ell = int(rng.integers(0, m + 1))
        yield random_operator(GenSpec(m, ell, seed))


def test_canonical_form_matches_direct_evaluation():
    rng = np.random.default_rng(1)
    worst = 0.0
    for P in _ensemble(1000):
        C = canonical_of(P)
        assert interaction_violations(C.A, 1e-14) == []
        for x in rng.dirichlet(np.ones(P.m), size=100):
            diff = apply_canonical(C, x).coords - apply_direct(P, x).coords
            worst = max(worst, float(np.max(np.abs(diff))))
    assert worst <= 1e-12


def test_phi_p_never_increases():
    rng = np.random.default_rng(2)
    fired = 0
    for P in _ensemble(300, max_m=6):
        C = canonical_of(P)
        k0 = check_thm1(C.A, C.ell)
        if k0 is None:
            continue
        fired += 1
        X = rng.dirichlet(np.ones(P.m), size=1000)
        images = evolve_batch(P, X)
        for p in sample_p_delta(C.A, C.ell, 0.0, 100, rng, k0=k0):
            w = p.coords
            before = np.prod(np.power(X[:, :w.size], w), axis=1)
            after = np.prod(np.power(images[:, :w.size], w), axis=1)
            assert np.all(after <= before + 1e-12)
    assert fired > 0


def test_c1_vertex_orbit_has_no_drift(c1):
    traj = simulate(c1, SimplexPoint.vertex(3, 1), n_max=10_000, detect_cycles=False)

    assert traj.step_count == 10_000
    assert np.array_equal(traj.points[0::2], np.tile([0.0, 1.0, 0.0], (5001, 1)))
    assert np.array_equal(traj.points[1::2], np.tile([0.0, 0.0, 1.0], (5000, 1)))


def test_x_ell_tests_agree(x_ell_members):
    rng = np.random.default_rng(3)
    members = 0
    for P in _ensemble(20, max_m=5):
        C = canonical_of(P)
        if C.ell == 0:
            continue
        for x in rng.dirichlet(np.ones(P.m), size=10_000):
            assert in_X_ell_canonical(C.A, C.ell, x) == in_X_j(P, x, C.ell)
        for _, x in x_ell_members(P, 100, rng):
            assert in_X_ell_canonical(C.A, C.ell, x)
            assert in_X_j(P, x, C.ell)
            members += 1
    assert members > 0


def test_blends_stay_in_x_ell(x_ell_members, w1_with_isolated_coordinate):
    rng = np.random.default_rng(4)
    pairs = []
    for seed in range(50):
        P = random_operator(GenSpec(int(rng.integers(3, 6)), 2, seed))
        by_support = {}
        for support, x in x_ell_members(P, 24, rng):
            by_support.setdefault(support, []).append(x)
        for points in by_support.values():
            pairs += [(P, x, y) for x, y in zip(points[:-1], points[1:])]
    pairs = pairs[:500]
    # the line (a, 2.5a, 1 - 5.5a, 2a) of X_3 for the isolated-coordinate operator
    for a, b in rng.uniform(1e-3, 1 / 5.5 - 1e-3, size=(1000 - len(pairs), 2)):
        x, y = ([c, 2.5 * c, 1.0 - 5.5 * c, 2.0 * c] for c in (a, b))
        pairs.append((w1_with_isolated_coordinate, x, y))

    assert len(pairs) == 1000
    for P, x, y in pairs:
        assert blend_in_X_ell(P, x, y, float(rng.random())).member
