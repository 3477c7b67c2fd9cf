"""Orbit simulation with convergence, cycle and boundary detection."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Union

import numpy as np

from lvolterra.config import Tolerances, get_tolerances
from lvolterra.core.canonical import apply_canonical, canonical_of
from lvolterra.core.simplex import FloatArray, PointLike, SimplexPoint, as_coords, renormalize
from lvolterra.core.tensor import HeredityTensor, step
from lvolterra.errors import DomainError

logger = logging.getLogger(__name__)

# Consecutive sub-tolerance steps required before an orbit counts as converged
CONVERGENCE_RUN = 10
# Cycle detection runs every this many steps
CYCLE_CHECK_EVERY = 16


@dataclass(frozen=True)
class MaxSteps:
    kind: str = "max-steps"


@dataclass(frozen=True)
class Converged:
    limit: SimplexPoint
    tol: float
    onset_step: int
    kind: str = "converged"


@dataclass(frozen=True)
class CycleDetected:
    period: int
    phase: int
    step: int
    kind: str = "cycle"


@dataclass(frozen=True)
class BoundaryHit:
    index: int
    step: int
    kind: str = "boundary-hit"


StopReason = Union[MaxSteps, Converged, CycleDetected, BoundaryHit]


def describe_stop(stop: StopReason) -> dict:
    """JSON-ready view of a stop reason, indices 1-based."""
    if isinstance(stop, Converged):
        return {
            "kind": stop.kind,
            "limit": stop.limit.tolist(),
            "tol": stop.tol,
            "onset_step": stop.onset_step,
        }
    if isinstance(stop, CycleDetected):
        return {"kind": stop.kind, "period": stop.period, "phase": stop.phase, "step": stop.step}
    if isinstance(stop, BoundaryHit):
        return {"kind": stop.kind, "coordinate": stop.index + 1, "step": stop.step}
    return {"kind": stop.kind}


@dataclass(frozen=True)
class Trajectory:
    """Recorded orbit points.

    ``points[i]`` is x^(steps[i]). Every ``stride``-th iterate is kept plus
    the start and the final iterate.
    """

    points: FloatArray
    steps: np.ndarray
    step_count: int
    stop: StopReason
    stride: int

    @property
    def final(self) -> SimplexPoint:
        return SimplexPoint(self.points[-1])

    @property
    def m(self) -> int:
        return int(self.points.shape[1])

    def __len__(self) -> int:
        return int(self.points.shape[0])


@dataclass(frozen=True)
class NoCycle:
    """Outcome of a cycle check that found nothing.

    ``reason`` is "period-1" when the tail is constant (convergence, not a
    cycle), "insufficient-data" when the buffer was too short to test every
    period up to the limit, and "no-period" otherwise. ``max_testable`` is the
    longest period the buffer could test.
    """

    reason: str
    max_testable: int


def detect_cycle(
    points: FloatArray, tol_cycle: float, max_period: int = 64, first_step: int = 0
) -> CycleDetected | NoCycle:
    """Smallest period T >= 2 repeating over the last 3T comparisons.

    ``points[i]`` is the iterate at step ``first_step + i``. A period T needs
    at least 4T points in the buffer.
    """
    n = points.shape[0]
    max_testable = min(max_period, n // 4)

    def holds(T: int) -> bool:
        if n < 4 * T:
            return False
        tail = points[n - 3 * T:]
        lagged = points[n - 4 * T:n - T]
        return bool(np.max(np.abs(tail - lagged)) <= tol_cycle)

    if n >= 4 and holds(1):
        return NoCycle("period-1", max_testable)
    for T in range(2, max_testable + 1):
        if not holds(T):
            continue
        # walk back to the first index from which the relation holds
        diffs = np.max(np.abs(points[T:] - points[:-T]), axis=1) <= tol_cycle
        start = n - T
        while start > 0 and diffs[start - 1]:
            start -= 1
        onset = first_step + start
        return CycleDetected(period=T, phase=onset % T, step=first_step + n - 1)
    if max_testable < max_period:
        return NoCycle("insufficient-data", max_testable)
    return NoCycle("no-period", max_testable)


def simulate(
    P: HeredityTensor,
    x0: PointLike,
    n_max: int = 10_000,
    stride: int = 1,
    tolerances: Tolerances | None = None,
    detect_cycles: bool = True,
    max_period: int = 64,
    stop_on_boundary: bool = False,
    use_canonical: bool = False,
) -> Trajectory:
    """Iterate V from ``x0`` for at most ``n_max`` steps.

    Stops on convergence (``CONVERGENCE_RUN`` consecutive steps with max-norm
    change below tol_conv), on a detected cycle, or, if ``stop_on_boundary``,
    when a coordinate positive at the start reaches tol_zero.

    Raises:
        SimplexError: If ``x0`` is not a simplex point.
        DomainError: If ``stride`` or ``n_max`` is not positive, or the sizes differ.
    """
    tols = get_tolerances(tolerances)
    if stride < 1 or n_max < 0:
        raise DomainError("stride must be >= 1 and n_max >= 0")
    x = SimplexPoint.from_coords(as_coords(x0), tols).coords
    if x.size != P.m:
        raise DomainError(f"x0 has {x.size} coordinates, the operator has {P.m}")

    if use_canonical:
        C = canonical_of(P, tols)

        def advance(v: FloatArray) -> FloatArray:
            return renormalize(apply_canonical(C, v, tols).coords, tols.simplex)
    else:

        def advance(v: FloatArray) -> FloatArray:
            return step(P, v, tols.simplex)

    positive = x > tols.zero
    points = [x]
    steps = [0]
    history: deque[FloatArray] = deque([x], maxlen=4 * max_period)
    run = 0
    onset = 0
    stop: StopReason = MaxSteps()
    last_check: NoCycle | None = None
    n = 0
    for n in range(1, n_max + 1):
        y = advance(x)
        if np.max(np.abs(y - x)) <= tols.conv:
            if run == 0:
                onset = n - 1
            run += 1
        else:
            run = 0
        x = y
        history.append(x)
        if n % stride == 0:
            points.append(x)
            steps.append(n)

        if run >= CONVERGENCE_RUN:
            stop = Converged(SimplexPoint(x), tols.conv, onset)
            break
        if stop_on_boundary:
            hit = np.flatnonzero(positive & (x <= tols.zero))
            if hit.size:
                stop = BoundaryHit(int(hit[0]), n)
                break
        if detect_cycles and n % CYCLE_CHECK_EVERY == 0 and len(history) >= 8:
            cycle = detect_cycle(
                np.array(history), tols.cycle, max_period, first_step=n - len(history) + 1
            )
            if isinstance(cycle, CycleDetected):
                stop = cycle
                break
            last_check = cycle

    if steps[-1] != n:
        points.append(x)
        steps.append(n)
    limited = last_check is not None and last_check.reason == "insufficient-data"
    if isinstance(stop, MaxSteps) and limited:
        logger.debug(
            "Cycle checks covered periods up to %d of %d", last_check.max_testable, max_period
        )
    logger.debug("Simulation stopped after %d steps: %s", n, stop.kind)
    return Trajectory(
        points=np.array(points),
        steps=np.array(steps, dtype=int),
        step_count=n,
        stop=stop,
        stride=stride,
    )
