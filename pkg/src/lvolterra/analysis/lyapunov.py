"""Lyapunov functions of ℓ-Volterra operators and their hypotheses."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from lvolterra.config import Tolerances, get_tolerances
from lvolterra.core.simplex import FloatArray, PointLike, SimplexPoint, as_coords
from lvolterra.core.tensor import HeredityTensor, step
from lvolterra.errors import DomainError, HypothesisError, InconsistencyError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PDeltaWitness:
    """An exponent vector p in P_δ built around the vertex e^(k0)."""

    k0: int
    delta: float
    epsilon: float
    p: SimplexPoint


@dataclass(frozen=True)
class BlockDecayHypothesis:
    """a_ki < 0 for k < r and i >= r (0-based); ``alpha`` = min(-a_ki) over that block."""

    r: int
    alpha: float


@dataclass(frozen=True)
class DominantRowHypothesis:
    """a_{k0,i} <= -delta for every i, with delta > 0."""

    k0: int
    delta: float


@dataclass(frozen=True)
class RatioPair:
    """A pair (p, q) with a_pi - a_qi <= 0 for every i; strict if all are < 0."""

    p: int
    q: int
    strict: bool


def _exponents(p: PointLike, size: int, tolerances: Tolerances | None) -> FloatArray:
    coords = as_coords(p)
    if coords.shape != (size,):
        raise DomainError(f"exponent vector must have {size} entries, got {coords.shape}")
    return SimplexPoint.from_coords(coords, tolerances).coords


def p_delta_contains(
    A: FloatArray,
    ell: int,
    p: PointLike,
    delta: float,
    tolerances: Tolerances | None = None,
) -> bool:
    """True iff sum_{k<ell} a_ki p_k <= delta for every i.

    Raises:
        DomainError: If delta > 0 or p is not a point of S^{ell-1}.
    """
    if delta > 0:
        raise DomainError(f"P_delta is defined for delta <= 0, got {delta}")
    tol = get_tolerances(tolerances)
    weights = _exponents(p, ell, tolerances)
    sums = weights @ A[:ell, :]
    return bool(np.all(sums <= delta + tol.zero))


def p_delta_witness(
    A: FloatArray,
    ell: int,
    k0: int,
    delta: float,
    tolerances: Tolerances | None = None,
) -> PDeltaWitness:
    """Build a point of P_δ near e^(k0) following the proof that P_δ is non-empty.

    epsilon = min_i (delta - a_{k0,i}) / (max_{k != k0} max(a_ki, 0) - a_{k0,i}),
    terms with a zero denominator being +inf. The witness puts 1 - epsilon/2 on
    k0 and spreads epsilon/2 over the other Volterra coordinates; an infinite
    epsilon (or ell = 1) gives the vertex itself.

    Raises:
        DomainError: If delta > 0 or k0 is not a Volterra coordinate.
        HypothesisError: If a_{k0,i} > delta for some i.
    """
    if delta > 0:
        raise DomainError(f"P_delta is defined for delta <= 0, got {delta}")
    if not 0 <= k0 < ell:
        raise DomainError(f"k0={k0 + 1} is not among the Volterra coordinates 1..{ell}")
    tol = get_tolerances(tolerances)
    row = A[k0]
    offending = np.flatnonzero(row > delta + tol.zero)
    if offending.size:
        raise HypothesisError(f"a_{k0 + 1},i exceeds delta={delta}", index=int(offending[0]))

    others = [k for k in range(ell) if k != k0]
    top = np.maximum(A[others].max(axis=0), 0.0) if others else np.zeros_like(row)
    numerator = np.maximum(delta - row, 0.0)
    denominator = top - row
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(denominator > 0.0, numerator / denominator, np.inf)
    epsilon = float(ratios.min())

    weights = np.zeros(ell)
    if others and np.isfinite(epsilon) and epsilon > 0.0:
        weights[k0] = 1.0 - epsilon / 2.0
        weights[others] = epsilon / 2.0 / len(others)
    else:
        weights[k0] = 1.0
    witness = PDeltaWitness(k0=k0, delta=delta, epsilon=epsilon, p=SimplexPoint(weights))
    if not p_delta_contains(A, ell, witness.p, delta, tolerances):
        raise InconsistencyError(f"witness {weights.tolist()} is not in P_delta")
    return witness


def sample_p_delta(
    A: FloatArray,
    ell: int,
    delta: float,
    count: int,
    rng: np.random.Generator,
    k0: int | None = None,
    tolerances: Tolerances | None = None,
) -> list[SimplexPoint]:
    """Draw points of P_δ by rejection around the constructed witness.

    Candidates lie on segments from the witness to uniform points of S^{ell-1};
    the witness itself is always the first sample.

    Raises:
        HypothesisError: If no row k0 satisfies a_{k0,i} <= delta.
    """
    tol = get_tolerances(tolerances)
    if k0 is None:
        rows = [k for k in range(ell) if np.all(A[k] <= delta + tol.zero)]
        if not rows:
            raise HypothesisError(f"no Volterra row with every a_ki <= {delta}")
        k0 = rows[0]
    base = p_delta_witness(A, ell, k0, delta, tolerances).p.coords
    samples = [SimplexPoint(base)]
    attempts = 0
    while len(samples) < count and attempts < 100 * count:
        attempts += 1
        target = rng.dirichlet(np.ones(ell))
        t = rng.random()
        candidate = (1.0 - t) * base + t * target
        candidate /= candidate.sum()
        if p_delta_contains(A, ell, candidate, delta, tolerances):
            samples.append(SimplexPoint(candidate))
    if len(samples) < count:
        logger.debug("Rejection sampler kept %d of %d requested points", len(samples), count)
    return samples


def check_thm1(A: FloatArray, ell: int, tolerances: Tolerances | None = None) -> int | None:
    """Smallest Volterra row k0 with a_{k0,i} <= 0 for every i, or None."""
    tol = get_tolerances(tolerances).zero
    for k in range(ell):
        if np.all(A[k] <= tol):
            return k
    return None


def check_thm2(
    A: FloatArray, ell: int, tolerances: Tolerances | None = None
) -> BlockDecayHypothesis | None:
    """Largest r <= ell with a_ki < 0 for every k < r and i >= r, or None.

    Strictness means below -tol_zero. r = m is excluded (the index block is empty).
    """
    tol = get_tolerances(tolerances).zero
    m = A.shape[0]
    for r in range(min(ell, m - 1), 0, -1):
        block = A[:r, r:]
        if np.all(block < -tol):
            return BlockDecayHypothesis(r=r, alpha=float((-block).min()))
    return None


def alpha_for(A: FloatArray, r: int, tolerances: Tolerances | None = None) -> float:
    """The decay rate constant for a given r.

    Raises:
        HypothesisError: If some a_ki with k < r <= i is not strictly negative.
    """
    tol = get_tolerances(tolerances).zero
    m = A.shape[0]
    if not 1 <= r < m:
        raise HypothesisError(f"r={r} outside 1..{m - 1}")
    block = A[:r, r:]
    bad = np.argwhere(block >= -tol)
    if bad.size:
        raise HypothesisError("a_ki is not strictly negative", index=int(bad[0][0]))
    return float((-block).min())


def check_thm4(A: FloatArray, ell: int, tolerances: Tolerances | None = None) -> list[RatioPair]:
    """All pairs (p, q), p < ell, p != q, with a_pi - a_qi <= 0 for every i."""
    tol = get_tolerances(tolerances).zero
    m = A.shape[0]
    pairs = []
    for p in range(ell):
        for q in range(m):
            if p == q:
                continue
            diff = A[p] - A[q]
            if np.all(diff <= tol):
                pairs.append(RatioPair(p=p, q=q, strict=bool(np.all(diff < -tol))))
    return pairs


def check_thm5(
    A: FloatArray, ell: int, tolerances: Tolerances | None = None
) -> DominantRowHypothesis | None:
    """Volterra row with the largest delta = min_i(-a_{k0,i}) > 0, or None."""
    tol = get_tolerances(tolerances).zero
    best: DominantRowHypothesis | None = None
    for k in range(ell):
        delta = float((-A[k]).min())
        if delta > tol and (best is None or delta > best.delta):
            best = DominantRowHypothesis(k0=k, delta=delta)
    return best


def eval_phi(p: ArrayLike, x: PointLike) -> float:
    """phi_p(x) = prod_{k < len(p)} x_k^{p_k}, with 0^0 = 1."""
    weights = np.asarray(p, dtype=float)
    coords = as_coords(x)[: weights.size]
    return float(np.prod(np.power(coords, weights)))


def eval_linear_phi(r: int, x: PointLike) -> float:
    """phi(x) = x_1 + ... + x_r."""
    return float(np.sum(as_coords(x)[:r]))


def eval_psi(p: ArrayLike, r: int, x: PointLike) -> float:
    """psi_p(x) = x_1^{p_1} ... x_r^{p_r} for p in S^{r-1}."""
    weights = np.asarray(p, dtype=float)
    if weights.size != r:
        raise DomainError(f"psi_p needs {r} exponents, got {weights.size}")
    return eval_phi(weights, x)


def eval_ratio(p: int, q: int, x: PointLike, tolerances: Tolerances | None = None) -> float:
    """f_pq(x) = x_p / x_q.

    Raises:
        DomainError: If x_q is zero within tol_zero.
    """
    coords = as_coords(x)
    if coords[q] <= get_tolerances(tolerances).zero:
        raise DomainError(f"f_pq undefined: x_{q + 1} = {coords[q]!r}")
    return float(coords[p] / coords[q])


class LyapunovFamily(str, Enum):
    """The function families with proved Lyapunov hypotheses."""

    PHI_P = "phi_p"
    LINEAR_R = "linear_r"
    PSI_P = "psi_p"
    RATIO_PQ = "ratio_pq"
    RATIO_QP_PLUS = "ratio_qp_plus"


@dataclass(frozen=True)
class LyapunovFunction:
    """A family bound to its parameters (indices are 0-based)."""

    family: LyapunovFamily
    weights: tuple[float, ...] = ()
    r: int = 0
    pair: tuple[int, int] | None = None

    @property
    def increasing(self) -> bool:
        """True for the reciprocal ratio, which grows along orbits."""
        return self.family is LyapunovFamily.RATIO_QP_PLUS

    def __call__(self, x: PointLike, tolerances: Tolerances | None = None) -> float:
        if self.family is LyapunovFamily.PHI_P:
            return eval_phi(self.weights, x)
        if self.family is LyapunovFamily.LINEAR_R:
            return eval_linear_phi(self.r, x)
        if self.family is LyapunovFamily.PSI_P:
            return eval_psi(self.weights, self.r, x)
        p, q = self.pair
        if self.family is LyapunovFamily.RATIO_PQ:
            return eval_ratio(p, q, x, tolerances)
        return eval_ratio(q, p, x, tolerances)

    def parameters(self) -> dict[str, Any]:
        """Parameters for reports, with 1-based indices."""
        if self.family in (LyapunovFamily.PHI_P, LyapunovFamily.PSI_P):
            return {"p": list(self.weights), "r": self.r}
        if self.family is LyapunovFamily.LINEAR_R:
            return {"r": self.r}
        return {"p": self.pair[0] + 1, "q": self.pair[1] + 1}

    @classmethod
    def from_params(cls, family: str, params: str) -> LyapunovFunction:
        """Parse a command-line parameter string.

        ``phi_p`` / ``psi_p`` take comma-separated exponents, ``linear_r`` takes r,
        and the ratio families take a 1-based pair ``p,q``.

        Raises:
            ValueError: If the family or parameters cannot be parsed.
        """
        kind = LyapunovFamily(family)
        values = [v.strip() for v in params.split(",") if v.strip()]
        if kind in (LyapunovFamily.PHI_P, LyapunovFamily.PSI_P):
            weights = tuple(float(v) for v in values)
            if not weights:
                raise ValueError(f"{family} needs at least one exponent")
            return cls(kind, weights=weights, r=len(weights))
        if kind is LyapunovFamily.LINEAR_R:
            if len(values) != 1:
                raise ValueError("linear_r takes a single integer r")
            return cls(kind, r=int(values[0]))
        if len(values) != 2:
            raise ValueError(f"{family} takes a pair p,q")
        p, q = (int(v) - 1 for v in values)
        if p < 0 or q < 0 or p == q:
            raise ValueError(f"invalid pair {params!r}")
        return cls(kind, pair=(p, q))


@dataclass
class LyapunovReport:
    """Empirical monotonicity and limit of a function along one orbit."""

    function_id: str
    parameters: dict[str, Any]
    monotone: bool
    limit_estimate: float | None
    violation_count: int
    worst_violation: float
    steps_evaluated: int
    initial_value: float
    final_value: float
    truncated: str | None = None
    values: list[float] = field(default_factory=list, repr=False)

    @property
    def converged(self) -> bool:
        return self.limit_estimate is not None

    def to_dict(self) -> dict[str, Any]:
        return {
            "function": self.function_id,
            "parameters": self.parameters,
            "monotone": self.monotone,
            "limit": self.limit_estimate if self.converged else "not converged within n_steps",
            "violation_count": self.violation_count,
            "worst_violation": self.worst_violation,
            "steps_evaluated": self.steps_evaluated,
            "initial_value": self.initial_value,
            "final_value": self.final_value,
            "truncated": self.truncated,
        }


def empirical_lyapunov_check(
    P: HeredityTensor,
    function: LyapunovFunction,
    x0: PointLike,
    n_steps: int = 1000,
    tol: float = 1e-12,
    window: int = 50,
    limit_tol: float = 1e-6,
    tolerances: Tolerances | None = None,
) -> LyapunovReport:
    """Evaluate a candidate Lyapunov function along the orbit of ``x0``.

    A step counts as a violation when the value moves against the expected
    direction by more than ``tol * max(1, |value|)``. The limit estimate is the
    mean of the last ``window`` values when their spread is below ``limit_tol``.
    The orbit is cut short once a coordinate reaches zero.

    Raises:
        DomainError: If ``x0`` is not in the interior of the simplex.
    """
    tols = get_tolerances(tolerances)
    x = SimplexPoint.from_coords(as_coords(x0), tols).coords
    if np.any(x <= tols.zero):
        raise DomainError("the starting point must lie in the interior of the simplex")

    values = [function(x, tols)]
    truncated = None
    for n in range(n_steps):
        x = step(P, x, tols.simplex)
        hit = np.flatnonzero(x <= tols.zero)
        if hit.size:
            truncated = f"coordinate {hit[0] + 1} reached zero at step {n + 1}"
            logger.debug("Lyapunov check truncated: %s", truncated)
            break
        values.append(function(x, tols))

    series = np.array(values)
    moves = np.diff(series)
    if function.increasing:
        moves = -moves
    scale = np.maximum(1.0, np.abs(series[:-1]))
    violations = moves > tol * scale
    limit = None
    if series.size >= window:
        tail = series[-window:]
        if tail.max() - tail.min() < limit_tol:
            limit = float(tail.mean())
    return LyapunovReport(
        function_id=function.family.value,
        parameters=function.parameters(),
        monotone=not bool(violations.any()),
        limit_estimate=limit,
        violation_count=int(violations.sum()),
        worst_violation=float(max(moves.max(), 0.0)) if moves.size else 0.0,
        steps_evaluated=int(series.size - 1),
        initial_value=float(series[0]),
        final_value=float(series[-1]),
        truncated=truncated,
        values=values,
    )
