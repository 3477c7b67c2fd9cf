"""Service for running and persisting ensembles of orbits."""

from __future__ import annotations

import json
import logging
from collections import Counter
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from sqlalchemy import select
from sqlalchemy.orm import Session, selectinload

from lvolterra.analysis.omega import omega_upper_bound
from lvolterra.analysis.trajectory import CycleDetected, simulate
from lvolterra.config import Tolerances, get_tolerances
from lvolterra.core.classify import classify
from lvolterra.core.gen import GenSpec, random_operator
from lvolterra.core.simplex import random_interior_point
from lvolterra.core.tensor import HeredityTensor
from lvolterra.models.database import get_session, init_db
from lvolterra.models.ensemble import EnsembleMember, EnsembleRun

logger = logging.getLogger(__name__)

# A final point with every coordinate above this is reported as an interior candidate
INTERIOR_MARGIN = 1e-6

# Member seeds are stored in signed 64-bit SQLite integer columns
MAX_SEED = 2**63 - 1

ProgressCallback = Callable[[int, int], None]


@dataclass(frozen=True)
class EnsembleSpec:
    """What to run. Member i uses seed ``base_seed + i`` for its operator and start."""

    m: int
    ell: int
    count: int
    base_seed: int = 0
    steps: int = 10_000
    sparsity: float = 0.0
    operator: Optional[HeredityTensor] = None
    operator_name: Optional[str] = None

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError(f"count must be positive, got {self.count}")
        if self.steps < 1:
            raise ValueError(f"steps must be positive, got {self.steps}")
        if self.base_seed < 0 or self.base_seed + self.count - 1 > MAX_SEED:
            raise ValueError(
                f"seeds {self.base_seed}..{self.base_seed + self.count - 1} "
                f"fall outside 0..{MAX_SEED}"
            )
        if self.operator is not None:
            if self.operator.m != self.m:
                raise ValueError(f"operator has m={self.operator.m}, ensemble asks for {self.m}")
        else:
            # Raises for impossible (m, ell, sparsity) before any worker starts
            GenSpec(self.m, self.ell, self.base_seed, self.sparsity)

    @classmethod
    def for_operator(
        cls, P: HeredityTensor, count: int, base_seed: int = 0, steps: int = 10_000,
        name: str | None = None, tolerances: Tolerances | None = None,
    ) -> EnsembleSpec:
        """Many starting points for one fixed operator."""
        ell = classify(P, tolerances).ell or 0
        return cls(
            m=P.m, ell=ell, count=count, base_seed=base_seed, steps=steps,
            operator=P, operator_name=name,
        )


@dataclass(frozen=True)
class MemberResult:
    """Outcome of one ensemble member; coordinates in ``omega`` are 1-based."""

    seed: int
    stop_kind: str
    step_count: int
    period: Optional[int]
    final_point: tuple[float, ...]
    min_coordinate: float
    omega: dict
    interior_candidate: bool

    def to_dict(self) -> dict:
        data = asdict(self)
        data["final_point"] = list(self.final_point)
        return data


def run_member(spec: EnsembleSpec, index: int, tolerances: Tolerances) -> MemberResult:
    """Simulate one member. Module-level so that worker processes can unpickle it."""
    seed = spec.base_seed + index
    if spec.operator is not None:
        P = spec.operator
    else:
        P = random_operator(GenSpec(spec.m, spec.ell, seed, spec.sparsity), tolerances)
    x0 = random_interior_point(spec.m, np.random.default_rng(seed))
    traj = simulate(P, x0, n_max=spec.steps, stride=spec.steps, tolerances=tolerances)
    estimate = omega_upper_bound(P, tolerances)
    final = traj.points[-1]
    min_coordinate = float(final.min())
    return MemberResult(
        seed=seed,
        stop_kind=traj.stop.kind,
        step_count=traj.step_count,
        period=traj.stop.period if isinstance(traj.stop, CycleDetected) else None,
        final_point=tuple(float(v) for v in final),
        min_coordinate=min_coordinate,
        omega=estimate.to_dict(),
        interior_candidate=min_coordinate > INTERIOR_MARGIN and not estimate.on_boundary,
    )


def summarize(results: Sequence[MemberResult]) -> dict:
    """Counts by stop reason plus the seeds flagged as interior candidates."""
    return {
        "members": len(results),
        "stops": dict(sorted(Counter(r.stop_kind for r in results).items())),
        "periods": sorted({r.period for r in results if r.period is not None}),
        "interior_candidates": [r.seed for r in results if r.interior_candidate],
    }


class EnsembleService:
    """Service for running ensembles and storing their results."""

    def __init__(self, session: Session | None = None, db_path: Path | None = None) -> None:
        self._session = session
        self._db_path = db_path

    @property
    def session(self) -> Session:
        """Get the database session, creating the tables on first use."""
        if self._session is None:
            init_db(self._db_path)
            self._session = get_session(self._db_path)
        return self._session

    def run(
        self,
        spec: EnsembleSpec,
        workers: int = 1,
        progress_callback: ProgressCallback | None = None,
        tolerances: Tolerances | None = None,
    ) -> list[MemberResult]:
        """Run every member and return the results ordered by seed.

        With ``workers`` > 1 members run in a process pool; results do not
        depend on the worker count.
        """
        tols = get_tolerances(tolerances)
        results: list[MemberResult] = []
        if workers <= 1:
            for index in range(spec.count):
                results.append(run_member(spec, index, tols))
                if progress_callback:
                    progress_callback(index + 1, spec.count)
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(run_member, spec, i, tols) for i in range(spec.count)]
                for done, future in enumerate(as_completed(futures), start=1):
                    results.append(future.result())
                    if progress_callback:
                        progress_callback(done, spec.count)
        results.sort(key=lambda r: r.seed)
        logger.info("Ensemble of %d members finished: %s", spec.count, summarize(results)["stops"])
        return results

    def save(
        self,
        spec: EnsembleSpec,
        results: Sequence[MemberResult],
        tolerances: Tolerances | None = None,
    ) -> EnsembleRun:
        """Persist a run and its members."""
        tols = get_tolerances(tolerances)
        run = EnsembleRun(
            m=spec.m,
            ell=spec.ell,
            count=spec.count,
            base_seed=spec.base_seed,
            steps=spec.steps,
            sparsity=spec.sparsity,
            operator_name=spec.operator_name,
            tolerances_json=json.dumps(tols.as_dict(), sort_keys=True),
        )
        for result in results:
            run.members.append(
                EnsembleMember(
                    seed=result.seed,
                    stop_kind=result.stop_kind,
                    step_count=result.step_count,
                    period=result.period,
                    final_point_json=json.dumps(list(result.final_point)),
                    min_coordinate=result.min_coordinate,
                    omega_json=json.dumps(result.omega, sort_keys=True),
                    interior_candidate=result.interior_candidate,
                )
            )
        self.session.add(run)
        self.session.commit()
        return run

    def get_run(self, run_id: int) -> EnsembleRun | None:
        """Get a stored run with its members."""
        stmt = (
            select(EnsembleRun)
            .options(selectinload(EnsembleRun.members))
            .where(EnsembleRun.id == run_id)
        )
        return self.session.execute(stmt).scalar_one_or_none()

    def get_runs(self) -> Sequence[EnsembleRun]:
        """Get all stored runs, newest first."""
        stmt = select(EnsembleRun).order_by(EnsembleRun.id.desc())
        return self.session.execute(stmt).scalars().all()
