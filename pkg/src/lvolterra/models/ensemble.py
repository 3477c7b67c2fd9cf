"""Persisted ensemble runs."""

from __future__ import annotations

import json
from datetime import datetime
from typing import List, Optional

from sqlalchemy import Boolean, DateTime, Float, ForeignKey, Integer, String, Text, func
from sqlalchemy.orm import Mapped, mapped_column, relationship

from lvolterra.models.database import Base


class EnsembleRun(Base):
    """One invocation of the ensemble runner."""

    __tablename__ = "ensemble_runs"

    id: Mapped[int] = mapped_column(primary_key=True)
    m: Mapped[int] = mapped_column(Integer, nullable=False)
    ell: Mapped[int] = mapped_column(Integer, nullable=False)
    count: Mapped[int] = mapped_column(Integer, nullable=False)
    base_seed: Mapped[int] = mapped_column(Integer, nullable=False)
    steps: Mapped[int] = mapped_column(Integer, nullable=False)
    sparsity: Mapped[float] = mapped_column(Float, default=0.0, nullable=False)
    operator_name: Mapped[Optional[str]] = mapped_column(String(200), nullable=True)
    tolerances_json: Mapped[str] = mapped_column(Text, nullable=False)
    created_at: Mapped[datetime] = mapped_column(
        DateTime, server_default=func.now(), nullable=False
    )

    members: Mapped[List["EnsembleMember"]] = relationship(
        "EnsembleMember",
        back_populates="run",
        cascade="all, delete-orphan",
        order_by="EnsembleMember.seed",
    )

    @property
    def tolerances(self) -> dict[str, float]:
        return json.loads(self.tolerances_json)

    def __repr__(self) -> str:
        return f"<EnsembleRun(id={self.id}, m={self.m}, ell={self.ell}, count={self.count})>"


class EnsembleMember(Base):
    """Outcome of one (operator, starting point) pair."""

    __tablename__ = "ensemble_members"

    id: Mapped[int] = mapped_column(primary_key=True)
    run_id: Mapped[int] = mapped_column(ForeignKey("ensemble_runs.id"), nullable=False)
    seed: Mapped[int] = mapped_column(Integer, nullable=False)
    stop_kind: Mapped[str] = mapped_column(String(50), nullable=False)
    step_count: Mapped[int] = mapped_column(Integer, nullable=False)
    period: Mapped[Optional[int]] = mapped_column(Integer, nullable=True)
    final_point_json: Mapped[str] = mapped_column(Text, nullable=False)
    min_coordinate: Mapped[float] = mapped_column(Float, nullable=False)
    omega_json: Mapped[str] = mapped_column(Text, nullable=False)
    interior_candidate: Mapped[bool] = mapped_column(Boolean, default=False, nullable=False)

    run: Mapped["EnsembleRun"] = relationship("EnsembleRun", back_populates="members")

    @property
    def final_point(self) -> list[float]:
        return json.loads(self.final_point_json)

    @property
    def omega(self) -> dict:
        return json.loads(self.omega_json)

    def __repr__(self) -> str:
        return f"<EnsembleMember(seed={self.seed}, stop={self.stop_kind!r})>"
