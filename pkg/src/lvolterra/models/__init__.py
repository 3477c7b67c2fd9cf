"""Database models for lvolterra."""

from lvolterra.models.database import Base, get_engine, get_session, init_db
from lvolterra.models.ensemble import EnsembleMember, EnsembleRun

__all__ = [
    "Base",
    "EnsembleMember",
    "EnsembleRun",
    "get_engine",
    "get_session",
    "init_db",
]
