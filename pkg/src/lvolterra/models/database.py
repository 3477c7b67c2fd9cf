"""Database setup and session management."""

from __future__ import annotations

from pathlib import Path

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import DeclarativeBase, Session, sessionmaker

from lvolterra.config import get_config


class Base(DeclarativeBase):
    """Base class for all database models."""

    pass


# One engine per database file
_engines: dict[Path, Engine] = {}
_session_factories: dict[Path, sessionmaker[Session]] = {}


def _resolve(db_path: Path | None) -> Path:
    return Path(db_path or get_config().db_path).expanduser().resolve()


def get_engine(db_path: Path | None = None) -> Engine:
    """Get or create the engine for a database file."""
    path = _resolve(db_path)
    if path not in _engines:
        path.parent.mkdir(parents=True, exist_ok=True)
        _engines[path] = create_engine(f"sqlite:///{path}", echo=False)
    return _engines[path]


def get_session(db_path: Path | None = None) -> Session:
    """Get a new database session."""
    path = _resolve(db_path)
    if path not in _session_factories:
        # Reports read results after the run is committed
        _session_factories[path] = sessionmaker(bind=get_engine(path), expire_on_commit=False)
    return _session_factories[path]()


def init_db(db_path: Path | None = None) -> None:
    """Initialize the database, creating all tables."""
    # Registers the ensemble tables on Base.metadata
    from lvolterra.models import ensemble  # noqa: F401

    Base.metadata.create_all(get_engine(db_path))
