"""Shared test fixtures."""

from pathlib import Path

import numpy as np
import pytest

from lvolterra import config
from lvolterra.config import Config, Tolerances
from lvolterra.core.canonical import canonical_of
from lvolterra.core.gen import named_operator
from lvolterra.core.tensor import HeredityTensor

FIXTURES_DIR = Path(__file__).parent / "fixtures"


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Use a throwaway config file and no environment overrides in every test."""
    cfg = Config(config_path=tmp_path / "config.json", environ={})
    cfg.db_path = tmp_path / "ensembles.db"
    monkeypatch.setattr(config, "_config", cfg)
    return cfg


@pytest.fixture
def tolerances():
    """Default tolerances."""
    return Tolerances()


@pytest.fixture
def load_fixture():
    """Return a helper that reads a fixture file."""

    def _load(name: str) -> str:
        return (FIXTURES_DIR / name).read_text(encoding="utf-8")

    return _load


@pytest.fixture
def fixture_path():
    """Return a helper that resolves a fixture file name."""

    def _path(name: str) -> Path:
        return FIXTURES_DIR / name

    return _path


@pytest.fixture
def w1():
    return named_operator("W1")


@pytest.fixture
def t2():
    return named_operator("T2")


@pytest.fixture
def t5():
    return named_operator("T5")


@pytest.fixture
def c1():
    return named_operator("C1")


@pytest.fixture
def identity():
    return named_operator("identity")


@pytest.fixture
def w1_with_isolated_coordinate():
    """W1 with an extra Volterra coordinate that only ever inherits half of itself."""
    table = {
        (1, 1, 1): 0.8, (1, 1, 4): 0.2,
        (1, 2, 1): 0.7, (1, 2, 2): 0.3,
        (1, 4, 1): 0.3, (1, 4, 4): 0.7,
        (2, 2, 2): 1.0,
        (2, 4, 2): 0.6, (2, 4, 4): 0.4,
        (4, 4, 4): 1.0,
        (3, 3, 3): 1.0,
        (1, 3, 1): 0.5, (1, 3, 3): 0.5,
        (2, 3, 2): 0.5, (2, 3, 3): 0.5,
        (3, 4, 3): 0.5, (3, 4, 4): 0.5,
    }
    return HeredityTensor.from_entries(
        4, [(i - 1, j - 1, k - 1, v) for (i, j, k), v in table.items()]
    )


@pytest.fixture
def x_ell_members():
    """Return a helper that builds points of X_ell with a known support.

    Each point is either spread over the non-Volterra coordinates only, a
    fixed Volterra vertex, or t e_k + (1 - t) w with w on the non-Volterra
    coordinates and t solving (Ax)_k = 0. The helper returns (support, coords) pairs.
    """

    def _members(P, count, rng):
        C = canonical_of(P)
        m, ell, A = C.m, C.ell, C.A
        members = [
            (frozenset(), np.eye(m)[i]) for i in range(ell, m)
        ] + [
            (frozenset({i}), np.eye(m)[i]) for i in range(ell) if A[i, i] == 0.0
        ]
        if ell == m:
            return members
        for _ in range(max(1, count // 10)):
            w = np.zeros(m)
            w[ell:] = rng.dirichlet(np.ones(m - ell))
            members.append((frozenset(), w))
        for _ in range(50 * count):
            if len(members) >= count or ell == 0:
                break
            w = np.zeros(m)
            w[ell:] = rng.dirichlet(np.ones(m - ell))
            k = int(rng.integers(ell))
            b = float(A[k] @ w)
            if b <= 1e-3 or A[k, k] >= -1e-3:
                continue
            t = b / (b - A[k, k])
            x = (1.0 - t) * w
            x[k] = t
            members.append((frozenset({k}), x))
        return members

    return _members
