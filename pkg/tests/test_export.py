"""Tests for trajectory export."""

import csv

import numpy as np
import pytest
from PIL import Image

from lvolterra.analysis.trajectory import simulate
from lvolterra.core.gen import GenSpec, random_operator
from lvolterra.core.simplex import SimplexPoint
from lvolterra.errors import DomainError
from lvolterra.formats.export import (
    SQRT3_2,
    render_ternary_png,
    ternary_coordinates,
    ternary_path,
    write_ternary_csv,
    write_trajectory_csv,
)


@pytest.fixture
def c1_orbit(c1):
    return simulate(c1, SimplexPoint.vertex(3, 1), n_max=4, detect_cycles=False)


def test_ternary_coordinates_of_vertices():
    u, v = ternary_coordinates(np.eye(3))

    assert u.tolist() == [0.0, 1.0, 0.5]
    assert v.tolist() == [0.0, 0.0, SQRT3_2]


def test_ternary_coordinates_need_three_columns():
    with pytest.raises(DomainError):
        ternary_coordinates(np.eye(4))


def test_ternary_path():
    assert ternary_path("out/orbit.csv").name == "orbit.ternary.csv"


def test_trajectory_csv(tmp_path, c1_orbit):
    path = write_trajectory_csv(c1_orbit, tmp_path / "orbit.csv")

    with path.open(newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))

    assert rows[0] == ["step", "x_1", "x_2", "x_3"]
    assert rows[1] == ["0", "0", "1", "0"]
    assert rows[2] == ["1", "0", "0", "1"]
    assert len(rows) == 6


def test_csv_keeps_full_precision(tmp_path, w1):
    traj = simulate(w1, SimplexPoint.uniform(3), n_max=3, detect_cycles=False)
    path = write_trajectory_csv(traj, tmp_path / "orbit.csv")

    with path.open(newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))[1:]

    restored = np.array([[float(v) for v in row[1:]] for row in rows])
    assert np.array_equal(restored, traj.points)


def test_ternary_csv(tmp_path, c1_orbit):
    path = write_ternary_csv(c1_orbit, tmp_path / "orbit.ternary.csv")

    with path.open(newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))

    assert rows[0] == ["step", "u", "v"]
    assert rows[1] == ["0", "1", "0"]


def test_ternary_png(tmp_path, c1_orbit):
    path = render_ternary_png(c1_orbit, tmp_path / "orbit.png", size=300)

    with Image.open(path) as image:
        assert image.format == "PNG"
        assert image.size[0] == 300


def test_png_needs_three_coordinates(tmp_path):
    P = random_operator(GenSpec(4, 2, seed=0))
    traj = simulate(P, SimplexPoint.uniform(4), n_max=5)

    with pytest.raises(DomainError):
        render_ternary_png(traj, tmp_path / "orbit.png")
