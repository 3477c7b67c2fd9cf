"""Trajectory export: CSV, ternary coordinates and a ternary PNG for m = 3."""

from __future__ import annotations

import csv
import logging
import math
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from lvolterra.analysis.trajectory import Trajectory
from lvolterra.core.simplex import FloatArray
from lvolterra.errors import DomainError

logger = logging.getLogger(__name__)

SQRT3_2 = math.sqrt(3.0) / 2.0

BACKGROUND = (255, 255, 255)
EDGE_COLOR = (40, 40, 40)
PATH_COLOR = (31, 119, 180)
START_COLOR = (44, 160, 44)
END_COLOR = (214, 39, 40)


def _fmt(value: float) -> str:
    return format(value, ".17g")


def ternary_coordinates(points: FloatArray) -> tuple[FloatArray, FloatArray]:
    """Planar coordinates u = x_2 + x_3/2, v = (sqrt 3 / 2) x_3 for rows of a 3-column array."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 3:
        raise DomainError(f"ternary coordinates need m = 3, got shape {points.shape}")
    return points[:, 1] + points[:, 2] / 2.0, SQRT3_2 * points[:, 2]


def _check(traj: Trajectory) -> None:
    if len(traj) == 0:
        raise DomainError("cannot export an empty trajectory")


def write_trajectory_csv(traj: Trajectory, path: Path) -> Path:
    """Write ``step,x_1,...,x_m`` with 17 significant digits.

    Raises:
        OSError: If the file cannot be written; the message carries the path.
    """
    _check(traj)
    path = Path(path)
    header = ["step"] + [f"x_{k + 1}" for k in range(traj.m)]
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for n, point in zip(traj.steps, traj.points):
            writer.writerow([int(n)] + [_fmt(v) for v in point])
    logger.debug("Wrote %d rows to %s", len(traj), path)
    return path


def ternary_path(path: Path) -> Path:
    """Companion file name: ``orbit.csv`` -> ``orbit.ternary.csv``."""
    path = Path(path)
    return path.with_name(f"{path.stem}.ternary{path.suffix or '.csv'}")


def write_ternary_csv(traj: Trajectory, path: Path) -> Path:
    """Write ``step,u,v`` ternary plot coordinates for an m = 3 orbit."""
    _check(traj)
    u, v = ternary_coordinates(traj.points)
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["step", "u", "v"])
        for n, a, b in zip(traj.steps, u, v):
            writer.writerow([int(n), _fmt(a), _fmt(b)])
    return path


def render_ternary_png(traj: Trajectory, path: Path, size: int = 600, margin: int = 40) -> Path:
    """Draw the orbit inside the triangle e1 (bottom left), e2 (bottom right), e3 (top)."""
    _check(traj)
    u, v = ternary_coordinates(traj.points)
    width = size - 2 * margin
    height = int(round(width * SQRT3_2))
    image = Image.new("RGB", (size, height + 2 * margin), BACKGROUND)
    draw = ImageDraw.Draw(image)

    def to_pixel(a: float, b: float) -> tuple[float, float]:
        return margin + a * width, margin + height - b * width

    corners = [to_pixel(0.0, 0.0), to_pixel(1.0, 0.0), to_pixel(0.5, SQRT3_2)]
    draw.polygon(corners, outline=EDGE_COLOR)
    for label, (x, y), dx, dy in zip(
        ("e1", "e2", "e3"), corners, (-24, 6, -6), (4, 4, -18)
    ):
        draw.text((x + dx, y + dy), label, fill=EDGE_COLOR)

    pixels = [to_pixel(a, b) for a, b in zip(u, v)]
    if len(pixels) > 1:
        draw.line(pixels, fill=PATH_COLOR, width=1)
    for (x, y), color in ((pixels[0], START_COLOR), (pixels[-1], END_COLOR)):
        draw.ellipse((x - 3, y - 3, x + 3, y + 3), fill=color)

    path = Path(path)
    image.save(path, format="PNG")
    logger.debug("Rendered ternary plot to %s", path)
    return path
