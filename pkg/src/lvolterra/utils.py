"""Shared utility functions."""

from __future__ import annotations

import re

import numpy as np

from lvolterra.config import Tolerances
from lvolterra.core.simplex import SimplexPoint
from lvolterra.errors import SimplexError


def parse_point_spec(text: str, m: int, tolerances: Tolerances | None = None) -> SimplexPoint:
    """Parse a starting point given on the command line.

    Args:
        text: ``uniform``, ``e<i>`` for the 1-based vertex i, or comma-separated coordinates.
        m: Number of coordinates expected.

    Returns:
        The validated point.

    Raises:
        SimplexError: If the text does not describe a point of S^{m-1}.
    """
    spec = text.strip().lower()
    if spec == "uniform":
        return SimplexPoint.uniform(m)
    match = re.fullmatch(r"e(\d+)", spec)
    if match:
        return SimplexPoint.vertex(m, int(match.group(1)) - 1)
    try:
        values = [float(v) for v in spec.split(",")]
    except ValueError:
        raise SimplexError(f"cannot parse point {text!r}") from None
    if len(values) != m:
        raise SimplexError(f"point {text!r} has {len(values)} coordinates, expected {m}")
    return SimplexPoint.from_coords(np.array(values), tolerances)


def format_point(values: np.ndarray, digits: int = 6) -> str:
    """Short human form of a point, e.g. ``(0.181818, 0.454545, 0.363636)``."""
    return "(" + ", ".join(f"{v:.{digits}g}" for v in values) + ")"
