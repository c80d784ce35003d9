"""Orthogonal (total least squares) line fitting and its diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AllCoincident, VerticalData
from .geometry import EPS, Line, Point


@dataclass(frozen=True)
class FitResult:
    line: Line
    rms_orthogonal_residual: float
    sum_squared_residuals: float
    n_points: int
    centroid: Point
    isotropic: bool = False

    def to_dict(self) -> dict:
        return {
            "line": [self.line.a, self.line.b, self.line.c],
            "rms_orthogonal_residual": self.rms_orthogonal_residual,
            "sum_squared_residuals": self.sum_squared_residuals,
            "n_points": self.n_points,
            "centroid": [self.centroid.x, self.centroid.y],
            "isotropic": self.isotropic,
        }


@dataclass(frozen=True)
class OlsResult:
    slope_m: float
    intercept_c: float
    sum_squared_vertical: float


def _points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < 2:
        raise ValueError("need an (n, 2) array with n >= 2")
    return arr


def _all_coincident(arr: np.ndarray) -> bool:
    spread = np.hypot(arr[:, 0] - arr[0, 0], arr[:, 1] - arr[0, 1])
    if spread.max() >= EPS:
        return False
    diff = arr[:, None, :] - arr[None, :, :]
    return float(np.sqrt(np.einsum("ijk,ijk->ij", diff, diff).max())) < EPS


def tls_fit(points) -> FitResult:
    """Line minimizing the sum of squared orthogonal distances.

    The normal is the eigenvector of the centered 2x2 scatter matrix with the
    smallest eigenvalue, found in closed form from the principal-axis angle.
    When both eigenvalues agree (no preferred direction) the fit falls back
    to a horizontal line through the centroid and is flagged ``isotropic``.
    """
    arr = _points(points)
    if _all_coincident(arr):
        raise AllCoincident("all points coincide")
    n = len(arr)
    cx, cy = arr.mean(axis=0)
    dx = arr[:, 0] - cx
    dy = arr[:, 1] - cy
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    sxy = float(dx @ dy)
    half_gap = math.hypot(0.5 * (sxx - syy), sxy)
    isotropic = 2.0 * half_gap <= 1e-12 * max(sxx + syy, np.finfo(float).tiny)
    if isotropic:
        a, b = 0.0, 1.0
    else:
        theta = 0.5 * math.atan2(2.0 * sxy, sxx - syy)
        a, b = -math.sin(theta), math.cos(theta)
    line = Line.from_coefficients(a, b, -(a * cx + b * cy))
    # Rayleigh quotient of the unit normal: the smallest eigenvalue.
    ssr = max(line.a * line.a * sxx + 2.0 * line.a * line.b * sxy + line.b * line.b * syy, 0.0)
    return FitResult(line, math.sqrt(ssr / n), ssr, n, Point(float(cx), float(cy)), isotropic)


def ols_fit(points) -> OlsResult:
    """Ordinary least squares ``y = m*x + c`` from the normal equations."""
    arr = _points(points)
    x, y = arr[:, 0], arr[:, 1]
    dx = x - x.mean()
    sxx = float(dx @ dx)
    if sxx / len(arr) < 1e-12:
        raise VerticalData("x values do not vary; vertical data has no OLS slope")
    m = float(dx @ (y - y.mean())) / sxx
    c = float(y.mean() - m * x.mean())
    r = y - (m * x + c)
    return OlsResult(m, c, float(r @ r))


def residuals(line: Line, points) -> np.ndarray:
    """Orthogonal distance of each point to ``line``, in input order."""
    arr = np.asarray(points, dtype=float).reshape(-1, 2)
    return np.abs(line.a * arr[:, 0] + line.b * arr[:, 1] + line.c)


def penalty_profile(points, line: Line) -> list[tuple[float, float]]:
    """``(distance, distance**2)`` per point, largest contribution first."""
    d = residuals(line, points)
    pairs = [(float(v), float(v) ** 2) for v in d]
    return sorted(pairs, key=lambda t: t[1], reverse=True)


def direction_deg(line: Line) -> float:
    return line.angle_deg()


def direction_difference_deg(a: float, b: float) -> float:
    """Smallest difference between two undirected directions in degrees."""
    d = abs(a - b) % 180.0
    return min(d, 180.0 - d)


def line_from_ols(result: OlsResult) -> Line:
    return Line.from_coefficients(result.slope_m, -1.0, result.intercept_c)
