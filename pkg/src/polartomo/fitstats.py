"""Weighted least-squares fits of degree-of-correlation curves and sigma distances."""

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientPoints, SchemaError, SingularDesign, ZeroSigma


@dataclass(frozen=True)
class DataPoint:
    x: float
    y: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ZeroSigma(f"point at x={self.x}: sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class FitResult:
    model: str
    params: tuple
    param_sigmas: tuple
    chi2_reduced: float
    dof: int
    period: float = None
    names: tuple = field(default=())

    @property
    def amplitude(self):
        if self.model != "sinusoid":
            return 0.0
        return float(np.hypot(self.params[1], self.params[2]))

    @property
    def value_range(self):
        """Span [min, max] of the fitted curve."""
        a = self.params[0]
        return (a - self.amplitude, a + self.amplitude)

    def to_dict(self):
        d = {
            "model": self.model,
            "params": dict(zip(self.names, self.params)),
            "param_sigmas": dict(zip(self.names, self.param_sigmas)),
            "chi2_reduced": self.chi2_reduced,
            "dof": self.dof,
        }
        if self.model == "sinusoid":
            d["period"] = self.period
            d["range"] = list(self.value_range)
        return d


def _arrays(points):
    pts = list(points)
    x = np.array([p.x for p in pts], dtype=float)
    y = np.array([p.y for p in pts], dtype=float)
    s = np.array([p.sigma for p in pts], dtype=float)
    return x, y, s


def _wls(design, y, s):
    """Weighted linear least squares; returns params, their sigmas and chi^2."""
    a = design / s[:, None]
    b = y / s
    if np.linalg.matrix_rank(a) < design.shape[1]:
        raise SingularDesign("design matrix is rank deficient")
    cov = np.linalg.inv(a.T @ a)
    params = cov @ (a.T @ b)
    chi2 = float(np.sum((b - a @ params) ** 2))
    return params, np.sqrt(np.diag(cov)), chi2


def fit_constant(points):
    """Inverse-variance weighted mean with its standard error."""
    x, y, s = _arrays(points)
    if y.size < 2:
        raise InsufficientPoints("a constant fit needs at least 2 points")
    w = 1.0 / s**2
    mean = float(np.sum(w * y) / np.sum(w))
    err = float(1.0 / np.sqrt(np.sum(w)))
    dof = y.size - 1
    chi2 = float(np.sum(w * (y - mean) ** 2))
    return FitResult("constant", (mean,), (err,), chi2 / dof, dof, names=("a",))


def fit_sinusoid(points, period):
    """y = a + b cos(2 pi x / period) + c sin(2 pi x / period) with the period held fixed."""
    if not period > 0:
        raise SchemaError("period must be positive")
    x, y, s = _arrays(points)
    if y.size < 4:
        raise InsufficientPoints("a sinusoid fit needs at least 4 points")
    phase = 2.0 * np.pi * x / period
    design = np.column_stack((np.ones_like(x), np.cos(phase), np.sin(phase)))
    params, sig, chi2 = _wls(design, y, s)
    dof = y.size - 3
    return FitResult(
        "sinusoid",
        tuple(float(v) for v in params),
        tuple(float(v) for v in sig),
        chi2 / dof,
        dof,
        period=float(period),
        names=("a", "b", "c"),
    )


def sigma_distance(value, sigma, reference):
    """How many standard deviations ``value`` lies from ``reference``."""
    if not sigma > 0:
        raise ZeroSigma("sigma must be > 0")
    return abs(reference - value) / sigma


def read_points_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"theta_rad", "y", "sigma"} <= set(reader.fieldnames):
            raise SchemaError("points CSV needs a 'theta_rad,y,sigma' header")
        try:
            return [DataPoint(float(r["theta_rad"]), float(r["y"]), float(r["sigma"])) for r in reader]
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"bad row in points CSV: {exc}") from None


def write_points_csv(path, points):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta_rad", "y", "sigma"])
        for p in points:
            w.writerow([repr(float(v)) for v in (p.x, p.y, p.sigma)])
