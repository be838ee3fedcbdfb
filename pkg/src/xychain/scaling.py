"""Finite differences, pseudo-critical minima and finite-size scaling fits.

The derivative of the negativity develops a logarithmic divergence at the
critical coupling; finite chains replace it by a minimum at a
pseudo-critical coupling.  This module provides the O(h^4) five-point
stencils used to differentiate the negativity, the quadratic-refinement
minimum locator, and the least-squares fits that extract the log-law
coefficients, the shift exponent kappa and the correlation-length
exponent nu.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .model import ModelParams
from .rdm import Arrangement

__all__ = [
    "Curve",
    "ScalingFit",
    "derivative",
    "locate_pseudo_critical",
    "fit_log_divergence",
    "fit_shift_exponent",
]

DEFAULT_STEP = 1e-4

# keep the solver-noise amplification tol/h below this before warning
NOISE_AMPLIFICATION_LIMIT = 1e-3


@dataclass(frozen=True)
class Curve:
    """Sampled quantity over a strictly increasing coupling grid."""

    lambdas: np.ndarray
    values: np.ndarray
    params: ModelParams | None = None
    arrangement: Arrangement | None = None
    quantity: str = ""

    def __post_init__(self):
        xs = np.asarray(self.lambdas, dtype=float)
        ys = np.asarray(self.values, dtype=float)
        if xs.shape != ys.shape or xs.ndim != 1:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("coupling grid must be strictly increasing")
        object.__setattr__(self, "lambdas", xs)
        object.__setattr__(self, "values", ys)


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    residual_rms: float
    parameter_covariance: np.ndarray


def check_step(h: float, tol: float) -> None:
    """Warn when the derivative noise floor tol/h becomes significant."""
    if tol / h > NOISE_AMPLIFICATION_LIMIT:
        warnings.warn(
            f"step h={h:g} amplifies solver noise tol={tol:g} to "
            f"{tol / h:.1e} per derivative; increase h or tighten tol",
            RuntimeWarning,
            stacklevel=3,
        )


def derivative(f, x: float, h: float = DEFAULT_STEP,
               stencil: str = "central") -> float:
    """Five-point O(h^4) first derivative of a callable.

    ``stencil`` is "central" away from problem points and "forward" /
    "backward" when only one side is usable (e.g. next to a divergence).
    """
    if h <= 0:
        raise ValueError("step must be positive")
    if stencil == "central":
        return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) \
            / (12 * h)
    if stencil == "forward":
        return (-25 * f(x) + 48 * f(x + h) - 36 * f(x + 2 * h)
                + 16 * f(x + 3 * h) - 3 * f(x + 4 * h)) / (12 * h)
    if stencil == "backward":
        return (25 * f(x) - 48 * f(x - h) + 36 * f(x - 2 * h)
                - 16 * f(x - 3 * h) + 3 * f(x - 4 * h)) / (12 * h)
    raise ValueError(f"unknown stencil {stencil!r}")


def locate_pseudo_critical(curve: Curve) -> tuple[float, float]:
    """Interior minimum of a sampled curve, refined by a local quadratic fit.

    Fits a parabola through the five points nearest the grid minimum and
    returns (vertex location, vertex value).  A minimum on the grid
    boundary raises: the grid was too narrow.
    """
    xs, ys = curve.lambdas, curve.values
    if len(xs) < 5:
        raise ValueError("need at least five points to refine a minimum")
    k = int(np.argmin(ys))
    if k == 0 or k == len(xs) - 1:
        raise ValueError(
            f"minimum sits on the grid boundary (lambda={xs[k]:g}); widen the grid"
        )
    lo = max(0, min(k - 2, len(xs) - 5))
    window = slice(lo, lo + 5)
    x0 = xs[k]
    dx = xs[window] - x0
    coeffs = np.polyfit(dx, ys[window], 2)
    a, b, c = coeffs
    if a <= 0:
        raise ValueError("local quadratic fit is not convex; grid too coarse")
    vertex = -b / (2 * a)
    value = c - b * b / (4 * a)
    return float(x0 + vertex), float(value)


def _ols(design: np.ndarray, ys: np.ndarray) -> ScalingFit:
    n = len(ys)
    gram = design.T @ design
    if np.linalg.cond(gram) > 1e12:
        raise ValueError("degenerate design matrix (identical abscissae?)")
    beta, *_ = np.linalg.lstsq(design, ys, rcond=None)
    resid = ys - design @ beta
    rms = float(np.sqrt(np.mean(resid ** 2)))
    dof = max(n - 2, 1)
    cov = np.linalg.inv(gram) * float(resid @ resid) / dof
    return ScalingFit(float(beta[0]), float(beta[1]), rms, cov)


def fit_log_divergence(xs, ys) -> ScalingFit:
    """Least squares of y = slope*ln(x) + intercept.

    ``xs`` are positive abscissae (either |lambda - lambda_c| or L).
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 4:
        raise ValueError("need at least four points for a stable log fit")
    if np.any(xs <= 0):
        raise ValueError("abscissae must be positive")
    design = np.column_stack([np.log(xs), np.ones_like(xs)])
    return _ols(design, ys)


def fit_shift_exponent(ls, lambda_c_ls, lambda_c: float = 1.0) -> tuple[float, float]:
    """Power-law fit lambda_c(L) - lambda_c ~ prefactor * L**(-kappa).

    Log-log least squares; every |lambda_c(L) - lambda_c| must be nonzero.
    Returns (kappa, prefactor).
    """
    ls = np.asarray(ls, dtype=float)
    deltas = np.abs(np.asarray(lambda_c_ls, dtype=float) - lambda_c)
    if np.any(deltas <= 0):
        raise ValueError("pseudo-critical points must differ from lambda_c")
    fit = fit_log_divergence(ls, np.log(deltas))
    return -fit.slope, float(np.exp(fit.intercept))
