"""Exponential scaling fits of log10 observables against particle number."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FitResult:
    """Least-squares line log10(value) = -eta * N + intercept."""

    eta: float
    intercept: float
    residual_rms: float
    n_range: tuple

    def __str__(self) -> str:
        return (
            f"eta={self.eta:.6g} intercept={self.intercept:.6g} "
            f"rms={self.residual_rms:.3g} over N in {self.n_range}"
        )


def fit_exponent(points) -> FitResult:
    """Fit the decay exponent of log10 data against N.

    Parameters
    ----------
    points : sequence of (N, log10_value) pairs
        At least four points with at least two distinct N.

    Returns
    -------
    FitResult
        ``eta`` is minus the fitted slope, so decaying data gives eta > 0.
    """
    pts = [(float(n), float(v)) for n, v in points]
    if len(pts) < 4:
        raise ValueError(f"need at least 4 points for a fit, got {len(pts)}")
    ns = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if np.unique(ns).size < 2:
        raise ValueError("all N equal; the fit design is degenerate")
    slope, intercept = np.polyfit(ns, ys, 1)
    resid = ys - (slope * ns + intercept)
    return FitResult(
        eta=-float(slope),
        intercept=float(intercept),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        n_range=(float(ns.min()), float(ns.max())),
    )


def extrapolate(fit: FitResult, n: float) -> float:
    """Fitted log10 value at particle number ``n``."""
    return -fit.eta * n + fit.intercept
