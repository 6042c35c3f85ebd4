"""Gauss-Legendre panel rules and adaptive complex quadrature helpers."""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad

from .errors import QuadratureError


def gl_panels(breaks, nodes_per_panel: int = 16):
    """Composite Gauss-Legendre rule on the panels defined by ``breaks``.

    Returns the concatenated nodes and weights.
    """
    breaks = np.asarray(breaks, dtype=float)
    if breaks.ndim != 1 or breaks.size < 2 or np.any(np.diff(breaks) <= 0):
        raise ValueError("panel breakpoints must be strictly increasing")
    xg, wg = np.polynomial.legendre.leggauss(nodes_per_panel)
    half = 0.5 * np.diff(breaks)
    mid = 0.5 * (breaks[:-1] + breaks[1:])
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights


def equal_mass_breaks(density, lo: float, hi: float, n_panels: int,
                      samples: int = 4000) -> np.ndarray:
    """Split [lo, hi] into panels of roughly equal mass of ``density``.

    A uniform floor is mixed in so stretches where the density vanishes
    still get a share of panels.
    """
    if not hi > lo:
        raise ValueError("empty interval")
    n_panels = max(1, int(n_panels))
    xs = np.linspace(lo, hi, samples)
    d = np.abs(np.asarray(density(xs), dtype=complex)).astype(float)
    peak = d.max()
    if peak <= 0.0:
        return np.linspace(lo, hi, n_panels + 1)
    d = d + 1e-3 * peak
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (d[1:] + d[:-1]) * np.diff(xs))])
    targets = np.linspace(0.0, cum[-1], n_panels + 1)
    breaks = np.interp(targets, cum, xs)
    breaks[0], breaks[-1] = lo, hi
    # interp can produce ties on flat stretches; nudge them apart
    min_gap = (hi - lo) * 1e-9
    for i in range(1, len(breaks)):
        if breaks[i] <= breaks[i - 1] + min_gap:
            breaks[i] = breaks[i - 1] + min_gap
    breaks[-1] = hi
    return breaks


def complex_quad(f, a: float, b: float, epsabs: float = 1e-12,
                 epsrel: float = 1e-10, limit: int = 200) -> tuple[complex, float]:
    """Adaptive quadrature of a complex-valued integrand on [a, b]."""
    val, err = quad(f, a, b, complex_func=True, epsabs=epsabs,
                    epsrel=epsrel, limit=limit)
    if not np.isfinite(val):
        raise QuadratureError(f"integral over [{a}, {b}] did not converge")
    return complex(val), float(abs(err))
