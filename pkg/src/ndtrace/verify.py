"""End-to-end identity checks: trace formula, perturbation determinant,
large-parameter decay, eigenvalue counting and location.

Each check computes its two sides by disjoint code paths (kernel quadrature
against log-determinant differentiation; quadrature determinant against the
Wronskian pipeline), so agreement is evidence rather than tautology.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ._quadrature import gl_panels
from .coeffs import CoefficientSet, effective_support
from .errors import (NearSingular, NonIntegerWinding, QuadratureError,
                     UnsupportedCoefficients)
from .fundmat import normalized_wronskian
from .jost import choose_anchor, jost_frame_set
from .report import VerificationReport
from .resolvent import (FreeResolventKernel, ResolventKernel,
                        build_resolvent, diagonal_difference_integral,
                        z_derivative)
from .roots import compute_roots


def _default_anchors(rs, cs):
    a_minus = choose_anchor(rs, cs, "minus") if rs.n > 0 else 0.0
    a_plus = choose_anchor(rs, cs, "plus") if rs.n < rs.order else 0.0
    return (a_minus, a_plus)


def delta_fn(cs: CoefficientSet, anchors=None, x: float = 0.0,
             cond_limit: float = 1e12):
    """Normalized Wronskian as a plain function of the spectral parameter.

    With ``anchors`` fixed the returned function is smooth in z and safe to
    feed to numerical differentiation; with anchors free each call picks its
    own, which evaluates the same function (the Wronskian does not depend on
    the admissible solution choice) but re-runs the anchor search.
    """

    def fn(z: complex) -> complex:
        rs = compute_roots(cs.order, z)
        anc = _default_anchors(rs, cs) if anchors is None else anchors
        lo = min(x - 0.5, anc[0] - 0.3)
        hi = max(x + 0.5, anc[1] + 0.3)
        js = jost_frame_set(rs, cs, lo, hi, anchors=anc)
        return normalized_wronskian(rs, js, x, cond_limit=cond_limit).delta

    return fn


def _tail_patch(h_edge: complex, h_inner: complex, dist: float,
                fallback_rate: float) -> tuple[complex, float]:
    """Single-exponential tail model fitted from two diagonal samples.

    Returns the extrapolated tail integral beyond the edge and a size
    estimate for error bars.  Falls back to the mode-sum decay rate when
    the samples do not articulate a clean decay.
    """
    mag_e, mag_i = abs(h_edge), abs(h_inner)
    if mag_e < 1e-280:
        return 0j, 0.0
    if mag_i > mag_e > 0.0:
        rate = np.log(mag_i / mag_e) / dist
        rate = float(np.clip(rate, 0.05, 10.0 * fallback_rate))
    else:
        rate = fallback_rate
    return h_edge / rate, mag_e / rate


def trace_check(cs: CoefficientSet, z: complex, window: float | None = None,
                anchors=None, fd_rtol: float = 1e-8,
                quad_epsabs: float = 1e-12) -> VerificationReport:
    """Trace identity: the diagonal integral of the kernel difference equals
    minus the logarithmic z-derivative of the normalized Wronskian.

    The left side integrates the perturbed-minus-free diagonal over
    [-window, window] and patches both tails with fitted exponential
    extrapolation; the right side differentiates the Wronskian ratio in z
    with fixed anchors.  The default window adapts to the mode decay rates
    so the patched tails are subdominant.
    """
    t0 = time.perf_counter()
    rs = compute_roots(cs.order, z)
    anc = _default_anchors(rs, cs) if anchors is None else anchors
    rho = rs.rho_plus + rs.rho_minus
    if window is None:
        window = effective_support(cs, tol=1e-10) + 12.0 / max(min(rho, 4.0), 0.4)
    pad = 0.5
    lo = min(-window - pad, anc[0] - pad)
    hi = max(window + pad, anc[1] + pad)
    rk = build_resolvent(cs, z, x_min=lo, x_max=hi, anchors=anc)
    rk0 = FreeResolventKernel(rk.rs)
    di = diagonal_difference_integral(rk, rk0, -window, window,
                                      epsabs=quad_epsabs)

    def h(y):
        return rk.scalar_diagonal(y) - rk0.scalar_diagonal(y)

    probe = max(0.15 * window, 0.5)
    t_right, e_right = _tail_patch(h(window), h(window - probe), probe, rho)
    t_left, e_left = _tail_patch(h(-window), h(-window + probe), probe, rho)
    lhs = di.value + t_left + t_right

    fn = delta_fn(cs, anchors=anc)
    delta_center = normalized_wronskian(rk.rs, rk.jost_set, 0.0).delta
    ddelta = z_derivative(fn, z, rtol=fd_rtol)
    rhs = -ddelta / delta_center

    rep = VerificationReport(
        identity="trace_formula", z=z, lhs=lhs, rhs=rhs,
        truncation_estimate=e_left + e_right + di.quad_error,
    )
    rep.runtime = time.perf_counter() - t0
    rep.extra = {"window": window, "anchors": anc, "delta": delta_center}
    return rep


@dataclass(frozen=True)
class FredholmQuad:
    """Quadrature specification for the perturbation-determinant kernel."""

    panels: int = 64
    nodes_per_panel: int = 8
    span: float | None = None
    coarse_rtol: float = 5e-3


def _nystrom_det(cs: CoefficientSet, rk0: FreeResolventKernel, span: float,
                 panels: int, nodes: int) -> complex:
    x, w = gl_panels(np.linspace(-span, span, panels + 1), nodes)
    order = cs.order
    kernel = np.zeros((x.size, x.size), dtype=complex)
    xi_x = x[:, None]
    xi_y = x[None, :]
    for k in range(order - 1):
        if cs.zero_mask[k]:
            continue
        vk = cs.value(k, x)
        # zero offsets fall into the lower branch, which is the continuous
        # diagonal limit for every derivative order below N-1
        kernel += vk[:, None] * rk0.scalar_derivative(k, xi_x, xi_y)
    sw = np.sqrt(w)
    a = np.eye(x.size, dtype=complex) + sw[:, None] * kernel * sw[None, :]
    sign, logabs = np.linalg.slogdet(a)
    return complex(sign * np.exp(logabs))


def fredholm_determinant(cs: CoefficientSet, z: complex,
                         quad: FredholmQuad | None = None) -> complex:
    """Quadrature determinant of (identity + perturbation times free
    resolvent), built from the closed-form free kernel and its analytic
    x-derivatives with symmetrized weights.

    Requires a vanishing top coefficient (trace-class condition).  The rule
    is evaluated at the requested panel count and at twice that count; the
    kernel's diagonal derivative-jump limits raw convergence to second
    order, so the two values are Richardson-combined, and a disagreement
    beyond ``coarse_rtol`` raises QuadratureError.
    """
    if not cs.top_is_zero:
        raise UnsupportedCoefficients(
            "the perturbation determinant needs a vanishing top coefficient"
        )
    if cs.is_trivial():
        return 1.0 + 0j
    quad = quad or FredholmQuad()
    span = quad.span if quad.span is not None else effective_support(cs)
    if span == 0.0:
        return 1.0 + 0j
    rs = compute_roots(cs.order, z)
    rk0 = FreeResolventKernel(rs)
    d1 = _nystrom_det(cs, rk0, span, quad.panels, quad.nodes_per_panel)
    d2 = _nystrom_det(cs, rk0, span, 2 * quad.panels, quad.nodes_per_panel)
    spread = abs(d2 - d1) / max(abs(d2), 1e-30)
    if spread > quad.coarse_rtol:
        raise QuadratureError(
            f"determinant grid too coarse at z={z}: refinement moved the "
            f"value by {spread:.2e} (> {quad.coarse_rtol})"
        )
    return d2 + (d2 - d1) / 3.0


def det_identity_check(cs: CoefficientSet, z: complex,
                       quad: FredholmQuad | None = None,
                       anchors=None) -> VerificationReport:
    """Perturbation determinant against the normalized Wronskian, computed
    by fully disjoint pipelines."""
    t0 = time.perf_counter()
    lhs = fredholm_determinant(cs, z, quad=quad)
    rhs = delta_fn(cs, anchors=anchors)(z)
    rep = VerificationReport(identity="det_identity", z=z, lhs=lhs, rhs=rhs)
    rep.runtime = time.perf_counter() - t0
    return rep


def large_z_check(cs: CoefficientSet, ray: complex = 1j,
                  magnitudes=(4.0, 32.0, 256.0)) -> VerificationReport:
    """Decay of the normalized Wronskian to 1 along a ray.

    The report carries the fitted log-log slope as lhs and the reference
    exponent -1/N as rhs; the per-magnitude deviations sit in ``extra``.
    """
    t0 = time.perf_counter()
    if not cs.top_is_zero:
        raise UnsupportedCoefficients(
            "the large-parameter decay check needs a vanishing top coefficient"
        )
    mags = [float(m) for m in magnitudes]
    if len(mags) < 2 or any(b <= a for a, b in zip(mags, mags[1:])):
        raise ValueError("magnitudes must be increasing with >= 2 entries")
    direction = complex(ray) / abs(complex(ray))
    fn = delta_fn(cs)
    zs = [m * direction for m in mags]
    devs = [abs(fn(zp) - 1.0) for zp in zs]
    slope = float(np.polyfit(np.log(mags), np.log(np.maximum(devs, 1e-300)), 1)[0])
    rep = VerificationReport(identity="large_z", z=tuple(zs), lhs=slope,
                             rhs=-1.0 / cs.order)
    rep.extra = {"deviations": devs,
                 "decreasing": all(b < a for a, b in zip(devs, devs[1:]))}
    rep.runtime = time.perf_counter() - t0
    return rep


@dataclass(frozen=True)
class Contour:
    """Circular contour for winding-number counting."""

    center: complex
    radius: float
    nodes: int = 128
    max_nodes: int = 512


def _contour_samples(cs: CoefficientSet, contour: Contour, m: int,
                     delta_floor: float, cache: dict | None = None):
    thetas = 2.0 * np.pi * np.arange(m) / m
    zs = contour.center + contour.radius * np.exp(1j * thetas)
    fn = delta_fn(cs)
    vals = np.empty(m, dtype=complex)
    for i, zp in enumerate(zs):
        key = (round(zp.real, 14), round(zp.imag, 14))
        if cache is not None and key in cache:
            vals[i] = cache[key]
        else:
            vals[i] = fn(zp)
            if cache is not None:
                cache[key] = vals[i]
    small = np.abs(vals).min()
    if small < delta_floor:
        raise NearSingular(
            f"contour passes within |delta| = {small:.2e} of a zero; "
            "move or shrink the contour"
        )
    return zs, vals


def _winding_raw(zs: np.ndarray, vals: np.ndarray) -> tuple[complex, complex]:
    """Raw winding number and first moment by spectral differentiation of
    the contour samples (trapezoid rule on the periodic integrand)."""
    m = len(vals)
    freqs = np.fft.fftfreq(m, d=1.0 / m)
    if m % 2 == 0:
        freqs[m // 2] = 0.0
    dvals = np.fft.ifft(1j * freqs * np.fft.fft(vals))
    ratio = dvals / vals
    winding = ratio.mean() / 1j
    moment = (zs * ratio).mean() / 1j
    return complex(winding), complex(moment)


def winding_number(cs: CoefficientSet, contour: Contour,
                   delta_floor: float = 1e-8) -> complex:
    """Raw (un-rounded) winding number of the normalized Wronskian around
    the contour, at the contour's own node count."""
    zs, vals = _contour_samples(cs, contour, contour.nodes, delta_floor)
    raw, _ = _winding_raw(zs, vals)
    return raw


def eig_count(cs: CoefficientSet, contour: Contour,
              delta_floor: float = 1e-8) -> int:
    """Number of eigenvalues inside the contour by the argument principle.

    Node count doubles until the rounded winding number repeats and the raw
    value sits within 0.05 of it; a final value farther than 0.1 from an
    integer raises NonIntegerWinding.
    """
    m = contour.nodes
    prev = None
    cache: dict = {}
    while True:
        zs, vals = _contour_samples(cs, contour, m, delta_floor, cache)
        raw, _ = _winding_raw(zs, vals)
        count = int(np.round(raw.real))
        dist = abs(raw - count)
        if prev == count and dist <= 0.05:
            return count
        prev = count
        if m >= contour.max_nodes:
            if dist > 0.1:
                raise NonIntegerWinding(
                    f"winding number {raw:.4f} is not close to an integer"
                )
            return count
        m *= 2


def locate_zero(cs: CoefficientSet, center: complex, radius: float,
                nodes: int = 128, newton_steps: int = 15,
                tol: float = 1e-9) -> complex:
    """Locate a simple zero of the normalized Wronskian.

    The contour must enclose exactly one zero; its first moment gives the
    initial guess, which Newton iteration (with differenced derivative)
    polishes.  Frames become ill-conditioned exactly at the zero, so the
    Wronskian evaluations run with a relaxed condition ceiling.
    """
    contour = Contour(center=center, radius=radius, nodes=nodes)
    zs, vals = _contour_samples(cs, contour, nodes, delta_floor=1e-10)
    raw, moment = _winding_raw(zs, vals)
    count = int(np.round(raw.real))
    if count != 1:
        raise ValueError(f"contour encloses {count} zeros; need exactly 1")
    guess = moment / raw
    fn = delta_fn(cs, cond_limit=1e15)
    zk = complex(guess)
    for _ in range(newton_steps):
        d = fn(zk)
        dd = z_derivative(fn, zk, h0=1e-5 * max(1.0, abs(zk)))
        step = d / dd
        zk -= step
        if abs(step) <= tol * max(1.0, abs(zk)):
            break
    return zk
