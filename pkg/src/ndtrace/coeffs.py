"""Perturbation coefficients v_1..v_N with decay metadata.

A CoefficientSet holds one callable per coefficient slot.  Slot k (0-based)
multiplies the k-th derivative in the perturbation, so slot N-1 is the
coefficient of the top derivative whose vanishing makes the normalized
Wronskian x-independent.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.interpolate import CubicSpline

from .errors import DivergentTail, InvalidPreset
from .roots import i_pow

Side = str  # "minus" or "plus"


def _check_side(side: Side) -> Side:
    if side not in ("minus", "plus"):
        raise ValueError(f"side must be 'minus' or 'plus', got {side!r}")
    return side


def _zero_func(x):
    return np.zeros_like(np.asarray(x, dtype=float), dtype=complex)


@dataclass(frozen=True)
class CoefficientSet:
    """Coefficients of the order N-1 perturbation, with decay metadata."""

    order: int
    funcs: tuple
    alpha: float = 1.0
    support_radius: float | None = None
    cutoff_radius: float | None = None
    zero_mask: tuple = ()
    label: str = "custom"

    def __post_init__(self):
        if self.order < 1:
            raise InvalidPreset("order must be >= 1")
        if len(self.funcs) != self.order:
            raise InvalidPreset("need exactly one coefficient per slot")
        if not self.zero_mask:
            object.__setattr__(self, "zero_mask", tuple(False for _ in range(self.order)))

    def value(self, k: int, x):
        """v_{k+1}(x) for slot k, vectorized over x."""
        if self.zero_mask[k]:
            return _zero_func(x)
        return np.asarray(self.funcs[k](np.asarray(x, dtype=float)), dtype=complex)

    def values(self, x) -> np.ndarray:
        """All coefficients stacked: shape (N,) + shape(x)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros((self.order,) + x.shape, dtype=complex)
        for k in range(self.order):
            if not self.zero_mask[k]:
                out[k] = self.funcs[k](x)
        return out

    def row_norm(self, x):
        """Pointwise matrix norm of the system perturbation: the Euclidean
        norm of the coefficient row."""
        vals = self.values(x)
        return np.sqrt(np.sum(np.abs(vals) ** 2, axis=0))

    @property
    def top_is_zero(self) -> bool:
        """True when the coefficient of the highest derivative vanishes."""
        return bool(self.zero_mask[self.order - 1])

    def is_trivial(self) -> bool:
        return all(self.zero_mask)


class SystemPerturbation:
    """Matrix form of the perturbation for the first-order system: the only
    nonzero row is the last, equal to -i**N (v_1, ..., v_N)."""

    def __init__(self, cs: CoefficientSet):
        self.cs = cs
        self._scale = -i_pow(cs.order)

    def __call__(self, x: float) -> np.ndarray:
        m = np.zeros((self.cs.order, self.cs.order), dtype=complex)
        m[-1, :] = self._scale * self.cs.values(float(x))
        return m

    def last_row(self, x):
        """The nonzero row, vectorized over x: shape (N,) + shape(x)."""
        return self._scale * self.cs.values(x)

    def trace(self, x):
        """trace V(x) = -i**N v_N(x)."""
        return self._scale * self.cs.value(self.cs.order - 1, x)


def _bump_factory(radius: float, amplitude: complex) -> Callable:
    def f(x):
        x = np.asarray(x, dtype=float)
        t = x / radius
        out = np.zeros_like(x, dtype=complex)
        inside = np.abs(t) < 1.0
        with np.errstate(divide="ignore", over="ignore"):
            out[inside] = amplitude * np.exp(-1.0 / (1.0 - t[inside] ** 2))
        return out

    return f


def _gaussian_factory(width: float, amplitude: complex) -> Callable:
    def f(x):
        x = np.asarray(x, dtype=float)
        return amplitude * np.exp(-((x / width) ** 2))

    return f


def _sech2_factory(amplitude: complex) -> Callable:
    def f(x):
        # overflow-safe sech^2: 4 e^{-2|x|} / (1 + e^{-2|x|})^2
        x = np.asarray(x, dtype=float)
        e = np.exp(-2.0 * np.abs(x))
        return amplitude * 4.0 * e / (1.0 + e) ** 2

    return f


def _normalize_amplitudes(order: int, amplitudes) -> list[complex]:
    if amplitudes is None:
        amps = [1.0 + 0j] + [0j] * (order - 1)
    else:
        amps = [complex(a) for a in amplitudes]
        if len(amps) != order:
            raise InvalidPreset(f"need {order} amplitudes, got {len(amps)}")
    return amps


def preset(name: str, order: int, **params) -> CoefficientSet:
    """Build one of the named coefficient families.

    zero      -- all coefficients identically zero.
    bump      -- smooth compactly supported profile c*exp(-1/(1-(x/R)**2))
                 on |x| < R; params: radius, amplitudes (default: slot 0 only).
    gaussian  -- c*exp(-(x/width)**2); params: width, amplitudes.
    sech2     -- v_1 = lam / cosh(x)**2, all other slots zero; params: lam.
    custom    -- params: funcs (sequence of callables), plus optional alpha,
                 support_radius, zero_mask.
    """
    if order < 1:
        raise InvalidPreset("order must be >= 1")
    if name == "zero":
        _reject_extra(params, set())
        return CoefficientSet(order=order, funcs=tuple(_zero_func for _ in range(order)),
                              support_radius=0.0,
                              zero_mask=tuple(True for _ in range(order)), label="zero")
    if name == "bump":
        _reject_extra(params, {"radius", "amplitudes"})
        radius = float(params.get("radius", 1.0))
        if radius <= 0:
            raise InvalidPreset("bump needs radius > 0")
        amps = _normalize_amplitudes(order, params.get("amplitudes"))
        funcs = tuple(_bump_factory(radius, a) if a != 0 else _zero_func for a in amps)
        return CoefficientSet(order=order, funcs=funcs, support_radius=radius,
                              zero_mask=tuple(a == 0 for a in amps), label="bump")
    if name == "gaussian":
        _reject_extra(params, {"width", "amplitudes"})
        width = float(params.get("width", 1.0))
        if width <= 0:
            raise InvalidPreset("gaussian needs width > 0")
        amps = _normalize_amplitudes(order, params.get("amplitudes"))
        funcs = tuple(_gaussian_factory(width, a) if a != 0 else _zero_func for a in amps)
        return CoefficientSet(order=order, funcs=funcs,
                              zero_mask=tuple(a == 0 for a in amps), label="gaussian")
    if name == "sech2":
        _reject_extra(params, {"lam"})
        lam = complex(params.get("lam", -2.0))
        funcs = [_zero_func] * order
        funcs[0] = _sech2_factory(lam)
        mask = [True] * order
        mask[0] = lam == 0
        return CoefficientSet(order=order, funcs=tuple(funcs),
                              zero_mask=tuple(mask), label="sech2")
    if name == "custom":
        _reject_extra(params, {"funcs", "alpha", "support_radius", "zero_mask"})
        funcs = params.get("funcs")
        if funcs is None or len(funcs) != order:
            raise InvalidPreset("custom preset needs one callable per slot")
        mask = params.get("zero_mask")
        if mask is None:
            mask = tuple(f is None for f in funcs)
        funcs = tuple(_zero_func if f is None else f for f in funcs)
        return CoefficientSet(order=order, funcs=funcs,
                              alpha=float(params.get("alpha", 1.0)),
                              support_radius=params.get("support_radius"),
                              zero_mask=tuple(bool(m) for m in mask), label="custom")
    raise InvalidPreset(f"unknown preset {name!r}")


def _reject_extra(params: dict, allowed: set):
    extra = set(params) - allowed
    if extra:
        raise InvalidPreset(f"unexpected preset parameters: {sorted(extra)}")


def tabulated(order: int, x: Sequence[float], values_by_slot: dict,
              alpha: float = 1.0) -> CoefficientSet:
    """Coefficients given by tables, cubic-interpolated inside the sampled
    range and identically zero outside it."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 4 or np.any(np.diff(x) <= 0):
        raise InvalidPreset("table abscissae must be increasing with >= 4 points")
    lo, hi = float(x[0]), float(x[-1])

    def spline_factory(vals):
        spl = CubicSpline(x, np.asarray(vals, dtype=complex))

        def f(t):
            t = np.asarray(t, dtype=float)
            out = np.zeros_like(t, dtype=complex)
            inside = (t >= lo) & (t <= hi)
            out[inside] = spl(t[inside])
            return out

        return f

    funcs, mask = [], []
    for k in range(order):
        vals = values_by_slot.get(k)
        if vals is None:
            funcs.append(_zero_func)
            mask.append(True)
        else:
            if len(vals) != x.size:
                raise InvalidPreset(f"table for slot {k} has wrong length")
            funcs.append(spline_factory(vals))
            mask.append(False)
    return CoefficientSet(order=order, funcs=tuple(funcs), alpha=alpha,
                          support_radius=max(abs(lo), abs(hi)),
                          zero_mask=tuple(mask), label="table")


def cutoff(cs: CoefficientSet, r: float) -> CoefficientSet:
    """Multiply every coefficient by the indicator of (-r, r)."""
    if r <= 0:
        raise ValueError("cutoff radius must be positive")

    def clipped(f):
        def g(x):
            x = np.asarray(x, dtype=float)
            out = np.asarray(f(x), dtype=complex).copy()
            out[np.abs(x) >= r] = 0.0
            return out

        return g

    funcs = tuple(_zero_func if cs.zero_mask[k] else clipped(cs.funcs[k])
                  for k in range(cs.order))
    sup = r if cs.support_radius is None else min(cs.support_radius, r)
    return replace(cs, funcs=funcs, support_radius=sup, cutoff_radius=r,
                   label=f"{cs.label}|cut{r:g}")


def _tail_interval(cs: CoefficientSet, side: Side, a: float):
    """Integration interval of the tail, clipped to the support."""
    if side == "minus":
        lo, hi = -np.inf, a
        if cs.support_radius is not None:
            lo = max(lo, -cs.support_radius)
            hi = min(hi, cs.support_radius)
    else:
        lo, hi = a, np.inf
        if cs.support_radius is not None:
            lo = max(lo, -cs.support_radius)
            hi = min(hi, cs.support_radius)
    return lo, hi


def _tail_quad(f, lo, hi) -> float:
    if not lo < hi:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            val, err = quad(f, lo, hi, epsabs=1e-14, epsrel=1e-10, limit=400)
        except IntegrationWarning as exc:
            raise DivergentTail(f"tail integral over ({lo}, {hi}) did not converge") from exc
    if not np.isfinite(val):
        raise DivergentTail(f"tail integral over ({lo}, {hi}) is not finite")
    return float(val)


def l1_tail(cs: CoefficientSet, side: Side, a: float) -> float:
    """Integral of the perturbation matrix norm over the tail on one side of
    the anchor a: (-inf, a] for side 'minus', [a, inf) for side 'plus'."""
    _check_side(side)
    if cs.is_trivial():
        return 0.0
    lo, hi = _tail_interval(cs, side, a)
    return _tail_quad(lambda y: float(cs.row_norm(y)), lo, hi)


def component_l1_tails(cs: CoefficientSet, side: Side, a: float) -> np.ndarray:
    """Per-slot tail integrals of |v_k|, used for sharp operator-norm bounds."""
    _check_side(side)
    out = np.zeros(cs.order)
    lo, hi = _tail_interval(cs, side, a)
    for k in range(cs.order):
        if not cs.zero_mask[k]:
            out[k] = _tail_quad(lambda y: float(np.abs(cs.value(k, y))), lo, hi)
    return out


def effective_support(cs: CoefficientSet, tol: float = 1e-14,
                      max_radius: float = 60.0) -> float:
    """Radius outside which the remaining coefficient mass is below tol."""
    if cs.support_radius is not None:
        return float(cs.support_radius)
    if cs.is_trivial():
        return 1.0
    s = 2.0
    while s <= max_radius:
        rem = l1_tail(cs, "minus", -s) + l1_tail(cs, "plus", s)
        if rem <= tol:
            return s
        s += 2.0
    raise DivergentTail(f"coefficient mass does not fall below {tol} within |x| <= {max_radius}")
