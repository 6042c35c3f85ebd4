"""Fundamental matrices, Wronskians and transition matrices.

Frames are stored column-rescaled: column j of U(x) is exp(zeta_j x) w_j(x)
and only w_j plus the complex log-prefactor zeta_j x are kept, so huge
exponent ranges survive.  All determinants live in log space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._quadrature import complex_quad
from .coeffs import CoefficientSet
from .errors import NearSingular, UnsupportedCoefficients
from .roots import RootSystem

_EXP_LIMIT = 300.0  # |Re(prefactor)| beyond which materializing would overflow


@dataclass(frozen=True)
class FundamentalFrame:
    """State of an admissible fundamental matrix at one point.

    ``w_cols[:, j]`` is the rescaled column j, ``prefactors[j]`` the complex
    log of the removed exponential, ``g_rows`` the inverse of the rescaled
    matrix (so the true inverse has rows exp(-prefactor_j) g_rows[j]), and
    ``logdet`` the complex log of det U(x).
    """

    x: float
    z: complex
    n: int
    roots: np.ndarray
    w_cols: np.ndarray
    g_rows: np.ndarray
    prefactors: np.ndarray
    logdet: complex
    cond: float

    def U_matrix(self) -> np.ndarray:
        """Materialize U(x); guarded against exponent overflow."""
        if np.max(np.abs(self.prefactors.real)) > _EXP_LIMIT:
            raise OverflowError("prefactor exponent exceeds safe range")
        return self.w_cols * np.exp(self.prefactors)[None, :]

    def G_matrix(self) -> np.ndarray:
        """Materialize the inverse frame; guarded against overflow."""
        if np.max(np.abs(self.prefactors.real)) > _EXP_LIMIT:
            raise OverflowError("prefactor exponent exceeds safe range")
        return np.exp(-self.prefactors)[:, None] * self.g_rows


def frame(rs: RootSystem, jost_set, x: float, cond_limit: float = 1e12) -> FundamentalFrame:
    """Assemble the frame from the N frame solutions at the point x."""
    order = rs.order
    if len(jost_set) != order:
        raise ValueError(f"need {order} solutions, got {len(jost_set)}")
    x = float(x)
    w_cols = np.empty((order, order), dtype=complex)
    for j, sol in enumerate(jost_set):
        w_cols[:, j] = sol.w_at(x)
    cond = float(np.linalg.cond(w_cols))
    if not np.isfinite(cond) or cond > cond_limit:
        raise NearSingular(
            f"frame at x={x}, z={rs.z} has condition {cond:.3e} (> {cond_limit:.1e})"
        )
    g_rows = np.linalg.inv(w_cols)
    sign, logabs = np.linalg.slogdet(w_cols)
    prefactors = rs.roots * x
    logdet = complex(prefactors.sum()) + np.log(sign) + logabs
    return FundamentalFrame(x=x, z=rs.z, n=rs.n, roots=rs.roots.copy(),
                            w_cols=w_cols, g_rows=g_rows, prefactors=prefactors,
                            logdet=logdet, cond=cond)


def free_frame(rs: RootSystem, x: float) -> FundamentalFrame:
    """Frame of the unperturbed system (rescaled columns are constant)."""
    x = float(x)
    prefactors = rs.roots * x
    sign, logabs = np.linalg.slogdet(rs.eigvecs)
    return FundamentalFrame(x=x, z=rs.z, n=rs.n, roots=rs.roots.copy(),
                            w_cols=rs.eigvecs.copy(), g_rows=rs.inv_eigvecs.copy(),
                            prefactors=prefactors,
                            logdet=complex(prefactors.sum()) + np.log(sign) + logabs,
                            cond=float(np.linalg.cond(rs.eigvecs)))


def free_wronskian(rs: RootSystem, x: float = 0.0) -> complex:
    """log of the unperturbed Wronskian: log prod_{j<k}(zeta_k - zeta_j)
    plus (sum of roots) * x.  The root sum vanishes for order >= 2."""
    log_vdm = 0.0 + 0j
    roots = rs.roots
    for j in range(rs.order):
        for k in range(j + 1, rs.order):
            log_vdm += np.log(roots[k] - roots[j])
    return complex(log_vdm + roots.sum() * x)


@dataclass(frozen=True)
class WronskianValue:
    """Perturbed and free Wronskians (log form) and their ratio."""

    x: float
    z: complex
    logW: complex
    logW0: complex
    delta: complex


def normalized_wronskian(rs: RootSystem, jost_set, x: float = 0.0,
                         cond_limit: float = 1e12) -> WronskianValue:
    """Ratio of the frame determinant to the free one, computed in log space
    so the exponential prefactors cancel analytically."""
    fr = frame(rs, jost_set, x, cond_limit=cond_limit)
    logw0 = free_wronskian(rs, x)
    delta = np.exp(fr.logdet - logw0)
    return WronskianValue(x=float(x), z=rs.z, logW=fr.logdet, logW0=logw0,
                          delta=complex(delta))


def wronskian_x_factor(cs: CoefficientSet, x1: float, x2: float) -> complex:
    """exp(-i**N integral of the top coefficient), the exact ratio
    W(x2)/W(x1)."""
    from .roots import i_pow

    if cs.top_is_zero:
        return 1.0 + 0j
    val, _ = complex_quad(lambda y: complex(cs.value(cs.order - 1, y)), x1, x2)
    return complex(np.exp(-i_pow(cs.order) * val))


@dataclass(frozen=True)
class TransitionMatrices:
    """Expansion coefficients of the frame solutions in the free exponential
    basis outside the support.

    ``t_plus`` is the square block of the left-anchored solutions read off on
    the right of the support, ``t_minus`` the block of the right-anchored
    solutions on the left.  The off-block coefficients are kept for
    diagnostics.
    """

    t_plus: np.ndarray
    t_minus: np.ndarray
    full_right: np.ndarray
    full_left: np.ndarray


def transition_matrices(rs: RootSystem, cs: CoefficientSet, jost_set,
                        margin: float = 0.5) -> TransitionMatrices:
    """Read off expansion coefficients just outside the coefficient support.

    Requires compactly supported coefficients; the expansion point sits
    ``margin`` beyond the support edge, where every frame solution is an
    exact combination of free exponentials.
    """
    if cs.support_radius is None:
        raise UnsupportedCoefficients(
            "transition matrices need compactly supported coefficients"
        )
    n, order = rs.n, rs.order
    x_r = cs.support_radius + margin
    x_l = -cs.support_radius - margin

    full_right = np.zeros((n, order), dtype=complex)
    for j in range(n):
        w = jost_set[j].w_at(x_r)
        coeff = rs.inv_eigvecs @ w
        full_right[j, :] = np.exp((rs.roots[j] - rs.roots) * x_r) * coeff
    full_left = np.zeros((order - n, order), dtype=complex)
    for idx, j in enumerate(range(n, order)):
        w = jost_set[j].w_at(x_l)
        coeff = rs.inv_eigvecs @ w
        full_left[idx, :] = np.exp((rs.roots[j] - rs.roots) * x_l) * coeff

    t_plus = full_right[:, :n].copy()
    t_minus = full_left[:, n:].copy()
    return TransitionMatrices(t_plus=t_plus, t_minus=t_minus,
                              full_right=full_right, full_left=full_left)
