"""Construction of exponentially normalized solutions of the first-order
system u' = (L0 + V(x)) u.

A solution with index j is represented in the rescaled variable
w(x) = exp(-zeta_j x) u(x), which tends to the eigenvector p_j at the side
infinity where the solution is anchored.  On the tail beyond the anchor the
rescaled solution solves a Fredholm integral equation discretized by
Gauss-Legendre panels; from the anchor it is propagated across the window by
an adaptive high-order integrator, still in the rescaled variable so no raw
exponential is ever materialized.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from ._quadrature import equal_mass_breaks, gl_panels
from .coeffs import CoefficientSet, component_l1_tails, l1_tail
from .errors import (ContractionFailure, IntegratorFailure, NoValidAnchor,
                     SingularSystem)
from .roots import RootSystem, i_pow, projection

_NEGLECT_TOL = 1e-12          # neglected tail mass (times kernel constant)
_DEFAULT_NODES = 16           # Gauss-Legendre nodes per tail panel
_AMPLIFICATION_WARN = 30.0    # log of tolerable sub-dominant error growth


def _active_sets(rs: RootSystem, j: int, side: str):
    """Indices entering the two sums of the tail kernel.

    For the left tail the modes strictly dominating zeta_j act for xi < 0 and
    the rest (ties included) for xi >= 0; for the right tail the roles are
    mirrored, with ties kept in the xi <= 0 sum.
    """
    kappa = rs.roots.real
    kj = kappa[j]
    if side == "minus":
        first = np.where(kappa > kj)[0]
        second = np.where(kappa <= kj)[0]
    elif side == "plus":
        first = np.where(kappa >= kj)[0]
        second = np.where(kappa < kj)[0]
    else:
        raise ValueError(f"side must be 'minus' or 'plus', got {side!r}")
    return first, second


def kj_kernel(rs: RootSystem, j: int, x: float, side: str = "minus") -> np.ndarray:
    """Matrix kernel of the tail integral equation at offset x (unscaled).

    Piecewise sum of mode projections times exponentials; the half-line that
    is active at x = 0 is the one containing the tied modes.
    """
    if not 0 <= j < rs.order:
        raise IndexError(f"index {j} out of range")
    first, second = _active_sets(rs, j, side)
    out = np.zeros((rs.order, rs.order), dtype=complex)
    x = float(x)
    if side == "minus":
        on_first = x < 0.0
    else:
        on_first = x <= 0.0
    idx = first if on_first else second
    sign = 1.0 if on_first else -1.0
    for m in idx:
        out += sign * projection(rs, m) * np.exp(rs.roots[m] * x)
    return out


def _kernel_column(rs: RootSystem, j: int, side: str, xi, branch: str | None = None) -> np.ndarray:
    """Last column of K_j(xi) * exp(-zeta_j xi), vectorized over xi.

    Only this column enters the tail equation because the perturbation
    matrix has a single nonzero row.  ``branch`` forces one of the two
    one-sided analytic families ("first" for the sum active at negative
    offsets, "second" for the other); by default the offset sign selects
    the branch pointwise.  Shape: (N,) + shape(xi).
    """
    first, second = _active_sets(rs, j, side)
    xi = np.asarray(xi, dtype=float)
    c = rs.inv_eigvecs[:, -1]
    zeta_j = rs.roots[j]
    out = np.zeros((rs.order,) + xi.shape, dtype=complex)
    if branch is None:
        mask_first = xi < 0.0 if side == "minus" else xi <= 0.0
    elif branch == "first":
        mask_first = np.ones(xi.shape, dtype=bool)
    elif branch == "second":
        mask_first = np.zeros(xi.shape, dtype=bool)
    else:
        raise ValueError(f"branch must be 'first', 'second' or None, got {branch!r}")
    mask_second = ~mask_first
    for m in first:
        grow = np.exp((rs.roots[m] - zeta_j) * xi[mask_first])
        out[:, mask_first] += (c[m] * rs.eigvecs[:, m])[:, None] * grow[None, :]
    for m in second:
        grow = np.exp((rs.roots[m] - zeta_j) * xi[mask_second])
        out[:, mask_second] -= (c[m] * rs.eigvecs[:, m])[:, None] * grow[None, :]
    return out


def _column_sup_bounds(rs: RootSystem, j: int, side: str) -> np.ndarray:
    """Componentwise upper bounds for sup_xi of the rescaled kernel column.

    On its active half-line each mode factor has modulus <= 1, so the
    triangle inequality over each sum is a valid sup bound.
    """
    first, second = _active_sets(rs, j, side)
    c = np.abs(rs.inv_eigvecs[:, -1])
    mags = np.abs(rs.eigvecs)  # (component, mode)
    b_first = (mags[:, first] * c[first]).sum(axis=1) if len(first) else np.zeros(rs.order)
    b_second = (mags[:, second] * c[second]).sum(axis=1) if len(second) else np.zeros(rs.order)
    return np.maximum(b_first, b_second)


def kernel_constant(rs: RootSystem, side: str = "minus") -> float:
    """Upper bound for sup_x ||K_j(x) exp(-zeta_j x)||, maximized over j."""
    best = 0.0
    for j in range(rs.order):
        first, second = _active_sets(rs, j, side)
        norms = np.array([np.linalg.norm(projection(rs, m), 2) for m in range(rs.order)])
        b = max(norms[first].sum() if len(first) else 0.0,
                norms[second].sum() if len(second) else 0.0)
        best = max(best, float(b))
    return best


def choose_anchor(rs: RootSystem, cs: CoefficientSet, side: str,
                  margin: float = 0.5, step: float = 1.0,
                  max_distance: float = 200.0) -> float:
    """Anchor with kernel-constant times tail mass at most ``margin``.

    Compactly supported coefficients anchor exactly at the support edge;
    otherwise the anchor walks outward until the margin holds.
    """
    sgn = -1.0 if side == "minus" else 1.0
    if cs.support_radius is not None:
        return sgn * float(cs.support_radius)
    const = kernel_constant(rs, side)
    a = 0.0
    while abs(a) <= max_distance:
        if const * l1_tail(cs, side, a) <= margin:
            return a
        a += sgn * step
    raise NoValidAnchor(
        f"no anchor within |a| <= {max_distance} reaches margin {margin} on side {side}"
    )


class _PanelRule:
    """Composite Gauss-Legendre rule that remembers its panel structure,
    with barycentric weights on the reference nodes for in-panel
    interpolation."""

    def __init__(self, breaks, nodes_per_panel: int):
        self.breaks = np.asarray(breaks, dtype=float)
        self.m = int(nodes_per_panel)
        xg, wg = np.polynomial.legendre.leggauss(self.m)
        self.ref_nodes = xg
        self.ref_weights = wg
        half = 0.5 * np.diff(self.breaks)
        mid = 0.5 * (self.breaks[:-1] + self.breaks[1:])
        self.panel_nodes = mid[:, None] + half[:, None] * xg[None, :]   # (P, m)
        self.panel_weights = half[:, None] * wg[None, :]
        self.nodes = self.panel_nodes.ravel()
        self.weights = self.panel_weights.ravel()
        # barycentric weights of the reference nodes
        diff = xg[:, None] - xg[None, :]
        np.fill_diagonal(diff, 1.0)
        self.bary = 1.0 / np.prod(diff, axis=1)

    @property
    def n_panels(self) -> int:
        return len(self.breaks) - 1

    def panel_of(self, x: float) -> int | None:
        """Index of the panel whose interior contains x, else None."""
        if not self.breaks[0] < x < self.breaks[-1]:
            return None
        p = int(np.searchsorted(self.breaks, x, side="right") - 1)
        return min(p, self.n_panels - 1)

    def interp_matrix(self, p: int, ts) -> np.ndarray:
        """Barycentric interpolation from panel p's nodes to points ts."""
        lo, hi = self.breaks[p], self.breaks[p + 1]
        u = (2.0 * np.asarray(ts, dtype=float) - (lo + hi)) / (hi - lo)
        return _bary_matrix(self.ref_nodes, self.bary, u)


def _bary_matrix(ref_nodes: np.ndarray, bary: np.ndarray, u) -> np.ndarray:
    """Barycentric interpolation matrix from reference nodes to points u."""
    u = np.asarray(u, dtype=float)
    d = u[:, None] - ref_nodes[None, :]
    hits = np.abs(d) < 1e-14
    d = np.where(hits, 1.0, d)
    out = bary[None, :] / d
    out /= out.sum(axis=1, keepdims=True)
    rows_hit = hits.any(axis=1)
    if rows_hit.any():
        out[rows_hit] = hits[rows_hit].astype(float)
    return out


class _SplitReference:
    """Reference-element geometry of the in-panel split quadrature.

    For each node r of the reference rule, the panel is cut at that node;
    both pieces carry their own scaled Gauss-Legendre rule and a barycentric
    matrix back to the panel's nodes.  Everything is affine-invariant, so
    one table per node count serves all panels.
    """

    _cache: dict = {}

    def __new__(cls, m: int):
        if m in cls._cache:
            return cls._cache[m]
        self = super().__new__(cls)
        xg, wg = np.polynomial.legendre.leggauss(m)
        diff = xg[:, None] - xg[None, :]
        np.fill_diagonal(diff, 1.0)
        bary = 1.0 / np.prod(diff, axis=1)
        # piece 0: [-1, u_r] (offsets x_r - t >= 0); piece 1: [u_r, 1]
        self.sub_nodes = np.empty((2, m, m))
        self.sub_weights = np.empty((2, m, m))
        self.interp = np.empty((2, m, m, m))
        for r, ur in enumerate(xg):
            for piece, (lo, hi) in enumerate(((-1.0, ur), (ur, 1.0))):
                half = 0.5 * (hi - lo)
                ts = 0.5 * (lo + hi) + half * xg
                self.sub_nodes[piece, r] = ts
                self.sub_weights[piece, r] = half * wg
                self.interp[piece, r] = _bary_matrix(xg, bary, ts)
        self.ref_nodes = xg
        cls._cache[m] = self
        return self


@dataclass
class TailSolution:
    """Rescaled solution of the tail integral equation.

    ``phi`` holds the coupling density (the perturbation row applied to w)
    at the quadrature nodes; w is reconstructed from it anywhere through the
    panel rule.  The kernel switches analytic branch at zero offset, so the
    panel containing the evaluation point is integrated in two pieces with
    the density interpolated barycentrically from its own nodes.
    """

    rs: RootSystem
    j: int
    side: str
    anchor: float
    rule: _PanelRule | None
    phi: np.ndarray
    norm_bound: float
    x_far: float

    @property
    def zeta(self) -> complex:
        return complex(self.rs.roots[self.j])

    @property
    def p(self) -> np.ndarray:
        return self.rs.eigvecs[:, self.j]

    @property
    def nodes(self) -> np.ndarray:
        return self.rule.nodes if self.rule is not None else np.zeros(0)

    @property
    def weights(self) -> np.ndarray:
        return self.rule.weights if self.rule is not None else np.zeros(0)

    def _kernel_integral(self, x: float) -> np.ndarray:
        """integral of K(x - y) e^{-zeta (x - y)} applied to the density,
        with the branch switch at y = x resolved by split sub-panels."""
        rule, rs, j, side = self.rule, self.rs, self.j, self.side
        xi = x - rule.nodes
        col = _kernel_column(rs, j, side, xi)
        acc = col @ (rule.weights * self.phi)
        p = rule.panel_of(x)
        if p is not None:
            cols = slice(p * rule.m, (p + 1) * rule.m)
            phi_p = self.phi[cols]
            naive = _kernel_column(rs, j, side, x - rule.panel_nodes[p]) @ (
                rule.panel_weights[p] * phi_p)
            acc -= naive
            acc += self._split_panel(x, p) @ phi_p
        return acc

    def _split_panel(self, x: float, p: int) -> np.ndarray:
        """Exact-branch quadrature of the panel containing x, returned as a
        matrix acting on the panel's nodal density values: shape (N, m)."""
        rule, rs, j, side = self.rule, self.rs, self.j, self.side
        lo, hi = rule.breaks[p], rule.breaks[p + 1]
        out = np.zeros((rs.order, rule.m), dtype=complex)
        # y < x: positive offset, branch of the non-negative half-line
        for (u, v, branch) in ((lo, x, "second"), (x, hi, "first")):
            if not v > u + 1e-14 * max(1.0, abs(hi - lo)):
                continue
            half = 0.5 * (v - u)
            ts = 0.5 * (u + v) + half * rule.ref_nodes
            ws = half * rule.ref_weights
            colp = _kernel_column(rs, j, side, x - ts, branch=branch)  # (N, m)
            out += (colp * ws[None, :]) @ rule.interp_matrix(p, ts)
        return out

    def w_at(self, x) -> np.ndarray:
        """Rescaled solution on the tail; shape (N,) + shape(x)."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xs = np.atleast_1d(x).ravel()
        w = np.repeat(self.p[:, None], xs.size, axis=1).astype(complex)
        if self.rule is not None:
            for i, xv in enumerate(xs):
                w[:, i] -= self._kernel_integral(float(xv))
        return w[:, 0] if scalar else w.reshape((len(self.p),) + np.atleast_1d(x).shape)

    @property
    def w_nodes(self) -> np.ndarray:
        """Samples of w at the quadrature nodes, shape (N, Q)."""
        if self.rule is None:
            return np.zeros((len(self.p), 0), dtype=complex)
        return self.w_at(self.rule.nodes)


def _tail_breaks(cs: CoefficientSet, rs: RootSystem, side: str, a: float):
    """Quadrature interval and panel breakpoints for the tail equation."""
    const = kernel_constant(rs, side)
    sgn = -1.0 if side == "minus" else 1.0
    far = a + sgn * 4.0
    if cs.support_radius is not None:
        far = sgn * cs.support_radius
    else:
        while abs(far - a) < 80.0 and const * l1_tail(cs, side, far) > _NEGLECT_TOL:
            far += sgn * 4.0
    lo, hi = (far, a) if side == "minus" else (a, far)
    if not hi > lo:
        return None
    span = hi - lo
    n_panels = int(np.clip(np.ceil(span / 2.0), 4, 24))
    breaks = equal_mass_breaks(cs.row_norm, lo, hi, n_panels)
    # cap the panel width so slowly accumulating mass still gets resolved
    capped = [breaks[0]]
    for b in breaks[1:]:
        while b - capped[-1] > 2.5:
            capped.append(capped[-1] + 2.0)
        capped.append(b)
    return np.asarray(capped)


def solve_w(rs: RootSystem, cs: CoefficientSet, j: int, side: str, a: float,
            tail_grid=None, nodes_per_panel: int = _DEFAULT_NODES) -> TailSolution:
    """Solve the tail integral equation for the rescaled solution w.

    The discretization is a composite Gauss-Legendre panel rule with a dense
    direct solve.  The perturbation matrix has one nonzero row, so the full
    system reduces exactly to a scalar equation for the coupling density
    phi(y) = -i**N sum_k v_k(y) w_k(y); w is recovered from phi by one
    quadrature.  Raises ContractionFailure when the computed operator-norm
    bound (in the root-rescaled components, which is sharp for large |z|)
    reaches 1, and SingularSystem when the dense solve fails.
    """
    if not 0 <= j < rs.order:
        raise IndexError(f"index {j} out of range")
    zeta_j = rs.roots[j]

    tails = component_l1_tails(cs, side, a)
    scale = np.abs(zeta_j) ** np.arange(rs.order)
    sup = _column_sup_bounds(rs, j, side)
    bound = float((sup / scale).max() * (scale * tails).sum())
    if bound >= 1.0:
        raise ContractionFailure(
            f"tail operator norm bound {bound:.3f} >= 1 at anchor {a}; "
            "move the anchor further out"
        )

    if tails.sum() == 0.0:
        return TailSolution(rs=rs, j=j, side=side, anchor=a, rule=None,
                            phi=np.zeros(0, dtype=complex), norm_bound=0.0, x_far=a)

    if tail_grid is None:
        breaks = _tail_breaks(cs, rs, side, a)
    else:
        breaks = np.asarray(tail_grid, dtype=float)
    rule = _PanelRule(breaks, nodes_per_panel)
    y, wq = rule.nodes, rule.weights

    pj = rs.eigvecs[:, j]
    vrow = -i_pow(rs.order) * cs.values(y)           # (N, Q)
    xi = y[:, None] - y[None, :]
    col = _kernel_column(rs, j, side, xi)            # (N, Q(x), Q(y))
    q_mat = np.einsum("ni,niq->iq", vrow, col) * wq[None, :]
    # the kernel switches analytic branch at zero offset, which lands inside
    # the collocation point's own panel: replace that block with the
    # branch-exact split quadrature acting on the panel's nodal values
    shell = TailSolution(rs=rs, j=j, side=side, anchor=a, rule=rule,
                         phi=np.zeros(y.size, dtype=complex), norm_bound=bound,
                         x_far=float(breaks[0] if side == "minus" else breaks[-1]))
    m = rule.m
    ref = _SplitReference(m)
    for p in range(rule.n_panels):
        cols = slice(p * m, (p + 1) * m)
        half = 0.5 * (rule.breaks[p + 1] - rule.breaks[p])
        vrow_p = vrow[:, cols]
        block = np.zeros((m, m), dtype=complex)
        for piece, branch in ((0, "second"), (1, "first")):
            offs = half * (ref.ref_nodes[:, None] - ref.sub_nodes[piece])  # (m rows, m sub)
            colp = _kernel_column(rs, j, side, offs, branch=branch)        # (N, m, m)
            sig = np.einsum("nr,nrs->rs", vrow_p, colp)
            block += np.einsum("rs,rsq->rq", sig * (half * ref.sub_weights[piece]),
                               ref.interp[piece])
        q_mat[cols, cols] = block
    psi = vrow.T @ pj                                # (Q,)
    a_mat = np.eye(y.size, dtype=complex) + q_mat
    try:
        phi = np.linalg.solve(a_mat, psi)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem("dense solve of the tail equation failed") from exc
    if not np.all(np.isfinite(phi)):
        raise SingularSystem("tail equation produced non-finite values")
    shell.phi = phi
    return shell


@dataclass
class JostSolution:
    """One exponentially normalized solution sampled across the window.

    ``w_samples[:, i]`` is the rescaled solution at ``grid[i]``; the full
    solution is exp(zeta x) w(x) and is never materialized here.
    """

    j: int
    side: str
    anchor: float
    zeta: complex
    p: np.ndarray
    grid: np.ndarray
    w_samples: np.ndarray
    residual_report: float
    amplification_exponent: float
    tail: TailSolution
    _ode_sol: object = field(repr=False, default=None)
    window: tuple = (0.0, 0.0)

    def w_at(self, x) -> np.ndarray:
        """Rescaled solution anywhere in the window; shape (N,) + shape(x)."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xs = np.atleast_1d(x).astype(float)
        lo, hi = self.window
        if xs.min() < lo - 1e-9 or xs.max() > hi + 1e-9:
            raise ValueError(
                f"x range [{xs.min()}, {xs.max()}] outside window [{lo}, {hi}]"
            )
        on_tail = xs <= self.anchor if self.side == "minus" else xs >= self.anchor
        out = np.empty((len(self.p), xs.size), dtype=complex)
        if on_tail.any():
            out[:, on_tail] = self.tail.w_at(xs[on_tail])
        rest = ~on_tail
        if rest.any():
            if self._ode_sol is None:
                raise ValueError("solution was not propagated beyond the anchor")
            out[:, rest] = self._ode_sol(xs[rest])
        return out[:, 0] if scalar else out

    def log_prefactor(self, x):
        """Complex log of the removed exponential factor at x."""
        return self.zeta * np.asarray(x, dtype=float)


def _system_rhs(rs: RootSystem, cs: CoefficientSet, zeta_j: complex):
    iNz = i_pow(rs.order) * rs.z
    neg_iN = -i_pow(rs.order)
    order = rs.order

    def rhs(x, w):
        dw = np.empty(order, dtype=complex)
        dw[:-1] = w[1:]
        dw[-1] = iNz * w[0]
        dw -= zeta_j * w
        dw[-1] += neg_iN * np.dot(cs.values(x), w)
        return dw

    return rhs


def _max_defect(fn, rhs, points, skip_near, h=1e-4):
    """Max relative defect of the first-order system on the given points,
    using a fourth-order stencil on the dense interpolant."""
    worst = 0.0
    for x in points:
        if any(abs(x - s) <= 2.5 * h for s in skip_near):
            continue
        wp = (-fn(x + 2 * h) + 8 * fn(x + h) - 8 * fn(x - h) + fn(x - 2 * h)) / (12 * h)
        w = fn(x)
        r = rhs(x, w)
        scale = max(1.0, float(np.linalg.norm(w)), float(np.linalg.norm(r)))
        worst = max(worst, float(np.linalg.norm(wp - r)) / scale)
    return worst


def extend(rs: RootSystem, cs: CoefficientSet, j: int, side: str,
           tail: TailSolution, x_min: float, x_max: float,
           grid_points: int = 241, rtol: float = 1e-11, atol: float = 1e-12,
           defect_points: int = 25) -> JostSolution:
    """Propagate the tail solution across [x_min, x_max] in the rescaled
    variable and sample it on a uniform grid.

    Right tails are propagated leftward and left tails rightward, which is
    the direction in which the carried mode is dominant or at worst
    comparable inside its own sign group.
    """
    if not x_max > x_min:
        raise ValueError("empty window")
    a = tail.anchor
    zeta_j = rs.roots[j]
    rhs = _system_rhs(rs, cs, zeta_j)
    target = x_max if side == "minus" else x_min
    ode_sol = None
    if (side == "minus" and target > a) or (side == "plus" and target < a):
        w0 = tail.w_at(a)
        margin = abs(target - a) * 1e-9 + 1e-9
        sol = solve_ivp(rhs, (a, target + np.sign(target - a) * margin), w0,
                        method="DOP853", rtol=rtol, atol=atol, dense_output=True)
        if not sol.success:
            raise IntegratorFailure(f"propagation from {a} to {target} failed: {sol.message}")
        ode_sol = sol.sol

    # the tail side is evaluable arbitrarily far out; only the propagated
    # side is limited by the dense-output span
    if side == "minus":
        window = (-np.inf, max(x_max, a))
    else:
        window = (min(x_min, a), np.inf)

    kappa = rs.roots.real
    gaps = kappa - kappa[j] if side == "minus" else kappa[j] - kappa
    span = abs(target - a) if ode_sol is not None else 0.0
    amp = float(max(gaps.max(), 0.0) * span)
    if amp > _AMPLIFICATION_WARN:
        warnings.warn(
            f"solution {j} ({side}) propagated {span:.1f} against a mode gap "
            f"{gaps.max():.2f}; expect ~1e{amp / 2.302:.0f} error amplification",
            stacklevel=2,
        )

    partial = JostSolution(j=j, side=side, anchor=a, zeta=complex(zeta_j),
                           p=rs.eigvecs[:, j].copy(), grid=np.zeros(0),
                           w_samples=np.zeros((rs.order, 0), dtype=complex),
                           residual_report=0.0, amplification_exponent=amp,
                           tail=tail, _ode_sol=ode_sol, window=window)
    grid = np.linspace(x_min, x_max, grid_points)
    partial.grid = grid
    partial.w_samples = partial.w_at(grid)

    if ode_sol is not None:
        inner_lo, inner_hi = sorted((a, target))
        pts = np.linspace(inner_lo, inner_hi, defect_points)[1:-1]
        skip = [a]
        if cs.cutoff_radius is not None:
            skip += [-cs.cutoff_radius, cs.cutoff_radius]
        partial.residual_report = _max_defect(ode_sol, rhs, pts, skip)
    return partial


def build_solution(rs: RootSystem, cs: CoefficientSet, j: int, side: str,
                   x_min: float, x_max: float, anchor: float | None = None,
                   tail_grid=None, **extend_kwargs) -> JostSolution:
    """Anchor selection, tail solve and propagation in one call."""
    a = choose_anchor(rs, cs, side) if anchor is None else float(anchor)
    tail = solve_w(rs, cs, j, side, a, tail_grid=tail_grid)
    return extend(rs, cs, j, side, tail, x_min, x_max, **extend_kwargs)


def jost_frame_set(rs: RootSystem, cs: CoefficientSet, x_min: float, x_max: float,
                   anchors: tuple | None = None, **extend_kwargs) -> list:
    """The N frame solutions: indices below the split anchored on the left,
    the rest anchored on the right.  The tail panel layout is shared by all
    solutions of one side."""
    if anchors is None:
        a_minus = choose_anchor(rs, cs, "minus") if rs.n > 0 else 0.0
        a_plus = choose_anchor(rs, cs, "plus") if rs.n < rs.order else 0.0
    else:
        a_minus, a_plus = anchors
    grids = {}
    for side, a in (("minus", a_minus), ("plus", a_plus)):
        grids[side] = None
        if not cs.is_trivial():
            grids[side] = _tail_breaks(cs, rs, side, a)
    out = []
    for j in range(rs.order):
        side = "minus" if j < rs.n else "plus"
        a = a_minus if side == "minus" else a_plus
        lo = min(x_min, a_minus if rs.n > 0 else x_min)
        hi = max(x_max, a_plus if rs.n < rs.order else x_max)
        out.append(build_solution(rs, cs, j, side, lo, hi, anchor=a,
                                  tail_grid=grids[side], **extend_kwargs))
    return out
