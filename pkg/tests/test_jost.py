import numpy as np
import pytest

from ndtrace import (ContractionFailure, NoValidAnchor, build_solution,
                     choose_anchor, compute_roots, cutoff, extend, i_pow,
                     jost_frame_set, kernel_constant, kj_kernel, l1_tail,
                     normalized_wronskian, preset, projection, solve_w)
from ndtrace.jost import _kernel_column


def test_kj_kernel_dominant_mode_vanishes_left():
    rs = compute_roots(3, 1j)
    # index 0 has the largest real part: nothing dominates it
    assert np.abs(kj_kernel(rs, 0, -0.7)).max() == 0.0


def test_kj_kernel_single_term():
    rs = compute_roots(2, -1.0)
    got = kj_kernel(rs, 1, -1.0)
    want = projection(rs, 0) * np.exp(-1.0)
    assert np.abs(got - want).max() < 1e-14


def test_kj_kernel_zero_convention():
    # at zero offset the sum with the tied modes is the active one
    rs = compute_roots(2, -1.0)
    want = -(projection(rs, 0) + projection(rs, 1))
    assert np.abs(kj_kernel(rs, 0, 0.0) - want).max() < 1e-14


@pytest.mark.parametrize("order,z", [(2, -4.0), (3, 1j), (4, 2j)])
def test_rescaled_kernel_bounded(order, z):
    rs = compute_roots(order, z)
    cbound = kernel_constant(rs)
    grid = np.linspace(-8, 8, 161)
    for j in range(order):
        vals = [np.linalg.norm(kj_kernel(rs, j, x) * np.exp(-rs.roots[j] * x), 2)
                for x in grid]
        assert max(vals) <= cbound * (1 + 1e-12)


def test_choose_anchor_zero_and_compact():
    rs = compute_roots(2, -1.0)
    assert choose_anchor(rs, preset("zero", 2), "minus") == 0.0
    bump = preset("bump", 2, radius=1.5)
    assert choose_anchor(rs, bump, "minus") == -1.5
    assert choose_anchor(rs, bump, "plus") == 1.5


def test_choose_anchor_sech2_margin():
    cs = preset("sech2", 2, lam=-2.0)
    rs = compute_roots(2, -4.0)
    for side in ("minus", "plus"):
        a = choose_anchor(rs, cs, side)
        c = kernel_constant(rs, side)
        # tail integral of 2 sech^2 has the closed form 2 (1 + tanh(-|a|))
        closed = 2.0 * (1.0 + np.tanh(-abs(a)))
        assert c * closed <= 0.5 + 1e-12
        assert abs(l1_tail(cs, side, a) - closed) < 1e-8


def test_no_valid_anchor():
    heavy = preset("custom", 2,
                   funcs=[lambda x: 5.0 / (1.0 + x * x) ** 0.7, None])
    rs = compute_roots(2, -1.0)
    with pytest.raises(NoValidAnchor):
        choose_anchor(rs, heavy, "minus", max_distance=20.0)


def test_solve_w_free_is_exact():
    rs = compute_roots(3, 1j)
    cs = preset("zero", 3)
    for j, side in ((0, "minus"), (2, "plus")):
        tail = solve_w(rs, cs, j, side, 0.0)
        assert tail.norm_bound == 0.0
        w = tail.w_at(np.array([-3.0, 0.0]) if side == "minus" else np.array([0.0, 3.0]))
        assert np.abs(w - rs.eigvecs[:, j][:, None]).max() == 0.0


def test_solve_w_outside_compact_support():
    cs = cutoff(preset("sech2", 2, lam=-2.0), 3.0)
    rs = compute_roots(2, -4.0)
    tail = solve_w(rs, cs, 0, "minus", -3.0)
    xs = np.linspace(-6.0, -3.0, 7)
    assert np.abs(tail.w_at(xs) - rs.eigvecs[:, 0][:, None]).max() == 0.0


def test_solve_w_matches_closed_form_sech2():
    # exact rescaled solution of the reflectionless well
    kappa = 2.0
    cs = preset("sech2", 2, lam=-2.0)
    rs = compute_roots(2, -kappa ** 2)
    a = choose_anchor(rs, cs, "minus")
    tail = solve_w(rs, cs, 0, "minus", a)
    for x in (a, a - 1.0, a - 3.0):
        w = tail.w_at(x)
        w1 = (kappa - np.tanh(x)) / (kappa + 1.0)
        w2 = (kappa * (kappa - np.tanh(x)) - 1.0 / np.cosh(x) ** 2) / (kappa + 1.0)
        assert abs(w[0] - w1) < 1e-13
        assert abs(w[1] - w2) < 1e-13


def test_solve_w_norm_bound():
    cs = preset("sech2", 2, lam=-2.0)
    rs = compute_roots(2, -4.0)
    a = choose_anchor(rs, cs, "minus")
    tail = solve_w(rs, cs, 0, "minus", a)
    assert 0.0 < tail.norm_bound < 1.0
    # sup of the rescaled solution obeys the Neumann bound
    zeta = tail.zeta
    scale = np.abs(zeta) ** np.arange(2)
    w_scaled = np.abs(tail.w_nodes / scale[:, None]).max()
    assert w_scaled <= 1.0 / (1.0 - tail.norm_bound) + 1e-12


def test_solve_w_contraction_failure():
    cs = preset("sech2", 2, lam=-50.0)
    rs = compute_roots(2, -4.0)
    with pytest.raises(ContractionFailure):
        solve_w(rs, cs, 0, "minus", 2.0)


def test_born_order():
    # one Neumann iteration captures the solution to second order in the
    # coupling strength; probe at the anchor where all node offsets share
    # one analytic branch
    rs = compute_roots(2, -4.0)

    def deviation(eps):
        cs = preset("sech2", 2, lam=-eps)
        a = -2.0
        tail = solve_w(rs, cs, 0, "minus", a)
        psi = (-i_pow(2)) * np.einsum("kq,k->q", cs.values(tail.nodes),
                                      rs.eigvecs[:, 0])
        born = _kernel_column(rs, 0, "minus", a - tail.nodes) @ (tail.weights * psi)
        return np.abs(tail.w_at(a) - rs.eigvecs[:, 0] + born).max()

    d1, d2 = deviation(0.5), deviation(0.25)
    assert d1 > 0 and 3.0 < d1 / d2 < 5.0  # quadratic: the exact factor is 4


def test_extend_free_constant():
    rs = compute_roots(2, -1.0)
    cs = preset("zero", 2)
    sol = build_solution(rs, cs, 0, "minus", -5.0, 5.0)
    assert np.abs(sol.w_samples - rs.eigvecs[:, 0][:, None]).max() < 1e-12
    assert sol.residual_report < 1e-12


@pytest.mark.parametrize("order,z,preset_kw", [
    (2, -4.0, dict(name="sech2", lam=-2.0)),
    (3, 1 + 1j, dict(name="bump", radius=1.5, amplitudes=[1.0, 0.4, 0.2])),
])
def test_extend_defect(order, z, preset_kw):
    kw = dict(preset_kw)
    cs = preset(kw.pop("name"), order, **kw)
    rs = compute_roots(order, z)
    for sol in jost_frame_set(rs, cs, -6.0, 6.0):
        assert sol.residual_report <= 1e-9


def test_cutoff_convergence_of_solutions():
    cs = preset("gaussian", 2, width=5.0, amplitudes=[-0.8, 0.0])
    z = -2.0 + 0.4j
    rs = compute_roots(2, z)
    xs = np.linspace(-5.0, 5.0, 21)

    def column(c):
        sol = build_solution(rs, c, 0, "minus", -5.0, 5.0)
        return sol.w_at(xs)

    ref = column(cs)
    devs = [np.abs(column(cutoff(cs, r)) - ref).max() for r in (10.0, 20.0, 40.0)]
    assert devs[0] > devs[1] > devs[2]


def test_asymptotic_attainment():
    cs = preset("sech2", 2, lam=-2.0)
    rs = compute_roots(2, -4.0)
    a = choose_anchor(rs, cs, "minus")
    tail = solve_w(rs, cs, 0, "minus", a)
    span = a - tail.x_far
    far = np.linspace(tail.x_far, tail.x_far + 0.2 * span, 9)
    near = np.linspace(a - 0.2 * span, a, 9)
    p = rs.eigvecs[:, 0][:, None]
    dev_far = np.abs(tail.w_at(far) - p).max()
    dev_near = np.abs(tail.w_at(near) - p).max()
    assert dev_far < dev_near


def test_anchor_independence_of_wronskian():
    cs = preset("sech2", 2, lam=-2.0)
    z = -4.0
    rs = compute_roots(2, z)
    deltas = []
    for anchors in ((-2.0, 2.0), (-3.5, 3.5)):
        js = jost_frame_set(rs, cs, -4.0, 4.0, anchors=anchors)
        deltas.append(normalized_wronskian(rs, js, 0.0).delta)
    assert abs(deltas[0] - deltas[1]) <= 1e-8 * abs(deltas[0])


def test_large_z_rescaled_components():
    # with a vanishing top coefficient the rescaled components approach 1
    # like |z|**(-1/N) along the imaginary ray, once the solution has
    # crossed the support
    cs = preset("bump", 3, radius=1.5, amplitudes=[1.0, 0.5, 0.0])
    mags = [4.0, 32.0, 256.0]
    devs = []
    for m in mags:
        rs = compute_roots(3, m * 1j)
        sol = build_solution(rs, cs, 0, "minus", -2.0, 2.0)
        zeta = sol.zeta
        w_resc = sol.w_at(2.0) / zeta ** np.arange(3)
        devs.append(np.abs(w_resc - 1.0).max())
    assert devs[0] > devs[1] > devs[2]
    scaled = [d * m ** (1.0 / 3.0) for d, m in zip(devs, mags)]
    assert max(scaled) < 3.0 * min(scaled) + 1e-12


def test_window_guard():
    rs = compute_roots(2, -1.0)
    cs = preset("zero", 2)
    sol = build_solution(rs, cs, 0, "minus", -2.0, 2.0)
    sol.w_at(-50.0)  # tail side is unbounded
    with pytest.raises(ValueError):
        sol.w_at(3.0)
