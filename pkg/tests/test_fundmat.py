import numpy as np
import pytest

import oracles
from ndtrace import (NearSingular, UnsupportedCoefficients, compute_roots,
                     cutoff, frame, free_frame, free_wronskian, i_pow,
                     jost_frame_set, normalized_wronskian, preset,
                     transition_matrices, wronskian_x_factor)


@pytest.fixture(scope="module")
def bump3():
    cs = preset("bump", 3, radius=1.5, amplitudes=[1.0, 0.4, 0.3])
    rs = compute_roots(3, 1 + 1j)
    js = jost_frame_set(rs, cs, -6.0, 6.0)
    return cs, rs, js


def test_free_frame_order2():
    rs = compute_roots(2, -1.0)
    fr = free_frame(rs, 0.0)
    assert np.allclose(fr.U_matrix(), [[1, 1], [1, -1]], atol=1e-14)
    assert abs(np.exp(fr.logdet) + 2.0) < 1e-14


def test_frame_inverse(bump3):
    _, rs, js = bump3
    for x in (-2.0, 0.0, 1.3, 4.0):
        fr = frame(rs, js, x)
        assert np.abs(fr.U_matrix() @ fr.G_matrix() - np.eye(3)).max() < 1e-10


def test_frame_near_singular(bump3):
    _, rs, js = bump3
    with pytest.raises(NearSingular):
        frame(rs, js, 0.0, cond_limit=1.0)


def test_logdet_derivative_is_trace(bump3):
    # d log det U / dx equals the trace of the system matrix, which is
    # -i**N times the top coefficient
    cs, rs, js = bump3
    h = 1e-4
    for x in (0.0, 0.8):
        num = (frame(rs, js, x + h).logdet - frame(rs, js, x - h).logdet) / (2 * h)
        want = -i_pow(3) * cs.value(2, x)
        assert abs(num - want) <= 1e-6 * max(1.0, abs(want))


def test_free_wronskian_order2():
    for kappa in (1.0, 2.0):
        rs = compute_roots(2, -kappa ** 2)
        assert abs(np.exp(free_wronskian(rs)) + 2.0 * kappa) < 1e-13


def test_free_wronskian_order3():
    rs = compute_roots(3, 1j)
    omega = np.exp(2j * np.pi / 3)
    magnitude = abs((omega - 1) * (omega ** 2 - 1) * (omega ** 2 - omega))
    assert abs(abs(np.exp(free_wronskian(rs))) - magnitude) < 1e-12
    # and the log form is the pairwise product over the stored ordering
    prod = np.prod([rs.roots[k] - rs.roots[j]
                    for j in range(3) for k in range(j + 1, 3)])
    assert abs(np.exp(free_wronskian(rs)) - prod) < 1e-12


def test_free_wronskian_x_independent():
    rs = compute_roots(4, 2j)
    assert abs(free_wronskian(rs, 0.0) - free_wronskian(rs, 7.0)) < 1e-12


def test_delta_free_is_one():
    rs = compute_roots(3, 1j)
    js = jost_frame_set(rs, preset("zero", 3), -3.0, 3.0)
    wv = normalized_wronskian(rs, js, 0.0)
    assert abs(wv.delta - 1.0) < 1e-12


@pytest.mark.parametrize("kappa", [1.5, 2.0, 3.0])
def test_delta_sech2_closed_form(kappa):
    cs = preset("sech2", 2, lam=-2.0)
    rs = compute_roots(2, -kappa ** 2)
    js = jost_frame_set(rs, cs, -4.0, 4.0)
    wv = normalized_wronskian(rs, js, 0.0)
    want = oracles.sech2_delta(-kappa ** 2)
    assert abs(wv.delta - want) < 1e-10 * abs(want)


def test_delta_x_independent_when_top_vanishes():
    cs = preset("bump", 3, radius=1.5, amplitudes=[1.0, 0.4, 0.0])
    rs = compute_roots(3, 1 + 1j)
    js = jost_frame_set(rs, cs, -6.0, 6.0)
    vals = [normalized_wronskian(rs, js, x).delta for x in (-2.0, 0.0, 1.7, 3.5)]
    for v in vals[1:]:
        assert abs(v - vals[0]) <= 1e-8 * abs(vals[0])


def test_wronskian_x_law_with_top_coefficient(bump3):
    cs, rs, js = bump3
    x1, x2 = -0.7, 1.1
    w1 = frame(rs, js, x1).logdet
    w2 = frame(rs, js, x2).logdet
    got = np.exp(w2 - w1)
    want = wronskian_x_factor(cs, x1, x2)
    assert abs(got - want) <= 1e-8 * abs(want)


def test_numeration_invariance():
    cs = preset("bump", 4, radius=1.5, amplitudes=[1.0, 0.4, 0.2, 0.0])
    z = 2j
    rs = compute_roots(4, z)
    js = jost_frame_set(rs, cs, -4.0, 4.0)
    d0 = normalized_wronskian(rs, js, 0.0).delta
    # renumber the two growing modes consistently everywhere
    rs_p = rs.permuted([1, 0, 2, 3])
    js_p = jost_frame_set(rs_p, cs, -4.0, 4.0)
    d1 = normalized_wronskian(rs_p, js_p, 0.0).delta
    assert abs(d0 - d1) < 1e-12 * abs(d0)


def test_solution_choice_invariance(bump3):
    # adding a faster-decaying same-side column leaves the determinant alone
    _, rs, js = bump3
    fr = frame(rs, js, 0.4)
    u = fr.U_matrix()
    base = np.linalg.det(u)
    rng = np.random.default_rng(5)
    n = rs.n
    for _ in range(5):
        c = np.exp(2j * np.pi * rng.uniform())
        mod = u.copy()
        # right-anchored family: the last column decays faster at +inf
        mod[:, n] = u[:, n] + c * u[:, rs.order - 1]
        assert abs(np.linalg.det(mod) - base) <= 1e-8 * abs(base)


def test_transition_matrices_free():
    rs = compute_roots(2, -1.0)
    cs = preset("zero", 2)
    js = jost_frame_set(rs, cs, -2.0, 2.0)
    tm = transition_matrices(rs, cs, js)
    assert np.abs(tm.t_plus - np.eye(1)).max() < 1e-12
    assert np.abs(tm.t_minus - np.eye(1)).max() < 1e-12


def test_transition_determinant_consistency(bump3):
    # det of the right block equals exp(integral of the system trace) times
    # det of the left block
    cs, rs, js = bump3
    tm = transition_matrices(rs, cs, js)
    factor = wronskian_x_factor(cs, -cs.support_radius - 1.0, cs.support_radius + 1.0)
    lhs = np.linalg.det(tm.t_plus)
    rhs = factor * np.linalg.det(tm.t_minus)
    assert abs(lhs - rhs) <= 1e-8 * abs(rhs)


def test_transition_det_equals_delta_for_cutoff():
    cs = cutoff(preset("sech2", 2, lam=-2.0), 6.0)
    rs = compute_roots(2, -4.0)
    js = jost_frame_set(rs, cs, -8.0, 8.0)
    tm = transition_matrices(rs, cs, js)
    delta = normalized_wronskian(rs, js, 0.0).delta
    assert abs(np.linalg.det(tm.t_plus) - delta) < 1e-8
    # and the cutoff value is near the closed form of the full well
    assert abs(delta - oracles.sech2_delta(-4.0)) < 1e-4


def test_transition_requires_compact_support():
    cs = preset("sech2", 2, lam=-2.0)
    rs = compute_roots(2, -4.0)
    js = jost_frame_set(rs, cs, -4.0, 4.0)
    with pytest.raises(UnsupportedCoefficients):
        transition_matrices(rs, cs, js)
