import numpy as np
import pytest
from scipy.integrate import quad

from ndtrace import (DivergentTail, InvalidPreset, SystemPerturbation,
                     component_l1_tails, cutoff, effective_support, i_pow,
                     l1_tail, preset, tabulated)


def test_zero_preset():
    cs = preset("zero", 3)
    assert cs.is_trivial()
    x = np.linspace(-5, 5, 11)
    assert np.all(cs.values(x) == 0)
    assert cs.support_radius == 0.0


def test_sech2_preset():
    cs = preset("sech2", 2, lam=-2.0)
    assert abs(cs.value(0, 0.0) + 2.0) < 1e-15
    assert cs.zero_mask == (False, True)
    assert cs.top_is_zero


def test_bump_preset():
    cs = preset("bump", 2, radius=1.0, amplitudes=[1.0, 0.0])
    assert cs.value(0, 1.0) == 0.0
    assert cs.value(0, -1.0) == 0.0
    assert abs(cs.value(0, 0.0) - np.exp(-1.0)) < 1e-15
    assert cs.support_radius == 1.0


def test_gaussian_preset():
    cs = preset("gaussian", 3, width=2.0, amplitudes=[1.0, 0.5j, 0.0])
    assert abs(cs.value(0, 2.0) - np.exp(-1.0)) < 1e-15
    assert abs(cs.value(1, 0.0) - 0.5j) < 1e-15


def test_invalid_presets():
    with pytest.raises(InvalidPreset):
        preset("bump", 2, radius=-1.0)
    with pytest.raises(InvalidPreset):
        preset("nope", 2)
    with pytest.raises(InvalidPreset):
        preset("bump", 2, radius=1.0, amplitudes=[1.0])
    with pytest.raises(InvalidPreset):
        preset("sech2", 2, lam=-2.0, bogus=1)


def test_cutoff():
    cs = preset("sech2", 2, lam=-2.0)
    cut = cutoff(cs, 3.0)
    assert cut.value(0, 4.0) == 0.0
    assert abs(cut.value(0, 0.0) + 2.0) < 1e-15
    assert cut.support_radius == 3.0
    assert cutoff(preset("zero", 2), 5.0).is_trivial()
    # support shrinks but never grows
    b = preset("bump", 2, radius=1.0)
    assert cutoff(b, 5.0).support_radius == 1.0
    assert cutoff(b, 0.5).support_radius == 0.5


def test_cutoff_pointwise_convergence():
    cs = preset("gaussian", 2, width=1.0, amplitudes=[1.0, 0.0])
    x = np.linspace(-4, 4, 81)
    ref = cs.values(x)
    for r in (5.0, 8.0, 12.0):
        dev = np.abs(cutoff(cs, r).values(x) - ref).max()
        assert dev <= np.exp(-min(r, 5.0) ** 2) + 1e-300
    assert np.abs(cutoff(cs, 12.0).values(x) - ref).max() == 0.0


def test_l1_tail_values():
    assert l1_tail(preset("zero", 2), "minus", 0.0) == 0.0
    cs = preset("sech2", 2, lam=-2.0)
    # integral of 2 sech^2 over (-inf, 0] has the closed value 2
    assert abs(l1_tail(cs, "minus", 0.0) - 2.0) < 1e-9
    b = preset("bump", 2, radius=1.0)
    assert l1_tail(b, "minus", -2.0) == 0.0


def test_l1_tail_monotone():
    cs = preset("sech2", 2, lam=-2.0)
    vals = [l1_tail(cs, "minus", a) for a in (1.0, 0.0, -1.0, -2.0)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    vals_p = [l1_tail(cs, "plus", a) for a in (-1.0, 0.0, 1.0)]
    assert all(b < a for a, b in zip(vals_p, vals_p[1:]))


def test_component_tails():
    cs = preset("bump", 3, radius=1.0, amplitudes=[1.0, 2.0, 0.0])
    t = component_l1_tails(cs, "plus", -2.0)
    assert t[2] == 0.0
    assert abs(t[1] - 2 * t[0]) < 1e-10


def test_weighted_norm_finite():
    # short-range condition: |v|^2 (1 + x^2)^alpha integrable
    for cs in (preset("sech2", 2, lam=-2.0),
               preset("gaussian", 2, width=1.5, amplitudes=[1.0, 0.0]),
               preset("bump", 2, radius=2.0)):
        val = quad(lambda x: abs(cs.value(0, x)) ** 2 * (1 + x * x) ** cs.alpha,
                   -40, 40, limit=200)[0]
        assert np.isfinite(val)


def test_divergent_tail():
    cs = preset("custom", 2, funcs=[lambda x: np.ones_like(x), None])
    with pytest.raises(DivergentTail):
        l1_tail(cs, "minus", 0.0)


def test_system_perturbation():
    cs = preset("bump", 3, radius=1.0, amplitudes=[1.0, 2.0, 3.0])
    V = SystemPerturbation(cs)
    m = V(0.5)
    assert np.all(m[:-1, :] == 0)
    scale = -i_pow(3)
    assert np.abs(m[-1, :] - scale * cs.values(0.5)).max() < 1e-15
    assert abs(V.trace(0.5) - scale * cs.value(2, 0.5)) < 1e-15


def test_tabulated():
    x = np.linspace(-3, 3, 61)
    vals = np.tanh(x) * np.exp(-x * x)
    cs = tabulated(2, x, {0: vals})
    probe = np.linspace(-2.9, 2.9, 37)
    assert np.abs(cs.value(0, probe) - np.tanh(probe) * np.exp(-probe ** 2)).max() < 1e-5
    assert cs.value(0, 4.0) == 0.0
    assert cs.value(1, 1.0) == 0.0
    assert cs.support_radius == 3.0


def test_effective_support():
    assert effective_support(preset("bump", 2, radius=1.5)) == 1.5
    s = effective_support(preset("gaussian", 2, width=1.0, amplitudes=[1.0, 0.0]))
    assert 4.0 <= s <= 12.0
