"""Independent numerical oracles used only by the test suite.

Nothing here touches the library's solution pipeline: eigenvalues come from
a dense spectral discretization of the differential operator on a large
periodic box, and the closed forms below are classical results evaluated
directly.
"""

from __future__ import annotations

import numpy as np

_I_POW = (1 + 0j, 1j, -1 + 0j, -1j)


def fourier_diff_matrix(m: int, box: float) -> np.ndarray:
    """Dense spectral differentiation matrix on a periodic box [-box, box)."""
    length = 2.0 * box
    freqs = 2.0 * np.pi * np.fft.fftfreq(m, d=length / m)
    mult = 1j * freqs
    if m % 2 == 0:
        mult[m // 2] = 0.0
    eye = np.eye(m)
    return np.fft.ifft(mult[:, None] * np.fft.fft(eye, axis=0), axis=0)


def discretized_eigenvalues(cs, m: int = 512, box: float = 20.0) -> np.ndarray:
    """Eigenvalues of the order-N operator with the given coefficients,
    discretized spectrally on a periodic box.

    Exponentially accurate for eigenfunctions that decay well inside the
    box; the essential spectrum shows up as a cloud of discretization
    eigenvalues near the free dispersion curve.
    """
    order = cs.order
    grid = -box + 2.0 * box * np.arange(m) / m
    d = fourier_diff_matrix(m, box)
    h = _I_POW[(-order) % 4] * np.linalg.matrix_power(d, order)
    power = np.eye(m, dtype=complex)
    for k in range(order):
        vk = np.asarray(cs.values(grid))[k]
        if np.any(vk != 0):
            h = h + np.diag(vk) @ power
        power = power @ d
    return np.linalg.eigvals(h)


def eigenvalues_inside(cs, center: complex, radius: float, m: int = 512,
                       box: float = 20.0) -> np.ndarray:
    """Discretization eigenvalues inside a disc."""
    eigs = discretized_eigenvalues(cs, m=m, box=box)
    return eigs[np.abs(eigs - center) < radius]


def sech2_delta(z: complex, lam: float = -2.0) -> complex:
    """Closed-form normalized Wronskian for the second-order operator with
    the single reflectionless well lam / cosh(x)**2 at lam = -2."""
    if lam != -2.0:
        raise ValueError("closed form implemented for lam = -2 only")
    kappa = np.sqrt(-complex(z))
    if kappa.real < 0:
        kappa = -kappa
    return (kappa - 1.0) / (kappa + 1.0)


def sech2_trace(z: complex, lam: float = -2.0) -> complex:
    """Closed-form trace of the resolvent difference for the same operator:
    minus the logarithmic derivative of the closed-form Wronskian ratio."""
    if lam != -2.0:
        raise ValueError("closed form implemented for lam = -2 only")
    kappa = np.sqrt(-complex(z))
    if kappa.real < 0:
        kappa = -kappa
    return 1.0 / (kappa * (kappa - 1.0) * (kappa + 1.0))


def free_green_order2(kappa: float, x, y):
    """Classical free resolvent kernel of the second-order operator at
    spectral parameter -kappa**2."""
    return np.exp(-kappa * np.abs(np.asarray(x) - np.asarray(y))) / (2.0 * kappa)
