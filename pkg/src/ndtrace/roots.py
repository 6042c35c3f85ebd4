"""Characteristic roots and spectral data of the constant-coefficient part.

For order N and spectral parameter z the roots solve ``zeta**N = i**N * z``.
They are split into the n roots with positive real part (solutions growing
to the right) and the N - n roots with negative real part, each group sorted
by descending real part with ties broken by ascending imaginary part.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import pi

import numpy as np

from .errors import SpectralPointError

_I_POW = (1 + 0j, 1j, -1 + 0j, -1j)


def i_pow(n: int) -> complex:
    """i**n, computed exactly from the period-4 table."""
    return _I_POW[n % 4]


@dataclass(frozen=True)
class RootSystem:
    """Roots, eigenvectors, dual basis and bookkeeping for one (N, z) pair.

    ``roots[j]`` for j < n have positive real part.  ``eigvecs[:, j]`` is the
    power vector (1, zeta_j, ..., zeta_j**(N-1)); ``dualvecs[:, j]`` is the
    dual vector normalized so <p_j, p_k*> = delta_jk under the complex inner
    product.  ``inv_eigvecs`` caches the inverse of the eigenvector matrix,
    whose rows are the conjugated dual vectors.
    """

    order: int
    z: complex
    roots: np.ndarray
    n: int
    eigvecs: np.ndarray
    dualvecs: np.ndarray
    inv_eigvecs: np.ndarray
    vandermonde_det: complex

    @property
    def kappa(self) -> np.ndarray:
        """Real parts of the roots."""
        return self.roots.real

    @property
    def rho_plus(self) -> float:
        """Slowest decay rate of the right-growing modes (min Re over j < n)."""
        if self.n == 0:
            return np.inf
        return float(self.roots.real[: self.n].min())

    @property
    def rho_minus(self) -> float:
        """Slowest decay rate of the left-growing modes."""
        if self.n == self.order:
            return np.inf
        return float(np.abs(self.roots.real[self.n:]).min())

    @property
    def lagrange_weights(self) -> np.ndarray:
        """c_j = 1 / prod_{k != j} (zeta_j - zeta_k), the last column of the
        inverse eigenvector matrix."""
        return self.inv_eigvecs[:, -1].copy()

    def permuted(self, sigma) -> "RootSystem":
        """Renumber the roots by the permutation ``sigma`` (must keep each
        sign group intact, so the split index n is unchanged)."""
        sigma = np.asarray(sigma, dtype=int)
        if sorted(sigma.tolist()) != list(range(self.order)):
            raise ValueError("not a permutation")
        if np.any((sigma < self.n) != (np.arange(self.order) < self.n)):
            raise ValueError("permutation must preserve the sign groups")
        roots = self.roots[sigma]
        eig = self.eigvecs[:, sigma]
        dual = self.dualvecs[:, sigma]
        inv = self.inv_eigvecs[sigma, :]
        vdm = _vandermonde_det(roots)
        return replace(self, roots=roots, eigvecs=eig, dualvecs=dual,
                       inv_eigvecs=inv, vandermonde_det=vdm)


def _vandermonde_det(roots: np.ndarray) -> complex:
    det = 1.0 + 0j
    m = len(roots)
    for j in range(m):
        for k in range(j + 1, m):
            det *= roots[k] - roots[j]
    return complex(det)


def _expected_split(order: int, z: complex) -> int:
    if order % 2 == 0:
        return order // 2
    return (order - 1) // 2 if z.imag > 0 else (order + 1) // 2


def compute_roots(order: int, z: complex, re_floor: float = 1e-8) -> RootSystem:
    """Roots of zeta**N = i**N z with the sign-split ordering.

    Raises SpectralPointError when z violates the admissible region (the
    half-line [0, inf) for even N, the real axis for odd N) or when some
    root has |Re zeta| below ``re_floor * |zeta|``.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    z = complex(z)
    if z == 0:
        raise SpectralPointError("z = 0 lies on the essential spectrum")
    if order % 2 == 0 and z.imag == 0.0 and z.real >= 0.0:
        raise SpectralPointError(f"z = {z} lies on [0, inf)")
    if order % 2 == 1 and z.imag == 0.0:
        raise SpectralPointError(f"z = {z} lies on the real axis")

    w = i_pow(order) * z
    radius = abs(z) ** (1.0 / order)
    base = np.angle(w)
    args = (base + 2.0 * pi * np.arange(order)) / order
    zetas = radius * np.exp(1j * args)

    floor = re_floor * radius
    if np.any(np.abs(zetas.real) < floor):
        raise SpectralPointError(
            f"z = {z}: a characteristic root has |Re zeta| < {floor:.3e}"
        )

    pos = zetas[zetas.real > 0]
    neg = zetas[zetas.real < 0]
    # descending Re with ties (relative to |zeta|) broken by ascending Im;
    # the rounding keeps the order deterministic when equal real parts only
    # differ by floating-point noise
    def sort_group(group):
        key = -np.round(group.real / radius, 9)
        return group[np.lexsort((group.imag, key))]

    pos = sort_group(pos)
    neg = sort_group(neg)
    roots = np.concatenate([pos, neg])
    n = len(pos)
    if n != _expected_split(order, z):
        raise SpectralPointError(
            f"z = {z}: root split {n} does not match the admissible-region count"
        )

    eigvecs = np.vander(roots, order, increasing=True).T.astype(complex)
    inv = np.linalg.inv(eigvecs)
    dualvecs = inv.conj().T
    return RootSystem(order=order, z=z, roots=roots, n=n, eigvecs=eigvecs,
                      dualvecs=dualvecs, inv_eigvecs=inv,
                      vandermonde_det=_vandermonde_det(roots))


def projection(rs: RootSystem, j: int) -> np.ndarray:
    """Rank-one spectral projection onto the j-th eigenvector."""
    if not 0 <= j < rs.order:
        raise IndexError(f"index {j} out of range for order {rs.order}")
    return np.outer(rs.eigvecs[:, j], rs.inv_eigvecs[j, :])


def l0_matrix(rs: RootSystem) -> np.ndarray:
    """Companion matrix: superdiagonal ones, i**N z in the lower-left corner."""
    order = rs.order
    m = np.zeros((order, order), dtype=complex)
    for k in range(order - 1):
        m[k, k + 1] = 1.0
    m[order - 1, 0] = i_pow(order) * rs.z
    return m
