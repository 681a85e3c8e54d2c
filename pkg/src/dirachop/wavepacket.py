"""Semiclassically scaled Gaussian wave packets and the upper-band initial spinor."""
from dataclasses import dataclass

import numpy as np

from .grid import Grid2


@dataclass(frozen=True)
class GaussianPacket:
    """``f(x) = (pi h)^(-1/2) exp(-|x-x0|^2/(2h) + i xi0.(x-x0)/h)``, unit L2 norm."""

    x0: tuple
    xi0: tuple
    h: float

    def __post_init__(self):
        object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))
        object.__setattr__(self, "xi0", tuple(float(v) for v in self.xi0))
        if not self.h > 0:
            raise ValueError("h must be positive")

    @property
    def width(self):
        return np.sqrt(self.h)


def _sqdist(y, c):
    y = np.asarray(y, dtype=float)
    return (y[..., 0] - c[0]) ** 2 + (y[..., 1] - c[1]) ** 2


def packet_eval(p, x):
    """Value of the packet at points ``x`` of shape ``(..., 2)``."""
    x = np.asarray(x, dtype=float)
    phase = (p.xi0[0] * (x[..., 0] - p.x0[0]) + p.xi0[1] * (x[..., 1] - p.x0[1])) / p.h
    return (np.pi * p.h) ** -0.5 * np.exp(-_sqdist(x, p.x0) / (2 * p.h) + 1j * phase)


def packet_fourier_h(p, xi):
    """h-scaled Fourier transform ``F^h f(xi) = h^-1 F f(xi/h)``."""
    xi = np.asarray(xi, dtype=float)
    phase = (p.x0[0] * xi[..., 0] + p.x0[1] * xi[..., 1]) / p.h
    return (np.pi * p.h) ** -0.5 * np.exp(-_sqdist(xi, p.xi0) / (2 * p.h) - 1j * phase)


def packet_fourier(p, k):
    """Unitary Fourier transform ``(2 pi)^-1 int f(x) e^{-i x.k} dx = h F^h f(h k)``."""
    k = np.asarray(k, dtype=float)
    return p.h * packet_fourier_h(p, p.h * k)


def packet_wigner(p, x, xi):
    """Wigner transform ``(pi h)^-2 exp(-|x-x0|^2/h - |xi-xi0|^2/h)``."""
    return (np.pi * p.h) ** -2 * np.exp(-_sqdist(x, p.x0) / p.h - _sqdist(xi, p.xi0) / p.h)


def upper_band_initial_spinor(p: GaussianPacket, grid: Grid2, normalize=True):
    """Initial spinor whose Fourier transform is ``F f(xi) chi_+(xi)`` on the grid.

    Uses the exact Fourier transform of the packet at the grid frequencies,
    ``u_j = 2 pi / |box| * sum_k F f(xi_k) chi_+(xi_k) exp(i xi_k . x_j)``.
    The zero frequency, where ``chi_+`` is undefined, gets a zero coefficient.
    Returns an array of shape ``(2, n1, n2)``; with ``normalize`` it is scaled
    to unit discrete norm.
    """
    xi = grid.frequencies
    knorm = grid.frequency_norm
    nz = knorm > 0
    fhat = np.where(nz, packet_fourier(p, xi), 0.0)
    unit = np.zeros(knorm.shape, dtype=complex)
    unit[nz] = (xi[nz, 0] + 1j * xi[nz, 1]) / knorm[nz]
    coeffs = np.stack([fhat, fhat * unit]) / np.sqrt(2.0)
    # exp(i xi_k . x_j) = exp(i xi_k . a) exp(i xi_k . (x_j - a))
    shift = np.exp(1j * (xi[..., 0] * grid.a[0] + xi[..., 1] * grid.a[1]))
    L1, L2 = grid.lengths
    field = (2 * np.pi / (L1 * L2)) * grid.n1 * grid.n2 * np.fft.ifft2(coeffs * shift, axes=(-2, -1))
    if normalize:
        field /= np.sqrt(np.sum(np.abs(field) ** 2) * grid.cell_area)
    return field
