"""Periodic tensor grids and the discrete Fourier transform used by the spectral solver."""
from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class Grid2:
    """Uniform periodic grid on ``[a1, b1) x [a2, b2)`` with ``n1 x n2`` nodes.

    Nodes are ``x_j = a + (j1 dx1, j2 dx2)``. Frequencies
    ``xi_k = 2 pi (k1/(b1-a1), k2/(b2-a2))`` are stored in the standard FFT
    layout, ``k_r`` in ``[-n_r/2, n_r/2)`` wrapped modulo ``n_r``.
    """

    a: tuple
    b: tuple
    n1: int
    n2: int

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        for n in (self.n1, self.n2):
            if n <= 0 or n % 2:
                raise ValueError(f"grid sizes must be even positive integers, got {n}")
        if not (self.b[0] > self.a[0] and self.b[1] > self.a[1]):
            raise ValueError("grid box must satisfy b > a componentwise")

    @classmethod
    def centered(cls, half1, half2, n1, n2):
        return cls((-half1, -half2), (half1, half2), n1, n2)

    @property
    def shape(self):
        return (self.n1, self.n2)

    @property
    def lengths(self):
        return (self.b[0] - self.a[0], self.b[1] - self.a[1])

    @property
    def dx(self):
        L1, L2 = self.lengths
        return (L1 / self.n1, L2 / self.n2)

    @property
    def cell_area(self):
        return self.dx[0] * self.dx[1]

    @cached_property
    def nodes(self):
        x1 = self.a[0] + self.dx[0] * np.arange(self.n1)
        x2 = self.a[1] + self.dx[1] * np.arange(self.n2)
        return x1, x2

    @cached_property
    def mesh(self):
        """Node coordinates, shape ``(n1, n2, 2)``."""
        x1, x2 = self.nodes
        X1, X2 = np.meshgrid(x1, x2, indexing="ij")
        return np.stack([X1, X2], axis=-1)

    @cached_property
    def frequencies(self):
        """Grid frequencies ``xi_k``, shape ``(n1, n2, 2)`` in FFT order."""
        L1, L2 = self.lengths
        k1 = 2 * np.pi * np.fft.fftfreq(self.n1, d=L1 / self.n1)
        k2 = 2 * np.pi * np.fft.fftfreq(self.n2, d=L2 / self.n2)
        K1, K2 = np.meshgrid(k1, k2, indexing="ij")
        return np.stack([K1, K2], axis=-1)

    @cached_property
    def frequency_norm(self):
        xi = self.frequencies
        return np.hypot(xi[..., 0], xi[..., 1])


def _check_shape(field, grid):
    if field.shape[-2:] != grid.shape:
        raise ValueError(f"field shape {field.shape} does not match grid {grid.shape}")


def dft_forward(field, grid):
    """``f_hat_k = sum_j f_j exp(-i xi_k . (x_j - a))`` over the two trailing axes."""
    field = np.asarray(field)
    _check_shape(field, grid)
    return np.fft.fft2(field, axes=(-2, -1))


def dft_inverse(coeffs, grid):
    """Inverse of :func:`dft_forward` (carries the ``1/(n1 n2)`` factor)."""
    coeffs = np.asarray(coeffs)
    _check_shape(coeffs, grid)
    return np.fft.ifft2(coeffs, axes=(-2, -1))


def discrete_norm(field, grid):
    """``sqrt(sum_j |u_j|^2 dx1 dx2)`` of a spinor field of shape ``(2, n1, n2)``."""
    return float(np.sqrt(np.sum(np.abs(field) ** 2) * grid.cell_area))
