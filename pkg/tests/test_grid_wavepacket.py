import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import dblquad

from dirachop.core_math import band_projector
from dirachop.grid import Grid2, dft_forward, dft_inverse, discrete_norm
from dirachop.wavepacket import (GaussianPacket, packet_eval, packet_fourier, packet_fourier_h, packet_wigner,
                                 upper_band_initial_spinor)


@pytest.fixture
def grid():
    return Grid2((-1.0, -0.5), (1.2, 0.7), 16, 12)


def test_grid_rejects_odd_or_empty():
    with pytest.raises(ValueError):
        Grid2((0, 0), (1, 1), 15, 4)
    with pytest.raises(ValueError):
        Grid2((0, 0), (0, 1), 4, 4)


def test_frequencies_layout(grid):
    xi = grid.frequencies
    L1, L2 = grid.lengths
    assert xi[1, 0, 0] == pytest.approx(2 * np.pi / L1)
    assert xi[grid.n1 // 2, 0, 0] == pytest.approx(-np.pi * grid.n1 / L1)
    assert xi[0, -1, 1] == pytest.approx(-2 * np.pi / L2)


def test_dft_of_constant(grid):
    c = 1.5 - 0.5j
    coeffs = dft_forward(np.full(grid.shape, c), grid)
    assert coeffs[0, 0] == pytest.approx(grid.n1 * grid.n2 * c)
    coeffs[0, 0] = 0
    assert np.max(np.abs(coeffs)) < 1e-12


@pytest.mark.parametrize("k", [(1, 0), (3, -2), (-8, 5)])
def test_dft_of_grid_plane_wave(grid, k):
    xi = grid.frequencies[k[0] % grid.n1, k[1] % grid.n2]
    x = grid.mesh
    f = np.exp(1j * ((x[..., 0] - grid.a[0]) * xi[0] + (x[..., 1] - grid.a[1]) * xi[1]))
    coeffs = dft_forward(f, grid)
    expected = np.zeros(grid.shape, complex)
    expected[k[0] % grid.n1, k[1] % grid.n2] = grid.n1 * grid.n2
    assert np.max(np.abs(coeffs - expected)) < 1e-10


def test_dft_matches_definition(grid, rng):
    f = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    x = grid.mesh - np.array(grid.a)
    xi = grid.frequencies
    k = (3, 7)
    direct = np.sum(f * np.exp(-1j * (xi[k][0] * x[..., 0] + xi[k][1] * x[..., 1])))
    assert dft_forward(f, grid)[k] == pytest.approx(direct, rel=1e-12)


@given(st.integers(0, 2 ** 31 - 1))
def test_dft_roundtrip(seed):
    g = Grid2((-1.0, -0.5), (1.2, 0.7), 16, 12)
    r = np.random.default_rng(seed)
    f = r.standard_normal((2,) + g.shape) + 1j * r.standard_normal((2,) + g.shape)
    back = dft_inverse(dft_forward(f, g), g)
    assert np.linalg.norm(back - f) <= 1e-13 * np.linalg.norm(f)


def test_dft_shape_mismatch(grid):
    with pytest.raises(ValueError):
        dft_forward(np.zeros((3, 3)), grid)


def test_packet_normalised_in_both_spaces():
    p = GaussianPacket((0.1, -0.2), (1.0, 0.5), 0.05)
    s = 6 * np.sqrt(p.h)
    nx, _ = dblquad(lambda b, a: abs(packet_eval(p, np.array([a, b]))) ** 2, p.x0[0] - s, p.x0[0] + s,
                    p.x0[1] - s, p.x0[1] + s)
    nk, _ = dblquad(lambda b, a: abs(packet_fourier_h(p, np.array([a, b]))) ** 2, p.xi0[0] - s, p.xi0[0] + s,
                    p.xi0[1] - s, p.xi0[1] + s)
    assert nx == pytest.approx(1, abs=1e-8)
    assert nk == pytest.approx(1, abs=1e-8)


def test_packet_fourier_is_unitary_transform():
    """``F f(k) = (2 pi)^-1 int f(x) exp(-i x.k) dx`` checked by quadrature at one k."""
    p = GaussianPacket((0.1, -0.05), (0.4, 0.2), 0.02)
    k = np.array([0.4, 0.2]) / p.h + np.array([3.0, -2.0])
    s = 7 * np.sqrt(p.h)

    def part(fn):
        val, _ = dblquad(lambda b, a: fn(packet_eval(p, np.array([a, b])) * np.exp(-1j * (a * k[0] + b * k[1]))),
                         p.x0[0] - s, p.x0[0] + s, p.x0[1] - s, p.x0[1] + s, epsabs=1e-12)
        return val

    ref = (part(np.real) + 1j * part(np.imag)) / (2 * np.pi)
    assert packet_fourier(p, k) == pytest.approx(ref, abs=1e-8)


def test_wigner_peak_and_mass():
    p = GaussianPacket((0.0, 0.0), (1.0, 0.0), 1e-3)
    assert packet_wigner(p, [0.0, 0.0], [1.0, 0.0]) == pytest.approx((np.pi * 1e-3) ** -2)
    # product of the two marginals' normalisations
    assert (np.pi * p.h) ** 2 * packet_wigner(p, [0.0, 0.0], [1.0, 0.0]) == pytest.approx(1.0)


def test_initial_spinor_is_upper_band():
    h = 1e-3
    s = np.sqrt(h)
    g = Grid2.centered(11 * s, 5 * s, 64, 32)
    p = GaussianPacket((-5 * s, 0), (1, 0), h)
    u = upper_band_initial_spinor(p, g)
    assert discrete_norm(u, g) == pytest.approx(1.0, abs=1e-13)
    coeffs = np.fft.fft2(u, axes=(-2, -1))
    xi = g.frequencies
    nz = g.frequency_norm > 0
    Pm = band_projector(-1, xi[nz])
    lower = np.einsum("nij,jn->in", Pm, coeffs[:, nz])
    assert np.max(np.abs(lower)) <= 1e-12 * np.max(np.abs(coeffs))
    assert abs(coeffs[0, 0, 0]) + abs(coeffs[1, 0, 0]) < 1e-10 * np.max(np.abs(coeffs))


def test_initial_spinor_unnormalised_is_close_to_unit():
    h = 1e-2
    s = np.sqrt(h)
    g = Grid2.centered(11 * s, 5 * s, 128, 64)
    u = upper_band_initial_spinor(GaussianPacket((-5 * s, 0), (1, 0), h), g, normalize=False)
    assert discrete_norm(u, g) == pytest.approx(1.0, abs=1e-6)
