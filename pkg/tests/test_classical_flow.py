import numpy as np
import pytest
from hypothesis import given, strategies as st

from dirachop.classical_flow import (PhasePoint, analytic_flow_free, analytic_flow_linear, flow_rhs,
                                     integrate_with_crossings)
from dirachop.core_math import lz_rate
from dirachop.errors import DegenerateMomentumError
from dirachop.potentials import Potential


def linear_custom(alpha):
    return Potential.custom(lambda x: alpha * x[..., 0],
                            lambda x: np.stack([np.full(x.shape[:-1], alpha), np.zeros(x.shape[:-1])], axis=-1))


def smooth_custom():
    # a smooth bump in x1 plus a weak transverse tilt
    return Potential.custom(lambda x: np.tanh(4 * x[..., 0]) + 0.3 * x[..., 1],
                            lambda x: np.stack([4 / np.cosh(4 * x[..., 0]) ** 2,
                                                np.full(x.shape[:-1], 0.3)], axis=-1))


@pytest.mark.parametrize("band", [1, -1])
@pytest.mark.parametrize("xi", [(1.0, 0.2), (1.0, 0.01), (-0.7, 0.5), (0.3, -0.8)])
def test_rk4_matches_linear_closed_form(band, xi):
    p = PhasePoint((0.1, -0.2), xi)
    pot = linear_custom(15.0)
    num = integrate_with_crossings(band, p, pot, 0.13, n_steps=4000, method="rk4")
    ref = analytic_flow_linear(band, p, num.t[-1], 15.0)
    assert np.max(np.abs(num.end.x - ref.x)) <= 1e-6
    assert np.max(np.abs(num.end.xi - ref.xi)) <= 1e-6


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.05, 2), st.sampled_from([1, -1]), st.floats(0, 0.3))
def test_linear_flow_solves_the_ode(x1, x2, xi2, band, t):
    """Finite-difference check of the closed form against the flow equations."""
    p = PhasePoint((x1, x2), (1.0, xi2))
    pot = Potential.linear(3.0)
    q = analytic_flow_linear(band, p, t, 3.0)
    d = 1e-6
    qp = analytic_flow_linear(band, p, t + d, 3.0)
    qm = analytic_flow_linear(band, p, t - d, 3.0)
    vx, vxi = flow_rhs(band, q, pot)
    assert np.allclose((qp.x - qm.x) / (2 * d), vx, atol=1e-6)
    assert np.allclose((qp.xi - qm.xi) / (2 * d), vxi, atol=1e-6)


@pytest.mark.parametrize("band", [1, -1])
def test_energy_conserved_along_rk4(band):
    pot = smooth_custom()
    p = PhasePoint((-0.5, 0.0), (1.0, 0.4))
    tr = integrate_with_crossings(band, p, pot, 1.0, n_steps=2000, method="rk4")
    energy = band * np.hypot(tr.xi[:, 0], tr.xi[:, 1]) + pot.value(tr.x)
    assert np.max(np.abs(energy - energy[0])) <= 1e-9


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-2, 2), st.floats(-2, 2), st.floats(-1, 1))
def test_free_flow_is_straight_unit_speed(x1, x2, k1, k2, t):
    if np.hypot(k1, k2) < 1e-3:
        return
    for band in (1, -1):
        q = analytic_flow_free(band, PhasePoint((x1, x2), (k1, k2)), t)
        assert np.hypot(*(q.x - (x1, x2))) == pytest.approx(abs(t), abs=1e-12)
        assert np.allclose(q.xi, (k1, k2))


def test_linear_event_time_and_rate():
    h = 1e-3
    p = PhasePoint((0.0, 0.0), (1.0, 0.01))
    tr = integrate_with_crossings(1, p, Potential.linear(15.0), 0.13, h=h)
    assert len(tr.events) == 1
    ev = tr.events[0]
    assert ev.t == pytest.approx(1 / 15, rel=1e-12)
    assert ev.point.xi[0] == 0.0
    assert ev.lz_probability == pytest.approx(np.exp(-np.pi * 1e-4 / (h * 15)), rel=1e-12)


def test_numerical_events_agree_with_closed_form():
    h = 1e-3
    p = PhasePoint((0.0, 0.0), (1.0, 0.05))
    ana = integrate_with_crossings(1, p, Potential.linear(15.0), 0.13, h=h)
    num = integrate_with_crossings(1, p, linear_custom(15.0), 0.13, h=h, method="rk4")
    assert len(num.events) == 1
    assert num.events[0].t == pytest.approx(ana.events[0].t, abs=1e-9)
    assert num.events[0].lz_probability == pytest.approx(ana.events[0].lz_probability, rel=1e-6)
    assert np.allclose(num.events[0].point.x, ana.events[0].point.x, atol=1e-8)


def test_no_event_when_moving_away():
    p = PhasePoint((0.0, 0.0), (-1.0, 0.05))
    assert integrate_with_crossings(1, p, Potential.linear(15.0), 0.13).events == []
    assert integrate_with_crossings(1, p, linear_custom(15.0), 0.13, method="rk4").events == []


def test_start_on_surface_is_not_an_event():
    p = PhasePoint((0.0, 0.0), (0.0, 0.5))
    assert integrate_with_crossings(1, p, linear_custom(15.0), 0.05, method="rk4").events == []


def test_smooth_potential_event_is_a_local_gap_minimum():
    pot = smooth_custom()
    p = PhasePoint((-0.5, 0.0), (1.0, 0.05))
    tr = integrate_with_crossings(1, p, pot, 1.0, h=1e-2, n_steps=2000, method="rk4")
    assert len(tr.events) >= 1
    ev = tr.events[0]
    assert abs(np.dot(ev.point.xi, pot.gradient(ev.point.x))) <= 1e-9
    ref = lz_rate(ev.point.x, ev.point.xi, pot.gradient(ev.point.x), 1e-2)
    assert ev.lz_probability == pytest.approx(float(ref))


def test_degenerate_momentum_raises():
    with pytest.raises(DegenerateMomentumError):
        flow_rhs(1, PhasePoint((0, 0), (0, 0)), Potential.linear(1.0))
    with pytest.raises(DegenerateMomentumError):
        analytic_flow_free(1, PhasePoint((0, 0), (0, 0)), 1.0)


def test_linear_closed_form_passes_through_zero_momentum():
    p = PhasePoint((0.0, 0.0), (1.0, 0.0))
    q = analytic_flow_linear(1, p, 2 / 15, 15.0)
    assert np.allclose(q.xi, (-1.0, 0.0))
    assert np.allclose(q.x, (0.0, 0.0))


def test_bad_band_rejected():
    with pytest.raises(ValueError):
        flow_rhs(0, PhasePoint((0, 0), (1, 0)), Potential.zero())
