"""Band-resolved classical flows and detection of hopping-surface crossings.

The flow of band ``s = +1/-1`` is ``x' = s xi/|xi|``, ``xi' = -grad U(x)``.
Crossings are points of the hopping surface ``xi . grad U(x) = 0`` reached
with a strict sign change of that product along the trajectory.
"""
from dataclasses import dataclass, field

import numpy as np

from .core_math import XI_TOL, lz_rate
from .errors import ConvergenceError, DegenerateMomentumError
from .potentials import Potential


def _sign(band):
    if isinstance(band, np.ndarray):
        if not np.all(np.abs(band) == 1):
            raise ValueError("band entries must be +1 or -1")
        return band.astype(float)
    if band in (1, "+"):
        return 1
    if band in (-1, "-"):
        return -1
    raise ValueError(f"band must be +1 or -1, got {band!r}")


@dataclass(frozen=True)
class PhasePoint:
    x: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=float))


@dataclass(frozen=True)
class CrossingEvent:
    t: float
    point: PhasePoint
    lz_probability: float


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    xi: np.ndarray
    events: list = field(default_factory=list)

    @property
    def end(self):
        return PhasePoint(self.x[-1], self.xi[-1])


def flow_rhs(band, p: PhasePoint, potential: Potential):
    """Right-hand side ``(dx/dt, dxi/dt)`` of the band flow."""
    s = _sign(band)
    norm = np.hypot(p.xi[..., 0], p.xi[..., 1])
    if np.any(norm <= XI_TOL):
        raise DegenerateMomentumError("band flow is singular at xi = 0")
    return s * p.xi / norm[..., None], -potential.gradient(p.x)


def analytic_flow_free(band, p: PhasePoint, t):
    """Flow for ``U = 0``: straight unit-speed motion along ``s xi/|xi|``."""
    s = _sign(band)
    norm = np.hypot(p.xi[..., 0], p.xi[..., 1])
    if np.any(norm <= XI_TOL):
        raise DegenerateMomentumError("free flow direction undefined at xi = 0")
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    return PhasePoint(p.x + (s * t)[..., None] * p.xi / norm[..., None], np.broadcast_to(p.xi, p.x.shape).copy())


def analytic_flow_linear(band, p: PhasePoint, t, alpha):
    """Closed-form flow for ``U = alpha x1``, valid through ``xi = 0``.

    ``xi(t) = xi - alpha t e1``;
    ``x1(t) = x1 - s (|xi(t)| - |xi|)/alpha``;
    ``x2(t) = x2 + s (xi2/alpha) (asinh(xi1/|xi2|) - asinh(xi1(t)/|xi2|))``.
    """
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    s = _sign(band)
    x, xi = p.x, p.xi
    t = np.asarray(t, dtype=float)
    xi1_t = xi[..., 0] - alpha * t
    xi2 = xi[..., 1]
    n0 = np.hypot(xi[..., 0], xi2)
    nt = np.hypot(xi1_t, xi2)
    x1 = x[..., 0] - s * (nt - n0) / alpha
    a2 = np.abs(xi2)
    safe = np.where(a2 > 0, a2, 1.0)
    dx2 = np.where(a2 > 0, (xi2 / alpha) * (np.arcsinh(xi[..., 0] / safe) - np.arcsinh(xi1_t / safe)), 0.0)
    x2 = x[..., 1] + s * dx2
    return PhasePoint(np.stack([x1, x2], axis=-1), np.stack([xi1_t, np.broadcast_to(xi2, xi1_t.shape)], axis=-1))


def _rk4(band, x, xi, dt, potential):
    def f(x, xi):
        return flow_rhs(band, PhasePoint(x, xi), potential)

    k1x, k1p = f(x, xi)
    k2x, k2p = f(x + 0.5 * dt * k1x, xi + 0.5 * dt * k1p)
    k3x, k3p = f(x + 0.5 * dt * k2x, xi + 0.5 * dt * k2p)
    k4x, k4p = f(x + dt * k3x, xi + dt * k3p)
    return (x + dt / 6 * (k1x + 2 * k2x + 2 * k3x + k4x),
            xi + dt / 6 * (k1p + 2 * k2p + 2 * k3p + k4p))


def _gap_derivative(x, xi, potential):
    return float(np.dot(xi, potential.gradient(x)))


def _linear_events(band, p, potential, t_f, h):
    alpha = potential.alpha
    t_star = p.xi[0] / alpha
    if not 0 < t_star < t_f:
        return []
    q = analytic_flow_linear(band, p, t_star, alpha)
    xi_star = np.array([0.0, q.xi[1]])
    rate = float(lz_rate(q.x, xi_star, potential.gradient(q.x), h)) if h else None
    return [CrossingEvent(float(t_star), PhasePoint(q.x, xi_star), rate)]


def integrate_with_crossings(band, p: PhasePoint, potential: Potential, t_f, h=None,
                             n_steps=2000, tol_event=1e-10, method="auto", max_bisect=60):
    """Integrate a band flow on ``[0, t_f]`` and report hopping-surface crossings.

    ``method="auto"`` uses the closed forms for the ``zero`` and ``linear``
    potentials and classical RK4 with ``n_steps`` fixed steps otherwise
    (``method="rk4"`` forces the numerical path). Each sign change of
    ``g = xi . grad U(x)`` is refined by bisection on a single RK4 sub-step to
    ``|g| <= tol_event * max(1, |xi|)``. The trajectory stays on ``band``.
    When ``h`` is given, each event carries its Landau-Zener probability.
    """
    s = _sign(band)
    p = PhasePoint(p.x, p.xi)
    ts = np.linspace(0.0, t_f, n_steps + 1)
    if method == "auto" and potential.kind in ("zero", "linear"):
        if potential.kind == "zero":
            q = analytic_flow_free(s, p, ts)
            return Trajectory(ts, q.x, q.xi, [])
        q = analytic_flow_linear(s, PhasePoint(p.x[None], p.xi[None]), ts, potential.alpha)
        return Trajectory(ts, q.x, q.xi, _linear_events(s, p, potential, t_f, h))

    dt = t_f / n_steps
    xs = np.empty((n_steps + 1, 2))
    xis = np.empty((n_steps + 1, 2))
    xs[0], xis[0] = p.x, p.xi
    events = []
    g_prev = _gap_derivative(p.x, p.xi, potential)
    for n in range(n_steps):
        x0, xi0 = xs[n], xis[n]
        x1, xi1 = _rk4(s, x0, xi0, dt, potential)
        g_new = _gap_derivative(x1, xi1, potential)
        scale = tol_event * max(1.0, float(np.hypot(*xi1)))
        # a start on the surface (|g| tiny) is not a crossing
        if abs(g_prev) > scale and g_prev * g_new < 0:
            lo, hi = 0.0, dt
            for _ in range(max_bisect):
                mid = 0.5 * (lo + hi)
                xm, xim = _rk4(s, x0, xi0, mid, potential)
                gm = _gap_derivative(xm, xim, potential)
                if abs(gm) <= scale:
                    break
                if gm * g_prev < 0:
                    hi = mid
                else:
                    lo = mid
            else:
                raise ConvergenceError("crossing bisection did not converge")
            rate = float(lz_rate(xm, xim, potential.gradient(xm), h)) if h else None
            events.append(CrossingEvent(ts[n] + mid, PhasePoint(xm, xim), rate))
        xs[n + 1], xis[n + 1] = x1, xi1
        if abs(g_new) > scale:
            g_prev = g_new
    return Trajectory(ts, xs, xis, events)
