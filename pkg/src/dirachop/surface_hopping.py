"""Lagrangian surface hopping with Landau-Zener weight splitting.

Particles carry a position, a momentum, a band label and a weight. They follow
the classical flow of their band; each time a trajectory meets the hopping
surface it splits into a particle that keeps ``(1 - T) w`` on its band and a
new particle on the other band carrying ``T w``. Populations are weighted sums
over uniform phase-space cells.

Two forms are provided: the full 4D phase space and a reduced ``(x1, xi1)``
form where ``xi2`` is a fixed parameter (linear potential only).
"""
import csv
from dataclasses import dataclass, field

import numpy as np

from .classical_flow import PhasePoint, analytic_flow_free, analytic_flow_linear, integrate_with_crossings
from .errors import ConfigError, ConvergenceError
from .potentials import Potential
from .series import PopulationSeries, fmt
from .wavepacket import GaussianPacket

PRUNE_MASS = 1e-18


@dataclass(frozen=True)
class SamplingConfig:
    J: int = 16
    K: int = 16
    tol: float = 1e-6
    tol_x: float = 1e-9
    tol_xi: float = 1e-9
    half_width: float = 5.0  # in units of sqrt(h)

    def __post_init__(self):
        if self.J < 2 or self.K < 2:
            raise ConfigError("J and K must be at least 2")
        for name in ("tol", "tol_x", "tol_xi"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ConfigError(f"{name} must lie in (0, 1), got {v}")
        if not self.half_width > 0:
            raise ConfigError("half_width must be positive")


@dataclass
class Ensemble:
    """Particles in 4D phase space; ``x``, ``xi`` have shape ``(M, 2)``."""

    x: np.ndarray
    xi: np.ndarray
    band: np.ndarray
    weight: np.ndarray
    cell_volume: float
    n_events: int = 0

    def __len__(self):
        return len(self.weight)

    def mass(self):
        return float(np.sum(self.weight) * self.cell_volume)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x1", "x2", "xi1", "xi2", "band", "weight"])
            for x, xi, b, wt in zip(self.x, self.xi, self.band, self.weight):
                w.writerow([fmt(x[0]), fmt(x[1]), fmt(xi[0]), fmt(xi[1]), int(b), fmt(wt)])


@dataclass
class ReducedEnsemble:
    """Particles in the ``(x1, xi1)`` plane for a fixed transverse momentum."""

    x1: np.ndarray
    xi1: np.ndarray
    band: np.ndarray
    weight: np.ndarray
    cell_volume: float

    def __len__(self):
        return len(self.weight)

    def mass(self):
        return float(np.sum(self.weight) * self.cell_volume)


def _minimal_count(sorted_density, cell, target, what):
    acc = np.cumsum(sorted_density) * cell
    hit = np.nonzero(acc >= target)[0]
    if hit.size == 0:
        raise ConvergenceError(f"{what}: grid mass {acc[-1]:.12g} never reaches {target:.12g}")
    return int(hit[0]) + 1


def sampling_nodes(center, half, n):
    """``n`` equispaced nodes spanning ``[center - half, center + half]``, endpoints included."""
    return center + np.linspace(-half, half, n)


def initial_sampling_4d(packet: GaussianPacket, cfg: SamplingConfig = SamplingConfig()):
    h = packet.h
    half = cfg.half_width * np.sqrt(h)
    x0, xi0 = np.array(packet.x0), np.array(packet.xi0)

    def axis_points(center, n):
        u = np.linspace(-half, half, n)
        a, b = np.meshgrid(u, u, indexing="ij")
        return center + np.stack([a.ravel(), b.ravel()], axis=1), u[1] - u[0]

    X, dx = axis_points(x0, cfg.J)
    Q, dq = axis_points(xi0, cfg.K)
    rho_x = np.exp(-np.sum((X - x0) ** 2, axis=1) / h) / (np.pi * h)
    rho_q = np.exp(-np.sum((Q - xi0) ** 2, axis=1) / h) / (np.pi * h)
    ox = np.argsort(-rho_x, kind="stable")
    oq = np.argsort(-rho_q, kind="stable")
    nx = _minimal_count(rho_x[ox], dx * dx, 1 - cfg.tol_x, "position sampling")
    nq = _minimal_count(rho_q[oq], dq * dq, 1 - cfg.tol_xi, "momentum sampling")
    ix, iq = ox[:nx], oq[:nq]

    W = rho_x[ix][:, None] * rho_q[iq][None, :]
    W = W.ravel()
    order = np.argsort(-W, kind="stable")
    cell = (dx * dq) ** 2
    n = _minimal_count(W[order], cell, 1 - cfg.tol, "phase-space sampling")
    order = order[:n]
    px, pq = np.divmod(order, nq)
    return Ensemble(
        x=X[ix[px]].copy(),
        xi=Q[iq[pq]].copy(),
        band=np.ones(n, dtype=np.int8),
        weight=W[order].copy(),
        cell_volume=cell,
    )


def reduced_wigner(packet: GaussianPacket, x1, xi1):
    """Initial upper-band density in the reduced plane, ``(pi h)^-1 exp(-(dx^2 + dxi^2)/h)``."""
    h = packet.h
    return np.exp(-((x1 - packet.x0[0]) ** 2 + (xi1 - packet.xi0[0]) ** 2) / h) / (np.pi * h)


def initial_sampling_2d(packet: GaussianPacket, cfg: SamplingConfig = SamplingConfig(J=100, K=100, tol=1e-9)):
    h = packet.h
    half = cfg.half_width * np.sqrt(h)
    u = sampling_nodes(packet.x0[0], half, cfg.J)
    v = sampling_nodes(packet.xi0[0], half, cfg.K)
    X1, XI1 = np.meshgrid(u, v, indexing="ij")
    X1, XI1 = X1.ravel(), XI1.ravel()
    W = reduced_wigner(packet, X1, XI1)
    cell = (u[1] - u[0]) * (v[1] - v[0])
    order = np.argsort(-W, kind="stable")
    n = _minimal_count(W[order], cell, 1 - cfg.tol, "reduced sampling")
    order = order[:n]
    return ReducedEnsemble(X1[order], XI1[order], np.ones(n, dtype=np.int8), W[order], cell)


def _lz_linear(xi2, h, alpha):
    return np.exp(-np.pi * xi2 ** 2 / (h * abs(alpha)))


def _transport_linear(ens, alpha, rate, t_f):
    """Closed-form transport for ``U = alpha x1``; ``rate`` is the per-particle hop probability."""
    x, xi, band, w = ens.x, ens.xi, ens.band.astype(int), ens.weight
    t_star = xi[:, 0] / alpha
    hop = (t_star > 0) & (t_star < t_f)
    T = np.where(hop, rate, 0.0)

    end = analytic_flow_linear(band, PhasePoint(x, xi), np.full(len(w), t_f), alpha)
    ts = np.where(hop, t_star, 0.0)
    star = analytic_flow_linear(band, PhasePoint(x, xi), ts, alpha)
    xi_star = np.stack([np.zeros(len(w)), xi[:, 1]], axis=1)
    kid = analytic_flow_linear(-band, PhasePoint(star.x, xi_star), t_f - ts, alpha)

    idx = np.nonzero(hop)[0]
    x_all = np.concatenate([end.x, kid.x[idx]])
    xi_all = np.concatenate([end.xi, kid.xi[idx]])
    b_all = np.concatenate([band, -band[idx]]).astype(np.int8)
    w_all = np.concatenate([(1 - T) * w, T[idx] * w[idx]])
    return x_all, xi_all, b_all, w_all, int(hop.sum())


def _transport_generic(ens, potential, h, t_f, n_steps):
    xs, xis, bands, ws = [], [], [], []
    n_events = 0
    # queue entries: (x, xi, band, weight, remaining time); children are
    # appended in parent order, then event time, so the output is deterministic
    queue = [(ens.x[k], ens.xi[k], int(ens.band[k]), float(ens.weight[k]), t_f) for k in range(len(ens))]
    head = 0
    while head < len(queue):
        x, xi, b, w, rem = queue[head]
        head += 1
        steps = max(1, int(round(n_steps * rem / t_f)))
        tr = integrate_with_crossings(b, PhasePoint(x, xi), potential, rem, h=h, n_steps=steps)
        for ev in tr.events:
            n_events += 1
            child = ev.lz_probability * w
            w = (1 - ev.lz_probability) * w
            if child * ens.cell_volume >= PRUNE_MASS:
                queue.append((ev.point.x, ev.point.xi, -b, child, rem - ev.t))
        if w * ens.cell_volume >= PRUNE_MASS:
            xs.append(tr.x[-1])
            xis.append(tr.xi[-1])
            bands.append(b)
            ws.append(w)
    if not ws:
        return np.zeros((0, 2)), np.zeros((0, 2)), np.zeros(0, np.int8), np.zeros(0), n_events
    return np.array(xs), np.array(xis), np.array(bands, dtype=np.int8), np.array(ws), n_events


def transport_and_hop(ens: Ensemble, potential: Potential, h, t_f, n_steps=2000):
    """Move every particle to time ``t_f``, splitting weights at each crossing."""
    if not t_f > 0:
        raise ConfigError("t_f must be positive")
    if potential.kind == "zero":
        q = analytic_flow_free(ens.band.astype(int), PhasePoint(ens.x, ens.xi), t_f)
        return Ensemble(q.x, q.xi, ens.band.copy(), ens.weight.copy(), ens.cell_volume, ens.n_events)
    if potential.kind == "linear":
        rate = _lz_linear(ens.xi[:, 1], h, potential.alpha)
        x, xi, b, w, nev = _transport_linear(ens, potential.alpha, rate, t_f)
    else:
        x, xi, b, w, nev = _transport_generic(ens, potential, h, t_f, n_steps)
    keep = w * ens.cell_volume >= PRUNE_MASS
    return Ensemble(x[keep], xi[keep], b[keep], w[keep], ens.cell_volume, ens.n_events + nev)


def populations(ens):
    """``(P_plus, P_minus)`` as weighted sums over cells."""
    up = ens.band > 0
    return (float(np.sum(ens.weight[up]) * ens.cell_volume),
            float(np.sum(ens.weight[~up]) * ens.cell_volume))


def _series_from_linear(ens, alpha, xi1, times, rate):
    """Populations at each time for a fresh single-crossing linear problem."""
    mass = ens.weight * ens.cell_volume
    plus0 = ens.band > 0
    t_star = xi1 / alpha
    times = np.asarray(times, dtype=float)
    series = PopulationSeries()
    for t in times:
        moved = mass * rate * ((t_star > 0) & (t_star < t))
        p_plus = np.sum(np.where(plus0, mass - moved, moved))
        p_minus = np.sum(np.where(plus0, moved, mass - moved))
        series.append(t, float(p_plus), float(p_minus), float(p_plus + p_minus))
    return series


def population_series(ens0: Ensemble, potential: Potential, h, times):
    """Surface-hopping populations at each of ``times`` starting from ``ens0``.

    For linear potentials the crossing time ``xi1/alpha`` of every particle is
    known, so all times are done in one pass. Otherwise each time is an
    independent run.
    """
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ConfigError("times must be strictly increasing")
    if potential.kind == "linear" and ens0.n_events == 0:
        alpha = potential.alpha
        rate = _lz_linear(ens0.xi[:, 1], h, alpha)
        return _series_from_linear(ens0, alpha, ens0.xi[:, 0], times, rate)
    series = PopulationSeries()
    for t in times:
        ens = ens0 if t == 0 else transport_and_hop(ens0, potential, h, t)
        pp, pm = populations(ens)
        series.append(t, pp, pm, pp + pm)
    return series


def transport_reduced(ens: ReducedEnsemble, alpha, xi2, h, t_f, rate=None):
    """Reduced-plane transport for ``U = alpha x1`` with fixed ``xi2``.

    ``rate`` defaults to ``exp(-pi xi2^2 / (h |alpha|))``; a different constant
    may be supplied to compare with models that use another transition rate.
    """
    if xi2 == 0:
        raise ConfigError("xi2 must be nonzero")
    T = _lz_linear(xi2, h, alpha) if rate is None else float(rate)
    n = len(ens)
    full = Ensemble(np.stack([ens.x1, np.zeros(n)], axis=1), np.stack([ens.xi1, np.full(n, float(xi2))], axis=1),
                    ens.band.copy(), ens.weight.copy(), ens.cell_volume)
    x, xi, b, w, _ = _transport_linear(full, alpha, np.full(n, T), t_f)
    keep = w * ens.cell_volume >= PRUNE_MASS
    return ReducedEnsemble(x[keep, 0], xi[keep, 0], b[keep], w[keep], ens.cell_volume)


def population_series_reduced(ens0: ReducedEnsemble, alpha, xi2, h, times, rate=None):
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ConfigError("times must be strictly increasing")
    T = _lz_linear(xi2, h, alpha) if rate is None else float(rate)
    return _series_from_linear(ens0, alpha, ens0.xi1, times, T)
