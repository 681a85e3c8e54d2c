"""Phase-space models in the reduced ``(x1, xi1)`` plane for ``U = alpha x1``.

Two systems are solved by finite volumes on a periodic grid:

* the coupled model for the band densities ``w_plus``, ``w_minus`` and the
  complex interband field ``w_i``;
* the effective model, where ``w_i`` is eliminated in favour of a relaxation
  coefficient ``tau(xi)`` exchanging mass between ``w_plus`` and ``w_minus``.

Transport uses dimensionally split second-order MUSCL sweeps with a slope
limiter (monotonized central by default; minmod and superbee available); sources are advanced inside a Strang composition.

``tau`` is applied on the whole grid, although its derivation assumes
``0 < |xi2| <= sqrt(alpha h)`` and ``|xi1| <= alpha h / |xi2|``.
"""
import csv
from dataclasses import dataclass, field, replace
from typing import Optional

import numba
import numpy as np
from scipy.integrate import quad

from .errors import CFLError, ConfigError
from .series import PopulationSeries, fmt

BETA = np.pi ** 2 / 4
CFL_SLACK = 1e-12


@dataclass(frozen=True)
class PhaseGrid1x1:
    """Periodic cell-centred grid on ``[a, b] x [c, d]``."""

    a: float
    b: float
    nx: int
    c: float
    d: float
    nxi: int

    def __post_init__(self):
        if not (self.b > self.a and self.d > self.c):
            raise ConfigError("grid ranges must be increasing")
        if self.nx < 2 or self.nxi < 2:
            raise ConfigError("grid needs at least two cells per direction")

    @property
    def dx(self):
        return (self.b - self.a) / self.nx

    @property
    def dxi(self):
        return (self.d - self.c) / self.nxi

    @property
    def x(self):
        return self.a + (np.arange(self.nx) + 0.5) * self.dx

    @property
    def xi(self):
        return self.c + (np.arange(self.nxi) + 0.5) * self.dxi

    @property
    def cell_area(self):
        return self.dx * self.dxi

    @classmethod
    def for_packet(cls, h, alpha, t_f, xi0=1.0, nx=500, nxi=500, half_x=11.0, margin=5.0):
        """Box ``[-half_x sqrt h, half_x sqrt h]`` by ``[xi0 - alpha t_f - m sqrt h, xi0 + m sqrt h]``."""
        s = np.sqrt(h)
        lo, hi = sorted((xi0 - alpha * t_f, xi0))
        return cls(-half_x * s, half_x * s, nx, lo - margin * s, hi + margin * s, nxi)


@dataclass
class ModelState:
    w_plus: np.ndarray
    w_minus: np.ndarray
    w_i: Optional[np.ndarray] = None  # complex; None for the effective model
    t: float = 0.0

    def copy(self):
        return ModelState(self.w_plus.copy(), self.w_minus.copy(),
                          None if self.w_i is None else self.w_i.copy(), self.t)


@dataclass
class ModelConfig:
    alpha: float = 15.0
    h: float = 1e-3
    xi2: float = 1e-2
    t_f: float = 0.13
    beta: Optional[float] = None  # None keeps tau unscaled
    x0: float = None  # defaults to -5 sqrt(h)
    xi0: float = 1.0
    nx: int = 500
    nxi: int = 500
    dt: Optional[float] = None  # None selects the stability rule
    n_records: int = 500
    limiter: str = "mc"
    half_x: float = 11.0  # x1 box half-width in units of sqrt(h)
    xi_margin: float = 5.0  # xi1 margin beyond the transported range, units of sqrt(h)

    def __post_init__(self):
        if self.alpha == 0:
            raise ConfigError("alpha must be nonzero")
        if not self.h > 0:
            raise ConfigError("h must be positive")
        if self.xi2 == 0:
            raise ConfigError("xi2 must be nonzero")
        if not self.t_f > 0:
            raise ConfigError("t_f must be positive")
        if self.beta is not None and self.beta < 0:
            raise ConfigError("beta must be nonnegative")
        _limiter_code(self.limiter)
        if self.x0 is None:
            self.x0 = -5.0 * np.sqrt(self.h)

    @property
    def beta_scale(self):
        return 1.0 if self.beta is None else self.beta / BETA

    def grid(self):
        return PhaseGrid1x1.for_packet(self.h, self.alpha, self.t_f, xi0=self.xi0, nx=self.nx, nxi=self.nxi,
                                       half_x=self.half_x, margin=self.xi_margin)

    def time_step(self, grid=None):
        g = grid or self.grid()
        return stable_time_step(g, self.alpha) if self.dt is None else self.dt


def stable_time_step(grid: PhaseGrid1x1, alpha):
    """``(1/dx + |alpha|/dxi)^-1``: the split sweeps then have CFL numbers summing to one."""
    return 1.0 / (1.0 / grid.dx + abs(alpha) / grid.dxi)


def tau(xi1, xi2, alpha):
    """Relaxation coefficient ``(alpha/2)(xi2/|xi|^2)(pi/2 sgn(alpha xi2) - arctan(xi1/xi2))``."""
    xi2 = np.asarray(xi2, dtype=float)
    if np.any(xi2 == 0):
        raise ValueError("tau is undefined for xi2 = 0")
    xi1 = np.asarray(xi1, dtype=float)
    return 0.5 * alpha * xi2 / (xi1 ** 2 + xi2 ** 2) * (0.5 * np.pi * np.sign(alpha * xi2) - np.arctan(xi1 / xi2))


def tau_integral_along_flow(xi1_start, xi2, alpha, t):
    """``int_0^t tau(xi1_start - alpha s, xi2) ds`` by adaptive quadrature."""
    if xi2 == 0:
        raise ValueError("tau is undefined for xi2 = 0")
    t_star = xi1_start / alpha
    pts = [t_star] if 0 < t_star < t else None
    val, _ = quad(lambda s: tau(xi1_start - alpha * s, xi2, alpha), 0.0, t, points=pts, limit=400,
                  epsabs=1e-12, epsrel=1e-10)
    return float(val)


def tau_integral_closed_form(xi1_start, xi2, alpha, t):
    """Same integral via ``theta = arctan(xi1/xi2)``; for ``alpha xi2 > 0``."""
    if alpha * xi2 <= 0:
        raise ValueError("closed form assumes alpha * xi2 > 0")
    th0 = np.arctan(xi1_start / xi2)
    th1 = np.arctan((xi1_start - alpha * t) / xi2)
    f = lambda th: 0.5 * np.pi * th - 0.5 * th ** 2
    return 0.5 * (f(th0) - f(th1))


# --- transport ------------------------------------------------------------

LIMITERS = {"minmod": 0, "mc": 1, "superbee": 2}


@numba.njit(cache=True)
def _limited_slope(a, b, kind):
    if a * b <= 0.0:
        return 0.0
    sgn = 1.0 if a > 0 else -1.0
    a, b = abs(a), abs(b)
    if kind == 0:
        return sgn * min(a, b)
    if kind == 1:
        return sgn * min(2 * a, 2 * b, 0.5 * (a + b))
    return sgn * max(min(2 * a, b), min(a, 2 * b))


@numba.njit(cache=True)
def _sweep_lines(q, v, lam, kind):
    """MUSCL update along the last axis of ``q`` (lines x cells), in place.

    ``v`` holds cell velocities of the same shape, ``lam = dt/dcell``.
    Face velocity is the mean of the two neighbours; the face value is the
    upwind reconstruction advanced by half a step.
    """
    nl, n = q.shape
    s = np.empty(n)
    flux = np.empty(n)
    for l in range(nl):
        for i in range(n):
            s[i] = _limited_slope(q[l, i] - q[l, i - 1], q[l, (i + 1) % n] - q[l, i], kind)
        for i in range(n):
            j = (i + 1) % n
            vf = 0.5 * (v[l, i] + v[l, j])
            nu = vf * lam
            if vf >= 0.0:
                flux[i] = vf * (q[l, i] + 0.5 * (1.0 - nu) * s[i])
            else:
                flux[i] = vf * (q[l, j] - 0.5 * (1.0 + nu) * s[j])
        for i in range(n):
            q[l, i] -= lam * (flux[i] - flux[i - 1])


def _check_cfl(v, dt, dcell):
    c = float(np.max(np.abs(v))) * abs(dt) / dcell if np.size(v) else 0.0
    if c > 1.0 + CFL_SLACK:
        raise CFLError(f"CFL number {c:.6g} exceeds 1")


def _limiter_code(limiter):
    try:
        return LIMITERS[limiter]
    except KeyError:
        raise ConfigError(f"unknown limiter {limiter!r}; expected one of {sorted(LIMITERS)}") from None


def muscl_advect(q, v, dt, dcell, axis=-1, limiter="mc"):
    """Advect ``q`` along ``axis`` with per-cell velocity ``v`` over ``dt``; periodic."""
    kind = _limiter_code(limiter)
    q = np.asarray(q, dtype=float)
    v = np.broadcast_to(np.asarray(v, dtype=float), q.shape)
    _check_cfl(v, dt, dcell)
    out = np.ascontiguousarray(np.moveaxis(q, axis, -1)).copy()
    vv = np.ascontiguousarray(np.moveaxis(v, axis, -1))
    shape = out.shape
    flat = out.reshape(-1, shape[-1])
    _sweep_lines(flat, vv.reshape(-1, shape[-1]), dt / dcell, kind)
    return np.moveaxis(flat.reshape(shape), -1, axis)


def muscl_advect_1d(line, v, dt, dcell, limiter="mc"):
    """One-dimensional conservative MUSCL step with a slope limiter."""
    return muscl_advect(np.asarray(line, dtype=float)[None, :], np.broadcast_to(v, np.shape(line))[None, :],
                        dt, dcell, limiter=limiter)[0]


class _Transport:
    """Precomputed velocities for the two split directions on a grid."""

    def __init__(self, grid: PhaseGrid1x1, alpha, xi2, limiter="mc"):
        self.kind = _limiter_code(limiter)
        xi = grid.xi
        norm = np.hypot(xi, xi2)
        speed = np.where(norm > 1e-14, xi / np.where(norm > 0, norm, 1.0), np.sign(xi))
        # arrays are indexed (x, xi); x-sweeps run along axis 0
        self.vx_plus = np.ascontiguousarray(np.broadcast_to(speed[:, None], (grid.nxi, grid.nx)))
        self.vx_minus = -self.vx_plus
        self.vxi = np.full((grid.nx, grid.nxi), -float(alpha))
        self.grid = grid

    def x_sweep(self, q, band, dt):
        v = self.vx_plus if band > 0 else self.vx_minus
        _check_cfl(v, dt, self.grid.dx)
        qt = np.ascontiguousarray(q.T)
        _sweep_lines(qt, v, dt / self.grid.dx, self.kind)
        return np.ascontiguousarray(qt.T)

    def xi_sweep(self, q, dt):
        _check_cfl(self.vxi, dt, self.grid.dxi)
        out = np.ascontiguousarray(q).copy()
        _sweep_lines(out, self.vxi, dt / self.grid.dxi, self.kind)
        return out


def _half_transport(state, tr, dt, x_first):
    def xs(s):
        s.w_plus = tr.x_sweep(s.w_plus, 1, dt)
        s.w_minus = tr.x_sweep(s.w_minus, -1, dt)

    def ks(s):
        s.w_plus = tr.xi_sweep(s.w_plus, dt)
        s.w_minus = tr.xi_sweep(s.w_minus, dt)
        if s.w_i is not None:
            s.w_i = tr.xi_sweep(s.w_i.real, dt) + 1j * tr.xi_sweep(s.w_i.imag, dt)

    if x_first:
        xs(state)
        ks(state)
    else:
        ks(state)
        xs(state)


# --- sources --------------------------------------------------------------

@dataclass(frozen=True)
class CoupledCoefficients:
    """Row coefficients (functions of ``xi1``) of the coupled source."""

    a: np.ndarray  # alpha xi2 / |xi|^2
    e: np.ndarray  # (xi1 + i xi2)/|xi|
    b: np.ndarray  # (alpha/2) xi2 (xi1 - i xi2)/|xi|^3
    lam: np.ndarray  # -2|xi|/h - alpha xi2/|xi|^2

    @classmethod
    def build(cls, xi1, xi2, alpha, h):
        xi1 = np.asarray(xi1, dtype=float)
        n2 = xi1 ** 2 + xi2 ** 2
        n = np.sqrt(n2)
        return cls(alpha * xi2 / n2, (xi1 + 1j * xi2) / n, 0.5 * alpha * xi2 * (xi1 - 1j * xi2) / n ** 3,
                   -2 * n / h - alpha * xi2 / n2)


def coupled_source_step(w_plus, w_minus, w_i, coef: CoupledCoefficients, dt):
    """Advance the coupled source over ``dt``.

    Written for ``z = exp(-i Lambda t) w_i`` so the fast phase is exact; the
    remaining slow system is advanced with Heun's second-order method.
    """
    a, e, b, lam = coef.a, coef.e, coef.b, coef.lam
    ssum = w_plus + w_minus
    d0 = w_plus - w_minus
    z0 = w_i
    rot = np.exp(1j * lam * dt)

    def rhs(d, z, phase):
        dd = 2 * a * np.imag(e * phase * z)
        dz = -1j * b * np.conj(phase) * d
        return dd, dz

    k1d, k1z = rhs(d0, z0, 1.0)
    k2d, k2z = rhs(d0 + dt * k1d, z0 + dt * k1z, rot)
    d1 = d0 + 0.5 * dt * (k1d + k2d)
    z1 = z0 + 0.5 * dt * (k1z + k2z)
    return 0.5 * (ssum + d1), 0.5 * (ssum - d1), rot * z1


def relaxation_matrix(tau_dt):
    """``exp(-tau_dt M)`` with ``M = [[1,-1],[-1,1]]``, using ``M^2 = 2M``."""
    tau_dt = np.asarray(tau_dt, dtype=float)
    c = 0.5 * (np.exp(-2 * tau_dt) - 1)
    out = np.empty(tau_dt.shape + (2, 2))
    out[..., 0, 0] = out[..., 1, 1] = 1 + c
    out[..., 0, 1] = out[..., 1, 0] = -c
    return out


def relaxation_source_step(w_plus, w_minus, tau_row, dt):
    """Exact solution of ``d/dt (w+, w-) = -tau M (w+, w-)`` over ``dt``, cellwise."""
    c = 0.5 * (np.exp(-2 * tau_row * dt) - 1)
    diff = w_minus - w_plus
    return w_plus - c * diff, w_minus + c * diff


# --- stepping -------------------------------------------------------------

def initial_state(grid: PhaseGrid1x1, cfg: ModelConfig, coupled=True):
    """Gaussian upper-band density ``(pi h)^-1 exp(-((x1-x0)^2 + (xi1-xi0)^2)/h)``."""
    X, K = np.meshgrid(grid.x, grid.xi, indexing="ij")
    wp = np.exp(-((X - cfg.x0) ** 2 + (K - cfg.xi0) ** 2) / cfg.h) / (np.pi * cfg.h)
    return ModelState(wp, np.zeros_like(wp), np.zeros_like(wp, dtype=complex) if coupled else None, 0.0)


class _Stepper:
    def __init__(self, cfg: ModelConfig, grid: PhaseGrid1x1, coupled):
        self.cfg, self.grid, self.coupled = cfg, grid, coupled
        self.transport = _Transport(grid, cfg.alpha, cfg.xi2, cfg.limiter)
        if coupled:
            self.coef = CoupledCoefficients.build(grid.xi[None, :], cfg.xi2, cfg.alpha, cfg.h)
        else:
            self.tau_row = cfg.beta_scale * tau(grid.xi, cfg.xi2, cfg.alpha)[None, :]
        self.count = 0

    def source(self, s, dt):
        if self.coupled:
            s.w_plus, s.w_minus, s.w_i = coupled_source_step(s.w_plus, s.w_minus, s.w_i, self.coef, dt)
        else:
            s.w_plus, s.w_minus = relaxation_source_step(s.w_plus, s.w_minus, self.tau_row, dt)

    def __call__(self, s, dt):
        # Strang: half transport, full source, half transport; the split
        # order alternates between steps
        x_first = self.count % 2 == 0
        _half_transport(s, self.transport, 0.5 * dt, x_first)
        self.source(s, dt)
        _half_transport(s, self.transport, 0.5 * dt, not x_first)
        s.t += dt
        self.count += 1
        return s


def step_coupled_model(state: ModelState, cfg: ModelConfig, dt, grid=None, x_first=True):
    """One Strang step of the coupled model."""
    if state.w_i is None:
        raise ValueError("coupled model needs w_i")
    st = _Stepper(cfg, grid or cfg.grid(), True)
    st.count = 0 if x_first else 1
    return st(state.copy(), dt)


def step_effective_model(state: ModelState, cfg: ModelConfig, dt, grid=None, x_first=True):
    """One Strang step of the effective (relaxation) model."""
    st = _Stepper(cfg, grid or cfg.grid(), False)
    st.count = 0 if x_first else 1
    s = state.copy()
    s.w_i = None
    return st(s, dt)


def model_populations(state: ModelState, grid: PhaseGrid1x1):
    area = grid.cell_area
    return float(state.w_plus.sum() * area), float(state.w_minus.sum() * area)


@dataclass
class ModelResult:
    series: PopulationSeries
    state: ModelState
    grid: PhaseGrid1x1
    dt: float
    n_steps: int
    min_density: float  # most negative w_plus / w_minus seen (limiter undershoot)
    snapshots: dict = field(default_factory=dict)


def _run(cfg: ModelConfig, coupled, snapshot_times=()):
    grid = cfg.grid()
    dt = cfg.time_step(grid)
    n_full = int(np.floor(cfg.t_f / dt * (1 + 1e-12)))
    steps = [dt] * n_full
    rest = cfg.t_f - n_full * dt
    if rest > 1e-12 * cfg.t_f:
        steps.append(rest)
    st = _Stepper(cfg, grid, coupled)
    s = initial_state(grid, cfg, coupled)
    series = PopulationSeries()
    stride = max(1, len(steps) // max(1, cfg.n_records))
    pending = sorted(snapshot_times)
    snaps = {}
    lowest = 0.0

    def record(s):
        pp, pm = model_populations(s, grid)
        series.append(s.t, pp, pm, pp + pm)

    record(s)
    for n, d in enumerate(steps, 1):
        st(s, d)
        lowest = min(lowest, float(s.w_plus.min()), float(s.w_minus.min()))
        if n % stride == 0 or n == len(steps):
            record(s)
        while pending and s.t >= pending[0] - 1e-12:
            snaps[pending.pop(0)] = s.copy()
    return ModelResult(series, s, grid, dt, len(steps), lowest, snaps)


def run_coupled_model(cfg: ModelConfig, snapshot_times=()):
    return _run(cfg, True, snapshot_times)


def run_effective_model(cfg: ModelConfig, snapshot_times=()):
    return _run(cfg, False, snapshot_times)


def effective_transition(beta):
    """Band transmission ``(1 - exp(-2 beta))/2`` of the effective model."""
    return 0.5 * (1 - np.exp(-2 * np.asarray(beta, dtype=float)))


def beta_sweep(cfg: ModelConfig, betas):
    """Effective-model ``P_minus(t_f)`` with ``tau`` rescaled by ``beta/(pi^2/4)``.

    Returns rows ``(beta, p_minus_tf, t_theory)``.
    """
    rows = []
    for beta in betas:
        if beta < 0:
            raise ConfigError("beta must be nonnegative")
        res = run_effective_model(replace(cfg, beta=float(beta), n_records=1))
        rows.append((float(beta), res.series.p_minus[-1], float(effective_transition(beta))))
    return rows


def write_beta_sweep(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["beta", "p_minus_tf", "t_theory"])
        for r in rows:
            w.writerow([fmt(v) for v in r])


def write_snapshot(state: ModelState, grid: PhaseGrid1x1, path):
    """Flat CSV of all cells: ``x1,xi1,w_plus,w_minus,re_wi,im_wi``."""
    X, K = np.meshgrid(grid.x, grid.xi, indexing="ij")
    wi = np.zeros_like(state.w_plus, dtype=complex) if state.w_i is None else state.w_i
    cols = [X, K, state.w_plus, state.w_minus, wi.real, wi.imag]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1", "xi1", "w_plus", "w_minus", "re_wi", "im_wi"])
        for row in zip(*(c.ravel() for c in cols)):
            w.writerow([fmt(v) for v in row])
