"""Experiment registry: builds solver configs from an ExperimentConfig, runs
them, writes CSV artifacts and returns a ComparisonReport."""
import csv
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import asymptotic_models as am
from .config import ExperimentConfig
from .dirac_tssm import DiracConfig, band_centroid, run_dirac
from .errors import MissingDataError
from .grid import Grid2
from .potentials import Potential
from .series import fmt
from .surface_hopping import (SamplingConfig, initial_sampling_2d, initial_sampling_4d, population_series,
                              population_series_reduced, populations, transport_and_hop)
from .wavepacket import GaussianPacket

TIMING_NOTE = "wall-clock seconds are machine dependent; the dir/sh ratio is the figure of merit"
FDTD_NOTE = "the finite-difference (FDTD) reference column is not reproduced"


@dataclass
class ComparisonReport:
    experiment: str
    rows: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    files: list = field(default_factory=list)

    def columns(self):
        cols = []
        for r in self.rows:
            cols += [k for k in r if k not in cols]
        return cols

    def write(self, out_dir):
        out_dir = Path(out_dir)
        cols = self.columns()
        with open(out_dir / "report.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for r in self.rows:
                w.writerow([_cell(r.get(c, "")) for c in cols])
        with open(out_dir / "params.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["key", "value"])
            for k, v in self.params.items():
                w.writerow([k, v])
            for note in self.notes:
                w.writerow(["note", note])


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return fmt(float(v))
    return v


def error_metric(row):
    """``|P_dir,+ - P_sh,+|`` for one report row."""
    try:
        return abs(float(row["p_dir_plus"]) - float(row["p_sh_plus"]))
    except (KeyError, TypeError) as exc:
        raise MissingDataError(f"row lacks a population needed for the error: {exc}") from None


def timing_report(report: ComparisonReport):
    """Rows ``(h, cpu_dir, cpu_sh, ratio)``; sh timing excludes initial sampling."""
    out = []
    for r in report.rows:
        if "cpu_dir" not in r or "cpu_sh" not in r:
            raise MissingDataError("row lacks timings")
        out.append({"h": r.get("h"), "cpu_dir": r["cpu_dir"], "cpu_sh": r["cpu_sh"],
                     "ratio": r["cpu_dir"] / r["cpu_sh"]})
    return out


def write_timing(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["h", "cpu_dir", "cpu_sh", "ratio", "note"])
        for r in rows:
            w.writerow([_cell(r["h"]), _cell(r["cpu_dir"]), _cell(r["cpu_sh"]), _cell(r["ratio"]), TIMING_NOTE])


# --- shared builders ------------------------------------------------------

def _packet(cfg: ExperimentConfig, h):
    x0 = cfg.floats("physics.x0_sqrt_h")
    xi0 = cfg.floats("physics.xi0")
    cfg.require(len(x0) == 2 and len(xi0) == 2, "physics.x0_sqrt_h/xi0", "need two components")
    cfg.check()
    return GaussianPacket((x0[0] * np.sqrt(h), x0[1] * np.sqrt(h)), tuple(xi0), h)


def _box(cfg, h, n1, n2):
    half = cfg.floats("grid.half_sqrt_h")
    cfg.require(len(half) == 2 and min(half) > 0, "grid.half_sqrt_h", "need two positive half-widths")
    for key, n in (("grid.n1", n1), ("grid.n2", n2)):
        cfg.require(n is not None and n >= 2 and n % 2 == 0, key, "grid sizes must be even and >= 2")
    cfg.check()
    return Grid2.centered(half[0] * np.sqrt(h), half[1] * np.sqrt(h), n1, n2)


def _sampling(cfg, J=None, K=None):
    values = dict(J=cfg.int("sampling.J"), K=cfg.int("sampling.K"), tol=cfg.float("sampling.tol"),
                  half_width=cfg.float("sampling.half_width_sqrt_h"))
    if "sampling.tol_x" in cfg.values:
        values.update(tol_x=cfg.float("sampling.tol_x"), tol_xi=cfg.float("sampling.tol_xi"))
    cfg.check()
    return SamplingConfig(**values)


def _mid_transfer(series, level=0.5):
    t = series.crossing_time(level=level)
    return float("nan") if t is None else t


def _ensure(out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


def _quantum_run(cfg, potential, xi0_default=None):
    h = cfg.float("physics.h")
    cfg.require(h is not None and h > 0, "physics.h", "must be positive")
    cfg.check()
    packet = _packet(cfg, h)
    grid = _box(cfg, h, cfg.int("grid.n1"), cfg.int("grid.n2"))
    t_f = cfg.float("time.t_f_sqrt_h") * np.sqrt(h)
    dt = cfg.float("time.dt_over_dx1") * grid.dx[0]
    cfg.require(t_f > 0 and dt > 0, "time", "t_f and dt must be positive")
    snaps = tuple(cfg.floats("dirac.snapshot_times")) if "dirac.snapshot_times" in cfg.values else ()
    dcfg = DiracConfig(grid, potential(packet), packet, dt, t_f, absorbing=cfg.bool("dirac.absorbing"),
                       n_records=cfg.int("dirac.n_records"), zero_mode_band=cfg.int("dirac.zero_mode_band"),
                       snapshot_times=snaps)
    cfg.check()
    return dcfg, run_dirac(dcfg)


# --- experiments ----------------------------------------------------------

def klein_step(cfg: ExperimentConfig):
    out = _ensure(cfg.out_dir)
    v0 = cfg.float("physics.v0")
    dcfg, res = _quantum_run(cfg, lambda p: Potential.klein_step(v0))
    res.series.to_csv(out / "populations_dirac.csv")
    t, pp, pm, tot = res.series.arrays()
    t_mid = _mid_transfer(res.series, 0.5 * pm[-1])
    after = t >= t_mid + 2 * np.sqrt(dcfg.h)
    row = {"t_mid": t_mid, "p_plus_tf": pp[-1], "p_minus_tf": pm[-1],
           "p_minus_min_after": float(pm[after].min()) if after.any() else float("nan"),
           "mass_drift": float(np.max(np.abs(tot - tot[0]))), "absorbing": dcfg.absorbing,
           "cpu_dir": res.wall_time, "n_steps": res.n_steps, "initial_norm": res.initial_norm}
    rep = ComparisonReport("klein_step", [row], dict(cfg.values), [FDTD_NOTE],
                           [out / "populations_dirac.csv"])
    rep.write(out)
    return rep


def linear_quantum(cfg: ExperimentConfig):
    out = _ensure(cfg.out_dir)
    h = cfg.float("physics.h")
    xi0 = cfg.floats("physics.xi0")
    x0 = cfg.floats("physics.x0_sqrt_h")[0] * np.sqrt(h)
    v0 = cfg.float("physics.v0_over_xi0") * float(np.hypot(*xi0))
    alpha = (v0 - xi0[0]) / x0
    cfg.require(alpha != 0, "physics.v0_over_xi0", "gives alpha = 0")
    dcfg, res = _quantum_run(cfg, lambda p: Potential.linear(alpha))
    res.series.to_csv(out / "populations_dirac.csv")
    t_star = xi0[0] / alpha
    x_star = x0 + t_star
    t, pp, pm, tot = res.series.arrays()
    row = {"alpha": alpha, "t_star": t_star, "x_star": x_star, "t_mid": _mid_transfer(res.series, 0.5 * pm[-1]),
           "p_plus_tf": pp[-1], "p_minus_tf": pm[-1], "absorbing": dcfg.absorbing, "cpu_dir": res.wall_time,
           "initial_norm": res.initial_norm}
    rows = [row]
    for ts, u in sorted(res.snapshots.items()) + [(dcfg.t_f, res.field)]:
        cp = band_centroid(u, 1, h, dcfg.grid)[0]
        cm = band_centroid(u, -1, h, dcfg.grid)[0]
        rows.append({"snapshot_t": ts, "centroid_plus_x1": cp, "centroid_minus_x1": cm})
    rep = ComparisonReport("linear_quantum", rows, dict(cfg.values), [FDTD_NOTE], [out / "populations_dirac.csv"])
    rep.write(out)
    return rep


def _table1_row(cfg, h, n1, n2, t_f, n_steps, alpha, samp, repeats, absorbing, out):
    packet = _packet(cfg, h)
    grid = _box(cfg, h, n1, n2)
    pot = Potential.linear(alpha)
    ens0 = initial_sampling_4d(packet, samp)
    dcfg = DiracConfig(grid, pot, packet, t_f / n_steps, t_f, absorbing=absorbing,
                       n_records=cfg.int("dirac.n_records"), zero_mode_band=cfg.int("dirac.zero_mode_band"))
    res = run_dirac(dcfg)
    res.series.to_csv(out / f"populations_dirac_h{h:.0e}.csv")
    cpu_sh = np.inf
    for _ in range(max(1, repeats)):
        start = time.perf_counter()
        ens = transport_and_hop(ens0, pot, h, t_f)
        p_sh = populations(ens)
        cpu_sh = min(cpu_sh, time.perf_counter() - start)
    p_dir = res.series.final()
    row = {"h": h, "n1": n1, "n2": n2, "n_particles": len(ens0), "p_dir_plus": p_dir[0], "p_dir_minus": p_dir[1],
           "p_sh_plus": p_sh[0], "p_sh_minus": p_sh[1], "cpu_dir": res.wall_time, "cpu_sh": cpu_sh,
           "absorbing": absorbing, "dir_total_tf": res.series.total[-1], "initial_norm": res.initial_norm}
    row["error"] = error_metric(row)
    return row


def table1_sweep(cfg: ExperimentConfig):
    out = _ensure(cfg.out_dir)
    hs = cfg.floats("physics.hs")
    n1s, n2s = cfg.ints("grid.n1"), cfg.ints("grid.n2")
    cfg.require(len(hs) > 0 and len(n1s) == len(hs) and len(n2s) == len(hs), "grid.n1/grid.n2",
                "need one grid size per h value")
    cfg.require(all(h > 0 for h in hs), "physics.hs", "must be positive")
    alpha = cfg.float("physics.alpha")
    t_f = cfg.float("time.t_f")
    n_steps = cfg.int("time.n_steps")
    cfg.require(alpha not in (None, 0), "physics.alpha", "must be nonzero")
    cfg.require(t_f is not None and t_f > 0, "time.t_f", "must be positive")
    cfg.require(n_steps is not None and n_steps > 0, "time.n_steps", "must be positive")
    samp = _sampling(cfg)
    repeats = cfg.int("timing.sh_repeats")
    absorbing = cfg.bool("dirac.absorbing")
    cfg.check()
    rows = [_table1_row(cfg, h, n1, n2, t_f, n_steps, alpha, samp, repeats, absorbing, out)
            for h, n1, n2 in zip(hs, n1s, n2s)]
    rep = ComparisonReport("table1_sweep", rows, dict(cfg.values), [FDTD_NOTE, TIMING_NOTE])
    rep.write(out)
    write_timing(timing_report(rep), out / "timing.csv")
    return rep


def sh_vs_dirac_series(cfg: ExperimentConfig):
    out = _ensure(cfg.out_dir)
    h, alpha, t_f = cfg.float("physics.h"), cfg.float("physics.alpha"), cfg.float("time.t_f")
    n_steps, n_sh = cfg.int("time.n_steps"), cfg.int("time.sh_samples")
    cfg.require(n_sh is not None and n_sh > 0, "time.sh_samples", "must be positive")
    packet = _packet(cfg, h)
    grid = _box(cfg, h, cfg.int("grid.n1"), cfg.int("grid.n2"))
    pot = Potential.linear(alpha)
    samp = _sampling(cfg)
    dcfg = DiracConfig(grid, pot, packet, t_f / n_steps, t_f, absorbing=cfg.bool("dirac.absorbing"),
                       n_records=cfg.int("dirac.n_records"), zero_mode_band=cfg.int("dirac.zero_mode_band"))
    cfg.check()
    ens0 = initial_sampling_4d(packet, samp)
    res = run_dirac(dcfg)
    start = time.perf_counter()
    sh = population_series(ens0, pot, h, t_f * np.arange(n_sh + 1) / n_sh)
    cpu_sh = time.perf_counter() - start
    ens = transport_and_hop(ens0, pot, h, t_f)
    res.series.to_csv(out / "populations_dirac.csv")
    sh.to_csv(out / "populations_sh.csv")
    ens.to_csv(out / "ensemble.csv")
    row = {"h": h, "t_hop_classical": packet.xi0[0] / alpha, "t_mid_dir": _mid_transfer(res.series),
           "t_mid_sh": _mid_transfer(sh), "p_dir_plus": res.series.p_plus[-1], "p_sh_plus": sh.p_plus[-1],
           "sh_total_drift": float(np.ptp(sh.total)), "cpu_dir": res.wall_time, "cpu_sh": cpu_sh,
           "n_particles": len(ens0), "n_particles_tf": len(ens),
           "initial_norm": res.initial_norm}
    row["error"] = error_metric(row)
    rep = ComparisonReport("sh_vs_dirac_series", [row], dict(cfg.values), [TIMING_NOTE])
    rep.write(out)
    return rep


def _model_config(cfg, **extra):
    h = cfg.float("physics.h")
    kw = dict(alpha=cfg.float("physics.alpha"), h=h, xi2=cfg.float("physics.xi2"), t_f=cfg.float("time.t_f"),
              x0=cfg.float("physics.x0_sqrt_h") * np.sqrt(h) if h else None, xi0=cfg.float("physics.xi0"),
              nx=cfg.int("grid.nx"), nxi=cfg.int("grid.nxi"), half_x=cfg.float("grid.half_x_sqrt_h"),
              xi_margin=cfg.float("grid.xi_margin_sqrt_h"), limiter=cfg.str("models.limiter"))
    kw.update(extra)
    cfg.check()
    return am.ModelConfig(**kw)


def _max_gap(model_series, sh_series):
    t, _, pm_sh, _ = sh_series.arrays()
    _, pm = model_series.interpolate(t)
    return float(np.max(np.abs(pm - pm_sh)))


def models_comparison(cfg: ExperimentConfig):
    out = _ensure(cfg.out_dir)
    mcfg = _model_config(cfg, n_records=cfg.int("models.n_records"))
    snaps = cfg.floats("models.snapshot_times")
    n_sh = cfg.int("time.sh_samples")
    cfg.check()
    coupled = am.run_coupled_model(mcfg, snaps)
    effective = am.run_effective_model(mcfg, snaps)
    packet = GaussianPacket((mcfg.x0, 0.0), (mcfg.xi0, mcfg.xi2), mcfg.h)
    ens = initial_sampling_2d(packet, _sampling(cfg))
    times = mcfg.t_f * np.arange(n_sh + 1) / n_sh
    sh = population_series_reduced(ens, mcfg.alpha, mcfg.xi2, mcfg.h, times)
    sh_eff = population_series_reduced(ens, mcfg.alpha, mcfg.xi2, mcfg.h, times,
                                       rate=float(am.effective_transition(am.BETA)))
    for name, s in (("coupled", coupled.series), ("effective", effective.series), ("sh2d", sh),
                    ("sh2d_effective", sh_eff)):
        s.to_csv(out / f"populations_{name}.csv")
    for name, r in (("coupled", coupled), ("effective", effective)):
        for ts, st in r.snapshots.items():
            am.write_snapshot(st, r.grid, out / f"snapshot_{name}_t{ts:.4f}.csv")
    rows = []
    for name, r, ref in (("coupled", coupled, sh), ("effective", effective, sh_eff)):
        _, pp, pm, tot = r.series.arrays()
        rows.append({"model": name, "p_plus_tf": pp[-1], "p_minus_tf": pm[-1], "p_sh_minus_tf": ref.p_minus[-1],
                     "max_gap_vs_sh": _max_gap(r.series, ref), "total_drift": float(np.max(np.abs(tot - tot[0]))),
                     "min_density": r.min_density, "dt": r.dt, "n_steps": r.n_steps,
                     "t_mid": _mid_transfer(r.series, 0.5 * pm[-1])})
    rep = ComparisonReport("models_comparison", rows, dict(cfg.values), [])
    rep.write(out)
    return rep


def beta_sweep(cfg: ExperimentConfig):
    out = _ensure(cfg.out_dir)
    lo, hi, n = cfg.float("sweep.beta_min"), cfg.float("sweep.beta_max"), cfg.int("sweep.n_beta")
    cfg.require(lo is not None and lo >= 0 and hi is not None and hi >= lo, "sweep.beta_min/beta_max",
                "need 0 <= beta_min <= beta_max")
    cfg.require(n is not None and n >= 1, "sweep.n_beta", "must be positive")
    mcfg = _model_config(cfg)
    rows = am.beta_sweep(mcfg, np.linspace(lo, hi, n))
    am.write_beta_sweep(rows, out / "beta_sweep.csv")
    gaps = [abs(p - t) for _, p, t in rows]
    rep = ComparisonReport("beta_sweep", [{"n_beta": n, "max_gap": max(gaps),
                                           "beta_at_max_gap": rows[int(np.argmax(gaps))][0]}],
                           dict(cfg.values), [])
    rep.write(out)
    return rep


REGISTRY = {
    "klein_step": (klein_step, "Klein step tunnelling, quantum solver"),
    "linear_quantum": (linear_quantum, "linear potential, quantum solver with hop-point diagnostics"),
    "table1_sweep": (table1_sweep, "quantum vs surface hopping populations and timings over h"),
    "sh_vs_dirac_series": (sh_vs_dirac_series, "population time series, quantum vs surface hopping"),
    "models_comparison": (models_comparison, "coupled and effective models vs reduced surface hopping"),
    "beta_sweep": (beta_sweep, "effective-model transmission as a function of beta"),
}


def run_experiment(cfg: ExperimentConfig):
    func, _ = REGISTRY[cfg.name]
    return func(cfg)
