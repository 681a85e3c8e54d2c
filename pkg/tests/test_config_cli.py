import csv
import hashlib

import numpy as np
import pytest

from dirachop.cli import main
from dirachop.config import EXPERIMENTS, ExperimentConfig, load_defaults, read_flat
from dirachop.errors import ConfigError

# frozen defaults: changing one of these silently changes a reproduced number
FROZEN = {
    "klein_step": {
        "physics.h": 3.4557e-3, "physics.x0_sqrt_h": [-5, 0], "physics.xi0": [0.5, 0], "physics.v0": 1.0,
        "grid.half_sqrt_h": [10, 5], "grid.n1": 126, "grid.n2": 66, "time.t_f_sqrt_h": 13,
        "time.dt_over_dx1": 1 / np.sqrt(2),
    },
    "linear_quantum": {
        "physics.h": 3.4557e-3, "physics.xi0": [1, 0], "physics.v0_over_xi0": 0.25, "grid.n1": 160,
        "grid.n2": 80, "time.t_f_sqrt_h": 13,
    },
    "table1_sweep": {
        "physics.alpha": 15, "physics.x0_sqrt_h": [-5, 0], "physics.xi0": [1, 0],
        "physics.hs": [1e-1, 1e-2, 1e-3, 1e-4], "grid.half_sqrt_h": [11, 5],
        "grid.n1": [250, 250, 300, 850], "grid.n2": [126, 126, 150, 426], "time.t_f": 0.13,
        "time.n_steps": 250, "sampling.J": 16, "sampling.K": 16, "sampling.tol": 1e-6,
        "sampling.tol_x": 1e-9, "sampling.tol_xi": 1e-9, "sampling.half_width_sqrt_h": 5,
    },
    "sh_vs_dirac_series": {
        "physics.h": 1e-3, "physics.alpha": 15, "grid.n1": 300, "grid.n2": 150, "time.t_f": 0.13,
        "time.n_steps": 250,
    },
    "models_comparison": {
        "physics.h": 1e-3, "physics.alpha": 15, "physics.xi2": 1e-2, "physics.x0_sqrt_h": -5,
        "physics.xi0": 1, "grid.nx": 500, "grid.nxi": 500, "time.t_f": 0.13, "sampling.J": 100,
        "sampling.K": 100, "sampling.tol": 1e-9,
    },
    "beta_sweep": {
        "physics.h": 1e-3, "physics.alpha": 15, "physics.xi2": 1e-2, "grid.nx": 500, "grid.nxi": 500,
        "time.t_f": 0.13, "sweep.beta_min": 0, "sweep.beta_max": 5, "sweep.n_beta": 31,
    },
}


@pytest.mark.parametrize("name", EXPERIMENTS)
def test_frozen_defaults(name):
    vals = load_defaults(name)
    for key, expected in FROZEN[name].items():
        raw = vals[key]
        got = [float(v) for v in raw.split(",")] if isinstance(expected, list) else float(raw)
        assert np.allclose(got, expected, rtol=1e-12, atol=0), key


CHECKSUMS = {
    "klein_step": "e069823888a3b095154ca31e9c2a4080b72aa2a209cf8d95611311a0498984a9",
    "linear_quantum": "8ce5eacfb826808d3f1851fa918bf77bdcc914a03f476e621d3ebb8d426fb1ae",
    "table1_sweep": "fc953e9ab683b99ecb49eab78124b0260dcd73ac80876ab2736a4b6e16cd0afe",
    "sh_vs_dirac_series": "fce9479638b9fc153e26c3403bef208e252815758d46cbaeab25f340b43715cc",
    "models_comparison": "7cad3daf89b9b415a7ba2426bddaf27a229f26dc67833f9e335e48940108a96a",
    "beta_sweep": "28f52b5006d14fa955dd7154510abdb4553fe1a3fc3a377b68b5b6ede99422a7",
}


@pytest.mark.parametrize("name", EXPERIMENTS)
def test_defaults_checksum(name):
    """Any edit to a default value (comments excluded) must be deliberate."""
    v = load_defaults(name)
    digest = hashlib.sha256("\n".join(f"{k}={v[k]}" for k in sorted(v)).encode()).hexdigest()
    assert digest == CHECKSUMS[name]


def test_potential_heights_follow_momentum():
    klein = load_defaults("klein_step")
    xi0 = [float(v) for v in klein["physics.xi0"].split(",")]
    assert float(klein["physics.v0"]) == pytest.approx(2 * np.hypot(*xi0))
    assert float(load_defaults("linear_quantum")["physics.v0_over_xi0"]) == 0.25


def test_every_experiment_has_defaults():
    assert set(FROZEN) == set(EXPERIMENTS)


def test_overrides_and_typed_access():
    cfg = ExperimentConfig.from_defaults("table1_sweep", {"grid.n1": "10,20,30,40"})
    assert cfg.ints("grid.n1") == [10, 20, 30, 40]
    assert cfg.float("time.t_f") == 0.13
    assert cfg.bool("dirac.absorbing") is True
    assert cfg.overridden == ("grid.n1",)


def test_unknown_key_and_bad_values():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_defaults("table1_sweep", {"grid.n3": "1"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_defaults("nope")
    cfg = ExperimentConfig.from_defaults("klein_step", {"grid.n1": "x", "physics.v0": "y"})
    cfg.int("grid.n1")
    cfg.float("physics.v0")
    with pytest.raises(ConfigError, match="grid.n1.*physics.v0"):
        cfg.check()


def test_read_flat_inline_comments():
    assert read_flat("[a]\nb = 1 # note\n") == {"a.b": "1"}
    with pytest.raises(ConfigError):
        read_flat("no section")


def test_cli_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for name in EXPERIMENTS:
        assert name in out


@pytest.mark.parametrize("argv", [
    ["run", "nope"],
    ["run", "klein_step", "--grid.n3=4"],
    ["run", "klein_step", "--grid.n1=abc"],
    ["run", "klein_step", "--grid.n1=127"],
    ["run", "klein_step", "stray"],
])
def test_cli_config_errors(argv, tmp_path):
    assert main(argv + ["--out", str(tmp_path)]) == 2


def test_cli_numerical_failure(tmp_path):
    argv = ["run", "sh_vs_dirac_series", "--sampling.J=4", "--sampling.K=4", "--sampling.tol=1e-12",
            "--out", str(tmp_path)]
    assert main(argv) == 3


def test_cli_small_run_writes_csv(tmp_path):
    argv = ["run", "sh_vs_dirac_series", "--physics.h=1e-1", "--grid.n1=32", "--grid.n2", "16",
            "--time.n_steps=40", "--time.sh_samples=20", "--out", str(tmp_path)]
    assert main(argv) == 0
    files = sorted(p.name for p in tmp_path.iterdir())
    assert all(name.endswith(".csv") for name in files)
    for name in ("populations_dirac.csv", "populations_sh.csv", "report.csv", "params.csv"):
        assert name in files
    with open(tmp_path / "populations_sh.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 21  # sh_samples intervals, endpoints included
    assert float(rows[0]["t"]) == 0.0
    params = dict(r[:2] for r in csv.reader(open(tmp_path / "params.csv")))
    assert params["physics.h"] == "1e-1"
