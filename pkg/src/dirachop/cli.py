"""Command line entry point: ``dirachop run <experiment> [--key=value ...] [--out DIR]``."""
import argparse
import logging
import sys

from .config import EXPERIMENTS, ExperimentConfig, load_defaults
from .errors import ConfigError, NumericalError

log = logging.getLogger("dirachop")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _parse_overrides(extra):
    out = {}
    it = iter(extra)
    for tok in it:
        if not tok.startswith("--") or len(tok) == 2:
            raise ConfigError(f"unexpected argument {tok!r}; overrides look like --section.key=value")
        key, eq, val = tok[2:].partition("=")
        if not eq:
            try:
                val = next(it)
            except StopIteration:
                raise ConfigError(f"missing value for --{key}") from None
        out[key] = val
    return out


def _build_parser():
    p = argparse.ArgumentParser(prog="dirachop", description="Semiclassical Dirac transport experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment; extra --section.key=value flags override defaults")
    run.add_argument("experiment")
    run.add_argument("--out", default=None, help="output directory (default out/<experiment>)")
    run.add_argument("--config", default=None, help="INI file with overrides")
    sub.add_parser("list", help="list experiments and their defaults")
    return p


def _cmd_list():
    from .experiments import REGISTRY

    for name in EXPERIMENTS:
        print(f"{name}: {REGISTRY[name][1]}")
        for key, val in load_defaults(name).items():
            print(f"    {key} = {val}")


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    parser = _build_parser()
    args, extra = parser.parse_known_args(argv)
    if args.command == "list":
        if extra:
            parser.error(f"unrecognized arguments: {' '.join(extra)}")
        _cmd_list()
        return EXIT_OK
    from .experiments import run_experiment

    try:
        cfg = ExperimentConfig.from_defaults(args.experiment, _parse_overrides(extra), args.out, args.config)
        report = run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for row in report.rows:
        log.info(", ".join(f"{k}={v}" for k, v in row.items()))
    log.info("wrote %s", cfg.out_dir)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
