"""Command-line front end.

Subcommands: coeffs, evolve, sweep, resonance, validate. Exit codes are
0 on success, 2 for configuration errors, 3 for numerical failures and 4 for
I/O failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .bogoliubov import BogoliubovError, first_order_coefficients, junction_coefficients_oracle, massless_beta_modulus
from .cache import CacheVersionError, CoefficientCache, default_cache_dir
from .config import ConfigError, ConfigWarning, RunConfig, dump_config, load_config
from .modes import (
    OutOfScopeError,
    gram_defect,
    minkowski_slice_modes,
    rindler_slice_modes,
)
from .quadrature import QuadratureError
from .report import report_csv, report_text, resonance_report
from .sweep import render_heatmap, run_sweep, write_csv
from .symplectic import SymplecticError, coefficients_from_block
from .trajectories import analyze, build_segment_symplectic, sample_scenario_B1

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("relcavity")


class NumericFailure(RuntimeError):
    pass


def _settings(args, cfg: RunConfig):
    if args.nmax is not None:
        if args.nmax < 2 * max(cfg.modes.k, cfg.modes.kp):
            raise ConfigError(f"--nmax must be at least {2 * max(cfg.modes.k, cfg.modes.kp)}")
        cfg.n_max = args.nmax
    if args.workers is not None:
        cfg.workers = args.workers
    out = Path(args.out or cfg.out_dir)
    cache = None if args.no_cache else CoefficientCache()
    return out, cache


def _header(cfg: RunConfig) -> dict:
    return {"tool": "relcavity", "version": __version__, "config_sha256": cfg.physics_hash()}


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def cmd_coeffs(args, cfg: RunConfig) -> int:
    out, cache = _settings(args, cfg)
    g = cfg.geometry
    summary = dict(_header(cfg), n_max=cfg.n_max, cache_dir=str(cache.directory) if cache else None)
    if g.h > 0:
        block = junction_coefficients_oracle(g, cfg.n_max, tol=cfg.quad_tol, cache=cache)
        summary["junction_unitarity_defect"] = block.unitarity_defect
    fo = first_order_coefficients(g, cfg.n_max, tol=cfg.quad_tol, cache=cache)
    k, kp = cfg.modes
    summary.update(
        beta1=abs(fo.beta1[k - 1, kp - 1]),
        beta1_closed_form=massless_beta_modulus(k, kp),
        alpha1=abs(fo.alpha1[k - 1, kp - 1]),
        alpha1_diagonal_residue=fo.diagonal_residue,
        max_extraction_error=float(np.max(fo.extraction_error)),
    )
    text = json.dumps(summary, indent=2)
    _write(out / "coeffs.json", text + "\n")
    print(text)
    return EXIT_OK


def cmd_evolve(args, cfg: RunConfig) -> int:
    out, cache = _settings(args, cfg)
    rep = analyze(cfg.trajectory(), cfg.geometry, tuple(cfg.modes), n_max=cfg.n_max, tol=cfg.quad_tol, cache=cache)
    data = dict(_header(cfg), **{k: float(v) if isinstance(v, (np.floating, float)) else v
                                  for k, v in rep.as_dict().items()})
    if not np.isfinite(rep.nu_tilde):
        raise NumericFailure("pipeline returned a non-finite symplectic eigenvalue")
    text = json.dumps(data, indent=2)
    _write(out / "report.json", text + "\n")
    print(text)
    return EXIT_OK


def cmd_sweep(args, cfg: RunConfig) -> int:
    out, cache = _settings(args, cfg)
    res = run_sweep(cfg, cache_dir=None if cache is None else cache.directory)
    csv_path = write_csv(res, out / "sweep.csv")
    print(f"wrote {csv_path}")
    if cfg.heatmap and res.is_two_dimensional:
        print(f"wrote {render_heatmap(res, out / 'sweep.svg')}")
    if res.failures:
        print(f"{res.failures} grid point(s) failed and were written as NaN", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_resonance(args, cfg: RunConfig) -> int:
    out, cache = _settings(args, cfg)
    orders = [int(x) for x in args.orders.split(",")]
    rows = resonance_report(cfg, orders, cache=cache, horizon=args.horizon)
    text = report_text(cfg, rows)
    _write(out / "resonance.txt", text)
    _write(out / "resonance.csv", report_csv(cfg, rows))
    print(text, end="")
    return EXIT_OK


def _validation_checks(cfg: RunConfig, cache):
    g = cfg.geometry
    k, kp = cfg.modes
    n = cfg.n_max
    yield "minkowski gram identity (1e-10)", gram_defect(minkowski_slice_modes(range(1, n + 1), g), g) < 1e-10
    if g.h > 0:
        yield "rindler self-normalization (1e-10)", gram_defect(rindler_slice_modes(range(1, n + 1), g), g) < 1e-10
        block = junction_coefficients_oracle(g, n, tol=cfg.quad_tol, cache=cache)
        yield "junction unitarity (1e-6)", block.unitarity_defect < 1e-6
    seg = build_segment_symplectic(cfg.trajectory(), g, (k, kp), n_max=n, tol=cfg.quad_tol, cache=cache)
    yield "symplecticity after renormalization (1e-8)", seg.op.defect < 1e-8
    yield "truncation defect below 1e-6", seg.op.truncation_defect < 1e-6
    if cfg.sample is not None and g.h > 0:
        _, b = coefficients_from_block(seg.op.matrix[:2, 2:])
        closed = sample_scenario_B1(cfg.scenario(), g)
        yield "single-period |B| vs closed form (1e-3 rel, 1e-10 abs)", abs(abs(b) - closed) <= max(1e-3 * closed, 1e-10)


def cmd_validate(args, cfg: RunConfig) -> int:
    _, cache = _settings(args, cfg)
    failed = 0
    for name, ok in _validation_checks(cfg, cache):
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        failed += not ok
    return EXIT_NUMERIC if failed else EXIT_OK


COMMANDS = {
    "coeffs": (cmd_coeffs, "compute and cache Bogoliubov coefficient blocks"),
    "evolve": (cmd_evolve, "run one trajectory and print the entanglement report"),
    "sweep": (cmd_sweep, "evaluate a tau x t grid, write CSV and heatmap"),
    "resonance": (cmd_resonance, "closed-form vs pipeline gains at resonance times"),
    "validate": (cmd_validate, "run the invariant checks for a config"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="YAML run configuration")
    common.add_argument("--out", help="output directory (default: output.dir of the config)")
    common.add_argument("--workers", type=int, help="parallel worker processes for sweeps")
    common.add_argument("--nmax", type=int, help="mode truncation")
    common.add_argument("--no-cache", action="store_true", help="do not read or write the coefficient cache")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="relcavity",
        description=f"Relativistic cavity gate simulator. Cache directory: ${'{'}RELCAVITY_CACHE_DIR{'}'} "
        f"(default {default_cache_dir()}).",
    )
    parser.add_argument("--version", action="version", version=f"relcavity {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "resonance":
            p.add_argument("--orders", default="1,2,3", help="comma-separated resonance orders n")
            p.add_argument("--horizon", type=int, help="largest N for the linearity check")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    func = COMMANDS[args.command][0]
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ConfigWarning)
            cfg = load_config(args.config)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        if args.verbose:
            print(dump_config(cfg), file=sys.stderr)
        return func(args, cfg)
    except (ConfigError, OutOfScopeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (QuadratureError, BogoliubovError, SymplecticError, NumericFailure, np.linalg.LinAlgError,
            CacheVersionError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
