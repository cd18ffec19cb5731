"""Command-line entry point.

    python3 -m drivenpair run CONFIG [--out DIR]
    python3 -m drivenpair figure ID [--out DIR] [--n-traj N] [--seed S]
    python3 -m drivenpair golden-check DIR [--update]
    python3 -m drivenpair oracle-compare CONFIG

Exit codes: 0 success, 1 comparison failed, 2 bad config, 3 numerical guard
tripped, 4 I/O failure.  Set DRIVENPAIR_THREADS to run trajectory blocks on
several threads.
"""
from __future__ import annotations

import argparse
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from . import analytic as an
from .config import ConfigError, load_config
from .experiments import read_csv, run_experiment, run_mcwf, run_oracle, write_outputs
from .figures import FIGURES, figure
from .lindblad import IntegrationError
from .mcwf import RESOLUTION

EXIT_OK, EXIT_FAIL, EXIT_SCHEMA, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3, 4
GOLDEN_SUFFIX = ".cfg"


class GoldenMissing(OSError):
    pass


def _say(msg):
    print(msg, flush=True)


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    res = run_experiment(cfg)
    for p in write_outputs(res, args.out, __version__):
        _say(f"wrote {p}")
    return EXIT_OK


def cmd_figure(args) -> int:
    opts = {}
    if args.n_traj is not None:
        opts["n_traj"] = args.n_traj
    if args.seed is not None:
        opts["seed"] = args.seed
    try:
        res = figure(args.id, opts)
    except ValueError as exc:
        if args.id.strip().lower() not in FIGURES:
            raise ConfigError(str(exc)) from None
        raise
    res.config["name"] = args.id
    for p in write_outputs(res, args.out, __version__):
        _say(f"wrote {p}")
    return EXIT_OK


def _band_compare(golden, fresh, band=3.0, max_fraction=0.01):
    """Statistical comparison of MCWF tables on columns that carry a *_se partner."""
    hg, dg = golden
    hf, df = fresh
    if hg != hf or dg.shape != df.shape:
        return False, "column layout changed"
    worst = 0.0
    for i, name in enumerate(hg):
        if name + "_se" not in hg:
            continue
        j = hg.index(name + "_se")
        tol = band * np.sqrt(dg[:, j] ** 2 + df[:, j] ** 2) + 1e-12
        frac = float(np.mean(np.abs(dg[:, i] - df[:, i]) > tol))
        worst = max(worst, frac)
        if frac > max_fraction:
            return False, f"{name}: {frac:.1%} of points outside {band:g}-sigma bands"
    return True, f"worst fraction outside bands {worst:.1%}"


def golden_check(directory, update: bool = False) -> list:
    """Re-run every *.cfg in ``directory`` and compare with the stored outputs.

    Analytic and oracle CSVs must match byte for byte; MCWF CSVs must agree
    within statistical bands.  Returns (name, passed, detail) triples.
    """
    d = Path(directory)
    configs = sorted(d.glob(f"*{GOLDEN_SUFFIX}"))
    if not configs:
        raise GoldenMissing(f"no *{GOLDEN_SUFFIX} configs in {d}")
    report = []
    with tempfile.TemporaryDirectory() as tmp:
        for cpath in configs:
            cfg = load_config(cpath)
            res = run_experiment(cfg)
            files = write_outputs(res, tmp, __version__)
            if update:
                for f in files:
                    shutil.copyfile(f, d / f.name)
                report.append((cpath.name, True, "updated"))
                continue
            for f in files:
                if f.suffix != ".csv":
                    continue
                gold = d / f.name
                if not gold.exists():
                    raise GoldenMissing(f"missing golden file {gold}")
                if cfg.mode == "mcwf":
                    ok, detail = _band_compare(read_csv(gold), read_csv(f))
                else:
                    ok = gold.read_bytes() == f.read_bytes()
                    detail = "byte-identical" if ok else "bytes differ"
                report.append((f.name, ok, detail))
    return report


def cmd_golden(args) -> int:
    report = golden_check(args.dir, args.update)
    for name, ok, detail in report:
        _say(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return EXIT_OK if all(ok for _, ok, _ in report) else EXIT_FAIL


def cmd_compare(args) -> int:
    cfg = load_config(args.config)
    if cfg.mode in ("analytic", "oracle"):
        tol = cfg.compare.get("tol", 1e-6)
        res, traj = run_oracle(cfg)
        worst = 0.0
        for t, rho in zip(traj.times, traj.states):
            ref = an.assemble_full_state(t * cfg.params.k, cfg.prep, cfg.params, traj.n_max, basis="standard")
            worst = max(worst, float(np.max(np.abs(ref.matrix - rho))))
        ok = worst < tol
        _say(f"{'PASS' if ok else 'FAIL'} max |rho_analytic - rho_oracle| = {worst:.3e} (tol {tol:g}, "
             f"generator {res.diagnostics['generator']}, n_max {traj.n_max})")
        return EXIT_OK if ok else EXIT_FAIL
    if cfg.mode == "mcwf":
        band = cfg.compare.get("band", 3.0)
        res = run_mcwf(cfg)
        ocfg = load_config(args.config)
        ocfg.oracle = {"generator": cfg.mcwf.get("generator", "full_interaction")}
        ocfg.n_max = res.diagnostics["n_max"]
        ocfg.outputs = ("mean_photon_number", "P_g", "P_e")
        oracle = run_oracle(ocfg)[0].tables[0]
        table = res.tables[0]
        ok_all = True
        for name in ocfg.outputs:
            if name not in table.columns or name + "_se" not in table.columns:
                continue
            dev = table.column(name) - oracle.column(name)
            se = table.column(name + "_se")
            z = dev / np.sqrt(se ** 2 + RESOLUTION ** 2)
            frac = float(np.mean(np.abs(z) > band))
            ok = frac <= 0.01
            ok_all &= ok
            _say(f"{'PASS' if ok else 'FAIL'} {name}: max dev {np.max(np.abs(dev)):.3e}, "
                 f"{frac:.1%} of points beyond {band:g} standard errors")
        return EXIT_OK if ok_all else EXIT_FAIL
    raise ConfigError(f"oracle-compare does not apply to mode {cfg.mode!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="drivenpair", description="Driven atom pair in a lossy cavity.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run one experiment config")
    p.add_argument("config")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("figure", help="emit the data behind a figure")
    p.add_argument("id", help=", ".join(FIGURES))
    p.add_argument("--out", default=".")
    p.add_argument("--n-traj", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_figure)
    p = sub.add_parser("golden-check", help="compare fresh outputs with stored golden files")
    p.add_argument("dir")
    p.add_argument("--update", action="store_true", help="overwrite the golden files")
    p.set_defaults(func=cmd_golden)
    p = sub.add_parser("oracle-compare", help="check a config against the master-equation oracle")
    p.add_argument("config")
    p.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (IntegrationError, FloatingPointError) as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"invalid request: {exc}", file=sys.stderr)
        return EXIT_SCHEMA


if __name__ == "__main__":
    sys.exit(main())
