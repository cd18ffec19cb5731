"""Turn an ExperimentConfig into tables, and tables into CSV + JSON files."""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analytic as an
from .config import ConfigError, ExperimentConfig
from .hilbert import AtomicPreparation, ModelParams, TruncationWarning, coherent_state_vector, partial_trace
from .lindblad import build_liouvillian, grid_config, integrate
from .mcwf import McwfConfig, ensemble_observables, run_ensemble
from .metrics import concurrence, purity

UNITS = {
    "kt": "1", "gt": "1",
    "mean_photon_number": "photons", "mean_photon_number_se": "photons",
    "eof": "ebit", "jumps": "count",
    "re_beta": "sqrt(photons)", "im_beta": "sqrt(photons)", "W": "1/area",
}
PROBABILITY = ("P_e", "P_g", "P_ee", "P_eg", "P_ge", "P_gg", "P_e_se", "P_g_se", "leakage")


def unit_of(name: str) -> str:
    base = name.split("@", 1)[0]
    if base in UNITS:
        return UNITS[base]
    return "probability" if base in PROBABILITY else "1"


@dataclass
class Table:
    name: str
    columns: list
    data: np.ndarray  # (rows, columns)

    def column(self, label: str) -> np.ndarray:
        return self.data[:, self.columns.index(label)]

    def header(self) -> list:
        return [f"{c} [{unit_of(c)}]" for c in self.columns]


@dataclass
class RunResult:
    tables: list
    diagnostics: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    seed: int | None = None


def _time_columns(cfg: ExperimentConfig):
    t = cfg.times
    return {"kt": t * cfg.params.k, "gt": t * cfg.params.g}


def _observables_from_state(rho_full, n_max):
    """Observables of a standard-basis tripartite density matrix."""
    from .hilbert import TripartiteState

    st = TripartiteState(rho_full, n_max, "standard")
    atoms = partial_trace(st, "atoms")
    field_rho = partial_trace(st, "field")
    P = np.real(np.diag(atoms.matrix))
    c = concurrence(atoms)
    return {
        "purity_whole": purity(rho_full),
        "purity_field": purity(field_rho),
        "purity_atoms": purity(atoms.matrix),
        "mean_photon_number": float(np.real(np.diag(field_rho)) @ np.arange(n_max)),
        "P_ee": P[0], "P_eg": P[1], "P_ge": P[2], "P_gg": P[3],
        "P_e": P[0] + P[1], "P_g": P[2] + P[3],
        "concurrence": c.concurrence, "eof": c.eof,
        "leakage": st.leakage(),
    }


def analytic_point(kt: float, prep: AtomicPreparation, params: ModelParams, outputs) -> dict:
    out = {}
    need = set(outputs)
    if need & {"purity_whole", "purity_field", "purity_atoms"}:
        pur = an.purities(kt, prep, params)
        out.update({f"purity_{k}": float(v) for k, v in pur.items()})
    if "mean_photon_number" in need:
        out["mean_photon_number"] = float(an.mean_photon_number(kt, prep, params))
    if need & {"P_e", "P_g", "P_ee", "P_eg", "P_ge", "P_gg"}:
        out.update(an.atomic_probabilities(kt, prep, params))
    if need & {"concurrence", "eof"}:
        c = concurrence(an.atomic_reduced(kt, prep, params))
        out["concurrence"], out["eof"] = c.concurrence, c.eof
    if need & {"f1", "f2", "alpha_abs"}:
        p = an.profile(kt, params)
        out.update(f1=float(p.f1), f2=float(p.f2), alpha_abs=float(p.alpha_abs))
    if need & {"C_gg", "C_ee", "C_eg"}:
        if not np.allclose(prep.vector("standard"), AtomicPreparation.preset("gg").vector("standard"), atol=1e-12):
            raise ConfigError("correlation outputs are defined for prep = gg only")
        if kt > 0:
            out.update({k: float(v) for k, v in an.correlation_functions(kt, params).items()})
        else:
            # 0/0 at the initial instant
            out.update(C_gg=math.nan, C_ee=math.nan, C_eg=math.nan)
    return out


def run_analytic(cfg: ExperimentConfig) -> RunResult:
    cfg.params.require_resonant()
    cols = _time_columns(cfg)
    rows = [analytic_point(kt, cfg.prep, cfg.params, cfg.outputs) for kt in cols["kt"]]
    data = np.column_stack([cols["kt"], cols["gt"]] + [[r[o] for r in rows] for o in cfg.outputs])
    n = cfg.n_max or cfg.params.default_nmax()
    a_max = float(np.max(an.profile(cols["kt"], cfg.params).alpha_abs))
    with warnings.catch_warnings():
        # reported in the sidecar instead
        warnings.simplefilter("ignore", TruncationWarning)
        _, deficit = coherent_state_vector(a_max, n, return_deficit=True)
    tables = [Table(cfg.name, ["kt", "gt"] + list(cfg.outputs), data)]
    if cfg.wigner:
        tables.append(wigner_table(cfg))
    diag = {"n_max": n, "max_alpha_abs": a_max, "coherent_deficit": deficit}
    return RunResult(tables, diag)


def wigner_table(cfg: ExperimentConfig) -> Table:
    w = cfg.wigner
    if "kt" not in w:
        raise ConfigError("wigner section needs wigner.kt")
    if cfg.prep.label != "gg" and not np.allclose(cfg.prep.vector(), AtomicPreparation.preset("gg").vector(), atol=1e-12):
        raise ConfigError("conditional Wigner functions are defined for prep = gg only")
    half = w.get("range", 3.0)
    res = w.get("resolution", 41)
    axis = np.linspace(-half, half, res)
    beta = axis[None, :] + 1j * axis[:, None]
    W = an.wigner_closed_form(beta, w["kt"], w.get("outcome", "ee"), cfg.params)
    re, im = np.meshgrid(axis, axis)
    return Table(f"{cfg.name}_wigner", ["re_beta", "im_beta", "W"],
                 np.column_stack([re.ravel(), im.ravel(), np.asarray(W).ravel()]))


def run_oracle(cfg: ExperimentConfig):
    """Integrate the master equation; returns (RunResult, Trajectory)."""
    gen = cfg.oracle.get("generator", "effective_rwa")
    n = cfg.n_max or cfg.params.default_nmax()
    L = build_liouvillian(cfg.params, gen, n)
    t = cfg.times
    kw = {}
    if "leakage_tol" in cfg.oracle:
        kw["leakage_tol"] = cfg.oracle["leakage_tol"]
    icfg = grid_config(L, t[-1], len(t), cfg.oracle.get("dt_max"), **kw)
    vac = np.zeros((n, n))
    vac[0, 0] = 1.0
    rho0 = np.kron(cfg.prep.density("standard").matrix, vac)
    traj = integrate(rho0, L, icfg)
    rows = [_observables_from_state(s, n) for s in traj.states]
    cols = _time_columns(cfg)
    data = np.column_stack([cols["kt"], cols["gt"]] + [[r[o] for r in rows] for o in cfg.outputs])
    diag = {"n_max": n, "generator": gen, "dt": icfg.dt, "max_leakage": float(traj.leakage.max()),
            "max_trace_drift_per_step": traj.max_trace_drift}
    return RunResult([Table(cfg.name, ["kt", "gt"] + list(cfg.outputs), data)], diag), traj


def mcwf_config(cfg: ExperimentConfig) -> McwfConfig:
    m = cfg.mcwf
    t = cfg.times
    dt = m.get("dt", 1e-3 * cfg.unit_rate / cfg.params.g) / cfg.unit_rate
    spacing = t[1] - t[0]
    stride = int(round(spacing / dt))
    if stride < 1 or abs(stride * dt - spacing) > 1e-9 * spacing:
        raise ConfigError(f"mcwf.dt must divide the record spacing {spacing * cfg.unit_rate:.6g} ({cfg.time_unit})")
    return McwfConfig(
        params=cfg.params, t_end=float(t[-1]), dt=spacing / stride, n_traj=m.get("n_traj", 500),
        seed=m.get("seed", 20240601), record_stride=stride, n_max=cfg.n_max,
        block_size=m.get("block_size", 25), hamiltonian=m.get("generator", "full_interaction"),
    )


def run_mcwf(cfg: ExperimentConfig) -> RunResult:
    mcfg = mcwf_config(cfg)
    n = mcfg.resolved_nmax()
    vac = np.zeros(n)
    vac[0] = 1.0
    ens = run_ensemble(np.kron(cfg.prep.vector("standard"), vac), mcfg)
    obs = ensemble_observables(ens)
    jump_times = np.sort([tj for log in ens.jump_log for tj, _ in log])
    series = {
        "mean_photon_number": obs["mean_photon_number"], "P_e": obs["P_e"], "P_g": obs["P_g"],
        "concurrence": obs["concurrence"], "eof": obs["eof"],
        "mean_photon_number_se": ens.stats["mean_photon_number"][1],
        "P_e_se": ens.stats["P_e"][1], "P_g_se": ens.stats["P_g"][1],
        # jumps recorded at the start of step s happen before the record at s+1
        "jumps": np.searchsorted(jump_times, ens.times, side="left").astype(float),
    }
    cols = _time_columns(cfg)
    data = np.column_stack([cols["kt"], cols["gt"]] + [series[o] for o in cfg.outputs])
    leak = max(ens.state(i).leakage() for i in range(len(ens.times)))
    diag = {"n_max": n, "generator": mcfg.hamiltonian, "dt": mcfg.dt, "n_traj": mcfg.n_traj,
            "rng_algorithm": ens.rng_algorithm, "max_leakage": float(leak), **ens.norms,
            "jumps_by_channel": {ch: ens.total_jumps(ch) for ch in ("atom1", "atom2", "cavity")}}
    return RunResult([Table(cfg.name, ["kt", "gt"] + list(cfg.outputs), data)], diag, seed=mcfg.seed)


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    if cfg.mode == "analytic":
        res = run_analytic(cfg)
    elif cfg.mode == "oracle":
        res = run_oracle(cfg)[0]
    elif cfg.mode == "mcwf":
        res = run_mcwf(cfg)
    elif cfg.mode == "figure":
        from .figures import figure

        res = figure(cfg.figure["id"], cfg.figure)
    else:
        raise ConfigError(f"unknown mode {cfg.mode!r}")
    res.config = cfg.flat()
    return res


# ---------------------------------------------------------------------------
# output

def format_value(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(table: Table, path: Path):
    lines = [",".join(table.header())]
    lines += [",".join(format_value(v) for v in row) for row in table.data]
    path.write_text("\n".join(lines) + "\n")


def read_csv(path: Path):
    rows = Path(path).read_text().splitlines()
    header = [h.rsplit(" [", 1)[0] for h in rows[0].split(",")]
    data = np.array([[float(v) for v in r.split(",")] for r in rows[1:]])
    return header, data


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    return x


def write_outputs(result: RunResult, out_dir, version: str) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for table in result.tables:
        p = out / f"{table.name}.csv"
        write_csv(table, p)
        written.append(p)
    side = {
        "config": result.config,
        "version": version,
        "seed": result.seed,
        "tables": {t.name: t.header() for t in result.tables},
        "truncation": _jsonable(result.diagnostics),
    }
    p = out / f"{result.tables[0].name}.json"
    p.write_text(json.dumps(side, indent=2, sort_keys=True) + "\n")
    written.append(p)
    return written
