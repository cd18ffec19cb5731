"""Data behind each figure (fig2 ... fig9), each with its fixed parameter sets.

Every generator returns a RunResult whose tables are written side by side.
Column names carry the swept parameter after an ``@``, e.g. ``eof@g/k=0.5``.
"""
from __future__ import annotations

import math

import numpy as np

from . import analytic as an
from .experiments import RunResult, Table
from .hilbert import AtomicPreparation, ModelParams
from .mcwf import McwfConfig, ensemble_observables, run_ensemble
from .metrics import concurrence, integrate_grid, wigner_numeric

FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9")

RATIOS_PURITY = (0.05, 0.2, 0.5, 2.0)
RATIOS_ENTANGLEMENT = (0.1, 0.5, 1.0, 5.0)
WIGNER_CASES = (("fig7a", "ee", 80.0), ("fig7b", "eg", 40.0))
WIGNER_KT = 0.05
DRIVES = (0.5, 1.0, 2.0, 20.0)
ATOMIC_DECAYS = (0.001, 0.01, 0.1)


def _kt_grid(opts, t_end=10.0, n_points=201):
    return np.linspace(0.0, opts.get("t_end", t_end), opts.get("n_points", n_points))


def _ratio_sweep(name, kt, ratios, prep, fn, label):
    cols = [kt]
    names = ["kt"]
    for r in ratios:
        p = ModelParams.from_ratio(r)
        cols.append(np.array([fn(x, prep, p) for x in kt], dtype=float))
        names.append(f"{label}@g/k={r:g}")
    return Table(name, names, np.column_stack(cols))


def fig2(opts):
    kt = _kt_grid(opts)
    gg = AtomicPreparation.preset("gg")
    t = _ratio_sweep("fig2", kt, RATIOS_PURITY, gg, lambda x, c, p: an.purities(x, c, p)["whole"], "purity_whole")
    return RunResult([t], {"prep": "gg"})


def fig3(opts):
    kt = _kt_grid(opts)
    gg = AtomicPreparation.preset("gg")
    t = _ratio_sweep("fig3", kt, RATIOS_PURITY, gg, lambda x, c, p: an.purities(x, c, p)["field"], "purity_field")
    return RunResult([t], {"prep": "gg"})


def fig4(opts):
    # surface plot over (kt, g/k); kt = 0 is excluded because C_lm is 0/0 there
    kt = np.linspace(0.05, opts.get("t_end", 10.0), opts.get("n_points", 200))
    ratios = np.round(np.linspace(0.1, 2.0, 20), 10)
    rows = []
    for r in ratios:
        c = an.correlation_functions(kt, ModelParams.from_ratio(float(r)))
        rows.append(np.column_stack([kt, np.full_like(kt, r), c["C_gg"], c["C_eg"], c["C_ee"]]))
    t = Table("fig4", ["kt", "g_over_k", "C_gg", "C_eg", "C_ee"], np.vstack(rows))
    return RunResult([t], {"prep": "gg"})


def _eof(kt, prep, params):
    return concurrence(an.atomic_reduced(kt, prep, params)).eof


def fig5(opts):
    kt = _kt_grid(opts)
    s = 1 / math.sqrt(2)
    partial = AtomicPreparation([s, s * np.exp(1j * math.pi / 4), 0, 0], "phi+ + e^(i pi/4) phi-")
    a = _ratio_sweep("fig5a", kt, RATIOS_ENTANGLEMENT, partial, _eof, "eof")
    b = _ratio_sweep("fig5b", kt, RATIOS_ENTANGLEMENT, AtomicPreparation.preset("phi+"), _eof, "eof")
    return RunResult([a, b], {"prep_a": partial.label, "prep_b": "phi+"})


def fig6(opts):
    kt = _kt_grid(opts)
    t = _ratio_sweep("fig6", kt, RATIOS_ENTANGLEMENT, AtomicPreparation.preset("phi+"),
                     lambda x, c, p: an.atomic_probabilities(x, c, p)["P_ee"], "P_ee")
    return RunResult([t], {"prep": "phi+"})


def fig7(opts):
    half = opts.get("range", 6.0)
    res = opts.get("resolution", 121)
    axis = np.linspace(-half, half, res)
    re, im = np.meshgrid(axis, axis)
    beta = re + 1j * im
    tables, diag = [], {"kt": WIGNER_KT}
    for name, outcome, ratio in WIGNER_CASES:
        p = ModelParams.from_ratio(ratio)
        W = an.wigner_closed_form(beta, WIGNER_KT, outcome, p)
        # numeric cross-check with a cutoff sized to |alpha(kt)|, not to 2g/k
        n = an.nmax_at(WIGNER_KT, p)
        rho = an.conditional_field(WIGNER_KT, outcome, p, n).matrix
        Wn = np.array([wigner_numeric(rho, row) for row in beta])
        diag[name] = {
            "outcome": outcome, "g_over_k": ratio, "n_max": n,
            "alpha_abs": float(an.profile(WIGNER_KT, p).alpha_abs),
            "integral": integrate_grid(W, axis, axis),
            "max_closed_vs_numeric": float(np.max(np.abs(W - Wn))),
        }
        tables.append(Table(name, ["re_beta", "im_beta", "W"], np.column_stack([re.ravel(), im.ravel(), W.ravel()])))
    return RunResult(tables, diag)


def _mcwf_grid(opts, t_end=5.0, n_points=501):
    t_end = opts.get("t_end", t_end)
    n_points = opts.get("n_points", n_points)
    spacing = t_end / (n_points - 1)
    stride = max(1, math.ceil(spacing / 1e-3 - 1e-9))
    return t_end, spacing / stride, stride


def _mcwf(params, prep, opts):
    t_end, dt, stride = _mcwf_grid(opts)
    cfg = McwfConfig(params=params, t_end=t_end, dt=dt, n_traj=opts.get("n_traj", 500),
                     seed=opts.get("seed", 20240601), record_stride=stride)
    n = cfg.resolved_nmax()
    vac = np.zeros(n)
    vac[0] = 1.0
    ens = run_ensemble(np.kron(prep.vector("standard"), vac), cfg)
    return ens, ensemble_observables(ens)


def fig8(opts):
    tables, diag = [], {"k_tilde": 1.0, "gamma_tilde": 0.0}
    for label in ("phi+", "phi-"):
        prep = AtomicPreparation.preset(label)
        cols, names = [], []
        for om in DRIVES:
            p = ModelParams.dimensionless(om, 1.0, 0.0)
            ens, obs = _mcwf(p, prep, opts)
            if not cols:
                cols.append(ens.times)
                names.append("gt")
            cols += [obs["mean_photon_number"], obs["P_g"], obs["eof"]]
            names += [f"mean_photon_number@omega={om:g}", f"P_g@omega={om:g}", f"eof@omega={om:g}"]
            diag[f"{label}@omega={om:g}"] = {"n_max": ens.n_max, **ens.norms}
        # the closed form does not depend on the drive strength
        ref = ModelParams.dimensionless(DRIVES[-1], 1.0, 0.0)
        kt = cols[0] * ref.k
        cols.append(an.mean_photon_number(kt, prep, ref))
        cols.append(np.array([an.atomic_probabilities(x, prep, ref)["P_g"] for x in kt]))
        names += ["mean_photon_number@analytic", "P_g@analytic"]
        tables.append(Table(f"fig8_{label}", names, np.column_stack(cols)))
    diag["n_traj"] = opts.get("n_traj", 500)
    return RunResult(tables, diag, seed=opts.get("seed", 20240601))


def fig9(opts):
    prep = AtomicPreparation.preset("phi-")
    cols, names, diag = [], [], {"omega_tilde": 20.0, "k_tilde": 1.0}
    for gam in ATOMIC_DECAYS:
        p = ModelParams.dimensionless(20.0, 1.0, gam)
        ens, obs = _mcwf(p, prep, opts)
        if not cols:
            cols.append(ens.times)
            names.append("gt")
        cols += [obs["mean_photon_number"], obs["eof"]]
        names += [f"mean_photon_number@gamma={gam:g}", f"eof@gamma={gam:g}"]
        diag[f"gamma={gam:g}"] = {"n_max": ens.n_max, **ens.norms,
                                  "atomic_jumps": ens.total_jumps("atom1") + ens.total_jumps("atom2")}
    diag["n_traj"] = opts.get("n_traj", 500)
    return RunResult([Table("fig9", names, np.column_stack(cols))], diag, seed=opts.get("seed", 20240601))


def figure(fig_id: str, opts: dict | None = None) -> RunResult:
    fig_id = fig_id.strip().lower()
    if fig_id not in FIGURES:
        raise ValueError(f"unknown figure {fig_id!r}; choose from {', '.join(FIGURES)}")
    res = globals()[fig_id](dict(opts or {}))
    res.config = {"mode": "figure", "figure.id": fig_id,
                  **{f"figure.{k}": repr(v) if isinstance(v, float) else str(v)
                     for k, v in (opts or {}).items() if k != "id"}}
    return res
