"""Experiment configuration: flat ``key = value`` files with dotted keys.

Example::

    mode = analytic
    name = gg_purity
    params.g_over_k = 0.5
    prep = gg
    time.t_end = 10
    time.n_points = 200
    outputs = purity_whole, purity_field

A JSON sidecar written by ``run`` is also accepted; its ``config`` member holds
the same flat mapping, fully resolved.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .hilbert import PRESETS, AtomicPreparation, ModelParams

MODES = ("analytic", "oracle", "mcwf", "figure")
TIME_UNITS = ("kt", "gt")
GENERATORS = ("effective_rwa", "full_interaction")

ANALYTIC_OUTPUTS = (
    "purity_whole", "purity_field", "purity_atoms", "mean_photon_number",
    "P_e", "P_g", "P_ee", "P_eg", "P_ge", "P_gg", "concurrence", "eof",
    "f1", "f2", "alpha_abs", "C_gg", "C_ee", "C_eg",
)
ORACLE_OUTPUTS = (
    "purity_whole", "purity_field", "purity_atoms", "mean_photon_number",
    "P_e", "P_g", "P_ee", "P_eg", "P_ge", "P_gg", "concurrence", "eof", "leakage",
)
MCWF_OUTPUTS = (
    "mean_photon_number", "P_e", "P_g", "concurrence", "eof",
    "mean_photon_number_se", "P_e_se", "P_g_se", "jumps",
)
OUTPUTS = {"analytic": ANALYTIC_OUTPUTS, "oracle": ORACLE_OUTPUTS, "mcwf": MCWF_OUTPUTS}

_PHYSICAL = ("g", "k", "gamma", "omega_drive", "delta")
_RATIO = ("g_over_k",)
_TILDE = ("omega_tilde", "k_tilde", "gamma_tilde")

_SCALARS = {
    "name": str, "mode": str, "n_max": int,
    "time.t_end": float, "time.n_points": int, "time.unit": str,
    "oracle.generator": str, "oracle.dt_max": float, "oracle.leakage_tol": float,
    "mcwf.n_traj": int, "mcwf.seed": int, "mcwf.dt": float, "mcwf.block_size": int,
    "mcwf.generator": str,
    "wigner.kt": float, "wigner.outcome": str, "wigner.range": float, "wigner.resolution": int,
    "figure.id": str, "figure.n_traj": int, "figure.seed": int, "figure.t_end": float,
    "figure.n_points": int,
    "compare.tol": float, "compare.band": float,
    "prep": str, "prep.label": str, "outputs": str,
}
_KNOWN = set(_SCALARS) | {f"params.{k}" for k in _PHYSICAL + _RATIO + _TILDE} | {f"prep.c{i}" for i in range(1, 5)}


class ConfigError(ValueError):
    """Schema violation in an experiment config."""


def parse_complex(text: str) -> complex:
    """``a+bj`` or polar ``r@phi`` (phi in radians)."""
    s = text.strip().replace(" ", "")
    if "@" in s:
        r, phi = s.split("@", 1)
        return cmath.rect(float(r), float(phi))
    return complex(s)


def format_complex(z: complex) -> str:
    return repr(complex(z)).strip("()")


def read_flat(path) -> dict:
    """Flat str -> str mapping from a key/value file or a JSON sidecar."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        flat = doc.get("config", doc)
        if not isinstance(flat, dict):
            raise ConfigError(f"{path}: 'config' must be an object")
        return {str(k): str(v) for k, v in flat.items()}
    return parse_text(text, str(path))


def parse_text(text: str, origin: str = "<config>") -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{origin}:{lineno}: empty key")
        if key in out:
            raise ConfigError(f"{origin}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


@dataclass
class ExperimentConfig:
    mode: str
    params: ModelParams
    prep: AtomicPreparation
    t_end: float = 10.0
    n_points: int = 200
    time_unit: str = "kt"
    outputs: tuple = ()
    name: str = "experiment"
    n_max: int | None = None
    oracle: dict = field(default_factory=dict)
    mcwf: dict = field(default_factory=dict)
    wigner: dict = field(default_factory=dict)
    figure: dict = field(default_factory=dict)
    compare: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        """Record times in the params' own time unit."""
        return np.linspace(0.0, self.t_end, self.n_points) / self.unit_rate

    @property
    def unit_rate(self) -> float:
        return self.params.k if self.time_unit == "kt" else self.params.g

    def flat(self) -> dict:
        """Resolved flat mapping; parsing it again gives an identical config."""
        p = self.params
        d = {"name": self.name, "mode": self.mode}
        if self.mode == "figure":
            d.update({f"figure.{k}": repr(v) if isinstance(v, float) else str(v) for k, v in self.figure.items()})
            return d
        for k in _PHYSICAL:
            d[f"params.{k}"] = repr(float(getattr(p, k)))
        d["prep.label"] = self.prep.label
        for i, c in enumerate(self.prep.c, 1):
            d[f"prep.c{i}"] = format_complex(c)
        d["time.t_end"] = repr(float(self.t_end))
        d["time.n_points"] = str(self.n_points)
        d["time.unit"] = self.time_unit
        if self.outputs:
            d["outputs"] = ", ".join(self.outputs)
        if self.n_max is not None:
            d["n_max"] = str(self.n_max)
        for section in ("oracle", "mcwf", "wigner", "figure", "compare"):
            for k, v in getattr(self, section).items():
                d[f"{section}.{k}"] = repr(v) if isinstance(v, float) else str(v)
        return d


def _convert(key, value):
    typ = _SCALARS.get(key, float)
    try:
        if typ is int:
            f = float(value)
            if f != int(f):
                raise ValueError
            return int(f)
        return typ(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot read {value!r} as {typ.__name__}") from None


def _params(flat: dict) -> ModelParams:
    given = {k.split(".", 1)[1]: v for k, v in flat.items() if k.startswith("params.")}
    groups = [set(given) & set(g) for g in (_PHYSICAL, _RATIO, _TILDE)]
    used = [g for g in groups if g]
    if not used:
        raise ConfigError("missing model parameters (params.g/params.k, params.g_over_k or params.omega_tilde/k_tilde)")
    if len(used) > 1:
        raise ConfigError("mix of parameter styles: use one of physical rates, g_over_k, or dimensionless tilde values")
    vals = {k: _convert(f"params.{k}", v) for k, v in given.items()}
    try:
        if groups[0]:
            if "g" not in vals or "k" not in vals:
                raise ConfigError("params.g and params.k are both required")
            return ModelParams(**vals)
        if groups[1]:
            return ModelParams.from_ratio(vals["g_over_k"])
        if "k_tilde" not in vals:
            raise ConfigError("params.k_tilde is required with dimensionless parameters")
        return ModelParams.dimensionless(vals.get("omega_tilde", 0.0), vals["k_tilde"], vals.get("gamma_tilde", 0.0))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"invalid parameters: {exc}") from None


def _prep(flat: dict) -> AtomicPreparation:
    coeffs = [flat.get(f"prep.c{i}") for i in range(1, 5)]
    if "prep" in flat:
        if any(c is not None for c in coeffs):
            raise ConfigError("give either 'prep' (a preset) or prep.c1..c4, not both")
        try:
            return AtomicPreparation.preset(flat["prep"])
        except ValueError:
            raise ConfigError(f"unknown preparation {flat['prep']!r}; valid presets: {', '.join(PRESETS)}") from None
    if all(c is None for c in coeffs):
        raise ConfigError(f"missing preparation: set 'prep' to one of {', '.join(PRESETS)} or give prep.c1..c4")
    try:
        c = np.array([parse_complex(x) if x is not None else 0.0 for x in coeffs])
    except ValueError as exc:
        raise ConfigError(f"bad Bell coefficient: {exc}") from None
    norm = math.sqrt(float(np.sum(np.abs(c) ** 2)))
    if abs(norm - 1) > 1e-9:
        raise ConfigError(f"Bell coefficients prep.c1..c4 must be normalized (norm {norm:.12g})")
    if abs(norm - 1) > 1e-14:
        # leave exactly normalized input untouched so resolved configs round-trip bit for bit
        c = c / norm
    return AtomicPreparation(c, flat.get("prep.label", "custom"))


def _section(flat, name):
    pre = name + "."
    return {k[len(pre):]: _convert(k, v) for k, v in sorted(flat.items()) if k.startswith(pre)}


def build_config(flat: dict) -> ExperimentConfig:
    unknown = sorted(set(flat) - _KNOWN)
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}")
    mode = flat.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {mode!r}")
    figure = _section(flat, "figure")
    if mode == "figure":
        if "id" not in figure:
            raise ConfigError("mode = figure needs figure.id")
        # figure parameter sets are fixed; only the figure section matters
        params = ModelParams.from_ratio(1.0)
        prep = AtomicPreparation.preset("gg")
    else:
        params = _params(flat)
        prep = _prep(flat)
    unit = flat.get("time.unit", "kt")
    if unit not in TIME_UNITS:
        raise ConfigError(f"time.unit must be kt or gt, got {unit!r}")
    t_end = _convert("time.t_end", flat.get("time.t_end", "10"))
    n_points = _convert("time.n_points", flat.get("time.n_points", "200"))
    if not t_end > 0 or n_points < 2:
        raise ConfigError("time grid must be strictly increasing: need time.t_end > 0 and time.n_points >= 2")
    outputs = tuple(s.strip() for s in flat.get("outputs", "").split(",") if s.strip())
    if mode in OUTPUTS:
        if not outputs:
            outputs = OUTPUTS[mode][:5] if mode != "mcwf" else MCWF_OUTPUTS
        bad = [o for o in outputs if o not in OUTPUTS[mode]]
        if bad:
            raise ConfigError(f"unknown outputs for mode {mode}: {', '.join(bad)}; valid: {', '.join(OUTPUTS[mode])}")
    oracle = _section(flat, "oracle")
    mcwf = _section(flat, "mcwf")
    for sec in (oracle, mcwf):
        if "generator" in sec and sec["generator"] not in GENERATORS:
            raise ConfigError(f"generator must be one of {', '.join(GENERATORS)}")
    wigner = _section(flat, "wigner")
    if wigner.get("outcome", "ee") not in ("ee", "eg", "ge", "gg"):
        raise ConfigError("wigner.outcome must be one of ee, eg, ge, gg")
    n_max = _convert("n_max", flat["n_max"]) if "n_max" in flat else None
    if n_max is not None and n_max < 2:
        raise ConfigError("n_max must be >= 2")
    return ExperimentConfig(
        mode=mode, params=params, prep=prep, t_end=t_end, n_points=n_points, time_unit=unit,
        outputs=outputs, name=flat.get("name", "experiment"), n_max=n_max, oracle=oracle,
        mcwf=mcwf, wigner=wigner, figure=figure, compare=_section(flat, "compare"),
    )


def load_config(path) -> ExperimentConfig:
    return build_config(read_flat(path))
