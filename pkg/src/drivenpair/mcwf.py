"""Monte-Carlo wave-function (quantum jump) unraveling of the full master equation.

Each step a trajectory jumps through channel i with probability
dt <psi|C_i^+ C_i|psi>.  The (possibly jumped) state is then propagated with
exp(-i H_e dt), H_e = H - (i/2) sum_i C_i^+ C_i, and renormalized.

Reproducibility: trajectory ``j`` draws from its own Philox stream keyed by
SeedSequence([seed, j]).  Trajectories are processed in fixed blocks of
``block_size`` and block results are reduced in block order, so the output
does not depend on how many worker threads run the blocks.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .hilbert import ModelParams, TripartiteState, partial_trace
from .lindblad import IntegrationError, Liouvillian, build_liouvillian
from .metrics import concurrence, entanglement_of_formation

RNG_ALGORITHM = "numpy.random.Philox(key=SeedSequence([seed, trajectory]).generate_state(2, uint64))"
THREADS_ENV = "DRIVENPAIR_THREADS"
CHANNELS = ("cavity", "atom1", "atom2")
NORM_TOL = 1e-10
# deviations below this count as agreement even where the sample error is zero
RESOLUTION = 1e-5


@dataclass
class McwfConfig:
    params: ModelParams
    t_end: float
    dt: float = 1e-3
    n_traj: int = 500
    seed: int = 20240601
    record_stride: int = 10
    n_max: int | None = None
    block_size: int = 25
    max_jump_prob: float = 0.1
    hamiltonian: str = "full_interaction"

    def __post_init__(self):
        if self.n_traj < 1:
            raise ValueError("n_traj must be >= 1")
        if not self.dt > 0 or self.t_end < 0:
            raise ValueError("need dt > 0 and t_end >= 0")
        if self.record_stride < 1 or self.block_size < 1:
            raise ValueError("record_stride and block_size must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def resolved_nmax(self) -> int:
        return self.params.default_nmax() if self.n_max is None else int(self.n_max)


@dataclass
class TrajectoryEnsemble:
    times: np.ndarray
    snapshots: np.ndarray  # (n_records, dim, dim) ensemble-averaged rho
    n_max: int
    n_traj: int
    jump_log: list  # per trajectory: list of (time, channel)
    stats: dict  # observable -> (mean, stderr) over trajectories, per record
    norms: dict = field(default_factory=dict)
    rng_algorithm: str = RNG_ALGORITHM

    def state(self, idx: int) -> TripartiteState:
        return TripartiteState(self.snapshots[idx], self.n_max, "standard")

    def total_jumps(self, channel: str | None = None) -> int:
        return sum(1 for log in self.jump_log for _, ch in log if channel in (None, ch))


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    key = np.random.SeedSequence([int(seed), int(index)]).generate_state(2, np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def worker_count(default: int | None = None) -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return default or 1


class _Engine:
    def __init__(self, cfg: McwfConfig, L: Liouvillian | None = None):
        self.cfg = cfg
        if L is None:
            L = build_liouvillian(cfg.params, cfg.hamiltonian, cfg.resolved_nmax())
        n = L.n_max
        self.n_max = n
        self.dim = L.dim
        self.U = expm(-1j * L.effective_hamiltonian() * cfg.dt)
        self.channels = []
        labels = {lab: (r, C) for r, C, lab in L.dissipators}
        for name in CHANNELS:
            r, C = labels.get(name, (0.0, None))
            if r > 0:
                self.channels.append((name, np.sqrt(r) * C))
        diag_n = np.tile(np.arange(n, dtype=float), 4)
        diag_g1 = np.repeat([0.0, 0.0, 1.0, 1.0], n)  # atom 1 in |g>: basis indices ge, gg
        self.observables = {"mean_photon_number": diag_n, "P_g": diag_g1, "P_e": 1.0 - diag_g1}

    def run_block(self, psi0, indices):
        cfg = self.cfg
        B = len(indices)
        n_steps = cfg.n_steps
        draws = np.stack([trajectory_rng(cfg.seed, j).random((n_steps, 2)) for j in indices], axis=1)
        psi = np.repeat(psi0[:, None], B, axis=1)
        rec_steps = range(0, n_steps + 1, cfg.record_stride)
        n_rec = len(rec_steps)
        rho_sum = np.zeros((n_rec, self.dim, self.dim), dtype=complex)
        obs = {k: np.zeros((n_rec, B)) for k in self.observables}
        logs = [[] for _ in indices]
        max_dp = 0.0
        norm_dev = 0.0
        r = 0
        for step in range(n_steps + 1):
            if step % cfg.record_stride == 0:
                rho_sum[r] = psi @ psi.conj().T
                pops = np.abs(psi) ** 2
                for k, w in self.observables.items():
                    obs[k][r] = w @ pops
                r += 1
            if step == n_steps:
                break
            if self.channels:
                jumped_states = [C @ psi for _, C in self.channels]
                dp = np.stack([np.sum(np.abs(s) ** 2, axis=0) for s in jumped_states]) * cfg.dt
                dp_tot = dp.sum(axis=0)
                max_dp = max(max_dp, float(dp_tot.max()))
                if dp_tot.max() > cfg.max_jump_prob:
                    raise IntegrationError(
                        f"jump probability {dp_tot.max():.3g} per step exceeds {cfg.max_jump_prob}; reduce dt")
                u = draws[step]
                jump = u[:, 0] < dp_tot
            else:
                jump = np.zeros(B, dtype=bool)
            if jump.any():
                # jump at the start of the step, then propagate over it; dropping
                # the propagation would lag every jumped trajectory by dt
                t = step * cfg.dt
                for b in np.flatnonzero(jump):
                    cum = np.cumsum(dp[:, b]) / dp_tot[b]
                    ch = int(np.searchsorted(cum, draws[step, b, 1], side="right"))
                    ch = min(ch, len(self.channels) - 1)
                    psi[:, b] = jumped_states[ch][:, b]
                    logs[b].append((t, self.channels[ch][0]))
            new = self.U @ psi
            norms = np.linalg.norm(new, axis=0)
            psi = new / norms
            norm_dev = max(norm_dev, float(np.max(np.abs(np.linalg.norm(psi, axis=0) - 1))))
        return rho_sum, obs, logs, max_dp, norm_dev


def _initial_vector(psi0, dim):
    if isinstance(psi0, TripartiteState):
        raise TypeError("run_ensemble needs a pure state vector")
    v = np.asarray(psi0, dtype=complex).reshape(-1)
    if v.shape[0] != dim:
        raise ValueError(f"initial vector has dimension {v.shape[0]}, expected {dim}")
    nrm = np.linalg.norm(v)
    if abs(nrm - 1) > 1e-10:
        raise ValueError(f"initial state is not normalized (norm {nrm})")
    return v


def run_ensemble(psi0, cfg: McwfConfig, workers: int | None = None,
                 generator: Liouvillian | None = None) -> TrajectoryEnsemble:
    """Simulate ``cfg.n_traj`` trajectories from the pure state ``psi0`` (standard basis).

    ``generator`` overrides the model built from ``cfg.params`` (its dissipators
    must carry the labels cavity/atom1/atom2).
    """
    eng = _Engine(cfg, generator)
    v = _initial_vector(psi0, eng.dim)
    blocks = [list(range(s, min(s + cfg.block_size, cfg.n_traj))) for s in range(0, cfg.n_traj, cfg.block_size)]
    workers = worker_count(workers)
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda idx: eng.run_block(v, idx), blocks))
    else:
        results = [eng.run_block(v, idx) for idx in blocks]

    rho = np.zeros_like(results[0][0])
    per_traj = {k: [] for k in eng.observables}
    logs = []
    max_dp = 0.0
    norm_dev = 0.0
    for rho_b, obs_b, logs_b, dp_b, nd_b in results:
        rho += rho_b
        for k in per_traj:
            per_traj[k].append(obs_b[k])
        logs.extend(logs_b)
        max_dp = max(max_dp, dp_b)
        norm_dev = max(norm_dev, nd_b)
    if norm_dev > NORM_TOL:
        raise IntegrationError(f"trajectory norm drifted by {norm_dev:.3g}")
    rho /= cfg.n_traj
    stats = {}
    for k, parts in per_traj.items():
        vals = np.concatenate(parts, axis=1)
        se = vals.std(axis=1, ddof=1) / np.sqrt(cfg.n_traj) if cfg.n_traj > 1 else np.zeros(vals.shape[0])
        stats[k] = (vals.mean(axis=1), se)
    times = np.arange(0, cfg.n_steps + 1, cfg.record_stride) * cfg.dt
    return TrajectoryEnsemble(times, rho, eng.n_max, cfg.n_traj, logs, stats,
                              {"max_jump_prob": max_dp, "max_norm_deviation": norm_dev})


def ensemble_observables(ens: TrajectoryEnsemble) -> dict:
    """Time series computed from the averaged snapshots."""
    n = ens.n_max
    if ens.snapshots.shape[0] == 0:
        raise ValueError("empty ensemble")
    nvec = np.tile(np.arange(n, dtype=float), 4)
    diag = np.real(np.diagonal(ens.snapshots, axis1=1, axis2=2))
    atoms = np.array([partial_trace(ens.state(i), "atoms").matrix for i in range(len(ens.times))])
    pg = diag[:, 2 * n:].sum(axis=1)
    conc = np.array([concurrence(a).concurrence for a in atoms])
    return {
        "time": ens.times,
        "mean_photon_number": diag @ nvec,
        "P_g": pg,
        "P_e": 1 - pg,
        "atomic_rho": atoms,
        "concurrence": conc,
        "eof": np.array([entanglement_of_formation(c) for c in conc]),
    }


@dataclass
class ConvergenceReport:
    max_deviation: dict
    z_scores: dict
    fraction_outside: dict
    band: float
    max_fraction: float

    @property
    def passed(self) -> bool:
        return all(f <= self.max_fraction for f in self.fraction_outside.values())

    def failures(self):
        return [k for k, f in self.fraction_outside.items() if f > self.max_fraction]


def convergence_report(ens: TrajectoryEnsemble, reference: dict, times=None,
                       band: float = 3.0, max_fraction: float = 0.01,
                       atol: float = RESOLUTION) -> ConvergenceReport:
    """Compare per-trajectory-averaged observables with a reference time series.

    ``reference`` maps observable names (keys of ``ens.stats``) to arrays on the
    ensemble's record times.  z = deviation / sqrt(stderr^2 + atol^2).  The
    floor ``atol`` matters before the first jump, when every trajectory is
    identical and the sample error is zero although the true one is not.
    """
    if times is not None and (len(times) != len(ens.times) or not np.allclose(times, ens.times)):
        raise ValueError("reference time grid does not match the ensemble record times")
    maxdev, zs, frac = {}, {}, {}
    for name, ref in reference.items():
        mean, se = ens.stats[name]
        ref = np.asarray(ref, dtype=float)
        if ref.shape != mean.shape:
            raise ValueError(f"reference for {name} has shape {ref.shape}, expected {mean.shape}")
        dev = mean - ref
        scale = np.sqrt(se ** 2 + atol ** 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(scale > 0, dev / np.where(scale > 0, scale, 1), np.where(dev != 0, np.inf, 0.0))
        maxdev[name] = float(np.max(np.abs(dev)))
        zs[name] = z
        frac[name] = float(np.mean(np.abs(z) > band))
    return ConvergenceReport(maxdev, zs, frac, band, max_fraction)
