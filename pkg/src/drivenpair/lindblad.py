"""Brute-force fixed-step RK4 integrator of the interaction-picture master equation.

This is the ground truth against which the closed forms and the trajectory
engine are checked; it knows nothing about the block structure of the
analytic solution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .hilbert import FockSpace, ModelParams, TripartiteState, build_operator

TRACE_DRIFT_TOL = 1e-10
LEAKAGE_TOL = 1e-6
# RK4 is stable for |lambda dt| up to ~2.8 on the imaginary axis
STEP_BOUND = 2.0
# default ||L|| dt; coarser steps leave eigenvalues below -1e-8 on pure initial states
DEFAULT_STEP = 0.4


class IntegrationError(RuntimeError):
    """A numerical guard (trace drift, leakage, step size) tripped."""


@dataclass
class Liouvillian:
    """Generator -i[H, rho] + sum_i (r_i/2)(2 C rho C^+ - C^+C rho - rho C^+C)."""

    hamiltonian: np.ndarray
    dissipators: list = field(default_factory=list)  # (rate, operator, label)
    n_max: int = 1

    def __post_init__(self):
        H = self.hamiltonian
        if np.max(np.abs(H - H.conj().T)) > 1e-12:
            raise ValueError("Hamiltonian is not Hermitian")
        for rate, _, label in self.dissipators:
            if rate < 0:
                raise ValueError(f"negative rate for {label}")

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def active(self):
        return [(r, C, lab) for r, C, lab in self.dissipators if r > 0]

    def effective_hamiltonian(self) -> np.ndarray:
        """H - (i/2) sum_i r_i C_i^+ C_i."""
        Heff = self.hamiltonian.astype(complex).copy()
        for rate, C, _ in self.active():
            Heff -= 0.5j * rate * C.conj().T @ C
        return Heff

    def norm_bound(self) -> float:
        """Upper estimate of the generator norm, 2||H|| + 2 sum_i r_i ||C_i||^2."""
        h = np.linalg.norm(self.hamiltonian, 2)
        d = sum(r * np.linalg.norm(C, 2) ** 2 for r, C, _ in self.active())
        return 2 * h + 2 * d

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """d rho / dt for a Hermitian matrix."""
        rho = np.asarray(rho, dtype=complex)
        return (_Generator(self)(rho.reshape(-1))).reshape(rho.shape)


class _Generator:
    """Sparse superoperator acting on row-major vectorized states.

    A batch is stored column-wise, X[:, b] = rho_b.reshape(-1), using
    vec(A rho B) = (A kron B^T) vec(rho).  The map is Hermiticity preserving by
    construction, so no symmetrization is needed between stages.
    """

    def __init__(self, L: Liouvillian):
        d = L.dim
        H = sp.csr_matrix(L.effective_hamiltonian())
        eye = sp.identity(d, dtype=complex, format="csr")
        S = -1j * (sp.kron(H, eye) - sp.kron(eye, H.conj()))
        for r, C, _ in L.active():
            C = sp.csr_matrix(C)
            S = S + r * sp.kron(C, C.conj())
        self.S = sp.csr_matrix(S)
        self.dim = d

    def __call__(self, x):
        return self.S @ x

    def rk4(self, x, dt):
        """One classical RK4 step.

        For a constant linear generator the four stages collapse to the Taylor
        polynomial sum_{m<=4} (dt S)^m / m!, evaluated here by Horner's rule.
        """
        y = x
        for m in (4, 3, 2, 1):
            y = self.S @ y
            y *= dt / m
            y += x
        return y


def _to_work(rho):
    """(B, d, d) -> (d*d, B)."""
    B = rho.shape[0]
    return np.ascontiguousarray(rho.reshape(B, -1).T)


def _from_work(x, d):
    return x.T.reshape(-1, d, d)


def build_liouvillian(params: ModelParams, which: str = "full_interaction", n_max: int | None = None) -> Liouvillian:
    """Master-equation generator.

    ``full_interaction``: H = -delta a^+a + Omega sum_j (s_j^+ + s_j) + g sum_j (s_j^+ a + s_j a^+).
    ``effective_rwa``: H = (g/2) sum_j (s_j^+ + s_j)(a + a^+), delta = 0 only.
    Dissipators are sqrt(k) a and sqrt(gamma) s_j in both cases.
    """
    n = params.default_nmax() if n_max is None else int(n_max)
    space = FockSpace(n)
    a = build_operator("annihilation", space)
    ad = a.conj().T
    sm = [build_operator("sigma_minus", space, j) for j in (1, 2)]
    sx = [s + s.conj().T for s in sm]
    if which == "full_interaction":
        H = (-params.delta * ad @ a
             + params.omega_drive * (sx[0] + sx[1])
             + params.g * sum(s.conj().T @ a + s @ ad for s in sm))
    elif which == "effective_rwa":
        if params.delta != 0:
            raise ValueError("effective_rwa generator is only defined at delta = 0")
        H = 0.5 * params.g * (sx[0] + sx[1]) @ (a + ad)
    else:
        raise ValueError(f"unknown generator {which!r}")
    H = (H + H.conj().T) / 2
    diss = [(params.k, a, "cavity"), (params.gamma, sm[0], "atom1"), (params.gamma, sm[1], "atom2")]
    return Liouvillian(H, diss, n)


@dataclass
class IntegratorConfig:
    dt: float
    t_end: float
    record_stride: int = 1
    method: str = "rk4"
    leakage_tol: float = LEAKAGE_TOL
    check_step_bound: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if self.method != "rk4":
            raise ValueError(f"unsupported method {self.method!r}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


def grid_config(L: Liouvillian, t_end: float, n_points: int, dt_max: float | None = None,
                **kw) -> IntegratorConfig:
    """Step size aligned to a uniform record grid of ``n_points`` over [0, t_end].

    Without ``dt_max`` the step satisfies ||L|| dt <= DEFAULT_STEP.
    """
    if n_points < 2:
        raise ValueError("need at least two grid points")
    spacing = t_end / (n_points - 1)
    if dt_max is None:
        dt_max = DEFAULT_STEP / L.norm_bound()
    sub = max(1, math.ceil(spacing / dt_max - 1e-12))
    return IntegratorConfig(spacing / sub, t_end, record_stride=sub, **kw)


def default_dt(params: ModelParams) -> float:
    """min(0.001/k~, 0.01/Omega~) in gt, converted to the params' time unit."""
    dt_gt = 0.001 / params.k_tilde
    if params.omega_drive > 0:
        dt_gt = min(dt_gt, 0.01 / params.omega_tilde)
    return dt_gt / params.g


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n_records, dim, dim)
    n_max: int
    leakage: np.ndarray
    max_trace_drift: float

    def state(self, idx: int) -> TripartiteState:
        return TripartiteState(self.states[idx], self.n_max, "standard")

    def __len__(self):
        return len(self.times)


def _diag(x, d):
    return np.real(x[::d + 1])  # (d, B)


def _leak(x, d, n_max):
    """Top-Fock-level population of each state in a batch."""
    return _diag(x, d)[n_max - 1::n_max].sum(axis=0)


def _trace(x, d):
    return _diag(x, d).sum(axis=0)


def _hermitize(rho):
    return 0.5 * (rho + rho.conj().swapaxes(-1, -2))


def _as_standard(rho0, dim):
    if isinstance(rho0, TripartiteState):
        rho = rho0.to_basis("standard").matrix
    else:
        rho = np.asarray(rho0, dtype=complex)
    if rho.shape != (dim, dim):
        raise ValueError(f"initial state dimension {rho.shape} does not match generator {dim}")
    return rho


def check_step(L: Liouvillian, dt: float):
    bound = L.norm_bound() * dt
    if bound >= STEP_BOUND:
        raise IntegrationError(f"step too coarse: ||L|| dt = {bound:.3g} >= {STEP_BOUND}")


def integrate_batch(rho0s, L: Liouvillian, cfg: IntegratorConfig) -> list[Trajectory]:
    """Fixed-step RK4 for several initial states sharing one generator."""
    d = L.dim
    x = _to_work(np.stack([_as_standard(r, d) for r in rho0s]))
    B = x.shape[1]
    if cfg.check_step_bound:
        check_step(L, cfg.dt)
    f = _Generator(L)
    n_steps = cfg.n_steps
    rec = list(range(0, n_steps + 1, cfg.record_stride))
    times = np.array(rec, dtype=float) * cfg.dt
    states = np.empty((len(rec), B, L.dim, L.dim), dtype=complex)
    leakage = np.empty((len(rec), B))
    drift = np.zeros(B)
    tr_prev = _trace(x, d)
    r = 0
    for step in range(n_steps + 1):
        if step == rec[r]:
            states[r] = _hermitize(_from_work(x, d))
            leakage[r] = _leak(x, d, L.n_max)
            if leakage[r].max() > cfg.leakage_tol:
                raise IntegrationError(
                    f"Fock truncation leakage {leakage[r].max():.3g} at t={step * cfg.dt:.4g} (n_max={L.n_max})")
            r += 1
            if r == len(rec):
                break
        x = f.rk4(x, cfg.dt)
        tr = _trace(x, d)
        step_drift = np.abs(tr - tr_prev)
        if step_drift.max() > TRACE_DRIFT_TOL:
            raise IntegrationError(f"trace drift {step_drift.max():.3g} at step {step}")
        drift = np.maximum(drift, step_drift)
        tr_prev = tr
    return [Trajectory(times, states[:, b], L.n_max, leakage[:, b], float(drift[b]))
            for b in range(B)]


def integrate(rho0, L: Liouvillian, cfg: IntegratorConfig) -> Trajectory:
    """Fixed-step RK4 from ``rho0`` (TripartiteState or array in the standard basis)."""
    return integrate_batch([rho0], L, cfg)[0]


def steady_state(L: Liouvillian, rho0, dt: float | None = None, tol: float = 1e-10,
                 max_time: float = 1e4, check_every: int = 50) -> TripartiteState:
    """Integrate until ||d rho/dt|| (max entry) falls below ``tol``."""
    x = _to_work(_as_standard(rho0, L.dim)[None])
    if dt is None:
        dt = 0.5 * STEP_BOUND / L.norm_bound()
    f = _Generator(L)
    n_steps = int(math.ceil(max_time / dt))
    for step in range(n_steps):
        if step % check_every == 0:
            if np.max(np.abs(f(x))) < tol:
                return TripartiteState(_hermitize(_from_work(x, L.dim)[0]), L.n_max, "standard")
        x = f.rk4(x, dt)
    raise IntegrationError(f"no steady state within t={max_time} (dt={dt:.3g})")


def drive_frame(rho: np.ndarray, params: ModelParams, t: float, n_max: int) -> np.ndarray:
    """Undo the drive rotation: U rho_I U^+ with U = exp(i Omega t sum_j sigma_x,j)."""
    c, s = math.cos(params.omega_drive * t), math.sin(params.omega_drive * t)
    u1 = np.array([[c, 1j * s], [1j * s, c]])
    U = np.kron(np.kron(u1, u1), np.eye(n_max))
    return U @ rho @ U.conj().T
