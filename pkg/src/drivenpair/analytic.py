"""Closed-form dynamics of two strongly driven atoms in a damped resonant cavity.

Valid at delta = 0, gamma = 0, field initially in vacuum, any pure atomic
preparation.  Time arguments are the dimensionless ``kt``.

In the rotated atomic basis {++, +-, -+, --} every block <i|rho|j> of the
whole-system density operator stays proportional to |b_i><b_j| with coherent
amplitudes b = (-alpha, 0, 0, +alpha); the trace of block (i, j) decays as
f1 ** (s_i - s_j)**2 with s = (+1, 0, 0, -1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hilbert import (
    OUTCOMES,
    AtomicDensityMatrix,
    AtomicPreparation,
    ModelParams,
    TripartiteState,
    change_basis,
    coherent_state_vector,
    nmax_for,
    BELL,
    BELL_LABELS,
    ROTATED,
)

# sign of each rotated basis state under the effective coupling
SIGNS = np.array([1, 0, 0, -1])
BLOCK_CLASS = SIGNS  # displacement of block i is -SIGNS[i] * alpha

GG = AtomicPreparation.preset("gg")


@dataclass(frozen=True)
class DecoherenceProfile:
    kt: np.ndarray | float
    alpha: np.ndarray | complex
    f1: np.ndarray | float
    f2: np.ndarray | float
    log_f1: np.ndarray | float

    @property
    def alpha_abs(self):
        return np.abs(self.alpha)


def _check_kt(kt):
    kt = np.asarray(kt, dtype=float)
    if np.any(kt < 0):
        raise ValueError("time must be non-negative")
    return kt


def profile(kt, params: ModelParams) -> DecoherenceProfile:
    """alpha(t), f1(t) and f2(t) = f1**4 at dimensionless times ``kt``."""
    params.require_resonant()
    kt = _check_kt(kt)
    r = params.g_over_k
    one_minus = -np.expm1(-kt / 2)
    alpha = 1j * 2 * r * one_minus
    log_f1 = -2 * r * r * kt + 4 * r * r * one_minus
    f1 = np.exp(log_f1)
    f2 = f1 ** 4
    if kt.ndim == 0:
        return DecoherenceProfile(float(kt), complex(alpha), float(f1), float(f2), float(log_f1))
    return DecoherenceProfile(kt, alpha, f1, f2, log_f1)


def _prep(prep) -> AtomicPreparation:
    if isinstance(prep, AtomicPreparation):
        return prep
    return AtomicPreparation.preset(prep)


def _log_overlap(v, u):
    """log <v|u> for coherent states."""
    return -abs(u) ** 2 / 2 - abs(v) ** 2 / 2 + np.conj(v) * u


def block_coefficients(kt: float, prep, params: ModelParams):
    """Amplitudes b_i and coefficients K_ij with rho_ij = K_ij |b_i><b_j|.

    Returns (b, K, A, D) where A is the initial atomic matrix in the rotated
    basis and D_ij = f1 ** (s_i - s_j)**2 the block trace factors.
    """
    prep = _prep(prep)
    p = profile(kt, params)
    x = prep.vector("rotated")
    A = np.outer(x, x.conj())
    b = -SIGNS * p.alpha
    ds2 = (SIGNS[:, None] - SIGNS[None, :]) ** 2
    log_D = ds2 * p.log_f1
    log_ov = _log_overlap(b[None, :], b[:, None])  # <b_j|b_i>
    K = A * np.exp(log_D - log_ov)
    return b, K, A, np.exp(log_D)


def _coherent_table(b, n_max):
    vecs = {}
    for val in b:
        key = complex(val)
        if key not in vecs:
            vecs[key] = coherent_state_vector(key, n_max)
    return [vecs[complex(v)] for v in b]


def resolve_nmax(params: ModelParams, n_max: int | None) -> int:
    return params.default_nmax() if n_max is None else int(n_max)


def assemble_full_state(kt: float, prep, params: ModelParams, n_max: int | None = None,
                        basis: str = "rotated") -> TripartiteState:
    """Whole-system density operator at time kt, atoms in ``basis``."""
    params.require_resonant()
    n = resolve_nmax(params, n_max)
    b, K, _, _ = block_coefficients(kt, prep, params)
    vecs = _coherent_table(b, n)
    blocks = np.empty((4, 4, n, n), dtype=complex)
    for i in range(4):
        for j in range(4):
            blocks[i, j] = K[i, j] * np.outer(vecs[i], vecs[j].conj())
    rho = TripartiteState(blocks.transpose(0, 2, 1, 3).reshape(4 * n, 4 * n), n, "rotated")
    return rho if basis == "rotated" else rho.to_basis(basis)


def ground_state_blocks(kt: float, params: ModelParams, n_max: int | None = None) -> dict:
    """The ten independent field blocks for both atoms starting in |gg>.

    Keys are "11", "12", ... in the rotated basis; the remaining blocks follow
    from rho_ji = rho_ij^dagger.
    """
    params.require_resonant()
    n = resolve_nmax(params, n_max)
    p = profile(kt, params)
    a = p.alpha
    a2 = abs(a) ** 2
    minus, vac, plus = (coherent_state_vector(v, n) for v in (-a, 0.0, a))

    def ket_bra(u, v):
        return np.outer(u, v.conj())

    c1 = math.exp(p.log_f1 + a2 / 2)
    c2 = math.exp(4 * p.log_f1 + 2 * a2)
    return {
        "11": ket_bra(minus, minus) / 4,
        "44": ket_bra(plus, plus) / 4,
        "12": c1 * ket_bra(minus, vac) / 4,
        "13": c1 * ket_bra(minus, vac) / 4,
        "14": c2 * ket_bra(minus, plus) / 4,
        "22": ket_bra(vac, vac) / 4,
        "23": ket_bra(vac, vac) / 4,
        "33": ket_bra(vac, vac) / 4,
        "24": c1 * ket_bra(vac, plus) / 4,
        "34": c1 * ket_bra(vac, plus) / 4,
    }


def field_reduced(kt: float, prep, params: ModelParams, n_max: int | None = None) -> np.ndarray:
    """Cavity-field density matrix after tracing out both atoms."""
    prep = _prep(prep)
    params.require_resonant()
    n = resolve_nmax(params, n_max)
    c1, c2, c3, c4 = prep.c
    a = profile(kt, params).alpha
    minus, vac, plus = (coherent_state_vector(v, n) for v in (-a, 0.0, a))
    return 0.5 * (abs(c1 + c3) ** 2 * np.outer(minus, minus.conj())
                  + 2 * (abs(c2) ** 2 + abs(c4) ** 2) * np.outer(vac, vac.conj())
                  + abs(c1 - c3) ** 2 * np.outer(plus, plus.conj()))


def mean_photon_number(kt, prep, params: ModelParams):
    """(|c1|^2 + |c3|^2) |alpha(t)|^2."""
    prep = _prep(prep)
    c = prep.c
    return (abs(c[0]) ** 2 + abs(c[2]) ** 2) * profile(kt, params).alpha_abs ** 2


def atomic_reduced(kt: float, prep, params: ModelParams, basis: str = "magic") -> AtomicDensityMatrix:
    """Two-atom reduced density matrix (magic basis unless asked otherwise)."""
    params.require_resonant()
    _, _, A, D = block_coefficients(kt, prep, params)
    rot = A * D
    return AtomicDensityMatrix(change_basis(rot, "rotated", basis), basis)


def _is_standard(prep: AtomicPreparation) -> bool:
    return prep.is_standard_basis


def purities(kt: float, prep, params: ModelParams, n_max: int | None = None) -> dict:
    """Tr rho^2 of the whole system, the field and the atom pair.

    Standard-basis preparations use the closed forms; any other preparation
    is evaluated numerically from the assembled and reduced states.
    """
    prep = _prep(prep)
    p = profile(kt, params)
    a2 = p.alpha_abs ** 2
    if _is_standard(prep):
        lf = p.log_f1
        return {
            "whole": (3 + 4 * np.exp(2 * lf + a2) + np.exp(8 * lf + 4 * a2)) / 8,
            "field": (3 + 4 * np.exp(-a2) + np.exp(-4 * a2)) / 8,
            "atoms": (3 + 4 * p.f1 ** 2 + p.f2 ** 2) / 8,
        }
    from .metrics import purity

    rho = assemble_full_state(kt, prep, params, n_max)
    return {
        "whole": purity(rho.matrix),
        "field": purity(field_reduced(kt, prep, params, n_max)),
        "atoms": purity(atomic_reduced(kt, prep, params).matrix),
    }


def atomic_probabilities(kt: float, prep, params: ModelParams) -> dict:
    """Single-atom (atom 1) and joint standard-basis probabilities."""
    std = atomic_reduced(kt, prep, params, basis="standard").matrix
    P = np.real(np.diag(std))
    out = dict(zip(("P_ee", "P_eg", "P_ge", "P_gg"), (float(v) for v in P)))
    out["P_e"] = out["P_ee"] + out["P_eg"]
    out["P_g"] = out["P_ge"] + out["P_gg"]
    return out


def correlation_functions(kt, params: ModelParams) -> dict:
    """Atom-atom correlations C_lm = P_lm / (P_l P_m) for the |gg> preparation."""
    kt = _check_kt(kt)
    if np.any(kt <= 0):
        raise ValueError("correlation functions are 0/0 at kt = 0; use kt > 0")
    p = profile(kt, params)
    f1, f2 = p.f1, p.f2
    # 1 - f1 loses precision for tiny kt; -expm1(log_f1) does not
    one_m_f1 = -np.expm1(p.log_f1)
    one_m_f2 = -np.expm1(4 * p.log_f1)
    return {
        "C_ee": (3 - 4 * f1 + f2) / (2 * one_m_f1 ** 2),
        "C_eg": one_m_f2 / (2 * one_m_f1 * (1 + f1)),
        "C_gg": (3 + 4 * f1 + f2) / (2 * (1 + f1) ** 2),
    }


@dataclass
class ConditionalFieldState:
    outcome: str
    matrix: np.ndarray
    norm: float


def outcome_probability(kt, outcome: str, params: ModelParams):
    """Probability of the joint atomic outcome for the |gg> preparation."""
    p = profile(kt, params)
    if outcome in ("ee", "gg"):
        sign = -1 if outcome == "ee" else 1
        return (3 + p.f2 + sign * 4 * p.f1) / 8
    if outcome in ("eg", "ge"):
        return -np.expm1(4 * p.log_f1) / 8
    raise ValueError(f"unknown outcome {outcome!r}; expected one of {OUTCOMES}")


def conditional_field(kt: float, outcome: str, params: ModelParams, n_max: int | None = None,
                      prep="gg") -> ConditionalFieldState:
    """Field state after a projective atomic measurement giving ``outcome``."""
    if _prep(prep).label != "gg":
        raise ValueError("conditional field states are derived for the |gg> preparation only")
    norm = float(outcome_probability(kt, outcome, params))
    if norm <= 0:
        raise ValueError(f"outcome {outcome} has zero probability at kt={kt}")
    n = resolve_nmax(params, n_max)
    p = profile(kt, params)
    a = p.alpha
    a2 = abs(a) ** 2
    minus, vac, plus = (coherent_state_vector(v, n) for v in (-a, 0.0, a))

    def kb(u, v):
        return np.outer(u, v.conj())

    cat = math.exp(4 * p.log_f1 + 2 * a2)  # f2 e^{2|alpha|^2}
    if outcome in ("ee", "gg"):
        sign = -1 if outcome == "ee" else 1
        mix = math.exp(p.log_f1 + a2 / 2)  # f1 e^{|alpha|^2/2}
        body = (kb(minus, minus) + kb(plus, plus) + 4 * kb(vac, vac)
                + cat * (kb(plus, minus) + kb(minus, plus))
                + sign * 2 * mix * (kb(vac, minus) + kb(vac, plus) + kb(minus, vac) + kb(plus, vac)))
        rho = body / (2 * (3 + p.f2 + sign * 4 * p.f1))
    else:
        body = kb(minus, minus) + kb(plus, plus) - cat * (kb(plus, minus) + kb(minus, plus))
        rho = body / (2 * -math.expm1(4 * p.log_f1))
    rho = rho / np.trace(rho).real
    return ConditionalFieldState(outcome, rho, norm)


def cat_state(kt: float, outcome: str, params: ModelParams, n_max: int | None = None) -> np.ndarray:
    """Short-time pure conditional field state built with alpha~ = i g t."""
    n = resolve_nmax(params, n_max)
    at = 1j * params.g_over_k * float(kt)
    minus, vac, plus = (coherent_state_vector(v, n) for v in (-at, 0.0, at))
    if outcome in ("ee", "gg"):
        sign = -1 if outcome == "ee" else 1
        psi = minus + sign * 2 * vac + plus
    elif outcome in ("eg", "ge"):
        psi = minus - plus
    else:
        raise ValueError(f"unknown outcome {outcome!r}")
    return psi / np.linalg.norm(psi)


def null_measurement_bell(prep) -> str:
    """Bell state left in the atoms once the field is found empty at long times.

    Only the component in the invariant span{|+->, |-+>} stays correlated
    with the vacuum.
    """
    prep = _prep(prep)
    if not prep.is_standard_basis:
        raise ValueError("null-measurement heralding is defined for standard-basis preparations")
    x = prep.vector("rotated")
    x[[0, 3]] = 0
    std = ROTATED.T @ x
    std = std / np.linalg.norm(std)
    overlaps = np.abs(BELL.conj() @ std)
    return BELL_LABELS[int(np.argmax(overlaps))]


def wigner_closed_form(beta, kt: float, outcome: str, params: ModelParams):
    """Wigner function of the conditional field state at complex points ``beta``."""
    beta = np.asarray(beta, dtype=complex)
    p = profile(kt, params)
    a = p.alpha_abs
    re, im = beta.real, beta.imag
    gauss = 2 * np.exp(-2 * np.abs(beta) ** 2) / np.pi
    tails = np.exp(-2 * a * a) * np.cosh(4 * a * im)
    fringe = math.exp(4 * p.log_f1 + 2 * a * a) * np.cos(4 * a * re)
    if outcome in ("ee", "gg"):
        sign = -1 if outcome == "ee" else 1
        mid = sign * 4 * p.f1 * np.cosh(2 * a * im) * np.cos(2 * a * re)
        return gauss / (3 + p.f2 + sign * 4 * p.f1) * (2 + tails + fringe + mid)
    if outcome in ("eg", "ge"):
        return gauss / -math.expm1(4 * p.log_f1) * (tails - fringe)
    raise ValueError(f"unknown outcome {outcome!r}")


def characteristic_chi(i: int, j: int, beta, kt: float, prep, params: ModelParams):
    """chi_ij(beta, t) = Tr_f[rho_ij(t) D(beta)], indices 1..4 in the rotated basis."""
    if not (1 <= i <= 4 and 1 <= j <= 4):
        raise ValueError("block indices run from 1 to 4")
    beta = np.asarray(beta, dtype=complex)
    if i > j:
        return np.conj(characteristic_chi(j, i, -beta, kt, prep, params))
    c1, c2, c3, c4 = _prep(prep).c
    p = profile(kt, params)
    a, ac = p.alpha, np.conj(p.alpha)
    bc = np.conj(beta)
    g0 = -np.abs(beta) ** 2 / 2
    table = {
        (1, 1): (0.5 * abs(c1 + c3) ** 2, g0 - ac * beta + a * bc),
        (4, 4): (0.5 * abs(c1 - c3) ** 2, g0 + ac * beta - a * bc),
        (1, 2): (-0.5 * (c1 + c3) * np.conj(c2 - c4) * p.f1, g0 + a * bc),
        (1, 3): (-0.5 * (c1 + c3) * np.conj(c2 + c4) * p.f1, g0 + a * bc),
        (1, 4): (0.5 * (c1 + c3) * np.conj(c1 - c3) * p.f2, g0 + ac * beta + a * bc),
        (2, 2): (0.5 * abs(c2 - c4) ** 2, g0),
        (3, 3): (0.5 * abs(c2 + c4) ** 2, g0),
        (2, 3): (0.5 * (c2 - c4) * np.conj(c2 + c4), g0),
        (2, 4): (-0.5 * (c2 - c4) * np.conj(c1 - c3) * p.f1, g0 + ac * beta),
        (3, 4): (-0.5 * (c2 + c4) * np.conj(c1 - c3) * p.f1, g0 + ac * beta),
    }
    coef, expo = table[(i, j)]
    return coef * np.exp(expo)


def disentanglement_rate(params: ModelParams):
    """Approximate decay rate of coherence and concurrence, with its regime label."""
    if params.g_over_k >= 0.5:
        return 2 * params.g, "strong"
    return 8 * params.g ** 2 / params.k, "weak"


def fit_decay_rate(params: ModelParams, kt_window=(2.0, 6.0), n_points: int = 200) -> float:
    """Least-squares exponential rate of f2 over a kt window, in units of the params' rates."""
    kt = np.linspace(*kt_window, n_points)
    log_f2 = 4 * profile(kt, params).log_f1
    slope = np.polyfit(kt, log_f2, 1)[0]
    return -slope * params.k


def nmax_at(kt: float, params: ModelParams) -> int:
    """Cutoff sized to |alpha(kt)| instead of the steady-state amplitude."""
    return nmax_for(profile(kt, params).alpha_abs)


__all__ = [
    "DecoherenceProfile", "ConditionalFieldState", "profile", "assemble_full_state",
    "ground_state_blocks", "field_reduced", "atomic_reduced", "purities", "atomic_probabilities",
    "correlation_functions", "conditional_field", "null_measurement_bell", "wigner_closed_form",
    "characteristic_chi", "disentanglement_rate", "fit_decay_rate", "mean_photon_number",
    "outcome_probability", "cat_state", "block_coefficients", "nmax_at",
]
