"""Entanglement and state-quality measures."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .hilbert import AtomicDensityMatrix, HERMITIAN_TOL, TRACE_TOL

_SY = np.array([[0, -1j], [1j, 0]])
SPIN_FLIP = np.kron(_SY, _SY)
ROOT_CLAMP = 1e-12


@dataclass(frozen=True)
class EntanglementReport:
    concurrence: float
    eof: float
    lambdas: np.ndarray


def _as_matrix(rho):
    if isinstance(rho, AtomicDensityMatrix):
        return rho.to_basis("standard").matrix
    return np.asarray(rho, dtype=complex)


def _psd_sqrt(m):
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    w = np.clip(w, 0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def concurrence(rho) -> EntanglementReport:
    """Wootters concurrence of a two-qubit state.

    A bare array is read in the standard {ee, eg, ge, gg} basis.  The roots
    Lambda_i are taken from the Hermitian form sqrt(rho) rho~ sqrt(rho), which
    shares its spectrum with rho rho~.
    """
    m = _as_matrix(rho)
    if m.shape != (4, 4):
        raise ValueError(f"concurrence needs a 4x4 matrix, got {m.shape}")
    if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
        raise ValueError("concurrence: input is not Hermitian")
    if abs(np.trace(m).real - 1) > TRACE_TOL:
        raise ValueError("concurrence: input trace is not 1")
    flipped = SPIN_FLIP @ m.conj() @ SPIN_FLIP
    s = _psd_sqrt(m)
    ev = np.linalg.eigvalsh(s @ flipped @ s)
    ev[np.abs(ev) < ROOT_CLAMP] = 0.0
    lam = np.sort(np.sqrt(np.clip(ev, 0, None)))[::-1]
    c = max(0.0, float(lam[0] - lam[1] - lam[2] - lam[3]))
    c = min(c, 1.0)
    return EntanglementReport(c, entanglement_of_formation(c), lam)


def _h2(p):
    if p <= 0 or p >= 1:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def entanglement_of_formation(c: float) -> float:
    if not -1e-12 <= c <= 1 + 1e-12:
        raise ValueError(f"concurrence must lie in [0, 1], got {c}")
    c = min(max(c, 0.0), 1.0)
    x = (1 + math.sqrt(1 - c * c)) / 2
    return _h2(x)


def purity(rho) -> float:
    m = _as_matrix(rho)
    # Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(m) ** 2))


def mean_photon_number(rho_field) -> float:
    m = np.asarray(rho_field)
    n = np.arange(m.shape[0])
    return float(np.real(np.diagonal(m) @ n))


def fidelity(a, b) -> float:
    """Uhlmann fidelity (squared convention); vectors are treated as pure states."""
    a = _as_matrix(a)
    b = _as_matrix(b)
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if a.ndim == 1 and b.ndim == 1:
        return float(abs(np.vdot(a, b)) ** 2)
    if a.ndim == 1:
        return float(np.real(a.conj() @ b @ a))
    if b.ndim == 1:
        return float(np.real(b.conj() @ a @ b))
    s = _psd_sqrt(a)
    ev = np.linalg.eigvalsh(s @ b @ s)
    return float(min(1.0, np.sum(np.sqrt(np.clip(ev, 0, None))) ** 2))


def trace_distance(a, b) -> float:
    d = _as_matrix(a) - _as_matrix(b)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh((d + d.conj().T) / 2))))


def displacement_matrix(gamma, n_max: int) -> np.ndarray:
    """Exact matrix elements <m|D(gamma)|n> for m, n < n_max.

    Vectorized over an array of ``gamma``; output shape gamma.shape + (n, n).
    Uses the associated-Laguerre closed form; the column recurrence in a^dagger
    cancels catastrophically once |gamma| exceeds a few units.
    """
    gamma = np.asarray(gamma, dtype=complex)
    shape = gamma.shape
    g = gamma.reshape(-1, 1, 1)
    m = np.arange(n_max)[:, None]
    k = np.arange(n_max)[None, :]
    lo, hi = np.minimum(m, k), np.maximum(m, k)
    d = hi - lo
    r = np.abs(g)
    x = r * r
    safe_r = np.where(r > 0, r, 1.0)
    unit = np.where(r > 0, g / safe_r, 1.0)
    lag = eval_genlaguerre(lo, d, x)
    logmag = 0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) + d * np.log(safe_r) - x / 2
    phase = np.where(m >= k, unit ** d, (-np.conj(unit)) ** d)
    out = np.exp(logmag) * phase * lag
    # gamma = 0 is the identity (0**0 handled above via safe_r)
    out = np.where(r > 0, out, np.eye(n_max))
    return out.reshape(shape + (n_max, n_max))


def wigner_numeric(rho_field, beta) -> np.ndarray:
    """Displaced-parity Wigner function (2/pi) Tr[D(beta) Pi D(beta)^dagger rho].

    Uses D(beta) Pi D(beta)^dagger = D(2 beta) Pi, whose matrix elements inside
    the truncated block are exact.
    """
    rho = np.asarray(rho_field, dtype=complex)
    n = rho.shape[0]
    beta = np.asarray(beta, dtype=complex)
    D = displacement_matrix(2 * beta, n)
    parity = (-1.0) ** np.arange(n)
    # Tr[D Pi rho] = sum_{m,k} D[m,k] parity[k] rho[k,m]
    w = np.einsum("...mk,k,km->...", D, parity, rho)
    if np.max(np.abs(w.imag), initial=0.0) > 1e-10:
        raise ValueError("Wigner function has an imaginary residue; input not Hermitian?")
    return 2 / np.pi * w.real


def wigner_grid(rho_field, half_width: float = 3.0, points: int = 41):
    """Wigner function on a square grid; returns (re_axis, im_axis, W[im, re])."""
    axis = np.linspace(-half_width, half_width, points)
    beta = axis[None, :] + 1j * axis[:, None]
    return axis, axis, wigner_numeric(rho_field, beta)


def integrate_grid(values, re_axis, im_axis) -> float:
    """Simpson-rule integral of a function sampled on a (im, re) grid."""
    from scipy.integrate import simpson

    return float(simpson(simpson(values, x=re_axis, axis=1), x=im_axis))
