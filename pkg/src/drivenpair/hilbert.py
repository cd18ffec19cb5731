"""Truncated (atom1 x atom2 x field) Hilbert space, operators and state containers.

Index map: the full space is ordered (atom1, atom2, field) so that the flat index
of |s1 s2 n> is ``(2*s1 + s2) * n_max + n``.  Single-atom index 0 is |e>, index 1
is |g>; the standard two-atom basis is therefore {ee, eg, ge, gg}.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-9
POSITIVITY_TOL = -1e-8
DEFICIT_WARN = 1e-10

SQRT2 = math.sqrt(2.0)

E, G = 0, 1
OUTCOMES = ("ee", "eg", "ge", "gg")
BASIS_TAGS = ("standard", "rotated", "bell", "magic")
BELL_LABELS = ("phi+", "phi-", "psi+", "psi-")


class TruncationWarning(UserWarning):
    """Coherent amplitude or dynamics reach the top of the Fock truncation."""


@dataclass(frozen=True)
class FockSpace:
    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max!r}")

    @property
    def dim(self) -> int:
        """Dimension of the full tripartite space."""
        return 4 * self.n_max


def nmax_for(alpha_abs: float) -> int:
    """Fock cutoff keeping the coherent-state tail of |alpha| below 1e-10."""
    a = float(alpha_abs)
    return int(math.ceil(a * a + 6.0 * a + 10.0))


@dataclass(frozen=True)
class ModelParams:
    """Physical rates of the driven two-atom cavity model.

    All rates share one (arbitrary) unit; time is measured in its inverse.
    ``from_ratio`` fixes k = 1 so that time is kt, ``dimensionless`` fixes
    g = 1 so that time is gt.
    """

    g: float
    k: float
    gamma: float = 0.0
    omega_drive: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError(f"g must be > 0, got {self.g}")
        if not self.k > 0:
            raise ValueError(f"k must be > 0, got {self.k}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.omega_drive < 0:
            raise ValueError(f"omega_drive must be >= 0, got {self.omega_drive}")

    @classmethod
    def from_ratio(cls, g_over_k: float, **kw) -> "ModelParams":
        return cls(g=float(g_over_k), k=1.0, **kw)

    @classmethod
    def dimensionless(cls, omega_tilde: float, k_tilde: float, gamma_tilde: float = 0.0) -> "ModelParams":
        return cls(g=1.0, k=float(k_tilde), gamma=float(gamma_tilde), omega_drive=float(omega_tilde))

    @property
    def omega_tilde(self) -> float:
        return self.omega_drive / self.g

    @property
    def k_tilde(self) -> float:
        return self.k / self.g

    @property
    def gamma_tilde(self) -> float:
        return self.gamma / self.g

    @property
    def g_over_k(self) -> float:
        return self.g / self.k

    @property
    def alpha_ss(self) -> float:
        """|alpha| of the steady-state coherent amplitude, 2g/k."""
        return 2.0 * self.g / self.k

    def default_nmax(self) -> int:
        return nmax_for(self.alpha_ss)

    def require_resonant(self):
        if self.delta != 0:
            raise ValueError("analytic solution requires delta = 0")


# ---------------------------------------------------------------------------
# operators

_SM = np.array([[0, 0], [1, 0]], dtype=complex)  # |g><e|
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)
_I2 = np.eye(2, dtype=complex)


def destroy(n_max: int) -> np.ndarray:
    """Truncated annihilation operator on the field alone."""
    return np.diag(np.sqrt(np.arange(1, n_max, dtype=float)), 1).astype(complex)


def number(n_max: int) -> np.ndarray:
    return np.diag(np.arange(n_max, dtype=float)).astype(complex)


def _embed(a1, a2, f):
    return np.kron(np.kron(a1, a2), f)


def build_operator(kind: str, space: FockSpace, j: int | None = None) -> np.ndarray:
    """Operator embedded in the full (atom1, atom2, field) space.

    kind is one of annihilation, creation, number, sigma_minus, sigma_plus,
    sigma_z, identity; the atomic kinds need ``j`` in {1, 2}.
    """
    n = space.n_max
    If = np.eye(n, dtype=complex)
    if kind in ("annihilation", "creation", "number"):
        if kind != "number" and n < 2:
            raise ValueError("ladder operators need n_max >= 2")
        op = {"annihilation": destroy(n), "creation": destroy(n).T.copy(), "number": number(n)}[kind]
        return _embed(_I2, _I2, op)
    if kind == "identity":
        return np.eye(space.dim, dtype=complex)
    single = {"sigma_minus": _SM, "sigma_plus": _SM.T.copy(), "sigma_z": _SZ}
    if kind not in single:
        raise ValueError(f"unknown operator kind {kind!r}")
    if j not in (1, 2):
        raise ValueError(f"atom index must be 1 or 2, got {j!r}")
    op = single[kind]
    return _embed(op, _I2, If) if j == 1 else _embed(_I2, op, If)


# ---------------------------------------------------------------------------
# atomic bases
#
# Each basis is a 4x4 matrix whose rows are the basis vectors written in the
# standard {ee, eg, ge, gg} coordinates.  A density matrix is carried to basis
# B by rho_B = B @ rho_std @ B^dagger.  For the real bases this is the usual
# <b_k|rho|b_l>; for the magic basis it reproduces the published matrix entry
# by entry.

_ee, _eg, _ge, _gg = np.eye(4, dtype=complex)

_plus = np.array([1, 1], dtype=complex) / SQRT2   # (|g> + |e>)/sqrt2, index 0 = e
_minus = np.array([-1, 1], dtype=complex) / SQRT2  # (|g> - |e>)/sqrt2

ROTATED = np.array([
    np.kron(_plus, _plus),
    np.kron(_plus, _minus),
    np.kron(_minus, _plus),
    np.kron(_minus, _minus),
])

BELL = np.array([
    (_ee + _gg) / SQRT2,
    (_ee - _gg) / SQRT2,
    (_eg + _ge) / SQRT2,
    (_eg - _ge) / SQRT2,
])

MAGIC = BELL * np.array([1, 1j, 1j, 1])[:, None]

BASES = {
    "standard": np.eye(4, dtype=complex),
    "rotated": ROTATED,
    "bell": BELL,
    "magic": MAGIC,
}


def basis_matrix(tag: str) -> np.ndarray:
    try:
        return BASES[tag]
    except KeyError:
        raise ValueError(f"unknown basis tag {tag!r}; expected one of {BASIS_TAGS}") from None


def change_basis(matrix: np.ndarray, source: str, target: str) -> np.ndarray:
    """Similarity transform of a 4x4 atomic matrix between two basis tags."""
    U = basis_matrix(target) @ basis_matrix(source).conj().T
    return U @ matrix @ U.conj().T


def _check_density(m: np.ndarray, what: str):
    herm = np.max(np.abs(m - m.conj().T))
    if herm > HERMITIAN_TOL:
        raise ValueError(f"{what}: not Hermitian (max |rho - rho^H| = {herm:.3g})")
    tr = np.trace(m).real
    if abs(tr - 1) > TRACE_TOL:
        raise ValueError(f"{what}: trace {tr!r} != 1")
    lmin = np.linalg.eigvalsh((m + m.conj().T) / 2)[0]
    if lmin < POSITIVITY_TOL:
        raise ValueError(f"{what}: negative eigenvalue {lmin:.3g}")


@dataclass
class AtomicDensityMatrix:
    matrix: np.ndarray
    basis: str = "standard"

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (4, 4):
            raise ValueError(f"atomic density matrix must be 4x4, got {self.matrix.shape}")
        basis_matrix(self.basis)

    def validate(self):
        _check_density(self.matrix, "atomic state")
        return self

    def to_basis(self, target: str) -> "AtomicDensityMatrix":
        return AtomicDensityMatrix(change_basis(self.matrix, self.basis, target), target)


def basis_transform(state: AtomicDensityMatrix, target: str) -> AtomicDensityMatrix:
    return state.to_basis(target)


@dataclass
class TripartiteState:
    """Density operator on (atom1 x atom2 x field), atoms labelled by ``basis``."""

    matrix: np.ndarray
    n_max: int
    basis: str = "standard"

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (4 * self.n_max, 4 * self.n_max):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match n_max={self.n_max}")
        basis_matrix(self.basis)

    @property
    def space(self) -> FockSpace:
        return FockSpace(self.n_max)

    def validate(self):
        _check_density(self.matrix, "tripartite state")
        return self

    def to_basis(self, target: str) -> "TripartiteState":
        U = basis_matrix(target) @ basis_matrix(self.basis).conj().T
        full = np.kron(U, np.eye(self.n_max))
        return TripartiteState(full @ self.matrix @ full.conj().T, self.n_max, target)

    def blocks(self) -> np.ndarray:
        """View as blocks[i, j] = <i|rho|j>, each an n_max x n_max field operator."""
        n = self.n_max
        return self.matrix.reshape(4, n, 4, n).transpose(0, 2, 1, 3)

    def leakage(self) -> float:
        """Population of the top Fock level |n_max - 1>."""
        return float(np.real(np.trace(self.blocks()[:, :, -1, -1])))

    @classmethod
    def product(cls, atoms: np.ndarray, field: np.ndarray, basis: str = "standard") -> "TripartiteState":
        """|atoms><atoms| (x) field, from a 4-vector or 4x4 matrix and a field vector or matrix."""
        atoms = np.asarray(atoms, dtype=complex)
        field = np.asarray(field, dtype=complex)
        if atoms.ndim == 1:
            atoms = np.outer(atoms, atoms.conj())
        if field.ndim == 1:
            field = np.outer(field, field.conj())
        return cls(np.kron(atoms, field), field.shape[0], basis)


# ---------------------------------------------------------------------------
# preparations

@dataclass
class AtomicPreparation:
    """Pure two-atom state given by its Bell-basis coefficients (phi+, phi-, psi+, psi-)."""

    c: np.ndarray
    label: str = field(default="custom")

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=complex).reshape(4)
        s = float(np.sum(np.abs(self.c) ** 2))
        if abs(s - 1.0) > 1e-12:
            raise ValueError(f"Bell coefficients must be normalized, sum |c|^2 = {s!r}")

    @classmethod
    def from_product(cls, a1, b1, a2, b2, label="product") -> "AtomicPreparation":
        """(a1|e> + b1|g>) (x) (a2|e> + b2|g>) mapped onto Bell coefficients."""
        c = np.array([
            a1 * a2 + b1 * b2,
            a1 * a2 - b1 * b2,
            a1 * b2 + b1 * a2,
            a1 * b2 - b1 * a2,
        ], dtype=complex) / SQRT2
        return cls(c, label)

    @classmethod
    def preset(cls, name: str) -> "AtomicPreparation":
        key = name.strip().lower()
        if key in _PRODUCT_PRESETS:
            return cls.from_product(*_PRODUCT_PRESETS[key], label=key)
        if key in BELL_LABELS:
            c = np.zeros(4, dtype=complex)
            c[BELL_LABELS.index(key)] = 1.0
            return cls(c, key)
        raise ValueError(f"unknown preparation {name!r}; valid presets: {', '.join(PRESETS)}")

    def vector(self, basis: str = "standard") -> np.ndarray:
        """Atomic state vector in coordinates of ``basis``."""
        std = BELL.T @ self.c
        return basis_matrix(basis) @ std

    def density(self, basis: str = "standard") -> AtomicDensityMatrix:
        v = self.vector("standard")
        return AtomicDensityMatrix(np.outer(v, v.conj()), "standard").to_basis(basis)

    @property
    def is_standard_basis(self) -> bool:
        v = np.abs(self.vector("standard"))
        return bool(np.isclose(v.max(), 1.0, atol=1e-12))


# (a1, b1, a2, b2): amplitudes of |e> and |g> for each atom
_PRODUCT_PRESETS = {
    "ee": (1, 0, 1, 0),
    "eg": (1, 0, 0, 1),
    "ge": (0, 1, 1, 0),
    "gg": (0, 1, 0, 1),
}
PRESETS = tuple(_PRODUCT_PRESETS) + BELL_LABELS


# ---------------------------------------------------------------------------
# field states

def coherent_state_vector(alpha: complex, space: FockSpace | int, return_deficit: bool = False):
    """Truncated, renormalized coherent state |alpha>.

    The truncation deficit 1 - sum_{n<n_max} |<n|alpha>|^2 is returned when
    ``return_deficit`` is set and triggers a TruncationWarning above 1e-10.
    """
    n_max = space.n_max if isinstance(space, FockSpace) else int(space)
    alpha = complex(alpha)
    amp = np.empty(n_max, dtype=complex)
    amp[0] = math.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, n_max):
        amp[n] = amp[n - 1] * alpha / math.sqrt(n)
    kept = float(np.sum(np.abs(amp) ** 2))
    deficit = max(0.0, 1.0 - kept)
    if deficit > DEFICIT_WARN:
        warnings.warn(f"coherent state |{alpha:.4g}> truncated at n_max={n_max}: deficit {deficit:.3g}",
                      TruncationWarning, stacklevel=2)
    vec = amp / math.sqrt(kept)
    return (vec, deficit) if return_deficit else vec


def partial_trace(state: TripartiteState, keep: str):
    """Reduce to the atoms (AtomicDensityMatrix, same basis tag) or to the field."""
    b = state.blocks()
    if keep == "atoms":
        return AtomicDensityMatrix(np.einsum("ijnn->ij", b), state.basis)
    if keep == "field":
        return np.einsum("iimn->mn", b)
    raise ValueError(f"keep must be 'atoms' or 'field', got {keep!r}")
