"""Hypothesis strategies shared by the property tests."""
import numpy as np
from hypothesis import assume
from hypothesis import strategies as st

from drivenpair.hilbert import AtomicPreparation

finite = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)


@st.composite
def preparations(draw):
    parts = draw(st.lists(finite, min_size=8, max_size=8))
    v = np.array(parts[:4]) + 1j * np.array(parts[4:])
    n = np.linalg.norm(v)
    assume(n > 1e-3)
    return AtomicPreparation(v / n)


@st.composite
def density_matrices(draw, dim=4):
    parts = draw(st.lists(finite, min_size=2 * dim * dim, max_size=2 * dim * dim))
    a = np.array(parts[:dim * dim]).reshape(dim, dim) + 1j * np.array(parts[dim * dim:]).reshape(dim, dim)
    m = a @ a.conj().T
    tr = np.trace(m).real
    assume(tr > 1e-6)
    return m / tr


@st.composite
def unitaries(draw, dim=2):
    parts = draw(st.lists(finite, min_size=2 * dim * dim, max_size=2 * dim * dim))
    a = np.array(parts[:dim * dim]).reshape(dim, dim) + 1j * np.array(parts[dim * dim:]).reshape(dim, dim)
    assume(abs(np.linalg.det(a)) > 1e-3)
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))
