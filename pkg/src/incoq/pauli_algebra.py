"""Dense 2x2 / 4x4 operator helpers for a system qubit S coupled to a probe P.

Tensor ordering is fixed to S (x) P everywhere: in a 4x4 matrix the system
index is the slow one.  Matrices are plain ``numpy`` arrays; every function
returns a fresh array and never mutates its inputs.
"""

import os

import numpy as np

#: Tolerance for algebraic identities that should hold to rounding.
ALGEBRAIC_TOL = 1e-12

_PREDICATE_TOL = 1e-9

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
AXES = ("x", "y", "z")


def default_tol():
    """Predicate tolerance; ``INCOQ_TOL`` in the environment overrides it."""
    value = os.environ.get("INCOQ_TOL")
    if value:
        return float(value)
    return _PREDICATE_TOL


def pauli(axis):
    """Return the Pauli matrix for ``axis`` in {'x', 'y', 'z'} (or 'i')."""
    key = str(axis).lower()
    if key == "i":
        return I2.copy()
    try:
        return _PAULI[key].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


def _check_shape(m, dim, name="matrix"):
    m = np.asarray(m)
    if m.shape != (dim, dim):
        raise ValueError(f"{name} must be {dim}x{dim}, got shape {m.shape}")
    return m


def kron(a, b):
    """Tensor product ``a (x) b`` of two 2x2 operators (system factor first)."""
    a = _check_shape(a, 2, "system factor")
    b = _check_shape(b, 2, "probe factor")
    return np.kron(a, b).astype(complex)


def partial_trace_probe(m):
    """Trace out the probe (second) factor of a 4x4 operator."""
    m = _check_shape(m, 4)
    return np.trace(m.reshape(2, 2, 2, 2), axis1=1, axis2=3)


def partial_trace_system(m):
    """Trace out the system (first) factor of a 4x4 operator."""
    m = _check_shape(m, 4)
    return np.trace(m.reshape(2, 2, 2, 2), axis1=0, axis2=2)


def dagger(m):
    return np.conj(np.asarray(m)).T


def is_hermitian(m, tol=None):
    tol = default_tol() if tol is None else tol
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.allclose(m, dagger(m), atol=tol, rtol=0)


def is_unitary(m, tol=None):
    tol = default_tol() if tol is None else tol
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return np.allclose(m @ dagger(m), np.eye(m.shape[0]), atol=tol, rtol=0)


def is_density(m, tol=None):
    """Hermitian, positive semidefinite and unit trace."""
    tol = default_tol() if tol is None else tol
    if not is_hermitian(m, tol):
        return False
    m = np.asarray(m)
    if abs(np.trace(m) - 1) > tol:
        return False
    return np.linalg.eigvalsh((m + dagger(m)) / 2).min() >= -tol


def mat_exp(h, t):
    """Return ``exp(-i h t)`` for Hermitian ``h`` via its spectral decomposition.

    Raises:
        ValueError: if ``h`` is not Hermitian (the spectral route assumes it).
    """
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h):
        raise ValueError("mat_exp expects a Hermitian generator")
    evals, evecs = np.linalg.eigh((h + dagger(h)) / 2)
    return (evecs * np.exp(-1j * evals * t)) @ dagger(evecs)


def to_bloch(rho, tol=None):
    """Coherence vector ``s_i = tr(rho sigma_i)`` of a 2x2 density matrix."""
    tol = default_tol() if tol is None else tol
    rho = _check_shape(rho, 2, "rho")
    if abs(np.trace(rho) - 1) > tol or not is_hermitian(rho, tol):
        raise ValueError("to_bloch expects a Hermitian, unit-trace 2x2 matrix")
    return np.array([np.trace(rho @ _PAULI[k]).real for k in AXES])


def from_bloch(s, tol=None):
    """Density matrix ``(1 + s . sigma) / 2``; rejects vectors outside the ball."""
    tol = default_tol() if tol is None else tol
    s = np.asarray(s, dtype=float)
    if s.shape != (3,):
        raise ValueError(f"Bloch vector must have 3 components, got shape {s.shape}")
    if np.linalg.norm(s) > 1 + tol:
        raise ValueError(f"Bloch vector norm {np.linalg.norm(s):.6g} exceeds 1")
    return 0.5 * (I2 + s[0] * _PAULI["x"] + s[1] * _PAULI["y"] + s[2] * _PAULI["z"])


def pauli_word(word):
    """4x4 operator for a two-letter word such as ``'XZ'`` (system letter first)."""
    if len(word) != 2:
        raise ValueError(f"Pauli word must have two letters, got {word!r}")
    return kron(pauli(word[0]), pauli(word[1]))


def random_su2(rng):
    """Haar-random element of SU(2) drawn with the generator ``rng``."""
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    a, b = q[0] + 1j * q[3], q[2] + 1j * q[1]
    return np.array([[a, -np.conj(b)], [b, np.conj(a)]])


def random_bloch(rng, pure=False):
    """Bloch vector uniform in the unit ball, or on the sphere if ``pure``."""
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    if not pure:
        v *= rng.uniform() ** (1 / 3)
    return v


def random_density(rng, pure=False):
    """Random 2x2 density matrix (uniform in the Bloch ball, or on the sphere)."""
    return from_bloch(random_bloch(rng, pure))
