"""Brute-force reference evolution of the system qubit.

Everything here goes through the full 4x4 density matrix, a spectral matrix
exponential and a partial trace.  Nothing in this module uses the closed-form
Cartan exponential or the affine Bloch map, so it can check both.
"""

import numpy as np

from .cartan import as_coefficients
from .pauli_algebra import (
    dagger,
    default_tol,
    from_bloch,
    is_density,
    is_hermitian,
    kron,
    mat_exp,
    partial_trace_probe,
    pauli_word,
    to_bloch,
)
from .bloch_dynamics import fibonacci_sphere


def _require_density(rho, name):
    if not is_density(rho):
        raise ValueError(f"{name} is not a valid density matrix")


def evolve_exact(h_tot, rho_s, rho_p, t):
    """``Tr_P(X (rho_s (x) rho_p) X^dag)`` with ``X = exp(-i h_tot t)``."""
    if not is_hermitian(h_tot):
        raise ValueError("h_tot must be Hermitian")
    _require_density(rho_s, "rho_s")
    _require_density(rho_p, "rho_p")
    x = mat_exp(h_tot, t)
    return partial_trace_probe(x @ kron(rho_s, rho_p) @ dagger(x))


def cartan_generator(c):
    """Hermitian ``h`` with ``exp(-i h t) = exp(a t)`` for the Cartan element ``a``."""
    cx, cy, cz = as_coefficients(c).as_array()
    return -(cx * pauli_word("XX") + cy * pauli_word("YY") + cz * pauli_word("ZZ"))


def evolve_cartan_frame(c, rho_s, rho_p, t):
    """Reduced evolution under ``exp(a t)`` alone (local factors stripped)."""
    return evolve_exact(cartan_generator(c), rho_s, rho_p, t)


def evolve_bloch(c, s0, p, t):
    """Bloch-vector form of :func:`evolve_cartan_frame`."""
    return to_bloch(evolve_cartan_frame(c, from_bloch(s0), from_bloch(p), t))


def probe_samples(n_probes, interior_fraction=0.25, seed=0):
    """Deterministic probe set: Fibonacci-sphere pure states plus interior points."""
    if n_probes < 1:
        raise ValueError("n_probes must be at least 1")
    n_inner = int(n_probes * interior_fraction) if n_probes > 1 else 0
    pure = fibonacci_sphere(n_probes - n_inner)
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(n_inner, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    v *= rng.uniform(size=(n_inner, 1)) ** (1 / 3)
    return np.vstack([pure, v])


def empirical_reachable_cloud(c, s0, t, n_probes, interior_fraction=0.25, seed=0):
    """System Bloch vectors reached from ``s0`` at time ``t`` over a probe sample."""
    rho_s = from_bloch(s0)
    x = mat_exp(cartan_generator(c), t)
    out = []
    for p in probe_samples(n_probes, interior_fraction, seed):
        r = partial_trace_probe(x @ kron(rho_s, from_bloch(p)) @ dagger(x))
        out.append(to_bloch(r))
    return np.array(out)


def is_valid_output(rho, tol=None):
    """Complete-positivity proxy: the evolved state is a density matrix."""
    return is_density(rho, default_tol() if tol is None else tol)
