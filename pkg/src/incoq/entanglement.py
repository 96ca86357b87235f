"""Concurrence and perfect-entangler classification of two-qubit propagators."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .bloch_dynamics import affine_map, affine_map_from_unitary, fibonacci_sphere, sphere_distance
from .cartan import _MAGIC_SIGNS, as_coefficients, exp_cartan, kak_decompose
from .controllability import default_horizon, scan_for_time
from .pauli_algebra import AXES, dagger, default_tol, is_density, is_unitary, pauli

#: Concurrence of a maximally entangled pure state.
MAX_CONCURRENCE = 0.5


def concurrence(rho4, tol=None):
    """``sqrt(l1 l2)`` of the reduced system state of a pure joint state.

    For ``rho4 = |psi><psi|`` the product ``l1 l2`` is ``|det psi_2x2|^2``, so the
    value is read from the dominant eigenvector; taking the square root of
    the reduced eigenvalues directly loses half the digits near product states.
    """
    tol = default_tol() if tol is None else tol
    rho4 = np.asarray(rho4, dtype=complex)
    if rho4.shape != (4, 4) or not is_density(rho4, tol):
        raise ValueError("concurrence expects a 4x4 density matrix")
    if abs(np.trace(rho4 @ rho4).real - 1) > 10 * tol:
        raise ValueError("concurrence is defined here for pure joint states only")
    _, vecs = np.linalg.eigh(rho4)
    return state_concurrence(vecs[:, -1])


def concurrence_from_bloch(s, tol=None):
    """``sqrt(1 - |s|^2) / 2`` for the reduced system Bloch vector ``s``."""
    tol = default_tol() if tol is None else tol
    n2 = float(np.dot(s, s))
    if n2 > (1 + tol) ** 2:
        raise ValueError("Bloch vector lies outside the unit ball")
    return 0.5 * math.sqrt(max(0.0, 1 - n2))


def state_concurrence(psi):
    """Concurrence of a pure state vector: ``|det|`` of its 2x2 reshaping."""
    a, b, c, d = np.asarray(psi, dtype=complex).ravel()
    return float(abs(a * d - b * c))


def _require_unitary(u):
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4) or not is_unitary(u):
        raise ValueError("expected a 4x4 unitary")
    return u


def _hull_contains_origin(angles, tol=1e-9):
    """Do the unit-circle points ``exp(i angles)`` have 0 in their convex hull?"""
    a = np.sort(np.mod(angles, 2 * np.pi))
    gaps = np.diff(np.r_[a, a[0] + 2 * np.pi])
    return bool(gaps.max() <= np.pi + tol)


def is_perfect_entangler(u, tol=1e-9):
    """Some product state is mapped to a maximally entangled state.

    Decided from the chamber coefficients: the spectrum of ``U_B^T U_B`` in the
    magic basis is ``exp(2 i lambda_j . c)`` and ``U`` is a perfect entangler
    iff the convex hull of that spectrum contains 0.
    """
    c = kak_decompose(_require_unitary(u)).coeffs.as_array()
    return _hull_contains_origin(2 * _MAGIC_SIGNS @ c, tol)


def _product_state(x):
    a = np.array([math.cos(x[0] / 2), np.exp(1j * x[1]) * math.sin(x[0] / 2)])
    b = np.array([math.cos(x[2] / 2), np.exp(1j * x[3]) * math.sin(x[2] / 2)])
    return np.kron(a, b)


def max_product_concurrence(u, n_starts=64, seed=0):
    """Largest concurrence reached from a product state, by multi-start search."""
    u = _require_unitary(u)
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(n_starts):
        x0 = rng.uniform(0, 2 * np.pi, size=4)
        res = minimize(lambda x: -state_concurrence(u @ _product_state(x)), x0,
                       method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000})
        best = max(best, -res.fun)
    return best


def _pure_test_states(n_extra=20):
    axes = np.vstack([np.eye(3), -np.eye(3)])
    return np.vstack([axes, fibonacci_sphere(n_extra)])


def probe_for_maximal_entanglement(u, s0):
    """Pure probe minimising the final ``|s|`` from system state ``s0``.

    Returns ``(residual_norm, probe)``; a residual of zero means the joint
    state ``u (rho_s (x) rho_p) u^dag`` is maximally entangled.
    """
    m = affine_map_from_unitary(u, s0)
    return sphere_distance(m.A, m.a, np.zeros(3))


def is_perfect_entangler_for_all_pure(u, tol=1e-8, states=None):
    """Every pure system state admits a probe making the output maximally entangled.

    Checked directly on the propagator (no KAK) over a fixed set of pure
    system states: the six axis states plus a Fibonacci-sphere sample.
    """
    u = _require_unitary(u)
    states = _pure_test_states() if states is None else states
    for s0 in states:
        if probe_for_maximal_entanglement(u, s0)[0] > tol:
            return False
    return True


# rows: axis of the initial state; entries: (first, second, phase) coefficient index
_AXIS_PAIRS = {"z": (0, 1, 2), "x": (1, 2, 0), "y": (2, 0, 1)}


def axis_entangling_margin(angles, axis):
    """Minimum ``|s|`` over pure probes for an axis initial state, closed form.

    For ``s0 = e_z`` the minimum over the probe sphere sits at the poles and
    equals ``min |cos 2(c_x -+ c_y)|``; the x and y axes follow by cyclic
    relabelling.  Vectorised over leading dimensions of ``angles``.
    """
    i, j, _ = _AXIS_PAIRS[axis]
    ang = np.asarray(angles, dtype=float)
    ci, cj = ang[..., i], ang[..., j]
    return np.minimum(np.abs(np.cos(2 * (ci - cj))), np.abs(np.cos(2 * (ci + cj))))


def three_axis_margin(angles):
    return np.max([axis_entangling_margin(angles, k) for k in AXES], axis=0)


def check_controllability_via_entanglement(c, t_max=None, n_steps=10_000, tol=1e-8):
    """Search for a time at which ``exp_cartan(c, t)`` is a perfect entangler for all pure states.

    Returns ``(found, t_tilde_or_None)``.  The scan uses the closed-form
    axis margins; each candidate is confirmed with
    :func:`is_perfect_entangler_for_all_pure` on the actual propagator.
    """
    cc = as_coefficients(c).as_array()
    if not np.any(cc):
        return False, None
    t_max = default_horizon(c) if t_max is None else t_max
    t = scan_for_time(
        lambda ts: three_axis_margin(np.multiply.outer(ts, cc)),
        4 * np.abs(cc).max(), t_max, n_steps,
        lambda t: is_perfect_entangler_for_all_pure(exp_cartan(cc, t), tol),
    )
    return t is not None, t


@dataclass
class MaximalEntanglementSolution:
    axis: str
    solvable: bool
    families: list = field(default_factory=list)
    residual: float = float("nan")
    probe: np.ndarray = None


def maximal_entanglement_conditions(c, s0_axis, tol=1e-9):
    """Can the axis state ``s0_axis`` be driven to ``|s| = 0`` by exp(a) (t = 1)?

    The coefficients are read as angles.  ``families`` lists which of the
    three analytic solution families hold, named for the z axis and
    relabelled cyclically for x and y:

    1. ``cos 2(c_i +- c_j) = 0`` with the probe along the axis;
    2. ``sin 2 c_j = 0`` and ``cos 2 c_i = 0``;
    3. ``sin 2 c_i = 0`` and ``cos 2 c_j = 0``.

    ``residual`` and ``probe`` come from a numerical minimisation of ``|s|``
    over pure probes, independent of the classification.
    """
    axis = s0_axis.lower()
    i, j, _ = _AXIS_PAIRS[axis]
    ang = as_coefficients(c).as_array()
    ci, cj = ang[i], ang[j]
    families = []
    if min(abs(math.cos(2 * (ci - cj))), abs(math.cos(2 * (ci + cj)))) <= tol:
        families.append(1)
    if abs(math.sin(2 * cj)) <= tol and abs(math.cos(2 * ci)) <= tol:
        families.append(2)
    if abs(math.sin(2 * ci)) <= tol and abs(math.cos(2 * cj)) <= tol:
        families.append(3)
    s0 = np.zeros(3)
    s0[AXES.index(axis)] = 1.0
    m = affine_map(ang, 1.0, s0)
    res, probe = sphere_distance(m.A, m.a, np.zeros(3))
    return MaximalEntanglementSolution(axis, bool(res <= tol), families, res, probe)


def bloch_rotation(v):
    """SO(3) matrix of the SU(2) element ``v``: ``R_ij = tr(s_i v s_j v^dag) / 2``."""
    sig = [pauli(k) for k in AXES]
    return np.array([[0.5 * np.trace(si @ v @ sj @ dagger(v)).real for sj in sig] for si in sig])


def sqrt_swap_witness_probe(u, s0, tol=1e-8):
    """Probe Bloch vector that maximally entangles pure ``s0`` under ``u``.

    ``u`` must be locally equivalent to sqrt(SWAP) or its inverse.  ``s0`` is
    carried into the stripped frame by the right-hand system factor, the
    witness there is ``-s0`` (after a pi rotation about z for the inverse
    class, whose chamber point differs from ``-(pi/8)(1, 1, 1)`` by that
    conjugation), and the result is mapped back through the probe factor.
    """
    d = kak_decompose(_require_unitary(u))
    k = d.coeffs.as_array()
    if np.abs(k - np.pi / 8).max() <= tol:
        flip = np.eye(3)
    elif np.abs(k - np.array([1, 1, -1]) * np.pi / 8).max() <= tol:
        flip = np.diag([-1.0, -1.0, 1.0])
    else:
        raise ValueError("unitary is not locally equivalent to sqrt(SWAP) or its inverse")
    s_frame = flip @ bloch_rotation(d.l2_s) @ np.asarray(s0, dtype=float)
    return bloch_rotation(d.l2_p).T @ -s_frame
