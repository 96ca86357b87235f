"""Affine coherence-vector dynamics of the system qubit and its reachable sets.

With the local factors stripped, the system Bloch vector after time ``t`` is
``s = A(t, s0) p + a(t, s0)`` where ``p`` is the probe Bloch vector.  The image
of the probe ball is an ellipsoid: centre ``a``, semi-axes the singular values
of ``A``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .cartan import as_coefficients
from .pauli_algebra import AXES, default_tol, from_bloch, kron, partial_trace_probe, pauli, dagger


@dataclass(frozen=True)
class AffineMap:
    A: np.ndarray
    a: np.ndarray
    t: float
    s0: np.ndarray

    def __call__(self, p):
        return self.A @ np.asarray(p, dtype=float) + self.a

    def is_physical(self, n_samples=200, tol=None):
        """Sampled check that the probe sphere maps into the unit ball."""
        tol = default_tol() if tol is None else tol
        pts = fibonacci_sphere(n_samples)
        return bool(np.linalg.norm(pts @ self.A.T + self.a, axis=1).max() <= 1 + tol)


@dataclass(frozen=True)
class Ellipsoid:
    """``{center + axes @ diag(semi_axes) @ u : |u| <= 1}``."""

    center: np.ndarray
    semi_axes: np.ndarray
    axes: np.ndarray

    def contains(self, point, tol=None):
        """Membership via ``|diag(1/semi_axes) axes^T (point - center)| <= 1``.

        Collapsed directions (semi-axis below ``tol``) become exact coordinate
        constraints: the offset along them must itself be within ``tol``.
        """
        tol = default_tol() if tol is None else tol
        y = self.axes.T @ (np.asarray(point, dtype=float) - self.center)
        live = self.semi_axes > tol
        if np.any(np.abs(y[~live]) > tol):
            return False
        return bool(np.linalg.norm(y[live] / self.semi_axes[live]) <= 1 + tol)

    def to_dict(self):
        return {
            "center": self.center.tolist(),
            "semi_axes": self.semi_axes.tolist(),
            "axes": self.axes.tolist(),
        }


def _check_bloch(s0, name="s0"):
    s0 = np.asarray(s0, dtype=float)
    if s0.shape != (3,):
        raise ValueError(f"{name} must have 3 components")
    if np.linalg.norm(s0) > 1 + default_tol():
        raise ValueError(f"{name} lies outside the Bloch ball")
    return s0


def _trig(c, t):
    ang = 2 * np.multiply.outer(np.atleast_1d(np.asarray(t, dtype=float)), c)
    return np.sin(ang), np.cos(ang)


def _affine_batch(c, ts, s0):
    """``A`` and ``a`` for each time in ``ts``; shapes (n, 3, 3) and (n, 3)."""
    sin, cos = _trig(c, ts)
    sx, sy, sz = s0
    Sx, Sy, Sz = sin.T
    Cx, Cy, Cz = cos.T
    A = np.empty((len(Sx), 3, 3))
    A[:, 0, 0] = Sy * Sz
    A[:, 0, 1] = -sz * Sy * Cz
    A[:, 0, 2] = sy * Cy * Sz
    A[:, 1, 0] = sz * Sx * Cz
    A[:, 1, 1] = Sx * Sz
    A[:, 1, 2] = -sx * Cx * Sz
    # cos(2 c_y t) here (not cos(2 c_z t)): confirmed against the partial-trace evolution
    A[:, 2, 0] = -sy * Cy * Sx
    A[:, 2, 1] = sx * Cx * Sy
    A[:, 2, 2] = Sx * Sy
    a = np.column_stack([sx * Cy * Cz, sy * Cx * Cz, sz * Cx * Cy])
    return A, a


def affine_map(c, t, s0):
    """Exact affine map ``p -> A p + a`` for Cartan coefficients ``c`` at time ``t``.

    Uses the convention ``X(t) = exp(a t)`` with ``a = i sum c_k sigma_k sigma_k``.
    A Hamiltonian ``sum c_k sigma_k sigma_k`` generates ``exp(-i H t)``, which is
    this map with ``c`` negated.
    """
    s0 = _check_bloch(s0)
    c = as_coefficients(c).as_array()
    A, a = _affine_batch(c, [t], s0)
    return AffineMap(A[0], a[0], float(t), s0)


def affine_map_from_unitary(u, s0):
    """Affine map of an arbitrary joint unitary, read off by probing the channel.

    ``s(p)`` is affine in ``p``, so evaluating it at ``p = 0`` and the three
    unit vectors fixes ``A`` and ``a`` exactly.
    """
    s0 = _check_bloch(s0)
    u = np.asarray(u, dtype=complex)
    rho_s = from_bloch(s0)
    sig = [pauli(k) for k in AXES]

    def out(p):
        r = partial_trace_probe(u @ kron(rho_s, from_bloch(p)) @ dagger(u))
        return np.array([np.trace(r @ s).real for s in sig])

    a = out(np.zeros(3))
    A = np.column_stack([out(e) - a for e in np.eye(3)])
    return AffineMap(A, a, float("nan"), s0)


def det_A(c, t, s0):
    """Closed-form determinant of ``A(t, s0)``."""
    s0 = _check_bloch(s0)
    sin, _ = _trig(as_coefficients(c).as_array(), t)
    Sx, Sy, Sz = sin[0] ** 2
    sx, sy, sz = s0 ** 2
    return float(sx * Sy * Sz + sy * Sx * Sz + sz * Sx * Sy + (1 - sx - sy - sz) * Sx * Sy * Sz)


def ellipsoid_from_affine(A, a):
    u, s, _ = np.linalg.svd(A)
    if np.linalg.det(u) < 0:
        u = u.copy()
        u[:, -1] *= -1
    return Ellipsoid(np.asarray(a, dtype=float).copy(), s, u)


def reachable_ellipsoid(c, t, s0):
    m = affine_map(c, t, s0)
    return ellipsoid_from_affine(m.A, m.a)


def fibonacci_sphere(n):
    """``n`` deterministic, nearly uniform points on the unit sphere."""
    if n == 1:
        return np.array([[0.0, 0.0, 1.0]])
    i = np.arange(n)
    z = 1 - 2 * (i + 0.5) / n
    r = np.sqrt(1 - z ** 2)
    phi = i * np.pi * (3 - np.sqrt(5))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def sample_reachable_surface(e, n_theta, n_phi):
    """Polar-grid samples of the ellipsoid surface, one 3-vector per row."""
    if n_theta < 2 or n_phi < 2:
        raise ValueError("grid sizes must be at least 2")
    theta = np.linspace(0, np.pi, n_theta)
    phi = np.linspace(0, 2 * np.pi, n_phi, endpoint=False)
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    u = np.column_stack([
        (np.sin(th) * np.cos(ph)).ravel(),
        (np.sin(th) * np.sin(ph)).ravel(),
        np.cos(th).ravel(),
    ])
    return e.center + (u * e.semi_axes) @ e.axes.T


# --- distance from a target to the image of the probe ball / sphere ---------

def _sphere_min_batch(A, y):
    """Global minimisers of ``|A p - y|`` over the unit sphere, batched.

    Solves ``(A^T A + lam) p = A^T y`` with ``A^T A + lam >= 0`` by bisection
    on the secular equation, and also tries the degenerate ("hard") case
    ``lam = -min eig``.  Returns ``(distances, minimisers)``.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    G = np.einsum("nki,nkj->nij", A, A)
    gam, V = np.linalg.eigh(G)
    b = np.einsum("nji,nj->ni", V, np.einsum("nki,nk->ni", A, y))
    gmin = gam[:, :1]
    scale = np.maximum(1.0, np.abs(gam).max(axis=1, keepdims=True))
    eps = 1e-14 * scale

    def psi(lam):
        with np.errstate(divide="ignore"):
            return np.sum(b ** 2 / (gam + lam) ** 2, axis=1, keepdims=True) - 1

    lo = -gmin + eps
    hi = -gmin + np.linalg.norm(b, axis=1, keepdims=True) + 1.0
    regular = psi(lo)[:, 0] > 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        pos = psi(mid) > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    lam = 0.5 * (lo + hi)
    p_reg = b / (gam + lam)

    near = gam - gmin <= 1e-12 * scale
    p_hard = np.where(near, 0.0, b / np.where(near, 1.0, gam - gmin))
    rem = 1 - np.sum(p_hard ** 2, axis=1)
    hard = rem >= 0
    first_near = np.argmax(near, axis=1)
    p_hard[np.arange(len(A)), first_near] = np.sqrt(np.maximum(rem, 0))

    def finish(pc):
        pc = np.einsum("nij,nj->ni", V, pc)
        nrm = np.linalg.norm(pc, axis=1, keepdims=True)
        # A^T y = 0 and no hard-case component: every unit vector is optimal
        pc = np.where(nrm > 0, pc / np.where(nrm > 0, nrm, 1.0), np.array([0.0, 0.0, 1.0]))
        return np.linalg.norm(np.einsum("nij,nj->ni", A, pc) - y, axis=1), pc

    d_reg, q_reg = finish(p_reg)
    d_hard, q_hard = finish(p_hard)
    d_reg = np.where(regular, d_reg, np.inf)
    d_hard = np.where(hard, d_hard, np.inf)
    use_hard = d_hard < d_reg
    d = np.where(use_hard, d_hard, d_reg)
    q = np.where(use_hard[:, None], q_hard, q_reg)
    # neither branch valid only through rounding; fall back to the regular one
    bad = ~np.isfinite(d)
    if np.any(bad):
        dr, qr = finish(b / np.maximum(gam + lo, eps))
        d = np.where(bad, dr, d)
        q = np.where(bad[:, None], qr, q)
    return d, q


def _sphere_min(A, y):
    d, q = _sphere_min_batch(np.asarray(A)[None], np.asarray(y)[None])
    return float(d[0]), q[0]


def sphere_distance(A, a, target):
    """``min_{|p| = 1} |A p + a - target|`` and its minimiser (pure probes)."""
    y = np.asarray(target, dtype=float) - np.asarray(a, dtype=float)
    d, p = _sphere_min(np.asarray(A, dtype=float), y)
    return float(d), p


def ball_distance(A, a, target):
    """Distance from ``target`` to ``{A p + a : |p| <= 1}`` and a minimiser."""
    A = np.asarray(A, dtype=float)
    y = np.asarray(target, dtype=float) - np.asarray(a, dtype=float)
    p, *_ = np.linalg.lstsq(A, y, rcond=1e-13)
    if np.linalg.norm(p) <= 1:
        return float(np.linalg.norm(A @ p - y)), p
    d, p = _sphere_min(A, y)
    return float(d), p


def reachable_union_membership(c, s0, target, t_max, n_steps=10_000, tol=None):
    """Is ``target`` in ``R(s0, t)`` for some sampled ``t`` in ``[0, t_max]``?

    Scans a uniform grid with the exact distance from ``target`` to each
    reachable ellipsoid, then refines around near misses by golden-section
    search.  A positive answer is exact up to ``tol``; a negative one is
    limited by the grid.  Returns ``(found, earliest_witness_time_or_None)``.
    """
    tol = default_tol() if tol is None else tol
    s0 = _check_bloch(s0)
    target = _check_bloch(target, "target")
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    cc = as_coefficients(c).as_array()
    ts = np.linspace(0.0, t_max, n_steps + 1)
    A, a = _affine_batch(cc, ts, s0)
    dists = _batched_ball_distance(A, a, target)
    hit = np.nonzero(dists <= tol)[0]
    best = ts[hit[0]] if len(hit) else None

    def dist(t):
        m = affine_map(cc, t, s0)
        return ball_distance(m.A, m.a, target)[0]

    # d/dt of the distance is bounded by |A'| + |a'| < 20 max|c|
    h = ts[1] - ts[0]
    lip = 20 * np.abs(cc).max()
    for i in _local_minima(dists, lip * h):
        if best is not None and ts[i] - h >= best:
            break
        t_star, d_star = golden_section_min(dist, ts[max(i - 1, 0)], ts[min(i + 1, len(ts) - 1)])
        if d_star <= tol and (best is None or t_star < best):
            best = t_star
    return (best is not None), (None if best is None else float(best))


def golden_section_min(f, lo, hi, xtol=0.0, max_iter=200):
    """Minimise a unimodal scalar function on ``[lo, hi]``; returns ``(x, f(x))``.

    Runs until the bracket stops shrinking in floating point unless ``xtol``
    is reached first, so V-shaped minima are located to rounding precision.
    """
    inv = (math.sqrt(5) - 1) / 2
    a, b = float(lo), float(hi)
    x1, x2 = b - inv * (b - a), a + inv * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= xtol or not (a < x1 < x2 < b):
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv * (b - a)
            f2 = f(x2)
    cands = [(f1, x1), (f2, x2), (f(a), a), (f(b), b)]
    fx, x = min(cands)
    return x, fx


def _local_minima(values, bound):
    """Indices of grid local minima whose value is at most ``bound``, in order."""
    v = np.asarray(values)
    left = np.r_[True, v[1:] <= v[:-1]]
    right = np.r_[v[:-1] <= v[1:], True]
    return np.nonzero(left & right & (v <= bound))[0]


def _batched_ball_distance(A, a, target):
    y = target - a
    p = np.einsum("nij,nj->ni", np.linalg.pinv(A, rcond=1e-13), y)
    out = np.linalg.norm(np.einsum("nij,nj->ni", A, p) - y, axis=1)
    outside = np.nonzero(np.linalg.norm(p, axis=1) > 1)[0]
    if len(outside):
        out[outside] = _sphere_min_batch(A[outside], y[outside])[0]
    return out
