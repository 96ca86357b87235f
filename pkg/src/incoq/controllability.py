"""Accessibility and controllability decisions from the Cartan coefficients."""

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .bloch_dynamics import _local_minima, affine_map, golden_section_min, sphere_distance
from .cartan import as_coefficients, chamber_distance, exp_cartan, kak_decompose
from .pauli_algebra import default_tol

SWAP_POINT = (math.pi / 4, math.pi / 4, math.pi / 4)
SQRT_SWAP_POINTS = ((math.pi / 8, math.pi / 8, math.pi / 8), (math.pi / 8, math.pi / 8, -math.pi / 8))

#: Rational reconstruction bounds for floating-point coefficient ratios.
MAX_DEN = 4096
RATIO_TOL = 1e-9
#: Accessibility zero test, relative to max |c_k|.
ZERO_REL_TOL = 1e-12

EXACT = "exact_rational"
RECONSTRUCTED = "reconstructed_rational"
FALLBACK = "numeric_fallback"


@dataclass(frozen=True)
class Verdict:
    controllable: bool
    pure_state_controllable: bool
    accessible: bool
    k1: Optional[int] = None
    k2: Optional[int] = None
    k3: Optional[int] = None
    t_hat: Optional[float] = None
    t_tilde: Optional[float] = None
    method: str = EXACT

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: d.get(k) for k in cls.__dataclass_fields__})

    @property
    def witness(self):
        if self.t_hat is None:
            return None
        return {"k1": self.k1, "k2": self.k2, "k3": self.k3,
                "t_hat": self.t_hat, "t_tilde": self.t_tilde}


def check_accessibility(c):
    """Accessible iff all three Cartan coefficients are non-zero."""
    c = as_coefficients(c)
    if c.is_exact():
        return all(v != 0 for v in c)
    vals = np.abs(c.as_array())
    top = vals.max()
    return bool(top > 0 and np.all(vals > ZERO_REL_TOL * top))


def _convergents(x):
    """Continued-fraction convergents of a float, as Fractions."""
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    r = x
    for _ in range(64):
        a = math.floor(r)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        yield Fraction(h1, k1)
        frac = r - a
        if frac == 0:
            return
        r = 1 / frac
        if not math.isfinite(r):
            return


def reconstruct_ratio(x, y, max_den=MAX_DEN, tol=RATIO_TOL):
    """First continued-fraction convergent of ``x/y`` within ``tol``, or None.

    Exact inputs (ints / Fractions) are divided exactly.
    """
    if y == 0:
        raise ValueError("denominator must be non-zero")
    if isinstance(x, (int, Fraction)) and isinstance(y, (int, Fraction)):
        return Fraction(x) / Fraction(y)
    ratio = float(x) / float(y)
    for conv in _convergents(ratio):
        if conv.denominator > max_den:
            return None
        if abs(ratio - conv) <= tol:
            return conv
    return None


def rational_odd_ratio(x, y, max_den=MAX_DEN, tol=RATIO_TOL):
    """``(p, q)`` with ``x/y = p/q`` and both odd, or None.

    Only the first convergent inside ``tol`` is considered: a nearby
    odd/odd approximant with a larger denominator does not count.
    """
    r = reconstruct_ratio(x, y, max_den, tol)
    if r is None or r.numerator % 2 == 0 or r.denominator % 2 == 0:
        return None
    return r.numerator, r.denominator


def _odd_triple(c, max_den, tol):
    """Smallest integer triple proportional to ``c``; None if not reconstructible."""
    cx, cy, cz = c
    ry = reconstruct_ratio(cy, cx, max_den, tol)
    rz = reconstruct_ratio(cz, cx, max_den, tol)
    if ry is None or rz is None:
        return None
    den = math.lcm(ry.denominator, rz.denominator)
    n = [den, int(ry * den), int(rz * den)]
    g = math.gcd(*n)
    return [v // g for v in n]


def check_controllability(c, max_den=MAX_DEN, tol=RATIO_TOL):
    """Controllability verdict: all pairwise ratios of ``c`` are odd/odd.

    On success the witness ``t_hat = (2 k1 + 1) pi / (4 c_x)`` is the first
    positive time at which every ``c_k t_hat`` is an odd multiple of pi/4.
    """
    c = as_coefficients(c)
    method = EXACT if c.is_exact() else RECONSTRUCTED
    accessible = check_accessibility(c)
    if not accessible:
        return Verdict(False, False, False, method=method)
    n = _odd_triple(tuple(c), max_den, tol)
    if n is None:
        return Verdict(False, False, True, method=FALLBACK)
    if any(v % 2 == 0 for v in n):
        return Verdict(False, False, True, method=method)
    if n[0] * float(c.cx) < 0:
        n = [-v for v in n]
    t_hat = n[0] * math.pi / (4 * float(c.cx))
    k1, k2, k3 = ((v - 1) // 2 for v in n)
    return Verdict(True, True, True, k1, k2, k3, t_hat, t_hat / 2, method)


def is_locally_swap(u, tol=1e-8):
    """``u`` equals SWAP up to local unitaries and a global phase."""
    return chamber_distance(kak_decompose(u).coeffs, SWAP_POINT) <= tol


def is_locally_sqrt_swap(u, tol=1e-8):
    """``u`` is locally equivalent to sqrt(SWAP) or to its inverse.

    In the chamber the two classes sit at (pi/8, pi/8, +pi/8) and
    (pi/8, pi/8, -pi/8).
    """
    k = kak_decompose(u).coeffs
    return min(chamber_distance(k, p) for p in SQRT_SWAP_POINTS) <= tol


def axis_transfer_margins(c, t):
    """Smallest reachable ``|s|`` from each axis state x, y, z at time ``t``.

    Minimises over pure probes with the exact affine map; zero means the
    axis state can be sent to the maximally mixed state.
    """
    out = []
    for e in np.eye(3):
        m = affine_map(c, t, e)
        out.append(sphere_distance(m.A, m.a, np.zeros(3))[0])
    return np.array(out)


def verify_three_transfers(c, t, tol=None):
    """Can the three axis states each be sent to the origin at time ``t``?"""
    tol = default_tol() if tol is None else tol
    return bool(axis_transfer_margins(c, t).max() <= tol)


def _swap_margin(c, ts):
    # locally SWAP at t iff every |sin(2 c_k t)| = 1
    return np.abs(np.cos(2 * np.multiply.outer(ts, c))).max(axis=-1)


def default_horizon(c):
    vals = np.abs(as_coefficients(c).as_array())
    vals = vals[vals > 0]
    return 4 * math.pi / vals.min() if len(vals) else 1.0


def scan_for_time(margin, lip, t_max, n_steps, confirm):
    """Earliest ``t`` in ``(0, t_max]`` where ``margin`` vanishes and ``confirm`` holds.

    ``margin`` must be vectorised over times and Lipschitz with constant
    ``lip``; grid minima that could hide a zero are refined by
    golden-section search before ``confirm(t)`` gets the final say.
    """
    ts = np.linspace(0.0, t_max, n_steps + 1)[1:]
    vals = margin(ts)
    h = ts[1] - ts[0] if len(ts) > 1 else t_max
    for i in _local_minima(vals, lip * h):
        lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, len(ts) - 1)]
        if i == 0:
            lo = ts[0] / 2
        t, _ = golden_section_min(lambda t: float(margin(np.array([t]))[0]), lo, hi)
        if confirm(t):
            return t
    return None


def find_locally_swap_time(c, t_max=None, n_steps=10_000, tol=1e-8):
    """First time at which ``exp_cartan(c, t)`` is locally SWAP, or None."""
    cc = as_coefficients(c).as_array()
    if not np.any(cc):
        return None
    t_max = default_horizon(c) if t_max is None else t_max
    return scan_for_time(
        lambda ts: _swap_margin(cc, ts), 2 * np.abs(cc).max(), t_max, n_steps,
        lambda t: is_locally_swap(exp_cartan(cc, t), tol),
    )
