"""Cartan (KAK) structure of two-qubit propagators.

Every ``U`` in U(4) factors as ``phase * (l1_s (x) l1_p) exp(a) (l2_s (x) l2_p)``
with ``a = i (c_x XX + c_y YY + c_z ZZ)``.  Only the three coefficients carry
the non-local content.
"""

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

import numpy as np

from .pauli_algebra import (
    ALGEBRAIC_TOL,
    AXES,
    I2,
    I4,
    dagger,
    default_tol,
    is_hermitian,
    is_unitary,
    kron,
    pauli,
    pauli_word,
)

_SIGMA_SIGMA = [pauli_word(k * 2) for k in "XYZ"]

# Magic (Bell) basis, columns |Phi_1..4>.  Local SU(2)xSU(2) maps to SO(4).
MAGIC = np.array(
    [[1, 1j, 0, 0],
     [0, 0, 1j, 1],
     [0, 0, 1j, -1],
     [1, -1j, 0, 0]],
    dtype=complex,
) / math.sqrt(2)
MAGIC_DAG = dagger(MAGIC)

# Row j holds the eigenvalues of (XX, YY, ZZ) on magic state j.
_MAGIC_SIGNS = np.array(
    [np.real(np.diag(MAGIC_DAG @ s @ MAGIC)) for s in _SIGMA_SIGMA]
).T
_PHASE_SYSTEM = np.column_stack([np.ones(4), _MAGIC_SIGNS])
_PHASE_SYSTEM_INV = np.linalg.inv(_PHASE_SYSTEM)


@dataclass(frozen=True)
class CartanCoefficients:
    """Interaction strengths multiplying XX, YY and ZZ in the Cartan element.

    Entries may be floats or exact ``Fraction`` values (the latter keep the
    odd-ratio controllability test exact).
    """

    cx: Real
    cy: Real
    cz: Real

    def __iter__(self):
        return iter((self.cx, self.cy, self.cz))

    def as_array(self):
        return np.array([float(self.cx), float(self.cy), float(self.cz)])

    def is_exact(self):
        return all(isinstance(v, (int, Fraction)) for v in self)

    def scaled(self, factor):
        return CartanCoefficients(*(v * factor for v in self))


def as_coefficients(c):
    if isinstance(c, CartanCoefficients):
        return c
    vals = tuple(c)
    if len(vals) != 3:
        raise ValueError(f"expected three Cartan coefficients, got {len(vals)}")
    return CartanCoefficients(*vals)


@dataclass(frozen=True)
class AlphaCoefficients:
    alpha0: complex
    alpha_x: complex
    alpha_y: complex
    alpha_z: complex

    def __iter__(self):
        return iter((self.alpha0, self.alpha_x, self.alpha_y, self.alpha_z))


@dataclass(frozen=True)
class CartanData:
    """Result of :func:`kak_decompose`.

    ``reconstruct()`` returns ``global_phase * (l1_s (x) l1_p) @
    exp_cartan(coeffs, 1) @ (l2_s (x) l2_p)``, equal to the decomposed unitary.
    All four local factors have unit determinant.
    """

    coeffs: CartanCoefficients
    l1_s: np.ndarray
    l1_p: np.ndarray
    l2_s: np.ndarray
    l2_p: np.ndarray
    global_phase: complex
    raw_coeffs: CartanCoefficients = None

    def reconstruct(self):
        return (
            self.global_phase
            * kron(self.l1_s, self.l1_p)
            @ exp_cartan(self.coeffs, 1.0)
            @ kron(self.l2_s, self.l2_p)
        )


def cartan_element(c):
    """``a = i (c_x XX + c_y YY + c_z ZZ)``, anti-Hermitian and traceless."""
    c = as_coefficients(c).as_array()
    return 1j * sum(ck * s for ck, s in zip(c, _SIGMA_SIGMA))


def alpha_coeffs(c, t):
    cx, cy, cz = as_coefficients(c).as_array() * t
    ccc = math.cos(cx) * math.cos(cy) * math.cos(cz)
    sss = math.sin(cx) * math.sin(cy) * math.sin(cz)
    return AlphaCoefficients(
        ccc + 1j * sss,
        math.cos(cx) * math.sin(cy) * math.sin(cz) + 1j * math.sin(cx) * math.cos(cy) * math.cos(cz),
        math.sin(cx) * math.cos(cy) * math.sin(cz) + 1j * math.cos(cx) * math.sin(cy) * math.cos(cz),
        math.sin(cx) * math.sin(cy) * math.cos(cz) + 1j * math.cos(cx) * math.cos(cy) * math.sin(cz),
    )


def exp_cartan(c, t):
    """Closed-form ``exp(a t)`` assembled from :func:`alpha_coeffs`."""
    al = alpha_coeffs(c, t)
    return al.alpha0 * I4 + sum(a * s for a, s in zip(list(al)[1:], _SIGMA_SIGMA))


def coeffs_from_hamiltonian(h_tot, tol=None):
    """Project a Hermitian 4x4 Hamiltonian onto the XX, YY, ZZ directions.

    Returns ``(coeffs, remainder)`` with ``c_k = tr(h XX_k) / 4`` and
    ``remainder = h - sum_k c_k XX_k``.  Emits :class:`NonCartanWarning` when
    the remainder holds non-local Pauli products other than XX, YY, ZZ; in that
    case the constant-coefficient analysis does not apply directly.
    """
    tol = default_tol() if tol is None else tol
    h = np.asarray(h_tot, dtype=complex)
    if h.shape != (4, 4) or not is_hermitian(h, tol):
        raise ValueError("coeffs_from_hamiltonian expects a Hermitian 4x4 matrix")
    c = [np.trace(h @ s).real / 4 for s in _SIGMA_SIGMA]
    remainder = h - sum(ck * s for ck, s in zip(c, _SIGMA_SIGMA))
    if nonlocal_remainder(remainder, tol):
        warnings.warn(
            "Hamiltonian has non-local terms outside span{XX, YY, ZZ}; "
            "decompose the full propagator instead",
            NonCartanWarning,
            stacklevel=2,
        )
    return CartanCoefficients(*c), remainder


class NonCartanWarning(UserWarning):
    pass


def pauli_components(h):
    """Map each two-letter Pauli word to its (real) coefficient in ``h``."""
    h = np.asarray(h, dtype=complex)
    out = {}
    for a in "IXYZ":
        for b in "IXYZ":
            out[a + b] = np.trace(h @ pauli_word(a + b)).real / 4
    return out


def nonlocal_remainder(remainder, tol=None):
    """True if ``remainder`` contains Pauli products with both letters non-identity."""
    tol = default_tol() if tol is None else tol
    comps = pauli_components(remainder)
    return any(abs(v) > tol for w, v in comps.items() if "I" not in w)


# --- KAK ---------------------------------------------------------------------

def _diagonalize_symmetric_unitary(m):
    """Real orthogonal ``O`` (det +1) with ``O.T @ m @ O`` diagonal.

    The real and imaginary parts of a symmetric unitary commute, so a generic
    real combination of them shares their eigenbasis.  A few fixed weights are
    tried and the best-diagonalizing basis kept, which is deterministic and
    handles exact degeneracies (e.g. SWAP, where ``m`` is a multiple of 1).
    """
    re, im = m.real, m.imag
    best, best_err = None, np.inf
    for w in (0.6180339887498949, -1.4142135623730951, 2.718281828459045, 0.0, 1e6):
        comb = re + w * im if w < 1e5 else im
        _, o = np.linalg.eigh((comb + comb.T) / 2)
        d = o.T @ m @ o
        err = np.abs(d - np.diag(np.diag(d))).max()
        if err < best_err:
            best, best_err = o, err
        if err < 1e-13:
            break
    if np.linalg.det(best) < 0:
        best = best.copy()
        best[:, 0] *= -1
    return best


def _factor_local(m):
    """Split a 4x4 ``a (x) b`` into SU(2) factors; returns ``(a, b, phase)``."""
    r = m.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    u, s, vh = np.linalg.svd(r)
    a = (np.sqrt(s[0]) * u[:, 0]).reshape(2, 2)
    b = (np.sqrt(s[0]) * vh[0, :]).reshape(2, 2)
    a = a / np.sqrt(np.linalg.det(a))
    b = b / np.sqrt(np.linalg.det(b))
    phase = np.trace(dagger(np.kron(a, b)) @ m) / 4
    return a, b, phase


def _raw_kak(u):
    """Unconstrained KAK: returns (coeffs array, l1_s, l1_p, l2_s, l2_p)."""
    det = np.linalg.det(u)
    u_special = u / det ** 0.25
    up = MAGIC_DAG @ u_special @ MAGIC
    m = up.T @ up
    o = _diagonalize_symmetric_unitary(m)
    d = np.diag(o.T @ m @ o)
    theta = np.angle(d) / 2
    # det(F) must be +1 so that K1 lands in SO(4)
    if np.cos(theta.sum()) < 0:
        theta[0] += np.pi
    f = np.exp(1j * theta)
    k1 = up @ o @ np.diag(1 / f)
    k2 = o.T
    l1 = MAGIC @ k1.real @ MAGIC_DAG
    l2 = MAGIC @ k2 @ MAGIC_DAG
    l1_s, l1_p, _ = _factor_local(l1)
    l2_s, l2_p, _ = _factor_local(l2)
    coeffs = (_PHASE_SYSTEM_INV @ theta)[1:]
    return coeffs, l1_s, l1_p, l2_s, l2_p


class _LocalTracker:
    """Coefficients plus local corrections while moving into the Weyl chamber.

    Maintains ``U ~ (a1 (x) b1) E(c) (a2 (x) b2)`` up to a global phase, where
    ``E(c) = exp(i sum c_k sigma_k sigma_k)``.
    """

    def __init__(self, c, l1_s, l1_p, l2_s, l2_p):
        self.c = np.array(c, dtype=float)
        self.a1, self.b1, self.a2, self.b2 = l1_s, l1_p, l2_s, l2_p

    def shift(self, k, m):
        # E(c) = E(c - m pi/2 e_k) (i sigma_k)^m (x) (i sigma_k)^m  up to phase
        if m == 0:
            return
        self.c[k] -= m * np.pi / 2
        g = np.linalg.matrix_power(1j * pauli(AXES[k]), int(m) % 4)
        self.a2 = g @ self.a2
        self.b2 = g @ self.b2

    def flip(self, j, l):
        # conjugating by sigma_k (x) 1 negates the other two coefficients
        k = 3 - j - l
        self.c[j] *= -1
        self.c[l] *= -1
        g = 1j * pauli(AXES[k])
        self.a1 = self.a1 @ g
        self.a2 = dagger(g) @ self.a2

    def swap(self, j, l):
        # V = exp(-i pi/4 sigma_k) rotates sigma_j <-> sigma_l up to signs
        k = 3 - j - l
        v = np.cos(np.pi / 4) * I2 - 1j * np.sin(np.pi / 4) * pauli(AXES[k])
        self.c[[j, l]] = self.c[[l, j]]
        self.a1 = self.a1 @ dagger(v)
        self.b1 = self.b1 @ dagger(v)
        self.a2 = v @ self.a2
        self.b2 = v @ self.b2


def _canonicalize(tr, tol):
    for k in range(3):
        tr.shift(k, round(tr.c[k] / (np.pi / 2)))
    # sort by magnitude, descending
    for i in range(3):
        for j in range(2 - i):
            if abs(tr.c[j]) < abs(tr.c[j + 1]):
                tr.swap(j, j + 1)
    if tr.c[0] < 0 and tr.c[1] < 0:
        tr.flip(0, 1)
    elif tr.c[0] < 0:
        tr.flip(0, 2)
    elif tr.c[1] < 0:
        tr.flip(1, 2)
    # on the c_x = pi/4 face, (pi/4, c_y, c_z) ~ (pi/4, c_y, -c_z)
    if abs(tr.c[0] - np.pi / 4) <= tol and tr.c[2] < -tol:
        tr.shift(0, 1)
        tr.flip(0, 2)


def canonical_coefficients(c, tol=None):
    """Move a coefficient triple into the chamber pi/4 >= c_x >= c_y >= |c_z|.

    On the face ``c_x = pi/4`` the sign of ``c_z`` is taken non-negative.
    """
    tol = ALGEBRAIC_TOL * 1e3 if tol is None else tol
    tr = _LocalTracker(as_coefficients(c).as_array(), I2, I2, I2, I2)
    _canonicalize(tr, tol)
    return CartanCoefficients(*map(float, tr.c))


def kak_decompose(u, tol=None):
    """KAK decomposition of a two-qubit unitary with Weyl-chamber coefficients."""
    tol = default_tol() if tol is None else tol
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4) or not is_unitary(u, tol):
        raise ValueError("kak_decompose expects a 4x4 unitary")
    raw, l1_s, l1_p, l2_s, l2_p = _raw_kak(u)
    tr = _LocalTracker(raw, l1_s, l1_p, l2_s, l2_p)
    _canonicalize(tr, 1e-9)
    coeffs = CartanCoefficients(*map(float, tr.c))
    mats = [m / np.sqrt(np.linalg.det(m)) for m in (tr.a1, tr.b1, tr.a2, tr.b2)]
    rec = kron(mats[0], mats[1]) @ exp_cartan(coeffs, 1.0) @ kron(mats[2], mats[3])
    phase = np.trace(dagger(rec) @ u) / 4
    return CartanData(
        coeffs, *mats, global_phase=complex(phase / abs(phase)),
        raw_coeffs=CartanCoefficients(*map(float, raw)),
    )


def swap_matrix():
    """The SWAP gate on S (x) P."""
    return 0.5 * (I4 + sum(_SIGMA_SIGMA))


def chamber_distance(c1, c2):
    """Max-norm distance between two canonical coefficient triples."""
    return float(np.abs(as_coefficients(c1).as_array() - as_coefficients(c2).as_array()).max())
