"""Incoherent control of a qubit through a probe qubit.

A fixed two-qubit Hamiltonian acts on the system S and a probe P; the only
control is the probe's initial state.  The package computes the Cartan (KAK)
form of the joint propagator, the affine map from probe to system Bloch
vector and its reachable ellipsoids, accessibility and controllability
verdicts, and entangling-power classifications, all checked against a
brute-force density-matrix oracle.
"""

from .bloch_dynamics import (
    AffineMap,
    Ellipsoid,
    affine_map,
    affine_map_from_unitary,
    ball_distance,
    det_A,
    ellipsoid_from_affine,
    reachable_ellipsoid,
    reachable_union_membership,
    sample_reachable_surface,
    sphere_distance,
)
from .cartan import (
    CartanCoefficients,
    CartanData,
    NonCartanWarning,
    alpha_coeffs,
    canonical_coefficients,
    cartan_element,
    coeffs_from_hamiltonian,
    exp_cartan,
    kak_decompose,
    swap_matrix,
)
from .controllability import (
    Verdict,
    check_accessibility,
    check_controllability,
    find_locally_swap_time,
    is_locally_sqrt_swap,
    is_locally_swap,
    rational_odd_ratio,
    verify_three_transfers,
)
from .entanglement import (
    check_controllability_via_entanglement,
    concurrence,
    concurrence_from_bloch,
    is_perfect_entangler,
    is_perfect_entangler_for_all_pure,
    maximal_entanglement_conditions,
    sqrt_swap_witness_probe,
)
from .oracle import empirical_reachable_cloud, evolve_bloch, evolve_exact
from .pauli_algebra import from_bloch, kron, mat_exp, partial_trace_probe, pauli, to_bloch

__version__ = "0.1.0"
