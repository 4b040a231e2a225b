#!/usr/bin/env python3
"""Zeta-regularized torsion of the circle against the combinatorial value.

The twisted Laplacian spectrum on the circle is explicit, so the regularized
determinant has a closed form per holonomy eigenvalue; a truncated spectral
product with an Euler-Maclaurin tail is the independent route.  For acyclic
holonomy the analytic and combinatorial torsions agree to working precision,
non-volume-preserving matrices included.
"""

import numpy as np

from torsionlab import (
    CircleModel,
    FlatBundle,
    analytic_torsion_circle,
    assemble,
    canonical_spray,
    corpus_get,
    t_comb,
    zeta_det_laplacian,
)
from torsionlab.corpus import rotation_matrix

circ = corpus_get("circle-1cell").complex
spray = canonical_spray(circ)

holonomies = {
    "H = [-1]": np.array([[-1.0]]),
    "H = [3]": np.array([[3.0]]),
    "rotation 2pi/3": rotation_matrix(2 * np.pi / 3),
    "non-unitary 2x2": np.array([[1.5, 0.25], [0.0, -2.0]]),
}

print(f"{'holonomy':18s} {'analytic':>14s} {'combinatorial':>14s} {'rel diff':>10s}")
for label, h in holonomies.items():
    analytic = analytic_torsion_circle(CircleModel(h)).value
    comb = t_comb(assemble(circ, FlatBundle(h.shape[0], {"e": h}), spray), "eig")
    print(f"{label:18s} {analytic:14.9f} {comb:14.9f} {abs(analytic-comb)/comb:10.2e}")

print()
print("determinant of the twisted 0-form Laplacian, two routes (H = [-1]):")
z = zeta_det_laplacian(CircleModel([[-1.0]]), truncation=100000)
print(f"  closed form 4 sin^2(pi/2) = {z.value}")
print(f"  truncated product, N = {z.truncation}: {z.truncated_value}  (discrepancy {z.discrepancy:.2e})")

print()
print("circumference independence (acyclic case):")
for L in (1.0, 2.0, np.pi):
    v = analytic_torsion_circle(CircleModel([[3.0]], circumference=L)).value
    print(f"  L = {L:.4f}: {v:.12f}")

print()
print("zero modes: the untwisted circle keeps harmonic content in degrees 0 and 1")
res = analytic_torsion_circle(CircleModel(np.eye(2)))
print("  harmonic dims:", res.harmonic_dims, " det' contribution:", res.det_zero_forms)
