#!/usr/bin/env python3
"""Flat bundles: transport, flatness checking, and the volume-distortion class.

A flat bundle is one invertible matrix per oriented edge whose ordered product
around every 2-cell is the identity.  Rational entries are computed exactly.
The cohomology class gamma -> log |det transport(gamma)| depends only on the
homology class of the loop and vanishes for volume-preserving bundles.
"""

import math

from torsionlab import EdgePath, FlatBundle, check_flatness, corpus_get, kt_class, kt_evaluate, transport

torus = corpus_get("torus").complex

commuting = FlatBundle(1, {"a": [[2]], "b": [[3]]})
print("commuting rank-1 pair flat?", check_flatness(torus, commuting).ok)

noncommuting = FlatBundle(2, {"a": [[1, 1], [0, 1]], "b": [[1, 0], [1, 1]]})
report = check_flatness(torus, noncommuting)
print("unipotent pair flat?", report.ok, "- failing 2-cells:", report.failing_cells())
print()

# transport is an exact ordered product; the commutator word is trivial
word = EdgePath((("a", 1), ("b", 1), ("a", -1), ("b", -1)), "v", "v")
print("transport around a b a^-1 b^-1:", transport(commuting, word))

loop_ab = EdgePath((("a", 1), ("b", 1)), "v", "v")
print("log|det| around a.b:", kt_evaluate(commuting, loop_ab), "= log 6 =", math.log(6))
print()

# tabulated on the Smith-normal-form basis of H_1
kc = kt_class(torus, commuting)
print("class on the H1 basis:", [round(v, 12) for v in kc.values])

rotation = FlatBundle(
    2, {"a": [["3/5", "-4/5"], ["4/5", "3/5"]], "b": [["5/13", "-12/13"], ["12/13", "5/13"]]}
)
print("volume-preserving bundle gives the zero class:", kt_class(torus, rotation).is_zero)

lens = corpus_get("lens-5-1")
print("finite H1 (lens space) forces the zero class:", kt_class(lens.complex, lens.bundle).is_zero)
