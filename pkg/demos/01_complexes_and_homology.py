#!/usr/bin/env python3
"""Build finite complexes, validate them, and compute integral homology.

Walks through the built-in corpus: Euler characteristics, Smith-normal-form
homology with torsion coefficients, and what a validation failure looks like.
"""

from torsionlab import (
    ComplexDescription,
    Incidence,
    corpus_get,
    corpus_list,
    cw_complex_from_words,
)

print("corpus:", ", ".join(corpus_list()))
print()

for name in ("circle-1cell", "torus", "klein", "rp2", "sphere", "lens-5-2"):
    cx = corpus_get(name).complex
    chi = cx.euler_characteristic()
    print(f"{name:14s} chi = {chi:2d}", end="   ")
    for d in range(cx.dim + 1):
        betti, torsion = cx.integral_homology(d)
        t = f" + Z/{'+Z/'.join(map(str, torsion))}" if torsion else ""
        print(f"H_{d} = Z^{betti}{t}", end="  ")
    print()

print()
print("A complex that violates the boundary-squared identity is reported:")
rp2 = cw_complex_from_words(
    "rp2", ["v"], {"a": ("v", "v")}, {"F": [("a", 1), ("a", 1)]}, "v",
)
# glue a 3-cell onto F with a single record: d(dC) = dF = 2a does not vanish
from torsionlab import Cell, EdgePath

cells = list(rp2.cells) + [Cell("C", 3, "v")]
incs = list(rp2.incidences) + [Incidence("C", "F", 1, EdgePath((), "v", "v"))]
bad = ComplexDescription(cells, incs, "v", "coned-rp2")
report = bad.validate()
print("ok?", report.ok)
for code, message in report.violations:
    print(f"  [{code}] {message}")
