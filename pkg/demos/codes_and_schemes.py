"""
Codes and diagnosis schemes
===========================

Build each code family, check its stabilizer structure, and compare the two
diagnosis schemes by their sensitivity and boundary distance.
"""

from topodecode.codes import FAMILIES, build_code, check_invariants, describe
from topodecode.diagnosis import analyze, build_scheme, lower_bound

# a code is a stack of symplectic check rows (x | z) plus two logical pairs
code = build_code("surface_rotated", 3)
print(describe(code, with_distance=True))
print("invariant violations:", check_invariants(code))

# the diagnosis rows H_g split the 4 logical classes apart; each row is
# measured against the error just like a check
for kind in ("short", "uniform"):
    sch = build_scheme(code, kind)
    print(kind, "rows:", sch.rows)
    print(sch.D)

# m is the worst-case label sensitivity, M the squared distance from a clean
# label to the nearest decision boundary, N = m / M
for fam in FAMILIES:
    for d in (3, 5, 7):
        info = analyze(build_scheme(build_code(fam, d), "uniform"))
        print(f"{fam:18s} d={d}  m={info['m']}  M={info['M']:.2f}  N={info['N']:.3f}"
              f"  (lower bound {lower_bound(build_code(fam, d)):.3f})")
