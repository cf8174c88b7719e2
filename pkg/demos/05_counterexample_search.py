"""Hunting for equal-fingerprint non-isometric pairs.

In the regimes where the coloring is a complete isometry invariant the
search must come back empty, so it doubles as a randomized sanity harness.
In weaker regimes (few iterations, low tuple dimension) any findings are
reported with full provenance for inspection.
"""

from geowl.oracle import search_indistinguishable

print("complete regimes (a hit here would be a bug):")
for ell, iters, d, n in ((1, 3, 2, 4), (2, 3, 3, 4)):
    found = search_indistinguishable(ell, iters, d, n, budget=60, seed=11)
    print(f"  ell={ell}, iters={iters}, d={d}, n={n}: {len(found)} findings")

print("\nweak regime probe (single iteration of the point coloring on a line):")
found = search_indistinguishable(1, 1, 1, 3, budget=200, seed=11)
print(f"  ell=1, iters=1, d=1, n=3: {len(found)} findings")
for f in found[:3]:
    print(f"  trial {f['trial']}: {f['cloud_a']} vs {f['cloud_b']}")
if not found:
    print("  none in this budget; the outcome is recorded, not asserted")
