"""Coloring point clouds and comparing their fingerprints.

Every tuple of cloud points gets a color built from squared distances alone,
refined a few times by folding in the colors of all single-point
substitutions.  The multiset of colors is a cloud-level invariant: isometric
clouds always agree on it, and at the right tuple dimension the converse
holds too.
"""

from fractions import Fraction as F

from geowl import Interner, PointCloud, apply_random_isometry, compare, \
    fingerprint, random_cloud, run_wl

square = PointCloud(2, ((F(0), F(0)), (F(1), F(0)), (F(1), F(1)), (F(0), F(1))),
                    label="unit square")
print(f"cloud: {square.label}, n={square.n}, d={square.dim}")

store = run_wl(square, ell=1, iters=3)
print("color classes per iteration:", store.class_counts())
fp = fingerprint(store)
print(f"fingerprint: {len(fp.entries)} classes over {fp.total} tuples,"
      f" digest {fp.digest()}")

# A rotated, reflected, translated and reshuffled copy is indistinguishable,
# bit for bit, when both clouds are colored through a shared interner.
moved = apply_random_isometry(square, seed=2024)
print("\nisometric copy:", [tuple(map(str, p)) for p in moved.points])
inter = Interner("exact")
fa = fingerprint(run_wl(square, 1, 3, interner=inter))
fb = fingerprint(run_wl(moved, 1, 3, interner=inter))
print("fingerprints:", compare(fa, fb))

# Two line clouds with the same point count and diameter but different
# spacing split after a single refinement.
a = PointCloud(1, ((F(0),), (F(1),), (F(2),)), label="evenly spaced")
b = PointCloud(1, ((F(0),), (F(1),), (F(3),)), label="skewed")
inter = Interner("exact")
fa = fingerprint(run_wl(a, 1, 1, interner=inter), 1)
fb = fingerprint(run_wl(b, 1, 1, interner=inter), 1)
print(f"\n{a.label} vs {b.label}:", compare(fa, fb))

# Higher tuple dimensions pay with a bigger tuple space: n^ell colors.
cloud = random_cloud(5, 3, seed=7)
for ell in (1, 2, 3):
    store = run_wl(cloud, ell, 2)
    print(f"ell={ell}: {len(store.tables[0])} tuples,"
          f" classes per iteration {store.class_counts()}")
