"""Iterative coloring of point-cloud tuple spaces and cloud-level fingerprints.

The update rule colors every tuple in S^ell.  At iteration 0 a tuple is
colored by the matrix of squared distances between its components (for
ell = 1 this is a single shared color).  Each refinement pairs the previous
color with the canonical multiset, over all cloud points y, of the colors of
the tuples obtained by substituting y into each position (for ell = 1 the
records are (squared distance, color) pairs instead).

Colors are canonical trees interned to dense integer ids; every interned
color carries a 128-bit content digest computed over a canonical byte
encoding in which children are referenced by their digests.  Equality inside
one interner is decided structurally; digests give a stable cross-run order
and serialization.  Distance payloads are exact rationals in exact mode and
are snapped to a quantization grid before interning in float mode (the
grid is this library's equality surrogate for inexact inputs).
"""

from __future__ import annotations

import hashlib
import struct
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from .errors import CapExceededError, ParameterMismatchError
from .geometry import PointCloud, Scalar, is_exact, sq_dist

DEFAULT_SNAP = 1e-9
DEFAULT_MAX_TUPLES = 100_000

KIND_ZERO = 0   # the shared ell=1 leaf color
KIND_MAT = 1    # ell x ell squared-distance matrix, row-major distance ids
KIND_NODE1 = 2  # (prev color, sorted ((distance id, color id), ...))
KIND_NODE = 3   # (prev color, sorted (ell-tuple of color ids, ...))


def _frame(b: bytes) -> bytes:
    return len(b).to_bytes(4, "big") + b


class Interner:
    """Bijection between canonical color structures and dense integer ids.

    Stores run with a fixed arithmetic mode; two clouds colored through the
    same interner get directly comparable ids (and identical ids exactly for
    structurally equal colors).
    """

    def __init__(self, mode: str = "exact", snap: float = DEFAULT_SNAP):
        if mode not in ("exact", "float"):
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self.snap = float(snap)
        self._index: dict = {}
        self.kinds: list[int] = []
        self.payloads: list[tuple] = []
        self.digests: list[bytes] = []
        self._dist_index: dict = {}
        self.dist_keys: list = []      # did -> Fraction (exact) or int grid token (float)
        self._rank_cache: tuple[int, list[int]] = (0, [])
        self._dist_rank_cache: tuple[int, list[int]] = (0, [])

    # -- distances ---------------------------------------------------------

    def intern_distance(self, value: Scalar) -> int:
        if self.mode == "exact":
            key = value if isinstance(value, Fraction) else Fraction(value)
        else:
            key = int((float(value) / self.snap) + 0.5)  # round half up; values >= 0
        did = self._dist_index.get(key)
        if did is None:
            did = len(self.dist_keys)
            self._dist_index[key] = did
            self.dist_keys.append(key)
        return did

    def dist_value(self, did: int) -> Scalar:
        key = self.dist_keys[did]
        if self.mode == "exact":
            return key
        return key * self.snap

    def _dist_bytes(self, did: int) -> bytes:
        key = self.dist_keys[did]
        if self.mode == "exact":
            return str(key).encode("ascii")
        return b"q%d" % key

    def distance_ranks(self) -> list[int]:
        count = len(self.dist_keys)
        if self._dist_rank_cache[0] != count:
            order = sorted(range(count), key=lambda i: self.dist_keys[i])
            ranks = [0] * count
            for r, i in enumerate(order):
                ranks[i] = r
            self._dist_rank_cache = (count, ranks)
        return self._dist_rank_cache[1]

    # -- colors ------------------------------------------------------------

    def _add(self, key, kind: int, payload: tuple, enc: bytes) -> int:
        cid = len(self.kinds)
        self._index[key] = cid
        self.kinds.append(kind)
        self.payloads.append(payload)
        self.digests.append(hashlib.blake2b(enc, digest_size=16).digest())
        return cid

    def intern_zero(self) -> int:
        key = (KIND_ZERO,)
        cid = self._index.get(key)
        if cid is None:
            cid = self._add(key, KIND_ZERO, (), b"Z")
        return cid

    def intern_matrix(self, ell: int, dids: tuple[int, ...]) -> int:
        key = (KIND_MAT, ell, dids)
        cid = self._index.get(key)
        if cid is None:
            enc = b"M" + ell.to_bytes(2, "big") + b"".join(
                _frame(self._dist_bytes(d)) for d in dids)
            cid = self._add(key, KIND_MAT, (ell, dids), enc)
        return cid

    def intern_node1(self, prev: int, records: tuple[tuple[int, int], ...]) -> int:
        key = (KIND_NODE1, prev, records)
        cid = self._index.get(key)
        if cid is None:
            parts = [b"1", self.digests[prev]]
            for did, child in records:
                parts.append(_frame(self._dist_bytes(did)))
                parts.append(self.digests[child])
            cid = self._add(key, KIND_NODE1, (prev, records), b"".join(parts))
        return cid

    def intern_node(self, ell: int, prev: int,
                    records: tuple[tuple[int, ...], ...]) -> int:
        key = (KIND_NODE, prev, records)
        cid = self._index.get(key)
        if cid is None:
            parts = [b"N", ell.to_bytes(2, "big"), self.digests[prev]]
            for rec in records:
                for child in rec:
                    parts.append(self.digests[child])
            cid = self._add(key, KIND_NODE, (prev, records), b"".join(parts))
        return cid

    def color_ranks(self) -> list[int]:
        count = len(self.kinds)
        if self._rank_cache[0] != count:
            order = sorted(range(count), key=lambda i: self.digests[i])
            ranks = [0] * count
            for r, i in enumerate(order):
                ranks[i] = r
            self._rank_cache = (count, ranks)
        return self._rank_cache[1]

    def kind(self, cid: int) -> int:
        return self.kinds[cid]

    def payload(self, cid: int) -> tuple:
        return self.payloads[cid]


class ColorStore:
    """Color tables of one cloud's tuple space, one table per iteration."""

    def __init__(self, interner: Interner, ell: int, n: int, dim: int,
                 dist_ids: tuple[tuple[int, ...], ...], label: str | None = None):
        self.interner = interner
        self.ell = ell
        self.n = n
        self.dim = dim
        self.dist_ids = dist_ids
        self.label = label
        self.tables: list[list[int]] = []
        self._bases: list[tuple[int, ...]] | None = None

    @property
    def iterations(self) -> int:
        return len(self.tables) - 1

    def value_of(self, did: int) -> Scalar:
        return self.interner.dist_value(did)

    def sq_matrix_values(self):
        """The cloud's n x n squared-distance values (exact or snapped floats)."""
        return [[self.interner.dist_value(d) for d in row] for row in self.dist_ids]

    def class_counts(self) -> list[int]:
        return [len(set(t)) for t in self.tables]

    def _substitution_bases(self) -> list[tuple[int, ...]]:
        # bases[T][i] = T with the i-th digit zeroed (row-major index arithmetic)
        if self._bases is None:
            n, ell = self.n, self.ell
            strides = [n ** (ell - 1 - i) for i in range(ell)]
            bases = []
            for t in range(n ** ell):
                rem = t
                digs = []
                for s in strides:
                    digs.append(rem // s)
                    rem %= s
                bases.append(tuple(t - digs[i] * strides[i] for i in range(ell)))
            self._bases = bases
        return self._bases


def _mode_for(cloud: PointCloud, mode: str | None) -> str:
    if mode is not None:
        return mode
    return "exact" if cloud.exact else "float"


def store_from_sq_values(values, ell: int, dim: int, *, mode: str = "exact",
                         snap: float = DEFAULT_SNAP, interner: Interner | None = None,
                         max_tuples: int = DEFAULT_MAX_TUPLES,
                         label: str | None = None) -> ColorStore:
    """Iteration-0 store built directly from an n x n squared-distance matrix."""
    if interner is None:
        interner = Interner(mode, snap)
    elif interner.mode != mode or (mode == "float" and interner.snap != float(snap)):
        raise ValueError("interner mode/snap does not match the requested run")
    n = len(values)
    if n ** ell > max_tuples:
        raise CapExceededError(
            f"tuple space size {n}^{ell} exceeds the cap of {max_tuples}")
    dist_ids = tuple(tuple(interner.intern_distance(v) for v in row) for row in values)
    store = ColorStore(interner, ell, n, dim, dist_ids, label=label)
    if ell == 1:
        zero = interner.intern_zero()
        store.tables.append([zero] * n)
    else:
        strides = [n ** (ell - 1 - i) for i in range(ell)]
        table = []
        for t in range(n ** ell):
            rem = t
            digs = []
            for s in strides:
                digs.append(rem // s)
                rem %= s
            mat = tuple(dist_ids[i][j] for i in digs for j in digs)
            table.append(interner.intern_matrix(ell, mat))
        store.tables.append(table)
    return store


def initial_coloring(cloud: PointCloud, ell: int, *, mode: str | None = None,
                     snap: float = DEFAULT_SNAP, interner: Interner | None = None,
                     max_tuples: int = DEFAULT_MAX_TUPLES) -> ColorStore:
    """Color every tuple in S^ell by its intra-tuple squared-distance matrix."""
    if ell < 1:
        raise ValueError("ell must be at least 1")
    mode = _mode_for(cloud, mode)
    pts = cloud.points if mode == "exact" else cloud.as_array()
    values = [[0 if i == j else sq_dist(pts[i], pts[j]) for j in range(cloud.n)]
              for i in range(cloud.n)]
    return store_from_sq_values(values, ell, cloud.dim, mode=mode, snap=snap,
                                interner=interner, max_tuples=max_tuples,
                                label=cloud.label)


def refine(store: ColorStore) -> ColorStore:
    """Append one refinement step to the store's color history."""
    inter = store.interner
    n, ell = store.n, store.ell
    prev = store.tables[-1]
    ranks = inter.color_ranks()
    if ell == 1:
        dranks = inter.distance_ranks()
        dist = store.dist_ids
        table = []
        for x in range(n):
            row = dist[x]
            recs = sorted(((row[y], prev[y]) for y in range(n)),
                          key=lambda r: (dranks[r[0]], ranks[r[1]]))
            table.append(inter.intern_node1(prev[x], tuple(recs)))
    else:
        strides = [n ** (ell - 1 - i) for i in range(ell)]
        bases = store._substitution_bases()
        rng_ell = range(ell)
        table = []
        for t in range(n ** ell):
            b = bases[t]
            recs = [tuple(prev[b[i] + y * strides[i]] for i in rng_ell)
                    for y in range(n)]
            recs.sort(key=lambda r: tuple(ranks[c] for c in r))
            table.append(inter.intern_node(ell, prev[t], tuple(recs)))
    store.tables.append(table)
    return store


def run_wl(cloud: PointCloud, ell: int, iters: int, *, mode: str | None = None,
           snap: float = DEFAULT_SNAP, interner: Interner | None = None,
           max_tuples: int = DEFAULT_MAX_TUPLES) -> ColorStore:
    """Initial coloring plus `iters` refinements, retaining full structure."""
    if iters < 0:
        raise ValueError("iters must be non-negative")
    store = initial_coloring(cloud, ell, mode=mode, snap=snap, interner=interner,
                             max_tuples=max_tuples)
    for _ in range(iters):
        refine(store)
    return store


def run_wl_from_sq_values(values, ell: int, iters: int, dim: int, *,
                          mode: str = "exact", snap: float = DEFAULT_SNAP,
                          interner: Interner | None = None,
                          max_tuples: int = DEFAULT_MAX_TUPLES) -> ColorStore:
    store = store_from_sq_values(values, ell, dim, mode=mode, snap=snap,
                                 interner=interner, max_tuples=max_tuples)
    for _ in range(iters):
        refine(store)
    return store


@dataclass(frozen=True)
class Fingerprint:
    """Canonical multiset of tuple colors at a fixed iteration.

    Entries pair the 128-bit color digest (hex) with its multiplicity and are
    sorted by digest, which makes the serialization stable across runs and
    platforms.  Total multiplicity is n^ell.
    """

    ell: int
    iters: int
    mode: str
    snap: float | None
    total: int
    entries: tuple[tuple[str, int], ...]

    def to_bytes(self) -> bytes:
        head = b"GWFP" + bytes([1])
        head += bytes([0 if self.mode == "exact" else 1])
        head += b"\x00" * 8 if self.snap is None else struct.pack(">d", self.snap)
        head += self.ell.to_bytes(4, "big") + self.iters.to_bytes(4, "big")
        head += self.total.to_bytes(8, "big")
        body = [len(self.entries).to_bytes(4, "big")]
        for hexdigest, mult in self.entries:
            body.append(bytes.fromhex(hexdigest))
            body.append(mult.to_bytes(8, "big"))
        return head + b"".join(body)

    def digest(self) -> str:
        return hashlib.blake2b(self.to_bytes(), digest_size=16).hexdigest()

    def to_json(self) -> dict:
        return {
            "format": "geowl-fingerprint@1",
            "ell": self.ell,
            "iters": self.iters,
            "mode": self.mode,
            "snap": self.snap,
            "total": self.total,
            "entries": [[h, m] for h, m in self.entries],
            "digest": self.digest(),
        }


def fingerprint(store: ColorStore, iteration: int | None = None) -> Fingerprint:
    """The cloud-level invariant: multiset of tuple-color digests at an iteration."""
    if iteration is None:
        iteration = store.iterations
    if not 0 <= iteration <= store.iterations:
        raise ValueError(f"iteration {iteration} not present in history")
    table = store.tables[iteration]
    counts = Counter(table)
    digests = store.interner.digests
    entries = tuple(sorted((digests[cid].hex(), m) for cid, m in counts.items()))
    snap = None if store.interner.mode == "exact" else store.interner.snap
    return Fingerprint(ell=store.ell, iters=iteration, mode=store.interner.mode,
                       snap=snap, total=len(table), entries=entries)


def compare(a: Fingerprint, b: Fingerprint) -> str:
    """Multiset equality of two fingerprints with matching parameters."""
    if (a.ell, a.iters, a.mode, a.snap) != (b.ell, b.iters, b.mode, b.snap):
        raise ParameterMismatchError(
            f"fingerprint parameters differ: ({a.ell},{a.iters},{a.mode},{a.snap})"
            f" vs ({b.ell},{b.iters},{b.mode},{b.snap})")
    return "equal" if a.entries == b.entries else "different"


def first_distinguishing_iteration(a: ColorStore, b: ColorStore) -> int | None:
    """Smallest iteration at which the two histories' fingerprints differ."""
    last = min(a.iterations, b.iterations)
    for t in range(last + 1):
        if compare(fingerprint(a, t), fingerprint(b, t)) == "different":
            return t
    return None
