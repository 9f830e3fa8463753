"""Coloured random geometric graph edge process.

Edges of the complete graph on n sampled points are revealed in increasing
l_p length order.  Every pair carries a colour fixed up front by a counter
mode mixing function of (colour_seed, pair), so the colouring is a coupling:
it does not depend on the cutoff radius at which the process was built, and
snapshots at different radii agree on shared edges.

Hitting radii ("first radius at which property Q holds") are computed from
the event stream; a radius that is not reached within the build cutoff is
reported as math.inf.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import PointSet, check_norm, cube_diameter, unit_ball_volume

__all__ = [
    "ColouredProcess",
    "Snapshot",
    "ReferenceRadii",
    "HittingRadii",
    "build_process",
    "pair_colours",
    "snapshot",
    "hitting_radius_min_degree",
    "hitting_radius_kconn",
    "default_omega",
    "reference_radii",
    "compute_hitting_radii",
    "events_csv_text",
    "events_to_csv",
    "events_from_csv",
    "hitting_radii_to_json",
    "hitting_radii_from_json",
]

_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def _mix64(z: np.ndarray) -> np.ndarray:
    z = z.copy()
    z ^= z >> np.uint64(30)
    z *= _MIX1
    z ^= z >> np.uint64(27)
    z *= _MIX2
    z ^= z >> np.uint64(31)
    return z


def pair_colours(colour_seed: int, i, j, n: int, n_colours: int) -> np.ndarray:
    """Colour of pair {i, j} among {1..n_colours}, i.i.d. uniform in law.

    Counter mode: the counter is lo * n + hi for the canonical ordering
    lo < hi, mixed with the seed through a splitmix64-style finaliser.  The
    value depends only on (colour_seed, i, j, n, n_colours), never on the
    cutoff, which is what makes snapshots at different radii consistent.
    """
    if n_colours < 1:
        raise ValueError("need at least one colour")
    i = np.atleast_1d(np.asarray(i, dtype=np.int64))
    j = np.atleast_1d(np.asarray(j, dtype=np.int64))
    if np.any(i == j):
        raise ValueError("pair colour asked for a self loop")
    lo = np.minimum(i, j).astype(np.uint64)
    hi = np.maximum(i, j).astype(np.uint64)
    with np.errstate(over="ignore"):
        ctr = lo * np.uint64(n) + hi
        seed_word = _mix64(np.uint64(colour_seed & _MASK64) + _GOLD)
        z = _mix64((ctr + np.uint64(1)) * _GOLD ^ seed_word)
    return (z % np.uint64(n_colours)).astype(np.int64) + 1


@dataclass
class ColouredProcess:
    """Edge events up to a cutoff radius, sorted by (length, i, j).

    Arrays ei, ej, elen, ecol are parallel; ei < ej always.  ``clamped``
    records whether the requested cutoff exceeded the cube diameter and was
    clamped down to it (the event list is then the complete graph).
    """

    points: PointSet
    cutoff: float
    n_colours: int
    colour_seed: int
    ei: np.ndarray
    ej: np.ndarray
    elen: np.ndarray
    ecol: np.ndarray
    clamped: bool = False
    K: float | None = None

    @property
    def n(self) -> int:
        return self.points.n

    @property
    def p(self) -> float:
        return self.points.p

    @property
    def m(self) -> int:
        return int(self.elen.shape[0])

    def colour_of(self, i: int, j: int) -> int:
        """Colour of any pair under the coupling, event or not."""
        return int(pair_colours(self.colour_seed, i, j, self.n, self.n_colours)[0])

    def distance_of(self, i: int, j: int) -> float:
        diff = np.abs(self.points.points[i] - self.points.points[j])
        p = self.p
        if math.isinf(p):
            return float(diff.max())
        if p == 1.0:
            return float(diff.sum())
        return float((diff ** p).sum() ** (1.0 / p))


def _bucket_pairs(points: np.ndarray, cutoff: float, p: float):
    """All pairs (i < j) within l_p distance cutoff, via uniform buckets.

    Bucket side is at least the cutoff, so qualifying pairs sit in the same
    or coordinate-adjacent buckets.  Yields (i_array, j_array, len_array).
    """
    n, d = points.shape
    m_axis = max(1, int(1.0 / cutoff)) if cutoff > 0 else 1
    # keep the occupied-bucket map comfortably smaller than the point count
    m_axis = min(m_axis, max(1, int(n ** (1.0 / d)) * 2))
    keys = np.minimum((points * m_axis).astype(np.int64), m_axis - 1)
    buckets: dict[tuple, np.ndarray] = {}
    order = np.lexsort(keys.T[::-1])
    sorted_keys = keys[order]
    change = np.any(np.diff(sorted_keys, axis=0) != 0, axis=1)
    starts = np.concatenate(([0], np.nonzero(change)[0] + 1, [n]))
    for a, b in zip(starts[:-1], starts[1:]):
        buckets[tuple(sorted_keys[a])] = order[a:b]

    offsets = np.array(np.meshgrid(*([[-1, 0, 1]] * d), indexing="ij")).reshape(d, -1).T
    offsets = [tuple(o) for o in offsets if tuple(o) >= tuple([0] * d)]

    def plength(diff):
        if math.isinf(p):
            return diff.max(axis=-1)
        if p == 1.0:
            return diff.sum(axis=-1)
        return (diff ** p).sum(axis=-1) ** (1.0 / p)

    for key, idx_a in buckets.items():
        for off in offsets:
            nb = tuple(k + o for k, o in zip(key, off))
            if nb == key:
                ia = idx_a[:, None]
                ja = idx_a[None, :]
                diff = np.abs(points[idx_a][:, None, :] - points[idx_a][None, :, :])
                lens = plength(diff)
                mask = (ia < ja) & (lens <= cutoff)
            else:
                idx_b = buckets.get(nb)
                if idx_b is None:
                    continue
                ia = idx_a[:, None]
                ja = idx_b[None, :]
                diff = np.abs(points[idx_a][:, None, :] - points[idx_b][None, :, :])
                lens = plength(diff)
                mask = lens <= cutoff
            if mask.any():
                ii = np.broadcast_to(ia, mask.shape)[mask]
                jj = np.broadcast_to(ja, mask.shape)[mask]
                yield np.minimum(ii, jj), np.maximum(ii, jj), lens[mask]


def build_process(points: PointSet, cutoff: float, K: float | None = None,
                  colour_seed: int = 0, *, n_colours: int | None = None) -> ColouredProcess:
    """Enumerate and colour all edges of length at most cutoff.

    The colour palette has ceil(K * n) colours (K defaults to 20), or
    exactly ``n_colours`` when that is passed instead.  Events are sorted by
    (length, i, j); a cutoff beyond the cube diameter is clamped.
    """
    if cutoff < 0:
        raise ValueError("cutoff must be nonnegative")
    n = points.n
    if n_colours is None:
        if K is None:
            K = 20.0
        if K <= 0:
            raise ValueError("K must be positive")
        n_colours = math.ceil(K * n)
    elif K is not None:
        raise ValueError("pass K or n_colours, not both")
    if n_colours < 1:
        raise ValueError("need at least one colour")

    diam = cube_diameter(points.dim, points.p)
    clamped = cutoff > diam
    if clamped:
        cutoff = diam

    parts_i, parts_j, parts_l = [], [], []
    for ii, jj, ll in _bucket_pairs(points.points, cutoff, points.p):
        parts_i.append(ii)
        parts_j.append(jj)
        parts_l.append(ll)
    if parts_i:
        ei = np.concatenate(parts_i).astype(np.int64)
        ej = np.concatenate(parts_j).astype(np.int64)
        elen = np.concatenate(parts_l).astype(np.float64)
        order = np.lexsort((ej, ei, elen))
        ei, ej, elen = ei[order], ej[order], elen[order]
        ecol = pair_colours(colour_seed, ei, ej, n, n_colours)
    else:
        ei = np.empty(0, dtype=np.int64)
        ej = np.empty(0, dtype=np.int64)
        elen = np.empty(0, dtype=np.float64)
        ecol = np.empty(0, dtype=np.int64)

    return ColouredProcess(points=points, cutoff=float(cutoff), n_colours=int(n_colours),
                           colour_seed=int(colour_seed), ei=ei, ej=ej, elen=elen,
                           ecol=ecol, clamped=clamped, K=K)


@dataclass
class Snapshot:
    """The graph of all events with length <= r, as a prefix of the process."""

    process: ColouredProcess
    r: float
    m: int
    _adj: list | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.process.n

    def edges(self):
        pr = self.process
        return pr.ei[: self.m], pr.ej[: self.m], pr.elen[: self.m], pr.ecol[: self.m]

    def adjacency(self) -> list[list[int]]:
        """Sorted adjacency lists, built once on demand."""
        if self._adj is None:
            adj = [[] for _ in range(self.n)]
            pr = self.process
            for a, b in zip(pr.ei[: self.m].tolist(), pr.ej[: self.m].tolist()):
                adj[a].append(b)
                adj[b].append(a)
            for lst in adj:
                lst.sort()
            self._adj = adj
        return self._adj

    def degrees(self) -> np.ndarray:
        pr = self.process
        deg = np.zeros(self.n, dtype=np.int64)
        np.add.at(deg, pr.ei[: self.m], 1)
        np.add.at(deg, pr.ej[: self.m], 1)
        return deg


def snapshot(process: ColouredProcess, r: float) -> Snapshot:
    """Snapshot at radius r; refuses radii beyond the build cutoff."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if r > process.cutoff * (1 + 1e-12):
        raise ValueError(f"snapshot radius {r} exceeds build cutoff {process.cutoff}")
    m = int(np.searchsorted(process.elen, r, side="right"))
    return Snapshot(process=process, r=float(r), m=m)


def hitting_radius_min_degree(process: ColouredProcess, k: int) -> float:
    """First event length after which every vertex has degree >= k.

    Equals the maximum over vertices of the k-th nearest neighbour distance.
    Returns math.inf when the build cutoff is too small to reach it.
    """
    n = process.n
    if k < 1 or n <= k:
        raise ValueError("need 1 <= k < n")
    m = process.m
    if m == 0:
        return math.inf
    verts = np.concatenate([process.ei, process.ej])
    eidx = np.concatenate([np.arange(m), np.arange(m)])
    order = np.lexsort((eidx, verts))
    sv = verts[order]
    se = eidx[order]
    left = np.searchsorted(sv, np.arange(n), side="left")
    right = np.searchsorted(sv, np.arange(n), side="right")
    if int((right - left).min()) < k:
        return math.inf
    kth = se[left + k - 1]
    return float(process.elen[int(kth.max())])


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n
        self.components = n

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.components -= 1
        return True


def _is_biconnected(n: int, adj: list[list[int]]) -> bool:
    """Connected with no articulation vertex (iterative lowpoint DFS), n >= 3."""
    if n < 3:
        return False
    disc = [-1] * n
    low = [0] * n
    parent = [-1] * n
    root = 0
    disc[root] = low[root] = 0
    timer = 1
    root_children = 0
    stack = [root]
    iters = [iter(adj[root])]
    while stack:
        v = stack[-1]
        descended = False
        for w in iters[-1]:
            if disc[w] == -1:
                parent[w] = v
                disc[w] = low[w] = timer
                timer += 1
                if v == root:
                    root_children += 1
                stack.append(w)
                iters.append(iter(adj[w]))
                descended = True
                break
            elif w != parent[v] and disc[w] < low[v]:
                low[v] = disc[w]
        if not descended:
            stack.pop()
            iters.pop()
            if stack:
                u = stack[-1]
                if low[v] < low[u]:
                    low[u] = low[v]
                if u != root and low[v] >= disc[u]:
                    return False
    return timer == n and root_children < 2


def hitting_radius_kconn(process: ColouredProcess, k: int) -> float:
    """First event length at which the snapshot is k-connected (k in {1, 2}).

    k = 1 scans the sorted events with a union-find; k = 2 binary searches
    over event prefixes with an articulation-point test (k-connectivity is
    monotone along the process).  math.inf when not reached by the cutoff.
    """
    n = process.n
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    if n <= k:
        raise ValueError("need n > k")
    m = process.m
    ei = process.ei.tolist()
    ej = process.ej.tolist()
    if k == 1:
        uf = _UnionFind(n)
        for t in range(m):
            uf.union(ei[t], ej[t])
            if uf.components == 1:
                return float(process.elen[t])
        return math.inf

    def prefix_biconnected(t: int) -> bool:
        adj = [[] for _ in range(n)]
        for s in range(t + 1):
            adj[ei[s]].append(ej[s])
            adj[ej[s]].append(ei[s])
        return _is_biconnected(n, adj)

    if m == 0 or not prefix_biconnected(m - 1):
        return math.inf
    # cheap necessary condition: minimum degree 2
    lo_guess = hitting_radius_min_degree(process, 2)
    lo = int(np.searchsorted(process.elen, lo_guess, side="right")) - 1
    lo = max(lo, 0)
    hi = m - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if prefix_biconnected(mid):
            hi = mid
        else:
            lo = mid + 1
    return float(process.elen[lo])


def default_omega(n: int) -> float:
    """Slow-growing slack sequence sqrt(log log n), clipped below at 0.1."""
    if n < 3:
        raise ValueError("need n >= 3")
    return max(0.1, math.sqrt(math.log(math.log(n))))


@dataclass(frozen=True)
class ReferenceRadii:
    """Bracketing radii: r0 sits a.a.s. below the min-degree hitting radii of
    interest and r1 a.a.s. above, with the gap controlled by omega."""

    r0: float
    r1: float
    omega: float


def reference_radii(n: int, d: int, p: float, omega: float | None = None) -> ReferenceRadii:
    """Solve the two calibration identities for r0 and r1 (natural logs).

    theta n r0^d = (2^{d-1}/d) log n + 2^{d-2} (3 - d - 2/d) log log n - omega
    theta n r1^d = (2^{d-1}/d) log n + 2^{d-2} (4 - d - 2/d) log log n + omega
    """
    if n < 3:
        raise ValueError("need n >= 3")
    if d < 2:
        raise ValueError("need d >= 2")
    p = check_norm(p)
    if omega is None:
        omega = default_omega(n)
    if not omega > 0:
        raise ValueError("omega must be positive")
    theta = unit_ball_volume(d, p)
    ln = math.log(n)
    lln = math.log(ln)
    lead = (2 ** (d - 1) / d) * ln
    rhs0 = lead + 2 ** (d - 2) * (3 - d - 2 / d) * lln - omega
    rhs1 = lead + 2 ** (d - 2) * (4 - d - 2 / d) * lln + omega
    if rhs0 <= 0 or rhs1 <= 0:
        raise ValueError(f"reference radius identity non-positive at n={n}, d={d}, omega={omega}")
    r0 = (rhs0 / (theta * n)) ** (1.0 / d)
    r1 = (rhs1 / (theta * n)) ** (1.0 / d)
    return ReferenceRadii(r0=r0, r1=r1, omega=float(omega))


@dataclass
class HittingRadii:
    """Hitting radii for one instance; math.inf marks 'not reached'.

    min_degree maps k to the min-degree-k radius, kconn maps k to the
    k-connectivity radius.  rainbow_hc / rainbow_pm stay None unless an
    exact oracle filled them in.
    """

    min_degree: dict[int, float]
    kconn: dict[int, float]
    rainbow_hc: float | None = None
    rainbow_pm: float | None = None


def compute_hitting_radii(process: ColouredProcess, ks=(1, 2),
                          include_kconn: bool = True) -> HittingRadii:
    md = {k: hitting_radius_min_degree(process, k) for k in ks if k < process.n}
    kc = {}
    if include_kconn:
        kc = {k: hitting_radius_kconn(process, k) for k in (1, 2)
              if k < process.n and k in ks}
    return HittingRadii(min_degree=md, kconn=kc)


def _radius_out(x):
    if x is None:
        return None
    return "inf" if math.isinf(x) else x


def _radius_in(x):
    if x is None:
        return None
    return math.inf if x == "inf" else float(x)


def hitting_radii_to_json(hr: HittingRadii) -> str:
    payload = {
        "min_degree": {str(k): _radius_out(v) for k, v in sorted(hr.min_degree.items())},
        "kconn": {str(k): _radius_out(v) for k, v in sorted(hr.kconn.items())},
        "rainbow_hc": _radius_out(hr.rainbow_hc),
        "rainbow_pm": _radius_out(hr.rainbow_pm),
    }
    return json.dumps(payload, sort_keys=True)


def hitting_radii_from_json(text: str) -> HittingRadii:
    raw = json.loads(text)
    return HittingRadii(
        min_degree={int(k): _radius_in(v) for k, v in raw["min_degree"].items()},
        kconn={int(k): _radius_in(v) for k, v in raw["kconn"].items()},
        rainbow_hc=_radius_in(raw.get("rainbow_hc")),
        rainbow_pm=_radius_in(raw.get("rainbow_pm")),
    )


def events_csv_text(process: ColouredProcess) -> str:
    """Event stream as CSV rows (i, j, length, colour), 1-based vertex ids."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["i", "j", "length", "colour"])
    for a, b, l, c in zip(process.ei.tolist(), process.ej.tolist(),
                          process.elen.tolist(), process.ecol.tolist()):
        w.writerow([a + 1, b + 1, repr(l), c])
    return out.getvalue()


def events_to_csv(process: ColouredProcess, path) -> None:
    """Write the event stream CSV to a file."""
    with open(path, "w", newline="") as fh:
        fh.write(events_csv_text(process))


def events_from_csv(path):
    """Read an event CSV back as (i, j, length, colour) arrays, 0-based."""
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if header[:4] != ["i", "j", "length", "colour"]:
            raise ValueError("unexpected event CSV header")
        rows = [(int(r[0]) - 1, int(r[1]) - 1, float(r[2]), int(r[3])) for r in rd]
    if not rows:
        return (np.empty(0, np.int64), np.empty(0, np.int64),
                np.empty(0, np.float64), np.empty(0, np.int64))
    ii, jj, ll, cc = zip(*rows)
    return (np.array(ii, np.int64), np.array(jj, np.int64),
            np.array(ll, np.float64), np.array(cc, np.int64))
