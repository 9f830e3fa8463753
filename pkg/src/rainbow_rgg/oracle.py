"""Exact reference answers for small coloured graphs.

Complete backtracking searches for rainbow Hamilton cycles and rainbow
perfect matchings, hitting-radius computation by bisection over the edge
arrival order, and certificate validation.  Instances are capped (14
vertices for cycles, 20 for matchings) because the searches are
exponential; the caps are arguments so tests can tighten them.

These routines are the ground truth that the staged builder and the
experiment harness are checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ColouredGraphInstance",
    "HC_VERTEX_LIMIT",
    "PM_VERTEX_LIMIT",
    "exact_rainbow_hamilton_cycle",
    "exact_rainbow_perfect_matching",
    "exact_hitting_rainbow",
    "rainbow_witness_at",
    "validate_certificate",
    "instance_to_text",
    "instance_from_text",
    "instance_from_process",
]

HC_VERTEX_LIMIT = 14
PM_VERTEX_LIMIT = 20


@dataclass
class ColouredGraphInstance:
    """An edge-coloured graph: vertices 0..n-1, edges (i, j, colour).

    Lengths are optional and only carried so instances round-trip through
    files; the searches ignore them.
    """

    n: int
    edges: list
    lengths: list | None = None

    def __post_init__(self):
        for (i, j, c) in self.edges:
            if not (0 <= i < self.n and 0 <= j < self.n) or i == j:
                raise ValueError(f"bad edge ({i}, {j})")
            if c < 1:
                raise ValueError("colours must be positive")
        if self.lengths is not None and len(self.lengths) != len(self.edges):
            raise ValueError("lengths must align with edges")

    @property
    def m(self) -> int:
        return len(self.edges)

    def adjacency(self):
        """Neighbour map v -> sorted list of (w, colour)."""
        adj = [[] for _ in range(self.n)]
        for (i, j, c) in self.edges:
            adj[i].append((j, c))
            adj[j].append((i, c))
        for lst in adj:
            lst.sort()
        return adj


def exact_rainbow_hamilton_cycle(instance: ColouredGraphInstance,
                                 limit: int = HC_VERTEX_LIMIT):
    """Complete search for a Hamilton cycle with pairwise distinct edge
    colours.  Returns the witness as a list of n edges (i, j, colour) in
    cycle order, or None.
    """
    n = instance.n
    if n > limit:
        raise ValueError(f"instance has {n} > {limit} vertices")
    if n < 3:
        return None
    adj = instance.adjacency()
    if any(len(a) < 2 for a in adj):
        return None
    path = [0]
    on_path = [False] * n
    on_path[0] = True
    used = set()
    chosen = []

    def extend() -> bool:
        if len(path) == n:
            for (w, c) in adj[path[-1]]:
                if w == 0 and c not in used:
                    chosen.append((path[-1], 0, c))
                    return True
            return False
        v = path[-1]
        for (w, c) in adj[v]:
            if on_path[w] or c in used:
                continue
            path.append(w)
            on_path[w] = True
            used.add(c)
            chosen.append((v, w, c))
            if extend():
                return True
            chosen.pop()
            used.discard(c)
            on_path[w] = False
            path.pop()
        return False

    if extend():
        return chosen
    return None


def exact_rainbow_perfect_matching(instance: ColouredGraphInstance,
                                   limit: int = PM_VERTEX_LIMIT):
    """Complete search for a perfect matching with pairwise distinct edge
    colours.  Returns the witness as n/2 edges (i, j, colour), or None.
    """
    n = instance.n
    if n > limit:
        raise ValueError(f"instance has {n} > {limit} vertices")
    if n == 0:
        return []
    if n % 2:
        return None
    adj = instance.adjacency()
    if any(len(a) < 1 for a in adj):
        return None
    matched = [False] * n
    used = set()
    chosen = []

    def extend(done: int) -> bool:
        if done == n // 2:
            return True
        v = matched.index(False)
        matched[v] = True
        for (w, c) in adj[v]:
            if matched[w] or c in used:
                continue
            matched[w] = True
            used.add(c)
            chosen.append((v, w, c))
            if extend(done + 1):
                return True
            chosen.pop()
            used.discard(c)
            matched[w] = False
        matched[v] = False
        return False

    if extend(0):
        return chosen
    return None


def instance_from_process(process, r: float | None = None) -> ColouredGraphInstance:
    """Snapshot a coloured process at radius r as a static instance."""
    from .process import snapshot
    snap = snapshot(process, process.cutoff if r is None else r)
    ei, ej, elen, ecol = snap.edges()
    edges = [(int(a), int(b), int(c)) for a, b, c in zip(ei, ej, ecol)]
    return ColouredGraphInstance(n=process.n, edges=edges,
                                 lengths=[float(x) for x in elen])


def _prefix_feasible(process, m: int, target: str):
    ei = process.ei[:m]
    ej = process.ej[:m]
    ecol = process.ecol[:m]
    edges = [(int(a), int(b), int(c)) for a, b, c in zip(ei, ej, ecol)]
    inst = ColouredGraphInstance(n=process.n, edges=edges)
    if target == "hc":
        return exact_rainbow_hamilton_cycle(inst)
    return exact_rainbow_perfect_matching(inst)


def exact_hitting_rainbow(process, target: str = "hc"):
    """Hitting radius of the rainbow property along the arrival order.

    Returns (radius, witness); (inf, None) when even the full edge set has
    no rainbow structure.  Feasibility is monotone in the edge prefix, and
    a rainbow structure needs minimum degree 2 (cycle) or 1 (matching), so
    the bisection starts at that hitting index.
    """
    from .process import hitting_radius_min_degree
    if target not in ("hc", "pm"):
        raise ValueError("target must be 'hc' or 'pm'")
    n = process.n
    limit = HC_VERTEX_LIMIT if target == "hc" else PM_VERTEX_LIMIT
    if n > limit:
        raise ValueError(f"exact hitting supports at most {limit} vertices for {target}")
    if target == "pm" and n % 2:
        return math.inf, None
    if target == "hc" and n < 3:
        return math.inf, None
    M = process.m
    witness_full = _prefix_feasible(process, M, target)
    if witness_full is None:
        return math.inf, None
    k = 2 if target == "hc" else 1
    deg_radius = hitting_radius_min_degree(process, k)
    lo = int(np.searchsorted(process.elen, deg_radius, side="left")) if math.isfinite(deg_radius) else 0
    lo = max(lo + 1, 1)  # prefixes shorter than the degree hit are infeasible
    hi = M
    while lo < hi:
        mid = (lo + hi) // 2
        if _prefix_feasible(process, mid, target) is not None:
            hi = mid
        else:
            lo = mid + 1
    # re-derive the witness at the minimal prefix so it never cites later edges
    witness = _prefix_feasible(process, hi, target)
    assert witness is not None
    return float(process.elen[hi - 1]), witness


def rainbow_witness_at(process, r: float, target: str = "hc"):
    """Witness for the rainbow property in the prefix of radius r, or None."""
    if target not in ("hc", "pm"):
        raise ValueError("target must be 'hc' or 'pm'")
    from .process import snapshot
    snap = snapshot(process, r)
    return _prefix_feasible(process, snap.m, target)


def validate_certificate(cert: dict, process) -> list[str]:
    """Check a builder certificate against the process it claims to cover.

    Returns a list of violation strings; empty means valid.  Checks:
    structure (cycle through all vertices, or perfect matching), every
    edge within the claimed radius, colours pairwise distinct and matching
    the coupled colouring.
    """
    problems = []
    n = process.n
    mode = cert.get("mode")
    edges = cert.get("edges", [])
    radius = cert.get("radius", math.inf)
    if mode not in ("hc", "pm"):
        return [f"unknown mode {mode!r}"]

    seen_pairs = set()
    colours = []
    for k, (i, j, c, length) in enumerate(edges):
        i0, j0 = i - 1, j - 1
        if not (0 <= i0 < n and 0 <= j0 < n) or i0 == j0:
            problems.append(f"edge {k}: bad endpoints ({i}, {j})")
            continue
        key = (min(i0, j0), max(i0, j0))
        if key in seen_pairs:
            problems.append(f"edge {k}: duplicate pair ({i}, {j})")
        seen_pairs.add(key)
        true_len = process.distance_of(i0, j0)
        if not math.isclose(true_len, length, rel_tol=1e-9, abs_tol=1e-12):
            problems.append(f"edge {k}: recorded length {length} != actual {true_len}")
        if true_len > radius * (1 + 1e-9):
            problems.append(f"edge {k}: length {true_len} exceeds radius {radius}")
        true_col = process.colour_of(i0, j0)
        if true_col != c:
            problems.append(f"edge {k}: recorded colour {c} != coupled colour {true_col}")
        colours.append(c)
    if len(set(colours)) != len(colours):
        problems.append("colours are not pairwise distinct")

    deg = {}
    for (i, j, _, _) in edges:
        deg[i] = deg.get(i, 0) + 1
        deg[j] = deg.get(j, 0) + 1
    if mode == "hc":
        if len(edges) != n:
            problems.append(f"cycle must have {n} edges, has {len(edges)}")
        elif any(deg.get(v, 0) != 2 for v in range(1, n + 1)):
            problems.append("not every vertex has degree 2")
        else:
            # degree-2 everywhere plus n edges: connected iff single cycle
            adj = {}
            for (i, j, _, _) in edges:
                adj.setdefault(i, []).append(j)
                adj.setdefault(j, []).append(i)
            seen = {1}
            queue = [1]
            while queue:
                v = queue.pop()
                for w in adj.get(v, []):
                    if w not in seen:
                        seen.add(w)
                        queue.append(w)
            if len(seen) != n:
                problems.append("edges form multiple cycles, not one")
    else:
        if len(edges) != n // 2 or n % 2:
            problems.append(f"matching must have {n // 2} edges on even n, has {len(edges)}")
        elif any(deg.get(v, 0) != 1 for v in range(1, n + 1)):
            problems.append("not every vertex is matched exactly once")
    return problems


def instance_to_text(instance: ColouredGraphInstance) -> str:
    """Serialize with 1-based vertex ids: header 'n m', then 'i j colour
    [length]' per edge."""
    lines = [f"{instance.n} {instance.m}"]
    for k, (i, j, c) in enumerate(instance.edges):
        if instance.lengths is not None:
            lines.append(f"{i + 1} {j + 1} {c} {instance.lengths[k]!r}")
        else:
            lines.append(f"{i + 1} {j + 1} {c}")
    return "\n".join(lines) + "\n"


def instance_from_text(text: str) -> ColouredGraphInstance:
    rows = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not rows:
        raise ValueError("empty instance")
    head = rows[0].split()
    n, m = int(head[0]), int(head[1])
    if len(rows) - 1 != m:
        raise ValueError(f"header says {m} edges, found {len(rows) - 1}")
    edges = []
    lengths = []
    have_lengths = None
    for ln in rows[1:]:
        parts = ln.split()
        if have_lengths is None:
            have_lengths = len(parts) == 4
        if len(parts) != (4 if have_lengths else 3):
            raise ValueError("inconsistent edge rows")
        i, j, c = int(parts[0]) - 1, int(parts[1]) - 1, int(parts[2])
        edges.append((i, j, c))
        if have_lengths:
            lengths.append(float(parts[3]))
    return ColouredGraphInstance(n=n, edges=edges,
                                 lengths=lengths if have_lengths else None)
