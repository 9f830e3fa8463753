"""Tessellation of the unit cube into cells, and the graph of cells.

The cube is cut into m^d axis-aligned cells whose side is calibrated to a
reference radius r0 so that a cell holds on the order of eps * log n points.
Two cells are adjacent in the cell graph when their l_p set-distance is at
most r0 - 2ds, which guarantees every cross pair of resident vertices is
within r0 of each other.  Cells are then classified:

  dense  -- at least max(3, ceil(eps^3 log n)) resident vertices
  good   -- the largest connected component of dense cells
  bad    -- sparse cells adjacent to a good cell
  ugly   -- everything else

All asymptotic structure claims about this classification are evaluated as
observables by ``diagnostics``; they report pass/fail per instance and never
abort a run.  At small scale the adjacency threshold r0 - 2ds is frequently
non-positive; the cell graph is then edgeless and flagged degenerate rather
than an error, so the diagnostics can quantify exactly how far the instance
is from the asymptotic regime.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import PointSet, check_norm, unit_ball_volume

__all__ = [
    "CellGrid",
    "CellGraph",
    "CellClassification",
    "TessellationRegimeError",
    "build_grid",
    "build_cell_graph",
    "classify_cells",
    "diagnostics",
    "DiagnosticsReport",
    "verify_cross_pairs",
]


class TessellationRegimeError(ValueError):
    """The requested tessellation cannot be built at this scale; the caller
    should fall back to oracle verification or report a structured failure."""


@dataclass
class CellGrid:
    """Uniform grid of m^d cells over [0,1]^d with resident counts.

    side == 1/m, so the grid tiles the cube with no remainder.  Flat cell
    ids are C-order ravellings of the d multi-indices.
    """

    d: int
    m: int
    side: float
    s_target: float
    r0: float
    epsilon: float
    p: float
    cell_of_vertex: np.ndarray
    counts: np.ndarray

    @property
    def n_cells(self) -> int:
        return self.m ** self.d

    @property
    def n(self) -> int:
        return int(self.cell_of_vertex.shape[0])

    @property
    def cell_diameter(self) -> float:
        """Largest l_p distance between two points of one cell."""
        if math.isinf(self.p):
            return self.side
        return self.side * self.d ** (1.0 / self.p)

    def multi(self, cell: int) -> tuple:
        return tuple(int(x) for x in np.unravel_index(cell, (self.m,) * self.d))

    def flat(self, multi) -> int:
        return int(np.ravel_multi_index(multi, (self.m,) * self.d))

    def vertices_in(self, cell: int) -> np.ndarray:
        return np.nonzero(self.cell_of_vertex == cell)[0]

    def boundary_distances(self, cell: int) -> np.ndarray:
        """(d, 2) array of cell-to-facet distances (lower, upper per axis)."""
        mi = self.multi(cell)
        out = np.empty((self.d, 2))
        for a, c in enumerate(mi):
            out[a, 0] = c * self.side
            out[a, 1] = (self.m - c - 1) * self.side
        return out


def build_grid(points: PointSet, r0: float, epsilon: float) -> CellGrid:
    """Cut the cube into cells of side 1/ceil(1/s'), s' = (2 eps d theta)^{1/d} r0 / 2."""
    if r0 <= 0:
        raise ValueError("r0 must be positive")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    d = points.dim
    theta = unit_ball_volume(d, points.p)
    s_target = (2.0 * epsilon * d * theta) ** (1.0 / d) * r0 / 2.0
    if s_target >= 1.0:
        raise TessellationRegimeError(
            f"target cell side {s_target:.4f} >= 1; instance too small to tessellate")
    m = math.ceil(1.0 / s_target)
    side = 1.0 / m
    idx = np.minimum((points.points * m).astype(np.int64), m - 1)
    flat = np.ravel_multi_index(tuple(idx.T), (m,) * d)
    counts = np.bincount(flat, minlength=m ** d)
    return CellGrid(d=d, m=m, side=side, s_target=s_target, r0=float(r0),
                    epsilon=float(epsilon), p=points.p,
                    cell_of_vertex=flat.astype(np.int64), counts=counts)


def _offset_set_distance(delta, side: float, p: float) -> float:
    gaps = np.array([max(0, abs(t) - 1) * side for t in delta], dtype=np.float64)
    if math.isinf(p):
        return float(gaps.max()) if gaps.size else 0.0
    if p == 1.0:
        return float(gaps.sum())
    return float((gaps ** p).sum() ** (1.0 / p))


def _offset_max_cross(delta, side: float, p: float) -> float:
    spans = np.array([(abs(t) + 1) * side for t in delta], dtype=np.float64)
    if math.isinf(p):
        return float(spans.max())
    if p == 1.0:
        return float(spans.sum())
    return float((spans ** p).sum() ** (1.0 / p))


@dataclass
class CellGraph:
    """Adjacency of cells at set-distance <= threshold, as an offset stencil.

    The set-distance between two cells depends only on their index offset,
    so the whole graph is one stencil of offsets.  A non-positive threshold
    (possible when epsilon is large for the dimension and norm) yields an
    edgeless graph, flagged via ``degenerate_threshold``.
    """

    grid: CellGrid
    threshold: float
    stencil: list
    degenerate_threshold: bool
    degree_bound: float

    def neighbors(self, cell: int) -> list[int]:
        g = self.grid
        mi = g.multi(cell)
        out = []
        for delta in self.stencil:
            nb = tuple(c + t for c, t in zip(mi, delta))
            if all(0 <= x < g.m for x in nb):
                out.append(g.flat(nb))
        out.sort()
        return out

    def are_adjacent(self, a: int, b: int) -> bool:
        if a == b:
            return False
        ma, mb = self.grid.multi(a), self.grid.multi(b)
        delta = tuple(x - y for x, y in zip(ma, mb))
        return delta in self._stencil_set

    def max_degree(self) -> int:
        """Exact maximum degree over cells (boundary cells lose neighbours)."""
        g = self.grid
        if not self.stencil:
            return 0
        deg = np.zeros((g.m,) * g.d, dtype=np.int64)
        ones = np.ones((g.m,) * g.d, dtype=np.int64)
        for delta in self.stencil:
            src = tuple(slice(max(0, -t), g.m - max(0, t)) for t in delta)
            dst = tuple(slice(max(0, t), g.m - max(0, -t)) for t in delta)
            deg[dst] += ones[src]
        return int(deg.max())

    def __post_init__(self):
        self._stencil_set = set(self.stencil)


def build_cell_graph(grid: CellGrid, r0: float | None = None) -> CellGraph:
    """Stencil of adjacent offsets for the grid at threshold r0 - 2ds."""
    if r0 is None:
        r0 = grid.r0
    threshold = r0 - 2.0 * grid.d * grid.side
    stencil = []
    if threshold > 0:
        reach = int(threshold / grid.side) + 1
        for delta in itertools.product(range(-reach, reach + 1), repeat=grid.d):
            if all(t == 0 for t in delta):
                continue
            if _offset_set_distance(delta, grid.side, grid.p) <= threshold:
                # construction guarantee: adjacency keeps every cross pair within r0
                assert _offset_max_cross(delta, grid.side, grid.p) <= r0 * (1 + 1e-12)
                stencil.append(delta)
    theta = unit_ball_volume(grid.d, grid.p)
    bound = theta * (r0 + 2 * grid.d * grid.side) ** grid.d / grid.side ** grid.d + 1
    return CellGraph(grid=grid, threshold=threshold, stencil=stencil,
                     degenerate_threshold=threshold <= 0, degree_bound=bound)


def _components(cells: set, graph: CellGraph) -> list[list[int]]:
    """Connected components of the induced cell subgraph, deterministic order."""
    seen = set()
    comps = []
    for start in sorted(cells):
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        queue = [start]
        while queue:
            c = queue.pop()
            for nb in graph.neighbors(c):
                if nb in cells and nb not in seen:
                    seen.add(nb)
                    comp.append(nb)
                    queue.append(nb)
        comp.sort()
        comps.append(comp)
    return comps


@dataclass
class CellClassification:
    """good / bad / ugly partition of all cells of the grid."""

    grid: CellGrid
    graph: CellGraph
    dense_threshold: int
    good: list[int]
    bad: list[int]
    ugly: list[int]
    ugly_components: list[list[int]]
    degenerate: bool

    def label_of(self, cell: int) -> str:
        if cell in self._good_set:
            return "good"
        if cell in self._bad_set:
            return "bad"
        return "ugly"

    def __post_init__(self):
        self._good_set = set(self.good)
        self._bad_set = set(self.bad)


def classify_cells(grid: CellGrid, graph: CellGraph) -> CellClassification:
    """Partition cells into good / bad / ugly.

    good = largest connected component of dense cells (ties broken by the
    smallest minimum cell id), bad = sparse cells adjacent to good, ugly =
    the rest.  When no cell is dense the classification is flagged
    degenerate and everything is ugly.
    """
    n = grid.n
    dense_threshold = max(3, math.ceil(grid.epsilon ** 3 * math.log(n))) if n >= 2 else 3
    dense = set(np.nonzero(grid.counts >= dense_threshold)[0].tolist())
    all_cells = set(range(grid.n_cells))
    if not dense:
        return CellClassification(grid=grid, graph=graph, dense_threshold=dense_threshold,
                                  good=[], bad=[], ugly=sorted(all_cells),
                                  ugly_components=_components(all_cells, graph),
                                  degenerate=True)
    comps = _components(dense, graph)
    comps.sort(key=lambda c: (-len(c), c[0]))
    good = comps[0]
    good_set = set(good)
    sparse = sorted(all_cells - dense)
    bad = []
    for c in sparse:
        if any(nb in good_set for nb in graph.neighbors(c)):
            bad.append(c)
    # a dense cell adjacent to good would sit in the same component, hence be good
    for c in sorted(dense - good_set):
        assert not any(nb in good_set for nb in graph.neighbors(c))
    bad_set = set(bad)
    ugly = sorted(all_cells - good_set - bad_set)
    ugly_components = _components(set(ugly), graph)
    return CellClassification(grid=grid, graph=graph, dense_threshold=dense_threshold,
                              good=good, bad=bad, ugly=ugly,
                              ugly_components=ugly_components, degenerate=False)


@dataclass
class DiagnosticsReport:
    """Named structure checks: asymptotic conclusions evaluated at finite n.

    Each check has passed True/False, or None when the claim has no sharp
    finite-n form and is only reported.  Never raises; never aborts.
    """

    checks: dict

    def pass_rates(self) -> dict:
        return {k: v["passed"] for k, v in self.checks.items()}

    def to_json(self) -> str:
        def clean(x):
            if isinstance(x, float) and math.isinf(x):
                return "inf"
            if isinstance(x, dict):
                return {k: clean(v) for k, v in x.items()}
            if isinstance(x, (list, tuple)):
                return [clean(v) for v in x]
            if isinstance(x, (np.integer,)):
                return int(x)
            if isinstance(x, (np.floating,)):
                return float(x)
            return x
        return json.dumps(clean(self.checks), sort_keys=True)


def _component_linf_diameter(cells, grid: CellGrid) -> float:
    multis = np.array([grid.multi(c) for c in cells], dtype=np.int64)
    spans = multis.max(axis=0) - multis.min(axis=0) + 1
    return float(spans.max() * grid.side)


def _ugly_separation(classification: CellClassification, A: float) -> float:
    """Minimum l_p set-distance between distinct ugly components (inf if < 2)."""
    grid = classification.grid
    comps = classification.ugly_components
    if len(comps) < 2:
        return math.inf
    comp_id = np.full((grid.m,) * grid.d, -1, dtype=np.int64)
    for ci, comp in enumerate(comps):
        for c in comp:
            comp_id[grid.multi(c)] = ci
    reach = int(A * grid.r0 / grid.side) + 2
    best = math.inf
    for delta in itertools.product(range(-reach, reach + 1), repeat=grid.d):
        if tuple(delta) <= tuple([0] * grid.d):
            continue
        dist = _offset_set_distance(delta, grid.side, grid.p)
        if dist >= best:
            continue
        src = tuple(slice(max(0, -t), grid.m - max(0, t)) for t in delta)
        dst = tuple(slice(max(0, t), grid.m - max(0, -t)) for t in delta)
        a = comp_id[dst]
        b = comp_id[src]
        hit = (a >= 0) & (b >= 0) & (a != b)
        if hit.any():
            best = dist
    return best


def _good_near_ugly(classification: CellClassification, diameter_bound: float):
    """For each ugly cell: do good cells within l_inf 3 r0 induce a connected
    subgraph of the cell graph, with bounded graph diameter?"""
    grid = classification.grid
    graph = classification.graph
    good = classification.good
    if not good:
        return True, 0, 0.0
    good_multis = np.array([grid.multi(c) for c in good], dtype=np.int64)
    failures = 0
    worst_diam = 0
    for u in classification.ugly:
        um = np.array(grid.multi(u), dtype=np.int64)
        gaps = np.maximum(np.abs(good_multis - um) - 1, 0) * grid.side
        near = np.nonzero(gaps.max(axis=1) <= 3 * grid.r0)[0]
        if near.size <= 1:
            continue
        sel = [good[i] for i in near]
        sel_set = set(sel)
        # BFS from the first cell, tracking eccentricity
        start = sel[0]
        dist = {start: 0}
        queue = [start]
        qi = 0
        while qi < len(queue):
            c = queue[qi]
            qi += 1
            for nb in graph.neighbors(c):
                if nb in sel_set and nb not in dist:
                    dist[nb] = dist[c] + 1
                    queue.append(nb)
        if len(dist) < len(sel):
            failures += 1
            continue
        ecc = max(dist.values())
        worst_diam = max(worst_diam, ecc)  # eccentricity lower-bounds diameter
        if ecc > diameter_bound:
            failures += 1
    return failures == 0, failures, float(worst_diam)


def _power_adjacency(points: np.ndarray, p: float, radius: float) -> list[set]:
    from .process import _bucket_pairs
    n = points.shape[0]
    adj = [set() for _ in range(n)]
    for ii, jj, _ in _bucket_pairs(points, radius, p):
        for a, b in zip(ii.tolist(), jj.tolist()):
            adj[a].add(b)
            adj[b].add(a)
    return adj


def _facet_proximity_counts(grid: CellGrid, cells, A: float) -> np.ndarray:
    """Number of facets of the cube within distance A r0 of each given cell."""
    out = np.zeros(len(cells), dtype=np.int64)
    lim = A * grid.r0
    for k, c in enumerate(cells):
        bd = grid.boundary_distances(c)
        out[k] = int((bd <= lim).sum())
    return out


def _sparse_boundary_sets(classification: CellClassification, A: float, ell: int):
    """Connected sets of sparse cells in the ell-th power of the cell graph,
    summarized per facet proximity: entry i is the largest component with
    some member within A r0 of at least i facets, for i = 0..d.

    The matching claimed bounds are (d-i)/d * (1+eps)/eps cells for i < d
    and zero cells for i = d; both are returned for reporting only.
    """
    grid = classification.grid
    graph = classification.graph
    d = grid.d
    eps = grid.epsilon
    bounds = [(d - i) / d * (1 + eps) / eps for i in range(d)] + [0.0]
    sparse = [c for c in range(grid.n_cells)
              if grid.counts[c] < classification.dense_threshold]
    sizes = [0] * (d + 1)
    if not sparse:
        return sizes, bounds
    # offsets reachable within ell stencil steps
    power = {tuple([0] * d)}
    frontier = set(power)
    for _ in range(ell):
        new = set()
        for base in frontier:
            for delta in graph.stencil:
                new.add(tuple(b + t for b, t in zip(base, delta)))
        frontier = new - power
        power |= frontier
    power.discard(tuple([0] * d))
    facet_counts = dict(zip(sparse, _facet_proximity_counts(grid, sparse, A).tolist()))
    sparse_set = set(sparse)
    seen = set()
    for start in sparse:
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        queue = [start]
        while queue:
            c = queue.pop()
            mi = grid.multi(c)
            for delta in power:
                nb = tuple(x + t for x, t in zip(mi, delta))
                if all(0 <= x < grid.m for x in nb):
                    nf = grid.flat(nb)
                    if nf in sparse_set and nf not in seen:
                        seen.add(nf)
                        comp.append(nf)
                        queue.append(nf)
        top_facets = max(facet_counts[c] for c in comp)
        for i in range(min(top_facets, d) + 1):
            sizes[i] = max(sizes[i], len(comp))
    return sizes, bounds


def diagnostics(grid: CellGrid, graph: CellGraph, classification: CellClassification,
                points: PointSet | None = None, r1: float | None = None,
                A: float = 3.0, ell: int = 2) -> DiagnosticsReport:
    """Evaluate the asymptotic structure claims as finite-n observables.

    Hard geometric facts (cross-pair containment, degree bound) are checked
    exactly; asymptotic conclusions report pass/fail; order-of-magnitude
    claims are reported without judgement (passed = None).
    """
    n = grid.n
    checks = {}
    ln_n = math.log(n) if n >= 2 else 1.0

    max_occ = int(grid.counts.max()) if grid.counts.size else 0
    checks["max_cell_occupancy"] = {
        "passed": max_occ <= ln_n,
        "measured": {"max_count": max_occ, "bound": ln_n},
    }

    sparse_count = int((grid.counts < classification.dense_threshold).sum())
    bound_sparse = n ** (1 - grid.epsilon / 2)
    checks["sparse_cell_count"] = {
        "passed": sparse_count <= bound_sparse,
        "measured": {"count": sparse_count, "bound": bound_sparse},
    }

    diam_bound = 4 * grid.d ** 2 * grid.side
    worst = 0.0
    for comp in classification.ugly_components:
        worst = max(worst, _component_linf_diameter(comp, grid))
    checks["ugly_component_diameter"] = {
        "passed": worst <= diam_bound,
        "measured": {"max_linf_diameter": worst, "bound": diam_bound,
                     "components": len(classification.ugly_components)},
    }

    checks["bad_cell_count"] = {
        "passed": len(classification.bad) <= bound_sparse,
        "measured": {"count": len(classification.bad), "bound": bound_sparse},
    }

    min_sep = _ugly_separation(classification, A)
    checks["ugly_component_separation"] = {
        "passed": min_sep >= A * grid.r0,
        "measured": {"min_separation": min_sep, "bound": A * grid.r0, "A": A},
    }

    diameter_bound = 2 * (20 * grid.d) ** grid.d
    ok, failures, worst_diam = _good_near_ugly(classification, diameter_bound)
    checks["good_cells_near_ugly_connected"] = {
        "passed": ok,
        "measured": {"failing_ugly_cells": failures, "worst_graph_diameter": worst_diam,
                     "bound": diameter_bound},
    }

    max_deg = graph.max_degree()
    checks["cell_graph_max_degree"] = {
        "passed": max_deg <= graph.degree_bound,
        "measured": {"max_degree": max_deg, "bound": graph.degree_bound,
                     "degenerate_threshold": graph.degenerate_threshold,
                     "threshold": graph.threshold},
    }

    if points is not None and r1 is not None:
        adj = _power_adjacency(points.points, points.p, r1)
        deg1 = max((len(s) for s in adj), default=0)
        deg_ell = deg1
        if ell >= 2:
            best = 0
            for v in range(len(adj)):
                reach = set(adj[v])
                frontier = reach
                for _ in range(ell - 1):
                    new = set()
                    for w in frontier:
                        new |= adj[w]
                    new -= reach
                    new.discard(v)
                    frontier = new
                    reach |= new
                best = max(best, len(reach))
            deg_ell = best
        checks["power_graph_degree"] = {
            "passed": None,
            "measured": {"max_degree_1": deg1, "max_degree_ell": deg_ell,
                         "ell": ell, "log_n": ln_n,
                         "ratio_to_log_n": deg_ell / ln_n if ln_n > 0 else math.inf},
        }

    sizes, claimed = _sparse_boundary_sets(classification, A, ell)
    checks["sparse_boundary_sets"] = {
        "passed": None,
        "measured": {"max_component_size_by_min_facets": sizes,
                     "claimed_bounds": claimed, "A": A, "ell": ell},
    }

    return DiagnosticsReport(checks=checks)


def verify_cross_pairs(grid: CellGrid, graph: CellGraph, points: PointSet):
    """Exhaustive check of the adjacency guarantee on resident vertices.

    Returns (pairs_checked, violations): over every adjacent pair of
    occupied cells, every cross pair of resident vertices must be within
    l_p distance r0.
    """
    from .geometry import pairwise_distances
    occupied: dict[int, np.ndarray] = {}
    for v, c in enumerate(grid.cell_of_vertex.tolist()):
        occupied.setdefault(c, []).append(v)
    occupied = {c: np.array(vs) for c, vs in occupied.items()}
    pairs = 0
    violations = 0
    pts = points.points
    for c, vs in occupied.items():
        for nb in graph.neighbors(c):
            if nb <= c or nb not in occupied:
                continue
            ws = occupied[nb]
            diff = np.abs(pts[vs][:, None, :] - pts[ws][None, :, :])
            if math.isinf(grid.p):
                dmat = diff.max(axis=2)
            elif grid.p == 1.0:
                dmat = diff.sum(axis=2)
            else:
                dmat = (diff ** grid.p).sum(axis=2) ** (1.0 / grid.p)
            pairs += dmat.size
            violations += int((dmat > grid.r0 * (1 + 1e-12)).sum())
    return pairs, violations
