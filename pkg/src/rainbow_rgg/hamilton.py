"""Hamilton path and cycle search on small graphs.

Two engines: an exact bitmask dynamic program, complete but exponential,
for graphs up to ~14 vertices, and a deterministic rotation-extension
heuristic for larger ones.  The heuristic is incomplete (it can miss an
existing cycle) but on the dense survivor graphs produced inside cells it
essentially always lands; callers treat None as a stage failure.

Vertices are 0..n-1, adjacency is a sequence of int collections.  All
choices are made in ascending vertex order, so results are reproducible.
"""

from __future__ import annotations

__all__ = [
    "exact_hamilton_path",
    "exact_hamilton_cycle",
    "hamilton_path",
    "hamilton_cycle",
]


def _as_sets(n, adj):
    out = [set(adj[v]) for v in range(n)]
    for v, s in enumerate(out):
        s.discard(v)
    return out


def exact_hamilton_path(n, adj) -> list | None:
    """Complete search for a Hamilton path with free endpoints."""
    if n == 0:
        return None
    if n == 1:
        return [0]
    adj = _as_sets(n, adj)
    masks = [0] * (1 << n)
    parent = {}
    for v in range(n):
        masks[1 << v] = 1 << v
    full = (1 << n) - 1
    for mask in range(1, full + 1):
        ends = masks[mask]
        if not ends:
            continue
        v = 0
        e = ends
        while e:
            if e & 1:
                for w in adj[v]:
                    bit = 1 << w
                    if mask & bit:
                        continue
                    nm = mask | bit
                    if not masks[nm] & bit:
                        masks[nm] |= bit
                        parent[(nm, w)] = v
            e >>= 1
            v += 1
    ends = masks[full]
    if not ends:
        return None
    v = (ends & -ends).bit_length() - 1
    path = [v]
    mask = full
    while len(path) < n:
        u = parent[(mask, v)]
        mask ^= 1 << v
        path.append(u)
        v = u
    path.reverse()
    return path


def exact_hamilton_cycle(n, adj) -> list | None:
    """Complete search for a Hamilton cycle, rooted at vertex 0."""
    if n < 3:
        return None
    adj = _as_sets(n, adj)
    masks = [0] * (1 << n)
    parent = {}
    masks[1] = 1
    full = (1 << n) - 1
    for mask in range(1, full + 1):
        if not mask & 1:
            continue
        ends = masks[mask]
        if not ends:
            continue
        v = 0
        e = ends
        while e:
            if e & 1:
                for w in adj[v]:
                    bit = 1 << w
                    if mask & bit:
                        continue
                    nm = mask | bit
                    if not masks[nm] & bit:
                        masks[nm] |= bit
                        parent[(nm, w)] = v
            e >>= 1
            v += 1
    ends = masks[full]
    close = 0
    for w in adj[0]:
        close |= 1 << w
    ends &= close & ~1
    if not ends:
        return None
    v = (ends & -ends).bit_length() - 1
    path = [v]
    mask = full
    while len(path) < n:
        u = parent[(mask, v)]
        mask ^= 1 << v
        path.append(u)
        v = u
    path.reverse()
    return path


def _posa_path(n, adj, start) -> list | None:
    """Rotation-extension from a fixed start; ascending-index choices."""
    path = [start]
    in_path = {start}
    while len(path) < n:
        u = path[-1]
        ext = None
        for w in sorted(adj[u]):
            if w not in in_path:
                ext = w
                break
        if ext is not None:
            path.append(ext)
            in_path.add(ext)
            continue
        # stuck: breadth-first search over rotation endpoints
        pos = {v: i for i, v in enumerate(path)}
        tried = {u}
        queue = [path]
        found = None
        qi = 0
        while qi < len(queue) and found is None:
            cur = queue[qi]
            qi += 1
            cpos = {v: i for i, v in enumerate(cur)} if cur is not path else pos
            e = cur[-1]
            for w in sorted(adj[e]):
                i = cpos.get(w)
                if i is None or i >= len(cur) - 2:
                    continue
                new = cur[:i + 1] + cur[i + 1:][::-1]
                ne = new[-1]
                if ne in tried:
                    continue
                tried.add(ne)
                if any(x not in in_path for x in adj[ne]):
                    found = new
                    break
                queue.append(new)
        if found is None:
            return None
        path = found
    return path


def _close_cycle(path, adj) -> list | None:
    n = len(path)
    if path[0] in adj[path[-1]]:
        return path
    head, tail = path[0], path[-1]
    for i in range(1, n - 2):
        if path[i] in adj[tail] and path[i + 1] in adj[head]:
            return path[:i + 1] + path[i + 1:][::-1]
    return None


def hamilton_path(n, adj, exact_limit: int = 10) -> list | None:
    """Hamilton path with free endpoints; exact below the size limit."""
    if n <= 0:
        return None
    if n == 1:
        return [0]
    if n <= exact_limit:
        return exact_hamilton_path(n, adj)
    adj = _as_sets(n, adj)
    for start in range(n):
        got = _posa_path(n, adj, start)
        if got is not None:
            return got
    return None


def hamilton_cycle(n, adj, exact_limit: int = 10) -> list | None:
    """Hamilton cycle as a vertex order (closing edge implied); exact below
    the size limit, rotation-extension with closing above it."""
    if n < 3:
        return None
    if n <= exact_limit:
        return exact_hamilton_cycle(n, adj)
    adj = _as_sets(n, adj)
    for start in range(n):
        path = _posa_path(n, adj, start)
        if path is None:
            continue
        closed = _close_cycle(path, adj)
        if closed is not None:
            return closed
    return None
