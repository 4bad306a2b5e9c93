"""Edge paths and loops, loop decomposition, conservative fields and potentials."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .fields import CVF, VSF, FieldError, integrate_path
from .mesh import CombSurface, DirectedEdge, MeshError


class PathError(ValueError):
    pass


@dataclass(frozen=True)
class EdgePath:
    """Directed edges walked in order, with the vertices visited.

    ``vertices`` has one more entry than ``steps``: ``vertices[i]`` is the
    source of ``steps[i]`` and ``vertices[i + 1]`` its sink.
    """

    steps: tuple[DirectedEdge, ...]
    vertices: tuple[int, ...]

    @classmethod
    def from_steps(cls, s: CombSurface, steps: Sequence[DirectedEdge],
                   start: Optional[int] = None) -> EdgePath:
        steps = tuple(steps)
        if not steps:
            if start is None:
                raise PathError("an empty path needs a start vertex")
            return cls((), (start,))
        for de in steps:
            if not 0 <= de.edge < s.n_edges:
                raise PathError(f"unknown edge id {de.edge}")
        verts = [s.tail(steps[0])]
        for i, de in enumerate(steps):
            if s.tail(de) != verts[-1]:
                raise PathError(f"step {i} (edge {de.edge}) does not start where "
                                f"step {i - 1} ends (vertex {verts[-1]})")
            verts.append(s.head(de))
        return cls(steps, tuple(verts))

    @classmethod
    def parse(cls, s: CombSurface, text: str) -> EdgePath:
        """From ``"3+,1-,4"``: edge ids, ``-`` marking reversed traversal."""
        steps = []
        for tok in text.replace(" ", "").split(","):
            if not tok:
                continue
            fwd = not tok.endswith("-")
            try:
                steps.append(DirectedEdge(int(tok.rstrip("+-")), fwd))
            except ValueError:
                raise PathError(f"bad step {tok!r}") from None
        return cls.from_steps(s, steps)

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def source(self) -> int:
        return self.vertices[0]

    @property
    def sink(self) -> int:
        return self.vertices[-1]

    @property
    def is_loop(self) -> bool:
        return self.source == self.sink

    def reversed(self) -> EdgePath:
        return EdgePath(tuple(de.reversed() for de in reversed(self.steps)),
                        self.vertices[::-1])

    def then(self, other: EdgePath) -> EdgePath:
        if other.source != self.sink:
            raise PathError("paths do not join")
        return EdgePath(self.steps + other.steps, self.vertices + other.vertices[1:])

    def format(self) -> str:
        return ",".join(f"{de.edge}{'+' if de.forward else '-'}" for de in self.steps)


def is_embedded(p: EdgePath) -> bool:
    """Consecutive steps use distinct edges and no vertex is a sink twice.

    For loops the last and first steps also count as consecutive.
    """
    edges = [de.edge for de in p.steps]
    if any(a == b for a, b in zip(edges, edges[1:])):
        return False
    if p.is_loop and len(edges) > 1 and edges[0] == edges[-1]:
        return False
    sinks = p.vertices[1:]
    return len(set(sinks)) == len(sinks)


@dataclass(frozen=True)
class LoopDecomposition:
    loops: tuple[EdgePath, ...]
    backtracks: int


def decompose_loop(p: EdgePath) -> LoopDecomposition:
    """Split a loop into embedded loops by removing backtracks and pinching
    off the shortest repeated-sink subloops.

    The integral of any CVF over ``p`` equals the sum over the returned
    loops.  A step followed by the same edge in the same direction (a loop
    edge walked twice) is not a backtrack; it is split off as a subloop.
    """
    if not p.is_loop:
        raise PathError("decompose_loop needs an edge loop")
    steps = list(p.steps)
    verts = list(p.vertices)
    loops: list[EdgePath] = []
    backtracks = 0
    while steps:
        cur = EdgePath(tuple(steps), tuple(verts))
        if is_embedded(cur):
            loops.append(cur)
            break
        j = next((i for i in range(len(steps) - 1)
                  if steps[i].edge == steps[i + 1].edge
                  and steps[i].forward != steps[i + 1].forward), None)
        if j is not None:
            del steps[j:j + 2]
            del verts[j + 1:j + 3]
            backtracks += 1
            continue
        sinks = verts[1:]
        best = None
        last_seen: dict[int, int] = {}
        for k, v in enumerate(sinks):
            if v in last_seen:
                j = last_seen[v]
                if best is None or k - j < best[1] - best[0]:
                    best = (j, k)
            last_seen[v] = k
        if best is None:
            raise PathError("loop is neither embedded nor reducible")  # unreachable
        j, k = best
        loops.append(EdgePath(tuple(steps[j + 1:k + 1]), tuple(verts[j + 1:k + 2])))
        del steps[j + 1:k + 1]
        del verts[j + 2:k + 2]
    return LoopDecomposition(tuple(loops), backtracks)


# -- potentials -------------------------------------------------------------

@dataclass(frozen=True)
class FailureWitness:
    """A loop (tree path + one non-tree edge) with nonzero integral."""

    loop: EdgePath
    integral: float
    edge: int


def default_homes(s: CombSurface) -> list[int]:
    """Smallest vertex id of each connected component."""
    comp = s.vertex_components()
    homes: dict[int, int] = {}
    for v, c in enumerate(comp.tolist()):
        homes.setdefault(c, v)
    return [homes[c] for c in sorted(homes)]


def _tolerance(F: CVF, tol: Optional[float]) -> float:
    if tol is not None:
        return tol
    return 1e-9 * max(1.0, math.fsum(np.abs(F.values).tolist()))


def potential(s: CombSurface, F: CVF, homes: Optional[Sequence[int]] = None,
              tol: Optional[float] = None) -> Union[VSF, FailureWitness]:
    """Integrate ``F`` along a breadth-first spanning tree from each home.

    Neighbours are explored in ascending edge id.  The result satisfies
    ``f(home) = 0``; it is returned only if ``tilt f`` is the same field as
    ``F`` on every edge (within ``tol``, default ``1e-9 * max(1, sum|F|)``).
    Otherwise the loop closed by the first offending edge is returned.
    """
    if len(F) != s.n_edges:
        raise FieldError("CVF does not match the surface")
    comp = s.vertex_components()
    if homes is None:
        homes = default_homes(s)
    n_comp = int(comp.max()) + 1 if s.n_vertices else 0
    seen_comp = set()
    for h in homes:
        if not 0 <= h < s.n_vertices:
            raise MeshError(f"home vertex {h} does not exist")
        c = int(comp[h])
        if c in seen_comp:
            raise MeshError(f"two home vertices in the component of vertex {h}")
        seen_comp.add(c)
    if len(seen_comp) != n_comp:
        raise MeshError("every connected component needs exactly one home vertex")

    signed = F.signed
    adj = s.vertex_adjacency()
    f = np.zeros(s.n_vertices)
    parent: list[Optional[DirectedEdge]] = [None] * s.n_vertices
    depth = [-1] * s.n_vertices
    tree = np.zeros(s.n_edges, dtype=bool)
    for h in homes:
        depth[h] = 0
        queue = deque([h])
        while queue:
            v = queue.popleft()
            for e, w, fwd in adj[v]:
                if depth[w] >= 0:
                    continue
                depth[w] = depth[v] + 1
                parent[w] = DirectedEdge(e, fwd)
                tree[e] = True
                f[w] = f[v] + (signed[e] if fwd else -signed[e])
                queue.append(w)

    eps = _tolerance(F, tol)
    mismatch = np.abs(signed - (f[s.edge_dst] - f[s.edge_src]))
    bad = np.flatnonzero(mismatch > eps)
    if len(bad):
        e = int(bad[0])
        loop = _closing_loop(s, e, parent, depth)
        return FailureWitness(loop, integrate_path(F, loop), e)
    return VSF(f)


def _tree_path(s: CombSurface, v: int, stop: int, parent) -> list[DirectedEdge]:
    """Tree steps from ``stop`` down to ``v``."""
    out = []
    while v != stop:
        de = parent[v]
        out.append(de)
        v = s.tail(de)
    return out[::-1]


def _closing_loop(s: CombSurface, e: int, parent, depth) -> EdgePath:
    a, b = int(s.edge_src[e]), int(s.edge_dst[e])
    x, y = a, b
    while x != y:
        if depth[x] >= depth[y]:
            x = s.tail(parent[x])
        else:
            y = s.tail(parent[y])
    lca = x
    down = _tree_path(s, a, lca, parent)
    up = [de.reversed() for de in reversed(_tree_path(s, b, lca, parent))]
    return EdgePath.from_steps(s, down + [DirectedEdge(e, True)] + up)


def is_conservative(s: CombSurface, F: CVF, tol: Optional[float] = None
                    ) -> tuple[bool, Optional[EdgePath]]:
    """Whether ``F`` is the same as some ``tilt f``; else a witness loop."""
    result = potential(s, F, tol=tol)
    if isinstance(result, FailureWitness):
        return False, result.loop
    return True, None


def enumerate_embedded_loops(s: CombSurface, max_len: Optional[int] = None) -> list[EdgePath]:
    """Every embedded edge loop, by exhaustive backtracking.

    Each loop is reported once per starting step and direction; meant for
    small meshes only.
    """
    limit = s.n_edges if max_len is None else max_len
    adj = s.vertex_adjacency()
    found: list[EdgePath] = []

    def extend(steps: list[DirectedEdge], verts: list[int], sinks: set[int]):
        v = verts[-1]
        for e, w, fwd in adj[v]:
            de = DirectedEdge(e, fwd)
            if steps and steps[-1].edge == e:
                continue
            if w == verts[0]:
                cand = EdgePath(tuple(steps + [de]), tuple(verts + [w]))
                if is_embedded(cand):
                    found.append(cand)
                continue
            if w in sinks or len(steps) + 1 >= limit:
                continue
            steps.append(de)
            verts.append(w)
            sinks.add(w)
            extend(steps, verts, sinks)
            sinks.discard(w)
            verts.pop()
            steps.pop()

    for start in range(s.n_vertices):
        extend([], [start], set())
    return found
