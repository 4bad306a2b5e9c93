"""Builtin meshes and random mesh generation for property suites."""

from __future__ import annotations

import math
from typing import Callable, Optional, Sequence

import numpy as np

from .fields import CVF, VSF
from .mesh import CombSurface, EdgeSplit, FaceSplit, MeshError, subdivide
from .refine import REGIONS, VHRegion, grid_mesh, holed_strip


def _arc(r: float, a0: float, a1: float, n: int = 65) -> list[list[float]]:
    t = np.linspace(a0, a1, n)
    pts = np.stack([r * np.cos(t), r * np.sin(t)], axis=1)
    return np.round(pts, 15).tolist()


def disc() -> CombSurface:
    """One vertex, one loop edge running once around the unit circle, one face."""
    return CombSurface.from_lists(1, [(0, 0)], [[(0, 1)]], [0], [[1.0, 0.0]],
                                  [_arc(1.0, 0.0, 2 * math.pi)])


def annulus() -> CombSurface:
    """Ring between radii 1 and 2, cut into a top and a bottom face.

    Edges: 0/1 inner top/bottom arcs, 2/3 outer top/bottom arcs, 4 and 5 the
    left and right radial segments.
    """
    coords = [[-1.0, 0.0], [1.0, 0.0], [-2.0, 0.0], [2.0, 0.0]]
    edges = [(0, 1), (1, 0), (3, 2), (2, 3), (0, 2), (1, 3)]
    polys = [_arc(1.0, math.pi, 0.0), _arc(1.0, 2 * math.pi, math.pi),
             _arc(2.0, 0.0, math.pi), _arc(2.0, math.pi, 2 * math.pi), None, None]
    faces = [[(2, 1), (4, -1), (0, 1), (5, 1)],
             [(3, 1), (5, -1), (1, 1), (4, 1)]]
    return CombSurface.from_lists(4, edges, faces, [0, 1, 2, 3], coords, polys)


def moebius() -> CombSurface:
    """Two squares glued into a Moebius band (no geometry)."""
    # a=0 b=1 c=2 d=3; edges L a->b, M c->d, T1 a->c, T2 c->b, B1 b->d, B2 d->a
    edges = [(0, 1), (2, 3), (0, 2), (2, 1), (1, 3), (3, 0)]
    faces = [[(2, 1), (1, 1), (4, -1), (0, -1)],
             [(3, 1), (0, -1), (5, -1), (1, -1)]]
    return CombSurface.from_lists(4, edges, faces, [2, 3, 4, 5])


def torus(n: int = 3, m: Optional[int] = None) -> CombSurface:
    """``n x m`` square grid with opposite sides identified."""
    m = n if m is None else m
    if n < 2 or m < 2:
        raise MeshError("torus grid needs at least 2 x 2 cells")

    def vid(i, j):
        return (j % m) * n + (i % n)

    edges = [(vid(i, j), vid(i + 1, j)) for j in range(m) for i in range(n)]
    edges += [(vid(i, j), vid(i, j + 1)) for j in range(m) for i in range(n)]

    def h(i, j):
        return (j % m) * n + (i % n)

    def v(i, j):
        return n * m + (j % m) * n + (i % n)

    faces = [[(h(i, j), 1), (v(i + 1, j), 1), (h(i, j + 1), -1), (v(i, j), -1)]
             for j in range(m) for i in range(n)]
    return CombSurface.from_lists(n * m, edges, faces)


def from_vertex_cycles(n_vertices: int, cycles: Sequence[Sequence[int]],
                       boundary_pairs: Sequence[tuple[int, int]] = ()) -> CombSurface:
    """Mesh from faces given as vertex cycles; edges are created on first use
    and stored in that first direction.  Assumes no parallel edges."""
    index: dict[frozenset, int] = {}
    edges: list[tuple[int, int]] = []
    faces = []
    for cyc in cycles:
        steps = []
        for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
            key = frozenset((a, b))
            if key not in index:
                index[key] = len(edges)
                edges.append((a, b))
            e = index[key]
            steps.append((e, 1 if edges[e] == (a, b) else -1))
        faces.append(steps)
    bnd = [index[frozenset(p)] for p in boundary_pairs]
    return CombSurface.from_lists(n_vertices, edges, faces, bnd)


def tetrahedron() -> CombSurface:
    """Boundary of a tetrahedron: a sphere with four triangular faces."""
    return from_vertex_cycles(4, [(0, 1, 2), (0, 3, 1), (0, 2, 3), (1, 3, 2)])


def planar_holes(holes: int) -> CombSurface:
    """Planar grid surface with ``holes + 1`` boundary components."""
    return grid_mesh(holed_strip(holes), 0)


# Graph used for tilt and ebb examples: vertices A..J, no faces.
LETTER_GRAPH_VALUES = {"A": -3.0, "B": 0.5, "C": 7.0, "D": 2.0, "E": 0.0,
                       "F": 19.0, "G": 2.0, "H": -1.0, "I": 5.0, "J": 4.0}
LETTER_GRAPH_EDGES = ["AB", "BC", "CD", "AD", "HI", "IG", "HG", "FJ", "JE", "FE",
                      "AH", "BI", "GF", "BF", "CJ", "ED"]


def letter_graph() -> tuple[CombSurface, VSF]:
    names = sorted(LETTER_GRAPH_VALUES)
    ids = {n: i for i, n in enumerate(names)}
    edges = [(ids[a], ids[b]) for a, b in LETTER_GRAPH_EDGES]
    s = CombSurface.from_lists(len(names), edges, [])
    return s, VSF([LETTER_GRAPH_VALUES[n] for n in names])


MESHES: dict[str, Callable[[], CombSurface]] = {
    "disc": disc,
    "annulus": annulus,
    "moebius": moebius,
    "torus": torus,
    "torus2": lambda: torus(2),
    "tetrahedron": tetrahedron,
    "square": lambda: grid_mesh(REGIONS["square"], 0),
    "lshape": lambda: grid_mesh(REGIONS["lshape"], 0),
    "holed_square": lambda: grid_mesh(REGIONS["holed_square"], 0),
    "pants": lambda: planar_holes(2),
    "holes3": lambda: planar_holes(3),
}


# -- randomization ------------------------------------------------------------

def relabel(s: CombSurface, rng: np.random.Generator, flip: bool = True) -> CombSurface:
    """Same surface with permuted ids, rotated cycles and (optionally) some
    stored edge directions and face cycle directions reversed."""
    nv, edges, faces, bnd, coords, polys = s.to_lists()
    ne, nf = len(edges), len(faces)
    pv = rng.permutation(nv)
    pe = rng.permutation(ne)
    order = rng.permutation(nf)
    eflip = rng.random(ne) < 0.5 if flip else np.zeros(ne, dtype=bool)

    new_edges = [None] * ne
    new_polys = None if polys is None else [None] * ne
    for e, (a, b) in enumerate(edges):
        a, b = int(pv[a]), int(pv[b])
        p = None if polys is None else polys[e]
        if eflip[e]:
            a, b = b, a
            p = None if p is None else p[::-1]
        new_edges[pe[e]] = (a, b)
        if new_polys is not None:
            new_polys[pe[e]] = p
    new_faces = []
    for f in order:
        cyc = [(int(pe[e]), -d if eflip[e] else d) for e, d in faces[f]]
        if flip and rng.random() < 0.5:
            cyc = [(e, -d) for e, d in reversed(cyc)]
        k = int(rng.integers(len(cyc))) if cyc else 0
        new_faces.append(cyc[k:] + cyc[:k])
    new_coords = None
    if coords is not None:
        new_coords = [None] * nv
        for v, c in enumerate(coords):
            new_coords[pv[v]] = c
    return CombSurface.from_lists(nv, new_edges, new_faces, [int(pe[e]) for e in bnd],
                                  new_coords, new_polys)


def random_move(s: CombSurface, rng: np.random.Generator):
    """A random valid edge split or face split."""
    if s.n_faces and rng.random() < 0.5:
        for _ in range(8):
            f = int(rng.integers(s.n_faces))
            tails = [s.tail(de) for de in s.face_cycle(f)]
            if len(tails) >= 2:
                u, v = rng.choice(len(tails), size=2, replace=False)
                return FaceSplit(f, tails[int(u)], tails[int(v)])
    return EdgeSplit(int(rng.integers(s.n_edges)))


def random_subdivisions(s: CombSurface, moves: int, rng: np.random.Generator,
                        max_faces: Optional[int] = None) -> CombSurface:
    for _ in range(moves):
        mv = random_move(s, rng)
        if max_faces is not None and isinstance(mv, FaceSplit) and s.n_faces >= max_faces:
            mv = EdgeSplit(int(rng.integers(s.n_edges)))
        s = subdivide(s, mv)
    return s


def random_region(rng: np.random.Generator, max_cells: int = 8, size: int = 4) -> VHRegion:
    """Random edge-connected set of grid cells."""
    target = int(rng.integers(1, max_cells + 1))
    start = (int(rng.integers(size)), int(rng.integers(size)))
    cells = {start}
    while len(cells) < target:
        i, j = sorted(cells)[int(rng.integers(len(cells)))]
        di, dj = [(1, 0), (-1, 0), (0, 1), (0, -1)][int(rng.integers(4))]
        c = (i + di, j + dj)
        if 0 <= c[0] < size and 0 <= c[1] < size:
            cells.add(c)
    return VHRegion(1.0, (0.0, 0.0), frozenset(cells))


_BASES = ("disc", "annulus", "torus", "torus2", "tetrahedron", "holed_square", "pants")


def random_oriented_mesh(rng: np.random.Generator, max_faces: int = 50) -> CombSurface:
    """Random orientable surface without geometry, at most ``max_faces`` faces.

    A base mesh (builtin or random grid region) receives random subdivision
    moves, then random relabelling.
    """
    pick = int(rng.integers(len(_BASES) + 2))
    if pick < len(_BASES):
        s = MESHES[_BASES[pick]]()
    else:
        s = grid_mesh(random_region(rng), 0)
    s = s.without_geometry()
    room = max(0, max_faces - s.n_faces)
    s = random_subdivisions(s, int(rng.integers(0, room + 1)), rng, max_faces)
    return relabel(s, rng)


def random_cvf(s: CombSurface, rng: np.random.Generator, integer: bool = False) -> CVF:
    dirs = rng.choice([-1, 1], size=s.n_edges)
    if integer:
        vals = rng.integers(-5, 6, size=s.n_edges).astype(float)
    else:
        vals = rng.normal(scale=10.0, size=s.n_edges)
    return CVF(dirs, vals)


def random_vsf(s: CombSurface, rng: np.random.Generator, integer: bool = False) -> VSF:
    if integer:
        return VSF(rng.integers(-9, 10, size=s.n_vertices).astype(float))
    return VSF(rng.normal(scale=10.0, size=s.n_vertices))


def small_meshes(rng: np.random.Generator, extra: int = 40, max_edges: int = 8
                 ) -> list[tuple[str, CombSurface]]:
    """Builtin and random surfaces with at most ``max_edges`` edges."""
    out = []
    for name in ("disc", "annulus", "moebius", "torus2", "tetrahedron", "square"):
        s = MESHES[name]().without_geometry()
        if s.n_edges <= max_edges:
            out.append((name, s))
    grid2 = grid_mesh(VHRegion(1.0, (0, 0), frozenset({(0, 0), (1, 0)})), 0)
    out.append(("domino", grid2.without_geometry()))
    k = 0
    while k < extra:
        name, base = out[int(rng.integers(len(out)))]
        room = max_edges - base.n_edges
        if room <= 0:
            continue
        s = base
        for _ in range(int(rng.integers(1, room + 1))):
            s = subdivide(s, random_move(s, rng))
        out.append((f"{name}+{k}", relabel(s, rng)))
        k += 1
    return out


__all__ = [
    "disc", "annulus", "moebius", "torus", "tetrahedron", "planar_holes", "letter_graph",
    "from_vertex_cycles", "MESHES", "relabel", "random_move", "random_subdivisions",
    "random_region", "random_oriented_mesh", "random_cvf", "random_vsf", "small_meshes",
]
