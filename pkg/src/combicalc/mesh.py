"""Combinatorial surfaces: storage, file format, validation, orientation.

A :class:`CombSurface` is a graph drawn on a compact surface: vertices,
edges with a stored (source -> target) direction, and faces given as
closed directed walks over the edges.  Geometry (planar vertex
coordinates and optional edge polylines) is optional; everything in the
exact layer works without it.

Faces are stored as directed boundary cycles and an :class:`Orientation`
is a sign per face, so re-orienting never rewrites the mesh.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np


class MeshError(ValueError):
    """Raised for structurally unusable surfaces or bad operation arguments."""


class MeshParseError(MeshError):
    """Mesh file could not be parsed; ``locus`` names the line or field."""

    def __init__(self, message: str, locus: str):
        super().__init__(f"{locus}: {message}")
        self.locus = locus


@dataclass(frozen=True)
class DirectedEdge:
    """An edge id together with a traversal direction.

    ``forward`` is True when the edge is traversed in its stored
    source -> target direction.
    """

    edge: int
    forward: bool = True

    def reversed(self) -> DirectedEdge:
        return DirectedEdge(self.edge, not self.forward)

    @property
    def sign(self) -> int:
        return 1 if self.forward else -1


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.flags.writeable = False
    return arr


class CombSurface:
    """Immutable combinatorial surface.

    Parameters
    ----------
    n_vertices : int
        Number of vertices; ids are ``0 .. n_vertices - 1``.
    edge_src, edge_dst : array_like of int
        Stored source and target vertex of every edge.
    face_ptr : array_like of int
        CSR offsets into ``cycle_edge``/``cycle_dir``; face ``f`` owns
        slots ``face_ptr[f]:face_ptr[f + 1]``.
    cycle_edge, cycle_dir : array_like of int
        Edge id and traversal sign (+1 stored direction, -1 reversed) of
        every boundary-cycle slot.
    boundary : iterable of int
        Edge ids lying on the boundary of the surface.
    coords : array_like, shape (n_vertices, 2), optional
        Planar vertex positions.
    polys : sequence of array_like or None, optional
        Per-edge polyline from source to target (``None`` entries mean a
        straight segment).  Requires ``coords``.
    """

    def __init__(self, n_vertices, edge_src, edge_dst, face_ptr, cycle_edge,
                 cycle_dir, boundary=(), coords=None, polys=None):
        self._n_vertices = int(n_vertices)
        self.edge_src = _frozen(edge_src, np.int64).reshape(-1)
        self.edge_dst = _frozen(edge_dst, np.int64).reshape(-1)
        self.face_ptr = _frozen(face_ptr, np.int64).reshape(-1)
        self.cycle_edge = _frozen(cycle_edge, np.int64).reshape(-1)
        self.cycle_dir = _frozen(cycle_dir, np.int64).reshape(-1)
        self.boundary = frozenset(int(e) for e in boundary)
        if len(self.edge_src) != len(self.edge_dst):
            raise MeshError("edge_src and edge_dst differ in length")
        if len(self.face_ptr) == 0 or self.face_ptr[0] != 0 \
                or self.face_ptr[-1] != len(self.cycle_edge):
            raise MeshError("face_ptr does not describe cycle arrays")
        if coords is not None:
            coords = _frozen(coords, float).reshape(-1, 2)
            if len(coords) != self._n_vertices:
                raise MeshError("coords must give one point per vertex")
        elif polys is not None and any(p is not None for p in polys):
            raise MeshError("edge polylines require vertex coordinates")
        self.coords = coords
        if polys is not None:
            if len(polys) != self.n_edges:
                raise MeshError("polys must give one entry per edge")
            polys = tuple(None if p is None else _frozen(p, float).reshape(-1, 2)
                          for p in polys)
            if all(p is None for p in polys):
                polys = None
        self.polys = polys
        self._cache: dict = {}

    # -- construction helpers -------------------------------------------

    @classmethod
    def from_lists(cls, n_vertices: int, edges: Sequence[tuple[int, int]],
                   faces: Sequence[Sequence], boundary: Iterable[int] = (),
                   coords=None, polys=None) -> CombSurface:
        """Build from python lists.

        ``faces`` entries are sequences of ``DirectedEdge`` or
        ``(edge, dir)`` pairs with ``dir`` in {1, -1}.
        """
        src = [int(a) for a, _ in edges]
        dst = [int(b) for _, b in edges]
        ptr = [0]
        ce: list[int] = []
        cd: list[int] = []
        for cyc in faces:
            for step in cyc:
                if isinstance(step, DirectedEdge):
                    ce.append(step.edge)
                    cd.append(step.sign)
                else:
                    e, d = step
                    ce.append(int(e))
                    cd.append(1 if d > 0 else -1)
            ptr.append(len(ce))
        return cls(n_vertices, src, dst, ptr, ce, cd, boundary, coords, polys)

    def to_lists(self):
        """Inverse of :meth:`from_lists` (faces as ``(edge, dir)`` pairs)."""
        edges = list(zip(self.edge_src.tolist(), self.edge_dst.tolist()))
        faces = []
        for f in range(self.n_faces):
            es, ds = self.face_steps(f)
            faces.append(list(zip(es.tolist(), ds.tolist())))
        coords = None if self.coords is None else self.coords.tolist()
        polys = None if self.polys is None else [
            None if p is None else p.tolist() for p in self.polys]
        return self._n_vertices, edges, faces, sorted(self.boundary), coords, polys

    def without_geometry(self) -> CombSurface:
        return CombSurface(self._n_vertices, self.edge_src, self.edge_dst,
                           self.face_ptr, self.cycle_edge, self.cycle_dir,
                           self.boundary)

    # -- basic queries ----------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return self._n_vertices

    @property
    def n_edges(self) -> int:
        return len(self.edge_src)

    @property
    def n_faces(self) -> int:
        return len(self.face_ptr) - 1

    @property
    def counts(self) -> tuple[int, int, int]:
        return self.n_vertices, self.n_edges, self.n_faces

    @property
    def has_geometry(self) -> bool:
        return self.coords is not None

    def tail(self, de: DirectedEdge) -> int:
        return int(self.edge_src[de.edge] if de.forward else self.edge_dst[de.edge])

    def head(self, de: DirectedEdge) -> int:
        return int(self.edge_dst[de.edge] if de.forward else self.edge_src[de.edge])

    def face_steps(self, f: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.face_ptr[f], self.face_ptr[f + 1]
        return self.cycle_edge[lo:hi], self.cycle_dir[lo:hi]

    def face_cycle(self, f: int) -> list[DirectedEdge]:
        es, ds = self.face_steps(f)
        return [DirectedEdge(int(e), bool(d > 0)) for e, d in zip(es, ds)]

    @property
    def face_of_slot(self) -> np.ndarray:
        """Face id owning each cycle slot."""
        if "face_of_slot" not in self._cache:
            arr = np.repeat(np.arange(self.n_faces), np.diff(self.face_ptr))
            arr.flags.writeable = False
            self._cache["face_of_slot"] = arr
        return self._cache["face_of_slot"]

    def slot_tails(self) -> np.ndarray:
        e, d = self.cycle_edge, self.cycle_dir
        return np.where(d > 0, self.edge_src[e], self.edge_dst[e])

    def slot_heads(self) -> np.ndarray:
        e, d = self.cycle_edge, self.cycle_dir
        return np.where(d > 0, self.edge_dst[e], self.edge_src[e])

    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_edges, dtype=bool)
        if self.boundary:
            mask[sorted(self.boundary)] = True
        return mask

    def edge_polyline(self, e: int) -> np.ndarray:
        """Polyline of edge ``e`` from source to target."""
        if self.coords is None:
            raise MeshError("surface has no geometry")
        if self.polys is not None and self.polys[e] is not None:
            return self.polys[e]
        return np.array([self.coords[self.edge_src[e]], self.coords[self.edge_dst[e]]])

    def vertex_components(self) -> np.ndarray:
        """Component label per vertex, labels numbered by smallest vertex."""
        if "vcomp" in self._cache:
            return self._cache["vcomp"]
        adj = self.vertex_adjacency()
        label = np.full(self.n_vertices, -1, dtype=np.int64)
        nxt = 0
        for start in range(self.n_vertices):
            if label[start] >= 0:
                continue
            label[start] = nxt
            queue = deque([start])
            while queue:
                v = queue.popleft()
                for _, w, _ in adj[v]:
                    if label[w] < 0:
                        label[w] = nxt
                        queue.append(w)
            nxt += 1
        label.flags.writeable = False
        self._cache["vcomp"] = label
        return label

    def vertex_adjacency(self) -> list[list[tuple[int, int, bool]]]:
        """Per vertex, ``(edge, other_end, forward)`` in ascending edge id.

        A loop edge is listed twice at its vertex (once each way).
        """
        if "adj" in self._cache:
            return self._cache["adj"]
        adj: list[list[tuple[int, int, bool]]] = [[] for _ in range(self.n_vertices)]
        for e, (a, b) in enumerate(zip(self.edge_src.tolist(), self.edge_dst.tolist())):
            adj[a].append((e, b, True))
            adj[b].append((e, a, False))
        self._cache["adj"] = adj
        return adj

    def __repr__(self) -> str:
        v, e, f = self.counts
        geo = ", geometry" if self.has_geometry else ""
        return f"CombSurface(V={v}, E={e}, F={f}, boundary={len(self.boundary)}{geo})"


# -- file format ----------------------------------------------------------

def _dense(items, kind: str) -> list:
    if not isinstance(items, list):
        raise MeshParseError("expected a list", kind)
    by_id = {}
    for k, item in enumerate(items):
        if not isinstance(item, dict) or "id" not in item:
            raise MeshParseError("entry must be an object with an 'id'", f"{kind}[{k}]")
        i = item["id"]
        if not isinstance(i, int) or isinstance(i, bool):
            raise MeshParseError("id must be an integer", f"{kind}[{k}].id")
        if i in by_id:
            raise MeshParseError(f"duplicate id {i}", f"{kind}[{k}].id")
        by_id[i] = item
    if set(by_id) != set(range(len(items))):
        raise MeshParseError("ids must be dense from 0", kind)
    return [by_id[i] for i in range(len(items))]


def _point(p, locus: str) -> tuple[float, float]:
    if not (isinstance(p, list) and len(p) == 2
            and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in p)):
        raise MeshParseError("expected [x, y]", locus)
    return float(p[0]), float(p[1])


def _ref(value, n: int, kind: str, locus: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise MeshParseError(f"expected an integer {kind} id", locus)
    if not 0 <= value < n:
        raise MeshParseError(f"dangling {kind} id {value}", locus)
    return value


def load_mesh(text: str) -> CombSurface:
    """Parse a mesh file.  Axioms are not checked here; see :func:`validate`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MeshParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    if not isinstance(doc, dict):
        raise MeshParseError("top level must be an object", "line 1")
    for key in ("vertices", "edges", "faces"):
        if key not in doc:
            raise MeshParseError("missing field", key)
    verts = _dense(doc["vertices"], "vertices")
    edges = _dense(doc["edges"], "edges")
    faces = _dense(doc["faces"], "faces")
    nv, ne = len(verts), len(edges)

    has_xy = ["xy" in v for v in verts]
    coords = None
    if any(has_xy):
        if not all(has_xy):
            raise MeshParseError("xy must be given for every vertex or none", "vertices")
        coords = [_point(v["xy"], f"vertices[{i}].xy") for i, v in enumerate(verts)]

    pairs = []
    polys = []
    for i, e in enumerate(edges):
        for key in ("src", "dst"):
            if key not in e:
                raise MeshParseError("missing field", f"edges[{i}].{key}")
        pairs.append((_ref(e["src"], nv, "vertex", f"edges[{i}].src"),
                      _ref(e["dst"], nv, "vertex", f"edges[{i}].dst")))
        if "poly" in e:
            if coords is None:
                raise MeshParseError("poly requires vertex coordinates", f"edges[{i}].poly")
            pts = e["poly"]
            if not isinstance(pts, list) or len(pts) < 2:
                raise MeshParseError("poly needs at least two points", f"edges[{i}].poly")
            polys.append([_point(p, f"edges[{i}].poly[{k}]") for k, p in enumerate(pts)])
        else:
            polys.append(None)

    cycles = []
    for i, f in enumerate(faces):
        cyc = f.get("cycle")
        if not isinstance(cyc, list):
            raise MeshParseError("cycle must be a list", f"faces[{i}].cycle")
        steps = []
        for k, step in enumerate(cyc):
            locus = f"faces[{i}].cycle[{k}]"
            if not (isinstance(step, list) and len(step) == 2):
                raise MeshParseError("expected [edgeId, dir]", locus)
            e = _ref(step[0], ne, "edge", locus)
            if step[1] not in (1, -1) or isinstance(step[1], bool):
                raise MeshParseError("dir must be 1 or -1", locus)
            steps.append((e, step[1]))
        cycles.append(steps)

    bnd = doc.get("boundary", [])
    if not isinstance(bnd, list):
        raise MeshParseError("expected a list", "boundary")
    boundary = [_ref(e, ne, "edge", f"boundary[{k}]") for k, e in enumerate(bnd)]
    return CombSurface.from_lists(nv, pairs, cycles, boundary, coords,
                                  polys if any(p is not None for p in polys) else None)


def dump_mesh(s: CombSurface) -> str:
    """Serialize to the mesh file format (inverse of :func:`load_mesh`)."""
    verts = []
    for v in range(s.n_vertices):
        item = {"id": v}
        if s.coords is not None:
            item["xy"] = [float(c) for c in s.coords[v]]
        verts.append(item)
    edges = []
    for e in range(s.n_edges):
        item = {"id": e, "src": int(s.edge_src[e]), "dst": int(s.edge_dst[e])}
        if s.polys is not None and s.polys[e] is not None:
            item["poly"] = s.polys[e].tolist()
        edges.append(item)
    faces = []
    for f in range(s.n_faces):
        es, ds = s.face_steps(f)
        faces.append({"id": f, "cycle": [[int(e), int(d)] for e, d in zip(es, ds)]})
    doc = {"vertices": verts, "edges": edges, "faces": faces,
           "boundary": sorted(s.boundary)}
    return json.dumps(doc, indent=1)


# -- validation -------------------------------------------------------------

AXIOMS = ("vertex-degree", "closed-walk", "simple-cycle", "two-face", "geometry")


@dataclass(frozen=True)
class Violation:
    axiom: str
    ids: tuple[int, ...]
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": [
            {"axiom": v.axiom, "ids": list(v.ids), "message": v.message}
            for v in self.violations]}


def _duplicated_per_face(face_of_slot: np.ndarray, keys: np.ndarray, n: int) -> np.ndarray:
    """Faces in which some key occurs twice."""
    if len(keys) == 0:
        return np.empty(0, dtype=np.int64)
    combined = face_of_slot * max(n, 1) + keys
    srt = np.sort(combined)
    dup = srt[1:][srt[1:] == srt[:-1]]
    return np.unique(dup // max(n, 1))


def validate(s: CombSurface) -> ValidationReport:
    """Check the combinatorial-surface axioms; violations are data."""
    found: dict[str, list[Violation]] = {a: [] for a in AXIOMS}

    deg = np.bincount(np.concatenate([s.edge_src, s.edge_dst]), minlength=s.n_vertices)
    for v in np.flatnonzero(deg == 0):
        found["vertex-degree"].append(
            Violation("vertex-degree", (int(v),), f"vertex {v} is not an endpoint of any edge"))

    sizes = np.diff(s.face_ptr)
    fos = s.face_of_slot
    tails, heads = s.slot_tails(), s.slot_heads()
    nxt = np.arange(len(tails)) + 1
    if len(nxt):
        last = s.face_ptr[1:][sizes > 0] - 1
        nxt[last] = s.face_ptr[:-1][sizes > 0]
    open_faces = set(np.unique(fos[heads != tails[nxt]]).tolist()) if len(nxt) else set()
    open_faces |= set(np.flatnonzero(sizes == 0).tolist())
    for f in sorted(open_faces):
        found["closed-walk"].append(
            Violation("closed-walk", (f,), f"boundary of face {f} is not a closed directed walk"))

    rep_v = set(_duplicated_per_face(fos, tails, s.n_vertices).tolist())
    rep_e = set(_duplicated_per_face(fos, s.cycle_edge, s.n_edges).tolist())
    for f in sorted((rep_v | rep_e) - open_faces):
        found["simple-cycle"].append(
            Violation("simple-cycle", (f,), f"boundary of face {f} is not a simple cycle"))

    uses = np.bincount(s.cycle_edge, minlength=s.n_edges)
    bmask = s.boundary_mask()
    expected = np.where(bmask, 1, 2)
    for e in np.flatnonzero(uses != expected):
        where = "boundary" if bmask[e] else "interior"
        found["two-face"].append(Violation(
            "two-face", (int(e),),
            f"{where} edge {e} appears {uses[e]} times in face boundaries, expected {expected[e]}"))

    if s.polys is not None:
        for e, p in enumerate(s.polys):
            if p is None:
                continue
            a, b = s.coords[s.edge_src[e]], s.coords[s.edge_dst[e]]
            scale = 1e-9 * max(1.0, float(np.abs(p).max()))
            if np.abs(p[0] - a).max() > scale or np.abs(p[-1] - b).max() > scale:
                found["geometry"].append(Violation(
                    "geometry", (e,), f"polyline of edge {e} does not join its endpoints"))

    return ValidationReport(tuple(v for a in AXIOMS for v in found[a]))


def euler_characteristic(s: CombSurface) -> int:
    return s.n_vertices - s.n_edges + s.n_faces


# -- orientation ------------------------------------------------------------

@dataclass(frozen=True)
class Orientation:
    """Sign per face applied to its stored boundary cycle.

    ``standard`` records that the signs were derived from planar geometry
    (every face on the left of its induced boundary).
    """

    signs: tuple[int, ...]
    standard: bool = False

    def reversed(self) -> Orientation:
        return Orientation(tuple(-s for s in self.signs), False)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.signs, dtype=np.int64)


@dataclass(frozen=True)
class NonOrientableWitness:
    """A closed chain of face adjacencies forcing a sign conflict.

    ``faces[i]`` and ``faces[i + 1]`` (cyclically) share ``edges[i]``.
    """

    faces: tuple[int, ...]
    edges: tuple[int, ...]


def slot_signs(s: CombSurface, o: Orientation) -> np.ndarray:
    """Induced traversal sign of every cycle slot under ``o``."""
    signs = o.as_array()
    if len(signs) != s.n_faces:
        raise MeshError("orientation does not match the surface")
    return signs[s.face_of_slot] * s.cycle_dir


def is_consistent(s: CombSurface, o: Orientation) -> bool:
    """Do adjacent faces induce opposite directions on every shared edge?"""
    induced = slot_signs(s, o)
    uses = np.bincount(s.cycle_edge, minlength=s.n_edges)
    total = np.bincount(s.cycle_edge, weights=induced, minlength=s.n_edges)
    return bool(np.all(total[uses == 2] == 0))


def induced_cycle(s: CombSurface, o: Orientation, f: int) -> list[DirectedEdge]:
    cyc = s.face_cycle(f)
    if o.signs[f] > 0:
        return cyc
    return [de.reversed() for de in reversed(cyc)]


def _shoelace_terms(s: CombSurface) -> np.ndarray:
    """Twice the signed-area contribution of each edge in stored direction."""
    xy = s.coords
    a, b = xy[s.edge_src], xy[s.edge_dst]
    terms = a[:, 0] * b[:, 1] - b[:, 0] * a[:, 1]
    if s.polys is not None:
        for e, p in enumerate(s.polys):
            if p is not None:
                terms[e] = float(np.sum(p[:-1, 0] * p[1:, 1] - p[1:, 0] * p[:-1, 1]))
    return terms


def face_signed_areas(s: CombSurface) -> np.ndarray:
    """Signed area of each face's stored boundary polygon."""
    if not s.has_geometry:
        raise MeshError("surface has no geometry")
    w = _shoelace_terms(s)[s.cycle_edge] * s.cycle_dir
    return 0.5 * np.bincount(s.face_of_slot, weights=w, minlength=s.n_faces)


def _require_valid(s: CombSurface) -> None:
    report = validate(s)
    if not report.ok:
        first = report.violations[0]
        raise MeshError(f"invalid surface ({len(report.violations)} violations; "
                        f"first: {first.axiom}: {first.message})")


def orient(s: CombSurface) -> Union[Orientation, NonOrientableWitness]:
    """Orient ``s``.

    With planar geometry the standard orientation is returned (signs from
    the shoelace area of each face).  Otherwise faces are signed by a
    breadth-first sweep over face adjacencies, the smallest face of each
    component getting +1; a conflict yields a :class:`NonOrientableWitness`.
    """
    _require_valid(s)
    if s.has_geometry:
        area = face_signed_areas(s)
        zero = np.flatnonzero(area == 0.0)
        if len(zero):
            raise MeshError(f"face {int(zero[0])} has zero signed area")
        o = Orientation(tuple(int(x) for x in np.where(area > 0, 1, -1)), standard=True)
        if not is_consistent(s, o):
            raise MeshError("geometry does not describe a planar embedding")
        return o
    return _orient_combinatorial(s)


def _orient_combinatorial(s: CombSurface):
    slots: list[list[tuple[int, int, int]]] = [[] for _ in range(s.n_edges)]
    fos = s.face_of_slot.tolist()
    for k, (f, e, d) in enumerate(zip(fos, s.cycle_edge.tolist(), s.cycle_dir.tolist())):
        slots[e].append((k, f, d))

    sign = [0] * s.n_faces
    parent: list[tuple[int, int] | None] = [None] * s.n_faces

    def chain(f):
        out = [f]
        while parent[out[-1]] is not None:
            out.append(parent[out[-1]][0])
        return out

    for root in range(s.n_faces):
        if sign[root]:
            continue
        sign[root] = 1
        queue = deque([root])
        while queue:
            f = queue.popleft()
            for k in range(s.face_ptr[f], s.face_ptr[f + 1]):
                e, d = int(s.cycle_edge[k]), int(s.cycle_dir[k])
                for k2, g, d2 in slots[e]:
                    if k2 == k:
                        continue
                    if g == f:
                        # edge used twice by one face: traversals must be opposite
                        if d2 == d:
                            return NonOrientableWitness((f,), (e,))
                        continue
                    want = -sign[f] * d * d2
                    if sign[g] == 0:
                        sign[g] = want
                        parent[g] = (f, e)
                        queue.append(g)
                    elif sign[g] != want:
                        return _witness(chain(f), chain(g), e, parent)
    return Orientation(tuple(sign))


def _witness(cf: list[int], cg: list[int], e: int, parent) -> NonOrientableWitness:
    common = set(cf) & set(cg)
    lca = next(x for x in cf if x in common)
    up = cf[:cf.index(lca) + 1]            # f ... lca
    down = cg[:cg.index(lca)][::-1]        # (below lca) ... g
    faces = up + down
    edges = [parent[x][1] for x in up[:-1]]
    edges += [parent[x][1] for x in down]
    edges.append(e)                        # g -> f closes the cycle
    return NonOrientableWitness(tuple(faces), tuple(edges))


def boundary(s: CombSurface, o: Orientation):
    """Boundary components as closed edge loops with induced orientation.

    Each loop starts at its smallest edge id; loops are ordered by that id.
    """
    from .paths import EdgePath

    if not is_consistent(s, o):
        raise MeshError("orientation is not consistent with the surface")
    induced = slot_signs(s, o)
    direction = {}
    for e, d in zip(s.cycle_edge.tolist(), induced.tolist()):
        if e in s.boundary:
            direction[e] = d
    missing = s.boundary - set(direction)
    if missing:
        raise MeshError(f"boundary edge {min(missing)} lies on no face")

    out_at: dict[int, list[DirectedEdge]] = {}
    for e in sorted(direction):
        de = DirectedEdge(e, direction[e] > 0)
        out_at.setdefault(s.tail(de), []).append(de)

    used: set[int] = set()
    loops = []
    for e in sorted(direction):
        if e in used:
            continue
        start = DirectedEdge(e, direction[e] > 0)
        steps = [start]
        used.add(e)
        origin = s.tail(start)
        cur = s.head(start)
        while cur != origin:
            options = [de for de in out_at.get(cur, []) if de.edge not in used]
            if not options:
                raise MeshError(f"boundary does not close at vertex {cur}")
            steps.append(options[0])
            used.add(options[0].edge)
            cur = s.head(options[0])
        loops.append(EdgePath.from_steps(s, steps))
    return loops


# -- subdivision -------------------------------------------------------------

@dataclass(frozen=True)
class EdgeSplit:
    edge: int


@dataclass(frozen=True)
class FaceSplit:
    face: int
    u: int
    v: int


def _split_polyline(p: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    seg = np.linalg.norm(np.diff(p, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    half = cum[-1] / 2
    k = int(np.searchsorted(cum, half, side="right")) - 1
    k = min(max(k, 0), len(seg) - 1)
    t = 0.0 if seg[k] == 0 else (half - cum[k]) / seg[k]
    mid = p[k] + t * (p[k + 1] - p[k])
    first = np.vstack([p[:k + 1], mid])
    second = np.vstack([mid, p[k + 1:]])
    return mid, first, second


def subdivide(s: CombSurface, move: Union[EdgeSplit, FaceSplit]) -> CombSurface:
    """Apply an edge split or a face split; Euler characteristic is preserved."""
    nv, edges, faces, bnd, coords, polys = s.to_lists()
    if polys is None and coords is not None:
        polys = [None] * len(edges)

    if isinstance(move, EdgeSplit):
        e = move.edge
        if not 0 <= e < len(edges):
            raise MeshError(f"no edge {e}")
        a, b = edges[e]
        m, new = nv, len(edges)
        edges[e] = (a, m)
        edges.append((m, b))
        for cyc in faces:
            k = 0
            while k < len(cyc):
                ed, d = cyc[k]
                if ed == e:
                    cyc[k:k + 1] = [(e, 1), (new, 1)] if d > 0 else [(new, -1), (e, -1)]
                    k += 2
                else:
                    k += 1
        if e in bnd:
            bnd.append(new)
        if coords is not None:
            p = polys[e]
            if p is None:
                mid = ((coords[a][0] + coords[b][0]) / 2, (coords[a][1] + coords[b][1]) / 2)
                polys.append(None)
            else:
                mid, first, second = _split_polyline(np.asarray(p, float))
                polys[e] = first.tolist()
                polys.append(second.tolist())
            coords.append(list(mid))
        return CombSurface.from_lists(nv + 1, edges, faces, bnd, coords, polys)

    if isinstance(move, FaceSplit):
        f, u, v = move.face, move.u, move.v
        if not 0 <= f < len(faces):
            raise MeshError(f"no face {f}")
        if u == v:
            raise MeshError("face split needs two distinct vertices")
        cyc = faces[f]
        tails = [s.tail(DirectedEdge(e, d > 0)) for e, d in cyc]
        if u not in tails or v not in tails:
            raise MeshError(f"vertices {u}, {v} do not both lie on face {f}")
        if tails.count(u) > 1 or tails.count(v) > 1:
            raise MeshError("split would produce a non-simple cycle")
        i, j = tails.index(u), tails.index(v)
        n = len(cyc)
        part_uv = [cyc[(i + k) % n] for k in range((j - i) % n)]
        part_vu = [cyc[(j + k) % n] for k in range((i - j) % n)]
        new = len(edges)
        edges.append((u, v))
        faces[f] = part_uv + [(new, -1)]
        faces.append(part_vu + [(new, 1)])
        if coords is not None:
            polys.append(None)
        return CombSurface.from_lists(nv, edges, faces, bnd, coords, polys)

    raise MeshError(f"unknown move {move!r}")
