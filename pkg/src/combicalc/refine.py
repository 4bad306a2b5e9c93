"""Discretizing smooth planar vector fields onto refining grid meshes.

The harness here compares the exact combinatorial identities with their
smooth counterparts: whirl over shrinking squares against scalar curl, and
the boundary circulation of a V/H region against a midpoint Riemann sum of
scalar curl.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .calculus import boundary_integral, check_whirl_theorem, whirl
from .fields import CVF
from .mesh import CombSurface, MeshError, orient
from .quadrature import Quadrature, QuadratureError

__all__ = [
    "SmoothField", "VHRegion", "Quadrature", "QuadratureError", "FIELDS", "REGIONS",
    "grid_mesh", "discretize", "whirl_curl_convergence", "mvt_interval_check",
    "green_residual", "green_sweep", "loglog_slope", "rows_to_csv",
]

Fn = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SmoothField:
    """Planar vector field (M, N) with analytic first partials."""

    name: str
    M: Fn
    N: Fn
    dMdx: Fn
    dMdy: Fn
    dNdx: Fn
    dNdy: Fn

    def __call__(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        return _full(self.M(x, y), x), _full(self.N(x, y), x)

    def scurl(self, x, y) -> np.ndarray:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        return _full(self.dNdx(x, y), x) - _full(self.dMdy(x, y), x)

    def jacobian(self, x, y) -> np.ndarray:
        """``[[dM/dx, dM/dy], [dN/dx, dN/dy]]`` stacked on the last two axes."""
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        rows = [[_full(self.dMdx(x, y), x), _full(self.dMdy(x, y), x)],
                [_full(self.dNdx(x, y), x), _full(self.dNdy(x, y), x)]]
        return np.moveaxis(np.array(rows), (0, 1), (-2, -1))

    def partials_error(self, x, y, step: float = 1e-6) -> float:
        """Largest relative gap between analytic partials and central differences."""
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        worst = 0.0
        for comp, dx_fn, dy_fn in ((self.M, self.dMdx, self.dMdy), (self.N, self.dNdx, self.dNdy)):
            fx = (comp(x + step, y) - comp(x - step, y)) / (2 * step)
            fy = (comp(x, y + step) - comp(x, y - step)) / (2 * step)
            for fd, exact in ((fx, dx_fn(x, y)), (fy, dy_fn(x, y))):
                fd = _full(fd, x)
                exact = _full(exact, x)
                scale = np.maximum(1.0, np.abs(exact))
                worst = max(worst, float(np.max(np.abs(fd - exact) / scale)))
        return worst


def _full(v, like: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.asarray(v, dtype=float), np.shape(like)).astype(float)


def _zero(x, y):
    return np.zeros_like(x)


def _one(x, y):
    return np.ones_like(x)


def _r2(x, y):
    return x * x + y * y


FIELDS: dict[str, SmoothField] = {f.name: f for f in [
    SmoothField("zero", _zero, _zero, _zero, _zero, _zero, _zero),
    SmoothField("const", _one, _zero, _zero, _zero, _zero, _zero),
    SmoothField("rot", lambda x, y: -y, lambda x, y: x,
                _zero, lambda x, y: -np.ones_like(x), _one, _zero),
    # gradient of x*y
    SmoothField("grad_xy", lambda x, y: y, lambda x, y: x, _zero, _one, _one, _zero),
    # gradient of x^3 y - 2 x y^2
    SmoothField("grad_poly",
                lambda x, y: 3 * x**2 * y - 2 * y**2, lambda x, y: x**3 - 4 * x * y,
                lambda x, y: 6 * x * y, lambda x, y: 3 * x**2 - 4 * y,
                lambda x, y: 3 * x**2 - 4 * y, lambda x, y: -4 * x),
    SmoothField("x2", _zero, lambda x, y: x**2, _zero, _zero, lambda x, y: 2 * x, _zero),
    SmoothField("y2", lambda x, y: y**2, _zero, _zero, lambda x, y: 2 * y, _zero, _zero),
    SmoothField("x3", _zero, lambda x, y: x**3, _zero, _zero, lambda x, y: 3 * x**2, _zero),
    SmoothField("cubic", lambda x, y: -y**3, lambda x, y: x**3,
                _zero, lambda x, y: -3 * y**2, lambda x, y: 3 * x**2, _zero),
    SmoothField("expsin", lambda x, y: -y * np.exp(x), lambda x, y: x * np.sin(y),
                lambda x, y: -y * np.exp(x), lambda x, y: -np.exp(x),
                lambda x, y: np.sin(y), lambda x, y: x * np.cos(y)),
    SmoothField("vortex", lambda x, y: -y / _r2(x, y), lambda x, y: x / _r2(x, y),
                lambda x, y: 2 * x * y / _r2(x, y)**2,
                lambda x, y: (y * y - x * x) / _r2(x, y)**2,
                lambda x, y: (y * y - x * x) / _r2(x, y)**2,
                lambda x, y: -2 * x * y / _r2(x, y)**2),
]}

# fields whose scalar curl is not affine, so midpoint sums carry a real O(h^2) error
SMOOTH_NONAFFINE_CURL = ("cubic", "expsin")


# -- regions and grid meshes ----------------------------------------------

@dataclass(frozen=True)
class VHRegion:
    """Union of closed axis-aligned cells ``(i, j)`` of size ``h0``.

    Cell ``(i, j)`` is ``[ox + i h0, ox + (i+1) h0] x [oy + j h0, oy + (j+1) h0]``.
    """

    h0: float
    origin: tuple[float, float]
    cells: frozenset

    def __post_init__(self):
        object.__setattr__(self, "cells", frozenset((int(i), int(j)) for i, j in self.cells))
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        if not self.h0 > 0:
            raise ValueError("cell size must be positive")

    @classmethod
    def from_json(cls, text: str) -> VHRegion:
        doc = json.loads(text)
        try:
            return cls(float(doc["h0"]), tuple(doc.get("origin", (0.0, 0.0))),
                       frozenset(tuple(c) for c in doc["cells"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"bad region file: {exc}") from None

    def to_json(self) -> str:
        return json.dumps({"h0": self.h0, "origin": list(self.origin),
                           "cells": [list(c) for c in sorted(self.cells)]})

    @property
    def area(self) -> float:
        return len(self.cells) * self.h0 * self.h0

    def contains(self, x: float, y: float) -> bool:
        i = (x - self.origin[0]) / self.h0
        j = (y - self.origin[1]) / self.h0
        cands = {(math.floor(i), math.floor(j))}
        for di in (0, -1):
            for dj in (0, -1):
                if (i + di).is_integer() or (j + dj).is_integer():
                    cands.add((math.floor(i) + di, math.floor(j) + dj))
        return any(c in self.cells for c in cands)


def square(side: float = 1.0, origin=(0.0, 0.0)) -> VHRegion:
    return VHRegion(side, origin, frozenset({(0, 0)}))


def holed_strip(holes: int, h0: float = 1.0) -> VHRegion:
    """A 3-row strip of cells with ``holes`` isolated square holes."""
    width = 2 * holes + 1
    cells = {(i, j) for i in range(width) for j in range(3)}
    cells -= {(2 * k + 1, 1) for k in range(holes)}
    return VHRegion(h0, (0.0, 0.0), frozenset(cells))


REGIONS: dict[str, VHRegion] = {
    "square": square(),
    "lshape": VHRegion(1.0, (0.0, 0.0), frozenset({(0, 0), (1, 0), (0, 1)})),
    "holed_square": VHRegion(1.0, (-1.5, -1.5),
                             frozenset({(i, j) for i in range(3) for j in range(3)} - {(1, 1)})),
    "pants": holed_strip(2),
}


def grid_mesh(r: VHRegion, level: int) -> CombSurface:
    """Split every cell into ``2**level x 2**level`` squares.

    Vertices are numbered row by row (y, then x); horizontal edges point in
    +x and come first, vertical edges point in +y.  Face cycles run
    counter-clockwise, so the stored cycles are the standard orientation.
    """
    if level < 0:
        raise ValueError("level must be non-negative")
    if not r.cells:
        raise MeshError("region has no cells")
    k = 2 ** level
    base = np.array(sorted(r.cells), dtype=np.int64)
    sub = np.arange(k)
    I = (base[:, 0:1, None] * k + sub[None, :, None]).repeat(k, axis=2).reshape(-1)
    J = (base[:, 1:2, None] * k + sub[None, None, :]).repeat(k, axis=1).reshape(-1)
    order = np.lexsort((I, J))
    I, J = I[order], J[order]
    i0, j0 = I.min(), J.min()
    I, J = I - i0, J - j0
    width = int(I.max()) + 2

    def key(a, b):
        return b * width + a

    corners = np.concatenate([key(I, J), key(I + 1, J), key(I + 1, J + 1), key(I, J + 1)])
    vkeys = np.unique(corners)
    hkeys = np.unique(np.concatenate([key(I, J), key(I, J + 1)]))
    vtkeys = np.unique(np.concatenate([key(I, J), key(I + 1, J)]))

    def vid(kk):
        return np.searchsorted(vkeys, kk)

    nh = len(hkeys)
    h_src = vid(hkeys)
    h_dst = vid(hkeys + 1)
    v_src = vid(vtkeys)
    v_dst = vid(vtkeys + width)
    edge_src = np.concatenate([h_src, v_src])
    edge_dst = np.concatenate([h_dst, v_dst])

    bottom = np.searchsorted(hkeys, key(I, J))
    top = np.searchsorted(hkeys, key(I, J + 1))
    left = nh + np.searchsorted(vtkeys, key(I, J))
    right = nh + np.searchsorted(vtkeys, key(I + 1, J))
    cycle_edge = np.stack([bottom, right, top, left], axis=1).reshape(-1)
    cycle_dir = np.tile(np.array([1, 1, -1, -1]), len(I))
    face_ptr = np.arange(len(I) + 1) * 4

    uses = np.bincount(cycle_edge, minlength=len(edge_src))
    bnd = np.flatnonzero(uses == 1)

    h = r.h0 / k
    vi = vkeys % width + i0
    vj = vkeys // width + j0
    coords = np.stack([r.origin[0] + vi * h, r.origin[1] + vj * h], axis=1)
    return CombSurface(len(vkeys), edge_src, edge_dst, face_ptr, cycle_edge, cycle_dir,
                       bnd.tolist(), coords)


def face_centers_areas(s: CombSurface) -> tuple[np.ndarray, np.ndarray]:
    """Vertex-average centre and absolute polygon area of each face."""
    from .mesh import face_signed_areas

    tails = s.slot_tails()
    sizes = np.diff(s.face_ptr)
    cx = np.bincount(s.face_of_slot, weights=s.coords[tails, 0], minlength=s.n_faces) / sizes
    cy = np.bincount(s.face_of_slot, weights=s.coords[tails, 1], minlength=s.n_faces) / sizes
    return np.stack([cx, cy], axis=1), np.abs(face_signed_areas(s))


def discretize(F: SmoothField, s: CombSurface, q: Quadrature = Quadrature()) -> CVF:
    """Canonical CVF whose value on each edge is the line integral of ``F``
    along the edge geometry in its stored direction."""
    if not s.has_geometry:
        raise MeshError("discretize needs edge geometry")
    starts, ends, owner = [], [], []
    straight = np.ones(s.n_edges, dtype=bool)
    if s.polys is not None:
        for e, p in enumerate(s.polys):
            if p is not None:
                straight[e] = False
                starts.append(p[:-1])
                ends.append(p[1:])
                owner.append(np.full(len(p) - 1, e))
    se = np.flatnonzero(straight)
    starts.append(s.coords[s.edge_src[se]])
    ends.append(s.coords[s.edge_dst[se]])
    owner.append(se)
    vals = q.segment_integrals(F, np.concatenate(starts), np.concatenate(ends))
    return CVF.canonical(np.bincount(np.concatenate(owner), weights=vals, minlength=s.n_edges))


# -- whirl versus curl ------------------------------------------------------

@dataclass(frozen=True)
class CurlRow:
    level: int
    h: float
    whirl_per_area: float
    scurl: float
    error: float


def whirl_curl_convergence(F: SmoothField, p: tuple[float, float], levels: Iterable[int],
                           h0: float = 1.0, q: Quadrature = Quadrature(),
                           region: Optional[VHRegion] = None) -> list[CurlRow]:
    """whirl(F_G)(R_n) / area(R_n) against scurl F(p) on squares centred at
    ``p`` with side ``h0 * 2**-n``, each meshed by its four corners."""
    px, py = float(p[0]), float(p[1])
    if region is not None and not region.contains(px, py):
        raise ValueError(f"point {p} lies outside the region")
    target = float(F.scurl(np.array(px), np.array(py)))
    rows = []
    for n in levels:
        h = h0 * 2.0 ** -n
        s = grid_mesh(square(h, (px - h / 2, py - h / 2)), 0)
        o = orient(s)
        w = float(whirl(s, discretize(F, s, q), o).values[0])
        ratio = w / (h * h)
        rows.append(CurlRow(n, h, ratio, target, abs(ratio - target)))
    return rows


@dataclass(frozen=True)
class MVTResult:
    circulation_per_area: float
    scurl_min: float
    scurl_max: float
    widening: float
    contained: bool


def mvt_interval_check(F: SmoothField, rect: Sequence[float], samples: int = 33,
                       q: Quadrature = Quadrature()) -> MVTResult:
    """Is the circulation per area of ``rect`` a value scurl takes on it?

    ``rect`` is ``(x0, x1, y0, y1)``.  One component of ``F`` must vanish.
    The sampled scurl range is widened by the largest jump between
    neighbouring samples, bounding what the grid can miss.
    """
    x0, x1, y0, y1 = map(float, rect)
    if not (x1 > x0 and y1 > y0):
        raise ValueError("rectangle must have positive area")
    xs, ys = np.meshgrid(np.linspace(x0, x1, samples), np.linspace(y0, y1, samples),
                         indexing="ij")
    m, n = F(xs, ys)
    if np.any(m != 0) and np.any(n != 0):
        raise ValueError("one component of the field must vanish on the rectangle")
    s = grid_mesh(VHRegion(1.0, (0.0, 0.0), frozenset({(0, 0)})), 0)
    # a single rectangular face: reuse the square mesh with stretched coordinates
    coords = np.array(s.coords)
    coords[:, 0] = x0 + coords[:, 0] * (x1 - x0)
    coords[:, 1] = y0 + coords[:, 1] * (y1 - y0)
    s = CombSurface(s.n_vertices, s.edge_src, s.edge_dst, s.face_ptr, s.cycle_edge,
                    s.cycle_dir, s.boundary, coords)
    c = whirl(s, discretize(F, s, q), orient(s)).values[0] / ((x1 - x0) * (y1 - y0))
    curl = F.scurl(xs, ys)
    jumps = [0.0]
    if samples > 1:
        jumps += [float(np.max(np.abs(np.diff(curl, axis=0)))),
                  float(np.max(np.abs(np.diff(curl, axis=1))))]
    widen = max(jumps)
    lo, hi = float(curl.min()), float(curl.max())
    return MVTResult(float(c), lo, hi, widen, bool(lo - widen <= c <= hi + widen))


# -- Green's theorem on V/H regions ------------------------------------------

@dataclass(frozen=True)
class GreenRow:
    level: int
    h: float
    lhs: float
    rhs: float
    riemann_residual: float
    combinatorial_residual: float
    scale: float

    @property
    def residual(self) -> float:
        return self.riemann_residual

    @property
    def combinatorial_ok(self) -> bool:
        return abs(self.combinatorial_residual) <= 1e-12 * self.scale


def green_residual(r: VHRegion, F: SmoothField, level: int,
                   q: Quadrature = Quadrature()) -> GreenRow:
    """Both sides of Green's theorem on ``grid_mesh(r, level)``.

    ``lhs`` is the boundary integral of the discretized field, ``rhs`` the
    midpoint Riemann sum of scalar curl.  The combinatorial residual is the
    exact discrete identity (boundary integral minus total whirl); the
    Riemann residual is ``|lhs - rhs|``.
    """
    s = grid_mesh(r, level)
    o = orient(s)
    FG = discretize(F, s, q)
    chk = check_whirl_theorem(s, o, FG)
    centers, areas = face_centers_areas(s)
    curl = F.scurl(centers[:, 0], centers[:, 1])
    rhs = math.fsum((curl * areas).tolist())
    lhs = chk.boundary_integral
    return GreenRow(level, r.h0 / 2 ** level, lhs, rhs, abs(lhs - rhs), chk.residual,
                    chk.bound / 1e-12)


def green_sweep(r: VHRegion, F: SmoothField, levels: Iterable[int],
                q: Quadrature = Quadrature(), workers: int = 1) -> list[GreenRow]:
    levels = list(levels)
    if workers > 1 and len(levels) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda n: green_residual(r, F, n, q), levels))
    return [green_residual(r, F, n, q) for n in levels]


def loglog_slope(h: Sequence[float], err: Sequence[float]) -> float:
    """Least-squares slope of log(err) against log(h)."""
    return float(np.polyfit(np.log(np.asarray(h, float)), np.log(np.asarray(err, float)), 1)[0])


def rows_to_csv(rows: Sequence, columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        cells = []
        for c in columns:
            v = getattr(row, c)
            cells.append(repr(float(v)) if isinstance(v, (float, np.floating)) else v)
        w.writerow(cells)
    return buf.getvalue()
