"""tilt, tilt-bar, ebb and whirl, plus the exact identities they satisfy."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import CVF, FSF, VSF, FieldError
from .mesh import CombSurface, MeshError, Orientation, boundary, is_consistent, slot_signs


def _check(s: CombSurface, n: int, kind: str, field) -> None:
    if len(field) != n:
        raise FieldError(f"{kind} has {len(field)} entries, surface needs {n}")


def tilt(s: CombSurface, f: VSF) -> CVF:
    """Orient each edge toward its larger endpoint value; value is the rise.

    Ties keep the stored direction with value 0.
    """
    _check(s, s.n_vertices, "VSF", f)
    a = f.values[s.edge_src]
    b = f.values[s.edge_dst]
    forward = a <= b
    dirs = np.where(forward, 1, -1)
    values = np.where(forward, b - a, a - b)
    return CVF(dirs, values)


def tilt_bar(s: CombSurface, f: VSF) -> CVF:
    """Canonical CVF with value f(target) - f(source) on every stored edge."""
    _check(s, s.n_vertices, "VSF", f)
    return CVF.canonical(f.values[s.edge_dst] - f.values[s.edge_src])


def ebb(s: CombSurface, F: CVF) -> VSF:
    """Net outflow at each vertex: outgoing values minus incoming values."""
    _check(s, s.n_edges, "CVF", F)
    out_v = np.where(F.dirs > 0, s.edge_src, s.edge_dst)
    in_v = np.where(F.dirs > 0, s.edge_dst, s.edge_src)
    n = s.n_vertices
    total = np.bincount(out_v, weights=F.values, minlength=n) \
        - np.bincount(in_v, weights=F.values, minlength=n)
    return VSF(total)


def _require_oriented(s: CombSurface, o: Orientation) -> None:
    if len(o.signs) != s.n_faces:
        raise MeshError("orientation does not match the surface")
    if not is_consistent(s, o):
        raise MeshError("surface is not oriented by the given orientation")


def whirl(s: CombSurface, F: CVF, o: Orientation) -> FSF:
    """Circulation of ``F`` around each face's induced boundary."""
    _check(s, s.n_edges, "CVF", F)
    _require_oriented(s, o)
    terms = slot_signs(s, o) * F.signed[s.cycle_edge]
    return FSF(np.bincount(s.face_of_slot, weights=terms, minlength=s.n_faces))


def boundary_integral(s: CombSurface, F: CVF, o: Orientation) -> float:
    """Integral of ``F`` over the induced boundary of ``s``."""
    _check(s, s.n_edges, "CVF", F)
    _require_oriented(s, o)
    induced = slot_signs(s, o)
    mask = s.boundary_mask()[s.cycle_edge]
    terms = induced[mask] * F.signed[s.cycle_edge[mask]]
    return math.fsum(terms.tolist())


@dataclass(frozen=True)
class WhirlCheck:
    boundary_integral: float
    whirl_total: float
    residual: float
    bound: float

    @property
    def ok(self) -> bool:
        return abs(self.residual) <= self.bound


def check_whirl_theorem(s: CombSurface, o: Orientation, F: CVF,
                        rel_tol: float = 1e-12) -> WhirlCheck:
    """Boundary integral minus the total whirl (exactly zero in theory).

    ``bound`` is ``rel_tol * sum(|F(e)|)``.
    """
    w = whirl(s, F, o)
    lhs = boundary_integral(s, F, o)
    rhs = math.fsum(w.values.tolist())
    bound = rel_tol * math.fsum(np.abs(F.values).tolist())
    return WhirlCheck(lhs, rhs, lhs - rhs, bound)


def tiltawhirl_residual(s: CombSurface, o: Orientation, f: VSF) -> tuple[float, float]:
    """Largest |whirl(tilt f)| over faces and the bound ``1e-12 * sum|f|``."""
    w = whirl(s, tilt(s, f), o)
    worst = float(np.max(np.abs(w.values))) if len(w) else 0.0
    return worst, 1e-12 * math.fsum(np.abs(f.values).tolist())


def boundary_vertices(s: CombSurface) -> np.ndarray:
    if not s.boundary:
        return np.empty(0, dtype=np.int64)
    es = np.array(sorted(s.boundary))
    return np.unique(np.concatenate([s.edge_src[es], s.edge_dst[es]]))


@dataclass(frozen=True)
class EbbBalance:
    interior: float
    boundary: float
    residual: float
    bound: float

    @property
    def ok(self) -> bool:
        return abs(self.residual) <= self.bound


def ebb_balance(s: CombSurface, F: CVF, rel_tol: float = 1e-12) -> EbbBalance:
    """Total ebb over interior vertices versus boundary vertices.

    Every edge contributes +F(e) at one end and -F(e) at the other, so the
    two totals cancel: a discrete divergence balance.
    """
    e = ebb(s, F).values
    on_bnd = np.zeros(s.n_vertices, dtype=bool)
    on_bnd[boundary_vertices(s)] = True
    interior = math.fsum(e[~on_bnd].tolist())
    bnd = math.fsum(e[on_bnd].tolist())
    bound = rel_tol * math.fsum(np.abs(F.values).tolist())
    return EbbBalance(interior, bnd, interior + bnd, bound)


def boundary_loop_integrals(s: CombSurface, o: Orientation, F: CVF) -> list[float]:
    from .fields import integrate_path

    return [integrate_path(F, loop) for loop in boundary(s, o)]
