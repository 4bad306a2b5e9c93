"""Integer cochain/chain complexes of an oriented surface and their dimensions.

Ranks are computed exactly by fraction-free row reduction over the
integers, so no floating-point rank threshold is ever needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .mesh import CombSurface, MeshError, Orientation, euler_characteristic, \
    is_consistent, slot_signs


def exact_rank(matrix) -> int:
    """Rank of an integer matrix by fraction-free elimination.

    Rows are kept sparse (``{column: value}``).  Each incoming row is
    reduced against the pivots found so far with ``r <- p*r - a*pivot``,
    then divided by the gcd of its entries, so entries stay integers and
    stay small.
    """
    pivots: dict[int, dict[int, int]] = {}
    rank = 0
    for raw in np.asarray(matrix, dtype=object).tolist() if len(matrix) else []:
        row = {j: int(x) for j, x in enumerate(raw) if x}
        while row:
            c = min(row)
            piv = pivots.get(c)
            if piv is None:
                pivots[c] = row
                rank += 1
                break
            a, p = row[c], piv[c]
            new = {j: p * x for j, x in row.items()}
            for j, x in piv.items():
                v = new.get(j, 0) - a * x
                if v:
                    new[j] = v
                else:
                    new.pop(j, None)
            g = 0
            for x in new.values():
                g = gcd(g, x)
                if g == 1:
                    break
            row = {j: x // g for j, x in new.items()} if g > 1 else new
    return rank


@dataclass(frozen=True, eq=False)
class CochainComplex:
    """tilt-bar ``T`` (E x V), whirl ``W`` (F x E) and their transposes."""

    T: np.ndarray
    W: np.ndarray

    @property
    def D1(self) -> np.ndarray:
        return self.T.T

    @property
    def D2(self) -> np.ndarray:
        return self.W.T

    @property
    def counts(self) -> tuple[int, int, int]:
        return self.T.shape[1], self.T.shape[0], self.W.shape[0]


def cochain_complex(s: CombSurface, o: Orientation) -> CochainComplex:
    """Integer matrices of tilt-bar and whirl in the stored edge directions."""
    if len(o.signs) != s.n_faces or not is_consistent(s, o):
        raise MeshError("surface is not oriented by the given orientation")
    V, E, F = s.counts
    T = np.zeros((E, V), dtype=np.int64)
    rows = np.arange(E)
    np.add.at(T, (rows, s.edge_src), -1)
    np.add.at(T, (rows, s.edge_dst), 1)
    W = np.zeros((F, E), dtype=np.int64)
    np.add.at(W, (s.face_of_slot, s.cycle_edge), slot_signs(s, o))
    return CochainComplex(T, W)


@dataclass(frozen=True)
class CohomologyDims:
    """Dimensions of H^0 = ker tilt-bar, H^1 = ker whirl / im tilt-bar and
    H^2 = im whirl; ``h2_quotient`` is the conventional ``C^2 / im whirl``."""

    h0: int
    h1: int
    h2: int
    h2_quotient: int
    rank_T: int
    rank_W: int


def cohomology_dims(c: CochainComplex) -> CohomologyDims:
    V, E, F = c.counts
    rt = exact_rank(c.T)
    rw = exact_rank(c.W)
    return CohomologyDims(h0=V - rt, h1=(E - rw) - rt, h2=rw,
                          h2_quotient=F - rw, rank_T=rt, rank_W=rw)


@dataclass(frozen=True)
class HomologyDims:
    """Dimensions of H_0 = im d1, H_1 = ker d1 / im d2 and H_2 = ker d2;
    ``h0_quotient`` is the conventional ``C_0 / im d1``."""

    h_0: int
    h_1: int
    h_2: int
    h0_quotient: int

    def as_tuple(self) -> tuple[int, int, int]:
        return self.h_0, self.h_1, self.h_2


def homology_dims(c: CochainComplex) -> HomologyDims:
    V, E, F = c.counts
    r1 = exact_rank(c.D1)
    r2 = exact_rank(c.D2)
    return HomologyDims(h_0=r1, h_1=(E - r1) - r2, h_2=F - r2, h0_quotient=V - r1)


def report(s: CombSurface, o: Orientation) -> dict:
    """Summary dictionary in the report file layout."""
    c = cochain_complex(s, o)
    co = cohomology_dims(c)
    ho = homology_dims(c)
    return {"h0": co.h0, "h1": co.h1, "h2": co.h2, "h2_quotient": co.h2_quotient,
            "homology": list(ho.as_tuple()), "chi": euler_characteristic(s)}
