"""Vertex, face and combinatorial vector fields, and their integrals."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .mesh import CombSurface, DirectedEdge


class FieldError(ValueError):
    pass


def _values(a) -> np.ndarray:
    arr = np.array(a, dtype=float).reshape(-1)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class VSF:
    """Real value per vertex."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _values(self.values))

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True, eq=False)
class FSF:
    """Real value per face."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _values(self.values))

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True, eq=False)
class CVF:
    """Combinatorial vector field: an orientation and a value on every edge.

    ``dirs[e]`` is +1 when the field orients edge ``e`` along its stored
    source -> target direction and -1 otherwise.
    """

    dirs: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        dirs = np.where(np.asarray(self.dirs).reshape(-1) < 0, -1, 1).astype(np.int64)
        dirs.flags.writeable = False
        object.__setattr__(self, "dirs", dirs)
        object.__setattr__(self, "values", _values(self.values))
        if len(self.dirs) != len(self.values):
            raise FieldError("dirs and values differ in length")

    def __len__(self):
        return len(self.values)

    @classmethod
    def canonical(cls, values) -> CVF:
        """Field oriented along every stored edge direction."""
        values = _values(values)
        return cls(np.ones(len(values), dtype=np.int64), values)

    @property
    def signed(self) -> np.ndarray:
        """Value measured along each stored edge direction."""
        return self.dirs * self.values

    def flipped(self) -> CVF:
        """Every orientation reversed and every value negated (the same field)."""
        return CVF(-self.dirs, -self.values)


def cvf_same(F: CVF, G: CVF) -> bool:
    """The relation: agreeing orientations carry equal values, opposite ones negated."""
    if len(F) != len(G):
        raise FieldError("fields live on different surfaces")
    return bool(np.all(F.dirs * G.dirs * G.values == F.values))


def canonicalize(F: CVF) -> CVF:
    return CVF.canonical(F.signed + 0.0)


def integrate_vertices(f: VSF, vertices: Iterable[int]) -> float:
    """Sum of ``f`` over a multiset of vertex ids."""
    return _multiset_sum(f.values, vertices, "vertex")


def integrate_faces(f: FSF, faces: Iterable[int]) -> float:
    """Sum of ``f`` over a multiset of face ids."""
    return _multiset_sum(f.values, faces, "face")


def _multiset_sum(values: np.ndarray, ids: Iterable[int], kind: str) -> float:
    counts = Counter(int(i) for i in ids)
    n = len(values)
    bad = [i for i in counts if not 0 <= i < n]
    if bad:
        raise FieldError(f"unknown {kind} id {min(bad)}")
    return math.fsum(values[i] * k for i, k in sorted(counts.items()))


def edge_terms(F: CVF, steps: Iterable[DirectedEdge]) -> list[float]:
    """Signed contribution of each traversed edge: epsilon(e, F) * F(e)."""
    return [float(s.sign * F.dirs[s.edge] * F.values[s.edge]) for s in steps]


def integrate_path(F: CVF, path) -> float:
    """Integral of ``F`` over an edge path (a :class:`~combicalc.paths.EdgePath`
    or any sequence of :class:`DirectedEdge`)."""
    steps = getattr(path, "steps", path)
    n = len(F)
    for s in steps:
        if not 0 <= s.edge < n:
            raise FieldError(f"unknown edge id {s.edge}")
    return math.fsum(edge_terms(F, steps))


# -- field files ------------------------------------------------------------

def load_field(text: str, s: CombSurface):
    """Parse a field file for surface ``s``; returns VSF, FSF or CVF."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FieldError(f"line {exc.lineno}: {exc.msg}") from None
    kind = doc.get("kind") if isinstance(doc, dict) else None
    if kind not in ("vsf", "fsf", "cvf"):
        raise FieldError("kind must be one of vsf, fsf, cvf")
    n = {"vsf": s.n_vertices, "fsf": s.n_faces, "cvf": s.n_edges}[kind]
    raw = doc.get("values")
    if isinstance(raw, list):
        raw = {str(i): v for i, v in enumerate(raw)}
    if not isinstance(raw, dict):
        raise FieldError("values must be an object keyed by id")
    try:
        entries = {int(k): v for k, v in raw.items()}
    except ValueError:
        raise FieldError("value keys must be integer ids") from None
    if set(entries) != set(range(n)):
        missing = sorted(set(range(n)) - set(entries))
        extra = sorted(set(entries) - set(range(n)))
        raise FieldError(f"values must cover ids 0..{n - 1} exactly "
                         f"(missing {missing[:5]}, unknown {extra[:5]})")
    if kind == "cvf":
        dirs, vals = [], []
        for i in range(n):
            item = entries[i]
            if not isinstance(item, dict) or item.get("dir") not in (1, -1) \
                    or not isinstance(item.get("value"), (int, float)):
                raise FieldError(f"values.{i}: expected {{'dir': 1|-1, 'value': number}}")
            dirs.append(item["dir"])
            vals.append(float(item["value"]))
        return CVF(dirs, vals)
    for i in range(n):
        if not isinstance(entries[i], (int, float)) or isinstance(entries[i], bool):
            raise FieldError(f"values.{i}: expected a number")
    vals = [float(entries[i]) for i in range(n)]
    return VSF(vals) if kind == "vsf" else FSF(vals)


def dump_field(field) -> str:
    if isinstance(field, CVF):
        values = {str(e): {"dir": int(d), "value": float(v)}
                  for e, (d, v) in enumerate(zip(field.dirs, field.values))}
        kind = "cvf"
    else:
        kind = "vsf" if isinstance(field, VSF) else "fsf"
        values = {str(i): float(v) for i, v in enumerate(field.values)}
    return json.dumps({"kind": kind, "values": values}, indent=1)
