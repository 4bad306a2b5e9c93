"""Seeded property suites: each returns a JSON-ready dict with an ``ok`` flag.

Reports hold counts and residuals only (no timings), so a fixed seed gives
byte-identical output.
"""

from __future__ import annotations

import math

import numpy as np

from . import catalog
from .calculus import check_whirl_theorem, tilt, tiltawhirl_residual
from .cohomology import cochain_complex, cohomology_dims, homology_dims
from .fields import CVF, cvf_same, integrate_path
from .mesh import NonOrientableWitness, Orientation, euler_characteristic, orient
from .paths import enumerate_embedded_loops, is_conservative, potential
from .pullback import Mat2, congruence_residual
from .refine import FIELDS, REGIONS, green_residual


def whirl_theorem(rng: np.random.Generator, count: int = 1000) -> dict:
    """Boundary integral equals total whirl on random oriented meshes."""
    worst, fails = 0.0, []
    for k in range(count):
        s = catalog.random_oriented_mesh(rng)
        o = orient(s)
        F = catalog.random_cvf(s, rng)
        chk = check_whirl_theorem(s, o, F)
        if chk.bound > 0:
            worst = max(worst, abs(chk.residual) / chk.bound)
        if not chk.ok:
            fails.append(k)
    return {"ok": not fails, "meshes": count, "failures": fails[:10],
            "worst_residual_over_bound": worst}


def tiltawhirl(rng: np.random.Generator, count: int = 1000) -> dict:
    """whirl(tilt f) vanishes on every face."""
    worst, fails = 0.0, []
    for k in range(count):
        s = catalog.random_oriented_mesh(rng)
        o = orient(s)
        f = catalog.random_vsf(s, rng)
        res, bound = tiltawhirl_residual(s, o, f)
        if bound > 0:
            worst = max(worst, res / bound)
        if res > bound:
            fails.append(k)
    return {"ok": not fails, "meshes": count, "failures": fails[:10],
            "worst_residual_over_bound": worst}


def conservative_equivalence(rng: np.random.Generator, extra: int = 40,
                             fields_per_mesh: int = 4) -> dict:
    """Three characterizations of conservative fields agree on small meshes.

    The oracle enumerates every embedded loop.  Fields are integer valued,
    half of them tilts of random functions, so loop integrals are exact.
    """
    meshes = catalog.small_meshes(rng, extra=extra)
    checked, fails = 0, []
    for name, s in meshes:
        loops = enumerate_embedded_loops(s)
        for j in range(fields_per_mesh):
            if j % 2:
                F = tilt(s, catalog.random_vsf(s, rng, integer=True))
            else:
                F = catalog.random_cvf(s, rng, integer=True)
            by_loops = all(integrate_path(F, p) == 0 for p in loops)
            cons, witness = is_conservative(s, F)
            pot = potential(s, F)
            pot_ok = not hasattr(pot, "loop")
            agree = by_loops == cons == pot_ok
            if witness is not None:
                agree = agree and integrate_path(F, witness) != 0
            if pot_ok:
                agree = agree and cvf_same(tilt(s, pot), F)
            checked += 1
            if not agree:
                fails.append(f"{name}#{j}")
    return {"ok": not fails, "meshes": len(meshes), "fields": checked, "failures": fails[:10]}


EXPECTED_H1 = {"disc": 0, "annulus": 1, "pants": 2, "holes3": 3, "square": 0,
               "holed_square": 1, "torus": 2, "tetrahedron": 0}


def cohomology(rng: np.random.Generator, moves: int = 100) -> dict:
    """Known first cohomology dimensions, complex identities and invariance
    under subdivision."""
    fails = []
    rows = {}
    for name, want in EXPECTED_H1.items():
        s = catalog.MESHES[name]()
        c = cochain_complex(s, orient(s))
        co, ho = cohomology_dims(c), homology_dims(c)
        rows[name] = co.h1
        if co.h1 != want:
            fails.append(f"{name}: h1={co.h1}, expected {want}")
        if ho.h_1 != co.h1:
            fails.append(f"{name}: h_1={ho.h_1} differs from h1={co.h1}")
        if np.any(c.W @ c.T) or np.any(c.D1 @ c.D2):
            fails.append(f"{name}: composite map is not zero")
    for name in ("annulus", "pants", "torus"):
        s = catalog.MESHES[name]().without_geometry()
        base = cohomology_dims(cochain_complex(s, orient(s))).h1
        chi = euler_characteristic(s)
        t = catalog.random_subdivisions(s, moves, rng)
        if euler_characteristic(t) != chi:
            fails.append(f"{name}: chi changed under subdivision")
        if cohomology_dims(cochain_complex(t, orient(t))).h1 != base:
            fails.append(f"{name}: h1 changed under subdivision")
    if not isinstance(orient(catalog.moebius()), NonOrientableWitness):
        fails.append("moebius: reported orientable")
    return {"ok": not fails, "h1": rows, "failures": fails}


def congruence(rng: np.random.Generator, count: int = 1000) -> dict:
    worst = 0.0
    for _ in range(count):
        A = Mat2(*rng.uniform(-10, 10, 4))
        B = Mat2(*rng.uniform(-10, 10, 4))
        bound = 1e-12 * A.norm() * B.norm() ** 2
        worst = max(worst, abs(congruence_residual(A, B)) / bound)
    return {"ok": worst <= 1.0, "pairs": count, "worst_residual_over_bound": worst}


def green(levels: range = range(0, 5)) -> dict:
    """Exact discrete Green identity on the square and L-shape."""
    worst, fails = 0.0, []
    for reg in ("square", "lshape"):
        for fname in ("rot", "x2", "cubic", "expsin"):
            for n in levels:
                row = green_residual(REGIONS[reg], FIELDS[fname], n)
                if row.scale > 0:
                    worst = max(worst, abs(row.combinatorial_residual) / (1e-12 * row.scale))
                if not row.combinatorial_ok:
                    fails.append(f"{reg}/{fname}/{n}")
    return {"ok": not fails, "failures": fails, "worst_residual_over_bound": worst}


def vortex(level: int = 4) -> dict:
    """The vortex field has vanishing whirl yet circulates 2 pi around the hole."""
    from .calculus import whirl
    from .refine import discretize, grid_mesh

    s = grid_mesh(REGIONS["holed_square"], level)
    o = orient(s)
    F = discretize(FIELDS["vortex"], s)
    max_whirl = float(np.max(np.abs(whirl(s, F, o).values)))
    inner = inner_loop_integral(s, o, F)
    cons, witness = is_conservative(s, F)
    ok = max_whirl <= 1e-8 and abs(inner - 2 * math.pi) <= 1e-6 and not cons
    return {"ok": bool(ok), "max_whirl": max_whirl, "inner_loop_integral": inner,
            "conservative": cons, "witness_length": 0 if witness is None else len(witness)}


def inner_loop_integral(s, o: Orientation, F: CVF) -> float:
    """Integral over the boundary loop nearest the origin, counter-clockwise."""
    from .mesh import boundary

    loops = boundary(s, o)
    reach = [float(np.max(np.abs(s.coords[list(p.vertices)]))) for p in loops]
    inner = loops[int(np.argmin(reach))]
    xy = s.coords[list(inner.vertices)]
    area = np.sum(xy[:-1, 0] * xy[1:, 1] - xy[1:, 0] * xy[:-1, 1])
    return integrate_path(F, inner) * (1.0 if area > 0 else -1.0)


SUITES = ("whirl_theorem", "tiltawhirl", "conservative_equivalence", "cohomology",
          "congruence", "green", "vortex")


def run_all(seed: int, count: int = 200) -> dict:
    """Every suite, each with its own generator derived from ``seed``."""
    seqs = np.random.SeedSequence(seed).spawn(5)
    rngs = [np.random.default_rng(q) for q in seqs]
    out = {
        "whirl_theorem": whirl_theorem(rngs[0], count),
        "tiltawhirl": tiltawhirl(rngs[1], count),
        "conservative_equivalence": conservative_equivalence(rngs[2]),
        "cohomology": cohomology(rngs[3]),
        "congruence": congruence(rngs[4], count),
        "green": green(),
        "vortex": vortex(),
    }
    return {"seed": seed, "count": count, "ok": all(v["ok"] for v in out.values()),
            "suites": out}
