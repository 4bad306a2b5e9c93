"""Command line driver: one subcommand per verification.

Reports go to standard output (JSON, or CSV for level sweeps), diagnostics
to standard error.  Exit status: 0 all checks pass, 1 a check failed,
2 the input or configuration could not be used.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Optional, Sequence, TextIO

import numpy as np

from . import catalog, suites
from .calculus import check_whirl_theorem, tilt, tiltawhirl_residual
from .cohomology import cochain_complex, homology_dims, report as cohomology_report
from .fields import CVF, VSF, FieldError, dump_field, integrate_path, load_field
from .mesh import (CombSurface, MeshError, NonOrientableWitness, boundary,
                   euler_characteristic, load_mesh, orient, validate)
from .paths import EdgePath, FailureWitness, PathError, decompose_loop, is_conservative, potential
from .pullback import DIFFEOS, DiffeoError, oscillating, verify_cov
from .quadrature import Quadrature, QuadratureError
from .refine import (FIELDS, REGIONS, VHRegion, discretize, green_sweep, grid_mesh,
                     loglog_slope, mvt_interval_check, rows_to_csv, whirl_curl_convergence)

COMMANDS = ("validate", "orient", "euler", "boundary", "cohomology", "homology",
            "whirl-check", "tiltawhirl-check", "conservative", "potential",
            "decompose-loop", "discretize", "converge-curl", "mvt-check", "green",
            "cov-check", "suite")


class ConfigError(Exception):
    """Unusable input or option combination (exit status 2)."""


@dataclass
class RunConfig:
    command: str
    mesh: Optional[str] = None
    field: Optional[str] = None
    region: Optional[str] = None
    builtin_field: Optional[str] = None
    builtin_diffeo: Optional[str] = None
    levels: Optional[str] = None
    quad_order: int = 8
    quad_panels: int = 4
    samples: Optional[int] = None
    seed: int = 0
    format: Optional[str] = None
    loop: Optional[str] = None
    home: Optional[str] = None
    point: Optional[str] = None
    rect: Optional[str] = None
    delta: float = 1e-2
    count: int = 1000
    extra: dict = dc_field(default_factory=dict)


# -- input helpers --------------------------------------------------------------

def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None


def _mesh(cfg: RunConfig) -> CombSurface:
    if not cfg.mesh:
        raise ConfigError("--mesh is required")
    if cfg.mesh.startswith("builtin:"):
        name = cfg.mesh.split(":", 1)[1]
        if name not in catalog.MESHES:
            raise ConfigError(f"unknown builtin mesh {name!r}; "
                              f"choose from {', '.join(sorted(catalog.MESHES))}")
        return catalog.MESHES[name]()
    return load_mesh(_read(cfg.mesh))


def _oriented(s: CombSurface):
    rep = validate(s)
    if not rep.ok:
        v = rep.violations[0]
        raise ConfigError(f"mesh violates {v.axiom}: {v.message}")
    o = orient(s)
    if isinstance(o, NonOrientableWitness):
        return None, o
    return o, None


def _field(cfg: RunConfig, s: CombSurface, kind: str):
    if not cfg.field:
        raise ConfigError("--field is required")
    if cfg.field.startswith("builtin:"):
        name = cfg.field.split(":", 1)[1]
        rng = np.random.default_rng(cfg.seed)
        if name == "zero":
            return CVF.canonical(np.zeros(s.n_edges)) if kind == "cvf" else VSF(np.zeros(s.n_vertices))
        if name == "random":
            return catalog.random_cvf(s, rng) if kind == "cvf" else catalog.random_vsf(s, rng)
        raise ConfigError(f"unknown builtin field {name!r}; choose zero or random")
    F = load_field(_read(cfg.field), s)
    want = CVF if kind == "cvf" else VSF
    if not isinstance(F, want):
        raise ConfigError(f"field file must have kind {kind}")
    return F


def _smooth(cfg: RunConfig):
    name = cfg.builtin_field
    if not name:
        raise ConfigError("--builtin-field is required")
    if name not in FIELDS:
        raise ConfigError(f"unknown field {name!r}; choose from {', '.join(sorted(FIELDS))}")
    return FIELDS[name]


def _region(cfg: RunConfig) -> VHRegion:
    if not cfg.region:
        raise ConfigError("--region is required")
    if cfg.region.startswith("builtin:"):
        name = cfg.region.split(":", 1)[1]
        if name not in REGIONS:
            raise ConfigError(f"unknown region {name!r}; choose from {', '.join(sorted(REGIONS))}")
        return REGIONS[name]
    try:
        return VHRegion.from_json(_read(cfg.region))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{cfg.region}: line {exc.lineno}: {exc.msg}") from None


def _levels(cfg: RunConfig, default: str) -> list[int]:
    text = cfg.levels or default
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise ConfigError(f"--levels expects A..B, got {text!r}") from None
    if lo < 0 or hi < lo:
        raise ConfigError(f"--levels range {text!r} is empty or negative")
    return list(range(lo, hi + 1))


def _floats(text: str, n: int, flag: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(t) for t in text.split(","))
    except ValueError:
        raise ConfigError(f"{flag} expects {n} comma-separated numbers") from None
    if len(vals) != n:
        raise ConfigError(f"{flag} expects {n} comma-separated numbers")
    return vals


def _quad(cfg: RunConfig) -> Quadrature:
    if cfg.quad_order < 1 or cfg.quad_panels < 1:
        raise ConfigError("--quad-order and --quad-panels must be positive")
    return Quadrature(cfg.quad_order, cfg.quad_panels)


def _threads() -> int:
    raw = os.environ.get("COMBICALC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"COMBICALC_THREADS must be an integer, got {raw!r}") from None


def _format(cfg: RunConfig, default: str, allowed=("json",)) -> str:
    fmt = cfg.format or default
    if fmt not in allowed:
        raise ConfigError(f"{cfg.command} supports --format {'|'.join(allowed)}")
    return fmt


# -- subcommands -----------------------------------------------------------------
# each returns (report, ok) where report is a dict or pre-rendered text

def cmd_validate(cfg):
    rep = validate(_mesh(cfg))
    return rep.to_dict(), rep.ok


def cmd_orient(cfg):
    s = _mesh(cfg)
    o, w = _oriented(s)
    if w is not None:
        return {"orientable": False, "failed": "orientable",
                "witness": {"faces": list(w.faces), "edges": list(w.edges)}}, False
    return {"orientable": True, "standard": o.standard, "signs": list(o.signs)}, True


def cmd_euler(cfg):
    s = _mesh(cfg)
    V, E, F = s.counts
    return {"V": V, "E": E, "F": F, "chi": euler_characteristic(s)}, True


def _need_orientation(s):
    o, w = _oriented(s)
    if w is not None:
        return None, ({"orientable": False, "failed": "orientable",
                       "witness": {"faces": list(w.faces), "edges": list(w.edges)}}, False)
    return o, None


def cmd_boundary(cfg):
    s = _mesh(cfg)
    o, fail = _need_orientation(s)
    if fail:
        return fail
    return {"loops": [p.format() for p in boundary(s, o)]}, True


def cmd_cohomology(cfg):
    s = _mesh(cfg)
    o, fail = _need_orientation(s)
    if fail:
        return fail
    return cohomology_report(s, o), True


def cmd_homology(cfg):
    s = _mesh(cfg)
    o, fail = _need_orientation(s)
    if fail:
        return fail
    h = homology_dims(cochain_complex(s, o))
    return {"h_0": h.h_0, "h_1": h.h_1, "h_2": h.h_2, "h0_quotient": h.h0_quotient}, True


def cmd_whirl_check(cfg):
    s = _mesh(cfg)
    o, fail = _need_orientation(s)
    if fail:
        return fail
    chk = check_whirl_theorem(s, o, _field(cfg, s, "cvf"))
    rep = {"boundary_integral": chk.boundary_integral, "whirl_total": chk.whirl_total,
           "residual": chk.residual, "bound": chk.bound, "ok": chk.ok}
    if not chk.ok:
        rep["failed"] = "whirl-theorem residual"
    return rep, chk.ok


def cmd_tiltawhirl_check(cfg):
    s = _mesh(cfg)
    o, fail = _need_orientation(s)
    if fail:
        return fail
    res, bound = tiltawhirl_residual(s, o, _field(cfg, s, "vsf"))
    ok = res <= bound
    rep = {"max_face_whirl": res, "bound": bound, "ok": ok}
    if not ok:
        rep["failed"] = "whirl of tilt"
    return rep, ok


def cmd_conservative(cfg):
    s = _mesh(cfg)
    F = _field(cfg, s, "cvf")
    cons, witness = is_conservative(s, F)
    rep = {"conservative": cons}
    if witness is not None:
        rep["witness"] = witness.format()
        rep["witness_integral"] = integrate_path(F, witness)
    return rep, True


def cmd_potential(cfg):
    s = _mesh(cfg)
    F = _field(cfg, s, "cvf")
    homes = None
    if cfg.home:
        try:
            homes = [int(t) for t in cfg.home.split(",")]
        except ValueError:
            raise ConfigError("--home expects comma-separated vertex ids") from None
    res = potential(s, F, homes)
    if isinstance(res, FailureWitness):
        return {"failed": "potential", "loop": res.loop.format(), "integral": res.integral,
                "edge": res.edge}, False
    return {"values": res.values.tolist()}, True


def cmd_decompose_loop(cfg):
    s = _mesh(cfg)
    if not cfg.loop:
        raise ConfigError("--loop is required (e.g. 0+,3-,2+)")
    p = EdgePath.parse(s, cfg.loop)
    d = decompose_loop(p)
    rep = {"loops": [q.format() for q in d.loops], "backtracks": d.backtracks}
    ok = True
    if cfg.field:
        F = _field(cfg, s, "cvf")
        whole = integrate_path(F, p)
        parts = sum(integrate_path(F, q) for q in d.loops)
        tol = 1e-12 * max(1.0, float(np.abs(F.values).sum()))
        ok = abs(whole - parts) <= tol
        rep.update({"integral": whole, "sum_of_parts": parts, "ok": ok})
        if not ok:
            rep["failed"] = "integral of parts"
    return rep, ok


def cmd_discretize(cfg):
    F = _smooth(cfg)
    if cfg.mesh:
        s = _mesh(cfg)
    else:
        levels = _levels(cfg, "0")
        if len(levels) != 1:
            raise ConfigError("discretize takes a single level")
        s = grid_mesh(_region(cfg), levels[0])
    if not s.has_geometry:
        raise ConfigError("discretize needs a mesh with vertex coordinates")
    return json.loads(dump_field(discretize(F, s, _quad(cfg)))), True


def cmd_converge_curl(cfg):
    fmt = _format(cfg, "csv", ("csv", "json"))
    F = _smooth(cfg)
    p = _floats(cfg.point or "0.5,0.5", 2, "--point")
    region = _region(cfg) if cfg.region else None
    rows = whirl_curl_convergence(F, p, _levels(cfg, "0..7"), q=_quad(cfg), region=region)
    last = rows[-1]
    ok = last.error <= 2 * last.h * max(1.0, abs(last.scurl))
    if fmt == "csv":
        return rows_to_csv(rows, ("level", "h", "whirl_per_area", "scurl", "error")), ok
    above = [r for r in rows if r.error > 1e-12]
    slope = loglog_slope([r.h for r in above], [r.error for r in above]) if len(above) > 1 else None
    return {"rows": [r.__dict__ for r in rows], "order": slope, "ok": ok}, ok


def cmd_mvt_check(cfg):
    F = _smooth(cfg)
    rect = _floats(cfg.rect or "0,1,0,1", 4, "--rect")
    try:
        res = mvt_interval_check(F, rect, cfg.samples or 33, _quad(cfg))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rep = dict(res.__dict__)
    if not res.contained:
        rep["failed"] = "circulation per area outside the scurl range"
    return rep, bool(res.contained)


def cmd_green(cfg):
    fmt = _format(cfg, "csv", ("csv", "json"))
    rows = green_sweep(_region(cfg), _smooth(cfg), _levels(cfg, "0..6"), _quad(cfg),
                       workers=_threads())
    ok = all(r.combinatorial_ok for r in rows)
    if fmt == "csv":
        return rows_to_csv(rows, ("level", "h", "lhs", "rhs", "residual",
                                  "combinatorial_residual")), ok
    rep = {"rows": [r.__dict__ for r in rows], "ok": ok}
    if not ok:
        rep["failed"] = [r.level for r in rows if not r.combinatorial_ok]
    return rep, ok


def cmd_cov_check(cfg):
    name = cfg.builtin_diffeo or "identity"
    if name not in DIFFEOS:
        raise ConfigError(f"unknown diffeo {name!r}; choose from {', '.join(sorted(DIFFEOS))}")
    H = oscillating(cfg.delta) if name == "oscillating" else DIFFEOS[name]()
    F = FIELDS["rot"] if not cfg.builtin_field else _smooth(cfg)
    rect = None
    if cfg.rect:
        rect = _floats(cfg.rect, 4, "--rect")
    elif name != "oscillating":
        rect = (0.0, 1.0, 0.0, 1.0)
    rep = verify_cov(H, rect, F, _quad(cfg), cfg.samples or 16).to_dict()
    line_tol = float(cfg.extra.get("line_tol", 1e-6))
    scurl_tol = float(cfg.extra.get("scurl_tol", 1e-4))
    ok = rep["line_residual"] <= line_tol and rep["scurl_residual"] <= scurl_tol
    if not ok:
        rep["failed"] = [k for k, t in (("line_residual", line_tol), ("scurl_residual", scurl_tol))
                         if rep[k] > t]
    return rep, ok


def cmd_suite(cfg):
    rep = suites.run_all(cfg.seed, cfg.count)
    if not rep["ok"]:
        rep["failed"] = [k for k, v in rep["suites"].items() if not v["ok"]]
    return rep, rep["ok"]


HANDLERS = {c: globals()["cmd_" + c.replace("-", "_")] for c in COMMANDS}


# -- entry points ------------------------------------------------------------------

def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"{type(o).__name__} is not serializable")


def run(cfg: RunConfig, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    """Execute one subcommand; returns the exit status."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        if cfg.command not in HANDLERS:
            raise ConfigError(f"unknown command {cfg.command!r}")
        if cfg.command not in ("green", "converge-curl"):
            _format(cfg, "json")
        report, ok = HANDLERS[cfg.command](cfg)
    except (ConfigError, MeshError, FieldError, PathError, DiffeoError) as exc:
        print(f"error: {exc}", file=err)
        return 2
    except QuadratureError as exc:
        print(f"error: {exc}", file=err)
        return 1
    if isinstance(report, str):
        out.write(report)
    else:
        out.write(json.dumps(report, sort_keys=True, indent=2, default=_jsonable) + "\n")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="combicalc", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--mesh", help="mesh file, or builtin:NAME")
    p.add_argument("--field", help="field file, or builtin:zero / builtin:random")
    p.add_argument("--region", help="region file, or builtin:NAME")
    p.add_argument("--builtin-field", help="smooth field name")
    p.add_argument("--builtin-diffeo", help="planar map name")
    p.add_argument("--levels", help="refinement levels A..B")
    p.add_argument("--quad-order", type=int, default=8)
    p.add_argument("--quad-panels", type=int, default=4)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--loop", help="edge loop such as 0+,3-,2+")
    p.add_argument("--home", help="home vertex per component, comma-separated")
    p.add_argument("--point", help="x,y for converge-curl")
    p.add_argument("--rect", help="x0,x1,y0,y1")
    p.add_argument("--delta", type=float, default=1e-2,
                   help="left cut-off of the oscillating map's domain")
    p.add_argument("--count", type=int, default=1000, help="random meshes per suite")
    p.add_argument("--line-tol", type=float, default=1e-6)
    p.add_argument("--scurl-tol", type=float, default=1e-4)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    ns = vars(args)
    extra = {"line_tol": ns.pop("line_tol"), "scurl_tol": ns.pop("scurl_tol")}
    return run(RunConfig(extra=extra, **ns))


if __name__ == "__main__":
    sys.exit(main())
