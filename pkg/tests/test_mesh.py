import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from combicalc import catalog
from combicalc.mesh import (AXIOMS, CombSurface, DirectedEdge, EdgeSplit, FaceSplit, MeshError,
                            MeshParseError, NonOrientableWitness, Orientation, boundary,
                            dump_mesh, euler_characteristic, induced_cycle, is_consistent,
                            load_mesh, orient, slot_signs, subdivide, validate)

DISC_FILE = """{"vertices": [{"id": 0}],
 "edges": [{"id": 0, "src": 0, "dst": 0}],
 "faces": [{"id": 0, "cycle": [[0, 1]]}],
 "boundary": [0]}"""


def test_directed_edge_reverses_twice():
    de = DirectedEdge(3, False)
    assert de.reversed().reversed() == de
    assert de.sign == -1 and de.reversed().sign == 1


def test_load_disc_counts():
    s = load_mesh(DISC_FILE)
    assert s.counts == (1, 1, 1)
    assert validate(s).ok


def test_load_annulus_counts_roundtrip():
    s = catalog.annulus()
    t = load_mesh(dump_mesh(s))
    assert t.counts == (4, 6, 2)
    assert t.to_lists()[:4] == s.to_lists()[:4]
    assert np.allclose(t.coords, s.coords)
    assert all(np.allclose(a, b) for a, b in zip(t.polys[:4], s.polys[:4]))


def test_empty_faces_parse_then_fail_validation():
    s = load_mesh('{"vertices":[{"id":0},{"id":1}],"edges":[{"id":0,"src":0,"dst":1}],'
                  '"faces":[],"boundary":[0]}')
    assert s.counts == (2, 1, 0)
    rep = validate(s)
    assert not rep.ok
    assert rep.violations[0].axiom == "two-face"


@pytest.mark.parametrize("text, locus", [
    ('{"vertices": [{"id": 0}], "edges": [{"id": 0, "src": 0, "dst": 4}], "faces": []}',
     "edges[0].dst"),
    ('{"vertices": [{"id": 1}], "edges": [], "faces": []}', "vertices"),
    ('{"vertices": [], "edges": []}', "faces"),
    ('{"vertices": [\n  {"id": 0},\n  oops]}', "line 3"),
    ('{"vertices": [{"id": 0}], "edges": [{"id": 0, "src": 0, "dst": 0}],'
     ' "faces": [{"id": 0, "cycle": [[0, 2]]}]}', "faces[0].cycle[0]"),
])
def test_parse_errors_name_locus(text, locus):
    with pytest.raises(MeshParseError) as info:
        load_mesh(text)
    assert locus in str(info.value)


def test_validate_isolated_vertex():
    nv, edges, faces, bnd, _, _ = catalog.annulus().to_lists()
    s = CombSurface.from_lists(nv + 1, edges, faces, bnd)
    rep = validate(s)
    assert [v.axiom for v in rep.violations] == ["vertex-degree"]
    assert rep.violations[0].ids == (4,)


def test_validate_edge_in_three_faces():
    # three triangles sharing edge 0 = (0, 1)
    edges = [(0, 1), (1, 2), (2, 0), (1, 3), (3, 0), (1, 4), (4, 0)]
    faces = [[(0, 1), (1, 1), (2, 1)], [(0, 1), (3, 1), (4, 1)], [(0, 1), (5, 1), (6, 1)]]
    s = CombSurface.from_lists(5, edges, faces, [1, 2, 3, 4, 5, 6])
    rep = validate(s)
    assert "two-face" in {v.axiom for v in rep.violations}
    assert any(v.axiom == "two-face" and 0 in v.ids for v in rep.violations)


def test_validate_open_walk_and_report_order():
    edges = [(0, 1), (1, 2), (2, 0)]
    s = CombSurface.from_lists(4, edges, [[(0, 1), (2, 1), (1, 1)]], [0, 1, 2])
    rep = validate(s)
    axioms = [v.axiom for v in rep.violations]
    assert "closed-walk" in axioms and "vertex-degree" in axioms
    assert axioms == sorted(axioms, key=AXIOMS.index)


def test_validate_bad_polyline():
    nv, edges, faces, bnd, coords, polys = catalog.annulus().to_lists()
    polys[4] = [[-1.0, 0.0], [-3.0, 0.0]]
    rep = validate(CombSurface.from_lists(nv, edges, faces, bnd, coords, polys))
    assert [v.axiom for v in rep.violations] == ["geometry"]


def test_orient_disc_and_annulus_standard():
    o = orient(catalog.disc())
    assert o.signs == (1,) and o.standard
    o = orient(catalog.annulus())
    assert o.signs == (1, 1) and o.standard


def test_orient_without_geometry_first_face_positive():
    s = catalog.annulus().without_geometry()
    o = orient(s)
    assert o.signs[0] == 1 and is_consistent(s, o) and not o.standard


def test_moebius_witness_is_an_odd_conflict():
    s = catalog.moebius()
    w = orient(s)
    assert isinstance(w, NonOrientableWitness)
    # follow the chain: forcing signs along it must contradict at the end
    sign = {w.faces[0]: 1}
    for k, e in enumerate(w.edges):
        f, g = w.faces[k], w.faces[(k + 1) % len(w.faces)]
        df = [d for ee, d in zip(*s.face_steps(f)) if ee == e][0]
        dg = [d for ee, d in zip(*s.face_steps(g)) if ee == e][0]
        forced = -sign[f] * df * dg
        if g in sign:
            assert sign[g] != forced
            break
        sign[g] = forced
    else:
        pytest.fail("witness does not close")


def test_orient_is_deterministic():
    rng = np.random.default_rng(5)
    s = catalog.random_oriented_mesh(rng)
    assert orient(s) == orient(load_mesh(dump_mesh(s)))


def test_boundary_loops():
    assert [len(p) for p in boundary(catalog.disc(), orient(catalog.disc()))] == [1]
    s = catalog.annulus()
    loops = boundary(s, orient(s))
    assert [p.format() for p in loops] == ["0+,1+", "2+,3+"]
    t = catalog.torus()
    assert boundary(t, orient(t)) == []


def test_boundary_rejects_wrong_orientation():
    s = catalog.annulus()
    with pytest.raises(MeshError):
        boundary(s, Orientation((1, -1)))


def test_euler_examples():
    assert euler_characteristic(catalog.disc()) == 1
    assert euler_characteristic(catalog.annulus()) == 0
    split = subdivide(catalog.disc(), EdgeSplit(0))
    assert split.counts == (2, 2, 1) and euler_characteristic(split) == 1
    assert validate(split).ok


def test_edge_split_on_arc_keeps_geometry():
    s = subdivide(catalog.annulus(), EdgeSplit(0))
    assert validate(s).ok
    assert np.allclose(s.coords[4], [0.0, 1.0], atol=1e-9)
    assert orient(s).signs == (1, 1)


def test_face_split_diagonal():
    from combicalc.refine import REGIONS, grid_mesh

    s = grid_mesh(REGIONS["square"], 0)
    t = subdivide(s, FaceSplit(0, 0, 3))
    assert t.counts == (4, 5, 2)
    assert euler_characteristic(t) == euler_characteristic(s)
    assert validate(t).ok


@pytest.mark.parametrize("move", [FaceSplit(0, 0, 0), FaceSplit(0, 0, 9), FaceSplit(3, 0, 1),
                                  EdgeSplit(17)])
def test_bad_moves(move):
    from combicalc.refine import REGIONS, grid_mesh

    with pytest.raises(MeshError):
        subdivide(grid_mesh(REGIONS["square"], 0), move)


def _interior_edges_induced_twice(s, o):
    signs = slot_signs(s, o)
    for e in range(s.n_edges):
        got = signs[s.cycle_edge == e]
        if e in s.boundary:
            assert len(got) == 1
        else:
            assert sorted(got.tolist()) == [-1, 1]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_meshes_orient_and_partition_boundary(seed):
    rng = np.random.default_rng(seed)
    s = catalog.random_oriented_mesh(rng, max_faces=20)
    assert validate(s).ok
    o = orient(s)
    assert isinstance(o, Orientation)
    _interior_edges_induced_twice(s, o)
    loops = boundary(s, o)
    used = sorted(de.edge for p in loops for de in p.steps)
    assert used == sorted(s.boundary)
    for p in loops:
        assert p.is_loop


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 30))
def test_euler_invariant_under_moves(seed, moves):
    rng = np.random.default_rng(seed)
    s = catalog.MESHES[["disc", "annulus", "torus2", "tetrahedron", "pants"][seed % 5]]()
    chi = euler_characteristic(s)
    t = catalog.random_subdivisions(s, moves, rng)
    assert validate(t).ok
    assert euler_characteristic(t) == chi


def test_induced_cycle_follows_sign():
    s = catalog.annulus()
    o = Orientation((-1, -1))
    cyc = induced_cycle(s, o, 0)
    assert [(de.edge, de.sign) for de in cyc] == [(5, -1), (0, -1), (4, 1), (2, -1)]


def test_dump_is_json():
    doc = json.loads(dump_mesh(catalog.moebius()))
    assert len(doc["faces"]) == 2 and doc["boundary"] == [2, 3, 4, 5]
