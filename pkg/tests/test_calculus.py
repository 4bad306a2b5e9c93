import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from combicalc import catalog
from combicalc.calculus import (boundary_integral, check_whirl_theorem, ebb, ebb_balance, tilt,
                                tilt_bar, tiltawhirl_residual, whirl)
from combicalc.fields import CVF, VSF, canonicalize, cvf_same
from combicalc.mesh import MeshError, Orientation, orient

# reference ebb of the letter graph's tilt, keyed by vertex name
LETTER_EBB = {"A": 10.5, "B": 26.0, "C": -14.5, "D": -2.0, "E": 25.0, "F": -69.5,
              "G": 17.0, "H": 7.0, "I": -13.5, "J": 14.0}
# reference edge magnitudes of the letter graph's tilt
LETTER_TILT = [3.5, 6.5, 5, 5, 6, 3, 3, 15, 4, 19, 2, 4.5, 17, 18.5, 3, 2]


def _named(s):
    return {n: i for i, n in enumerate(sorted(catalog.LETTER_GRAPH_VALUES))}


def test_letter_graph_tilt_values():
    s, f = catalog.letter_graph()
    F = tilt(s, f)
    assert sorted(F.values.tolist()) == sorted(LETTER_TILT)
    ids = _named(s)
    e_ab = catalog.LETTER_GRAPH_EDGES.index("AB")
    assert F.values[e_ab] == 3.5
    assert F.dirs[e_ab] == 1  # towards B, the 0.5 vertex
    e_gf = catalog.LETTER_GRAPH_EDGES.index("GF")
    assert F.values[e_gf] == 17 and s.edge_dst[e_gf] == ids["F"] and F.dirs[e_gf] == 1


def test_letter_graph_ebb():
    s, f = catalog.letter_graph()
    e = ebb(s, tilt(s, f))
    ids = _named(s)
    for name, want in LETTER_EBB.items():
        assert e.values[ids[name]] == want, name


def test_tilt_tie_and_constant():
    s = catalog.annulus()
    F = tilt(s, VSF(np.full(4, 2.0)))
    assert not np.any(F.values) and np.all(F.dirs == 1)
    G = tilt(s, VSF([0.0, 0.0, 5.0, -1.0]))
    assert G.dirs.tolist() == [1, 1, 1, -1, 1, -1]  # uphill
    assert G.values.tolist() == [0, 0, 6, 6, 5, 1]


def test_tilt_bar():
    s = catalog.annulus()
    f = VSF([0.0, 4.0, -1.0, 0.0])
    T = tilt_bar(s, f)
    assert np.all(T.dirs == 1)
    assert T.values.tolist() == [4, -4, -1, 1, -1, -4]
    assert cvf_same(T, tilt(s, f))
    assert np.array_equal(T.values, canonicalize(tilt(s, f)).values)


def test_ebb_single_edge_and_zero():
    s = catalog.annulus()
    assert not np.any(ebb(s, CVF.canonical(np.zeros(6))).values)
    F = CVF([1, 1, 1, 1, -1, 1], [0, 0, 0, 0, 5.0, 0])
    # edge 4 runs 0 -> 2; reversed orientation sends flow from 2 to 0
    assert ebb(s, F).values.tolist() == [-5, 0, 5, 0]


def test_ebb_of_loop_edge_is_zero():
    s = catalog.disc()
    assert ebb(s, CVF([1], [3.0])).values.tolist() == [0.0]


def test_annulus_field_whirl_zero():
    s = catalog.annulus()
    o = orient(s)
    F = CVF.canonical([1.0, 0.0, -1.0, 0.0, 0.0, 0.0])
    assert whirl(s, F, o).values.tolist() == [0.0, 0.0]
    chk = check_whirl_theorem(s, o, F)
    assert chk.residual == 0 and chk.ok


def test_whirl_sign_flips_with_face_orientation():
    s = catalog.annulus().without_geometry()
    F = CVF([1, -1, 1, 1, -1, 1], [1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
    o = orient(s)
    assert np.array_equal(whirl(s, F, o.reversed()).values, -whirl(s, F, o).values)
    assert np.array_equal(whirl(s, canonicalize(F), o).values, whirl(s, F, o).values)


def test_whirl_requires_orientation():
    s = catalog.annulus()
    with pytest.raises(MeshError):
        whirl(s, CVF.canonical(np.zeros(6)), Orientation((1, -1)))


def test_closed_surface_total_whirl_vanishes():
    s = catalog.torus()
    rng = np.random.default_rng(1)
    F = catalog.random_cvf(s, rng)
    chk = check_whirl_theorem(s, orient(s), F)
    assert chk.boundary_integral == 0
    assert abs(chk.whirl_total) <= chk.bound


def test_zero_field_exact():
    s = catalog.annulus()
    chk = check_whirl_theorem(s, orient(s), CVF.canonical(np.zeros(6)))
    assert chk.residual == 0 and chk.ok


def _brute_whirl(s, o, F):
    """Face-by-face circulation by walking each induced cycle in Python."""
    out = []
    for f in range(s.n_faces):
        total = 0.0
        es, ds = s.face_steps(f)
        for e, d in zip(es.tolist(), ds.tolist()):
            total += o.signs[f] * d * F.dirs[e] * F.values[e]
        out.append(total)
    return out


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_whirl_against_direct_walk(seed):
    rng = np.random.default_rng(seed)
    s = catalog.random_oriented_mesh(rng, max_faces=30)
    o = orient(s)
    F = catalog.random_cvf(s, rng)
    assert np.allclose(whirl(s, F, o).values, _brute_whirl(s, o, F), atol=1e-12, rtol=0)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_whirl_theorem_and_tiltawhirl(seed):
    rng = np.random.default_rng(seed)
    s = catalog.random_oriented_mesh(rng)
    o = orient(s)
    assert check_whirl_theorem(s, o, catalog.random_cvf(s, rng)).ok
    res, bound = tiltawhirl_residual(s, o, catalog.random_vsf(s, rng))
    assert res <= bound


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_ebb_sums_to_zero_and_balances(seed):
    rng = np.random.default_rng(seed)
    s = catalog.random_oriented_mesh(rng)
    F = catalog.random_cvf(s, rng)
    e = ebb(s, F).values
    assert abs(math.fsum(e.tolist())) <= 1e-12 * math.fsum(np.abs(F.values).tolist())
    assert ebb_balance(s, F).ok


def test_boundary_integral_annulus_parts():
    s = catalog.annulus()
    F = CVF.canonical([1.0, 0.0, -1.0, 0.0, 0.0, 0.0])
    # inner loop contributes 1, outer loop -1
    assert boundary_integral(s, F, orient(s)) == 0.0
