import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from combicalc.pullback import (DIFFEOS, Diffeo, DiffeoError, Mat2, affine, affine_pullback,
                                congruence_residual, image_green_residual, mat_scurl,
                                oscillating, pullback_field, verify_cov)
from combicalc.refine import FIELDS

X, Y = sympy.symbols("x y")


def test_mat_scurl_examples():
    assert mat_scurl(Mat2(1, 2, 3, 4)) == 1
    assert mat_scurl(Mat2(0, -1, 1, 0)) == 2
    assert mat_scurl(Mat2(5, 7, 7, -2)) == 0


def test_congruence_worked_example():
    A = Mat2(0, -1, 1, 0)
    B = Mat2(2, 1, 0, 3)
    BtAB = B.T @ A @ B
    assert mat_scurl(BtAB) == 12 == mat_scurl(A) * B.det()
    assert congruence_residual(A, B) == 0


def test_mat_helpers():
    A = Mat2.of([[1, 2], [3, 4]])
    assert A.T == Mat2(1, 3, 2, 4)
    assert A.det() == -2
    assert A.norm() == pytest.approx(np.linalg.norm(A.array()))


coef = st.floats(-10, 10, allow_nan=False)


@settings(max_examples=300)
@given(*[coef] * 8)
def test_congruence_random(a, b, c, d, p, q, r, s):
    A, B = Mat2(a, b, c, d), Mat2(p, q, r, s)
    assert abs(congruence_residual(A, B)) <= 1e-12 * max(A.norm() * B.norm() ** 2, 1e-300) \
        or A.norm() * B.norm() == 0


def test_congruence_symbolic():
    a, b, c, d, p, q, r, s = sympy.symbols("a b c d p q r s")
    A = sympy.Matrix([[a, b], [c, d]])
    B = sympy.Matrix([[p, q], [r, s]])
    C = B.T * A * B
    assert sympy.expand((C[1, 0] - C[0, 1]) - (c - b) * B.det()) == 0


def test_epsilon():
    assert DIFFEOS["identity"]().epsilon == 1
    assert DIFFEOS["affine"]().epsilon == 1
    assert DIFFEOS["affine_rev"]().epsilon == -1
    assert oscillating().epsilon == 1
    fold = Diffeo("fold", lambda x, y: (x * x, y),
                  lambda x, y: np.stack(np.broadcast_arrays(
                      np.stack([2 * np.asarray(x, float), 0 * x], -1),
                      np.stack([0 * x, 1 + 0 * x], -1)), -2), (-1, 1, 0, 1))
    with pytest.raises(DiffeoError):
        fold.epsilon


def test_errors():
    with pytest.raises(DiffeoError):
        oscillating(0.0)
    with pytest.raises(DiffeoError):
        affine("bad", np.eye(2), domain=(1, 0, 0, 1))
    Fh = pullback_field(oscillating(), FIELDS["rot"])
    with pytest.raises(DiffeoError):
        Fh(0.001, 0.5)
    with pytest.raises(DiffeoError):
        verify_cov(oscillating(), (0.0, 1.0, 0.0, 1.0), FIELDS["rot"])
    with pytest.raises(DiffeoError):
        affine_pullback(oscillating(), FIELDS["rot"])


def test_pullback_examples():
    Fh = pullback_field(DIFFEOS["identity"](), FIELDS["expsin"])
    m, n = Fh(0.3, 0.4)
    assert (float(m), float(n)) == tuple(float(v) for v in FIELDS["expsin"](0.3, 0.4))
    # scaling by 2 pulls the constant field (1, 0) back to (2, 0)
    Gh = pullback_field(affine("twice", 2 * np.eye(2)), FIELDS["const"])
    assert [float(v) for v in Gh(0.5, -0.5)] == [2.0, 0.0]
    osc = pullback_field(oscillating(), FIELDS["expsin"])
    xs = np.linspace(0.01, 1, 50)
    assert np.all(np.isfinite(osc(xs, xs)[0])) and np.all(np.isfinite(osc(xs, xs)[1]))


def test_oscillating_pullback_against_symbolic():
    hx, hy = X, Y + X**3 * sympy.sin(1 / X)
    M = -hy * sympy.exp(hx)
    N = hx * sympy.sin(hy)
    J = sympy.Matrix([[sympy.diff(hx, X), sympy.diff(hx, Y)],
                      [sympy.diff(hy, X), sympy.diff(hy, Y)]])
    pulled = J.T * sympy.Matrix([M, N])
    curl = sympy.lambdify((X, Y), sympy.diff(pulled[1], X) - sympy.diff(pulled[0], Y))
    fm = sympy.lambdify((X, Y), pulled[0])
    fn = sympy.lambdify((X, Y), pulled[1])
    Fh = pullback_field(oscillating(), FIELDS["expsin"])
    for x, y in [(0.05, 0.2), (0.3, 0.9), (0.77, 0.5)]:
        m, n = Fh(x, y)
        assert float(m) == pytest.approx(fm(x, y), rel=1e-12)
        assert float(n) == pytest.approx(fn(x, y), rel=1e-12)
        assert float(Fh.scurl_fd(x, y)) == pytest.approx(curl(x, y), abs=1e-6)


@pytest.mark.parametrize("name", ["identity", "affine", "affine_rev"])
def test_verify_cov_affine_tight(name):
    rep = verify_cov(DIFFEOS[name](), (0.0, 1.0, 0.0, 1.0), FIELDS["rot"])
    assert rep.line_residual <= 1e-10
    assert rep.scurl_residual <= 1e-10
    assert rep.green_residual <= 1e-10


@pytest.mark.parametrize("name", ["identity", "affine", "affine_rev"])
def test_verify_cov_affine_quadratic(name):
    H = DIFFEOS[name]()
    rep = verify_cov(H, (0.0, 1.0, 0.0, 1.0), FIELDS["x2"])
    assert rep.line_residual <= 1e-10 and rep.green_residual <= 1e-10
    # a quadratic pullback has no truncation error; what is left is the
    # rounding of the difference quotient, about |F^| * 2**-52 / step
    c = (np.arange(16) + 0.5) / 16
    m, n = pullback_field(H, FIELDS["x2"])(*np.meshgrid(c, c))
    roundoff = 4 * np.max(np.abs([m, n])) * np.finfo(float).eps / 1e-5
    assert rep.scurl_residual <= max(1e-10, roundoff)


@pytest.mark.parametrize("name", ["identity", "affine", "affine_rev"])
def test_verify_cov_affine_nonaffine_curl(name):
    rep = verify_cov(DIFFEOS[name](), (0.0, 1.0, 0.0, 1.0), FIELDS["cubic"])
    assert rep.line_residual <= 1e-10 and rep.green_residual <= 1e-10
    # central differences at step 1e-5 carry roundoff near 1e-10 for cubics
    assert rep.scurl_residual <= 1e-8


def test_verify_cov_oscillating():
    from combicalc.quadrature import Quadrature

    rep = verify_cov(oscillating(), None, FIELDS["expsin"], Quadrature(8, 64), samples=32)
    assert rep.epsilon == 1
    assert rep.line_residual <= 1e-6 and rep.scurl_residual <= 1e-4
    assert rep.green_residual <= 1e-4
    assert rep.to_dict()["epsilon"] == 1


def test_affine_pullback_is_exact():
    H = DIFFEOS["affine_rev"]()
    G = affine_pullback(H, FIELDS["cubic"])
    x, y = np.array([0.2, -0.7]), np.array([0.4, 1.1])
    assert G.partials_error(x, y) <= 1e-6
    # scurl of the pullback is det A times scurl at the image point
    A = H.matrix
    want = np.linalg.det(A) * FIELDS["cubic"].scurl(*H.H(x, y))
    assert np.allclose(G.scurl(x, y), want, rtol=1e-12)


@pytest.mark.parametrize("name", ["affine", "affine_rev"])
def test_image_green_affine(name):
    H = DIFFEOS[name]()
    for n in (2, 4):
        # affine scurl: the midpoint rule on parallelograms is exact
        assert abs(image_green_residual(H, (0, 1, 0, 1), FIELDS["x2"], n)) <= 1e-8
    errs = [abs(image_green_residual(H, (0, 1, 0, 1), FIELDS["cubic"], n)) for n in (3, 4, 5)]
    assert errs[0] > errs[1] > errs[2]


@pytest.mark.parametrize("name", ["affine", "affine_rev"])
@pytest.mark.parametrize("field", ["x2", "cubic", "expsin"])
def test_green_residual_transported_by_affine_map(name, field):
    from combicalc.refine import REGIONS, green_residual

    H = DIFFEOS[name]()
    Fhat = affine_pullback(H, FIELDS[field])
    for n in (2, 4):
        row = green_residual(REGIONS["square"], Fhat, n)
        image = image_green_residual(H, (0.0, 1.0, 0.0, 1.0), FIELDS[field], n)
        assert row.lhs - row.rhs == pytest.approx(H.epsilon * image, abs=1e-8)
