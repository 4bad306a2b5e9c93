"""Scalar curl of 2x2 matrices, pullbacks through planar maps, and checks of
the change-of-variables identities for line integrals and scalar curl."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .quadrature import Quadrature, QuadratureError
from .refine import SmoothField

__all__ = [
    "Mat2", "mat_scurl", "congruence_residual", "Diffeo", "DIFFEOS", "affine",
    "oscillating", "PulledBack", "pullback_field", "affine_pullback", "CovReport",
    "verify_cov", "image_green_residual", "DiffeoError",
]


class DiffeoError(ValueError):
    pass


@dataclass(frozen=True)
class Mat2:
    """Row-major ``[[a, b], [c, d]]``."""

    a: float
    b: float
    c: float
    d: float

    @classmethod
    def of(cls, m) -> Mat2:
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))

    def array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def T(self) -> Mat2:
        return Mat2(self.a, self.c, self.b, self.d)

    def __matmul__(self, other: Mat2) -> Mat2:
        return Mat2(self.a * other.a + self.b * other.c, self.a * other.b + self.b * other.d,
                    self.c * other.a + self.d * other.c, self.c * other.b + self.d * other.d)

    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def norm(self) -> float:
        """Frobenius norm."""
        return math.hypot(self.a, self.b, self.c, self.d)


def mat_scurl(A: Mat2) -> float:
    return A.c - A.b


def congruence_residual(A: Mat2, B: Mat2) -> float:
    """``scurl(B^T A B) - scurl(A) det(B)``; zero in exact arithmetic."""
    return mat_scurl(B.T @ A @ B) - mat_scurl(A) * B.det()


# -- planar maps ------------------------------------------------------------

Rect = tuple[float, float, float, float]


@dataclass(frozen=True, eq=False)
class Diffeo:
    """A C^2 planar map with analytic Jacobian on ``domain = (x0, x1, y0, y1)``.

    ``H(x, y)`` returns ``(X, Y)``; ``DH(x, y)`` returns an array whose last
    two axes are the Jacobian ``[[dX/dx, dX/dy], [dY/dx, dY/dy]]``.
    """

    name: str
    H: Callable
    DH: Callable
    domain: Rect
    sample: int = 41
    matrix: Optional[np.ndarray] = None

    def __post_init__(self):
        x0, x1, y0, y1 = self.domain
        if not (x1 > x0 and y1 > y0):
            raise DiffeoError("domain must be a rectangle of positive area")

    def contains(self, x, y) -> np.ndarray:
        x0, x1, y0, y1 = self.domain
        return (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)

    def det(self, x, y) -> np.ndarray:
        J = self.DH(np.asarray(x, float), np.asarray(y, float))
        return J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]

    @property
    def epsilon(self) -> int:
        """Sign of det DH, checked on a sample grid of the domain."""
        x0, x1, y0, y1 = self.domain
        xs, ys = np.meshgrid(np.linspace(x0, x1, self.sample), np.linspace(y0, y1, self.sample))
        d = self.det(xs, ys)
        if np.all(d > 0):
            return 1
        if np.all(d < 0):
            return -1
        raise DiffeoError(f"det DH vanishes or changes sign on the domain of {self.name}")


def affine(name: str, A, b=(0.0, 0.0), domain: Rect = (-2.0, 2.0, -2.0, 2.0)) -> Diffeo:
    A = np.asarray(A, float)
    b = np.asarray(b, float)

    def H(x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        return A[0, 0] * x + A[0, 1] * y + b[0], A[1, 0] * x + A[1, 1] * y + b[1]

    def DH(x, y):
        return np.broadcast_to(A, np.shape(x) + (2, 2)).copy()

    return Diffeo(name, H, DH, domain, matrix=A)


def _osc_f(x):
    x = np.asarray(x, float)
    safe = np.where(x == 0, 1.0, x)
    return np.where(x == 0, 0.0, x**3 * np.sin(1.0 / safe))


def _osc_df(x):
    x = np.asarray(x, float)
    safe = np.where(x == 0, 1.0, x)
    return np.where(x == 0, 0.0, 3 * x**2 * np.sin(1.0 / safe) - x * np.cos(1.0 / safe))


def oscillating(delta: float = 1e-2) -> Diffeo:
    """``H(x, y) = (x, y + x^3 sin(1/x))`` on ``[delta, 1] x [0, 1]``.

    The image of the unit square under this map has a boundary that
    oscillates infinitely often near x = 0; the domain stops at ``delta``.
    """
    if not 0 < delta < 1:
        raise DiffeoError("delta must lie in (0, 1)")

    def H(x, y):
        x = np.asarray(x, float)
        return x + 0.0, np.asarray(y, float) + _osc_f(x)

    def DH(x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        J = np.zeros(x.shape + (2, 2))
        J[..., 0, 0] = 1.0
        J[..., 1, 0] = _osc_df(x)
        J[..., 1, 1] = 1.0
        return J

    return Diffeo("oscillating", H, DH, (delta, 1.0, 0.0, 1.0))


DIFFEOS: dict[str, Callable[[], Diffeo]] = {
    "identity": lambda: affine("identity", np.eye(2)),
    "affine": lambda: affine("affine", np.diag([2.0, 3.0])),
    "affine_rev": lambda: affine("affine_rev", [[1.0, 2.0], [1.0, -1.0]], (0.5, -0.25)),
    "oscillating": oscillating,
}


# -- pullback -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PulledBack:
    """Evaluator for ``DH(x)^T F(H(x))``."""

    H: Diffeo
    F: SmoothField

    def __call__(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        if not np.all(self.H.contains(x, y)):
            raise DiffeoError(f"pullback evaluated outside the domain of {self.H.name}")
        m, n = self.F(*self.H.H(x, y))
        J = self.H.DH(x, y)
        return J[..., 0, 0] * m + J[..., 1, 0] * n, J[..., 0, 1] * m + J[..., 1, 1] * n

    def scurl_fd(self, x, y, step: float = 1e-5) -> np.ndarray:
        """Central-difference scalar curl.

        Divides by the spacing actually realised in floating point, which
        removes the rounding of ``x + step`` from the error.
        """
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        xp, xm = x + step, x - step
        yp, ym = y + step, y - step
        dn = (self(xp, y)[1] - self(xm, y)[1]) / (xp - xm)
        dm = (self(x, yp)[0] - self(x, ym)[0]) / (yp - ym)
        return dn - dm


def pullback_field(H: Diffeo, F: SmoothField) -> PulledBack:
    return PulledBack(H, F)


def affine_pullback(H: Diffeo, F: SmoothField) -> SmoothField:
    """Pullback through an affine map, as a SmoothField with exact partials.

    With ``H(x) = A x + b`` the pullback is ``A^T F(H)`` and its Jacobian is
    ``A^T DF(H) A``.
    """
    A = H.matrix
    if A is None:
        raise DiffeoError(f"{H.name} is not affine")

    def comp(i):
        def value(x, y):
            m, n = F(*H.H(x, y))
            return A[0, i] * m + A[1, i] * n
        return value

    def partial(i, j):
        def value(x, y):
            J = F.jacobian(*H.H(x, y))
            return np.einsum("k,...kl,l->...", A[:, i], J, A[:, j])
        return value

    return SmoothField(f"{F.name}@{H.name}", comp(0), comp(1), partial(0, 0), partial(0, 1),
                       partial(1, 0), partial(1, 1))


# -- change-of-variables checks ---------------------------------------------

def _sides(rect: Rect):
    """Counter-clockwise boundary pieces ``(start, direction)`` for t in [0, 1]."""
    x0, x1, y0, y1 = rect
    corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    for k in range(4):
        p = np.array(corners[k])
        q = np.array(corners[(k + 1) % 4])
        yield p, q - p


def _line(p, d):
    return (lambda t: (p[0] + d[0] * t, p[1] + d[1] * t),
            lambda t: (np.full_like(t, d[0]), np.full_like(t, d[1])))


def boundary_integrals(H: Diffeo, rect: Rect, F: SmoothField, q: Quadrature
                       ) -> tuple[float, float]:
    """``(image, pulled)``: the integral of ``F`` over the positively
    oriented boundary of ``H(rect)``, and of the pullback over ``rect``.

    Each smooth side is integrated separately; the image boundary is
    parameterized as ``H`` composed with the side, reversed when ``H``
    reverses orientation.
    """
    eps = H.epsilon
    Fh = pullback_field(H, F)
    image, pulled = [], []
    for p, d in _sides(rect):
        g, dg = _line(p, d)
        pulled.append(q.curve_integral(Fh, g, dg, 0.0, 1.0))

        def Hg(t, g=g):
            return H.H(*g(t))

        def dHg(t, g=g, dg=dg):
            J = H.DH(*g(t))
            vx, vy = dg(t)
            return J[..., 0, 0] * vx + J[..., 0, 1] * vy, J[..., 1, 0] * vx + J[..., 1, 1] * vy

        image.append(q.curve_integral(F, Hg, dHg, 0.0, 1.0))
    return eps * math.fsum(image), math.fsum(pulled)


def _area_integral(fn, rect: Rect, q: Quadrature) -> float:
    x0, x1, y0, y1 = rect
    t, w = q.rule
    X, Y = np.meshgrid(x0 + (x1 - x0) * t, y0 + (y1 - y0) * t, indexing="ij")
    vals = np.asarray(fn(X, Y), float)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("integrand produced non-finite values")
    return float((x1 - x0) * (y1 - y0) * (w @ vals @ w))


@dataclass(frozen=True)
class CovReport:
    epsilon: int
    line_residual: float
    scurl_residual: float
    green_residual: float
    image_integral: float
    pulled_integral: float

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "line_residual": self.line_residual,
                "scurl_residual": self.scurl_residual, "green_residual": self.green_residual,
                "image_integral": self.image_integral, "pulled_integral": self.pulled_integral}


def verify_cov(H: Diffeo, rect: Optional[Rect], F: SmoothField, q: Quadrature = Quadrature(),
               samples: int = 16, fd_step: float = 1e-5) -> CovReport:
    """Compare both sides of the change-of-variables identities on ``rect``.

    * line residual: image boundary integral minus ``eps`` times the
      pullback's boundary integral;
    * scurl residual: largest gap between the finite-difference scalar curl
      of the pullback and ``eps * scurl F(H) * |det DH|`` over a
      ``samples x samples`` grid of cell centres;
    * green residual: image boundary integral minus the area integral of
      ``scurl F(H) |det DH|`` over ``rect`` (Green's theorem on the image).
    """
    rect = H.domain if rect is None else tuple(map(float, rect))
    x0, x1, y0, y1 = rect
    if not np.all(H.contains(np.array([x0, x1]), np.array([y0, y1]))):
        raise DiffeoError("rectangle is not inside the domain of the map")
    if samples < 1:
        raise ValueError("samples must be positive")
    eps = H.epsilon
    image, pulled = boundary_integrals(H, rect, F, q)
    line = abs(image - eps * pulled)

    c = (np.arange(samples) + 0.5) / samples
    X, Y = np.meshgrid(x0 + (x1 - x0) * c, y0 + (y1 - y0) * c, indexing="ij")
    Fh = pullback_field(H, F)
    fd = Fh.scurl_fd(X, Y, fd_step)
    exact = eps * F.scurl(*H.H(X, Y)) * np.abs(H.det(X, Y))
    scurl_res = float(np.max(np.abs(fd - exact)))

    area = _area_integral(lambda x, y: F.scurl(*H.H(x, y)) * np.abs(H.det(x, y)), rect, q)
    return CovReport(eps, line, scurl_res, abs(image - area), image, pulled)


def image_green_residual(H: Diffeo, rect: Rect, F: SmoothField, level: int,
                         q: Quadrature = Quadrature()) -> float:
    """Green residual on ``H(rect)`` with the midpoint rule on the image of
    a ``2**level x 2**level`` grid of ``rect``.

    For affine ``H`` the image cells are parallelograms whose centroid is the
    image of the cell centre and whose area is ``|det| h^2``.
    """
    x0, x1, y0, y1 = rect
    k = 2 ** level
    c = (np.arange(k) + 0.5) / k
    X, Y = np.meshgrid(x0 + (x1 - x0) * c, y0 + (y1 - y0) * c, indexing="ij")
    cell = (x1 - x0) * (y1 - y0) / (k * k)
    terms = F.scurl(*H.H(X, Y)) * np.abs(H.det(X, Y)) * cell
    image, _ = boundary_integrals(H, rect, F, q)
    return image - math.fsum(terms.ravel().tolist())
