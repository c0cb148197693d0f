"""
The bundle gerbe on T^3 built from Y = R^3.

Y^[p] is the set of p-tuples of points of R^3 whose pairwise differences
are integer vectors.  The gerbe is the trivial bundle on Y^[2] with product
twisted by c = exp(2 pi i gamma), where

    gamma(x, y, z) = (y^1 - z^1)(x^2 - y^2) x^3 .

Forms that the construction writes with a factor 2 pi i are stored divided
by it, so every integrality statement is literal:

    A(x, y)  = -(x^1 - y^1) x^2 theta^3          connection
    f(x)     = x^1 theta^2 ∧ theta^3               curving
    omega    = theta^1 ∧ theta^2 ∧ theta^3         three-curvature
"""

from __future__ import annotations

import numpy as np

from . import cech
from .cech import Ring, SmoothCochain, build_nerve
from .forms import LatticeForm
from .gerbe import CechGerbe

FIBER_TOL = 1e-9


def fiber_tuple(points, tol=FIBER_TOL):
    """Validate a tuple of points of R^3 lying over a single point of T^3."""
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[1] != 3 or not 1 <= len(P) <= 4:
        raise ValueError("a fibre tuple is 1 to 4 points of R^3")
    diff = P - P[0]
    if np.abs(diff - np.round(diff)).max() > tol:
        raise ValueError("points of a fibre tuple must differ by integer vectors")
    return P


def _gamma(x, y, z):
    return (y[..., 0] - z[..., 0]) * (x[..., 1] - y[..., 1]) * x[..., 2]


def gamma(t):
    x, y, z = fiber_tuple(t)
    return float(_gamma(x, y, z))


def circle_c(t):
    """c = exp(2 pi i gamma), as a point of R/Z."""
    return float(cech.reduce_mod1(gamma(t)))


def delta_gamma_batch(T):
    """delta(gamma) on tuples of shape (m, 4, 3), three ways.

    Returns (alternating sum, exact closed form, printed closed form).  With
    a = y - x, b = z - y, c = w - z the alternating sum equals c^1 b^2 a^3
    identically.  The printed form gamma(a, b, c) is also an integer on
    Y^[4] but differs from the alternating sum by an integer in general.
    """
    T = np.asarray(T, dtype=float)
    x, y, z, w = T[:, 0], T[:, 1], T[:, 2], T[:, 3]
    alt = _gamma(y, z, w) - _gamma(x, z, w) + _gamma(x, y, w) - _gamma(x, y, z)
    a, b, c = y - x, z - y, w - z
    exact = c[:, 0] * b[:, 1] * a[:, 2]
    printed = _gamma(a, b, c)
    return alt, exact, printed


def delta_gamma(t, tol=FIBER_TOL):
    """delta(gamma) at a point of Y^[4]; checks the closed forms and integrality."""
    P = fiber_tuple(t)
    if len(P) != 4:
        raise ValueError("delta(gamma) lives on Y^[4]")
    alt, exact, printed = (float(v[0]) for v in delta_gamma_batch(P[None]))
    if abs(alt - exact) > tol:
        raise AssertionError(f"alternating sum {alt} differs from closed form {exact}")
    if abs(alt - round(alt)) > tol:
        raise AssertionError(f"delta(gamma) = {alt} is not an integer")
    if cech.circle_distance(alt - printed) > tol:
        raise AssertionError(f"gamma(y-x, z-y, w-z) = {printed} is not congruent to {alt}")
    return alt


def random_fiber_tuples(rng, count, size, spread=3):
    """Random points of Y^[size]: a base point in [0,1)^3 plus integer offsets."""
    base = rng.random((count, 1, 3))
    offsets = rng.integers(-spread, spread + 1, size=(count, size, 3))
    return base + offsets


# -- forms ------------------------------------------------------------------

def gamma_form():
    return LatticeForm(0, 3, {(): lambda P: _gamma(P[:, 0], P[:, 1], P[:, 2])})


def connection_A(level=1):
    return LatticeForm(1, 2, {(3,): lambda P: -level * (P[:, 0, 0] - P[:, 1, 0]) * P[:, 0, 1]})


def curving_f(level=1):
    return LatticeForm(2, 1, {(2, 3): lambda P: level * P[:, 0, 0]})


def three_curvature(level=1):
    return LatticeForm(3, 1, {(1, 2, 3): lambda P: level * np.ones(len(P))})


def connection_at(t):
    """Coefficients of A at a point of Y^[2]."""
    return connection_A().at(fiber_tuple(t)[None])


def check_connection(T):
    """max |delta(A) - d(gamma)| over tuples of shape (m, 3, 3) (or one tuple)."""
    T = np.asarray(T, dtype=float)
    if T.ndim == 2:
        T = fiber_tuple(T)[None]
    return connection_A().delta().residual(gamma_form().d(), T)


def check_curving(T):
    """max |delta(f) - dA| over tuples of shape (m, 2, 3)."""
    return curving_f().delta().residual(connection_A().d(), np.asarray(T, dtype=float))


def check_three_curvature(pts, level=1):
    """max |df - pi^* omega| over points of shape (m, 1, 3)."""
    return curving_f(level).d().residual(three_curvature(level), np.asarray(pts, dtype=float))


def curvature_integral(n=8, level=1):
    return three_curvature(level).integrate(n)


# -- Čech presentation --------------------------------------------------------

def cech_cocycle(resolution=3, overlap=None, level=1, max_degree=4):
    """The gerbe on the product-arc nerve of T^3.

    Over the box U_a, the local section s_a lifts each coordinate into the
    real interval of that arc, and ``g_abc = gamma(s_a, s_b, s_c) mod 1``.
    The lifts are kept, so ``g`` is a smooth circle cochain whose Bockstein is
    ``delta(gamma)`` evaluated on the integer differences of the sections.
    """
    cover = cech.torus_cover(resolution, 3, overlap)
    nerve = build_nerve(cover, max_degree)
    return CechGerbe(nerve, section_cochain(nerve, level))


def section_cochain(nerve, level=1):
    space = nerve.cover.space
    arcs = space.factors
    boxes = [space.split(i) for i in range(nerve.vertex_count)]

    def section(alpha, pts):
        return np.stack([arcs[k].lift(alpha[k], pts[:, k]) for k in range(3)], axis=1)

    def make(tri):
        a, b, c = (boxes[i] for i in tri)

        def g(pts):
            pts = np.asarray(pts, dtype=float)
            return level * _gamma(section(a, pts), section(b, pts), section(c, pts))
        return g

    return SmoothCochain(2, Ring.CIRCLE, tuple(make(t) for t in nerve.simplices[2]))
