"""
Integral cohomology of nerves: groups, orders of classes, the Bockstein
H^p(-; R/Z) -> H^{p+1}(-; Z), and coordinates on the free part.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass, field
from math import inf, isinf

import numpy as np

from .cech import (Cochain, CocycleError, NerveError, Ring, SmoothCochain, circle_distance,
                   coboundary_rows, delta_at_points, is_cocycle)
from .intlinalg import IntMatrix, Reduction, SnfResult, smith_normal_form, verify_snf

__all__ = ["INFINITE", "IntMatrix", "SnfResult", "smith_normal_form", "verify_snf",
           "CohomologyGroup", "ClassInfo", "cohomology", "class_info", "class_order",
           "bockstein", "integral_coboundary", "free_basis", "free_coordinates",
           "coboundary_matrix", "reduction"]

INFINITE = inf
BOCKSTEIN_TOL = 1e-6

_reductions = weakref.WeakKeyDictionary()


def reduction(nerve, p):
    """Cached sparse factorization of delta: C^p -> C^{p+1}."""
    cache = _reductions.setdefault(nerve, {})
    if p not in cache:
        if p + 1 > nerve.max_degree:
            raise NerveError(f"degree {p + 1} exceeds the nerve's degree cap")
        cache[p] = Reduction(coboundary_rows(nerve, p), nerve.count(p))
    return cache[p]


def coboundary_matrix(nerve, p):
    """Dense integer matrix of delta: C^p -> C^{p+1} (rows are (p+1)-simplices)."""
    rows = coboundary_rows(nerve, p)
    n = nerve.count(p)
    return IntMatrix.of([[r.get(j, 0) for j in range(n)] for r in rows], n)


@dataclass(frozen=True)
class CohomologyGroup:
    free_rank: int
    torsion_factors: tuple = ()

    def __post_init__(self):
        t = tuple(int(x) for x in self.torsion_factors)
        if any(x < 2 for x in t) or any(b % a for a, b in zip(t, t[1:])):
            raise ValueError("torsion factors must be >= 2 and in divisibility order")
        object.__setattr__(self, "torsion_factors", t)

    def __str__(self):
        parts = ["Z"] * self.free_rank + [f"Z/{t}" for t in self.torsion_factors]
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class ClassInfo:
    is_coboundary: bool
    order: float  # positive int, or INFINITE

    def __post_init__(self):
        if self.is_coboundary and self.order != 1:
            raise ValueError("a coboundary has order 1")

    @property
    def is_torsion(self):
        return not isinf(self.order)

    def to_json(self):
        return {"is_coboundary": self.is_coboundary,
                "order": "infinite" if isinf(self.order) else int(self.order)}


def cohomology(nerve, k):
    """H^k of the nerve's cochain complex with integer coefficients."""
    if k < 0 or k + 1 > nerve.max_degree:
        raise NerveError(f"degree {k} out of range for cap {nerve.max_degree}")
    out_rank = reduction(nerve, k).rank
    if k == 0:
        in_rank, torsion = 0, ()
    else:
        red = reduction(nerve, k - 1)
        in_rank, torsion = red.rank, red.torsion
    return CohomologyGroup(nerve.count(k) - out_rank - in_rank, torsion)


def class_order(matrix, b):
    """Order of ``b`` in the cokernel of an integer matrix (a synthetic complex)."""
    if not isinstance(matrix, IntMatrix):
        matrix = IntMatrix.of(matrix)
    rows = [{j: v for j, v in enumerate(r) if v} for r in matrix.entries]
    return Reduction(rows, matrix.cols).order(list(b))


def _int_values(z):
    return {i: int(v) for i, v in enumerate(z.values) if v}


def class_info(z, nerve):
    """Coboundary test and order of the class of an integral cocycle."""
    if z.ring is not Ring.INT:
        raise ValueError("class_info expects an INT cochain")
    if not is_cocycle(z, nerve):
        raise CocycleError("not a cocycle")
    if z.degree == 0:
        order = 1 if not np.any(z.values) else INFINITE
    else:
        order = reduction(nerve, z.degree - 1).order(_int_values(z))
    return ClassInfo(order == 1, order)


def integral_coboundary(lift, nerve, tol=BOCKSTEIN_TOL):
    """``delta`` of a real lift of a circle cocycle, rounded to integers.

    Raises CocycleError when a component (at any sample point) is farther
    than ``tol`` from an integer or, for smooth lifts, is not locally constant.
    """
    vals = delta_at_points(lift, nerve)
    if vals.size == 0:
        return Cochain(lift.degree + 1, Ring.INT, np.zeros(nerve.count(lift.degree + 1)))
    rounded = np.round(vals)
    worst = float(np.abs(vals - rounded).max())
    if worst > tol:
        raise CocycleError(f"delta(lift) is {worst:.3g} away from the integers")
    if np.any(rounded != rounded[:, :1]):
        raise CocycleError("delta(lift) is not locally constant")
    return Cochain(lift.degree + 1, Ring.INT, rounded[:, 0].astype(np.int64))


def bockstein(g, nerve, tol=BOCKSTEIN_TOL):
    """Integral cocycle representing the image of a circle cocycle under the Bockstein.

    Constant cochains are lifted to representatives in [0, 1); smooth ones
    use their stored continuous lift.
    """
    if g.ring is not Ring.CIRCLE:
        raise ValueError("bockstein expects a CIRCLE cochain")
    lift = g.lift()
    return integral_coboundary(lift, nerve, tol)


class FreeBasis:
    """Coordinates on H^k(nerve; Z)/torsion.

    ``coordinates(z)`` is linear and integral on integral cocycles; it kills
    coboundaries and torsion.  ``cocycles[j]`` is an integral cocycle with
    coordinates ``e_j``.  Applied to a real cocycle the coordinates are its
    class in H^k(nerve; R) in the same basis.
    """

    def __init__(self, nerve, k):
        self.nerve, self.k = nerve, k
        n = nerve.count(k)
        if k == 0:
            self._inc = None
            gens = [{i: 1} for i in range(n)]
        else:
            self._inc = reduction(nerve, k - 1)
            gens = self._inc.coker_generators()
        self._gens = gens
        out_rows = coboundary_rows(nerve, k) if k + 1 <= nerve.max_degree else []
        # columns of B restricted to the free generators
        cols_of = [dict() for _ in range(len(out_rows))]
        by_simplex = {}
        for r, row in enumerate(out_rows):
            for j, v in row.items():
                by_simplex.setdefault(j, []).append((r, v))
        bbar = [dict() for _ in range(len(out_rows))]
        for c, g in enumerate(gens):
            acc = {}
            for j, gv in g.items():
                for r, v in by_simplex.get(j, ()):
                    acc[r] = acc.get(r, 0) + v * gv
            for r, v in acc.items():
                if v:
                    bbar[r][c] = v
        self._out = Reduction(bbar, len(gens))
        self.lattice = self._out.kernel()
        self.rank = len(self.lattice)
        self.cocycles = []
        for v in self.lattice:
            vec = np.zeros(n, dtype=np.int64)
            for c, a in v.items():
                for j, gv in gens[c].items():
                    vec[j] += a * gv
            self.cocycles.append(Cochain(k, Ring.INT, vec))

    def _coker(self, values):
        vals = {i: v for i, v in enumerate(values) if v}
        if self._inc is None:
            return [vals.get(i, 0) for i in range(self.nerve.count(0))]
        return self._inc.coker_coordinates(vals)

    def coordinates(self, z):
        vals = z.values if isinstance(z, Cochain) else np.asarray(z)
        if vals.dtype.kind in "iu":
            vals = [int(v) for v in vals]
        else:
            vals = [float(v) for v in vals]
        return self._out.kernel_coordinates(self._coker(vals))


_free = weakref.WeakKeyDictionary()


def free_basis(nerve, k):
    cache = _free.setdefault(nerve, {})
    if k not in cache:
        cache[k] = FreeBasis(nerve, k)
    return cache[k]


def free_coordinates(z, nerve):
    """Integer coordinates of the class of ``z`` in H^k / torsion."""
    return [int(c) for c in free_basis(nerve, z.degree).coordinates(z)]
