"""
Bundle gerbes over finite covers.

A gerbe is presented by the trivial circle bundle on pairwise overlaps with
its product twisted by a circle 2-cocycle ``g``: the product of the fibres
over (a, b) and (b, c) lands in the fibre over (a, c) after multiplying by
``g_abc``.  Associativity of that product is exactly ``delta(g) = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isinf

import numpy as np

from . import cech
from .cech import (Cochain, CocycleError, Cover, NerveError, Ring, SmoothCochain, build_nerve,
                   max_violation, pullback, sort_sign)
from .homology import (ClassInfo, CohomologyGroup, bockstein, class_info, cohomology,
                       free_coordinates, reduction)
from .spaces import ArcSpace, ProductSpace, SphereSpace

COCYCLE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class CechGerbe:
    nerve: cech.Nerve
    g: object  # Cochain or SmoothCochain, ring CIRCLE, degree 2

    def __repr__(self):
        kind = "smooth" if isinstance(self.g, SmoothCochain) else "constant"
        return f"CechGerbe({self.nerve!r}, {kind})"


@dataclass(frozen=True)
class DDClass:
    cocycle: Cochain
    info: ClassInfo
    ambient: CohomologyGroup

    @property
    def order(self):
        return self.info.order

    def pairing(self, cycle):
        return cech.pairing(self.cocycle, cycle)

    def to_json(self, nerve=None, cycles=None):
        out = {"order": "infinite" if isinf(self.order) else int(self.order),
               "torsion_factors": list(self.ambient.torsion_factors),
               "free_rank": self.ambient.free_rank}
        if cycles is not None:
            out["free_pairings"] = [self.pairing(c) for c in cycles]
        elif nerve is not None:
            out["free_pairings"] = free_coordinates(self.cocycle, nerve)
        return out


def from_cocycle(nerve, g, tol=COCYCLE_TOL):
    """Gerbe with trivial bundle and product twisted by ``g``.

    Rejects ``g`` unless ``delta(g) = 0 mod 1``, i.e. unless the product is associative.
    """
    if g.ring is Ring.INT:
        g = g.as_ring(Ring.CIRCLE)
    if g.ring is not Ring.CIRCLE or g.degree != 2:
        raise ValueError("a gerbe needs a CIRCLE 2-cochain")
    if isinstance(g, Cochain):
        g.check(nerve)
    elif len(g.funcs) != nerve.count(2):
        raise ValueError("cochain does not match the nerve")
    worst = max_violation(g, nerve)
    if worst > tol:
        raise CocycleError(f"product is not associative: max |delta g| = {worst:.3g}")
    return CechGerbe(nerve, g)


def trivial(nerve):
    return CechGerbe(nerve, Cochain.zeros(nerve, 2, Ring.CIRCLE))


def dual(G):
    return CechGerbe(G.nerve, -G.g)


def tensor_reduced(G1, G2):
    if G1.nerve is not G2.nerve:
        if G1.nerve.simplices != G2.nerve.simplices:
            raise NerveError("reduced tensor product needs the same nerve")
    return CechGerbe(G1.nerve, G1.g + G2.g)


def power(G, n):
    """n-fold reduced tensor power (negative n uses the dual)."""
    return CechGerbe(G.nerve, int(n) * G.g)


def refine(G, fine, vmap=None):
    """Pull a gerbe back to a finer cover along a containment map."""
    if vmap is None:
        vmap = cech.refinement_map(fine, G.nerve)
    else:
        cech.check_refinement(fine, G.nerve, vmap)
    return CechGerbe(fine, pullback(G.g, G.nerve, fine, vmap))


def dd(G):
    """Dixmier-Douady class: Bockstein of ``g`` with its order and ambient group."""
    z = bockstein(G.g, G.nerve)
    return DDClass(z, class_info(z, G.nerve), cohomology(G.nerve, 3))


def partition_contraction(c, nerve):
    """``h`` with ``delta(h) = c`` for a real cocycle ``c``, via a partition of unity.

    ``h_s = sum_e rho_e * c(e, s)``; needs the cover's geometry.
    """
    space = nerve.cover.space if nerve.cover is not None else None
    if space is None:
        raise NerveError("a partition of unity needs cover geometry")
    p = c.degree
    terms = []
    for s in nerve.simplices[p - 1]:
        row = []
        for e in range(nerve.vertex_count):
            if e in s:
                continue
            srt, sg = sort_sign((e,) + s)
            j = nerve.find(srt)
            if j is not None:
                row.append((e, j, sg))
        terms.append(row)
    smooth = c if isinstance(c, SmoothCochain) else SmoothCochain.from_cochain(c)

    def make(row):
        def h(pts):
            pts = np.asarray(pts, dtype=float)
            rho = space.partition(pts)
            out = np.zeros(len(pts))
            for e, j, sg in row:
                mask = rho[:, e] > 0
                if np.any(mask):
                    out[mask] += sg * rho[mask, e] * smooth.evaluate(j, pts[mask])
            return out
        return h

    return SmoothCochain(p - 1, Ring.REAL, tuple(make(row) for row in terms))


def is_trivial(G):
    """A trivialization ``q`` with ``delta(q) = g`` (mod 1), or None.

    Returns a constant cochain when one exists, otherwise a smooth one built
    from a partition of unity.  None exactly when the DD class is nonzero.
    """
    info = dd(G).info
    if info.order != 1:
        return None
    if isinstance(G.g, Cochain):
        q = cech.solve_coboundary(G.g, G.nerve)
        if q is not None:
            return q
    z = bockstein(G.g, G.nerve)
    m = reduction(G.nerve, 2).solve({i: int(v) for i, v in enumerate(z.values) if v})
    if m is None:
        raise AssertionError("class_info reported order 1 but no integral primitive exists")
    mvals = np.zeros(G.nerve.count(2))
    for j, v in m.items():
        mvals[j] = v
    c = G.g.lift() - Cochain(2, Ring.REAL, mvals)
    h = partition_contraction(c, G.nerve).as_ring(Ring.CIRCLE)
    residual = max_violation_pair(h, G.g, G.nerve)
    if residual > 1e-8:
        raise AssertionError(f"partition-of-unity trivialization off by {residual:.3g}")
    return h


def max_violation_pair(q, g, nerve, count=2):
    """max over sample points of the circle distance between delta(q) and g."""
    d = cech.delta_at_points(q, nerve, count)
    if isinstance(g, Cochain):
        gv = np.repeat(g.values[:, None], count, axis=1)
    else:
        gv = cech.evaluate_on(g, nerve, count=count)
    return float(cech.circle_distance(d - gv).max(initial=0.0))


# -- tensor products over different covers ---------------------------------

def _joint_intersects(s1, idx1, s2, idx2):
    if isinstance(s1, ArcSpace) and isinstance(s2, ArcSpace):
        pieces = s1.common(idx1)
        return bool(cech_intersect(pieces, s2.common(idx2)))
    if isinstance(s1, SphereSpace) and isinstance(s2, SphereSpace):
        return s1.intersects(tuple(idx1) + tuple(idx2))
    if isinstance(s1, ProductSpace) and isinstance(s2, ProductSpace) and \
            len(s1.factors) == len(s2.factors):
        p1 = list(zip(*(s1.split(i) for i in idx1)))
        p2 = list(zip(*(s2.split(i) for i in idx2)))
        return all(_joint_intersects(f, tuple(sorted(set(a))), h, tuple(sorted(set(b))))
                   for f, a, h, b in zip(s1.factors, p1, s2.factors, p2))
    raise NerveError("covers are not on a common base")


def cech_intersect(a, b):
    from .spaces import _intersect_pieces
    return _intersect_pieces(list(a), list(b))


def _joint_points(s1, idx1, s2, idx2, count):
    if isinstance(s1, ArcSpace):
        pieces = cech_intersect(s1.common(idx1), s2.common(idx2))
        lo, hi = max(pieces, key=lambda p: p[1] - p[0])
        frac = 0.5 + 0.4 * (np.arange(count) / max(count, 1)) * np.where(np.arange(count) % 2, 1, -1)
        return (lo + (hi - lo) * frac).reshape(-1, 1)
    if isinstance(s1, SphereSpace):
        return s1.points(tuple(idx1) + tuple(idx2), count)
    p1 = list(zip(*(s1.split(i) for i in idx1)))
    p2 = list(zip(*(s2.split(i) for i in idx2)))
    return np.hstack([_joint_points(f, tuple(sorted(set(a))), h, tuple(sorted(set(b))), count)
                      for f, a, h, b in zip(s1.factors, p1, s2.factors, p2)])


class PairSpace:
    """Cover by pairwise intersections U_a ∩ V_b of two covers of one base."""

    def __init__(self, s1, s2):
        self.s1, self.s2 = s1, s2
        self.pairs = [(a, b) for a in range(s1.size) for b in range(s2.size)
                      if _joint_intersects(s1, (a,), s2, (b,))]
        self.size = len(self.pairs)
        self.dim = s1.dim

    def _split(self, idx):
        a = tuple(sorted({self.pairs[i][0] for i in idx}))
        b = tuple(sorted({self.pairs[i][1] for i in idx}))
        return a, b

    def intersects(self, idx):
        a, b = self._split(idx)
        return _joint_intersects(self.s1, a, self.s2, b)

    def points(self, idx, count):
        a, b = self._split(idx)
        return _joint_points(self.s1, a, self.s2, b, count)

    def member(self, i, pts):
        a, b = self.pairs[i]
        return self.s1.member(a, pts) & self.s2.member(b, pts)

    def partition(self, pts):
        r1, r2 = self.s1.partition(pts), self.s2.partition(pts)
        return np.stack([r1[:, a] * r2[:, b] for a, b in self.pairs], axis=1)


def common_refinement(n1, n2, max_degree=None):
    """Nerve of the cover by pairwise intersections, with maps to both factors."""
    if n1.cover is None or n2.cover is None or n1.cover.geometry != n2.cover.geometry:
        raise NerveError("covers are not of the same base")
    space = PairSpace(n1.cover.space, n2.cover.space)
    cover = Cover(space.size, space.intersects, n1.cover.geometry, space)
    nerve = build_nerve(cover, max_degree or min(n1.max_degree, n2.max_degree))
    return nerve, [a for a, _ in space.pairs], [b for _, b in space.pairs]


def tensor(G1, G2):
    """Tensor product of gerbes on two covers of the same base.

    Identical covers use the diagonal of the pairwise-intersection cover;
    when one cover refines the other the coarse gerbe is pulled back;
    otherwise the pairwise-intersection nerve is built.
    """
    n1, n2 = G1.nerve, G2.nerve
    if n1 is n2 or (n1.simplices == n2.simplices and n1.cover is n2.cover):
        return tensor_reduced(G1, G2)
    if n1.cover is None or n2.cover is None or n1.cover.geometry != n2.cover.geometry:
        raise NerveError("covers are not of the same base")
    for fine, coarse, Gf, Gc in ((n1, n2, G1, G2), (n2, n1, G2, G1)):
        try:
            vmap = cech.refinement_map(fine, coarse)
        except NerveError:
            continue
        return tensor_reduced(Gf, refine(Gc, fine, vmap))
    nerve, m1, m2 = common_refinement(n1, n2)
    return CechGerbe(nerve, pullback(G1.g, n1, nerve, m1) + pullback(G2.g, n2, nerve, m2))
