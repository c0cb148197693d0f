"""
Covers, nerves and Čech cochains.

U(1) is written additively as R/Z throughout: a circle value is a float in
[0, 1), and a multiplicative identity such as ``delta(c) = 1`` becomes
``delta(c) = 0 mod 1``.  Cochains live on strictly increasing index tuples;
on a permuted tuple the value picks up the sign of the permutation, and a
tuple with a repeated index carries zero.

Two kinds of cochain are supported.  :class:`Cochain` is locally constant
(one number per simplex).  :class:`SmoothCochain` carries one real-valued
function per simplex, defined on the corresponding intersection of cover
sets; for a circle cochain the functions are continuous real lifts.  The
second kind is what non-torsion gerbes need: a locally constant circle
2-cocycle always has a torsion Bockstein.
"""

from __future__ import annotations

import enum
import json
import weakref
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, permutations

import numpy as np

from .spaces import ArcSpace, ProductSpace, SimplexSpace, SphereSpace

DEFAULT_DEGREE_CAP = 4


class Ring(enum.Enum):
    INT = "Z"
    REAL = "R"
    CIRCLE = "R/Z"


class NerveError(ValueError):
    pass


class CocycleError(ValueError):
    pass


def reduce_mod1(x):
    """Canonical representative in [0, 1)."""
    y = np.mod(np.asarray(x, dtype=float), 1.0)
    return np.where(y >= 1.0, 0.0, y)


def circle_distance(x):
    """Distance of real numbers to the nearest integer."""
    x = np.asarray(x, dtype=float)
    return np.abs(x - np.round(x))


def sort_sign(tup):
    """Sort a tuple of distinct items; return (sorted tuple, permutation sign).

    Returns sign 0 if an item repeats.
    """
    items = list(tup)
    sign = 1
    for i in range(1, len(items)):
        j = i
        while j > 0 and items[j - 1] > items[j]:
            items[j - 1], items[j] = items[j], items[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(items, items[1:]):
        if a == b:
            return tuple(items), 0
    return tuple(items), sign


@dataclass(frozen=True)
class Cover:
    """A finite open cover described by its intersection pattern.

    ``intersects`` decides whether the sets with the given indices have a
    common point.  ``space`` (optional) supplies geometry: sample points in
    intersections and a partition of unity.
    """

    index_count: int
    intersects: object
    geometry: str = "abstract"
    space: object = None

    def __post_init__(self):
        if self.index_count < 1:
            raise NerveError("a cover needs at least one set")


@dataclass(frozen=True, eq=False)
class Nerve:
    """Simplices of a nerve by degree, as lexicographically sorted index tuples."""

    vertex_count: int
    simplices: tuple
    cover: Cover = None

    @property
    def max_degree(self):
        return len(self.simplices) - 1

    def count(self, p):
        return len(self.simplices[p]) if 0 <= p <= self.max_degree else 0

    @cached_property
    def _index(self):
        return [{s: i for i, s in enumerate(level)} for level in self.simplices]

    def index(self, simplex):
        return self._index[len(simplex) - 1][tuple(simplex)]

    def find(self, simplex):
        p = len(simplex) - 1
        if p > self.max_degree:
            return None
        return self._index[p].get(tuple(simplex))

    @cached_property
    def _faces(self):
        out = [None]
        for p in range(1, self.max_degree + 1):
            idx = self._index[p - 1]
            arr = np.array([[idx[s[:i] + s[i + 1:]] for i in range(p + 1)]
                            for s in self.simplices[p]], dtype=np.int64)
            out.append(arr.reshape(len(self.simplices[p]), p + 1))
        return out

    def faces(self, p):
        """Array (count(p), p + 1): index of the face omitting vertex i."""
        return self._faces[p]

    def sizes(self):
        return [len(level) for level in self.simplices]

    def __repr__(self):
        return f"Nerve(vertices={self.vertex_count}, sizes={self.sizes()})"


def build_nerve(cover, max_degree=DEFAULT_DEGREE_CAP):
    """Enumerate all nonempty intersections of up to ``max_degree + 1`` sets."""
    if max_degree < 3:
        raise NerveError("degree cap must be at least 3")
    n = cover.index_count
    levels = [[(i,) for i in range(n) if cover.intersects((i,))]]
    if len(levels[0]) != n:
        raise NerveError("every cover set must be nonempty")
    nbrs = [set() for _ in range(n)]
    for i, j in combinations(range(n), 2):
        if cover.intersects((i, j)):
            nbrs[i].add(j)
            nbrs[j].add(i)
    levels.append(sorted((i, j) for i in range(n) for j in nbrs[i] if i < j))
    # pruning by neighbours never asks about a triple with an empty edge, so
    # probe those directly where the other two edges are present
    for i, j in combinations(range(n), 2):
        if j not in nbrs[i]:
            for k in nbrs[i] & nbrs[j]:
                if cover.intersects(tuple(sorted((i, j, k)))):
                    raise NerveError(f"intersection oracle not downward closed at {(i, j, k)}")
    for p in range(2, max_degree + 1):
        prev = set(levels[-1])
        nxt = []
        for s in levels[-1]:
            cand = set.intersection(*(nbrs[v] for v in s))
            for v in sorted(c for c in cand if c > s[-1]):
                t = s + (v,)
                if cover.intersects(t):
                    for i in range(len(t)):
                        if t[:i] + t[i + 1:] not in prev:
                            raise NerveError(f"intersection oracle not downward closed at {t}")
                    nxt.append(t)
        levels.append(sorted(nxt))
    # a lower-level simplex reported nonempty must not hide an empty face
    for p in range(2, len(levels)):
        lower = set(levels[p - 1])
        for t in levels[p]:
            for i in range(len(t)):
                if t[:i] + t[i + 1:] not in lower:
                    raise NerveError(f"intersection oracle not downward closed at {t}")
    return Nerve(n, tuple(tuple(level) for level in levels), cover)


def nerve_from_simplices(vertex_count, simplices, max_degree=DEFAULT_DEGREE_CAP, close=True):
    """Nerve of the open-star cover of an abstract complex.

    With ``close=True`` all faces of the given simplices are added; otherwise
    the list must already be closed under taking faces.
    """
    given = {tuple(sorted(s)) for s in simplices}
    given |= {(v,) for v in range(vertex_count)}
    for s in given:
        if len(set(s)) != len(s) or any(not 0 <= v < vertex_count for v in s):
            raise NerveError(f"bad simplex {s}")
    if close:
        full = set()
        for s in given:
            for k in range(1, len(s) + 1):
                full.update(combinations(s, k))
    else:
        full = given
        for s in given:
            for i in range(len(s)):
                f = s[:i] + s[i + 1:]
                if f and f not in full:
                    raise NerveError(f"face {f} of {s} missing")
    space = SimplexSpace(vertex_count, full)
    cover = Cover(vertex_count, space.intersects, "abstract", space)
    return build_nerve(cover, max_degree)


# -- cochains -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Cochain:
    """Locally constant cochain: one value per ``degree``-simplex."""

    degree: int
    ring: Ring
    values: np.ndarray

    def __post_init__(self):
        dtype = np.int64 if self.ring is Ring.INT else float
        vals = np.asarray(self.values)
        if self.ring is Ring.INT and vals.size and not np.all(np.round(vals) == vals):
            raise ValueError("INT cochain with non-integer values")
        vals = vals.astype(dtype)
        if self.ring is Ring.CIRCLE:
            vals = reduce_mod1(vals)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, nerve, degree, ring):
        return cls(degree, ring, np.zeros(nerve.count(degree)))

    def check(self, nerve):
        if len(self.values) != nerve.count(self.degree):
            raise ValueError(f"cochain has {len(self.values)} values, nerve has "
                             f"{nerve.count(self.degree)} {self.degree}-simplices")
        return self

    def _same(self, other):
        if self.degree != other.degree or len(self.values) != len(other.values):
            raise ValueError("cochains live on different simplices")

    def __add__(self, other):
        if isinstance(other, SmoothCochain):
            return other + self
        self._same(other)
        ring = self.ring if self.ring is other.ring else _join(self.ring, other.ring)
        return Cochain(self.degree, ring, self.values + other.values)

    def __neg__(self):
        return Cochain(self.degree, self.ring, -self.values)

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, n):
        if self.ring is Ring.INT and int(n) != n:
            raise ValueError("INT cochains scale by integers only")
        return Cochain(self.degree, self.ring, n * self.values)

    def as_ring(self, ring):
        return Cochain(self.degree, ring, self.values)

    def lift(self):
        """REAL cochain of representatives in [0, 1) (identity for INT/REAL)."""
        return Cochain(self.degree, Ring.REAL, self.values)

    def equals(self, other, tol=0.0):
        self._same(other)
        diff = self.values.astype(float) - other.values.astype(float)
        if Ring.CIRCLE in (self.ring, other.ring):
            diff = circle_distance(diff)
        return bool(np.all(np.abs(diff) <= tol))

    def to_json(self):
        vals = [int(v) for v in self.values] if self.ring is Ring.INT else [float(v) for v in self.values]
        return {"degree": self.degree, "ring": self.ring.value, "values": vals}

    @classmethod
    def from_json(cls, obj):
        return cls(int(obj["degree"]), Ring(obj["ring"]), np.array(obj["values"]))

    def __repr__(self):
        return f"Cochain(degree={self.degree}, ring={self.ring.value}, n={len(self.values)})"


def _join(a, b):
    if Ring.CIRCLE in (a, b):
        return Ring.CIRCLE
    if Ring.REAL in (a, b):
        return Ring.REAL
    return Ring.INT


@dataclass(frozen=True, eq=False)
class SmoothCochain:
    """Cochain of functions: entry ``i`` is a constant or a callable on points.

    A callable maps an ``(m, dim)`` array of points of the intersection to
    ``m`` real values.  For ring CIRCLE the functions are continuous real
    lifts; the circle cochain is their reduction mod 1.
    """

    degree: int
    ring: Ring
    funcs: tuple

    def __post_init__(self):
        if self.ring is Ring.INT:
            raise ValueError("smooth cochains are REAL or CIRCLE valued")
        object.__setattr__(self, "funcs", tuple(self.funcs))

    @classmethod
    def from_cochain(cls, c):
        ring = Ring.REAL if c.ring is Ring.INT else c.ring
        return cls(c.degree, ring, tuple(float(v) for v in c.values))

    @property
    def values(self):
        raise TypeError("a smooth cochain has no constant values; use evaluate()")

    def evaluate(self, i, pts):
        f = self.funcs[i]
        if callable(f):
            return np.asarray(f(pts), dtype=float)
        return np.full(len(pts), float(f))

    def _combine(self, other, op, ring=None):
        if self.degree != other.degree or len(self.funcs) != len(other.funcs):
            raise ValueError("cochains live on different simplices")
        return SmoothCochain(self.degree, ring or _join(self.ring, other.ring),
                             tuple(_combine_fn(f, g, op) for f, g in zip(self.funcs, other.funcs)))

    def __add__(self, other):
        if isinstance(other, Cochain):
            other = SmoothCochain(other.degree, _join(self.ring, other.ring),
                                  tuple(float(v) for v in other.values))
        return self._combine(other, np.add)

    def __neg__(self):
        return SmoothCochain(self.degree, self.ring, tuple(_scale_fn(f, -1.0) for f in self.funcs))

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, n):
        if self.ring is Ring.CIRCLE and int(n) != n:
            raise ValueError("circle cochains scale by integers only")
        return SmoothCochain(self.degree, self.ring, tuple(_scale_fn(f, n) for f in self.funcs))

    def as_ring(self, ring):
        return SmoothCochain(self.degree, ring, self.funcs)

    def lift(self):
        return SmoothCochain(self.degree, Ring.REAL, self.funcs)

    def __repr__(self):
        return f"SmoothCochain(degree={self.degree}, ring={self.ring.value}, n={len(self.funcs)})"


def _combine_fn(f, g, op):
    if not callable(f) and not callable(g):
        return float(op(f, g))
    ff = f if callable(f) else (lambda pts, v=float(f): np.full(len(pts), v))
    gg = g if callable(g) else (lambda pts, v=float(g): np.full(len(pts), v))
    return lambda pts: op(ff(pts), gg(pts))


def _scale_fn(f, a):
    if not callable(f):
        return float(a * f)
    if a == 1:
        return f
    return lambda pts: a * f(pts)


# -- coboundary -----------------------------------------------------------

def delta(c, nerve):
    """Simplicial coboundary: alternating sum over faces, in ``c``'s ring."""
    p = c.degree
    if p + 1 > nerve.max_degree:
        raise NerveError(f"degree {p + 1} exceeds the nerve's degree cap {nerve.max_degree}")
    faces = nerve.faces(p + 1)
    if isinstance(c, SmoothCochain):
        funcs = []
        for row in faces:
            terms = [(c.funcs[j], (-1) ** i) for i, j in enumerate(row)]
            funcs.append(_alternating_fn(terms))
        return SmoothCochain(p + 1, c.ring, funcs)
    c.check(nerve)
    vals = c.values
    if len(faces) == 0:
        out = np.zeros(0, dtype=vals.dtype)
    else:
        signs = np.array([(-1) ** i for i in range(p + 2)], dtype=vals.dtype)
        out = (vals[faces] * signs).sum(axis=1)
    return Cochain(p + 1, c.ring, out)


def _alternating_fn(terms):
    if not any(callable(f) for f, _ in terms):
        return float(sum(s * f for f, s in terms))
    return lambda pts: sum(s * (f(pts) if callable(f) else np.full(len(pts), f))
                           for f, s in terms)


_sample_cache = weakref.WeakKeyDictionary()


def sample_points(nerve, degree, count=2):
    """Deterministic sample points inside each ``degree``-fold intersection (cached)."""
    space = nerve.cover.space if nerve.cover is not None else None
    if space is None:
        raise NerveError("this nerve has no geometry to sample from")
    cache = _sample_cache.setdefault(nerve, {})
    if (degree, count) not in cache:
        pts = [space.points(s, count) for s in nerve.simplices[degree]]
        for p in pts:
            p.setflags(write=False)
        cache[degree, count] = pts
    return cache[degree, count]


def evaluate_on(c, nerve, degree_points=None, count=2):
    """Values of ``c`` at sample points of its own simplices: array (n, count)."""
    if isinstance(c, Cochain):
        return np.repeat(c.values.astype(float)[:, None], count, axis=1)
    pts = degree_points or sample_points(nerve, c.degree, count)
    return np.array([c.evaluate(i, p) for i, p in enumerate(pts)]).reshape(len(pts), -1)


def delta_at_points(c, nerve, count=2):
    """Evaluate ``delta(c)`` at sample points of each (p+1)-simplex.

    Each face function is called once on the stacked points of all its
    cofaces.  Returns an array (count(p+1), count).
    """
    p = c.degree
    faces = nerve.faces(p + 1)
    n = len(faces)
    if isinstance(c, Cochain):
        d = delta(c, nerve).values.astype(float)
        return np.repeat(d[:, None], count, axis=1)
    pts = sample_points(nerve, p + 1, count)
    out = np.zeros((n, count))
    if n == 0:
        return out
    by_face = {}
    for s, row in enumerate(faces):
        for i, j in enumerate(row):
            by_face.setdefault(int(j), []).append((s, (-1) ** i))
    for j, uses in by_face.items():
        stacked = np.vstack([pts[s] for s, _ in uses])
        vals = c.evaluate(j, stacked).reshape(len(uses), count)
        for (s, sign), v in zip(uses, vals):
            out[s] += sign * v
    return out


def is_cocycle(c, nerve, tol=1e-10):
    """True iff every component of ``delta(c)`` vanishes (mod 1 for CIRCLE)."""
    if c.degree + 1 > nerve.max_degree:
        return True
    d = delta_at_points(c, nerve)
    if c.ring is Ring.INT:
        return bool(np.all(d == 0))
    if c.ring is Ring.CIRCLE:
        return bool(np.all(circle_distance(d) <= tol))
    return bool(np.all(np.abs(d) <= tol))


def max_violation(c, nerve):
    d = delta_at_points(c, nerve)
    if d.size == 0:
        return 0.0
    if c.ring is Ring.CIRCLE:
        return float(circle_distance(d).max())
    return float(np.abs(d).max())


def coboundary_rows(nerve, p):
    """Sparse rows of the matrix of delta: C^p -> C^{p+1} (one dict per (p+1)-simplex)."""
    faces = nerve.faces(p + 1)
    return [{int(j): (-1) ** i for i, j in enumerate(row)} for row in faces]


def boundary(chain, nerve, degree):
    """Simplicial boundary of an integer chain given as an array on ``degree``-simplices."""
    chain = np.asarray(chain, dtype=np.int64)
    out = np.zeros(nerve.count(degree - 1), dtype=np.int64)
    faces = nerve.faces(degree)
    for i in range(degree + 1):
        np.add.at(out, faces[:, i], (-1) ** i * chain)
    return out


def pairing(cochain, chain):
    """Kronecker pairing of a constant cochain with a chain (array on the same simplices)."""
    vals = cochain.values if isinstance(cochain, Cochain) else np.asarray(cochain)
    chain = np.asarray(chain)
    if vals.dtype.kind in "iu" and chain.dtype.kind in "iu":
        return int(np.dot(vals.astype(object), chain.astype(object)))
    return float(np.dot(vals.astype(float), chain.astype(float)))


# -- maps between nerves -------------------------------------------------

def vertex_map_table(fine, coarse, vmap, degree):
    """For each fine ``degree``-simplex: (coarse index or -1, sign)."""
    idx = np.full(fine.count(degree), -1, dtype=np.int64)
    sign = np.zeros(fine.count(degree), dtype=np.int64)
    for k, s in enumerate(fine.simplices[degree]):
        img, sg = sort_sign(tuple(vmap[v] for v in s))
        if sg == 0:
            continue
        j = coarse.find(img)
        if j is None:
            raise NerveError(f"image {img} of {s} is not a simplex of the target nerve")
        idx[k] = j
        sign[k] = sg
    return idx, sign


def pullback(c, coarse, fine, vmap):
    """Pull a cochain back along a simplicial vertex map ``fine -> coarse``."""
    idx, sign = vertex_map_table(fine, coarse, vmap, c.degree)
    if isinstance(c, Cochain):
        vals = np.zeros(len(idx), dtype=c.values.dtype)
        keep = idx >= 0
        vals[keep] = c.values[idx[keep]] * sign[keep]
        if c.ring is Ring.INT:
            vals = vals.astype(np.int64)
        return Cochain(c.degree, c.ring, vals)
    funcs = tuple(0.0 if j < 0 else _scale_fn(c.funcs[j], int(s)) for j, s in zip(idx, sign))
    return SmoothCochain(c.degree, c.ring, funcs)


def pushforward_chain(chain, fine, coarse, vmap, degree):
    """Push an integer chain forward along a vertex map ``fine -> coarse``."""
    idx, sign = vertex_map_table(fine, coarse, vmap, degree)
    out = np.zeros(coarse.count(degree), dtype=np.int64)
    keep = idx >= 0
    np.add.at(out, idx[keep], (sign * np.asarray(chain))[keep])
    return out


# -- standard covers -------------------------------------------------------

def arc_space(resolution, overlap=None):
    """``resolution`` arcs ``(a/R - e, (a+1)/R + e)``; default ``e = 0.36 / R``."""
    if resolution < 3:
        raise NerveError("an arc cover of the circle with no triple overlaps needs >= 3 arcs")
    R = resolution
    eps = 0.36 / R if overlap is None else overlap
    if not 0 < eps < 0.5 / R:
        raise NerveError("arc overlap must lie in (0, 1/(2R)) so that no three arcs meet")
    return ArcSpace([(a / R - eps, (a + 1) / R + eps) for a in range(R)])


def circle_cover(resolution=3, overlap=None):
    space = arc_space(resolution, overlap)
    return Cover(space.size, space.intersects, "product-of-arcs", space)


def octahedral_cover():
    space = SphereSpace()
    return Cover(6, space.intersects, "octahedral", space)


def product_cover(*covers):
    space = ProductSpace([c.space for c in covers])
    tag = "x".join(c.geometry for c in covers)
    if all(c.geometry == "product-of-arcs" for c in covers):
        tag = "product-of-arcs"
    return Cover(space.size, space.intersects, tag, space)


def torus_cover(resolution=3, dimension=3, overlap=None):
    return product_cover(*[circle_cover(resolution, overlap) for _ in range(dimension)])


def refinement_map(fine, coarse):
    """A vertex map sending each fine set to a coarse set containing it."""
    fs, cs = fine.cover.space, coarse.cover.space
    if not hasattr(fs, "contains"):
        raise NerveError("cover geometry cannot decide containment")
    vmap = []
    for i in range(fine.vertex_count):
        j = next((j for j in range(coarse.vertex_count) if fs.contains(i, cs, j)), None)
        if j is None:
            raise NerveError(f"fine set {i} lies in no coarse set")
        vmap.append(j)
    return vmap


def check_refinement(fine, coarse, vmap):
    fs, cs = fine.cover.space, coarse.cover.space
    if fs is None or cs is None or not hasattr(fs, "contains"):
        return
    for i, j in enumerate(vmap):
        if not fs.contains(i, cs, j):
            raise NerveError(f"fine set {i} is not contained in coarse set {j}")


def projection_map(product_nerve, factor):
    """Vertex map of a product nerve onto one factor's index set."""
    space = product_nerve.cover.space
    return [space.split(i)[factor] for i in range(product_nerve.vertex_count)]


# -- chains -----------------------------------------------------------------

def circle_cycle(nerve):
    """Fundamental 1-cycle of an arc nerve: sum of oriented edges a -> a+1 mod R."""
    R = nerve.vertex_count
    chain = np.zeros(nerve.count(1), dtype=np.int64)
    for a in range(R):
        s, sg = sort_sign((a, (a + 1) % R))
        chain[nerve.index(s)] += sg
    return chain


def sphere_cycle(nerve):
    """Fundamental 2-cycle of the octahedral nerve, oriented by the outward normal."""
    chain = np.zeros(nerve.count(2), dtype=np.int64)
    for s in nerve.simplices[2]:
        signs = [1 if v % 2 == 0 else -1 for v in s]
        chain[nerve.index(s)] = signs[0] * signs[1] * signs[2]
    return chain


def _shuffles(p, q):
    """Monotone lattice paths (0,0)->(p,q) as vertex lists, with shuffle signs."""
    out = []
    for ups in combinations(range(p + q), q):
        ups = set(ups)
        i = j = 0
        path = [(0, 0)]
        inversions = 0
        for step in range(p + q):
            if step in ups:
                j += 1
            else:
                i += 1
                inversions += j
            path.append((i, j))
        out.append((path, -1 if inversions % 2 else 1))
    return out


def cross_product(chain1, nerve1, p, chain2, nerve2, q, product_nerve):
    """Eilenberg-Zilber cross product of chains, landing on the product-cover nerve."""
    n2 = nerve2.vertex_count
    out = np.zeros(product_nerve.count(p + q), dtype=np.int64)
    paths = _shuffles(p, q)
    for a in np.flatnonzero(chain1):
        s = nerve1.simplices[p][a]
        for b in np.flatnonzero(chain2):
            t = nerve2.simplices[q][b]
            coeff = int(chain1[a]) * int(chain2[b])
            for path, sh in paths:
                verts = tuple(s[i] * n2 + t[j] for i, j in path)
                srt, sg = sort_sign(verts)
                out[product_nerve.index(srt)] += coeff * sh * sg
    return out


def to_json(nerve, cochains=None, extra=None):
    obj = {
        "vertices": nerve.vertex_count,
        "simplices": {str(p): [list(s) for s in nerve.simplices[p]]
                      for p in range(1, nerve.max_degree + 1) if nerve.simplices[p]},
        "cochains": {k: v.to_json() for k, v in (cochains or {}).items()},
    }
    if extra:
        obj.update(extra)
    return obj


def from_json(obj, max_degree=None):
    """Nerve (open-star cover of the listed complex) and its named cochains."""
    simplices = []
    top = 0
    for p, level in obj.get("simplices", {}).items():
        top = max(top, int(p))
        simplices.extend(tuple(s) for s in level)
    cap = max(DEFAULT_DEGREE_CAP, top) if max_degree is None else max_degree
    nerve = nerve_from_simplices(int(obj["vertices"]), simplices, cap, close=False)
    cochains = {}
    for name, c in obj.get("cochains", {}).items():
        cochains[name] = Cochain.from_json(c).check(nerve)
    return nerve, cochains


def load(path, max_degree=None):
    with open(path) as fh:
        return from_json(json.load(fh), max_degree)


def dump(path, nerve, cochains=None, extra=None):
    with open(path, "w") as fh:
        json.dump(to_json(nerve, cochains, extra), fh)


def factor_nerve(space, degree):
    cover = Cover(space.size, space.intersects,
                  "product-of-arcs" if isinstance(space, ArcSpace) else "octahedral"
                  if isinstance(space, SphereSpace) else "abstract", space)
    return build_nerve(cover, max(3, degree))


def fundamental_cycle(nerve):
    """Fundamental cycle of a nerve whose cover has known geometry.

    Arc covers give the circle's 1-cycle, the octahedral cover the sphere's
    outward 2-cycle, and products the iterated cross product (so T^3 gets
    the orientation of its coordinate order).
    """
    space = nerve.cover.space if nerve.cover is not None else None
    if isinstance(space, ArcSpace):
        return circle_cycle(nerve)
    if isinstance(space, SphereSpace):
        return sphere_cycle(nerve)
    if not isinstance(space, ProductSpace):
        raise NerveError("no fundamental cycle known for this cover")
    dims = []
    for f in space.factors:
        if isinstance(f, ArcSpace):
            dims.append(1)
        elif isinstance(f, SphereSpace):
            dims.append(2)
        else:
            raise NerveError("no fundamental cycle known for this factor")
    first = factor_nerve(space.factors[0], dims[0])
    acc_nerve, acc, acc_dim = first, fundamental_cycle(first), dims[0]
    for k in range(1, len(space.factors)):
        fac = factor_nerve(space.factors[k], dims[k])
        fac_cycle = fundamental_cycle(fac)
        total = acc_dim + dims[k]
        if k == len(space.factors) - 1:
            target = nerve
        else:
            sub = ProductSpace(space.factors[:k + 1])
            target = build_nerve(Cover(sub.size, sub.intersects, "product", sub), max(3, total))
        acc = cross_product(acc, acc_nerve, acc_dim, fac_cycle, fac, dims[k], target)
        acc_nerve, acc_dim = target, total
    return acc


def solve_coboundary(g, nerve, tol=1e-10):
    """A cochain ``q`` of degree ``g.degree - 1`` with ``delta(q) = g``, or None.

    INT: exact integer solve.  REAL: least squares, accepted within ``tol``.
    CIRCLE: exact decision via the Bockstein and integral linear algebra; a
    real correction is then solved for.
    """
    from .homology import free_basis, integral_coboundary, reduction

    if isinstance(g, SmoothCochain):
        raise TypeError("solve_coboundary works on constant cochains")
    g.check(nerve)
    if not is_cocycle(g, nerve, tol=max(tol, 1e-10)):
        raise CocycleError("input is not a cocycle")
    p = g.degree
    if p == 0:
        raise NerveError("a 0-cochain is never a coboundary in the nerve complex")
    if g.ring is Ring.INT:
        x = reduction(nerve, p - 1).solve({i: int(v) for i, v in enumerate(g.values) if v})
        if x is None:
            return None
        vals = np.zeros(nerve.count(p - 1), dtype=np.int64)
        for j, v in x.items():
            vals[j] = v
        return Cochain(p - 1, Ring.INT, vals)
    if g.ring is Ring.REAL:
        return _real_solve(g.values, nerve, p, tol)
    # CIRCLE
    r = g.lift()
    z = integral_coboundary(r, nerve)
    n0 = reduction(nerve, p).solve({i: -int(v) for i, v in enumerate(z.values) if v}) \
        if p + 1 <= nerve.max_degree else {}
    if n0 is None:
        return None
    w = r.values.copy()
    for j, v in n0.items():
        w[j] += v
    basis = free_basis(nerve, p)
    coords = np.array(basis.coordinates(w), dtype=float)
    if coords.size:
        if np.any(np.abs(coords - np.round(coords)) > 1e-7):
            return None
        for c, zeta in zip(np.round(coords).astype(np.int64), basis.cocycles):
            if c:
                w = w - c * zeta.values
    q = _real_solve(w, nerve, p, 1e-8)
    if q is None:
        return None
    q = Cochain(p - 1, Ring.CIRCLE, q.values)
    if not delta(q, nerve).equals(g, tol=max(tol, 1e-9)):
        return None
    return q


def _real_solve(rhs, nerve, p, tol):
    from scipy.sparse import csr_matrix
    from scipy.sparse.linalg import lsqr

    faces = nerve.faces(p)
    n_out, n_in = nerve.count(p), nerve.count(p - 1)
    rows = np.repeat(np.arange(n_out), p + 1)
    cols = faces.reshape(-1)
    vals = np.tile([(-1.0) ** i for i in range(p + 1)], n_out)
    A = csr_matrix((vals, (rows, cols)), shape=(n_out, n_in))
    rhs = np.asarray(rhs, dtype=float)
    if n_in <= 3000:
        x = np.linalg.lstsq(A.toarray(), rhs, rcond=None)[0]
    else:
        x = lsqr(A, rhs, atol=1e-15, btol=1e-15, iter_lim=20000)[0]
    if np.abs(A @ x - rhs).max(initial=0.0) > tol:
        return None
    return Cochain(p - 1, Ring.REAL, x)
