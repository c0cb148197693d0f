"""
Concrete geometry behind covers.

A space object knows how its cover sets intersect, how to place sample
points inside a nonempty intersection, and how to evaluate a partition of
unity subordinate to the cover.  Points are rows of a float array whose
width is ``space.dim``.

    ArcSpace      open arcs on the circle R/Z
    SphereSpace   the six open hemispheres {±x_i > 0} of S^2 (octahedral cover)
    ProductSpace  products of the above, indices in mixed radix
    SimplexSpace  open vertex stars of an abstract simplicial complex,
                  points in barycentric coordinates
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product as iproduct

import numpy as np


def _circle_pieces(lo, hi):
    """Split an open arc (lo, hi) of R/Z into pieces inside [0, 1)."""
    start = lo % 1.0
    end = start + (hi - lo)
    if end <= 1.0:
        return [(start, end)]
    return [(start, 1.0), (0.0, end - 1.0)]


def _intersect_pieces(a, b):
    out = []
    for lo1, hi1 in a:
        for lo2, hi2 in b:
            lo, hi = max(lo1, lo2), min(hi1, hi2)
            if lo < hi:
                out.append((lo, hi))
    return out


class ArcSpace:
    """The circle R/Z covered by open arcs ``(lo, hi)`` with ``hi - lo < 1``."""

    dim = 1

    def __init__(self, arcs):
        self.arcs = tuple((float(lo), float(hi)) for lo, hi in arcs)
        for lo, hi in self.arcs:
            if not 0.0 < hi - lo < 1.0:
                raise ValueError(f"arc ({lo}, {hi}) must have length in (0, 1)")
        self._pieces = [_circle_pieces(lo, hi) for lo, hi in self.arcs]
        self._common = lru_cache(maxsize=None)(self._common_uncached)

    @property
    def size(self):
        return len(self.arcs)

    def _common_uncached(self, idx):
        pieces = [(0.0, 1.0)]
        for i in idx:
            pieces = _intersect_pieces(pieces, self._pieces[i])
            if not pieces:
                break
        return tuple(pieces)

    def common(self, idx):
        return self._common(tuple(sorted(set(idx))))

    def intersects(self, idx):
        return bool(self.common(idx))

    def points(self, idx, count):
        pieces = self.common(idx)
        if not pieces:
            raise ValueError(f"arcs {idx} do not intersect")
        lo, hi = max(pieces, key=lambda p: p[1] - p[0])
        # midpoint first, then evenly spread interior points
        spread = [(k + 1.0) / (count + 2.0) for k in range(count + 1)]
        frac = np.array(([0.5] + [f for f in spread if abs(f - 0.5) > 1e-12])[:count])
        return (lo + (hi - lo) * frac).reshape(-1, 1)

    def lift(self, i, x):
        """Representative of ``x mod 1`` inside the real interval of arc ``i``."""
        lo, _ = self.arcs[i]
        return lo + np.mod(np.asarray(x, dtype=float) - lo, 1.0)

    def member(self, i, pts):
        x = np.asarray(pts, dtype=float)[:, 0]
        lo, hi = self.arcs[i]
        y = self.lift(i, x)
        return (y > lo) & (y < hi)

    def partition(self, pts):
        x = np.asarray(pts, dtype=float)[:, 0]
        bumps = np.empty((len(x), self.size))
        for i, (lo, hi) in enumerate(self.arcs):
            y = self.lift(i, x)
            bumps[:, i] = np.clip(np.minimum(y - lo, hi - y), 0.0, None)
        total = bumps.sum(axis=1, keepdims=True)
        if np.any(total <= 0):
            raise ValueError("arcs do not cover the circle")
        return bumps / total

    def contains(self, i, other, j):
        """True if arc ``i`` of this space lies inside arc ``j`` of ``other``."""
        lo, hi = self.arcs[i]
        olo, ohi = other.arcs[j]
        start = olo + ((lo - olo) % 1.0)
        if start >= ohi:
            start -= 1.0
        return start >= olo and start + (hi - lo) <= ohi

    def to_json(self):
        return {"type": "arcs", "arcs": [list(a) for a in self.arcs]}


class SphereSpace:
    """Octahedral cover of S^2 by open hemispheres.

    Index ``2k`` is ``{x_k > 0}``, index ``2k + 1`` is ``{x_k < 0}``.
    """

    dim = 3
    size = 6

    @staticmethod
    def _axis_sign(i):
        return i // 2, (1.0 if i % 2 == 0 else -1.0)

    def intersects(self, idx):
        axes = [i // 2 for i in set(idx)]
        return len(axes) == len(set(axes))

    def points(self, idx, count):
        if not self.intersects(idx):
            raise ValueError(f"hemispheres {idx} do not intersect")
        base = np.zeros(3)
        for i in set(idx):
            k, s = self._axis_sign(i)
            base[k] = s
        wobble = np.array([[0.0, 0.0, 0.0], [0.23, -0.17, 0.11], [-0.19, 0.29, -0.07],
                           [0.13, 0.07, -0.31], [-0.27, -0.21, 0.17]])
        out = []
        for t in range(count):
            v = base + wobble[t % len(wobble)] * (1 + t // len(wobble)) * 0.5
            for i in set(idx):
                k, s = self._axis_sign(i)
                v[k] = s * max(s * v[k], 0.2)
            out.append(v / np.linalg.norm(v))
        return np.array(out)

    def member(self, i, pts):
        k, s = self._axis_sign(i)
        return s * np.asarray(pts)[:, k] > 0

    def partition(self, pts):
        p = np.asarray(pts, dtype=float)
        rho = np.empty((len(p), 6))
        rho[:, 0::2] = np.clip(p, 0, None)
        rho[:, 1::2] = np.clip(-p, 0, None)
        return rho / rho.sum(axis=1, keepdims=True)

    def to_json(self):
        return {"type": "octahedral"}


class ProductSpace:
    """Product of spaces; index ``(i_1, ..., i_r)`` encoded in mixed radix."""

    def __init__(self, factors):
        self.factors = tuple(factors)
        self.sizes = tuple(f.size for f in self.factors)
        self.size = int(np.prod(self.sizes))
        self.dims = tuple(f.dim for f in self.factors)
        self.dim = sum(self.dims)
        self._offsets = np.cumsum((0,) + self.dims)

    def split(self, i):
        out = []
        for n in reversed(self.sizes):
            i, r = divmod(i, n)
            out.append(r)
        return tuple(reversed(out))

    def join(self, parts):
        i = 0
        for p, n in zip(parts, self.sizes):
            i = i * n + p
        return i

    def intersects(self, idx):
        parts = list(zip(*(self.split(i) for i in idx)))
        return all(f.intersects(tuple(sorted(set(p)))) for f, p in zip(self.factors, parts))

    def _slice(self, pts, k):
        return np.asarray(pts)[:, self._offsets[k]:self._offsets[k + 1]]

    def points(self, idx, count):
        parts = list(zip(*(self.split(i) for i in idx)))
        cols = [f.points(tuple(sorted(set(p))), count) for f, p in zip(self.factors, parts)]
        return np.hstack(cols)

    def member(self, i, pts):
        ok = np.ones(len(pts), dtype=bool)
        for k, (f, j) in enumerate(zip(self.factors, self.split(i))):
            ok &= f.member(j, self._slice(pts, k))
        return ok

    def partition(self, pts):
        rho = np.ones((len(pts), 1))
        for k, f in enumerate(self.factors):
            r = f.partition(self._slice(pts, k))
            rho = (rho[:, :, None] * r[:, None, :]).reshape(len(pts), -1)
        return rho

    def contains(self, i, other, j):
        return all(f.contains(a, g, b) for f, a, g, b in
                   zip(self.factors, self.split(i), other.factors, other.split(j)))

    def to_json(self):
        return {"type": "product", "factors": [f.to_json() for f in self.factors]}


class SimplexSpace:
    """Geometric realization of an abstract complex, covered by open vertex stars.

    Points are barycentric coordinate vectors; the barycentric coordinates
    themselves are the partition of unity.
    """

    def __init__(self, vertex_count, simplices):
        self.size = vertex_count
        self.dim = vertex_count
        self.simplices = frozenset(tuple(sorted(s)) for s in simplices)

    def intersects(self, idx):
        return tuple(sorted(set(idx))) in self.simplices

    def points(self, idx, count):
        idx = sorted(set(idx))
        if tuple(idx) not in self.simplices:
            raise ValueError(f"{idx} is not a simplex")
        out = np.zeros((count, self.size))
        for t in range(count):
            w = 1.0 + 0.37 * ((np.arange(len(idx)) * (t + 1)) % 3)
            out[t, idx] = w / w.sum()
        return out

    def member(self, i, pts):
        return np.asarray(pts)[:, i] > 0

    def partition(self, pts):
        return np.asarray(pts, dtype=float)

    def to_json(self):
        return {"type": "abstract"}
