"""
Differential forms on the fibre powers Y^[p] of R^3 -> T^3.

A point of Y^[p] is a p-tuple of points of R^3 with integer differences, so
the tangent directions of Y^[p] are the diagonal shifts and every slot shares
the same coordinate forms theta^1, theta^2, theta^3.  A form is therefore a
dictionary from increasing multi-indices over {1, 2, 3} to coefficient
functions of the whole tuple.

Coefficients are callables taking an array of shape (m, p, 3) and returning
m values.  They must accept complex input: derivatives are taken by the
complex step, which is exact to rounding for the polynomial coefficients
used here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

STEP = 1e-20


def _wedge_index(i, I):
    """theta^i ∧ theta^I as (sign, sorted multi-index); sign 0 if i repeats."""
    if i in I:
        return 0, ()
    pos = sum(1 for j in I if j < i)
    return (-1) ** pos, tuple(sorted(I + (i,)))


@dataclass(frozen=True)
class LatticeForm:
    degree: int
    slots: int
    components: dict = field(default_factory=dict)

    def __post_init__(self):
        for I in self.components:
            if len(I) != self.degree or list(I) != sorted(set(I)) or not set(I) <= {1, 2, 3}:
                raise ValueError(f"bad multi-index {I} for a {self.degree}-form")

    @classmethod
    def zero(cls, degree, slots):
        return cls(degree, slots, {})

    def at(self, pts):
        """Coefficient values at tuples ``pts`` of shape (m, slots, 3)."""
        pts = np.asarray(pts)
        if pts.ndim == 2:
            pts = pts[None]
        if pts.shape[1:] != (self.slots, 3):
            raise ValueError(f"expected tuples of {self.slots} points in R^3")
        return {I: np.broadcast_to(np.asarray(f(pts)), (len(pts),)) for I, f in self.components.items()}

    def d(self):
        """Exterior derivative along Y^[p] (diagonal shifts of all slots)."""
        comps = {}
        for I, f in self.components.items():
            for i in (1, 2, 3):
                sign, J = _wedge_index(i, I)
                if sign:
                    comps.setdefault(J, []).append((sign, _partial(f, i)))
        return LatticeForm(self.degree + 1, self.slots,
                           {J: _sum_terms(terms) for J, terms in comps.items()})

    def delta(self):
        """Alternating sum of pullbacks along the slot-omitting maps Y^[p+1] -> Y^[p]."""
        p = self.slots + 1
        comps = {}
        for I, f in self.components.items():
            terms = [((-1) ** k, _omit(f, k, p)) for k in range(p)]
            comps[I] = _sum_terms(terms)
        return LatticeForm(self.degree, p, comps)

    def pullback_to(self, slots, slot=0):
        """Pull a form on Y (or on M) back to Y^[slots] through one slot."""
        if self.slots != 1:
            raise ValueError("only forms on a single slot pull back this way")
        comps = {I: (lambda P, f=f: f(P[:, slot:slot + 1])) for I, f in self.components.items()}
        return LatticeForm(self.degree, slots, comps)

    def __add__(self, other):
        if (self.degree, self.slots) != (other.degree, other.slots):
            raise ValueError("forms of different type")
        comps = dict(self.components)
        for I, g in other.components.items():
            comps[I] = _sum_terms([(1, comps[I]), (1, g)]) if I in comps else g
        return LatticeForm(self.degree, self.slots, comps)

    def __rmul__(self, a):
        return LatticeForm(self.degree, self.slots,
                           {I: (lambda P, f=f: a * f(P)) for I, f in self.components.items()})

    def __neg__(self):
        return -1 * self

    def __sub__(self, other):
        return self + (-other)

    def residual(self, other, pts):
        """max |coefficient difference| over all components at ``pts``."""
        a, b = self.at(pts), other.at(pts)
        worst = 0.0
        for I in set(a) | set(b):
            diff = a.get(I, 0.0) - b.get(I, 0.0)
            worst = max(worst, float(np.max(np.abs(diff), initial=0.0)))
        return worst

    def integrate(self, n=8):
        """Integral of a 3-form on one slot over [0,1)^3 by the N^3 midpoint rule."""
        if self.degree != 3 or self.slots != 1:
            raise ValueError("only top-degree forms on T^3 integrate")
        f = self.components.get((1, 2, 3))
        if f is None:
            return 0.0
        axis = (np.arange(n) + 0.5) / n
        grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 1, 3)
        vals = np.broadcast_to(np.real(np.asarray(f(grid))), (len(grid),))
        return float(vals.sum() / len(grid))


def _partial(f, i):
    def df(P):
        shift = np.zeros(3, dtype=complex)
        shift[i - 1] = 1j * STEP
        return np.imag(f(np.asarray(P, dtype=complex) + shift)) / STEP
    return df


def _omit(f, k, p):
    keep = [j for j in range(p) if j != k]
    return lambda P: f(np.asarray(P)[:, keep])


def _sum_terms(terms):
    def g(P):
        return sum(s * np.asarray(f(P)) for s, f in terms)
    return g
