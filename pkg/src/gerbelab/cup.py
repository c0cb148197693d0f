"""
Cup-product gerbes, the central extension of U(1) x Z, and lifting gerbes.

On M = S^2 x S^1 a class a in H^2 (a line bundle on S^2) and a class b in
H^1 (a map to the circle) give a gerbe with Dixmier-Douady class a ∪ b.  It
is built twice: directly from a primitive of a, and as the lifting gerbe of
the U(1) x Z bundle (Hopf bundle, winding) through the extension

    U(1) -> U(1) x Z x U(1) -> U(1) x Z,
    (z1, n1, w1)(z2, n2, w2) = (z1 + z2, n1 + n2, w1 + w2 + n2 z1)   (mod 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cech
from .cech import (Cochain, CocycleError, NerveError, Ring, SmoothCochain, build_nerve,
                   is_cocycle, pullback, reduce_mod1)
from .gerbe import CechGerbe, partition_contraction
from .homology import free_basis, reduction

PAULI = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)
UNWRAP_STEPS = 64


# -- cup product --------------------------------------------------------------

def _front_back(nerve, p, q):
    """For each (p+q)-simplex, indices of its front p-face and back q-face."""
    front, back = [], []
    for s in nerve.simplices[p + q]:
        front.append(nerve.index(s[:p + 1]))
        back.append(nerve.index(s[p:]))
    return np.array(front, dtype=np.int64), np.array(back, dtype=np.int64)


def cup(a, b, nerve, check=True):
    """Alexander-Whitney cup product: (a ∪ b)(i_0..i_{p+q}) = a(i_0..i_p) b(i_p..i_{p+q}).

    ``a`` may be a smooth cochain when ``b`` is constant (integral).
    """
    p, q = a.degree, b.degree
    if p + q > nerve.max_degree:
        raise NerveError("cup product exceeds the nerve's degree cap")
    if check:
        for c in (a, b):
            if isinstance(c, Cochain) and not is_cocycle(c, nerve):
                raise CocycleError("cup expects cocycles")
    front, back = _front_back(nerve, p, q)
    if isinstance(b, SmoothCochain):
        raise TypeError("the back factor must be a constant cochain")
    if isinstance(a, SmoothCochain):
        funcs = tuple(cech._scale_fn(a.funcs[i], int(b.values[j])) if b.values[j] else 0.0
                      for i, j in zip(front, back))
        return SmoothCochain(p + q, a.ring, funcs)
    ring = cech._join(a.ring, b.ring)
    if len(front) == 0:
        return Cochain(p + q, ring, np.zeros(0))
    return Cochain(p + q, ring, a.values[front] * b.values[back])


def cup_gerbe(a, b, nerve):
    """Gerbe with DD class a ∪ b for integral cocycles a (degree 2) and b (degree 1).

    A partition of unity gives a real smooth 1-cochain lam with delta(lam) = a;
    then g = lam ∪ b mod 1 and delta(lam ∪ b) = a ∪ b is integral.
    """
    if a.ring is not Ring.INT or b.ring is not Ring.INT or (a.degree, b.degree) != (2, 1):
        raise ValueError("cup_gerbe expects INT cocycles of degrees 2 and 1")
    for c in (a, b):
        if not is_cocycle(c, nerve):
            raise CocycleError("cup_gerbe expects cocycles")
    lam = partition_contraction(a.as_ring(Ring.REAL), nerve)
    g = cup(lam, b, nerve, check=False).as_ring(Ring.CIRCLE)
    return CechGerbe(nerve, g)


# -- central extension ----------------------------------------------------------

@dataclass(frozen=True)
class ExtElement:
    z: float
    n: int
    w: float

    def __post_init__(self):
        object.__setattr__(self, "z", float(reduce_mod1(self.z)))
        object.__setattr__(self, "w", float(reduce_mod1(self.w)))
        object.__setattr__(self, "n", int(self.n))

    def __mul__(self, other):
        return ext_multiply(self, other)

    def close(self, other, tol=1e-12):
        return (self.n == other.n
                and cech.circle_distance(self.z - other.z) <= tol
                and cech.circle_distance(self.w - other.w) <= tol)


IDENTITY = ExtElement(0.0, 0, 0.0)


def u1xz_cocycle(z1, n1, z2, n2):
    """Extension 2-cocycle of U(1) x Z: eps((z1, n1), (z2, n2)) = n2 z1."""
    return n2 * z1


def ext_multiply(p, q):
    return ExtElement(p.z + q.z, p.n + q.n, p.w + q.w + u1xz_cocycle(p.z, p.n, q.z, q.n))


def ext_multiply_printed(p, q):
    """The variant with exponent n1 in the w-component; it is not associative."""
    return ExtElement(p.z + q.z, p.n + q.n, p.w + q.w + p.n * p.z)


def associativity_defect(mult, p, q, r):
    """(discrete mismatch, circle distance) between (pq)r and p(qr)."""
    left, right = mult(mult(p, q), r), mult(p, mult(q, r))
    disc = abs(left.n - right.n)
    circ = max(cech.circle_distance(left.z - right.z), cech.circle_distance(left.w - right.w))
    return disc, float(circ)


def group_cocycle_defect(eps, g, h, k):
    """eps(g,h) + eps(gh,k) - eps(h,k) - eps(g,hk) mod 1, for (z, n) pairs."""
    (zg, ng), (zh, nh), (zk, nk) = g, h, k
    gh = (zg + zh, ng + nh)
    hk = (zh + zk, nh + nk)
    d = eps(zg, ng, zh, nh) + eps(*gh, zk, nk) - eps(zh, nh, zk, nk) - eps(zg, ng, *hk)
    return float(cech.circle_distance(d))


# -- transition data and lifting gerbes -------------------------------------------

@dataclass(frozen=True, eq=False)
class TransitionData:
    """A U(1) x Z valued 1-cocycle: circle part ``z`` (smooth lifts allowed) and integer part ``n``."""

    nerve: cech.Nerve
    z: object
    n: Cochain

    def check(self, tol=1e-10):
        if self.n.ring is not Ring.INT or self.z.ring is not Ring.CIRCLE:
            raise ValueError("transition data needs a CIRCLE part and an INT part")
        if not is_cocycle(self.n, self.nerve):
            raise CocycleError("integer part of the transition data is not a cocycle")
        if cech.max_violation(self.z, self.nerve) > tol:
            raise CocycleError("circle part of the transition data is not a cocycle")
        return self


def lifting_gerbe(t, eps=u1xz_cocycle, samples=None, rng=None):
    """Lifting gerbe of transition data t through the extension with cocycle eps.

    g_abc = eps(t_ab, t_bc).  eps is checked on sampled triples of the group.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    trials = samples or 64
    for _ in range(trials):
        trip = [(rng.random(), int(rng.integers(-5, 6))) for _ in range(3)]
        if group_cocycle_defect(eps, *trip) > 1e-12:
            raise CocycleError("extension cocycle fails the group 2-cocycle identity")
    t.check()
    nerve = t.nerve
    z = t.z if isinstance(t.z, SmoothCochain) else SmoothCochain.from_cochain(t.z)
    funcs = []
    for s in nerve.simplices[2]:
        ab = nerve.index(s[:2])
        bc = nerve.index(s[1:])
        za, na = z.funcs[ab], int(t.n.values[ab])
        zb, nb = z.funcs[bc], int(t.n.values[bc])
        funcs.append(_eps_fn(eps, za, na, zb, nb))
    return CechGerbe(nerve, SmoothCochain(2, Ring.CIRCLE, tuple(funcs)))


def _eps_fn(eps, za, na, zb, nb):
    if not callable(za) and not callable(zb):
        return float(eps(za, na, zb, nb))

    def f(pts):
        m = len(pts)
        va = za(pts) if callable(za) else np.full(m, za)
        vb = zb(pts) if callable(zb) else np.full(m, zb)
        return np.asarray(eps(va, na, vb, nb), dtype=float) * np.ones(m)
    return f


# -- S^2 x S^1 ---------------------------------------------------------------------

def _projector(pts, sign=1):
    """(I + sign n.sigma)/2 for unit vectors n, shape (m, 2, 2)."""
    ns = np.einsum("mk,kij->mij", np.asarray(pts, dtype=float), PAULI)
    return 0.5 * (np.eye(2) + sign * ns)


def _bloch_vector(axis, sign):
    """Unit spinor whose Bloch vector is sign * e_axis."""
    n = np.zeros(3)
    n[axis] = sign
    _, V = np.linalg.eigh(np.einsum("k,kij->ij", n, PAULI))
    return V[:, 1]


def _hopf_phase(i, j, pts, sign):
    vi = _bloch_vector(i // 2, sign * (1.0 if i % 2 == 0 else -1.0))
    vj = _bloch_vector(j // 2, sign * (1.0 if j % 2 == 0 else -1.0))
    P = _projector(pts, sign)
    h = np.einsum("i,mij,j->m", vi.conj(), P, vj)
    return np.angle(h) / (2 * np.pi)


def hopf_transition(i, j, ref, sign=-1):
    """Continuous real lift of the Hopf clutching phase on U_i ∩ U_j.

    The line over n is the image of P(n) = (I + sign n.sigma)/2.  The local
    section over U_i is P(n) v_i / |P(n) v_i| where v_i is the spinor with
    Bloch vector sign times the hemisphere's pole, so it never vanishes on
    U_i.  The transition is the phase of <psi_i, psi_j>, unwrapped along the
    chord from ``ref`` to each point.  sign = +1 is the tautological bundle
    (c_1 pairs -1 with the outward sphere); sign = -1 is its dual.
    """
    ref = np.asarray(ref, dtype=float)
    base = float(np.mod(_hopf_phase(i, j, ref[None], sign)[0], 1.0))

    def z(pts):
        pts = np.asarray(pts, dtype=float)
        s = np.linspace(0.0, 1.0, UNWRAP_STEPS + 1)
        path = (1 - s)[:, None, None] * ref + s[:, None, None] * pts[None]
        path = path / np.linalg.norm(path, axis=-1, keepdims=True)
        m = len(pts)
        phases = _hopf_phase(i, j, path.reshape(-1, 3), sign).reshape(len(s), m)
        unwrapped = np.unwrap(phases * 2 * np.pi, axis=0) / (2 * np.pi)
        return base + unwrapped[-1] - unwrapped[0]
    return z


def hopf_smooth_cochain(sphere_nerve, sign=-1, slice_=slice(0, 3)):
    """Smooth circle 1-cochain of Hopf transitions on an octahedral (or product) nerve."""
    space = sphere_nerve.cover.space
    funcs = []
    for s in sphere_nerve.simplices[1]:
        if hasattr(space, "split"):
            i, j = space.split(s[0])[0], space.split(s[1])[0]
        else:
            i, j = s
        if i == j:
            funcs.append(0.0)
            continue
        ref = space.points(s, 1)[0][slice_]
        f = hopf_transition(i, j, ref, sign)
        funcs.append(lambda pts, f=f: f(np.asarray(pts)[:, slice_]))
    return SmoothCochain(1, Ring.CIRCLE, tuple(funcs))


def octahedral_nerve(max_degree=4):
    return build_nerve(cech.octahedral_cover(), max_degree)


def hopf_cocycle(oct_nerve):
    """Integral 2-cocycle on the octahedron pairing +1 with the outward sphere cycle."""
    basis = free_basis(oct_nerve, 2)
    if basis.rank != 1:
        raise NerveError("expected H^2 of rank one")
    z = basis.cocycles[0]
    s = cech.pairing(z, cech.sphere_cycle(oct_nerve))
    if abs(s) != 1:
        raise AssertionError("free generator does not pair to a unit")
    return s * z


def winding_cocycle(circle_nerve):
    """1-cocycle with values (0, 0, 1) on the edges of the 3-arc nerve."""
    if circle_nerve.vertex_count != 3:
        raise NerveError("the winding cocycle is given on the 3-arc nerve")
    return Cochain(1, Ring.INT, np.array([0, 0, 1]))


@dataclass(frozen=True, eq=False)
class SphereCircle:
    """S^2 x S^1 with its product nerve, factor nerves and standard cocycles."""

    nerve: cech.Nerve
    sphere: cech.Nerve
    circle: cech.Nerve
    hopf: Cochain
    winding: Cochain

    @property
    def cycle(self):
        return cech.fundamental_cycle(self.nerve)


def sphere_circle(max_degree=4):
    sphere = octahedral_nerve(max_degree)
    circle = build_nerve(cech.circle_cover(3), max_degree)
    nerve = build_nerve(cech.product_cover(sphere.cover, circle.cover), max_degree)
    a = pullback(hopf_cocycle(sphere), sphere, nerve, cech.projection_map(nerve, 0))
    b = pullback(winding_cocycle(circle), circle, nerve, cech.projection_map(nerve, 1))
    return SphereCircle(nerve, sphere, circle, a, b)


def hopf_winding_transition(sc, sign=-1, winding_scale=1):
    """U(1) x Z transition data (Hopf clutching, winding) on S^2 x S^1."""
    z = hopf_smooth_cochain(sc.nerve, sign)
    return TransitionData(sc.nerve, z, winding_scale * sc.winding)


# -- a torsion example: RP^2 x S^1 ---------------------------------------------------

RP2_FACES = ((1, 2, 3), (1, 3, 4), (1, 4, 5), (1, 5, 6), (1, 2, 6),
             (2, 3, 5), (2, 4, 5), (2, 4, 6), (3, 4, 6), (3, 5, 6))


def rp2_circle(max_degree=4):
    """Nerve of (open stars of the 6-vertex RP^2) x (3 arcs); H^3 is Z/2."""
    rp2 = cech.nerve_from_simplices(6, [tuple(v - 1 for v in f) for f in RP2_FACES], max_degree)
    circle = build_nerve(cech.circle_cover(3), max_degree)
    nerve = build_nerve(cech.product_cover(rp2.cover, circle.cover), max_degree)
    return nerve, rp2, circle


def torsion_gerbe(max_degree=4):
    """A gerbe with constant values in {0, 1/2} whose DD class has order 2.

    z = (face class of RP^2) ∪ winding has order 2, so 2z = delta(m) and
    g = m/2 mod 1 has Bockstein cohomologous to z.
    """
    nerve, rp2, circle = rp2_circle(max_degree)
    face = Cochain(2, Ring.INT, np.eye(rp2.count(2), dtype=np.int64)[0])
    w = pullback(face, rp2, nerve, cech.projection_map(nerve, 0))
    b = pullback(winding_cocycle(circle), circle, nerve, cech.projection_map(nerve, 1))
    z = cup(w, b, nerve)
    m = reduction(nerve, 2).solve({i: 2 * int(v) for i, v in enumerate(z.values) if v})
    if m is None:
        raise AssertionError("2z is not a coboundary")
    vals = np.zeros(nerve.count(2))
    for j, v in m.items():
        vals[j] = v
    return CechGerbe(nerve, Cochain(2, Ring.CIRCLE, vals / 2.0)), z
