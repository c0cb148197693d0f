"""
The spectral gerbe on SU(n).

A cut is a point exp(2 pi i t) of the circle with 1 removed, identified with
t in (0, 1).  For cuts a < b avoiding the spectrum of X, the fibre over
(X, a, b) is the determinant line of the sum of the eigenspaces of X whose
angles lie strictly between a.t and b.t.  For a > b it is the dual of the
line for (b, a).  Wedging lines for (a, b) and (b, c) lands in the line for
(a, c); comparing with the canonical representative there gives the circle
cocycle g_abc.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

GAP_TOL = 1e-6
CLUSTER_TOL = 1e-8
UNITARY_TOL = 1e-10
PHASE_FLOOR = 1e-6


class ConvergenceError(RuntimeError):
    pass


def jacobi_hermitian(A, tol=1e-14, max_sweeps=60):
    """Eigenvalues (ascending) and unitary eigenvectors of a Hermitian matrix by cyclic Jacobi."""
    A = np.array(A, dtype=complex)
    n = len(A)
    V = np.eye(n, dtype=complex)
    scale = max(np.abs(A).max(), 1e-300)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(A - np.diag(np.diag(A))) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                r = abs(apq)
                if r <= 1e-300:
                    continue
                # make the pivot real, then rotate it away
                phase = apq / r
                theta = 0.5 * np.arctan2(2 * r, (A[q, q] - A[p, p]).real)
                c, s = np.cos(theta), np.sin(theta)
                W = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ W
                A[idx, :] = W.conj().T @ A[idx, :]
                A[q, p] = 0.0
                A[p, q] = 0.0
                V[:, idx] = V[:, idx] @ W
    else:
        raise ConvergenceError("Jacobi sweeps did not converge")
    w = np.diag(A).real
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def check_unitary(X, tol=UNITARY_TOL, special=True):
    X = np.asarray(X, dtype=complex)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError("expected a square matrix")
    if np.abs(X.conj().T @ X - np.eye(len(X))).max() > tol:
        raise ValueError("matrix is not unitary")
    if special and abs(np.linalg.det(X) - 1) > tol:
        raise ValueError("matrix does not have determinant 1")
    return X


@dataclass(frozen=True)
class EigenBlock:
    t: float
    vectors: np.ndarray  # n x m, orthonormal columns

    @property
    def multiplicity(self):
        return self.vectors.shape[1]


def _clusters(values, tol):
    groups, cur = [], [0]
    for i in range(1, len(values)):
        if values[i] - values[i - 1] <= tol:
            cur.append(i)
        else:
            groups.append(cur)
            cur = [i]
    groups.append(cur)
    return groups


def eigendecompose(X, cluster_tol=CLUSTER_TOL, special=True, split_tol=1e-5):
    """Eigenblocks of a unitary matrix, sorted by angle t in [0, 1).

    H = (X + X^*)/2 is diagonalized by Jacobi rotations; clusters of nearly
    equal H-eigenvalues are split with K = (X - X^*)/2i, and each angle is
    atan2 of the two Rayleigh quotients.  Angles within ``cluster_tol`` of
    each other (around the circle) are merged into one block.
    """
    X = check_unitary(X, special=special)
    H = (X + X.conj().T) / 2
    K = (X - X.conj().T) / 2j
    w, V = jacobi_hermitian(H)
    cols = []
    for group in _clusters(w, split_tol):
        B = V[:, group]
        if len(group) > 1:
            _, U = jacobi_hermitian(B.conj().T @ K @ B)
            B = B @ U
        cols.extend(B.T)
    V = np.array(cols).T
    cos = np.real(np.einsum("ij,ik,kj->j", V.conj(), H, V))
    sin = np.real(np.einsum("ij,ik,kj->j", V.conj(), K, V))
    t = np.mod(np.arctan2(sin, cos) / (2 * np.pi), 1.0)
    order = np.argsort(t, kind="stable")
    t, V = t[order], V[:, order]
    groups = _clusters(t, cluster_tol)
    if len(groups) > 1 and t[0] + 1.0 - t[-1] <= cluster_tol:
        groups[0] = groups.pop() + groups[0]
    blocks = []
    for g in groups:
        angles = t[g]
        if angles.max() - angles.min() > 0.5:
            angles = np.where(angles > 0.5, angles - 1.0, angles)
        blocks.append(EigenBlock(float(np.mod(angles.mean(), 1.0)), V[:, g]))
    blocks.sort(key=lambda b: b.t)
    return blocks


def reconstruction_residual(X, blocks):
    """Frobenius norms of X - sum exp(2 pi i t_k) P_k and of sum P_k - I."""
    n = len(X)
    S = np.zeros((n, n), dtype=complex)
    P = np.zeros((n, n), dtype=complex)
    for b in blocks:
        Pk = b.vectors @ b.vectors.conj().T
        S += np.exp(2j * np.pi * b.t) * Pk
        P += Pk
    return float(np.linalg.norm(X - S)), float(np.linalg.norm(P - np.eye(n)))


@dataclass(frozen=True)
class Cut:
    t: float

    def __post_init__(self):
        if not 0.0 < self.t < 1.0:
            raise ValueError("a cut is a point t of the open interval (0, 1)")


def _plucker(B):
    """Top exterior power of the column span of B in the basis e_I, I lexicographic."""
    n, k = B.shape
    if k == 0:
        return np.ones(1, dtype=complex)
    return np.array([np.linalg.det(B[list(I), :]) for I in combinations(range(n), k)])


def _normalize_phase(v):
    mags = np.abs(v)
    first = int(np.argmax(mags > PHASE_FLOOR * mags.max()))
    return v[first] / mags[first]


@dataclass(frozen=True, eq=False)
class DetLine:
    basis: np.ndarray  # n x k orthonormal columns, ascending angle
    det_vector: np.ndarray  # unit vector in the k-th exterior power
    dual_flag: bool
    cuts: tuple
    n: int

    @property
    def dim(self):
        return self.basis.shape[1]


class SpectralData:
    """A special unitary matrix with its eigenblocks cached."""

    def __init__(self, X, cluster_tol=CLUSTER_TOL, gap_tol=GAP_TOL):
        self.X = check_unitary(X)
        self.n = len(self.X)
        self.blocks = eigendecompose(self.X, cluster_tol)
        self.gap_tol = gap_tol

    def check_cut(self, c):
        z = np.exp(2j * np.pi * c.t)
        for b in self.blocks:
            if abs(z - np.exp(2j * np.pi * b.t)) <= self.gap_tol:
                raise ValueError(f"cut {c.t} is within {self.gap_tol} of the spectrum")

    def basis_between(self, a, b):
        inside = [blk.vectors for blk in self.blocks if a.t < blk.t < b.t]
        if not inside:
            return np.zeros((self.n, 0), dtype=complex)
        return np.hstack(inside)


def _data(X, **kw):
    return X if isinstance(X, SpectralData) else SpectralData(X, **kw)


def spectral_line(X, a, b, gap_tol=GAP_TOL):
    """Determinant line of the eigenspaces strictly between cuts a and b."""
    data = _data(X, gap_tol=gap_tol)
    data.check_cut(a)
    data.check_cut(b)
    lo, hi, dual = (a, b, False) if a.t <= b.t else (b, a, True)
    B = data.basis_between(lo, hi)
    v = _plucker(B)
    v = v / np.linalg.norm(v)
    v = v / _normalize_phase(v)
    return DetLine(B, v, dual, (a.t, b.t), data.n)


def wedge(l1, l2):
    """Representative of l1 ∧ l2 in the exterior power of the concatenated basis."""
    B = np.hstack([l1.basis, l2.basis])
    u1 = l1.det_vector @ _plucker(l1.basis).conj()
    u2 = l2.det_vector @ _plucker(l2.basis).conj()
    return u1 * u2 * _plucker(B)


def multiply(X, l1, l2, gap_tol=GAP_TOL):
    """Product of lines for (a, b) and (b, c) with a < b < c.

    Returns the canonical line for (a, c) and the circle scalar comparing the
    wedge of the inputs with its canonical representative.
    """
    if l1.dual_flag or l2.dual_flag:
        raise ValueError("multiply expects ascending cuts")
    if l1.cuts[1] != l2.cuts[0] or l1.n != l2.n:
        raise ValueError("lines do not form a chain over the same matrix")
    data = _data(X, gap_tol=gap_tol)
    out = spectral_line(data, Cut(l1.cuts[0]), Cut(l2.cuts[1]), gap_tol)
    scalar = np.vdot(out.det_vector, wedge(l1, l2))
    return out, complex(scalar)


def pair(dual_line, line):
    """Duality pairing of the line for (b, a) with the line for (a, b)."""
    if dual_line.dual_flag == line.dual_flag:
        raise ValueError("pairing needs a line and its dual")
    return complex(np.vdot(dual_line.det_vector, line.det_vector))


def cocycle_value(data, lines, a, b, c):
    """g_abc for arbitrary cut indices, by the permutation rule from ascending order."""
    idx = (a, b, c)
    if len(set(idx)) < 3:
        return 1.0 + 0j
    order = sorted(range(3), key=lambda k: idx[k])
    inversions = sum(1 for i in range(3) for j in range(i + 1, 3) if order[i] > order[j])
    x, y, z = sorted(idx)
    _, g = multiply(data, lines[x, y], lines[y, z])
    return g if inversions % 2 == 0 else np.conj(g)


@dataclass(frozen=True)
class CocycleReport:
    associativity: float
    duality: float
    unitarity: float
    dimension_ok: bool

    @property
    def residual(self):
        return max(self.associativity, self.duality, self.unitarity)


def check_cocycle(X, cuts, gap_tol=GAP_TOL, cluster_tol=CLUSTER_TOL):
    """Residuals of the gerbe axioms over a chain of cuts.

    Associativity: |g_abc g_acd - g_abd g_bcd| over every ascending 4-chain.
    Duality: |<L(b,a), L(a,b)> - 1| for every pair.
    """
    data = _data(X, gap_tol=gap_tol, cluster_tol=cluster_tol)
    cuts = sorted(cuts, key=lambda c: c.t)
    if len(cuts) < 3:
        raise ValueError("need at least three cuts")
    m = len(cuts)
    lines = {}
    for i in range(m):
        for j in range(m):
            if i != j:
                lines[i, j] = spectral_line(data, cuts[i], cuts[j], gap_tol)
    g = {}
    dims_ok = True
    unit = 0.0
    for i, j, k in combinations(range(m), 3):
        g[i, j, k] = cocycle_value(data, lines, i, j, k)
        unit = max(unit, abs(abs(g[i, j, k]) - 1.0))
        dims_ok &= lines[i, j].dim + lines[j, k].dim == lines[i, k].dim
    assoc = 0.0
    for a, b, c, d in combinations(range(m), 4):
        assoc = max(assoc, abs(g[a, b, c] * g[a, c, d] - g[a, b, d] * g[b, c, d]))
    dual = max(abs(pair(lines[j, i], lines[i, j]) - 1.0) for i, j in combinations(range(m), 2))
    return CocycleReport(float(assoc), float(dual), float(unit), bool(dims_ok))


def random_su(n, rng):
    """Haar-random special unitary matrix (QR of a complex Gaussian, phases fixed)."""
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    Q = Q * (d / np.abs(d))
    det = np.linalg.det(Q)
    return Q / det ** (1.0 / n)


def random_cuts(data, count, rng, margin=1e-3):
    """Distinct admissible cuts, each at least ``margin`` (in t) from the spectrum."""
    angles = np.array([b.t for b in data.blocks])
    out = []
    while len(out) < count:
        t = float(rng.uniform(margin, 1 - margin))
        d = np.abs(angles - t)
        if np.all(np.minimum(d, 1 - d) > margin) and all(abs(t - c.t) > margin for c in out):
            out.append(Cut(t))
    return sorted(out, key=lambda c: c.t)
