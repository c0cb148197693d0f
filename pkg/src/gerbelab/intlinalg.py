"""
Exact integer linear algebra.

Two engines live here:

* :func:`smith_normal_form` -- dense Smith normal form with unimodular
  witnesses ``U A V = D`` (and their inverses), Python integers throughout.
* :class:`Reduction` -- a sparse factorization for the large, very sparse
  coboundary matrices of nerves.  Entries equal to +-1 are eliminated first
  (Markowitz-style choice to limit fill-in); whatever is left is handed to the
  dense Smith form.  Each elimination step is unimodular, so the cokernel,
  the invariant factors and the kernel lattice are all preserved exactly.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from math import gcd, inf

import numpy as np


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    entries: tuple  # tuple of row tuples

    def __post_init__(self):
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise ValueError("entry count does not match dimensions")

    @classmethod
    def of(cls, data, cols=None):
        data = [[int(x) for x in row] for row in data]
        if cols is None:
            cols = len(data[0]) if data else 0
        return cls(len(data), cols, tuple(tuple(r) for r in data))

    @classmethod
    def identity(cls, n):
        return cls.of([[int(i == j) for j in range(n)] for i in range(n)], n)

    def tolist(self):
        return [list(r) for r in self.entries]

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        cols = list(zip(*other.entries)) if other.rows else [()] * other.cols
        return IntMatrix.of([[sum(a * b for a, b in zip(r, c)) for c in cols]
                             for r in self.entries], other.cols)

    def to_json(self):
        return {"rows": self.rows, "cols": self.cols,
                "entries": [x for r in self.entries for x in r]}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, list):  # plain nested rows
            return cls.of(obj)
        r, c, flat = int(obj["rows"]), int(obj["cols"]), list(obj["entries"])
        if len(flat) != r * c:
            raise ValueError("entry count does not match dimensions")
        return cls.of([flat[i * c:(i + 1) * c] for i in range(r)], c)


@dataclass(frozen=True)
class SnfResult:
    U: IntMatrix
    D: IntMatrix
    V: IntMatrix
    diagonal: tuple
    U_inv: IntMatrix = None
    V_inv: IntMatrix = None

    @property
    def rank(self):
        return sum(1 for d in self.diagonal if d)


def _snf_lists(A, m, n, track=True):
    """In-place Smith form of list-of-lists ``A``; returns (diag, U, Ui, V, Vi)."""
    eye = lambda k: [[int(i == j) for j in range(k)] for i in range(k)]
    U, Ui, V, Vi = (eye(m), eye(m), eye(n), eye(n)) if track else (None,) * 4

    def row_add(i, j, q):  # row_i += q row_j
        if not q:
            return
        Ai, Aj = A[i], A[j]
        for c in range(n):
            if Aj[c]:
                Ai[c] += q * Aj[c]
        if track:
            Uii, Ujj = U[i], U[j]
            for c in range(m):
                if Ujj[c]:
                    Uii[c] += q * Ujj[c]
            for r in range(m):
                if Ui[r][i]:
                    Ui[r][j] -= q * Ui[r][i]

    def col_add(i, j, q):  # col_i += q col_j
        if not q:
            return
        for r in range(m):
            if A[r][j]:
                A[r][i] += q * A[r][j]
        if track:
            for r in range(n):
                if V[r][j]:
                    V[r][i] += q * V[r][j]
            Vij, Vii = Vi[j], Vi[i]
            for c in range(n):
                if Vii[c]:
                    Vij[c] -= q * Vii[c]

    def row_swap(i, j):
        if i == j:
            return
        A[i], A[j] = A[j], A[i]
        if track:
            U[i], U[j] = U[j], U[i]
            for r in range(m):
                Ui[r][i], Ui[r][j] = Ui[r][j], Ui[r][i]

    def col_swap(i, j):
        if i == j:
            return
        for r in range(m):
            A[r][i], A[r][j] = A[r][j], A[r][i]
        if track:
            for r in range(n):
                V[r][i], V[r][j] = V[r][j], V[r][i]
            Vi[i], Vi[j] = Vi[j], Vi[i]

    def row_neg(i):
        A[i] = [-x for x in A[i]]
        if track:
            U[i] = [-x for x in U[i]]
            for r in range(m):
                Ui[r][i] = -Ui[r][i]

    diag = []
    for t in range(min(m, n)):
        # smallest nonzero |entry| in the trailing block as pivot
        best = None
        for i in range(t, m):
            Ai = A[i]
            for j in range(t, n):
                a = Ai[j]
                if a and (best is None or abs(a) < best[0]):
                    best = (abs(a), i, j)
                    if best[0] == 1:
                        break
            if best and best[0] == 1:
                break
        if best is None:
            break
        row_swap(t, best[1])
        col_swap(t, best[2])
        while True:
            p = A[t][t]
            dirty = False
            for i in range(t + 1, m):
                if A[i][t]:
                    row_add(i, t, -(A[i][t] // p))
                    dirty |= A[i][t] != 0
            for j in range(t + 1, n):
                if A[t][j]:
                    col_add(j, t, -(A[t][j] // p))
                    dirty |= A[t][j] != 0
            if dirty:
                # a remainder smaller than the pivot survived: move it to (t, t)
                cand = [(abs(A[i][t]), i, t) for i in range(t + 1, m) if A[i][t]]
                cand += [(abs(A[t][j]), t, j) for j in range(t + 1, n) if A[t][j]]
                _, i, j = min(cand)
                row_swap(t, i)
                col_swap(t, j)
                continue
            # enforce divisibility of the trailing block
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if A[i][j] % p), None)
            if bad is None:
                break
            row_add(t, bad[0], 1)
        if A[t][t] < 0:
            row_neg(t)
        diag.append(A[t][t])
    return diag, U, Ui, V, Vi


def smith_normal_form(A, track=True):
    """Smith normal form ``U A V = D`` of an integer matrix.

    ``A`` may be an :class:`IntMatrix` or any nested sequence of integers.
    The returned diagonal lists only the nonzero invariant factors, each
    dividing the next.  With ``track=False`` the unimodular witnesses are
    skipped (``U``, ``V`` are then ``None``).
    """
    if not isinstance(A, IntMatrix):
        A = IntMatrix.of(A)
    m, n = A.rows, A.cols
    work = A.tolist()
    diag, U, Ui, V, Vi = _snf_lists(work, m, n, track)
    D = IntMatrix.of(work, n)
    if not track:
        return SnfResult(None, D, None, tuple(diag))
    return SnfResult(IntMatrix.of(U, m), D, IntMatrix.of(V, n), tuple(diag),
                     IntMatrix.of(Ui, m), IntMatrix.of(Vi, n))


def verify_snf(A, res):
    """Check every Smith-form witness exactly; raises AssertionError on failure."""
    if not isinstance(A, IntMatrix):
        A = IntMatrix.of(A)
    assert res.U @ A @ res.V == res.D, "U A V != D"
    m, n = A.rows, A.cols
    for i in range(m):
        for j in range(n):
            expect = res.diagonal[i] if (i == j and i < len(res.diagonal)) else 0
            assert res.D.entries[i][j] == expect, "D is not the reported diagonal"
    for a, b in zip(res.diagonal, res.diagonal[1:]):
        assert b % a == 0, "divisibility chain broken"
    assert all(d > 0 for d in res.diagonal)
    if res.U_inv is not None:
        assert res.U @ res.U_inv == IntMatrix.identity(m)
        assert res.V @ res.V_inv == IntMatrix.identity(n)
    return True


def _lcm(a, b):
    return a * b // gcd(a, b)


class Reduction:
    """Sparse unimodular factorization of an integer matrix ``M`` (rows x cols).

    ``rows`` is a list of ``{col: value}`` dicts.  After construction the
    object answers, exactly:

    * ``invariant_factors`` / ``rank``
    * ``order(b)``  -- order of ``b`` in ``coker M = Z^rows / im M`` (``inf``
      when ``b`` has a nonzero free component)
    * ``solve(b)``  -- an integer ``x`` with ``M x = b`` or ``None``
    * ``kernel()``  -- a lattice basis of ``ker M`` as sparse dicts
    * ``coker_coordinates(b)`` / ``coker_generators()`` -- an explicit
      isomorphism of ``coker M / torsion`` with ``Z^f``
    """

    def __init__(self, rows, ncols):
        self.nrows = len(rows)
        self.ncols = ncols
        work = [dict((c, int(v)) for c, v in r.items() if v) for r in rows]
        cols = [set() for _ in range(ncols)]
        for i, r in enumerate(work):
            for c in r:
                cols[c].add(i)
        self.steps = []  # (pivot_row, pivot_col, pivot, row_snapshot, [(row, factor)])
        self._eliminate(work, cols)
        self.pivot_rows = {s[0] for s in self.steps}
        self.pivot_cols = {s[1] for s in self.steps}
        live_rows = [i for i in range(self.nrows) if i not in self.pivot_rows]
        self.res_rows = [i for i in live_rows if work[i]]
        self.zero_rows = [i for i in live_rows if not work[i]]
        used = sorted({c for i in self.res_rows for c in work[i]})
        self.res_cols = used
        self.free_cols = [c for c in range(ncols)
                          if c not in self.pivot_cols and not cols[c]]
        col_pos = {c: k for k, c in enumerate(used)}
        dense = [[0] * len(used) for _ in self.res_rows]
        for k, i in enumerate(self.res_rows):
            for c, v in work[i].items():
                dense[k][col_pos[c]] = v
        self.residual = IntMatrix.of(dense, len(used))
        self.snf = smith_normal_form(self.residual)
        self.res_rank = len(self.snf.diagonal)

    def _eliminate(self, work, cols):
        heap = [(len(s), c) for c, s in enumerate(cols) if s]
        heapq.heapify(heap)
        deferred = []
        progress = False
        while heap or (deferred and progress):
            if not heap:
                heap = [(len(cols[c]), c) for c in deferred if cols[c]]
                heapq.heapify(heap)
                deferred, progress = [], False
                continue
            length, c = heapq.heappop(heap)
            if not cols[c]:
                continue
            if length != len(cols[c]):
                heapq.heappush(heap, (len(cols[c]), c))
                continue
            units = [r for r in cols[c] if abs(work[r][c]) == 1]
            if not units:
                deferred.append(c)
                continue
            r = min(units, key=lambda i: (len(work[i]), i))
            p = work[r][c]
            prow = work[r]
            ops = []
            for r2 in list(cols[c]):
                if r2 == r:
                    continue
                f = work[r2][c] * p
                ops.append((r2, f))
                row2 = work[r2]
                for j, v in prow.items():
                    nv = row2.get(j, 0) - f * v
                    if nv:
                        if j not in row2:
                            cols[j].add(r2)
                        row2[j] = nv
                    else:
                        row2.pop(j, None)
                        cols[j].discard(r2)
            self.steps.append((r, c, p, dict(prow), ops))
            for j in prow:
                cols[j].discard(r)
            work[r] = {}
            progress = True

    # -- invariants -------------------------------------------------------
    @property
    def invariant_factors(self):
        return (1,) * len(self.steps) + self.snf.diagonal

    @property
    def rank(self):
        return len(self.steps) + self.res_rank

    @property
    def torsion(self):
        return tuple(d for d in self.invariant_factors if d > 1)

    # -- right-hand sides ---------------------------------------------------
    def _reduce(self, b):
        """Apply the logged row operations; returns (values, pivot-row values)."""
        vals = dict((i, v) for i, v in b.items() if v)
        at_pivot = []
        for r, _, _, _, ops in self.steps:
            br = vals.get(r, 0)
            at_pivot.append(br)
            if br:
                for r2, f in ops:
                    nv = vals.get(r2, 0) - f * br
                    if nv:
                        vals[r2] = nv
                    else:
                        vals.pop(r2, None)
        return vals, at_pivot

    @staticmethod
    def _as_dict(b):
        if isinstance(b, dict):
            return b
        arr = np.asarray(b)
        return {int(i): arr[i].item() for i in np.flatnonzero(arr)}

    def _residual_image(self, vals):
        return [sum(u * vals.get(i, 0) for u, i in zip(urow, self.res_rows))
                for urow in self.snf.U.entries]

    def order(self, b):
        """Order of ``b`` in the cokernel (1 when ``b`` is in the image)."""
        vals, _ = self._reduce(self._as_dict(b))
        if any(vals.get(i, 0) for i in self.zero_rows):
            return inf
        c = self._residual_image(vals)
        n = 1
        for k, ck in enumerate(c):
            if k < self.res_rank:
                d = self.snf.diagonal[k]
                n = _lcm(n, d // gcd(d, ck))
            elif ck:
                return inf
        return n

    def solve(self, b):
        """Integer solution of ``M x = b`` as a dict, or ``None``."""
        vals, at_pivot = self._reduce(self._as_dict(b))
        if any(vals.get(i, 0) for i in self.zero_rows):
            return None
        c = self._residual_image(vals)
        y = []
        for k, ck in enumerate(c):
            if k < self.res_rank:
                d = self.snf.diagonal[k]
                if ck % d:
                    return None
                y.append(ck // d)
            elif ck:
                return None
        y += [0] * (self.residual.cols - len(y))
        x = {}
        for col, row in zip(self.res_cols, self.snf.V.entries):
            v = sum(a * b for a, b in zip(row, y))
            if v:
                x[col] = v
        self._back_substitute(x, at_pivot)
        return x

    def _back_substitute(self, x, at_pivot):
        for (r, c, p, row, _), br in zip(reversed(self.steps), reversed(at_pivot)):
            s = br - sum(v * x.get(j, 0) for j, v in row.items() if j != c)
            if s:
                x[c] = p * s
            else:
                x.pop(c, None)

    def kernel(self):
        """Lattice basis of ``ker M`` (list of sparse dicts)."""
        basis = []
        zeros = [0] * len(self.steps)
        for j in range(self.res_rank, self.residual.cols):
            x = {}
            for col, row in zip(self.res_cols, self.snf.V.entries):
                if row[j]:
                    x[col] = row[j]
            self._back_substitute(x, zeros)
            basis.append(x)
        for c in self.free_cols:
            x = {c: 1}
            self._back_substitute(x, zeros)
            basis.append(x)
        return basis

    def kernel_coordinates(self, x):
        """Coordinates of a kernel vector in the basis returned by :meth:`kernel`.

        Linear, so it may also be applied to rational or real kernel vectors.
        """
        x = self._as_dict(x)
        res = [x.get(c, 0) for c in self.res_cols]
        Vi = self.snf.V_inv.entries
        coords = [sum(a * b for a, b in zip(Vi[j], res))
                  for j in range(self.res_rank, self.residual.cols)]
        return coords + [x.get(c, 0) for c in self.free_cols]

    @property
    def coker_free_rank(self):
        return len(self.zero_rows) + len(self.res_rows) - self.res_rank

    def coker_coordinates(self, b):
        """Image of ``b`` in ``coker M / torsion = Z^f`` (linear in ``b``)."""
        vals, _ = self._reduce(self._as_dict(b))
        c = self._residual_image(vals)
        return c[self.res_rank:] + [vals.get(i, 0) for i in self.zero_rows]

    def coker_generators(self):
        """Vectors in ``Z^rows`` whose classes are dual to :meth:`coker_coordinates`."""
        gens = []
        Ui = self.snf.U_inv.entries
        for k in range(self.res_rank, len(self.res_rows)):
            gens.append({i: Ui[a][k] for a, i in enumerate(self.res_rows) if Ui[a][k]})
        for i in self.zero_rows:
            gens.append({i: 1})
        return [self._unreduce(g) for g in gens]

    def _unreduce(self, vals):
        vals = dict(vals)
        for r, _, _, _, ops in reversed(self.steps):
            # invert "b[r2] -= f * b[r]"; b[r] is zero in reduced coordinates
            # for generators, but keep the general form
            br = vals.get(r, 0)
            if br:
                for r2, f in ops:
                    nv = vals.get(r2, 0) + f * br
                    if nv:
                        vals[r2] = nv
                    else:
                        vals.pop(r2, None)
        return vals


def rank_mod_p(rows, ncols, p=2_147_483_647):
    """Rank of a sparse integer matrix over GF(p); an independent cross-check."""
    work = [dict((c, v % p) for c, v in r.items() if v % p) for r in rows]
    rank = 0
    pivots = {}
    for r in work:
        r = dict(r)
        while r:
            c = min(r)
            if c in pivots:
                prow = pivots[c]
                f = r[c]
                for j, v in prow.items():
                    nv = (r.get(j, 0) - f * v) % p
                    if nv:
                        r[j] = nv
                    else:
                        r.pop(j, None)
            else:
                inv = pow(r[c], p - 2, p)
                pivots[c] = {j: (v * inv) % p for j, v in r.items()}
                rank += 1
                break
    return rank
