import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gerbelab import spectral
from gerbelab.spectral import Cut, SpectralData, spectral_line

DIAG = np.diag([1j, -1j])


def su(n, seed):
    return spectral.random_su(n, np.random.default_rng(seed))


# -- Jacobi / eigendecomposition -------------------------------------------------

@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_jacobi_matches_numpy(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    A = (A + A.conj().T) / 2
    w, V = spectral.jacobi_hermitian(A)
    assert np.allclose(w, np.linalg.eigvalsh(A), atol=1e-10)
    assert np.abs(A @ V - V * w).max() < 1e-10
    assert np.abs(V.conj().T @ V - np.eye(n)).max() < 1e-12


def test_identity_is_one_block():
    blocks = spectral.eigendecompose(np.eye(2))
    assert len(blocks) == 1 and blocks[0].t == 0 and blocks[0].multiplicity == 2


def test_diag_i_minus_i():
    blocks = spectral.eigendecompose(DIAG)
    assert [b.t for b in blocks] == pytest.approx([0.25, 0.75])
    assert np.allclose(np.abs(blocks[0].vectors[:, 0]), [1, 0])
    assert np.allclose(np.abs(blocks[1].vectors[:, 0]), [0, 1])


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_reconstruction(n):
    for seed in range(10):
        X = su(n, seed)
        blocks = spectral.eigendecompose(X)
        r1, r2 = spectral.reconstruction_residual(X, blocks)
        assert r1 < 1e-8 and r2 < 1e-8
        for b in blocks:
            assert np.abs(X @ b.vectors - np.exp(2j * np.pi * b.t) * b.vectors).max() < 1e-8
        assert [b.t for b in blocks] == sorted(b.t for b in blocks)


def test_degenerate_eigenvalues_merged(rng):
    # a conjugated diag(w, w, conj(w)^2) has a double eigenvalue
    w = np.exp(2j * np.pi * 0.1)
    Q, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    X = Q @ np.diag([w, w, np.conj(w) ** 2]) @ Q.conj().T
    blocks = spectral.eigendecompose(X)
    assert [b.multiplicity for b in blocks] == [1, 2] or [b.multiplicity for b in blocks] == [2, 1]
    assert max(spectral.reconstruction_residual(X, blocks)) < 1e-8


def test_wraparound_cluster_merged():
    eps = 1e-10
    X = np.diag(np.exp(2j * np.pi * np.array([eps, -eps, 0.0])))
    blocks = spectral.eigendecompose(X)
    assert len(blocks) == 1 and blocks[0].multiplicity == 3


def test_rejects_non_unitary():
    with pytest.raises(ValueError):
        spectral.eigendecompose(np.array([[2, 0], [0, 0.5]], dtype=complex))
    with pytest.raises(ValueError):
        spectral.eigendecompose(np.diag([1j, 1j]))


# -- lines and multiplication ------------------------------------------------------

def test_cut_range():
    with pytest.raises(ValueError):
        Cut(0.0)
    with pytest.raises(ValueError):
        Cut(1.0)


def test_worked_lines():
    l1 = spectral_line(DIAG, Cut(1 / 8), Cut(3 / 8))
    assert l1.dim == 1 and np.allclose(np.abs(l1.basis[:, 0]), [1, 0])
    l13 = spectral_line(DIAG, Cut(1 / 8), Cut(7 / 8))
    assert l13.dim == 2
    assert np.allclose(np.abs(l13.det_vector), [1])


def test_equal_cuts_give_trivial_line():
    line = spectral_line(DIAG, Cut(0.3), Cut(0.3))
    assert line.dim == 0 and np.array_equal(line.det_vector, [1])


def test_reversed_cuts_give_dual():
    a, b = Cut(1 / 8), Cut(3 / 8)
    fwd, back = spectral_line(DIAG, a, b), spectral_line(DIAG, b, a)
    assert back.dual_flag and not fwd.dual_flag
    assert spectral.pair(back, fwd) == pytest.approx(1)


def test_multiply_worked_example():
    l1 = spectral_line(DIAG, Cut(1 / 8), Cut(3 / 8))
    l2 = spectral_line(DIAG, Cut(3 / 8), Cut(7 / 8))
    out, g = spectral.multiply(DIAG, l1, l2)
    assert out.dim == 2 and g == pytest.approx(1, abs=1e-12)


def test_multiply_with_empty_line():
    X = su(3, 1)
    data = SpectralData(X)
    a, b, c = spectral.random_cuts(data, 3, np.random.default_rng(1))
    e = spectral_line(data, a, a)
    lac = spectral_line(data, a, c)
    # an empty line on the left: (a, a) then (a, c)
    out, g = spectral.multiply(data, e, lac)
    assert abs(g - 1) < 1e-12 and np.allclose(out.det_vector, lac.det_vector)


def test_multiply_rejects_broken_chain():
    l1 = spectral_line(DIAG, Cut(0.1), Cut(0.3))
    l2 = spectral_line(DIAG, Cut(0.4), Cut(0.9))
    with pytest.raises(ValueError):
        spectral.multiply(DIAG, l1, l2)


def test_cut_near_spectrum_rejected():
    with pytest.raises(ValueError):
        spectral_line(DIAG, Cut(0.25 + 1e-8), Cut(0.5))


# -- cocycle ------------------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 3, 4])
def test_random_cocycles(n):
    rng = np.random.default_rng(100 + n)
    for _ in range(30):
        data = SpectralData(spectral.random_su(n, rng))
        r = spectral.check_cocycle(data, spectral.random_cuts(data, 4, rng))
        assert r.associativity < 1e-8 and r.duality < 1e-8 and r.unitarity < 1e-8
        assert r.dimension_ok


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.01, 0.99), min_size=3, max_size=3, unique=True),
       st.lists(st.floats(0.02, 0.98), min_size=3, max_size=3))
def test_diagonal_cocycle_exact(angles, cuts):
    t = np.array(angles)
    t[-1] = np.mod(-t[:-1].sum(), 1.0)
    X = np.diag(np.exp(2j * np.pi * t))
    data = SpectralData(X)
    try:
        cs = [Cut(c) for c in sorted(set(cuts))]
        for c in cs:
            data.check_cut(c)
    except ValueError:
        return
    if len(cs) < 3:
        return
    assert spectral.check_cocycle(data, cs).residual < 1e-12


def test_cuts_without_spectrum_between():
    X = np.diag(np.exp(2j * np.pi * np.array([0.1, 0.2, 0.7])))
    r = spectral.check_cocycle(X, [Cut(0.3), Cut(0.4), Cut(0.5)])
    assert r.residual == 0


def test_line_dimensions_add(rng):
    data = SpectralData(spectral.random_su(5, rng))
    a, b, c = spectral.random_cuts(data, 3, rng)
    assert (spectral_line(data, a, b).dim + spectral_line(data, b, c).dim
            == spectral_line(data, a, c).dim)


def test_continuity(rng):
    X = spectral.random_su(3, rng)
    data = SpectralData(X)
    cuts = spectral.random_cuts(data, 3, rng, margin=0.02)
    E = 1e-7 * (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    U, _, Vh = np.linalg.svd(X + E)
    Y = U @ Vh
    Y = Y / np.linalg.det(Y) ** (1 / 3)
    lines = lambda d: {(i, j): spectral_line(d, cuts[i], cuts[j])  # noqa: E731
                       for i in range(3) for j in range(3) if i != j}
    d1 = SpectralData(Y)
    g0 = spectral.cocycle_value(data, lines(data), 0, 1, 2)
    g1 = spectral.cocycle_value(d1, lines(d1), 0, 1, 2)
    assert abs(g1 - g0) < 1e3 * np.linalg.norm(Y - X)


def test_permutation_rule():
    X = su(4, 3)
    data = SpectralData(X)
    cuts = spectral.random_cuts(data, 3, np.random.default_rng(3))
    lines = {(i, j): spectral_line(data, cuts[i], cuts[j]) for i in range(3) for j in range(3) if i != j}
    g = spectral.cocycle_value(data, lines, 0, 1, 2)
    assert spectral.cocycle_value(data, lines, 1, 0, 2) == pytest.approx(np.conj(g))
    assert spectral.cocycle_value(data, lines, 1, 2, 0) == pytest.approx(g)
    assert spectral.cocycle_value(data, lines, 0, 0, 2) == 1
