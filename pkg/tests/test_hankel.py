import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aloha import _hankel_py
from aloha.hankel import SIDE_BY_SIDE, STACKED, HankelLift, concat_coils, lift_1d, lift_2d, unlift
from aloha.sampling import dirac_image_kspace
from conftest import crandn


def test_lift_1d_index_pattern(backend):
    y = np.array([1, 2, 3, 4], dtype=complex)
    assert np.array_equal(lift_1d(y, 2).entries, [[1, 2], [2, 3], [3, 4]])


def test_unit_window_is_column(backend):
    y = np.arange(5) + 1j
    assert np.array_equal(lift_1d(y, 1).entries[:, 0], y)
    g = np.array([[1, 2], [3, 4]], dtype=complex)
    col = lift_2d(g, (1, 1)).entries
    assert col.shape == (4, 1)
    assert sorted(col[:, 0].real) == [1, 2, 3, 4]


def test_constant_data_rank_one(backend):
    m = lift_1d(np.full(12, 3 - 1j), 5).entries
    s = np.linalg.svd(m, compute_uv=False)
    assert s[1] < 1e-12 * s[0]


def test_separable_grid_rank_one(backend, rng):
    a = np.exp(0.3j * np.arange(10))
    b = np.exp(-0.7j * np.arange(9))
    s = np.linalg.svd(lift_2d(np.outer(a, b), (4, 3)).entries, compute_uv=False)
    assert s[1] < 1e-12 * s[0]


def test_single_2d_dirac_rank_one(backend):
    ksp = dirac_image_kspace((16, 16), [(2.3, -4.1)], [1.5])
    s = np.linalg.svd(lift_2d(ksp, (3, 3)).entries, compute_uv=False)
    assert s[1] < 1e-10 * s[0]


def test_block_layout_matches_definition(backend, rng):
    n1, m1, p1, q1 = 7, 6, 3, 2
    g = crandn(rng, n1, m1)
    mat = lift_2d(g, (p1, q1)).entries
    rows = n1 - p1 + 1
    for ib in range(m1 - q1 + 1):
        for jb in range(q1):
            for a in range(rows):
                for b in range(p1):
                    assert mat[ib * rows + a, jb * p1 + b] == g[a + b, ib + jb]


def test_multicoil_shapes(backend, rng):
    g = crandn(rng, 3, 10, 8)
    side = HankelLift((10, 8), (4, 3), 3, SIDE_BY_SIDE)
    stack = HankelLift((10, 8), (4, 3), 3, STACKED)
    assert side.lift(g).shape == (7 * 6, 12 * 3)
    assert stack.lift(g).shape == (7 * 6 * 3, 12)
    single = HankelLift((10, 8), (4, 3)).lift(g[1])
    assert np.array_equal(side.lift(g)[:, 12:24], single)
    assert np.array_equal(stack.lift(g)[42:84], single)


def test_concat_coils(backend, rng):
    g = crandn(rng, 12)
    one = lift_1d(g, 5)
    assert concat_coils([one]) is one
    two = concat_coils([one, one])
    assert np.linalg.matrix_rank(two.entries, tol=1e-9) == np.linalg.matrix_rank(one.entries, tol=1e-9)
    stacked = concat_coils([one, lift_1d(2 * g, 5)], STACKED)
    assert stacked.shape == (16, 5)
    back = unlift(stacked)
    assert np.allclose(back, [g, 2 * g])
    with pytest.raises(ValueError):
        concat_coils([one, lift_1d(g[:-1], 5)])
    with pytest.raises(ValueError):
        concat_coils([one], "diagonal")


def test_unlift_perturbed_antidiagonal(backend, rng):
    g = crandn(rng, 9)
    lm = lift_1d(g, 4)
    mat = lm.entries.copy()
    idx = 5
    for i in range(mat.shape[0]):
        j = idx - i
        if 0 <= j < mat.shape[1]:
            mat[i, j] += 0.25
    out = lm.lift.unlift(mat)
    expect = g.copy()
    expect[idx] += 0.25
    assert np.allclose(out, expect, atol=1e-14)


def test_unlift_idempotent_on_random_matrix(backend, rng):
    cfg = HankelLift((8, 7), (3, 4), 2)
    mat = crandn(rng, *cfg.shape)
    once = cfg.unlift(mat)
    twice = cfg.unlift(cfg.lift(once))
    assert np.allclose(once, twice, atol=1e-14)


def test_unlift_is_mean_of_copies(backend, rng):
    cfg = HankelLift((6,), (3,))
    mat = crandn(rng, *cfg.shape)
    out = cfg.unlift(mat)
    # grid entry 2 appears at (0,2), (1,1), (2,0)
    assert np.isclose(out[2], (mat[0, 2] + mat[1, 1] + mat[2, 0]) / 3)


def test_adjoint_inner_product(backend, rng):
    cfg = HankelLift((11, 9), (4, 5), 3)
    x = crandn(rng, 3, 11, 9)
    M = crandn(rng, *cfg.shape)
    lhs = np.vdot(M, cfg.lift(x))
    rhs = np.vdot(cfg.adjoint(M), x)
    assert abs(lhs - rhs) <= 1e-12 * abs(lhs)
    # the averaging pseudo-inverse is the adjoint divided by the multiplicity
    assert np.allclose(cfg.unlift(M) * cfg.multiplicity(), cfg.adjoint(M), atol=1e-12)


def test_multiplicity_counts(backend):
    cfg = HankelLift((10, 7), (4, 3))
    ones = np.ones(cfg.shape)
    assert np.array_equal(cfg.adjoint(ones).real, cfg.multiplicity())
    assert cfg.multiplicity().sum() == cfg.shape[0] * cfg.shape[1]


def test_bad_windows():
    with pytest.raises(ValueError):
        HankelLift((8,), (9,))
    with pytest.raises(ValueError):
        HankelLift((8, 8), (0, 3))
    with pytest.raises(ValueError):
        HankelLift((8, 8), (3, 3), direction="diagonal")
    with pytest.raises(ValueError):
        HankelLift((8, 8), (3, 3)).unlift(np.zeros((3, 3)))


def test_backends_agree(rng):
    from conftest import _ext
    if _ext is None:
        pytest.skip("compiled extension not built")
    for stacked in (False, True):
        g = crandn(rng, 3, 13, 10)
        a = _hankel_py.lift(g, 5, 4, stacked)
        b = _ext.lift(g, 5, 4, stacked)
        assert np.array_equal(a, b)
        M = crandn(rng, *a.shape)
        assert np.allclose(_hankel_py.unlift(M, 3, 13, 10, 5, 4, stacked),
                           _ext.unlift(M, 3, 13, 10, 5, 4, stacked), atol=1e-14, rtol=0)
        assert np.allclose(_hankel_py.adjoint(M, 3, 13, 10, 5, 4, stacked),
                           _ext.adjoint(M, 3, 13, 10, 5, 4, stacked), atol=1e-13, rtol=0)


@settings(max_examples=60, deadline=None)
@given(n1=st.integers(1, 12), m1=st.integers(1, 9), coils=st.integers(1, 3),
       stacked=st.booleans(), data=st.data())
def test_unlift_lift_identity(n1, m1, coils, stacked, data):
    p1 = data.draw(st.integers(1, n1))
    q1 = data.draw(st.integers(1, m1))
    rng = np.random.default_rng(n1 * 1000 + m1 * 10 + coils)
    g = crandn(rng, coils, n1, m1)
    cfg = HankelLift((n1, m1), (p1, q1), coils, STACKED if stacked else SIDE_BY_SIDE)
    back = cfg.unlift(cfg.lift(g))
    assert np.max(np.abs(back.reshape(g.shape) - g)) <= 1e-14 * np.max(np.abs(g))
