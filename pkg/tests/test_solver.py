import numpy as np
import pytest

from aloha.fri import DiracStream, dirac_spectrum
from aloha.hankel import HankelLift
from aloha.sampling import nmse
from aloha.solver import (FactorPair, SolverDivergence, admm_complete, admm_complete_relaxed,
                          balance, complete, lmafit_init, nuclear_norm_oracle)
from conftest import crandn


def lowrank(rng, m, n, r):
    return crandn(rng, m, r) @ crandn(rng, r, n)


def dirac_problem(seed, k=3, n1=64, m=32):
    rng = np.random.default_rng(seed)
    s = DiracStream.random(rng, k, n1)
    y = dirac_spectrum(s)
    mask = np.zeros(n1, dtype=bool)
    mask[rng.choice(np.arange(1, n1), m, replace=False)] = True
    mask[0] = True  # DC
    return y, mask


def test_lmafit_rank_one_exact(rng):
    Z = lowrank(rng, 20, 15, 1)
    fp = lmafit_init(Z, np.ones(Z.shape, bool), tol=1e-6)
    assert fp.rank == 1
    assert fp.info["residual"] <= 1e-6
    assert np.linalg.norm(fp.product() - Z) <= 1e-6 * np.linalg.norm(Z)


def test_lmafit_rank_grows(rng):
    Z = lowrank(rng, 30, 20, 3)
    fp = lmafit_init(Z, np.ones(Z.shape, bool), tol=1e-6, rank0=1)
    assert fp.rank == 3
    assert fp.info["converged"]


def test_lmafit_completes_half_known(rng):
    Z = lowrank(rng, 30, 20, 2)
    known = rng.uniform(size=Z.shape) < 0.5
    fp = lmafit_init(np.where(known, Z, 0), known, tol=1e-9, rank0=2, max_iters=2000)
    assert np.linalg.norm(fp.product() - Z) / np.linalg.norm(Z) <= 1e-4


def test_lmafit_rank_cap_and_errors(rng):
    Z = crandn(rng, 12, 8)  # full rank
    fp = lmafit_init(Z, np.ones(Z.shape, bool), tol=1e-12, max_iters=300)
    assert fp.rank <= 4
    assert "warning" in fp.info
    with pytest.raises(ValueError):
        lmafit_init(Z, np.zeros(Z.shape, bool), tol=1e-3)
    with pytest.raises(ValueError):
        lmafit_init(Z, np.ones((2, 2), bool), tol=1e-3)
    zero = lmafit_init(np.zeros((5, 4)), np.ones((5, 4), bool), tol=1e-3)
    assert zero.info["residual"] == 0


def test_factor_pair_validation(rng):
    with pytest.raises(ValueError):
        FactorPair(crandn(rng, 5, 2), crandn(rng, 4, 3))
    with pytest.raises(ValueError):
        FactorPair(crandn(rng, 5, 2), crandn(rng, 4, 2), mu=0)
    fp = FactorPair(crandn(rng, 5, 2), crandn(rng, 4, 2))
    assert fp.lam.shape == (5, 4) and not fp.lam.any()


def test_balance_keeps_product(rng):
    U, V = crandn(rng, 9, 3), crandn(rng, 7, 3)
    Ub, Vb = balance(U, V)
    assert np.allclose(Ub @ Vb.conj().T, U @ V.conj().T)
    assert np.allclose(Ub.conj().T @ Ub, Vb.conj().T @ Vb, atol=1e-10)


def test_nuclear_norm_examples(rng):
    assert np.isclose(nuclear_norm_oracle(np.eye(3)), 3)
    u, v = crandn(rng, 5), crandn(rng, 4)
    assert np.isclose(nuclear_norm_oracle(np.outer(u, v.conj())), np.linalg.norm(u) * np.linalg.norm(v))
    A = crandn(rng, 6, 4)
    a, s, bh = np.linalg.svd(A, full_matrices=False)
    U, V = a * np.sqrt(s), bh.conj().T * np.sqrt(s)
    bound = 0.5 * (np.linalg.norm(U) ** 2 + np.linalg.norm(V) ** 2)
    assert np.isclose(nuclear_norm_oracle(A), bound)


def test_full_sampling_returns_input(backend, rng):
    y = crandn(rng, 16)
    lift = HankelLift((16,), (8,))
    init = lmafit_init(lift.lift(y), np.ones(lift.shape, bool), tol=1e-2)
    out, rep = admm_complete(y, np.ones(16, bool), lift, init)
    assert np.array_equal(out, y)
    assert rep.iterations == 1 and rep.converged


def test_single_dirac_recovery(backend):
    rng = np.random.default_rng(7)
    s = DiracStream.random(rng, 1, 32)
    y = dirac_spectrum(s)
    mask = np.zeros(32, bool)
    mask[rng.choice(np.arange(1, 32), 8, replace=False)] = True
    mask[0] = True
    out, rep = complete(y * mask, mask, HankelLift((32,), (16,)), tol_lmafit=1e-3, rank0=1,
                        max_iters=500, tol=1e-10)
    assert rep.rank == 1
    assert nmse(out, y) <= 1e-8


def test_three_dirac_recovery_rate(backend):
    ok = 0
    for seed in range(20):
        y, mask = dirac_problem(seed)
        out, _ = complete(y * mask, mask, HankelLift((64,), (32,)), tol_lmafit=1e-2, tol=1e-8)
        ok += nmse(out, y) <= 1e-6
    assert ok >= 18


def test_iterate_invariants():
    y, mask = dirac_problem(3)
    lift = HankelLift((64,), (32,))
    seen = []

    def check(it, m, U, V, lam):
        assert np.array_equal(m[mask], y[mask])
        X = U @ V.conj().T
        assert nuclear_norm_oracle(X) <= 0.5 * (np.vdot(U, U).real + np.vdot(V, V).real) * (1 + 1e-12)
        seen.append(it)

    out, rep = complete(y * mask, mask, lift, tol_lmafit=1e-2, tol=1e-8, callback=check)
    assert seen == list(range(1, rep.iterations + 1))
    assert all(np.isfinite(rep.residual_trace))


def test_residual_trend_after_burn_in():
    for seed in range(5):
        y, mask = dirac_problem(seed)
        _, rep = complete(y * mask, mask, HankelLift((64,), (32,)), tol_lmafit=1e-2, tol=1e-8)
        tail = np.asarray(rep.residual_trace[10:])
        assert np.all(np.isfinite(tail))
        assert tail[-1] <= 1e-2 * tail[0]


@pytest.mark.xfail(strict=True, reason="the factored ADMM is nonconvex; its primal residual falls by "
                   "orders of magnitude but oscillates (up to ~3x) on the way down")
def test_residual_monotone_within_band():
    for seed in range(5):
        y, mask = dirac_problem(seed)
        _, rep = complete(y * mask, mask, HankelLift((64,), (32,)), tol_lmafit=1e-2, tol=1e-8)
        tail = np.asarray(rep.residual_trace[10:])
        assert np.all(tail <= 1.05 * np.minimum.accumulate(tail))


def test_relaxed_zero_delta_matches_equality():
    y, mask = dirac_problem(1)
    lift = HankelLift((64,), (32,))
    init = lmafit_init(lift.lift(y * mask), lift.lift(mask.astype(complex)).real > 0.5, tol=1e-2)
    a, _ = admm_complete(y * mask, mask, lift, init, tol=1e-8)
    b, _ = admm_complete_relaxed(y * mask, mask, lift, init, delta=0.0, tol=1e-8)
    assert np.max(np.abs(a - b)) <= 1e-10


def test_relaxed_noiseless_stays_at_delta_level():
    y, mask = dirac_problem(0)
    lift = HankelLift((64,), (32,))
    delta = 0.01 * np.linalg.norm(y[mask])
    out, _ = complete(y * mask, mask, lift, tol_lmafit=1e-2, tol=1e-8, delta=delta)
    assert np.linalg.norm(out[mask] - y[mask]) <= delta * (1 + 1e-9)
    assert nmse(out, y) <= 2 * (delta / np.linalg.norm(y[mask])) ** 2


@pytest.mark.xfail(strict=True, reason="with delta > 0 the estimate may leave the data by delta, so "
                   "its NMSE sits near (delta/|y|)^2 ~ 1e-4 while the exact run reaches ~1e-14")
def test_relaxed_noiseless_within_twice_exact():
    y, mask = dirac_problem(0)
    lift = HankelLift((64,), (32,))
    exact, _ = complete(y * mask, mask, lift, tol_lmafit=1e-2, tol=1e-8)
    relaxed, _ = complete(y * mask, mask, lift, tol_lmafit=1e-2, tol=1e-8,
                          delta=0.01 * np.linalg.norm(y[mask]))
    assert nmse(relaxed, y) <= 2 * nmse(exact, y)


def test_relaxed_noisy_beats_input_noise():
    for seed in range(3):
        y, mask = dirac_problem(seed)
        rng = np.random.default_rng(100 + seed)
        noise = crandn(rng, 64)
        noise *= 0.01 * np.linalg.norm(y[mask]) / np.linalg.norm(noise[mask])
        yn = y + noise
        out, _ = complete(yn * mask, mask, HankelLift((64,), (32,)), tol_lmafit=1e-2, tol=1e-8,
                          delta=np.linalg.norm(noise[mask]))
        assert nmse(out, y) <= nmse(yn[mask], y[mask])


def test_divergence_detected():
    y, mask = dirac_problem(0)
    lift = HankelLift((64,), (32,))
    bad = FactorPair(np.full((lift.shape[0], 1), np.nan + 0j), np.ones((lift.shape[1], 1), complex))
    with pytest.raises(SolverDivergence):
        admm_complete(y * mask, mask, lift, bad)


def test_admm_input_validation(rng):
    lift = HankelLift((8,), (4,))
    fp = FactorPair(crandn(rng, 5, 1), crandn(rng, 4, 1))
    with pytest.raises(ValueError):
        admm_complete(np.zeros(8), np.zeros(8, bool), lift, fp)
    with pytest.raises(ValueError):
        admm_complete(np.zeros(8), np.ones(7, bool), lift, fp)
    with pytest.raises(ValueError):
        admm_complete(np.zeros(8), np.ones(8, bool), lift, fp, delta=-1)
