import math

import numpy as np
import pytest

from mtfa import elliptope as el
from mtfa import experiments as ex


def test_full_space_has_coherence_one():
    U = ex.sample_subspace(5, 5, ex.make_rng(0))
    assert U.dim == 5
    assert el.coherence(U) == pytest.approx(1.0)


def test_zero_dimension():
    assert ex.sample_subspace(4, 0, ex.make_rng(0)).dim == 0
    rep = ex.montecarlo_coherence(ex.ExperimentConfig(n=6, r=0, trials=10))
    assert rep.observed_fraction == 1.0


def test_same_seed_same_basis():
    a = ex.sample_subspace(7, 3, ex.make_rng(42)).basis
    b = ex.sample_subspace(7, 3, ex.make_rng(42)).basis
    assert np.array_equal(a, b)


def test_mean_coherence_is_r_over_n():
    rng = ex.make_rng(1)
    vals = [ex.sample_subspace(2, 1, rng).basis[0, 0] ** 2 for _ in range(10000)]
    assert abs(np.mean(vals) - 0.5) <= 0.02


def test_distribution_invariant_under_rotation():
    # the squared norm of the first coordinate has the same law after a fixed rotation
    rng = ex.make_rng(2)
    Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((5, 5)))
    a, b = [], []
    for _ in range(4000):
        B = ex.sample_subspace(5, 2, rng).basis
        a.append(np.sum(B[0] ** 2))
        b.append(np.sum((Q @ B)[0] ** 2))
    assert abs(np.mean(a) - 0.4) <= 0.02 and abs(np.mean(b) - 0.4) <= 0.02
    assert abs(np.var(a) - np.var(b)) <= 0.01


def test_argument_checks():
    with pytest.raises(ValueError):
        ex.sample_subspace(3, 4, ex.make_rng(0))
    with pytest.raises(ValueError):
        ex.ExperimentConfig(n=4, r=5)
    with pytest.raises(ValueError):
        ex.ExperimentConfig(n=4, r=2, trials=0)
    with pytest.raises(ValueError):
        ex.ExperimentConfig(n=4, r=2, epsilon=0.5)


def test_constants_for_quarter():
    cbar, ctilde = ex.bound_constants(0.25)
    assert ctilde == pytest.approx(1 / 24)
    assert cbar == pytest.approx(24 / math.sqrt(3 * math.pi))
    assert f"{cbar:.3g}" == "7.82"
    assert ex.validity_threshold(0.25) == pytest.approx(192)
    assert ex.analytic_bound(200, 0.25) == pytest.approx(0.9734, abs=5e-4)
    assert ex.analytic_bound(100, 0.25) is None


def test_half_dimension_never_below_half():
    # diag(P) sums to r = n/2 over n entries, so the largest entry is at least 1/2
    rep = ex.montecarlo_coherence(ex.ExperimentConfig(n=4, r=2, trials=100))
    assert rep.observed_fraction == 0.0
    assert rep.analytic_lower_bound is None


def test_small_regime_strictly_between():
    rep = ex.montecarlo_coherence(ex.ExperimentConfig(n=4, r=1, trials=100))
    assert 0 < rep.observed_fraction < 1
    assert rep.analytic_lower_bound is None


def test_monotone_in_r_with_shared_seeds():
    n = 40
    fracs = []
    for r in range(n // 10, n // 2 + 1):
        rep = ex.montecarlo_coherence(ex.ExperimentConfig(n=n, r=r, trials=60, seed=3))
        fracs.append(rep.observed_fraction)
    assert all(b <= a for a, b in zip(fracs, fracs[1:]))


def test_nested_coupling():
    rngs1 = ex.trial_rngs(5, 3)
    rngs2 = ex.trial_rngs(5, 3)
    for g1, g2 in zip(rngs1, rngs2):
        small = ex.sample_subspace(9, 2, g1)
        big = ex.sample_subspace(9, 4, g2)
        # the smaller subspace is contained in the larger one
        assert np.linalg.norm(small.basis - big.basis @ (big.basis.T @ small.basis)) <= 1e-12


def test_report_deterministic_and_sdp_agreement():
    cfg = ex.ExperimentConfig(n=30, r=6, trials=20, seed=11, verify_sdp=True, sdp_cap=5)
    a, b = ex.montecarlo_coherence(cfg), ex.montecarlo_coherence(cfg)
    assert np.array_equal(a.coherences, b.coherences)
    assert a.sdp_checked == 5 and a.sdp_agree == 5
    d = a.as_dict()
    assert 0 <= d["observed_fraction"] <= 1


def test_planted_instance():
    rng = ex.make_rng(4)
    U = ex.sample_subspace(6, 2, rng)
    d, L = ex.planted_instance(U, rng)
    assert np.all((d >= 0.5) & (d <= 2))
    assert np.linalg.matrix_rank(L) == 2
    assert np.linalg.norm(L - U.basis @ (U.basis.T @ L)) <= 1e-10
