import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mtfa import elliptope as el
from mtfa.experiments import sample_subspace
from mtfa.numerics import Partition, Subspace

from _checks import correlation_ok, failure_ok

ONES3 = Subspace.span(np.ones(3))


def alpha_subspace(alpha):
    return Subspace.span(np.array([np.sqrt(alpha), np.sqrt(1 - alpha)]))


def rand_partition(n, rng, max_block=3):
    perm = rng.permutation(n)
    blocks, i = [], 0
    while i < n:
        k = int(rng.integers(1, max_block + 1))
        blocks.append(sorted(int(j) for j in perm[i:i + k]))
        i += k
    return Partition.from_blocks(blocks)


# coherence


def test_coherence_examples():
    e1 = np.zeros(4)
    e1[0] = 1
    assert el.coherence(Subspace.span(e1)) == pytest.approx(1.0)
    assert el.coherence(ONES3) == pytest.approx(1 / 3)
    U = Subspace.span(np.random.default_rng(0).standard_normal((10, 3)))
    assert 0.3 - 1e-12 <= el.coherence(U) <= 1 + 1e-12


def test_p_coherence_examples():
    U = Subspace.span(np.random.default_rng(1).standard_normal((5, 2)))
    assert el.p_coherence(U, Partition.singletons(5)) == pytest.approx(el.coherence(U), abs=1e-12)
    assert el.p_coherence(U, Partition.whole(5)) == pytest.approx(1.0, abs=1e-12)
    P = Partition.from_blocks([[0, 1], [2]])
    assert el.p_coherence(ONES3, P) == pytest.approx(2 / 3, abs=1e-12)


@given(st.integers(1, 9).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n))),
       st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_coherence_bounds_and_block_monotonicity(nr, seed):
    n, r = nr
    rng = np.random.default_rng(seed)
    U = sample_subspace(n, r, rng)
    mu = el.coherence(U)
    assert r / n - 1e-12 <= mu <= 1 + 1e-12
    P = rand_partition(n, rng)
    assert mu <= el.p_coherence(U, P) + 1e-12


def test_squared_balance_check():
    assert el.squared_balance_check(ONES3)
    assert not el.squared_balance_check(Subspace.span(np.array([1.0, 0, 0])))
    assert not el.squared_balance_check(alpha_subspace(0.6))


# balance


def test_is_balanced_examples():
    assert el.is_balanced([1, 1]) and not el.is_balanced([1, 1], strict=True)
    assert not el.is_balanced([np.sqrt(0.75), np.sqrt(0.25)])
    assert el.is_balanced([1, 1, 1], strict=True)
    with pytest.raises(ValueError):
        el.is_balanced([0, 0])


def test_is_p_balanced_examples():
    u = np.array([3.0, 4.0, 5.0])
    P = Partition.from_blocks([[0, 1], [2]])
    assert el.is_p_balanced(u, P) and not el.is_p_balanced(u, P, strict=True)
    for v in ([1.0, 2.0, 0.5], [3.0, -1.0, 1.0]):
        assert el.is_p_balanced(v, Partition.singletons(3)) == el.is_balanced(v)
    with pytest.raises(ValueError):
        el.is_p_balanced(np.zeros(3), P)


@given(st.integers(2, 7), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_p_balanced_implies_balanced(n, seed):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(n) * rng.uniform(0.05, 3, n)
    P = rand_partition(n, rng)
    if el.is_p_balanced(u, P):
        assert el.is_balanced(u)


def test_all_balanced_examples():
    res = el.all_balanced(alpha_subspace(0.75))
    assert not res.holds and res.index == 0
    a = np.abs(res.witness)
    assert a[0] > a.sum() - a[0]
    assert el.all_balanced(ONES3).holds
    assert el.all_balanced(Subspace.span(np.array([2.0, 1.0, 1.0]))).holds
    with pytest.raises(ValueError):
        el.all_balanced(Subspace.full(3))


@given(st.integers(3, 6), st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_all_balanced_one_dimensional_matches_definition(n, seed):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(n) * rng.uniform(0.05, 3, n)
    if abs(el.balance_margin(np.abs(u))) < 1e-6:
        return
    res = el.all_balanced(Subspace.span(u))
    assert res.holds == el.is_balanced(u)
    if not res.holds:
        a = np.abs(res.witness)
        assert a[res.index] > a.sum() - a[res.index]


# constructive certificate


def test_walters_examples():
    np.testing.assert_allclose(el.walters_solve(np.eye(3), np.ones(3)), np.ones(3))
    Pc = np.eye(3) - np.ones((3, 3)) / 3
    np.testing.assert_allclose(el.walters_solve(Pc * Pc, np.ones(3)), [1.5, 1.5, 1.5], atol=1e-12)
    with pytest.raises(el.PreconditionError, match="2y - A D\\^-1 y"):
        el.walters_solve(np.array([[1.0, 3], [3, 1]]), np.ones(2))


def test_hadamard_examples():
    cert = el.hadamard_certificate(ONES3)
    np.testing.assert_allclose(cert.lam, [1.5, 1.5, 1.5], atol=1e-12)
    np.testing.assert_allclose(cert.Y, 1.5 * (np.eye(3) - np.ones((3, 3)) / 3), atol=1e-12)
    np.testing.assert_allclose(np.linalg.eigvalsh(cert.Y), [0, 1.5, 1.5], atol=1e-12)
    with pytest.raises(el.PreconditionError):
        el.hadamard_certificate(Subspace.span(np.array([1.0, 1.0])))


def test_hadamard_random_low_coherence():
    rng = np.random.default_rng(3)
    found = 0
    while found < 5:
        U = sample_subspace(20, 5, rng)
        if el.coherence(U) >= 0.45:
            continue
        found += 1
        Pc = np.eye(20) - U.basis @ U.basis.T
        A = Pc * Pc
        assert np.all(2 - A @ (1 / np.diag(A)) > 0)
        cert = el.hadamard_certificate(U)
        assert np.all(cert.lam > 0)
        assert correlation_ok(cert.Y, U.basis, tol=1e-9)


# decision procedure


def test_realizability_examples():
    rep = el.realizability_certificate(alpha_subspace(0.75))
    assert rep.verdict == el.NOT_REALIZABLE
    assert isinstance(rep.certificate, el.FailureCertificate)
    assert failure_ok(rep.certificate.B, alpha_subspace(0.75).basis)
    assert np.max(np.abs(rep.certificate.d)) == pytest.approx(1.0)

    rep = el.realizability_certificate(ONES3)
    assert rep.verdict == el.REALIZABLE and rep.method == el.CONSTRUCTIVE

    U = Subspace.span(np.array([1.0, 1.0]))
    rep = el.realizability_certificate(U)
    assert rep.verdict == el.REALIZABLE and rep.method == el.SDP
    np.testing.assert_allclose(rep.certificate.Y, [[1, -1], [-1, 1]], atol=1e-6)


def test_realizability_rejects_trivial_dimensions():
    with pytest.raises(ValueError):
        el.realizability_certificate(Subspace.zero(3))
    with pytest.raises(ValueError):
        el.realizability_certificate(Subspace.full(3))


@pytest.mark.parametrize("alpha", [0.55, 0.6, 0.75, 0.9, 0.95])
def test_forced_routes_agree_on_alpha_family(alpha):
    U = alpha_subspace(alpha)
    a = el.realizability_certificate(U, method=el.SDP)
    b = el.realizability_certificate(U, method=el.BALANCE)
    assert a.verdict == b.verdict == el.NOT_REALIZABLE
    with pytest.raises(el.PreconditionError):
        el.realizability_certificate(U, method=el.CONSTRUCTIVE)


@given(st.integers(3, 7).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n - 1))),
       st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_certificates_sound_and_necessity(nr, seed):
    n, r = nr
    rng = np.random.default_rng(seed)
    # skew the draw so both verdicts occur
    U = Subspace.span(np.diag(rng.uniform(0.1, 3, n)) @ rng.standard_normal((n, r)))
    rep = el.realizability_certificate(U)
    if rep.verdict == el.REALIZABLE:
        assert correlation_ok(rep.certificate.Y, U.basis)
        res = el.all_balanced(U)
        assert res.holds or res.uncertain
    elif rep.verdict == el.NOT_REALIZABLE:
        assert failure_ok(rep.certificate.B, U.basis)


@given(st.integers(4, 8), st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_mutual_exclusion(n, seed):
    # both routes forced on the same input never produce opposite certificates
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(n) * rng.uniform(0.1, 3, n)
    U = Subspace.span(u)
    m = el.balance_margin(np.abs(U.basis[:, 0]))
    sdp = el.realizability_certificate(U, method=el.SDP)
    if m < -1e-6:
        bal = el.realizability_certificate(U, method=el.BALANCE)
        assert bal.verdict == el.NOT_REALIZABLE
        assert sdp.verdict != el.REALIZABLE or sdp.margin <= 1e-6
    if sdp.verdict == el.REALIZABLE and sdp.margin > 1e-6:
        assert m >= -1e-6


@given(st.integers(2, 7), st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_one_dimensional_characterization(n, seed):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(n) * rng.uniform(0.1, 3, n)
    if abs(el.balance_margin(np.abs(u / np.linalg.norm(u)))) <= 1e-6:
        return
    rep = el.realizability_certificate(Subspace.span(u), method=el.SDP)
    assert rep.verdict != el.UNCERTAIN
    assert rep.realizable == el.is_balanced(u)


def test_constructive_and_sdp_agree_below_threshold():
    rng = np.random.default_rng(9)
    done = 0
    while done < 8:
        n = int(rng.integers(6, 12))
        U = sample_subspace(n, int(rng.integers(1, n // 3 + 1)), rng)
        if el.coherence(U) >= 0.5 - 1e-3:
            continue
        done += 1
        a = el.realizability_certificate(U, method=el.CONSTRUCTIVE)
        b = el.realizability_certificate(U, method=el.SDP)
        assert a.verdict == b.verdict == el.REALIZABLE


# block case


def test_block_failure_certificate_for_unbalanced_vector():
    P = Partition.from_blocks([[0, 1], [2]])
    u = np.array([3.0, 4.0, 1.0])
    assert not el.is_p_balanced(u, P)
    cert = el.p_unbalanced_certificate(u, P)
    assert failure_ok(cert.B, Subspace.span(u).basis, P.blocks)
    rep = el.realizability_certificate(Subspace.span(u), P)
    assert rep.verdict == el.NOT_REALIZABLE
    assert failure_ok(rep.certificate.B, Subspace.span(u).basis, P.blocks)


def test_block_realizable_via_sdp():
    P = Partition.from_blocks([[0, 1], [2, 3], [4, 5]])
    U = Subspace.span(np.ones(6))
    assert el.p_coherence(U, P) == pytest.approx(1 / 3)
    rep = el.realizability_certificate(U, P)
    assert rep.verdict == el.REALIZABLE
    assert correlation_ok(rep.certificate.Y, U.basis, P.blocks)


def test_orbit_transform_examples():
    rng = np.random.default_rng(5)
    U = sample_subspace(4, 2, rng)
    P = Partition.from_blocks([[0, 1], [2, 3]])
    same = el.orbit_transform(U, np.eye(4), P)
    np.testing.assert_allclose(same.basis @ same.basis.T, U.basis @ U.basis.T, atol=1e-12)
    S = np.diag([1.0, -1, -1, 1])
    flipped = el.orbit_transform(U, S, Partition.singletons(4))
    assert el.coherence(flipped) == pytest.approx(el.coherence(U), abs=1e-12)
    Q = el.random_block_orthogonal(P, rng)
    QU = el.orbit_transform(U, Q, P)
    assert el.p_coherence(QU, P) == pytest.approx(el.p_coherence(U, P), abs=1e-9)
    assert (el.realizability_certificate(U, P).verdict
            == el.realizability_certificate(QU, P).verdict)
    with pytest.raises(ValueError):
        el.orbit_transform(U, np.ones((4, 4)) / 2, P)
    R = np.eye(4)
    R[[1, 2]] = R[[2, 1]]
    with pytest.raises(ValueError):
        el.orbit_transform(U, R, P)


def test_failure_certificate_normalized():
    rep = el.realizability_certificate(alpha_subspace(0.9))
    assert np.max(np.abs(rep.certificate.d)) == pytest.approx(1.0)
