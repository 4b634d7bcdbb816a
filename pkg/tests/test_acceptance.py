"""Acceptance criteria 1-9.

Run under pytest (one test per criterion, lines repeated in the terminal
summary) or directly with ``python3 tests/test_acceptance.py``. Every
certificate produced by criteria 1-8 is stored and re-validated by criterion 9
with the plain numpy checks in ``_checks``.
"""
from __future__ import annotations

import functools
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

import _checks  # noqa: E402
from mtfa import decompose as dc  # noqa: E402
from mtfa import ellipsoid as ep  # noqa: E402
from mtfa import elliptope as el  # noqa: E402
from mtfa import experiments as ex  # noqa: E402
from mtfa.numerics import Partition, Subspace  # noqa: E402

MARGIN = 1e-6
CERTS: list = []  # (criterion, kind, payload)


@dataclass
class Outcome:
    ok: bool
    detail: str


def _register_report(k, rep, U, P=None):
    blocks = None if P is None else P.blocks
    if isinstance(rep.certificate, el.CorrelationCertificate):
        CERTS.append((k, "correlation", (rep.certificate.Y, U.basis, blocks)))
    elif isinstance(rep.certificate, el.FailureCertificate):
        CERTS.append((k, "failure", (rep.certificate.B, U.basis, blocks)))


def _register_fit(k, V, res, P=None):
    blocks = None if P is None else P.blocks
    if res.status == ep.FITTED:
        CERTS.append((k, "fit", (V, res.M, blocks)))
    elif res.status == ep.INFEASIBLE:
        CERTS.append((k, "separation", (V, res.B if res.B is not None else res.d)))


def _skewed_subspace(n, r, rng):
    # a random diagonal scaling spreads coherence so both verdicts occur
    return Subspace.span(np.diag(rng.uniform(0.1, 3, n)) @ rng.standard_normal((n, r)))


def _rand_partition(n, rng, max_block=3):
    perm = rng.permutation(n)
    blocks, i = [], 0
    while i < n:
        k = int(rng.integers(1, max_block + 1))
        blocks.append(sorted(int(j) for j in perm[i:i + k]))
        i += k
    return Partition.from_blocks(blocks)


def criterion_1() -> Outcome:
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    compared = mismatches = 0
    counts = {True: 0, False: 0}
    for t in range(200):
        r = 1 + t % 4
        U = _skewed_subspace(8, r, rng)
        d, L = ex.planted_instance(U, rng)
        res = dc.mtfa(np.diag(d) + L)
        CERTS.append((1, "mtfa", (np.diag(d) + L, res)))
        recovered = dc.is_recovered(d, L, res)
        rep = el.realizability_certificate(U, method=el.SDP)
        _register_report(1, rep, U)
        # fit through a different basis of the complement
        T = rng.standard_normal((8 - r, 8 - r)) + 3 * np.eye(8 - r)
        V = T @ U.complement().basis.T
        fr = ep.fit(V)
        _register_fit(1, V, fr)
        if (min(rep.margin, fr.margin) <= MARGIN or not res.certified
                or el.UNCERTAIN in (rep.verdict, fr.status)):
            continue
        compared += 1
        counts[rep.realizable] += 1
        if not (recovered == rep.realizable == (fr.status == ep.FITTED)):
            mismatches += 1
    dt = time.perf_counter() - t0
    ok = mismatches == 0 and compared > 0 and dt < 120
    return Outcome(ok, f"{compared}/200 above margin, {mismatches} disagreements "
                       f"({counts[True]} realizable, {counts[False]} not), {dt:.1f}s")


def criterion_2() -> Outcome:
    rng = np.random.default_rng(4303)
    good = tried = 0
    while tried < 100:
        r = int(rng.integers(2, 9))
        U = ex.sample_subspace(20, r, rng)
        if el.coherence(U) >= 0.5 - 1e-3:
            continue
        tried += 1
        try:
            cert = el.hadamard_certificate(U)
        except ValueError:
            continue
        CERTS.append((2, "correlation", (cert.Y, U.basis, None)))
        if np.all(cert.lam >= 0) and el.check_correlation_certificate(cert.Y, U):
            good += 1
    return Outcome(good == 100, f"{good}/100 explicit certificates valid with lam >= 0")


def criterion_3() -> Outcome:
    good = 0
    alphas = np.round(np.arange(0.55, 0.951, 0.05), 2)
    for a in alphas:
        U = Subspace.span(np.array([np.sqrt(a), np.sqrt(1 - a)]))
        rep = el.realizability_certificate(U)
        _register_report(3, rep, U)
        mu_ok = abs(el.coherence(U) - a) <= 1e-12
        if mu_ok and rep.verdict == el.NOT_REALIZABLE and isinstance(rep.certificate, el.FailureCertificate):
            good += 1
    return Outcome(good == len(alphas) == 9, f"{good}/{len(alphas)} failure certificates")


def criterion_4() -> Outcome:
    rng = np.random.default_rng(3604)
    agree = total = 0
    kinds = {True: 0, False: 0}
    while total < 200:
        u = rng.standard_normal(6) * rng.uniform(0.1, 3, 6)
        u /= np.linalg.norm(u)
        if abs(el.balance_margin(np.abs(u))) <= 1e-4:
            continue
        total += 1
        U = Subspace.span(u)
        rep = el.realizability_certificate(U, method=el.SDP)
        _register_report(4, rep, U)
        b = el.is_balanced(u)
        kinds[b] += 1
        agree += rep.verdict != el.UNCERTAIN and rep.realizable == b
    return Outcome(agree == 200, f"{agree}/200 agree ({kinds[True]} balanced, {kinds[False]} unbalanced)")


def criterion_5() -> Outcome:
    t0 = time.perf_counter()
    rng = np.random.default_rng(530)
    worst_err = worst_comp = 0.0
    done = certified = 0
    while done < 50:
        U = ex.sample_subspace(30, 7, rng)
        if el.coherence(U) >= 0.5:
            continue
        done += 1
        d, L = ex.planted_instance(U, rng)
        X = np.diag(d) + L
        res = dc.mtfa(X)
        CERTS.append((5, "mtfa", (X, res)))
        certified += res.certified
        worst_err = max(worst_err, dc.relative_error(L, res.L))
        worst_comp = max(worst_comp, float(np.linalg.norm(res.Y @ res.L)))
    dt = time.perf_counter() - t0
    ok = worst_err <= 1e-6 and worst_comp <= 1e-6 and dt < 60 and certified == 50
    return Outcome(ok, f"{certified}/50 certified, max rel error {worst_err:.2e}, max ||YL|| {worst_comp:.2e}, {dt:.1f}s")


def criterion_6() -> Outcome:
    cfg = ex.ExperimentConfig(n=200, r=50, trials=500, seed=7, epsilon=0.25)
    rep = ex.montecarlo_coherence(cfg)
    cbar, ctilde = rep.constants["cbar"], rep.constants["ctilde"]
    consts_ok = (f"{ctilde:.3g}" == f"{1 / 24:.3g}"
                 and f"{cbar:.3g}" == f"{24 / np.sqrt(3 * np.pi):.3g}"
                 and rep.analytic_lower_bound is not None
                 and f"{rep.analytic_lower_bound:.3g}" == "0.973")
    ok = rep.observed_fraction >= 0.97 and consts_ok
    return Outcome(ok, f"fraction {rep.observed_fraction:.3f}, bound {rep.analytic_lower_bound:.4f}, "
                       f"cbar {cbar:.4f}, ctilde {ctilde:.5f}")


def criterion_7() -> Outcome:
    t0 = time.perf_counter()
    checked = mismatch = inclusion = uncertain_far = 0
    for x, y, inR, inRp, status in ep.region_grid(-3, 3, -3, 3, 0.1):
        if inRp and not inR:
            inclusion += 1
        if ep.distance_to_region_boundary([x, y]) > 1e-2:
            checked += 1
            if status == ep.UNCERTAIN:
                uncertain_far += 1
            if (status == ep.FITTED) != inR:
                mismatch += 1
    dt = time.perf_counter() - t0
    ok = mismatch == 0 and inclusion == 0
    return Outcome(ok, f"{checked} points away from the boundary, {mismatch} mismatches "
                       f"({uncertain_far} uncertain), {inclusion} R'-not-R points, {dt:.1f}s")


def criterion_8() -> Outcome:
    rng = np.random.default_rng(5607)
    invariant = necessity_checked = necessity_bad = 0
    for _ in range(100):
        n = int(rng.integers(4, 8))
        r = int(rng.integers(1, 3))
        P = _rand_partition(n, rng)
        U = _skewed_subspace(n, r, rng)
        Q = el.random_block_orthogonal(P, rng)
        QU = el.orbit_transform(U, Q, P)
        a = el.realizability_certificate(U, P)
        b = el.realizability_certificate(QU, P)
        _register_report(8, a, U, P)
        _register_report(8, b, QU, P)
        same_mu = abs(el.p_coherence(U, P) - el.p_coherence(QU, P)) <= 1e-9
        if same_mu and a.verdict == b.verdict and a.verdict != el.UNCERTAIN:
            invariant += 1
        if a.realizable:
            necessity_checked += 1
            W = np.column_stack([U.basis, U.basis @ rng.standard_normal((r, 200))])
            if not all(el.is_p_balanced(w, P) for w in W.T):
                necessity_bad += 1
    ok = invariant == 100 and necessity_bad == 0
    return Outcome(ok, f"{invariant}/100 invariant, block balance necessity violated on "
                       f"{necessity_bad}/{necessity_checked} realizable instances")


def criterion_9() -> Outcome:
    for k in range(1, 9):
        outcome(k)
    bad = {}
    for k, kind, payload in CERTS:
        if kind == "correlation":
            ok = _checks.correlation_ok(*payload)
        elif kind == "failure":
            ok = _checks.failure_ok(*payload)
        elif kind == "fit":
            ok = _checks.fit_ok(*payload)
        elif kind == "separation":
            ok = _checks.separation_ok(*payload)
        else:
            X, res = payload
            ok = not res.certified or _checks.mtfa_dual_ok(X, res)
        if not ok:
            bad.setdefault(k, 0)
            bad[k] += 1
    return Outcome(not bad, f"{len(CERTS)} certificates re-checked, invalid per criterion: {bad or 0}")


CRITERIA = {1: ("triad equivalence", criterion_1), 2: ("coherence sufficiency", criterion_2),
            3: ("sharpness", criterion_3), 4: ("one-dimensional characterization", criterion_4),
            5: ("recovery accuracy", criterion_5), 6: ("Monte Carlo", criterion_6),
            7: ("region reproduction", criterion_7), 8: ("block symmetry", criterion_8),
            9: ("certificate soundness", criterion_9)}


@functools.lru_cache(maxsize=None)
def outcome(k: int) -> Outcome:
    name, fn = CRITERIA[k]
    out = fn()
    line = f"criterion {k} ({name}): {'PASS' if out.ok else 'FAIL'} - {out.detail}"
    _checks.ACCEPTANCE_LINES[k] = line
    print(line)
    return out


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k):
    out = outcome(k)
    assert out.ok, out.detail


if __name__ == "__main__":
    results = [outcome(k).ok for k in sorted(CRITERIA)]
    sys.exit(0 if all(results) else 1)
