"""Seeded random subspaces and the coherence Monte Carlo experiment.

Every trial owns its own Philox stream spawned from one ``SeedSequence``, so
results do not depend on execution order. A trial draws an ``r x n`` block
of standard normals and uses its rows as basis vectors; because the first
``r'`` rows of a larger draw equal a smaller draw, subspaces of increasing
dimension built from the same trial stream are nested.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import elliptope
from .numerics import Subspace, orthonormalize

log = logging.getLogger(__name__)


def trial_rngs(seed: int, trials: int) -> list:
    """Independent counter-based generators, one per trial."""
    children = np.random.SeedSequence(seed).spawn(trials)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def make_rng(seed: Optional[int]) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def sample_subspace(n: int, r: int, rng: np.random.Generator) -> Subspace:
    """Column space of an ``n x r`` matrix of i.i.d. standard normals.

    The draw is taken as ``r`` rows of length ``n`` so that nested dimensions
    share their leading basis vectors. A rank-deficient draw (a probability
    zero event) is redrawn once.
    """
    if not 0 <= r <= n or n < 1:
        raise ValueError("need 0 <= r <= n and n >= 1")
    if r == 0:
        return Subspace.zero(n)
    for _ in range(2):
        G = rng.standard_normal((r, n)).T
        Q = orthonormalize(G)
        if Q.shape[1] == r:
            return Subspace(Q)
    raise ValueError("Gaussian draw was numerically rank deficient twice")


def random_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def planted_instance(U: Subspace, rng: np.random.Generator):
    """Random ``D > 0`` (diagonal entries in [0.5, 2]) and ``L`` PSD with range ``U``."""
    r = U.dim
    A = U.basis @ rng.standard_normal((r, r))
    L = A @ A.T
    d = rng.uniform(0.5, 2.0, U.n)
    return d, 0.5 * (L + L.T)


# --------------------------------------------------------------------------


def a_eps(eps: float) -> float:
    return eps - 4 * eps ** 2 / 3


def bound_constants(eps: float) -> tuple:
    """``(cbar, ctilde)`` in ``1 - cbar sqrt(n) exp(-ctilde n)`` for subspace dimension ``(1/2 - eps) n``."""
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    a = a_eps(eps)
    cbar = 1.0 / (a * math.sqrt(math.pi * (0.25 - eps ** 2)))
    ctilde = a * (0.5 - eps)
    return cbar, ctilde


def validity_threshold(eps: float) -> float:
    return 6.0 / (eps ** 2 - 2 * eps ** 3)


def analytic_bound(n: int, eps: float) -> Optional[float]:
    """Lower bound on Pr[coherence < 1/2], or None below the validity threshold."""
    if n <= validity_threshold(eps):
        return None
    cbar, ctilde = bound_constants(eps)
    return 1.0 - cbar * math.sqrt(n) * math.exp(-ctilde * n)


@dataclass
class ExperimentConfig:
    n: int
    r: int
    trials: int = 500
    seed: int = 0
    epsilon: float = 0.25
    verify_sdp: bool = False
    sdp_cap: int = 20
    progress_every: int = 100

    def __post_init__(self):
        if self.n < 1 or not 0 <= self.r <= self.n:
            raise ValueError("need n >= 1 and 0 <= r <= n")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if not 0 < self.epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 1/2)")

    @classmethod
    def from_epsilon(cls, n: int, epsilon: float, **kw) -> "ExperimentConfig":
        return cls(n=n, r=int(round((0.5 - epsilon) * n)), epsilon=epsilon, **kw)


@dataclass
class MonteCarloReport:
    trials: int
    count_mu_below_half: int
    observed_fraction: float
    analytic_lower_bound: Optional[float]
    constants: dict
    wall_time: float
    coherences: np.ndarray = field(repr=False, default=None)
    sdp_checked: int = 0
    sdp_agree: int = 0

    def as_dict(self) -> dict:
        out = {
            "trials": self.trials,
            "count_mu_below_half": self.count_mu_below_half,
            "observed_fraction": self.observed_fraction,
            "analytic_lower_bound": self.analytic_lower_bound,
            "constants": self.constants,
            "wall_time": self.wall_time,
        }
        if self.sdp_checked:
            out["sdp_checked"] = self.sdp_checked
            out["sdp_agree"] = self.sdp_agree
        return out


def montecarlo_coherence(cfg: ExperimentConfig) -> MonteCarloReport:
    """Fraction of random ``r``-dimensional subspaces of R^n with coherence below 1/2.

    With ``verify_sdp`` the first ``sdp_cap`` subspaces whose coherence is
    below 1/2 are also decided by the semidefinite route, which must agree.
    """
    t0 = time.perf_counter()
    mus = np.empty(cfg.trials)
    checked = agree = 0
    for t, rng in enumerate(trial_rngs(cfg.seed, cfg.trials)):
        U = sample_subspace(cfg.n, cfg.r, rng)
        mus[t] = elliptope.coherence(U)
        if cfg.verify_sdp and checked < cfg.sdp_cap and mus[t] < 0.5 and 0 < U.dim < U.n:
            rep = elliptope.realizability_certificate(U, method=elliptope.SDP)
            checked += 1
            agree += rep.verdict == elliptope.REALIZABLE
        if cfg.progress_every and (t + 1) % cfg.progress_every == 0:
            log.info("montecarlo: %d/%d trials", t + 1, cfg.trials)
    count = int(np.sum(mus < 0.5))
    cbar, ctilde = bound_constants(cfg.epsilon)
    return MonteCarloReport(
        trials=cfg.trials,
        count_mu_below_half=count,
        observed_fraction=count / cfg.trials,
        analytic_lower_bound=analytic_bound(cfg.n, cfg.epsilon),
        constants={"cbar": cbar, "ctilde": ctilde, "a_eps": a_eps(cfg.epsilon),
                   "n_threshold": validity_threshold(cfg.epsilon)},
        wall_time=time.perf_counter() - t0,
        coherences=mus,
        sdp_checked=checked,
        sdp_agree=agree,
    )
