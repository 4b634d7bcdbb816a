"""
Recovering a low-rank matrix from diagonal noise
================================================

A covariance of the form ``D + L`` with ``D`` diagonal and ``L`` low rank is
split by minimizing the trace of the low-rank part. Whether the split is
exact depends only on the column space of ``L``.
"""

import numpy as np

from mtfa import decompose, elliptope
from mtfa.experiments import make_rng, planted_instance, sample_subspace
from mtfa.numerics import Subspace

rng = make_rng(0)

# %%
# An incoherent column space: a random 4-dimensional subspace of R^20.
U = sample_subspace(20, 4, rng)
d, L = planted_instance(U, rng)
res = decompose.mtfa(np.diag(d) + L)
print("coherence", round(elliptope.coherence(U), 3))
print("status", res.status, "certified", res.certified)
print("relative error in L", decompose.relative_error(L, res.L))
print("recovered", decompose.is_recovered(d, L, res))

# %%
# The dual matrix Y is a correlation matrix that annihilates L.
print("||Y L||", np.linalg.norm(res.Y @ res.L))
print("diag(Y)", np.round(np.diag(res.Y), 8)[:5], "...")

# %%
# A coherent column space: one dominant coordinate makes the spanning vector
# unbalanced, and part of L is absorbed into the diagonal.
u = np.array([3.0, 1.0, 0.5, 0.5])
U = Subspace.span(u)
L = np.outer(u, u)
d = np.ones(4)
res = decompose.mtfa(np.diag(d) + L)
print("balanced", elliptope.is_balanced(u))
print("recovered", decompose.is_recovered(d, L, res))
print("trace of true L", np.trace(L), "trace of estimate", round(res.trace_L, 6))
