"""
Which subspaces lie in the null space of a correlation matrix
=============================================================

Coherence below one half is enough, and the certificate can be written
down explicitly. Above one half some subspaces fail; one-dimensional
subspaces fail exactly when the spanning vector is unbalanced.
"""

import numpy as np

from mtfa import elliptope as el
from mtfa.experiments import make_rng, sample_subspace
from mtfa.numerics import Partition, Subspace

# %%
# The explicit construction on span{1}: Y = 1.5 (I - J/3).
cert = el.hadamard_certificate(Subspace.span(np.ones(3)))
print(np.round(cert.Y, 6))
print("weights", cert.lam)

# %%
# A random 3-dimensional subspace of R^40 has low coherence and gets the
# explicit certificate.
U = sample_subspace(40, 3, make_rng(1))
rep = el.realizability_certificate(U)
print(f"coherence {el.coherence(U):.3f} -> {rep.verdict} via {rep.method}")

# %%
# The threshold is sharp: span{(sqrt(a), sqrt(1 - a))} for a > 1/2.
for a in (0.55, 0.75, 0.95):
    U = Subspace.span(np.array([np.sqrt(a), np.sqrt(1 - a)]))
    rep = el.realizability_certificate(U)
    print(f"a = {a}: {rep.verdict}, d = {np.round(rep.certificate.d, 4)}")

# %%
# Exactly at coherence 1/2 the semidefinite route decides.
rep = el.realizability_certificate(Subspace.span(np.array([1.0, 1.0])))
print(rep.verdict, rep.method)
print(np.round(rep.certificate.Y, 6))

# %%
# Block version: span{1_3} with blocks {1,2},{3} has block coherence 2/3 and
# fails, while span{1_6} with three pairs has block coherence 1/3.
print(el.realizability_certificate(Subspace.span(np.ones(3)),
                                   Partition.from_blocks([[0, 1], [2]])).verdict)
print(el.realizability_certificate(Subspace.span(np.ones(6)),
                                   Partition.from_blocks([[0, 1], [2, 3], [4, 5]])).verdict)
