"""Diagonal plus low-rank decomposition, faces of the elliptope and ellipsoid fitting.

Modules
-------
numerics     symmetric eigen-solves, subspaces, partitions
conic        primal-dual interior point method for semidefinite programs
decompose    minimum trace factor analysis and its block version
elliptope    coherence, balance and realizability certificates
ellipsoid    centered ellipsoids through prescribed points
experiments  seeded random subspaces and the coherence Monte Carlo
"""
from .numerics import Partition, Subspace
from .decompose import bmtfa, is_recovered, mtfa
from .elliptope import coherence, p_coherence, realizability_certificate
from .ellipsoid import fit, fit_blocks

__version__ = "0.1.0"

__all__ = ["Partition", "Subspace", "mtfa", "bmtfa", "is_recovered", "coherence",
           "p_coherence", "realizability_certificate", "fit", "fit_blocks"]
