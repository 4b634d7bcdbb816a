"""Plain-text matrix files and partition JSON.

Matrices are comma separated, one row per line, no header. Partitions are
``{"n": int, "blocks": [[int, ...], ...]}`` with 1-based indices on disk and
0-based in memory.
"""
from __future__ import annotations

import json

import numpy as np

from .numerics import Partition, as_symmetric


def read_matrix(path, symmetric: bool = False) -> np.ndarray:
    A = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    if symmetric:
        A = as_symmetric(A, tol=1e-9)
    return A


def write_matrix(path, A) -> None:
    np.savetxt(path, np.atleast_2d(A), delimiter=",", fmt="%.17g")


def read_partition(path) -> Partition:
    with open(path) as fh:
        data = json.load(fh)
    return partition_from_json(data)


def partition_from_json(data: dict) -> Partition:
    try:
        n = int(data["n"])
        blocks = [[int(i) - 1 for i in b] for b in data["blocks"]]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed partition: {exc}") from exc
    return Partition(n, tuple(tuple(b) for b in blocks))


def partition_to_json(P: Partition) -> dict:
    return {"n": P.n, "blocks": [[i + 1 for i in b] for b in P.blocks]}


def write_partition(path, P: Partition) -> None:
    with open(path, "w") as fh:
        json.dump(partition_to_json(P), fh)


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, fixed separators, so re-serializing is byte-identical."""
    return json.dumps(obj, sort_keys=True, separators=(",", ": "), indent=1)
