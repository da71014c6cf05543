"""Candidate neighborhood construction.

The sorter only ever regresses a node on members of its neighborhood that
are already ordered, so neighborhoods bound both the statistical and the
computational work.  Three constructions are provided: oracle Markov
blankets from a known DAG, the top-m most correlated columns from held-out
data, and the trivial everything-but-self sets.
"""
from __future__ import annotations

import numpy as np

from .model import Dag, DataMatrix, NeighborhoodSets

_CHUNK = 512  # columns per block when correlating wide matrices


def markov_blankets(dag: Dag) -> NeighborhoodSets:
    """Parents, children, and co-parents of every node, excluding itself."""
    sets: list[set[int]] = [set(dag.parents[k]) | set(dag.children[k]) for k in range(dag.p)]
    for k in range(dag.p):
        for child in dag.children[k]:
            sets[k].update(dag.parents[child])
        sets[k].discard(k)
    return NeighborhoodSets([sorted(s) for s in sets])


def top_correlated(x_holdout: DataMatrix, m: int) -> NeighborhoodSets:
    """For each column, the m most |Pearson|-correlated other columns.

    Ties break toward the lower index; zero-variance columns correlate as 0
    with everything.  Works blockwise so the full p x p correlation matrix
    is never materialized.
    """
    n, p = x_holdout.n, x_holdout.p
    if not 0 < m < p:
        raise ValueError("need 0 < m < p")
    if n < 3:
        raise ValueError("holdout needs at least 3 rows")
    values = x_holdout.values
    mean = values.mean(axis=0)
    sd = values.std(axis=0)
    safe = np.where(sd > 0, sd, 1.0)
    z = (values - mean) / safe
    z[:, sd == 0] = 0.0
    sets: list[np.ndarray] = []
    for start in range(0, p, _CHUNK):
        stop = min(start + _CHUNK, p)
        corr = np.clip(z.T @ z[:, start:stop] / n, -1.0, 1.0)
        for k in range(start, stop):
            strength = np.abs(corr[:, k - start])
            strength[k] = -np.inf
            # stable sort on descending strength keeps lower indices first on ties
            order = np.argsort(-strength, kind="stable")
            sets.append(np.sort(order[:m]))
    return NeighborhoodSets(sets)


def full_neighborhoods(p: int) -> NeighborhoodSets:
    """Every node neighbors every other node."""
    if p < 1:
        raise ValueError("p must be positive")
    idx = np.arange(p)
    return NeighborhoodSets([np.delete(idx, k) for k in range(p)])
