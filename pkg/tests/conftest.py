"""Shared builders for the test suite."""
from __future__ import annotations

from itertools import permutations

import numpy as np

from lingamsort import Dag, NoiseFamily, Ordering, WeightedDag


def chain_dag(p: int) -> Dag:
    return Dag(p, [[]] + [[k - 1] for k in range(1, p)])


def diamond_dag() -> Dag:
    # 0 -> 1, 0 -> 2, 1 -> 3, 2 -> 3
    return Dag(4, [[], [0], [0], [1, 2]])


def weighted_chain(p: int, b: float, theta: float, family: NoiseFamily) -> WeightedDag:
    dag = chain_dag(p)
    return WeightedDag(dag, [[]] + [[b]] * (p - 1), family, np.full(p, theta))


def all_dags(p: int):
    """Every labeled DAG on p nodes (by filtering all edge subsets)."""
    pairs = [(j, k) for j in range(p) for k in range(p) if j != k]
    for mask in range(2 ** len(pairs)):
        edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        try:
            yield Dag.from_edges(p, edges)
        except ValueError:
            continue


def all_orderings(p: int):
    for perm in permutations(range(p)):
        yield Ordering(perm)
