"""Objective evaluation: dispersion, combined quality + dispersion, gains.

Dispersion is always once-counted: each unordered pair inside a selection
contributes its distance exactly once. The combined objective is
quality(union) + lambda * sum of per-cluster dispersions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import geometry, quality as qual
from .model import Instance, Solution, available_elements, _selected_sets


@dataclass
class ObjectiveValue:
    quality: float
    dispersion: float
    combined: float


def cluster_dispersion(oracle: geometry.DistanceOracle, S: Iterable[int]) -> float:
    """Sum of pairwise distances within one selection, each pair once."""
    ids = np.asarray(sorted(set(int(v) for v in S)), dtype=int)
    if ids.size < 2:
        return 0.0
    D = oracle.pairwise(ids)
    return float(D[np.triu_indices(ids.size, k=1)].sum())


def intra_dispersion(oracle: geometry.DistanceOracle, solution) -> float:
    """Sum of cluster_dispersion over all cluster selections."""
    if isinstance(solution, Solution):
        sets = solution.selected
    else:
        sets = solution
    return float(sum(cluster_dispersion(oracle, S) for S in sets))


def global_dispersion(oracle: geometry.DistanceOracle, selection) -> float:
    """Once-counted pairwise dispersion over the union of a solution.

    Accepts either a Solution (its union is used) or an iterable of ids.
    Cluster structure is ignored; cross-cluster pairs count too.
    """
    if isinstance(selection, Solution):
        ids = selection.union()
    else:
        ids = selection
    return cluster_dispersion(oracle, ids)


def combined_objective(instance: Instance, solution,
                       q: qual.QualityFunction | None = None) -> ObjectiveValue:
    """Evaluate quality(union) + lambda * intra dispersion of a solution.

    Parameters
    ----------
    instance : Instance
    solution : Solution or sequence of per-cluster id collections
    q : QualityFunction, optional
        Defaults to the instance's quality function.

    Returns
    -------
    ObjectiveValue with quality, dispersion and combined fields.
    """
    if not isinstance(solution, Solution):
        solution = Solution.from_sets(solution)
    if q is None:
        q = instance.quality
    oracle = instance.oracle()
    disp = intra_dispersion(oracle, solution)
    quality = qual.value(q, solution.union())
    return ObjectiveValue(
        quality=quality,
        dispersion=disp,
        combined=quality + instance.lam * disp,
    )


def _require_feasible_pair(instance: Instance, partial, cluster_id: int,
                           u: int, v: int) -> None:
    if u == v:
        raise ValueError("a pair needs two distinct elements")
    avail = set(available_elements(instance, partial, cluster_id))
    if u not in avail or v not in avail:
        missing = u if u not in avail else v
        raise ValueError(
            f"element {missing} is not available for cluster {cluster_id}")
    cells = instance.cell_of()
    if int(cells[u]) == int(cells[v]):
        raise ValueError(
            f"elements {u} and {v} share partition cell {int(cells[u])}")


def pair_gain_dispersion(instance: Instance, partial, cluster_id: int,
                         u: int, v: int) -> float:
    """Greedy pair weight (b_j - 1) * d(u, v) for a feasible pair.

    Raises ValueError when {u, v} cannot be added to the cluster under the
    partial solution (unavailable element, shared cell, or u == v).
    """
    _require_feasible_pair(instance, partial, cluster_id, u, v)
    b = instance.clusters[cluster_id].budget
    return (b - 1) * instance.oracle().distance(u, v)


def pair_gain_combined(instance: Instance, partial, cluster_id: int,
                       u: int, v: int,
                       q: qual.QualityFunction | None = None,
                       lam: float | None = None) -> float:
    """Combined greedy pair weight for quality + dispersion instances.

    Equals the joint quality marginal of {u, v} over the current union plus
    lambda * 2 * (b' - 1) * d(u, v) with b' = 2 * ceil(b_j / 2). Validation
    matches pair_gain_dispersion.
    """
    _require_feasible_pair(instance, partial, cluster_id, u, v)
    if q is None:
        q = instance.quality
    if lam is None:
        lam = instance.lam
    sets = _selected_sets(partial, instance.m)
    union = set().union(*sets) if sets else set()
    mp = qual.marginal_pair(q, union, u, v)
    bprime = 2 * math.ceil(instance.clusters[cluster_id].budget / 2)
    return mp + lam * 2.0 * (bprime - 1) * instance.oracle().distance(u, v)


def removal_measure(instance: Instance, ordered_selection: Sequence,
                    element: int,
                    q: qual.QualityFunction | None = None,
                    lam: float | None = None) -> float:
    """Contribution measure of one selected element.

    ordered_selection is the chronological list of (element, cluster_id)
    additions. The measure of element v is its quality marginal over the
    elements selected strictly before it, plus lambda times the sum of
    distances from v to the other elements selected in v's cluster.

    Summed over every selected element this equals quality(union) plus
    2 * lambda * intra dispersion, because each intra-cluster pair is seen
    from both endpoints.
    """
    if q is None:
        q = instance.quality
    if lam is None:
        lam = instance.lam
    idx = None
    for i, (v, _) in enumerate(ordered_selection):
        if v == element:
            idx = i
            break
    if idx is None:
        raise ValueError(f"element {element} is not in the ordered selection")
    cluster_id = ordered_selection[idx][1]
    prefix = [v for v, _ in ordered_selection[:idx]]
    peers = [v for v, c in ordered_selection if c == cluster_id and v != element]
    oracle = instance.oracle()
    return qual.marginal(q, prefix, element) + lam * geometry.set_distance_sum(
        oracle, element, peers)
