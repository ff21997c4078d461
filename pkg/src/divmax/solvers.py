"""Solvers for budgeted diversity maximization over overlapping clusters.

All solvers are deterministic for a fixed config. Candidate comparisons break
ties by larger gain first, then smaller cluster id, then smaller minimum
element id, then smaller maximum element id. Randomized components draw from
numpy's default_rng seeded by the config.

Pair-based solvers score a candidate pair {u, v} for cluster j with
(b_j - 1) * d(u, v) on dispersion-only instances. When a quality function is
present the score is the joint quality marginal of the pair over the current
union plus lambda * (b'_j - 1) * d(u, v) with b'_j = 2 * ceil(b_j / 2), which
keeps quality and once-counted dispersion on the same scale.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations

import numpy as np

from . import geometry, objective, quality as qual
from .model import (
    Instance,
    Solution,
    available_elements,
    is_feasible,
)

DEFAULT_ORACLE_LIMIT = 10_000_000


class Algorithm(str, Enum):
    GP = "gp"
    GPA = "gpa"
    GELMS = "gelms"
    LSI = "lsi"
    LSG = "lsg"
    MC = "mc"
    RN = "rn"
    EXACT = "exact"


class OddPolicy(str, Enum):
    ALG1_ARBITRARY = "alg1_arbitrary"
    ROUNDUP_REMOVE = "roundup_remove"


class OracleLimitError(RuntimeError):
    """Raised when the exhaustive oracle's search space exceeds its limit."""


@dataclass
class SolverConfig:
    algorithm: Algorithm = Algorithm.GP
    alpha: float = 1.0
    epsilon: float = 1e-3
    seed: int = 0
    cluster_order: list | None = None
    enhanced: bool = False
    odd_policy: OddPolicy | None = None  # None picks a default by quality kind
    max_ls_iters: int | None = None  # None means 10 * n * max budget


@dataclass
class TraceEvent:
    step: int
    kind: str  # "pair" | "single" | "remove" | "swap"
    cluster: int
    elements: tuple
    gain: float


@dataclass
class SolveTrace:
    algorithm: str
    events: list
    init: tuple | None = None  # starting selection for local search


def _norm_config(config: SolverConfig | None, algorithm: Algorithm) -> SolverConfig:
    if config is None:
        config = SolverConfig(algorithm=algorithm)
    if not 0.0 < config.alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {config.alpha!r}")
    if config.epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {config.epsilon!r}")
    return config


def _check_order(order, m: int) -> list:
    order = [int(j) for j in order]
    if sorted(order) != list(range(m)):
        raise ValueError(f"cluster_order must be a permutation of 0..{m - 1}")
    return order


class _State:
    """Mutable bookkeeping for one solver run."""

    def __init__(self, instance: Instance, algorithm: str):
        self.inst = instance
        self.oracle = instance.oracle()
        self.n = instance.n
        self.m = instance.m
        self.cells = instance.cell_of()
        self.trivial = instance.trivial_partition()
        self.members = [np.asarray(c.members, dtype=int) for c in instance.clusters]
        self.member_sets = [set(c.members) for c in instance.clusters]
        self.avail = np.ones(self.n, dtype=bool)
        self.taken = np.zeros(self.n, dtype=bool)
        self.sel = [set() for _ in range(self.m)]
        self.order = []  # chronological (element, cluster) additions
        self.qstate = qual.QualityState(instance.quality, self.n)
        self.events = []
        self.algorithm = algorithm
        if not self.trivial:
            groups = {}
            for v in range(self.n):
                groups.setdefault(int(self.cells[v]), []).append(v)
            self.cell_members = {c: np.asarray(vs, dtype=int) for c, vs in groups.items()}

    def avail_members(self, j: int) -> np.ndarray:
        ids = self.members[j]
        return ids[self.avail[ids]]

    def _block(self, v: int) -> None:
        if self.trivial:
            self.avail[v] = False
        else:
            self.avail[self.cell_members[int(self.cells[v])]] = False

    def add_pair(self, j: int, u: int, v: int, gain: float) -> None:
        for w in (u, v):
            self.sel[j].add(w)
            self.order.append((w, j))
            self.qstate.add(w)
            self.taken[w] = True
            self._block(w)
        self.events.append(TraceEvent(len(self.events), "pair", j, (u, v), gain))

    def add_single(self, j: int, v: int, gain: float) -> None:
        self.sel[j].add(v)
        self.order.append((v, j))
        self.qstate.add(v)
        self.taken[v] = True
        self._block(v)
        self.events.append(TraceEvent(len(self.events), "single", j, (v,), gain))

    def remove(self, j: int, v: int, gain: float) -> None:
        self.sel[j].discard(v)
        self.order = [(w, c) for (w, c) in self.order if w != v]
        self.qstate.remove(v)
        self.taken[v] = False
        self._recompute_avail()
        self.events.append(TraceEvent(len(self.events), "remove", j, (v,), gain))

    def _recompute_avail(self) -> None:
        self.avail = ~self.taken
        if not self.trivial:
            used_cells = {int(self.cells[v]) for v in np.flatnonzero(self.taken)}
            for c in used_cells:
                self.avail[self.cell_members[c]] = False

    def finish(self) -> tuple:
        solution = Solution.from_sets(self.sel)
        return solution, SolveTrace(self.algorithm, self.events)


def _loop_budgets(budgets: np.ndarray, policy: OddPolicy) -> np.ndarray:
    if policy == OddPolicy.ROUNDUP_REMOVE:
        return budgets + (budgets % 2)
    return budgets - (budgets % 2)


def _pair_weights(budgets: np.ndarray, qmode: bool) -> np.ndarray:
    if qmode:
        return budgets + (budgets % 2)
    return budgets.copy()


def _default_policy(instance: Instance, config: SolverConfig) -> OddPolicy:
    if config.odd_policy is not None:
        return OddPolicy(config.odd_policy)
    if instance.quality.kind == "zero":
        return OddPolicy.ALG1_ARBITRARY
    return OddPolicy.ROUNDUP_REMOVE


def _best_pair(st: _State, j: int, qmode: bool, weight: int, lam: float):
    """Exact best feasible pair in cluster j under the current state.

    Scans every remaining pair; the first maximum wins, which is the
    lexicographically smallest (u, v) because ids are ascending.
    """
    ids = st.avail_members(j)
    k = ids.size
    if k < 2:
        return None
    D = st.oracle.pairwise(ids)
    cells = st.cells[ids] if not st.trivial else None
    best = None
    if not qmode:
        for a in range(k):
            Da = D[a]
            for bb in range(a + 1, k):
                if cells is not None and cells[a] == cells[bb]:
                    continue
                d = Da[bb]
                if best is None or d > best[0]:
                    best = (d, a, bb)
        if best is None:
            return None
        return (weight - 1) * float(best[0]), int(ids[best[1]]), int(ids[best[2]])
    for a in range(k):
        Da = D[a]
        u = int(ids[a])
        for bb in range(a + 1, k):
            if cells is not None and cells[a] == cells[bb]:
                continue
            v = int(ids[bb])
            g = st.qstate.marginal_pair(u, v) + lam * (weight - 1) * Da[bb]
            if best is None or g > best[0]:
                best = (g, a, bb)
    if best is None:
        return None
    return float(best[0]), int(ids[best[1]]), int(ids[best[2]])


def _odd_phase(st: _State, policy: OddPolicy, budgets: np.ndarray, lam: float) -> None:
    """Fix up odd budgets after the pair loop."""
    if policy == OddPolicy.ALG1_ARBITRARY:
        for j in range(st.m):
            if budgets[j] % 2 == 0 or len(st.sel[j]) >= budgets[j]:
                continue
            ids = st.avail_members(j)
            if ids.size == 0:
                continue
            if st.sel[j]:
                peers = np.asarray(sorted(st.sel[j]), dtype=int)
                dsums = np.array([st.oracle.row(int(v), peers).sum() for v in ids])
            else:
                dsums = np.zeros(ids.size)
            k = int(np.argmax(dsums))
            st.add_single(j, int(ids[k]), float(dsums[k]))
    else:
        snapshot = list(st.order)
        for j in range(st.m):
            if len(st.sel[j]) <= budgets[j]:
                continue
            victim = None
            for v in sorted(st.sel[j]):
                g = objective.removal_measure(st.inst, snapshot, v, lam=lam)
                if victim is None or g < victim[0]:
                    victim = (g, v)
            st.remove(j, victim[1], victim[0])


def solve_gp(instance: Instance, config: SolverConfig | None = None) -> tuple:
    """Greedy pairs: repeatedly add the globally best feasible pair.

    Each round scans every cluster that still has room for a pair under its
    loop budget (even-rounded down, or up under the round-up removal policy)
    and adds the pair with the largest score anywhere. Odd budgets are then
    settled by the configured policy: one extra element per odd cluster, or
    removal of the element with the smallest contribution measure.

    Returns (Solution, SolveTrace).
    """
    cfg = _norm_config(config, Algorithm.GP)
    st = _State(instance, "gp")
    qmode = instance.quality.kind != "zero"
    lam = float(instance.lam)
    budgets = instance.budgets()
    policy = _default_policy(instance, cfg)
    loopb = _loop_budgets(budgets, policy)
    weights = _pair_weights(budgets, qmode)
    dead = [False] * st.m  # no feasible pair left; availability only shrinks
    while True:
        best = None
        best_key = None
        for j in range(st.m):
            if dead[j] or len(st.sel[j]) + 2 > loopb[j]:
                continue
            cand = _best_pair(st, j, qmode, int(weights[j]), lam)
            if cand is None:
                dead[j] = True
                continue
            g, u, v = cand
            key = (-g, j, u, v)
            if best_key is None or key < best_key:
                best_key = key
                best = (j, u, v, g)
        if best is None:
            break
        j, u, v, g = best
        st.add_pair(j, u, v, g)
    _odd_phase(st, policy, budgets, lam)
    return st.finish()


def _feasible_pair_exists(st: _State, j: int) -> bool:
    ids = st.avail_members(j)
    if ids.size < 2:
        return False
    if st.trivial:
        return True
    return len({int(c) for c in st.cells[ids]}) >= 2


def _gpa_candidate(st: _State, j: int, dsum_j: np.ndarray, alpha: float,
                   qmode: bool, weight: int, lam: float):
    ids = st.avail_members(j)
    if ids.size < 2:
        return None
    if not qmode:
        if st.sel[j]:
            x = int(ids[int(np.argmax(dsum_j[ids]))])
        else:
            x = int(ids[0])
        pool = ids[ids != x]
        if not st.trivial:
            pool = pool[st.cells[pool] != st.cells[x]]
        if pool.size == 0:
            return None
        rows = st.oracle.row(x, pool)
        far = float(rows.max())
        pool = pool[rows >= alpha * far]
        y = int(pool[int(np.argmax(dsum_j[pool]))])
        gain = (weight - 1) * st.oracle.distance(x, y)
        return float(gain), x, y
    margs = st.qstate.marginal_vec(ids)
    x = int(ids[int(np.argmax(margs))])
    pool = ids[ids != x]
    if not st.trivial:
        pool = pool[st.cells[pool] != st.cells[x]]
    if pool.size == 0:
        return None
    d_xy = st.oracle.row(x, pool)
    if st.inst.quality.kind == "modular":
        mp = st.qstate.marginal(x) + st.qstate.marginal_vec(pool)
    else:
        mp = np.array([st.qstate.marginal_pair(x, int(y)) for y in pool])
    phi = mp + lam * (weight - 1) * d_xy
    k = int(np.argmax(phi))
    return float(phi[k]), x, int(pool[k])


def _enhanced_candidates(st: _State, dsum: list, qmode: bool,
                         weights: np.ndarray, loopb: np.ndarray,
                         budgets: np.ndarray, lam: float) -> list:
    """Candidate pairs from the covering scheme.

    Rounds pick a first element from the still uncovered clusters (largest
    set distance to its cluster's selection, or largest quality marginal),
    pair it with the best partner available in any unsaturated cluster
    containing it, assign the pair to the eligible cluster of largest budget
    and mark every unsaturated cluster containing the first element covered.
    One candidate per round; the caller picks the best.
    """
    unsat = [
        j for j in range(st.m)
        if len(st.sel[j]) + 2 <= loopb[j] and _feasible_pair_exists(st, j)
    ]
    uncovered = set(unsat)
    cands = []
    while uncovered:
        pick = None
        for j in sorted(uncovered):
            ids = st.avail_members(j)
            if ids.size == 0:
                continue
            meas = st.qstate.marginal_vec(ids) if qmode else dsum[j][ids]
            k = int(np.argmax(meas))
            if pick is None or meas[k] > pick[0]:
                pick = (float(meas[k]), j, int(ids[k]))
        if pick is None:
            break
        _, jx, x = pick
        elig = [j for j in unsat if x in st.member_sets[j]]
        pool = np.unique(np.concatenate([st.avail_members(j) for j in elig]))
        pool = pool[pool != x]
        if not st.trivial:
            pool = pool[st.cells[pool] != st.cells[x]]
        if pool.size == 0:
            uncovered -= set(elig)
            continue
        if not qmode:
            rows = st.oracle.row(x, pool)
            k = int(np.argmax(rows))
            y = int(pool[k])
            elig_y = [j for j in elig if y in st.member_sets[j]]
            cluster = max(elig_y, key=lambda j: (budgets[j], -j))
            gain = (weights[cluster] - 1) * float(rows[k])
        else:
            best = None
            for y_ in pool:
                y_ = int(y_)
                elig_y = [j for j in elig if y_ in st.member_sets[j]]
                jy = max(elig_y, key=lambda j: (budgets[j], -j))
                phi = st.qstate.marginal_pair(x, y_) + lam * (
                    weights[jy] - 1) * st.oracle.distance(x, y_)
                if best is None or phi > best[0]:
                    best = (float(phi), y_, jy)
            gain, y, cluster = best
        cands.append((float(gain), cluster, x, y))
        uncovered -= set(elig)
    return cands


def solve_gpa(instance: Instance, config: SolverConfig | None = None) -> tuple:
    """Anchored greedy pairs with an alpha-relaxed far-point choice.

    Per round each open cluster proposes one pair: the anchor x maximizes the
    set distance to the cluster's selection (first anchor: smallest available
    id) and the partner y maximizes the set distance among elements at least
    alpha times as far from x as the farthest one. With a quality function
    the anchor maximizes the quality marginal and the partner maximizes the
    combined pair score; both are exact argmaxes, which satisfy the alpha
    relaxation for every alpha <= 1. The best proposal wins the round. The
    enhanced flag switches proposals to the covering scheme (alpha ignored).

    Returns (Solution, SolveTrace).
    """
    cfg = _norm_config(config, Algorithm.GPA)
    st = _State(instance, "gpa")
    qmode = instance.quality.kind != "zero"
    lam = float(instance.lam)
    budgets = instance.budgets()
    policy = _default_policy(instance, cfg)
    loopb = _loop_budgets(budgets, policy)
    weights = _pair_weights(budgets, qmode)
    dsum = [np.zeros(st.n) for _ in range(st.m)]
    while True:
        if cfg.enhanced:
            cands = _enhanced_candidates(
                st, dsum, qmode, weights, loopb, budgets, lam)
        else:
            cands = []
            for j in range(st.m):
                if len(st.sel[j]) + 2 > loopb[j]:
                    continue
                c = _gpa_candidate(
                    st, j, dsum[j], cfg.alpha, qmode, int(weights[j]), lam)
                if c is not None:
                    cands.append((c[0], j, c[1], c[2]))
        if not cands:
            break
        best = min(cands, key=lambda c: (-c[0], c[1], min(c[2], c[3]), max(c[2], c[3])))
        g, j, x, y = best
        st.add_pair(j, x, y, g)
        mj = st.members[j]
        dsum[j][mj] += st.oracle.row(x, mj) + st.oracle.row(y, mj)
    _odd_phase(st, policy, budgets, lam)
    return st.finish()


def solve_gelms(instance: Instance, config: SolverConfig | None = None) -> tuple:
    """Greedy single elements, cluster by cluster.

    Visits clusters in the configured order (identity by default) and fills
    each to its budget by repeatedly adding the available member with the
    largest quality marginal plus lambda times the distance sum to the
    cluster's current selection.

    Returns (Solution, SolveTrace).
    """
    cfg = _norm_config(config, Algorithm.GELMS)
    st = _State(instance, "gelms")
    lam = float(instance.lam)
    order = _check_order(cfg.cluster_order, st.m) if cfg.cluster_order else list(range(st.m))
    for j in order:
        b = instance.clusters[j].budget
        mj = st.members[j]
        dsum = np.zeros(st.n)
        while len(st.sel[j]) < b:
            ids = st.avail_members(j)
            if ids.size == 0:
                break
            gains = st.qstate.marginal_vec(ids) + lam * dsum[ids]
            k = int(np.argmax(gains))
            v = int(ids[k])
            st.add_single(j, v, float(gains[k]))
            dsum[mj] += st.oracle.row(v, mj)
    return st.finish()


def solve_mc(instance: Instance, config: SolverConfig | None = None) -> tuple:
    """Max-coverage style greedy: globally best quality marginal, one at a time.

    Returns (Solution, SolveTrace).
    """
    _norm_config(config, Algorithm.MC)
    st = _State(instance, "mc")
    budgets = instance.budgets()
    while True:
        best = None
        best_key = None
        for j in range(st.m):
            if len(st.sel[j]) >= budgets[j]:
                continue
            ids = st.avail_members(j)
            if ids.size == 0:
                continue
            margs = st.qstate.marginal_vec(ids)
            k = int(np.argmax(margs))
            key = (-float(margs[k]), j, int(ids[k]))
            if best_key is None or key < best_key:
                best_key = key
                best = (j, int(ids[k]), float(margs[k]))
        if best is None:
            break
        st.add_single(best[0], best[1], best[2])
    return st.finish()


def solve_rn(instance: Instance, config: SolverConfig | None = None) -> tuple:
    """Random baseline: random cluster order, uniform fills to saturation.

    Returns (Solution, SolveTrace).
    """
    cfg = _norm_config(config, Algorithm.RN)
    st = _State(instance, "rn")
    rng = np.random.default_rng(cfg.seed)
    budgets = instance.budgets()
    if cfg.cluster_order:
        order = _check_order(cfg.cluster_order, st.m)
    else:
        order = rng.permutation(st.m).tolist()
    for j in order:
        while len(st.sel[j]) < budgets[j]:
            ids = st.avail_members(j)
            if ids.size == 0:
                break
            v = int(ids[int(rng.integers(ids.size))])
            st.add_single(j, v, 0.0)
    return st.finish()


def _local_search(instance: Instance, config: SolverConfig | None,
                  init: Solution | None, use_combined: bool, name: str) -> tuple:
    cfg = _norm_config(config, Algorithm.LSI if use_combined else Algorithm.LSG)
    if init is None:
        init, _ = solve_rn(instance, dataclasses.replace(cfg, algorithm=Algorithm.RN))
    else:
        bad = is_feasible(instance, init)
        if bad:
            raise ValueError(f"infeasible local search start: {bad[0]}")
    oracle = instance.oracle()
    lam = float(instance.lam)
    q = instance.quality
    cells = instance.cell_of()
    sets = init.as_sets()
    budgets = instance.budgets()
    n = instance.n

    def evaluate() -> float:
        union = sorted({v for S in sets for v in S})
        if use_combined:
            return qual.value(q, union) + lam * objective.intra_dispersion(oracle, sets)
        return objective.cluster_dispersion(oracle, union)

    f_cur = evaluate()
    cap = cfg.max_ls_iters
    if cap is None:
        cap = 10 * n * (int(budgets.max()) if len(budgets) else 0)
    events = []
    counts = None
    if q.kind == "coverage" and use_combined:
        from collections import Counter
        counts = Counter()
        for S in sets:
            for v in S:
                counts.update(q.covers[v])

    def quality_delta(out: int, inn: int) -> float:
        if not use_combined or q.kind == "zero":
            return 0.0
        if q.kind == "modular":
            return float(q.weights[inn] - q.weights[out])
        lost = sum(
            1 for item in q.covers[out]
            if counts[item] == 1 and item not in q.covers[inn]
        )
        gained = sum(
            1 for item in q.covers[inn]
            if counts[item] - (1 if item in q.covers[out] else 0) == 0
        )
        return float(gained - lost)

    swaps = 0
    while swaps < cap:
        union = sorted({v for S in sets for v in S})
        taken = set(union)
        used_cells = {}
        for S in sets:
            for v in S:
                used_cells[int(cells[v])] = used_cells.get(int(cells[v]), 0) + 1
        best = None
        best_key = None
        for j in range(instance.m):
            Sj = sorted(sets[j])
            members = set(instance.clusters[j].members)
            for out in Sj:
                out_cell = int(cells[out])
                if use_combined:
                    peers = np.asarray([v for v in Sj if v != out], dtype=int)
                    sds_out = float(oracle.row(out, peers).sum()) if peers.size else 0.0
                else:
                    rest = np.asarray([v for v in union if v != out], dtype=int)
                    sds_out = float(oracle.row(out, rest).sum()) if rest.size else 0.0
                for inn in sorted(members):
                    if inn == out or inn in taken:
                        continue
                    cell = int(cells[inn])
                    used = used_cells.get(cell, 0) - (1 if cell == out_cell else 0)
                    if used > 0:
                        continue
                    if use_combined:
                        sds_in = float(oracle.row(inn, peers).sum()) if peers.size else 0.0
                        delta = lam * (sds_in - sds_out) + quality_delta(out, inn)
                    else:
                        sds_in = (float(oracle.row(inn, rest).sum())
                                  if rest.size else 0.0)
                        delta = sds_in - sds_out
                    if delta <= cfg.epsilon * f_cur:
                        continue
                    key = (-delta, j, out, inn)
                    if best_key is None or key < best_key:
                        best_key = key
                        best = (delta, j, out, inn)
        if best is None:
            break
        delta, j, out, inn = best
        sets[j].discard(out)
        sets[j].add(inn)
        if counts is not None:
            counts.subtract(q.covers[out])
            counts += type(counts)()
            counts.update(q.covers[inn])
        f_cur = evaluate()
        events.append(TraceEvent(len(events), "swap", j, (out, inn), float(delta)))
        swaps += 1
    solution = Solution.from_sets(sets)
    return solution, SolveTrace(name, events, init=init.selected)


def solve_lsi(instance: Instance, config: SolverConfig | None = None,
              init: Solution | None = None) -> tuple:
    """Local search on the combined objective with single-element swaps.

    Starts from init (validated) or a seeded random solution. Applies the
    best improving swap while its gain exceeds epsilon times the current
    objective, up to max_ls_iters swaps. Returns (Solution, SolveTrace);
    the trace stores the start and one swap event per move.
    """
    return _local_search(instance, config, init, use_combined=True, name="lsi")


def solve_lsg(instance: Instance, config: SolverConfig | None = None,
              init: Solution | None = None) -> tuple:
    """Local search on the global dispersion of the union (quality ignored)."""
    return _local_search(instance, config, init, use_combined=False, name="lsg")


def alpha_acceptable(instance: Instance, partial, cluster_id: int,
                     x: int, y: int, alpha: float,
                     q: qual.QualityFunction | None = None,
                     lam: float | None = None) -> bool:
    """Alpha-relaxed acceptance test for a quality-mode candidate pair.

    True when x's quality marginal is at least alpha times the best available
    marginal in the cluster, and the pair score of (x, y) beyond x's marginal
    is at least alpha times the best such margin over partners of x.
    """
    if q is None:
        q = instance.quality
    if lam is None:
        lam = float(instance.lam)
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha!r}")
    avail = available_elements(instance, partial, cluster_id)
    if x not in avail or y not in avail or x == y:
        return False
    cells = instance.cell_of()
    if int(cells[x]) == int(cells[y]):
        return False
    if isinstance(partial, Solution):
        union = set(partial.union())
    else:
        union = {v for S in partial for v in S}
    oracle = instance.oracle()
    b = instance.clusters[cluster_id].budget
    w = 2 * math.ceil(b / 2)

    def phi(u, v):
        return qual.marginal_pair(q, union, u, v) + lam * (w - 1) * oracle.distance(u, v)

    marg_x = qual.marginal(q, union, x)
    best_marg = max(qual.marginal(q, union, v) for v in avail)
    if marg_x < alpha * best_marg:
        return False
    partners = [v for v in avail if v != x and int(cells[v]) != int(cells[x])]
    if not partners:
        return False
    best_margin = max(phi(x, v) - marg_x for v in partners)
    return phi(x, y) - marg_x >= alpha * best_margin


def solve_exact(instance: Instance, limit: int | None = None) -> tuple:
    """Exhaustive oracle over per-cluster feasible subsets.

    Enumerates every combination of per-cluster selections (subsets of
    members up to the budget with pairwise distinct cells), rejecting
    combinations that reuse elements or cells, and returns the solution with
    the largest combined objective. Equal objectives resolve to the
    lexicographically smallest solution encoding. Raises OracleLimitError
    when the estimated search space exceeds the limit (default 1e7).

    Returns (Solution, float combined objective).
    """
    if limit is None:
        limit = DEFAULT_ORACLE_LIMIT
    n, m = instance.n, instance.m
    if n > 63:
        raise OracleLimitError(f"oracle supports at most 63 elements, got {n}")
    budgets = instance.budgets()
    est = 1
    for j, c in enumerate(instance.clusters):
        size = len(c.members)
        est *= sum(math.comb(size, k) for k in range(min(budgets[j], size) + 1))
        if est > limit:
            raise OracleLimitError(
                f"search space estimate exceeds limit ({est:.3g} > {limit:g})")
    oracle = instance.oracle()
    cells = instance.cell_of()
    lam = float(instance.lam)
    q = instance.quality

    cand = []
    for j, c in enumerate(instance.clusters):
        members = list(c.members)
        D = oracle.pairwise(np.asarray(members, dtype=int)) if members else None
        pos = {v: i for i, v in enumerate(members)}
        subsets = []
        for k in range(min(budgets[j], len(members)), -1, -1):
            for combo in combinations(members, k):
                cset = [int(cells[v]) for v in combo]
                if len(set(cset)) != len(cset):
                    continue
                em = 0
                cm = 0
                for v, cc in zip(combo, cset):
                    em |= 1 << v
                    cm |= 1 << cc
                disp = 0.0
                for a in range(k):
                    for bb in range(a + 1, k):
                        disp += D[pos[combo[a]], pos[combo[bb]]]
                subsets.append((combo, em, cm, disp))
        cand.append(subsets)

    # quality lookup over union bitmasks when small enough
    qtab = None
    if q.kind != "zero" and n <= 20:
        if q.kind == "modular":
            tab = np.zeros(1)
            for v in range(n):
                tab = np.concatenate([tab, tab + float(q.weights[v])])
            qtab = tab
        else:
            items = sorted({item for s in q.covers for item in s}, key=repr)
            index = {item: k for k, item in enumerate(items)}
            covm = [0] * n
            for v in range(n):
                for item in q.covers[v]:
                    covm[v] |= 1 << index[item]
            usize = [0] * (1 << n)
            umask = [0] * (1 << n)
            for mask in range(1, 1 << n):
                low = mask & -mask
                umask[mask] = umask[mask ^ low] | covm[low.bit_length() - 1]
                usize[mask] = umask[mask].bit_count()
            qtab = np.asarray(usize, dtype=float)

    def subset_quality(mask_ids: tuple) -> float:
        return qual.value(q, mask_ids)

    best_term = []
    for subsets in cand:
        terms = [lam * disp + subset_quality(combo) for combo, _, _, disp in subsets]
        best_term.append(max(terms) if terms else 0.0)
    suffix = [0.0] * (m + 1)
    for j in range(m - 1, -1, -1):
        suffix[j] = suffix[j + 1] + best_term[j]

    state = {"val": -math.inf, "enc": None}
    last = m - 1
    em_arr = [np.array([s[1] for s in subsets], dtype=object) for subsets in cand]
    cm_arr = [np.array([s[2] for s in subsets], dtype=object) for subsets in cand]
    dsp_arr = [np.array([s[3] for s in subsets]) for subsets in cand]

    def dfs(j, used, cellused, union_mask, union_set, disp_acc, partial):
        if j == last:
            subsets = cand[j]
            ok = [
                i for i in range(len(subsets))
                if not (subsets[i][1] & used) and not (subsets[i][2] & cellused)
            ]
            if not ok:
                return
            if qtab is not None:
                vals = [
                    float(qtab[union_mask | subsets[i][1]]) + lam * (disp_acc + subsets[i][3])
                    for i in ok
                ]
            elif q.kind == "zero":
                vals = [lam * (disp_acc + subsets[i][3]) for i in ok]
            else:
                vals = [
                    qual.value(q, union_set | set(subsets[i][0]))
                    + lam * (disp_acc + subsets[i][3])
                    for i in ok
                ]
            vmax = max(vals)
            picks = [ok[i] for i, vv in enumerate(vals) if vv == vmax]
            combo = min(subsets[i][0] for i in picks)
            enc = tuple(partial + [tuple(sorted(combo))])
            if vmax > state["val"] or (vmax == state["val"] and enc < state["enc"]):
                state["val"] = vmax
                state["enc"] = enc
            return
        base_q = (
            float(qtab[union_mask]) if qtab is not None
            else qual.value(q, union_set)
        )
        for combo, em, cm, disp in cand[j]:
            if (em & used) or (cm & cellused):
                continue
            bound = base_q + subset_quality(combo) + lam * (disp_acc + disp) + suffix[j + 1]
            if bound < state["val"]:
                continue
            dfs(j + 1, used | em, cellused | cm, union_mask | em,
                union_set | set(combo), disp_acc + disp,
                partial + [tuple(sorted(combo))])

    dfs(0, 0, 0, 0, set(), 0.0, [])
    solution = Solution(selected=state["enc"])
    return solution, float(state["val"])


def approximation_ratio(instance: Instance, solution: Solution,
                        reference: Solution) -> float:
    """Combined objective of the reference divided by that of the solution.

    With an optimal reference this is >= 1. A zero reference objective gives
    1.0; a zero solution objective against a positive reference gives inf.
    """
    alg = objective.combined_objective(instance, solution).combined
    ref = objective.combined_objective(instance, reference).combined
    if ref <= 0:
        return 1.0
    if alg <= 0:
        return math.inf
    return ref / alg


def replay_trace(instance: Instance, trace: SolveTrace) -> Solution:
    """Re-apply a trace's events from its start and return the end state."""
    if trace.init is not None:
        sets = [set(S) for S in trace.init]
    else:
        sets = [set() for _ in range(instance.m)]
    for e in trace.events:
        if e.kind in ("pair", "single"):
            for v in e.elements:
                sets[e.cluster].add(v)
        elif e.kind == "remove":
            for v in e.elements:
                sets[e.cluster].discard(v)
        elif e.kind == "swap":
            out, inn = e.elements
            sets[e.cluster].discard(out)
            sets[e.cluster].add(inn)
        else:
            raise ValueError(f"unknown trace event kind {e.kind!r}")
    return Solution.from_sets(sets)


_SOLVERS = {
    Algorithm.GP: solve_gp,
    Algorithm.GPA: solve_gpa,
    Algorithm.GELMS: solve_gelms,
    Algorithm.LSI: solve_lsi,
    Algorithm.LSG: solve_lsg,
    Algorithm.MC: solve_mc,
    Algorithm.RN: solve_rn,
}


def solve(instance: Instance, config: SolverConfig) -> tuple:
    """Dispatch to the configured solver; EXACT returns an empty trace."""
    algorithm = Algorithm(config.algorithm)
    if algorithm == Algorithm.EXACT:
        solution, _ = solve_exact(instance)
        return solution, SolveTrace("exact", [])
    return _SOLVERS[algorithm](instance, config)
