"""Experiment harness: instance and solution I/O, runs, scaling benchmarks.

JSON files use a canonical form (sorted keys, two-space indent, trailing
newline) so that save(load(path)) reproduces the bytes exactly. CSV reports
keep floats at 17 significant digits so they round-trip.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import instgen, objective, solvers
from .model import Cluster, Instance, Solution
from .quality import QualityFunction


class SchemaError(ValueError):
    """Malformed instance or solution payload; the message names the field."""


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise SchemaError(f"missing field {where}{key}")
    return d[key]


def instance_to_dict(instance: Instance) -> dict:
    if instance.features is None:
        features = None
    elif instance.feature_kind == "vector":
        features = [[float(x) for x in row] for row in instance.features]
    else:
        features = [sorted(s, key=repr) for s in instance.features]
    M = instance.distance_matrix
    if M is None:
        matrix = None
    elif isinstance(M, np.ndarray):
        matrix = [[float(x) for x in row] for row in M]
    else:
        raise SchemaError(
            "structural distance matrices cannot be serialized; "
            "regenerate the instance instead")
    return {
        "n": int(instance.n),
        "feature_kind": instance.feature_kind,
        "features": features,
        "clusters": [
            {"members": [int(v) for v in c.members], "budget": int(c.budget)}
            for c in instance.clusters
        ],
        "partition": (None if instance.partition is None
                      else [int(c) for c in instance.partition]),
        "metric": instance.metric,
        "distance_matrix": matrix,
        "lambda": float(instance.lam),
        "quality": instance.quality.to_dict(),
    }


def instance_from_dict(d: dict) -> Instance:
    n = _require(d, "n", "")
    metric = _require(d, "metric", "")
    feature_kind = _require(d, "feature_kind", "")
    features = d.get("features")
    if features is not None and feature_kind == "vector":
        features = np.asarray(features, dtype=float)
    clusters_raw = _require(d, "clusters", "")
    clusters = []
    for j, c in enumerate(clusters_raw):
        members = _require(c, "members", f"clusters[{j}].")
        budget = _require(c, "budget", f"clusters[{j}].")
        if not isinstance(budget, int):
            raise SchemaError(f"clusters[{j}].budget must be an int, got {budget!r}")
        clusters.append(Cluster(j, tuple(members), budget))
    matrix = d.get("distance_matrix")
    if matrix is not None:
        matrix = np.asarray(matrix, dtype=float)
    quality = QualityFunction.from_dict(d.get("quality", {"kind": "zero"}))
    return Instance(
        n=int(n), feature_kind=feature_kind, features=features,
        clusters=clusters, metric=metric, distance_matrix=matrix,
        partition=d.get("partition"), lam=float(d.get("lambda", 1.0)),
        quality=quality,
    )


def _canonical_dump(payload: dict, path: str) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    with open(path, "w") as fh:
        fh.write(text)


def save_instance(path: str, instance: Instance) -> None:
    """Write an instance as canonical JSON."""
    _canonical_dump(instance_to_dict(instance), path)


def load_instance(path: str) -> Instance:
    """Read an instance, raising SchemaError on malformed payloads."""
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from None
    if not isinstance(d, dict):
        raise SchemaError("top-level payload must be an object")
    return instance_from_dict(d)


def save_solution(path: str, solution: Solution,
                  objective_value: objective.ObjectiveValue | None = None,
                  trace_file: str | None = None) -> None:
    payload = {"selected": [list(S) for S in solution.selected]}
    if objective_value is not None:
        payload["objective"] = {
            "quality": objective_value.quality,
            "dispersion": objective_value.dispersion,
            "combined": objective_value.combined,
        }
    if trace_file is not None:
        payload["trace_file"] = trace_file
    _canonical_dump(payload, path)


def load_solution(path: str) -> Solution:
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from None
    selected = _require(d, "selected", "")
    return Solution.from_sets([list(S) for S in selected])


@dataclass
class ExperimentSpec:
    """One instance, several solver configs, several runs per config.

    vary controls what changes between runs: "seed" offsets the seed by the
    run index, "cluster_order" hands each run a fresh random permutation
    (affecting order-sensitive solvers), "alpha" cycles the alphas list.
    """

    instance: Instance
    algorithms: list
    runs: int = 10
    vary: str = "seed"  # "seed" | "cluster_order" | "alpha"
    alphas: list = field(default_factory=lambda: [0.5, 0.75, 0.9, 0.95, 1.0])
    workers: int = 1


@dataclass
class ExperimentRow:
    label: str
    algorithm: str
    run: int
    alpha: float
    seed: int
    quality: float
    dispersion: float
    combined: float
    normalized: float
    wall_time_s: float
    fills: list


@dataclass
class ExperimentReport:
    rows: list

    def labels(self) -> list:
        seen = []
        for r in self.rows:
            if r.label not in seen:
                seen.append(r.label)
        return seen

    def mean_normalized(self, label: str) -> float:
        vals = [r.normalized for r in self.rows if r.label == label]
        return statistics.fmean(vals)

    def to_csv(self, path: str) -> None:
        if not self.rows:
            raise ValueError("empty report")
        m = len(self.rows[0].fills)
        header = ["label", "algorithm", "run", "alpha", "seed", "quality",
                  "dispersion", "combined", "normalized", "wall_time_s"]
        header += [f"fill_{j}" for j in range(m)]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in self.rows:
                row = [r.label, r.algorithm, r.run, f"{r.alpha:.17g}", r.seed,
                       f"{r.quality:.17g}", f"{r.dispersion:.17g}",
                       f"{r.combined:.17g}", f"{r.normalized:.17g}",
                       f"{r.wall_time_s:.17g}"]
                row += [str(f) for f in r.fills]
                w.writerow(row)

    @staticmethod
    def from_csv(path: str) -> "ExperimentReport":
        rows = []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            fill_cols = [c for c in reader.fieldnames if c.startswith("fill_")]
            fill_cols.sort(key=lambda c: int(c.split("_")[1]))
            for rec in reader:
                rows.append(ExperimentRow(
                    label=rec["label"], algorithm=rec["algorithm"],
                    run=int(rec["run"]), alpha=float(rec["alpha"]),
                    seed=int(rec["seed"]), quality=float(rec["quality"]),
                    dispersion=float(rec["dispersion"]),
                    combined=float(rec["combined"]),
                    normalized=float(rec["normalized"]),
                    wall_time_s=float(rec["wall_time_s"]),
                    fills=[int(rec[c]) for c in fill_cols],
                ))
        return ExperimentReport(rows)


def _config_label(cfg: solvers.SolverConfig) -> str:
    label = solvers.Algorithm(cfg.algorithm).value
    if solvers.Algorithm(cfg.algorithm) == solvers.Algorithm.GPA:
        label += f"[a={cfg.alpha:g}]"
        if cfg.enhanced:
            label += "[enh]"
    return label


def _derive_config(base: solvers.SolverConfig, spec: ExperimentSpec,
                   run: int) -> solvers.SolverConfig:
    if spec.vary == "seed":
        return dataclasses.replace(base, seed=base.seed + run)
    if spec.vary == "cluster_order":
        rng = np.random.default_rng(base.seed + run)
        order = rng.permutation(spec.instance.m).tolist()
        return dataclasses.replace(base, cluster_order=order)
    if spec.vary == "alpha":
        return dataclasses.replace(base, alpha=spec.alphas[run % len(spec.alphas)])
    raise ValueError(f"unknown vary mode {spec.vary!r}")


def run_experiment(spec: ExperimentSpec) -> ExperimentReport:
    """Run every configured solver `runs` times and normalize scores.

    The instance's distance cache is built once up front and shared; each
    row records objective parts, per-cluster fill counts and wall time.
    normalized = combined / best combined over all rows, so the best row is
    exactly 1.0 (all rows score 1.0 when everything is zero). Results are
    independent of the worker count; workers only parallelize solves.
    """
    instance = spec.instance
    instance.oracle()
    jobs = []
    for ci, base in enumerate(spec.algorithms):
        for run in range(spec.runs):
            jobs.append((ci, run, _derive_config(base, spec, run)))

    def execute(job):
        ci, run, cfg = job
        t0 = time.perf_counter()
        solution, _ = solvers.solve(instance, cfg)
        dt = time.perf_counter() - t0
        val = objective.combined_objective(instance, solution)
        return ci, run, cfg, solution, val, dt

    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(execute, jobs))
    else:
        results = [execute(job) for job in jobs]

    rows = []
    for ci, run, cfg, solution, val, dt in results:
        rows.append(ExperimentRow(
            label=_config_label(spec.algorithms[ci]),
            algorithm=solvers.Algorithm(cfg.algorithm).value,
            run=run, alpha=cfg.alpha, seed=cfg.seed,
            quality=val.quality, dispersion=val.dispersion,
            combined=val.combined, normalized=0.0, wall_time_s=dt,
            fills=solution.fills(),
        ))
    best = max((r.combined for r in rows), default=0.0)
    for r in rows:
        r.normalized = r.combined / best if best > 0 else 1.0
    return ExperimentReport(rows)


@dataclass
class BenchPoint:
    n: int
    seconds: float
    ratio: float | None  # seconds / previous seconds


def bench_scaling(spec: instgen.GenSpec, sizes: list,
                  config: solvers.SolverConfig,
                  repeats: int = 1) -> list:
    """Time one solver across instance sizes.

    Generates spec with each n in sizes, times the solve `repeats` times and
    keeps the median, and reports successive time ratios.
    """
    points = []
    prev = None
    for n in sizes:
        inst = instgen.generate(dataclasses.replace(spec, n=int(n)))
        if isinstance(inst, tuple):
            inst = inst[0]
        inst.oracle()
        times = []
        for _ in range(max(repeats, 1)):
            t0 = time.perf_counter()
            solvers.solve(inst, config)
            times.append(time.perf_counter() - t0)
        sec = statistics.median(times)
        points.append(BenchPoint(int(n), sec, None if prev is None else sec / prev))
        prev = sec
    return points
