"""Model-wise, sample-wise, epoch-wise, ridge, grid and ensemble sweeps.

Seeding
-------
Every random draw is keyed by :func:`ddlab.seeding.derive_seed` on the base
seed and only the coordinates it is meant to depend on:

==============  ==========================================
role            coordinates
==============  ==========================================
data            replicate
noise           replicate (+ member for independent ensembles)
subsample       replicate
features        replicate, n_features, member
test            (none)
test-noise      (none)
==============  ==========================================

So a replicate shares its training pool across every cell, training sets of
different sizes are nested prefixes of one permutation, one noise draw is
reused at every noise level (larger ``p`` flips a superset), and results do
not depend on how cells are scheduled across workers. With
``share_replicate_seeds`` the replicate index is dropped from every key,
which makes all replicates identical (useful for testing).
"""

from __future__ import annotations

import csv
import io
import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np

from .data import (
    LabelNoiseSpec,
    PoolSource,
    SyntheticSource,
    apply_label_noise,
    load_fashion_mnist,
    subsample,
)
from .emc import TrainingProcedure, estimate_emc
from .exceptions import DivergentStepWarning, FormatError, InputError, SchemaVersionError
from .features import apply_feature_map, sample_feature_map
from .seeding import derive_seed
from .solver import (
    SolverSpec,
    SpectralLeastSquares,
    gd_iterative,
    score_predictions,
    solve_with,
)

SCHEMA_VERSION = 1
COORDS = ("n_features", "n_samples", "noise", "steps", "ridge_lambda")
BASE_METRICS = ("train_mse", "train_err", "test_mse", "test_err")
CSV_COLUMNS = COORDS + ("replicate",) + BASE_METRICS
KINDS = ("model", "samples", "epochs", "ridge", "grid", "ensemble")


@dataclass(frozen=True)
class TaskSpec:
    """Where samples come from: ``synthetic`` teacher or ``fashion-mnist``."""

    kind: str = "synthetic"
    input_dim: int = 20
    num_classes: int = 10
    teacher_features: int = 50
    teacher_seed: int = 0
    data_dir: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("synthetic", "fashion-mnist"):
            raise InputError(f"unknown task kind {self.kind!r}")
        if self.kind == "fashion-mnist" and not self.data_dir:
            raise InputError("fashion-mnist task needs a data_dir")


@dataclass(frozen=True)
class SweepSpec:
    model_dims: tuple = (100,)
    sample_sizes: tuple = (100,)
    noise_levels: tuple = (0.0,)
    step_counts: tuple = (0,)
    ridge_lambdas: tuple = (0.0,)
    task: TaskSpec = field(default_factory=TaskSpec)
    variance: Optional[float] = None
    mode: str = "cosine"
    solver: SolverSpec = field(default_factory=SolverSpec)
    test_size: int = 2000
    replicates: int = 5
    base_seed: int = 0
    ensemble_k: int = 1
    ensemble_independent_noise: bool = False
    noisy_test: bool = False
    share_replicate_seeds: bool = False
    record_emc: bool = False
    emc_epsilon: float = 0.1
    emc_trials: int = 5
    emc_n_max: Optional[int] = None

    def __post_init__(self):
        for name in ("model_dims", "sample_sizes", "noise_levels", "step_counts", "ridge_lambdas"):
            value = tuple(getattr(self, name))
            object.__setattr__(self, name, value)
            if not value:
                raise InputError(f"axis {name} must be non-empty")
        for name in ("model_dims", "sample_sizes", "step_counts"):
            value = getattr(self, name)
            if any(int(v) != v for v in value):
                raise InputError(f"{name} must hold integers")
            value = tuple(int(v) for v in value)
            object.__setattr__(self, name, value)
            if list(value) != sorted(value):
                raise InputError(f"{name} must be sorted ascending")
        for name in ("noise_levels", "ridge_lambdas"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if min(self.model_dims) < 1 or min(self.sample_sizes) < 1:
            raise InputError("model dimensions and sample sizes must be positive")
        if min(self.step_counts) < 0:
            raise InputError("step counts must be non-negative")
        if any(not 0 <= p <= 1 for p in self.noise_levels):
            raise InputError("noise levels must lie in [0, 1]")
        if any(not lam >= 0 for lam in self.ridge_lambdas):
            raise InputError("ridge lambdas must be non-negative")
        if self.replicates < 1 or self.ensemble_k < 1 or self.test_size < 1:
            raise InputError("replicates, ensemble_k and test_size must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        d = dict(d)
        d["task"] = TaskSpec(**d.get("task", {}))
        d["solver"] = SolverSpec(**d.get("solver", {}))
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InputError(f"unknown sweep fields {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class Cell:
    coords: dict
    replicates: tuple
    extras: dict = field(default_factory=dict)

    def values(self, metric) -> np.ndarray:
        return np.array([r[metric] for r in self.replicates], dtype=float)

    def mean(self, metric) -> float:
        return float(np.mean(self.values(metric)))

    def std(self, metric) -> float:
        v = self.values(metric)
        # exact zero for identical replicates; the mean can carry rounding
        if v.size < 2 or np.all(v == v[0]):
            return 0.0
        return float(np.std(v, ddof=1))

    def metric_names(self):
        """Numeric metrics present (and non-null) on every replicate."""
        first = self.replicates[0]
        return [
            k for k in first
            if not isinstance(first[k], bool) and all(r.get(k) is not None for r in self.replicates)
        ]


@dataclass(frozen=True)
class SweepResult:
    kind: str
    spec: SweepSpec
    axes: tuple
    cells: tuple
    schema_version: int = SCHEMA_VERSION

    def cell(self, **coords) -> Cell:
        for c in self.cells:
            if all(c.coords.get(k) == v for k, v in coords.items()):
                return c
        raise KeyError(coords)

    def curve(self, x_axis, metric="test_mse", **fixed):
        """``[(x, mean, std), ...]`` along ``x_axis``, optionally filtered."""
        pts = [
            (c.coords[x_axis], c.mean(metric), c.std(metric))
            for c in self.cells
            if all(c.coords.get(k) == v for k, v in fixed.items())
        ]
        return sorted(pts, key=lambda t: t[0])


@dataclass(frozen=True)
class Peak:
    x: float
    height: float
    index: int


# -- data plumbing -------------------------------------------------------------

@lru_cache(maxsize=4)
def _fashion(data_dir):
    return load_fashion_mnist(data_dir)


@lru_cache(maxsize=8)
def _synthetic_source(task: TaskSpec):
    return SyntheticSource(task.input_dim, task.num_classes, task.teacher_features, task.teacher_seed)


def _source(task: TaskSpec):
    if task.kind == "synthetic":
        return _synthetic_source(task)
    return PoolSource(_fashion(task.data_dir)[0])


def _test_set(spec: SweepSpec):
    seed = derive_seed(spec.base_seed, "test")
    if spec.task.kind == "synthetic":
        return _synthetic_source(spec.task).sample(spec.test_size, seed)
    return subsample(_fashion(spec.task.data_dir)[1], spec.test_size, seed)


def _rkey(spec, replicate):
    return 0 if spec.share_replicate_seeds else int(replicate)


def _train_set(spec, replicate, n, noise, member=None):
    r = _rkey(spec, replicate)
    pool = _source(spec.task).sample(max(spec.sample_sizes), derive_seed(spec.base_seed, "data", replicate=r))
    coords = {"replicate": r}
    if member:
        coords["member"] = int(member)
    pool = apply_label_noise(pool, LabelNoiseSpec(noise, derive_seed(spec.base_seed, "noise", **coords)))
    return subsample(pool, n, derive_seed(spec.base_seed, "subsample", replicate=r))


def _feature_map(spec, replicate, n_features, input_dim, member=0):
    seed = derive_seed(
        spec.base_seed, "features", replicate=_rkey(spec, replicate),
        n_features=int(n_features), member=int(member),
    )
    return sample_feature_map(input_dim, n_features, spec.variance, spec.mode, seed)


def _test_targets(spec, test, noise):
    clean = test.clean_targets()
    if not spec.noisy_test:
        return clean, None
    noisy = apply_label_noise(test, LabelNoiseSpec(noise, derive_seed(spec.base_seed, "test-noise")))
    return clean, noisy.targets()


def _record(train_pred, train_y, test_pred, test_clean, test_noisy):
    tr = score_predictions(train_pred, train_y)
    te = score_predictions(test_pred, test_clean)
    rec = {"train_mse": tr.mse, "train_err": tr.classification_error,
           "test_mse": te.mse, "test_err": te.classification_error}
    if test_noisy is not None:
        tn = score_predictions(test_pred, test_noisy)
        rec["noisy_test_mse"] = tn.mse
        rec["noisy_test_err"] = tn.classification_error
    return rec


def _fit(spec, phi, y, solver=None):
    solver = solver or spec.solver
    sls = SpectralLeastSquares(phi)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DivergentStepWarning)
        coef = solve_with(sls, y, solver)
    divergent = solver.is_gd and sls.is_divergent(solver.learning_rate(0, sls.s_max))
    return coef, divergent


def ensemble_predictions(train, inputs_list, feature_maps, solver: SolverSpec):
    """Average the predictions of one model per feature map, all trained on
    ``train``. Returns one averaged prediction matrix per entry of
    ``inputs_list`` plus the per-member predictions."""
    y = train.targets()
    members = []
    for fmap in feature_maps:
        phi = apply_feature_map(fmap, train.inputs)
        coef = solve_with(SpectralLeastSquares(phi), y, solver)
        members.append([apply_feature_map(fmap, X) @ coef for X in inputs_list])
    means = [np.mean([m[i] for m in members], axis=0) for i in range(len(inputs_list))]
    return means, members


# -- jobs (top-level so worker processes can import them) -------------------------

def _job_single(spec, coords, replicate):
    D, n, p = coords["n_features"], coords["n_samples"], coords["noise"]
    train = _train_set(spec, replicate, n, p)
    test = _test_set(spec)
    clean, noisy = _test_targets(spec, test, p)
    fmap = _feature_map(spec, replicate, D, train.input_dim)
    phi = apply_feature_map(fmap, train.inputs)
    y = train.targets()
    coef, divergent = _fit(spec, phi, y)
    rec = _record(phi @ coef, y, apply_feature_map(fmap, test.inputs) @ coef, clean, noisy)
    if spec.solver.is_gd:
        rec["divergent"] = bool(divergent)
    return [(coords, rec)]


def _job_ensemble(spec, coords, replicate):
    D, n, p = coords["n_features"], coords["n_samples"], coords["noise"]
    test = _test_set(spec)
    clean, noisy = _test_targets(spec, test, p)
    k = spec.ensemble_k
    trains = [
        _train_set(spec, replicate, n, p, member=j if spec.ensemble_independent_noise else None)
        for j in range(k)
    ]
    y0 = trains[0].targets()
    fmaps = [_feature_map(spec, replicate, D, trains[0].input_dim, member=j) for j in range(k)]
    train_preds, test_preds = [], []
    member_mse, member_err = [], []
    for train, fmap in zip(trains, fmaps):
        phi = apply_feature_map(fmap, train.inputs)
        coef, _ = _fit(spec, phi, train.targets())
        # train metrics use the first member's training set
        train_preds.append(apply_feature_map(fmap, trains[0].inputs) @ coef)
        pred = apply_feature_map(fmap, test.inputs) @ coef
        test_preds.append(pred)
        m = score_predictions(pred, clean)
        member_mse.append(m.mse)
        member_err.append(m.classification_error)
    rec = _record(np.mean(train_preds, axis=0), y0, np.mean(test_preds, axis=0), clean, noisy)
    rec["member_test_mse"] = float(np.mean(member_mse))
    rec["member_test_err"] = float(np.mean(member_err))
    return [(coords, rec)]


def _job_ridge(spec, coords_list, replicate):
    c0 = coords_list[0]
    D, n, p = c0["n_features"], c0["n_samples"], c0["noise"]
    train = _train_set(spec, replicate, n, p)
    test = _test_set(spec)
    clean, noisy = _test_targets(spec, test, p)
    fmap = _feature_map(spec, replicate, D, train.input_dim)
    phi = apply_feature_map(fmap, train.inputs)
    phi_test = apply_feature_map(fmap, test.inputs)
    y = train.targets()
    sls = SpectralLeastSquares(phi)
    out = []
    for coords in coords_list:
        coef = sls.ridge(y, coords["ridge_lambda"], spec.solver.rank_tol)
        out.append((coords, _record(phi @ coef, y, phi_test @ coef, clean, noisy)))
    return out


def _job_epochs(spec, coords_list, replicate):
    c0 = coords_list[0]
    D, n, p = c0["n_features"], c0["n_samples"], c0["noise"]
    train = _train_set(spec, replicate, n, p)
    test = _test_set(spec)
    clean, noisy = _test_targets(spec, test, p)
    fmap = _feature_map(spec, replicate, D, train.input_dim)
    phi = apply_feature_map(fmap, train.inputs)
    phi_test = apply_feature_map(fmap, test.inputs)
    y = train.targets()
    steps = [c["steps"] for c in coords_list]
    solver = replace(spec.solver, method="gd-iterative", num_steps=steps[-1])
    s_max = float(np.linalg.norm(phi, 2))
    divergent = abs(1 - solver.learning_rate(0, s_max) * s_max**2) > 1
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DivergentStepWarning)
        snaps = gd_iterative(phi, y, solver, steps)
    out = []
    for coords, snap in zip(coords_list, snaps):
        rec = _record(phi @ snap.coef, y, phi_test @ snap.coef, clean, noisy)
        rec["train_mse"] = snap.train_mse
        rec["divergent"] = bool(divergent)
        out.append((coords, rec))
    return out


def _job_emc(spec, coords):
    template = spec.solver
    method = "gd-closed-form" if template.schedule == "constant" else "gd-iterative"
    proc = TrainingProcedure(
        coords["n_features"],
        solver=replace(template, method=method, num_steps=coords["steps"]),
        variance=spec.variance,
        mode=spec.mode,
        noise_p=coords["noise"],
    )
    n_max = spec.emc_n_max or 4 * max(coords["n_features"], coords["n_samples"])
    est = estimate_emc(proc, _source(spec.task), spec.emc_epsilon, n_max, spec.emc_trials, spec.base_seed)
    return coords, {
        "emc": est.n_star,
        "emc_bracket": list(est.bracket),
        "emc_censored": est.censored,
        "emc_monotonicity_flag": est.monotonicity_flag,
    }


def _call(args):
    fn, a = args
    return fn(*a)


def _execute(jobs, workers):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_call, jobs))
    return [_call(j) for j in jobs]


def _coords(D=None, n=None, p=None, steps=None, lam=None):
    return {"n_features": D, "n_samples": n, "noise": p, "steps": steps, "ridge_lambda": lam}


def _assemble(spec, kind, axes, coords_list, job_results, extras=None):
    by_key = {json.dumps(c, sort_keys=True): [] for c in coords_list}
    for group in job_results:
        for coords, rec in group:
            by_key[json.dumps(coords, sort_keys=True)].append(rec)
    extras = extras or {}
    cells = []
    for c in coords_list:
        key = json.dumps(c, sort_keys=True)
        cells.append(Cell(dict(c), tuple(by_key[key]), dict(extras.get(key, {}))))
    return SweepResult(kind, spec, tuple(axes), tuple(cells))


def _require_single(spec, *names):
    for name in names:
        if len(getattr(spec, name)) != 1:
            raise InputError(f"{name} must hold exactly one value for this sweep")


def _solver_coords(spec):
    steps = spec.solver.num_steps if spec.solver.is_gd else None
    lam = spec.solver.ridge_lambda if spec.solver.method == "ridge" else None
    return steps, lam


def _single_jobs(spec, coords_list, fn=_job_single):
    # replicate-major order; any order gives the same result
    return [(fn, (spec, c, r)) for r in range(spec.replicates) for c in coords_list]


# -- public runners ------------------------------------------------------------

def run_model_wise(spec: SweepSpec, workers=1) -> SweepResult:
    """Sweep the number of random features at fixed sample size and noise."""
    _require_single(spec, "sample_sizes", "noise_levels")
    steps, lam = _solver_coords(spec)
    n, p = spec.sample_sizes[0], spec.noise_levels[0]
    coords = [_coords(D, n, p, steps, lam) for D in spec.model_dims]
    return _assemble(spec, "model", ("n_features",), coords, _execute(_single_jobs(spec, coords), workers))


def run_sample_wise(spec: SweepSpec, workers=1) -> SweepResult:
    """Sweep the training-set size (nested subsets) at fixed feature count."""
    _require_single(spec, "model_dims", "noise_levels")
    steps, lam = _solver_coords(spec)
    D, p = spec.model_dims[0], spec.noise_levels[0]
    coords = [_coords(D, n, p, steps, lam) for n in spec.sample_sizes]
    return _assemble(spec, "samples", ("n_samples",), coords, _execute(_single_jobs(spec, coords), workers))


def run_grid(spec: SweepSpec, workers=1) -> SweepResult:
    """Full cross product of feature counts and sample sizes at fixed noise."""
    _require_single(spec, "noise_levels")
    steps, lam = _solver_coords(spec)
    p = spec.noise_levels[0]
    coords = [_coords(D, n, p, steps, lam) for n in spec.sample_sizes for D in spec.model_dims]
    return _assemble(
        spec, "grid", ("n_samples", "n_features"), coords, _execute(_single_jobs(spec, coords), workers)
    )


def ensemble_run(spec: SweepSpec, workers=1) -> SweepResult:
    """Model-wise sweep where each cell averages ``ensemble_k`` models with
    independent feature maps (shared training data unless
    ``ensemble_independent_noise``)."""
    _require_single(spec, "sample_sizes", "noise_levels")
    steps, lam = _solver_coords(spec)
    n, p = spec.sample_sizes[0], spec.noise_levels[0]
    coords = [_coords(D, n, p, steps, lam) for D in spec.model_dims]
    jobs = _single_jobs(spec, coords, _job_ensemble)
    return _assemble(spec, "ensemble", ("n_features",), coords, _execute(jobs, workers))


def run_ridge_sweep(spec: SweepSpec, workers=1) -> SweepResult:
    """Sweep the ridge penalty at fixed (D, n, p); ``lambda = 0`` (the
    minimum-norm solution) is always the leftmost cell."""
    _require_single(spec, "model_dims", "sample_sizes", "noise_levels")
    lams = sorted(set(float(x) for x in spec.ridge_lambdas) | {0.0})
    D, n, p = spec.model_dims[0], spec.sample_sizes[0], spec.noise_levels[0]
    coords = [_coords(D, n, p, None, lam) for lam in lams]
    jobs = [(_job_ridge, (spec, coords, r)) for r in range(spec.replicates)]
    return _assemble(spec, "ridge", ("ridge_lambda",), coords, _execute(jobs, workers))


def run_epoch_wise(spec: SweepSpec, workers=1) -> SweepResult:
    """Snapshots of explicit gradient descent at ``step_counts``; optionally
    the EMC of the procedure stopped at each step count."""
    _require_single(spec, "model_dims", "sample_sizes", "noise_levels")
    if not spec.solver.is_gd:
        raise InputError("epoch-wise sweeps need a gradient-descent solver template")
    D, n, p = spec.model_dims[0], spec.sample_sizes[0], spec.noise_levels[0]
    steps = sorted(set(spec.step_counts))
    coords = [_coords(D, n, p, t, None) for t in steps]
    jobs = [(_job_epochs, (spec, coords, r)) for r in range(spec.replicates)]
    if spec.record_emc:
        jobs += [(_job_emc, (spec, c)) for c in coords]
    results = _execute(jobs, workers)
    groups = results[: spec.replicates]
    extras = {json.dumps(c, sort_keys=True): e for c, e in results[spec.replicates:]}
    return _assemble(spec, "epochs", ("steps",), coords, groups, extras)


RUNNERS = {
    "model": run_model_wise,
    "samples": run_sample_wise,
    "epochs": run_epoch_wise,
    "ridge": run_ridge_sweep,
    "grid": run_grid,
    "ensemble": ensemble_run,
}


def run(kind, spec, workers=1) -> SweepResult:
    if kind not in RUNNERS:
        raise InputError(f"unknown sweep kind {kind!r}; expected one of {sorted(RUNNERS)}")
    return RUNNERS[kind](spec, workers=workers)


# -- analysis --------------------------------------------------------------------

def _smooth(values, window):
    h = window // 2
    out = np.empty(len(values))
    for i in range(len(values)):
        out[i] = np.mean(values[max(0, i - h): i + h + 1])
    return out


def locate_peak(curve, smoothing_window=3) -> Optional[Peak]:
    """Find an interior bump in a ``[(x, mean, std), ...]`` curve.

    Means are smoothed by a centred moving average (truncated at the ends);
    stds are combined in quadrature over the same window. Ties in the
    smoothed interior argmax go to the largest raw mean. The argmax counts as a peak only if it exceeds each endpoint by at least the
    pooled standard deviation ``sqrt((sd_peak**2 + sd_end**2) / 2)``.
    """
    if smoothing_window < 1 or smoothing_window % 2 == 0:
        raise InputError("smoothing_window must be a positive odd integer")
    if len(curve) < 3:
        return None
    xs = [c[0] for c in curve]
    raw = np.array([c[1] for c in curve], dtype=float)
    means = _smooth(raw, smoothing_window)
    sds = np.sqrt(_smooth(np.array([c[2] for c in curve], dtype=float) ** 2, smoothing_window))
    inner = means[1:-1]
    # smoothing flattens a one-point spike; break ties on the raw means
    tied = np.flatnonzero(inner >= inner.max() - 1e-12 * abs(inner.max()))
    i = 1 + int(tied[np.argmax(raw[1:-1][tied])])
    for end in (0, len(curve) - 1):
        pooled = np.sqrt((sds[i] ** 2 + sds[end] ** 2) / 2)
        if not means[i] - means[end] >= pooled or means[i] <= means[end]:
            return None
    return Peak(xs[i], float(means[i]), i)


def pooled_std(a, b) -> float:
    return float(np.sqrt((a**2 + b**2) / 2))


# -- persistence -----------------------------------------------------------------

def to_document(result: SweepResult) -> dict:
    cells = []
    for c in result.cells:
        names = c.metric_names()
        cells.append({
            "coords": c.coords,
            "replicates": list(c.replicates),
            "extras": c.extras,
            "mean": {m: c.mean(m) for m in names},
            "std": {m: c.std(m) for m in names},
        })
    return {
        "schema_version": result.schema_version,
        "kind": result.kind,
        "axes": list(result.axes),
        "spec": result.spec.to_dict(),
        "cells": cells,
    }


def from_document(doc) -> SweepResult:
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise FormatError("result document has no schema_version")
    version = doc["schema_version"]
    if not isinstance(version, int):
        raise FormatError(f"schema_version must be an integer, got {version!r}")
    if version > SCHEMA_VERSION:
        raise SchemaVersionError(
            f"result uses schema_version {version}; this reader understands up to {SCHEMA_VERSION}"
        )
    try:
        spec = SweepSpec.from_dict(doc["spec"])
        cells = tuple(
            Cell(dict(c["coords"]), tuple(dict(r) for r in c["replicates"]), dict(c.get("extras", {})))
            for c in doc["cells"]
        )
        return SweepResult(doc["kind"], spec, tuple(doc["axes"]), cells, version)
    except (KeyError, TypeError, InputError) as exc:
        raise FormatError(f"malformed result document: {exc}") from exc


def persist(result: SweepResult, path) -> None:
    Path(path).write_text(json.dumps(to_document(result), indent=1, sort_keys=True) + "\n")


def load(path) -> SweepResult:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"result file {path} is not valid JSON: {exc.msg}", offset=exc.pos) from exc
    return from_document(doc)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(result: SweepResult) -> str:
    """One row per cell and replicate; fixed column set."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for c in result.cells:
        for r, rec in enumerate(c.replicates):
            w.writerow([_fmt(c.coords.get(k)) for k in COORDS] + [r] + [_fmt(rec.get(m)) for m in BASE_METRICS])
    return buf.getvalue()


def write_csv(result: SweepResult, path) -> None:
    Path(path).write_text(to_csv(result))
