"""Run configuration: INI-style sections of flat ``key = value`` pairs.

Example::

    [experiment]
    kind = model
    dataset = synthetic

    [sweep]
    model_dims = geom 20 2000 12
    sample_sizes = 200
    noise_levels = 0.1
    replicates = 5

    [solver]
    method = min-norm-svd

Axis values are comma separated, or ``geom START STOP COUNT`` for
log-spaced integers (duplicates after rounding are dropped).
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from ..data import data_dir_from_env
from ..exceptions import InputError
from ..solver import SolverSpec
from ..sweep import SweepSpec, TaskSpec

EXPERIMENTS = ("model", "samples", "epochs", "ridge", "grid", "emc", "ensemble")
DATASETS = ("synthetic", "fashion-mnist")

_INT_AXES = ("model_dims", "sample_sizes", "step_counts")
_FLOAT_AXES = ("noise_levels", "ridge_lambdas")


@dataclass
class RunConfig:
    experiment: str = "model"
    dataset: str = "synthetic"
    sweep: SweepSpec = field(default_factory=SweepSpec)
    out: str = "results"
    plots: bool = True
    workers: int = 1
    # emc subcommand
    emc_n_features: int = 50
    emc_n_samples_max: Optional[int] = None
    emc_metric: str = "classification"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise InputError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        if self.dataset not in DATASETS:
            raise InputError(f"unknown dataset {self.dataset!r}; expected one of {DATASETS}")


def parse_axis(text, kind=int):
    text = text.strip()
    if text.startswith("geom"):
        parts = text.split()
        if len(parts) != 4:
            raise InputError(f"expected 'geom START STOP COUNT', got {text!r}")
        start, stop, count = float(parts[1]), float(parts[2]), int(parts[3])
        vals = np.geomspace(start, stop, count)
        if kind is int:
            return tuple(sorted(set(int(round(v)) for v in vals)))
        return tuple(float(v) for v in vals)
    try:
        return tuple(kind(float(v)) if kind is int else kind(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise InputError(f"cannot parse axis {text!r}: {exc}") from exc


def _bool(text):
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise InputError(f"expected a boolean, got {text!r}")


def _coerce(cls, key, text):
    """Convert a config string to the type of dataclass field ``key``."""
    by_name = {f.name: f for f in fields(cls)}
    if key not in by_name:
        raise InputError(f"unknown key {key!r} for {cls.__name__}")
    # annotations are strings under postponed evaluation
    ftype = str(by_name[key].type)
    text = text.strip()
    if text.lower() in ("", "none"):
        return None
    if key in _INT_AXES:
        return parse_axis(text, int)
    if key in _FLOAT_AXES:
        return parse_axis(text, float)
    try:
        if "bool" in ftype:
            return _bool(text)
        if "int" in ftype:
            return int(text)
        if "float" in ftype:
            return float(text)
    except ValueError as exc:
        raise InputError(f"bad value for {key}: {text!r}") from exc
    return text


def _merge(cls, obj, items):
    updates = {k: _coerce(cls, k, v) for k, v in items}
    try:
        return replace(obj, **updates)
    except TypeError as exc:
        raise InputError(str(exc)) from exc


def load_config(path=None, overrides=()) -> RunConfig:
    """Read ``path`` (if given) and apply ``section.key=value`` overrides."""
    cp = configparser.ConfigParser(interpolation=None)
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"config file not found: {path}")
        try:
            cp.read_string(path.read_text(), source=str(path))
        except configparser.Error as exc:
            raise InputError(f"cannot parse config {path}: {exc}") from exc
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise InputError(f"override must look like section.key=value, got {item!r}")
        lhs, value = item.split("=", 1)
        section, key = lhs.split(".", 1)
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, key, value)

    known = {"experiment", "sweep", "task", "solver", "features", "emc", "output"}
    unknown = set(cp.sections()) - known
    if unknown:
        raise InputError(f"unknown config sections {sorted(unknown)}")

    exp = dict(cp.items("experiment")) if cp.has_section("experiment") else {}
    experiment = exp.pop("kind", "model")
    dataset = exp.pop("dataset", "synthetic")
    if exp:
        raise InputError(f"unknown keys in [experiment]: {sorted(exp)}")

    task = TaskSpec()
    if cp.has_section("task"):
        items = dict(cp.items("task"))
        items.pop("kind", None)
        task = _merge(TaskSpec, TaskSpec(kind="synthetic"), items.items())
    if dataset == "fashion-mnist":
        data_dir = task.data_dir or str(data_dir_from_env())
        task = replace(task, kind="fashion-mnist", data_dir=data_dir, input_dim=784, num_classes=10)

    solver = SolverSpec()
    if cp.has_section("solver"):
        solver = _merge(SolverSpec, solver, cp.items("solver"))

    sweep = SweepSpec(task=task, solver=solver)
    if cp.has_section("sweep"):
        sweep = _merge(SweepSpec, sweep, cp.items("sweep"))
    if cp.has_section("features"):
        sweep = _merge(SweepSpec, sweep, cp.items("features"))
    emc_items = dict(cp.items("emc")) if cp.has_section("emc") else {}
    rc_updates = {}
    for key in ("n_features", "n_samples_max", "metric"):
        if key in emc_items:
            raw = emc_items.pop(key)
            rc_updates[f"emc_{key}"] = raw.strip() if key == "metric" else int(raw)
    sweep = _merge(SweepSpec, sweep, [(f"emc_{k}", v) for k, v in emc_items.items()])

    out = dict(cp.items("output")) if cp.has_section("output") else {}
    rc = RunConfig(experiment=experiment, dataset=dataset, sweep=sweep, **rc_updates)
    if "dir" in out:
        rc.out = out.pop("dir")
    if "plots" in out:
        rc.plots = _bool(out.pop("plots"))
    if "workers" in out:
        rc.workers = int(out.pop("workers"))
    if out:
        raise InputError(f"unknown keys in [output]: {sorted(out)}")
    return rc


def default_data_dir() -> str:
    return os.environ.get("DDLAB_DATA_DIR", str(data_dir_from_env()))
