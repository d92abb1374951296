"""Effective model complexity: the largest training-set size on which a
training procedure reaches (on average) near-zero training error."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data import LabelNoiseSpec, apply_label_noise
from .exceptions import InputError
from .features import apply_feature_map, sample_feature_map
from .seeding import derive_seed
from .solver import SolverSpec, evaluate, fit_coefficients

METRICS = ("classification", "mse-threshold")
REGIMES = ("under", "critical", "over")


@dataclass(frozen=True)
class TrainingProcedure:
    """Random-feature model plus solver: maps a sample ``S`` to a predictor.

    ``feature_policy="fresh"`` draws a new feature map per trial; ``"fixed"``
    reuses ``feature_seed``. ``noise_policy="fresh"`` redraws label noise
    per trial, ``"frozen"`` reuses one noise seed for every trial.
    ``metric="mse-threshold"`` scores a trial 1 when train mse exceeds
    ``mse_tol`` and 0 otherwise.
    """

    n_features: int
    solver: SolverSpec = field(default_factory=SolverSpec)
    variance: Optional[float] = None
    mode: str = "cosine"
    feature_policy: str = "fresh"
    feature_seed: int = 0
    metric: str = "classification"
    mse_tol: float = 1e-8
    noise_p: float = 0.0
    noise_policy: str = "fresh"

    def __post_init__(self):
        if int(self.n_features) != self.n_features or self.n_features < 1:
            raise InputError(f"n_features must be a positive integer, got {self.n_features!r}")
        if self.metric not in METRICS:
            raise InputError(f"unknown metric {self.metric!r}; expected one of {METRICS}")
        if self.feature_policy not in ("fresh", "fixed"):
            raise InputError(f"unknown feature policy {self.feature_policy!r}")
        if self.noise_policy not in ("fresh", "frozen"):
            raise InputError(f"unknown noise policy {self.noise_policy!r}")

    def train_error(self, ds, feature_seed=None) -> float:
        """Fit on ``ds`` (noisy labels) and return the train-set error.

        ``feature_seed`` is ignored under the ``"fixed"`` feature policy.
        """
        if self.feature_policy == "fixed" or feature_seed is None:
            feature_seed = self.feature_seed
        fmap = sample_feature_map(ds.input_dim, self.n_features, self.variance, self.mode, feature_seed)
        phi = apply_feature_map(fmap, ds.inputs)
        y = ds.targets()
        metrics = evaluate(fit_coefficients(phi, y, self.solver), phi, y)
        if self.metric == "classification":
            return metrics.classification_error
        return float(metrics.mse > self.mse_tol)


@dataclass(frozen=True)
class EMCEstimate:
    n_star: int
    epsilon: float
    trials_per_n: int
    bracket: tuple
    curve: tuple
    monotonicity_flag: bool = False
    censored: bool = False


def _trial_dataset(proc, source, n, trial, base_seed):
    # Seeds depend on the trial only, so trial j sees nested samples as n grows.
    data_seed = derive_seed(base_seed, "data", trial=trial)
    ds = source.sample(n, data_seed)
    if proc.noise_p > 0:
        coords = {} if proc.noise_policy == "frozen" else {"trial": trial}
        ds = apply_label_noise(ds, LabelNoiseSpec(proc.noise_p, derive_seed(base_seed, "noise", **coords)))
    return ds, derive_seed(base_seed, "features", trial=trial)


def expected_train_error(proc: TrainingProcedure, source, n, trials=5, base_seed=0):
    """Monte-Carlo estimate of ``E_S[train error]`` over ``trials`` draws of
    ``n`` samples. Returns ``(mean, standard error)``."""
    if int(trials) != trials or trials < 1:
        raise InputError(f"trials must be a positive integer, got {trials!r}")
    if int(n) != n or n < 1:
        raise InputError(f"n must be a positive integer, got {n!r}")
    capacity = getattr(source, "capacity", None)
    if capacity is not None and n > capacity:
        raise InputError(f"source can supply {capacity} samples, {n} requested")
    errs = np.array(
        [proc.train_error(*_trial_dataset(proc, source, int(n), j, base_seed)) for j in range(int(trials))]
    )
    se = float(np.std(errs, ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return float(np.mean(errs)), se


def estimate_emc(proc: TrainingProcedure, source, epsilon=0.1, n_max=1024, trials=5, base_seed=0):
    """Largest ``n`` with mean train error at most ``epsilon``.

    Doubles ``n`` from 1 until the error exceeds ``epsilon`` (or ``n_max`` is
    reached), then bisects the last interval. The search assumes the error
    grows with ``n``; if two probes violate that by more than two combined
    standard errors, ``monotonicity_flag`` is set.
    """
    if not 0 <= epsilon < 1:
        raise InputError(f"epsilon must lie in [0, 1), got {epsilon!r}")
    if int(n_max) != n_max or n_max < 1:
        raise InputError(f"n_max must be a positive integer, got {n_max!r}")
    n_max = int(n_max)
    cache = {}

    def err(n):
        if n not in cache:
            cache[n] = expected_train_error(proc, source, n, trials, base_seed)
        return cache[n][0]

    def finish(n_star, bracket, censored=False):
        curve = tuple((n, m, s) for n, (m, s) in sorted(cache.items()))
        return EMCEstimate(n_star, float(epsilon), int(trials), bracket, curve,
                           _violates_monotonicity(curve), censored)

    if err(1) > epsilon:
        return finish(0, (None, 1))
    lo, hi = 1, None
    while hi is None:
        if lo == n_max:
            return finish(n_max, (n_max, None), censored=True)
        probe = min(2 * lo, n_max)
        if err(probe) <= epsilon:
            lo = probe
        else:
            hi = probe
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if err(mid) <= epsilon:
            lo = mid
        else:
            hi = mid
    return finish(lo, (lo, hi))


def _violates_monotonicity(curve) -> bool:
    for i, (_, m_i, s_i) in enumerate(curve):
        for _, m_j, s_j in curve[i + 1:]:
            if m_i - m_j > 2 * np.hypot(s_i, s_j) and m_i > m_j:
                return True
    return False


def classify_regime(emc, n, width=0.25) -> str:
    """``"under"`` if ``emc < n / (1 + width)``, ``"over"`` if
    ``emc > n (1 + width)``, otherwise ``"critical"``."""
    if not width > 0:
        raise InputError(f"width must be > 0, got {width!r}")
    if emc < n / (1 + width):
        return "under"
    if emc > n * (1 + width):
        return "over"
    return "critical"
