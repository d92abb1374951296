"""Least-squares engines for a linear model on frozen features.

All engines solve ``Phi @ beta ~ Y`` column by column; multi-output targets
share one factorization. Gradient descent minimises ``0.5 * ||Phi beta - Y||**2``
from ``beta = 0`` so that ``t`` explicit steps of size ``eta`` coincide with
the spectral closed form

    beta_t = V diag((1 - (1 - eta s_i**2)**t) / s_i) U^T Y,

and the iteration is stable exactly when ``eta * s_max**2 < 2``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .exceptions import ContractError, DivergentStepWarning, InputError
from .validation import as_matrix, check_design_targets

METHODS = ("min-norm-svd", "ridge", "gd-closed-form", "gd-iterative")
SCHEDULES = ("constant", "inverse-sqrt")

DEFAULT_RANK_TOL = 1e-10


@dataclass(frozen=True)
class SolverSpec:
    """Which least-squares engine to run and with what parameters.

    ``step_size`` is the constant step, or the initial rate ``gamma_0`` of the
    inverse-square-root schedule ``gamma_0 / sqrt(1 + t // schedule_period)``.
    With ``relative_step`` the step is divided by ``s_max**2`` of the design
    matrix it is applied to, so ``step_size=1.0`` means ``eta = 1 / s_max**2``.
    """

    method: str = "min-norm-svd"
    ridge_lambda: float = 0.0
    rank_tol: float = DEFAULT_RANK_TOL
    step_size: float = 0.1
    num_steps: int = 0
    schedule: str = "constant"
    schedule_period: int = 512
    relative_step: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise InputError(f"unknown solver method {self.method!r}; expected one of {METHODS}")
        if self.schedule not in SCHEDULES:
            raise InputError(f"unknown schedule {self.schedule!r}; expected one of {SCHEDULES}")
        if not self.ridge_lambda >= 0:
            raise InputError(f"ridge_lambda must be >= 0, got {self.ridge_lambda!r}")
        if not self.rank_tol > 0:
            raise InputError(f"rank_tol must be > 0, got {self.rank_tol!r}")
        if not self.step_size > 0:
            raise InputError(f"step_size must be > 0, got {self.step_size!r}")
        if int(self.num_steps) != self.num_steps or self.num_steps < 0:
            raise InputError(f"num_steps must be a non-negative integer, got {self.num_steps!r}")
        if int(self.schedule_period) != self.schedule_period or self.schedule_period < 1:
            raise InputError(f"schedule_period must be a positive integer, got {self.schedule_period!r}")
        if self.method == "gd-closed-form" and self.schedule != "constant":
            raise InputError("the closed form only covers a constant step; use gd-iterative")

    @property
    def is_gd(self) -> bool:
        return self.method.startswith("gd-")

    def with_steps(self, num_steps: int) -> "SolverSpec":
        return replace(self, num_steps=int(num_steps))

    def learning_rate(self, t: int, s_max: float = 1.0) -> float:
        """Step size used for the update from step ``t`` to ``t + 1``."""
        base = self.step_size / s_max**2 if self.relative_step else self.step_size
        if self.schedule == "constant":
            return base
        return base / math.sqrt(1 + t // self.schedule_period)


@dataclass(frozen=True)
class Metrics:
    mse: float
    classification_error: Optional[float]


@dataclass(frozen=True)
class Snapshot:
    step: int
    coef: np.ndarray
    train_mse: float


class SpectralLeastSquares:
    """Thin SVD of a design matrix, reused across targets and solvers.

    >>> import numpy as np
    >>> sls = SpectralLeastSquares(np.array([[1.0, 1.0]]))
    >>> sls.min_norm(np.array([[2.0]])).ravel()
    array([1., 1.])
    """

    def __init__(self, phi):
        self.phi = as_matrix(phi, "design matrix")
        self.U, self.s, self.Vt = np.linalg.svd(self.phi, full_matrices=False)

    @property
    def s_max(self) -> float:
        return float(self.s[0]) if self.s.size else 0.0

    def rank(self, rank_tol=DEFAULT_RANK_TOL) -> int:
        return int(np.count_nonzero(self.s > rank_tol * self.s_max))

    def _apply(self, gains, y):
        # beta = V diag(gains) U^T Y
        return self.Vt.T @ (gains[:, None] * (self.U.T @ y))

    def _targets(self, y):
        y = as_matrix(y, "targets", allow_1d=True)
        if y.shape[0] != self.phi.shape[0]:
            raise ContractError(
                f"design matrix has {self.phi.shape[0]} rows but targets have {y.shape[0]}"
            )
        return y

    def min_norm(self, y, rank_tol=DEFAULT_RANK_TOL):
        y = self._targets(y)
        keep = self.s > rank_tol * self.s_max
        gains = np.zeros_like(self.s)
        gains[keep] = 1.0 / self.s[keep]
        return self._apply(gains, y)

    def ridge(self, y, lam, rank_tol=DEFAULT_RANK_TOL):
        if not lam >= 0:
            raise InputError(f"ridge lambda must be >= 0, got {lam!r}")
        if lam == 0:
            return self.min_norm(y, rank_tol)
        y = self._targets(y)
        return self._apply(self.s / (self.s**2 + lam), y)

    def gd_gains(self, eta, t):
        s = self.s
        a = eta * s**2
        out = np.zeros_like(s)
        pos = s > 0
        small = pos & (a < 1)
        # 1 - (1 - a)^t through expm1/log1p keeps tiny singular values accurate
        out[small] = -np.expm1(t * np.log1p(-a[small])) / s[small]
        big = pos & ~small
        out[big] = (1.0 - (1.0 - a[big]) ** t) / s[big]
        return out

    def gd(self, y, eta, t):
        y = self._targets(y)
        return self._apply(self.gd_gains(eta, t), y)

    def is_divergent(self, eta) -> bool:
        return abs(1.0 - eta * self.s_max**2) > 1.0


def _warn_if_divergent(eta, s_max):
    if abs(1.0 - eta * s_max**2) > 1.0:
        warnings.warn(
            f"step size {eta:.3g} exceeds the stability limit 2/s_max^2 = {2 / s_max**2:.3g}",
            DivergentStepWarning,
            stacklevel=3,
        )
        return True
    return False


def min_norm_solve(phi, y, rank_tol=DEFAULT_RANK_TOL):
    """Minimum-Frobenius-norm least-squares solution via the SVD pseudo-inverse.

    Singular values below ``rank_tol * s_max`` are treated as zero. This is
    the limit of gradient flow on the squared loss started at zero.
    """
    if not rank_tol > 0:
        raise InputError(f"rank_tol must be > 0, got {rank_tol!r}")
    phi, y = check_design_targets(phi, y)
    return SpectralLeastSquares(phi).min_norm(y, rank_tol)


def ridge_solve(phi, y, lam, rank_tol=DEFAULT_RANK_TOL):
    """``argmin ||Phi b - Y||^2 + lam ||b||^2`` in spectral form.

    ``lam = 0`` coalesces with :func:`min_norm_solve`, so rank-deficient
    systems still get the minimum-norm answer.
    """
    if not lam >= 0:
        raise InputError(f"ridge lambda must be >= 0, got {lam!r}")
    phi, y = check_design_targets(phi, y)
    return SpectralLeastSquares(phi).ridge(y, lam, rank_tol)


def gd_closed_form(phi, y, eta, t):
    """Coefficients after ``t`` constant-step gradient descent steps from zero.

    Emits :class:`DivergentStepWarning` when ``|1 - eta s_max^2| > 1``; the
    result is still returned.
    """
    if not eta > 0:
        raise InputError(f"step size must be > 0, got {eta!r}")
    if int(t) != t or t < 0:
        raise InputError(f"step count must be a non-negative integer, got {t!r}")
    phi, y = check_design_targets(phi, y)
    sls = SpectralLeastSquares(phi)
    _warn_if_divergent(eta, sls.s_max)
    return sls.gd(y, eta, int(t))


def gd_iterative(phi, y, spec: SolverSpec, record_at):
    """Explicit full-batch gradient descent with snapshots.

    Returns a list of :class:`Snapshot` for every step count in
    ``record_at`` (ascending, last entry equal to ``spec.num_steps``). The
    update is ``beta <- beta - gamma(t) * Phi^T (Phi beta - Y)``.
    """
    record_at = [int(r) for r in record_at]
    if not record_at:
        raise InputError("record_at must name at least one step count")
    if any(b < a for a, b in zip(record_at, record_at[1:])):
        raise InputError("record_at must be sorted ascending")
    if record_at[0] < 0:
        raise InputError("record_at entries must be non-negative")
    if record_at[-1] != spec.num_steps:
        raise InputError(
            f"last recorded step {record_at[-1]} must equal num_steps {spec.num_steps}"
        )
    phi, y = check_design_targets(phi, y)
    n, d = phi.shape
    s_max = float(np.linalg.norm(phi, 2))
    if spec.relative_step and s_max == 0:
        raise InputError("relative step size needs a non-zero design matrix")
    _warn_if_divergent(spec.learning_rate(0, s_max), s_max)

    # Gram form is cheaper when samples outnumber features.
    use_gram = d < n
    if use_gram:
        gram = phi.T @ phi
        phi_y = phi.T @ y

    beta = np.zeros((d, y.shape[1]))
    out = []
    pending = iter(record_at)
    nxt = next(pending)
    t = 0
    while True:
        while nxt is not None and nxt == t:
            resid = phi @ beta - y
            out.append(Snapshot(t, beta.copy(), float(np.mean(resid**2))))
            nxt = next(pending, None)
        if nxt is None:
            break
        eta = spec.learning_rate(t, s_max)
        if use_gram:
            beta -= eta * (gram @ beta - phi_y)
        else:
            beta -= eta * (phi.T @ (phi @ beta - y))
        t += 1
    return out


def fit_coefficients(phi, y, spec: SolverSpec):
    """Dispatch to the engine named by ``spec.method``."""
    if spec.method == "gd-iterative":
        return gd_iterative(phi, y, spec, [spec.num_steps])[-1].coef
    phi, y = check_design_targets(phi, y)
    sls = SpectralLeastSquares(phi)
    return solve_with(sls, y, spec)


def solve_with(sls: SpectralLeastSquares, y, spec: SolverSpec):
    """Run a spectral engine on an existing factorization."""
    if spec.method == "min-norm-svd":
        return sls.min_norm(y, spec.rank_tol)
    if spec.method == "ridge":
        return sls.ridge(y, spec.ridge_lambda, spec.rank_tol)
    if spec.method == "gd-closed-form":
        eta = spec.learning_rate(0, sls.s_max)
        _warn_if_divergent(eta, sls.s_max)
        return sls.gd(y, eta, spec.num_steps)
    return gd_iterative(sls.phi, y, spec, [spec.num_steps])[-1].coef


def evaluate(coef, phi, y) -> Metrics:
    """Mean squared error and, for ``k >= 2`` outputs, argmax classification
    error. Ties in the argmax go to the lowest column index."""
    phi, y = check_design_targets(phi, y)
    coef = as_matrix(coef, "coefficients", allow_1d=True)
    if coef.shape != (phi.shape[1], y.shape[1]):
        raise ContractError(
            f"coefficients of shape {coef.shape} do not match design {phi.shape} "
            f"and targets {y.shape}"
        )
    return score_predictions(phi @ coef, y)


def score_predictions(pred, y) -> Metrics:
    pred = np.asarray(pred, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
        pred = pred.reshape(y.shape)
    mse = float(np.mean((pred - y) ** 2))
    err = None
    if y.shape[1] >= 2:
        err = float(np.mean(np.argmax(pred, axis=1) != np.argmax(y, axis=1)))
    return Metrics(mse, err)
