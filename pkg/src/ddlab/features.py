"""Frozen random Fourier feature maps: the fixed first layer of a two-layer
model whose second layer is fit by least squares."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import InputError
from .validation import as_matrix, check_positive

MODES = ("cosine", "complex-pair")


def default_scale(num_features: int, mode: str = "cosine") -> float:
    # cos/sin pairs already carry unit power per frequency
    return float(np.sqrt((2.0 if mode == "cosine" else 1.0) / num_features))


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Random first layer ``x -> scale * cos(x @ weights + phases)``.

    In ``complex-pair`` mode each frequency contributes a cosine and a sine
    column (the real and imaginary parts of ``exp(-i <w, x>)``), so the
    number of real output features is ``2 * num_frequencies``.
    """

    weights: np.ndarray
    phases: np.ndarray
    variance: float
    mode: str
    scale: float
    seed: int

    def __post_init__(self):
        for name in ("weights", "phases"):
            view = np.asarray(getattr(self, name), dtype=np.float64).view()
            view.setflags(write=False)
            object.__setattr__(self, name, view)

    @property
    def input_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def num_frequencies(self) -> int:
        return self.weights.shape[1]

    @property
    def n_outputs(self) -> int:
        """Number of real columns produced (effective trainable count)."""
        return self.num_frequencies * (2 if self.mode == "complex-pair" else 1)

    def __eq__(self, other):
        if not isinstance(other, FeatureMap):
            return NotImplemented
        return (
            self.mode == other.mode
            and self.variance == other.variance
            and self.scale == other.scale
            and self.seed == other.seed
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.phases, other.phases)
        )

    __hash__ = None

    def transform(self, X):
        return apply_feature_map(self, X)

    def gaussian_mean(self) -> np.ndarray:
        """Expected feature vector for standard Gaussian inputs.

        ``E cos(<w, x> + b) = cos(b) exp(-|w|^2 / 2)`` and ``E sin(<w, x>) = 0``.
        """
        decay = np.exp(-0.5 * np.sum(self.weights**2, axis=0))
        if self.mode == "cosine":
            return self.scale * np.cos(self.phases) * decay
        out = np.zeros(self.n_outputs)
        out[0::2] = self.scale * decay
        return out


def sample_feature_map(input_dim, num_features, variance=None, mode="cosine", seed=0, scale=None):
    """Draw a feature map deterministically from ``seed``.

    ``variance`` defaults to ``1 / input_dim``; ``scale`` to
    :func:`default_scale`. Weights are i.i.d. ``N(0, variance)``; phases are
    uniform on ``[0, 2 pi)`` in cosine mode and zero in complex-pair mode.
    """
    if int(input_dim) != input_dim or input_dim < 1:
        raise InputError(f"input_dim must be a positive integer, got {input_dim!r}")
    if int(num_features) != num_features or num_features < 1:
        raise InputError(f"num_features must be a positive integer, got {num_features!r}")
    if mode not in MODES:
        raise InputError(f"unknown feature mode {mode!r}; expected one of {MODES}")
    input_dim, num_features = int(input_dim), int(num_features)
    variance = 1.0 / input_dim if variance is None else float(variance)
    check_positive(variance, "variance")
    scale = default_scale(num_features, mode) if scale is None else float(scale)
    check_positive(scale, "scale")

    rng = np.random.default_rng(seed)
    weights = rng.normal(0.0, np.sqrt(variance), size=(input_dim, num_features))
    if mode == "cosine":
        phases = rng.uniform(0.0, 2 * np.pi, size=num_features)
    else:
        phases = np.zeros(num_features)
    return FeatureMap(weights, phases, variance, mode, scale, int(seed))


def apply_feature_map(fmap: FeatureMap, X) -> np.ndarray:
    """Design matrix ``Phi`` for inputs ``X`` of shape ``(n, input_dim)``."""
    X = as_matrix(X, "inputs")
    if X.shape[1] != fmap.input_dim:
        raise InputError(
            f"inputs have {X.shape[1]} columns but the feature map expects {fmap.input_dim}"
        )
    proj = X @ fmap.weights
    if fmap.mode == "cosine":
        return fmap.scale * np.cos(proj + fmap.phases)
    out = np.empty((X.shape[0], fmap.n_outputs))
    out[:, 0::2] = np.cos(proj)
    out[:, 1::2] = np.sin(proj)
    out *= fmap.scale
    return out


class RandomFourierFeatures(TransformerMixin, BaseEstimator):
    """Scikit-learn transformer around :class:`FeatureMap`.

    ``fit`` only reads the input dimension and samples the frozen map;
    the training data never influences the weights.

    Parameters
    ----------
    n_features : int, default=100
        Number of frequencies ``D``.
    variance : float or None, default=None
        Weight variance; ``None`` means ``1 / n_features_in_``.
    mode : {"cosine", "complex-pair"}, default="cosine"
    scale : float or None, default=None
        Output scale; ``None`` uses ``sqrt(2 / D)`` (cosine) or
        ``sqrt(1 / D)`` (complex-pair).
    random_state : int, default=0
        Seed for the map.

    Attributes
    ----------
    feature_map_ : FeatureMap
    n_features_in_ : int
    """

    def __init__(self, n_features=100, variance=None, mode="cosine", scale=None, random_state=0):
        self.n_features = n_features
        self.variance = variance
        self.mode = mode
        self.scale = scale
        self.random_state = random_state

    def fit(self, X, y=None):
        X = as_matrix(X, "X")
        self.n_features_in_ = X.shape[1]
        self.feature_map_ = sample_feature_map(
            X.shape[1], self.n_features, self.variance, self.mode, self.random_state, self.scale
        )
        return self

    def transform(self, X):
        check_is_fitted(self, "feature_map_")
        return apply_feature_map(self.feature_map_, X)
