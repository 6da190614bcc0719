"""Random forest regressor that estimates fusion scores from raw telemetry.

Built directly on numpy: greedy variance-reduction splits, bootstrap
resampling per tree, and square-root feature subsampling. The forest learns
the analytically computed fusion score, giving a second route to the same
number that stays usable when individual metrics are noisy or missing.
The learned estimate never replaces the closed-form score; records carry
both.

Determinism: per-tree generators are pre-derived from the master seed, so
a given (data, seed) pair always yields the same forest, and the first k
trees of a large forest equal the trees of a k-tree forest.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .errors import (
    FeatureMismatchError,
    InsufficientDataError,
    MissingFeatureError,
    ModelFormatError,
    TooFewTreesError,
)
from .model import MetricSample, PresetTriple
from .scoring import score_pipeline

# Raw inputs the forest sees. Deliberately excludes jitter and overhead:
# the estimator has to reconstruct the fusion score from the remaining
# signal, which is what makes it a useful cross-check rather than a replay.
FUSION_FEATURES: tuple[str, ...] = (
    "latency_ms",
    "cpu_pct",
    "rssi_dbm",
    "packet_loss_pct",
    "energy_mj",
    "key_bytes",
)

MODEL_FORMAT = "qers-forest"
MODEL_VERSION = 1

_SSE_EPS = 1e-12


@dataclass(slots=True)
class _Node:
    feature: int = -1
    threshold: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None
    value: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


def _leaf(values: np.ndarray) -> _Node:
    return _Node(value=float(values.mean()))


def _best_split(
    X: np.ndarray, y: np.ndarray, idx: np.ndarray,
    features: np.ndarray, min_leaf: int,
) -> tuple[int, float, float] | None:
    """(feature, threshold, sse) of the best valid split, or None."""
    n = idx.size
    best: tuple[int, float, float] | None = None
    ysub = y[idx]
    for f in features:
        xs = X[idx, f]
        order = np.argsort(xs, kind="stable")
        xs_sorted = xs[order]
        ys_sorted = ysub[order]
        csum = np.cumsum(ys_sorted)
        csq = np.cumsum(ys_sorted * ys_sorted)
        left_n = np.arange(min_leaf, n - min_leaf + 1)
        if left_n.size == 0:
            continue
        # split between positions left_n-1 and left_n; only real value gaps
        distinct = xs_sorted[left_n] > xs_sorted[left_n - 1]
        if not distinct.any():
            continue
        left_sum = csum[left_n - 1]
        left_sq = csq[left_n - 1]
        right_sum = csum[-1] - left_sum
        right_sq = csq[-1] - left_sq
        right_n = n - left_n
        sse = (left_sq - left_sum * left_sum / left_n) + (
            right_sq - right_sum * right_sum / right_n)
        sse = np.where(distinct, sse, np.inf)
        j = int(np.argmin(sse))
        if math.isinf(sse[j]):
            continue
        if best is None or sse[j] < best[2]:
            threshold = (xs_sorted[left_n[j] - 1] + xs_sorted[left_n[j]]) / 2.0
            best = (int(f), float(threshold), float(sse[j]))
    return best


def _grow(
    X: np.ndarray, y: np.ndarray, idx: np.ndarray,
    depth: int, max_depth: int, min_leaf: int, n_feats: int,
    rng: np.random.Generator,
) -> _Node:
    ysub = y[idx]
    if depth >= max_depth or idx.size < 2 * min_leaf or np.ptp(ysub) < _SSE_EPS:
        return _leaf(ysub)
    features = rng.choice(X.shape[1], size=n_feats, replace=False)
    found = _best_split(X, y, idx, features, min_leaf)
    if found is None:
        return _leaf(ysub)
    feature, threshold, sse = found
    parent_sse = float(np.sum(ysub * ysub) - ysub.sum() ** 2 / idx.size)
    if sse >= parent_sse - _SSE_EPS:
        return _leaf(ysub)
    mask = X[idx, feature] <= threshold
    left = _grow(X, y, idx[mask], depth + 1, max_depth, min_leaf, n_feats, rng)
    right = _grow(X, y, idx[~mask], depth + 1, max_depth, min_leaf, n_feats, rng)
    return _Node(feature=feature, threshold=threshold, left=left, right=right)


def _predict_into(node: _Node, X: np.ndarray, rows: np.ndarray, out: np.ndarray) -> None:
    if node.is_leaf:
        out[rows] = node.value
        return
    go_left = X[rows, node.feature] <= node.threshold
    _predict_into(node.left, X, rows[go_left], out)
    _predict_into(node.right, X, rows[~go_left], out)


def _tree_predict(node: _Node, X: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0], dtype=float)
    _predict_into(node, X, np.arange(X.shape[0]), out)
    return out


class FusionForestRegressor(RegressorMixin, BaseEstimator):
    """Bootstrap ensemble of variance-reduction regression trees.

    predict() returns the tree mean clipped to the score scale.
    predict_interval() returns empirical per-tree quantiles, which is what
    the service surfaces as the estimate's uncertainty band.

    Zero-variance targets are legal and produce constant trees.
    """

    def __init__(
        self,
        n_trees: int = 100,
        max_depth: int = 12,
        min_leaf_size: int = 5,
        features_per_split: int | None = None,
        random_state: int = 0,
        feature_names: Sequence[str] | None = None,
        ms: float = 100.0,
    ):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf_size = min_leaf_size
        self.features_per_split = features_per_split
        self.random_state = random_state
        self.feature_names = feature_names
        self.ms = ms

    def fit(self, X, y):
        if self.n_trees < 1:
            raise TooFewTreesError(f"n_trees must be at least 1, got {self.n_trees}")
        if self.max_depth < 1 or self.min_leaf_size < 1:
            raise ValueError("max_depth and min_leaf_size must be at least 1")
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim != 2 or y.shape != (X.shape[0],):
            raise ValueError("X must be (n, d) and y must be (n,)")
        n, d = X.shape
        if n < 2:
            raise InsufficientDataError(f"need at least 2 rows to fit, got {n}")
        if self.feature_names is not None and len(self.feature_names) != d:
            raise ValueError(
                f"feature_names has {len(self.feature_names)} entries for {d} columns")

        n_feats = self.features_per_split or math.ceil(math.sqrt(d))
        n_feats = max(1, min(n_feats, d))
        seeds = np.random.SeedSequence(self.random_state).spawn(self.n_trees)
        self.estimators_ = []
        for seq in seeds:
            rng = np.random.default_rng(seq)
            bootstrap = rng.integers(0, n, size=n)
            self.estimators_.append(
                _grow(X, y, bootstrap, 0, self.max_depth, self.min_leaf_size,
                      n_feats, rng))
        self.n_features_in_ = d
        self.feature_names_ = tuple(
            self.feature_names if self.feature_names is not None
            else (f"f{i}" for i in range(d)))
        return self

    def _tree_matrix(self, X) -> np.ndarray:
        check_is_fitted(self, "estimators_")
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"expected (n, {self.n_features_in_}) input, got {X.shape}")
        return np.stack([_tree_predict(tree, X) for tree in self.estimators_])

    def predict(self, X) -> np.ndarray:
        per_tree = self._tree_matrix(X)
        return np.clip(per_tree.mean(axis=0), 0.0, self.ms)

    def predict_interval(self, X, confidence: float = 0.9) -> tuple[np.ndarray, np.ndarray]:
        """Empirical (lo, hi) quantile band of the per-tree predictions."""
        if not 0.0 < confidence < 1.0:
            raise ValueError(f"confidence must lie in (0, 1), got {confidence!r}")
        per_tree = self._tree_matrix(X)
        tail = (1.0 - confidence) / 2.0
        lo = np.quantile(per_tree, tail, axis=0)
        hi = np.quantile(per_tree, 1.0 - tail, axis=0)
        return lo, hi

    def estimate(self, features: Mapping[str, float], confidence: float = 0.9) -> tuple[float, float, float]:
        """(estimate, lo, hi) for one sample given as a feature map."""
        check_is_fitted(self, "estimators_")
        row = []
        for name in self.feature_names_:
            if name not in features:
                raise MissingFeatureError(name)
            row.append(float(features[name]))
        X = np.asarray([row])
        est = float(self.predict(X)[0])
        lo, hi = self.predict_interval(X, confidence)
        return est, float(lo[0]), float(hi[0])


def _node_to_dict(node: _Node) -> dict:
    if node.is_leaf:
        return {"v": node.value}
    return {
        "f": node.feature,
        "t": node.threshold,
        "l": _node_to_dict(node.left),
        "r": _node_to_dict(node.right),
    }


def _node_from_dict(data: Mapping) -> _Node:
    try:
        if "v" in data:
            return _Node(value=float(data["v"]))
        return _Node(
            feature=int(data["f"]),
            threshold=float(data["t"]),
            left=_node_from_dict(data["l"]),
            right=_node_from_dict(data["r"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed tree node: {exc}") from exc


def model_to_dict(model: FusionForestRegressor) -> dict:
    check_is_fitted(model, "estimators_")
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "params": {
            "n_trees": model.n_trees,
            "max_depth": model.max_depth,
            "min_leaf_size": model.min_leaf_size,
            "features_per_split": model.features_per_split,
            "random_state": model.random_state,
            "ms": model.ms,
        },
        "feature_names": list(model.feature_names_),
        "trees": [_node_to_dict(t) for t in model.estimators_],
    }


def model_from_dict(data: Mapping, expected_features: Sequence[str] | None = None) -> FusionForestRegressor:
    if data.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"not a {MODEL_FORMAT} file: format={data.get('format')!r}")
    if data.get("version") != MODEL_VERSION:
        raise ModelFormatError(
            f"unsupported model version {data.get('version')!r}, expected {MODEL_VERSION}")
    try:
        params = dict(data["params"])
        names = tuple(str(n) for n in data["feature_names"])
        trees = [_node_from_dict(t) for t in data["trees"]]
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"malformed model file: {exc}") from exc
    if not trees:
        raise ModelFormatError("model file holds no trees")
    if expected_features is not None and tuple(expected_features) != names:
        raise FeatureMismatchError(
            f"model feature order {list(names)} does not match "
            f"expected {list(expected_features)}")
    model = FusionForestRegressor(
        n_trees=int(params.get("n_trees", len(trees))),
        max_depth=int(params.get("max_depth", 12)),
        min_leaf_size=int(params.get("min_leaf_size", 5)),
        features_per_split=params.get("features_per_split"),
        random_state=int(params.get("random_state", 0)),
        feature_names=names,
        ms=float(params.get("ms", 100.0)),
    )
    model.estimators_ = trees
    model.feature_names_ = names
    model.n_features_in_ = len(names)
    return model


def save_model(model: FusionForestRegressor, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, separators=(",", ":"))
        fh.write("\n")


def load_model(path: str, expected_features: Sequence[str] | None = None) -> FusionForestRegressor:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"model file is not valid JSON: {exc}") from exc
    return model_from_dict(data, expected_features)


def feature_matrix(
    samples: Iterable[MetricSample],
    feature_names: Sequence[str] = FUSION_FEATURES,
) -> np.ndarray:
    """Rows of raw feature values in feature_names order."""
    rows = []
    for sample in samples:
        raw = sample.criteria()
        row = []
        for name in feature_names:
            if name not in raw:
                raise MissingFeatureError(name)
            row.append(raw[name])
        rows.append(row)
    return np.asarray(rows, dtype=float).reshape(-1, len(feature_names))


def fusion_labels(
    samples: Sequence[MetricSample],
    triple: PresetTriple | None = None,
    ms: float = 100.0,
) -> np.ndarray:
    """Analytic fusion scores under whole-dataset bounds, as training targets."""
    records = score_pipeline(samples, triple=triple, ms=ms, bounds_mode="global")
    return np.asarray([r.fusion for r in records], dtype=float)


def train_fusion_model(
    samples: Sequence[MetricSample],
    n_trees: int = 100,
    max_depth: int = 12,
    min_leaf_size: int = 5,
    random_state: int = 0,
    triple: PresetTriple | None = None,
    ms: float = 100.0,
) -> FusionForestRegressor:
    """Fit a forest on a sample set labeled by its own analytic fusion scores."""
    X = feature_matrix(samples)
    y = fusion_labels(samples, triple=triple, ms=ms)
    model = FusionForestRegressor(
        n_trees=n_trees, max_depth=max_depth, min_leaf_size=min_leaf_size,
        random_state=random_state, feature_names=FUSION_FEATURES, ms=ms)
    return model.fit(X, y)
