"""Dataset balancing, bagged decision-tree ensemble, tuning and evaluation.

The ensemble is hand-rolled: Gini-impurity splits found by cumulative class
counts over per-feature sorted orders, per-split feature subsampling,
bootstrap resampling, and a text persistence format whose round-trip
reproduces predictions exactly. numpy is used for array math only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError
from .features import FEATURE_ORDER, FeatureVector, Label, LabeledExample, ScalerParams

SUSPICIOUS = 1
BENIGN = 0
DECISION_THRESHOLD = 0.5  # probability >= threshold flags Suspicious


# --- SMOTE ---------------------------------------------------------------------

def smote(dataset: Sequence[LabeledExample], k: int = 5,
          rng_seed: int = 0) -> list[LabeledExample]:
    """Oversample the minority class to majority size with synthetic points.

    Each synthetic point is x + u·(nn − x) for a uniform u in [0, 1] and nn
    one of the k nearest minority neighbors of x (Euclidean, k clamped to
    minority_size − 1), clamped coordinate-wise between x and nn so exact
    betweenness holds under float rounding. Original examples pass through
    unchanged.
    """
    by_label: dict[Label, list[LabeledExample]] = {}
    for ex in dataset:
        by_label.setdefault(ex.label, []).append(ex)
    if len(by_label) < 2:
        raise InputError("SMOTE requires both classes in the dataset")
    (label_a, group_a), (label_b, group_b) = sorted(
        by_label.items(), key=lambda kv: len(kv[1]))
    if len(group_a) == len(group_b):
        return list(dataset)
    minority_label, minority = label_a, group_a
    majority = group_b
    if len(minority) < 2:
        raise InputError("SMOTE needs at least 2 minority examples")

    k_eff = min(k, len(minority) - 1)
    if k_eff < 1:
        raise InputError("k must allow at least one neighbor")
    X = np.array([ex.features.as_tuple() for ex in minority], dtype=float)
    # Pairwise distances; argsort is stable so ties resolve by index.
    diffs = X[:, None, :] - X[None, :, :]
    dist = np.sqrt((diffs ** 2).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    neighbor_idx = np.argsort(dist, axis=1, kind="stable")[:, :k_eff]

    rng = np.random.default_rng(rng_seed)
    need = len(majority) - len(minority)
    synthetic: list[LabeledExample] = []
    for j in range(need):
        base_i = j % len(minority)
        nn_i = int(neighbor_idx[base_i, rng.integers(0, k_eff)])
        u = rng.random()
        base = X[base_i]
        nn = X[nn_i]
        point = base + u * (nn - base)
        point = np.minimum(np.maximum(point, np.minimum(base, nn)),
                           np.maximum(base, nn))
        base_ex = minority[base_i]
        synthetic.append(LabeledExample(
            pair_id=(base_ex.pair_id[0], f"{base_ex.pair_id[1]}~smote{j}"),
            features=FeatureVector.from_values(point.tolist()),
            label=minority_label))
    return list(dataset) + synthetic


# --- forest --------------------------------------------------------------------

@dataclass(frozen=True)
class HyperParams:
    n_estimators: int = 100
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features: str = "sqrt"  # sqrt | log2 | all
    max_depth: int | None = None
    bootstrap: bool = True

    def __post_init__(self) -> None:
        if self.n_estimators < 1:
            raise InputError("n_estimators must be >= 1")
        if self.min_samples_split < 2:
            raise InputError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise InputError("min_samples_leaf must be >= 1")
        if self.max_features not in ("sqrt", "log2", "all"):
            raise InputError(f"unknown max_features rule {self.max_features!r}")
        if self.max_depth is not None and self.max_depth < 0:
            raise InputError("max_depth must be >= 0 or None")


@dataclass
class Tree:
    """Flat node arrays; feature == -1 marks a leaf. Children of split node i
    are left[i]/right[i]; probs rows are (P(benign), P(suspicious))."""
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    probs: np.ndarray
    importances: np.ndarray

    def predict_probs(self, X: np.ndarray) -> np.ndarray:
        out = np.empty((X.shape[0], 2), dtype=float)
        stack = [(0, np.arange(X.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            f = self.feature[node]
            if f < 0:
                out[idx] = self.probs[node]
                continue
            mask = X[idx, f] <= self.threshold[node]
            stack.append((int(self.left[node]), idx[mask]))
            stack.append((int(self.right[node]), idx[~mask]))
        return out


@dataclass
class ForestModel:
    trees: list[Tree]
    hyperparams: HyperParams
    rng_seed: int
    feature_order: tuple[str, ...]
    scaler: ScalerParams | None = None

    def n_features(self) -> int:
        return len(self.feature_order)


def _n_candidate_features(rule: str, n_features: int) -> int:
    if rule == "sqrt":
        return max(1, int(math.sqrt(n_features)))
    if rule == "log2":
        return max(1, int(math.log2(n_features))) if n_features > 1 else 1
    return n_features


def _gini(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - (p ** 2).sum())


class _TreeBuilder:
    def __init__(self, X: np.ndarray, y: np.ndarray, hp: HyperParams,
                 rng: np.random.Generator) -> None:
        self.X = X
        self.y = y
        self.hp = hp
        self.rng = rng
        self.n_total = len(y)
        self.k_features = _n_candidate_features(hp.max_features, X.shape[1])
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.probs: list[tuple[float, float]] = []
        self.importances = np.zeros(X.shape[1], dtype=float)

    def build(self, root_idx: np.ndarray) -> None:
        # Iterative preorder construction; right child pushed first so the
        # left subtree is numbered before the right one.
        stack: list[tuple[np.ndarray, int, int, bool]] = [(root_idx, 0, -1, False)]
        while stack:
            idx, depth, parent, is_left = stack.pop()
            y_node = self.y[idx]
            n = len(idx)
            counts = np.bincount(y_node, minlength=2).astype(float)
            node_id = len(self.feature)
            self.feature.append(-1)
            self.threshold.append(0.0)
            self.left.append(-1)
            self.right.append(-1)
            self.probs.append((counts[0] / n, counts[1] / n))
            if parent >= 0:
                if is_left:
                    self.left[parent] = node_id
                else:
                    self.right[parent] = node_id

            if (counts[0] == 0 or counts[1] == 0
                    or n < self.hp.min_samples_split
                    or (self.hp.max_depth is not None and depth >= self.hp.max_depth)):
                continue
            split = self._best_split(idx, counts)
            if split is None:
                continue
            cost, feat, thr = split
            self.importances[feat] += (n / self.n_total) * (_gini(counts) - cost)
            self.feature[node_id] = feat
            self.threshold[node_id] = thr
            mask = self.X[idx, feat] <= thr
            stack.append((idx[~mask], depth + 1, node_id, False))
            stack.append((idx[mask], depth + 1, node_id, True))

    def _best_split(self, idx: np.ndarray, counts: np.ndarray):
        n = len(idx)
        min_leaf = self.hp.min_samples_leaf
        n_features = self.X.shape[1]
        # Scan a random feature order, skipping features that allow no valid
        # split at this node, until k splittable candidates were evaluated.
        # Tie-breaks compare (feature, threshold), so the scan order never
        # changes the chosen split.
        if self.k_features < n_features:
            scan = self.rng.permutation(n_features)
        else:
            scan = np.arange(n_features)
        best = None
        evaluated = 0
        y_node = self.y[idx]
        total_pos = counts[1]
        for f in scan.tolist():
            values = self.X[idx, f]
            order = np.argsort(values, kind="stable")
            v_sorted = values[order]
            change = np.nonzero(v_sorted[1:] != v_sorted[:-1])[0] + 1
            if change.size:
                change = change[(change >= min_leaf) & (change <= n - min_leaf)]
            if change.size == 0:
                continue
            y_sorted = y_node[order]
            cum_pos = np.cumsum(y_sorted)
            left_n = change.astype(float)
            left_pos = cum_pos[change - 1].astype(float)
            right_n = n - left_n
            right_pos = total_pos - left_pos
            pl = left_pos / left_n
            pr = right_pos / right_n
            weighted = (left_n * (1.0 - pl ** 2 - (1.0 - pl) ** 2)
                        + right_n * (1.0 - pr ** 2 - (1.0 - pr) ** 2)) / n
            k = int(np.argmin(weighted))
            cost = float(weighted[k])
            thr = float((v_sorted[change[k] - 1] + v_sorted[change[k]]) / 2.0)
            if (best is None or cost < best[0]
                    or (cost == best[0] and (f, thr) < (best[1], best[2]))):
                best = (cost, f, thr)
            evaluated += 1
            if evaluated >= self.k_features:
                break
        return best

    def finish(self) -> Tree:
        importances = self.importances
        total = importances.sum()
        if total > 0:
            importances = importances / total
        return Tree(
            feature=np.array(self.feature, dtype=np.int32),
            threshold=np.array(self.threshold, dtype=float),
            left=np.array(self.left, dtype=np.int32),
            right=np.array(self.right, dtype=np.int32),
            probs=np.array(self.probs, dtype=float),
            importances=importances,
        )


def _fit_forest_arrays(X: np.ndarray, y: np.ndarray, hp: HyperParams,
                       rng_seed: int) -> list[Tree]:
    trees = []
    n = len(y)
    for t in range(hp.n_estimators):
        # Each tree owns an independent stream, so tree training may run in
        # parallel without changing results.
        rng = np.random.default_rng(rng_seed + t)
        if hp.bootstrap:
            idx = rng.integers(0, n, size=n)
        else:
            idx = np.arange(n)
        builder = _TreeBuilder(X, y, hp, rng)
        builder.build(idx)
        trees.append(builder.finish())
    return trees


def dataset_matrix(dataset: Sequence[LabeledExample]) -> tuple[np.ndarray, np.ndarray]:
    X = np.array([ex.features.as_tuple() for ex in dataset], dtype=float)
    y = np.array([SUSPICIOUS if ex.label is Label.SUSPICIOUS else BENIGN
                  for ex in dataset], dtype=int)
    return X, y


def train_forest(dataset: Sequence[LabeledExample], hp: HyperParams,
                 rng_seed: int, scaler: ScalerParams | None = None) -> ForestModel:
    """Train the bagged ensemble; deterministic for a given (dataset, hp, seed)."""
    X, y = dataset_matrix(dataset)
    if len(set(y.tolist())) < 2:
        raise InputError("training requires both classes")
    trees = _fit_forest_arrays(X, y, hp, rng_seed)
    return ForestModel(trees=trees, hyperparams=hp, rng_seed=rng_seed,
                       feature_order=FEATURE_ORDER, scaler=scaler)


def forest_probabilities(model: ForestModel, X: np.ndarray) -> np.ndarray:
    """Mean per-tree probability of the Suspicious class for each row."""
    if X.shape[1] != model.n_features():
        raise InputError(f"expected {model.n_features()} features, got {X.shape[1]}")
    acc = np.zeros(X.shape[0], dtype=float)
    for tree in model.trees:
        acc += tree.predict_probs(X)[:, SUSPICIOUS]
    return acc / len(model.trees)


def predict(model: ForestModel, fv: FeatureVector) -> tuple[Label, float]:
    """Label and Suspicious-class probability; ties at the threshold flag."""
    values = fv.as_tuple()
    if len(values) != model.n_features():
        raise InputError(f"expected {model.n_features()} features, got {len(values)}")
    prob = float(forest_probabilities(model, np.array([values], dtype=float))[0])
    label = Label.SUSPICIOUS if prob >= DECISION_THRESHOLD else Label.BENIGN
    return label, prob


def feature_importances(model: ForestModel) -> np.ndarray:
    stack = np.stack([tree.importances for tree in model.trees])
    return stack.mean(axis=0)


class ForestClassifier:
    """Array-level wrapper satisfying the RFE trainer protocol."""

    def __init__(self, hp: HyperParams, rng_seed: int) -> None:
        self.hp = hp
        self.rng_seed = rng_seed
        self._trees: list[Tree] | None = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> None:
        self._trees = _fit_forest_arrays(np.asarray(X, dtype=float),
                                         np.asarray(y, dtype=int),
                                         self.hp, self.rng_seed)

    def _probs(self, X: np.ndarray) -> np.ndarray:
        assert self._trees is not None, "fit before predict"
        acc = np.zeros(len(X), dtype=float)
        for tree in self._trees:
            acc += tree.predict_probs(np.asarray(X, dtype=float))[:, SUSPICIOUS]
        return acc / len(self._trees)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self._probs(X) >= DECISION_THRESHOLD).astype(int)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self._probs(X)

    def feature_importances(self) -> np.ndarray:
        assert self._trees is not None, "fit before importances"
        return np.stack([t.importances for t in self._trees]).mean(axis=0)


# --- evaluation ------------------------------------------------------------------

@dataclass(frozen=True)
class EvalReport:
    confusion: tuple[int, int, int, int]  # tp, fp, tn, fn (Suspicious positive)
    precision: float
    recall: float
    f1: float
    accuracy: float
    roc_points: tuple[tuple[float, float], ...]
    auc: float


def metrics_from_confusion(tp: int, fp: int, tn: int, fn: int) -> tuple[float, float, float, float]:
    """(precision, recall, f1, accuracy); zero denominators score 0."""
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (2 * precision * recall / (precision + recall)) if precision + recall else 0.0
    total = tp + fp + tn + fn
    accuracy = (tp + tn) / total if total else 0.0
    return precision, recall, f1, accuracy


def roc_curve(y_true: np.ndarray, scores: np.ndarray) -> tuple[tuple[float, float], ...]:
    """(fpr, tpr) points from sweeping the decision threshold over the scores."""
    pos = int((y_true == 1).sum())
    neg = int((y_true == 0).sum())
    if pos == 0 or neg == 0:
        return ((0.0, 0.0), (1.0, 1.0))
    order = np.argsort(-scores, kind="stable")
    y_sorted = y_true[order]
    s_sorted = scores[order]
    tps = np.cumsum(y_sorted)
    fps = np.cumsum(1 - y_sorted)
    distinct = np.nonzero(np.diff(s_sorted))[0]
    boundaries = np.append(distinct, len(y_sorted) - 1)
    points = [(0.0, 0.0)]
    points.extend((float(fps[i] / neg), float(tps[i] / pos)) for i in boundaries)
    return tuple(points)


def auc_trapezoid(points: Sequence[tuple[float, float]]) -> float:
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


def evaluate(model: ForestModel, test: Sequence[LabeledExample]) -> EvalReport:
    if not test:
        raise InputError("cannot evaluate on an empty test set")
    X, y = dataset_matrix(test)
    scores = forest_probabilities(model, X)
    predictions = (scores >= DECISION_THRESHOLD).astype(int)
    tp = int(((predictions == 1) & (y == 1)).sum())
    fp = int(((predictions == 1) & (y == 0)).sum())
    tn = int(((predictions == 0) & (y == 0)).sum())
    fn = int(((predictions == 0) & (y == 1)).sum())
    precision, recall, f1, accuracy = metrics_from_confusion(tp, fp, tn, fn)
    points = roc_curve(y, scores)
    return EvalReport(confusion=(tp, fp, tn, fn), precision=precision,
                      recall=recall, f1=f1, accuracy=accuracy,
                      roc_points=points, auc=auc_trapezoid(points))


# --- hyperparameter tuning --------------------------------------------------------

def default_grid() -> list[HyperParams]:
    """Desk-scale sweep over all six tunable parameters."""
    grid = []
    for n_estimators in (50, 100):
        for min_samples_split in (2, 5):
            for min_samples_leaf in (1, 2):
                for max_features in ("sqrt",):
                    for max_depth in (None, 10):
                        for bootstrap in (True,):
                            grid.append(HyperParams(
                                n_estimators=n_estimators,
                                min_samples_split=min_samples_split,
                                min_samples_leaf=min_samples_leaf,
                                max_features=max_features,
                                max_depth=max_depth,
                                bootstrap=bootstrap))
    return grid


def _kfold_indices(n: int, folds: int, y: np.ndarray, rng_seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(rng_seed)
    parts: list[list[int]] = [[] for _ in range(folds)]
    for cls in (BENIGN, SUSPICIOUS):
        idx = np.nonzero(y == cls)[0]
        idx = idx[rng.permutation(len(idx))]
        for i, j in enumerate(idx.tolist()):
            parts[i % folds].append(j)
    return [np.array(sorted(p), dtype=int) for p in parts]


def cross_val_f1(dataset: Sequence[LabeledExample], hp: HyperParams,
                 folds: int, rng_seed: int) -> float:
    X, y = dataset_matrix(dataset)
    fold_idx = _kfold_indices(len(y), folds, y, rng_seed)
    scores = []
    for i, test_idx in enumerate(fold_idx):
        if len(test_idx) == 0:
            continue
        mask = np.ones(len(y), dtype=bool)
        mask[test_idx] = False
        trees = _fit_forest_arrays(X[mask], y[mask], hp, rng_seed + i)
        acc = np.zeros(len(test_idx), dtype=float)
        for tree in trees:
            acc += tree.predict_probs(X[test_idx])[:, SUSPICIOUS]
        pred = (acc / len(trees) >= DECISION_THRESHOLD).astype(int)
        yt = y[test_idx]
        tp = int(((pred == 1) & (yt == 1)).sum())
        fp = int(((pred == 1) & (yt == 0)).sum())
        fn = int(((pred == 0) & (yt == 1)).sum())
        _, _, f1, _ = metrics_from_confusion(tp, fp, len(yt) - tp - fp - fn, fn)
        scores.append(f1)
    return float(np.mean(scores)) if scores else 0.0


def tune_hyperparams(dataset: Sequence[LabeledExample], grid: Iterable[HyperParams],
                     folds: int, rng_seed: int) -> tuple[HyperParams, list[tuple[HyperParams, float]]]:
    """Exhaustive grid evaluation by mean CV F1 for the Suspicious class.

    Ties prefer fewer estimators, then shallower trees (None counts as
    unbounded depth).
    """
    grid = list(grid)
    if not grid:
        raise InputError("hyperparameter grid is empty")
    if folds < 2:
        raise InputError("folds must be >= 2")
    trace = []
    for hp in grid:
        trace.append((hp, cross_val_f1(dataset, hp, folds, rng_seed)))

    def depth_rank(hp: HyperParams) -> float:
        return math.inf if hp.max_depth is None else hp.max_depth

    best_hp, _ = min(trace, key=lambda item: (-item[1], item[0].n_estimators,
                                              depth_rank(item[0])))
    return best_hp, trace


# --- persistence -------------------------------------------------------------------

MODEL_FORMAT_HEADER = "squadkit-forest v1"


def _tree_lines(tree: Tree) -> list[str]:
    lines = []
    stack = [0]
    while stack:
        node = stack.pop()
        if tree.feature[node] < 0:
            p0, p1 = (float(v) for v in tree.probs[node])
            lines.append(f"L {p0!r} {p1!r}")
            continue
        lines.append(f"S {int(tree.feature[node])} {float(tree.threshold[node])!r}")
        stack.append(int(tree.right[node]))
        stack.append(int(tree.left[node]))
    return lines


def save_model(path: str, model: ForestModel) -> None:
    hp = model.hyperparams
    lines = [
        MODEL_FORMAT_HEADER,
        "feature_order=" + ",".join(model.feature_order),
        (f"hyperparams=n_estimators={hp.n_estimators},"
         f"min_samples_split={hp.min_samples_split},"
         f"min_samples_leaf={hp.min_samples_leaf},"
         f"max_features={hp.max_features},"
         f"max_depth={'none' if hp.max_depth is None else hp.max_depth},"
         f"bootstrap={'true' if hp.bootstrap else 'false'}"),
        f"rng_seed={model.rng_seed}",
    ]
    if model.scaler is not None:
        lines.append("scaler_mins=" + ",".join(repr(v) for v in model.scaler.mins))
        lines.append("scaler_maxs=" + ",".join(repr(v) for v in model.scaler.maxs))
    lines.append(f"trees={len(model.trees)}")
    for i, tree in enumerate(model.trees):
        lines.append(f"tree {i} nodes={len(tree.feature)}")
        lines.extend(_tree_lines(tree))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


class _NodeParser:
    """Sequential preorder reader: each S line owns the next two subtrees."""

    def __init__(self, lines: list[str]) -> None:
        self.lines = lines
        self.pos = 0
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.probs: list[tuple[float, float]] = []

    def parse(self) -> None:
        # (node_id, children_attached) pending slots
        pending: list[list[int]] = []
        while True:
            if self.pos >= len(self.lines):
                raise InputError("model file truncated inside a tree")
            parts = self.lines[self.pos].split()
            self.pos += 1
            node_id = len(self.feature)
            if parts[0] == "L" and len(parts) == 3:
                self.feature.append(-1)
                self.threshold.append(0.0)
                self.left.append(-1)
                self.right.append(-1)
                self.probs.append((float(parts[1]), float(parts[2])))
            elif parts[0] == "S" and len(parts) == 3:
                self.feature.append(int(parts[1]))
                self.threshold.append(float(parts[2]))
                self.left.append(-1)
                self.right.append(-1)
                self.probs.append((0.0, 0.0))
            else:
                raise InputError(f"bad node line: {self.lines[self.pos - 1]!r}")
            if pending:
                parent = pending[-1]
                if parent[1] == 0:
                    self.left[parent[0]] = node_id
                    parent[1] = 1
                else:
                    self.right[parent[0]] = node_id
                    pending.pop()
            elif node_id > 0:
                raise InputError("model file has trailing nodes outside the tree")
            if parts[0] == "S":
                pending.append([node_id, 0])
            if not pending:
                return

    def tree(self, n_features: int) -> Tree:
        feature = np.array(self.feature, dtype=np.int32)
        if feature.size and feature.max() >= n_features:
            raise InputError("split feature index out of range")
        return Tree(feature=feature,
                    threshold=np.array(self.threshold, dtype=float),
                    left=np.array(self.left, dtype=np.int32),
                    right=np.array(self.right, dtype=np.int32),
                    probs=np.array(self.probs, dtype=float),
                    importances=np.zeros(n_features, dtype=float))


def load_model(path: str) -> ForestModel:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != MODEL_FORMAT_HEADER:
        raise InputError(f"{path}: not a {MODEL_FORMAT_HEADER} file")

    def take(prefix: str, line: str) -> str:
        if not line.startswith(prefix):
            raise InputError(f"{path}: expected {prefix!r}, got {line!r}")
        return line[len(prefix):]

    pos = 1
    feature_order = tuple(take("feature_order=", lines[pos]).split(","))
    pos += 1
    hp_fields = dict(item.split("=", 1)
                     for item in take("hyperparams=", lines[pos]).split(","))
    hp = HyperParams(
        n_estimators=int(hp_fields["n_estimators"]),
        min_samples_split=int(hp_fields["min_samples_split"]),
        min_samples_leaf=int(hp_fields["min_samples_leaf"]),
        max_features=hp_fields["max_features"],
        max_depth=None if hp_fields["max_depth"] == "none" else int(hp_fields["max_depth"]),
        bootstrap=hp_fields["bootstrap"] == "true",
    )
    pos += 1
    rng_seed = int(take("rng_seed=", lines[pos]))
    pos += 1
    scaler = None
    if pos < len(lines) and lines[pos].startswith("scaler_mins="):
        mins = tuple(float(v) for v in take("scaler_mins=", lines[pos]).split(","))
        pos += 1
        maxs = tuple(float(v) for v in take("scaler_maxs=", lines[pos]).split(","))
        pos += 1
        scaler = ScalerParams(mins=mins, maxs=maxs)
    n_trees = int(take("trees=", lines[pos]))
    pos += 1
    trees = []
    for i in range(n_trees):
        header = lines[pos]
        if not header.startswith(f"tree {i} nodes="):
            raise InputError(f"{path}: expected tree {i} header, got {header!r}")
        n_nodes = int(header.split("nodes=")[1])
        pos += 1
        parser = _NodeParser(lines[pos:pos + n_nodes])
        parser.parse()
        if parser.pos != n_nodes:
            raise InputError(f"{path}: tree {i} node count mismatch")
        trees.append(parser.tree(len(feature_order)))
        pos += n_nodes
    return ForestModel(trees=trees, hyperparams=hp, rng_seed=rng_seed,
                       feature_order=feature_order, scaler=scaler)
