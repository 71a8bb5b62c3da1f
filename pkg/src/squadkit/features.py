"""Pairwise feature extraction, normalization and selection.

Builds the 12-feature vector for a <seed, variant> account pair from the
similarity primitives, scales it to [0, 1] with training-set min-max
parameters, and offers recursive feature elimination with cross-validated
accuracy for pruning the set.
"""

from __future__ import annotations

import csv
import enum
import random
from dataclasses import dataclass, field, fields, replace
from typing import Callable, Protocol, Sequence

import numpy as np

from .errors import InputError
from .similarity import (
    EmbeddingStore,
    image_similarity,
    jaccard_bio,
    levenshtein,
    location_match,
    url_similarity,
)

# Sentinel for pairs where either side has no usable profile image: maximal
# distance, not similar.
MISSING_IMAGE_SCORE = 1.0


class AccountStatus(enum.Enum):
    ACTIVE = "active"
    SUSPENDED = "suspended"
    NOT_FOUND = "not_found"


@dataclass(frozen=True)
class AccountRecord:
    username: str
    profile_name: str = ""
    bio: str = ""
    url: str = ""
    location: str = ""
    friends_count: int = 0
    followers_count: int = 0
    tweet_count: int = 0
    retweet_count: int = 0
    is_private: bool = False
    embedding_ref: str | None = None
    status: AccountStatus = AccountStatus.ACTIVE

    @classmethod
    def tombstone(cls, username: str, status: AccountStatus) -> "AccountRecord":
        """Record for a suspended or missing account: no profile payload."""
        if status is AccountStatus.ACTIVE:
            raise InputError("tombstone status must be Suspended or NotFound")
        return cls(username=username, status=status)


class Label(enum.Enum):
    SUSPICIOUS = "suspicious"
    BENIGN = "benign"


# Column order is a file-format contract; FeatureVector fields, the CSV
# columns and ScalerParams entries all follow this order.
FEATURE_ORDER: tuple[str, ...] = (
    "profile_name_ed",
    "username_ed",
    "image_score",
    "image_binary",
    "friendship",
    "friends_count",
    "tweet_count",
    "bio_similarity",
    "url_similarity",
    "location",
    "retweets_count",
    "is_private",
)


@dataclass(frozen=True)
class FeatureVector:
    profile_name_ed: float
    username_ed: float
    image_score: float
    image_binary: float
    friendship: float
    friends_count: float
    tweet_count: float
    bio_similarity: float
    url_similarity: float
    location: float
    retweets_count: float
    is_private: float
    # Metadata, not a feature: the friendship oracle could not answer.
    incomplete: bool = field(default=False, compare=False)

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in FEATURE_ORDER)

    @classmethod
    def from_values(cls, values: Sequence[float], incomplete: bool = False) -> "FeatureVector":
        if len(values) != len(FEATURE_ORDER):
            raise InputError(f"expected {len(FEATURE_ORDER)} feature values, "
                             f"got {len(values)}")
        return cls(**dict(zip(FEATURE_ORDER, (float(v) for v in values))),
                   incomplete=incomplete)


assert tuple(f.name for f in fields(FeatureVector))[:len(FEATURE_ORDER)] == FEATURE_ORDER


@dataclass(frozen=True)
class LabeledExample:
    pair_id: tuple[str, str]
    features: FeatureVector
    label: Label


class FriendshipOracle(Protocol):
    def follows(self, follower: str, followee: str) -> bool | None:
        """True/False when known, None when the backend cannot answer."""


def extract_features(seed: AccountRecord, variant: AccountRecord,
                     friendship_oracle: FriendshipOracle,
                     embeddings: EmbeddingStore | None,
                     image_threshold: float = 0.65) -> FeatureVector:
    """Raw (unnormalized) feature vector for a <seed, variant> pair.

    Count features are copied as-is and scaled later. A missing embedding on
    either side yields the maximal-distance sentinel. An unanswerable
    friendship query scores 0 and flags the vector incomplete.
    """
    if seed.status is not AccountStatus.ACTIVE or variant.status is not AccountStatus.ACTIVE:
        raise InputError("feature extraction requires two active accounts")

    seed_emb = embeddings.get(seed.embedding_ref) if embeddings and seed.embedding_ref else None
    var_emb = embeddings.get(variant.embedding_ref) if embeddings and variant.embedding_ref else None
    if seed_emb is not None and var_emb is not None:
        result = image_similarity(seed_emb, var_emb, image_threshold)
        image_score = result.score
        image_binary = int(result.is_similar)
    else:
        image_score = MISSING_IMAGE_SCORE
        image_binary = 0

    follows = friendship_oracle.follows(variant.username, seed.username)
    incomplete = follows is None
    friendship = int(bool(follows))

    return FeatureVector(
        profile_name_ed=levenshtein(seed.profile_name, variant.profile_name),
        username_ed=levenshtein(seed.username, variant.username),
        image_score=image_score,
        image_binary=image_binary,
        friendship=friendship,
        friends_count=variant.friends_count,
        tweet_count=variant.tweet_count,
        bio_similarity=jaccard_bio(seed.bio, variant.bio),
        url_similarity=url_similarity(seed.username, seed.url, variant.url),
        location=location_match(seed.location, variant.location),
        retweets_count=variant.retweet_count,
        is_private=int(variant.is_private),
        incomplete=incomplete,
    )


@dataclass(frozen=True)
class ScalerParams:
    mins: tuple[float, ...]
    maxs: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.mins) != len(self.maxs):
            raise InputError("scaler mins/maxs length mismatch")
        if any(hi < lo for lo, hi in zip(self.mins, self.maxs)):
            raise InputError("scaler max < min")


def fit_normalizer(train: Sequence[FeatureVector]) -> ScalerParams:
    """Per-feature min/max over the training set; constant features get a
    unit-width range so scaling stays defined (they map to 0)."""
    if not train:
        raise InputError("cannot fit a normalizer on an empty training set")
    matrix = np.array([fv.as_tuple() for fv in train], dtype=float)
    mins = matrix.min(axis=0)
    maxs = matrix.max(axis=0)
    constant = maxs == mins
    maxs = np.where(constant, mins + 1.0, maxs)
    return ScalerParams(mins=tuple(mins.tolist()), maxs=tuple(maxs.tolist()))


def apply_normalizer(params: ScalerParams, fv: FeatureVector) -> FeatureVector:
    """Min-max scale into [0, 1], clamping values outside the training range."""
    values = []
    for value, lo, hi in zip(fv.as_tuple(), params.mins, params.maxs):
        scaled = (value - lo) / (hi - lo)
        values.append(min(1.0, max(0.0, scaled)))
    return FeatureVector.from_values(values, incomplete=fv.incomplete)


def normalize_dataset(params: ScalerParams,
                      dataset: Sequence[LabeledExample]) -> list[LabeledExample]:
    return [replace(ex, features=apply_normalizer(params, ex.features))
            for ex in dataset]


# --- labeled dataset file format ----------------------------------------------

DATASET_COLUMNS = ("seed", "variant") + FEATURE_ORDER + ("label",)


def write_labeled_csv(path: str, dataset: Sequence[LabeledExample]) -> None:
    """Column order: seed, variant, the 12 features in contract order, label."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DATASET_COLUMNS)
        for ex in dataset:
            writer.writerow([ex.pair_id[0], ex.pair_id[1],
                             *(f"{v:.9g}" for v in ex.features.as_tuple()),
                             ex.label.value])


def read_labeled_csv(path: str) -> list[LabeledExample]:
    dataset = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(DATASET_COLUMNS) - set(reader.fieldnames or [])
        if missing:
            raise InputError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            features = FeatureVector.from_values([float(row[c]) for c in FEATURE_ORDER])
            try:
                label = Label(row["label"])
            except ValueError:
                raise InputError(f"{path}: unknown label {row['label']!r}") from None
            dataset.append(LabeledExample(pair_id=(row["seed"], row["variant"]),
                                          features=features, label=label))
    return dataset


FEATURES_ONLY_COLUMNS = ("seed", "variant") + FEATURE_ORDER


def write_features_csv(path: str, rows: Sequence[tuple[tuple[str, str], FeatureVector]]) -> None:
    """Unlabeled feature rows: (pair_id, vector) in contract column order."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(FEATURES_ONLY_COLUMNS)
        for pair_id, fv in rows:
            writer.writerow([pair_id[0], pair_id[1],
                             *(f"{v:.9g}" for v in fv.as_tuple())])


def read_features_csv(path: str) -> list[tuple[tuple[str, str], FeatureVector]]:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(FEATURES_ONLY_COLUMNS) - set(reader.fieldnames or [])
        if missing:
            raise InputError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            fv = FeatureVector.from_values([float(row[c]) for c in FEATURE_ORDER])
            rows.append(((row["seed"], row["variant"]), fv))
    return rows


# --- recursive feature elimination ----------------------------------------------


class EliminationClassifier(Protocol):
    def fit(self, X: np.ndarray, y: np.ndarray) -> None: ...
    def predict(self, X: np.ndarray) -> np.ndarray: ...
    def feature_importances(self) -> np.ndarray: ...


TrainerFactory = Callable[[int], EliminationClassifier]


@dataclass(frozen=True)
class RfeStep:
    feature_names: tuple[str, ...]
    cv_accuracy: float


def _stratified_folds(labels: np.ndarray, folds: int, rng: random.Random) -> list[np.ndarray]:
    by_class: dict[int, list[int]] = {}
    for idx, label in enumerate(labels.tolist()):
        by_class.setdefault(label, []).append(idx)
    assignments = [[] for _ in range(folds)]
    for indices in by_class.values():
        rng.shuffle(indices)
        for i, idx in enumerate(indices):
            assignments[i % folds].append(idx)
    return [np.array(sorted(part), dtype=int) for part in assignments]


def _cv_accuracy(X: np.ndarray, y: np.ndarray, folds: list[np.ndarray],
                 trainer: TrainerFactory, rng_seed: int) -> float:
    accuracies = []
    for fold_idx, test_idx in enumerate(folds):
        train_mask = np.ones(len(y), dtype=bool)
        train_mask[test_idx] = False
        clf = trainer(rng_seed + fold_idx)
        clf.fit(X[train_mask], y[train_mask])
        pred = clf.predict(X[test_idx])
        accuracies.append(float(np.mean(pred == y[test_idx])))
    return float(np.mean(accuracies))


def select_features_rfe_cv(
    dataset: Sequence[LabeledExample],
    folds: int,
    trainer: TrainerFactory,
    rng_seed: int = 0,
    feature_names: Sequence[str] | None = None,
    extra_columns: np.ndarray | None = None,
    min_features: int = 1,
) -> tuple[tuple[str, ...], list[RfeStep]]:
    """Recursive feature elimination with k-fold CV accuracy per subset size.

    Repeatedly drops the feature with the smallest impurity-based importance
    (ties drop the lexicographically last name) and records CV accuracy for
    every subset, returning the accuracy-maximizing subset; ties prefer fewer
    features. extra_columns appends synthetic feature columns (one name per
    column required via feature_names). min_features stops elimination early.
    """
    if folds < 2:
        raise InputError("folds must be >= 2")
    if min_features < 1:
        raise InputError("min_features must be >= 1")
    labels = np.array([1 if ex.label is Label.SUSPICIOUS else 0 for ex in dataset], dtype=int)
    if len(set(labels.tolist())) < 2:
        raise InputError("RFE requires both classes in the dataset")
    X = np.array([ex.features.as_tuple() for ex in dataset], dtype=float)
    names = list(feature_names) if feature_names is not None else list(FEATURE_ORDER)
    if extra_columns is not None:
        X = np.hstack([X, extra_columns])
    if X.shape[1] != len(names):
        raise InputError(f"{X.shape[1]} feature columns but {len(names)} names")

    rng = random.Random(rng_seed)
    fold_indices = _stratified_folds(labels, folds, rng)
    active = list(range(len(names)))
    trace: list[RfeStep] = []
    while active:
        subset = X[:, active]
        accuracy = _cv_accuracy(subset, labels, fold_indices, trainer, rng_seed)
        trace.append(RfeStep(feature_names=tuple(names[i] for i in active),
                             cv_accuracy=accuracy))
        if len(active) <= min_features:
            break
        clf = trainer(rng_seed)
        clf.fit(subset, labels)
        importances = clf.feature_importances()
        min_importance = importances.min()
        tied = [i for i in range(len(active)) if importances[i] == min_importance]
        worst = max(tied, key=lambda i: names[active[i]])
        del active[worst]

    best = max(trace, key=lambda step: (step.cv_accuracy, -len(step.feature_names)))
    return best.feature_names, trace


def elimination_order(trace: list[RfeStep]) -> list[str]:
    """Feature names in the order they were dropped."""
    dropped = []
    for before, after in zip(trace, trace[1:]):
        gone = set(before.feature_names) - set(after.feature_names)
        dropped.extend(sorted(gone))
    return dropped
