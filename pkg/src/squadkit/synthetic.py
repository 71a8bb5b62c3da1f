"""Deterministic synthetic labeled datasets for training and benchmarks.

Feature values are raw (pre-normalization). The suspicious cluster mirrors
what impersonators look like in the wild: near-identical display name and
username, a profile image matching the target, an unrelated bio, and no
follow relationship. Benign variant holders sit apart on those axes.
"""

from __future__ import annotations

import numpy as np

from .features import FeatureVector, Label, LabeledExample

DEFAULT_SUSPICIOUS = 540
DEFAULT_BENIGN = 838


def _suspicious_example(rng: np.random.Generator, i: int) -> LabeledExample:
    image_missed = rng.random() < 0.05
    image_score = rng.uniform(0.70, 1.20) if image_missed else rng.uniform(0.15, 0.60)
    fv = FeatureVector(
        profile_name_ed=float(rng.integers(0, 4)),
        username_ed=float(rng.integers(1, 4)),
        image_score=image_score,
        image_binary=float(image_score < 0.65),
        friendship=float(rng.random() < 0.04),
        friends_count=float(rng.integers(0, 300)),
        tweet_count=float(rng.integers(0, 800)),
        bio_similarity=float(rng.uniform(0.0, 0.12)),
        url_similarity=float(rng.random() < 0.22),
        location=float(rng.random() < 0.45),
        retweets_count=float(rng.integers(0, 2000)),
        is_private=float(rng.random() < 0.05),
    )
    return LabeledExample(pair_id=("synthseed", f"susp{i:04d}"), features=fv,
                          label=Label.SUSPICIOUS)


def _benign_example(rng: np.random.Generator, i: int) -> LabeledExample:
    no_image = rng.random() < 0.5
    image_score = 1.0 if no_image else rng.uniform(0.75, 1.40)
    fv = FeatureVector(
        profile_name_ed=float(rng.integers(4, 27)),
        username_ed=float(rng.integers(1, 7)),
        image_score=image_score,
        image_binary=0.0,
        friendship=float(rng.random() < 0.55),
        friends_count=float(rng.integers(10, 5000)),
        tweet_count=float(rng.integers(0, 20000)),
        bio_similarity=float(rng.uniform(0.0, 0.70)),
        url_similarity=float(rng.random() < 0.03),
        location=float(rng.random() < 0.10),
        retweets_count=float(rng.integers(0, 10000)),
        is_private=float(rng.random() < 0.35),
    )
    return LabeledExample(pair_id=("synthseed", f"benign{i:04d}"), features=fv,
                          label=Label.BENIGN)


def make_labeled_dataset(n_suspicious: int = DEFAULT_SUSPICIOUS,
                         n_benign: int = DEFAULT_BENIGN,
                         rng_seed: int = 20211001) -> list[LabeledExample]:
    """Imbalanced labeled pairs, deterministic for a given seed; examples are
    interleaved so fold splits see both classes everywhere."""
    rng = np.random.default_rng(rng_seed)
    suspicious = [_suspicious_example(rng, i) for i in range(n_suspicious)]
    benign = [_benign_example(rng, i) for i in range(n_benign)]
    dataset: list[LabeledExample] = []
    si, bi = 0, 0
    while si < len(suspicious) or bi < len(benign):
        take_benign = (bi + 1) * n_suspicious <= (si + 1) * n_benign
        if bi < len(benign) and (take_benign or si >= len(suspicious)):
            dataset.append(benign[bi])
            bi += 1
        else:
            dataset.append(suspicious[si])
            si += 1
    return dataset


def train_test_split(dataset: list[LabeledExample], test_fraction: float = 0.3,
                     rng_seed: int = 0) -> tuple[list[LabeledExample], list[LabeledExample]]:
    """Stratified shuffle split, deterministic for a given seed."""
    rng = np.random.default_rng(rng_seed)
    by_label: dict[Label, list[int]] = {}
    for i, ex in enumerate(dataset):
        by_label.setdefault(ex.label, []).append(i)
    test_idx: set[int] = set()
    for indices in by_label.values():
        shuffled = [indices[j] for j in rng.permutation(len(indices))]
        n_test = round(len(indices) * test_fraction)
        test_idx.update(shuffled[:n_test])
    train = [ex for i, ex in enumerate(dataset) if i not in test_idx]
    test = [ex for i, ex in enumerate(dataset) if i in test_idx]
    return train, test
