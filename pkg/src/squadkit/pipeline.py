"""End-to-end scan orchestration: generate, filter, extract, classify,
post-filter, report.

A scan is a pure function of (fixture store, persisted model, config): the
same inputs render byte-identical reports, so repeated runs can be diffed.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from typing import Sequence

from .datasource import FixtureDataSource, filter_variants
from .errors import ConfigError, InputError
from .features import (
    FEATURE_ORDER,
    AccountStatus,
    FeatureVector,
    Label,
    apply_normalizer,
    extract_features,
)
from .genmodels import GenerationConfig, generate_all
from .learn import ForestModel, load_model, predict
from .mentions import ED_BUCKETS, ed_bucket

DEFAULT_POST_FILTER_KEYWORDS = ("fan", "parody")

_WORD_RE = re.compile(r"[a-z0-9_]+")


def post_filter(bio: str, keywords: Sequence[str] = DEFAULT_POST_FILTER_KEYWORDS) -> bool:
    """True when any keyword appears as a whole word in the bio (the match
    demotes a suspicious label to benign)."""
    words = set(_WORD_RE.findall(bio.lower()))
    return any(keyword.lower() in words for keyword in keywords)


@dataclass(frozen=True)
class PipelineConfig:
    generation: GenerationConfig = field(default_factory=GenerationConfig)
    model_path: str = "squad.model"
    threshold: float = 0.5
    post_filter_keywords: tuple[str, ...] = DEFAULT_POST_FILTER_KEYWORDS
    face_required: bool = False

    def __post_init__(self) -> None:
        if not (0.0 <= self.threshold <= 1.0):
            raise ConfigError(f"threshold must be in [0, 1], got {self.threshold}")


@dataclass(frozen=True)
class SuspiciousPair:
    variant: str
    probability: float
    features: FeatureVector


@dataclass(frozen=True)
class ScanReport:
    seed: str
    generated: int
    active: int
    suspended: int
    not_found: int
    unresolved: int
    suspicious_pairs: tuple[SuspiciousPair, ...]
    benign_count: int
    post_filtered_count: int
    skipped_no_face: int
    ed_histogram: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "totals": {
                "generated": self.generated,
                "active": self.active,
                "suspended": self.suspended,
                "not_found": self.not_found,
                "unresolved": self.unresolved,
            },
            "suspicious_pairs": [
                {
                    "variant": pair.variant,
                    "probability": pair.probability,
                    "features": dict(zip(FEATURE_ORDER, pair.features.as_tuple())),
                }
                for pair in self.suspicious_pairs
            ],
            "benign_count": self.benign_count,
            "post_filtered_count": self.post_filtered_count,
            "skipped_no_face": self.skipped_no_face,
            "ed_histogram": {b: self.ed_histogram.get(b, 0) for b in ED_BUCKETS},
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ScanReport":
        totals = payload["totals"]
        pairs = tuple(
            SuspiciousPair(
                variant=item["variant"],
                probability=item["probability"],
                features=FeatureVector.from_values(
                    [item["features"][name] for name in FEATURE_ORDER]),
            )
            for item in payload["suspicious_pairs"]
        )
        return cls(
            seed=payload["seed"],
            generated=totals["generated"],
            active=totals["active"],
            suspended=totals["suspended"],
            not_found=totals["not_found"],
            unresolved=totals["unresolved"],
            suspicious_pairs=pairs,
            benign_count=payload["benign_count"],
            post_filtered_count=payload["post_filtered_count"],
            skipped_no_face=payload["skipped_no_face"],
            ed_histogram=dict(payload["ed_histogram"]),
        )


def load_scan_model(path: str) -> ForestModel:
    if not os.path.exists(path):
        raise ConfigError(f"model file {path} does not exist; train one first")
    model = load_model(path)
    if model.scaler is None:
        raise ConfigError(f"model file {path} carries no scaler; scans must "
                          "normalize with the training-time parameters")
    return model


def scan(seed: str, ds: FixtureDataSource, config: PipelineConfig,
         model: ForestModel | None = None) -> ScanReport:
    """Run the full detection pipeline for one seed account."""
    if model is None:
        model = load_scan_model(config.model_path)
    lookup = ds.lookup_accounts([seed])
    entry = lookup[seed]
    if entry.status is not AccountStatus.ACTIVE or entry.record is None:
        raise InputError(f"seed {seed!r} is {entry.status.value}; scans need an "
                         "active seed account")
    seed_record = entry.record

    variants = generate_all(seed, config.generation)
    partition = filter_variants(variants, ds)

    histogram = {bucket: 0 for bucket in ED_BUCKETS}
    for variant, _ in partition.active:
        histogram[ed_bucket(variant.edit_distance)] += 1

    suspicious: list[SuspiciousPair] = []
    benign = 0
    post_filtered = 0
    skipped_no_face = 0
    store = ds.embeddings
    for variant, account in partition.active:
        if config.face_required:
            has_face = bool(account.embedding_ref and store
                            and store.get(account.embedding_ref) is not None)
            if not has_face:
                skipped_no_face += 1
                continue
        raw = extract_features(seed_record, account, ds, store)
        assert model.scaler is not None
        normalized = apply_normalizer(model.scaler, raw)
        _, probability = predict(model, normalized)
        if probability >= config.threshold:
            if post_filter(account.bio, config.post_filter_keywords):
                post_filtered += 1
            else:
                suspicious.append(SuspiciousPair(variant=variant.username,
                                                 probability=probability,
                                                 features=normalized))
        else:
            benign += 1

    suspicious.sort(key=lambda pair: (-pair.probability, pair.variant.lower()))
    return ScanReport(
        seed=seed,
        generated=len(variants),
        active=len(partition.active),
        suspended=len(partition.suspended),
        not_found=len(partition.not_found),
        unresolved=len(partition.unresolved),
        suspicious_pairs=tuple(suspicious),
        benign_count=benign,
        post_filtered_count=post_filtered,
        skipped_no_face=skipped_no_face,
        ed_histogram=histogram,
    )


def report_render(report: ScanReport, format: str = "json") -> str:
    """Render a scan report; the json form round-trips losslessly."""
    if format == "json":
        return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"
    if format == "table":
        lines = [
            f"scan report for @{report.seed}",
            f"  generated={report.generated} active={report.active} "
            f"suspended={report.suspended} not_found={report.not_found} "
            f"unresolved={report.unresolved}",
            "  edit-distance histogram (active): "
            + " ".join(f"{b}:{report.ed_histogram.get(b, 0)}" for b in ED_BUCKETS),
            f"  benign={report.benign_count} post_filtered={report.post_filtered_count} "
            f"skipped_no_face={report.skipped_no_face}",
            f"  suspicious pairs ({len(report.suspicious_pairs)}):",
        ]
        for pair in report.suspicious_pairs:
            lines.append(f"    {pair.variant:20s} p={pair.probability:.4f}")
        return "\n".join(lines) + "\n"
    raise InputError(f"unknown report format {format!r}")


def report_from_json(text: str) -> ScanReport:
    return ScanReport.from_dict(json.loads(text))
