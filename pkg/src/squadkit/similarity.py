"""Pairwise similarity primitives for account comparison.

Implements the string metrics (Levenshtein, token-set Jaccard), the
field-match rules for URLs and locations, the profile-name verdict ladder,
and embedding-based image similarity, plus the on-disk embedding format the
rest of the toolkit consumes.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass

from .emoji_names import DEFAULT_EMOJI_NAMES
from .errors import InputError

DEFAULT_IMAGE_THRESHOLD = 0.65

_TOKEN_RE = re.compile(r"[a-z0-9_]+")
_SCHEME_RE = re.compile(r"^[a-z][a-z0-9+.-]*://", re.IGNORECASE)


def levenshtein(a: str, b: str) -> int:
    """Minimum number of single-character edits transforming a into b."""
    # Shared affixes never change the distance; stripping them keeps the DP
    # tiny for generated variants, which differ from the seed in one cluster.
    while a and b and a[0] == b[0]:
        a, b = a[1:], b[1:]
    while a and b and a[-1] == b[-1]:
        a, b = a[:-1], b[:-1]
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        append = cur.append
        for j, cb in enumerate(b, 1):
            append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def tokenize_bio(text: str, emoji_map: dict[str, str] | None = None) -> set[str]:
    """Token set of a bio: lowercased, punctuation-stripped, emoji mapped to words."""
    if emoji_map is None:
        emoji_map = DEFAULT_EMOJI_NAMES
    if any(ch in emoji_map for ch in text):
        text = "".join(f" {emoji_map[ch]} " if ch in emoji_map else ch for ch in text)
    return set(_TOKEN_RE.findall(text.lower()))


def jaccard_bio(bio_a: str, bio_b: str, emoji_map: dict[str, str] | None = None) -> float:
    """Jaccard similarity of the two bios' token sets; 0.0 when both are empty."""
    ta = tokenize_bio(bio_a, emoji_map)
    tb = tokenize_bio(bio_b, emoji_map)
    if not ta and not tb:
        return 0.0
    return len(ta & tb) / len(ta | tb)


def _normalize_url(url: str) -> str:
    url = url.strip().lower()
    url = _SCHEME_RE.sub("", url)
    return url.rstrip("/")


def url_similarity(seed_username: str, seed_url: str, variant_url: str,
                   one_empty_value: int = 0) -> int:
    """1 if the URLs match after normalization or the variant URL embeds the seed name.

    Exactly one empty 'website' field is undefined behavior upstream; the
    default scores it 0 (configurable via one_empty_value).
    """
    a = _normalize_url(seed_url)
    b = _normalize_url(variant_url)
    if not a and not b:
        return 0
    if not a or not b:
        return one_empty_value
    if a == b:
        return 1
    if seed_username.lower() in b:
        return 1
    return 0


def location_match(loc_a: str, loc_b: str) -> int:
    """1 when normalized locations are equal, including the both-empty case."""
    norm = lambda s: " ".join(s.split()).lower()
    return int(norm(loc_a) == norm(loc_b))


class ProfileNameVerdict(enum.Enum):
    EXACT_MATCH = "exact_match"
    EXACT_PLUS_EXTRA = "exact_plus_extra"
    WORD_SUBSET = "word_subset"
    OTHER = "other"


def profile_name_similarity(seed_name: str, variant_name: str) -> ProfileNameVerdict:
    """Classify how strongly a variant's display name resembles the seed's.

    Precedence: exact match > exact-plus-extra (variant strictly contains the
    seed name) > word subset (some whitespace-delimited seed word appears in
    the variant) > other. Comparison is case-insensitive throughout.
    """
    seed = seed_name.strip().lower()
    variant = variant_name.strip().lower()
    if seed == variant:
        return ProfileNameVerdict.EXACT_MATCH
    if seed and seed in variant:
        return ProfileNameVerdict.EXACT_PLUS_EXTRA
    if any(word in variant for word in seed.split()):
        return ProfileNameVerdict.WORD_SUBSET
    return ProfileNameVerdict.OTHER


@dataclass(frozen=True)
class ImageEmbedding:
    vector: tuple[float, ...]
    dim: int
    source_id: str

    def __post_init__(self) -> None:
        if len(self.vector) != self.dim:
            raise InputError(f"embedding {self.source_id!r}: vector length "
                             f"{len(self.vector)} != dim {self.dim}")
        if not all(math.isfinite(v) for v in self.vector):
            raise InputError(f"embedding {self.source_id!r}: non-finite entry")


@dataclass(frozen=True)
class ImageSimilarityResult:
    score: float
    is_similar: bool
    threshold: float


def _l2_normalized(vector: tuple[float, ...]) -> tuple[float, ...]:
    norm = math.sqrt(sum(v * v for v in vector))
    if norm == 0.0:
        return vector
    return tuple(v / norm for v in vector)


def image_similarity(emb_a: ImageEmbedding, emb_b: ImageEmbedding,
                     threshold: float = DEFAULT_IMAGE_THRESHOLD) -> ImageSimilarityResult:
    """Euclidean distance between L2-normalized embeddings, flagged against a cutoff.

    is_similar encodes "distance below threshold"; scores at or above the
    threshold are treated as no similarity.
    """
    if emb_a.dim != emb_b.dim:
        raise InputError(f"embedding dimension mismatch: {emb_a.dim} != {emb_b.dim}")
    va = _l2_normalized(emb_a.vector)
    vb = _l2_normalized(emb_b.vector)
    score = math.sqrt(sum((x - y) ** 2 for x, y in zip(va, vb)))
    return ImageSimilarityResult(score=score, is_similar=score < threshold,
                                 threshold=threshold)


class EmbeddingStore:
    """In-memory map of source_id -> ImageEmbedding with explicit missing ids.

    Ids carrying a NOFACE or ERROR marker in the source file are remembered
    as missing so callers can distinguish "no usable image" from "never
    extracted".
    """

    def __init__(self, dim: int) -> None:
        if dim < 1:
            raise InputError(f"embedding dim must be positive, got {dim}")
        self.dim = dim
        self._vectors: dict[str, ImageEmbedding] = {}
        self.missing: set[str] = set()

    def add(self, source_id: str, vector: tuple[float, ...]) -> None:
        self._vectors[source_id] = ImageEmbedding(vector=vector, dim=self.dim,
                                                  source_id=source_id)

    def mark_missing(self, source_id: str) -> None:
        self.missing.add(source_id)

    def get(self, source_id: str) -> ImageEmbedding | None:
        return self._vectors.get(source_id)

    def __len__(self) -> int:
        return len(self._vectors)

    def ids(self) -> list[str]:
        return sorted(self._vectors)


MARKER_LINES = ("NOFACE", "ERROR")


def read_embeddings(path: str) -> EmbeddingStore:
    """Parse an embedding file: header ``dim=<N>``, then one record per line.

    A record is ``<source_id> <N floats>`` or ``<source_id> NOFACE|ERROR``.
    """
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("dim="):
            raise InputError(f"{path}: missing dim= header, got {header!r}")
        try:
            dim = int(header[4:])
        except ValueError:
            raise InputError(f"{path}: bad dim header {header!r}") from None
        store = EmbeddingStore(dim)
        for lineno, line in enumerate(fh, 2):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            source_id = parts[0]
            if len(parts) == 2 and parts[1] in MARKER_LINES:
                store.mark_missing(source_id)
                continue
            if len(parts) - 1 != dim:
                raise InputError(f"{path}:{lineno}: expected {dim} values, "
                                 f"got {len(parts) - 1}")
            try:
                vector = tuple(float(p) for p in parts[1:])
            except ValueError:
                raise InputError(f"{path}:{lineno}: non-numeric component") from None
            store.add(source_id, vector)
    return store


def write_embeddings(path: str, store: EmbeddingStore) -> None:
    """Write a store back out; floats carry 9 significant digits."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"dim={store.dim}\n")
        for source_id in store.ids():
            emb = store.get(source_id)
            assert emb is not None
            values = " ".join(f"{v:.9g}" for v in emb.vector)
            fh.write(f"{source_id} {values}\n")
        for source_id in sorted(store.missing):
            fh.write(f"{source_id} NOFACE\n")
