"""Username variant generation engine.

Ten primitive string-generation models, model self-repetition (bounded
fixed-point closure) and model stacking, all under platform username
constraints. Everything here is pure and deterministic: the same seed and
config always produce the same variant list, so callers may parallelize
across seeds freely.
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .errors import ConfigError, InputError
from .similarity import levenshtein

DEFAULT_MAX_LEN = 15
DEFAULT_CHARSET = frozenset(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_"
)

_VOWELS = "aeiou"
_VOWEL_SET = frozenset("aeiouAEIOU")
_DIGITS = "0123456789"
_DIGIT_SET = frozenset(_DIGITS)


class GenerationModelId(enum.Enum):
    VOWEL_INSERTION = "VowelInsertion"
    DOUBLE_CHAR_INSERTION = "DoubleCharInsertion"
    NUMBER_INSERTION = "NumberInsertion"
    UNDERSCORE_INSERTION = "UnderscoreInsertion"
    VOWEL_DELETION = "VowelDeletion"
    DOUBLE_CHAR_DELETION = "DoubleCharDeletion"
    NUMBER_DELETION = "NumberDeletion"
    UNDERSCORE_DELETION = "UnderscoreDeletion"
    VOWEL_SUBSTITUTION = "VowelSubstitution"
    MISSPELLINGS = "Misspellings"

    @classmethod
    def parse(cls, name: str) -> "GenerationModelId":
        for member in cls:
            if member.value.lower() == name.lower() or member.name.lower() == name.lower():
                return member
        raise InputError(f"unknown generation model {name!r}")


_MODEL_ORDER = {m: i for i, m in enumerate(GenerationModelId)}

INSERTION_MODELS = frozenset({
    GenerationModelId.VOWEL_INSERTION,
    GenerationModelId.DOUBLE_CHAR_INSERTION,
    GenerationModelId.NUMBER_INSERTION,
    GenerationModelId.UNDERSCORE_INSERTION,
})
DELETION_MODELS = frozenset({
    GenerationModelId.VOWEL_DELETION,
    GenerationModelId.DOUBLE_CHAR_DELETION,
    GenerationModelId.NUMBER_DELETION,
    GenerationModelId.UNDERSCORE_DELETION,
})

# Pattern families: ck/c/k confusion, ph->f, ie<->ei, qu->kw, rn->m, digit
# lookalikes 0<->o and 1<->l, i<->l, s<->z, and double-letter collapses.
DEFAULT_MISSPELLINGS: tuple[tuple[str, str], ...] = (
    ("ck", "k"),
    ("c", "k"),
    ("k", "c"),
    ("ph", "f"),
    ("ie", "ei"),
    ("ei", "ie"),
    ("qu", "kw"),
    ("rn", "m"),
    ("0", "o"),
    ("o", "0"),
    ("1", "l"),
    ("l", "1"),
    ("i", "l"),
    ("l", "i"),
    ("s", "z"),
    ("z", "s"),
    ("ll", "l"),
    ("ss", "s"),
    ("tt", "t"),
    ("mm", "m"),
    ("nn", "n"),
    ("ee", "e"),
    ("oo", "o"),
)


@dataclass(frozen=True)
class UsernameConstraints:
    max_len: int = DEFAULT_MAX_LEN
    min_len: int = 1
    charset: frozenset[str] = DEFAULT_CHARSET
    case_insensitive_identity: bool = True

    def __post_init__(self) -> None:
        if not (self.max_len >= self.min_len >= 1):
            raise ConfigError(f"require max_len >= min_len >= 1, got "
                              f"{self.max_len}/{self.min_len}")
        if not self.charset:
            raise ConfigError("charset must be nonempty")


def validate_username(candidate: str, constraints: UsernameConstraints) -> bool:
    """True iff the candidate's length and characters satisfy the constraints."""
    if not (constraints.min_len <= len(candidate) <= constraints.max_len):
        return False
    charset = constraints.charset
    return all(ch in charset for ch in candidate)


@dataclass(frozen=True, slots=True)
class VariantRecord:
    username: str
    seed: str
    provenance: tuple[GenerationModelId, ...]
    repetition_depth: int
    edit_distance: int

    def provenance_label(self) -> str:
        return "+".join(m.value for m in self.provenance)


@dataclass(frozen=True)
class GenerationConfig:
    """Which models run and how far the closures may expand.

    max_repetition_depth caps every self-repetition closure; during stacking
    the two stages share this budget (at least one application each). None
    removes the cap and expands to the max_len fixed point, which is
    intractable for the digit-affix models on short seeds.
    """

    enabled_models: frozenset[GenerationModelId] = frozenset(GenerationModelId)
    self_repetition: bool = True
    stacking: bool = True
    stacking_pairs: frozenset[tuple[GenerationModelId, GenerationModelId]] | None = None
    misspelling_table: tuple[tuple[str, str], ...] = DEFAULT_MISSPELLINGS
    constraints: UsernameConstraints = field(default_factory=UsernameConstraints)
    max_repetition_depth: int | None = 3

    def __post_init__(self) -> None:
        if self.max_repetition_depth is not None and self.max_repetition_depth < 1:
            raise ConfigError("max_repetition_depth must be >= 1 or None")
        for pattern, replacement in self.misspelling_table:
            if not pattern:
                raise ConfigError("misspelling pattern must be nonempty")
            if pattern == replacement:
                raise ConfigError(f"misspelling pattern equals replacement: {pattern!r}")
            bad = [ch for ch in replacement if ch not in self.constraints.charset
                   and ch.upper() not in self.constraints.charset]
            if bad:
                raise ConfigError(f"misspelling replacement {replacement!r} uses "
                                  f"characters outside the charset: {bad}")
        if self.stacking_pairs is not None:
            for first, second in self.stacking_pairs:
                if first == second:
                    raise ConfigError(f"stacking pair ({first.value}, {second.value}) "
                                      "repeats one model")
                if first not in self.enabled_models or second not in self.enabled_models:
                    raise ConfigError("stacking pairs may only use enabled models")

    def ordered_models(self) -> list[GenerationModelId]:
        return [m for m in GenerationModelId if m in self.enabled_models]

    def ordered_pairs(self) -> list[tuple[GenerationModelId, GenerationModelId]]:
        if self.stacking_pairs is not None:
            return sorted(self.stacking_pairs,
                          key=lambda p: (_MODEL_ORDER[p[0]], _MODEL_ORDER[p[1]]))
        models = self.ordered_models()
        return [(a, b) for a in models for b in models if a != b]


# --- primitive expansion -----------------------------------------------------
# Each expander returns the raw single-application candidates; validity and
# dedup happen in the closure loop.

def _expand_vowel_insertion(u: str) -> list[str]:
    return [u[:i + 1] + ch.lower() + u[i + 1:]
            for i, ch in enumerate(u) if ch in _VOWEL_SET]


def _expand_double_char_insertion(u: str) -> list[str]:
    return [u[:i + 1] + u[i] + u[i + 1:]
            for i in range(len(u) - 1) if u[i] == u[i + 1]]


def _expand_number_insertion(u: str) -> list[str]:
    out = [d + u for d in _DIGITS]
    out += [u + d for d in _DIGITS]
    return out


def _expand_underscore_insertion(u: str) -> list[str]:
    return ["_" + u, u + "_"]


def _expand_vowel_deletion(u: str) -> list[str]:
    return [u[:i] + u[i + 1:] for i, ch in enumerate(u) if ch in _VOWEL_SET]


def _expand_double_char_deletion(u: str) -> list[str]:
    return [u[:i] + u[i + 2:]
            for i in range(len(u) - 1) if u[i] == u[i + 1]]


def _expand_number_deletion(u: str) -> list[str]:
    out = []
    if u and u[0] in _DIGIT_SET:
        out.append(u[1:])
    if u and u[-1] in _DIGIT_SET:
        out.append(u[:-1])
    return out


def _expand_underscore_deletion(u: str) -> list[str]:
    return [u[:i] + u[i + 1:] for i, ch in enumerate(u) if ch == "_"]


def _expand_vowel_substitution(u: str) -> list[str]:
    out = []
    for i, ch in enumerate(u):
        if ch in _VOWEL_SET:
            lower = ch.lower()
            upper = ch.isupper()
            for v in _VOWELS:
                if v != lower:
                    out.append(u[:i] + (v.upper() if upper else v) + u[i + 1:])
    return out


def _make_misspelling_expander(table: tuple[tuple[str, str], ...]) -> Callable[[str], list[str]]:
    def expand(u: str) -> list[str]:
        lower = u.lower()
        out = []
        for pattern, replacement in table:
            start = lower.find(pattern)
            while start != -1:
                matched = u[start:start + len(pattern)]
                rep = replacement
                if matched[0].isupper():
                    rep = rep[0].upper() + rep[1:]
                out.append(u[:start] + rep + u[start + len(pattern):])
                start = lower.find(pattern, start + 1)
        return out

    return expand


_STATIC_EXPANDERS: dict[GenerationModelId, Callable[[str], list[str]]] = {
    GenerationModelId.VOWEL_INSERTION: _expand_vowel_insertion,
    GenerationModelId.DOUBLE_CHAR_INSERTION: _expand_double_char_insertion,
    GenerationModelId.NUMBER_INSERTION: _expand_number_insertion,
    GenerationModelId.UNDERSCORE_INSERTION: _expand_underscore_insertion,
    GenerationModelId.VOWEL_DELETION: _expand_vowel_deletion,
    GenerationModelId.DOUBLE_CHAR_DELETION: _expand_double_char_deletion,
    GenerationModelId.NUMBER_DELETION: _expand_number_deletion,
    GenerationModelId.UNDERSCORE_DELETION: _expand_underscore_deletion,
    GenerationModelId.VOWEL_SUBSTITUTION: _expand_vowel_substitution,
}

# Characters a model can introduce beyond those already in the input string.
_INTRODUCED_CHARS: dict[GenerationModelId, frozenset[str]] = {
    GenerationModelId.VOWEL_INSERTION: frozenset(_VOWELS),
    GenerationModelId.DOUBLE_CHAR_INSERTION: frozenset(),
    GenerationModelId.NUMBER_INSERTION: _DIGIT_SET,
    GenerationModelId.UNDERSCORE_INSERTION: frozenset("_"),
    GenerationModelId.VOWEL_DELETION: frozenset(),
    GenerationModelId.DOUBLE_CHAR_DELETION: frozenset(),
    GenerationModelId.NUMBER_DELETION: frozenset(),
    GenerationModelId.UNDERSCORE_DELETION: frozenset(),
    GenerationModelId.VOWEL_SUBSTITUTION: frozenset(_VOWELS + _VOWELS.upper()),
}


def _expander_for(model: GenerationModelId,
                  config: GenerationConfig) -> Callable[[str], list[str]]:
    if model is GenerationModelId.MISSPELLINGS:
        return _make_misspelling_expander(config.misspelling_table)
    return _STATIC_EXPANDERS[model]


def _charset_safe(model: GenerationModelId, config: GenerationConfig) -> bool:
    charset = config.constraints.charset
    if model is GenerationModelId.MISSPELLINGS:
        chars = {ch for _, rep in config.misspelling_table for ch in rep}
        chars |= {ch.upper() for ch in chars}
    else:
        chars = set(_INTRODUCED_CHARS[model])
    return chars <= charset


def _closure(model: GenerationModelId, username: str, config: GenerationConfig,
             max_depth: int | None) -> dict[str, int]:
    """BFS fixed point of one model; maps each new variant to its discovery depth.

    Insertions terminate at max_len, deletions exhaust the string, and
    max_depth (when set) caps the number of applications.
    """
    constraints = config.constraints
    min_len, max_len = constraints.min_len, constraints.max_len
    expand = _expander_for(model, config)
    # Inductively every candidate stays inside the charset unless the model
    # introduces characters from outside it; only then check per candidate.
    fast = _charset_safe(model, config)
    charset = constraints.charset
    seen = {username.lower()}
    frontier = [username]
    found: dict[str, int] = {}
    depth = 0
    while frontier and (max_depth is None or depth < max_depth):
        depth += 1
        next_frontier = []
        for base in frontier:
            for cand in expand(base):
                if not (min_len <= len(cand) <= max_len):
                    continue
                key = cand.lower()
                if key in seen:
                    continue
                if not fast and not all(ch in charset for ch in cand):
                    continue
                seen.add(key)
                found[cand] = depth
                next_frontier.append(cand)
        frontier = next_frontier
    return found


def _edit_distance(seed: str, username: str,
                   provenance: tuple[GenerationModelId, ...]) -> int:
    # Insertion-only chains keep the seed as a subsequence (and vice versa
    # for deletions), so the length delta is the exact Levenshtein distance.
    if all(m in INSERTION_MODELS for m in provenance):
        return len(username) - len(seed)
    if all(m in DELETION_MODELS for m in provenance):
        return len(seed) - len(username)
    return levenshtein(seed, username)


def _require_valid(username: str, constraints: UsernameConstraints) -> None:
    if not validate_username(username, constraints):
        raise InputError(f"username {username!r} violates the active constraints")


def apply_primitive(model: GenerationModelId, username: str,
                    config: GenerationConfig) -> list[str]:
    """All single-application outputs of one model: valid, deduplicated,
    distinct from the input. Empty when the model has no applicable site."""
    _require_valid(username, config.constraints)
    return list(_closure(model, username, config, max_depth=1))


def self_repeat(model: GenerationModelId, username: str,
                config: GenerationConfig) -> list[VariantRecord]:
    """Bounded fixed-point closure of one model, depth-annotated.

    Depth 1 entries are the single-application outputs; deeper entries are
    only reachable by repeated application.
    """
    _require_valid(username, config.constraints)
    found = _closure(model, username, config, config.max_repetition_depth)
    provenance = (model,)
    return [
        VariantRecord(username=name, seed=username, provenance=provenance,
                      repetition_depth=depth,
                      edit_distance=_edit_distance(username, name, provenance))
        for name, depth in found.items()
    ]


def _stage_budget(config: GenerationConfig) -> int | None:
    # Without self-repetition, stacking composes single applications.
    if not config.self_repetition:
        return 2
    return config.max_repetition_depth


def _single_model_names(username: str, config: GenerationConfig) -> set[str]:
    cap = config.max_repetition_depth if config.self_repetition else 1
    names: set[str] = set()
    for model in config.ordered_models():
        names.update(k.lower() for k in _closure(model, username, config, cap))
    return names


def stack_models(first: GenerationModelId, second: GenerationModelId,
                 username: str, config: GenerationConfig) -> list[VariantRecord]:
    """Apply the self-repeated first model, then the self-repeated second model
    to every intermediate variant. Outputs reproducible by any single enabled
    model on its own are dropped; the two stages share the repetition budget.
    """
    if first == second:
        raise ConfigError(f"stacking pair ({first.value}, {second.value}) repeats one model")
    _require_valid(username, config.constraints)
    excluded = _single_model_names(username, config)
    excluded.add(username.lower())
    return _stack_into(first, second, username, config, excluded, {})


def _stack_into(first: GenerationModelId, second: GenerationModelId,
                username: str, config: GenerationConfig, excluded: set[str],
                stage1_cache: dict[GenerationModelId, dict[str, int]]) -> list[VariantRecord]:
    budget = _stage_budget(config)
    stage1_cap = None if budget is None else budget - 1
    if stage1_cap is not None and stage1_cap < 1:
        return []
    if first not in stage1_cache:
        stage1_cache[first] = _closure(first, username, config, stage1_cap)
    provenance = (first, second)
    records: list[VariantRecord] = []
    seen_here: set[str] = set()
    for base, depth1 in stage1_cache[first].items():
        stage2_cap = None if budget is None else budget - depth1
        if stage2_cap is not None and stage2_cap < 1:
            continue
        for name, depth2 in _closure(second, base, config, stage2_cap).items():
            key = name.lower()
            if key in excluded or key in seen_here:
                continue
            seen_here.add(key)
            records.append(VariantRecord(
                username=name, seed=username, provenance=provenance,
                repetition_depth=depth1 + depth2,
                edit_distance=_edit_distance(username, name, provenance)))
    return records


def generate_all(seed: str, config: GenerationConfig) -> list[VariantRecord]:
    """Union of every enabled primitive, self-repetition closure and stacked
    pair, globally deduplicated case-insensitively with the seed excluded.

    The returned list is duplicate-free and in deterministic discovery order;
    the first producing model wins a contested username.
    """
    if not validate_username(seed, config.constraints):
        raise InputError(f"seed {seed!r} violates the active constraints")
    seed_key = seed.lower()
    cap = config.max_repetition_depth if config.self_repetition else 1
    records: dict[str, VariantRecord] = {}
    closures: dict[GenerationModelId, dict[str, int]] = {}

    for model in config.ordered_models():
        found = _closure(model, seed, config, cap)
        closures[model] = found
        provenance = (model,)
        for name, depth in found.items():
            key = name.lower()
            if key == seed_key or key in records:
                continue
            records[key] = VariantRecord(
                username=name, seed=seed, provenance=provenance,
                repetition_depth=depth,
                edit_distance=_edit_distance(seed, name, provenance))

    if config.stacking:
        budget = _stage_budget(config)
        stage1_cap = None if budget is None else budget - 1
        stage1_cache: dict[GenerationModelId, dict[str, int]] = {}
        if stage1_cap is None:
            # Budget is unbounded only when the phase-1 closures were too.
            stage1_cache.update(closures)
        elif stage1_cap >= 1:
            # Reuse phase-1 BFS results: entries at depth <= cap form exactly
            # the capped closure.
            for model, found in closures.items():
                stage1_cache[model] = {n: d for n, d in found.items() if d <= stage1_cap}
        excluded = set(records)
        excluded.add(seed_key)
        for first, second in config.ordered_pairs():
            for rec in _stack_into(first, second, seed, config, excluded, stage1_cache):
                key = rec.username.lower()
                excluded.add(key)
                records[key] = rec

    return list(records.values())


# --- exports ------------------------------------------------------------------

VARIANT_CSV_COLUMNS = ("username", "seed", "provenance", "depth", "edit_distance")


def write_variants_csv(path: str, records: Iterable[VariantRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(VARIANT_CSV_COLUMNS)
        for rec in records:
            writer.writerow([rec.username, rec.seed, rec.provenance_label(),
                             rec.repetition_depth, rec.edit_distance])


def read_variants_csv(path: str) -> list[VariantRecord]:
    records = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(VARIANT_CSV_COLUMNS) - set(reader.fieldnames or [])
        if missing:
            raise InputError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            provenance = tuple(GenerationModelId.parse(p)
                               for p in row["provenance"].split("+") if p)
            records.append(VariantRecord(
                username=row["username"], seed=row["seed"], provenance=provenance,
                repetition_depth=int(row["depth"]),
                edit_distance=int(row["edit_distance"])))
    return records


def write_variants_jsonl(path: str, records: Iterable[VariantRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps({
                "username": rec.username,
                "seed": rec.seed,
                "provenance": rec.provenance_label(),
                "depth": rec.repetition_depth,
                "edit_distance": rec.edit_distance,
            }, sort_keys=True))
            fh.write("\n")
