"""squadkit command line: generate, filter, extract, train, scan, and the
measurement subcommands.

Exit codes: 0 success, 2 usage error, 3 data error, 4 backend error.
"""

from __future__ import annotations

import csv
import functools
import json
import sys
import time

import click

from . import datasource as ds_mod
from .errors import BackendError, ConfigError, InputError
from .features import (
    extract_features,
    fit_normalizer,
    normalize_dataset,
    read_labeled_csv,
    write_features_csv,
)
from .genmodels import (
    GenerationConfig,
    GenerationModelId,
    UsernameConstraints,
    generate_all,
    read_variants_csv,
    write_variants_csv,
    write_variants_jsonl,
)
from .learn import (
    HyperParams,
    default_grid,
    evaluate,
    save_model,
    smote,
    train_forest,
    tune_hyperparams,
)
from .mentions import (
    TypoVerdict,
    aggregate_typo_stats,
    analyze_tweet_content,
    classify_mention,
    search_rank_probe,
    split_actual_tweets,
)
from .pipeline import (
    DEFAULT_POST_FILTER_KEYWORDS,
    PipelineConfig,
    load_scan_model,
    report_from_json,
    report_render,
    scan,
)
from .synthetic import train_test_split

EXIT_DATA_ERROR = 3
EXIT_BACKEND_ERROR = 4


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (InputError, ConfigError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_DATA_ERROR)
        except BackendError as exc:
            click.echo(f"backend error: {exc}", err=True)
            sys.exit(EXIT_BACKEND_ERROR)

    return wrapper


def common_options(fn):
    fn = click.option("--fixtures", type=click.Path(exists=True, file_okay=False),
                      default=None, help="Fixture store directory.")(fn)
    fn = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                      default=None, help="JSON config file.")(fn)
    fn = click.option("--seed-rng", type=int, default=0, show_default=True,
                      help="Root RNG seed for anything randomized.")(fn)
    fn = click.option("--out", type=click.Path(dir_okay=False), default=None,
                      help="Output file path.")(fn)
    return fn


def load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: {exc}") from None
    if not isinstance(payload, dict):
        raise InputError(f"{path}: config must be a JSON object")
    return payload


def build_generation_config(cfg: dict, models: str | None, no_stacking: bool,
                            no_self_repetition: bool, max_len: int | None,
                            min_len: int | None, max_depth: int | None) -> GenerationConfig:
    gen_cfg = cfg.get("generation", {})
    if models:
        enabled = frozenset(GenerationModelId.parse(m.strip())
                            for m in models.split(",") if m.strip())
    elif "models" in gen_cfg:
        enabled = frozenset(GenerationModelId.parse(m) for m in gen_cfg["models"])
    else:
        enabled = frozenset(GenerationModelId)
    constraints = UsernameConstraints(
        max_len=max_len if max_len is not None else int(gen_cfg.get("max_len", 15)),
        min_len=min_len if min_len is not None else int(gen_cfg.get("min_len", 1)),
    )
    depth = max_depth if max_depth is not None else gen_cfg.get("max_repetition_depth", 3)
    return GenerationConfig(
        enabled_models=enabled,
        self_repetition=not no_self_repetition and gen_cfg.get("self_repetition", True),
        stacking=not no_stacking and gen_cfg.get("stacking", True),
        constraints=constraints,
        max_repetition_depth=None if depth is None else int(depth),
    )


def require_fixtures(fixtures: str | None) -> ds_mod.FixtureDataSource:
    if fixtures is None:
        raise InputError("--fixtures <dir> is required for this command")
    return ds_mod.load_fixture_dir(fixtures)


def read_seed_list(seeds_file: str) -> list[str]:
    with open(seeds_file, "r", encoding="utf-8") as fh:
        seeds = [line.strip() for line in fh if line.strip()]
    if not seeds:
        raise InputError(f"{seeds_file}: no seeds found")
    return seeds


def load_categories(fixtures: str | None) -> dict[str, str]:
    if fixtures is None:
        return {}
    import os
    path = os.path.join(fixtures, "categories.csv")
    if not os.path.exists(path):
        return {}
    categories = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            categories[row["username"].lower()] = row["category"]
    return categories


@click.group()
@click.version_option(package_name="squadkit")
def cli() -> None:
    """Username-squatting variant generation, discovery and classification."""


@cli.command()
@common_options
@click.option("--seeds", "seeds_file", type=click.Path(exists=True, dir_okay=False),
              help="File with one seed username per line.")
@click.option("--seed", "single_seeds", multiple=True, help="Seed username (repeatable).")
@click.option("--models", default=None, help="Comma-separated model names (default: all).")
@click.option("--no-stacking", is_flag=True, default=False)
@click.option("--no-self-repetition", is_flag=True, default=False)
@click.option("--max-len", type=int, default=None, help="Maximum username length (default 15).")
@click.option("--min-len", type=int, default=None)
@click.option("--max-depth", type=int, default=None,
              help="Repetition depth cap per closure (default 3).")
@click.option("--format", "fmt", type=click.Choice(["csv", "jsonl"]), default="csv",
              show_default=True)
@handle_errors
def generate(fixtures, config_path, seed_rng, out, seeds_file, single_seeds, models,
             no_stacking, no_self_repetition, max_len, min_len, max_depth, fmt):
    """Generate squatted username variants for seed accounts."""
    cfg = load_config_file(config_path)
    gen_config = build_generation_config(cfg, models, no_stacking,
                                         no_self_repetition, max_len, min_len, max_depth)
    seeds = list(single_seeds)
    if seeds_file:
        seeds.extend(read_seed_list(seeds_file))
    if not seeds:
        raise click.UsageError("provide --seeds <file> or --seed <name>")

    started = time.perf_counter()
    records = []
    for seed in seeds:
        found = generate_all(seed, gen_config)
        records.extend(found)
        click.echo(f"{seed}: {len(found)} variants")
    elapsed = time.perf_counter() - started
    rate = len(records) / elapsed if elapsed > 0 else float("inf")
    click.echo(f"total {len(records)} variants from {len(seeds)} seeds "
               f"in {elapsed:.2f}s ({rate:,.0f}/s)")
    if out:
        if fmt == "csv":
            write_variants_csv(out, records)
        else:
            write_variants_jsonl(out, records)
        click.echo(f"wrote {out}")


@cli.command("filter")
@common_options
@click.option("--variants", "variants_file", type=click.Path(exists=True, dir_okay=False),
              required=True, help="Variants CSV produced by generate.")
@handle_errors
def filter_cmd(fixtures, config_path, seed_rng, out, variants_file):
    """Partition generated variants by account status."""
    ds = require_fixtures(fixtures)
    variants = read_variants_csv(variants_file)
    partition = ds_mod.filter_variants(variants, ds)
    click.echo(json.dumps(partition.counts(), sort_keys=True))
    if out:
        payload = {
            "active": [v.username for v, _ in partition.active],
            "suspended": [v.username for v in partition.suspended],
            "not_found": [v.username for v in partition.not_found],
            "unresolved": [[v.username, err] for v, err in partition.unresolved],
        }
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=2)
        click.echo(f"wrote {out}")


@cli.command()
@common_options
@click.option("--seed", "seed_name", required=True, help="Seed username.")
@click.option("--variants", "variants_file", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Variants CSV; generated on the fly when omitted.")
@handle_errors
def extract(fixtures, config_path, seed_rng, out, seed_name, variants_file):
    """Extract raw pairwise features for the seed's active variants."""
    from .features import AccountStatus

    ds = require_fixtures(fixtures)
    cfg = load_config_file(config_path)
    entry = ds.lookup_accounts([seed_name])[seed_name]
    if entry.status is not AccountStatus.ACTIVE or entry.record is None:
        raise InputError(f"seed {seed_name!r} is {entry.status.value}")
    if variants_file:
        variants = read_variants_csv(variants_file)
    else:
        gen_config = build_generation_config(cfg, None, False, False, None, None, None)
        variants = generate_all(seed_name, gen_config)
    partition = ds_mod.filter_variants(variants, ds)
    rows = []
    for variant, account in partition.active:
        fv = extract_features(entry.record, account, ds, ds.embeddings)
        rows.append(((seed_name, variant.username), fv))
    click.echo(f"extracted {len(rows)} feature rows "
               f"({len(partition.suspended)} suspended, "
               f"{len(partition.not_found)} not found)")
    if out:
        write_features_csv(out, rows)
        click.echo(f"wrote {out}")


def _parse_grid_file(path: str) -> list[HyperParams]:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if not isinstance(payload, list):
        raise InputError(f"{path}: grid must be a JSON array")
    grid = []
    for item in payload:
        grid.append(HyperParams(
            n_estimators=int(item.get("n_estimators", 100)),
            min_samples_split=int(item.get("min_samples_split", 2)),
            min_samples_leaf=int(item.get("min_samples_leaf", 1)),
            max_features=item.get("max_features", "sqrt"),
            max_depth=item.get("max_depth"),
            bootstrap=bool(item.get("bootstrap", True)),
        ))
    return grid


@cli.command()
@common_options
@click.option("--dataset", "dataset_file", type=click.Path(exists=True, dir_okay=False),
              required=True, help="Labeled pairs CSV.")
@click.option("--smote-k", type=int, default=5, show_default=True)
@click.option("--folds", type=int, default=5, show_default=True)
@click.option("--grid", "grid_file", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON array of hyperparameter objects.")
@click.option("--test-fraction", type=float, default=0.3, show_default=True)
@handle_errors
def train(fixtures, config_path, seed_rng, out, dataset_file, smote_k, folds,
          grid_file, test_fraction):
    """Train the classifier: split, scale, balance, tune, fit, evaluate."""
    if out is None:
        raise click.UsageError("--out <model file> is required")
    dataset = read_labeled_csv(dataset_file)
    train_set, test_set = train_test_split(dataset, test_fraction, rng_seed=seed_rng)
    scaler = fit_normalizer([ex.features for ex in train_set])
    train_norm = normalize_dataset(scaler, train_set)
    test_norm = normalize_dataset(scaler, test_set)
    balanced = smote(train_norm, k=smote_k, rng_seed=seed_rng)
    grid = _parse_grid_file(grid_file) if grid_file else default_grid()
    best, trace = tune_hyperparams(balanced, grid, folds=folds, rng_seed=seed_rng)
    for hp, f1 in trace:
        click.echo(f"grid n={hp.n_estimators} split={hp.min_samples_split} "
                   f"leaf={hp.min_samples_leaf} feat={hp.max_features} "
                   f"depth={hp.max_depth} bootstrap={hp.bootstrap} -> cv_f1={f1:.4f}")
    model = train_forest(balanced, best, rng_seed=seed_rng, scaler=scaler)
    save_model(out, model)
    click.echo(f"wrote {out}")
    if test_norm:
        report = evaluate(model, test_norm)
        tp, fp, tn, fn = report.confusion
        click.echo(f"holdout: tp={tp} fp={fp} tn={tn} fn={fn} "
                   f"precision={report.precision:.4f} recall={report.recall:.4f} "
                   f"f1={report.f1:.4f} accuracy={report.accuracy:.4f} "
                   f"auc={report.auc:.4f}")


@cli.command("scan")
@common_options
@click.option("--seed", "seed_name", required=True, help="Seed username to scan.")
@click.option("--model", "model_path", type=click.Path(dir_okay=False), required=True)
@click.option("--threshold", type=float, default=None,
              help="Suspicion probability threshold (default 0.5).")
@click.option("--post-filter-keywords", default=None,
              help="Comma-separated bio keywords (default fan,parody).")
@click.option("--face-required", is_flag=True, default=False)
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="json",
              show_default=True)
@handle_errors
def scan_cmd(fixtures, config_path, seed_rng, out, seed_name, model_path, threshold,
             post_filter_keywords, face_required, fmt):
    """Run the end-to-end squatting scan for one seed account."""
    ds = require_fixtures(fixtures)
    cfg = load_config_file(config_path)
    gen_config = build_generation_config(cfg, None, False, False, None, None, None)
    if post_filter_keywords is not None:
        keywords = tuple(k.strip() for k in post_filter_keywords.split(",") if k.strip())
    else:
        keywords = tuple(cfg.get("post_filter_keywords", DEFAULT_POST_FILTER_KEYWORDS))
    config = PipelineConfig(
        generation=gen_config,
        model_path=model_path,
        threshold=threshold if threshold is not None else float(cfg.get("threshold", 0.5)),
        post_filter_keywords=keywords,
        face_required=face_required or bool(cfg.get("face_required", False)),
    )
    model = load_scan_model(model_path)
    report = scan(seed_name, ds, config, model=model)
    rendered = report_render(report, fmt)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(rendered)
        click.echo(f"wrote {out}")
    else:
        click.echo(rendered, nl=False)


@cli.command("typo-mentions")
@common_options
@click.option("--seed", "seed_name", required=True)
@handle_errors
def typo_mentions(fixtures, config_path, seed_rng, out, seed_name):
    """Classify mentions of the seed's variants as typo or purposeful."""
    ds = require_fixtures(fixtures)
    records = [t for t in ds.tweets if t.seed.lower() == seed_name.lower()]
    actual, excluded = split_actual_tweets(records)
    verdicts = [classify_mention(record, ds) for record in actual]
    report = aggregate_typo_stats(actual, verdicts, load_categories(fixtures))
    report.excluded_kinds = excluded
    lines = ["verdict\tcount"]
    for verdict in TypoVerdict:
        lines.append(f"{verdict.value}\t{report.totals[verdict.value]}")
    lines.append("")
    lines.append("category\ttypo_mention\tpurposeful_mention")
    for category in sorted(report.by_category):
        counts = report.by_category[category]
        lines.append(f"{category}\t{counts['typo_mention']}\t{counts['purposeful_mention']}")
    lines.append("")
    lines.append("ed_bucket\ttypo_mention\tpurposeful_mention")
    for bucket, counts in report.by_ed_bucket.items():
        lines.append(f"{bucket}\t{counts['typo_mention']}\t{counts['purposeful_mention']}")
    lines.append("")
    lines.append("excluded_kind\tcount")
    for kind in sorted(excluded):
        lines.append(f"{kind}\t{excluded[kind]}")
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        click.echo(f"wrote {out}")
    else:
        click.echo(text, nl=False)


@cli.command("rank-probe")
@common_options
@click.option("--seed", "seed_name", required=True)
@click.option("--max-results", type=int, default=1000, show_default=True)
@handle_errors
def rank_probe(fixtures, config_path, seed_rng, out, seed_name, max_results):
    """Probe search recommendations with every prefix of the seed username."""
    ds = require_fixtures(fixtures)
    cfg = load_config_file(config_path)
    gen_config = build_generation_config(cfg, None, False, False, None, None, None)
    variant_names = [v.username for v in generate_all(seed_name, gen_config)]
    probes = search_rank_probe(ds, seed_name, max_results, variants=variant_names)
    lines = ["prefix\tseed_rank\tvariant_ranks"]
    for probe in probes:
        if probe.failed:
            lines.append(f"{probe.prefix}\tFAILED\t{probe.error}")
            continue
        ranks = ";".join(f"{name}={pos}" for name, pos in
                         sorted(probe.variant_ranks.items(), key=lambda kv: kv[1]))
        lines.append(f"{probe.prefix}\t{probe.seed_rank or '-'}\t{ranks or '-'}")
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        click.echo(f"wrote {out}")
    else:
        click.echo(text, nl=False)


@cli.command("content-risk")
@common_options
@click.option("--user", "users", multiple=True,
              help="Fixture account whose recent tweets are analyzed (repeatable).")
@click.option("--tweets", "tweets_file", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Plain text file, one tweet per line.")
@handle_errors
def content_risk(fixtures, config_path, seed_rng, out, users, tweets_file):
    """Check tweet texts for insecure URLs and follow-me phrases."""
    texts: list[str] = []
    authors: list[str] = []
    if users:
        ds = require_fixtures(fixtures)
        for user in users:
            fetched, note = ds.fetch_recent_tweets(user)
            if not fetched and note != "ok":
                click.echo(f"{user}: {note}", err=True)
            for tweet in fetched:
                texts.append(tweet.text)
                authors.append(tweet.mentioner)
    if tweets_file:
        with open(tweets_file, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if line:
                    texts.append(line)
                    authors.append("")
    if not texts:
        raise click.UsageError("provide --user and --fixtures, or --tweets <file>")
    report = analyze_tweet_content(texts, authors if users else None)
    payload = {
        "total_tweets": report.total_tweets,
        "url_count": report.url_count,
        "insecure_url_count": report.insecure_url_count,
        "insecure_urls": report.insecure_urls,
        "follow_me_count": report.follow_me_count,
        "distinct_follow_me_users": (sorted(report.follow_me_users)
                                     if report.follow_me_users is not None else None),
    }
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        click.echo(f"wrote {out}")
    else:
        click.echo(text, nl=False)


@cli.command("report")
@common_options
@click.option("--in", "in_file", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Scan report JSON.")
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="table",
              show_default=True)
@handle_errors
def report_cmd(fixtures, config_path, seed_rng, out, in_file, fmt):
    """Re-render a machine-readable scan report."""
    with open(in_file, "r", encoding="utf-8") as fh:
        report = report_from_json(fh.read())
    rendered = report_render(report, fmt)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(rendered)
        click.echo(f"wrote {out}")
    else:
        click.echo(rendered, nl=False)


def main() -> None:
    cli(prog_name="squadkit")


if __name__ == "__main__":
    main()
