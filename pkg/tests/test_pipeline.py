import pytest

from squadkit.datasource import FixtureDataSource, load_fixture_dir
from squadkit.errors import ConfigError, InputError
from squadkit.features import AccountRecord
from squadkit.genmodels import GenerationConfig, GenerationModelId
from squadkit.learn import load_model
from squadkit.mentions import ed_bucket
from squadkit.pipeline import (
    PipelineConfig,
    post_filter,
    report_from_json,
    report_render,
    scan,
)
from squadkit.similarity import levenshtein
from tests.conftest import DEMO_DIR

IMPERSONATORS = {"stellarnova1", "ste1larnova", "_stellarnova"}


class TestPostFilter:
    def test_parody_keyword(self):
        assert post_filter("Parody account — not affiliated") is True

    def test_fan_keyword_case_insensitive(self):
        assert post_filter("Biggest FAN of the king") is True

    def test_word_boundary_not_substring(self):
        assert post_filter("Fantastic news daily") is False

    def test_empty_bio(self):
        assert post_filter("") is False

    def test_custom_keywords(self):
        assert post_filter("Tribute page", keywords=("tribute",)) is True


@pytest.fixture(scope="module")
def demo_ds():
    return load_fixture_dir(DEMO_DIR)


@pytest.fixture()
def demo_config(trained_model_path):
    return PipelineConfig(model_path=trained_model_path)


class TestScan:
    def test_demo_scan_flags_exactly_the_impersonators(self, demo_ds, demo_config):
        report = scan("stellarnova", demo_ds, demo_config)
        flagged = {pair.variant for pair in report.suspicious_pairs}
        assert flagged == IMPERSONATORS
        assert report.post_filtered_count == 1
        assert report.benign_count == 8
        assert report.active == 12
        assert report.suspended == 2

    def test_conservation(self, demo_ds, demo_config):
        report = scan("stellarnova", demo_ds, demo_config)
        assert report.generated == (report.active + report.suspended
                                    + report.not_found + report.unresolved)

    def test_suspicious_sorted_by_probability_desc(self, demo_ds, demo_config):
        report = scan("stellarnova", demo_ds, demo_config)
        probs = [pair.probability for pair in report.suspicious_pairs]
        assert probs == sorted(probs, reverse=True)

    def test_histogram_matches_recomputation(self, demo_ds, demo_config):
        report = scan("stellarnova", demo_ds, demo_config)
        expected = {"1": 0, "2": 0, "3": 0, "4+": 0}
        seen = 0
        for name in [*IMPERSONATORS, "stellarnovaa", "stellarnova2", "9stellarnova",
                     "stellarnova_", "stelllarnova", "stellarnove", "stellernova",
                     "stearnova", "stellarn0va"]:
            expected[ed_bucket(levenshtein("stellarnova", name))] += 1
            seen += 1
        assert seen == report.active
        assert report.ed_histogram == expected

    def test_rerun_byte_identical(self, demo_ds, demo_config):
        first = report_render(scan("stellarnova", demo_ds, demo_config))
        second = report_render(scan("stellarnova", demo_ds, demo_config))
        assert first.encode() == second.encode()

    def test_threshold_monotonicity(self, demo_ds, trained_model_path):
        low = PipelineConfig(model_path=trained_model_path, threshold=0.2)
        high = PipelineConfig(model_path=trained_model_path, threshold=0.9)
        flagged_low = {p.variant for p in scan("stellarnova", demo_ds, low).suspicious_pairs}
        flagged_high = {p.variant for p in scan("stellarnova", demo_ds, high).suspicious_pairs}
        assert flagged_high <= flagged_low

    def test_keyword_monotonicity(self, demo_ds, trained_model_path):
        base = PipelineConfig(model_path=trained_model_path)
        more = PipelineConfig(model_path=trained_model_path,
                              post_filter_keywords=("fan", "parody", "giveaway"))
        flagged_base = {p.variant for p in scan("stellarnova", demo_ds, base).suspicious_pairs}
        flagged_more = {p.variant for p in scan("stellarnova", demo_ds, more).suspicious_pairs}
        assert flagged_more <= flagged_base

    def test_face_required_skips_missing_embeddings(self, demo_ds, trained_model_path):
        config = PipelineConfig(model_path=trained_model_path, face_required=True)
        report = scan("stellarnova", demo_ds, config)
        # 7 active variants carry no usable embedding (6 without a ref, one
        # NOFACE marker).
        assert report.skipped_no_face == 7
        assert {p.variant for p in report.suspicious_pairs} == IMPERSONATORS

    def test_seed_with_zero_existing_variants(self, trained_model_path):
        ds = FixtureDataSource(accounts=[AccountRecord(username="lonely",
                                                       profile_name="Lonely")])
        config = PipelineConfig(
            generation=GenerationConfig(
                enabled_models=frozenset({GenerationModelId.UNDERSCORE_INSERTION}),
                stacking=False),
            model_path=trained_model_path)
        report = scan("lonely", ds, config)
        assert report.active == 0
        assert report.suspicious_pairs == ()
        assert report.benign_count == 0

    def test_non_active_seed_rejected(self, demo_ds, demo_config):
        with pytest.raises(InputError):
            scan("stellarnova3", demo_ds, demo_config)  # suspended
        with pytest.raises(InputError):
            scan("ghost_account", demo_ds, demo_config)

    def test_missing_model_is_config_error(self, demo_ds):
        config = PipelineConfig(model_path="/nonexistent/model.file")
        with pytest.raises(ConfigError):
            scan("stellarnova", demo_ds, config)

    def test_model_without_scaler_rejected(self, demo_ds, trained_model_path, tmp_path):
        model = load_model(trained_model_path)
        model.scaler = None
        from squadkit.learn import save_model
        bare = tmp_path / "bare.model"
        save_model(str(bare), model)
        config = PipelineConfig(model_path=str(bare))
        with pytest.raises(ConfigError):
            scan("stellarnova", demo_ds, config)

    def test_threshold_validation(self):
        with pytest.raises(ConfigError):
            PipelineConfig(threshold=1.5)


class TestReportRendering:
    def test_json_round_trip(self, demo_ds, demo_config):
        report = scan("stellarnova", demo_ds, demo_config)
        rendered = report_render(report, "json")
        assert report_from_json(rendered) == report

    def test_table_format(self, demo_ds, demo_config):
        report = scan("stellarnova", demo_ds, demo_config)
        table = report_render(report, "table")
        assert "stellarnova" in table
        for name in IMPERSONATORS:
            assert name in table

    def test_unknown_format_rejected(self, demo_ds, demo_config):
        report = scan("stellarnova", demo_ds, demo_config)
        with pytest.raises(InputError):
            report_render(report, "yaml")
