import os

import pytest

from squadkit.features import fit_normalizer, normalize_dataset, read_labeled_csv
from squadkit.learn import HyperParams, save_model, smote, train_forest

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES_DIR = os.path.join(REPO_ROOT, "fixtures")
DEMO_DIR = os.path.join(FIXTURES_DIR, "demo")
LABELED_CSV = os.path.join(FIXTURES_DIR, "labeled_pairs.csv")


@pytest.fixture(scope="session")
def labeled_dataset():
    return read_labeled_csv(LABELED_CSV)


@pytest.fixture(scope="session")
def trained_model_path(tmp_path_factory, labeled_dataset):
    """A forest trained on the bundled labeled fixture, persisted with its
    scaler. Tuning is exercised separately; this fixture trains one fixed
    configuration for speed."""
    scaler = fit_normalizer([ex.features for ex in labeled_dataset])
    normalized = normalize_dataset(scaler, labeled_dataset)
    balanced = smote(normalized, k=5, rng_seed=0)
    model = train_forest(balanced, HyperParams(n_estimators=40, max_depth=10),
                         rng_seed=0, scaler=scaler)
    path = tmp_path_factory.mktemp("model") / "squad.model"
    save_model(str(path), model)
    return str(path)
