import numpy as np
import pytest

from squadkit.errors import InputError
from squadkit.features import FEATURE_ORDER, FeatureVector, Label, LabeledExample
from squadkit.learn import (
    DECISION_THRESHOLD,
    ForestClassifier,
    ForestModel,
    HyperParams,
    Tree,
    auc_trapezoid,
    cross_val_f1,
    dataset_matrix,
    default_grid,
    evaluate,
    feature_importances,
    forest_probabilities,
    load_model,
    metrics_from_confusion,
    predict,
    roc_curve,
    save_model,
    smote,
    train_forest,
    tune_hyperparams,
)


def fv_with(**overrides) -> FeatureVector:
    values = {name: 0.0 for name in FEATURE_ORDER}
    values.update(overrides)
    return FeatureVector(**values)


def example(i, label, **overrides):
    return LabeledExample(("seed", f"v{i}"), fv_with(**overrides), label)


def blob_dataset(n_per_class=60, rng_seed=0, sep=2.0):
    """Two Gaussian blobs over (username_ed, bio_similarity)."""
    rng = np.random.default_rng(rng_seed)
    dataset = []
    for i in range(n_per_class):
        dataset.append(example(
            i, Label.SUSPICIOUS,
            username_ed=rng.normal(-sep / 2, 0.5),
            bio_similarity=rng.normal(-sep / 2, 0.5)))
    for i in range(n_per_class):
        dataset.append(example(
            n_per_class + i, Label.BENIGN,
            username_ed=rng.normal(sep / 2, 0.5),
            bio_similarity=rng.normal(sep / 2, 0.5)))
    return dataset


class TestSmote:
    def make_imbalanced(self, n_min=10, n_maj=30, rng_seed=0):
        rng = np.random.default_rng(rng_seed)
        dataset = []
        for i in range(n_min):
            dataset.append(example(i, Label.SUSPICIOUS,
                                   username_ed=rng.random(), bio_similarity=rng.random()))
        for i in range(n_maj):
            dataset.append(example(100 + i, Label.BENIGN,
                                   username_ed=rng.random(), bio_similarity=rng.random()))
        return dataset

    def test_balances_to_majority_size(self):
        out = smote(self.make_imbalanced(), k=5, rng_seed=1)
        by_label = {}
        for ex in out:
            by_label[ex.label] = by_label.get(ex.label, 0) + 1
        assert by_label[Label.SUSPICIOUS] == 30
        assert by_label[Label.BENIGN] == 30

    def test_originals_unchanged(self):
        dataset = self.make_imbalanced()
        out = smote(dataset, k=5, rng_seed=1)
        assert out[:len(dataset)] == dataset

    def test_synthetic_points_between_base_and_neighbor(self):
        dataset = self.make_imbalanced()
        out = smote(dataset, k=3, rng_seed=7)
        minority = [ex.features.as_tuple() for ex in dataset
                    if ex.label is Label.SUSPICIOUS]
        minority = np.array(minority)
        for ex in out[len(dataset):]:
            point = np.array(ex.features.as_tuple())
            # Betweenness with respect to SOME pair of minority points.
            ok = False
            for a in minority:
                for b in minority:
                    if np.all(point >= np.minimum(a, b)) and np.all(point <= np.maximum(a, b)):
                        ok = True
                        break
                if ok:
                    break
            assert ok

    def test_already_balanced_unchanged(self):
        dataset = self.make_imbalanced(10, 10)
        assert smote(dataset, k=3, rng_seed=0) == dataset

    def test_single_class_rejected(self):
        dataset = [example(i, Label.BENIGN) for i in range(5)]
        with pytest.raises(InputError):
            smote(dataset, k=2)

    def test_k_clamped_to_minority_size(self):
        dataset = self.make_imbalanced(n_min=2, n_maj=6)
        out = smote(dataset, k=50, rng_seed=0)
        assert len(out) == 12

    def test_deterministic(self):
        dataset = self.make_imbalanced()
        assert smote(dataset, 5, 42) == smote(dataset, 5, 42)


class TestForestTraining:
    def test_single_full_tree_memorizes_consistent_data(self):
        rng = np.random.default_rng(0)
        dataset = []
        for i in range(40):
            label = Label.SUSPICIOUS if i % 2 else Label.BENIGN
            dataset.append(example(i, label,
                                   username_ed=float(rng.integers(0, 20)),
                                   friends_count=float(i)))
        hp = HyperParams(n_estimators=1, bootstrap=False, max_features="all",
                         max_depth=None)
        model = train_forest(dataset, hp, rng_seed=0)
        for ex in dataset:
            label, _ = predict(model, ex.features)
            assert label is ex.label

    def test_memorizes_xor_pattern(self):
        # Zero-gain first split; the tree must still keep splitting.
        dataset = []
        for i, (a, b) in enumerate([(0, 0), (0, 1), (1, 0), (1, 1)] * 5):
            label = Label.SUSPICIOUS if a != b else Label.BENIGN
            dataset.append(example(i, label, username_ed=float(a), location=float(b)))
        hp = HyperParams(n_estimators=1, bootstrap=False, max_features="all")
        model = train_forest(dataset, hp, rng_seed=0)
        for ex in dataset:
            label, _ = predict(model, ex.features)
            assert label is ex.label

    def test_bit_identical_serialization_same_seed(self, tmp_path):
        dataset = blob_dataset()
        hp = HyperParams(n_estimators=10)
        a = train_forest(dataset, hp, rng_seed=5)
        b = train_forest(dataset, hp, rng_seed=5)
        pa, pb = tmp_path / "a.model", tmp_path / "b.model"
        save_model(str(pa), a)
        save_model(str(pb), b)
        assert pa.read_bytes() == pb.read_bytes()

    def test_different_seed_changes_model(self, tmp_path):
        dataset = blob_dataset()
        hp = HyperParams(n_estimators=5)
        pa, pb = tmp_path / "a.model", tmp_path / "b.model"
        save_model(str(pa), train_forest(dataset, hp, rng_seed=1))
        save_model(str(pb), train_forest(dataset, hp, rng_seed=2))
        assert pa.read_bytes() != pb.read_bytes()

    def test_separable_dataset_cv_accuracy(self):
        # 500 points, 2 informative features, 5-fold CV accuracy >= 0.95,
        # computed by an explicit fold loop independent of cross_val_f1.
        dataset = blob_dataset(n_per_class=250, rng_seed=3)
        X, y = dataset_matrix(dataset)
        rng = np.random.default_rng(0)
        order = rng.permutation(len(y))
        folds = np.array_split(order, 5)
        hp = HyperParams(n_estimators=30)
        correct = 0
        for i, test_idx in enumerate(folds):
            mask = np.ones(len(y), dtype=bool)
            mask[test_idx] = False
            train = [dataset[j] for j in np.nonzero(mask)[0]]
            model = train_forest(train, hp, rng_seed=i)
            probs = forest_probabilities(model, X[test_idx])
            correct += int(((probs >= 0.5).astype(int) == y[test_idx]).sum())
        assert correct / len(y) >= 0.95

    def test_degenerate_identical_rows_conflicting_labels(self):
        dataset = [example(i, Label.SUSPICIOUS if i % 2 else Label.BENIGN,
                           username_ed=1.0) for i in range(10)]
        hp = HyperParams(n_estimators=3, bootstrap=False)
        model = train_forest(dataset, hp, rng_seed=0)
        _, prob = predict(model, dataset[0].features)
        assert prob == pytest.approx(0.5)

    def test_gini_two_point_split_is_pure(self):
        dataset = [
            example(0, Label.BENIGN, username_ed=0.0),
            example(1, Label.SUSPICIOUS, username_ed=1.0),
        ]
        hp = HyperParams(n_estimators=1, bootstrap=False, max_features="all")
        model = train_forest(dataset, hp, rng_seed=0)
        tree = model.trees[0]
        assert tree.feature[0] == FEATURE_ORDER.index("username_ed")
        assert 0.0 < tree.threshold[0] < 1.0
        leaves = [i for i in range(len(tree.feature)) if tree.feature[i] < 0]
        assert len(leaves) == 2
        for leaf in leaves:
            assert max(tree.probs[leaf]) == 1.0

    def test_single_class_rejected(self):
        dataset = [example(i, Label.BENIGN) for i in range(4)]
        with pytest.raises(InputError):
            train_forest(dataset, HyperParams(n_estimators=1), rng_seed=0)

    def test_importances_nonnegative_and_normalized(self):
        dataset = blob_dataset()
        model = train_forest(dataset, HyperParams(n_estimators=10), rng_seed=0)
        imp = feature_importances(model)
        assert np.all(imp >= 0)
        assert imp.sum() == pytest.approx(1.0)
        informative = {FEATURE_ORDER.index("username_ed"),
                       FEATURE_ORDER.index("bio_similarity")}
        assert set(np.argsort(imp)[-2:].tolist()) == informative


class TestPredict:
    def constant_tree(self, p0, p1):
        return Tree(feature=np.array([-1], dtype=np.int32),
                    threshold=np.array([0.0]),
                    left=np.array([-1], dtype=np.int32),
                    right=np.array([-1], dtype=np.int32),
                    probs=np.array([[p0, p1]]),
                    importances=np.zeros(len(FEATURE_ORDER)))

    def model_with(self, trees):
        return ForestModel(trees=trees, hyperparams=HyperParams(n_estimators=len(trees)),
                           rng_seed=0, feature_order=FEATURE_ORDER)

    def test_all_suspicious_leaves(self):
        model = self.model_with([self.constant_tree(0.0, 1.0)] * 3)
        label, prob = predict(model, fv_with())
        assert label is Label.SUSPICIOUS
        assert prob == 1.0

    def test_tie_probability_flags_suspicious(self):
        model = self.model_with([self.constant_tree(1.0, 0.0),
                                 self.constant_tree(0.0, 1.0)])
        label, prob = predict(model, fv_with())
        assert prob == DECISION_THRESHOLD == 0.5
        assert label is Label.SUSPICIOUS

    def test_prediction_equals_mean_of_trees(self):
        dataset = blob_dataset()
        model = train_forest(dataset, HyperParams(n_estimators=7), rng_seed=9)
        X, _ = dataset_matrix(dataset)
        per_tree = np.stack([t.predict_probs(X)[:, 1] for t in model.trees])
        assert np.allclose(forest_probabilities(model, X), per_tree.mean(axis=0))

    def test_feature_count_mismatch(self):
        model = self.model_with([self.constant_tree(0.5, 0.5)])
        with pytest.raises(InputError):
            forest_probabilities(model, np.zeros((1, 5)))


class TestTuning:
    def test_single_config_grid(self):
        dataset = blob_dataset(n_per_class=30)
        hp = HyperParams(n_estimators=5)
        best, trace = tune_hyperparams(dataset, [hp], folds=2, rng_seed=0)
        assert best == hp
        assert len(trace) == 1

    def test_stub_loses_to_real_forest(self):
        dataset = blob_dataset(n_per_class=50, rng_seed=2)
        stub = HyperParams(n_estimators=2, max_depth=0)
        real = HyperParams(n_estimators=20, max_depth=None)
        best, trace = tune_hyperparams(dataset, [stub, real], folds=3, rng_seed=0)
        assert best == real
        assert len(trace) == 2

    def test_trace_length_equals_grid_size(self):
        dataset = blob_dataset(n_per_class=20)
        grid = [HyperParams(n_estimators=n) for n in (2, 4, 6)]
        _, trace = tune_hyperparams(dataset, grid, folds=2, rng_seed=0)
        assert len(trace) == 3

    def test_tie_prefers_fewer_estimators(self):
        # On an easy dataset both configs reach F1 = 1.0.
        dataset = blob_dataset(n_per_class=40, rng_seed=1, sep=8.0)
        small = HyperParams(n_estimators=5)
        big = HyperParams(n_estimators=50)
        best, trace = tune_hyperparams(dataset, [big, small], folds=2, rng_seed=0)
        assert dict((hp.n_estimators, f1) for hp, f1 in trace)[5] == 1.0
        assert best == small

    def test_default_grid_spans_parameters(self):
        grid = default_grid()
        assert len(grid) == len(set(grid))
        assert {hp.n_estimators for hp in grid} == {50, 100}
        assert {hp.max_depth for hp in grid} == {None, 10}

    def test_empty_grid_rejected(self):
        with pytest.raises(InputError):
            tune_hyperparams(blob_dataset(n_per_class=10), [], folds=2, rng_seed=0)


class TestEvaluation:
    def test_documented_confusion_metrics(self):
        precision, recall, f1, _ = metrics_from_confusion(tp=74, fp=26, tn=72, fn=28)
        assert precision == pytest.approx(0.74, abs=1e-9)
        assert recall == pytest.approx(0.7255, abs=5e-5)
        assert f1 == pytest.approx(2 * 0.74 * (74 / 102) / (0.74 + 74 / 102), abs=1e-9)
        assert f1 == pytest.approx(0.7326, abs=1e-4)

    def test_zero_denominators(self):
        assert metrics_from_confusion(0, 0, 10, 0) == (0.0, 0.0, 0.0, 1.0)

    def test_perfect_classifier(self):
        dataset = blob_dataset(n_per_class=40, rng_seed=4, sep=10.0)
        model = train_forest(dataset, HyperParams(n_estimators=10), rng_seed=0)
        report = evaluate(model, dataset)
        assert report.precision == report.recall == report.f1 == 1.0
        assert report.auc == 1.0
        assert report.confusion == (40, 0, 40, 0)

    def test_roc_monotone_nondecreasing(self):
        rng = np.random.default_rng(0)
        y = rng.integers(0, 2, size=200)
        scores = rng.random(200)
        points = roc_curve(y, scores)
        assert points[0] == (0.0, 0.0)
        assert points[-1] == (1.0, 1.0)
        for (x0, y0), (x1, y1) in zip(points, points[1:]):
            assert x1 >= x0
            assert y1 >= y0

    def test_random_scores_auc_near_half(self):
        rng = np.random.default_rng(123)
        y = np.array([0, 1] * 500)
        scores = rng.random(1000)
        points = roc_curve(y, scores)
        assert auc_trapezoid(points) == pytest.approx(0.5, abs=0.05)

    def test_evaluate_empty_rejected(self):
        dataset = blob_dataset(n_per_class=5)
        model = train_forest(dataset, HyperParams(n_estimators=2), rng_seed=0)
        with pytest.raises(InputError):
            evaluate(model, [])

    def test_deterministic_eval_report(self):
        dataset = blob_dataset(n_per_class=30, rng_seed=8)
        model_a = train_forest(dataset, HyperParams(n_estimators=8), rng_seed=3)
        model_b = train_forest(dataset, HyperParams(n_estimators=8), rng_seed=3)
        assert evaluate(model_a, dataset) == evaluate(model_b, dataset)


class TestPersistence:
    def test_round_trip_identical_predictions(self, tmp_path):
        dataset = blob_dataset(n_per_class=40, rng_seed=6)
        from squadkit.features import fit_normalizer
        scaler = fit_normalizer([ex.features for ex in dataset])
        model = train_forest(dataset, HyperParams(n_estimators=12, max_depth=8),
                             rng_seed=11, scaler=scaler)
        path = tmp_path / "forest.model"
        save_model(str(path), model)
        loaded = load_model(str(path))
        assert loaded.hyperparams == model.hyperparams
        assert loaded.rng_seed == model.rng_seed
        assert loaded.feature_order == model.feature_order
        assert loaded.scaler == model.scaler
        X, _ = dataset_matrix(dataset)
        assert np.array_equal(forest_probabilities(model, X),
                              forest_probabilities(loaded, X))

    def test_save_then_save_again_identical(self, tmp_path):
        dataset = blob_dataset(n_per_class=20)
        model = train_forest(dataset, HyperParams(n_estimators=4), rng_seed=0)
        p1, p2 = tmp_path / "m1", tmp_path / "m2"
        save_model(str(p1), model)
        save_model(str(p2), load_model(str(p1)))
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.model"
        path.write_text("not a model\n")
        with pytest.raises(InputError):
            load_model(str(path))


class TestForestClassifierWrapper:
    def test_fit_predict_importances(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(80, 3))
        y = (X[:, 1] > 0).astype(int)
        clf = ForestClassifier(HyperParams(n_estimators=10), rng_seed=0)
        clf.fit(X, y)
        assert (clf.predict(X) == y).mean() > 0.9
        imp = clf.feature_importances()
        assert imp.argmax() == 1

    def test_cross_val_f1_range(self):
        dataset = blob_dataset(n_per_class=25)
        f1 = cross_val_f1(dataset, HyperParams(n_estimators=5), folds=3, rng_seed=0)
        assert 0.0 <= f1 <= 1.0


class TestHyperParamsValidation:
    def test_invalid_values_rejected(self):
        with pytest.raises(InputError):
            HyperParams(n_estimators=0)
        with pytest.raises(InputError):
            HyperParams(min_samples_split=1)
        with pytest.raises(InputError):
            HyperParams(min_samples_leaf=0)
        with pytest.raises(InputError):
            HyperParams(max_features="half")
