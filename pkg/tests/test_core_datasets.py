# ========================================
# FileName: test_core_datasets.py
# Brief: Test dataset generation, cleaning, normalisation and folds
# =========================================

import json
import os
import tempfile
import unittest

import numpy as np

from jetfdi.core.datasets import (
    HEALTHY, SCENARIOS, Dataset, NormStats, clean, concatenate,
    correlation_matrix, denormalize, generate_dataset, get_scenario,
    kfold_split, metadata_path, normalize_apply, normalize_fit,
    relabel_for_component, select_features
)
from jetfdi.core.engine import SIGNALS
from jetfdi.core.errors import (
    ConfigurationError, DataQualityError, LabelError, ShapeError,
    StratificationError
)
from ._common import gaussian_blobs, make_dataset


class TestDataset(unittest.TestCase):

    def test_validation(self):
        with self.assertRaises(ShapeError):
            make_dataset(np.zeros((3, 2)), [0, 1, 0],
                         feature_names=('a', 'b', 'c'))
        with self.assertRaises(LabelError):
            make_dataset(np.zeros((3, 2)), [0, 3, 0],
                         class_names=(HEALTHY, 'F1'))

    def test_csv_keeps_class_names(self):
        dataset = make_dataset(np.arange(12.0).reshape(6, 2),
                               [0, 1, 2, 0, 1, 2],
                               class_names=(HEALTHY, 'T2', 'T3'))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "data.csv")
            dataset.to_csv(path)
            loaded = Dataset.from_csv(path)
            self.assertEqual(loaded.class_names, (HEALTHY, 'T2', 'T3'))
            self.assertEqual(loaded.feature_names, ('x0', 'x1'))
            np.testing.assert_allclose(loaded.features, dataset.features)
            np.testing.assert_array_equal(loaded.labels, dataset.labels)

            os.remove(metadata_path(path))
            bare = Dataset.from_csv(path)
            self.assertEqual(bare.class_names, (HEALTHY, 'Fault1', 'Fault2'))

    def test_relabel_for_component(self):
        dataset = make_dataset(np.zeros((4, 1)), [0, 1, 2, 2],
                               class_names=(HEALTHY, 'T2', 'T3'))
        binary = relabel_for_component(dataset, 'T3')
        self.assertEqual(binary.class_names, (HEALTHY, 'T3'))
        np.testing.assert_array_equal(binary.labels, [0, 0, 1, 1])
        with self.assertRaises(ConfigurationError):
            relabel_for_component(dataset, HEALTHY)

    def test_select_features(self):
        dataset = make_dataset(np.arange(6.0).reshape(2, 3), [0, 1])
        subset = select_features(dataset, ['x2', 'x0'])
        np.testing.assert_array_equal(subset.features, [[2, 0], [5, 3]])
        with self.assertRaises(ConfigurationError):
            select_features(dataset, ['x9'])

    def test_concatenate(self):
        a = make_dataset(np.zeros((2, 1)), [0, 1])
        b = make_dataset(np.ones((3, 1)), [1, 0, 1])
        self.assertEqual(len(concatenate([a, b])), 5)


class TestScenarios(unittest.TestCase):

    def test_presets(self):
        self.assertEqual(SCENARIOS['FD001'].class_names,
                         (HEALTHY, 'LockInPlace', 'Bias'))
        self.assertEqual(SCENARIOS['FD002'].class_names,
                         (HEALTHY, 'T2', 'T3', 'T5', 'P2'))
        self.assertEqual(SCENARIOS['FD001'].train_runs, 10)
        self.assertEqual(SCENARIOS['FD002'].test_runs, 5)
        with self.assertRaises(ConfigurationError):
            get_scenario('FD009')


class TestGenerateDataset(unittest.TestCase):
    """Short runs keep these tests fast."""

    def test_sample_count_and_classes(self):
        dataset = generate_dataset('FD001', 4, duration=10.0, seed=7)
        self.assertEqual(len(dataset), 400)
        self.assertEqual(dataset.class_names,
                         (HEALTHY, 'LockInPlace', 'Bias'))
        self.assertEqual(dataset.feature_names, SIGNALS)
        self.assertEqual(sorted(np.unique(dataset.run_id)), [0, 1, 2, 3])

    def test_faulty_samples_form_one_window(self):
        dataset = generate_dataset('T2', 4, duration=10.0, seed=1)
        runs_with_fault = 0
        for run in np.unique(dataset.run_id):
            labels = dataset.labels[dataset.run_id == run]
            faulty = np.flatnonzero(labels)
            self.assertTrue(set(np.unique(labels)) <= {0, 1})
            if faulty.size:
                runs_with_fault += 1
                self.assertEqual(faulty[-1] - faulty[0] + 1, faulty.size)
                self.assertGreaterEqual(faulty[0], 10)
        self.assertEqual(runs_with_fault, 2)

    def test_lock_in_place_demand_rises(self):
        dataset = generate_dataset('FD001', 6, duration=20.0, seed=3)
        lock = dataset.class_names.index('LockInPlace')
        mf = dataset.feature_names.index('mf')
        locked_runs = 0
        for run in np.unique(dataset.run_id):
            rows = np.flatnonzero(dataset.run_id == run)
            window = rows[dataset.labels[rows] == lock]
            if window.size == 0:
                continue
            locked_runs += 1
            demand = dataset.features[window, mf]
            self.assertGreater(demand[-10:].mean() - demand[:3].mean(), 2.0)
        self.assertEqual(locked_runs, 2)

    def test_ambient_channels_are_dropped(self):
        dataset = generate_dataset('FD002', 5, duration=3.0, seed=4)
        stats = normalize_fit(dataset)
        self.assertEqual(set(dataset.feature_names) -
                         set(stats.retained_names), {'P1', 'T1'})

    def test_deterministic(self):
        a = generate_dataset('T3', 3, duration=5.0, seed=11)
        b = generate_dataset('T3', 3, duration=5.0, seed=11)
        self.assertEqual(a.checksum(), b.checksum())
        c = generate_dataset('T3', 3, duration=5.0, seed=12)
        self.assertNotEqual(a.checksum(), c.checksum())

    def test_parallel_matches_serial(self):
        a = generate_dataset('FD002', 5, duration=3.0, seed=2, jobs=1)
        b = generate_dataset('FD002', 5, duration=3.0, seed=2, jobs=2)
        self.assertEqual(a.checksum(), b.checksum())

    def test_run_offset(self):
        test = generate_dataset('T2', 2, duration=2.0, seed=0, run_offset=4)
        self.assertEqual(sorted(np.unique(test.run_id)), [4, 5])

    def test_invalid_run_count(self):
        with self.assertRaises(ConfigurationError):
            generate_dataset('T2', 0)


class TestClean(unittest.TestCase):

    def setUp(self):
        rng = np.random.default_rng(0)
        self.dataset = make_dataset(rng.standard_normal((1000, 3)),
                                    np.zeros(1000, dtype=int),
                                    class_names=(HEALTHY, 'F1'))

    def test_clean_is_fixed_point(self):
        cleaned, report = clean(self.dataset)
        self.assertTrue(report.is_empty)
        np.testing.assert_array_equal(cleaned.features,
                                      self.dataset.features)

    def test_drops_nan_row(self):
        self.dataset.features[123, 1] = np.nan
        cleaned, report = clean(self.dataset)
        self.assertEqual(len(cleaned), 999)
        self.assertEqual(report.dropped,
                         [(0, float(self.dataset.t[123]))])

    def test_too_many_dropped(self):
        self.dataset.features[:150, 0] = np.inf
        with self.assertRaises(DataQualityError):
            clean(self.dataset)

    def test_spike_is_winsorized(self):
        self.dataset.features[500, 2] = 10.0 * \
            self.dataset.features[:, 2].std()
        column = self.dataset.features[:, 2]
        bound = np.median(column) + 6.0 * column.std()
        cleaned, report = clean(self.dataset)
        self.assertAlmostEqual(cleaned.features[500, 2], bound)
        self.assertEqual(len(report.winsorized), 1)
        self.assertEqual(report.winsorized[0][2], 'x2')


class TestNormalize(unittest.TestCase):

    def test_self_application(self):
        dataset = gaussian_blobs([[5.0, -3.0], [8.0, 1.0]], 200, scale=2.0)
        stats = normalize_fit(dataset)
        normalized = normalize_apply(dataset, stats)
        np.testing.assert_allclose(normalized.features.mean(axis=0), 0.0,
                                   atol=1e-12)
        np.testing.assert_allclose(normalized.features.std(axis=0), 1.0)
        restored = denormalize(normalized, stats)
        np.testing.assert_allclose(restored.features, dataset.features)

    def test_two_standard_deviations(self):
        dataset = gaussian_blobs([[0.0]], 100)
        stats = normalize_fit(dataset)
        point = make_dataset([[stats.mean[0] + 2 * stats.std[0]]], [0],
                             class_names=dataset.class_names)
        self.assertAlmostEqual(normalize_apply(point, stats).features[0, 0],
                               2.0)

    def test_constant_feature_dropped(self):
        features = np.column_stack([np.arange(10.0), np.full(10, 3.0)])
        dataset = make_dataset(features, [0, 1] * 5)
        stats = normalize_fit(dataset)
        self.assertEqual(stats.retained_names, ('x0',))
        self.assertEqual(normalize_apply(dataset, stats).feature_names,
                         ('x0',))

    def test_stats_document(self):
        dataset = gaussian_blobs([[1.0, 2.0, 3.0]], 50)
        stats = normalize_fit(dataset)
        reordered = json.loads(json.dumps(stats.to_dict(), sort_keys=True))
        self.assertIn('x1', reordered)
        self.assertEqual(set(reordered['x1']),
                         {'index', 'mean', 'std', 'retained'})
        loaded = NormStats.from_dict(reordered)
        self.assertEqual(loaded.feature_names, stats.feature_names)
        np.testing.assert_allclose(loaded.mean, stats.mean)


class TestCorrelation(unittest.TestCase):

    def test_hand_computed(self):
        dataset = make_dataset([[1, 1], [2, 3], [3, 2], [4, 4]],
                               [0, 0, 1, 1])
        corr = correlation_matrix(dataset)
        self.assertAlmostEqual(corr.values[0, 1], 0.8)
        self.assertAlmostEqual(corr.values[1, 0], 0.8)

    def test_exact_linearity(self):
        x = np.arange(10.0)
        corr = correlation_matrix(make_dataset(
            np.column_stack([x, -3 * x]), [0, 1] * 5))
        self.assertAlmostEqual(corr.values[0, 1], -1.0)

    def test_constant_feature(self):
        x = np.arange(10.0)
        corr = correlation_matrix(make_dataset(
            np.column_stack([x, np.ones(10), 2 * x]), [0, 1] * 5))
        self.assertEqual(corr.constant, ('x1',))
        self.assertEqual(corr.values[0, 1], 0.0)
        self.assertEqual(corr.values[1, 2], 0.0)
        self.assertEqual(corr.values[1, 1], 1.0)
        np.testing.assert_allclose(corr.values, corr.values.T)


class TestKFold(unittest.TestCase):

    def check_partition(self, labels, k):
        folds = kfold_split(labels, k, seed=3)
        self.assertEqual(len(folds), k)
        seen = np.concatenate([validation for _, validation in folds])
        self.assertEqual(sorted(seen), list(range(len(labels))))
        for train, validation in folds:
            self.assertEqual(len(set(train) & set(validation)), 0)
            self.assertEqual(len(train) + len(validation), len(labels))
        for c in np.unique(labels):
            per_fold = [np.sum(labels[v] == c) for _, v in folds]
            self.assertLessEqual(max(per_fold) - min(per_fold), 1)
        sizes = [len(v) for _, v in folds]
        self.assertLessEqual(max(sizes) - min(sizes), 1)
        return folds

    def test_five_folds_of_two_hundred(self):
        labels = np.repeat([0, 1, 2, 3], 250)
        folds = self.check_partition(labels, 5)
        self.assertEqual([len(v) for _, v in folds], [200] * 5)

    def test_partition_property(self):
        rng = np.random.default_rng(0)
        labels = rng.integers(0, 3, 997)
        for k in (2, 5, 10):
            self.check_partition(labels, k)

    def test_partition_of_fault_scenario(self):
        dataset = generate_dataset('FD001', 3, duration=10.0, seed=5)
        self.assertEqual(len(np.unique(dataset.labels)), 3)
        for k in (2, 5, 10):
            self.check_partition(dataset.labels, k)

    def test_small_class(self):
        with self.assertRaises(StratificationError):
            kfold_split(np.array([0] * 20 + [1] * 3), 5)

    def test_invalid_k(self):
        with self.assertRaises(ConfigurationError):
            kfold_split(np.zeros(10, dtype=int), 1)
