import math
import unittest

import numpy as np

from regimerisk.core.clustering import (
    calinski_harabasz,
    dunn_index,
    silhouette_index,
    silhouette_samples,
    validity_entry,
    validity_report_from_csv,
    validity_report_to_csv,
    xie_beni,
)
from regimerisk.exceptions import InvalidParameterError
from regimerisk.models.cluster_model import Partition, ValidityEntry, ValidityReport

FOUR_POINTS = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 10.0], [10.0, 11.0]])
FOUR_LABELS = np.array([1, 1, 2, 2])


def brute_force_silhouette(points: np.ndarray, labels: np.ndarray) -> np.ndarray:
    n = points.shape[0]
    widths = np.zeros(n)
    for i in range(n):
        own = [j for j in range(n) if labels[j] == labels[i] and j != i]
        if not own:
            continue
        distance = lambda j: math.dist(points[i], points[j])
        a = sum(distance(j) for j in own) / len(own)
        b = min(sum(distance(j) for j in range(n) if labels[j] == other) / np.count_nonzero(labels == other)
                for other in set(labels.tolist()) - {labels[i]})
        widths[i] = (b - a) / max(a, b)
    return widths


def brute_force_indices(points: np.ndarray, labels: np.ndarray):
    n, clusters = points.shape[0], sorted(set(labels.tolist()))
    k = len(clusters)
    centroids = {label: points[labels == label].mean(axis=0) for label in clusters}
    grand = points.mean(axis=0)
    within = sum(float(np.sum((points[i] - centroids[labels[i]]) ** 2)) for i in range(n))
    between = sum(np.count_nonzero(labels == label) * float(np.sum((centroids[label] - grand) ** 2))
                  for label in clusters)
    ch = (between / (k - 1)) / (within / (n - k))
    diameter = max(math.dist(points[i], points[j]) for i in range(n) for j in range(n) if labels[i] == labels[j])
    separation = min(math.dist(points[i], points[j]) for i in range(n) for j in range(n) if labels[i] != labels[j])
    centroid_gap = min(float(np.sum((centroids[a] - centroids[b]) ** 2))
                       for a in clusters for b in clusters if a != b)
    return ch, separation / diameter, within / (n * centroid_gap)


class TestFourPointOracle(unittest.TestCase):
    def test_silhouette(self):
        a = 1.0
        b_low = [(math.sqrt(200) + math.sqrt(221)) / 2, (math.sqrt(181) + math.sqrt(200)) / 2]
        b_high = [(math.sqrt(200) + math.sqrt(181)) / 2, (math.sqrt(221) + math.sqrt(200)) / 2]
        expected = np.array([1 - a / b for b in b_low + b_high])
        np.testing.assert_allclose(silhouette_samples(FOUR_POINTS, FOUR_LABELS), expected, rtol=0, atol=1e-12)
        self.assertAlmostEqual(silhouette_index(FOUR_POINTS, FOUR_LABELS), float(expected.mean()), delta=1e-12)

    def test_calinski_harabasz(self):
        # B = 4 * 50, W = 4 * 0.25
        self.assertAlmostEqual(calinski_harabasz(FOUR_POINTS, FOUR_LABELS), (200.0 / 1) / (1.0 / 2), delta=1e-9)

    def test_dunn(self):
        self.assertAlmostEqual(dunn_index(FOUR_POINTS, FOUR_LABELS), math.sqrt(181), delta=1e-12)

    def test_xie_beni(self):
        self.assertAlmostEqual(xie_beni(FOUR_POINTS, FOUR_LABELS), 1.0 / (4 * 200.0), delta=1e-12)


class TestAgainstBruteForce(unittest.TestCase):
    def test_random_datasets(self):
        rng = np.random.default_rng(0)
        for trial in range(10):
            n, k = int(rng.integers(6, 60)), int(rng.integers(2, 5))
            points = rng.normal(size=(n, 3))
            labels = np.concatenate([np.arange(1, k + 1), rng.integers(1, k + 1, size=n - k)])
            if trial == 0:
                labels[-1] = k + 1
            np.testing.assert_allclose(silhouette_samples(points, labels), brute_force_silhouette(points, labels),
                                       rtol=0, atol=1e-12)
            ch, dunn, xb = brute_force_indices(points, labels)
            self.assertAlmostEqual(calinski_harabasz(points, labels), ch, delta=1e-9 * ch)
            self.assertAlmostEqual(dunn_index(points, labels), dunn, delta=1e-12)
            self.assertAlmostEqual(xie_beni(points, labels), xb, delta=1e-12)

    def test_silhouette_range(self):
        rng = np.random.default_rng(1)
        points = rng.uniform(size=(80, 2))
        widths = silhouette_samples(points, rng.integers(1, 4, size=80))
        self.assertTrue(np.all((widths >= -1.0) & (widths <= 1.0)))


class TestInvariances(unittest.TestCase):
    def setUp(self):
        rng = np.random.default_rng(2)
        self.points = np.vstack([rng.normal(0.0, 1.0, (20, 2)), rng.normal(5.0, 1.0, (25, 2))])
        self.labels = np.repeat([1, 2], [20, 25])

    def test_label_and_point_permutations(self):
        order = np.random.default_rng(3).permutation(45)
        relabeled = 3 - self.labels
        for index in (silhouette_index, calinski_harabasz, dunn_index, xie_beni):
            reference = index(self.points, self.labels)
            self.assertAlmostEqual(index(self.points, relabeled), reference, delta=1e-12 * max(1.0, reference))
            self.assertAlmostEqual(index(self.points[order], self.labels[order]), reference,
                                   delta=1e-9 * max(1.0, reference))

    def test_xie_beni_scale_invariance(self):
        self.assertAlmostEqual(xie_beni(3.0 * self.points, self.labels), xie_beni(self.points, self.labels),
                               delta=1e-12)

    def test_tighter_clusters_lower_xie_beni(self):
        centroids = np.vstack([self.points[self.labels == label].mean(axis=0) for label in (1, 2)])
        own = centroids[self.labels - 1]
        tighter = own + 0.5 * (self.points - own)
        self.assertLess(xie_beni(tighter, self.labels), xie_beni(self.points, self.labels))

    def test_mislabelled_point_lowers_dunn(self):
        mislabelled = self.labels.copy()
        mislabelled[0] = 2
        self.assertLess(dunn_index(self.points, mislabelled), dunn_index(self.points, self.labels))

    def test_random_labels_score_below_structure(self):
        random_labels = np.random.default_rng(4).integers(1, 3, size=45)
        self.assertLess(calinski_harabasz(self.points, random_labels), calinski_harabasz(self.points, self.labels))


class TestDegenerateCases(unittest.TestCase):
    def test_sentinels(self):
        collapsed = np.array([[0.0], [0.0], [5.0], [5.0]])
        self.assertEqual(calinski_harabasz(collapsed, FOUR_LABELS), float("inf"))
        self.assertEqual(dunn_index(np.array([[0.0], [3.0]]), np.array([1, 2])), float("inf"))
        self.assertEqual(xie_beni(np.array([[0.0], [1.0], [1.0], [0.0]]), FOUR_LABELS), float("inf"))

    def test_singletons_have_zero_silhouette(self):
        widths = silhouette_samples(FOUR_POINTS, np.array([1, 1, 2, 3]))
        self.assertEqual(widths[2], 0.0)
        self.assertEqual(widths[3], 0.0)
        np.testing.assert_array_equal(silhouette_samples(FOUR_POINTS, np.array([1, 2, 3, 4])), np.zeros(4))

    def test_errors(self):
        with self.assertRaises(InvalidParameterError):
            silhouette_index(FOUR_POINTS, np.ones(4, dtype=int))
        with self.assertRaises(InvalidParameterError):
            calinski_harabasz(FOUR_POINTS, np.array([1, 2, 3, 4]))
        with self.assertRaises(InvalidParameterError):
            dunn_index(FOUR_POINTS, np.ones(4, dtype=int))


class TestValidityReport(unittest.TestCase):
    def setUp(self):
        entries = []
        for method in ("ward", "pam", "kmeans"):
            for k in (2, 3, 4, 5, 6):
                silhouette = 0.9 - 0.1 * k + (0.01 if method == "pam" else 0.0)
                entries.append(ValidityEntry(method=method, k=k, silhouette=silhouette,
                                             calinski_harabasz=100.0 * k, dunn=1.0 / k, xie_beni=0.01 * k))
        self.report = ValidityReport(entries=entries)

    def test_best_k(self):
        self.assertEqual(self.report.best_k("ward", "silhouette"), 2)
        self.assertEqual(self.report.best_k("ward", "calinski_harabasz"), 6)
        self.assertEqual(self.report.best_k("kmeans", "xie_beni"), 2)

    def test_csv_layout_and_round_trip(self):
        text = validity_report_to_csv(self.report)
        lines = text.splitlines()
        self.assertEqual(lines[0], "method,criterion,2,3,4,5,6,best_k")
        self.assertEqual(len(lines), 1 + 3 * 4)
        self.assertTrue(lines[1].startswith("ward,silhouette,"))
        self.assertTrue(lines[1].endswith(",2"))
        restored = validity_report_from_csv(text)
        for entry in self.report.entries:
            self.assertEqual(restored.get(entry.method, entry.k), entry)

    def test_entry_from_partition(self):
        P = Partition(labels=FOUR_LABELS, k=2, method="ward")
        entry = validity_entry(FOUR_POINTS, P)
        self.assertEqual((entry.method, entry.k), ("ward", 2))
        self.assertAlmostEqual(entry.dunn, math.sqrt(181), delta=1e-12)

    def test_missing_entry(self):
        with self.assertRaises(KeyError):
            self.report.get("ward", 7)


if __name__ == "__main__":
    unittest.main()
