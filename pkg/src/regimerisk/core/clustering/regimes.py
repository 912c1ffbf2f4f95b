"""
regimerisk.core.clustering.regimes
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
Grid search over clustering methods and cluster counts.

The selected partition maximizes the silhouette; ties go to Calinski-Harabasz, then Dunn
(both higher is better), then Xie-Beni (lower is better), then the smaller k.
"""
import logging
from typing import Dict, Iterable, Sequence, Tuple

import numpy as np

from regimerisk.core.clustering.partitioners import Features, as_points, kmeans, pam, ward_cut
from regimerisk.core.clustering.validity import validity_entry
from regimerisk.exceptions import InvalidParameterError
from regimerisk.models.cluster_model import ClusterMethod, Partition, ValidityEntry, ValidityReport

logger = logging.getLogger(__name__)

DEFAULT_K_RANGE = (2, 3, 4, 5, 6)
DEFAULT_METHODS: Tuple[ClusterMethod, ...] = ("ward", "pam", "kmeans")


def partition(X: Features, method: ClusterMethod, k: int, seed: int = 0, restarts: int = 10,
              metric: str = "euclidean", log_features: bool = False) -> Partition:
    if method == "kmeans":
        return kmeans(X, k, seed=seed, restarts=restarts, log_features=log_features)
    if method == "pam":
        return pam(X, k, seed=seed, metric=metric, log_features=log_features)
    if method == "ward":
        return ward_cut(X, k, log_features=log_features)
    raise InvalidParameterError(f"Unknown clustering method '{method}'")


def selection_key(entry: ValidityEntry) -> Tuple[float, float, float, float, int]:
    return entry.silhouette, entry.calinski_harabasz, entry.dunn, -entry.xie_beni, -entry.k


def regime_search(X: Features, k_range: Iterable[int] = DEFAULT_K_RANGE,
                  methods: Sequence[ClusterMethod] = DEFAULT_METHODS, seed: int = 0, restarts: int = 10,
                  metric: str = "euclidean",
                  log_features: bool = False) -> Tuple[ValidityReport, Partition, Dict[Tuple[str, int], Partition]]:
    """
    Cluster the feature rows for every (method, k) and score each partition.

    Args:
        X (FeatureMatrix | np.ndarray): Conditional-variance features.
        k_range (Iterable[int]): Cluster counts to try.
        methods (Sequence[str]): Clustering methods to try.
        seed (int): Seed for the seeded methods.
        restarts (int): k-means restarts.
        metric (str): Distance for PAM, silhouette and Dunn.
        log_features (bool): Cluster log-variances.

    Returns:
        Tuple[ValidityReport, Partition, Dict]: The index grid, the selected partition and every
        partition keyed by (method, k).

    Raises:
        InvalidParameterError: If no (method, k) combination can be scored.
    """
    points, _ = as_points(X, log_features)
    distinct = np.unique(points, axis=0).shape[0]
    k_values = sorted(set(int(k) for k in k_range))
    entries, partitions = [], {}
    for method in methods:
        for k in k_values:
            if k < 2 or k > distinct or k >= points.shape[0]:
                logger.warning(f"Skipping {method} with k={k}: {distinct} distinct rows of {points.shape[0]}")
                continue
            P = partition(X, method, k, seed=seed, restarts=restarts, metric=metric, log_features=log_features)
            entry = validity_entry(X, P, metric, log_features)
            logger.debug(f"{method} k={k}: silhouette={entry.silhouette:.4f}")
            entries.append(entry)
            partitions[(method, k)] = P
    if not entries:
        raise InvalidParameterError("Regime search grid is empty")
    best = max(entries, key=selection_key)
    logger.info(f"Selected {best.method} with k={best.k} (silhouette {best.silhouette:.4f})")
    return ValidityReport(entries=entries), partitions[(best.method, best.k)], partitions
