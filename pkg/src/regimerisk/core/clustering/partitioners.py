"""
regimerisk.core.clustering.partitioners
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
Crisp partitioners of the conditional-variance feature rows.

Labels are canonical: cluster 1 has the lowest mean feature level, so regime 1 is the
calmest regime whichever method or seed produced the partition.

Functions:
    - kmeans: Lloyd iterations from k-means++ seeds, best of several restarts.
    - pam: Partitioning around medoids, BUILD then SWAP.
    - ward_cut: Ward agglomeration cut at k clusters.
"""
import logging
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.cluster.hierarchy import cut_tree, linkage
from scipy.spatial.distance import cdist, pdist, squareform
from sklearn.cluster import kmeans_plusplus

from regimerisk.exceptions import InvalidParameterError
from regimerisk.models.cluster_model import FeatureMatrix, Partition

logger = logging.getLogger(__name__)

Features = Union[FeatureMatrix, np.ndarray]


def as_points(X: Features, log_features: bool = False) -> Tuple[np.ndarray, Optional[list]]:
    if isinstance(X, FeatureMatrix):
        return np.asarray(X.transformed(log_features), dtype=float), list(X.dates)
    points = np.asarray(X, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    return (np.log(points) if log_features else points), None


def _check_k(points: np.ndarray, k: int, minimum: int = 1):
    if k < minimum:
        raise InvalidParameterError(f"k must be at least {minimum}, got {k}")
    distinct = np.unique(points, axis=0).shape[0]
    if k > distinct:
        raise InvalidParameterError(f"k={k} exceeds the {distinct} distinct feature rows")


def within_sum_of_squares(points: np.ndarray, labels: np.ndarray) -> float:
    total = 0.0
    for label in np.unique(labels):
        members = points[labels == label]
        total += float(np.sum((members - members.mean(axis=0)) ** 2))
    return total


def canonical_order(points: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """
    Map raw labels to 1..k ordered by the cluster mean of the row-averaged features.

    Returns:
        np.ndarray: Canonical labels.
    """
    raw = list(dict.fromkeys(labels.tolist()))
    level = points.mean(axis=1)
    ranked = sorted(raw, key=lambda label: (float(level[labels == label].mean()), raw.index(label)))
    mapping = {label: rank + 1 for rank, label in enumerate(ranked)}
    return np.array([mapping[label] for label in labels.tolist()], dtype=int)


def _centroids(points: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    return np.vstack([points[labels == label].mean(axis=0) for label in range(1, k + 1)])


def _fill_empty(points: np.ndarray, labels: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """
    Move the worst-fitting point of a cluster with more than one member into each empty cluster.
    """
    k = centers.shape[0]
    for cluster in range(k):
        if np.any(labels == cluster):
            continue
        counts = np.bincount(labels, minlength=k)
        residual = np.sum((points - centers[labels]) ** 2, axis=1)
        residual[counts[labels] < 2] = -1.0
        labels[int(np.argmax(residual))] = cluster
    return labels


def _lloyd(points: np.ndarray, centers: np.ndarray, max_iter: int) -> Tuple[np.ndarray, np.ndarray, List[float]]:
    k = centers.shape[0]
    history: List[float] = []
    labels = None
    for _ in range(max_iter):
        assigned = np.argmin(cdist(points, centers, "sqeuclidean"), axis=1)
        if labels is not None and np.array_equal(assigned, labels):
            break
        labels = _fill_empty(points, assigned, centers)
        centers = np.vstack([points[labels == cluster].mean(axis=0) for cluster in range(k)])
        history.append(float(np.sum((points - centers[labels]) ** 2)))
    return labels, centers, history


def kmeans(X: Features, k: int, seed: int = 0, restarts: int = 10, max_iter: int = 300,
           log_features: bool = False) -> Partition:
    """
    k-means with k-means++ seeding; the restart with the lowest within-cluster sum of squares wins.

    Args:
        X (FeatureMatrix | np.ndarray): Feature rows.
        k (int): Number of clusters.
        seed (int): Seed of the restart generator.
        restarts (int): Number of seeded initializations.
        max_iter (int): Lloyd iteration cap.
        log_features (bool): Cluster log-variances.

    Returns:
        Partition: The best partition with its WSS trace.

    Raises:
        InvalidParameterError: If k exceeds the number of distinct rows.
    """
    points, dates = as_points(X, log_features)
    _check_k(points, k)
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(1, restarts)):
        centers, _ = kmeans_plusplus(points, k, random_state=int(rng.integers(0, 2 ** 31 - 1)))
        labels, centers, history = _lloyd(points, centers.astype(float), max_iter)
        if best is None or history[-1] < best[2][-1]:
            best = (labels, centers, history)
    labels = canonical_order(points, best[0])
    return Partition(labels=labels, k=k, method="kmeans", centers=_centroids(points, labels, k), dates=dates,
                     wss=within_sum_of_squares(points, labels), wss_history=best[2])


def _pam_build(D: np.ndarray, k: int) -> List[int]:
    medoids = [int(np.argmin(D.sum(axis=1)))]
    nearest = D[:, medoids[0]].copy()
    while len(medoids) < k:
        gains = np.maximum(nearest[:, None] - D, 0.0).sum(axis=0)
        gains[medoids] = -np.inf
        chosen = int(np.argmax(gains))
        medoids.append(chosen)
        nearest = np.minimum(nearest, D[:, chosen])
    return medoids


def pam(X: Features, k: int, seed: int = 0, metric: str = "euclidean", max_swaps: int = 1000,
        log_features: bool = False) -> Partition:
    """
    Partitioning around medoids on a pairwise dissimilarity matrix.

    BUILD picks the most central point and then greedily the point that most reduces the total
    dissimilarity; SWAP applies the best medoid/non-medoid exchange until none lowers it.
    The procedure is deterministic; `seed` is accepted for a uniform partitioner signature.

    Returns:
        Partition: Labels, medoid indices and the objective trace in `wss_history`.
    """
    points, dates = as_points(X, log_features)
    _check_k(points, k)
    D = squareform(pdist(points, metric))
    n = D.shape[0]
    medoids = _pam_build(D, k)
    history = [float(D[:, medoids].min(axis=1).sum())]
    for _ in range(max_swaps):
        best_cost, best_swap = history[-1], None
        candidates = np.setdiff1d(np.arange(n), medoids)
        if candidates.size == 0:
            break
        for position in range(k):
            others = medoids[:position] + medoids[position + 1:]
            without = D[:, others].min(axis=1) if others else np.full(n, np.inf)
            costs = np.minimum(without[:, None], D[:, candidates]).sum(axis=0)
            index = int(np.argmin(costs))
            if costs[index] < best_cost - 1e-12 * max(1.0, abs(best_cost)):
                best_cost, best_swap = float(costs[index]), (position, int(candidates[index]))
        if best_swap is None:
            break
        medoids[best_swap[0]] = best_swap[1]
        history.append(best_cost)
    medoids = sorted(medoids)
    raw = np.argmin(D[:, medoids], axis=1)
    labels = canonical_order(points, raw)
    order = [medoids[int(raw[labels == label][0])] for label in range(1, k + 1)]
    return Partition(labels=labels, k=k, method="pam", centers=points[order], medoids=order, dates=dates,
                     wss=within_sum_of_squares(points, labels), wss_history=history)


def ward_cut(X: Features, k: int, log_features: bool = False) -> Partition:
    """
    Ward agglomerative clustering (Euclidean by construction) cut at k clusters.
    """
    points, dates = as_points(X, log_features)
    if k < 1 or k > points.shape[0]:
        raise InvalidParameterError(f"k={k} is outside 1..{points.shape[0]}")
    if k == 1 or points.shape[0] == 1:
        raw = np.zeros(points.shape[0], dtype=int)
    else:
        raw = cut_tree(linkage(points, method="ward"), n_clusters=k).ravel()
    labels = canonical_order(points, raw)
    return Partition(labels=labels, k=k, method="ward", centers=_centroids(points, labels, k), dates=dates,
                     wss=within_sum_of_squares(points, labels))
