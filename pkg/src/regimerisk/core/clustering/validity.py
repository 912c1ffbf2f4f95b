"""
regimerisk.core.clustering.validity
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
Internal cluster validity indices and the method x criterion x k report table.

Degenerate cases return +inf: Calinski-Harabasz with zero within-cluster scatter, Dunn with
all diameters zero, Xie-Beni with coincident centroids. Singleton clusters have silhouette 0.

Functions:
    - silhouette_index, silhouette_samples, calinski_harabasz, dunn_index, xie_beni
    - validity_entry, validity_report_to_csv, validity_report_from_csv
"""
import io
from typing import Union

import numpy as np
import pandas as pd
from scipy.spatial.distance import pdist, squareform
from sklearn import metrics

from regimerisk.core.clustering.partitioners import Features, as_points
from regimerisk.exceptions import InvalidParameterError
from regimerisk.models.cluster_model import INDEX_NAMES, Partition, ValidityEntry, ValidityReport


def _labels(P: Union[Partition, np.ndarray]) -> np.ndarray:
    return np.asarray(P.labels if isinstance(P, Partition) else P, dtype=int)


def _require_two(labels: np.ndarray):
    if np.unique(labels).size < 2:
        raise InvalidParameterError("validity indices need at least 2 clusters")


def silhouette_samples(X: Features, P: Union[Partition, np.ndarray], metric: str = "euclidean",
                       log_features: bool = False) -> np.ndarray:
    """
    Per-point silhouette widths (b - a) / max(a, b); 0 for points in singleton clusters.
    """
    points, _ = as_points(X, log_features)
    labels = _labels(P)
    _require_two(labels)
    if np.unique(labels).size >= points.shape[0]:
        return np.zeros(points.shape[0])
    return metrics.silhouette_samples(points, labels, metric=metric)


def silhouette_index(X: Features, P: Union[Partition, np.ndarray], metric: str = "euclidean",
                     log_features: bool = False) -> float:
    return float(np.mean(silhouette_samples(X, P, metric, log_features)))


def calinski_harabasz(X: Features, P: Union[Partition, np.ndarray], log_features: bool = False) -> float:
    """
    [B / (k - 1)] / [W / (n - k)] with B and W the between and within sums of squares.

    Raises:
        InvalidParameterError: If k < 2 or k >= n.
    """
    points, _ = as_points(X, log_features)
    labels = _labels(P)
    k, n = np.unique(labels).size, points.shape[0]
    if k < 2 or k >= n:
        raise InvalidParameterError(f"Calinski-Harabasz needs 2 <= k < n, got k={k}, n={n}")
    within = sum(float(np.sum((points[labels == label] - points[labels == label].mean(axis=0)) ** 2))
                 for label in np.unique(labels))
    if within == 0.0:
        return float("inf")
    return float(metrics.calinski_harabasz_score(points, labels))


def dunn_index(X: Features, P: Union[Partition, np.ndarray], metric: str = "euclidean",
               log_features: bool = False) -> float:
    """
    Smallest single-linkage distance between clusters over the largest cluster diameter.
    """
    points, _ = as_points(X, log_features)
    labels = _labels(P)
    _require_two(labels)
    D = squareform(pdist(points, metric))
    clusters = [np.flatnonzero(labels == label) for label in np.unique(labels)]
    diameter = max(float(D[np.ix_(members, members)].max()) for members in clusters)
    separation = min(float(D[np.ix_(first, second)].min())
                     for i, first in enumerate(clusters) for second in clusters[i + 1:])
    if diameter == 0.0:
        return float("inf")
    return separation / diameter


def xie_beni(X: Features, P: Union[Partition, np.ndarray], log_features: bool = False) -> float:
    """
    Crisp Xie-Beni: sum of squared distances to the own centroid over n times the smallest
    squared distance between centroids.
    """
    points, _ = as_points(X, log_features)
    labels = _labels(P)
    _require_two(labels)
    unique = np.unique(labels)
    centroids = np.vstack([points[labels == label].mean(axis=0) for label in unique])
    own = centroids[np.searchsorted(unique, labels)]
    numerator = float(np.sum((points - own) ** 2))
    separation = float(pdist(centroids, "sqeuclidean").min())
    if separation == 0.0:
        return float("inf")
    return numerator / (points.shape[0] * separation)


def validity_entry(X: Features, P: Partition, metric: str = "euclidean", log_features: bool = False) -> ValidityEntry:
    return ValidityEntry(
        method=P.method,
        k=P.k,
        silhouette=silhouette_index(X, P, metric, log_features),
        calinski_harabasz=calinski_harabasz(X, P, log_features),
        dunn=dunn_index(X, P, metric, log_features),
        xie_beni=xie_beni(X, P, log_features),
    )


def validity_report_to_csv(report: ValidityReport) -> str:
    """
    One row per (method, criterion) with a column per k and the criterion's best k.

    Layout: `method,criterion,2,3,...,best_k`.
    """
    k_values = report.k_values()
    rows = []
    for method in report.methods():
        for index in INDEX_NAMES:
            row = {"method": method, "criterion": index}
            for k in k_values:
                try:
                    row[str(k)] = getattr(report.get(method, k), index)
                except KeyError:
                    row[str(k)] = float("nan")
            row["best_k"] = report.best_k(method, index)
            rows.append(row)
    frame = pd.DataFrame(rows, columns=["method", "criterion", *map(str, k_values), "best_k"])
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, float_format="%.17g", lineterminator="\n")
    return buffer.getvalue()


def validity_report_from_csv(text: str) -> ValidityReport:
    frame = pd.read_csv(io.StringIO(text))
    k_columns = [column for column in frame.columns if column not in ("method", "criterion", "best_k")]
    values = {}
    for _, row in frame.iterrows():
        for column in k_columns:
            if pd.isna(row[column]):
                continue
            values.setdefault((row["method"], int(column)), {})[row["criterion"]] = float(row[column])
    entries = [ValidityEntry(method=method, k=k, **indices) for (method, k), indices in values.items()]
    return ValidityReport(entries=entries)
