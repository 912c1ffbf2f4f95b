from regimerisk.core.clustering.partitioners import canonical_order, kmeans, pam, ward_cut, within_sum_of_squares
from regimerisk.core.clustering.regimes import DEFAULT_K_RANGE, DEFAULT_METHODS, partition, regime_search
from regimerisk.core.clustering.validity import (
    calinski_harabasz,
    dunn_index,
    silhouette_index,
    silhouette_samples,
    validity_entry,
    validity_report_from_csv,
    validity_report_to_csv,
    xie_beni,
)
