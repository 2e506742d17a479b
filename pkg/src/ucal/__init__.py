"""Active-learning clustering: DBSCAN pseudo-labels, centroid-pair annotation
with split/merge cluster edits, and a contrastive embedding head."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .annotation import (LabelMemory, PairLabel, PendingQueue, QueryKind,
                         QueryRequest, SimulatedOracle, Verdict, labeling_cost,
                         oracle_label)
from .clustering import (OUTLIER, Cluster, ClusterState, compute_centroids,
                         dbscan)
from .dataset import (DatasetBundle, DatasetError, FeatureMatrix, Sample,
                      l2_normalize, load_dataset, similarity_matrix)
from .engine import RunConfig, RunReport, UcalRun, run
from .metrics import EpochMetrics, nmi, pairwise_prf, retrieval_map_cmc
from .representation import (CentroidBank, LinearHead, contrastive_gradient,
                             contrastive_loss, refine_step)
from .synth import make_synthetic, write_synthetic

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND", "LabelMemory", "PairLabel", "PendingQueue", "QueryKind",
    "QueryRequest", "SimulatedOracle", "Verdict", "labeling_cost", "oracle_label",
    "OUTLIER", "Cluster", "ClusterState", "compute_centroids", "dbscan",
    "DatasetBundle", "DatasetError", "FeatureMatrix", "Sample", "l2_normalize",
    "load_dataset", "similarity_matrix", "RunConfig", "RunReport", "UcalRun", "run",
    "EpochMetrics", "nmi", "pairwise_prf", "retrieval_map_cmc", "CentroidBank",
    "LinearHead", "contrastive_gradient", "contrastive_loss", "refine_step",
    "make_synthetic", "write_synthetic",
]
