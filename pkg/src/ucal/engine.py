"""Run orchestration: warmup epochs of clustering + refinement, then split and
merge phases with annotation each epoch, with logging and persistence.

Each epoch re-embeds the inputs through the current head, re-clusters with
DBSCAN, applies split edits then merge edits (after warmup), and finishes
with gradient refinement against the edited clustering. The label memory is
the only cross-epoch carrier of annotation state. Simulated runs are fully
deterministic given the config and seed.
"""

from __future__ import annotations

import itertools
import json
import logging
import threading
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .annotation import (LabelMemory, LabelProvider, PendingQueue, QueryRequest,
                         SimulatedOracle, Verdict, labeling_cost)
from .clustering import (OUTLIER, Cluster, ClusterState, compute_centroids, dbscan,
                         state_from_clusters)
from .dataset import DatasetBundle, FeatureMatrix, l2_normalize, load_dataset, similarity_matrix
from .metrics import EpochMetrics, nmi, pairwise_prf
from .mpps import apply_merges, merge_candidates, propose_merge_queries
from .representation import LinearHead, refine_step
from .snps import apply_split, propose_split_queries, select_k_star

log = logging.getLogger(__name__)

BATCH_SIZE = 64

SIMULATED = "simulated"
HUMAN = "human"


@dataclass
class RunConfig:
    data_dir: Path
    out_dir: Path
    eps: float
    min_pts: int = 4
    tau: float = 0.05
    learning_rate: float = 1e-2
    output_dim: int | None = None
    delta: float = 0.3
    merge_cap_fraction: float = 0.2
    l_max: int = 10
    warmup_epochs: int = 15
    total_epochs: int = 50
    seed: int = 0
    oracle_mode: str = SIMULATED
    enable_snps: bool = True
    enable_mpps: bool = True
    negative_propagation: bool = True
    human_timeout_s: float | None = 600.0
    lease_s: float = 120.0

    def __post_init__(self) -> None:
        self.data_dir = Path(self.data_dir)
        self.out_dir = Path(self.out_dir)

    def validate(self) -> None:
        if not 0.0 < self.eps <= 2.0:
            raise ValueError(f"eps must be in (0, 2], got {self.eps}")
        if self.min_pts < 2:
            raise ValueError(f"min_pts must be >= 2, got {self.min_pts}")
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.learning_rate < 0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if not 0.0 <= self.delta < 1.0:
            raise ValueError(f"delta must be in [0, 1), got {self.delta}")
        if not 0.0 < self.merge_cap_fraction <= 1.0:
            raise ValueError(f"merge_cap_fraction must be in (0, 1], got {self.merge_cap_fraction}")
        if self.l_max < 1:
            raise ValueError(f"l_max must be >= 1, got {self.l_max}")
        if self.warmup_epochs < 0 or self.total_epochs < 1:
            raise ValueError("epoch counts must be non-negative (total >= 1)")
        if self.warmup_epochs >= self.total_epochs:
            raise ValueError(
                f"warmup_epochs ({self.warmup_epochs}) must be < total_epochs ({self.total_epochs})"
            )
        if self.oracle_mode not in (SIMULATED, HUMAN):
            raise ValueError(f"oracle_mode must be '{SIMULATED}' or '{HUMAN}'")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["data_dir"] = str(self.data_dir)
        d["out_dir"] = str(self.out_dir)
        return d


@dataclass
class RunReport:
    config: dict
    epochs: list[EpochMetrics]
    final_cost_percent: float
    final_state: ClusterState

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "epochs": [json.loads(m.to_json_line()) for m in self.epochs],
            "final_cost_percent": self.final_cost_percent,
            "final_state": state_to_dict(self.final_state),
        }


class RunStatus:
    """Thread-safe snapshot of run progress for the annotation service."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._epoch = 0
        self._phase = "warmup"
        self._pending = 0
        self._metrics: EpochMetrics | None = None
        self._embedding: np.ndarray | None = None
        self._state: ClusterState | None = None

    def update(self, *, epoch: int | None = None, phase: str | None = None,
               pending: int | None = None) -> None:
        with self._lock:
            if epoch is not None:
                self._epoch = epoch
            if phase is not None:
                self._phase = phase
            if pending is not None:
                self._pending = pending

    def set_metrics(self, metrics: EpochMetrics) -> None:
        with self._lock:
            self._metrics = metrics

    def set_embedding(self, embedding: np.ndarray, state: ClusterState) -> None:
        with self._lock:
            self._embedding = embedding
            self._state = state

    def snapshot(self) -> dict:
        with self._lock:
            return {"epoch": self._epoch, "phase": self._phase, "pending": self._pending}

    def latest_metrics(self) -> EpochMetrics | None:
        with self._lock:
            return self._metrics

    def embedding_view(self) -> tuple[np.ndarray, ClusterState] | None:
        with self._lock:
            if self._embedding is None or self._state is None:
                return None
            return self._embedding, self._state


def state_to_dict(state: ClusterState) -> dict:
    return {
        "epoch": state.epoch,
        "n_samples": state.n_samples,
        "assignment": [int(a) for a in state.assignment],
        "clusters": [
            {"cluster_id": c.cluster_id, "members": list(c.members), "medoid": c.medoid}
            for c in state.clusters
        ],
    }


def save_state(state: ClusterState, path: str | Path) -> None:
    Path(path).write_text(json.dumps(state_to_dict(state), separators=(",", ":")) + "\n",
                          encoding="utf-8")


def load_state(path: str | Path) -> ClusterState:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    clusters = tuple(
        Cluster(cluster_id=c["cluster_id"], members=tuple(c["members"]), medoid=c.get("medoid"))
        for c in obj["clusters"]
    )
    return ClusterState(
        assignment=np.asarray(obj["assignment"], dtype=np.int64),
        clusters=clusters,
        epoch=obj["epoch"],
    )


class UcalRun:
    """One configured run over one dataset.

    In human mode a PendingQueue must be supplied; the annotation service
    feeds it while run() blocks on unanswered queries.
    """

    def __init__(self, config: RunConfig, dataset: DatasetBundle | None = None,
                 queue: PendingQueue | None = None) -> None:
        config.validate()
        self.config = config
        if dataset is None:
            dataset = load_dataset(config.data_dir / "embeddings.csv",
                                   config.data_dir / "meta.jsonl")
        self.dataset = dataset
        self.features = l2_normalize(dataset.features)
        self.status = RunStatus()

        config.out_dir.mkdir(parents=True, exist_ok=True)
        self.memory = LabelMemory(config.out_dir / "labels.jsonl",
                                  negative_propagation=config.negative_propagation)

        self.provider: LabelProvider | None = None
        self.queue = queue
        if config.oracle_mode == SIMULATED:
            missing = [s.sample_id for s in dataset.samples if s.identity is None]
            if missing:
                raise ValueError(
                    f"simulated mode needs ground-truth identities; sample {missing[0]} has none"
                )
            self.provider = SimulatedOracle(dataset)
        elif queue is None:
            raise ValueError("human mode needs a PendingQueue")

        self._ids = itertools.count()
        self._image_refs = {s.sample_id: s.image_ref for s in dataset.samples}
        self._truth_available = all(s.identity is not None for s in dataset.samples)

    def run(self) -> RunReport:
        cfg = self.config
        head = LinearHead.create(self.features.dim, cfg.output_dim,
                                 learning_rate=cfg.learning_rate, tau=cfg.tau, seed=cfg.seed)
        epochs: list[EpochMetrics] = []
        state: ClusterState | None = None
        metrics_path = cfg.out_dir / "metrics.jsonl"
        with metrics_path.open("w", encoding="utf-8") as metrics_fh:
            for epoch in range(cfg.total_epochs):
                state, head, em = self.run_epoch(epoch, head)
                epochs.append(em)
                metrics_fh.write(em.to_json_line())
                metrics_fh.write("\n")
                metrics_fh.flush()
                self.status.set_metrics(em)
                log.info("epoch %d: %d clusters, %d outliers, M=%d (%.4f%%)",
                         epoch, em.n_clusters, em.n_outliers, em.cumulative_m, em.cost_percent)

        assert state is not None
        save_state(state, cfg.out_dir / "state.json")
        report = RunReport(
            config=cfg.to_dict(),
            epochs=epochs,
            final_cost_percent=epochs[-1].cost_percent,
            final_state=state,
        )
        (cfg.out_dir / "report.json").write_text(
            json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
        self.status.update(phase="done", pending=0)
        self.memory.close()
        return report

    def run_epoch(self, epoch: int, head: LinearHead
                  ) -> tuple[ClusterState, LinearHead, EpochMetrics]:
        cfg = self.config
        embedded = FeatureMatrix(head.embed(self.features.rows), normalized=True)
        sim = similarity_matrix(embedded)
        state = compute_centroids(dbscan(sim, cfg.eps, cfg.min_pts, epoch=epoch), embedded)
        n_epoch_start = state.n_clusters
        self.status.set_embedding(embedded.rows, state)

        active = epoch >= cfg.warmup_epochs
        self.status.update(epoch=epoch, phase="active" if active else "warmup")
        queries_issued = 0
        if active and cfg.enable_snps:
            state, n_queries = self._split_phase(state, sim, embedded, epoch)
            queries_issued += n_queries
        if active and cfg.enable_mpps:
            state, n_queries = self._merge_phase(state, embedded, epoch, n_epoch_start)
            queries_issued += n_queries
        state = compute_centroids(state, embedded)
        self.status.set_embedding(embedded.rows, state)

        head = self._refine(head, state, epoch)

        if self._truth_available:
            identities = self.dataset.identities()
            precision, recall, f1 = pairwise_prf(state, identities)
            nmi_value = nmi(state, identities)
        else:
            precision = recall = f1 = nmi_value = None
        em = EpochMetrics(
            epoch=epoch,
            n_clusters=state.n_clusters,
            n_outliers=state.n_outliers,
            queries_issued=queries_issued,
            cumulative_m=self.memory.m,
            cost_percent=labeling_cost(self.memory, self.dataset.n),
            pairwise_precision=precision,
            pairwise_recall=recall,
            pairwise_f1=f1,
            nmi=nmi_value,
        )
        return state, head, em

    def _split_phase(self, state: ClusterState, sim: np.ndarray,
                     embedded: FeatureMatrix, epoch: int) -> tuple[ClusterState, int]:
        cfg = self.config
        partitions = {}
        proposals: list[QueryRequest] = []
        for cluster in state.clusters:
            partition = select_k_star(cluster, sim, seed=cfg.seed)
            if partition is None:
                continue
            partitions[cluster.cluster_id] = partition
            proposals.extend(propose_split_queries(
                partition, self.memory, epoch=epoch, ids=self._ids,
                context=self._image_refs))
        self._dispatch(proposals)

        new_clusters: list[Cluster] = []
        for cluster in state.clusters:
            partition = partitions.get(cluster.cluster_id)
            if partition is None:
                new_clusters.append(cluster)
                continue
            labels = {}
            for _a, _b, pair in partition.medoid_pairs():
                verdict = self.memory.resolve(pair)
                if verdict is None:
                    break
                labels[pair] = verdict
            else:
                new_clusters.extend(apply_split(cluster, partition, labels, embedded))
                continue
            # Unanswered pair (human timeout): leave the cluster for now; the
            # pending query stays queued and the next epoch retries.
            new_clusters.append(cluster)
        return state_from_clusters(new_clusters, state.n_samples, epoch), len(proposals)

    def _merge_phase(self, state: ClusterState, embedded: FeatureMatrix, epoch: int,
                     n_epoch_start: int) -> tuple[ClusterState, int]:
        cfg = self.config
        if state.n_clusters < 2:
            return state, 0
        proposals = propose_merge_queries(
            state, cfg.delta, cfg.l_max, self.memory, epoch=epoch, ids=self._ids,
            context=self._image_refs)
        self._dispatch(proposals)

        positives = []
        for cand in merge_candidates(state, cfg.delta, cfg.l_max):
            if self.memory.resolve(cand.medoids) is Verdict.POSITIVE:
                positives.append((cand.clusters, cand.similarity))
        new_state = apply_merges(state, positives, cfg.merge_cap_fraction, embedded,
                                 n_epoch_start=n_epoch_start)
        return new_state, len(proposals)

    def _dispatch(self, queries: list[QueryRequest]) -> None:
        """Resolve queries through the configured provider.

        Simulated mode answers inline. Human mode enqueues and blocks until
        the service has fed back every answer or the timeout passes;
        unanswered queries stay queued for later epochs.
        """
        if not queries:
            return
        if self.provider is not None:
            for query in queries:
                self.memory.request_label(query, self.provider)
            return
        assert self.queue is not None
        submitted = set()
        for query in queries:
            if self.memory.resolve(query.pair) is None:
                self.queue.put(query)
                submitted.add(query.pair)
        self.status.update(phase="waiting_labels", pending=self.queue.pending_count())
        answered = self.queue.wait_for_pairs(submitted, self.config.human_timeout_s)
        if not answered:
            log.warning("annotation timeout: %d queries still pending",
                        self.queue.pending_count())
        self.status.update(phase="active", pending=self.queue.pending_count())

    def _refine(self, head: LinearHead, state: ClusterState, epoch: int) -> LinearHead:
        non_outlier = np.nonzero(state.assignment != OUTLIER)[0]
        if non_outlier.size == 0:
            return head
        rng = np.random.default_rng([self.config.seed, epoch])
        order = rng.permutation(non_outlier)
        for start in range(0, order.size, BATCH_SIZE):
            batch = order[start:start + BATCH_SIZE]
            head, _loss = refine_step(head, batch, state, self.features)
        return head


def run(config: RunConfig, dataset: DatasetBundle | None = None,
        queue: PendingQueue | None = None) -> RunReport:
    return UcalRun(config, dataset=dataset, queue=queue).run()


def evaluate_state(state: ClusterState, dataset: DatasetBundle) -> dict:
    """Clustering-quality metrics of a saved state against a dataset."""
    identities = dataset.identities()
    precision, recall, f1 = pairwise_prf(state, identities)
    return {
        "epoch": state.epoch,
        "n_samples": state.n_samples,
        "n_clusters": state.n_clusters,
        "n_outliers": state.n_outliers,
        "pairwise_precision": precision,
        "pairwise_recall": recall,
        "pairwise_f1": f1,
        "nmi": nmi(state, identities),
    }
