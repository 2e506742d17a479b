"""Label memory, annotation cost, simulated oracle, and the pending queue.

Pair keys are medoid *sample* ids (stable across epochs, unlike cluster ids).
Every consultation of a provider stores exactly one record, so the cost
counter M always equals the record count. Positive answers feed a union-find,
letting later queries resolve by transitivity instead of consulting again;
negative answers optionally propagate through the positive components.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable

from .dataset import DatasetBundle

log = logging.getLogger(__name__)

Pair = tuple[int, int]


class Verdict(Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


class QueryKind(Enum):
    SPLIT = "split"
    MERGE = "merge"


class Source(Enum):
    ORACLE = "oracle"
    HUMAN = "human"
    MEMORY = "memory"  # synthesized resolution, never persisted


def canonical_pair(a: int, b: int) -> Pair:
    if a == b:
        raise ValueError(f"pair must join two distinct samples, got ({a}, {b})")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class QueryContext:
    """Optional display hints for the UI: the cluster ids behind the pair and
    the samples' image paths (when the dataset has them)."""

    cluster_a: int | None = None
    cluster_b: int | None = None
    image_a: str | None = None
    image_b: str | None = None


@dataclass(frozen=True)
class QueryRequest:
    query_id: int
    pair: Pair
    kind: QueryKind
    epoch: int
    context: QueryContext | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "pair", canonical_pair(*self.pair))


@dataclass(frozen=True)
class PairLabel:
    pair: Pair
    verdict: Verdict
    source: Source
    epoch: int


class _UnionFind:
    def __init__(self) -> None:
        self._parent: dict[int, int] = {}
        self._size: dict[int, int] = {}

    def find(self, x: int) -> int:
        parent = self._parent
        if x not in parent:
            return x
        root = x
        while parent.get(root, root) != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        sa = self._size.get(ra, 1)
        sb = self._size.get(rb, 1)
        if sa < sb:
            ra, rb = rb, ra
        self._parent.setdefault(ra, ra)
        self._parent[rb] = ra
        self._size[ra] = sa + sb
        return True

    def connected(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)


class LabelMemory:
    """Persistent store of answered pairs with union-find propagation.

    ``persist_path`` appends one JSONL record per consultation
    (``{"a", "b", "verdict", "source", "epoch"}``) and is replayed on
    construction, so interrupted runs resume without re-asking.
    """

    def __init__(self, persist_path: str | Path | None = None, *,
                 negative_propagation: bool = True) -> None:
        self.negative_propagation = negative_propagation
        self._records: dict[Pair, PairLabel] = {}
        self._uf = _UnionFind()
        self._neg_index: dict[int, set[int]] | None = {}
        self._lock = threading.RLock()
        self._persist_path = Path(persist_path) if persist_path is not None else None
        self._fh = None
        if self._persist_path is not None:
            if self._persist_path.exists():
                self._replay(self._persist_path)
            self._persist_path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = self._persist_path.open("a", encoding="utf-8")

    @property
    def m(self) -> int:
        """The annotation cost counter: number of stored consultations."""
        return len(self._records)

    @property
    def records(self) -> dict[Pair, PairLabel]:
        return dict(self._records)

    def resolve(self, pair: Pair) -> Verdict | None:
        """Stored verdict, or one derived by propagation; None when unknown.

        Never consults a provider and never changes M. Positive resolution is
        union-find connectivity; negative resolution holds when the two
        samples' positive components are linked by a stored negative record.
        """
        a, b = canonical_pair(*pair)
        with self._lock:
            rec = self._records.get((a, b))
            if rec is not None:
                return rec.verdict
            if self._uf.connected(a, b):
                return Verdict.POSITIVE
            if self.negative_propagation:
                index = self._negative_root_index()
                ra, rb = self._uf.find(a), self._uf.find(b)
                if rb in index.get(ra, ()):
                    return Verdict.NEGATIVE
        return None

    def request_label(self, query: QueryRequest,
                      provider: "LabelProvider") -> PairLabel:
        """Resolve from memory when possible; otherwise consult the provider,
        store the answer, and advance M by exactly one."""
        with self._lock:
            resolved = self.resolve(query.pair)
            if resolved is not None:
                rec = self._records.get(query.pair)
                if rec is not None:
                    return rec
                return PairLabel(query.pair, resolved, Source.MEMORY, query.epoch)
            verdict = provider.label(query)
            return self.record_consultation(query.pair, verdict, provider.source, query.epoch)

    def record_consultation(self, pair: Pair, verdict: Verdict, source: Source,
                            epoch: int) -> PairLabel:
        """Store one provider answer (the single-writer entry point).

        If the pair became resolvable since the question was asked and the
        answer contradicts it, the already-stored information wins: the
        contradiction is logged and not recorded.
        """
        a, b = canonical_pair(*pair)
        with self._lock:
            resolved = self.resolve((a, b))
            if resolved is not None:
                if resolved != verdict:
                    log.error(
                        "label for pair (%d, %d) from %s contradicts memory "
                        "(%s vs %s); keeping the memory verdict",
                        a, b, source.value, verdict.value, resolved.value,
                    )
                rec = self._records.get((a, b))
                if rec is not None:
                    return rec
                return PairLabel((a, b), resolved, Source.MEMORY, epoch)
            label = PairLabel((a, b), verdict, source, epoch)
            self._records[(a, b)] = label
            if verdict is Verdict.POSITIVE:
                self._uf.union(a, b)
                self._neg_index = None  # roots moved; rebuild lazily
            elif self._neg_index is not None:
                ra, rb = self._uf.find(a), self._uf.find(b)
                self._neg_index.setdefault(ra, set()).add(rb)
                self._neg_index.setdefault(rb, set()).add(ra)
            if self._fh is not None:
                self._fh.write(json.dumps(
                    {"a": a, "b": b, "verdict": verdict.value,
                     "source": source.value, "epoch": epoch},
                    separators=(",", ":")))
                self._fh.write("\n")
                self._fh.flush()
            return label

    def _negative_root_index(self) -> dict[int, set[int]]:
        if self._neg_index is None:
            index: dict[int, set[int]] = {}
            for (a, b), rec in self._records.items():
                if rec.verdict is Verdict.NEGATIVE:
                    ra, rb = self._uf.find(a), self._uf.find(b)
                    index.setdefault(ra, set()).add(rb)
                    index.setdefault(rb, set()).add(ra)
            self._neg_index = index
        return self._neg_index

    def _replay(self, path: Path) -> None:
        with path.open("r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                pair = canonical_pair(int(obj["a"]), int(obj["b"]))
                label = PairLabel(pair, Verdict(obj["verdict"]),
                                  Source(obj["source"]), int(obj["epoch"]))
                self._records[pair] = label
                if label.verdict is Verdict.POSITIVE:
                    self._uf.union(*pair)
        self._neg_index = None

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def oracle_label(dataset: DatasetBundle, pair: Pair) -> Verdict:
    """Ground-truth answer: POSITIVE iff the two samples share an identity."""
    a, b = canonical_pair(*pair)
    ia = dataset.samples[a].identity
    ib = dataset.samples[b].identity
    if ia is None or ib is None:
        raise ValueError(
            f"simulated labeling needs ground-truth identities; sample "
            f"{a if ia is None else b} has none"
        )
    return Verdict.POSITIVE if ia == ib else Verdict.NEGATIVE


class LabelProvider:
    """Interface: answers one query, tagged with its source."""

    source: Source

    def label(self, query: QueryRequest) -> Verdict:  # pragma: no cover - interface
        raise NotImplementedError


class SimulatedOracle(LabelProvider):
    source = Source.ORACLE

    def __init__(self, dataset: DatasetBundle) -> None:
        self._dataset = dataset

    def label(self, query: QueryRequest) -> Verdict:
        return oracle_label(self._dataset, query.pair)


def labeling_cost(memory: "LabelMemory | int", n: int) -> float:
    """Annotation cost as a percentage: M over the N*(N-1)/2 possible pairs."""
    if n < 2:
        raise ValueError(f"cost needs at least 2 samples, got {n}")
    m = memory.m if isinstance(memory, LabelMemory) else int(memory)
    return m * 100.0 / (n * (n - 1) // 2)


class SubmitStatus(Enum):
    ACCEPTED = "accepted"
    DUPLICATE = "duplicate"
    UNKNOWN = "unknown"
    NOT_ASSIGNED = "not_assigned"


@dataclass(frozen=True)
class SubmitResult:
    status: SubmitStatus
    query: QueryRequest | None = None


class PendingQueue:
    """Pending human queries with leased, at-most-once assignment.

    Producers enqueue queries (deduplicated by pair); annotator sessions pull
    the oldest available query, holding a lease that expires after
    ``lease_seconds`` and returns the query to the pool. Submissions for
    already-answered queries are acknowledged as duplicates without effect.
    """

    def __init__(self, lease_seconds: float = 120.0,
                 clock: Callable[[], float] = time.monotonic) -> None:
        self.lease_seconds = lease_seconds
        self._clock = clock
        self._cond = threading.Condition()
        self._pending: dict[int, QueryRequest] = {}  # insertion-ordered
        self._by_pair: dict[Pair, int] = {}
        self._leases: dict[int, tuple[str, float]] = {}
        self._done: set[int] = set()

    def put(self, query: QueryRequest) -> bool:
        """Enqueue unless the same pair is already pending. Returns whether
        the query was added."""
        with self._cond:
            if query.pair in self._by_pair or query.query_id in self._done:
                return False
            self._pending[query.query_id] = query
            self._by_pair[query.pair] = query.query_id
            self._cond.notify_all()
            return True

    def next_for(self, session: str) -> QueryRequest | None:
        """Assign the oldest available query to ``session``.

        A session that already holds a live lease gets the same query again
        (lease refreshed); expired leases make the query available to others.
        """
        now = self._clock()
        with self._cond:
            for qid, (holder, deadline) in self._leases.items():
                if holder == session and deadline > now and qid in self._pending:
                    self._leases[qid] = (session, now + self.lease_seconds)
                    return self._pending[qid]
            for qid, query in self._pending.items():
                lease = self._leases.get(qid)
                if lease is None or lease[1] <= now:
                    self._leases[qid] = (session, now + self.lease_seconds)
                    return query
        return None

    def submit(self, query_id: int, session: str) -> SubmitResult:
        """Validate a submission attempt; callers record the verdict after an
        ACCEPTED result (single-writer discipline lives in LabelMemory)."""
        now = self._clock()
        with self._cond:
            if query_id in self._done:
                return SubmitResult(SubmitStatus.DUPLICATE)
            query = self._pending.get(query_id)
            if query is None:
                return SubmitResult(SubmitStatus.UNKNOWN)
            lease = self._leases.get(query_id)
            if lease is None or lease[0] != session or lease[1] <= now:
                return SubmitResult(SubmitStatus.NOT_ASSIGNED)
            del self._pending[query_id]
            del self._by_pair[query.pair]
            self._leases.pop(query_id, None)
            self._done.add(query_id)
            self._cond.notify_all()
            return SubmitResult(SubmitStatus.ACCEPTED, query)

    def resolve_pairs(self, resolved: Iterable[Pair]) -> None:
        """Drop pending queries whose pair got answered through another path."""
        with self._cond:
            for pair in resolved:
                qid = self._by_pair.pop(pair, None)
                if qid is not None:
                    self._pending.pop(qid, None)
                    self._leases.pop(qid, None)
                    self._done.add(qid)
            self._cond.notify_all()

    def pending_count(self) -> int:
        with self._cond:
            return len(self._pending)

    def pending_pairs(self) -> list[Pair]:
        with self._cond:
            return list(self._by_pair.keys())

    def wait_for_pairs(self, pairs: set[Pair], timeout: float | None) -> bool:
        """Block until none of ``pairs`` is pending; False on timeout."""
        deadline = None if timeout is None else self._clock() + timeout
        with self._cond:
            while any(p in self._by_pair for p in pairs):
                remaining = None if deadline is None else deadline - self._clock()
                if remaining is not None and remaining <= 0:
                    return False
                self._cond.wait(timeout=remaining if remaining is None else min(remaining, 0.5))
            return True
