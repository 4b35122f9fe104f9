"""Elastic k-nearest-neighbour classification over codebook nodes.

A query is answered by linearly scanning a code and voting among the k
nodes closest to the query point, where node distance is the maximal
Euclidean distance to any point of the node's bounding box. A result's
state keeps the scanned nodes that could still matter; deeper codes are
then filtered through that state, which only ever shrinks the scan.

Distance comparisons run on squared values internally; every distance a
caller sees is a true (un-squared) Euclidean distance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coding import Code, CodeBook, Mbr
from .datasets import LabeledDataset, POSITIVE, NEGATIVE
from .errors import InsufficientCandidatesError, UndefinedMetricError

EXACT_DEPTH = -1  # marker depth for results of the full linear scan


def _check_dim(q: np.ndarray, mbr: Mbr):
    if len(q) != mbr.dimensionality:
        raise ValueError(f"query dimension {len(q)} != MBR dimension {mbr.dimensionality}")


def dist_max_sq(q: np.ndarray, mbr: Mbr) -> float:
    d = np.maximum(np.abs(q - mbr.low), np.abs(q - mbr.upp))
    return float(d @ d)


def dist_min_sq(q: np.ndarray, mbr: Mbr) -> float:
    d = np.maximum(0.0, np.maximum(mbr.low - q, q - mbr.upp))
    return float(d @ d)


def dist_max(q, mbr: Mbr) -> float:
    """Maximal Euclidean distance from q to any point of the box."""
    q = np.asarray(q, dtype=float)
    _check_dim(q, mbr)
    return float(np.sqrt(dist_max_sq(q, mbr)))


def dist_min(q, mbr: Mbr) -> float:
    """Minimal Euclidean distance from q to the box (0 inside)."""
    q = np.asarray(q, dtype=float)
    _check_dim(q, mbr)
    return float(np.sqrt(dist_min_sq(q, mbr)))


@dataclass(frozen=True)
class KnnQuery:
    point: np.ndarray
    k: int

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float))
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class KnnApproxResult:
    depth: int
    node_ids: tuple[int, ...]
    distances: tuple[float, ...]  # true Euclidean, ascending
    k_pos: int
    k_neg: int
    predicted: int
    threshold: float  # largest of the k distances (the pruning threshold)
    scanned: int

    @property
    def k(self) -> int:
        return self.k_pos + self.k_neg

    @property
    def positive_score(self) -> float:
        """Estimated probability of the positive class, k_pos / k."""
        return self.k_pos / self.k


@dataclass(frozen=True)
class KnnState:
    depth: int
    retained: frozenset[int]


def _vote(labels) -> tuple[int, int, int]:
    k_pos = sum(1 for y in labels if y == POSITIVE)
    k_neg = len(labels) - k_pos
    # ties (even k) go to the negative class: the vote rule is strict
    predicted = POSITIVE if k_pos > k_neg else NEGATIVE
    return k_pos, k_neg, predicted


def classify(
    book: CodeBook, code: Code | int, query: KnnQuery, state: KnnState | None = None
) -> KnnApproxResult:
    """Select the k nodes of smallest max-distance in the (state-filtered) code.

    With a state, only nodes whose ancestor at the state's depth was
    retained are scanned; the scanned-node count is the result's
    computational cost. Distance ties break by node id.
    """
    if isinstance(code, int):
        code = book.code_at_depth(code)
    candidates = list(code.node_ids)
    if state is not None:
        if code.depth <= state.depth:
            raise ValueError(f"state depth {state.depth} must be above code depth {code.depth}")
        candidates = [
            nid for nid in candidates if book.ancestor_at(nid, state.depth) in state.retained
        ]
    if len(candidates) < query.k:
        raise InsufficientCandidatesError(
            f"{len(candidates)} candidate nodes after filtering < k={query.k}"
        )
    q = query.point
    scored = sorted((dist_max_sq(q, book.node(nid).mbr), nid) for nid in candidates)
    top = scored[: query.k]
    k_pos, k_neg, predicted = _vote([book.node(nid).label for _, nid in top])
    return KnnApproxResult(
        depth=code.depth,
        node_ids=tuple(nid for _, nid in top),
        distances=tuple(float(np.sqrt(d2)) for d2, _ in top),
        k_pos=k_pos,
        k_neg=k_neg,
        predicted=predicted,
        threshold=float(np.sqrt(top[-1][0])),
        scanned=len(candidates),
    )


def maintain_state(
    book: CodeBook, code: Code | int, query: KnnQuery, result: KnnApproxResult
) -> KnnState:
    """Keep every scanned node whose minimal distance is within the threshold.

    Nodes with ``dist_min > dist_max_kNN`` cannot contain any of the
    query's nearest neighbours at any deeper depth and are dropped; the k
    result nodes always survive.
    """
    if isinstance(code, int):
        code = book.code_at_depth(code)
    q = query.point
    # rebuild the squared threshold from the result nodes: equality at the
    # boundary must keep a node, so no sqrt round trip is allowed here
    thr_sq = max(dist_max_sq(q, book.node(nid).mbr) for nid in result.node_ids)
    thr_sq = max(thr_sq, result.threshold**2)
    retained = frozenset(
        nid for nid in code.node_ids if dist_min_sq(q, book.node(nid).mbr) <= thr_sq
    )
    return KnnState(depth=code.depth, retained=retained)


def refine_chain(book: CodeBook, query: KnnQuery, depths=None) -> list[KnnApproxResult]:
    """Produce one result per depth, each refined from the previous state."""
    depths = list(depths) if depths is not None else list(book.depths())
    results = []
    state = None
    for depth in depths:
        code = book.code_at_depth(depth)
        result = classify(book, code, query, state)
        results.append(result)
        state = maintain_state(book, code, query, result)
    return results


def exact_knn(train: LabeledDataset, query: KnnQuery) -> KnnApproxResult:
    """Brute-force k nearest training points: the exact-result oracle.

    Point indices play the node-id role; distance ties break by index,
    matching the node-id tie rule of :func:`classify`.
    """
    if query.k > len(train):
        raise ValueError(f"k={query.k} exceeds training size {len(train)}")
    q = np.asarray(query.point, dtype=float)
    if q.shape[0] != train.dimensionality:
        raise ValueError("query dimensionality does not match the training set")
    d2 = ((train.features - q) ** 2).sum(axis=1)
    idx = np.argsort(d2, kind="stable")[: query.k]
    k_pos, k_neg, predicted = _vote(train.labels[idx])
    return KnnApproxResult(
        depth=EXACT_DEPTH,
        node_ids=tuple(int(i) for i in idx),
        distances=tuple(float(np.sqrt(d2[i])) for i in idx),
        k_pos=k_pos,
        k_neg=k_neg,
        predicted=predicted,
        threshold=float(np.sqrt(d2[idx[-1]])),
        scanned=len(train),
    )


def accuracy(predictions, actuals) -> float:
    """Fraction of predictions equal to the actual labels."""
    predictions = np.asarray(predictions)
    actuals = np.asarray(actuals)
    if predictions.shape != actuals.shape or len(predictions) == 0:
        raise ValueError("predictions and actuals must be equal-length and non-empty")
    return float(np.mean(predictions == actuals))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks ascending by value; tied values share the mean rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def auc(scores, labels) -> float:
    """Rank-based AUC of positive-class scores (Mann-Whitney, average ranks).

    ``scores`` are estimated positive-class probabilities (k_pos / k for
    kNN results); ``labels`` are actual classes. Both classes must appear.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels must be equal-length")
    n_pos = int((labels == POSITIVE).sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC needs at least one point of each class")
    ranks = _average_ranks(scores)
    pos_rank_sum = float(ranks[labels == POSITIVE].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)
