"""Hierarchical codebook construction.

Three coders share one node/codebook representation:

* dual per-class R-trees over labeled points (classification),
* a single R-tree over SVD user vectors carrying aggregated ratings
  (collaborative filtering),
* a divisive k-means hierarchy as an alternate rating coder.

R-trees are bulk loaded top-down: each node's point set is tiled into its
children with a sort-tile-recursive pass, so sibling boxes have disjoint
interiors, every leaf sits at the same depth, and the per-depth sum of
bounding-box volumes can never grow with depth. A "code" is the set of all
nodes at one depth; depth 0 (the roots) is never usable as a code.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .datasets import NEGATIVE, POSITIVE, LabeledDataset, RatingMatrix
from .errors import BudgetTooSmallError, ClassMissingError, DepthNotFoundError

FORMAT_VERSION = 1

KIND_DUAL = "rtree-dual"
KIND_CF = "rtree-cf"
KIND_KMEANS = "kmeans-divisive"


@dataclass(frozen=True)
class Mbr:
    """Axis-aligned minimal bounding rectangle: per-dimension (low, upp)."""

    low: np.ndarray
    upp: np.ndarray

    def __post_init__(self):
        low = np.asarray(self.low, dtype=float)
        upp = np.asarray(self.upp, dtype=float)
        if low.shape != upp.shape or low.ndim != 1:
            raise ValueError("low/upp must be equal-length 1-d arrays")
        if np.any(low > upp):
            raise ValueError("MBR requires low_i <= upp_i in every dimension")
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "upp", upp)

    @classmethod
    def of_points(cls, points: np.ndarray) -> "Mbr":
        pts = np.asarray(points, dtype=float)
        return cls(pts.min(axis=0), pts.max(axis=0))

    @property
    def dimensionality(self) -> int:
        return len(self.low)

    def volume(self) -> float:
        """Product of extents; any zero-extent dimension makes it 0."""
        return float(np.prod(self.upp - self.low))

    def contains(self, other: "Mbr", tol: float = 0.0) -> bool:
        return bool(np.all(self.low <= other.low + tol) and np.all(other.upp <= self.upp + tol))


class ItemAggregate(NamedTuple):
    """A node's summary for one item: mean rating, mean rater average, rater count."""

    rating: float
    rater_mean: float
    raters: int


@dataclass(frozen=True)
class CodeNode:
    node_id: int
    tree: int
    depth: int
    mbr: Mbr
    parent: int | None
    children: tuple[int, ...]
    members: tuple[int, ...]  # enclosed point/user row indices (0-based)
    label: int | None = None  # +1/-1 for classification trees
    aggregates: dict[int, ItemAggregate] | None = None  # item id -> aggregate, CF coders

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def count(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class Code:
    """All node ids at one depth, in deterministic (tree, construction) order."""

    depth: int
    node_ids: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.node_ids)


@dataclass(frozen=True)
class CodeBook:
    kind: str
    nodes: tuple[CodeNode, ...]
    roots: tuple[int, ...]
    config: dict
    seed: int
    features: np.ndarray | None = None  # CF coders: the user feature matrix
    warnings: tuple[str, ...] = ()
    _codes: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        by_depth: dict[int, list[int]] = {}
        usable = self.usable_depth()
        for node in self.nodes:
            if 1 <= node.depth <= usable:
                by_depth.setdefault(node.depth, []).append(node.node_id)
        codes = {d: Code(d, tuple(ids)) for d, ids in by_depth.items()}
        object.__setattr__(self, "_codes", codes)

    def node(self, node_id: int) -> CodeNode:
        return self.nodes[node_id]

    def tree_depth(self, tree: int) -> int:
        return max(n.depth for n in self.nodes if n.tree == tree)

    def usable_depth(self) -> int:
        """Deepest depth present in every tree; deeper levels are unusable."""
        return min(self.tree_depth(t) for t in range(len(self.roots)))

    def depths(self) -> tuple[int, ...]:
        return tuple(sorted(self._codes))

    def code_at_depth(self, depth: int) -> Code:
        if depth == 0:
            raise DepthNotFoundError("depth 0 holds only the root nodes and is not a usable code")
        if depth not in self._codes:
            raise DepthNotFoundError(f"no code at depth {depth}; available depths {self.depths()}")
        return self._codes[depth]

    def ancestor_at(self, node_id: int, depth: int) -> int:
        """The id of the node's ancestor at the given shallower depth."""
        node = self.nodes[node_id]
        while node.depth > depth:
            node = self.nodes[node.parent]
        if node.depth != depth:
            raise ValueError(f"node {node_id} has no ancestor at depth {depth}")
        return node.node_id


def code_at_depth(book: CodeBook, depth: int) -> Code:
    return book.code_at_depth(depth)


def select_code(book: CodeBook, length_budget: int) -> Code:
    """The code of greatest length not exceeding the budget."""
    if length_budget < 1:
        raise BudgetTooSmallError(f"length budget {length_budget} must be >= 1")
    best = None
    for depth in book.depths():
        code = book.code_at_depth(depth)
        if code.length <= length_budget and (best is None or code.length > best.length):
            best = code
    if best is None:
        shortest = min(book.code_at_depth(d).length for d in book.depths())
        raise BudgetTooSmallError(
            f"length budget {length_budget} below the shortest code length {shortest}"
        )
    return best


def total_mbr_volume(book: CodeBook, code: Code) -> float:
    """Sum of bounding-box volumes over the code's nodes."""
    return sum(book.node(i).mbr.volume() for i in code.node_ids)


# ---------------------------------------------------------------------------
# R-tree bulk loading


def _tile(X: np.ndarray, order: np.ndarray, ngroups: int, cap: int, dim: int = 0) -> list[np.ndarray]:
    """Sort-tile-recursive pass: split ``order`` into <= ngroups groups of <= cap rows."""
    n = len(order)
    if ngroups <= 1 or n <= cap:
        return [order]
    srt = order[np.argsort(X[order, dim], kind="stable")]
    if X.shape[1] - dim <= 1:
        return [srt[i : i + cap] for i in range(0, n, cap)]
    slabs = math.ceil(ngroups ** (1.0 / (X.shape[1] - dim)))
    pages_per_slab = math.ceil(ngroups / slabs)
    slab_rows = pages_per_slab * cap
    groups: list[np.ndarray] = []
    for s in range(0, n, slab_rows):
        groups.extend(_tile(X, srt[s : s + slab_rows], pages_per_slab, cap, dim + 1))
    return groups


def _tree_height(n: int, max_entries: int, leaf_capacity: int) -> int:
    n_leaves = math.ceil(n / leaf_capacity)
    if n_leaves <= 1:
        return 0
    return max(1, math.ceil(math.log(n_leaves) / math.log(max_entries) - 1e-12))


class _Builder:
    """Accumulates nodes for one codebook; node ids are assigned in construction order."""

    def __init__(self):
        self.nodes: list[dict] = []

    def add(self, tree, depth, mbr, parent, members, label=None) -> int:
        nid = len(self.nodes)
        self.nodes.append(
            dict(node_id=nid, tree=tree, depth=depth, mbr=mbr, parent=parent,
                 children=[], members=members, label=label, aggregates=None)
        )
        if parent is not None:
            self.nodes[parent]["children"].append(nid)
        return nid

    def build_rtree(self, X: np.ndarray, tree: int, max_entries: int, leaf_capacity: int, label=None) -> int:
        height = _tree_height(len(X), max_entries, leaf_capacity)

        def rec(order: np.ndarray, remaining: int, depth: int, parent):
            mbr = Mbr.of_points(X[order])
            nid = self.add(tree, depth, mbr, parent, tuple(int(i) for i in order), label)
            if remaining == 0:
                return nid
            child_cap = leaf_capacity * max_entries ** (remaining - 1)
            ngroups = math.ceil(len(order) / child_cap)
            groups = _tile(X, order, ngroups, child_cap) if ngroups > 1 else [order]
            for grp in groups:
                rec(grp, remaining - 1, depth + 1, nid)
            return nid

        return rec(np.arange(len(X)), height, 0, None)

    def finish(self, kind, roots, config, seed, features=None, warnings=()) -> CodeBook:
        nodes = tuple(
            CodeNode(
                node_id=nd["node_id"], tree=nd["tree"], depth=nd["depth"], mbr=nd["mbr"],
                parent=nd["parent"], children=tuple(nd["children"]), members=nd["members"],
                label=nd["label"], aggregates=nd["aggregates"],
            )
            for nd in self.nodes
        )
        return CodeBook(kind, nodes, tuple(roots), dict(config), seed,
                        features=features, warnings=tuple(warnings))


def build_dual_rtrees(
    train: LabeledDataset, max_entries: int = 4, seed: int = 0, leaf_capacity: int | None = None
) -> CodeBook:
    """One depth-balanced R-tree per class; codes unite both trees per depth.

    ``leaf_capacity`` defaults to ``max_entries``; set it to 1 to obtain a
    book whose deepest code holds one point per node (point-MBR leaves).
    When the two trees end up with different heights, only depths present
    in both trees are usable and the deeper levels are dropped with a
    warning recorded on the book.
    """
    if max_entries < 2:
        raise ValueError("max_entries must be >= 2")
    leaf_capacity = leaf_capacity or max_entries
    pos, neg = train.class_counts()
    if pos < 1 or neg < 1:
        raise ClassMissingError(f"both classes need points (positive={pos}, negative={neg})")
    warnings = []
    builder = _Builder()
    roots = []
    index_maps = []
    for tree, label in enumerate((POSITIVE, NEGATIVE)):
        rows = np.flatnonzero(train.labels == label)
        roots.append(builder.build_rtree(train.features[rows], tree, max_entries, leaf_capacity, label))
        index_maps.append(rows)
    # node members refer to per-class row order; remap to dataset row indices
    for nd in builder.nodes:
        rows = index_maps[nd["tree"]]
        nd["members"] = tuple(int(rows[i]) for i in nd["members"])
    config = {"max_entries": max_entries, "leaf_capacity": leaf_capacity, "task": "knn"}
    book = builder.finish(KIND_DUAL, roots, config, seed, warnings=warnings)
    heights = [book.tree_depth(0), book.tree_depth(1)]
    if heights[0] != heights[1]:
        warnings.append(
            f"tree heights differ ({heights[0]} vs {heights[1]}); depths beyond {min(heights)} dropped"
        )
    if book.usable_depth() < 1:
        warnings.append("a class tree is a single leaf; no usable code exists")
    return builder.finish(KIND_DUAL, roots, config, seed, warnings=warnings)


def aggregate_ratings(matrix: RatingMatrix, users: Iterable[int]) -> dict[int, ItemAggregate]:
    """Per-item aggregated rating and mean-rater-average over a user group.

    For each item rated by at least one member, the aggregate rating is the
    mean of the members' ratings of it, and the rater mean is the mean of
    those raters' overall average ratings. Items nobody rated are absent.
    """
    sums: dict[int, list] = {}
    for u in users:
        row = matrix.user_ratings(u)
        if not row:
            continue
        ubar = sum(row.values()) / len(row)
        for i, r in row.items():
            s = sums.setdefault(i, [0.0, 0.0, 0])
            s[0] += r
            s[1] += ubar
            s[2] += 1
    return {
        i: ItemAggregate(s[0] / s[2], s[1] / s[2], s[2]) for i, s in sorted(sums.items())
    }


def _attach_aggregates(builder: _Builder, matrix: RatingMatrix):
    for nd in builder.nodes:
        nd["aggregates"] = aggregate_ratings(matrix, (m + 1 for m in nd["members"]))


def build_cf_codebook(
    matrix: RatingMatrix,
    features,
    max_entries: int = 4,
    seed: int = 0,
    leaf_capacity: int | None = None,
) -> CodeBook:
    """R-tree over user feature vectors; every node aggregates the raw ratings.

    ``features`` is the (m, d) user feature matrix (row u-1 for user u), or
    a :class:`~elastic_mine.cf.UserFeatureMatrix`. Aggregates are always
    computed from the original rating matrix, never from other aggregates.
    """
    values = getattr(features, "values", features)
    values = np.asarray(values, dtype=float)
    if len(values) != matrix.num_users:
        raise ValueError(f"feature rows {len(values)} != num_users {matrix.num_users}")
    if max_entries < 2:
        raise ValueError("max_entries must be >= 2")
    leaf_capacity = leaf_capacity or max_entries
    builder = _Builder()
    root = builder.build_rtree(values, 0, max_entries, leaf_capacity)
    _attach_aggregates(builder, matrix)
    config = {"max_entries": max_entries, "leaf_capacity": leaf_capacity, "task": "cf"}
    warnings = []
    if builder.nodes[root]["children"] == []:
        warnings.append("tree is a single leaf; no usable code exists")
    return builder.finish(KIND_CF, [root], config, seed, features=values, warnings=warnings)


# ---------------------------------------------------------------------------
# Divisive k-means coder


def kmeans(
    X: np.ndarray, k: int, iterations: int = 10, seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic k-means (WCSS objective, fixed iteration count).

    Seeding is farthest-point: the first centre is the point farthest from
    the data centroid, each further centre maximises the distance to the
    centres chosen so far (ties by row index). Returns (labels, centroids).
    Empty clusters keep their previous centroid.
    """
    X = np.asarray(X, dtype=float)
    n = len(X)
    k = min(k, n)
    centre = X.mean(axis=0)
    first = int(np.argmax(((X - centre) ** 2).sum(axis=1)))
    chosen = [first]
    d2 = ((X - X[first]) ** 2).sum(axis=1)
    while len(chosen) < k:
        nxt = int(np.argmax(d2))
        chosen.append(nxt)
        d2 = np.minimum(d2, ((X - X[nxt]) ** 2).sum(axis=1))
    centroids = X[chosen].copy()
    labels = np.zeros(n, dtype=int)
    for _ in range(max(1, iterations)):
        dists = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(dists, axis=1)
        for c in range(k):
            mask = labels == c
            if mask.any():
                centroids[c] = X[mask].mean(axis=0)
    return labels, centroids


def wcss(X: np.ndarray, labels: np.ndarray, centroids: np.ndarray) -> float:
    """Within-cluster sum of squared distances to the assigned centroids."""
    return float(((np.asarray(X) - centroids[labels]) ** 2).sum())


def build_kmeans_codebook(
    matrix: RatingMatrix,
    features,
    branching: int = 2,
    depth_limit: int = 4,
    iterations: int = 10,
    seed: int = 0,
) -> CodeBook:
    """Divisive k-means hierarchy over user vectors with per-cluster aggregates.

    The whole user set is the root (depth 0); each cluster is split with
    ``branching``-means on the user feature vectors until ``depth_limit``
    is reached or clusters become singletons. Clusters smaller than the
    branching factor are carried down unsplit (recorded as a warning);
    empty clusters are dropped.
    """
    if branching < 2:
        raise ValueError("branching must be >= 2")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    values = getattr(features, "values", features)
    values = np.asarray(values, dtype=float)
    if len(values) != matrix.num_users:
        raise ValueError(f"feature rows {len(values)} != num_users {matrix.num_users}")
    warnings: list[str] = []
    builder = _Builder()

    def rec(order: np.ndarray, depth: int, parent):
        nid = builder.add(0, depth, Mbr.of_points(values[order]), parent,
                          tuple(int(i) for i in order))
        if depth >= depth_limit:
            return nid
        if len(order) < branching:
            # unsplittable clusters carry down unchanged so every level
            # still partitions the full user set
            if len(order) > 1:
                warnings.append(f"cluster of {len(order)} users at depth {depth} not split")
            rec(order, depth + 1, nid)
            return nid
        labels, _ = kmeans(values[order], branching, iterations, seed)
        for c in range(branching):
            grp = order[labels == c]
            if len(grp):
                rec(grp, depth + 1, nid)
        return nid

    root = rec(np.arange(matrix.num_users), 0, None)
    _attach_aggregates(builder, matrix)
    config = {
        "branching": branching, "depth_limit": depth_limit,
        "iterations": iterations, "task": "cf",
    }
    return builder.finish(KIND_KMEANS, [root], config, seed, features=values, warnings=warnings)


# ---------------------------------------------------------------------------
# Explicit-hierarchy builders (worked examples and test fixtures)


def _is_leaf_spec(spec) -> bool:
    return all(isinstance(x, (int, np.integer)) for x in spec)


def _hierarchy_depth(spec) -> int:
    if _is_leaf_spec(spec):
        return 0
    depths = {_hierarchy_depth(child) for child in spec}
    if len(depths) != 1:
        raise ValueError("hierarchy is not depth-balanced")
    return depths.pop() + 1


def _build_hierarchy(builder: _Builder, spec, points: np.ndarray, tree: int, depth, parent, label):
    if _is_leaf_spec(spec):
        members = tuple(int(i) for i in spec)
        mbr = Mbr.of_points(points[list(members)])
        return builder.add(tree, depth, mbr, parent, members, label), members
    nid = builder.add(tree, depth, Mbr.of_points(points[:1]), parent, (), label)
    all_members: list[int] = []
    for child in spec:
        _, members = _build_hierarchy(builder, child, points, tree, depth + 1, nid, label)
        all_members.extend(members)
    builder.nodes[nid]["members"] = tuple(all_members)
    builder.nodes[nid]["mbr"] = Mbr.of_points(points[all_members])
    return nid, tuple(all_members)


def dual_book_from_hierarchy(train: LabeledDataset, positive_spec, negative_spec) -> CodeBook:
    """Build a dual-tree book from explicit nested row-index groupings.

    A node spec is either a list of dataset row indices (leaf) or a list of
    child specs. Both trees must be depth-balanced to the same height.
    """
    builder = _Builder()
    roots = []
    for tree, (spec, label) in enumerate(((positive_spec, POSITIVE), (negative_spec, NEGATIVE))):
        _hierarchy_depth(spec)
        nid, _ = _build_hierarchy(builder, spec, train.features, tree, 0, None, label)
        roots.append(nid)
    return builder.finish(KIND_DUAL, roots, {"task": "knn", "source": "explicit"}, 0)


def cf_book_from_hierarchy(matrix: RatingMatrix, spec, features=None) -> CodeBook:
    """Build a CF book from an explicit nested grouping of 1-based user ids."""

    def to_rows(s):
        if _is_leaf_spec(s):
            return [u - 1 for u in s]
        return [to_rows(c) for c in s]

    values = getattr(features, "values", features)
    if values is None:
        values = np.arange(matrix.num_users, dtype=float).reshape(-1, 1)
    values = np.asarray(values, dtype=float)
    builder = _Builder()
    rows_spec = to_rows(spec)
    _hierarchy_depth(rows_spec)
    root, _ = _build_hierarchy(builder, rows_spec, values, 0, 0, None, None)
    _attach_aggregates(builder, matrix)
    return builder.finish(
        KIND_CF, [root], {"task": "cf", "source": "explicit"}, 0, features=values
    )


# ---------------------------------------------------------------------------
# Persistence: canonical, versioned structured text


def _fmt_floats(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def dump_codebook(book: CodeBook) -> str:
    lines = [f"elastic-mine-codebook {FORMAT_VERSION}"]
    lines.append(f"kind {book.kind}")
    lines.append(f"seed {book.seed}")
    lines.append("config " + json.dumps(book.config, sort_keys=True, separators=(",", ":")))
    for w in book.warnings:
        lines.append("warning " + w)
    lines.append("roots " + " ".join(str(r) for r in book.roots))
    if book.features is None:
        lines.append("features 0 0")
    else:
        m, d = book.features.shape
        lines.append(f"features {m} {d}")
        for row in book.features:
            lines.append("F " + _fmt_floats(row))
    lines.append(f"nodes {len(book.nodes)}")
    for node in book.nodes:
        parent = "-" if node.parent is None else str(node.parent)
        label = "-" if node.label is None else str(node.label)
        lines.append(
            f"N {node.node_id} {node.tree} {node.depth} {parent} {label}"
            f" C {' '.join(str(c) for c in node.children)}"
            f" M {_fmt_floats(node.mbr.low)} | {_fmt_floats(node.mbr.upp)}"
            f" P {' '.join(str(p) for p in node.members)}"
        )
        if node.aggregates is not None:
            for item in sorted(node.aggregates):
                agg = node.aggregates[item]
                lines.append(f"A {node.node_id} {item} {agg.rating!r} {agg.rater_mean!r} {agg.raters}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def save_codebook(book: CodeBook, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_codebook(book))


def load_codebook(path_or_text) -> CodeBook:
    if isinstance(path_or_text, str) and "\n" in path_or_text:
        text = path_or_text
    else:
        with open(path_or_text, encoding="utf-8") as fh:
            text = fh.read()
    lines = text.splitlines()
    header = lines[0].split()
    if header[0] != "elastic-mine-codebook" or int(header[1]) != FORMAT_VERSION:
        raise ValueError(f"unsupported codebook header {lines[0]!r}")
    kind = seed = config = None
    roots: tuple[int, ...] = ()
    warnings: list[str] = []
    features = None
    feat_rows: list[list[float]] = []
    nodes: dict[int, dict] = {}
    for line in lines[1:]:
        if not line or line == "end":
            continue
        tag, _, rest = line.partition(" ")
        if tag == "kind":
            kind = rest
        elif tag == "seed":
            seed = int(rest)
        elif tag == "config":
            config = json.loads(rest)
        elif tag == "warning":
            warnings.append(rest)
        elif tag == "roots":
            roots = tuple(int(t) for t in rest.split())
        elif tag == "features":
            m, d = (int(t) for t in rest.split())
            features = (m, d)
        elif tag == "F":
            feat_rows.append([float(t) for t in rest.split()])
        elif tag == "N":
            toks = rest.split()
            nid, tree, depth = int(toks[0]), int(toks[1]), int(toks[2])
            parent = None if toks[3] == "-" else int(toks[3])
            label = None if toks[4] == "-" else int(toks[4])
            ci = toks.index("C")
            mi = toks.index("M")
            pi = toks.index("P")
            bar = toks.index("|")
            children = tuple(int(t) for t in toks[ci + 1 : mi])
            low = [float(t) for t in toks[mi + 1 : bar]]
            upp = [float(t) for t in toks[bar + 1 : pi]]
            members = tuple(int(t) for t in toks[pi + 1 :])
            nodes[nid] = dict(
                node_id=nid, tree=tree, depth=depth, parent=parent, label=label,
                children=children, mbr=Mbr(np.array(low), np.array(upp)),
                members=members, aggregates=None,
            )
        elif tag == "A":
            toks = rest.split()
            nid, item = int(toks[0]), int(toks[1])
            agg = ItemAggregate(float(toks[2]), float(toks[3]), int(toks[4]))
            if nodes[nid]["aggregates"] is None:
                nodes[nid]["aggregates"] = {}
            nodes[nid]["aggregates"][item] = agg
        elif tag == "nodes":
            continue
        else:
            raise ValueError(f"unknown codebook line tag {tag!r}")
    feat_array = None
    if features and features[0] > 0:
        feat_array = np.array(feat_rows)
    node_tuple = tuple(
        CodeNode(**nodes[nid]) for nid in sorted(nodes)
    )
    return CodeBook(kind, node_tuple, roots, config, seed,
                    features=feat_array, warnings=tuple(warnings))
