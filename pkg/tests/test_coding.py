import numpy as np
import pytest

import elastic_mine as em
from elastic_mine.coding import Mbr, kmeans
from elastic_mine.errors import BudgetTooSmallError, ClassMissingError, DepthNotFoundError

from conftest import EXAMPLE_HIERARCHY, TABLE_FEATURES, leaf_with_members


def make_dataset(n_pos, n_neg, d=2, seed=0):
    rng = np.random.default_rng(seed)
    feats = rng.normal(size=(n_pos + n_neg, d))
    labels = np.r_[np.ones(n_pos), -np.ones(n_neg)]
    return em.LabeledDataset(feats, labels)


def chunk(seq, n_groups):
    base, rem = divmod(len(seq), n_groups)
    out, idx = [], 0
    for g in range(n_groups):
        size = base + (1 if g < rem else 0)
        out.append(seq[idx : idx + size])
        idx += size
    return out


class TestDualRtrees:
    def test_21_points_capacity_3(self):
        """21 points at capacity 3 pack into 7 three-point leaves over 3 tree levels."""
        ds = make_dataset(21, 21, seed=4)
        book = em.build_dual_rtrees(ds, max_entries=3, seed=0)
        for tree in (0, 1):
            leaves = [n for n in book.nodes if n.tree == tree and n.is_leaf]
            assert len(leaves) == 7
            assert all(n.count == 3 for n in leaves)
            assert book.tree_depth(tree) == 2  # root, internal, leaves
        assert book.depths() == (1, 2)

    def test_single_point_classes_warn(self):
        ds = make_dataset(1, 1)
        book = em.build_dual_rtrees(ds, max_entries=4)
        assert book.depths() == ()
        assert any("no usable code" in w for w in book.warnings)

    def test_missing_class_rejected(self):
        ds = em.LabeledDataset([[0.0], [1.0]], [1, 1])
        with pytest.raises(ClassMissingError):
            em.build_dual_rtrees(ds)

    def test_max_entries_validated(self, fourclass):
        with pytest.raises(ValueError):
            em.build_dual_rtrees(fourclass, max_entries=1)

    def test_code_length_profile(self, fourclass):
        """Five code depths with per-depth lengths near the reference profile."""
        book = em.build_dual_rtrees(fourclass, max_entries=3, seed=7)
        reference = [6, 15, 36, 88, 253]  # construction-dependent, match within 20%
        lengths = [book.code_at_depth(d).length for d in book.depths()]
        assert len(lengths) == 5
        for got, want in zip(lengths, reference):
            assert abs(got - want) <= 0.2 * want

    def test_members_partition_training_set(self, fourclass_book, fourclass_split):
        train, _ = fourclass_split
        for depth in fourclass_book.depths():
            members = []
            for nid in fourclass_book.code_at_depth(depth).node_ids:
                members.extend(fourclass_book.node(nid).members)
            assert sorted(members) == list(range(len(train)))

    def test_unequal_tree_heights_drop_extra_depths(self):
        ds = make_dataset(6, 400, seed=9)
        book = em.build_dual_rtrees(ds, max_entries=3, seed=0)
        assert book.tree_depth(0) < book.tree_depth(1)
        assert book.depths()[-1] == book.tree_depth(0)
        assert any("heights differ" in w for w in book.warnings)
        for depth in book.depths():
            trees = {book.node(n).tree for n in book.code_at_depth(depth).node_ids}
            assert trees == {0, 1}

    def test_parent_count_is_sum_of_children(self, fourclass_book):
        for node in fourclass_book.nodes:
            if not node.is_leaf:
                assert node.count == sum(
                    fourclass_book.node(c).count for c in node.children
                )


class TestTreeInvariants:
    @pytest.mark.parametrize("seed", range(6))
    def test_enclosure_balance_volume(self, seed):
        rng = np.random.default_rng(seed)
        n_pos = int(rng.integers(8, 300))
        n_neg = int(rng.integers(8, 300))
        d = int(rng.integers(1, 5))
        cap = int(rng.integers(2, 6))
        ds = make_dataset(n_pos, n_neg, d=d, seed=seed + 100)
        book = em.build_dual_rtrees(ds, max_entries=cap, seed=seed)
        # enclosure: every parent box contains every child box
        for node in book.nodes:
            for child_id in node.children:
                assert node.mbr.contains(book.node(child_id).mbr)
        # depth balance: every leaf of a tree sits at that tree's max depth
        for tree in (0, 1):
            depths = {n.depth for n in book.nodes if n.tree == tree and n.is_leaf}
            assert len(depths) == 1
        # volume never grows with depth; lengths strictly grow
        vols = [em.total_mbr_volume(book, book.code_at_depth(dd)) for dd in book.depths()]
        assert all(a >= b - 1e-9 for a, b in zip(vols, vols[1:]))
        lengths = [book.code_at_depth(dd).length for dd in book.depths()]
        assert all(a < b for a, b in zip(lengths, lengths[1:]))

    def test_deterministic_serialization(self, fourclass):
        a = em.build_dual_rtrees(fourclass, max_entries=3, seed=7)
        b = em.build_dual_rtrees(fourclass, max_entries=3, seed=7)
        assert em.dump_codebook(a) == em.dump_codebook(b)


class TestCfCodebook:
    def test_leaf_aggregates_match_worked_example(self, example_cf_book):
        """Three users' shared item averages 4.67/4.33; a single rater passes through."""
        leaf = leaf_with_members(example_cf_book, {0, 1, 2})
        agg1 = leaf.aggregates[1]
        assert agg1.rating == pytest.approx(14 / 3, abs=1e-9)
        assert agg1.rater_mean == pytest.approx(13 / 3, abs=1e-9)
        assert agg1.raters == 3
        assert 2 not in leaf.aggregates
        agg3 = leaf.aggregates[3]
        assert (agg3.rating, agg3.rater_mean, agg3.raters) == (3.0, 4.0, 1)

    def test_root_covers_all_items(self, example_matrix):
        book = em.build_cf_codebook(example_matrix, TABLE_FEATURES, max_entries=3)
        root = book.node(book.roots[0])
        assert sorted(root.aggregates) == [1, 2, 3, 4, 5]
        assert root.count == 12

    def test_str_build_recovers_example_leaves(self, example_matrix):
        book = em.build_cf_codebook(example_matrix, TABLE_FEATURES, max_entries=3)
        leaf_sets = {frozenset(n.members) for n in book.nodes if n.is_leaf}
        assert leaf_sets == {
            frozenset({0, 1, 2}), frozenset({3, 4, 5}),
            frozenset({6, 7, 8}), frozenset({9, 10, 11}),
        }

    def test_aggregates_recomputed_from_raw_matrix(self, example_matrix):
        book = em.build_cf_codebook(example_matrix, TABLE_FEATURES, max_entries=2)
        for node in book.nodes:
            users = [m + 1 for m in node.members]
            items = {i for u in users for i in example_matrix.user_ratings(u)}
            assert set(node.aggregates) == items
            for item in items:
                raters = [u for u in users if item in example_matrix.user_ratings(u)]
                agg = node.aggregates[item]
                assert agg.raters == len(raters)
                assert agg.rating == pytest.approx(
                    np.mean([example_matrix.ratings[(u, item)] for u in raters]), abs=1e-9
                )
                assert agg.rater_mean == pytest.approx(
                    np.mean([example_matrix.user_mean(u) for u in raters]), abs=1e-9
                )

    def test_feature_row_count_checked(self, example_matrix):
        with pytest.raises(ValueError):
            em.build_cf_codebook(example_matrix, TABLE_FEATURES[:5], max_entries=3)


class TestKmeansCodebook:
    def test_first_split_groups_taste_clusters(self, example_matrix):
        book = em.build_kmeans_codebook(
            example_matrix, TABLE_FEATURES, branching=2, depth_limit=2, iterations=10, seed=1
        )
        level2 = {frozenset(book.node(n).members) for n in book.code_at_depth(1).node_ids}
        assert level2 == {frozenset(range(6)), frozenset(range(6, 12))}

    def test_cluster_count_bound(self, example_matrix):
        book = em.build_kmeans_codebook(
            example_matrix, TABLE_FEATURES, branching=2, depth_limit=3, iterations=5, seed=0
        )
        assert book.code_at_depth(2).length <= 4

    def test_identical_vectors_degenerate(self, example_matrix):
        same = np.ones((12, 2))
        book = em.build_kmeans_codebook(
            example_matrix, same, branching=2, depth_limit=2, iterations=3, seed=0
        )
        # the split collapses; each level still partitions all 12 users
        for depth in book.depths():
            members = []
            for nid in book.code_at_depth(depth).node_ids:
                members.extend(book.node(nid).members)
            assert sorted(members) == list(range(12))

    def test_singletons_carried_to_every_level(self):
        matrix = em.RatingMatrix(3, 2, {(1, 1): 5.0, (2, 1): 3.0, (3, 2): 1.0})
        feats = np.array([[0.0, 0.0], [5.0, 0.0], [0.0, 5.0]])
        book = em.build_kmeans_codebook(matrix, feats, branching=2, depth_limit=3, seed=0)
        for depth in book.depths():
            members = []
            for nid in book.code_at_depth(depth).node_ids:
                members.extend(book.node(nid).members)
            assert sorted(members) == [0, 1, 2]

    def test_small_cluster_not_split(self, example_matrix):
        book = em.build_kmeans_codebook(
            example_matrix, TABLE_FEATURES, branching=8, depth_limit=3, iterations=5, seed=0
        )
        assert any("not split" in w for w in book.warnings)

    def test_aggregates_present(self, example_matrix):
        book = em.build_kmeans_codebook(
            example_matrix, TABLE_FEATURES, branching=2, depth_limit=2, seed=1
        )
        for nid in book.code_at_depth(1).node_ids:
            assert book.node(nid).aggregates


class TestKmeans:
    def test_two_means_split(self):
        labels, _ = kmeans(TABLE_FEATURES, 2, iterations=10)
        groups = {frozenset(np.flatnonzero(labels == c).tolist()) for c in (0, 1)}
        assert groups == {frozenset(range(6)), frozenset(range(6, 12))}

    def test_deterministic(self):
        a, ca = kmeans(TABLE_FEATURES, 3, iterations=10)
        b, cb = kmeans(TABLE_FEATURES, 3, iterations=10)
        assert np.array_equal(a, b)
        assert np.array_equal(ca, cb)


@pytest.fixture(scope="module")
def ladder_book():
    """A CF book whose code lengths are exactly 2, 6, 14, 27, 56."""
    level = [[u] for u in range(1, 57)]
    for target in (27, 14, 6, 2):
        level = chunk(level, target)
    matrix = em.RatingMatrix(
        56, 2, {(u, 1 + u % 2): float(u % 5 + 1) for u in range(1, 57)}
    )
    return em.cf_book_from_hierarchy(matrix, level)


class TestCodeSelection:

    def test_ladder_lengths(self, ladder_book):
        lengths = [ladder_book.code_at_depth(d).length for d in ladder_book.depths()]
        assert lengths == [2, 6, 14, 27, 56]

    def test_select_code_below_budget(self, ladder_book):
        assert em.select_code(ladder_book, 30).length == 27

    def test_select_code_inclusive_boundary(self, ladder_book):
        assert em.select_code(ladder_book, 56).length == 56

    def test_select_code_too_small(self, ladder_book):
        with pytest.raises(BudgetTooSmallError):
            em.select_code(ladder_book, 1)

    def test_code_at_depth_errors(self, fourclass_book):
        with pytest.raises(DepthNotFoundError):
            fourclass_book.code_at_depth(0)
        with pytest.raises(DepthNotFoundError):
            fourclass_book.code_at_depth(99)

    def test_code_ordering_by_tree_then_construction(self, fourclass_book):
        for depth in fourclass_book.depths():
            ids = fourclass_book.code_at_depth(depth).node_ids
            trees = [fourclass_book.node(i).tree for i in ids]
            assert trees == sorted(trees)
            assert list(ids) == sorted(ids)


class TestVolume:
    def test_rectangle_area(self):
        mbr = Mbr(np.array([0.0, 0.0]), np.array([2.0, 3.0]))
        assert mbr.volume() == 6.0

    def test_sum_over_nodes(self, example_matrix):
        book = em.cf_book_from_hierarchy(
            example_matrix, [[1, 2], [3, 4]],
            np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]),
        )
        code = book.code_at_depth(1)
        assert em.total_mbr_volume(book, code) == pytest.approx(2.0)

    def test_zero_extent_dimension(self):
        mbr = Mbr(np.array([0.0, 1.0]), np.array([5.0, 1.0]))
        assert mbr.volume() == 0.0

    def test_invalid_bounds_rejected(self):
        with pytest.raises(ValueError):
            Mbr(np.array([1.0]), np.array([0.0]))


class TestPersistence:
    def test_round_trip_dual(self, fourclass_book, tmp_path):
        path = tmp_path / "book.ecb"
        em.save_codebook(fourclass_book, path)
        loaded = em.load_codebook(path)
        assert em.dump_codebook(loaded) == em.dump_codebook(fourclass_book)
        assert loaded.depths() == fourclass_book.depths()

    def test_round_trip_cf(self, example_cf_book):
        text = em.dump_codebook(example_cf_book)
        loaded = em.load_codebook(text)
        assert em.dump_codebook(loaded) == text
        leaf = leaf_with_members(loaded, {0, 1, 2})
        assert leaf.aggregates[1].raters == 3

    def test_version_check(self):
        with pytest.raises(ValueError):
            em.load_codebook("elastic-mine-codebook 99\nkind x\n")
