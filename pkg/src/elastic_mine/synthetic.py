"""Seeded synthetic datasets shaped like the classic public benchmarks.

Tests and demos run offline, so the LIBSVM/UCI corpora are stood in for by
generators that match their shape: point counts, dimensionality, class
balance, and the local structure a nearest-neighbour method thrives on.
All generators are deterministic under their seed.
"""

from __future__ import annotations

import numpy as np

from .datasets import LabeledDataset, RatingMatrix


def fourclass_like(seed: int = 42) -> LabeledDataset:
    """862 points, 2 features, 287 positive / 575 negative, XOR blob layout.

    Mirrors the shape of the LIBSVM ``fourclass`` set: two classes in an
    irregular arrangement that no line separates.
    """
    rng = np.random.default_rng(seed)
    pos = np.vstack([
        rng.normal([2.0, 2.0], 0.62, size=(144, 2)),
        rng.normal([-2.0, -2.0], 0.62, size=(143, 2)),
    ])
    neg = np.vstack([
        rng.normal([-2.0, 2.0], 0.70, size=(288, 2)),
        rng.normal([2.0, -2.0], 0.70, size=(287, 2)),
    ])
    features = np.vstack([pos, neg])
    labels = np.r_[np.ones(len(pos)), -np.ones(len(neg))]
    return LabeledDataset(features, labels)


def skin_like(n: int = 5000, seed: int = 0) -> LabeledDataset:
    """Integer-valued 3-feature colour blobs, ~1/3 positive, like UCI skin."""
    rng = np.random.default_rng(seed)
    n_pos = n // 3
    n_neg = n - n_pos
    pos = np.round(rng.normal([70.0, 95.0, 180.0], 16.0, size=(n_pos, 3)))
    neg = np.round(
        np.vstack([
            rng.normal([140.0, 120.0, 100.0], 30.0, size=(n_neg // 2, 3)),
            rng.normal([60.0, 180.0, 60.0], 24.0, size=(n_neg - n_neg // 2, 3)),
        ])
    )
    features = np.clip(np.vstack([pos, neg]), 0, 255)
    labels = np.r_[np.ones(n_pos), -np.ones(n_neg)]
    return LabeledDataset(features, labels)


def gaussian_mixture(
    n: int = 2000, d: int = 4, components: int = 6, spread: float = 0.7, seed: int = 0
) -> LabeledDataset:
    """A labeled Gaussian mixture; alternate components carry opposite classes."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-5.0, 5.0, size=(components, d))
    sizes = np.full(components, n // components)
    sizes[: n - sizes.sum()] += 1
    feats = []
    labels = []
    for c in range(components):
        feats.append(rng.normal(centers[c], spread, size=(sizes[c], d)))
        labels.append(np.full(sizes[c], 1 if c % 2 == 0 else -1))
    return LabeledDataset(np.vstack(feats), np.concatenate(labels))


def ratings_like(
    num_users: int = 600,
    num_items: int = 800,
    min_per_user: int = 15,
    max_per_user: int = 120,
    groups: int = 8,
    seed: int = 3,
    return_groups: bool = False,
):
    """A grouped-taste integer rating matrix on the 1-5 scale.

    Users belong to latent taste groups; ratings follow a noisy inner
    product of group and item vectors, so neighbourhood methods have real
    signal to find. Row counts per user vary widely, as in the MovieLens
    and Netflix corpora. With ``return_groups`` the per-user latent group
    assignment is returned alongside the matrix.
    """
    rng = np.random.default_rng(seed)
    user_group = rng.integers(0, groups, size=num_users)
    group_vec = rng.normal(0.0, 1.0, size=(groups, 4))
    item_vec = rng.normal(0.0, 1.0, size=(num_items, 4))
    item_bias = rng.normal(0.0, 0.3, size=num_items)
    ratings: dict[tuple[int, int], float] = {}
    for u in range(num_users):
        count = int(rng.integers(min_per_user, max_per_user + 1))
        items = rng.choice(num_items, size=min(count, num_items), replace=False)
        taste = group_vec[user_group[u]] + rng.normal(0.0, 0.25, size=4)
        for i in items:
            mu = 3.0 + 0.55 * float(taste @ item_vec[i]) + item_bias[i] + rng.normal(0.0, 0.35)
            ratings[(u + 1, int(i) + 1)] = float(np.clip(round(mu), 1.0, 5.0))
    matrix = RatingMatrix(num_users, num_items, ratings, rating_scale=(1.0, 5.0))
    if return_groups:
        return matrix, user_group
    return matrix
