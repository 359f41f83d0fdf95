"""Search tree tests: indexing, partition rules, and the top-down race."""

import math

import numpy as np
import pytest

from reckit.distributions import Gaussian, PairSpec, Region, Uniform
from reckit.errors import DepthExceededError, DomainError
from reckit.randomness import derive_seed
from reckit.tree import (
    NodeRecord,
    PartitionKind,
    depth_of,
    expand,
    heap_children,
    make_root,
    partition,
    top_down_process,
)

GAUSS = Gaussian(0.0, 1.0)


def test_depth_of():
    assert depth_of(1) == 1
    assert depth_of(2) == depth_of(3) == 2
    assert depth_of(4) == depth_of(7) == 3
    assert depth_of((1 << 20) + 5) == 21
    with pytest.raises(DomainError):
        depth_of(0)


def test_heap_children():
    assert heap_children(1) == (2, 3)
    assert heap_children(5) == (10, 11)
    # indices at depth d occupy [2^(d-1), 2^d)
    for h in (1, 2, 3, 6, 13):
        lo, hi = heap_children(h)
        assert depth_of(lo) == depth_of(hi) == depth_of(h) + 1
    with pytest.raises(DepthExceededError):
        heap_children(1 << 61)


def test_partition_sample_split():
    left, right = partition(PartitionKind.SAMPLE_SPLIT, Region(-1.0, 2.0), 0.5, GAUSS)
    assert left == Region(-1.0, 0.5)
    assert right == Region(0.5, 2.0)


def test_partition_dyadic_halves_mass():
    region = Region(-0.7, 1.9)
    left, right = partition(PartitionKind.DYADIC, region, 0.123, GAUSS)
    assert left.high == right.low
    assert GAUSS.mass(left) == pytest.approx(GAUSS.mass(region) / 2, abs=1e-15)
    assert GAUSS.mass(right) == pytest.approx(GAUSS.mass(region) / 2, abs=1e-15)


def test_partition_global_bound_keeps_region():
    region = Region(-math.inf, math.inf)
    left, right = partition(PartitionKind.GLOBAL_BOUND, region, 0.0, GAUSS)
    assert left is None
    assert right == region


def test_partition_empty_side():
    # splitting at the region edge leaves one empty slot
    left, right = partition(PartitionKind.SAMPLE_SPLIT, Region(0.0, 1.0), 0.0, Uniform(0.5, 1.0))
    assert left is None and right == Region(0.0, 1.0)


def test_make_root():
    root = make_root(GAUSS, 7)
    assert root.heap_index == 1 and root.depth == 1
    assert root.region == Region(-math.inf, math.inf)
    assert (root.ulow, root.uhigh) == (0.0, 1.0)
    assert root.mass == 1.0
    assert root.g.truncation == math.inf
    assert math.isfinite(root.x)
    assert make_root(GAUSS, 7) == root  # deterministic
    assert make_root(GAUSS, 8) != root


def test_expand_children_tile_parent():
    for seed in range(20):
        node = make_root(GAUSS, seed)
        for _ in range(6):
            children = expand(node, PartitionKind.SAMPLE_SPLIT, GAUSS, seed)
            assert 1 <= len(children) <= 2
            assert sum(c.mass for c in children) == pytest.approx(node.mass, abs=1e-12)
            for c in children:
                assert c.depth == node.depth + 1
                assert c.heap_index in heap_children(node.heap_index)
                assert c.g.value <= node.g.value  # race order
                assert c.parent_gumbel == node.g.value
                assert node.region.low <= c.region.low < c.region.high <= node.region.high
                assert c.region.contains(c.x)
                # cached endpoints match fresh CDF evaluation
                assert c.ulow == pytest.approx(GAUSS.cdf(c.region.low), abs=1e-15)
                assert c.uhigh == pytest.approx(GAUSS.cdf(c.region.high), abs=1e-15)
            node = children[0]


def test_expand_dyadic_mass_is_exact_power_of_two():
    node = make_root(GAUSS, 99)
    for d in range(2, 24):
        children = expand(node, PartitionKind.DYADIC, GAUSS, 99)
        assert len(children) == 2
        for c in children:
            assert c.mass == 2.0 ** -(d - 1)  # exact, not approximate
        node = children[1]


def test_expand_global_bound_is_a_chain():
    node = make_root(GAUSS, 5)
    seen = {node.x}
    for k in range(2, 12):
        children = expand(node, PartitionKind.GLOBAL_BOUND, GAUSS, 5)
        assert len(children) == 1
        child = children[0]
        assert child.depth == k
        assert child.region == Region(-math.inf, math.inf)
        assert child.mass == 1.0
        assert child.g.value <= node.g.value
        assert child.x not in seen  # fresh sample per arrival
        seen.add(child.x)
        node = child


def test_top_down_gumbels_strictly_decrease():
    for kind in PartitionKind:
        last = math.inf
        for node in top_down_process(GAUSS, kind, seed=11, max_yields=200):
            assert node.g.value < last
            last = node.g.value


def test_top_down_is_deterministic():
    a = list(top_down_process(GAUSS, PartitionKind.SAMPLE_SPLIT, 3, max_yields=50))
    b = list(top_down_process(GAUSS, PartitionKind.SAMPLE_SPLIT, 3, max_yields=50))
    assert a == b


def test_top_down_depth_limit():
    nodes = list(
        top_down_process(GAUSS, PartitionKind.DYADIC, 21, max_yields=500, depth_limit=4)
    )
    assert len(nodes) == 15  # the full tree of depth <= 4
    assert max(n.depth for n in nodes) == 4
    assert sorted(n.heap_index for n in nodes) == list(range(1, 16))


def test_top_down_race_samples_proposal():
    """The first arrival's sample is an unconditional proposal draw, so
    over seeds it must reproduce the proposal distribution."""
    from scipy import stats

    xs = [make_root(GAUSS, derive_seed(13, i)).x for i in range(4000)]
    assert stats.kstest(xs, "norm").pvalue > 0.01


def test_top_down_matches_exchangeable_race_across_kinds():
    """Partition choice changes the tree, not the race law: the k-th
    largest Gumbel should be identically distributed across kinds."""
    k = 5
    n = 1500

    def kth_gumbel(kind, base):
        out = []
        for i in range(n):
            nodes = top_down_process(GAUSS, kind, derive_seed(base, i), max_yields=k)
            out.append(list(nodes)[-1].g.value)
        return np.array(out)

    split = kth_gumbel(PartitionKind.SAMPLE_SPLIT, 1000)
    dyad = kth_gumbel(PartitionKind.DYADIC, 2000)
    from scipy import stats

    assert stats.ks_2samp(split, dyad).pvalue > 0.01


def test_node_record_mass_property():
    node = NodeRecord(1, 1, Region(-1.0, 1.0), 0.2, 0.7, 0.0,
                      make_root(GAUSS, 0).g, math.inf)
    assert node.mass == pytest.approx(0.5)
