"""Heap-indexed search tree over proposal regions.

Nodes are identified ahnentafel-style: the root is 1 and node H has
children 2H and 2H+1, so a node at depth D (root depth 1) has an index
in [2^(D-1), 2^D) and the index fits in D bits once D is known. Three
partition rules are supported:

* GLOBAL_BOUND: never shrink; one child carrying the parent's region
  (assigned through the right-child rule). Turns the search into a plain
  rejection race.
* SAMPLE_SPLIT: split the region at the node's own sample.
* DYADIC: split at the proposal median of the region, so the two
  children carry exactly half the parent's proposal mass each.

Every node caches the proposal-CDF images of its endpoints. All mass and
sampling arithmetic runs through those cached values, which makes dyadic
masses exactly 2^-(D-1) and lets a decoder walking the same path
reproduce region arithmetic bit for bit.
"""

from __future__ import annotations

import heapq
import math
from enum import Enum
from typing import Iterator, NamedTuple

from .distributions import Distribution1D, Region, sample_restricted_u
from .errors import DepthExceededError, DomainError
from .randomness import (
    DrawSlot,
    GumbelValue,
    StreamKey,
    keyed_uniform,
    trunc_gumbel,
)

_MAX_DEPTH = 62  # packed heap indices must fit in 64 bits with headroom


class PartitionKind(Enum):
    GLOBAL_BOUND = "global_bound"
    SAMPLE_SPLIT = "sample_split"
    DYADIC = "dyadic"


class NodeRecord(NamedTuple):
    """One realized search node.

    ``ulow``/``uhigh`` are the proposal CDF values of the region
    endpoints; ``g`` is the node's truncated Gumbel (its location is
    log of the region's proposal mass, its truncation the parent's
    realized value).
    """

    heap_index: int
    depth: int
    region: Region
    ulow: float
    uhigh: float
    x: float
    g: GumbelValue
    parent_gumbel: float

    @property
    def mass(self) -> float:
        return self.uhigh - self.ulow


def depth_of(heap_index: int) -> int:
    """Depth of a heap index; the root (index 1) has depth 1."""
    if heap_index < 1:
        raise DomainError(f"heap index must be >= 1, got {heap_index}")
    return heap_index.bit_length()


def heap_children(heap_index: int) -> tuple[int, int]:
    """Child indices (2H, 2H+1), refusing to grow past packable depth."""
    if heap_index.bit_length() + 1 > _MAX_DEPTH:
        raise DepthExceededError(
            f"children of node {heap_index} exceed depth {_MAX_DEPTH}"
        )
    return 2 * heap_index, 2 * heap_index + 1


def partition(
    kind: PartitionKind,
    region: Region,
    x: float,
    proposal: Distribution1D,
) -> tuple[Region | None, Region | None]:
    """Split a region into (left, right) children; None marks an empty slot."""
    ulow = proposal.cdf(region.low)
    uhigh = proposal.cdf(region.high)
    pieces = _partition_u(kind, region, ulow, uhigh, x, proposal)
    return pieces[0][0] if pieces[0] else None, pieces[1][0] if pieces[1] else None


def _partition_u(
    kind: PartitionKind,
    region: Region,
    ulow: float,
    uhigh: float,
    x: float,
    proposal: Distribution1D,
) -> tuple[tuple[Region, float, float] | None, tuple[Region, float, float] | None]:
    """Partition with cached CDF endpoints carried through to children."""
    if kind is PartitionKind.GLOBAL_BOUND:
        return None, (region, ulow, uhigh)
    if kind is PartitionKind.SAMPLE_SPLIT:
        cut, ucut = x, proposal.cdf(x)
    elif kind is PartitionKind.DYADIC:
        ucut = 0.5 * (ulow + uhigh)
        cut = proposal.inv_cdf(ucut)
    else:  # pragma: no cover
        raise DomainError(f"unknown partition kind {kind}")
    left = (Region(region.low, cut), ulow, ucut) if region.low < cut else None
    right = (Region(cut, region.high), ucut, uhigh) if cut < region.high else None
    return left, right


def _child_key(
    kind: PartitionKind, seed: int, child_index: int, child_depth: int, slot: DrawSlot
) -> StreamKey:
    # The global-bound chain's virtual heap index 2^k - 1 would alias once
    # folded to 64 bits, so that chain is keyed by its counter instead.
    if kind is PartitionKind.GLOBAL_BOUND:
        return StreamKey(seed, 1, int(slot), child_depth - 1)
    return StreamKey(seed, child_index, int(slot), 0)


def make_root(proposal: Distribution1D, seed: int) -> NodeRecord:
    """Realize the root node: the full line, mass one, untruncated Gumbel."""
    g = trunc_gumbel(
        keyed_uniform(StreamKey(seed, 1, int(DrawSlot.GUMBEL), 0)), 0.0, math.inf
    )
    x = sample_restricted_u(
        proposal, 0.0, 1.0, keyed_uniform(StreamKey(seed, 1, int(DrawSlot.SAMPLE), 0))
    )
    return NodeRecord(1, 1, Region(-math.inf, math.inf), 0.0, 1.0, x, g, math.inf)


def expand(
    node: NodeRecord,
    kind: PartitionKind,
    proposal: Distribution1D,
    seed: int,
) -> list[NodeRecord]:
    """Realize the children of a node.

    Children with zero proposal mass are skipped, as are slots emptied by
    the partition rule. Each child draws its truncated Gumbel (location =
    log child mass, bound = parent's realized value) and its sample from
    the keyed stream.
    """
    pieces = _partition_u(
        kind, node.region, node.ulow, node.uhigh, node.x, proposal
    )
    if kind is PartitionKind.GLOBAL_BOUND:
        child_indices = (None, 2 * node.heap_index + 1)
    else:
        child_indices = heap_children(node.heap_index)
    children: list[NodeRecord] = []
    for piece, child_index in zip(pieces, child_indices):
        if piece is None or child_index is None:
            continue
        region, ulow, uhigh = piece
        mass = uhigh - ulow
        if not mass > 0.0:
            continue
        depth = node.depth + 1
        g = trunc_gumbel(
            keyed_uniform(_child_key(kind, seed, child_index, depth, DrawSlot.GUMBEL)),
            math.log(mass),
            node.g.value,
        )
        x = sample_restricted_u(
            proposal,
            ulow,
            uhigh,
            keyed_uniform(_child_key(kind, seed, child_index, depth, DrawSlot.SAMPLE)),
        )
        children.append(
            NodeRecord(child_index, depth, region, ulow, uhigh, x, g, node.g.value)
        )
    return children


def top_down_process(
    proposal: Distribution1D,
    kind: PartitionKind,
    seed: int,
    max_yields: int | None = None,
    depth_limit: float = math.inf,
) -> Iterator[NodeRecord]:
    """Yield realized nodes in strictly decreasing Gumbel order.

    This is the top-down construction of the Gumbel race: a priority
    queue ordered by the realized Gumbel alone. The first yield is the
    root (Gumbel(0) arrival, sample from the whole proposal); nodes at
    the depth limit are yielded but not expanded. The stream ends early
    only when a depth limit makes the tree finite.
    """
    heap: list[tuple[float, int, NodeRecord]] = []
    root = make_root(proposal, seed)
    heapq.heappush(heap, (-root.g.value, root.heap_index, root))
    yielded = 0
    while heap and (max_yields is None or yielded < max_yields):
        _, _, node = heapq.heappop(heap)
        if node.depth < depth_limit:
            for child in expand(node, kind, proposal, seed):
                heapq.heappush(heap, (-child.g.value, child.heap_index, child))
        yielded += 1
        yield node
