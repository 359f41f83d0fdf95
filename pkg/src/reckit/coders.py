"""Relative entropy coders over a shared keyed-randomness stream.

All variants race truncated Gumbels attached to proposal regions and
return the identity of the winning candidate, which the decoder can
regenerate from the seed alone:

* AS_STAR / AD_STAR: exact branch-and-bound search over the sample-split
  or dyadic tree; the code is the winner's heap index.
* DAD_STAR: the dyadic search truncated to a depth budget D, plus a
  second root-level candidate reserved for codeword 0, so every one of
  the 2^D codewords is usable.
* PFR: the same race without region shrinking (global bound), coded by
  the 1-based arrival index of the winner.
* MRC: importance selection among 2^bits independent proposal draws.

The search loop follows the branch-and-bound schedule: a priority queue
ordered by realized Gumbel plus the region's ratio bound, an incumbent
lower bound from scored samples, and pruning of children whose bound
cannot beat the incumbent. Ties are broken toward smaller heap indices.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import Enum

from .distributions import FULL_LINE, Distribution1D, PairSpec, Region, sample_restricted_u
from .errors import BudgetExhaustedError, DomainError, InvalidCodeError, UnboundedRatioError
from .randomness import DrawSlot, StreamKey, keyed_uniform, trunc_gumbel
from .tree import NodeRecord, PartitionKind, _partition_u, depth_of, expand, make_root

INF = math.inf


class Variant(Enum):
    AS_STAR = "as"
    AD_STAR = "ad"
    DAD_STAR = "dad"
    PFR = "pfr"
    MRC = "mrc"


_KIND_TO_VARIANT = {
    PartitionKind.SAMPLE_SPLIT: Variant.AS_STAR,
    PartitionKind.DYADIC: Variant.AD_STAR,
    PartitionKind.GLOBAL_BOUND: Variant.PFR,
}
_VARIANT_TO_KIND = {v: k for k, v in _KIND_TO_VARIANT.items()}


@dataclass(frozen=True, slots=True)
class Code:
    """A transmitted codeword.

    depth_or_budget is the winner's depth for the exact heap-coded
    variants, the fixed bit budget for DAD_STAR / MRC, and the arrival
    index again for PFR (whose payload is that index, not a heap index).
    """

    variant: Variant
    depth_or_budget: int
    payload: int

    def __post_init__(self) -> None:
        v, d, h = self.variant, self.depth_or_budget, self.payload
        if d < 1:
            raise InvalidCodeError(f"depth/budget must be >= 1, got {d}")
        if v in (Variant.AS_STAR, Variant.AD_STAR):
            if h < 1 or depth_of(h) != d:
                raise InvalidCodeError(f"heap index {h} does not sit at depth {d}")
        elif v in (Variant.DAD_STAR, Variant.MRC):
            if not 0 <= h < (1 << d):
                raise InvalidCodeError(f"codeword {h} outside budget of {d} bits")
        elif v is Variant.PFR:
            if h < 1:
                raise InvalidCodeError(f"arrival index must be >= 1, got {h}")


@dataclass(frozen=True, slots=True)
class TrialStats:
    """Search accounting for one encode: queue pops, winner depth, payload
    bits, standalone framing overhead, and the final incumbent value."""

    steps: int
    returned_depth: int
    payload_bits: int
    overhead_bits: int
    lower_bound: float


def _gamma_bits(n: int) -> int:
    return 2 * (n.bit_length() - 1) + 1


def _delta_bits(n: int) -> int:
    return (n.bit_length() - 1) + _gamma_bits(n.bit_length())


def _stats_for(variant: Variant, steps: int, depth: int, payload: int, lb: float) -> TrialStats:
    if variant in (Variant.AS_STAR, Variant.AD_STAR):
        payload_bits = depth
        overhead = _gamma_bits(depth) - 1  # pack_exact drops the leading index bit
    elif variant is Variant.PFR:
        payload_bits = payload.bit_length()
        overhead = _delta_bits(payload) - payload_bits
    else:
        payload_bits = depth  # fixed-width codeword at the budget
        overhead = 0
    return TrialStats(steps, depth, payload_bits, overhead, lb)


@dataclass(frozen=True, slots=True)
class _ExtraCandidate:
    """A leaf candidate outside the tree (the depth-limited coder's second
    root-level draw). Competes in incumbent updates but is never enqueued:
    a node that cannot be expanded costs no search step."""

    heap_index: int
    g_value: float
    x: float


def _astar_search(
    pair: PairSpec,
    kind: PartitionKind,
    seed: int,
    max_depth: float,
    max_steps: float,
    extras: tuple[_ExtraCandidate, ...],
    root: NodeRecord,
):
    """Branch-and-bound core shared by every race variant.

    Returns (winner_heap_index, winner_depth, winner_x, steps, LB).
    """
    proposal = pair.proposal
    root_bound = pair.bound_M(FULL_LINE)
    lb = -INF
    best_index = best_x = None
    best_depth = 0
    for cand in extras:
        score = cand.g_value + pair.log_ratio(cand.x)
        if score > lb or (
            score == lb and (best_index is None or cand.heap_index < best_index)
        ):
            lb = score
            best_index = cand.heap_index
            best_x = cand.x
            best_depth = 1
    # heap items: (-(g + M), heap_index, g, x, M, node)
    heap: list = [(-(root.g.value + root_bound), root.heap_index,
                   root.g.value, root.x, root_bound, root)]
    steps = 0
    while heap and lb < -heap[0][0]:
        _, index, g_value, x, bound, node = heapq.heappop(heap)
        if steps >= max_steps:
            raise BudgetExhaustedError(f"search exceeded {max_steps} steps")
        steps += 1
        score = g_value + pair.log_ratio(x)
        if score > lb or (
            score == lb and (best_index is None or index < best_index)
        ):
            lb = score
            best_index = index
            best_x = x
            best_depth = node.depth
        if node.depth < max_depth:
            for child in expand(node, kind, proposal, seed):
                if lb < child.g.value + bound:
                    child_bound = pair.bound_M(child.region)
                    if lb < child.g.value + child_bound:
                        heapq.heappush(
                            heap,
                            (-(child.g.value + child_bound), child.heap_index,
                             child.g.value, child.x, child_bound, child),
                        )
    return best_index, best_depth, best_x, steps, lb


def encode_astar(
    pair: PairSpec,
    kind: PartitionKind,
    seed: int,
    max_depth: float = INF,
    max_steps: float = INF,
) -> tuple[Code, float, TrialStats]:
    """Race the tree for a target sample; code the winner's identity.

    Without a depth limit the search requires a finite ratio bound
    (sup log dQ/dP < inf); it refuses to start otherwise.
    """
    if max_depth == INF and pair.analytic_dinf() == INF:
        raise UnboundedRatioError(
            "exact search requires a finite density-ratio supremum; set a depth limit"
        )
    if max_depth != INF and (max_depth < 1 or int(max_depth) != max_depth):
        raise DomainError(f"depth limit must be a positive integer, got {max_depth}")
    variant = _KIND_TO_VARIANT[kind]
    root = make_root(pair.proposal, seed)
    index, depth, x, steps, lb = _astar_search(
        pair, kind, seed, max_depth, max_steps, (), root
    )
    if variant is Variant.PFR:
        code = Code(variant, depth, depth)  # arrival index == chain depth
    else:
        code = Code(variant, depth, index)
    return code, x, _stats_for(variant, steps, depth, code.payload, lb)


def decode_astar(
    proposal: Distribution1D, kind: PartitionKind, code: Code, seed: int
) -> float:
    """Regenerate the sample named by an exact-search codeword.

    Walks the heap path given by the payload's binary digits after the
    leading 1 (0 = left child, 1 = right child), rebuilding each
    ancestor's region with the same CDF arithmetic the encoder used; the
    dyadic walk never touches the target. Bit-exact against encoding.
    """
    if code.variant is not _KIND_TO_VARIANT[kind]:
        raise InvalidCodeError(f"{code.variant} code does not match partition {kind}")
    if kind is PartitionKind.GLOBAL_BOUND:
        return _regenerate_arrival_sample(proposal, code.payload, seed)
    index = code.payload
    if index < 1:
        raise InvalidCodeError(f"heap index must be >= 1, got {index}")
    region = FULL_LINE
    ulow, uhigh = 0.0, 1.0
    prefix = 1
    for ch in bin(index)[3:]:
        x = sample_restricted_u(
            proposal, ulow, uhigh,
            keyed_uniform(StreamKey(seed, prefix, int(DrawSlot.SAMPLE), 0)),
        )
        left, right = _partition_u(kind, region, ulow, uhigh, x, proposal)
        piece = right if ch == "1" else left
        if piece is None:
            raise InvalidCodeError(f"path bit {ch} leads into an empty partition slot")
        region, ulow, uhigh = piece
        prefix = 2 * prefix + (1 if ch == "1" else 0)
    return sample_restricted_u(
        proposal, ulow, uhigh,
        keyed_uniform(StreamKey(seed, index, int(DrawSlot.SAMPLE), 0)),
    )


def _regenerate_arrival_sample(proposal: Distribution1D, k: int, seed: int) -> float:
    if k < 1:
        raise InvalidCodeError(f"arrival index must be >= 1, got {k}")
    return sample_restricted_u(
        proposal, 0.0, 1.0,
        keyed_uniform(StreamKey(seed, 1, int(DrawSlot.SAMPLE), k - 1)),
    )


def _extra_root_candidate(proposal: Distribution1D, seed: int, root_g: float) -> _ExtraCandidate:
    g = trunc_gumbel(
        keyed_uniform(StreamKey(seed, 0, int(DrawSlot.EXTRA_ROOT_GUMBEL), 0)),
        0.0,
        root_g,
    )
    x = sample_restricted_u(
        proposal, 0.0, 1.0,
        keyed_uniform(StreamKey(seed, 0, int(DrawSlot.EXTRA_ROOT_SAMPLE), 0)),
    )
    return _ExtraCandidate(0, g.value, x)


def encode_dad(
    pair: PairSpec, seed: int, budget: int
) -> tuple[Code, float, TrialStats]:
    """Depth-limited dyadic coder with a fixed budget of ``budget`` bits.

    Runs the dyadic race over the tree of depth <= budget plus one extra
    root-level candidate (a second full-line draw, arrival-truncated at
    the root's Gumbel). The extra candidate takes codeword 0; tree
    winners take their heap index, which fits in ``budget`` bits.
    """
    if budget < 1:
        raise DomainError(f"budget must be >= 1 bit, got {budget}")
    root = make_root(pair.proposal, seed)
    extra = _extra_root_candidate(pair.proposal, seed, root.g.value)
    index, depth, x, steps, lb = _astar_search(
        pair, PartitionKind.DYADIC, seed, budget, INF, (extra,), root
    )
    code = Code(Variant.DAD_STAR, budget, index)
    # transmitted width is the budget regardless of where the winner sat
    return code, x, TrialStats(steps, depth, budget, 0, lb)


def decode_dad(proposal: Distribution1D, code: Code, seed: int) -> float:
    """Regenerate the sample for a depth-limited dyadic codeword."""
    if code.variant is not Variant.DAD_STAR:
        raise InvalidCodeError(f"expected a DAD_STAR code, got {code.variant}")
    if code.payload == 0:
        return sample_restricted_u(
            proposal, 0.0, 1.0,
            keyed_uniform(StreamKey(seed, 0, int(DrawSlot.EXTRA_ROOT_SAMPLE), 0)),
        )
    inner = Code(Variant.AD_STAR, depth_of(code.payload), code.payload)
    return decode_astar(proposal, PartitionKind.DYADIC, inner, seed)


def encode_pfr(
    pair: PairSpec, seed: int, max_steps: float = INF
) -> tuple[Code, float, TrialStats]:
    """Race without region shrinking; code the winner's arrival index.

    Expected arrival count is exp of the ratio supremum, so this refuses
    pairs with an infinite supremum outright. ``max_steps`` turns a
    runaway search into a budget-exhausted error.
    """
    return encode_astar(
        pair, PartitionKind.GLOBAL_BOUND, seed, max_depth=INF, max_steps=max_steps
    )


def decode_pfr(proposal: Distribution1D, code: Code, seed: int) -> float:
    if code.variant is not Variant.PFR:
        raise InvalidCodeError(f"expected a PFR code, got {code.variant}")
    return _regenerate_arrival_sample(proposal, code.payload, seed)


def encode_mrc(
    pair: PairSpec, seed: int, bits: int
) -> tuple[Code, float, TrialStats]:
    """Importance selection among 2^bits independent proposal draws.

    Draw x_0 .. x_{N-1} from the proposal, weight each by the density
    ratio, and sample an index from the normalized weights with one
    additional keyed uniform. If every draw misses the target support the
    selection falls back to uniform over the N draws.
    """
    if bits < 1:
        raise DomainError(f"bit budget must be >= 1, got {bits}")
    n = 1 << bits
    proposal = pair.proposal
    xs = [
        sample_restricted_u(
            proposal, 0.0, 1.0,
            keyed_uniform(StreamKey(seed, 0, int(DrawSlot.SAMPLE), i)),
        )
        for i in range(n)
    ]
    log_w = [pair.log_ratio(x) for x in xs]
    top = max(log_w)
    weights = [math.exp(lw - top) for lw in log_w] if top > -INF else [1.0] * n
    total = math.fsum(weights)
    u_sel = keyed_uniform(StreamKey(seed, 0, int(DrawSlot.GUMBEL), 0))
    threshold = u_sel * total
    acc = 0.0
    chosen = n - 1
    for i, w in enumerate(weights):
        acc += w
        if acc >= threshold:
            chosen = i
            break
    code = Code(Variant.MRC, bits, chosen)
    return code, xs[chosen], _stats_for(Variant.MRC, n, bits, chosen, log_w[chosen])


def decode_mrc(proposal: Distribution1D, code: Code, seed: int) -> float:
    if code.variant is not Variant.MRC:
        raise InvalidCodeError(f"expected an MRC code, got {code.variant}")
    return sample_restricted_u(
        proposal, 0.0, 1.0,
        keyed_uniform(StreamKey(seed, 0, int(DrawSlot.SAMPLE), code.payload)),
    )


def decode(proposal: Distribution1D, code: Code, seed: int) -> float:
    """Variant-dispatching decode."""
    if code.variant is Variant.AS_STAR:
        return decode_astar(proposal, PartitionKind.SAMPLE_SPLIT, code, seed)
    if code.variant is Variant.AD_STAR:
        return decode_astar(proposal, PartitionKind.DYADIC, code, seed)
    if code.variant is Variant.DAD_STAR:
        return decode_dad(proposal, code, seed)
    if code.variant is Variant.PFR:
        return decode_pfr(proposal, code, seed)
    if code.variant is Variant.MRC:
        return decode_mrc(proposal, code, seed)
    raise InvalidCodeError(f"unknown variant {code.variant}")  # pragma: no cover
