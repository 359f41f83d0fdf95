"""Keyed shared randomness and Gumbel transforms.

Encoding and decoding must see the same infinite table of uniforms, so
randomness is counter-based: a draw is a pure function of a
:class:`StreamKey` and nothing else. The key mixes a 64-bit seed, the
heap index of the tree node the draw belongs to, a slot tag separating
the per-node draws, and a counter for chains that need more than one
draw per (node, slot).

The mixing function is part of the wire format. Each field is absorbed
into a 64-bit state with the splitmix64 finalizer:

    state = mix64(seed)
    for field in (node_heap_index, slot, counter):
        state = mix64(state XOR (field + 0x9E3779B97F4A7C15))

    mix64(z): z' = (z + 0x9E3779B97F4A7C15) mod 2^64
              z' = ((z' XOR (z' >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
              z' = ((z' XOR (z' >> 27)) * 0x94D049BB133111EB) mod 2^64
              return z' XOR (z' >> 31)

The uniform is ((state >> 11) + 0.5) * 2^-53, which lies strictly inside
(0, 1), so log(u) and log(-log u) are always finite.
"""

from __future__ import annotations

import math
from enum import IntEnum
from typing import NamedTuple

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_TO_UNIT = 2.0 ** -53


class DrawSlot(IntEnum):
    """Separates the draws attached to a single node.

    GUMBEL and SAMPLE are the per-node arrival time and location draws.
    The EXTRA_ROOT slots belong to the second root-level candidate of the
    depth-limited coder and use heap index 0.
    """

    GUMBEL = 0
    SAMPLE = 1
    EXTRA_ROOT_GUMBEL = 2
    EXTRA_ROOT_SAMPLE = 3


class StreamKey(NamedTuple):
    seed: int
    node_heap_index: int
    slot: int
    counter: int = 0


def _mix64(z: int) -> int:
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def keyed_uniform(key: StreamKey) -> float:
    """Deterministic uniform in the open interval (0, 1) for a key."""
    state = _mix64(key.seed & _MASK64)
    state = _mix64(state ^ ((key.node_heap_index + _GOLDEN) & _MASK64))
    state = _mix64(state ^ ((key.slot + _GOLDEN) & _MASK64))
    state = _mix64(state ^ ((key.counter + _GOLDEN) & _MASK64))
    return ((state >> 11) + 0.5) * _TO_UNIT


def derive_seed(seed: int, index: int) -> int:
    """Child seed for an independent stream (used per coordinate in
    block coding). Also splitmix64-based and part of the wire format:
    mix64(mix64(seed) XOR (index + GOLDEN))."""
    return _mix64(_mix64(seed & _MASK64) ^ ((index + _GOLDEN) & _MASK64))


class GumbelValue(NamedTuple):
    """A (possibly truncated) Gumbel draw.

    value      realized variate
    location   location parameter the draw was made with
    truncation upper truncation bound (+inf when untruncated)
    """

    value: float
    location: float
    truncation: float


def gumbel(u: float, location: float = 0.0) -> GumbelValue:
    """Gumbel(location) variate from a unit uniform: location - log(-log u)."""
    return GumbelValue(location - math.log(-math.log(u)), location, math.inf)


def trunc_gumbel(u: float, location: float, bound: float) -> GumbelValue:
    """Gumbel(location) conditioned to lie below ``bound``.

    Inverse-CDF form: value = location - log(exp(-(bound - location)) - log u).
    Evaluated as -logaddexp(-g, -bound) with g the untruncated variate,
    which stays stable when bound - location is very large or very
    negative.
    """
    if bound == math.inf:
        return gumbel(u, location)
    g = location - math.log(-math.log(u))
    a = -g
    b = -bound
    if a > b:
        value = -(a + math.log1p(math.exp(b - a)))
    else:
        value = -(b + math.log1p(math.exp(a - b)))
    return GumbelValue(value, location, bound)


def gumbel_to_arrival(g: float) -> float:
    """Map a Gumbel variate to its exponential-race arrival time exp(-g)."""
    return math.exp(-g)
