"""Deterministic substreams from a counter-based generator.

Every random draw in the package flows from a single 64-bit seed through a
Philox bit generator keyed by the 128-bit triple (seed, purpose tag, block
index).  Distinct keys give statistically independent streams, so work can be
split over blocks in any order across any number of workers and still produce
the same numbers; reductions over block partials are always performed in block
order to keep floating-point sums bit-stable.
"""

import numpy as np

MASK64 = (1 << 64) - 1
_MASK64 = MASK64
_MAX_BLOCK = 1 << 48

# Purpose tags.  Each independent consumer of randomness gets its own tag so
# streams never overlap even under the same seed.
TAG_KTILDE_MC = 1
TAG_CM = 2
TAG_CM_DIRECT = 3
TAG_GAF = 4
TAG_SU2 = 5
TAG_SYNTH = 6


def substream_key(seed, tag, block=0):
    """128-bit Philox key for the (seed, tag, block) substream."""
    seed = int(seed) & _MASK64
    tag = int(tag)
    block = int(block)
    if not 0 <= tag < (1 << 16):
        raise ValueError(f"tag out of range: {tag}")
    if not 0 <= block < _MAX_BLOCK:
        raise ValueError(f"block index out of range: {block}")
    return seed | (((tag << 48) | block) << 64)


def generator(seed, tag, block=0):
    """A numpy Generator on the (seed, tag, block) substream."""
    return np.random.Generator(np.random.Philox(key=substream_key(seed, tag, block)))


def complex_normals(gen, shape):
    """Standard complex Gaussians: unit variance per complex coordinate."""
    z = gen.standard_normal(shape) + 1j * gen.standard_normal(shape)
    return z / np.sqrt(2.0)


def block_ranges(total, block_size):
    """(block_index, start, stop) triples covering range(total)."""
    out = []
    b = 0
    start = 0
    while start < total:
        stop = min(start + block_size, total)
        out.append((b, start, stop))
        b += 1
        start = stop
    return out
