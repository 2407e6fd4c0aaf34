"""Unit tests for the keyed counter-based random streams."""

import numpy as np
import pytest

from zerocrit import streams


def test_substream_keys_distinct():
    keys = {
        streams.substream_key(seed, tag, block)
        for seed in (0, 1, 2**64 - 1)
        for tag in (streams.TAG_KTILDE_MC, streams.TAG_CM, streams.TAG_GAF)
        for block in (0, 1, 7)
    }
    assert len(keys) == 27


def test_substream_key_validates_ranges():
    with pytest.raises(ValueError):
        streams.substream_key(0, 1 << 16)
    with pytest.raises(ValueError):
        streams.substream_key(0, 1, 1 << 48)


def test_generator_deterministic_and_tag_independent():
    a = streams.generator(123, streams.TAG_GAF).standard_normal(8)
    b = streams.generator(123, streams.TAG_GAF).standard_normal(8)
    c = streams.generator(123, streams.TAG_CM).standard_normal(8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_seed_wraps_at_64_bits():
    a = streams.generator(2**64 + 5, streams.TAG_SYNTH).standard_normal(4)
    b = streams.generator(5, streams.TAG_SYNTH).standard_normal(4)
    assert np.array_equal(a, b)


def test_complex_normals_unit_variance():
    gen = streams.generator(9, streams.TAG_SYNTH)
    z = streams.complex_normals(gen, 200_000)
    assert abs(np.mean(np.abs(z) ** 2) - 1.0) < 0.01
    assert abs(np.mean(z)) < 0.01


def test_block_ranges_cover_exactly():
    triples = streams.block_ranges(10_000, 1 << 10)
    assert triples[0][:2] == (0, 0)
    assert triples[-1][2] == 10_000
    covered = [(s, e) for _, s, e in triples]
    assert all(e - s <= 1 << 10 for s, e in covered)
    assert [s for s, _ in covered[1:]] == [e for _, e in covered[:-1]]
