"""Combining functions: interleave and greedy chunk shuffle.

Both must conserve content exactly: same total length, same byte
multiset. The hand-worked interleave example pins the exact block
order; shuffle tests pin the pairing and emission rules.
"""

from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncdkit import (
    CombinerSpec,
    CompressorSpec,
    ConfigurationError,
    combine,
    interleave,
    ncd_shuffle,
)

from conftest import stream

SCORER = CompressorSpec(id="deflate", level=1)


class TestCombinerSpec:
    def test_describe(self):
        assert CombinerSpec.concat().describe() == "concat"
        assert CombinerSpec.interleave(4096).describe() == "interleave-4096"
        assert CombinerSpec.shuffle(4096, SCORER).describe() == "ncd_shuffle-4096-deflate-1"

    def test_concat_rejects_block(self):
        with pytest.raises(ConfigurationError):
            CombinerSpec(kind="concat", block_size_bytes=4)

    def test_interleave_requires_positive_block(self):
        with pytest.raises(ConfigurationError):
            CombinerSpec.interleave(0)

    def test_shuffle_requires_scorer(self):
        with pytest.raises(ConfigurationError):
            CombinerSpec(kind="ncd_shuffle", block_size_bytes=4)

    def test_json_round_trip(self):
        for spec in (
            CombinerSpec.concat(),
            CombinerSpec.interleave(100_000),
            CombinerSpec.shuffle(4096, SCORER),
        ):
            assert CombinerSpec.from_json_dict(spec.to_json_dict()) == spec


class TestInterleave:
    def test_hand_worked_example(self):
        # x blocks: ab|c; y blocks: AB|CD|EF|G. Alternation runs for
        # min(2, 4) = 2 rounds, then y's tail follows.
        assert interleave(b"abc", b"ABCDEFG", 2) == b"abABcCDEFG"

    def test_block_one_alternates_bytes(self):
        assert interleave(b"abcdef", b"ABCDEF", 1) == b"aAbBcCdDeEfF"

    def test_short_x_with_longer_y(self):
        assert interleave(b"aabb", b"ccddee", 2) == b"aaccbbddee"

    def test_large_block_degenerates_to_concat(self):
        x, y = b"abcdef", b"0123456789"
        for b in (10, 11, 1000):
            assert interleave(x, y, b) == x + y

    def test_empty_sides(self):
        assert interleave(b"", b"abc", 2) == b"abc"
        assert interleave(b"abc", b"", 2) == b"abc"
        assert interleave(b"", b"", 2) == b""

    def test_not_symmetric(self):
        x, y = b"aaaa", b"bbbb"
        assert interleave(x, y, 2) != interleave(y, x, 2)

    @given(
        x=st.binary(max_size=400),
        y=st.binary(max_size=400),
        b=st.integers(min_value=1, max_value=64),
    )
    @settings(max_examples=200)
    def test_conservation(self, x, y, b):
        out = interleave(x, y, b)
        assert len(out) == len(x) + len(y)
        assert Counter(out) == Counter(x) + Counter(y)

    @given(x=st.binary(min_size=1, max_size=300), b=st.integers(1, 32))
    @settings(max_examples=100)
    def test_self_interleave_duplicates_blocks(self, x, b):
        # Equal inputs alternate identical blocks: every block appears
        # twice in a row.
        out = interleave(x, x, b)
        blocks = [x[i : i + b] for i in range(0, len(x), b)]
        expected = b"".join(blk + blk for blk in blocks)
        assert out == expected


class TestNcdShuffle:
    def test_equal_length_identical_inputs(self):
        x = stream("shfl", 64)
        out = ncd_shuffle(x, x, 16, SCORER)
        blocks = [x[i : i + 16] for i in range(0, 64, 16)]
        # Identical chunks are each other's best matches; greedy pairs
        # block i with block i (distance minimal, ties by index).
        assert out == b"".join(blk + blk for blk in blocks)

    def test_crossed_blocks_are_repaired(self):
        # x = A|B, y = B|A with A, B dissimilar: pairing must cross.
        a = bytes([65]) * 32
        b = stream("bdiff", 32)
        out = ncd_shuffle(a + b, b + a, 32, SCORER)
        assert out == a + a + b + b

    def test_unpaired_tail_of_longer_side_appended(self):
        a = bytes([1]) * 8
        b = bytes([2]) * 8
        c = bytes([3]) * 8
        # x has 1 chunk, y has 3: two y chunks stay unpaired and follow
        # the pairs in original order.
        out = ncd_shuffle(a, a + b + c, 8, SCORER)
        assert out == a + a + b + c

    def test_empty_sides(self):
        data = stream("one-sided", 50)
        assert ncd_shuffle(data, b"", 16, SCORER) == data
        assert ncd_shuffle(b"", data, 16, SCORER) == data
        assert ncd_shuffle(b"", b"", 16, SCORER) == b""

    def test_deterministic(self):
        x, y = stream("dx", 300), stream("dy", 500)
        assert ncd_shuffle(x, y, 64, SCORER) == ncd_shuffle(x, y, 64, SCORER)

    def test_parallel_scoring_matches_serial(self):
        x, y = stream("px", 1000), stream("py", 700)
        assert ncd_shuffle(x, y, 128, SCORER, jobs=4) == ncd_shuffle(x, y, 128, SCORER)

    @given(
        x=st.binary(max_size=200),
        y=st.binary(max_size=200),
        b=st.integers(min_value=8, max_value=64),
    )
    @settings(max_examples=50, deadline=None)
    def test_conservation(self, x, y, b):
        out = ncd_shuffle(x, y, b, SCORER)
        assert len(out) == len(x) + len(y)
        assert Counter(out) == Counter(x) + Counter(y)


class TestCombineDispatch:
    def test_concat(self):
        assert combine(CombinerSpec.concat(), b"ab", b"cd") == b"abcd"

    def test_interleave(self):
        assert combine(CombinerSpec.interleave(2), b"abc", b"ABCDEFG") == b"abABcCDEFG"

    def test_shuffle(self):
        x = stream("cx", 64)
        out = combine(CombinerSpec.shuffle(16, SCORER), x, x)
        assert len(out) == 128
