"""String-combination functions used in place of plain concatenation.

A combiner builds the joint string whose compressed length drives the
distance: ``concat`` appends, ``interleave`` alternates fixed-size blocks,
and ``ncd_shuffle`` pairs the most similar cross-string chunks adjacently.
All of them conserve length and byte content exactly.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .compressors import CompressorSpec, compressed_size
from .errors import CodecError, ConfigurationError

COMBINER_KINDS = ("concat", "interleave", "ncd_shuffle")


@dataclass(frozen=True)
class CombinerSpec:
    """Selects a combining function and its block size.

    ``ncd_shuffle`` carries its own chunk-scoring compressor, which may
    differ from the compressor used on the combined output.
    """

    kind: str
    block_size_bytes: int | None = None
    shuffle_compressor: CompressorSpec | None = None

    def __post_init__(self):
        if self.kind not in COMBINER_KINDS:
            raise ConfigurationError(
                f"unknown combiner {self.kind!r}; valid kinds: " + ", ".join(COMBINER_KINDS)
            )
        if self.kind == "concat":
            if self.block_size_bytes is not None:
                raise ConfigurationError("concat takes no block size")
        else:
            if self.block_size_bytes is None or self.block_size_bytes < 1:
                raise ConfigurationError(f"{self.kind} requires block_size_bytes >= 1")
        if self.kind == "ncd_shuffle" and self.shuffle_compressor is None:
            raise ConfigurationError("ncd_shuffle requires a chunk-scoring compressor")

    @classmethod
    def concat(cls) -> "CombinerSpec":
        return cls(kind="concat")

    @classmethod
    def interleave(cls, block_size_bytes: int) -> "CombinerSpec":
        return cls(kind="interleave", block_size_bytes=block_size_bytes)

    @classmethod
    def shuffle(cls, block_size_bytes: int, scorer: CompressorSpec) -> "CombinerSpec":
        return cls(
            kind="ncd_shuffle",
            block_size_bytes=block_size_bytes,
            shuffle_compressor=scorer,
        )

    def describe(self) -> str:
        if self.kind == "concat":
            return "concat"
        if self.kind == "interleave":
            return f"interleave-{self.block_size_bytes}"
        return f"ncd_shuffle-{self.block_size_bytes}-{self.shuffle_compressor.label}"

    def to_json_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.block_size_bytes is not None:
            out["block_size_bytes"] = self.block_size_bytes
        if self.shuffle_compressor is not None:
            out["scorer"] = self.shuffle_compressor.to_json_dict()
        return out

    @classmethod
    def from_json_dict(cls, d: dict) -> "CombinerSpec":
        scorer = d.get("scorer")
        return cls(
            kind=d["kind"],
            block_size_bytes=d.get("block_size_bytes"),
            shuffle_compressor=CompressorSpec.from_json_dict(scorer) if scorer else None,
        )


def _blocks(data: bytes, size: int) -> list[bytes]:
    return [data[off : off + size] for off in range(0, len(data), size)]


def interleave(x: bytes, y: bytes, block_size: int) -> bytes:
    """Alternate size-``block_size`` blocks of x and y.

    Blocks alternate x-first up to the shorter input's final (possibly
    short) block; the longer input's remaining blocks follow unchanged.
    """
    if block_size < 1:
        raise ConfigurationError(f"block size must be >= 1, got {block_size}")
    xs = _blocks(x, block_size)
    ys = _blocks(y, block_size)
    paired = min(len(xs), len(ys))
    out = []
    for i in range(paired):
        out.append(xs[i])
        out.append(ys[i])
    out.extend(xs[paired:])
    out.extend(ys[paired:])
    return b"".join(out)


def shuffle_pairs(
    x: bytes,
    y: bytes,
    block_size: int,
    scorer: CompressorSpec,
    jobs: int = 1,
) -> list[tuple[int, int]]:
    """Greedy chunk matching used by :func:`ncd_shuffle`.

    Both strings are chunked at ``block_size`` (final chunks may be short).
    Every (x-chunk, y-chunk) pair is scored with the plain concatenation
    distance under ``scorer``; pairs are then taken greedily by ascending
    distance, ties broken by (x index, y index), each chunk used at most
    once. Returns the matching as (x index, y index) tuples sorted by x
    index. Deterministic, and independent of scoring order.
    """
    if block_size < 1:
        raise ConfigurationError(f"block size must be >= 1, got {block_size}")
    xs = _blocks(x, block_size)
    ys = _blocks(y, block_size)
    if not xs or not ys:
        return []

    def length_of(chunk: bytes) -> int:
        return compressed_size(scorer, chunk).byte_count

    def joint(i: int, j: int) -> int:
        return compressed_size(scorer, xs[i] + ys[j]).byte_count

    pairs = [(i, j) for i in range(len(xs)) for j in range(len(ys))]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            cx = list(pool.map(length_of, xs))
            cy = list(pool.map(length_of, ys))
            joints = list(pool.map(lambda ij: joint(*ij), pairs))
    else:
        cx = [length_of(c) for c in xs]
        cy = [length_of(c) for c in ys]
        joints = [joint(i, j) for i, j in pairs]

    scored = []
    for (i, j), cxy in zip(pairs, joints):
        denom = max(cx[i], cy[j])
        dist = (cxy - min(cx[i], cy[j])) / denom if denom > 0 else 0.0
        scored.append((dist, i, j))
    scored.sort()

    matched: dict[int, int] = {}
    used_y: set[int] = set()
    for _, i, j in scored:
        if i in matched or j in used_y:
            continue
        matched[i] = j
        used_y.add(j)
        if len(matched) == min(len(xs), len(ys)):
            break
    return sorted(matched.items())


def ncd_shuffle(
    x: bytes,
    y: bytes,
    block_size: int,
    scorer: CompressorSpec,
    jobs: int = 1,
) -> bytes:
    """Pair the most similar cross-string chunks and emit them adjacently.

    Chunk matching is :func:`shuffle_pairs`. Output emits each pair as
    x-chunk then y-chunk, ordered by the x-chunk's original position, with
    the longer side's unpaired chunks appended in original order.
    """
    pairing = shuffle_pairs(x, y, block_size, scorer, jobs=jobs)
    xs = _blocks(x, block_size)
    ys = _blocks(y, block_size)
    if not xs or not ys:
        return x + y

    matched = dict(pairing)
    used_y = set(matched.values())
    out = []
    for i in sorted(matched):
        out.append(xs[i])
        out.append(ys[matched[i]])
    if len(xs) > len(ys):
        out.extend(xs[i] for i in range(len(xs)) if i not in matched)
    elif len(ys) > len(xs):
        out.extend(ys[j] for j in range(len(ys)) if j not in used_y)
    return b"".join(out)


def combine(spec: CombinerSpec, x: bytes, y: bytes, jobs: int = 1) -> bytes:
    """Build the joint string for ``spec``; output length is |x| + |y|."""
    if spec.kind == "concat":
        return x + y
    if spec.kind == "interleave":
        return interleave(x, y, spec.block_size_bytes)
    return ncd_shuffle(x, y, spec.block_size_bytes, spec.shuffle_compressor, jobs=jobs)
