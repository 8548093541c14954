"""Pluggable lossless compressors measured by compressed output length.

Built-in codecs wrap the stdlib streaming compressors (zlib, bz2, lzma);
arbitrary tools plug in through an external command template. Nothing here
ever decompresses: the only observable is the exact byte length of the full
compressed stream, container framing included.
"""

from __future__ import annotations

import bz2
import lzma
import os
import shlex
import subprocess
import tempfile
import threading
import zlib
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

from .errors import CodecError

ByteSource = Union[bytes, bytearray, memoryview, Iterable[bytes]]

CHUNK_SIZE = 1 << 20

BUILTIN_CODECS = ("deflate", "bzip2", "lzma")

# Inclusive (lo, hi) level bounds per built-in codec.
LEVEL_RANGES = {"deflate": (0, 9), "bzip2": (1, 9), "lzma": (0, 9)}

# Experiment defaults: deflate 9, bzip2 9 (900 KB block), lzma preset 9
# (64 MiB dictionary). Runs record these pins in their manifests.
DEFAULT_LEVELS = {"deflate": 9, "bzip2": 9, "lzma": 9}

# lzma preset -> dictionary size, for provenance reporting.
LZMA_DICT_SIZES = {
    0: 1 << 18, 1: 1 << 20, 2: 1 << 21, 3: 1 << 22, 4: 1 << 22,
    5: 1 << 23, 6: 1 << 23, 7: 1 << 24, 8: 1 << 25, 9: 1 << 26,
}

_TMPDIR_ENV = "NCDKIT_TMPDIR"

# External commands run under a bounded slot pool so a parallel pair sweep
# cannot fork an unbounded number of subprocesses.
_external_slots = threading.BoundedSemaphore(os.cpu_count() or 1)
_external_cap_lock = threading.Lock()


def set_external_process_cap(n: int) -> None:
    """Bound the number of concurrently running external codec processes."""
    global _external_slots
    if n < 1:
        raise ValueError(f"process cap must be >= 1, got {n}")
    with _external_cap_lock:
        _external_slots = threading.BoundedSemaphore(n)


@dataclass(frozen=True)
class CompressorSpec:
    """Identifies a codec and its frozen parameters.

    ``id`` is one of ``deflate``, ``bzip2``, ``lzma``, or ``external``.
    External specs carry a command template containing exactly one
    ``{input}`` placeholder; the command must write the compressed stream
    to stdout, or to the path substituted for an optional ``{output}``
    placeholder.
    """

    id: str
    level: int | None = None
    external_command: str | None = None
    label: str = ""

    def __post_init__(self):
        if self.id in BUILTIN_CODECS:
            if self.external_command is not None:
                raise CodecError(f"codec {self.id!r} does not take an external command")
            level = DEFAULT_LEVELS[self.id] if self.level is None else self.level
            lo, hi = LEVEL_RANGES[self.id]
            if not lo <= level <= hi:
                raise CodecError(
                    f"level {level} out of range [{lo}, {hi}] for codec {self.id!r}"
                )
            object.__setattr__(self, "level", level)
        elif self.id == "external":
            if not self.external_command:
                raise CodecError("external codec requires a command template")
            if self.external_command.count("{input}") != 1:
                raise CodecError(
                    "external command must contain exactly one {input} placeholder"
                )
            if self.external_command.count("{output}") > 1:
                raise CodecError(
                    "external command may contain at most one {output} placeholder"
                )
        else:
            raise CodecError(
                f"unknown codec {self.id!r}; valid ids: "
                + ", ".join(BUILTIN_CODECS + ("external",))
            )
        if not self.label:
            auto = f"{self.id}-{self.level}" if self.id in BUILTIN_CODECS else "external"
            object.__setattr__(self, "label", auto)

    def header_floor(self) -> int:
        """Length produced on empty input, i.e. pure container framing."""
        return header_floor(self)

    def parameter_pins(self) -> dict:
        """Codec parameters that must be recorded for reproducibility."""
        pins = {"id": self.id, "level": self.level}
        if self.id == "bzip2":
            pins["block_size_bytes"] = self.level * 100_000
        elif self.id == "deflate":
            pins["window_bytes"] = 1 << 15
        elif self.id == "lzma":
            pins["dictionary_bytes"] = LZMA_DICT_SIZES[self.level]
            pins["container"] = "xz"
        elif self.id == "external":
            pins["command"] = self.external_command
        return pins

    def to_json_dict(self) -> dict:
        out = {"id": self.id, "level": self.level, "label": self.label}
        if self.id == "external":
            out["command"] = self.external_command
            del out["level"]
        return out

    @classmethod
    def from_json_dict(cls, d: dict) -> "CompressorSpec":
        return cls(
            id=d["id"],
            level=d.get("level"),
            external_command=d.get("command"),
            label=d.get("label", ""),
        )


@dataclass(frozen=True)
class CompressedLength:
    """Exact length in bytes of a full compressed stream."""

    byte_count: int
    codec: str

    def __post_init__(self):
        if self.byte_count < 0:
            raise CodecError(f"negative compressed length {self.byte_count}")


_header_floors: dict[CompressorSpec, int] = {}
_header_floors_lock = threading.Lock()


def header_floor(spec: CompressorSpec) -> int:
    with _header_floors_lock:
        cached = _header_floors.get(spec)
    if cached is None:
        cached = compressed_size(spec, b"").byte_count
        with _header_floors_lock:
            _header_floors[spec] = cached
    return cached


def _iter_chunks(data: ByteSource) -> Iterator[bytes]:
    if isinstance(data, (bytes, bytearray, memoryview)):
        view = memoryview(data)
        for off in range(0, len(view), CHUNK_SIZE):
            yield bytes(view[off : off + CHUNK_SIZE])
    else:
        for chunk in data:
            if chunk:
                yield bytes(chunk)


def _builtin_compressor(spec: CompressorSpec):
    try:
        if spec.id == "deflate":
            return zlib.compressobj(spec.level)
        if spec.id == "bzip2":
            return bz2.BZ2Compressor(spec.level)
        if spec.id == "lzma":
            return lzma.LZMACompressor(preset=spec.level)
    except Exception as exc:  # codec refused its own parameters
        raise CodecError(f"failed to initialize codec {spec.label!r}: {exc}") from exc
    raise CodecError(f"codec {spec.id!r} has no built-in compressor")


def _builtin_stream_length(spec: CompressorSpec, parts: Iterable[ByteSource]) -> int:
    comp = _builtin_compressor(spec)
    total = 0
    for part in parts:
        for chunk in _iter_chunks(part):
            total += len(comp.compress(chunk))
    total += len(comp.flush())
    return total


def _tmpdir() -> str | None:
    return os.environ.get(_TMPDIR_ENV) or None


def _external_stream_length(spec: CompressorSpec, parts: Iterable[ByteSource]) -> int:
    # Length is always measured by stat on a real file, never by parsing
    # tool output.
    tokens = shlex.split(spec.external_command)
    in_fd, in_path = tempfile.mkstemp(prefix="ncdkit-in-", dir=_tmpdir())
    out_path = None
    try:
        with os.fdopen(in_fd, "wb") as fh:
            for part in parts:
                for chunk in _iter_chunks(part):
                    fh.write(chunk)
        uses_output_file = "{output}" in spec.external_command
        if uses_output_file:
            out_fd, out_path = tempfile.mkstemp(prefix="ncdkit-out-", dir=_tmpdir())
            os.close(out_fd)
        argv = [
            tok.replace("{input}", in_path).replace("{output}", out_path or "")
            for tok in tokens
        ]
        with _external_slots:
            try:
                if uses_output_file:
                    proc = subprocess.run(argv, capture_output=True)
                else:
                    out_fd, out_path = tempfile.mkstemp(
                        prefix="ncdkit-out-", dir=_tmpdir()
                    )
                    with os.fdopen(out_fd, "wb") as out_fh:
                        proc = subprocess.run(
                            argv, stdout=out_fh, stderr=subprocess.PIPE
                        )
            except FileNotFoundError as exc:
                raise CodecError(
                    f"external codec executable not found: {argv[0]!r}"
                ) from exc
        if proc.returncode != 0:
            stderr = (proc.stderr or b"").decode("utf-8", "replace").strip()
            raise CodecError(
                f"external codec exited with status {proc.returncode}: {stderr}"
            )
        return os.path.getsize(out_path)
    finally:
        os.unlink(in_path)
        if out_path is not None:
            os.unlink(out_path)


def compressed_size(spec: CompressorSpec, data: ByteSource) -> CompressedLength:
    """Compress ``data`` and report the exact output length in bytes.

    ``data`` may be a bytes-like object or an iterable of chunks; input is
    streamed, so it never needs to fit in memory alongside its compressed
    form. Deterministic: identical (spec, data) pairs yield identical
    lengths.
    """
    return concat_compressed_size(spec, [data])


def concat_compressed_size(
    spec: CompressorSpec, parts: Iterable[ByteSource]
) -> CompressedLength:
    """Compressed length of the concatenation of ``parts``.

    Equivalent to compressing the literal concatenation, without ever
    materializing it.
    """
    parts = list(parts)
    if not parts:
        raise CodecError("concat_compressed_size requires at least one part")
    if spec.id == "external":
        total = _external_stream_length(spec, parts)
    else:
        total = _builtin_stream_length(spec, parts)
    return CompressedLength(byte_count=total, codec=spec.label)
