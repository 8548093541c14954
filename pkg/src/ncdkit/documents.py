"""Identified, labeled byte sequences backed by a file or by memory."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

CHUNK_SIZE = 1 << 20


@dataclass
class ByteDocument:
    """A byte sequence with an id, an optional class label, and a source.

    Exactly one of three backings applies: an on-disk file at ``path``,
    in-memory ``data``, or ``parts`` (a virtual concatenation of other
    documents, used to stream joint compressions without materializing
    them). ``length_bytes`` always reflects the full content length.
    """

    id: str
    length_bytes: int
    label: str | None = None
    path: Path | None = None
    data: bytes | None = field(default=None, repr=False)
    parts: tuple["ByteDocument", ...] | None = field(default=None, repr=False)
    _digest: str | None = field(default=None, repr=False, compare=False)

    @classmethod
    def from_file(cls, path: str | Path, id: str | None = None, label: str | None = None) -> "ByteDocument":
        p = Path(path)
        return cls(id=id or p.name, length_bytes=p.stat().st_size, label=label, path=p)

    @classmethod
    def from_bytes(cls, data: bytes, id: str, label: str | None = None) -> "ByteDocument":
        return cls(id=id, length_bytes=len(data), label=label, data=bytes(data))

    @classmethod
    def concat(cls, docs: Sequence["ByteDocument"], id: str | None = None) -> "ByteDocument":
        """Virtual concatenation; content streams from the underlying docs."""
        return cls(
            id=id or "+".join(d.id for d in docs),
            length_bytes=sum(d.length_bytes for d in docs),
            parts=tuple(docs),
        )

    def iter_chunks(self, chunk_size: int = CHUNK_SIZE) -> Iterator[bytes]:
        if self.parts is not None:
            for part in self.parts:
                yield from part.iter_chunks(chunk_size)
        elif self.data is not None:
            for off in range(0, len(self.data), chunk_size):
                yield self.data[off : off + chunk_size]
        else:
            with open(self.path, "rb") as fh:
                while chunk := fh.read(chunk_size):
                    yield chunk

    def read_bytes(self) -> bytes:
        if self.data is not None:
            return self.data
        if self.parts is not None:
            return b"".join(p.read_bytes() for p in self.parts)
        return self.path.read_bytes()

    def content_digest(self) -> str:
        """SHA-256 of the content, memoized; cache keys hang off this."""
        if self._digest is None:
            h = hashlib.sha256()
            for chunk in self.iter_chunks():
                h.update(chunk)
            self._digest = h.hexdigest()
        return self._digest
