"""Normalized compression distance over pluggable codecs and combiners.

The distance between documents X and Y under codec C and combiner J is

    (|C(J(X, Y))| - min(|C(X)|, |C(Y)|)) / max(|C(X)|, |C(Y)|)

with plain concatenation for J recovering the classic definition. Values
are computed with the single ordering J(X, Y): no symmetrization is
applied, so the asymmetry of real codecs stays observable.
"""

from __future__ import annotations

import csv
import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .combine import CombinerSpec, combine
from .compressors import CompressorSpec, compressed_size, concat_compressed_size
from .documents import ByteDocument
from .errors import CodecError, DegenerateInputError

log = logging.getLogger("ncdkit")

# Distances above 1 happen with real codecs; they are worth a warning but
# are not errors.
ANOMALY_THRESHOLD = 1.0


class LengthCache:
    """Persistent store of compressed lengths keyed by (codec label, digest).

    Keys use content digests rather than ids, so editing a file invalidates
    its entries. Backed by a JSON-lines file when a path is given; safe for
    concurrent readers with serialized appends.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._entries: dict[tuple[str, str], int] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            with open(self.path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    rec = json.loads(line)
                    self._entries[(rec["codec"], rec["digest"])] = rec["bytes"]

    def __len__(self) -> int:
        return len(self._entries)

    def lookup(self, codec_label: str, digest: str) -> int | None:
        return self._entries.get((codec_label, digest))

    def store(self, codec_label: str, digest: str, byte_count: int, doc_id: str = "") -> None:
        with self._lock:
            if (codec_label, digest) in self._entries:
                return
            self._entries[(codec_label, digest)] = byte_count
            if self.path is not None:
                rec = {"codec": codec_label, "digest": digest, "bytes": byte_count}
                if doc_id:
                    rec["id"] = doc_id
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")

    def get_or_compute(self, spec: CompressorSpec, doc: ByteDocument) -> int:
        digest = doc.content_digest()
        hit = self.lookup(spec.label, digest)
        if hit is not None:
            return hit
        n = concat_compressed_size(spec, [doc.iter_chunks()]).byte_count
        self.store(spec.label, digest, n, doc_id=doc.id)
        return n


def ncd_from_lengths(cx: int, cy: int, cxy: int) -> float:
    """The distance formula on raw compressed lengths."""
    denom = max(cx, cy)
    if denom == 0:
        raise DegenerateInputError(
            "both compressed lengths are zero (empty inputs under a codec "
            "with no header); the distance is undefined"
        )
    return (cxy - min(cx, cy)) / denom


def _singleton_length(spec: CompressorSpec, doc: ByteDocument, cache: LengthCache | None) -> int:
    if cache is not None:
        return cache.get_or_compute(spec, doc)
    return concat_compressed_size(spec, [doc.iter_chunks()]).byte_count


def _joint_length(
    compressor: CompressorSpec,
    combiner: CombinerSpec,
    x: ByteDocument,
    y: ByteDocument,
    cache: LengthCache | None,
    jobs: int = 1,
) -> int:
    if combiner.kind == "concat":
        joint_doc = ByteDocument.concat([x, y])
        if cache is not None:
            return cache.get_or_compute(compressor, joint_doc)
        return concat_compressed_size(compressor, [joint_doc.iter_chunks()]).byte_count
    combined = combine(combiner, x.read_bytes(), y.read_bytes(), jobs=jobs)
    if cache is not None:
        joint_doc = ByteDocument.from_bytes(combined, id=f"{x.id}|{y.id}")
        return cache.get_or_compute(compressor, joint_doc)
    return compressed_size(compressor, combined).byte_count


def ncd(
    compressor: CompressorSpec,
    combiner: CombinerSpec,
    x: ByteDocument,
    y: ByteDocument,
    cache: LengthCache | None = None,
    jobs: int = 1,
) -> float:
    """Distance between two documents; concat reproduces the classic form.

    Singleton lengths flow through ``cache`` when one is given. Raises
    DegenerateInputError when both singleton lengths are zero.
    """
    cx = _singleton_length(compressor, x, cache)
    cy = _singleton_length(compressor, y, cache)
    cxy = _joint_length(compressor, combiner, x, y, cache, jobs=jobs)
    value = ncd_from_lengths(cx, cy, cxy)
    if value > ANOMALY_THRESHOLD:
        log.warning(
            "codec anomaly: distance %.4f > 1 for (%s, %s) under %s/%s",
            value, x.id, y.id, compressor.label, combiner.describe(),
        )
    return value


def ncd_bytes(
    compressor: CompressorSpec,
    combiner: CombinerSpec,
    x: bytes,
    y: bytes,
    jobs: int = 1,
) -> float:
    """Convenience form of :func:`ncd` over raw byte strings."""
    return ncd(
        compressor,
        combiner,
        ByteDocument.from_bytes(x, id="x"),
        ByteDocument.from_bytes(y, id="y"),
        jobs=jobs,
    )


@dataclass
class DistanceMatrix:
    """Symmetric-by-construction pairwise distances with full provenance.

    The diagonal holds the measured self-distance NCD(X, X); it is never
    assumed to be zero, because for real codecs it is not.
    """

    doc_ids: list[str]
    values: np.ndarray
    compressor: CompressorSpec
    combiner: CombinerSpec
    created_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat()
    )

    def get(self, i: int, j: int) -> float:
        return float(self.values[i, j])

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["id"] + self.doc_ids)
            for i, doc_id in enumerate(self.doc_ids):
                writer.writerow([doc_id] + [repr(v) for v in self.values[i].tolist()])

    def to_json_dict(self, include_timestamp: bool = True) -> dict:
        out = {
            "doc_ids": self.doc_ids,
            "values": [[float(v) for v in row] for row in self.values],
            "provenance": {
                "compressor": self.compressor.to_json_dict(),
                "compressor_pins": self.compressor.parameter_pins(),
                "combiner": self.combiner.to_json_dict(),
            },
        }
        if include_timestamp:
            out["provenance"]["created_at"] = self.created_at
        return out

    def write_json(self, path: str | Path, include_timestamp: bool = True) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(include_timestamp), fh, indent=2, sort_keys=True)
            fh.write("\n")


def distance_matrix(
    docs: list[ByteDocument],
    compressor: CompressorSpec,
    combiner: CombinerSpec,
    cache: LengthCache | None = None,
    jobs: int = 1,
) -> DistanceMatrix:
    """All-pairs distances (diagonal included) over a document list.

    Pair computations run on a bounded worker pool; the result is
    independent of scheduling. Any pair failure aborts the computation
    with the offending pair named.
    """
    if not docs:
        raise CodecError("distance_matrix requires at least one document")
    seen: set[str] = set()
    for d in docs:
        if d.id in seen:
            raise CodecError(f"duplicate document id {d.id!r}")
        seen.add(d.id)

    n = len(docs)
    singles = [_singleton_length(compressor, d, cache) for d in docs]
    tasks = [(i, j) for i in range(n) for j in range(i, n)]

    def pair_value(ij: tuple[int, int]) -> float:
        i, j = ij
        try:
            cxy = _joint_length(compressor, combiner, docs[i], docs[j], cache)
            return ncd_from_lengths(singles[i], singles[j], cxy)
        except DegenerateInputError:
            raise
        except Exception as exc:
            raise CodecError(
                f"distance computation failed for pair ({docs[i].id!r}, {docs[j].id!r}): {exc}"
            ) from exc

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(pair_value, tasks))
    else:
        results = [pair_value(t) for t in tasks]

    values = np.zeros((n, n), dtype=np.float64)
    for (i, j), v in zip(tasks, results):
        values[i, j] = v
        values[j, i] = v
        if v > ANOMALY_THRESHOLD:
            log.warning(
                "codec anomaly: distance %.4f > 1 for (%s, %s)",
                v, docs[i].id, docs[j].id,
            )
    return DistanceMatrix(
        doc_ids=[d.id for d in docs],
        values=values,
        compressor=compressor,
        combiner=combiner,
    )
