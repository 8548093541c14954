"""Audits of how far real codecs sit from the normal-compressor axioms.

Each axiom is measured as a byte gap on concrete documents and compared
against log2(n), the slack a codec is conventionally allowed at input
size n. A gap visible next to that reference is the interesting signal:
block and window codecs blow past it once inputs outgrow their memory.

Gap conventions (all in bytes, positive means "worse"):

  idempotence    |C(XX)| - |C(X)|                       n = |XX|
  monotonicity   |C(X)| - |C(XY)|                       n = |XY|
  symmetry       abs(|C(XY)| - |C(YX)|)                 n = |XY|
  distributivity (|C(XY)| + |C(Z)|) - (|C(XZ)| + |C(YZ)|)
                                                        n = max pair size
"""

from __future__ import annotations

import csv
import json
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .compressors import CompressorSpec
from .documents import ByteDocument
from .ncd import LengthCache, _singleton_length

AXIOMS = ("idempotence", "monotonicity", "symmetry", "distributivity")


@dataclass(frozen=True)
class AxiomMeasurement:
    """One axiom evaluated on one subject tuple under one codec."""

    axiom: str
    compressor_label: str
    subject_ids: tuple[str, ...]
    subject_size_bytes: int
    gap_bytes: int
    log_reference: float

    @property
    def ratio(self) -> float:
        """Gap in units of the log2(n) allowance; inf when n < 2 and gap > 0."""
        if self.log_reference > 0.0:
            return self.gap_bytes / self.log_reference
        return math.inf if self.gap_bytes > 0 else 0.0


def _log_ref(n: int) -> float:
    return math.log2(n) if n >= 2 else 0.0


def _joint(spec: CompressorSpec, cache: LengthCache | None,
           a: ByteDocument, b: ByteDocument) -> int:
    return _singleton_length(spec, ByteDocument.concat([a, b]), cache)


def idempotence_gap(
    spec: CompressorSpec, doc: ByteDocument, cache: LengthCache | None = None
) -> AxiomMeasurement:
    cx = _singleton_length(spec, doc, cache)
    cxx = _joint(spec, cache, doc, doc)
    n = 2 * doc.length_bytes
    return AxiomMeasurement(
        axiom="idempotence",
        compressor_label=spec.label,
        subject_ids=(doc.id,),
        subject_size_bytes=n,
        gap_bytes=cxx - cx,
        log_reference=_log_ref(n),
    )


def monotonicity_gap(
    spec: CompressorSpec, x: ByteDocument, y: ByteDocument,
    cache: LengthCache | None = None,
) -> AxiomMeasurement:
    cx = _singleton_length(spec, x, cache)
    cxy = _joint(spec, cache, x, y)
    n = x.length_bytes + y.length_bytes
    return AxiomMeasurement(
        axiom="monotonicity",
        compressor_label=spec.label,
        subject_ids=(x.id, y.id),
        subject_size_bytes=n,
        gap_bytes=cx - cxy,
        log_reference=_log_ref(n),
    )


def symmetry_gap(
    spec: CompressorSpec, x: ByteDocument, y: ByteDocument,
    cache: LengthCache | None = None,
) -> AxiomMeasurement:
    cxy = _joint(spec, cache, x, y)
    cyx = _joint(spec, cache, y, x)
    n = x.length_bytes + y.length_bytes
    return AxiomMeasurement(
        axiom="symmetry",
        compressor_label=spec.label,
        subject_ids=(x.id, y.id),
        subject_size_bytes=n,
        gap_bytes=abs(cxy - cyx),
        log_reference=_log_ref(n),
    )


def distributivity_gap(
    spec: CompressorSpec, x: ByteDocument, y: ByteDocument, z: ByteDocument,
    cache: LengthCache | None = None,
) -> AxiomMeasurement:
    cxy = _joint(spec, cache, x, y)
    cz = _singleton_length(spec, z, cache)
    cxz = _joint(spec, cache, x, z)
    cyz = _joint(spec, cache, y, z)
    n = max(
        x.length_bytes + y.length_bytes,
        x.length_bytes + z.length_bytes,
        y.length_bytes + z.length_bytes,
    )
    return AxiomMeasurement(
        axiom="distributivity",
        compressor_label=spec.label,
        subject_ids=(x.id, y.id, z.id),
        subject_size_bytes=n,
        gap_bytes=(cxy + cz) - (cxz + cyz),
        log_reference=_log_ref(n),
    )


@dataclass
class AxiomReport:
    """All measurements from one audit plus any per-measurement failures."""

    measurements: list[AxiomMeasurement]
    failures: list[dict] = field(default_factory=list)

    def summary(self) -> dict:
        """Worst (largest) ratio per (axiom, compressor), with its subject."""
        worst: dict[str, dict] = {}
        for m in self.measurements:
            key = f"{m.axiom}/{m.compressor_label}"
            cur = worst.get(key)
            if cur is None or m.ratio > cur["worst_ratio"]:
                worst[key] = {
                    "axiom": m.axiom,
                    "compressor": m.compressor_label,
                    "worst_ratio": m.ratio,
                    "worst_gap_bytes": m.gap_bytes,
                    "subject_ids": list(m.subject_ids),
                    "subject_size_bytes": m.subject_size_bytes,
                }
        return worst

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(
                ["axiom", "compressor", "subject_ids", "n", "gap_bytes",
                 "log2_n", "ratio"]
            )
            for m in self.measurements:
                writer.writerow([
                    m.axiom,
                    m.compressor_label,
                    "|".join(m.subject_ids),
                    m.subject_size_bytes,
                    m.gap_bytes,
                    repr(m.log_reference),
                    repr(m.ratio),
                ])

    def to_plot_csv(self, path: str | Path) -> None:
        """Long-form table for plotting gap growth against input size."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["compressor", "axiom", "n", "gap_bytes", "log2_n"])
            rows = sorted(
                self.measurements,
                key=lambda m: (m.compressor_label, m.axiom, m.subject_size_bytes),
            )
            for m in rows:
                writer.writerow([
                    m.compressor_label, m.axiom, m.subject_size_bytes,
                    m.gap_bytes, repr(m.log_reference),
                ])

    def to_json_dict(self) -> dict:
        return {
            "measurements": [
                {
                    "axiom": m.axiom,
                    "compressor": m.compressor_label,
                    "subject_ids": list(m.subject_ids),
                    "n": m.subject_size_bytes,
                    "gap_bytes": m.gap_bytes,
                    "log2_n": m.log_reference,
                    "ratio": m.ratio if math.isfinite(m.ratio) else None,
                }
                for m in self.measurements
            ],
            "summary": self.summary(),
            "failures": self.failures,
        }

    def write_json(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def audit_corpus(
    corpus: list[ByteDocument],
    compressors: list[CompressorSpec],
    pair_budget: int = 50,
    seed: int = 0,
    cache: LengthCache | None = None,
    exhaustive: bool = False,
    jobs: int = 1,
) -> AxiomReport:
    """Measure all four axioms across a corpus.

    Idempotence runs on every document. Symmetry and monotonicity share
    one sampled set of ordered pairs, and distributivity gets a sampled
    set of triples; ``pair_budget`` bounds each set unless ``exhaustive``
    is set. Sampling is deterministic in ``seed`` and corpus order. A
    budget of zero measures idempotence only.
    """
    docs = list(corpus)
    measurements: list[AxiomMeasurement] = []
    failures: list[dict] = []

    n = len(docs)
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    triples = [
        (i, j, k)
        for i in range(n) for j in range(n) for k in range(n)
        if i != j and j != k and i != k
    ]
    if not exhaustive:
        rng = random.Random(f"axiom-audit:{seed}")
        if len(pairs) > pair_budget:
            pairs = rng.sample(pairs, pair_budget)
        if len(triples) > pair_budget:
            triples = rng.sample(triples, pair_budget)
    if pair_budget == 0 and not exhaustive:
        pairs = []
        triples = []

    work: list[tuple] = []
    for spec in compressors:
        for d in docs:
            work.append(("idempotence", spec, (d,)))
        for i, j in pairs:
            work.append(("symmetry", spec, (docs[i], docs[j])))
            work.append(("monotonicity", spec, (docs[i], docs[j])))
        for i, j, k in triples:
            work.append(("distributivity", spec, (docs[i], docs[j], docs[k])))

    gap_fns = {
        "idempotence": idempotence_gap,
        "monotonicity": monotonicity_gap,
        "symmetry": symmetry_gap,
        "distributivity": distributivity_gap,
    }

    def run_one(item: tuple) -> AxiomMeasurement | None:
        axiom, spec, subjects = item
        try:
            return gap_fns[axiom](spec, *subjects, cache=cache)
        except Exception as exc:
            failures.append({
                "axiom": axiom,
                "compressor": spec.label,
                "subject_ids": [d.id for d in subjects],
                "error": str(exc),
            })
            return None

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            raw = list(pool.map(run_one, work))
    else:
        raw = [run_one(item) for item in work]
    measurements = [m for m in raw if m is not None]
    measurements.sort(key=lambda m: (m.axiom, m.compressor_label, m.subject_ids))
    failures.sort(key=lambda f: (f["axiom"], f["compressor"], f["subject_ids"]))
    return AxiomReport(measurements=measurements, failures=failures)
