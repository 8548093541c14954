"""1-NN (and small-k) classification over compression distances.

The protocol: draw a few reference samples per class, classify every
remaining document by its nearest reference, repeat over seeded trials,
report per-trial and mean accuracy. Size filters apply independently to
the reference pool and the test pool, so "small references only" and
"small test files only" experiments are both expressible.

Distances are computed as ncd(reference, test) with the reference in
first position. Combiners are not symmetric, so the orientation is part
of the protocol; keeping the reference first means the codec always sees
reference material at the start of the combined stream.
"""

from __future__ import annotations

import csv
import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .combine import CombinerSpec
from .compressors import CompressorSpec
from .documents import ByteDocument
from .errors import CodecError, ConfigurationError
from .ncd import LengthCache, ncd


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines a classification experiment besides data."""

    compressor: CompressorSpec
    combiner: CombinerSpec
    k: int = 1
    references_per_class: int = 1
    reference_max_size_bytes: int | None = None
    test_max_size_bytes: int | None = None
    seed: int = 0
    trials: int = 5

    def __post_init__(self):
        if self.k < 1:
            raise ConfigurationError("k must be >= 1")
        if self.references_per_class < 1:
            raise ConfigurationError("references_per_class must be >= 1")
        if self.trials < 1:
            raise ConfigurationError("trials must be >= 1")
        for name in ("reference_max_size_bytes", "test_max_size_bytes"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ConfigurationError(f"{name} must be positive when given")

    def to_json_dict(self) -> dict:
        return {
            "compressor": self.compressor.to_json_dict(),
            "combiner": self.combiner.to_json_dict(),
            "k": self.k,
            "references_per_class": self.references_per_class,
            "reference_max_size_bytes": self.reference_max_size_bytes,
            "test_max_size_bytes": self.test_max_size_bytes,
            "seed": self.seed,
            "trials": self.trials,
        }


@dataclass(frozen=True)
class Prediction:
    trial: int
    doc_id: str
    true_label: str
    predicted_label: str
    nearest_reference_id: str
    distance: float

    @property
    def correct(self) -> bool:
        return self.true_label == self.predicted_label


@dataclass
class ClassificationResult:
    """Aggregated outcome of all trials of one experiment."""

    config: ExperimentConfig
    predictions: list[Prediction]
    trial_accuracies: list[float]
    references_by_trial: list[list[str]]

    @property
    def mean_accuracy(self) -> float:
        return sum(self.trial_accuracies) / len(self.trial_accuracies)

    @property
    def pooled_accuracy(self) -> float:
        if not self.predictions:
            return 0.0
        return sum(p.correct for p in self.predictions) / len(self.predictions)

    def confusion(self) -> dict[str, dict[str, int]]:
        """Nested counts: confusion()[true_label][predicted_label]."""
        table: dict[str, dict[str, int]] = {}
        for p in self.predictions:
            row = table.setdefault(p.true_label, {})
            row[p.predicted_label] = row.get(p.predicted_label, 0) + 1
        return table

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(
                ["trial", "doc_id", "true_label", "predicted_label",
                 "nearest_reference_id", "distance", "correct"]
            )
            for p in self.predictions:
                writer.writerow([
                    p.trial, p.doc_id, p.true_label, p.predicted_label,
                    p.nearest_reference_id, repr(p.distance), int(p.correct),
                ])

    def to_json_dict(self) -> dict:
        return {
            "config": self.config.to_json_dict(),
            "mean_accuracy": self.mean_accuracy,
            "pooled_accuracy": self.pooled_accuracy,
            "trial_accuracies": self.trial_accuracies,
            "references_by_trial": self.references_by_trial,
            "confusion": self.confusion(),
            "predictions": [
                {
                    "trial": p.trial,
                    "doc_id": p.doc_id,
                    "true_label": p.true_label,
                    "predicted_label": p.predicted_label,
                    "nearest_reference_id": p.nearest_reference_id,
                    "distance": p.distance,
                    "correct": p.correct,
                }
                for p in self.predictions
            ],
        }

    def write_json(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _pair_distance(
    config: ExperimentConfig,
    reference: ByteDocument,
    test: ByteDocument,
    cache: LengthCache | None,
) -> float:
    try:
        return ncd(config.compressor, config.combiner, reference, test, cache=cache)
    except Exception as exc:
        raise CodecError(
            f"distance failed for pair (reference {reference.id!r}, "
            f"test {test.id!r}): {exc}"
        ) from exc


def knn_classify(
    test: ByteDocument,
    references: list[ByteDocument],
    config: ExperimentConfig,
    cache: LengthCache | None = None,
) -> tuple[str, str, float]:
    """Label a document by its nearest references.

    Returns (predicted label, overall nearest reference id, its distance).
    k = 1 takes the minimum-distance reference, distance ties broken by
    reference id. k > 1 majority-votes over the k nearest; vote ties fall
    back to the smaller summed distance, then to reference id order.
    """
    if not references:
        raise ConfigurationError("knn_classify requires at least one reference")
    for r in references:
        if r.label is None:
            raise ConfigurationError(f"reference {r.id!r} has no label")
    scored = sorted(
        (_pair_distance(config, r, test, cache), r.id, r.label)
        for r in references
    )
    nearest_dist, nearest_id, nearest_label = scored[0]
    if config.k == 1:
        return nearest_label, nearest_id, nearest_dist
    top = scored[: config.k]
    votes: dict[str, int] = {}
    summed: dict[str, float] = {}
    first_id: dict[str, str] = {}
    for dist, ref_id, label in top:
        votes[label] = votes.get(label, 0) + 1
        summed[label] = summed.get(label, 0.0) + dist
        first_id.setdefault(label, ref_id)
    winner = min(
        votes,
        key=lambda lab: (-votes[lab], summed[lab], first_id[lab]),
    )
    return winner, nearest_id, nearest_dist


def _labeled_classes(corpus: list[ByteDocument]) -> dict[str, list[ByteDocument]]:
    classes: dict[str, list[ByteDocument]] = {}
    for d in corpus:
        if d.label is None:
            raise ConfigurationError(f"document {d.id!r} has no label")
        classes.setdefault(d.label, []).append(d)
    for members in classes.values():
        members.sort(key=lambda d: d.id)
    return classes


def draw_references(
    corpus: list[ByteDocument], config: ExperimentConfig, trial: int
) -> list[ByteDocument]:
    """The trial's seeded reference draw.

    Depends only on the corpus labels/sizes, the seed, the trial index,
    references_per_class, and the reference size filter, so experiments
    differing only in codec or combiner share draws and stay comparable.
    """
    classes = _labeled_classes(corpus)
    if config.k > config.references_per_class * len(classes):
        raise ConfigurationError(
            f"k={config.k} exceeds references_per_class * classes "
            f"= {config.references_per_class * len(classes)}"
        )
    rng = random.Random(f"refs:{config.seed}:{trial}")
    refs: list[ByteDocument] = []
    for label in sorted(classes):
        members = classes[label]
        pool = [
            d for d in members
            if config.reference_max_size_bytes is None
            or d.length_bytes <= config.reference_max_size_bytes
        ]
        if len(pool) < config.references_per_class:
            raise ConfigurationError(
                f"class {label!r} has only {len(pool)} candidate references "
                f"after the size filter; need {config.references_per_class}"
            )
        if len(members) < config.references_per_class + 1:
            raise ConfigurationError(
                f"class {label!r} has {len(members)} members; need at least "
                f"{config.references_per_class + 1} to leave a test document"
            )
        refs.extend(rng.sample(pool, config.references_per_class))
    return sorted(refs, key=lambda d: d.id)


def evaluate(
    corpus: list[ByteDocument],
    config: ExperimentConfig,
    cache: LengthCache | None = None,
    jobs: int = 1,
) -> ClassificationResult:
    """Run all trials of the experiment and aggregate.

    Per trial: draw references per class, classify every non-reference
    document passing the test filter, score accuracy. Trials run in
    sequence; within a trial, test documents classify concurrently.
    """
    if cache is None:
        cache = LengthCache()
    predictions: list[Prediction] = []
    trial_accuracies: list[float] = []
    references_by_trial: list[list[str]] = []

    for trial in range(config.trials):
        refs = draw_references(corpus, config, trial)
        ref_ids = {r.id for r in refs}
        tests = [
            d for d in corpus
            if d.id not in ref_ids
            and (config.test_max_size_bytes is None
                 or d.length_bytes <= config.test_max_size_bytes)
        ]
        if not tests:
            raise ConfigurationError(
                "no test documents remain after reference exclusion and the "
                "test size filter"
            )

        def classify_one(doc: ByteDocument) -> Prediction:
            label, nearest_id, dist = knn_classify(doc, refs, config, cache=cache)
            return Prediction(
                trial=trial,
                doc_id=doc.id,
                true_label=doc.label or "",
                predicted_label=label,
                nearest_reference_id=nearest_id,
                distance=dist,
            )

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                rows = list(pool.map(classify_one, tests))
        else:
            rows = [classify_one(d) for d in tests]
        predictions.extend(rows)
        trial_accuracies.append(sum(p.correct for p in rows) / len(rows))
        references_by_trial.append([r.id for r in refs])

    return ClassificationResult(
        config=config,
        predictions=predictions,
        trial_accuracies=trial_accuracies,
        references_by_trial=references_by_trial,
    )


@dataclass
class SweepResult:
    """Grid of classification results; failed cells carry an error note."""

    base_config: ExperimentConfig
    compressor_labels: list[str]
    combiner_labels: list[str]
    cells: dict[tuple[str, str], ClassificationResult]
    failures: dict[tuple[str, str], str] = field(default_factory=dict)

    def mean_accuracy(self, compressor_label: str, combiner_label: str) -> float | None:
        cell = self.cells.get((compressor_label, combiner_label))
        return cell.mean_accuracy if cell is not None else None

    def to_pivot_csv(self, path: str | Path) -> None:
        """Rows are codecs, columns combiners, values mean accuracy."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["compressor"] + self.combiner_labels)
            for comp in self.compressor_labels:
                row: list[str] = [comp]
                for comb in self.combiner_labels:
                    acc = self.mean_accuracy(comp, comb)
                    row.append("error" if acc is None else repr(acc))
                writer.writerow(row)

    def to_json_dict(self) -> dict:
        return {
            "base_config": self.base_config.to_json_dict(),
            "compressors": self.compressor_labels,
            "combiners": self.combiner_labels,
            "cells": [
                {
                    "compressor": comp,
                    "combiner": comb,
                    "mean_accuracy": result.mean_accuracy,
                    "trial_accuracies": result.trial_accuracies,
                }
                for (comp, comb), result in sorted(self.cells.items())
            ],
            "failures": [
                {"compressor": comp, "combiner": comb, "error": msg}
                for (comp, comb), msg in sorted(self.failures.items())
            ],
        }

    def write_json(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def sweep(
    corpus: list[ByteDocument],
    base_config: ExperimentConfig,
    compressors: list[CompressorSpec],
    combiners: list[CombinerSpec],
    cache: LengthCache | None = None,
    jobs: int = 1,
) -> SweepResult:
    """Evaluate the full compressor x combiner grid.

    All cells share the length cache and, because reference draws ignore
    codec and combiner, the same references per trial; cell accuracies
    are therefore directly comparable. A failing cell is recorded and the
    sweep moves on.
    """
    if cache is None:
        cache = LengthCache()
    cells: dict[tuple[str, str], ClassificationResult] = {}
    failures: dict[tuple[str, str], str] = {}
    for comp in compressors:
        for comb in combiners:
            key = (comp.label, comb.describe())
            cfg = replace(base_config, compressor=comp, combiner=comb)
            try:
                cells[key] = evaluate(corpus, cfg, cache=cache, jobs=jobs)
            except Exception as exc:
                failures[key] = str(exc)
    return SweepResult(
        base_config=base_config,
        compressor_labels=[c.label for c in compressors],
        combiner_labels=[c.describe() for c in combiners],
        cells=cells,
        failures=failures,
    )
