"""Corpus ingestion and synthetic corpus generation.

Real corpora enter through manifests (CSV or JSON) so experiments never
depend on directory layout. Two generators produce test material: a size
ladder for compressor audits, and labeled synthetic families whose
samples share a mutated common core, the structural property that makes
family members compress well together.

All generation is driven by SHAKE-256 byte streams keyed on explicit
string tags, so output is identical across platforms and interpreter
versions. Streams have the prefix property: the first n bytes of a
stream do not depend on how much of it is read.
"""

from __future__ import annotations

import csv
import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .documents import ByteDocument
from .errors import ConfigurationError, ManifestError

LADDER_KINDS = ("random", "repetitive", "text")

MANIFEST_HEADER = ["path", "id", "label", "expected_size_bytes"]

# Source material for the Markov text generator. Original filler prose;
# order-2 character statistics are all that is used.
_SEED_TEXT = (
    "The harbour town woke slowly under a grey sky. Fishing boats rocked "
    "against their moorings while gulls argued over scraps along the pier. "
    "An old clockmaker opened his shutters and set each dial by the chime "
    "of the church tower, as he had done every morning for forty years. "
    "Carts rolled over the cobbles carrying salt, rope, and barrels of "
    "apples from the orchards inland. By noon the market square was loud "
    "with bargaining, and the smell of bread drifted from the bakery into "
    "every open window. Children chased each other between the stalls "
    "until the lamplighter began his rounds and the long shadows folded "
    "the town back into quiet. Far out past the breakwater a slow ship "
    "traced the horizon, its sails catching the last copper light, and "
    "the watchman on the hill wrote one more line in his ledger before "
    "closing the book on another ordinary day."
)


def _stream(tag: str, length: int) -> bytes:
    """Deterministic byte stream for a tag; prefixes are stable in length."""
    return hashlib.shake_256(tag.encode("utf-8")).digest(length)


# ---------------------------------------------------------------------------
# Manifests


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    id: str
    label: str | None = None
    expected_size_bytes: int | None = None


@dataclass
class CorpusManifest:
    """Parsed manifest: entries plus the directory paths resolve against."""

    entries: list[ManifestEntry]
    root: Path
    name: str = "corpus"

    @classmethod
    def parse(cls, path: str | Path) -> "CorpusManifest":
        path = Path(path)
        if not path.exists():
            raise ManifestError(f"manifest not found: {path}")
        if path.suffix.lower() == ".json":
            entries = cls._parse_json(path)
        else:
            entries = cls._parse_csv(path)
        seen: dict[str, int] = {}
        for e in entries:
            seen[e.id] = seen.get(e.id, 0) + 1
        dupes = sorted(k for k, v in seen.items() if v > 1)
        if dupes:
            raise ManifestError(f"duplicate document ids in manifest: {dupes}")
        return cls(entries=entries, root=path.parent, name=path.stem)

    @staticmethod
    def _parse_csv(path: Path) -> list[ManifestEntry]:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                return []
            missing = [c for c in ("path", "id") if c not in reader.fieldnames]
            if missing:
                raise ManifestError(
                    f"manifest {path} missing required columns: {missing}"
                )
            out = []
            for row in reader:
                raw_size = (row.get("expected_size_bytes") or "").strip()
                out.append(ManifestEntry(
                    path=row["path"].strip(),
                    id=row["id"].strip(),
                    label=(row.get("label") or "").strip() or None,
                    expected_size_bytes=int(raw_size) if raw_size else None,
                ))
        return out

    @staticmethod
    def _parse_json(path: Path) -> list[ManifestEntry]:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        rows = doc["entries"] if isinstance(doc, dict) else doc
        out = []
        for row in rows:
            out.append(ManifestEntry(
                path=row["path"],
                id=row["id"],
                label=(row.get("label") or None),
                expected_size_bytes=row.get("expected_size_bytes"),
            ))
        return out


def load_manifest(path: str | Path) -> list[ByteDocument]:
    """Load a manifest into verified documents.

    Every entry is checked: the file must exist and, when an expected
    size is given, match it on disk. Labels are normalized to lowercase.
    Errors name the offending entry.
    """
    manifest = CorpusManifest.parse(path)
    docs: list[ByteDocument] = []
    for e in manifest.entries:
        file_path = (manifest.root / e.path).resolve()
        if not file_path.is_file():
            raise ManifestError(f"entry {e.id!r}: file not found: {file_path}")
        actual = file_path.stat().st_size
        if e.expected_size_bytes is not None and actual != e.expected_size_bytes:
            raise ManifestError(
                f"entry {e.id!r}: size mismatch: expected "
                f"{e.expected_size_bytes} bytes, found {actual}"
            )
        label = e.label.lower() if e.label else None
        docs.append(ByteDocument.from_file(file_path, id=e.id, label=label))
    return docs


def write_manifest(docs: list[ByteDocument], path: str | Path) -> Path:
    """Write a CSV manifest for documents; paths relative to its directory."""
    path = Path(path)
    root = path.parent
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_HEADER)
        for d in docs:
            if d.path is None:
                raise ManifestError(f"document {d.id!r} has no backing file")
            rel = Path(d.path).resolve().relative_to(root.resolve())
            writer.writerow([str(rel), d.id, d.label or "", d.length_bytes])
    return path


def write_corpus(
    docs: list[ByteDocument], out_dir: str | Path, manifest_name: str = "manifest.csv"
) -> Path:
    """Materialize documents as files plus a manifest; returns manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    on_disk = []
    for d in docs:
        file_path = out_dir / f"{d.id}.bin"
        with open(file_path, "wb") as fh:
            for chunk in d.iter_chunks():
                fh.write(chunk)
        on_disk.append(ByteDocument.from_file(file_path, id=d.id, label=d.label))
    return write_manifest(on_disk, out_dir / manifest_name)


# ---------------------------------------------------------------------------
# Size ladder


def _markov_table(text: str) -> dict[str, str]:
    looped = text + text[:2]
    table: dict[str, list[str]] = {}
    for i in range(len(looped) - 2):
        table.setdefault(looped[i : i + 2], []).append(looped[i + 2])
    return {k: "".join(v) for k, v in table.items()}


def _gen_random(size: int, tag: str) -> bytes:
    return _stream(tag, size)


def _gen_repetitive(size: int, tag: str) -> bytes:
    tile = _stream(tag, 64)
    reps = size // len(tile) + 1
    return (tile * reps)[:size]


def _gen_text(size: int, tag: str) -> bytes:
    table = _markov_table(_SEED_TEXT)
    rng = random.Random(tag)
    state = rng.choice(sorted(table))
    out = [state]
    total = len(state)
    while total < size:
        nxt = rng.choice(table[state])
        out.append(nxt)
        total += 1
        state = state[1] + nxt
    return "".join(out).encode("ascii")[:size]


_GENERATORS = {
    "random": _gen_random,
    "repetitive": _gen_repetitive,
    "text": _gen_text,
}


def ladder_sizes(min_bytes: int, max_bytes: int, steps_per_doubling: int = 1) -> list[int]:
    """Rung sizes from min to max, steps_per_doubling rungs per factor of 2."""
    if min_bytes < 1024:
        raise ConfigurationError("ladder minimum size must be at least 1024 bytes")
    if max_bytes < min_bytes:
        raise ConfigurationError("ladder maximum must be >= minimum")
    if steps_per_doubling < 1:
        raise ConfigurationError("steps_per_doubling must be >= 1")
    sizes: list[int] = []
    k = 0
    while True:
        s = round(min_bytes * 2 ** (k / steps_per_doubling))
        if s >= max_bytes:
            break
        if not sizes or s > sizes[-1]:
            sizes.append(s)
        k += 1
    sizes.append(max_bytes)
    return sizes


def generate_ladder(
    min_bytes: int,
    max_bytes: int,
    steps_per_doubling: int = 1,
    content_mix: tuple[str, ...] = LADDER_KINDS,
    seed: int = 0,
) -> list[ByteDocument]:
    """Synthetic documents at doubling sizes, one per mix member per rung.

    Content kinds: "random" (seeded uniform bytes), "repetitive" (a 64-byte
    tile repeated), "text" (order-2 character Markov chain over an embedded
    passage). Byte-identical across runs for a fixed seed.
    """
    for kind in content_mix:
        if kind not in _GENERATORS:
            raise ConfigurationError(
                f"unknown ladder content kind {kind!r}; valid: {sorted(_GENERATORS)}"
            )
    if not content_mix:
        raise ConfigurationError("content_mix must name at least one kind")
    docs = []
    for size in ladder_sizes(min_bytes, max_bytes, steps_per_doubling):
        for kind in content_mix:
            tag = f"ladder:{seed}:{kind}:{size}"
            data = _GENERATORS[kind](size, tag)
            docs.append(ByteDocument.from_bytes(
                data, id=f"{kind}-{size:09d}", label=kind,
            ))
    return docs


# ---------------------------------------------------------------------------
# Synthetic families


@dataclass(frozen=True)
class SyntheticFamilySpec:
    """Parameters for the mutated-shared-core family generator.

    Each family has a base blob; a sample is the base resized by jitter,
    with a slice of globally shared content spliced over its tail, then
    mutation_rate of its byte positions rewritten. With indels enabled a
    few short insertions and deletions shift alignment downstream, which
    stresses block-aligned combiners the way real variants do.
    """

    family_count: int
    samples_per_family: int
    base_size_bytes: int
    size_jitter: float = 0.0
    mutation_rate: float = 0.0
    shared_fraction: float = 0.0
    indels: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.family_count < 1 or self.samples_per_family < 1:
            raise ConfigurationError("family_count and samples_per_family must be >= 1")
        if self.base_size_bytes < 1:
            raise ConfigurationError("base_size_bytes must be >= 1")
        for name in ("size_jitter", "mutation_rate", "shared_fraction"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1], got {v}")

    def to_json_dict(self) -> dict:
        return {
            "family_count": self.family_count,
            "samples_per_family": self.samples_per_family,
            "base_size_bytes": self.base_size_bytes,
            "size_jitter": self.size_jitter,
            "mutation_rate": self.mutation_rate,
            "shared_fraction": self.shared_fraction,
            "indels": self.indels,
            "seed": self.seed,
        }


def _apply_indels(buf: bytearray, rng: random.Random) -> None:
    # One event per 256 KB keeps the damage structural (alignment shifts)
    # rather than destructive.
    events = max(1, len(buf) // 262144)
    for _ in range(events):
        pos = rng.randrange(max(1, len(buf)))
        run = rng.randint(1, 64)
        if rng.random() < 0.5:
            buf[pos:pos] = rng.randbytes(run)
        else:
            del buf[pos : pos + run]


def generate_families(spec: SyntheticFamilySpec, id_prefix: str = "") -> list[ByteDocument]:
    """Labeled synthetic corpus with family structure.

    Family bases are prefixes of per-family streams, so two corpora built
    from the same seed at different base sizes agree on their common
    prefix; that lets one experiment mix sample sizes within a family.
    Labels are ``family-NN``; exactly samples_per_family per label.
    """
    docs = []
    max_size = int(spec.base_size_bytes * (1.0 + spec.size_jitter)) + 1
    for fi in range(spec.family_count):
        fam_stream = _stream(f"family:{spec.seed}:{fi}", max_size)
        label = f"family-{fi:02d}"
        for si in range(spec.samples_per_family):
            rng = random.Random(f"sample:{spec.seed}:{fi}:{si}")
            size = round(spec.base_size_bytes * (1.0 + rng.uniform(-spec.size_jitter, spec.size_jitter)))
            size = max(1, size)
            buf = bytearray(fam_stream[:size])
            shared_len = round(spec.shared_fraction * size)
            if shared_len:
                buf[size - shared_len :] = _stream(f"shared:{spec.seed}", shared_len)
            mutations = round(spec.mutation_rate * size)
            if mutations:
                positions = rng.sample(range(size), mutations)
                values = rng.randbytes(mutations)
                for pos, val in zip(positions, values):
                    buf[pos] = val
            if spec.indels:
                _apply_indels(buf, rng)
            docs.append(ByteDocument.from_bytes(
                bytes(buf), id=f"{id_prefix}{label}-s{si:02d}", label=label,
            ))
    return docs
