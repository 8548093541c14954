"""Command-line entry point.

One binary, six subcommands: audit, ncd, matrix, classify, sweep,
generate. Machine-readable results are CSV/JSON files; short human
summaries go to standard output. Every file-producing command writes a
run_manifest.json beside its outputs with the fully resolved
configuration, codec parameter pins, library versions, a corpus digest,
and timings; it is the only output that carries wall-clock values, so
everything else reruns byte-identically.

Exit codes: 0 success, 2 usage error, 3 input/corpus error, 4
codec/runtime error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
import zlib
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .axioms import audit_corpus
from .classify import ExperimentConfig, evaluate, sweep
from .combine import CombinerSpec
from .compressors import BUILTIN_CODECS, DEFAULT_LEVELS, CompressorSpec
from .corpus import (
    LADDER_KINDS,
    SyntheticFamilySpec,
    generate_families,
    generate_ladder,
    load_manifest,
    write_corpus,
)
from .documents import ByteDocument
from .errors import (
    CodecError,
    ConfigurationError,
    DegenerateInputError,
    ManifestError,
    NcdkitError,
)
from .ncd import LengthCache, distance_matrix, ncd

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_RUNTIME = 4

CACHE_ENV = "NCDKIT_CACHE"

# Grid used by `sweep --preset-grid`: every built-in codec against plain
# concatenation plus interleave and shuffle over decimal-megabyte blocks.
PRESET_INTERLEAVE_BLOCKS = (1_000_000, 10_000_000, 100_000_000, 1_000_000_000)
PRESET_SHUFFLE_BLOCKS = (10_000_000, 100_000_000, 1_000_000_000)


class _UsageError(Exception):
    pass


def _parse_codec(token: str) -> CompressorSpec:
    name, sep, level_text = token.partition(":")
    name = name.strip().lower()
    if name not in BUILTIN_CODECS:
        raise _UsageError(
            f"unknown codec {name!r}; valid codecs: {', '.join(BUILTIN_CODECS)}"
        )
    if sep:
        try:
            level = int(level_text)
        except ValueError:
            raise _UsageError(f"bad codec level in {token!r}")
    else:
        level = DEFAULT_LEVELS[name]
    try:
        return CompressorSpec(id=name, level=level)
    except (CodecError, ConfigurationError) as exc:
        raise _UsageError(str(exc))


def _parse_codec_list(tokens: str) -> list[CompressorSpec]:
    specs = [_parse_codec(t) for t in tokens.split(",") if t.strip()]
    if not specs:
        raise _UsageError("at least one codec is required")
    return specs


def _parse_combiner_token(token: str) -> CombinerSpec:
    """Grammar: concat | interleave:BYTES | ncd-shuffle:BYTES[:SCORER[:LEVEL]]."""
    parts = token.strip().split(":")
    kind = parts[0].replace("_", "-").lower()
    if kind == "concat":
        if len(parts) > 1:
            raise _UsageError("concat takes no block size")
        return CombinerSpec.concat()
    if kind == "interleave":
        if len(parts) != 2:
            raise _UsageError("interleave needs a block size: interleave:BYTES")
        return CombinerSpec.interleave(_parse_size(parts[1]))
    if kind == "ncd-shuffle":
        if len(parts) < 2 or len(parts) > 4:
            raise _UsageError(
                "ncd-shuffle grammar: ncd-shuffle:BYTES[:SCORER[:LEVEL]]"
            )
        block = _parse_size(parts[1])
        if len(parts) == 2:
            # The scorer only ranks chunk pairs, so the default sits at the
            # fast end of the deflate range.
            scorer_token = "deflate:1"
        else:
            scorer_token = ":".join(parts[2:4])
        return CombinerSpec.shuffle(block, _parse_codec(scorer_token))
    raise _UsageError(
        f"unknown combiner {parts[0]!r}; valid: concat, interleave, ncd-shuffle"
    )


def _parse_size(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise _UsageError(f"expected a byte count, got {text!r}")
    if n < 1:
        raise _UsageError(f"byte count must be positive, got {n}")
    return n


def _combiner_from_flags(args: argparse.Namespace) -> CombinerSpec:
    kind = args.combiner.replace("_", "-").lower()
    if kind == "concat":
        if args.block is not None:
            raise _UsageError("--block is meaningless with --combiner concat")
        return CombinerSpec.concat()
    if args.block is None:
        raise _UsageError(f"--combiner {kind} requires --block BYTES")
    if kind == "interleave":
        return CombinerSpec.interleave(args.block)
    if kind == "ncd-shuffle":
        scorer = _parse_codec(args.scorer)
        return CombinerSpec.shuffle(args.block, scorer)
    raise _UsageError(f"unknown combiner {args.combiner!r}")


def _open_cache(args: argparse.Namespace) -> LengthCache:
    path = getattr(args, "cache", None) or os.environ.get(CACHE_ENV)
    return LengthCache(path) if path else LengthCache()


def _corpus_digest(docs: list[ByteDocument]) -> str:
    h = hashlib.sha256()
    for d in sorted(docs, key=lambda d: d.id):
        h.update(d.id.encode("utf-8"))
        h.update(b"\x00")
        h.update(d.content_digest().encode("ascii"))
        h.update(b"\n")
    return h.hexdigest()


def _write_run_manifest(
    out_dir: Path,
    command: str,
    resolved: dict,
    corpus_info: dict | None,
    outputs: list[str],
    timings: dict[str, float],
) -> None:
    manifest = {
        "command": command,
        "resolved": resolved,
        "corpus": corpus_info,
        "outputs": sorted(outputs),
        "versions": {
            "ncdkit": __version__,
            "python": sys.version.split()[0],
            "zlib": zlib.ZLIB_VERSION,
        },
        "timings_seconds": {k: round(v, 3) for k, v in timings.items()},
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    with open(out_dir / "run_manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _prepare_out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_corpus(args: argparse.Namespace) -> list[ByteDocument]:
    return load_manifest(args.corpus)


def _corpus_info(args: argparse.Namespace, docs: list[ByteDocument]) -> dict:
    return {
        "manifest": str(args.corpus),
        "documents": len(docs),
        "total_bytes": sum(d.length_bytes for d in docs),
        "digest": _corpus_digest(docs),
    }


# ---------------------------------------------------------------------------
# Subcommands


def cmd_audit(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    docs = _load_corpus(args)
    compressors = _parse_codec_list(args.codecs)
    cache = _open_cache(args)
    out = _prepare_out_dir(args)
    t1 = time.perf_counter()
    report = audit_corpus(
        docs,
        compressors,
        pair_budget=args.budget,
        seed=args.seed,
        cache=cache,
        exhaustive=args.exhaustive,
        jobs=args.jobs,
    )
    t2 = time.perf_counter()
    report.to_csv(out / "axioms.csv")
    report.write_json(out / "axioms.json")
    report.to_plot_csv(out / "plotdata.csv")
    t3 = time.perf_counter()
    _write_run_manifest(
        out,
        "audit",
        {
            "codecs": [c.to_json_dict() for c in compressors],
            "codec_pins": [c.parameter_pins() for c in compressors],
            "budget": args.budget,
            "exhaustive": args.exhaustive,
            "seed": args.seed,
            "jobs": args.jobs,
        },
        _corpus_info(args, docs),
        ["axioms.csv", "axioms.json", "plotdata.csv"],
        {"load": t1 - t0, "compute": t2 - t1, "write": t3 - t2, "total": t3 - t0},
    )
    worst = report.summary()
    for key in sorted(worst):
        row = worst[key]
        print(f"{key}: worst ratio {row['worst_ratio']:.3g} "
              f"(gap {row['worst_gap_bytes']} bytes on {'|'.join(row['subject_ids'])})")
    if report.failures:
        print(f"{len(report.failures)} measurement(s) failed; see axioms.json",
              file=sys.stderr)
    print(f"wrote {out}/axioms.csv, axioms.json, plotdata.csv")
    return EXIT_OK


def cmd_ncd(args: argparse.Namespace) -> int:
    for path in (args.file_a, args.file_b):
        if not Path(path).is_file():
            raise ManifestError(f"input file not found: {path}")
    compressor = _parse_codec(args.codec)
    combiner = _combiner_from_flags(args)
    cache = _open_cache(args)
    x = ByteDocument.from_file(args.file_a)
    y = ByteDocument.from_file(args.file_b)
    value = ncd(compressor, combiner, x, y, cache=cache, jobs=args.jobs)
    print(repr(value))
    return EXIT_OK


def cmd_matrix(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    docs = _load_corpus(args)
    compressor = _parse_codec(args.codec)
    combiner = _combiner_from_flags(args)
    cache = _open_cache(args)
    out = _prepare_out_dir(args)
    t1 = time.perf_counter()
    matrix = distance_matrix(docs, compressor, combiner, cache=cache, jobs=args.jobs)
    t2 = time.perf_counter()
    matrix.to_csv(out / "matrix.csv")
    matrix.write_json(out / "matrix.json", include_timestamp=False)
    t3 = time.perf_counter()
    _write_run_manifest(
        out,
        "matrix",
        {
            "codec": compressor.to_json_dict(),
            "codec_pins": compressor.parameter_pins(),
            "combiner": combiner.to_json_dict(),
            "jobs": args.jobs,
        },
        _corpus_info(args, docs),
        ["matrix.csv", "matrix.json"],
        {"load": t1 - t0, "compute": t2 - t1, "write": t3 - t2, "total": t3 - t0},
    )
    print(f"{len(docs)}x{len(docs)} matrix -> {out}/matrix.csv, matrix.json")
    return EXIT_OK


def _experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    return ExperimentConfig(
        compressor=_parse_codec(args.codec),
        combiner=_combiner_from_flags(args),
        k=args.k,
        references_per_class=args.refs_per_class,
        reference_max_size_bytes=args.ref_max_size,
        test_max_size_bytes=args.test_max_size,
        seed=args.seed,
        trials=args.trials,
    )


def cmd_classify(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    docs = _load_corpus(args)
    try:
        config = _experiment_config(args)
    except ConfigurationError as exc:
        raise _UsageError(str(exc))
    cache = _open_cache(args)
    out = _prepare_out_dir(args)
    t1 = time.perf_counter()
    result = evaluate(docs, config, cache=cache, jobs=args.jobs)
    t2 = time.perf_counter()
    result.to_csv(out / "classification.csv")
    result.write_json(out / "classification.json")
    t3 = time.perf_counter()
    _write_run_manifest(
        out,
        "classify",
        {"experiment": config.to_json_dict(), "jobs": args.jobs},
        _corpus_info(args, docs),
        ["classification.csv", "classification.json"],
        {"load": t1 - t0, "compute": t2 - t1, "write": t3 - t2, "total": t3 - t0},
    )
    accs = ", ".join(f"{a:.3f}" for a in result.trial_accuracies)
    print(f"mean accuracy {result.mean_accuracy:.4f} over "
          f"{config.trials} trial(s) [{accs}]")
    print(f"wrote {out}/classification.csv, classification.json")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    docs = _load_corpus(args)
    if args.preset_grid:
        compressors = [_parse_codec(name) for name in BUILTIN_CODECS]
        combiners = [CombinerSpec.concat()]
        for block in PRESET_INTERLEAVE_BLOCKS:
            combiners.append(CombinerSpec.interleave(block))
        for block in PRESET_SHUFFLE_BLOCKS:
            combiners.append(CombinerSpec.shuffle(block, _parse_codec("deflate:1")))
    else:
        if not args.codecs or not args.combiners:
            raise _UsageError("sweep needs --codecs and --combiners, or --preset-grid")
        compressors = _parse_codec_list(args.codecs)
        combiners = [
            _parse_combiner_token(t) for t in args.combiners.split(",") if t.strip()
        ]
        if not combiners:
            raise _UsageError("at least one combiner is required")
    base = ExperimentConfig(
        compressor=compressors[0],
        combiner=combiners[0],
        k=args.k,
        references_per_class=args.refs_per_class,
        reference_max_size_bytes=args.ref_max_size,
        test_max_size_bytes=args.test_max_size,
        seed=args.seed,
        trials=args.trials,
    )
    cache = _open_cache(args)
    out = _prepare_out_dir(args)
    t1 = time.perf_counter()
    result = sweep(docs, base, compressors, combiners, cache=cache, jobs=args.jobs)
    t2 = time.perf_counter()
    result.to_pivot_csv(out / "sweep.csv")
    result.write_json(out / "sweep.json")
    t3 = time.perf_counter()
    _write_run_manifest(
        out,
        "sweep",
        {
            "codecs": [c.to_json_dict() for c in compressors],
            "combiners": [c.to_json_dict() for c in combiners],
            "experiment": base.to_json_dict(),
            "preset_grid": args.preset_grid,
            "jobs": args.jobs,
        },
        _corpus_info(args, docs),
        ["sweep.csv", "sweep.json"],
        {"load": t1 - t0, "compute": t2 - t1, "write": t3 - t2, "total": t3 - t0},
    )
    for comp in result.compressor_labels:
        cells = []
        for comb in result.combiner_labels:
            acc = result.mean_accuracy(comp, comb)
            cells.append(f"{comb}={acc:.3f}" if acc is not None else f"{comb}=error")
        print(f"{comp}: " + "  ".join(cells))
    if result.failures:
        print(f"{len(result.failures)} cell(s) failed; see sweep.json", file=sys.stderr)
        if not result.cells:
            raise CodecError("every sweep cell failed")
    print(f"wrote {out}/sweep.csv, sweep.json")
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    out = _prepare_out_dir(args)
    if args.what == "ladder":
        mix = tuple(k.strip() for k in args.mix.split(",") if k.strip())
        docs = generate_ladder(
            min_bytes=args.min_bytes,
            max_bytes=args.max_bytes,
            steps_per_doubling=args.steps_per_doubling,
            content_mix=mix,
            seed=args.seed,
        )
        resolved = {
            "what": "ladder",
            "min_bytes": args.min_bytes,
            "max_bytes": args.max_bytes,
            "steps_per_doubling": args.steps_per_doubling,
            "content_mix": list(mix),
            "seed": args.seed,
        }
    else:
        spec = SyntheticFamilySpec(
            family_count=args.families,
            samples_per_family=args.samples,
            base_size_bytes=args.base_size,
            size_jitter=args.jitter,
            mutation_rate=args.mutation_rate,
            shared_fraction=args.shared_fraction,
            indels=args.indels,
            seed=args.seed,
        )
        docs = generate_families(spec, id_prefix=args.id_prefix)
        resolved = {"what": "families", "spec": spec.to_json_dict(),
                    "id_prefix": args.id_prefix}
    t1 = time.perf_counter()
    manifest_path = write_corpus(docs, out)
    t2 = time.perf_counter()
    _write_run_manifest(
        out,
        "generate",
        resolved,
        {
            "manifest": str(manifest_path),
            "documents": len(docs),
            "total_bytes": sum(d.length_bytes for d in docs),
            "digest": _corpus_digest(docs),
        },
        [manifest_path.name] + sorted(f"{d.id}.bin" for d in docs),
        {"generate": t1 - t0, "write": t2 - t1, "total": t2 - t0},
    )
    print(f"{len(docs)} document(s), "
          f"{sum(d.length_bytes for d in docs)} bytes -> {manifest_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def _add_common(parser: argparse.ArgumentParser, *, cache: bool = True) -> None:
    if cache:
        parser.add_argument(
            "--cache", help=f"length-cache file (default: ${CACHE_ENV} if set)"
        )
    parser.add_argument(
        "--jobs", type=int, default=os.cpu_count() or 1,
        help="worker pool size for parallel phases (default: CPU count)",
    )


def _add_combiner_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--combiner", default="concat",
        choices=["concat", "interleave", "ncd-shuffle"],
        help="how the two inputs are merged before joint compression",
    )
    parser.add_argument(
        "--block", type=int, default=None,
        help="block size in bytes for interleave / ncd-shuffle",
    )
    parser.add_argument(
        "--scorer", default="deflate:1",
        help="codec scoring chunk pairs for ncd-shuffle (default deflate:1)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncdkit",
        description="Compression-distance experiments: audits, matrices, "
                    "classification, corpus generation.",
    )
    parser.add_argument("--version", action="version", version=f"ncdkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("audit", help="measure compressor axiom gaps over a corpus")
    p.add_argument("--corpus", required=True, help="corpus manifest (CSV or JSON)")
    p.add_argument("--codecs", required=True,
                   help="comma list, e.g. deflate,bzip2,lzma or deflate:6")
    p.add_argument("--seed", type=int, required=True, help="pair-sampling seed")
    p.add_argument("--budget", type=int, default=50,
                   help="sampled pairs/triples per axiom (default 50)")
    p.add_argument("--exhaustive", action="store_true",
                   help="measure every pair and triple (small corpora only)")
    p.add_argument("-o", "--out", required=True, help="output directory")
    _add_common(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("ncd", help="distance between two files")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--codec", required=True, help="deflate|bzip2|lzma[:LEVEL]")
    _add_combiner_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_ncd)

    p = sub.add_parser("matrix", help="all-pairs distance matrix for a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--codec", required=True, help="deflate|bzip2|lzma[:LEVEL]")
    _add_combiner_flags(p)
    p.add_argument("-o", "--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("classify", help="seeded k-NN evaluation over a labeled corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--codec", required=True)
    _add_combiner_flags(p)
    p.add_argument("--refs-per-class", type=int, default=1)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, required=True, help="reference-draw seed")
    p.add_argument("--ref-max-size", type=int, default=None,
                   help="reference pool size filter in bytes")
    p.add_argument("--test-max-size", type=int, default=None,
                   help="test pool size filter in bytes")
    p.add_argument("-o", "--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("sweep", help="codec x combiner accuracy grid")
    p.add_argument("--corpus", required=True)
    p.add_argument("--codecs", help="comma list of codec tokens")
    p.add_argument(
        "--combiners",
        help="comma list: concat | interleave:BYTES | "
             "ncd-shuffle:BYTES[:SCORER[:LEVEL]]",
    )
    p.add_argument("--preset-grid", action="store_true",
                   help="all builtin codecs x {concat, interleave at 1/10/100/"
                        "1000 MB, ncd-shuffle at 10/100/1000 MB}")
    p.add_argument("--refs-per-class", type=int, default=1)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--ref-max-size", type=int, default=None)
    p.add_argument("--test-max-size", type=int, default=None)
    p.add_argument("-o", "--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("generate", help="write a synthetic corpus plus manifest")
    gen_sub = p.add_subparsers(dest="what", required=True)

    g = gen_sub.add_parser("ladder", help="doubling-size docs for codec audits")
    g.add_argument("--min-bytes", type=int, required=True)
    g.add_argument("--max-bytes", type=int, required=True)
    g.add_argument("--steps-per-doubling", type=int, default=1)
    g.add_argument("--mix", default=",".join(LADDER_KINDS),
                   help=f"comma list from {{{','.join(LADDER_KINDS)}}}")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("-o", "--out", required=True)
    g.set_defaults(func=cmd_generate)

    g = gen_sub.add_parser("families", help="labeled mutated-shared-core families")
    g.add_argument("--families", type=int, required=True)
    g.add_argument("--samples", type=int, required=True,
                   help="samples per family")
    g.add_argument("--base-size", type=int, required=True,
                   help="family base blob size in bytes")
    g.add_argument("--jitter", type=float, default=0.0)
    g.add_argument("--mutation-rate", type=float, default=0.0)
    g.add_argument("--shared-fraction", type=float, default=0.0)
    g.add_argument("--indels", action="store_true",
                   help="also apply short insertions/deletions")
    g.add_argument("--id-prefix", default="")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("-o", "--out", required=True)
    g.set_defaults(func=cmd_generate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"ncdkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ManifestError, FileNotFoundError) as exc:
        print(f"ncdkit: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConfigurationError as exc:
        print(f"ncdkit: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CodecError, DegenerateInputError) as exc:
        print(f"ncdkit: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except NcdkitError as exc:
        print(f"ncdkit: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
