"""Compression-distance toolkit.

Measures normalized compression distance under pluggable codecs and
combining functions, audits how far real codecs sit from the normal-
compressor axioms, and runs nearest-reference classification experiments
over labeled corpora.
"""

from .axioms import (
    AxiomMeasurement,
    AxiomReport,
    audit_corpus,
    distributivity_gap,
    idempotence_gap,
    monotonicity_gap,
    symmetry_gap,
)
from .classify import (
    ClassificationResult,
    ExperimentConfig,
    Prediction,
    SweepResult,
    evaluate,
    knn_classify,
    sweep,
)
from .combine import CombinerSpec, combine, interleave, ncd_shuffle, shuffle_pairs
from .compressors import (
    BUILTIN_CODECS,
    CompressedLength,
    CompressorSpec,
    compressed_size,
    concat_compressed_size,
    header_floor,
    set_external_process_cap,
)
from .corpus import (
    CorpusManifest,
    SyntheticFamilySpec,
    generate_families,
    generate_ladder,
    load_manifest,
    write_corpus,
    write_manifest,
)
from .documents import ByteDocument
from .errors import (
    CodecError,
    ConfigurationError,
    DegenerateInputError,
    ManifestError,
    NcdkitError,
)
from .ncd import (
    DistanceMatrix,
    LengthCache,
    distance_matrix,
    ncd,
    ncd_bytes,
    ncd_from_lengths,
)

__version__ = "0.1.0"

__all__ = [
    "AxiomMeasurement",
    "AxiomReport",
    "BUILTIN_CODECS",
    "ByteDocument",
    "ClassificationResult",
    "CodecError",
    "CombinerSpec",
    "CompressedLength",
    "CompressorSpec",
    "ConfigurationError",
    "CorpusManifest",
    "DegenerateInputError",
    "DistanceMatrix",
    "ExperimentConfig",
    "LengthCache",
    "ManifestError",
    "NcdkitError",
    "Prediction",
    "SweepResult",
    "SyntheticFamilySpec",
    "audit_corpus",
    "combine",
    "compressed_size",
    "concat_compressed_size",
    "distance_matrix",
    "distributivity_gap",
    "evaluate",
    "generate_families",
    "generate_ladder",
    "header_floor",
    "idempotence_gap",
    "interleave",
    "knn_classify",
    "load_manifest",
    "monotonicity_gap",
    "ncd",
    "ncd_bytes",
    "ncd_from_lengths",
    "ncd_shuffle",
    "shuffle_pairs",
    "set_external_process_cap",
    "sweep",
    "symmetry_gap",
    "write_corpus",
    "write_manifest",
    "__version__",
]
