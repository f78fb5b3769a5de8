"""codenorm: single-pass C/C++ normalization and corpus curation."""

from .syntax import (
    CaptureSpan,
    NoFunctionFound,
    QueryPlan,
    Role,
    Token,
    TokenKind,
    extract_captures,
    lex,
)
from .transform import (
    NormalizedUnit,
    OnNoFunction,
    RenameMap,
    Representation,
    RepresentationMismatch,
    TokenTransform,
    Transform,
    TransformConfig,
    apply,
    build_rename_map,
    canonical_config,
    normalize_source,
    normalized_hash,
    render_token_array,
)
from .dataset import (
    CanonicalFormMissing,
    CleanPolicy,
    DatasetRecord,
    DuplicateReport,
    EngineMode,
    MalformedRecord,
    ProcessedRecord,
    ProcessStatus,
    clean,
    find_duplicates,
    load_records,
    process_corpus,
    process_dataset,
)
from .bench import BenchReport, CorpusUnreadable, InvalidMode, SamplerUnavailable, run_benchmark
from .multipass import normalize_source_multipass

__version__ = "0.1.0"
