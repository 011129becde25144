"""Coverage-guided stateful REST API fuzzer."""

from ._seqfuzz import (
    MockSut,
    SeqfuzzError,
    Spec,
    decode_coverage,
    encode_coverage,
    energy,
    fuzz,
    mermaid_id,
    mutator_names,
    report,
    strip_timing,
)

__all__ = [
    "MockSut",
    "SeqfuzzError",
    "Spec",
    "decode_coverage",
    "encode_coverage",
    "energy",
    "fuzz",
    "mermaid_id",
    "mutator_names",
    "report",
    "strip_timing",
]
