"""Reader and writer for the spoken-transcription markup subset."""

from spokenkit.tei.conventions import (
    BUILTIN_RULES,
    ConventionRule,
    ConventionRuleError,
    load_convention_rules,
    promote_conventions,
    promote_document,
)
from spokenkit.tei.model import (
    AnchorRef,
    AppInfo,
    Birth,
    Change,
    FeatureLib,
    Incident,
    InflectedForm,
    InlineStructure,
    Kinesic,
    LangKnown,
    LexicalEntry,
    Metadata,
    OpaqueElement,
    Pc,
    Person,
    Recording,
    Seg,
    Span,
    SpanGroup,
    TagLib,
    TextSegment,
    Utterance,
    Vocal,
    W,
)
from spokenkit.tei.parser import (
    AnchorFinding,
    TeiParseError,
    build_document_library,
    parse_document,
    resolve_ana,
    resolve_anchors,
)
from spokenkit.tei.spans import (
    SpanFinding,
    attach_word_forms,
    document_tokens,
    extract_spans,
    seg_stats,
)
from spokenkit.tei.writer import TeiSerializeError, serialize_document

__all__ = [
    "AnchorFinding",
    "AnchorRef",
    "AppInfo",
    "BUILTIN_RULES",
    "Birth",
    "Change",
    "ConventionRule",
    "ConventionRuleError",
    "FeatureLib",
    "Incident",
    "InflectedForm",
    "InlineStructure",
    "Kinesic",
    "LangKnown",
    "LexicalEntry",
    "Metadata",
    "OpaqueElement",
    "Pc",
    "Person",
    "Recording",
    "Seg",
    "Span",
    "SpanFinding",
    "SpanGroup",
    "TagLib",
    "TeiParseError",
    "TeiSerializeError",
    "TextSegment",
    "Utterance",
    "Vocal",
    "W",
    "attach_word_forms",
    "build_document_library",
    "document_tokens",
    "extract_spans",
    "load_convention_rules",
    "parse_document",
    "promote_conventions",
    "promote_document",
    "resolve_ana",
    "resolve_anchors",
    "seg_stats",
    "serialize_document",
]
