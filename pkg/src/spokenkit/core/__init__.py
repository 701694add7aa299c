"""Annotation model and temporal algebra."""

from spokenkit.core.model import (
    Annotation,
    CategoryRef,
    ComponentRefs,
    DeclaredId,
    Document,
    EventInterval,
    Layer,
    Level,
    LevelViolation,
    Qualifier,
    Range,
    ScaleInterval,
    SourceRef,
    TimePoint,
    Timeline,
    Token,
    UnknownIdError,
    WordForm,
    check_level_coherence,
    mechanism,
)
from spokenkit.core.temporal import (
    IncomparableIntervalsError,
    OverlapPair,
    OverlapReport,
    TemporalRelation,
    compare_points,
    overlaps_report,
    relation,
    relation_by_index,
    sequence_implicit,
)

__all__ = [
    "Annotation",
    "CategoryRef",
    "ComponentRefs",
    "DeclaredId",
    "Document",
    "EventInterval",
    "IncomparableIntervalsError",
    "Layer",
    "Level",
    "LevelViolation",
    "OverlapPair",
    "OverlapReport",
    "Qualifier",
    "Range",
    "ScaleInterval",
    "SourceRef",
    "TemporalRelation",
    "TimePoint",
    "Timeline",
    "Token",
    "UnknownIdError",
    "WordForm",
    "check_level_coherence",
    "compare_points",
    "mechanism",
    "overlaps_report",
    "relation",
    "relation_by_index",
    "sequence_implicit",
]
