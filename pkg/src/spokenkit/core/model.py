"""Generic annotation model for spoken-corpus documents.

An annotation is an elementary statement about a source: a reference to the
source, a range picking out the annotated portion, and one or more
feature-value qualifiers. Documents bundle annotations together with the
timelines, layers and levels that organise them. Everything here is plain
data; parsing and serialisation live in the format modules.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from typing import TYPE_CHECKING, Iterable, Union

if TYPE_CHECKING:
    from spokenkit.tei.model import Metadata

Number = Union[int, float, Decimal]

PRIMARY = "primary"
SECONDARY = "secondary"

UNIT_MS = "ms"
UNIT_S = "s"
UNIT_SYMBOLIC = "symbolic"
TIMELINE_UNITS = (UNIT_MS, UNIT_S, UNIT_SYMBOLIC)

MECH_SCALE = "scale"
MECH_EVENT = "event"
MECH_COMPONENT = "component"
RANGING_MECHANISMS = (MECH_SCALE, MECH_EVENT, MECH_COMPONENT)

SYNTHETIC_PREFIX = "~auto"


class UnknownIdError(LookupError):
    """A cross-reference names an id that does not exist."""

    def __init__(self, kind: str, ref: str):
        super().__init__(f"unknown {kind} {ref!r}")
        self.kind = kind
        self.ref = ref


@dataclass(frozen=True)
class SourceRef:
    """A source being annotated: primary (e.g. a recording) or derived."""

    id: str
    kind: str = PRIMARY
    uri: str | None = None
    parents: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in (PRIMARY, SECONDARY):
            raise ValueError(f"source kind must be 'primary' or 'secondary', got {self.kind!r}")
        if self.kind == SECONDARY and not self.parents:
            raise ValueError(f"secondary source {self.id!r} requires at least one parent source")
        if self.kind == PRIMARY and self.parents:
            raise ValueError(f"primary source {self.id!r} cannot have parent sources")


@dataclass(frozen=True)
class TimePoint:
    """A reference point on a timeline.

    Order is ordinal (the ``index`` within the timeline); a numeric ``offset``
    in the timeline unit is advisory and checked for consistency by the
    validator, never used for ordering.
    """

    id: str
    index: int
    offset: Number | None = None
    synthetic: bool = False
    anchor_declared: bool = False

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError(f"point {self.id!r}: index must be >= 0")
        if self.offset is not None and self.offset < 0:
            raise ValueError(f"point {self.id!r}: offset must be non-negative")


@dataclass(frozen=True)
class Timeline:
    """Totally ordered reference points, optionally carrying numeric offsets."""

    id: str
    unit: str = UNIT_SYMBOLIC
    points: tuple[TimePoint, ...] = ()
    implicit: bool = False
    id_declared: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        if self.unit not in TIMELINE_UNITS:
            raise ValueError(f"timeline {self.id!r}: unit must be one of {TIMELINE_UNITS}")
        seen: set[str] = set()
        for n, point in enumerate(self.points):
            if point.index != n:
                raise ValueError(f"timeline {self.id!r}: point indices must be consecutive from 0")
            if point.id in seen:
                raise ValueError(f"timeline {self.id!r}: duplicate point id {point.id!r}")
            seen.add(point.id)

    def __contains__(self, point_id: str) -> bool:
        return any(p.id == point_id for p in self.points)

    def point(self, point_id: str) -> TimePoint:
        for p in self.points:
            if p.id == point_id:
                return p
        raise UnknownIdError("timeline point", point_id)

    def index_of(self, point_id: str) -> int:
        return self.point(point_id).index

    @classmethod
    def of(cls, timeline_id: str, point_ids: Iterable[str], unit: str = UNIT_SYMBOLIC) -> "Timeline":
        points = tuple(TimePoint(pid, n) for n, pid in enumerate(point_ids))
        return cls(timeline_id, unit, points)


@dataclass(frozen=True)
class ScaleInterval:
    """Direct reference to a span on a numeric scale."""

    start: Number
    end: Number
    unit: str = UNIT_S

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError(f"scale interval start {self.start} exceeds end {self.end}")


@dataclass(frozen=True)
class EventInterval:
    """Reference to a half-open span [start, end) between two timeline points."""

    start: str
    end: str
    timeline: str


@dataclass(frozen=True)
class ComponentRefs:
    """Stand-off pointers to explicitly identified components of the source."""

    targets: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.targets:
            raise ValueError("component range requires at least one target")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError("component range targets must be distinct")


Range = Union[ScaleInterval, EventInterval, ComponentRefs]


def mechanism(rng: Range) -> str:
    """The ranging mechanism a range instance uses."""
    if isinstance(rng, ScaleInterval):
        return MECH_SCALE
    if isinstance(rng, EventInterval):
        return MECH_EVENT
    if isinstance(rng, ComponentRefs):
        return MECH_COMPONENT
    raise TypeError(f"not a range: {rng!r}")


@dataclass(frozen=True)
class CategoryRef:
    """Reference to a registered data category by persistent identifier."""

    pid: str


@dataclass(frozen=True)
class Qualifier:
    """One elementary feature-value statement.

    Feature and value may each be a plain name/literal or a reference into a
    data-category registry; only registry references take part in semantic
    equivalence checks.
    """

    feature: str | CategoryRef
    value: str | bool | Number | CategoryRef

    def feature_key(self) -> str:
        return self.feature.pid if isinstance(self.feature, CategoryRef) else self.feature

    def value_key(self) -> str:
        if isinstance(self.value, CategoryRef):
            return self.value.pid
        return str(self.value)


@dataclass(frozen=True, kw_only=True)
class Annotation:
    """Source reference + range + qualifiers; the universal unit of annotation.

    ``range`` is None for events whose position is only implicit in document
    order; ``sequence_implicit`` assigns synthetic intervals to those.
    Several qualifiers may share one range; each remains individually
    addressable.
    """

    id: str
    source: str
    range: Range | None
    qualifiers: tuple[Qualifier, ...]
    layer: str
    who: str | None = None

    def __post_init__(self) -> None:
        if not self.qualifiers:
            raise ValueError(f"annotation {self.id!r} requires at least one qualifier")


@dataclass(frozen=True, kw_only=True)
class Token(Annotation):
    """Surface segmentation unit of a transcription."""

    surface: str = ""


@dataclass(frozen=True, kw_only=True)
class WordForm(Annotation):
    """Lexical abstraction over one or more tokens (n-to-n with tokens)."""

    tokens: tuple[str, ...] = ()
    lex_ref: str | None = None
    orth: str | None = None

    def __post_init__(self) -> None:
        super().__post_init__()
        if not self.tokens:
            raise ValueError(f"word form {self.id!r} requires at least one token")


@dataclass(frozen=True)
class Layer:
    """Technical grouping of annotations (one tier of a score, one span group).

    ``speaker`` and ``category`` are carried for layers that came from (or
    should convert to) score tiers; other layers leave them unset.
    """

    id: str
    name: str
    level: str
    speaker: str | None = None
    category: str | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError(f"layer {self.id!r} requires a non-empty name")


@dataclass(frozen=True)
class Level:
    """Conceptual grouping: same sources, one ranging mechanism, one tagset."""

    id: str
    sources: frozenset[str] = frozenset()
    ranging_mechanism: str = MECH_EVENT
    category_selection: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.ranging_mechanism not in RANGING_MECHANISMS:
            raise ValueError(
                f"level {self.id!r}: ranging mechanism must be one of {RANGING_MECHANISMS}"
            )


@dataclass(frozen=True)
class DeclaredId:
    """An identifier as it appeared in the input, before any normalization."""

    raw: str
    kind: str


@dataclass
class Document:
    """A parsed or constructed corpus document.

    ``body`` and ``back`` hold ordered content and declaration items (see
    ``spokenkit.tei.model``) so that markup round-trips; ``annotations`` is
    the stand-off view over the same material. Documents are treated as
    immutable: operations that change them return new documents.
    """

    metadata: "Metadata | None" = None
    sources: tuple[SourceRef, ...] = ()
    timelines: tuple[Timeline, ...] = ()
    layers: tuple[Layer, ...] = ()
    levels: tuple[Level, ...] = ()
    annotations: tuple[Annotation, ...] = ()
    body: tuple = ()
    back: tuple = ()
    declared_ids: tuple[DeclaredId, ...] = field(default=(), compare=False)

    def source(self, source_id: str) -> SourceRef:
        for s in self.sources:
            if s.id == source_id:
                return s
        raise UnknownIdError("source", source_id)

    def timeline(self, timeline_id: str) -> Timeline:
        for t in self.timelines:
            if t.id == timeline_id:
                return t
        raise UnknownIdError("timeline", timeline_id)

    def layer(self, layer_id: str) -> Layer:
        for l in self.layers:
            if l.id == layer_id:
                return l
        raise UnknownIdError("layer", layer_id)

    def level(self, level_id: str) -> Level:
        for l in self.levels:
            if l.id == level_id:
                return l
        raise UnknownIdError("level", level_id)

    def annotation(self, annotation_id: str) -> Annotation:
        for a in self.annotations:
            if a.id == annotation_id:
                return a
        raise UnknownIdError("annotation", annotation_id)

    @property
    def primary_timeline(self) -> Timeline | None:
        return self.timelines[0] if self.timelines else None

    def timeline_of_point(self, point_id: str) -> Timeline | None:
        for t in self.timelines:
            if point_id in t:
                return t
        return None

    @property
    def lexical_entries(self) -> tuple:
        from spokenkit.tei.model import LexicalEntry

        return tuple(item for item in self.back if isinstance(item, LexicalEntry))

    @property
    def tagset_declarations(self) -> tuple:
        from spokenkit.tei.model import FeatureLib, TagLib

        return tuple(item for item in self.back if isinstance(item, (FeatureLib, TagLib)))


@dataclass(frozen=True)
class LevelViolation:
    """One annotation breaking one of its level's coherence requirements."""

    annotation: str
    kind: str  # 'source' | 'mechanism' | 'category'
    message: str


def check_level_coherence(doc: Document, level_id: str) -> list[LevelViolation]:
    """Check every annotation of a level against the level's declaration.

    Reports source membership, ranging-mechanism and category-selection
    violations. Annotations without a range are not checked for mechanism
    (their ranging is still pending).
    """
    level = doc.level(level_id)
    layer_ids = {layer.id for layer in doc.layers if layer.level == level_id}
    violations: list[LevelViolation] = []
    for ann in doc.annotations:
        if ann.layer not in layer_ids:
            continue
        if ann.source not in level.sources:
            violations.append(
                LevelViolation(
                    ann.id,
                    "source",
                    f"annotation {ann.id!r} uses source {ann.source!r} "
                    f"not declared for level {level_id!r}",
                )
            )
        if ann.range is not None and mechanism(ann.range) != level.ranging_mechanism:
            violations.append(
                LevelViolation(
                    ann.id,
                    "mechanism",
                    f"annotation {ann.id!r} uses {mechanism(ann.range)} ranging "
                    f"but level {level_id!r} declares {level.ranging_mechanism}",
                )
            )
        for q in ann.qualifiers:
            if q.feature_key() not in level.category_selection:
                violations.append(
                    LevelViolation(
                        ann.id,
                        "category",
                        f"annotation {ann.id!r} qualifier feature {q.feature_key()!r} "
                        f"is outside the category selection of level {level_id!r}",
                    )
                )
    return violations
