"""Typed content model for the spoken-transcription markup subset.

Everything the parser understands becomes one of these dataclasses; anything
else is preserved as an :class:`OpaqueElement` so documents round-trip.
Text inside utterances is kept verbatim, including whitespace.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from spokenkit.featstruct import Feature, FeatureStructure, TagDecl


@dataclass(frozen=True)
class OpaqueElement:
    """An element outside the understood vocabulary, kept as parsed."""

    tag: str
    attrib: tuple[tuple[str, str], ...] = ()
    text: str | None = None
    children: tuple["OpaqueElement", ...] = ()
    tails: tuple[str | None, ...] = ()  # tail text after each child, within this element


@dataclass(frozen=True)
class TextSegment:
    text: str


@dataclass(frozen=True)
class AnchorRef:
    """A synchronization anchor: either declares a point or references one."""

    synch: str | None = None  # referenced point id, '#'-normalized
    declares: str | None = None  # xml:id introducing a point at this position

    @property
    def point(self) -> str | None:
        return self.declares if self.declares is not None else self.synch


@dataclass(frozen=True)
class Vocal:
    desc: str
    who: str | None = None


@dataclass(frozen=True)
class Kinesic:
    """A gesture or similar non-verbal event, inline or free-standing."""

    desc: str | None = None
    type: str | None = None
    who: str | None = None
    start: str | None = None
    end: str | None = None
    id: str | None = None
    id_generated: bool = field(default=True, compare=False)


@dataclass(frozen=True)
class Incident:
    """An incidental event in the situation, inline or free-standing."""

    desc: str | None = None
    type: str | None = None
    who: str | None = None
    start: str | None = None
    end: str | None = None
    id: str | None = None
    id_generated: bool = field(default=True, compare=False)


@dataclass(frozen=True)
class W:
    """A token of the transcription."""

    text: str
    id: str | None = None
    ana: str | None = None
    extras: tuple[OpaqueElement, ...] = ()


@dataclass(frozen=True)
class Pc:
    """A punctuation token."""

    text: str
    id: str | None = None


@dataclass(frozen=True)
class Seg:
    """A typed grouping of text fragments; may nest."""

    type: str | None = None
    subtype: str | None = None
    content: tuple["ContentItem", ...] = ()
    id: str | None = None


ContentItem = Union[TextSegment, AnchorRef, Vocal, Kinesic, Incident, Seg, W, Pc, OpaqueElement]


@dataclass(frozen=True)
class Utterance:
    id: str
    who: str | None = None
    content: tuple[ContentItem, ...] = ()
    id_generated: bool = field(default=True, compare=False)

    def plain_text(self) -> str:
        return content_text(self.content)


def content_text(items: tuple[ContentItem, ...]) -> str:
    """Concatenated transcription text of content items, markup dropped."""
    parts: list[str] = []
    for item in items:
        if isinstance(item, TextSegment):
            parts.append(item.text)
        elif isinstance(item, (W, Pc)):
            parts.append(item.text)
        elif isinstance(item, Seg):
            parts.append(content_text(item.content))
    return "".join(parts)


@dataclass(frozen=True)
class Span:
    """A from/to range over identified elements, pointing at an analysis."""

    from_: str
    to: str
    ana: str | None = None
    id: str | None = None
    text: str | None = None


@dataclass(frozen=True)
class SpanGroup:
    type: str | None = None
    spans: tuple[Span, ...] = ()


@dataclass(frozen=True)
class InflectedForm:
    id: str | None
    orth: str
    type: str | None = None
    grammar: tuple[tuple[str, str], ...] = ()  # (feature name, value) pairs


@dataclass(frozen=True)
class LexicalEntry:
    forms: tuple[InflectedForm, ...] = ()

    def form(self, form_id: str) -> InflectedForm | None:
        for f in self.forms:
            if f.id == form_id:
                return f
        return None


@dataclass(frozen=True)
class FeatureLib:
    """A feature library declaration (a labelled list of elementary features)."""

    features: tuple[Feature, ...] = ()
    label: str | None = None


@dataclass(frozen=True)
class TagLib:
    """A feature-value library declaration: the tags of a tagset."""

    tags: tuple[TagDecl, ...] = ()
    label: str | None = None


@dataclass(frozen=True)
class InlineStructure:
    """A free-standing feature structure addressable by id."""

    id: str
    fs: FeatureStructure


BackItem = Union[FeatureLib, TagLib, LexicalEntry, InlineStructure, SpanGroup, OpaqueElement]
BodyItem = Union[Utterance, Kinesic, Incident, AnchorRef, SpanGroup, TextSegment, OpaqueElement]


@dataclass(frozen=True)
class Recording:
    type: str | None = None
    equipment: str | None = None
    date: str | None = None
    broadcast: "Recording | None" = None
    extras: tuple[OpaqueElement, ...] = ()


@dataclass(frozen=True)
class AppInfo:
    ident: str
    version: str
    label: str | None = None
    targets: tuple[str, ...] = ()


@dataclass(frozen=True)
class Birth:
    when: str | None = None
    date_text: str | None = None
    place: str | None = None


@dataclass(frozen=True)
class LangKnown:
    tag: str | None = None
    level: str | None = None
    label: str | None = None


@dataclass(frozen=True)
class Person:
    id: str
    name: str | None = None
    name_is_abbr: bool = False
    sex: str | None = None
    age: str | None = None
    birth: Birth | None = None
    languages: tuple[LangKnown, ...] = ()
    lang_tags: str | None = None
    extras: tuple[OpaqueElement, ...] = ()


@dataclass(frozen=True)
class Change:
    when: str | None = None
    who: str | None = None
    text: str | None = None


@dataclass(frozen=True)
class Metadata:
    """Header metadata; the file description fields are mandatory."""

    title: str
    publication: str
    source: str
    recordings: tuple[Recording, ...] = ()
    applications: tuple[AppInfo, ...] = ()
    participants: tuple[Person, ...] = ()
    setting: str | None = None
    language_usage: OpaqueElement | None = None
    revisions: tuple[Change, ...] = ()
    file_extras: tuple[OpaqueElement, ...] = ()
    encoding_extras: tuple[OpaqueElement, ...] = ()
    profile_extras: tuple[OpaqueElement, ...] = ()
    header_extras: tuple[OpaqueElement, ...] = ()

    def participant(self, person_id: str) -> Person | None:
        for p in self.participants:
            if p.id == person_id:
                return p
        return None
