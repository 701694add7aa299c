"""Reader for the spoken-transcription markup subset.

Parsing maps markup onto the generic annotation model: utterances and
free-standing events become annotations, timelines and anchors become
reference points, feature libraries become tagset declarations. Unknown
elements are preserved opaquely so that serialisation round-trips. Parsing
is deliberately forgiving: defective but well-formed input loads, and the
defects surface through the validator.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace
from decimal import Decimal, InvalidOperation

from spokenkit.core.model import (
    MECH_COMPONENT,
    MECH_EVENT,
    PRIMARY,
    UNIT_SYMBOLIC,
    Annotation,
    ComponentRefs,
    DeclaredId,
    Document,
    EventInterval,
    Layer,
    Level,
    Qualifier,
    SourceRef,
    TimePoint,
    Timeline,
    Token,
    UnknownIdError,
)
from spokenkit.featstruct import (
    Binary,
    Feature,
    FeatureStructure,
    FSValue,
    Numeric,
    Str,
    Symbol,
    TagDecl,
    TagsetLibrary,
    build_library,
    strip_ref,
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

TEI_NS = "http://www.tei-c.org/ns/1.0"
XML_NS = "http://www.w3.org/XML/1998/namespace"
XML_ID = "{%s}id" % XML_NS

EVENTS_LAYER = "events"
TOKENS_LAYER = "tokens"
TRANSCRIPTION_LEVEL = "transcription"
TOKENS_LEVEL = "tokenization"
DEFAULT_SOURCE = "source1"
IMPLICIT_TIMELINE = "~implicit"

# Event features every parse-built transcription level admits.
BASE_EVENT_FEATURES = frozenset({"utterance", "incident", "kinesic", "vocal"})


class TeiParseError(ValueError):
    """The input cannot be loaded at all (ill-formed, or no file description)."""


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1] if isinstance(tag, str) and tag.startswith("{") else tag


def _norm_ref(value: str | None) -> str | None:
    return strip_ref(value) if value is not None else None


def _attr_name(name: str) -> str:
    if name == XML_ID:
        return "xml:id"
    if name.startswith("{%s}" % XML_NS):
        return "xml:" + name.rsplit("}", 1)[-1]
    return name


def _opaque(el: ET.Element) -> OpaqueElement:
    attrib = tuple(sorted((_attr_name(k), v) for k, v in el.attrib.items()))
    children = tuple(_opaque(child) for child in el)
    tails = tuple(child.tail for child in el)
    tag = _local(el.tag) if el.tag.startswith("{%s}" % TEI_NS) else el.tag
    return OpaqueElement(tag, attrib, el.text, children, tails)


def _text_of(el: ET.Element | None) -> str | None:
    if el is None:
        return None
    return "".join(el.itertext()).strip()


@dataclass
class _ParseContext:
    warnings: list[str] = field(default_factory=list)
    anchor_order: list[str] = field(default_factory=list)
    counters: dict[str, int] = field(default_factory=dict)
    declared: set[str] = field(default_factory=set)

    def warn(self, message: str) -> None:
        self.warnings.append(message)

    def fresh_id(self, prefix: str) -> str:
        n = self.counters.get(prefix, 0)
        while True:
            n += 1
            candidate = f"{prefix}{n}"
            if candidate not in self.declared:
                self.counters[prefix] = n
                return candidate


def parse_document(data: bytes | str) -> tuple[Document, list[str]]:
    """Parse markup into a Document, returning it with any parse warnings.

    Accepts input with or without the TEI namespace (a warning is recorded
    when it is absent). A missing file description is a hard error; every
    other defect is tolerated and left for the validator to report.
    """
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise TeiParseError(f"ill-formed markup: {exc}") from exc

    ctx = _ParseContext()
    if root.tag.startswith("{"):
        ns = root.tag[1:].split("}", 1)[0]
        if ns != TEI_NS:
            raise TeiParseError(f"unexpected root namespace {ns!r}")
    else:
        ctx.warn("document is not in the TEI namespace")
    if _local(root.tag) != "TEI":
        raise TeiParseError(f"expected a TEI root element, got {_local(root.tag)!r}")

    declared_ids: list[DeclaredId] = []
    for el in root.iter():
        raw = el.get(XML_ID)
        if raw is not None:
            declared_ids.append(DeclaredId(raw, _local(el.tag)))
            ctx.declared.add(raw)
            ctx.declared.add(strip_ref(raw))

    header_el = _child(root, "teiHeader")
    if header_el is None:
        raise TeiParseError("document has no teiHeader")
    metadata = _parse_header(header_el, ctx)

    timelines: list[Timeline] = []
    body_items: list = []
    back_items: list = []
    text_el = _child(root, "text")
    if text_el is not None:
        for child in text_el:
            local = _local(child.tag)
            if local == "timeline":
                timelines.append(_parse_timeline(child, ctx))
            elif local == "body":
                body_items = _parse_body(child, ctx, timelines)
            elif local == "back":
                back_items = _parse_back(child, ctx)
            else:
                body_items.append(_opaque(child))

    timelines = _absorb_anchor_points(timelines, ctx)
    doc = Document(
        metadata=metadata,
        sources=(SourceRef(DEFAULT_SOURCE, PRIMARY),),
        timelines=tuple(timelines),
        body=tuple(body_items),
        back=tuple(back_items),
        declared_ids=tuple(declared_ids),
    )
    doc = _attach_annotations(doc, ctx)
    return doc, ctx.warnings


def _child(el: ET.Element, name: str) -> ET.Element | None:
    for child in el:
        if _local(child.tag) == name:
            return child
    return None


def _children(el: ET.Element, name: str) -> list[ET.Element]:
    return [child for child in el if _local(child.tag) == name]


# ---------------------------------------------------------------- header

def _parse_header(header_el: ET.Element, ctx: _ParseContext) -> Metadata:
    file_desc = _child(header_el, "fileDesc")
    if file_desc is None:
        raise TeiParseError("teiHeader has no fileDesc")

    title = publication = source = ""
    recordings: list[Recording] = []
    file_extras: list[tuple[str, OpaqueElement]] = []

    for child in file_desc:
        local = _local(child.tag)
        if local == "titleStmt":
            for sub in child:
                if _local(sub.tag) == "title":
                    title = _text_of(sub) or ""
                else:
                    file_extras.append(("titleStmt", _opaque(sub)))
        elif local == "publicationStmt":
            for sub in child:
                if _local(sub.tag) == "p" and not publication:
                    publication = _text_of(sub) or ""
                else:
                    file_extras.append(("publicationStmt", _opaque(sub)))
        elif local == "sourceDesc":
            for sub in child:
                sublocal = _local(sub.tag)
                if sublocal == "p" and not source:
                    source = _text_of(sub) or ""
                elif sublocal == "recordingStmt":
                    recordings.extend(
                        _parse_recording(rec) for rec in _children(sub, "recording")
                    )
                else:
                    file_extras.append(("sourceDesc", _opaque(sub)))
        else:
            file_extras.append(("fileDesc", _opaque(child)))

    if not title:
        ctx.warn("fileDesc has no title")
    if not publication:
        ctx.warn("fileDesc has no publication statement text")
    if not source:
        ctx.warn("fileDesc has no source description text")

    applications: list[AppInfo] = []
    encoding_extras: list[tuple[str, OpaqueElement]] = []
    encoding = _child(header_el, "encodingDesc")
    if encoding is not None:
        for child in encoding:
            if _local(child.tag) == "appInfo":
                for app in child:
                    if _local(app.tag) == "application":
                        applications.append(_parse_application(app))
                    else:
                        encoding_extras.append(("encodingDesc", _opaque(app)))
            else:
                encoding_extras.append(("encodingDesc", _opaque(child)))

    participants: list[Person] = []
    setting: str | None = None
    language_usage: OpaqueElement | None = None
    profile_extras: list[tuple[str, OpaqueElement]] = []
    profile = _child(header_el, "profileDesc")
    if profile is not None:
        for child in profile:
            local = _local(child.tag)
            if local == "particDesc":
                for sub in child:
                    if _local(sub.tag) == "person":
                        participants.append(_parse_person(sub, ctx))
                    else:
                        profile_extras.append(("particDesc", _opaque(sub)))
            elif local == "settingDesc":
                setting = _text_of(child)
            elif local == "langUsage":
                language_usage = _opaque(child)
            else:
                profile_extras.append(("profileDesc", _opaque(child)))

    revisions: list[Change] = []
    header_extras: list[tuple[str, OpaqueElement]] = []
    for child in header_el:
        local = _local(child.tag)
        if local in ("fileDesc", "encodingDesc", "profileDesc"):
            continue
        if local == "revisionDesc":
            for change in child:
                if _local(change.tag) == "change":
                    revisions.append(
                        Change(change.get("when"), _norm_ref(change.get("who")), _text_of(change))
                    )
                else:
                    header_extras.append(("revisionDesc", _opaque(change)))
        else:
            header_extras.append(("teiHeader", _opaque(child)))

    return Metadata(
        title=title,
        publication=publication,
        source=source,
        recordings=tuple(recordings),
        applications=tuple(applications),
        participants=tuple(participants),
        setting=setting,
        language_usage=language_usage,
        revisions=tuple(revisions),
        file_extras=tuple(file_extras),
        encoding_extras=tuple(encoding_extras),
        profile_extras=tuple(profile_extras),
        header_extras=tuple(header_extras),
    )


def _parse_recording(rec_el: ET.Element) -> Recording:
    equipment = date = None
    broadcast = None
    extras: list[OpaqueElement] = []
    for child in rec_el:
        local = _local(child.tag)
        if local == "equipment":
            p = _child(child, "p")
            equipment = _text_of(p) if p is not None else _text_of(child)
        elif local == "date":
            date = _text_of(child)
        elif local == "broadcast":
            inner = _child(child, "recording")
            if inner is not None:
                broadcast = _parse_recording(inner)
        else:
            extras.append(_opaque(child))
    return Recording(rec_el.get("type"), equipment, date, broadcast, tuple(extras))


def _parse_application(app_el: ET.Element) -> AppInfo:
    label = _text_of(_child(app_el, "label"))
    targets = tuple(
        _norm_ref(ptr.get("target")) or "" for ptr in _children(app_el, "ptr") if ptr.get("target")
    )
    return AppInfo(app_el.get("ident", ""), app_el.get("version", ""), label, targets)


def _parse_person(person_el: ET.Element, ctx: _ParseContext) -> Person:
    name = None
    name_is_abbr = False
    birth = None
    languages: list[LangKnown] = []
    lang_tags = None
    extras: list[OpaqueElement] = []
    for child in person_el:
        local = _local(child.tag)
        if local == "persName":
            abbr = _child(child, "abbr")
            if abbr is not None:
                name = _text_of(abbr)
                name_is_abbr = True
            else:
                name = _text_of(child)
        elif local == "birth":
            date_text = _text_of(_child(child, "date"))
            place = None
            for sub in _children(child, "name"):
                if sub.get("type") == "place":
                    place = _text_of(sub)
            birth = Birth(child.get("when"), date_text, place)
        elif local == "langKnowledge":
            lang_tags = child.get("tags")
            for known in _children(child, "langKnown"):
                languages.append(
                    LangKnown(known.get("tag"), known.get("level"), _text_of(known))
                )
        else:
            extras.append(_opaque(child))
    person_id = person_el.get(XML_ID)
    if person_id is None:
        person_id = ctx.fresh_id("person")
    return Person(
        id=strip_ref(person_id),
        name=name,
        name_is_abbr=name_is_abbr,
        sex=person_el.get("sex"),
        age=person_el.get("age"),
        birth=birth,
        languages=tuple(languages),
        lang_tags=lang_tags,
        extras=tuple(extras),
    )


# ---------------------------------------------------------------- text

def _parse_timeline(tl_el: ET.Element, ctx: _ParseContext) -> Timeline:
    unit = tl_el.get("unit", UNIT_SYMBOLIC)
    if unit not in ("ms", "s", UNIT_SYMBOLIC):
        ctx.warn(f"timeline unit {unit!r} is not recognised; treating as symbolic")
        unit = UNIT_SYMBOLIC
    points: list[TimePoint] = []
    seen: set[str] = set()
    for when in _children(tl_el, "when"):
        pid = when.get(XML_ID)
        if pid is None:
            ctx.warn("timeline point without xml:id ignored")
            continue
        pid = strip_ref(pid)
        if pid in seen:
            ctx.warn(f"duplicate timeline point {pid!r}; keeping the first")
            continue
        seen.add(pid)
        offset = None
        raw_offset = when.get("absolute")
        if raw_offset is not None:
            try:
                offset = Decimal(raw_offset)
            except InvalidOperation:
                ctx.warn(f"point {pid!r} has a non-numeric offset {raw_offset!r}")
        points.append(TimePoint(pid, len(points), offset))
    tl_id = tl_el.get(XML_ID)
    declared = tl_id is not None
    if tl_id is None:
        tl_id = ctx.fresh_id("timeline")
    return Timeline(strip_ref(tl_id), unit, tuple(points), id_declared=declared)


def _absorb_anchor_points(timelines: list[Timeline], ctx: _ParseContext) -> list[Timeline]:
    """Append anchor-declared point ids that no timeline covers.

    Documents without an explicit timeline get an implicit one in anchor
    document order; it is never serialised as a timeline element.
    """
    known = {p.id for tl in timelines for p in tl.points}
    extra: list[str] = []
    for pid in ctx.anchor_order:
        if pid not in known:
            known.add(pid)
            extra.append(pid)
    if not extra:
        return timelines
    if timelines:
        base = timelines[0]
        offset = len(base.points)
        new_points = base.points + tuple(
            TimePoint(pid, offset + n, anchor_declared=True) for n, pid in enumerate(extra)
        )
        return [replace(base, points=new_points)] + timelines[1:]
    points = tuple(TimePoint(pid, n, anchor_declared=True) for n, pid in enumerate(extra))
    return [Timeline(IMPLICIT_TIMELINE, UNIT_SYMBOLIC, points, implicit=True)]


def _parse_body(body_el: ET.Element, ctx: _ParseContext, timelines: list[Timeline]) -> list:
    items: list = []
    if body_el.text and body_el.text.strip():
        items.append(TextSegment(body_el.text))
    for child in body_el:
        local = _local(child.tag)
        if local == "u":
            items.append(_parse_utterance(child, ctx))
        elif local == "kinesic":
            items.append(_parse_event(child, Kinesic, "kinesic", ctx))
        elif local == "incident":
            items.append(_parse_event(child, Incident, "incident", ctx))
        elif local == "anchor":
            items.append(_parse_anchor(child, ctx))
        elif local == "spanGrp":
            items.append(_parse_span_group(child, ctx))
        elif local == "timeline":
            timelines.append(_parse_timeline(child, ctx))
        else:
            items.append(_opaque(child))
        if child.tail and child.tail.strip():
            items.append(TextSegment(child.tail))
    return items


def _parse_anchor(el: ET.Element, ctx: _ParseContext) -> AnchorRef:
    declares = el.get(XML_ID)
    if declares is not None:
        declares = strip_ref(declares)
        ctx.anchor_order.append(declares)
    return AnchorRef(synch=_norm_ref(el.get("synch")), declares=declares)


def _parse_event(el: ET.Element, cls, prefix: str, ctx: _ParseContext):
    desc = _text_of(_child(el, "desc"))
    explicit = el.get(XML_ID)
    event_id = strip_ref(explicit) if explicit is not None else ctx.fresh_id(prefix)
    return cls(
        desc=desc,
        type=el.get("type"),
        who=_norm_ref(el.get("who")),
        start=_norm_ref(el.get("start")),
        end=_norm_ref(el.get("end")),
        id=event_id,
        id_generated=explicit is None,
    )


def _parse_utterance(u_el: ET.Element, ctx: _ParseContext) -> Utterance:
    explicit = u_el.get(XML_ID)
    utt_id = strip_ref(explicit) if explicit is not None else ctx.fresh_id("u")
    return Utterance(
        id=utt_id,
        who=_norm_ref(u_el.get("who")),
        content=tuple(_parse_mixed(u_el, ctx)),
        id_generated=explicit is None,
    )


def _parse_mixed(el: ET.Element, ctx: _ParseContext) -> list:
    items: list = []
    if el.text:
        items.append(TextSegment(el.text))
    for child in el:
        local = _local(child.tag)
        if local == "anchor":
            items.append(_parse_anchor(child, ctx))
        elif local == "vocal":
            items.append(
                Vocal(desc=_text_of(_child(child, "desc")) or "", who=_norm_ref(child.get("who")))
            )
        elif local == "kinesic":
            items.append(_parse_event(child, Kinesic, "kinesic", ctx))
        elif local == "incident":
            items.append(_parse_event(child, Incident, "incident", ctx))
        elif local == "seg":
            seg_id = child.get(XML_ID)
            items.append(
                Seg(
                    type=child.get("type"),
                    subtype=child.get("subtype"),
                    content=tuple(_parse_mixed(child, ctx)),
                    id=strip_ref(seg_id) if seg_id else None,
                )
            )
        elif local == "w":
            items.append(_parse_w(child, ctx))
        elif local == "pc":
            pc_id = child.get(XML_ID)
            items.append(Pc("".join(child.itertext()), strip_ref(pc_id) if pc_id else None))
        else:
            items.append(_opaque(child))
        if child.tail:
            items.append(TextSegment(child.tail))
    return items


def _parse_w(w_el: ET.Element, ctx: _ParseContext) -> W:
    extras = []
    for child in w_el:
        # Anchors may not split tokens; anything inside a token is preserved
        # opaquely and reported.
        ctx.warn(f"element {_local(child.tag)!r} inside w is not supported; preserved opaquely")
        extras.append(_opaque(child))
    w_id = w_el.get(XML_ID)
    return W(
        text="".join(w_el.itertext()),
        id=strip_ref(w_id) if w_id else None,
        ana=_norm_ref(w_el.get("ana")),
        extras=tuple(extras),
    )


def _parse_span_group(el: ET.Element, ctx: _ParseContext) -> SpanGroup:
    spans: list[Span] = []
    for child in _children(el, "span"):
        span_id = child.get(XML_ID)
        text = _text_of(child)
        spans.append(
            Span(
                from_=_norm_ref(child.get("from")) or "",
                to=_norm_ref(child.get("to")) or "",
                ana=_norm_ref(child.get("ana")),
                id=strip_ref(span_id) if span_id else None,
                text=text or None,
            )
        )
    return SpanGroup(el.get("type"), tuple(spans))


# ---------------------------------------------------------------- back matter

def _parse_back(back_el: ET.Element, ctx: _ParseContext) -> list:
    items: list = []
    for child in back_el:
        local = _local(child.tag)
        if local == "fLib":
            items.append(_parse_flib(child, ctx))
        elif local == "fvLib":
            items.append(_parse_fvlib(child, ctx))
        elif local == "entry":
            items.append(_parse_entry(child))
        elif local == "spanGrp":
            items.append(_parse_span_group(child, ctx))
        elif local == "fs":
            inline = _parse_inline_fs(child, ctx)
            if inline is not None:
                items.append(inline)
        else:
            items.append(_opaque(child))
    return items


def _parse_flib(el: ET.Element, ctx: _ParseContext) -> FeatureLib:
    features: list[Feature] = []
    for f_el in _children(el, "f"):
        fid = f_el.get(XML_ID)
        if fid is None:
            # The identifier occasionally sits on the value element instead.
            for sub in f_el:
                fid = sub.get(XML_ID)
                if fid is not None:
                    break
        if fid is not None and fid != strip_ref(fid):
            ctx.warn(f"feature identifier {fid!r} contains '#'; normalised to {strip_ref(fid)!r}")
        features.append(
            Feature(
                name=f_el.get("name", ""),
                value=_parse_fsvalue(f_el, ctx),
                id=strip_ref(fid) if fid else None,
            )
        )
    return FeatureLib(tuple(features), el.get("n"))


def _parse_fvlib(el: ET.Element, ctx: _ParseContext) -> TagLib:
    tags: list[TagDecl] = []
    for fs_el in _children(el, "fs"):
        tag_id = fs_el.get(XML_ID)
        feats = fs_el.get("feats")
        if tag_id is None or feats is None:
            ctx.warn("fvLib entry without xml:id and feats ignored")
            continue
        tags.append(TagDecl(strip_ref(tag_id), tuple(strip_ref(r) for r in feats.split())))
    return TagLib(tuple(tags), el.get("n"))


def _parse_inline_fs(el: ET.Element, ctx: _ParseContext) -> InlineStructure | None:
    fs_id = el.get(XML_ID)
    if fs_id is None:
        ctx.warn("free-standing fs without xml:id ignored")
        return None
    return InlineStructure(strip_ref(fs_id), _parse_fs(el, ctx))


def _parse_fs(el: ET.Element, ctx: _ParseContext) -> FeatureStructure:
    features: dict[str, FSValue] = {}
    for f_el in _children(el, "f"):
        name = f_el.get("name", "")
        if not name:
            ctx.warn("feature without a name ignored")
            continue
        if name in features:
            ctx.warn(f"feature {name!r} bound twice in one structure; keeping the first")
            continue
        features[name] = _parse_fsvalue(f_el, ctx)
    return FeatureStructure(features, type=el.get("type"))


def _parse_fsvalue(f_el: ET.Element, ctx: _ParseContext) -> FSValue:
    for child in f_el:
        local = _local(child.tag)
        if local == "binary":
            return Binary(child.get("value", "false").lower() == "true")
        if local == "symbol":
            name = child.get("value") or (_text_of(child) or "")
            return Symbol(name) if name else Str("")
        if local == "numeric":
            raw = child.get("value") or (_text_of(child) or "0")
            try:
                return Numeric(int(raw)) if re.fullmatch(r"-?\d+", raw) else Numeric(float(raw))
            except ValueError:
                ctx.warn(f"non-numeric value {raw!r}; kept as string")
                return Str(raw)
        if local == "string":
            return Str(_text_of(child) or "")
        if local == "fs":
            return _parse_fs(child, ctx)
    return Str(_text_of(f_el) or "")


def _parse_entry(el: ET.Element) -> LexicalEntry:
    forms: list[InflectedForm] = []
    for form_el in _children(el, "form"):
        orth = _text_of(_child(form_el, "orth")) or ""
        grammar: list[tuple[str, str]] = []
        gram = _child(form_el, "gramGrp")
        if gram is not None:
            for feat in gram:
                grammar.append((_local(feat.tag), _text_of(feat) or ""))
        form_id = form_el.get(XML_ID)
        forms.append(
            InflectedForm(
                id=strip_ref(form_id) if form_id else None,
                orth=orth,
                type=form_el.get("type"),
                grammar=tuple(grammar),
            )
        )
    return LexicalEntry(tuple(forms))


# ---------------------------------------------------------------- annotations

def _event_feature(kind: str, event_type: str | None) -> str:
    """The qualifier feature of a free-standing timed event.

    An informative @type refines the category; 'nv' only marks the event as
    non-verbal and is not a category of its own.
    """
    if event_type and event_type != "nv":
        return event_type
    return kind


def _attach_annotations(doc: Document, ctx: _ParseContext) -> Document:
    annotations: list[Annotation] = []
    event_features: set[str] = set()
    tokens: list[Token] = []

    def collect_tokens(items) -> None:
        for item in items:
            if isinstance(item, W) and item.id:
                tokens.append(
                    Token(
                        id=item.id,
                        source=DEFAULT_SOURCE,
                        range=ComponentRefs((item.id,)),
                        qualifiers=(Qualifier("token", item.text),),
                        layer=TOKENS_LAYER,
                        surface=item.text,
                    )
                )
            elif isinstance(item, Seg):
                collect_tokens(item.content)

    for item in doc.body:
        if isinstance(item, Utterance):
            annotations.append(
                Annotation(
                    id=item.id,
                    source=DEFAULT_SOURCE,
                    range=None,
                    qualifiers=(Qualifier("utterance", item.plain_text()),),
                    layer=EVENTS_LAYER,
                    who=item.who,
                )
            )
            event_features.add("utterance")
            collect_tokens(item.content)
        elif isinstance(item, (Kinesic, Incident)):
            kind = "kinesic" if isinstance(item, Kinesic) else "incident"
            feature = _event_feature(kind, item.type)
            annotations.append(
                Annotation(
                    id=item.id or ctx.fresh_id(kind),
                    source=DEFAULT_SOURCE,
                    range=None,
                    qualifiers=(Qualifier(feature, item.desc or ""),),
                    layer=EVENTS_LAYER,
                    who=item.who,
                )
            )
            event_features.add(feature)

    layers: list[Layer] = []
    levels: list[Level] = []
    if annotations:
        layers.append(Layer(EVENTS_LAYER, "transcription events", TRANSCRIPTION_LEVEL))
        levels.append(
            Level(
                TRANSCRIPTION_LEVEL,
                sources=frozenset({DEFAULT_SOURCE}),
                ranging_mechanism=MECH_EVENT,
                category_selection=frozenset(BASE_EVENT_FEATURES | event_features),
            )
        )
    if tokens:
        layers.append(Layer(TOKENS_LAYER, "surface tokens", TOKENS_LEVEL))
        levels.append(
            Level(
                TOKENS_LEVEL,
                sources=frozenset({DEFAULT_SOURCE}),
                ranging_mechanism=MECH_COMPONENT,
                category_selection=frozenset({"token"}),
            )
        )
    return replace(
        doc,
        annotations=tuple(annotations) + tuple(tokens),
        layers=tuple(layers),
        levels=tuple(levels),
    )


# ---------------------------------------------------------------- anchors

@dataclass(frozen=True)
class AnchorFinding:
    """A problem met while resolving anchors; the event stays unresolved."""

    location: str
    ref: str | None
    message: str


def resolve_anchors(doc: Document) -> tuple[Document, list[AnchorFinding]]:
    """Compute event intervals from anchors and start/end attributes.

    An utterance spans [first anchor, last anchor); free-standing events use
    their start/end references. Dangling point references are findings, and
    the affected event keeps no interval.
    """
    findings: list[AnchorFinding] = []
    point_home: dict[str, str] = {}
    for tl in doc.timelines:
        for p in tl.points:
            point_home.setdefault(p.id, tl.id)

    intervals: dict[str, EventInterval] = {}

    def lookup(event_id: str, pid: str | None) -> str | None:
        if pid is None:
            return None
        if pid not in point_home:
            findings.append(
                AnchorFinding(event_id, pid, f"{event_id!r} references unknown point {pid!r}")
            )
            return None
        return pid

    for item in doc.body:
        if isinstance(item, Utterance):
            refs = [
                anchor.point
                for anchor in _iter_anchors(item.content)
                if anchor.point is not None
            ]
            resolved = [pid for pid in (lookup(item.id, pid) for pid in refs) if pid is not None]
            if resolved:
                first, last = resolved[0], resolved[-1]
                if point_home[first] == point_home[last]:
                    intervals[item.id] = EventInterval(first, last, point_home[first])
                else:
                    findings.append(
                        AnchorFinding(
                            item.id, None, f"{item.id!r} anchors span different timelines"
                        )
                    )
        elif isinstance(item, (Kinesic, Incident)) and item.id:
            start = lookup(item.id, item.start)
            end = lookup(item.id, item.end)
            if start is not None and end is not None:
                if point_home[start] == point_home[end]:
                    intervals[item.id] = EventInterval(start, end, point_home[start])
                else:
                    findings.append(
                        AnchorFinding(
                            item.id, None, f"{item.id!r} start and end are on different timelines"
                        )
                    )
            elif start is not None:
                intervals[item.id] = EventInterval(start, start, point_home[start])

    if not intervals:
        return doc, findings
    annotations = tuple(
        replace(ann, range=intervals[ann.id]) if ann.id in intervals and ann.range is None else ann
        for ann in doc.annotations
    )
    return replace(doc, annotations=annotations), findings


def _iter_anchors(items):
    for item in items:
        if isinstance(item, AnchorRef):
            yield item
        elif isinstance(item, Seg):
            yield from _iter_anchors(item.content)


# ---------------------------------------------------------------- analyses

def build_document_library(doc: Document) -> TagsetLibrary:
    """Build the tagset library from the document's own declarations."""
    features: list[Feature] = []
    tags: list[TagDecl] = []
    for item in doc.back:
        if isinstance(item, FeatureLib):
            features.extend(item.features)
        elif isinstance(item, TagLib):
            tags.extend(item.tags)
    return build_library(features, tags)


def inline_structures(doc: Document) -> dict[str, FeatureStructure]:
    return {item.id: item.fs for item in doc.back if isinstance(item, InlineStructure)}


def resolve_ana(
    doc: Document, lib: TagsetLibrary | None, ref: str
) -> FeatureStructure:
    """Resolve an analysis reference to its feature structure.

    Tag references resolve through the library (built from the document when
    not supplied); references to free-standing structures resolve directly.
    """
    if lib is None:
        lib = build_document_library(doc)
    target = strip_ref(ref)
    if target in lib.tag_lib:
        return lib.tag_lib[target].expanded
    inline = inline_structures(doc)
    if target in inline:
        return inline[target]
    raise UnknownIdError("analysis target", ref)
