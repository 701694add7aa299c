"""Canonical serialiser for the spoken-transcription markup subset.

Output form is fixed: UTF-8, two-space indentation for structural elements,
alphabetical attribute order, '&' and '<' (and '>') escaped, references
written with a leading '#'. Mixed content inside utterances is emitted
verbatim, so parsing the output reproduces the document structurally.
"""

from __future__ import annotations

from decimal import Decimal

from spokenkit.core.model import Document, EventInterval, Timeline
from spokenkit.featstruct import (
    Binary,
    Feature,
    FeatureStructure,
    FSValue,
    Numeric,
    Str,
    Symbol,
)
from spokenkit.tei.model import (
    AnchorRef,
    AppInfo,
    FeatureLib,
    Incident,
    InflectedForm,
    InlineStructure,
    Kinesic,
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


class TeiSerializeError(ValueError):
    """The document cannot be serialised as requested."""


def _esc_text(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _esc_attr(value: str) -> str:
    return (
        value.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def _attrs(pairs: dict[str, str | None]) -> str:
    parts = []
    for name in sorted(pairs):
        value = pairs[name]
        if value is not None:
            parts.append(f' {name}="{_esc_attr(value)}"')
    return "".join(parts)


def _ref(value: str | None) -> str | None:
    return f"#{value}" if value is not None else None


class _Writer:
    def __init__(self) -> None:
        self.lines: list[str] = []

    def line(self, depth: int, text: str) -> None:
        self.lines.append("  " * depth + text)

    def render(self) -> bytes:
        return ("\n".join(self.lines) + "\n").encode("utf-8")


def serialize_document(doc: Document, materialize_timeline: bool = False) -> bytes:
    """Serialise a document to canonical markup bytes.

    Synthetic timeline points (from implicit sequencing) are refused unless
    ``materialize_timeline`` is set; materialising writes every point as an
    explicit timeline entry and rewrites declaring anchors into references.
    Documents without body content but with event-ranged annotations get a
    body generated from the annotations.
    """
    if doc.metadata is None:
        raise TeiSerializeError("document has no header metadata; a file description is mandatory")
    has_synthetic = any(p.synthetic for tl in doc.timelines for p in tl.points)
    if has_synthetic and not materialize_timeline:
        raise TeiSerializeError(
            "document contains synthetic timeline points; serialise with "
            "materialize_timeline=True (--materialize-timeline) to write them out"
        )

    w = _Writer()
    w.line(0, '<?xml version="1.0" encoding="UTF-8"?>')
    w.line(0, f'<TEI xmlns="{TEI_NS}">')
    _write_header(w, 1, doc.metadata)
    w.line(1, "<text>")
    for timeline in doc.timelines:
        _write_timeline(w, 2, timeline, materialize_timeline)
    body = doc.body if doc.body else tuple(_materialized_body(doc))
    w.line(2, "<body>")
    for item in body:
        _write_body_item(w, 3, item, materialize_timeline)
    w.line(2, "</body>")
    if doc.back:
        w.line(2, "<back>")
        for item in doc.back:
            _write_back_item(w, 3, item)
        w.line(2, "</back>")
    w.line(1, "</text>")
    w.line(0, "</TEI>")
    return w.render()


# ---------------------------------------------------------------- header

def _write_header(w: _Writer, depth: int, md: Metadata) -> None:
    w.line(depth, "<teiHeader>")
    w.line(depth + 1, "<fileDesc>")
    w.line(depth + 2, "<titleStmt>")
    w.line(depth + 3, _leaf("title", {}, md.title))
    _write_extras(w, depth + 3, md.file_extras, "titleStmt")
    w.line(depth + 2, "</titleStmt>")
    w.line(depth + 2, "<publicationStmt>")
    w.line(depth + 3, _leaf("p", {}, md.publication))
    _write_extras(w, depth + 3, md.file_extras, "publicationStmt")
    w.line(depth + 2, "</publicationStmt>")
    w.line(depth + 2, "<sourceDesc>")
    w.line(depth + 3, _leaf("p", {}, md.source))
    if md.recordings:
        w.line(depth + 3, "<recordingStmt>")
        for rec in md.recordings:
            _write_recording(w, depth + 4, rec)
        w.line(depth + 3, "</recordingStmt>")
    _write_extras(w, depth + 3, md.file_extras, "sourceDesc")
    w.line(depth + 2, "</sourceDesc>")
    _write_extras(w, depth + 2, md.file_extras, "fileDesc")
    w.line(depth + 1, "</fileDesc>")

    if md.applications or md.encoding_extras:
        w.line(depth + 1, "<encodingDesc>")
        if md.applications:
            w.line(depth + 2, "<appInfo>")
            for app in md.applications:
                _write_application(w, depth + 3, app)
            w.line(depth + 2, "</appInfo>")
        _write_extras(w, depth + 2, md.encoding_extras, "encodingDesc")
        w.line(depth + 1, "</encodingDesc>")

    partic_extras = [e for slot, e in md.profile_extras if slot == "particDesc"]
    if md.participants or md.setting is not None or md.language_usage or md.profile_extras:
        w.line(depth + 1, "<profileDesc>")
        if md.participants or partic_extras:
            w.line(depth + 2, "<particDesc>")
            for person in md.participants:
                _write_person(w, depth + 3, person)
            _write_extras(w, depth + 3, md.profile_extras, "particDesc")
            w.line(depth + 2, "</particDesc>")
        if md.setting is not None:
            w.line(depth + 2, "<settingDesc>")
            w.line(depth + 3, _leaf("p", {}, md.setting))
            w.line(depth + 2, "</settingDesc>")
        if md.language_usage is not None:
            w.line(depth + 2, _render_opaque(md.language_usage))
        _write_extras(w, depth + 2, md.profile_extras, "profileDesc")
        w.line(depth + 1, "</profileDesc>")

    revision_extras = [e for slot, e in md.header_extras if slot == "revisionDesc"]
    if md.revisions or revision_extras:
        w.line(depth + 1, "<revisionDesc>")
        for change in md.revisions:
            w.line(
                depth + 2,
                _leaf("change", {"when": change.when, "who": _ref(change.who)}, change.text or ""),
            )
        for extra in revision_extras:
            w.line(depth + 2, _render_opaque(extra))
        w.line(depth + 1, "</revisionDesc>")
    _write_extras(w, depth + 1, md.header_extras, "teiHeader")
    w.line(depth, "</teiHeader>")


def _write_extras(w: _Writer, depth: int, extras, slot: str) -> None:
    for where, element in extras:
        if where == slot:
            w.line(depth, _render_opaque(element))


def _leaf(tag: str, attrs: dict[str, str | None], text: str) -> str:
    rendered = _attrs(attrs)
    if text:
        return f"<{tag}{rendered}>{_esc_text(text)}</{tag}>"
    return f"<{tag}{rendered}/>"


def _write_recording(w: _Writer, depth: int, rec: Recording) -> None:
    w.line(depth, f"<recording{_attrs({'type': rec.type})}>")
    if rec.equipment is not None:
        w.line(depth + 1, "<equipment>")
        w.line(depth + 2, _leaf("p", {}, rec.equipment))
        w.line(depth + 1, "</equipment>")
    if rec.date is not None:
        w.line(depth + 1, _leaf("date", {}, rec.date))
    if rec.broadcast is not None:
        w.line(depth + 1, "<broadcast>")
        _write_recording(w, depth + 2, rec.broadcast)
        w.line(depth + 1, "</broadcast>")
    for extra in rec.extras:
        w.line(depth + 1, _render_opaque(extra))
    w.line(depth, "</recording>")


def _write_application(w: _Writer, depth: int, app: AppInfo) -> None:
    attrs = {"ident": app.ident, "version": app.version}
    if app.label is None and not app.targets:
        w.line(depth, f"<application{_attrs(attrs)}/>")
        return
    w.line(depth, f"<application{_attrs(attrs)}>")
    if app.label is not None:
        w.line(depth + 1, _leaf("label", {}, app.label))
    for target in app.targets:
        w.line(depth + 1, f"<ptr{_attrs({'target': _ref(target)})}/>")
    w.line(depth, "</application>")


def _write_person(w: _Writer, depth: int, person: Person) -> None:
    attrs = {"age": person.age, "sex": person.sex, "xml:id": person.id}
    w.line(depth, f"<person{_attrs(attrs)}>")
    if person.name is not None:
        if person.name_is_abbr:
            w.line(depth + 1, f"<persName><abbr>{_esc_text(person.name)}</abbr></persName>")
        else:
            w.line(depth + 1, _leaf("persName", {}, person.name))
    if person.birth is not None:
        birth = person.birth
        if birth.date_text is None and birth.place is None:
            w.line(depth + 1, f"<birth{_attrs({'when': birth.when})}/>")
        else:
            w.line(depth + 1, f"<birth{_attrs({'when': birth.when})}>")
            if birth.date_text is not None:
                w.line(depth + 2, _leaf("date", {}, birth.date_text))
            if birth.place is not None:
                w.line(depth + 2, _leaf("name", {"type": "place"}, birth.place))
            w.line(depth + 1, "</birth>")
    if person.languages or person.lang_tags is not None:
        w.line(depth + 1, f"<langKnowledge{_attrs({'tags': person.lang_tags})}>")
        for lang in person.languages:
            w.line(
                depth + 2,
                _leaf("langKnown", {"level": lang.level, "tag": lang.tag}, lang.label or ""),
            )
        w.line(depth + 1, "</langKnowledge>")
    for extra in person.extras:
        w.line(depth + 1, _render_opaque(extra))
    w.line(depth, "</person>")


# ---------------------------------------------------------------- timeline and body

def _write_timeline(w: _Writer, depth: int, timeline: Timeline, materialize: bool) -> None:
    if materialize:
        points = list(timeline.points)
    else:
        points = [p for p in timeline.points if not p.anchor_declared and not p.synthetic]
        if timeline.implicit or not points:
            return
    attrs: dict[str, str | None] = {"unit": timeline.unit}
    if timeline.id_declared:
        attrs["xml:id"] = timeline.id
    w.line(depth, f"<timeline{_attrs(attrs)}>")
    for point in points:
        point_attrs: dict[str, str | None] = {"xml:id": point.id}
        if point.offset is not None:
            point_attrs["absolute"] = _number(point.offset)
        w.line(depth + 1, f"<when{_attrs(point_attrs)}/>")
    w.line(depth, "</timeline>")


def _number(value) -> str:
    if isinstance(value, Decimal):
        return str(value)
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


def _materialized_body(doc: Document):
    """Body items generated from event-ranged annotations (converted input).

    The element kind follows the layer's tier category when one is declared;
    qualifier features redirected to registry pids then still serialise as
    the right element.
    """
    layer_categories = {layer.id: layer.category for layer in doc.layers}
    for ann in doc.annotations:
        if not isinstance(ann.range, EventInterval) or not ann.qualifiers:
            continue
        feature = layer_categories.get(ann.layer) or ann.qualifiers[0].feature_key()
        text = ann.qualifiers[0].value_key()
        start, end = ann.range.start, ann.range.end
        if feature in ("utterance", "verbal"):
            yield Utterance(
                id=ann.id,
                who=ann.who,
                content=(
                    AnchorRef(synch=start),
                    TextSegment(text),
                    AnchorRef(synch=end),
                ),
                id_generated=False,
            )
        elif feature == "incident":
            yield Incident(
                desc=text, who=ann.who, start=start, end=end, id=ann.id, id_generated=False
            )
        elif feature == "kinesic":
            yield Kinesic(
                desc=text, who=ann.who, start=start, end=end, id=ann.id, id_generated=False
            )
        else:
            yield Kinesic(
                desc=text,
                type=feature,
                who=ann.who,
                start=start,
                end=end,
                id=ann.id,
                id_generated=False,
            )


def _write_body_item(w: _Writer, depth: int, item, materialize: bool) -> None:
    if isinstance(item, Utterance):
        attrs = {"who": _ref(item.who)}
        if not item.id_generated:
            attrs["xml:id"] = item.id
        content = "".join(_render_content(part, materialize) for part in item.content)
        w.line(depth, f"<u{_attrs(attrs)}>{content}</u>")
    elif isinstance(item, (Kinesic, Incident)):
        tag = "kinesic" if isinstance(item, Kinesic) else "incident"
        attrs = {
            "end": _ref(item.end),
            "start": _ref(item.start),
            "type": item.type,
            "who": _ref(item.who),
        }
        if not item.id_generated:
            attrs["xml:id"] = item.id
        if item.desc is None:
            w.line(depth, f"<{tag}{_attrs(attrs)}/>")
        else:
            w.line(depth, f"<{tag}{_attrs(attrs)}>")
            w.line(depth + 1, _leaf("desc", {}, item.desc))
            w.line(depth, f"</{tag}>")
    elif isinstance(item, AnchorRef):
        w.line(depth, _render_anchor(item, materialize))
    elif isinstance(item, SpanGroup):
        _write_span_group(w, depth, item)
    elif isinstance(item, TextSegment):
        w.line(depth, _esc_text(item.text))
    elif isinstance(item, OpaqueElement):
        w.line(depth, _render_opaque(item))
    else:
        raise TeiSerializeError(f"cannot serialise body item {item!r}")


def _render_anchor(anchor: AnchorRef, materialize: bool) -> str:
    if anchor.declares is not None and not materialize:
        return f"<anchor{_attrs({'xml:id': anchor.declares})}/>"
    return f"<anchor{_attrs({'synch': _ref(anchor.point)})}/>"


def _render_content(item, materialize: bool) -> str:
    if isinstance(item, TextSegment):
        return _esc_text(item.text)
    if isinstance(item, AnchorRef):
        return _render_anchor(item, materialize)
    if isinstance(item, Vocal):
        return f"<vocal{_attrs({'who': _ref(item.who)})}><desc>{_esc_text(item.desc)}</desc></vocal>"
    if isinstance(item, (Kinesic, Incident)):
        tag = "kinesic" if isinstance(item, Kinesic) else "incident"
        attrs = {
            "end": _ref(item.end),
            "start": _ref(item.start),
            "type": item.type,
            "who": _ref(item.who),
        }
        if not item.id_generated:
            attrs["xml:id"] = item.id
        if item.desc is None:
            return f"<{tag}{_attrs(attrs)}/>"
        return f"<{tag}{_attrs(attrs)}><desc>{_esc_text(item.desc)}</desc></{tag}>"
    if isinstance(item, Seg):
        attrs = {"subtype": item.subtype, "type": item.type, "xml:id": item.id}
        inner = "".join(_render_content(part, materialize) for part in item.content)
        return f"<seg{_attrs(attrs)}>{inner}</seg>"
    if isinstance(item, W):
        attrs = {"ana": _ref(item.ana), "xml:id": item.id}
        extras = "".join(_render_opaque(extra) for extra in item.extras)
        return f"<w{_attrs(attrs)}>{_esc_text(item.text)}{extras}</w>"
    if isinstance(item, Pc):
        return f"<pc{_attrs({'xml:id': item.id})}>{_esc_text(item.text)}</pc>"
    if isinstance(item, OpaqueElement):
        return _render_opaque(item)
    raise TeiSerializeError(f"cannot serialise content item {item!r}")


def _write_span_group(w: _Writer, depth: int, group: SpanGroup) -> None:
    w.line(depth, f"<spanGrp{_attrs({'type': group.type})}>")
    for span in group.spans:
        _write_span(w, depth + 1, span)
    w.line(depth, "</spanGrp>")


def _write_span(w: _Writer, depth: int, span: Span) -> None:
    attrs = {
        "ana": _ref(span.ana),
        "from": _ref(span.from_),
        "to": _ref(span.to),
        "xml:id": span.id,
    }
    if span.text:
        w.line(depth, f"<span{_attrs(attrs)}>{_esc_text(span.text)}</span>")
    else:
        w.line(depth, f"<span{_attrs(attrs)}/>")


# ---------------------------------------------------------------- back matter

def _write_back_item(w: _Writer, depth: int, item) -> None:
    if isinstance(item, FeatureLib):
        w.line(depth, f"<fLib{_attrs({'n': item.label})}>")
        for feature in item.features:
            _write_feature(w, depth + 1, feature)
        w.line(depth, "</fLib>")
    elif isinstance(item, TagLib):
        w.line(depth, f"<fvLib{_attrs({'n': item.label})}>")
        for tag in item.tags:
            feats = " ".join(f"#{ref}" for ref in tag.feats)
            w.line(depth + 1, f"<fs{_attrs({'feats': feats, 'xml:id': tag.id})}/>")
        w.line(depth, "</fvLib>")
    elif isinstance(item, LexicalEntry):
        w.line(depth, "<entry>")
        for form in item.forms:
            _write_form(w, depth + 1, form)
        w.line(depth, "</entry>")
    elif isinstance(item, InlineStructure):
        _write_fs(w, depth, item.fs, fs_id=item.id)
    elif isinstance(item, SpanGroup):
        _write_span_group(w, depth, item)
    elif isinstance(item, OpaqueElement):
        w.line(depth, _render_opaque(item))
    else:
        raise TeiSerializeError(f"cannot serialise back item {item!r}")


def _write_feature(w: _Writer, depth: int, feature: Feature) -> None:
    attrs = {"name": feature.name, "xml:id": feature.id}
    if isinstance(feature.value, FeatureStructure):
        w.line(depth, f"<f{_attrs(attrs)}>")
        _write_fs(w, depth + 1, feature.value)
        w.line(depth, "</f>")
    else:
        w.line(depth, f"<f{_attrs(attrs)}>{_render_atom(feature.value)}</f>")


def _render_atom(value: FSValue) -> str:
    if isinstance(value, Binary):
        return f'<binary value="{"true" if value.value else "false"}"/>'
    if isinstance(value, Symbol):
        return f"<symbol{_attrs({'value': value.name})}/>"
    if isinstance(value, Numeric):
        return f"<numeric{_attrs({'value': _number(value.value)})}/>"
    if isinstance(value, Str):
        return f"<string>{_esc_text(value.text)}</string>" if value.text else "<string/>"
    raise TeiSerializeError(f"cannot serialise value {value!r}")


def _write_fs(w: _Writer, depth: int, fs: FeatureStructure, fs_id: str | None = None) -> None:
    attrs = {"type": fs.type, "xml:id": fs_id}
    if not fs.features:
        w.line(depth, f"<fs{_attrs(attrs)}/>")
        return
    w.line(depth, f"<fs{_attrs(attrs)}>")
    for name, value in fs.features.items():
        if isinstance(value, FeatureStructure):
            w.line(depth + 1, f"<f{_attrs({'name': name})}>")
            _write_fs(w, depth + 2, value)
            w.line(depth + 1, "</f>")
        else:
            w.line(depth + 1, f"<f{_attrs({'name': name})}>{_render_atom(value)}</f>")
    w.line(depth, "</fs>")


def _write_form(w: _Writer, depth: int, form: InflectedForm) -> None:
    attrs = {"type": form.type, "xml:id": form.id}
    w.line(depth, f"<form{_attrs(attrs)}>")
    w.line(depth + 1, _leaf("orth", {}, form.orth))
    if form.grammar:
        w.line(depth + 1, "<gramGrp>")
        for name, value in form.grammar:
            w.line(depth + 2, _leaf(name, {}, value))
        w.line(depth + 1, "</gramGrp>")
    w.line(depth, "</form>")


# ---------------------------------------------------------------- opaque

def _render_opaque(el: OpaqueElement) -> str:
    if el.tag.startswith("{"):
        ns, local = el.tag[1:].split("}", 1)
        open_tag = f'<{local} xmlns="{_esc_attr(ns)}"'
        close_name = local
    else:
        open_tag = f"<{el.tag}"
        close_name = el.tag
    for name, value in sorted(el.attrib):
        open_tag += f' {name}="{_esc_attr(value)}"'
    inner = _esc_text(el.text) if el.text else ""
    tails = el.tails or (None,) * len(el.children)
    for child, tail in zip(el.children, tails):
        inner += _render_opaque(child)
        if tail:
            inner += _esc_text(tail)
    if inner:
        return f"{open_tag}>{inner}</{close_name}>"
    return f"{open_tag}/>"
