"""Document-wide consistency checking.

Checks never mutate their input and never refuse to run on defective
documents: the point is to load what is there and report on it. Each
finding is an :class:`Issue` with a stable code, a severity, and a location
that names a real element or input line.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from spokenkit.core.model import (
    ComponentRefs,
    Document,
    EventInterval,
    Token,
    UnknownIdError,
    WordForm,
    check_level_coherence,
)
from spokenkit.datacat import COMPLEX, OK, Registry
from spokenkit.featstruct import TagsetError, TagsetLibrary, flatten
from spokenkit.tei.model import (
    AnchorRef,
    FeatureLib,
    Incident,
    Kinesic,
    Seg,
    TagLib,
    Utterance,
    W,
)
from spokenkit.tei.parser import build_document_library, inline_structures
from spokenkit.tei.spans import document_spans, document_tokens

DUP_ID = "DUP_ID"
BAD_ID = "BAD_ID"
DANGLING_REF = "DANGLING_REF"
ANCHOR_ORDER = "ANCHOR_ORDER"
OFFSET_ORDER = "OFFSET_ORDER"
SPAN_ORDER = "SPAN_ORDER"
UNKNOWN_TAG = "UNKNOWN_TAG"
DOMAIN_VIOLATION = "DOMAIN_VIOLATION"
LEVEL_INCOHERENT = "LEVEL_INCOHERENT"
UNKNOWN_CATEGORY = "UNKNOWN_CATEGORY"
TAGSET_ERROR = "TAGSET_ERROR"

ERROR = "error"
WARNING = "warning"

# Anchor disorder and offset contradictions may be intentional retrospective
# alignment, so they default to warnings; identifier and reference breakage
# does not.
DEFAULT_SEVERITY = {
    DUP_ID: ERROR,
    DANGLING_REF: ERROR,
    SPAN_ORDER: ERROR,
    UNKNOWN_TAG: ERROR,
    DOMAIN_VIOLATION: ERROR,
    LEVEL_INCOHERENT: ERROR,
    TAGSET_ERROR: ERROR,
    BAD_ID: WARNING,
    OFFSET_ORDER: WARNING,
    ANCHOR_ORDER: WARNING,
    UNKNOWN_CATEGORY: WARNING,
}

_SEVERITY_RANK = {ERROR: 0, WARNING: 1}


@dataclass(frozen=True)
class Issue:
    code: str
    severity: str
    location: str
    message: str


def _issue(code: str, location: str, message: str) -> Issue:
    return Issue(code, DEFAULT_SEVERITY[code], location, message)


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[Issue, ...]

    @property
    def errors(self) -> tuple[Issue, ...]:
        return tuple(i for i in self.issues if i.severity == ERROR)

    @property
    def warnings(self) -> tuple[Issue, ...]:
        return tuple(i for i in self.issues if i.severity == WARNING)

    @property
    def has_errors(self) -> bool:
        return any(i.severity == ERROR for i in self.issues)

    def to_text(self) -> str:
        lines = [f"{i.severity} {i.code} {i.location}: {i.message}" for i in self.issues]
        lines.append(f"{len(self.errors)} error(s), {len(self.warnings)} warning(s)")
        return "\n".join(lines) + "\n"

    def to_tsv(self) -> str:
        return "".join(
            f"{i.severity}\t{i.code}\t{i.location}\t{i.message}\n" for i in self.issues
        )


@dataclass
class ValidateOptions:
    library: TagsetLibrary | None = None
    registry: Registry | None = None
    language: str | None = None
    severity_overrides: dict[str, str] = field(default_factory=dict)


def _declared_ids(doc: Document) -> list[str]:
    if doc.declared_ids:
        return [d.raw for d in doc.declared_ids]
    # Constructed documents: collect identifiers from the model itself.
    ids: list[str] = []
    for tl in doc.timelines:
        ids.extend(p.id for p in tl.points if not p.synthetic)
    if doc.metadata is not None:
        ids.extend(p.id for p in doc.metadata.participants)
    ids.extend(a.id for a in doc.annotations)
    return ids


def check_ids(doc: Document) -> list[Issue]:
    """Duplicate identifiers and identifiers that cannot be identifiers."""
    issues: list[Issue] = []
    seen: dict[str, int] = {}
    for raw in _declared_ids(doc):
        seen[raw] = seen.get(raw, 0) + 1
    for raw, count in seen.items():
        if count > 1:
            issues.append(
                _issue(DUP_ID, raw, f"identifier {raw!r} is declared {count} times")
            )
        if "#" in raw:
            issues.append(_issue(BAD_ID, raw, f"identifier {raw!r} contains '#'"))
        elif any(c.isspace() for c in raw):
            issues.append(_issue(BAD_ID, raw, f"identifier {raw!r} contains whitespace"))
    return issues


def _known_ids(doc: Document) -> set[str]:
    known = {d.raw.lstrip("#") for d in doc.declared_ids}
    known.update(d.raw for d in doc.declared_ids)
    for tl in doc.timelines:
        known.add(tl.id)
        known.update(p.id for p in tl.points)
    for s in doc.sources:
        known.add(s.id)
    for layer in doc.layers:
        known.add(layer.id)
    for level in doc.levels:
        known.add(level.id)
    known.update(a.id for a in doc.annotations)
    if doc.metadata is not None:
        known.update(p.id for p in doc.metadata.participants)
    known.update(t.id for t in document_tokens(doc) if t.id)
    for entry in doc.lexical_entries:
        known.update(f.id for f in entry.forms if f.id)
    return known


def check_refs(doc: Document) -> list[Issue]:
    """Closure of every cross-reference the document can carry."""
    issues: list[Issue] = []
    point_ids = {p.id for tl in doc.timelines for p in tl.points}
    participants = (
        {p.id for p in doc.metadata.participants} if doc.metadata is not None else set()
    )
    token_ids = {t.id for t in document_tokens(doc) if t.id}
    known = _known_ids(doc)
    ana_targets = _ana_targets(doc)

    def dangle(attr: str, ref: str, location: str) -> None:
        issues.append(
            _issue(DANGLING_REF, location, f"@{attr} reference {ref!r} resolves to nothing")
        )

    def check_who(who: str | None, location: str) -> None:
        if who is not None and who not in participants:
            dangle("who", who, location)

    def walk_content(items, location: str) -> None:
        for item in items:
            if isinstance(item, AnchorRef):
                if item.synch is not None and item.synch not in point_ids:
                    dangle("synch", item.synch, location)
            elif isinstance(item, (Kinesic, Incident)):
                check_who(item.who, item.id or location)
                for attr, ref in (("start", item.start), ("end", item.end)):
                    if ref is not None and ref not in point_ids:
                        dangle(attr, ref, item.id or location)
            elif isinstance(item, Seg):
                walk_content(item.content, location)
            elif isinstance(item, W):
                if item.ana is not None and item.ana not in ana_targets:
                    dangle("ana", item.ana, item.id or location)

    for item in doc.body:
        if isinstance(item, Utterance):
            check_who(item.who, item.id)
            walk_content(item.content, item.id)
        elif isinstance(item, (Kinesic, Incident, AnchorRef, Seg, W)):
            walk_content([item], getattr(item, "id", None) or "body")

    for group, n in document_spans(doc):
        for span in group.spans:
            location = span.id or f"spanGrp[{n}]"
            for attr, ref in (("from", span.from_), ("to", span.to)):
                if ref not in token_ids:
                    dangle(attr, ref, location)
            if span.ana is not None and span.ana not in ana_targets:
                dangle("ana", span.ana, location)

    feature_ids = {
        f.id
        for item in doc.back
        if isinstance(item, FeatureLib)
        for f in item.features
        if f.id
    }
    for item in doc.back:
        if isinstance(item, TagLib):
            for tag in item.tags:
                for ref in tag.feats:
                    if ref not in feature_ids:
                        dangle("feats", ref, tag.id)

    if doc.metadata is not None:
        for app in doc.metadata.applications:
            for target in app.targets:
                if target not in known:
                    dangle("target", target, app.ident or "appInfo")

    for ann in doc.annotations:
        if not any(s.id == ann.source for s in doc.sources):
            dangle("source", ann.source, ann.id)
        if not any(l.id == ann.layer for l in doc.layers):
            dangle("layer", ann.layer, ann.id)
        if isinstance(ann.range, EventInterval):
            try:
                tl = doc.timeline(ann.range.timeline)
            except UnknownIdError:
                dangle("timeline", ann.range.timeline, ann.id)
                tl = None
            if tl is not None:
                for ref in (ann.range.start, ann.range.end):
                    if ref not in tl:
                        dangle("point", ref, ann.id)
        elif isinstance(ann.range, ComponentRefs) and not isinstance(ann, WordForm):
            # word-form component targets are their token references, below
            for target in ann.range.targets:
                if target not in known:
                    dangle("target", target, ann.id)
        if isinstance(ann, WordForm):
            annotation_tokens = {
                a.id for a in doc.annotations if isinstance(a, Token)
            } | token_ids
            for token_ref in ann.tokens:
                if token_ref not in annotation_tokens:
                    dangle("tokens", token_ref, ann.id)
    for layer in doc.layers:
        if not any(level.id == layer.level for level in doc.levels):
            dangle("level", layer.level, layer.id)
    return issues


def _ana_targets(doc: Document) -> set[str]:
    targets: set[str] = set(inline_structures(doc))
    for item in doc.back:
        if isinstance(item, TagLib):
            targets.update(tag.id for tag in item.tags)
    for entry in doc.lexical_entries:
        targets.update(f.id for f in entry.forms if f.id)
    return targets


def check_temporal(doc: Document) -> list[Issue]:
    """Anchor order within utterances and offset consistency on timelines."""
    issues: list[Issue] = []
    point_index: dict[str, int] = {}
    for tl in doc.timelines:
        for p in tl.points:
            point_index.setdefault(p.id, p.index)

    for item in doc.body:
        if not isinstance(item, Utterance):
            continue
        indices = [
            point_index[a.point]
            for a in _anchors_of(item.content)
            if a.point is not None and a.point in point_index
        ]
        if any(b < a for a, b in zip(indices, indices[1:])):
            issues.append(
                _issue(
                    ANCHOR_ORDER,
                    item.id,
                    f"anchors of utterance {item.id!r} decrease in timeline order",
                )
            )

    for tl in doc.timelines:
        with_offsets = [p for p in tl.points if p.offset is not None]
        for earlier, later in zip(with_offsets, with_offsets[1:]):
            if earlier.offset > later.offset:
                issues.append(
                    _issue(
                        OFFSET_ORDER,
                        later.id,
                        f"offset of {later.id!r} ({later.offset}) is smaller than "
                        f"offset of earlier point {earlier.id!r} ({earlier.offset})",
                    )
                )
    return issues


def _anchors_of(items):
    for item in items:
        if isinstance(item, AnchorRef):
            yield item
        elif isinstance(item, Seg):
            yield from _anchors_of(item.content)


def check_span_order(doc: Document) -> list[Issue]:
    """Spans whose from/to run against document order."""
    issues: list[Issue] = []
    token_pos = {t.id: n for n, t in enumerate(document_tokens(doc)) if t.id}
    for group, n in document_spans(doc):
        for span in group.spans:
            if span.from_ in token_pos and span.to in token_pos:
                if token_pos[span.from_] > token_pos[span.to]:
                    issues.append(
                        _issue(
                            SPAN_ORDER,
                            span.id or f"spanGrp[{n}]",
                            f"span runs from {span.from_!r} to {span.to!r} "
                            "against document order",
                        )
                    )
    return issues


def _ana_bearing(doc: Document) -> list[tuple[str, str]]:
    """(location, ana ref) pairs for every analysis reference in use."""
    refs: list[tuple[str, str]] = []

    def walk(items, location: str) -> None:
        for item in items:
            if isinstance(item, W) and item.ana is not None:
                refs.append((item.id or location, item.ana))
            elif isinstance(item, (Seg, Utterance)):
                walk(item.content, getattr(item, "id", None) or location)

    walk(doc.body, "body")
    for group, n in document_spans(doc):
        for span in group.spans:
            if span.ana is not None:
                refs.append((span.id or f"spanGrp[{n}]", span.ana))
    return refs


def check_tagset(
    doc: Document,
    lib: TagsetLibrary | None = None,
    registry: Registry | None = None,
    language: str | None = None,
) -> list[Issue]:
    """Resolution of analysis references, and domain conformance if a registry is given."""
    issues: list[Issue] = []
    if lib is None:
        try:
            lib = build_document_library(doc)
        except TagsetError as exc:
            issues.append(_issue(TAGSET_ERROR, "back", str(exc)))
            lib = TagsetLibrary({}, {})
    inline = inline_structures(doc)
    form_ids = {f.id for entry in doc.lexical_entries for f in entry.forms if f.id}

    for location, ref in _ana_bearing(doc):
        if ref in lib.tag_lib:
            fs = lib.tag_lib[ref].expanded
        elif ref in inline:
            fs = inline[ref]
        elif ref in form_ids:
            continue
        else:
            issues.append(
                _issue(UNKNOWN_TAG, location, f"analysis reference {ref!r} has no target")
            )
            continue
        if registry is not None:
            issues.extend(_domain_check(fs, registry, language, location))
    return issues


def _domain_check(fs, registry: Registry, language: str | None, location: str) -> list[Issue]:
    issues: list[Issue] = []
    for path, atom in flatten(fs):
        if isinstance(atom, (bool, int, float)):
            continue
        feature_name = path.rsplit("/", 1)[-1]
        feature_cat = registry.by_name(feature_name)
        if feature_cat is None:
            issues.append(
                _issue(
                    UNKNOWN_CATEGORY,
                    location,
                    f"feature {feature_name!r} matches no registered data category",
                )
            )
            continue
        value_cat = registry.by_name(str(atom))
        if value_cat is None:
            issues.append(
                _issue(
                    UNKNOWN_CATEGORY,
                    location,
                    f"value {atom!r} matches no registered data category",
                )
            )
            continue
        if feature_cat.kind != COMPLEX:
            issues.append(
                _issue(
                    UNKNOWN_CATEGORY,
                    location,
                    f"feature {feature_name!r} maps to a simple category and takes no values",
                )
            )
            continue
        verdict = registry.validate_value(feature_cat.pid, value_cat.pid, language)
        if verdict != OK:
            detail = (
                f"value {atom!r} of {feature_name!r} is outside the "
                f"{language!r} restriction"
                if verdict == "languageRestricted"
                else f"value {atom!r} is outside the domain of {feature_name!r}"
            )
            issues.append(_issue(DOMAIN_VIOLATION, location, detail))
    return issues


def validate_all(doc: Document, options: ValidateOptions | None = None) -> ValidationReport:
    """Run every check; a pure function of its input, so reports are stable.

    Issues are ordered by severity, code, then location, and deduplicated on
    (code, location).
    """
    opts = options or ValidateOptions()
    issues: list[Issue] = []
    issues.extend(check_ids(doc))
    issues.extend(check_refs(doc))
    issues.extend(check_temporal(doc))
    issues.extend(check_span_order(doc))
    has_tagset_material = bool(doc.tagset_declarations) or opts.library is not None
    if has_tagset_material or _ana_bearing(doc):
        issues.extend(check_tagset(doc, opts.library, opts.registry, opts.language))
    for level in doc.levels:
        for violation in check_level_coherence(doc, level.id):
            issues.append(_issue(LEVEL_INCOHERENT, violation.annotation, violation.message))

    if opts.severity_overrides:
        issues = [
            Issue(i.code, opts.severity_overrides.get(i.code, i.severity), i.location, i.message)
            for i in issues
        ]
    deduped: dict[tuple[str, str], Issue] = {}
    for issue in issues:
        deduped.setdefault((issue.code, issue.location), issue)
    ordered = sorted(
        deduped.values(),
        key=lambda i: (_SEVERITY_RANK.get(i.severity, 2), i.code, i.location, i.message),
    )
    return ValidationReport(tuple(ordered))
