"""Span-based word-form extraction and segment statistics.

Tokens (``w`` elements) form the surface level; spans over token runs form
the word-form level. The two relate n-to-n: one word form covers one or more
tokens, and one token may belong to any number of word forms.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from spokenkit.core.model import (
    MECH_COMPONENT,
    ComponentRefs,
    Document,
    Layer,
    Level,
    Qualifier,
    WordForm,
)
from spokenkit.featstruct import TagsetError, TagsetLibrary, flatten
from spokenkit.tei.model import Seg, SpanGroup, Utterance, W
from spokenkit.tei.parser import (
    DEFAULT_SOURCE,
    build_document_library,
    inline_structures,
    resolve_ana,
)

WORDFORM_LAYER = "wordForms"


@dataclass(frozen=True)
class SpanFinding:
    """A span that could not be turned into a word form."""

    location: str
    message: str


def document_tokens(doc: Document) -> list[W]:
    """All identified tokens of the document, in document order."""
    tokens: list[W] = []

    def walk(items) -> None:
        for item in items:
            if isinstance(item, W):
                if item.id:
                    tokens.append(item)
            elif isinstance(item, (Utterance, Seg)):
                walk(item.content)

    walk(doc.body)
    return tokens


def document_spans(doc: Document) -> list[tuple[SpanGroup, int]]:
    groups: list[tuple[SpanGroup, int]] = []
    for n, item in enumerate(list(doc.body) + list(doc.back)):
        if isinstance(item, SpanGroup):
            groups.append((item, n))
    return groups


def extract_spans(doc: Document) -> tuple[list[WordForm], list[SpanFinding]]:
    """Turn span descriptions into word-form annotations.

    Each span covers the contiguous token run from its ``from`` token to its
    ``to`` token in document order. The analysis reference resolves into a
    lexical entry's inflected form when one matches (contributing the
    orthography and grammatical features), otherwise into the tagset.
    Out-of-order spans and dangling references are findings, not errors.
    """
    findings: list[SpanFinding] = []
    tokens = document_tokens(doc)
    token_pos = {tok.id: n for n, tok in enumerate(tokens)}
    forms = {
        form.id: form for entry in doc.lexical_entries for form in entry.forms if form.id
    }
    try:
        lib: TagsetLibrary | None = build_document_library(doc)
    except TagsetError:
        lib = None
    inline = inline_structures(doc)

    word_forms: list[WordForm] = []
    counter = 0
    for group, _ in document_spans(doc):
        for span in group.spans:
            location = span.id or f"span over {span.from_}..{span.to}"
            if span.from_ not in token_pos:
                findings.append(SpanFinding(location, f"span references unknown token {span.from_!r}"))
                continue
            if span.to not in token_pos:
                findings.append(SpanFinding(location, f"span references unknown token {span.to!r}"))
                continue
            lo = token_pos[span.from_]
            hi = token_pos[span.to]
            if lo > hi:
                findings.append(
                    SpanFinding(
                        location,
                        f"span runs from {span.from_!r} to {span.to!r} against document order",
                    )
                )
                continue
            run = tokens[lo : hi + 1]
            counter += 1
            qualifiers: list[Qualifier] = []
            lex_ref = None
            orth = None
            if span.ana is not None:
                form = forms.get(span.ana)
                if form is not None:
                    lex_ref = form.id
                    orth = form.orth
                    qualifiers.extend(Qualifier(name, value) for name, value in form.grammar)
                elif span.ana in inline or (lib is not None and span.ana in lib.tag_lib):
                    fs = resolve_ana(doc, lib, span.ana)
                    qualifiers.extend(Qualifier(path, str(atom)) for path, atom in flatten(fs))
                else:
                    findings.append(
                        SpanFinding(location, f"span analysis {span.ana!r} resolves to nothing")
                    )
            if not qualifiers:
                qualifiers.append(Qualifier("wordForm", orth or "".join(t.text for t in run)))
            word_forms.append(
                WordForm(
                    id=span.id or f"wf{counter}",
                    source=DEFAULT_SOURCE,
                    range=ComponentRefs(tuple(t.id for t in run)),
                    qualifiers=tuple(qualifiers),
                    layer=WORDFORM_LAYER,
                    tokens=tuple(t.id for t in run),
                    lex_ref=lex_ref,
                    orth=orth,
                )
            )
    return word_forms, findings


def attach_word_forms(doc: Document) -> tuple[Document, list[SpanFinding]]:
    """Extract word forms and return a document carrying them as annotations.

    Declares the word-form layer and its component-ranged level alongside.
    """
    word_forms, findings = extract_spans(doc)
    if not word_forms:
        return doc, findings
    features = {q.feature_key() for wf in word_forms for q in wf.qualifiers}
    layers = doc.layers + (Layer(WORDFORM_LAYER, "word forms", WORDFORM_LAYER + "Level"),)
    levels = doc.levels + (
        Level(
            WORDFORM_LAYER + "Level",
            sources=frozenset({DEFAULT_SOURCE}),
            ranging_mechanism=MECH_COMPONENT,
            category_selection=frozenset(features),
        ),
    )
    return (
        replace(doc, annotations=doc.annotations + tuple(word_forms), layers=layers, levels=levels),
        findings,
    )


def seg_stats(doc: Document) -> dict[str, int]:
    """Counts of ``seg`` elements by type, nested segments included."""
    counts: dict[str, int] = {}

    def walk(items) -> None:
        for item in items:
            if isinstance(item, Seg):
                key = item.type or ""
                counts[key] = counts.get(key, 0) + 1
                walk(item.content)
            elif isinstance(item, Utterance):
                walk(item.content)

    walk(doc.body)
    return counts
