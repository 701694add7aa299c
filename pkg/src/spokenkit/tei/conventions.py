"""Promotion of inline transcription conventions to markup.

Transcribers often keep non-verbal events in plain text, e.g. ``((cough))``.
A convention rule rewrites such text into the corresponding element while
leaving the surrounding text byte-exact. The double-parenthesis rule ships
built in; further rules load from a plain-text rule file.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from spokenkit.core.model import Document, Qualifier
from spokenkit.tei.model import Incident, Kinesic, TextSegment, Utterance, Vocal


@dataclass(frozen=True)
class ConventionRule:
    pattern: re.Pattern
    element: str  # 'vocal' | 'kinesic' | 'incident'
    desc_group: int | str = 1


BUILTIN_RULES = (ConventionRule(re.compile(r"\(\((.+?)\)\)"), "vocal"),)


class ConventionRuleError(ValueError):
    pass


def load_convention_rules(data: str | bytes) -> tuple[ConventionRule, ...]:
    """Read rules from ``pattern<TAB>element<TAB>descGroup`` lines."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    rules: list[ConventionRule] = []
    for line_no, line in enumerate(data.splitlines(), start=1):
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ConventionRuleError(f"line {line_no}: expected 3 tab-separated fields")
        pattern, element, group = fields
        if element not in ("vocal", "kinesic", "incident"):
            raise ConventionRuleError(f"line {line_no}: unknown element {element!r}")
        try:
            compiled = re.compile(pattern)
        except re.error as exc:
            raise ConventionRuleError(f"line {line_no}: bad pattern: {exc}") from exc
        rules.append(ConventionRule(compiled, element, int(group) if group.isdigit() else group))
    return tuple(rules)


def _make_element(element: str, desc: str):
    if element == "vocal":
        return Vocal(desc=desc)
    if element == "kinesic":
        return Kinesic(desc=desc)
    return Incident(desc=desc)


def promote_conventions(
    utt: Utterance, rules: tuple[ConventionRule, ...] | None = None
) -> tuple[Utterance, list[str]]:
    """Rewrite convention markers in an utterance's text segments.

    Matches are applied left to right; everything around them is preserved
    byte-exactly, so the operation is idempotent. A segment with a stray
    ``((`` is left untouched and reported as a finding.
    """
    if rules is None:
        rules = BUILTIN_RULES
    findings: list[str] = []
    new_content: list = []
    for item in utt.content:
        if not isinstance(item, TextSegment):
            new_content.append(item)
            continue
        pieces = _apply_rules(item.text, rules)
        if any(isinstance(p, str) and "((" in p for p in pieces):
            findings.append(f"unbalanced '((' in utterance {utt.id!r}; text left as is")
            new_content.append(item)
            continue
        for piece in pieces:
            if isinstance(piece, str):
                if piece:
                    new_content.append(TextSegment(piece))
            else:
                new_content.append(piece)
    return replace(utt, content=tuple(new_content)), findings


def _apply_rules(text: str, rules: tuple[ConventionRule, ...]) -> list:
    pieces: list = [text]
    for rule in rules:
        next_pieces: list = []
        for piece in pieces:
            if not isinstance(piece, str):
                next_pieces.append(piece)
                continue
            cursor = 0
            for match in rule.pattern.finditer(piece):
                next_pieces.append(piece[cursor : match.start()])
                next_pieces.append(_make_element(rule.element, match.group(rule.desc_group)))
                cursor = match.end()
            next_pieces.append(piece[cursor:])
        pieces = next_pieces
    return pieces


def promote_document(
    doc: Document, rules: tuple[ConventionRule, ...] | None = None
) -> tuple[Document, list[str]]:
    """Apply convention promotion to every utterance of a document."""
    findings: list[str] = []
    new_body: list = []
    changed = False
    for item in doc.body:
        if isinstance(item, Utterance):
            new_item, item_findings = promote_conventions(item, rules)
            findings.extend(item_findings)
            changed = changed or new_item != item
            new_body.append(new_item)
        else:
            new_body.append(item)
    if not changed:
        return doc, findings
    new_doc = replace(doc, body=tuple(new_body))
    return _refresh_utterance_values(new_doc), findings


def _refresh_utterance_values(doc: Document) -> Document:
    """Re-derive utterance annotation text after content rewrites."""
    texts = {item.id: item.plain_text() for item in doc.body if isinstance(item, Utterance)}
    annotations = []
    for ann in doc.annotations:
        if ann.id in texts and ann.qualifiers and ann.qualifiers[0].feature == "utterance":
            ann = replace(ann, qualifiers=(Qualifier("utterance", texts[ann.id]),))
        annotations.append(ann)
    return replace(doc, annotations=tuple(annotations))
