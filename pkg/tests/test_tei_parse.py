from __future__ import annotations

import pytest

from spokenkit.core import EventInterval
from spokenkit.tei import (
    Kinesic,
    TeiParseError,
    TextSegment,
    Utterance,
    Vocal,
    parse_document,
    resolve_anchors,
)
from tests.conftest import fixture_bytes

DIALOGUE_POINT_IDS = ["T1", "T2", "T3", "T4", "T4bar", "T5", "T6", "T7"]


def test_dialogue_structure(dialogue_doc):
    md = dialogue_doc.metadata
    assert [(p.id, p.name) for p in md.participants] == [
        ("SPK0", "Peter Black"),
        ("SPK1", "Judith White"),
    ]
    timeline = dialogue_doc.primary_timeline
    assert timeline.unit == "ms"
    assert [p.id for p in timeline.points] == DIALOGUE_POINT_IDS
    utterances = [item for item in dialogue_doc.body if isinstance(item, Utterance)]
    assert len(utterances) == 3
    incidents = [a for a in dialogue_doc.annotations if a.qualifiers[0].feature == "incident"]
    assert len(incidents) == 1
    assert incidents[0].who == "SPK0"


def test_inline_kinesic_is_content_not_annotation(dialogue_doc):
    second = [item for item in dialogue_doc.body if isinstance(item, Utterance)][1]
    kinds = [type(item).__name__ for item in second.content]
    assert "Kinesic" in kinds
    assert all(a.qualifiers[0].feature != "kinesic" for a in dialogue_doc.annotations)


def test_recording_metadata():
    doc, _ = parse_document(fixture_bytes("recording.xml"))
    (recording,) = doc.metadata.recordings
    assert recording.type == "audio"
    assert recording.equipment == "Two microphones, standard 44.1 KHz sampling frequency"
    assert recording.date == "12 Jan 2010"
    assert recording.broadcast is None


def test_person_metadata():
    doc, _ = parse_document(fixture_bytes("person.xml"))
    (person,) = doc.metadata.participants
    assert person.sex == "2"
    assert person.age == "infant"
    assert person.birth.when == "2010"
    assert person.birth.place == "Berlin, Germany"
    (lang,) = person.languages
    assert (lang.tag, lang.level, lang.label) == ("de", "first", "German")


def test_missing_file_desc_is_a_hard_error():
    data = b'<TEI xmlns="http://www.tei-c.org/ns/1.0"><teiHeader/><text><body/></text></TEI>'
    with pytest.raises(TeiParseError):
        parse_document(data)


def test_ill_formed_markup_is_a_hard_error():
    with pytest.raises(TeiParseError):
        parse_document(b"<TEI><unclosed>")


def test_missing_namespace_warns():
    data = (
        b"<TEI><teiHeader><fileDesc><titleStmt><title>t</title></titleStmt>"
        b"<publicationStmt><p>p</p></publicationStmt><sourceDesc><p>s</p></sourceDesc>"
        b"</fileDesc></teiHeader><text><body/></text></TEI>"
    )
    doc, warnings = parse_document(data)
    assert any("namespace" in w for w in warnings)
    assert doc.metadata.title == "t"


def test_resolve_anchors_on_dialogue(dialogue_doc):
    doc, findings = resolve_anchors(dialogue_doc)
    assert findings == []
    assert doc.annotation("u2").range == EventInterval("T3", "T6", "timeline1")
    assert doc.annotation("incident1").range == EventInterval("T3", "T5", "timeline1")


def test_resolve_anchors_accepts_bare_and_hash_references(dialogue_doc):
    # The fixture mixes synch="#T3" with start="T3"; both resolved above.
    incident = next(a for a in dialogue_doc.annotations if a.id == "incident1")
    assert incident.range is None  # before resolution
    doc, _ = resolve_anchors(dialogue_doc)
    assert doc.annotation("incident1").range.start == "T3"


def test_resolve_anchors_dangling_point():
    data = fixture_bytes("anchored_dialogue.xml").replace(b'synch="#T7"', b'synch="#T99"')
    doc, _ = parse_document(data)
    doc, findings = resolve_anchors(doc)
    assert any(f.ref == "T99" for f in findings)
    # the utterance keeps its other anchor and still resolves
    assert doc.annotation("u3").range == EventInterval("T6", "T6", "timeline1")


def test_duplicate_anchor_declaration_keeps_first(inline_doc):
    timeline = inline_doc.primary_timeline
    assert timeline.implicit
    assert [p.id for p in timeline.points] == ["tp1u", "tp2u"]
    assert [d.raw for d in inline_doc.declared_ids].count("tp2u") == 2


def test_inline_anchor_utterances_share_interval(inline_doc):
    doc, _ = resolve_anchors(inline_doc)
    assert doc.annotation("u1").range == doc.annotation("u2").range


def test_vocal_and_text_preserved_verbatim(inline_doc):
    second = [item for item in inline_doc.body if isinstance(item, Utterance)][1]
    vocals = [c for c in second.content if isinstance(c, Vocal)]
    assert vocals == [Vocal(desc="cough")]
    texts = [c.text for c in second.content if isinstance(c, TextSegment)]
    assert texts == ["Alors ça dépend ", " ", "un petit peu."]


def test_start_only_event_gets_degenerate_interval(inline_doc):
    doc, _ = resolve_anchors(inline_doc)
    kinesic = doc.annotation("kinesic1")
    assert kinesic.range == EventInterval("tp1u", "tp1u", "~implicit")


def test_generated_utterance_ids_are_deterministic():
    first, _ = parse_document(fixture_bytes("anchored_dialogue.xml"))
    second, _ = parse_document(fixture_bytes("anchored_dialogue.xml"))
    assert [a.id for a in first.annotations] == [a.id for a in second.annotations]


def test_resolve_anchors_preserves_order_and_text(dialogue_doc):
    resolved, _ = resolve_anchors(dialogue_doc)
    assert resolved.body == dialogue_doc.body
    assert [a.id for a in resolved.annotations] == [a.id for a in dialogue_doc.annotations]
    originals = [item.plain_text() for item in dialogue_doc.body if isinstance(item, Utterance)]
    after = [item.plain_text() for item in resolved.body if isinstance(item, Utterance)]
    assert after == originals


def test_symbol_text_content_accepted_and_canonicalized():
    data = fixture_bytes("tags.xml").replace(
        b'<symbol value="feminine"/>', b"<symbol>feminine</symbol>"
    )
    doc, _ = parse_document(data)
    baseline, _ = parse_document(fixture_bytes("tags.xml"))
    assert doc == baseline
    from spokenkit.tei import serialize_document

    assert b'<symbol value="feminine"/>' in serialize_document(doc)


def test_anchor_inside_token_is_reported_and_preserved():
    data = fixture_bytes("pomme.xml").replace(
        b'<w xml:id="t2">de</w>', b'<w xml:id="t2">de<anchor synch="#t1"/></w>'
    )
    doc, warnings = parse_document(data)
    assert any("inside w" in w for w in warnings)
    from spokenkit.tei import serialize_document

    assert b"<anchor" in serialize_document(doc).split(b'xml:id="t2"')[1].split(b"</w>")[0]


def test_timeline_inside_body_is_accepted():
    data = fixture_bytes("anchored_dialogue.xml")
    timeline_block = data[data.index(b"<timeline") : data.index(b"</timeline>") + len(b"</timeline>")]
    moved = data.replace(timeline_block, b"").replace(b"<body>", b"<body>" + timeline_block)
    doc, _ = parse_document(moved)
    baseline, _ = parse_document(data)
    assert doc.primary_timeline == baseline.primary_timeline
    resolved, findings = resolve_anchors(doc)
    assert findings == []
