from __future__ import annotations

import itertools
import random
from decimal import Decimal

import pytest

from spokenkit.core import (
    CategoryRef,
    EventInterval,
    relation,
    overlaps_report,
)
from spokenkit.tei import parse_document, resolve_anchors
from spokenkit.tier import (
    Tier,
    TierDocument,
    TierEvent,
    TierParseError,
    TierSpeaker,
    from_core,
    parse_tier,
    serialize_tier,
    to_core,
)
from tests.conftest import fixture_bytes


def test_parse_score_fixture():
    td = parse_tier(fixture_bytes("score_dialogue.tier"))
    assert len(td.speakers) == 2
    assert len(td.tiers) == 3
    assert [t.category for t in td.tiers] == ["verbal", "verbal", "gesture"]
    verbal = td.tier("SPK2_verbal")
    assert verbal.events[0].text == "Alors ça dépend ((cough)) un petit peu."


def test_parse_empty_tier_section():
    td = parse_tier("@speaker\ts1\tSpeaker\n@point\tp0\t-\n@point\tp1\t-\n")
    assert td.tiers == ()
    assert len(td.points) == 2


def test_event_with_equal_endpoints_rejected():
    data = (
        "@speaker\ts1\tS\n@point\tp0\t-\n@point\tp1\t-\n"
        "@tier\tt1\ts1\tverbal\nevent\tt1\tp0\tp0\tx\n"
    )
    with pytest.raises(TierParseError) as exc:
        parse_tier(data)
    assert "strictly before" in str(exc.value)


def test_overlapping_events_within_tier_rejected():
    data = (
        "@point\tp0\t-\n@point\tp1\t-\n@point\tp2\t-\n@point\tp3\t-\n"
        "@tier\tt1\t-\tverbal\n"
        "event\tt1\tp0\tp2\ta\n"
        "event\tt1\tp1\tp3\tb\n"
    )
    with pytest.raises(TierParseError) as exc:
        parse_tier(data)
    assert exc.value.line_no == 7


def test_unknown_point_reports_line():
    data = "@point\tp0\t-\n@point\tp1\t-\n@tier\tt1\t-\tv\nevent\tt1\tp0\tp9\tx\n"
    with pytest.raises(TierParseError) as exc:
        parse_tier(data)
    assert "p9" in str(exc.value)
    assert exc.value.line_no == 4


def test_malformed_line_reports_line():
    with pytest.raises(TierParseError) as exc:
        parse_tier("@speaker\tonly-one-field\n")
    assert exc.value.line_no == 1


def test_serialize_round_trips_file_bit_exactly():
    raw = fixture_bytes("score_dialogue.tier").decode("utf-8")
    assert serialize_tier(parse_tier(raw)) == raw


def test_serialize_preserves_comments_and_interleaving():
    raw = (
        "# score header\n"
        "@speaker\ts1\tSpeaker One\n"
        "@point\tp0\t-\n"
        "@point\tp1\t1.50\n"
        "\n"
        "@tier\tt1\ts1\tverbal\n"
        "event\tt1\tp0\tp1\thello\n"
    )
    assert serialize_tier(parse_tier(raw)) == raw


def test_to_core_structure():
    td = parse_tier(fixture_bytes("score_dialogue.tier"))
    doc = to_core(td)
    assert len(doc.timelines) == 1
    assert [l.id for l in doc.layers] == ["SPK1_verbal", "SPK2_verbal", "SPK1_gesture"]
    assert len(doc.annotations) == sum(len(t.events) for t in td.tiers)
    assert {p.id for p in doc.metadata.participants} == {"SPK1", "SPK2"}


def test_to_core_overlaps_match_pairwise_oracle():
    td = parse_tier(fixture_bytes("score_dialogue.tier"))
    doc = to_core(td)
    report = overlaps_report(doc)
    index = td.point_index()
    expected = set()
    events = [
        (f"{tier.id}_e{n}", index[e.start], index[e.end])
        for tier in td.tiers
        for n, e in enumerate(tier.events, start=1)
    ]
    for (a, s1, e1), (b, s2, e2) in itertools.combinations(events, 2):
        if max(s1, s2) < min(e1, e2):
            expected.add(frozenset((a, b)))
    assert {frozenset((p.a, p.b)) for p in report.pairs} == expected
    verbal_pair = frozenset(("SPK1_verbal_e1", "SPK2_verbal_e1"))
    assert verbal_pair in expected


def test_to_core_single_tier_sequential_events_no_overlaps():
    data = (
        "@point\tp0\t-\n@point\tp1\t-\n@point\tp2\t-\n"
        "@tier\tt1\t-\tverbal\n"
        "event\tt1\tp0\tp1\ta\n"
        "event\tt1\tp1\tp2\tb\n"
    )
    assert overlaps_report(to_core(parse_tier(data))).pairs == ()


def test_to_core_gesture_spanning_two_verbal_events():
    data = (
        "@speaker\ts1\tS1\n"
        "@point\tp0\t-\n@point\tp1\t-\n@point\tp2\t-\n"
        "@tier\tv\ts1\tverbal\n"
        "@tier\tg\ts1\tgesture\n"
        "event\tv\tp0\tp1\tfirst\n"
        "event\tv\tp1\tp2\tsecond\n"
        "event\tg\tp0\tp2\twave\n"
    )
    report = overlaps_report(to_core(parse_tier(data)))
    assert {frozenset((p.a, p.b)) for p in report.pairs} == {
        frozenset(("g_e1", "v_e1")),
        frozenset(("g_e1", "v_e2")),
    }


def test_to_core_category_mapping_to_pids():
    td = parse_tier(fixture_bytes("score_dialogue.tier"))
    doc = to_core(td, {"verbal": "http://dcr.example.org/utterance"})
    verbal = doc.annotation("SPK1_verbal_e1")
    assert verbal.qualifiers[0].feature == CategoryRef("http://dcr.example.org/utterance")


def test_from_core_inverts_to_core():
    td = parse_tier(fixture_bytes("score_dialogue.tier"))
    converted, residue = from_core(to_core(td))
    assert residue == []
    assert converted == TierDocument(td.speakers, td.points, td.tiers)


def test_from_core_on_dialogue_document():
    doc, _ = parse_document(fixture_bytes("anchored_dialogue.xml"))
    doc, _ = resolve_anchors(doc)
    td, residue = from_core(doc)
    assert residue == []
    assert [(t.id, t.speaker, t.category, len(t.events)) for t in td.tiers] == [
        ("SPK0_verbal", "SPK0", "verbal", 2),
        ("SPK1_verbal", "SPK1", "verbal", 1),
        ("SPK0_incident", "SPK0", "incident", 1),
    ]
    incident = td.tier("SPK0_incident")
    assert incident.events[0].text == "right hand raised"


def test_from_core_reports_residue_for_word_forms(pomme_doc):
    from dataclasses import replace

    from spokenkit.tei import extract_spans

    word_forms, _ = extract_spans(pomme_doc)
    doc = replace(pomme_doc, annotations=pomme_doc.annotations + tuple(word_forms))
    td, residue = from_core(doc)
    assert any("word-form" in item.reason for item in residue)
    reported = {item.annotation for item in residue}
    assert {wf.id for wf in word_forms} <= reported


def test_empty_tier_survives_round_trip():
    td = TierDocument(
        speakers=(TierSpeaker("s1", "S"),),
        points=(("p0", None), ("p1", None)),
        tiers=(Tier("quiet", "s1", "verbal", ()),),
    )
    converted, residue = from_core(to_core(td))
    assert residue == []
    assert converted == td


# ---------------------------------------------------------------- properties

CATEGORIES = ["verbal", "gesture", "translation", "noise"]


def random_tier_document(rng: random.Random) -> TierDocument:
    speakers = tuple(
        TierSpeaker(f"s{i}", f"Speaker {i}") for i in range(rng.randint(1, 3))
    )
    n_points = rng.randint(2, 12)
    use_offsets = rng.random() < 0.4
    offset = Decimal(0)
    points = []
    for i in range(n_points):
        if use_offsets:
            offset += Decimal(rng.randint(1, 9)) / 2
            points.append((f"p{i}", offset))
        else:
            points.append((f"p{i}", None))
    tiers = []
    for t in range(rng.randint(0, 5)):
        cuts = sorted(rng.sample(range(n_points), rng.randint(0, min(n_points, 8))))
        events = []
        for start, end in zip(cuts[::2], cuts[1::2]):
            if start == end:
                continue
            events.append(TierEvent(f"p{start}", f"p{end}", f"text {t}.{len(events)}"))
        tiers.append(
            Tier(
                f"tier{t}",
                rng.choice([s.id for s in speakers] + [None]),
                rng.choice(CATEGORIES),
                tuple(events),
            )
        )
    return TierDocument(speakers, tuple(points), tuple(tiers))


def test_round_trip_property_on_random_documents():
    rng = random.Random(20260808)
    for _ in range(50):
        td = random_tier_document(rng)
        converted, residue = from_core(to_core(td))
        assert residue == []
        assert converted == TierDocument(td.speakers, td.points, td.tiers)
        assert parse_tier(serialize_tier(td)) == td


def test_temporal_relations_invariant_under_conversion():
    rng = random.Random(99)
    from spokenkit.core import Timeline

    for _ in range(25):
        td = random_tier_document(rng)
        doc = to_core(td)
        timeline = doc.primary_timeline
        index = td.point_index()
        reference = Timeline.of("ref", [p for p, _ in td.points])
        events = [
            (f"{tier.id}_e{n}", e)
            for tier in td.tiers
            for n, e in enumerate(tier.events, start=1)
        ]
        for (id_a, ev_a), (id_b, ev_b) in itertools.combinations(events, 2):
            direct = relation(
                EventInterval(ev_a.start, ev_a.end, "ref"),
                EventInterval(ev_b.start, ev_b.end, "ref"),
                reference,
            )
            converted = relation(
                doc.annotation(id_a).range, doc.annotation(id_b).range, timeline
            )
            assert direct is converted


def test_from_core_rejects_zero_length_events_into_residue():
    doc, _ = parse_document(fixture_bytes("inline_anchors.xml"))
    doc, _ = resolve_anchors(doc)
    from spokenkit.core import sequence_implicit

    doc = sequence_implicit(doc)
    td, residue = from_core(doc)
    # the start-only gesture resolves to a zero-length interval
    assert any(item.annotation == "kinesic1" for item in residue)
    # and the produced file is valid for our own parser
    assert parse_tier(serialize_tier(td)) == td


def test_offset_inversion_reports_declaring_line():
    data = "@point\tp0\t5\n@point\tp1\t2\n"
    with pytest.raises(TierParseError) as exc:
        parse_tier(data)
    assert exc.value.line_no == 2
