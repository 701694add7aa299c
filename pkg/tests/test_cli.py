from __future__ import annotations

from spokenkit.cli import main
from tests.conftest import FIXTURES, fixture_bytes, fixture_path


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------- validate

def test_validate_dialogue_is_clean(capsys):
    code, out, _ = run(capsys, "validate", fixture_path("anchored_dialogue.xml"))
    assert code == 0
    assert "0 error(s), 0 warning(s)" in out


def test_validate_inline_anchors_reports_duplicate(capsys):
    code, out, _ = run(capsys, "validate", fixture_path("inline_anchors.xml"))
    assert code == 1
    assert "DUP_ID" in out and "tp2u" in out


def test_validate_missing_file(capsys):
    code, _, err = run(capsys, "validate", str(FIXTURES / "missing.xml"))
    assert code == 2
    assert "missing.xml" in err


def test_validate_warnings_alone_exit_zero(capsys):
    code, out, _ = run(capsys, "validate", fixture_path("category_flib.xml"))
    assert code == 0
    assert "BAD_ID" in out


def test_validate_tsv_format(capsys):
    code, out, _ = run(
        capsys, "validate", "--format", "tsv", fixture_path("inline_anchors.xml")
    )
    assert code == 1
    assert "error\tDUP_ID\ttp2u" in out


def test_validate_with_registry_and_language(capsys):
    code, out, _ = run(
        capsys,
        "validate",
        "--registry",
        fixture_path("registry.tsv"),
        "--lang",
        "fr",
        fixture_path("tagged_neuter.xml"),
    )
    assert code == 1
    assert "DOMAIN_VIOLATION" in out


def test_validate_multiple_files_with_jobs(capsys):
    code, out, _ = run(
        capsys,
        "validate",
        "--jobs",
        "4",
        fixture_path("anchored_dialogue.xml"),
        fixture_path("inline_anchors.xml"),
        fixture_path("seg.xml"),
    )
    assert code == 1
    # sections appear in input order regardless of worker scheduling
    first = out.index("anchored_dialogue.xml")
    second = out.index("inline_anchors.xml")
    third = out.index("seg.xml")
    assert first < second < third


def test_validate_severity_override_via_config(capsys, tmp_path):
    config = tmp_path / "config.tsv"
    config.write_text("severity\tDUP_ID\twarning\n")
    code, out, _ = run(
        capsys,
        "validate",
        "--config",
        str(config),
        fixture_path("inline_anchors.xml"),
    )
    assert code == 0
    assert "warning DUP_ID" in out


# ---------------------------------------------------------------- convert

def test_convert_tier_to_tei_and_back_reproduces_file(capsys, tmp_path):
    tei_out = tmp_path / "fig2.xml"
    code, _, _ = run(
        capsys,
        "convert", fixture_path("score_dialogue.tier"),
        "--from", "tier", "--to", "tei",
        "-o", str(tei_out),
    )
    assert code == 0
    code, out, err = run(
        capsys, "convert", str(tei_out), "--from", "tei", "--to", "tier"
    )
    assert code == 0
    assert "residue" not in err
    assert out.encode("utf-8") == fixture_bytes("score_dialogue.tier")


def test_convert_dialogue_to_tier(capsys):
    code, out, _ = run(
        capsys, "convert", fixture_path("anchored_dialogue.xml"), "--from", "tei", "--to", "tier"
    )
    assert code == 0
    tiers = [line for line in out.splitlines() if line.startswith("@tier")]
    assert len(tiers) == 3


def test_convert_applies_convention_rules(capsys, tmp_path):
    source = tmp_path / "raw.xml"
    source.write_bytes(
        fixture_bytes("anchored_dialogue.xml").replace(b"Okay. ", b"Okay. ((cough)) ")
    )
    code, out, _ = run(
        capsys,
        "convert", str(source),
        "--from", "tei", "--to", "tei",
        "--conventions", fixture_path("gat.rules"),
    )
    assert code == 0
    assert "<vocal><desc>cough</desc></vocal>" in out
    assert "((cough))" not in out


def test_convert_parse_failure_exits_two(capsys, tmp_path):
    bad = tmp_path / "bad.xml"
    bad.write_bytes(b"<TEI><oops>")
    code, _, err = run(capsys, "convert", str(bad), "--from", "tei", "--to", "tier")
    assert code == 2
    assert "spokenkit:" in err


def test_convert_tei_to_tei_is_canonical_normalization(capsys):
    code, out, _ = run(
        capsys, "convert", fixture_path("anchored_dialogue.xml"), "--from", "tei", "--to", "tei"
    )
    assert code == 0
    assert out.startswith('<?xml version="1.0" encoding="UTF-8"?>')
    assert 'who="#SPK0"' in out
    # bare start="T3" was normalised to a hash reference
    assert 'start="#T3"' in out


def test_convert_materializes_synthetic_timeline(capsys):
    code, out, _ = run(
        capsys,
        "convert", fixture_path("inline_anchors.xml"),
        "--from", "tei", "--to", "tier",
    )
    assert code == 0
    assert "~auto1" in out


# ---------------------------------------------------------------- overlaps

def test_overlaps_dialogue_rows(capsys):
    code, out, _ = run(capsys, "overlaps", fixture_path("anchored_dialogue.xml"))
    assert code == 0
    rows = [line.split("\t") for line in out.splitlines()]
    assert rows == [
        ["u1", "incident1", "T3", "T4"],
        ["u1", "u2", "T3", "T4"],
        ["incident1", "u2", "T3", "T5"],
    ]


def test_overlaps_single_utterance(capsys, tmp_path):
    single = tmp_path / "single.xml"
    data = fixture_bytes("anchored_dialogue.xml")
    body_start = data.index(b"<body>")
    body_end = data.index(b"</body>") + len(b"</body>")
    replacement = (
        b'<body><u who="#SPK0"><anchor synch="#T1"/>Seul.<anchor synch="#T2"/></u></body>'
    )
    single.write_bytes(data[:body_start] + replacement + data[body_end:])
    code, out, _ = run(capsys, "overlaps", str(single))
    assert code == 0
    assert out == ""


def test_overlaps_unanchored_file_sequences_first(capsys, tmp_path):
    plain = tmp_path / "plain.xml"
    data = fixture_bytes("anchored_dialogue.xml")
    body_start = data.index(b"<body>")
    body_end = data.index(b"</body>") + len(b"</body>")
    replacement = b'<body><u who="#SPK0">Un.</u><u who="#SPK1">Deux.</u></body>'
    plain.write_bytes(data[:body_start] + replacement + data[body_end:])
    code, out, _ = run(capsys, "overlaps", str(plain))
    assert code == 0
    assert out == ""


# ---------------------------------------------------------------- tag

def test_tag_expand_prints_feature_value_pairs(capsys):
    code, out, _ = run(
        capsys, "tag", "expand", "--lib", fixture_path("tags.xml"), "Ncms__"
    )
    assert code == 0
    assert out.splitlines() == [
        "partOfSpeech=commonNoun",
        "grammaticalGender=masculine",
        "grammaticalNumber=singular",
    ]


def test_tag_list(capsys):
    code, out, _ = run(capsys, "tag", "list", "--lib", fixture_path("tags.xml"))
    assert code == 0
    assert out.splitlines() == ["Ncms__", "Ncfs__", "Ncns__"]


def test_tag_expand_unknown_tag(capsys):
    code, _, err = run(
        capsys, "tag", "expand", "--lib", fixture_path("tags.xml"), "Zzz"
    )
    assert code == 2
    assert "Zzz" in err


def test_commands_are_deterministic(capsys):
    first = run(capsys, "overlaps", fixture_path("anchored_dialogue.xml"))
    second = run(capsys, "overlaps", fixture_path("anchored_dialogue.xml"))
    assert first == second


def test_convert_category_mapping_via_config(capsys, tmp_path):
    config = tmp_path / "map.tsv"
    config.write_text("category\tverbal\thttp://dcr.example.org/utterance\n")
    code, out, _ = run(
        capsys,
        "convert", fixture_path("score_dialogue.tier"),
        "--from", "tier", "--to", "tei",
        "--config", str(config),
    )
    assert code == 0
    assert "<u " in out
