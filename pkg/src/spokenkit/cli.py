"""Command-line interface: validate, convert, overlaps and tagset tooling.

Exit codes: 0 = success (warnings allowed), 1 = validation errors present,
2 = usage or I/O failure. All commands are deterministic: identical inputs
and flags produce identical output bytes. Configuration is explicit via
flags and a plain-text config file; no environment variables are consulted.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from spokenkit import tier as tier_format
from spokenkit.core.temporal import overlaps_report, sequence_implicit
from spokenkit.datacat import RegistryFormatError, load_registry
from spokenkit.featstruct import TagsetError, TagsetLibrary, UnknownTagError, atom_value
from spokenkit.tei import (
    ConventionRule,
    ConventionRuleError,
    TeiParseError,
    TeiSerializeError,
    build_document_library,
    load_convention_rules,
    parse_document,
    promote_document,
    resolve_anchors,
    serialize_document,
)
from spokenkit.validate import ValidateOptions, validate_all

EXIT_OK = 0
EXIT_ISSUES = 1
EXIT_USAGE = 2


@dataclass
class Config:
    severity_overrides: dict[str, str] = field(default_factory=dict)
    rules: tuple[ConventionRule, ...] = ()
    category_map: dict[str, str] = field(default_factory=dict)


class CliError(Exception):
    pass


def load_config(data: str | bytes) -> Config:
    """Read the plain-text config: severity, convention and category lines."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    config = Config()
    rule_lines: list[str] = []
    for line_no, line in enumerate(data.splitlines(), start=1):
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        kind = fields[0]
        if kind == "severity" and len(fields) == 3:
            code, severity = fields[1], fields[2]
            if severity not in ("error", "warning"):
                raise CliError(f"config line {line_no}: severity must be error or warning")
            config.severity_overrides[code] = severity
        elif kind == "convention" and len(fields) == 4:
            rule_lines.append("\t".join(fields[1:]))
        elif kind == "category" and len(fields) == 3:
            config.category_map[fields[1]] = fields[2]
        else:
            raise CliError(f"config line {line_no}: unrecognised entry {kind!r}")
    if rule_lines:
        config.rules = load_convention_rules("\n".join(rule_lines))
    return config


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _load_library(path: str) -> TagsetLibrary:
    doc, _ = parse_document(_read(path))
    return build_document_library(doc)


def _out(stream, data: bytes | str) -> None:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    stream.write(data)


# ---------------------------------------------------------------- commands

def cmd_validate(args) -> int:
    config = load_config(_read(args.config)) if args.config else Config()
    registry = None
    if args.registry:
        try:
            registry = load_registry(_read(args.registry))
        except RegistryFormatError as exc:
            raise CliError(f"bad registry {args.registry}: {exc}") from exc
    library = None
    if args.tagset:
        try:
            library = _load_library(args.tagset)
        except (TeiParseError, TagsetError) as exc:
            raise CliError(f"bad tagset {args.tagset}: {exc}") from exc
    options = ValidateOptions(
        library=library,
        registry=registry,
        language=args.lang,
        severity_overrides=config.severity_overrides,
    )

    def process(path: str):
        data = _read(path)
        doc, _ = parse_document(data)
        doc, _ = resolve_anchors(doc)
        return validate_all(doc, options)

    def run(path: str):
        try:
            return path, process(path), None
        except (CliError, TeiParseError) as exc:
            return path, None, str(exc)

    if args.jobs > 1 and len(args.paths) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run, args.paths))
    else:
        results = [run(path) for path in args.paths]

    failed = False
    has_errors = False
    multi = len(args.paths) > 1
    for path, report, error in results:
        if error is not None:
            print(f"{path}: {error}", file=sys.stderr)
            failed = True
            continue
        if multi:
            _out(sys.stdout, f"== {path} ==\n")
        _out(sys.stdout, report.to_tsv() if args.format == "tsv" else report.to_text())
        has_errors = has_errors or report.has_errors
    if failed:
        return EXIT_USAGE
    return EXIT_ISSUES if has_errors else EXIT_OK


def cmd_convert(args) -> int:
    config = load_config(_read(args.config)) if args.config else Config()
    rules = None
    if args.conventions:
        try:
            rules = load_convention_rules(_read(args.conventions))
        except ConventionRuleError as exc:
            raise CliError(f"bad convention rules {args.conventions}: {exc}") from exc
    data = _read(args.path)

    if args.from_format == "tei":
        doc, warnings = parse_document(data)
        for warning in warnings:
            print(f"warning: {warning}", file=sys.stderr)
        if rules is not None:
            doc, findings = promote_document(doc, rules)
            for finding in findings:
                print(f"warning: {finding}", file=sys.stderr)
        if args.to_format == "tei":
            output = serialize_document(doc, materialize_timeline=args.materialize_timeline)
        else:
            doc, findings = resolve_anchors(doc)
            for finding in findings:
                print(f"warning: {finding.message}", file=sys.stderr)
            doc = sequence_implicit(doc)
            td, residue = tier_format.from_core(doc)
            for item in residue:
                print(f"residue: {item.annotation}: {item.reason}", file=sys.stderr)
            output = tier_format.serialize_tier(td).encode("utf-8")
    else:
        td = tier_format.parse_tier(data)
        if args.to_format == "tier":
            output = tier_format.serialize_tier(td).encode("utf-8")
        else:
            doc = tier_format.to_core(td, config.category_map or None)
            output = serialize_document(doc, materialize_timeline=args.materialize_timeline)

    if args.output:
        Path(args.output).write_bytes(output)
    else:
        _out(sys.stdout, output)
    return EXIT_OK


def cmd_overlaps(args) -> int:
    doc, _ = parse_document(_read(args.path))
    doc, findings = resolve_anchors(doc)
    for finding in findings:
        print(f"warning: {finding.message}", file=sys.stderr)
    doc = sequence_implicit(doc)
    report = overlaps_report(doc)
    for pair in report.pairs:
        _out(sys.stdout, f"{pair.a}\t{pair.b}\t{pair.shared.start}\t{pair.shared.end}\n")
    if report.skipped:
        print(f"{report.skipped} annotation(s) without a resolvable interval", file=sys.stderr)
    return EXIT_OK


def cmd_tag(args) -> int:
    library = _load_library(args.lib)
    if args.action == "list":
        for tag_id in library.tag_ids():
            _out(sys.stdout, tag_id + "\n")
        return EXIT_OK
    if not args.tag:
        raise CliError("tag expand requires a tag id")
    ref = args.tag[1:] if args.tag.startswith("#") else args.tag
    definition = library.tag_lib.get(ref)
    if definition is None:
        raise CliError(f"unknown tag {args.tag!r}")
    for feature_ref in definition.feats:
        feature = library.feature_lib[feature_ref]
        _out(sys.stdout, f"{feature.name}={atom_value(feature.value)}\n")
    return EXIT_OK


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spokenkit",
        description="Validate, convert and query annotated spoken-corpus documents.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check documents and report issues")
    p_validate.add_argument("paths", nargs="+", help="document files to validate")
    p_validate.add_argument("--registry", help="data-category registry file")
    p_validate.add_argument("--tagset", help="tagset document for analysis references")
    p_validate.add_argument("--lang", help="language code for domain restrictions")
    p_validate.add_argument("--format", choices=["text", "tsv"], default="text")
    p_validate.add_argument("--config", help="configuration file (severity overrides)")
    p_validate.add_argument("--jobs", type=int, default=1, help="parallel workers for many files")
    p_validate.set_defaults(func=cmd_validate)

    p_convert = sub.add_parser("convert", help="convert between the supported formats")
    p_convert.add_argument("path")
    p_convert.add_argument("--from", dest="from_format", choices=["tei", "tier"], required=True)
    p_convert.add_argument("--to", dest="to_format", choices=["tei", "tier"], required=True)
    p_convert.add_argument("--materialize-timeline", action="store_true")
    p_convert.add_argument("--conventions", help="convention rule file to apply")
    p_convert.add_argument("--config", help="configuration file (category mapping)")
    p_convert.add_argument("-o", "--output", help="output file (default: standard output)")
    p_convert.set_defaults(func=cmd_convert)

    p_overlaps = sub.add_parser("overlaps", help="table of overlapping timed annotations")
    p_overlaps.add_argument("path")
    p_overlaps.set_defaults(func=cmd_overlaps)

    p_tag = sub.add_parser("tag", help="tagset tooling")
    tag_sub = p_tag.add_subparsers(dest="action", required=True)
    p_expand = tag_sub.add_parser("expand", help="print a tag's feature-value pairs")
    p_expand.add_argument("tag", help="tag id")
    p_expand.add_argument("--lib", required=True, help="tagset document")
    p_expand.set_defaults(func=cmd_tag)
    p_list = tag_sub.add_parser("list", help="list the tags of a tagset")
    p_list.add_argument("--lib", required=True, help="tagset document")
    p_list.set_defaults(func=cmd_tag, tag=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        CliError,
        TeiParseError,
        TeiSerializeError,
        TagsetError,
        UnknownTagError,
        tier_format.TierParseError,
        RegistryFormatError,
    ) as exc:
        print(f"spokenkit: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
