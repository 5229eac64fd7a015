"""Command-line interface.

Exit codes
----------
    0  consistent (or, for ``info``, the file is valid)
    1  conflicts between designs
    2  usage, I/O or validation error
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import sys
import time
from pathlib import Path
from typing import Any, Sequence

from .consistency import (
    ConflictReport,
    check_pairwise,
    glue,
    is_gluing,
    pairwise_check_count,
    verify_unique,
)
from .errors import ArchSheafError
from .ingest import Architecture, Diagnostic, InvalidDocument, load
from .oracle import certify, gen_instance
from .presheaf import Section, enum_cap, section_count
from .properties import derived_glue_commutes, map_family
from .topology import intersect, is_cover, view_open

EXIT_OK = 0
EXIT_CONFLICTS = 1
EXIT_ERROR = 2


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _section_json(s: Section) -> dict[str, Any]:
    return {"domain": list(s.domain.points), "assignment": s.assignment}


def _conflicts_json(report: ConflictReport) -> list[dict[str, str]]:
    return [
        {
            "member_a": c.member_a,
            "member_b": c.member_b,
            "point": c.point,
            "value_a": c.value_a,
            "value_b": c.value_b,
        }
        for c in report.conflicts
    ]


class Run:
    """Accumulates one command's report and renders it as text or JSON."""

    def __init__(self, command: str, path: str):
        self.command = command
        self.path = path
        self.digest: str | None = None
        self.outcome = "error"
        self.conflicts: ConflictReport | None = None
        self.glued: Section | None = None
        self.stats = {"pair_checks": 0, "points": 0, "views": 0, "designs": 0}
        self.diagnostics: list[Diagnostic] = []
        self.details: dict[str, Any] = {}
        self.lines: list[str] = []

    def to_json(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "input": self.path,
            "input_digest": self.digest,
            "outcome": self.outcome,
            "conflicts": None if self.conflicts is None else _conflicts_json(self.conflicts),
            "glued": None if self.glued is None else _section_json(self.glued),
            "stats": self.stats,
            "diagnostics": [d.to_json() for d in self.diagnostics],
            "details": self.details,
        }

    def emit(self, as_json: bool) -> None:
        if as_json:
            print(json.dumps(self.to_json(), indent=2, ensure_ascii=False))
            return
        for d in self.diagnostics:
            print(f"{self.path}: {d}", file=sys.stderr)
        for line in self.lines:
            print(line)


def _load(run: Run) -> Architecture | None:
    try:
        data = Path(run.path).read_bytes()
    except OSError as exc:
        run.diagnostics.append(Diagnostic("error", "E-IO", f"cannot read file: {exc.strerror or exc}"))
        return None
    run.digest = "sha256:" + hashlib.sha256(data).hexdigest()
    try:
        arch, warnings = load(data)
    except InvalidDocument as exc:
        run.diagnostics.extend(exc.diagnostics)
        return None
    run.diagnostics.extend(warnings)
    run.stats.update(
        points=len(arch.site.points),
        views=len(arch.site.views),
        designs=len(arch.family.members),
    )
    return arch


def _check(run: Run, arch: Architecture) -> ConflictReport:
    report = check_pairwise(arch.family)
    run.conflicts = report
    run.stats["pair_checks"] = report.pairs_checked
    run.outcome = "consistent" if report.compatible else "conflicts"
    return report


def _conflict_lines(report: ConflictReport) -> list[str]:
    return [
        f"conflict: {c.member_a} vs {c.member_b} at {c.point}: {c.value_a!r} != {c.value_b!r}"
        for c in report.conflicts
    ]


def _fmt_open(points: Sequence[str]) -> str:
    return "{" + ", ".join(points) + "}"


def _fmt_section(s: Section) -> str:
    return "{" + ", ".join(f"{p}={v}" for p, v in zip(s.domain.points, s.values)) + "}"


def cmd_check(args) -> tuple[int, Run]:
    run = Run("check", args.file)
    arch = _load(run)
    if arch is None:
        return EXIT_ERROR, run
    report = _check(run, arch)
    run.lines.append(f"{report.pairs_checked} pairwise checks, {len(report.conflicts)} conflicts")
    run.lines.extend(_conflict_lines(report))
    run.lines.append(f"outcome: {run.outcome}")
    return (EXIT_OK if report.compatible else EXIT_CONFLICTS), run


def cmd_glue(args) -> tuple[int, Run]:
    run = Run("glue", args.file)
    arch = _load(run)
    if arch is None:
        return EXIT_ERROR, run
    report = _check(run, arch)
    if not report.compatible:
        run.lines.append(f"{report.pairs_checked} pairwise checks, {len(report.conflicts)} conflicts")
        run.lines.extend(_conflict_lines(report))
        run.lines.append("outcome: conflicts (no glued design)")
        return EXIT_CONFLICTS, run
    result = glue(arch.family, report)
    if not is_gluing(arch.family, result.glued):
        raise ArchSheafError("glued design does not restrict to every member")
    covers = is_cover(arch.family.opens, arch.site.whole)
    run.glued = result.glued
    run.details = {"covers_site": covers, "witness": result.witness}
    run.lines.append(f"glued design: {_fmt_section(result.glued)}")
    run.lines.append(f"covers site: {str(covers).lower()}")
    if args.verify_unique:
        verdict = verify_unique(arch.family, result, enum_cap())
        run.details["unique"] = {
            "unique": verdict.unique,
            "exhaustive": verdict.exhaustive,
            "candidates": verdict.candidates,
            "matches": verdict.matches,
        }
        how = (
            f"exhaustive over {verdict.candidates} candidates, {verdict.matches} match"
            if verdict.exhaustive
            else "direct argument only (enumeration cap exceeded)"
        )
        run.lines.append(f"unique: {str(verdict.unique).lower()} ({how})")
        if not verdict.unique:
            raise ArchSheafError("gluing failed the uniqueness check")
    run.lines.append(f"outcome: {run.outcome}")
    return EXIT_OK, run


def cmd_derive(args) -> tuple[int, Run]:
    run = Run("derive", args.file)
    arch = _load(run)
    if arch is None:
        return EXIT_ERROR, run
    pm = arch.properties.get(args.property)
    if pm is None:
        known = ", ".join(arch.properties) or "none"
        run.diagnostics.append(
            Diagnostic("error", "E-UNKNOWN-PROPERTY", f"unknown property {args.property!r} (declared: {known})")
        )
        run.outcome = "error"
        return EXIT_ERROR, run
    report = _check(run, arch)
    run.details = {"property": pm.name}
    if not report.compatible:
        run.lines.extend(_conflict_lines(report))
        run.lines.append("outcome: conflicts (derivation needs compatible designs)")
        return EXIT_CONFLICTS, run
    mapped = map_family(pm, arch.family)
    base = glue(arch.family, report)
    derived = glue(mapped)
    commutes = derived_glue_commutes(pm, arch.family)
    run.glued = base.glued
    run.details.update(
        derived_designs={m.label: m.section.assignment for m in mapped.members},
        derived_glued=_section_json(derived.glued),
        commutes=commutes,
    )
    run.lines.append(f"property: {pm.name}")
    for m in mapped.members:
        run.lines.append(f"derived {m.label}: {_fmt_section(m.section)}")
    run.lines.append(f"derived glued design: {_fmt_section(derived.glued)}")
    run.lines.append(f"commutes with gluing: {str(commutes).lower()}")
    if not commutes:
        raise ArchSheafError("derived gluing does not commute with the property map")
    run.lines.append(f"outcome: {run.outcome}")
    return EXIT_OK, run


def cmd_info(args) -> tuple[int, Run]:
    run = Run("info", args.file)
    arch = _load(run)
    if arch is None:
        return EXIT_ERROR, run
    site, p = arch.site, arch.presheaf
    _check(run, arch)
    n_views = len(site.views)
    pairwise = pairwise_check_count(n_views)
    global_size = section_count(p, site.whole)
    opens = {v: view_open(site, v) for v in site.view_names}
    run.details = {
        "points": list(site.point_names),
        "views": {
            v: {"open": list(u.points), "sections": section_count(p, u)} for v, u in opens.items()
        },
        "overlaps": [
            {"views": [a, b], "points": list(intersect(opens[a], opens[b]).points)}
            for a, b in itertools.combinations(site.view_names, 2)
        ],
        "pairwise_checks": pairwise,
        "ordered_pair_indices": n_views * n_views,
        "global_sections": global_size,
    }
    run.lines.append(f"points: {len(site.points)} {_fmt_open(site.point_names)}")
    run.lines.append(f"views: {n_views}; pairwise checks: {pairwise}; |F(site)| = {global_size}")
    for v, u in opens.items():
        run.lines.append(f"view {v}: {_fmt_open(u.points)} |F| = {section_count(p, u)}")
    for item in run.details["overlaps"]:
        a, b = item["views"]
        run.lines.append(f"overlap {a} & {b}: {_fmt_open(item['points'])}")
    run.lines.append(f"designs: {len(arch.family.members)}; outcome: {run.outcome}")
    return EXIT_OK, run


def cmd_selftest(args) -> int:
    start = time.perf_counter()
    failed = 0
    families = 0
    for seed in range(args.seeds):
        report = certify(gen_instance(seed))
        families += report.families_examined
        if not report.all_held:
            failed += 1
            print(f"seed {seed}: FAILED {', '.join(report.failures())}")
            for line in report.summary_lines():
                print(f"  {line}")
    elapsed = time.perf_counter() - start
    print(f"selftest: {args.seeds} seeds, {families} families, {failed} failed ({elapsed:.1f}s)")
    return EXIT_CONFLICTS if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="archsheaf", description="Multi-view consistency checks for architecture files.")
    sub = parser.add_subparsers(dest="command", metavar="{check,glue,derive,info}", parser_class=_ArgumentParser)
    sub.required = True

    p = sub.add_parser("check", help="check pairwise compatibility of all designs")
    p.add_argument("file")
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("glue", help="glue compatible designs into the unique global design")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.add_argument("--verify-unique", action="store_true", help="exhaustive uniqueness check under the enumeration cap")
    p.set_defaults(func=cmd_glue)

    p = sub.add_parser("derive", help="propagate a declared property through gluing")
    p.add_argument("file")
    p.add_argument("--property", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("info", help="summarise the site and design spaces")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("selftest")
    p.add_argument("--seeds", type=int, default=200)
    p.set_defaults(func=None)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code in (EXIT_OK, EXIT_ERROR) else EXIT_ERROR
    if args.command == "selftest":
        try:
            return cmd_selftest(args)
        except Exception as exc:  # noqa: BLE001 - exit-code contract
            print(f"archsheaf: error: {exc}", file=sys.stderr)
            return EXIT_ERROR
    as_json = getattr(args, "json", False)
    try:
        code, run = args.func(args)
    except Exception as exc:  # noqa: BLE001 - exit-code contract
        run = Run(args.command, args.file)
        run.diagnostics.append(Diagnostic("error", "E-INTERNAL", str(exc)))
        code = EXIT_ERROR
    if code == EXIT_ERROR:
        run.outcome = "error"
    run.emit(as_json)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
