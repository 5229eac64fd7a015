"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line; the lines are repeated in the pytest
terminal summary.
"""

import itertools
import json
import random
import time
from importlib import resources

import jsonschema

from archsheaf.cli import main
from archsheaf.consistency import (
    FamilyMember,
    LocalFamily,
    check_pairwise,
    glue,
    oracle_equivalence,
    pairwise_check_count,
    verify_unique,
)
from archsheaf.ingest import load
from archsheaf.oracle import certify, gen_instance, gen_property_maps
from archsheaf.presheaf import PresheafSpec, check_functor_laws, iter_sections, restrict, section_count
from archsheaf.properties import derived_glue_commutes, map_family
from archsheaf.topology import SiteSpec, union_all, view_open

from conftest import BUNDLED, CORPUS

RESULTS: list[str] = []


def record(criterion: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_ac1_three_view_reproduction():
    arch, _ = load(BUNDLED)
    p, site = arch.presheaf, arch.site
    opens = [view_open(site, v) for v in ("electrical", "thermal", "mechanical")]
    sizes = [section_count(p, u) for u in opens]
    whole = section_count(p, site.whole)

    eq = oracle_equivalence(p, opens)
    # each compatible family glues to exactly one design, found by exhaustive search
    compatible = 0
    unique = 0
    for combo in itertools.product(*(list(iter_sections(p, u)) for u in opens)):
        fam = LocalFamily(p, tuple(FamilyMember(f"U{i}", u, s) for i, (u, s) in enumerate(zip(opens, combo))))
        if check_pairwise(fam).compatible:
            compatible += 1
            unique += bool(verify_unique(fam, glue(fam)))
    round_trips = 0
    for g in iter_sections(p, site.whole):
        fam = LocalFamily(p, tuple(FamilyMember(f"U{i}", u, restrict(g, u)) for i, u in enumerate(opens)))
        round_trips += check_pairwise(fam).compatible and glue(fam).glued == g

    ok = (
        sizes == [12, 15, 20]
        and whole == 60
        and eq.held
        and eq.families == 3600
        and eq.compatible == 60
        and compatible == 60
        and unique == 60
        and round_trips == 60
    )
    record(
        "AC1 three-view reproduction",
        ok,
        f"|F(V)|={sizes}, |F(site)|={whole}, families={eq.families}, compatible={compatible}, "
        f"unique={unique}, re-glued={round_trips}",
    )


def test_ac1_runtime_budget():
    start = time.perf_counter()
    arch, _ = load(BUNDLED)
    opens = [m.open for m in arch.family.members]
    eq = oracle_equivalence(arch.presheaf, opens)
    elapsed = time.perf_counter() - start
    record("AC1 runtime", eq.held and elapsed < 1.0, f"exhaustive 3600-family check in {elapsed:.3f}s (< 1 s)")


def test_ac2_pair_count_arithmetic(capsys):
    code = main(["info", str(CORPUS / "ten_view.json")])
    out = capsys.readouterr().out
    ok = (
        pairwise_check_count(3) == 3
        and pairwise_check_count(10) == 45
        and code == 0
        and "pairwise checks: 45" in out
    )
    record("AC2 pairwise-count arithmetic", ok, "C(3,2)=3, C(10,2)=45, info on 10-view file prints 45")


def test_ac3_oracle_equivalence_over_seeds():
    start = time.perf_counter()
    seeds = 200
    failed = []
    families = 0
    for seed in range(seeds):
        report = certify(gen_instance(seed))
        families += report.families_examined
        if not report.all_held:
            failed.append((seed, report.failures()))
    elapsed = time.perf_counter() - start
    record(
        "AC3 pairwise <=> unique gluing",
        not failed and elapsed < 60,
        f"{seeds} seeds, {families} families, {len(failed)} failures, {elapsed:.1f}s (< 60 s)",
    )


def _law_sites():
    # The laws only see the points and their domain sizes; size vectors are
    # taken up to permutation of the points.
    for n in range(0, 5):
        for sizes in itertools.combinations_with_replacement(range(1, 5), n):
            pairs = [("a", "b"), ("b", "c"), ("a", "c")]
            site = SiteSpec.build(["a", "b", "c"], [(f"p{i}", pairs[i % 3]) for i in range(n)])
            yield PresheafSpec.build(site, {f"p{i}": k for i, k in enumerate(sizes)})


def test_ac4_functor_laws():
    checked = 0
    sites = 0
    bad = []
    for p in _law_sites():
        sites += 1
        report = check_functor_laws(p)
        checked += report.composition_checks + report.identity_checks
        if not (report.exhaustive and report.holds):
            bad.append(p)
    record("AC4 functor laws", not bad, f"{sites} presheaves, {checked} checks, {len(bad)} with counterexamples")


def test_ac5_compositionality():
    checked = 0
    bad = 0
    for seed in range(200):
        inst = gen_instance(seed)
        p = inst.presheaf
        opens = [u for _, u in inst.opens]
        labels = [lab for lab, _ in inst.opens]
        union = union_all(opens, p.site)
        pmaps = gen_property_maps(p, random.Random(seed), 2)
        # every compatible family is the restriction family of one global section
        for g in iter_sections(p, union):
            fam = LocalFamily(p, tuple(FamilyMember(l, u, restrict(g, u)) for l, u in zip(labels, opens)))
            for pm in pmaps:
                checked += 1
                bad += not derived_glue_commutes(pm, fam)

    arch, _ = load(CORPUS / "asymmetry.json")
    pm = arch.properties["power-class"]
    witness = (not check_pairwise(arch.family).compatible) and check_pairwise(map_family(pm, arch.family)).compatible
    record(
        "AC5 compositionality",
        bad == 0 and checked > 0 and witness,
        f"{checked} (family, map) commutation checks, {bad} failures; asymmetry witness present: {witness}",
    )


def test_ac6_conflict_localisation():
    arch, _ = load(BUNDLED)
    p = arch.presheaf
    hits = 0
    for point in p.site.point_names:
        for owner in [m for m in arch.family.members if point in m.open.members][:1]:
            vals = owner.section.assignment
            vals[point] = next(v for v in p.domain(point).values if v != vals[point])
            members = tuple(
                FamilyMember(m.label, m.open, p.section(m.open, vals)) if m is owner else m
                for m in arch.family.members
            )
            report = check_pairwise(LocalFamily(p, members))
            hits += len(report.conflicts) == 1 and report.conflicts[0].point == point
    record("AC6 conflict localisation", hits == 3, f"{hits}/3 single-point perturbations localised")


def test_ac7_cli_contract(capsys):
    schema = json.loads((resources.files("archsheaf") / "data" / "report.schema.json").read_text())
    cases = [(BUNDLED, 0), (CORPUS / "perturbed_ET.json", 1), (CORPUS / "malformed.json", 2)]
    ok = True
    notes = []
    for path, expected in cases:
        text_code = main(["check", str(path)])
        text_out = capsys.readouterr().out
        json_code = main(["check", str(path), "--json"])
        report = json.loads(capsys.readouterr().out)
        try:
            jsonschema.validate(report, schema)
            valid = True
        except jsonschema.ValidationError:
            valid = False
        agree = text_code == json_code and (
            report["outcome"] == "error" or f"outcome: {report['outcome']}" in text_out
        )
        ok &= text_code == expected and valid and agree
        notes.append(f"{path.name}->{text_code}")
    for argv in (["glue", str(BUNDLED), "--json", "--verify-unique"], ["derive", str(BUNDLED), "--property", "power-class", "--json"], ["info", str(BUNDLED), "--json"]):
        main(argv)
        try:
            jsonschema.validate(json.loads(capsys.readouterr().out), schema)
        except jsonschema.ValidationError:
            ok = False
    record("AC7 CLI contract", ok, ", ".join(notes) + "; JSON reports schema-valid; text/JSON agree")
