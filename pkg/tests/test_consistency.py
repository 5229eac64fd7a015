import itertools

import pytest
from hypothesis import given, settings, strategies as st

from archsheaf import consistency
from archsheaf.consistency import (
    Conflict,
    FamilyMember,
    LocalFamily,
    check_pairwise,
    glue,
    is_gluing,
    oracle_equivalence,
    pairwise_check_count,
    verify_unique,
)
from archsheaf.errors import CapExceededError, IncompatibleFamilyError, MixedPresheafError
from archsheaf.oracle import gen_instance
from archsheaf.presheaf import PresheafSpec, Section, iter_sections, restrict
from archsheaf.topology import SiteSpec, view_open

VIEWS = {"elec": "electrical", "therm": "thermal", "mech": "mechanical"}
COMPATIBLE = {
    "elec": {"EM": "2", "ET": "1"},
    "therm": {"ET": "1", "TM": "4"},
    "mech": {"EM": "2", "TM": "4"},
}


def family(p, designs):
    return LocalFamily.of(
        p, {lab: p.section(view_open(p.site, VIEWS[lab]), a) for lab, a in designs.items()}
    )


def brute_gluings(p, fam):
    """Every section over the family's union that restricts to each member."""
    pts = [x for x in p.site.point_names if any(x in m.open.members for m in fam.members)]
    found = []
    for combo in itertools.product(*(p.domain(x).values for x in pts)):
        g = dict(zip(pts, combo))
        if all(all(g[x] == m.section[x] for x in m.open.points) for m in fam.members):
            found.append(g)
    return found


@pytest.fixture
def compatible(presheaf):
    return family(presheaf, COMPATIBLE)


def test_pair_counts():
    assert pairwise_check_count(10) == 45
    assert pairwise_check_count(3) == 3
    assert pairwise_check_count(1) == 0
    assert pairwise_check_count(0) == 0


def test_compatible_family_has_no_conflicts(compatible):
    # direct lookup on the three singleton overlaps
    d = COMPATIBLE
    assert d["elec"]["ET"] == d["therm"]["ET"]
    assert d["elec"]["EM"] == d["mech"]["EM"]
    assert d["therm"]["TM"] == d["mech"]["TM"]
    report = check_pairwise(compatible)
    assert report.compatible and report.pairs_checked == 3


def test_single_conflict(presheaf):
    designs = {k: dict(v) for k, v in COMPATIBLE.items()}
    designs["therm"]["ET"] = "0"
    report = check_pairwise(family(presheaf, designs))
    assert report.conflicts == (Conflict("elec", "therm", "ET", "1", "0"),)


def test_single_member(presheaf):
    fam = family(presheaf, {"elec": COMPATIBLE["elec"]})
    assert check_pairwise(fam).compatible
    g = glue(fam)
    assert g.glued == fam.members[0].section


def test_glue_matches_brute_force(presheaf, compatible):
    brute = brute_gluings(presheaf, compatible)
    assert brute == [{"EM": "2", "ET": "1", "TM": "4"}]
    g = glue(compatible)
    assert g.glued.assignment == brute[0]
    assert g.witness == {"EM": "elec", "ET": "elec", "TM": "therm"}
    assert is_gluing(compatible, g.glued)


def test_witness_choice_is_irrelevant(compatible):
    g = glue(compatible)
    for x in g.glued.domain.points:
        values = {m.section[x] for m in compatible.members if x in m.open.members}
        assert values == {g.glued[x]}


def test_glue_empty_family(presheaf):
    g = glue(LocalFamily(presheaf, ()))
    assert g.glued.domain == presheaf.site.empty and g.glued.values == ()


def test_glue_incompatible_carries_report(presheaf):
    designs = {k: dict(v) for k, v in COMPATIBLE.items()}
    designs["mech"]["TM"] = "0"
    with pytest.raises(IncompatibleFamilyError) as info:
        glue(family(presheaf, designs))
    assert info.value.report.points() == {"TM"}


def test_glue_target_is_union_not_site(presheaf):
    fam = family(presheaf, {"elec": COMPATIBLE["elec"]})
    assert glue(fam).glued.domain.members == {"EM", "ET"}


def test_verify_unique(presheaf, compatible):
    v = verify_unique(compatible, glue(compatible))
    assert v and v.exhaustive and v.candidates == 60 and v.matches == 1
    v = verify_unique(compatible, glue(compatible), cap=10)
    assert v.unique and not v.exhaustive


def test_verify_unique_two_points():
    s = SiteSpec.build(["a", "b", "c"], [("x", "ab"), ("y", "bc")])
    p = PresheafSpec.build(s, {"x": 4, "y": 4})
    fam = LocalFamily.of(
        p,
        {
            "A": p.section(view_open(s, "a"), {"x": "3"}),
            "B": p.section(view_open(s, "b"), {"x": "3", "y": "1"}),
        },
    )
    v = verify_unique(fam, glue(fam))
    assert v.unique and v.candidates == 16
    assert len(brute_gluings(p, fam)) == 1


def test_verify_unique_rejects_wrong_gluing(presheaf, compatible):
    g = glue(compatible)
    bogus = consistency.GluingResult(Section(g.glued.domain, ("0", "1", "4")), g.witness)
    assert not verify_unique(compatible, bogus)


def test_mixed_presheaf(presheaf):
    other = SiteSpec.build(["a", "b"], [("x", "ab")])
    q = PresheafSpec.build(other, {"x": 2})
    stray = q.section(other.whole, {"x": "1"})
    with pytest.raises(MixedPresheafError):
        LocalFamily.of(presheaf, {"stray": stray})
    big = PresheafSpec.build(presheaf.site, {"EM": 9, "ET": 9, "TM": 9})
    with pytest.raises(MixedPresheafError):
        LocalFamily.of(presheaf, {"e": big.section(presheaf.site.open(["EM"]), {"EM": "8"})})


def test_oracle_equivalence_three_view(presheaf):
    opens = [view_open(presheaf.site, v) for v in VIEWS.values()]
    report = oracle_equivalence(presheaf, opens)
    assert report.held
    assert report.families == 12 * 15 * 20 == 3600
    assert report.compatible == 60 == report.glued
    with pytest.raises(CapExceededError, match="3600"):
        oracle_equivalence(presheaf, opens, cap=1000)


def test_oracle_equivalence_trivial(presheaf):
    whole = presheaf.site.whole
    report = oracle_equivalence(presheaf, [whole])
    assert report.held and report.families == report.compatible == 60


def test_oracle_equivalence_random_four_point():
    s = SiteSpec.build(["a", "b", "c"], [("w", "ab"), ("x", "bc"), ("y", "ac"), ("z", "bc")])
    p = PresheafSpec.build(s, {"w": 2, "x": 3, "y": 2, "z": 3})
    opens = [view_open(s, v) for v in "abc"]
    report = oracle_equivalence(p, opens)
    assert report.held and report.compatible == 2 * 3 * 2 * 3


def test_pair_comparisons_are_bounded(monkeypatch, presheaf):
    calls = []
    real = consistency.intersect

    def counting(a, b):
        calls.append((a, b))
        return real(a, b)

    monkeypatch.setattr(consistency, "intersect", counting)
    for n in range(0, 4):
        calls.clear()
        members = dict(list(COMPATIBLE.items())[:n])
        report = check_pairwise(family(presheaf, members))
        assert len(calls) == report.pairs_checked == pairwise_check_count(n)


def _instances():
    for seed in range(40):
        inst = gen_instance(seed)
        if inst.family_count <= 600:
            yield inst


@pytest.mark.parametrize("inst", list(_instances()), ids=lambda i: f"seed{i.seed}")
def test_round_trips(inst):
    p = inst.presheaf
    opens = [u for _, u in inst.opens]
    labels = [lab for lab, _ in inst.opens]
    union = consistency.union_all(opens, p.site)
    n_compatible = 0
    for combo in itertools.product(*(list(iter_sections(p, u)) for u in opens)):
        fam = LocalFamily(p, tuple(FamilyMember(l, u, s) for l, u, s in zip(labels, opens, combo)))
        if check_pairwise(fam).compatible:
            n_compatible += 1
            g = glue(fam).glued
            assert all(restrict(g, m.open) == m.section for m in fam.members)
    # restriction round trip and the bijection count
    globals_ = list(iter_sections(p, union))
    for s in globals_:
        fam = LocalFamily(p, tuple(FamilyMember(l, u, restrict(s, u)) for l, u in zip(labels, opens)))
        assert check_pairwise(fam).compatible
        assert glue(fam).glued == s
    assert n_compatible == len(globals_)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.data())
def test_flipping_one_point_localises_conflicts(seed, data):
    inst = gen_instance(seed)
    p = inst.presheaf
    opens = [u for _, u in inst.opens]
    labels = [lab for lab, _ in inst.opens]
    union = consistency.union_all(opens, p.site)
    s = Section(union, tuple(data.draw(st.sampled_from(p.domain(x).values)) for x in union.points))
    secs = [restrict(s, u) for u in opens]
    # pick a member and a point it shares with someone else, with a spare value
    shared = [
        (i, x)
        for i, u in enumerate(opens)
        for x in u.points
        if len(p.domain(x)) > 1 and any(x in v.members for j, v in enumerate(opens) if j != i)
    ]
    if not shared:
        return
    i, x = data.draw(st.sampled_from(shared))
    old = secs[i][x]
    new = data.draw(st.sampled_from([v for v in p.domain(x).values if v != old]))
    flipped = dict(secs[i].assignment, **{x: new})
    secs[i] = p.section(opens[i], flipped)
    fam = LocalFamily(p, tuple(FamilyMember(l, u, sec) for l, u, sec in zip(labels, opens, secs)))
    report = check_pairwise(fam)
    partners = [labels[j] for j, v in enumerate(opens) if j != i and x in v.members]
    assert report.points() == {x}
    assert len(report.conflicts) == len(partners)
    for c in report.conflicts:
        assert labels[i] in (c.member_a, c.member_b)
        assert {c.value_a, c.value_b} == {old, new}
