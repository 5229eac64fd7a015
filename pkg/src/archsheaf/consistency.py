"""Pairwise compatibility, conflict reports and unique gluing.

A family of local sections is compatible when every two members agree on
their overlap. Compatible families glue to exactly one section over the
union of their opens; incompatible ones do not glue at all.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import CapExceededError, IncompatibleFamilyError, MixedPresheafError, SiteError
from .presheaf import (
    PresheafSpec,
    Section,
    enum_cap,
    iter_sections,
    restrict,
    section_count,
)
from .topology import OpenSet, intersect, union_all

__all__ = [
    "FamilyMember",
    "LocalFamily",
    "Conflict",
    "ConflictReport",
    "GluingResult",
    "UniquenessVerdict",
    "EquivalenceReport",
    "check_pairwise",
    "pairwise_check_count",
    "glue",
    "is_gluing",
    "verify_unique",
    "oracle_equivalence",
]


@dataclass(frozen=True)
class FamilyMember:
    label: str
    open: OpenSet
    section: Section


@dataclass(frozen=True)
class LocalFamily:
    presheaf: PresheafSpec
    members: tuple[FamilyMember, ...]

    def __post_init__(self):
        members = tuple(self.members)
        object.__setattr__(self, "members", members)
        labels = [m.label for m in members]
        if len(set(labels)) != len(labels):
            raise SiteError("family labels must be unique")
        site = self.presheaf.site
        for m in members:
            if m.open.site is not site and m.open.site != site:
                raise MixedPresheafError(f"member {m.label!r} lives over a different site")
            if m.section.domain != m.open:
                raise SiteError(f"member {m.label!r}: section domain differs from its open")
            if not self.presheaf.is_valid(m.section):
                raise MixedPresheafError(
                    f"member {m.label!r} has values outside the presheaf's domains"
                )

    @classmethod
    def of(cls, presheaf: PresheafSpec, sections: Mapping[str, Section]) -> "LocalFamily":
        return cls(
            presheaf,
            tuple(FamilyMember(label, s.domain, s) for label, s in sections.items()),
        )

    @property
    def opens(self) -> list[OpenSet]:
        return [m.open for m in self.members]

    @property
    def union(self) -> OpenSet:
        return union_all(self.opens, self.presheaf.site)

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class Conflict:
    member_a: str
    member_b: str
    point: str
    value_a: str
    value_b: str


@dataclass(frozen=True)
class ConflictReport:
    conflicts: tuple[Conflict, ...] = ()
    # unordered member pairs compared, including pairs with empty overlap
    pairs_checked: int = 0

    @property
    def compatible(self) -> bool:
        return not self.conflicts

    def __bool__(self) -> bool:
        return bool(self.conflicts)

    def __len__(self) -> int:
        return len(self.conflicts)

    def points(self) -> set[str]:
        return {c.point for c in self.conflicts}


def pairwise_check_count(n: int) -> int:
    """Unordered pairs among ``n`` members."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return n * (n - 1) // 2


def check_pairwise(f: LocalFamily) -> ConflictReport:
    """Compare every unordered pair of members on their overlap."""
    conflicts: list[Conflict] = []
    pairs = 0
    for a, b in itertools.combinations(f.members, 2):
        pairs += 1
        overlap = intersect(a.open, b.open)
        if not overlap.members:
            continue
        ra = restrict(a.section, overlap)
        rb = restrict(b.section, overlap)
        if ra == rb:
            continue
        for x, va, vb in zip(overlap.points, ra.values, rb.values):
            if va != vb:
                conflicts.append(Conflict(a.label, b.label, x, va, vb))
    return ConflictReport(tuple(conflicts), pairs)


@dataclass(frozen=True)
class GluingResult:
    glued: Section
    # point -> label of the member the value was read from
    witness: dict[str, str]


def glue(f: LocalFamily, report: ConflictReport | None = None) -> GluingResult:
    """Glue a compatible family over the union of its opens.

    Raises :class:`IncompatibleFamilyError` carrying the conflict report if
    any two members disagree.
    """
    report = check_pairwise(f) if report is None else report
    if report.conflicts:
        raise IncompatibleFamilyError(report)
    target = f.union
    values: list[str] = []
    witness: dict[str, str] = {}
    for x in target.points:
        for m in f.members:
            if x in m.open.members:
                values.append(m.section[x])
                witness[x] = m.label
                break
    return GluingResult(Section(target, tuple(values)), witness)


def is_gluing(f: LocalFamily, s: Section) -> bool:
    """True iff ``s`` lives over the family's union and restricts to every member."""
    if s.domain != f.union:
        return False
    return all(restrict(s, m.open) == m.section for m in f.members)


@dataclass(frozen=True)
class UniquenessVerdict:
    unique: bool
    exhaustive: bool
    candidates: int = 0
    matches: int = 0

    def __bool__(self) -> bool:
        return self.unique


def verify_unique(f: LocalFamily, g: GluingResult, cap: int | None = None) -> UniquenessVerdict:
    """Check that ``g.glued`` is the only section gluing ``f``.

    The direct argument: every point of the union is covered by a member, so
    its value is forced. When ``|F(union)|`` fits the cap an exhaustive
    search over all candidates confirms it; otherwise the verdict is marked
    non-exhaustive.
    """
    cap = enum_cap() if cap is None else cap
    covered = set().union(*(m.open.members for m in f.members)) if f.members else set()
    direct = is_gluing(f, g.glued) and covered == g.glued.domain.members
    n = section_count(f.presheaf, g.glued.domain)
    if n > cap:
        return UniquenessVerdict(direct, exhaustive=False)
    matches = [s for s in iter_sections(f.presheaf, g.glued.domain) if is_gluing(f, s)]
    unique = direct and len(matches) == 1 and matches[0] == g.glued
    return UniquenessVerdict(unique, exhaustive=True, candidates=n, matches=len(matches))


@dataclass
class EquivalenceReport:
    families: int = 0
    compatible: int = 0
    glued: int = 0
    global_sections: int = 0
    # first family (label -> section) that broke the equivalence
    counterexample: tuple[Section, ...] | None = None

    @property
    def held(self) -> bool:
        return self.counterexample is None


def family_count(p: PresheafSpec, opens: Sequence[OpenSet]) -> int:
    return math.prod(section_count(p, u) for u in opens)


def oracle_equivalence(
    p: PresheafSpec, opens: Sequence[OpenSet], cap: int | None = None
) -> EquivalenceReport:
    """Check "pairwise compatible iff uniquely gluable" over every family on ``opens``.

    Compatibility comes from :func:`check_pairwise`. Gluings are found by
    exhaustive search: each candidate section over the union is restricted
    to every open once, and families are matched against those restriction
    tuples.
    """
    cap = enum_cap() if cap is None else cap
    opens = list(opens)
    n_families = family_count(p, opens)
    if n_families > cap:
        raise CapExceededError("families", n_families, cap)
    target = union_all(opens, p.site)
    n_global = section_count(p, target)
    if n_global > cap:
        raise CapExceededError(f"|F({target!r})|", n_global, cap)

    gluings: dict[tuple[Section, ...], int] = {}
    for s in iter_sections(p, target):
        key = tuple(restrict(s, u) for u in opens)
        gluings[key] = gluings.get(key, 0) + 1

    report = EquivalenceReport(global_sections=n_global)
    labels = [f"U{i}" for i in range(len(opens))]
    per_open = [list(iter_sections(p, u)) for u in opens]
    for combo in itertools.product(*per_open):
        report.families += 1
        fam = LocalFamily(
            p, tuple(FamilyMember(lab, u, s) for lab, u, s in zip(labels, opens, combo))
        )
        compatible = check_pairwise(fam).compatible
        n_glue = gluings.get(combo, 0)
        report.compatible += compatible
        report.glued += n_glue > 0
        if n_glue > 1 or compatible != (n_glue == 1):
            if report.counterexample is None:
                report.counterexample = combo
    return report
