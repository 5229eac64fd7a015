"""Brute-force certification on small random instances.

The oracle works on plain tuples and dicts taken from the raw instance
data. It restricts by projection and checks agreement on its own, and
finds gluings by scanning every candidate over the union. It never calls
:func:`archsheaf.consistency.glue` to decide existence or uniqueness; the
engine's answers are only compared against it.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Mapping

from .consistency import (
    FamilyMember,
    LocalFamily,
    check_pairwise,
    glue,
    oracle_equivalence,
    verify_unique,
)
from .errors import IncompatibleFamilyError
from .presheaf import PresheafSpec, check_functor_laws, enum_cap, restrict
from .properties import PropertyMap, derived_glue_commutes, identity_property, map_family
from .topology import OpenSet, SiteSpec, view_open

__all__ = [
    "Bounds",
    "SmallInstance",
    "PropertyResult",
    "CertReport",
    "gen_instance",
    "gen_property_maps",
    "certify",
    "PROPERTIES",
]

PROPERTIES = (
    "pairwise_iff_unique_gluing",
    "engine_compatibility_agrees",
    "engine_glue_matches_oracle",
    "gluing_round_trip",
    "uniqueness_verified",
    "restriction_round_trip",
    "bijection",
    "oracle_equivalence",
    "functor_laws",
    "mapped_compatibility_inherited",
    "derived_commutation",
)


@dataclass(frozen=True)
class Bounds:
    max_points: int = 5
    max_views: int = 4
    max_domain: int = 4
    # generated instances are shrunk until their family count fits
    max_families: int = 4096


@dataclass(frozen=True)
class SmallInstance:
    seed: int | None
    site: SiteSpec
    presheaf: PresheafSpec
    opens: tuple[tuple[str, OpenSet], ...]

    @classmethod
    def from_presheaf(
        cls, presheaf: PresheafSpec, opens: Mapping[str, OpenSet], seed: int | None = None
    ) -> "SmallInstance":
        return cls(seed, presheaf.site, presheaf, tuple(opens.items()))

    @property
    def family_count(self) -> int:
        return math.prod(
            len(self.presheaf.domain(p)) for _, u in self.opens for p in u.points
        )


def gen_instance(seed: int, bounds: Bounds = Bounds()) -> SmallInstance:
    """Deterministic random instance for ``seed``."""
    rng = random.Random(seed)
    # mostly non-trivial sites; single-view and point-free ones stay in the mix
    if bounds.max_views < 2 or rng.random() < 0.1:
        n_views = 1
    else:
        n_views = rng.randint(2, bounds.max_views)
    views = [f"V{i}" for i in range(n_views)]
    n_points = 0
    if n_views >= 2 and rng.random() >= 0.05:
        n_points = rng.randint(1, bounds.max_points)
    interfaces = [(f"p{i}", tuple(rng.sample(views, 2))) for i in range(n_points)]
    sizes = {name: rng.randint(1, bounds.max_domain) for name, _ in interfaces}
    site = SiteSpec.build(views, interfaces)

    chosen = views
    if n_views > 1 and rng.random() < 0.25:
        chosen = sorted(rng.sample(views, rng.randint(1, n_views - 1)))
    opens = {v: view_open(site, v) for v in chosen}

    multiplicity = {p: sum(p in u.members for u in opens.values()) for p in sizes}

    def families() -> int:
        return math.prod(sizes[p] ** multiplicity[p] for p in sizes)

    while families() > bounds.max_families:
        worst = max(
            (p for p in sizes if multiplicity[p] and sizes[p] > 1),
            key=lambda p: (sizes[p] ** multiplicity[p], -site.position(p)),
        )
        sizes[worst] -= 1
    return SmallInstance(seed, site, PresheafSpec.build(site, sizes), tuple(opens.items()))


def gen_property_maps(p: PresheafSpec, rng: random.Random, count: int = 2) -> list[PropertyMap]:
    """Identity plus ``count`` random pointwise maps, most of them collapsing."""
    maps = [identity_property(p)]
    for k in range(count):
        per_point = {}
        codomains = {}
        for d in p.domains:
            n_out = rng.randint(1, len(d.values))
            labels = [f"c{i}" for i in range(n_out)]
            per_point[d.point] = {v: rng.choice(labels) for v in d.values}
            codomains[d.point] = labels
        maps.append(PropertyMap.from_tables(f"random{k}", per_point, codomains))
    return maps


@dataclass
class PropertyResult:
    held: bool = True
    checked: int = 0
    counterexample: str | None = None

    def record(self, ok: bool, describe) -> None:
        self.checked += 1
        if not ok and self.held:
            self.held = False
            self.counterexample = describe()


@dataclass
class CertReport:
    seed: int | None
    points: int
    views: int
    families_total: int
    families_examined: int = 0
    compatible_families: int = 0
    sampled: bool = False
    results: dict[str, PropertyResult] = field(default_factory=dict)

    @property
    def all_held(self) -> bool:
        return all(r.held for r in self.results.values())

    def failures(self) -> list[str]:
        return [name for name, r in self.results.items() if not r.held]

    def summary_lines(self) -> list[str]:
        lines = []
        for name in PROPERTIES:
            r = self.results.get(name)
            if r is None:
                continue
            mark = "held" if r.held else "FAILED"
            line = f"{name}: {mark} ({r.checked} checks)"
            if r.counterexample:
                line += f" counterexample: {r.counterexample}"
            lines.append(line)
        return lines


def _raw_agree(a_pts, a_vals, b_pts, b_vals) -> bool:
    b = dict(zip(b_pts, b_vals))
    return all(b.get(x, v) == v for x, v in zip(a_pts, a_vals))


def certify(
    instance: SmallInstance,
    cap: int | None = None,
    *,
    samples: int = 2000,
    maps: int = 2,
    uniqueness_checks: int = 8,
) -> CertReport:
    """Exhaustively certify the gluing properties on ``instance``.

    With more families than ``cap``, ``samples`` seeded random families are
    examined instead and the report is flagged ``sampled``.
    """
    cap = enum_cap() if cap is None else cap
    p = instance.presheaf
    site = instance.site
    labels = [lab for lab, _ in instance.opens]
    opens = [u for _, u in instance.opens]

    # Raw data: point tuples per open, in site declaration order.
    order = {name: i for i, name in enumerate(site.point_names)}
    doms = {d.point: d.values for d in p.domains}
    raw_opens = [tuple(sorted(u.members, key=order.__getitem__)) for u in opens]
    union_pts = tuple(sorted(set().union(*map(set, raw_opens)), key=order.__getitem__))

    total = math.prod(len(doms[x]) for pts in raw_opens for x in pts)
    report = CertReport(instance.seed, len(site.points), len(site.views), total)
    res = {name: PropertyResult() for name in PROPERTIES}
    report.results = res

    # Oracle gluing table: every candidate over the union, keyed by its projections.
    candidates = [dict(zip(union_pts, vals)) for vals in itertools.product(*(doms[x] for x in union_pts))]
    projections: dict[tuple, list[dict]] = {}
    for g in candidates:
        key = tuple(tuple(g[x] for x in pts) for pts in raw_opens)
        projections.setdefault(key, []).append(g)

    per_open = [list(itertools.product(*(doms[x] for x in pts))) for pts in raw_opens]
    if total <= cap:
        families = itertools.product(*per_open)
    else:
        report.sampled = True
        rng = random.Random(instance.seed if instance.seed is not None else 0)
        families = (tuple(rng.choice(vals) for vals in per_open) for _ in range(samples))

    map_rng = random.Random(f"maps:{instance.seed}")
    pmaps = gen_property_maps(p, map_rng, maps)

    def engine_family(raw):
        return LocalFamily(
            p,
            tuple(
                FamilyMember(lab, u, p.section(u, dict(zip(pts, vals))))
                for lab, u, pts, vals in zip(labels, opens, raw_opens, raw)
            ),
        )

    uniqueness_left = uniqueness_checks
    for raw in families:
        report.families_examined += 1
        fam = engine_family(raw)
        describe = lambda: repr({lab: dict(zip(pts, v)) for lab, pts, v in zip(labels, raw_opens, raw)})

        raw_compatible = all(
            _raw_agree(raw_opens[i], raw[i], raw_opens[j], raw[j])
            for i, j in itertools.combinations(range(len(raw)), 2)
        )
        found = projections.get(tuple(raw), [])
        res["pairwise_iff_unique_gluing"].record(
            len(found) <= 1 and raw_compatible == (len(found) == 1), describe
        )

        conflicts = check_pairwise(fam)
        res["engine_compatibility_agrees"].record(conflicts.compatible == raw_compatible, describe)

        if not raw_compatible:
            try:
                glue(fam)
                res["engine_glue_matches_oracle"].record(False, describe)
            except IncompatibleFamilyError:
                res["engine_glue_matches_oracle"].record(True, describe)
            continue

        report.compatible_families += 1
        try:
            g = glue(fam)
        except IncompatibleFamilyError:
            res["engine_glue_matches_oracle"].record(False, describe)
            continue
        res["engine_glue_matches_oracle"].record(
            len(found) == 1 and g.glued.assignment == found[0], describe
        )
        res["gluing_round_trip"].record(
            all(restrict(g.glued, m.open) == m.section for m in fam.members), describe
        )
        if uniqueness_left > 0:
            uniqueness_left -= 1
            res["uniqueness_verified"].record(bool(verify_unique(fam, g, cap)), describe)
        for pm in pmaps:
            res["mapped_compatibility_inherited"].record(
                check_pairwise(map_family(pm, fam)).compatible, lambda: f"{pm.name}: {describe()}"
            )
            res["derived_commutation"].record(
                derived_glue_commutes(pm, fam), lambda: f"{pm.name}: {describe()}"
            )

    if not report.sampled:
        res["bijection"].record(
            report.compatible_families == len(candidates),
            lambda: f"{report.compatible_families} compatible families vs {len(candidates)} sections",
        )
        eq = oracle_equivalence(p, opens, cap)
        res["oracle_equivalence"].record(eq.held, lambda: repr(eq.counterexample))

    union = site.open(union_pts)
    for g in candidates[: cap]:
        s = p.section(union, g)
        fam = LocalFamily(
            p, tuple(FamilyMember(lab, u, restrict(s, u)) for lab, u in zip(labels, opens))
        )
        ok = check_pairwise(fam).compatible and glue(fam).glued == s
        res["restriction_round_trip"].record(ok, lambda: repr(g))

    laws = check_functor_laws(p, cap=cap)
    res["functor_laws"].record(laws.holds, lambda: repr(laws.counterexamples[0]))
    return report
