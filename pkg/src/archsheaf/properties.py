"""Derived properties computed pointwise from design parameters.

A :class:`PropertyMap` sends each point's parameter value to a derived
label. Because it acts on each point separately it commutes with
restriction, so compatible families stay compatible after mapping and
gluing commutes with the map.

Quantities that combine several points (total mass, summed power) are not
pointwise. They are offered only as :func:`fold_section` over an already
glued section.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, TypeVar

from .consistency import FamilyMember, LocalFamily, check_pairwise, glue
from .errors import MissingPointMapError, OutOfDomainError, SiteError
from .presheaf import ParameterDomain, PresheafSpec, Section

__all__ = [
    "PropertyMap",
    "DerivedPresheaf",
    "apply_property",
    "map_family",
    "derived_glue_commutes",
    "fold_section",
    "identity_property",
]

T = TypeVar("T")


@dataclass(frozen=True)
class PropertyMap:
    name: str
    per_point: Mapping[str, Mapping[str, str]]
    derived_domains: tuple[ParameterDomain, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "per_point", {p: dict(m) for p, m in self.per_point.items()}
        )
        object.__setattr__(self, "derived_domains", tuple(self.derived_domains))
        codomains = {d.point: d for d in self.derived_domains}
        for point, table in self.per_point.items():
            dom = codomains.get(point)
            if dom is None:
                raise SiteError(f"property {self.name!r}: no derived domain for {point!r}")
            for src, dst in table.items():
                if dst not in dom.values:
                    raise OutOfDomainError(
                        f"property {self.name!r}: {point}:{src} -> {dst!r} "
                        "is outside the derived domain"
                    )

    @classmethod
    def from_tables(
        cls,
        name: str,
        per_point: Mapping[str, Mapping[str, str]],
        derived_domains: Mapping[str, Sequence[str]] | None = None,
    ) -> "PropertyMap":
        """Derived domains default to the images in first-seen order."""
        if derived_domains is None:
            derived_domains = {
                p: list(dict.fromkeys(table.values())) for p, table in per_point.items()
            }
        return cls(
            name,
            per_point,
            tuple(ParameterDomain(p, tuple(vals)) for p, vals in derived_domains.items()),
        )

    def __hash__(self) -> int:
        return hash((self.name, self.derived_domains))


def identity_property(p: PresheafSpec, name: str = "identity") -> PropertyMap:
    return PropertyMap(
        name,
        {d.point: {v: v for v in d.values} for d in p.domains},
        p.domains,
    )


@dataclass(frozen=True)
class DerivedPresheaf:
    """The target presheaf of ``map``, built over ``base``'s site."""

    base: PresheafSpec
    map: PropertyMap
    presheaf: PresheafSpec = field(init=False, compare=False)

    def __post_init__(self):
        points = set(self.base.site.point_names)
        codomain_points = {d.point for d in self.map.derived_domains}
        if codomain_points != points:
            raise SiteError(
                f"property {self.map.name!r}: derived domains must cover exactly the site's points"
            )
        for d in self.base.domains:
            table = self.map.per_point.get(d.point)
            if table is None:
                raise MissingPointMapError(self.map.name, d.point)
            for v in d.values:
                if v not in table:
                    raise MissingPointMapError(self.map.name, d.point, v)
        object.__setattr__(
            self, "presheaf", PresheafSpec(self.base.site, self.map.derived_domains)
        )


def apply_property(m: PropertyMap, s: Section) -> Section:
    values = []
    codomains = {d.point: d for d in m.derived_domains}
    for x, v in zip(s.domain.points, s.values):
        table = m.per_point.get(x)
        if table is None:
            raise MissingPointMapError(m.name, x)
        try:
            out = table[v]
        except KeyError:
            raise MissingPointMapError(m.name, x, v) from None
        if x not in codomains or out not in codomains[x].values:
            raise OutOfDomainError(f"property {m.name!r}: image {out!r} at {x!r} is outside its domain")
        values.append(out)
    return Section(s.domain, tuple(values))


def map_family(m: PropertyMap, f: LocalFamily) -> LocalFamily:
    """Push every member of ``f`` through ``m``."""
    target = DerivedPresheaf(f.presheaf, m).presheaf
    return LocalFamily(
        target,
        tuple(FamilyMember(x.label, x.open, apply_property(m, x.section)) for x in f.members),
    )


def derived_glue_commutes(m: PropertyMap, f: LocalFamily) -> bool:
    """Mapping then gluing equals gluing then mapping.

    ``f`` must be compatible; :func:`glue` raises otherwise. Returns False
    if the mapped family is not compatible, which would break naturality.
    """
    base = glue(f)
    mapped = map_family(m, f)
    if not check_pairwise(mapped).compatible:
        return False
    return apply_property(m, base.glued) == glue(mapped).glued


def fold_section(s: Section, fn: Callable[[T, str, str], T], initial: T) -> T:
    """Fold ``fn(acc, point, value)`` over ``s`` in canonical point order.

    This is a post-processing helper for aggregates over a glued design, not
    a property map.
    """
    acc = initial
    for x, v in zip(s.domain.points, s.values):
        acc = fn(acc, x, v)
    return acc
