"""The design presheaf: ``F(U)`` is the product of parameter domains over ``U``.

Restriction maps are projections. Sections store their values as a tuple
aligned with the canonical point order of their domain.
"""

from __future__ import annotations

import itertools
import math
import os
import random
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .errors import CapExceededError, ForeignOpenError, NotASubsetError, SiteError
from .topology import OpenSet, SiteSpec

__all__ = [
    "DEFAULT_ENUM_CAP",
    "DEFAULT_LAW_POINT_CAP",
    "enum_cap",
    "ParameterDomain",
    "Section",
    "PresheafSpec",
    "LawReport",
    "restrict",
    "section_count",
    "iter_sections",
    "enumerate_sections",
    "check_functor_laws",
]

DEFAULT_ENUM_CAP = 10**6
DEFAULT_LAW_POINT_CAP = 12
ENUM_CAP_ENV = "ARCHSHEAF_ENUM_CAP"


def enum_cap() -> int:
    """Enumeration cap, overridable with ``ARCHSHEAF_ENUM_CAP``."""
    raw = os.environ.get(ENUM_CAP_ENV)
    if raw is None or not raw.strip():
        return DEFAULT_ENUM_CAP
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{ENUM_CAP_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"{ENUM_CAP_ENV} must be positive, got {value}")
    return value


@dataclass(frozen=True)
class ParameterDomain:
    """Admissible coupling values at one interface point."""

    point: str
    values: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise SiteError(f"domain of {self.point!r} is empty")
        if len(set(self.values)) != len(self.values):
            raise SiteError(f"domain of {self.point!r} has duplicate labels")
        for v in self.values:
            if not isinstance(v, str):
                raise SiteError(f"domain of {self.point!r} has non-string label {v!r}")

    @classmethod
    def of(cls, point: str, spec: int | Sequence[str]) -> "ParameterDomain":
        """``spec`` is either explicit labels or a cardinality ``n`` for ``"0".."n-1"``."""
        if isinstance(spec, bool):
            raise SiteError(f"domain of {point!r} must be a cardinality or label list")
        if isinstance(spec, int):
            if spec < 1:
                raise SiteError(f"domain of {point!r} must have at least one value")
            return cls(point, tuple(str(i) for i in range(spec)))
        return cls(point, tuple(spec))

    @property
    def is_numeric(self) -> bool:
        """True when the labels are exactly ``"0".."n-1"``."""
        return self.values == tuple(str(i) for i in range(len(self.values)))

    def __len__(self) -> int:
        return len(self.values)

    def __contains__(self, value: object) -> bool:
        return value in self.values


class Section:
    """One value per point of ``domain``."""

    __slots__ = ("domain", "values")

    def __init__(self, domain: OpenSet, values: Sequence[str]):
        values = tuple(values)
        if len(values) != len(domain.points):
            raise SiteError(
                f"section over {domain!r} needs {len(domain.points)} values, got {len(values)}"
            )
        self.domain = domain
        self.values = values

    @classmethod
    def from_mapping(cls, domain: OpenSet, assignment: Mapping[str, str]) -> "Section":
        missing = [p for p in domain.points if p not in assignment]
        extra = sorted(set(assignment) - domain.members)
        if missing or extra:
            parts = []
            if missing:
                parts.append(f"missing {', '.join(missing)}")
            if extra:
                parts.append(f"outside domain {', '.join(extra)}")
            raise SiteError(f"assignment is not total on {domain!r}: {'; '.join(parts)}")
        return cls(domain, tuple(assignment[p] for p in domain.points))

    @property
    def assignment(self) -> dict[str, str]:
        return dict(zip(self.domain.points, self.values))

    def __getitem__(self, point: str) -> str:
        return self.values[self.domain._index[point]]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Section):
            return NotImplemented
        return self.values == other.values and self.domain == other.domain

    def __hash__(self) -> int:
        return hash((self.domain.members, self.values))

    def __repr__(self) -> str:
        body = ", ".join(f"{p}={v!r}" for p, v in zip(self.domain.points, self.values))
        return f"Section({body})"


def restrict(s: Section, sub: OpenSet) -> Section:
    """Project ``s`` onto ``sub``."""
    dom = s.domain
    if sub.site is not dom.site and sub.site != dom.site:
        raise ForeignOpenError("restriction target belongs to a different site")
    if not sub.members <= dom.members:
        raise NotASubsetError(tuple(p for p in sub.points if p not in dom.members))
    index = dom._index
    vals = s.values
    return Section(sub, tuple(vals[index[p]] for p in sub.points))


@dataclass(frozen=True)
class PresheafSpec:
    """The full product presheaf over ``site`` with one domain per point."""

    site: SiteSpec
    domains: tuple[ParameterDomain, ...]
    _by_point: dict[str, ParameterDomain] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        doms = tuple(self.domains)
        object.__setattr__(self, "domains", doms)
        by_point: dict[str, ParameterDomain] = {}
        for d in doms:
            if d.point in by_point:
                raise SiteError(f"point {d.point!r} has more than one domain")
            by_point[d.point] = d
        names = self.site.point_names
        missing = [n for n in names if n not in by_point]
        extra = sorted(set(by_point) - set(names))
        if missing:
            raise SiteError(f"no domain for point(s) {', '.join(missing)}")
        if extra:
            raise SiteError(f"domain(s) for undeclared point(s) {', '.join(extra)}")
        # Keep domains in canonical point order.
        object.__setattr__(self, "domains", tuple(by_point[n] for n in names))
        object.__setattr__(self, "_by_point", by_point)

    def __hash__(self) -> int:
        return hash((self.site, self.domains))

    @classmethod
    def build(cls, site: SiteSpec, domains: Mapping[str, int | Sequence[str]]) -> "PresheafSpec":
        return cls(site, tuple(ParameterDomain.of(p, spec) for p, spec in domains.items()))

    def domain(self, point: str) -> ParameterDomain:
        return self._by_point[point]

    def section(self, u: OpenSet, assignment: Mapping[str, str]) -> Section:
        """Build a section over ``u`` and check it against the domains."""
        s = Section.from_mapping(u, assignment)
        self.check_section(s)
        return s

    def check_section(self, s: Section) -> None:
        if s.domain.site is not self.site and s.domain.site != self.site:
            raise ForeignOpenError("section lives over a different site")
        for p, v in zip(s.domain.points, s.values):
            if v not in self._by_point[p].values:
                raise SiteError(f"value {v!r} is not in the domain of point {p!r}")

    def is_valid(self, s: Section) -> bool:
        try:
            self.check_section(s)
        except (SiteError, ForeignOpenError):
            return False
        return True


def section_count(p: PresheafSpec, u: OpenSet) -> int:
    """``|F(u)|``: product of domain sizes over ``u``."""
    return math.prod(len(p.domain(x)) for x in u.points)


def iter_sections(p: PresheafSpec, u: OpenSet) -> Iterator[Section]:
    """Lazily yield ``F(u)`` in lexicographic order over the canonical point order."""
    for combo in itertools.product(*(p.domain(x).values for x in u.points)):
        yield Section(u, combo)


def enumerate_sections(p: PresheafSpec, u: OpenSet, cap: int | None = None) -> list[Section]:
    cap = enum_cap() if cap is None else cap
    n = section_count(p, u)
    if n > cap:
        raise CapExceededError(f"|F({u!r})|", n, cap)
    return list(iter_sections(p, u))


@dataclass
class LawReport:
    exhaustive: bool
    identity_checks: int = 0
    composition_checks: int = 0
    # (law, W, V, U, section) for every failure
    counterexamples: list[tuple] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.counterexamples


def _subsets(u: OpenSet) -> list[OpenSet]:
    pts = u.points
    return [
        OpenSet(u.site, (pts[i] for i in range(len(pts)) if mask >> i & 1))
        for mask in range(1 << len(pts))
    ]


def check_functor_laws(
    p: PresheafSpec,
    depth_cap: int = DEFAULT_LAW_POINT_CAP,
    *,
    cap: int | None = None,
    samples: int = 20_000,
    seed: int = 0,
) -> LawReport:
    """Check identity and composition of restriction over chains ``U <= V <= W``.

    Exhaustive whenever the number of (W, s, V, U) combinations fits ``cap``;
    otherwise ``samples`` seeded random combinations are checked and the
    report is flagged non-exhaustive.
    """
    n_points = len(p.site.points)
    if n_points > depth_cap:
        raise CapExceededError("points for functor-law check", n_points, depth_cap)
    cap = enum_cap() if cap is None else cap
    # Sum over W of |F(W)| * 3**|W| factorises pointwise.
    work = math.prod(1 + 3 * len(d) for d in p.domains)
    report = LawReport(exhaustive=work <= cap)

    def check(w: OpenSet, s: Section, v: OpenSet, u: OpenSet) -> None:
        report.composition_checks += 1
        if restrict(restrict(s, v), u) != restrict(s, u):
            report.counterexamples.append(("composition", w, v, u, s))

    def check_identity(w: OpenSet, s: Section) -> None:
        report.identity_checks += 1
        if restrict(s, w) != s:
            report.counterexamples.append(("identity", w, w, w, s))

    if report.exhaustive:
        for w in p.site.all_opens():
            below_w = _subsets(w)
            chains = [(v, u) for v in below_w for u in _subsets(v)]
            for s in iter_sections(p, w):
                check_identity(w, s)
                for v, u in chains:
                    check(w, s, v, u)
        return report

    rng = random.Random(seed)
    names = p.site.point_names
    for _ in range(samples):
        w = OpenSet(p.site, (x for x in names if rng.random() < 0.5))
        v = OpenSet(p.site, (x for x in w.points if rng.random() < 0.5))
        u = OpenSet(p.site, (x for x in v.points if rng.random() < 0.5))
        s = Section(w, tuple(rng.choice(p.domain(x).values) for x in w.points))
        check_identity(w, s)
        check(w, s, v, u)
    return report
