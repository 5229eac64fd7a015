"""Finite architectural sites.

A site has one point per pairwise interface between engineering views.
Each view ``k`` induces the open set of interfaces that involve ``k``.
The topology is discrete, so every subset of points is an open.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import ForeignOpenError, SiteError, UnknownViewError

__all__ = [
    "InterfacePoint",
    "ViewDecl",
    "SiteSpec",
    "OpenSet",
    "Cover",
    "view_open",
    "intersect",
    "union_all",
    "is_cover",
]


@dataclass(frozen=True)
class InterfacePoint:
    """A binary coupling between two distinct views."""

    name: str
    endpoints: frozenset[str]

    def __init__(self, name: str, endpoints: Iterable[str]):
        object.__setattr__(self, "name", name)
        eps = tuple(endpoints)
        object.__setattr__(self, "endpoints", frozenset(eps))
        if len(eps) != 2:
            raise SiteError(f"interface {name!r} must have exactly two endpoints, got {len(eps)}")
        if len(self.endpoints) != 2:
            raise SiteError(f"interface {name!r} couples view {eps[0]!r} with itself")

    def involves(self, view: str) -> bool:
        return view in self.endpoints


@dataclass(frozen=True)
class ViewDecl:
    name: str


@dataclass(frozen=True)
class SiteSpec:
    """Points and views of a site, in declaration order.

    Declaration order of points is the canonical order used by every
    enumeration and report.
    """

    points: tuple[InterfacePoint, ...]
    views: tuple[ViewDecl, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "views", tuple(self.views))
        view_names = [v.name for v in self.views]
        _check_names("view", view_names)
        _check_names("point", [p.name for p in self.points])
        declared = set(view_names)
        for p in self.points:
            unknown = sorted(p.endpoints - declared)
            if unknown:
                raise UnknownViewError(unknown[0])
        object.__setattr__(self, "_index", {p.name: i for i, p in enumerate(self.points)})
        object.__setattr__(self, "_hash", hash((self.points, self.views)))
        # Binary points over declared views lie in exactly two view-opens.
        for p in self.points:
            covering = [v for v in view_names if p.involves(v)]
            if len(covering) != 2:
                raise SiteError(f"point {p.name!r} lies in {len(covering)} views, expected 2")

    def __hash__(self) -> int:
        return self._hash

    @classmethod
    def build(cls, views: Sequence[str], interfaces: Sequence[tuple[str, Iterable[str]]]) -> "SiteSpec":
        """Build from view names and ``(point_name, (view_a, view_b))`` pairs."""
        return cls(
            points=tuple(InterfacePoint(n, eps) for n, eps in interfaces),
            views=tuple(ViewDecl(v) for v in views),
        )

    @property
    def point_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.points)

    @property
    def view_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.views)

    def position(self, point: str) -> int:
        return self._index[point]

    def point(self, name: str) -> InterfacePoint:
        return self.points[self._index[name]]

    def has_view(self, view: str) -> bool:
        return any(v.name == view for v in self.views)

    def open(self, members: Iterable[str] = ()) -> "OpenSet":
        return OpenSet(self, members)

    @property
    def whole(self) -> "OpenSet":
        return OpenSet(self, self._index)

    @property
    def empty(self) -> "OpenSet":
        return OpenSet(self, ())

    def all_opens(self) -> list["OpenSet"]:
        """Every open of the discrete topology, ``2**len(points)`` of them."""
        names = self.point_names
        return [
            OpenSet(self, (names[i] for i in range(len(names)) if mask >> i & 1))
            for mask in range(1 << len(names))
        ]


def _check_names(kind: str, names: Sequence[str]) -> None:
    seen: set[str] = set()
    for n in names:
        if not isinstance(n, str) or not n:
            raise SiteError(f"{kind} names must be non-empty strings, got {n!r}")
        if n in seen:
            raise SiteError(f"duplicate {kind} name {n!r}")
        seen.add(n)


class OpenSet:
    """A set of points of one site.

    ``points`` lists the members in the site's canonical order.
    """

    __slots__ = ("site", "members", "points", "_index")

    def __init__(self, site: SiteSpec, members: Iterable[str]):
        members = frozenset(members)
        index = site._index
        stray = [m for m in members if m not in index]
        if stray:
            raise SiteError(f"points not declared in site: {', '.join(sorted(stray))}")
        self.site = site
        self.members = members
        self.points = tuple(sorted(members, key=index.__getitem__))
        self._index = {p: i for i, p in enumerate(self.points)}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OpenSet):
            return NotImplemented
        return self.members == other.members and (self.site is other.site or self.site == other.site)

    def __hash__(self) -> int:
        return hash(self.members)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, point: object) -> bool:
        return point in self.members

    def __le__(self, other: "OpenSet") -> bool:
        _same_site(self, other)
        return self.members <= other.members

    def __and__(self, other: "OpenSet") -> "OpenSet":
        return intersect(self, other)

    def __or__(self, other: "OpenSet") -> "OpenSet":
        return union_all([self, other])

    def __repr__(self) -> str:
        return "{" + ", ".join(self.points) + "}"


def _same_site(a: OpenSet, b: OpenSet) -> None:
    if a.site is not b.site and a.site != b.site:
        raise ForeignOpenError("opens belong to different sites")


@dataclass(frozen=True)
class Cover:
    target: OpenSet
    family: tuple[OpenSet, ...]

    def __post_init__(self):
        object.__setattr__(self, "family", tuple(self.family))
        if not is_cover(list(self.family), self.target):
            raise SiteError(f"family does not cover {self.target!r}")


def view_open(site: SiteSpec, view: str) -> OpenSet:
    """Interfaces of ``site`` that have ``view`` as an endpoint."""
    if not site.has_view(view):
        raise UnknownViewError(view)
    return OpenSet(site, (p.name for p in site.points if p.involves(view)))


def intersect(a: OpenSet, b: OpenSet) -> OpenSet:
    _same_site(a, b)
    return OpenSet(a.site, a.members & b.members)


def union_all(family: Sequence[OpenSet], site: SiteSpec | None = None) -> OpenSet:
    """Union of ``family``; the empty family gives the empty open.

    ``site`` is needed only to build an empty union with a home site.
    """
    if not family:
        if site is None:
            raise ValueError("union of an empty family needs an explicit site")
        return site.empty
    first = family[0]
    members: set[str] = set()
    for u in family:
        _same_site(first, u)
        members |= u.members
    return OpenSet(first.site, members)


def is_cover(family: Sequence[OpenSet], target: OpenSet) -> bool:
    for u in family:
        if not u <= target:
            return False
    if not family:
        return not target.members
    return union_all(family).members == target.members
