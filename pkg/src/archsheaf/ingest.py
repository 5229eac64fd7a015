"""Architecture files: parsing, validation and canonical serialization.

The file is UTF-8 JSON::

    {
      "version": "archsheaf/1",
      "views": ["electrical", "thermal", "mechanical"],
      "interfaces": [{"name": "EM", "views": ["electrical", "mechanical"]}, ...],
      "domains": {"EM": 4, "ET": ["pad", "paste", "gap"], ...},
      "designs": {"elec": {"view": "electrical", "assignment": {"EM": "2", "ET": "1"}}, ...},
      "properties": {"power-class": {"map": {"ET": {"0": "low", ...}, ...},
                                     "codomains": {"ET": ["low", "high"], ...}}}
    }

A domain is either a cardinality ``n`` (labels ``"0".."n-1"``) or an
explicit label list. ``codomains`` is optional; when absent each point's
derived domain is its image labels in first-seen order. An optional
``"topology": "discrete"`` is accepted; any other topology is rejected.

:func:`parse` and :func:`validate` never raise on bad input. They return
``(result_or_None, diagnostics)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .consistency import FamilyMember, LocalFamily
from .presheaf import ParameterDomain, PresheafSpec, Section
from .properties import PropertyMap
from .topology import SiteSpec, view_open

__all__ = [
    "FORMAT_VERSION",
    "CODES",
    "Diagnostic",
    "InterfaceDecl",
    "DesignDecl",
    "PropertyDecl",
    "ArchitectureDoc",
    "Architecture",
    "InvalidDocument",
    "parse",
    "validate",
    "load",
    "serialize",
    "to_document",
]

FORMAT_VERSION = "archsheaf/1"

TOP_KEYS = ("version", "topology", "views", "interfaces", "domains", "designs", "properties")
INTERFACE_KEYS = ("name", "views")
DESIGN_KEYS = ("view", "assignment")
PROPERTY_KEYS = ("map", "codomains")

CODES = {
    "E-EMPTY": "document is empty",
    "E-SYNTAX": "document is not valid UTF-8 JSON",
    "E-SCHEMA": "a field has the wrong shape or a required field is missing",
    "E-VERSION": "format version is missing or unsupported",
    "E-TOPOLOGY": "only the discrete topology is supported",
    "W-UNKNOWN-FIELD": "field is not part of the format and was ignored",
    "E-DUP-NAME": "a name or key is declared twice",
    "E-ARITY": "an interface does not couple exactly two views",
    "E-UNKNOWN-VIEW": "reference to an undeclared view",
    "E-SELF-INTERFACE": "an interface couples a view with itself",
    "E-UNKNOWN-POINT": "reference to an undeclared interface point",
    "E-NO-DOMAIN": "an interface point has no parameter domain",
    "E-BAD-DOMAIN": "a parameter domain is empty or has duplicate labels",
    "E-MISSING-POINT": "a design omits a point of its view",
    "E-EXTRA-POINT": "a design assigns a point outside its view",
    "E-BAD-VALUE": "a value is not in the point's parameter domain",
    "E-PROPERTY-INCOMPLETE": "a property map is not total on a point's domain",
    "E-PROPERTY-CODOMAIN": "a property maps a value outside its declared codomain",
}


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    location: str = ""  # JSON pointer into the document
    line: int | None = None
    column: int | None = None

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "severity": self.severity,
            "code": self.code,
            "message": self.message,
            "location": self.location,
        }
        if self.line is not None:
            out["line"] = self.line
            out["column"] = self.column
        return out

    def __str__(self) -> str:
        where = self.location or "/"
        if self.line is not None:
            where = f"{self.line}:{self.column}"
        return f"{self.severity} {self.code} at {where}: {self.message}"


def _error(code: str, message: str, location: str = "", **kw) -> Diagnostic:
    return Diagnostic("error", code, message, location, **kw)


def _warning(code: str, message: str, location: str = "") -> Diagnostic:
    return Diagnostic("warning", code, message, location)


def _ptr(*parts: object) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in parts)


@dataclass(frozen=True)
class InterfaceDecl:
    name: str
    views: tuple[str, ...]


@dataclass(frozen=True)
class DesignDecl:
    label: str
    view: str
    assignment: dict[str, str]


@dataclass(frozen=True)
class PropertyDecl:
    name: str
    map: dict[str, dict[str, str]]
    codomains: dict[str, Any] | None = None


@dataclass
class ArchitectureDoc:
    """A structurally well-formed but not yet validated document."""

    format_version: str
    views: list[str] = field(default_factory=list)
    interfaces: list[InterfaceDecl] = field(default_factory=list)
    domains: dict[str, Any] = field(default_factory=dict)
    designs: list[DesignDecl] = field(default_factory=list)
    properties: list[PropertyDecl] = field(default_factory=list)


@dataclass(frozen=True)
class Architecture:
    site: SiteSpec
    presheaf: PresheafSpec
    family: LocalFamily
    properties: dict[str, PropertyMap]
    design_views: dict[str, str]


class InvalidDocument(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        errors = [d for d in diagnostics if d.is_error]
        head = str(errors[0]) if errors else "invalid document"
        more = f" (+{len(errors) - 1} more)" if len(errors) > 1 else ""
        super().__init__(head + more)


class _Obj(dict):
    """JSON object that remembers keys it saw more than once."""

    duplicates: tuple[str, ...] = ()


def _pairs_hook(pairs):
    obj = _Obj()
    dups = []
    for k, v in pairs:
        if k in obj:
            dups.append(k)
        obj[k] = v
    if dups:
        obj.duplicates = tuple(dups)
    return obj


class _Reader:
    def __init__(self):
        self.diags: list[Diagnostic] = []

    def err(self, code, message, location=""):
        self.diags.append(_error(code, message, location))

    def obj(self, value, where, keys=None) -> bool:
        if not isinstance(value, dict):
            self.err("E-SCHEMA", f"expected an object, got {_kind(value)}", where)
            return False
        for k in getattr(value, "duplicates", ()):
            self.err("E-DUP-NAME", f"key {k!r} appears more than once", _ptr_join(where, k))
        if keys is not None:
            for k in value:
                if k not in keys:
                    self.diags.append(
                        _warning("W-UNKNOWN-FIELD", f"unknown field {k!r} ignored", _ptr_join(where, k))
                    )
        return True

    def string(self, value, where) -> bool:
        if not isinstance(value, str) or not value:
            self.err("E-SCHEMA", f"expected a non-empty string, got {_kind(value)}", where)
            return False
        return True

    def string_list(self, value, where) -> list[str] | None:
        if not isinstance(value, list):
            self.err("E-SCHEMA", f"expected an array of strings, got {_kind(value)}", where)
            return None
        ok = True
        for i, item in enumerate(value):
            ok &= self.string(item, _ptr_join(where, i))
        return list(value) if ok else None

    def string_map(self, value, where) -> dict[str, str] | None:
        if not self.obj(value, where):
            return None
        ok = True
        for k, v in value.items():
            if not isinstance(v, str):
                self.err("E-SCHEMA", f"expected a string value, got {_kind(v)}", _ptr_join(where, k))
                ok = False
        return dict(value) if ok else None


def _ptr_join(base: str, *parts: object) -> str:
    return base + _ptr(*parts)


def _kind(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, (int, float)):
        return "number"
    if isinstance(value, str):
        return "string"
    if isinstance(value, list):
        return "array"
    return "object"


def parse(text: bytes | str) -> tuple[ArchitectureDoc | None, list[Diagnostic]]:
    """Parse a document; returns ``(doc, diagnostics)`` with ``doc=None`` on error."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            return None, [_error("E-SYNTAX", f"invalid UTF-8 at byte {exc.start}")]
    if text.startswith("﻿"):
        text = text[1:]
    if not text.strip():
        return None, [_error("E-EMPTY", "empty document")]
    try:
        raw = json.loads(text, object_pairs_hook=_pairs_hook)
    except json.JSONDecodeError as exc:
        return None, [_error("E-SYNTAX", exc.msg, line=exc.lineno, column=exc.colno)]

    r = _Reader()
    if not r.obj(raw, "", TOP_KEYS):
        return None, r.diags

    version = raw.get("version")
    if version is None:
        r.err("E-VERSION", f"missing version; expected {FORMAT_VERSION!r}", "/version")
    elif version != FORMAT_VERSION:
        r.err("E-VERSION", f"unsupported version {version!r}; expected {FORMAT_VERSION!r}", "/version")

    if "topology" in raw and raw["topology"] != "discrete":
        r.err("E-TOPOLOGY", f"unsupported topology {raw['topology']!r}; only 'discrete'", "/topology")

    doc = ArchitectureDoc(format_version=version if isinstance(version, str) else "")

    for key in ("views", "interfaces", "domains"):
        if key not in raw:
            r.err("E-SCHEMA", f"missing required field {key!r}", _ptr(key))

    views = r.string_list(raw.get("views", []), "/views")
    doc.views = views or []

    interfaces = raw.get("interfaces", [])
    if not isinstance(interfaces, list):
        r.err("E-SCHEMA", f"expected an array, got {_kind(interfaces)}", "/interfaces")
        interfaces = []
    for i, item in enumerate(interfaces):
        where = _ptr("interfaces", i)
        if not r.obj(item, where, INTERFACE_KEYS):
            continue
        name_ok = "name" in item and r.string(item["name"], where + "/name")
        if "name" not in item:
            r.err("E-SCHEMA", "interface needs a 'name'", where)
        if "views" not in item:
            r.err("E-SCHEMA", "interface needs 'views'", where)
            continue
        eps = r.string_list(item["views"], where + "/views")
        if name_ok and eps is not None:
            doc.interfaces.append(InterfaceDecl(item["name"], tuple(eps)))

    domains = raw.get("domains", {})
    if r.obj(domains, "/domains"):
        for point, spec in domains.items():
            where = _ptr("domains", point)
            if isinstance(spec, int) and not isinstance(spec, bool):
                doc.domains[point] = spec
            elif isinstance(spec, list) and all(isinstance(v, str) for v in spec):
                doc.domains[point] = list(spec)
            else:
                r.err("E-SCHEMA", "domain must be a cardinality or an array of strings", where)

    designs = raw.get("designs", {})
    if r.obj(designs, "/designs"):
        for label, body in designs.items():
            where = _ptr("designs", label)
            if not label:
                r.err("E-SCHEMA", "design labels must be non-empty", where)
                continue
            if not r.obj(body, where, DESIGN_KEYS):
                continue
            if "view" not in body or "assignment" not in body:
                r.err("E-SCHEMA", "design needs 'view' and 'assignment'", where)
                continue
            view_ok = r.string(body["view"], where + "/view")
            assignment = r.string_map(body["assignment"], where + "/assignment")
            if view_ok and assignment is not None:
                doc.designs.append(DesignDecl(label, body["view"], assignment))

    props = raw.get("properties", {})
    if r.obj(props, "/properties"):
        for name, body in props.items():
            where = _ptr("properties", name)
            if not name:
                r.err("E-SCHEMA", "property names must be non-empty", where)
                continue
            if not r.obj(body, where, PROPERTY_KEYS):
                continue
            if "map" not in body:
                r.err("E-SCHEMA", "property needs a 'map'", where)
                continue
            tables: dict[str, dict[str, str]] = {}
            ok = r.obj(body["map"], where + "/map")
            if ok:
                for point, table in body["map"].items():
                    t = r.string_map(table, _ptr_join(where, "map", point))
                    if t is None:
                        ok = False
                    else:
                        tables[point] = t
            codomains = None
            if "codomains" in body:
                cod = body["codomains"]
                if r.obj(cod, where + "/codomains"):
                    codomains = {}
                    for point, spec in cod.items():
                        if isinstance(spec, int) and not isinstance(spec, bool):
                            codomains[point] = spec
                        elif isinstance(spec, list) and all(isinstance(v, str) for v in spec):
                            codomains[point] = list(spec)
                        else:
                            r.err(
                                "E-SCHEMA",
                                "codomain must be a cardinality or an array of strings",
                                _ptr_join(where, "codomains", point),
                            )
                            ok = False
                else:
                    ok = False
            if ok:
                doc.properties.append(PropertyDecl(name, tables, codomains))

    if any(d.is_error for d in r.diags):
        return None, r.diags
    return doc, r.diags


def _domain_labels(spec) -> list[str] | None:
    if isinstance(spec, int):
        return [str(i) for i in range(spec)] if spec >= 1 else None
    if not spec or len(set(spec)) != len(spec):
        return None
    return list(spec)


def validate(doc: ArchitectureDoc) -> tuple[Architecture | None, list[Diagnostic]]:
    """Check referential integrity and build the engine objects."""
    diags: list[Diagnostic] = []

    def err(code, message, location):
        diags.append(_error(code, message, location))

    views: list[str] = []
    for i, v in enumerate(doc.views):
        if v in views:
            err("E-DUP-NAME", f"view {v!r} declared twice", _ptr("views", i))
        else:
            views.append(v)
    view_set = set(views)

    points: dict[str, tuple[str, str]] = {}
    for i, itf in enumerate(doc.interfaces):
        where = _ptr("interfaces", i)
        bad = False
        if itf.name in points:
            err("E-DUP-NAME", f"interface {itf.name!r} declared twice", where + "/name")
            continue
        if len(itf.views) != 2:
            err("E-ARITY", f"interface {itf.name!r} lists {len(itf.views)} views, expected 2", where + "/views")
            continue
        for j, v in enumerate(itf.views):
            if v not in view_set:
                err("E-UNKNOWN-VIEW", f"interface {itf.name!r} references undeclared view {v!r}", _ptr_join(where, "views", j))
                bad = True
        if itf.views[0] == itf.views[1]:
            err("E-SELF-INTERFACE", f"interface {itf.name!r} couples view {itf.views[0]!r} with itself", where + "/views")
            bad = True
        if not bad:
            points[itf.name] = (itf.views[0], itf.views[1])
    declared_points = {itf.name for itf in doc.interfaces}

    labels: dict[str, list[str]] = {}
    for point, spec in doc.domains.items():
        where = _ptr("domains", point)
        if point not in declared_points:
            err("E-UNKNOWN-POINT", f"domain given for undeclared interface {point!r}", where)
            continue
        vals = _domain_labels(spec)
        if vals is None:
            err("E-BAD-DOMAIN", f"domain of {point!r} must be non-empty with unique labels", where)
            continue
        labels[point] = vals
    for i, itf in enumerate(doc.interfaces):
        if itf.name not in doc.domains:
            err("E-NO-DOMAIN", f"interface {itf.name!r} has no parameter domain", _ptr("interfaces", i))

    # Which points each view covers, from the interfaces that survived.
    view_points = {v: [p for p, eps in points.items() if v in eps] for v in views}

    for d in doc.designs:
        where = _ptr("designs", d.label)
        if d.view not in view_set:
            err("E-UNKNOWN-VIEW", f"design {d.label!r} references undeclared view {d.view!r}", where + "/view")
            continue
        expected = view_points[d.view]
        for p in expected:
            if p not in d.assignment:
                err("E-MISSING-POINT", f"design {d.label!r} omits point {p!r} of view {d.view!r}", where + "/assignment")
        for p, v in d.assignment.items():
            loc = _ptr_join(where, "assignment", p)
            if p not in declared_points:
                err("E-UNKNOWN-POINT", f"design {d.label!r} assigns undeclared point {p!r}", loc)
            elif p not in expected and p in points:
                err("E-EXTRA-POINT", f"design {d.label!r} assigns {p!r}, which is outside view {d.view!r}", loc)
            elif p in labels and v not in labels[p]:
                err("E-BAD-VALUE", f"value {v!r} is not in the domain of {p!r}", loc)

    for prop in doc.properties:
        where = _ptr("properties", prop.name)
        codomains: dict[str, list[str]] = {}
        for point, spec in (prop.codomains or {}).items():
            loc = _ptr_join(where, "codomains", point)
            if point not in declared_points:
                err("E-UNKNOWN-POINT", f"property {prop.name!r} has a codomain for undeclared point {point!r}", loc)
                continue
            vals = _domain_labels(spec)
            if vals is None:
                err("E-BAD-DOMAIN", f"codomain of {point!r} must be non-empty with unique labels", loc)
                continue
            codomains[point] = vals
        for point, table in prop.map.items():
            if point not in declared_points:
                err("E-UNKNOWN-POINT", f"property {prop.name!r} maps undeclared point {point!r}", _ptr_join(where, "map", point))
        for point in points:
            loc = _ptr_join(where, "map", point)
            table = prop.map.get(point)
            if table is None:
                err("E-PROPERTY-INCOMPLETE", f"property {prop.name!r} has no map for point {point!r}", where + "/map")
                continue
            if point not in labels:
                continue
            for v in labels[point]:
                if v not in table:
                    err("E-PROPERTY-INCOMPLETE", f"property {prop.name!r} does not map value {v!r} of {point!r}", loc)
            for src, dst in table.items():
                if src not in labels[point]:
                    err("E-BAD-VALUE", f"property {prop.name!r} maps {src!r}, not in the domain of {point!r}", _ptr_join(where, "map", point, src))
                if prop.codomains is not None and point in codomains and dst not in codomains[point]:
                    err("E-PROPERTY-CODOMAIN", f"property {prop.name!r} maps {point}:{src} to {dst!r}, outside its codomain", _ptr_join(where, "map", point, src))
            if prop.codomains is not None and point not in prop.codomains:
                err("E-PROPERTY-CODOMAIN", f"property {prop.name!r} declares no codomain for {point!r}", where + "/codomains")

    if any(d.is_error for d in diags):
        return None, diags

    site = SiteSpec.build(views, [(itf.name, itf.views) for itf in doc.interfaces])
    presheaf = PresheafSpec(
        site, tuple(ParameterDomain(p, tuple(labels[p])) for p in site.point_names)
    )
    members = []
    design_views = {}
    for d in doc.designs:
        u = view_open(site, d.view)
        members.append(FamilyMember(d.label, u, Section.from_mapping(u, d.assignment)))
        design_views[d.label] = d.view
    family = LocalFamily(presheaf, tuple(members))
    properties = {}
    for prop in doc.properties:
        tables = {p: prop.map[p] for p in site.point_names}
        if prop.codomains is None:
            cod = None
        else:
            cod = {p: _domain_labels(prop.codomains[p]) for p in site.point_names}
        properties[prop.name] = PropertyMap.from_tables(prop.name, tables, cod)
    return Architecture(site, presheaf, family, properties, design_views), diags


def load(source: str | bytes | Path) -> tuple[Architecture, list[Diagnostic]]:
    """Parse and validate a file path (``Path``) or document text.

    Raises :class:`InvalidDocument` if any error diagnostic is produced.
    """
    text = source.read_bytes() if isinstance(source, Path) else source
    doc, diags = parse(text)
    if doc is None:
        raise InvalidDocument(diags)
    arch, more = validate(doc)
    diags = diags + more
    if arch is None:
        raise InvalidDocument(diags)
    return arch, diags


def _encode_domain(d: ParameterDomain):
    return len(d.values) if d.is_numeric else list(d.values)


def to_document(arch: Architecture) -> dict[str, Any]:
    """Canonical JSON-ready structure for ``arch``."""
    site = arch.site
    view_rank = {v: i for i, v in enumerate(site.view_names)}
    out: dict[str, Any] = {
        "version": FORMAT_VERSION,
        "views": list(site.view_names),
        "interfaces": [
            {"name": p.name, "views": sorted(p.endpoints, key=view_rank.__getitem__)}
            for p in site.points
        ],
        "domains": {d.point: _encode_domain(d) for d in arch.presheaf.domains},
        "designs": {
            m.label: {"view": arch.design_views[m.label], "assignment": m.section.assignment}
            for m in arch.family.members
        },
        "properties": {},
    }
    for name, pm in arch.properties.items():
        cod = {d.point: d for d in pm.derived_domains}
        out["properties"][name] = {
            "map": {
                p: {v: pm.per_point[p][v] for v in arch.presheaf.domain(p).values}
                for p in site.point_names
            },
            "codomains": {p: _encode_domain(cod[p]) for p in site.point_names},
        }
    return out


def serialize(arch: Architecture) -> str:
    """Canonical text: two-space indent, schema key order, LF, trailing newline."""
    return json.dumps(to_document(arch), indent=2, ensure_ascii=False) + "\n"
