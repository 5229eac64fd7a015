"""Exception hierarchy shared by the engine modules."""

from __future__ import annotations


class ArchSheafError(Exception):
    """Base class for all engine errors."""


class SiteError(ArchSheafError, ValueError):
    """A site, presheaf or family violates a structural invariant."""


class UnknownViewError(ArchSheafError, KeyError):
    def __init__(self, view: str):
        super().__init__(view)
        self.view = view

    def __str__(self) -> str:
        return f"unknown view {self.view!r}"


class ForeignOpenError(ArchSheafError, ValueError):
    """Opens (or sections) from different sites were combined."""


class NotASubsetError(ArchSheafError, ValueError):
    def __init__(self, offending: tuple[str, ...]):
        self.offending = offending
        super().__init__(
            "restriction target is not contained in the section domain; "
            f"offending points: {', '.join(offending)}"
        )


class CapExceededError(ArchSheafError, RuntimeError):
    def __init__(self, what: str, count: int, cap: int):
        self.what = what
        self.count = count
        self.cap = cap
        super().__init__(f"{what}: {count} exceeds enumeration cap {cap}")


class MixedPresheafError(ArchSheafError, ValueError):
    """Family members do not all live over one presheaf."""


class IncompatibleFamilyError(ArchSheafError, ValueError):
    def __init__(self, report):
        self.report = report
        n = len(report.conflicts)
        super().__init__(f"family is not compatible: {n} conflict(s)")


class MissingPointMapError(ArchSheafError, KeyError):
    def __init__(self, prop: str, point: str, value: str | None = None):
        self.prop = prop
        self.point = point
        self.value = value
        super().__init__(prop, point, value)

    def __str__(self) -> str:
        if self.value is None:
            return f"property {self.prop!r} has no map for point {self.point!r}"
        return (
            f"property {self.prop!r} does not map value {self.value!r} "
            f"at point {self.point!r}"
        )


class OutOfDomainError(ArchSheafError, ValueError):
    """A derived value falls outside its declared derived domain."""
