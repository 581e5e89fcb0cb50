"""Exception hierarchy shared by every dqw_geom module.

The command-line driver maps `ConfigError` and `ThetaParseError` to exit
status 2 and every other `DQWGeomError` to exit status 3.
"""
from typing import FrozenSet, List, Sequence, Tuple


class DQWGeomError(Exception):
    """Base class for all errors raised by the package."""

    def to_report(self) -> dict:
        return {'error': type(self).__name__, 'message': str(self)}


class LatticeError(DQWGeomError, ValueError):
    """Invalid lattice parameter; `field` names it (P, J or eps)."""

    def __init__(self, message: str, field: str = ''):
        self.field = field
        super().__init__(message)


class FieldRangeError(DQWGeomError, IndexError):
    pass


class BasisMismatchError(DQWGeomError):
    pass


class WalkOverflowError(DQWGeomError):
    pass


class ThetaParseError(DQWGeomError):
    """Syntax, unknown-identifier or arity error in a θ expression."""

    def __init__(self, message: str, offset: int, expected: FrozenSet[str] = frozenset(),
                 kind: str = 'syntax'):
        self.offset = offset
        self.expected = frozenset(expected)
        self.kind = kind
        detail = f"{message} at offset {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(detail)

    def to_report(self) -> dict:
        report = super().to_report()
        report.update({'offset': self.offset, 'expected': sorted(self.expected), 'kind': self.kind})
        return report


class ThetaDomainError(DQWGeomError):
    """θ evaluated to a non-finite value; `site` is the first offending (j, p)."""

    def __init__(self, message: str, site: Tuple[int, int]):
        self.site = tuple(int(v) for v in site)
        super().__init__(f"{message} at site (j={self.site[0]}, p={self.site[1]})")

    def to_report(self) -> dict:
        report = super().to_report()
        report['site'] = list(self.site)
        return report


class _SiteListError(DQWGeomError):
    def __init__(self, message: str, sites: Sequence[Tuple[int, int]] = ()):
        self.sites: List[Tuple[int, int]] = [tuple(int(v) for v in s) for s in sites]
        shown = ', '.join(f"({j},{p})" for j, p in self.sites[:5])
        more = '' if len(self.sites) <= 5 else f" and {len(self.sites) - 5} more"
        super().__init__(f"{message}: {shown}{more}" if self.sites else message)

    def to_report(self) -> dict:
        report = super().to_report()
        report['sites'] = [list(s) for s in self.sites]
        return report


class DegenerateSiteError(_SiteListError):
    """Wσ₃ has complex or equal eigenvalues at the listed sites."""

    def __init__(self, message: str, sites: Sequence[Tuple[int, int]] = (), reason: str = ''):
        self.reason = reason
        super().__init__(message, sites)

    def to_report(self) -> dict:
        report = super().to_report()
        report['reason'] = self.reason
        return report


class InversionDomainError(_SiteListError):
    """asinh/atanh inversion impossible (vanishing denominator or |arg| >= 1)."""


class LorentzCapError(DQWGeomError):
    pass


class ConfigError(DQWGeomError):
    """Collects every schema violation found in a run configuration."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__('; '.join(self.violations))

    def to_report(self) -> dict:
        report = super().to_report()
        report['violations'] = self.violations
        return report
