"""Exception types shared across the package.

The CLI maps these onto exit codes: config/validation problems exit 1,
catalog generation failures exit 2, an empty implementation shortlist
exits 3, and runtime simulation failures exit 4.
"""

from __future__ import annotations


class ParseError(ValueError):
    """A catalog or data file could not be parsed."""

    def __init__(self, message: str, *, row: int | None = None, field: str | None = None):
        self.row = row
        self.field = field
        where = _locate(row, field)
        super().__init__(f"{message}{where}")


class ValidationError(ValueError):
    """A parsed value violates a declared range or uniqueness invariant."""

    def __init__(self, message: str, *, row: int | None = None, field: str | None = None):
        self.row = row
        self.field = field
        where = _locate(row, field)
        super().__init__(f"{message}{where}")


class GenerationError(RuntimeError):
    """Catalog synthesis could not satisfy its post-conditions within the retry bound."""


class ConfigError(ValueError):
    """A scenario, constraint profile, or CLI argument is invalid."""


class EmptyFeasibleSet(ValueError):
    """Normalization was asked for an empty feasible set."""


class EmptyShortlist(ValueError):
    """No implementation exists at all for the drone."""


class SimulationError(RuntimeError):
    """A simulation failed after configuration was accepted."""


class NoImplementationForDrone(SimulationError):
    """A drone's offline shortlist is empty at mission start."""


class NoActiveImplementation(SimulationError):
    """Capacity self-assessment requires an active implementation."""


class NoCapacity(SimulationError):
    """Flows are pending but every reporting drone has zero capacity."""


class InstanceTooLarge(ValueError):
    """The exhaustive distribution oracle refuses instances beyond its guard."""


def _locate(row: int | None, field: str | None) -> str:
    parts = []
    if row is not None:
        parts.append(f"row {row}")
    if field is not None:
        parts.append(f"field {field!r}")
    return f" ({', '.join(parts)})" if parts else ""
