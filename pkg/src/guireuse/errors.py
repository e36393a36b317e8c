"""Exception types shared across the package."""

from __future__ import annotations


class GuiReuseError(Exception):
    """Base class for all package errors."""


class ParseError(GuiReuseError):
    """A document could not be parsed at all (bad JSON, bad TOML, bad header)."""


class ValidationError(GuiReuseError):
    """A parsed document violates the schema or an invariant.

    Collects one message per violation; each message names the offending
    path within the document, e.g. ``screens[1].widgets[0].attributes``.
    """

    def __init__(self, violations: list[str] | str):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = violations
        super().__init__("; ".join(violations))


class SimulationError(GuiReuseError):
    """A concrete event could not be executed at all (not a soft no_transition).

    ``index`` is the position of the failing event within the executed list,
    or None when the event was executed stand-alone.
    """

    def __init__(self, message: str, index: int | None = None):
        self.index = index
        super().__init__(message if index is None else f"event[{index}]: {message}")


class ConfigError(GuiReuseError):
    """A run configuration value is unknown or out of range."""
