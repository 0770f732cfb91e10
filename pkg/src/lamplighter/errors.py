"""Typed errors shared across the package.

Every refusal (caps, variant mixing, unusable inputs) raises one of these so
callers and the CLI can map failures to exit codes without string matching.
"""

from __future__ import annotations


class LamplighterError(Exception):
    """Base class for all package errors."""


class VariantMismatchError(LamplighterError, TypeError):
    """An element, boundary point, or configuration from the wrong base group."""


class CapExceededError(LamplighterError):
    """A request beyond a configured desk-scale cap; names the cap."""

    def __init__(self, cap_name: str, cap_value, requested) -> None:
        self.cap_name = cap_name
        self.cap_value = cap_value
        self.requested = requested
        super().__init__(f"{cap_name}={cap_value} exceeded (requested {requested})")


class ZeroDistanceError(LamplighterError, ZeroDivisionError):
    """Ratio against the identity: the denominator distance is zero."""


class SearchExhaustedError(LamplighterError):
    """A bounded search (BFS radius, stabilization scan) ran out of room."""


class NoDirectionError(LamplighterError):
    """A lattice walk ended at the origin; no boundary direction exists."""


class InexactBoundaryError(LamplighterError):
    """An operation that needs an exact boundary point got an estimate."""


class PrefixTooShortError(LamplighterError):
    """A stable prefix shorter than the requested cylinder depth."""


class MeasureError(LamplighterError):
    """A step measure failed construction checks; message carries the diagnostic."""


class CylinderDepthError(LamplighterError):
    """The recorded cylinder depth cannot express the requested algebra."""


class InvalidInputError(LamplighterError):
    """Unparseable or inconsistent user input (CLI/config layer)."""
