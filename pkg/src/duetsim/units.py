"""Parsing and formatting of suffixed quantity literals used in descriptor files.

Descriptors accept human-friendly strings like "256 GB/s", "1TB/s", "8GB",
"700MHz".  Internally every quantity is a plain number: bytes, bytes/second,
or hertz.  Decimal (SI) prefixes are used throughout, matching vendor
datasheet conventions (1 GB = 1e9 bytes).
"""

from __future__ import annotations

import re

_SI = {
    "": 1.0,
    "k": 1e3,
    "m": 1e6,
    "g": 1e9,
    "t": 1e12,
    "p": 1e15,
}

_LITERAL_RE = re.compile(
    r"""^\s*
        (?P<num>[0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?)
        \s*
        (?P<prefix>[kKmMgGtTpP]?)
        (?P<unit>B/s|B|Hz|FLOPS/s|FLOPS)?
        \s*$""",
    re.VERBOSE,
)


class UnitError(ValueError):
    """Raised for malformed quantity literals."""


def parse_quantity(value, expect: str | None = None) -> float:
    """Parse a number or suffixed literal into a plain float.

    ``expect`` may name a unit family ("B", "B/s", "Hz") to reject literals
    carrying a conflicting unit; bare numbers are always accepted and taken
    to be in base units.
    """
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise UnitError(f"cannot parse quantity from {type(value).__name__}")
    m = _LITERAL_RE.match(value)
    if m is None:
        raise UnitError(f"malformed quantity literal: {value!r}")
    unit = m.group("unit") or ""
    if expect is not None and unit and unit != expect:
        raise UnitError(f"expected a {expect} quantity, got {value!r}")
    scale = _SI[m.group("prefix").lower()]
    return float(m.group("num")) * scale


def parse_bytes(value) -> int:
    """Parse a capacity literal ("8GB", 1024) into an integer byte count."""
    return int(round(parse_quantity(value, expect="B")))


def parse_bandwidth(value) -> float:
    """Parse a bandwidth literal ("256GB/s") into bytes/second."""
    return parse_quantity(value, expect="B/s")


def parse_frequency(value) -> float:
    """Parse a frequency literal ("700MHz") into hertz."""
    return parse_quantity(value, expect="Hz")


def format_bytes(n: float) -> str:
    """Render a byte count with the largest exact-ish SI prefix, for reports."""
    for prefix, scale in (("P", 1e15), ("T", 1e12), ("G", 1e9), ("M", 1e6), ("k", 1e3)):
        if abs(n) >= scale:
            return f"{n / scale:.4g} {prefix}B"
    return f"{n:.0f} B"
