"""Personality-styled data-to-text generation with overgenerate-and-rank scoring."""

__version__ = "0.1.0"

from stylenlg.mr import (
    Domain,
    MeaningRepresentation,
    MRParseError,
    Personality,
    SlotKind,
    SlotValue,
    parse_personage_mr,
    parse_viggo_mr,
    serialize_mr,
)

__all__ = [
    "Domain",
    "MeaningRepresentation",
    "MRParseError",
    "Personality",
    "SlotKind",
    "SlotValue",
    "parse_personage_mr",
    "parse_viggo_mr",
    "serialize_mr",
]
