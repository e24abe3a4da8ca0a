"""Meaning representations for the restaurant and video-game domains.

A meaning representation (MR) is an ordered list of slot-value pairs, optionally
headed by a dialogue act (video-game MRs) and optionally tagged with a target
personality. Restaurant MRs are pipe-separated "key = value" lists; video-game
MRs have the form ``act(slot [value], slot [value], ...)``.

Parsing is pure and all value types are immutable, so MRs are safe to share
across concurrent workers.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass


class Personality(enum.Enum):
    """The five personality styles an utterance can target."""

    AGREEABLE = "agreeable"
    DISAGREEABLE = "disagreeable"
    CONSCIENTIOUS = "conscientious"
    UNCONSCIENTIOUS = "unconscientious"
    EXTRAVERT = "extravert"

    @classmethod
    def parse(cls, label: str) -> "Personality":
        norm = label.strip().lower()
        # Both spellings occur in the wild; treat them as one label.
        if norm == "extrovert":
            norm = "extravert"
        for p in cls:
            if p.value == norm:
                return p
        raise MRParseError(f"unknown personality label: {label!r}")


class Domain(enum.Enum):
    RESTAURANT = "restaurant"
    VIDEOGAME = "videogame"


class SlotKind(enum.Enum):
    CATEGORICAL = "categorical"
    BOOLEAN = "boolean"
    PLACEHOLDER = "placeholder"
    OPEN_TEXT = "open-text"


class MRParseError(ValueError):
    """Raised when an MR line cannot be parsed or violates an invariant."""


# Slots whose values are yes/no rather than content words.
BOOLEAN_SLOTS = {
    Domain.RESTAURANT: frozenset({"familyfriendly"}),
    Domain.VIDEOGAME: frozenset(
        {"has_multiplayer", "available_on_steam", "has_linux_release", "has_mac_release"}
    ),
}

# Slots whose values are unconstrained text (names, dates, free-form qualifiers).
OPEN_TEXT_SLOTS = {
    Domain.RESTAURANT: frozenset({"name", "near"}),
    Domain.VIDEOGAME: frozenset(
        {"name", "developer", "release_year", "exp_release_date", "specifier"}
    ),
}

_PLACEHOLDER_RE = re.compile(r".*variable$", re.IGNORECASE)


def _classify_slot(domain: Domain, name: str, value: str) -> SlotKind:
    if name in BOOLEAN_SLOTS[domain]:
        return SlotKind.BOOLEAN
    if name in OPEN_TEXT_SLOTS[domain]:
        if _PLACEHOLDER_RE.match(value):
            return SlotKind.PLACEHOLDER
        return SlotKind.OPEN_TEXT
    return SlotKind.CATEGORICAL


@dataclass(frozen=True, slots=True)
class SlotValue:
    """One attribute-value pair of an MR."""

    name: str
    value: str
    kind: SlotKind


@dataclass(frozen=True, slots=True)
class MeaningRepresentation:
    """A dialogue act with ordered slots and an optional target personality."""

    domain: Domain
    slots: tuple[SlotValue, ...]
    dialogue_act: str | None = None
    target_personality: Personality | None = None

    def __post_init__(self) -> None:
        if not self.slots:
            raise MRParseError("an MR needs at least one slot")
        names = [s.name for s in self.slots]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise MRParseError(f"duplicate slot name(s): {', '.join(dupes)}")

    def slot_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.slots)

    def get(self, name: str) -> SlotValue | None:
        for s in self.slots:
            if s.name == name:
                return s
        return None

    def with_personality(self, personality: Personality | None) -> "MeaningRepresentation":
        return MeaningRepresentation(
            domain=self.domain,
            slots=self.slots,
            dialogue_act=self.dialogue_act,
            target_personality=personality,
        )


def normalize_key(key: str) -> str:
    """Lower-case a slot key and drop internal whitespace ("familyFriendly" -> "familyfriendly")."""
    return re.sub(r"\s+", "", key).lower()


def parse_personage_mr(text: str) -> MeaningRepresentation:
    """Parse a restaurant-domain MR line of the form "key = value | key = value".

    A "personality = <label>" pair is lifted into ``target_personality`` rather
    than stored as a slot. Keys are case-insensitive; whitespace around "=" and
    "|" is insignificant; boolean slots must carry yes/no.
    """
    if not text or not text.strip():
        raise MRParseError("empty MR line")
    slots: list[SlotValue] = []
    seen: set[str] = set()
    personality: Personality | None = None
    for part in text.split("|"):
        if "=" not in part:
            raise MRParseError(f"expected 'key = value', got {part.strip()!r}")
        key, _, value = part.partition("=")
        name = normalize_key(key)
        value = value.strip()
        if not name:
            raise MRParseError(f"empty key in {part.strip()!r}")
        if not value:
            raise MRParseError(f"empty value for slot {name!r}")
        if name == "personality":
            if personality is not None:
                raise MRParseError("duplicate personality pair")
            personality = Personality.parse(value)
            continue
        if name in seen:
            raise MRParseError(f"duplicate slot name(s): {name}")
        seen.add(name)
        kind = _classify_slot(Domain.RESTAURANT, name, value)
        if kind is SlotKind.BOOLEAN and value.lower() not in ("yes", "no"):
            raise MRParseError(f"boolean slot {name!r} must be yes/no, got {value!r}")
        if kind is SlotKind.BOOLEAN:
            value = value.lower()
        slots.append(SlotValue(name, value, kind))
    return MeaningRepresentation(
        domain=Domain.RESTAURANT,
        slots=tuple(slots),
        target_personality=personality,
    )


def parse_viggo_mr(text: str) -> MeaningRepresentation:
    """Parse a video-game MR line of the form "act(slot [value], slot [value], ...)".

    Values may contain commas only inside their brackets; multi-valued slots
    (e.g. genres) keep the bracketed text verbatim as a single value. A trailing
    "| personality = <label>" tag is lifted into ``target_personality``.
    """
    if not text or not text.strip():
        raise MRParseError("empty MR line")
    personality: Personality | None = None
    body = text.strip()
    if "|" in body:
        body, _, tail = body.partition("|")
        key, _, label = tail.partition("=")
        if normalize_key(key) != "personality" or not label.strip():
            raise MRParseError(f"unexpected trailing segment {tail.strip()!r}")
        personality = Personality.parse(label)
        body = body.strip()
    open_idx = body.find("(")
    if open_idx < 0 or not body.endswith(")"):
        raise MRParseError("expected act(...) form")
    act = body[:open_idx].strip()
    if not act:
        raise MRParseError("missing dialogue act")
    inner = body[open_idx + 1 : -1]
    if not inner.strip():
        raise MRParseError("empty slot list")

    slots: list[SlotValue] = []
    seen: set[str] = set()
    depth = 0
    item = []
    items: list[str] = []
    for ch in inner:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
            if depth < 0:
                raise MRParseError("unbalanced brackets")
        if ch == "," and depth == 0:
            items.append("".join(item))
            item = []
        else:
            item.append(ch)
    if depth != 0:
        raise MRParseError("unbalanced brackets")
    items.append("".join(item))

    for raw in items:
        m = re.fullmatch(r"\s*([^\[\]]+?)\s*\[\s*(.*?)\s*\]\s*", raw)
        if not m:
            raise MRParseError(f"expected 'slot [value]', got {raw.strip()!r}")
        name = normalize_key(m.group(1))
        value = m.group(2)
        if not value:
            raise MRParseError(f"empty value for slot {name!r}")
        if name in seen:
            raise MRParseError(f"duplicate slot name(s): {name}")
        seen.add(name)
        kind = _classify_slot(Domain.VIDEOGAME, name, value)
        if kind is SlotKind.BOOLEAN and value.lower() not in ("yes", "no"):
            raise MRParseError(f"boolean slot {name!r} must be yes/no, got {value!r}")
        if kind is SlotKind.BOOLEAN:
            value = value.lower()
        slots.append(SlotValue(name, value, kind))
    return MeaningRepresentation(
        domain=Domain.VIDEOGAME,
        slots=tuple(slots),
        dialogue_act=act,
        target_personality=personality,
    )


def parse_mr(text: str) -> MeaningRepresentation:
    """Parse either MR format, detecting video-game lines by their act(...) shape."""
    stripped = text.strip()
    head = stripped.split("|", 1)[0]
    if re.match(r"^\s*[A-Za-z_][\w]*\s*\(", head) and head.rstrip().endswith(")"):
        return parse_viggo_mr(stripped)
    return parse_personage_mr(stripped)


def serialize_mr(mr: MeaningRepresentation, format: str | None = None) -> str:
    """Render an MR back to its textual line; parse(serialize(mr)) == mr.

    ``format`` is "personage" or "viggo"; it defaults to the MR's own domain and
    must match it otherwise.
    """
    expected = "personage" if mr.domain is Domain.RESTAURANT else "viggo"
    if format is None:
        format = expected
    if format != expected:
        raise ValueError(f"format {format!r} does not match domain {mr.domain.value!r}")
    if format == "personage":
        parts = [f"{s.name} = {s.value}" for s in mr.slots]
        if mr.target_personality is not None:
            parts.append(f"personality = {mr.target_personality.value}")
        return " | ".join(parts)
    if not mr.dialogue_act:
        raise ValueError("video-game MRs need a dialogue act to serialize")
    body = ", ".join(f"{s.name} [{s.value}]" for s in mr.slots)
    line = f"{mr.dialogue_act}({body})"
    if mr.target_personality is not None:
        line += f" | personality = {mr.target_personality.value}"
    return line
