"""Pseudo-reference construction: a telegraphic textualization of an MR.

The pseudo-reference concatenates slot renderings in slot order, one space
apart. Non-boolean values pass through verbatim unless the domain's phrase
table overrides them; boolean slots never surface their yes/no token and
instead render a slot-name phrase from the table. The target personality is
never part of the pseudo-reference.

Phrase tables are editable text files (one per domain) with lines of the form
"key<TAB>phrase", where key is either a bare slot name or "slot=value".
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from stylenlg.mr import Domain, MeaningRepresentation, SlotKind, SlotValue

PhraseTable = dict[str, str]

_TABLE_FILES = {
    Domain.RESTAURANT: "restaurant_phrases.txt",
    Domain.VIDEOGAME: "viggo_phrases.txt",
}

_cached_tables: dict[Domain, PhraseTable] = {}


def load_phrase_table(source: str | Path) -> PhraseTable:
    """Read a phrase table from a file path; '#' lines are comments."""
    table: PhraseTable = {}
    text = Path(source).read_text(encoding="utf-8")
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, phrase = line.partition("\t")
        if not phrase:
            raise ValueError(f"phrase table line needs 'key<TAB>phrase': {raw!r}")
        table[key.strip().lower()] = phrase.strip()
    return table


def default_phrase_table(domain: Domain) -> PhraseTable:
    if domain not in _cached_tables:
        ref = resources.files("stylenlg").joinpath("data", _TABLE_FILES[domain])
        with resources.as_file(ref) as path:
            _cached_tables[domain] = load_phrase_table(path)
    return dict(_cached_tables[domain])


def _render_slot(slot: SlotValue, table: PhraseTable) -> str:
    by_value = table.get(f"{slot.name}={slot.value.lower()}")
    if by_value is not None:
        return by_value
    by_slot = table.get(slot.name)
    if by_slot is not None:
        return by_slot
    if slot.kind is SlotKind.BOOLEAN:
        # Fallback when the table has no entry: the slot name itself,
        # negated for "no"; the yes/no token never surfaces.
        phrase = slot.name.replace("_", " ")
        return phrase if slot.value == "yes" else f"not {phrase}"
    return slot.value


def linearize(
    mr: MeaningRepresentation,
    table: PhraseTable | None = None,
    include_act: bool = False,
) -> str:
    """Build the pseudo-reference for an MR.

    ``table`` overrides the domain's default phrase table. ``include_act``
    prefixes the dialogue act for video-game MRs (off by default).
    """
    if table is None:
        table = default_phrase_table(mr.domain)
    parts = [_render_slot(s, table) for s in mr.slots]
    if include_act and mr.dialogue_act:
        parts.insert(0, mr.dialogue_act.replace("_", " "))
    return " ".join(p for p in parts if p)
