"""Reference-code table: numeric codes mapped to ECM actions.

The table is the entire contract of the code-entry interaction model: a
motorist looks a function up in the handbook, keys its code, and the ECM
performs the bound action.  Codes are digit strings of one uniform length
(four in the stock table).  File format, one row per line:

    <code> <kind> <payload...>        # kind: language|time_zone|dst|reset

Payload words name setting values or service item ids, e.g.::

    1002 language Spanish
    2004 time_zone PST
    2012 dst On
    3014 reset oil_change
    3015 reset oil_filter oil_change
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .ecm import Language, SettingKind, TimeZone, VehicleProfile
from .errors import SimConfigError


class TableFormatError(SimConfigError):
    """A table line is malformed; message carries the 1-based line number."""


class DuplicateCodeError(TableFormatError):
    """The same code appears on two lines."""


class TableSchemaError(TableFormatError):
    """A row parses but names an unknown action kind or payload value."""


class CodeActionKind(Enum):
    LANGUAGE = "language"
    TIME_ZONE = "time_zone"
    DST = "dst"
    RESET = "reset"


@dataclass(frozen=True)
class CodeAction:
    """What one code does: a setting change or one-or-more item resets.

    ``payload`` holds canonical words: a Language/TimeZone display value,
    ``On``/``Off`` for dst, or service item ids in reset order.
    """

    kind: CodeActionKind
    payload: tuple[str, ...]


@dataclass(frozen=True)
class ReferenceTable:
    entries: dict[str, CodeAction]
    code_length: int


_SETTING_KINDS = {
    CodeActionKind.LANGUAGE: SettingKind.LANGUAGE,
    CodeActionKind.TIME_ZONE: SettingKind.TIME_ZONE,
    CodeActionKind.DST: SettingKind.DST,
}


def _canonical_payload(kind: CodeActionKind, words: list[str], line_no: int) -> tuple[str, ...]:
    if kind is CodeActionKind.RESET:
        if not words:
            raise TableSchemaError(f"line {line_no}: reset needs at least one item id")
        seen = set()
        for word in words:
            if word in seen:
                raise TableSchemaError(f"line {line_no}: item {word!r} repeated in payload")
            seen.add(word)
        return tuple(words)
    if len(words) != 1:
        raise TableSchemaError(f"line {line_no}: {kind.value} takes exactly one value")
    word = words[0]
    if kind is CodeActionKind.LANGUAGE:
        for member in Language:
            if word.lower() == member.value.lower():
                return (member.value,)
        raise TableSchemaError(f"line {line_no}: unknown language {word!r}")
    if kind is CodeActionKind.TIME_ZONE:
        for member in TimeZone:
            if word.upper() == member.value:
                return (member.value,)
        raise TableSchemaError(f"line {line_no}: unknown time zone {word!r}")
    if word.lower() in ("on", "off"):
        return ("On" if word.lower() == "on" else "Off",)
    raise TableSchemaError(f"line {line_no}: dst value must be On or Off, got {word!r}")


def parse_table(text: str) -> ReferenceTable:
    """Parse a reference-code table; errors name the offending line."""
    entries: dict[str, CodeAction] = {}
    first_lines: dict[str, int] = {}
    code_length: int | None = None
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        if len(words) < 3:
            raise TableFormatError(f"line {line_no}: expected '<code> <kind> <payload...>'")
        code = words[0]
        if not code.isdigit():
            raise TableFormatError(f"line {line_no}: code {code!r} must be all digits")
        if code_length is None:
            code_length = len(code)
        elif len(code) != code_length:
            raise TableFormatError(
                f"line {line_no}: code {code!r} has length {len(code)}, table uses {code_length}"
            )
        if code in entries:
            raise DuplicateCodeError(
                f"line {line_no}: code {code} already defined on line {first_lines[code]}"
            )
        try:
            kind = CodeActionKind(words[1])
        except ValueError:
            raise TableSchemaError(f"line {line_no}: unknown action kind {words[1]!r}") from None
        entries[code] = CodeAction(kind, _canonical_payload(kind, words[2:], line_no))
        first_lines[code] = line_no
    if code_length is None:
        raise TableFormatError("table defines no codes")
    return ReferenceTable(entries=entries, code_length=code_length)


def serialize_table(table: ReferenceTable) -> str:
    """Inverse of parse_table; rows come out sorted by code."""
    lines = []
    for code in sorted(table.entries):
        action = table.entries[code]
        lines.append(" ".join([code, action.kind.value, *action.payload]))
    return "\n".join(lines) + "\n"


def load_table(path: str | Path) -> ReferenceTable:
    return parse_table(Path(path).read_text(encoding="utf-8"))


def lookup(table: ReferenceTable, code: str) -> CodeAction | None:
    return table.entries.get(code)


def codes_for_item(table: ReferenceTable, item_or_value: str) -> list[str]:
    """All codes whose action touches the given item id or setting value.

    Matching is exact for reset item ids and case-insensitive for setting
    values, so ``codes_for_item(t, "oil_change")`` and
    ``codes_for_item(t, "English")`` both work.
    """
    out = []
    for code in sorted(table.entries):
        action = table.entries[code]
        if action.kind is CodeActionKind.RESET:
            if item_or_value in action.payload:
                out.append(code)
        else:
            if any(item_or_value.lower() == word.lower() for word in action.payload):
                out.append(code)
    return out


def validate_against_profile(table: ReferenceTable, profile: VehicleProfile) -> None:
    """Every reset payload must name an item the profile defines."""
    for code in sorted(table.entries):
        action = table.entries[code]
        if action.kind is not CodeActionKind.RESET:
            continue
        for item_id in action.payload:
            if item_id not in profile.items:
                raise TableSchemaError(
                    f"code {code} resets unknown item {item_id!r}"
                )


def setting_kind_for(action: CodeAction) -> SettingKind:
    """Map a non-reset action to the ECM setting it drives."""
    return _SETTING_KINDS[action.kind]
