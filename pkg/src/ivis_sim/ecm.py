"""Virtual ECM: vehicle state, service-interval scheduling, settings, DTCs, LCD.

Every operation here is a pure transition ``old_state -> new_state``; nothing
mutates in place.  Service items go DUE on a whichever-comes-first basis:
either the distance driven since the last reset reaches the item's distance
interval, or the virtual time elapsed reaches its time interval.  Oil life
decays linearly with the worse of the two fractions and snaps back to 100 on
reset.
"""

from __future__ import annotations

import re
import shlex
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from .errors import SimConfigError

SECONDS_PER_DAY = 86400.0
LCD_LINES = 2
LCD_COLS = 20
OIL_ITEM_ID = "oil_change"
SETTING_NOTICE_SECONDS = 3.0
DEFAULT_WARN_RANGE_MILES = 1000.0


class IgnitionPosition(Enum):
    OFF = "OFF"
    ACC = "ACC"
    ON = "ON"
    START = "START"


def normalize_ignition(position: IgnitionPosition) -> IgnitionPosition:
    """START is spring-loaded; it always settles back to ON."""
    if position is IgnitionPosition.START:
        return IgnitionPosition.ON
    return position


class Language(Enum):
    ENGLISH = "English"
    SPANISH = "Spanish"
    FRENCH = "French"


class TimeZone(Enum):
    EST = "EST"
    CST = "CST"
    MST = "MST"
    PST = "PST"


class SettingKind(Enum):
    LANGUAGE = "language"
    TIME_ZONE = "time_zone"
    DST = "dst"


class ItemStatus(Enum):
    OK = "OK"
    DUE = "DUE"


class UnknownItemError(KeyError):
    """Reset requested for an item id not present in the vehicle profile."""


class InvalidSettingError(ValueError):
    """Setting value outside the legal enumeration for its kind."""


class DtcFormatError(ValueError):
    """Trouble code does not match the five-character OBD-II shape."""


class ProfileError(SimConfigError):
    """Vehicle profile file failed to parse."""


@dataclass(frozen=True)
class ServiceItemSpec:
    """One maintainable item: intervals in miles and/or days (at least one)."""

    item_id: str
    display_name: str
    distance_interval: float | None = None
    time_interval: float | None = None

    def __post_init__(self) -> None:
        if self.distance_interval is None and self.time_interval is None:
            raise ValueError(f"item {self.item_id!r} needs a distance or time interval")
        if self.distance_interval is not None and self.distance_interval <= 0:
            raise ValueError(f"item {self.item_id!r} distance interval must be > 0")
        if self.time_interval is not None and self.time_interval <= 0:
            raise ValueError(f"item {self.item_id!r} time interval must be > 0")


@dataclass(frozen=True)
class ServiceItemState:
    spec: ServiceItemSpec
    last_reset_odometer: float = 0.0
    last_reset_time: float = 0.0
    status: ItemStatus = ItemStatus.OK


@dataclass(frozen=True)
class DisplaySettings:
    language: Language = Language.ENGLISH
    time_zone: TimeZone = TimeZone.EST
    dst: bool = False


_DTC_RE = re.compile(r"^[A-Za-z][0-9]{4}$")


@dataclass(frozen=True)
class DiagnosticTroubleCode:
    """Five-character stored trouble code, e.g. P0301."""

    code: str

    def __post_init__(self) -> None:
        if not _DTC_RE.match(self.code):
            raise DtcFormatError(
                f"trouble code {self.code!r} must be one letter followed by four digits"
            )
        object.__setattr__(self, "code", self.code.upper())


@dataclass(frozen=True)
class LcdContent:
    """What the 2x20 reminder LCD shows; blink marks an active reminder."""

    lines: tuple[str, ...] = ()
    blink: bool = False

    def __post_init__(self) -> None:
        if len(self.lines) > LCD_LINES:
            raise ValueError(f"LCD holds at most {LCD_LINES} lines")
        for line in self.lines:
            if len(line) > LCD_COLS:
                raise ValueError(f"LCD line {line!r} exceeds {LCD_COLS} characters")


@dataclass(frozen=True)
class VehicleState:
    """Full ECM snapshot.  ``notice_*`` carries a transient settings
    confirmation shown on the LCD for a few virtual seconds."""

    ignition: IgnitionPosition = IgnitionPosition.OFF
    odometer: float = 0.0
    clock: float = 0.0
    settings: DisplaySettings = DisplaySettings()
    items: dict[str, ServiceItemState] = field(default_factory=dict)
    dtcs: frozenset[DiagnosticTroubleCode] = frozenset()
    lcd: LcdContent = LcdContent()
    oil_life: float = 100.0
    warn_range: float = DEFAULT_WARN_RANGE_MILES
    notice_text: str | None = None
    notice_until: float = 0.0


def _item_due(item: ServiceItemState, odometer: float, clock: float) -> bool:
    spec = item.spec
    if spec.distance_interval is not None:
        if odometer - item.last_reset_odometer >= spec.distance_interval:
            return True
    if spec.time_interval is not None:
        if clock - item.last_reset_time >= spec.time_interval * SECONDS_PER_DAY:
            return True
    return False


def _oil_life_pct(item: ServiceItemState, odometer: float, clock: float) -> float:
    spec = item.spec
    dist_frac = 0.0
    time_frac = 0.0
    if spec.distance_interval is not None:
        dist_frac = (odometer - item.last_reset_odometer) / spec.distance_interval
    if spec.time_interval is not None:
        time_frac = (clock - item.last_reset_time) / (spec.time_interval * SECONDS_PER_DAY)
    return 100.0 * max(0.0, 1.0 - max(dist_frac, time_frac))


def render_lcd(state: VehicleState) -> LcdContent:
    """Pure render of the reminder LCD from the rest of the state.

    DUE items show ``SERVICE <NAME>``; a distance item inside the warning
    range shows ``SERVICE IN <remaining miles>``.  Lines are ordered by a
    pending settings notice first, then item_id; the geometry caps output at
    two lines of twenty characters.
    """
    lines: list[str] = []
    if state.notice_text is not None and state.clock < state.notice_until:
        lines.append(state.notice_text[:LCD_COLS])
    blink = False
    for item_id in sorted(state.items):
        item = state.items[item_id]
        if _item_due(item, state.odometer, state.clock):
            lines.append(f"SERVICE {item.spec.display_name.upper()}"[:LCD_COLS])
            blink = True
        elif item.spec.distance_interval is not None:
            remaining = item.spec.distance_interval - (state.odometer - item.last_reset_odometer)
            if 0 < remaining <= state.warn_range:
                lines.append(f"SERVICE IN {remaining:.0f}"[:LCD_COLS])
    return LcdContent(tuple(lines[:LCD_LINES]), blink)


def _refresh(state: VehicleState) -> VehicleState:
    """Recompute item statuses, oil life, notice expiry, and the LCD."""
    items = {
        item_id: replace(
            item,
            status=ItemStatus.DUE if _item_due(item, state.odometer, state.clock) else ItemStatus.OK,
        )
        for item_id, item in state.items.items()
    }
    oil_item = items.get(OIL_ITEM_ID)
    oil_life = _oil_life_pct(oil_item, state.odometer, state.clock) if oil_item else 100.0
    notice_text = state.notice_text
    notice_until = state.notice_until
    if notice_text is not None and state.clock >= notice_until:
        notice_text, notice_until = None, 0.0
    state = replace(
        state,
        items=items,
        oil_life=oil_life,
        notice_text=notice_text,
        notice_until=notice_until,
    )
    return replace(state, lcd=render_lcd(state))


def advance(state: VehicleState, elapsed: float, distance: float) -> VehicleState:
    """Move the virtual clock and odometer forward and re-evaluate reminders."""
    if elapsed < 0:
        raise ValueError(f"elapsed must be >= 0, got {elapsed}")
    if distance < 0:
        raise ValueError(f"distance must be >= 0, got {distance}")
    return _refresh(replace(state, clock=state.clock + elapsed, odometer=state.odometer + distance))


def apply_reset(state: VehicleState, item_id: str) -> VehicleState:
    """Rebase an item's reset baselines to the current odometer and clock."""
    if item_id not in state.items:
        raise UnknownItemError(item_id)
    items = dict(state.items)
    items[item_id] = replace(
        items[item_id],
        last_reset_odometer=state.odometer,
        last_reset_time=state.clock,
        status=ItemStatus.OK,
    )
    return _refresh(replace(state, items=items))


_SETTING_LABELS = {
    SettingKind.LANGUAGE: "LANGUAGE",
    SettingKind.TIME_ZONE: "TIME ZONE",
    SettingKind.DST: "DST",
}


def _coerce_setting(kind: SettingKind, value):
    if kind is SettingKind.LANGUAGE:
        if isinstance(value, Language):
            return value
        for member in Language:
            if isinstance(value, str) and value.lower() == member.value.lower():
                return member
    elif kind is SettingKind.TIME_ZONE:
        if isinstance(value, TimeZone):
            return value
        for member in TimeZone:
            if isinstance(value, str) and value.upper() == member.value:
                return member
    elif kind is SettingKind.DST:
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ("on", "off"):
            return value.lower() == "on"
    raise InvalidSettingError(f"illegal value {value!r} for setting {kind.value}")


def apply_setting(state: VehicleState, kind: SettingKind, value) -> VehicleState:
    """Change one display setting and post a short confirmation notice.

    ``value`` may be the enum member, its display string (``"Spanish"``,
    ``"PST"``), or for DST a bool or ``"On"``/``"Off"``.
    """
    coerced = _coerce_setting(kind, value)
    if kind is SettingKind.LANGUAGE:
        settings = replace(state.settings, language=coerced)
        shown = coerced.value
    elif kind is SettingKind.TIME_ZONE:
        settings = replace(state.settings, time_zone=coerced)
        shown = coerced.value
    else:
        # DST is a display-layer flag only; the virtual clock is never shifted.
        settings = replace(state.settings, dst=coerced)
        shown = "On" if coerced else "Off"
    notice = f"{_SETTING_LABELS[kind]} {shown}".upper()
    return _refresh(
        replace(
            state,
            settings=settings,
            notice_text=notice,
            notice_until=state.clock + SETTING_NOTICE_SECONDS,
        )
    )


def raise_dtc(state: VehicleState, code: str | DiagnosticTroubleCode) -> VehicleState:
    """Store a trouble code; duplicates are a no-op (set semantics)."""
    dtc = code if isinstance(code, DiagnosticTroubleCode) else DiagnosticTroubleCode(code)
    return _refresh(replace(state, dtcs=state.dtcs | {dtc}))


def clear_dtcs(state: VehicleState) -> VehicleState:
    """Clear all stored trouble codes."""
    return _refresh(replace(state, dtcs=frozenset()))


def set_ignition(state: VehicleState, position: IgnitionPosition) -> VehicleState:
    return _refresh(replace(state, ignition=normalize_ignition(position)))


# --- vehicle profile file -------------------------------------------------
#
#   # comment
#   warn <miles>
#   item <id> "<display name>" dist=<miles|none> time=<days|none>


@dataclass(frozen=True)
class VehicleProfile:
    items: dict[str, ServiceItemSpec]
    warn_range: float = DEFAULT_WARN_RANGE_MILES


def _interval(token: str, line_no: int) -> float | None:
    key, _, raw = token.partition("=")
    if raw == "none":
        return None
    try:
        value = float(raw)
    except ValueError:
        raise ProfileError(f"line {line_no}: bad {key} value {raw!r}") from None
    if value <= 0:
        raise ProfileError(f"line {line_no}: {key} must be > 0, got {raw}")
    return value


def parse_profile(text: str) -> VehicleProfile:
    items: dict[str, ServiceItemSpec] = {}
    warn_range = DEFAULT_WARN_RANGE_MILES
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            tokens = shlex.split(line, comments=True)
        except ValueError as exc:
            raise ProfileError(f"line {line_no}: {exc}") from None
        if not tokens:
            continue
        if tokens[0] == "warn":
            if len(tokens) != 2:
                raise ProfileError(f"line {line_no}: expected 'warn <miles>'")
            warn_range = _interval(f"warn={tokens[1]}", line_no) or 0.0
            continue
        if tokens[0] != "item":
            raise ProfileError(f"line {line_no}: unknown directive {tokens[0]!r}")
        if len(tokens) != 5 or not tokens[3].startswith("dist=") or not tokens[4].startswith("time="):
            raise ProfileError(
                f'line {line_no}: expected \'item <id> "<name>" dist=<miles|none> time=<days|none>\''
            )
        item_id = tokens[1]
        if item_id in items:
            raise ProfileError(f"line {line_no}: duplicate item id {item_id!r}")
        dist = _interval(tokens[3], line_no)
        time_days = _interval(tokens[4], line_no)
        try:
            items[item_id] = ServiceItemSpec(item_id, tokens[2], dist, time_days)
        except ValueError as exc:
            raise ProfileError(f"line {line_no}: {exc}") from None
    if not items:
        raise ProfileError("profile defines no items")
    return VehicleProfile(items=items, warn_range=warn_range)


def load_profile(path: str | Path) -> VehicleProfile:
    return parse_profile(Path(path).read_text(encoding="utf-8"))


def fresh_state(
    profile: VehicleProfile,
    odometer: float = 0.0,
    clock: float = 0.0,
    ignition: IgnitionPosition = IgnitionPosition.OFF,
) -> VehicleState:
    """A just-serviced vehicle: every item's baselines sit at the current
    odometer and clock."""
    items = {
        item_id: ServiceItemState(spec, last_reset_odometer=odometer, last_reset_time=clock)
        for item_id, spec in profile.items.items()
    }
    state = VehicleState(
        ignition=normalize_ignition(ignition),
        odometer=odometer,
        clock=clock,
        items=items,
        warn_range=profile.warn_range,
    )
    return _refresh(state)
