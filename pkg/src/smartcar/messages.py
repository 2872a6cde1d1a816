"""The human-facing SMS text formats: remote queries, replies, alerts.

These strings are the system's wire contract with the phone on the other
end: bit-exact, plain ASCII, never longer than one GSM-7 message.
Coordinates always render at 6 decimal places ('.' separator) and the
maps URL embeds exactly the same coordinate text as the visible field.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .config import Config
from .nmea import GpsState
from .types import AlertKind, AlertMessage, SensorFrame

NO_FIX_TEXT = "UNKNOWN (no GPS fix)"
_MAPS_URL = "https://maps.google.com/?q="

_ALERT_PREFIX = {
    AlertKind.ACCIDENT: "ACCIDENT DETECTED",
    AlertKind.PANIC: "PANIC BUTTON PRESSED",
    AlertKind.ALCOHOL: "ALCOHOL LIMIT EXCEEDED. Vehicle interlock engaged",
}


class QueryKind(Enum):
    STATUS = "STATUS"
    TEMP = "TEMP"
    HUM = "HUM"
    LOC = "LOC"
    HELP = "HELP"
    UNKNOWN = "UNKNOWN"


_KNOWN_QUERIES = {k.value: k for k in QueryKind if k is not QueryKind.UNKNOWN}


@dataclass(frozen=True)
class Query:
    kind: QueryKind
    original: str = ""


def parse_query(body: str) -> Query:
    """Map an inbound text to a query: case-insensitive, whitespace-trimmed."""
    trimmed = body.strip()
    kind = _KNOWN_QUERIES.get(trimmed.upper())
    if kind is None:
        return Query(QueryKind.UNKNOWN, original=trimmed)
    return Query(kind)


def canonical_query_text(kind: QueryKind) -> str:
    """The keyword that parses back to ``kind`` (identity round-trip)."""
    if kind is QueryKind.UNKNOWN:
        raise ValueError("UNKNOWN has no canonical keyword")
    return kind.value


def coordinate_text(lat: float, lon: float) -> str:
    return f"{lat:.6f},{lon:.6f}"


def _location_text(gps: GpsState, now_ms: int, config: Config) -> str:
    if gps.fresh(now_ms, config.gps_stale_ms):
        coords = coordinate_text(gps.last_fix.latitude, gps.last_fix.longitude)
        return f"{coords} {_MAPS_URL}{coords}"
    return NO_FIX_TEXT


def format_reply(
    q: Query,
    frame: SensorFrame,
    gps: GpsState,
    config: Config,
    engine_enabled: bool = True,
) -> str:
    """Render the reply for a query against the latest sensor frame.

    GPS staleness is judged at frame.t_ms, the sampling instant of the
    data being reported. Always <= 160 chars.
    """
    if q.kind is QueryKind.TEMP:
        return f"TEMP={frame.temp_c:.1f}C"
    if q.kind is QueryKind.HUM:
        return f"HUM={round(frame.humidity_pct)}%"
    if q.kind is QueryKind.LOC:
        return f"LOC={_location_text(gps, frame.t_ms, config)}"
    if q.kind is QueryKind.STATUS:
        rain = "WET" if frame.rain_wet else "DRY"
        engine = "ENABLED" if engine_enabled else "DISABLED"
        return (
            f"TEMP={frame.temp_c:.1f}C HUM={round(frame.humidity_pct)}% "
            f"ALC={frame.alcohol_raw} RAIN={rain} ENGINE={engine}"
        )
    if q.kind is QueryKind.HELP:
        return "CMDS: STATUS TEMP HUM LOC HELP"
    return "UNKNOWN CMD. SEND HELP"


def format_alert(kind: AlertKind, gps: GpsState, config: Config, now_ms: int) -> AlertMessage:
    """Render an alert SMS; routing follows the alert kind.

    Accident and Panic go to the primary number, Alcohol to the safety
    number. Without a fix fresher than gps_stale_ms the location section
    reads UNKNOWN.
    """
    body = f"{_ALERT_PREFIX[kind]}. Location: {_location_text(gps, now_ms, config)}"
    if kind is AlertKind.ALCOHOL:
        dest = config.alert_safety_number
    else:
        dest = config.alert_primary_number
    return AlertMessage(kind=kind, destination=dest, body=body)
