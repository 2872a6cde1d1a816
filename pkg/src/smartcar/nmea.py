"""NMEA 0183 sentence handling for the virtual GPS feed.

Only GGA and RMC are decoded; they carry everything the controller needs
(position, validity, satellite count). Every other sentence type parses
to Unsupported and is ignored. The parser is total: any byte or character
sequence yields an NmeaSentence, never an exception.

Lines arrive whole from the transport; partial-line reassembly is the
transport's job, not this module's.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

from .types import GeoFix

log = logging.getLogger(__name__)

_HEX_DIGITS = set("0123456789abcdefABCDEF")


class SentenceKind(Enum):
    GGA = "gga"
    RMC = "rmc"
    UNSUPPORTED = "unsupported"


_KIND_BY_TALKER = {
    "GPGGA": SentenceKind.GGA,
    "GNGGA": SentenceKind.GGA,
    "GPRMC": SentenceKind.RMC,
    "GNRMC": SentenceKind.RMC,
}


@dataclass(frozen=True)
class NmeaSentence:
    kind: SentenceKind
    raw_fields: tuple[str, ...]
    checksum_ok: bool


@dataclass(frozen=True)
class GpsState:
    """Receiver-side fix state: absent until the first valid sentence."""

    last_fix: GeoFix | None = None
    last_update_ms: int = 0

    def fresh(self, now_ms: int, stale_ms: int) -> bool:
        return self.last_fix is not None and now_ms - self.last_update_ms <= stale_ms


def xor_checksum(body: str) -> int:
    """XOR-fold of the characters between '$' and '*' (exclusive)."""
    total = 0
    for ch in body:
        total ^= ord(ch)
    return total


def frame_sentence(body: str) -> str:
    """Wrap a sentence body in the $...*hh frame with a correct checksum."""
    return f"${body}*{xor_checksum(body):02X}"


def _as_text(line: str | bytes) -> str:
    if isinstance(line, (bytes, bytearray)):
        return bytes(line).decode("latin-1")
    return line


def validate_checksum(line: str | bytes) -> bool:
    """True iff line is a $...*hh frame whose XOR-fold matches the hex pair.

    Trailing CR/LF is ignored; anything malformed returns False.
    """
    text = _as_text(line).rstrip("\r\n")
    if not text.startswith("$"):
        return False
    star = text.rfind("*")
    if star < 0:
        return False
    suffix = text[star + 1 :]
    if len(suffix) != 2 or not set(suffix) <= _HEX_DIGITS:
        return False
    return xor_checksum(text[1:star]) == int(suffix, 16)


def to_decimal_degrees(raw: str, hemisphere: str) -> float:
    """Convert NMEA ddmm.mmmm / dddmm.mmmm text to signed decimal degrees.

    The minutes field is always two integer digits, so the degree part is
    whatever precedes them (2 digits for latitude, 3 for longitude).
    S and W negate the result.
    """
    if hemisphere not in ("N", "S", "E", "W"):
        raise ValueError(f"bad hemisphere: {hemisphere!r}")
    intpart, _, frac = raw.partition(".")
    if len(intpart) not in (4, 5) or not intpart.isdigit() or (frac and not frac.isdigit()):
        raise ValueError(f"bad coordinate text: {raw!r}")
    degrees = int(intpart[:-2])
    minutes = float(intpart[-2:] + ("." + frac if frac else ""))
    if minutes >= 60.0:
        raise ValueError(f"minutes out of range in {raw!r}")
    value = degrees + minutes / 60.0
    if hemisphere in ("S", "W"):
        value = -value
    return value


def parse_sentence(line: str | bytes) -> NmeaSentence:
    """Split a line into kind + fields. Total: garbage decodes to Unsupported."""
    text = _as_text(line).rstrip("\r\n")
    checksum_ok = validate_checksum(text)
    if text.startswith("$"):
        star = text.rfind("*")
        body = text[1:star] if star > 0 else text[1:]
    else:
        body = text
    fields = tuple(body.split(","))
    kind = _KIND_BY_TALKER.get(fields[0], SentenceKind.UNSUPPORTED)
    return NmeaSentence(kind=kind, raw_fields=fields, checksum_ok=checksum_ok)


def update_fix(state: GpsState, sentence: NmeaSentence, now_ms: int) -> GpsState:
    """Merge a sentence into the fix state.

    Accepts GGA with fix quality > 0 and RMC with status 'A'; everything
    else (bad checksum, void status, unsupported kind, malformed fields)
    leaves the state unchanged. An accepted RMC carries no satellite
    count, so the previous fix's count persists.
    """
    if not sentence.checksum_ok:
        return state
    f = sentence.raw_fields
    try:
        if sentence.kind is SentenceKind.GGA:
            if len(f) < 8 or not f[6].isdigit() or int(f[6]) <= 0:
                return state
            lat = to_decimal_degrees(f[2], f[3])
            lon = to_decimal_degrees(f[4], f[5])
            satellites = int(f[7]) if f[7].isdigit() else 0
        elif sentence.kind is SentenceKind.RMC:
            if len(f) < 7 or f[2] != "A":
                return state
            lat = to_decimal_degrees(f[3], f[4])
            lon = to_decimal_degrees(f[5], f[6])
            satellites = state.last_fix.satellites if state.last_fix else 0
        else:
            return state
    except ValueError as exc:
        log.debug("ignoring undecodable sentence %s: %s", f[:1], exc)
        return state
    if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
        log.debug("ignoring out-of-range position %.6f,%.6f", lat, lon)
        return state
    fix = GeoFix(latitude=lat, longitude=lon, timestamp_ms=now_ms, valid=True, satellites=satellites)
    return GpsState(last_fix=fix, last_update_ms=now_ms)
