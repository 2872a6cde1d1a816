"""Virtual peers for the wire protocols: a GSM modem that answers AT
commands, a GPS feed that emits NMEA text, and a sensor board holding
the analog/digital input levels.

All three are plain state machines driven inline by the executor; the
modem is the only one that consults the clock, and only to honor a
scripted silence window.
"""

from __future__ import annotations

import re
from collections import deque

from .. import nmea
from ..modem import CTRL_Z
from ..types import SensorFrame
from .clock import SimClock

_CMGS_RE = re.compile(r'^AT\+CMGS="([^"]*)"$')
_CMGR_RE = re.compile(r"^AT\+CMGR=(\d+)$")
_IPR_RE = re.compile(r"^AT\+IPR=\d+$")


class VirtualModem:
    """SIM900-class text-mode peer.

    Commands arrive CR-terminated through write(); responses queue up for
    read(). Fault hooks: arm_error_once() makes the next answered command
    fail with ERROR, silence_for() drops all bytes written before the
    window closes (a dead serial link, so no state changes either).
    """

    def __init__(self, clock: SimClock | None = None):
        self.clock = clock
        self.closed = False
        self._rx = b""
        self._out = bytearray()
        self._awaiting_body = False
        self._pending_dest = ""
        self._inbox: dict[int, tuple[str, str]] = {}
        self._next_slot = 1
        self._send_counter = 0
        self.pending_errors = 0
        self.silent_until_ms = 0
        self.swallowed_bytes = 0
        self.deliveries: list[tuple[str, str]] = []  # (dest, body) in send order
        self.transcript: list[tuple[str, str]] = []  # ("cmd"|"body", text) answered units

    # -- fault hooks -----------------------------------------------------

    def arm_error_once(self) -> None:
        self.pending_errors += 1

    def silence_for(self, duration_ms: int) -> None:
        if self.clock is None:
            raise ValueError("silence window needs a clock")
        self.silent_until_ms = max(self.silent_until_ms, self.clock.now_ms + duration_ms)

    def inject_sms(self, sender: str, body: str) -> int:
        """Store an inbound message and raise the +CMTI notification."""
        slot = self._next_slot
        self._next_slot += 1
        self._inbox[slot] = (sender, body)
        self._emit(f'\r\n+CMTI: "SM",{slot}\r\n')
        return slot

    # -- byte transport --------------------------------------------------

    def write(self, data: bytes) -> int:
        if self.clock is not None and self.clock.now_ms < self.silent_until_ms:
            self.swallowed_bytes += len(data)
            return len(data)
        self._rx += data
        while True:
            if self._awaiting_body:
                cut = self._rx.find(CTRL_Z)
                if cut < 0:
                    break
                body = self._rx[:cut].decode("latin-1")
                self._rx = self._rx[cut + 1:]
                self._finish_body(body)
            else:
                cut = self._rx.find(b"\r")
                if cut < 0:
                    break
                line = self._rx[:cut].decode("latin-1").strip()
                self._rx = self._rx[cut + 1:]
                if line:
                    self._handle_command(line)
        return len(data)

    def read(self) -> bytes:
        out = bytes(self._out)
        self._out.clear()
        return out

    # -- command handling ------------------------------------------------

    def _emit(self, text: str) -> None:
        self._out += text.encode("latin-1")

    def _take_armed_error(self) -> bool:
        if self.pending_errors > 0:
            self.pending_errors -= 1
            self._emit("\r\nERROR\r\n")
            return True
        return False

    def _handle_command(self, cmd: str) -> None:
        self.transcript.append(("cmd", cmd))
        if self._take_armed_error():
            return
        if cmd == "AT" or cmd == "AT+CMGF=1" or _IPR_RE.match(cmd):
            self._emit("\r\nOK\r\n")
            return
        m = _CMGS_RE.match(cmd)
        if m:
            self._pending_dest = m.group(1)
            self._awaiting_body = True
            self._emit("\r\n> ")
            return
        m = _CMGR_RE.match(cmd)
        if m:
            self._answer_read(int(m.group(1)))
            return
        self._emit("\r\nERROR\r\n")

    def _finish_body(self, body: str) -> None:
        self._awaiting_body = False
        self.transcript.append(("body", body))
        if self._take_armed_error():
            return
        self._send_counter += 1
        self.deliveries.append((self._pending_dest, body))
        self._emit(f"\r\n+CMGS: {self._send_counter}\r\n\r\nOK\r\n")

    def _answer_read(self, slot: int) -> None:
        stored = self._inbox.pop(slot, None)
        if stored is None:
            self._emit("\r\nERROR\r\n")
            return
        sender, body = stored
        self._emit(f'\r\n+CMGR: "REC UNREAD","{sender}","","00/01/01,00:00:00+00"\r\n{body}\r\n\r\nOK\r\n')


def _ddmm(value: float, deg_digits: int) -> str:
    """Render |degrees| as NMEA ddmm.mmmm, carrying when the four-decimal
    minutes round up to 60."""
    deg = int(value)
    minutes = round((value - deg) * 60.0, 4)
    if minutes >= 60.0:
        deg += 1
        minutes = 0.0
    return f"{deg:0{deg_digits}d}{minutes:07.4f}"


def _clock_field(t_ms: int) -> str:
    s = t_ms // 1000
    return f"{s // 3600 % 24:02d}{s // 60 % 60:02d}{s % 60:02d}.00"


class VirtualGps:
    """NMEA text source with two feeds.

    Raw passthrough: push_raw() lines come out byte-exact at their time.
    Cadence mode: one sentence burst per second, void RMC until the
    first scheduled fix time passes, then a GGA+RMC pair of the latest
    scheduled position (receiver time-to-first-fix behavior).
    """

    def __init__(self, cadence: bool = False):
        self.cadence = cadence
        self._raw: deque[tuple[int, str]] = deque()
        self._schedule: deque[tuple[int, float, float]] = deque()
        self._position: tuple[float, float] | None = None
        self._next_beat_ms = 1000

    def push_raw(self, t_ms: int, line: str) -> None:
        self._raw.append((t_ms, line))

    def add_fix(self, t_ms: int, lat: float, lon: float) -> None:
        self.cadence = True
        self._schedule.append((t_ms, lat, lon))

    def poll(self, now_ms: int) -> list[str]:
        out = []
        while self._raw and self._raw[0][0] <= now_ms:
            out.append(self._raw.popleft()[1])
        while self.cadence and self._next_beat_ms <= now_ms:
            beat = self._next_beat_ms
            self._next_beat_ms += 1000
            while self._schedule and self._schedule[0][0] <= beat:
                _, lat, lon = self._schedule.popleft()
                self._position = (lat, lon)
            out.extend(self._beat_lines(beat))
        return out

    def _beat_lines(self, beat_ms: int) -> list[str]:
        t = _clock_field(beat_ms)
        if self._position is None:
            return [nmea.frame_sentence(f"GPRMC,{t},V,,,,,,,,,")]
        lat, lon = self._position
        lat_f = f"{_ddmm(abs(lat), 2)},{'S' if lat < 0 else 'N'}"
        lon_f = f"{_ddmm(abs(lon), 3)},{'W' if lon < 0 else 'E'}"
        return [
            nmea.frame_sentence(f"GPGGA,{t},{lat_f},{lon_f},1,06,0.9,100.0,M,0.0,M,,"),
            nmea.frame_sentence(f"GPRMC,{t},A,{lat_f},{lon_f},0.0,0.0,010100,,"),
        ]


class SensorBoard:
    """Input levels as the controller samples them; every channel holds
    its last scripted value."""

    def __init__(self):
        self.impact = 0
        self.panic = 0
        self.alcohol_raw = 0
        self.rain_wet = 0
        self.rain_intensity = 0
        self.temp_c = 20.0
        self.humidity_pct = 50.0

    def sample(self, t_ms: int) -> SensorFrame:
        return SensorFrame(
            t_ms=t_ms,
            impact=self.impact,
            panic=self.panic,
            alcohol_raw=self.alcohol_raw,
            rain_wet=self.rain_wet,
            rain_intensity=self.rain_intensity,
            temp_c=self.temp_c,
            humidity_pct=self.humidity_pct,
        )
