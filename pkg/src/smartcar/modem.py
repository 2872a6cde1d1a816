"""AT command codec and text-mode SMS exchange for a SIM900-class modem.

Wire shape: commands are ASCII terminated with '\\r'; responses arrive
framed "\\r\\n...\\r\\n"; the SMS body prompt is "\\r\\n> "; the body itself
is terminated by CTRL-Z (0x1A). Text mode only (CMGF=1), so bodies are
plain printable ASCII, one character per septet, 160 max.

decode_stream is a pure function over an accumulated buffer so the
transport may split responses at any byte boundary: keep the returned
remainder, append new bytes, call again.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .config import Config
from .types import SMS_MAX_LEN, InboundSms, ModemError

CTRL_Z = b"\x1a"

_CMTI_RE = re.compile(r'^\+CMTI:\s*"[^"]*"\s*,\s*(\d+)\s*$')
_CMGR_SENDER_RE = re.compile(r'^\+CMGR:\s*"[^"]*"\s*,\s*"([^"]*)"')


class CommandKind(Enum):
    ATTENTION = "attention"
    SET_TEXT_MODE = "set_text_mode"
    SET_BAUD = "set_baud"
    SEND_SMS_HEADER = "send_sms_header"
    SMS_BODY = "sms_body"
    READ_SMS = "read_sms"


@dataclass(frozen=True)
class ModemCommand:
    kind: CommandKind
    text: str = ""  # destination, body, index or rate depending on kind

    @classmethod
    def attention(cls):
        return cls(CommandKind.ATTENTION)

    @classmethod
    def set_text_mode(cls):
        return cls(CommandKind.SET_TEXT_MODE)

    @classmethod
    def set_baud(cls, rate: int):
        return cls(CommandKind.SET_BAUD, str(rate))

    @classmethod
    def send_sms_header(cls, dest: str):
        return cls(CommandKind.SEND_SMS_HEADER, dest)

    @classmethod
    def sms_body(cls, body: str):
        return cls(CommandKind.SMS_BODY, body)

    @classmethod
    def read_sms(cls, index: int):
        return cls(CommandKind.READ_SMS, str(index))


class EventKind(Enum):
    OK = "ok"
    ERROR = "error"
    PROMPT = "prompt"
    SMS_ARRIVED = "sms_arrived"
    INBOUND_SMS = "inbound_sms"
    LINE = "line"


@dataclass(frozen=True)
class AtEvent:
    kind: EventKind
    index: int = 0  # SMS_ARRIVED storage slot
    sender: str = ""  # INBOUND_SMS
    body: str = ""  # INBOUND_SMS
    text: str = ""  # LINE


_OK = AtEvent(EventKind.OK)
_ERROR = AtEvent(EventKind.ERROR)
_PROMPT = AtEvent(EventKind.PROMPT)


@dataclass(frozen=True)
class SendOutcome:
    delivered: bool
    attempts: int
    failure_reason: str = ""


def check_body(body: str) -> None:
    """Reject bodies the text-mode encoder cannot carry: no truncation here."""
    if len(body) > SMS_MAX_LEN:
        raise ModemError(f"SMS body exceeds {SMS_MAX_LEN} chars ({len(body)})")
    for ch in body:
        if not 0x20 <= ord(ch) <= 0x7E:
            raise ModemError(f"SMS body contains non-printable character {ch!r}")


def encode_command(cmd: ModemCommand) -> bytes:
    if cmd.kind is CommandKind.ATTENTION:
        return b"AT\r"
    if cmd.kind is CommandKind.SET_TEXT_MODE:
        return b"AT+CMGF=1\r"
    if cmd.kind is CommandKind.SET_BAUD:
        return f"AT+IPR={cmd.text}\r".encode("ascii")
    if cmd.kind is CommandKind.SEND_SMS_HEADER:
        return f'AT+CMGS="{cmd.text}"\r'.encode("ascii")
    if cmd.kind is CommandKind.SMS_BODY:
        check_body(cmd.text)
        return cmd.text.encode("ascii") + CTRL_Z
    if cmd.kind is CommandKind.READ_SMS:
        return f"AT+CMGR={cmd.text}\r".encode("ascii")
    raise ModemError(f"unencodable command: {cmd}")


def decode_stream(buffer: bytes) -> tuple[list[AtEvent], bytes]:
    """Decode as many complete events as the buffer holds.

    Returns the events plus the unconsumed remainder. A "+CMGR:" header is
    not consumed until its body line is complete, so chunk boundaries never
    change the decoded event sequence.
    """
    events: list[AtEvent] = []
    buf = buffer
    while True:
        start = 0
        while start < len(buf) and buf[start] in (0x0D, 0x0A):
            start += 1
        buf = buf[start:]
        if not buf:
            return events, b""
        if buf[:1] == b">":
            if len(buf) < 2:
                return events, buf  # may still become the prompt
            if buf[1:2] == b" ":
                events.append(_PROMPT)
                buf = buf[2:]
                continue
            # a line that merely starts with '>': fall through to line scan
        end = buf.find(b"\r\n")
        if end < 0:
            return events, buf
        text = buf[:end].decode("latin-1")
        rest = buf[end + 2 :]
        if text == "OK":
            events.append(_OK)
        elif text == "ERROR":
            events.append(_ERROR)
        elif (m := _CMTI_RE.match(text)) is not None:
            events.append(AtEvent(EventKind.SMS_ARRIVED, index=int(m.group(1))))
        elif text.startswith("+CMGR:"):
            body_end = rest.find(b"\r\n")
            if body_end < 0:
                return events, buf  # wait for the body line
            sender_match = _CMGR_SENDER_RE.match(text)
            events.append(
                AtEvent(
                    EventKind.INBOUND_SMS,
                    sender=sender_match.group(1) if sender_match else "",
                    body=rest[:body_end].decode("latin-1"),
                )
            )
            rest = rest[body_end + 2 :]
        else:
            events.append(AtEvent(EventKind.LINE, text=text))
        buf = rest


@dataclass
class ModemSession:
    """One owner of one byte transport, with incremental decode state.

    Blocking exchanges (send_sms, fetch_inbound) run on the session; any
    event decoded that the exchange is not waiting for lands in
    ``unsolicited`` for the controller to drain later.
    """

    transport: object  # needs write(bytes), read() -> bytes, closed: bool
    clock: object  # needs now_ms: int, advance(ms)
    ok_timeout_ms: int = 5000
    _buf: bytes = b""
    unsolicited: list[AtEvent] = field(default_factory=list)

    def _pump(self) -> list[AtEvent]:
        data = self.transport.read()
        if data:
            self._buf += data
        events, self._buf = decode_stream(self._buf)
        return events

    def poll(self) -> list[AtEvent]:
        """Drain everything pending outside an exchange."""
        self.unsolicited.extend(self._pump())
        out = self.unsolicited
        self.unsolicited = []
        return out

    def send(self, cmd: ModemCommand) -> None:
        self.transport.write(encode_command(cmd))

    def await_event(self, kinds: set[EventKind], timeout_ms: int) -> AtEvent | None:
        """Wait for one of ``kinds``, leaving other events parked.

        Matches oldest-first from the parked queue so a response decoded
        in the same pump as an earlier one is not lost. The virtual
        transport answers synchronously or not at all, so an empty pump
        means nothing more will arrive without time passing; the wait
        jumps the simulation clock straight to the deadline.
        """
        deadline = self.clock.now_ms + timeout_ms
        while True:
            for i, ev in enumerate(self.unsolicited):
                if ev.kind in kinds:
                    del self.unsolicited[i]
                    return ev
            fresh = self._pump()
            if fresh:
                self.unsolicited.extend(fresh)
                continue
            if self.clock.now_ms >= deadline:
                return None
            self.clock.advance(deadline - self.clock.now_ms)


def send_sms(session: ModemSession, dest: str, body: str, config: Config, clock=None) -> SendOutcome:
    """Run the text-mode send sequence with retry/backoff.

    CMGF=1 (await OK), CMGS (await prompt), body+CTRL-Z (await OK), each
    stage bounded by sms_ok_timeout_ms. ERROR or a timeout at any stage
    restarts the whole sequence after sms_retry_backoff_ms, at most
    sms_retry_max retries.
    """
    check_body(body)
    clock = clock if clock is not None else session.clock
    if getattr(session.transport, "closed", False):
        return SendOutcome(delivered=False, attempts=1, failure_reason="transport closed")
    max_attempts = config.sms_retry_max + 1
    reason = "unknown"
    for attempt in range(1, max_attempts + 1):
        reason = _attempt_send(session, dest, body, config.sms_ok_timeout_ms)
        if reason == "":
            return SendOutcome(delivered=True, attempts=attempt)
        if attempt < max_attempts:
            clock.advance(config.sms_retry_backoff_ms)
    return SendOutcome(delivered=False, attempts=max_attempts, failure_reason=reason)


def _attempt_send(session: ModemSession, dest: str, body: str, timeout_ms: int) -> str:
    """One pass of the send sequence; empty string on success, else reason."""
    stages = (
        (ModemCommand.set_text_mode(), EventKind.OK),
        (ModemCommand.send_sms_header(dest), EventKind.PROMPT),
        (ModemCommand.sms_body(body), EventKind.OK),
    )
    for cmd, want in stages:
        session.send(cmd)
        ev = session.await_event({want, EventKind.ERROR}, timeout_ms)
        if ev is None:
            return "timeout"
        if ev.kind is EventKind.ERROR:
            return "error"
    return ""


def fetch_inbound(session: ModemSession, event: AtEvent) -> InboundSms:
    """Read and consume the stored message a +CMTI notification points at."""
    if event.kind is not EventKind.SMS_ARRIVED:
        raise ModemError(f"fetch_inbound needs an SMS_ARRIVED event, got {event.kind}")
    session.send(ModemCommand.read_sms(event.index))
    ev = session.await_event({EventKind.INBOUND_SMS, EventKind.ERROR}, session.ok_timeout_ms)
    if ev is None or ev.kind is EventKind.ERROR:
        raise ModemError(f"failed to fetch stored SMS at index {event.index}")
    # drain the trailing OK of the +CMGR response
    session.await_event({EventKind.OK, EventKind.ERROR}, session.ok_timeout_ms)
    return InboundSms(sender=ev.sender, body=ev.body)
