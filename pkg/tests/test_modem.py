"""AT codec, incremental decoder, send/receive exchanges.

The frozen transcript in data/transcript_sim900.txt is the shared oracle:
the encoder must produce its TX bytes, the virtual modem must answer its
RX bytes, and the decoder must turn the RX stream into the expected
events. One file, three implementations held to it.
"""

import random
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from smartcar.config import Config
from smartcar.modem import (
    CTRL_Z,
    AtEvent,
    EventKind,
    ModemCommand,
    ModemError,
    ModemSession,
    check_body,
    decode_stream,
    encode_command,
    fetch_inbound,
    send_sms,
)
from smartcar.sim.clock import SimClock
from smartcar.sim.devices import VirtualModem

TRANSCRIPT = Path(__file__).parent / "data" / "transcript_sim900.txt"
ALERT_BODY = (
    "ACCIDENT DETECTED. Location: 48.117300,11.516667 "
    "https://maps.google.com/?q=48.117300,11.516667"
)


def unescape(text: str) -> bytes:
    return text.encode("latin-1").decode("unicode_escape").encode("latin-1")


def load_transcript():
    entries = []
    for raw in TRANSCRIPT.read_text(encoding="utf-8").splitlines():
        if not raw or raw.startswith("#"):
            continue
        tag, _, payload = raw.partition(" ")
        entries.append((tag, payload))
    return entries


def fresh_session(clock=None):
    clock = clock or SimClock()
    modem = VirtualModem(clock)
    return modem, ModemSession(transport=modem, clock=clock)


class TestEncode:
    def test_frozen_wire_forms(self):
        assert encode_command(ModemCommand.attention()) == b"AT\r"
        assert encode_command(ModemCommand.set_text_mode()) == b"AT+CMGF=1\r"
        assert encode_command(ModemCommand.set_baud(9600)) == b"AT+IPR=9600\r"
        assert encode_command(ModemCommand.send_sms_header("+15550001")) == b'AT+CMGS="+15550001"\r'
        assert encode_command(ModemCommand.sms_body("HI")) == b"HI" + CTRL_Z
        assert encode_command(ModemCommand.read_sms(3)) == b"AT+CMGR=3\r"

    def test_ctrl_z_is_sub(self):
        assert CTRL_Z == b"\x1a"

    def test_body_length_cap(self):
        check_body("x" * 160)
        with pytest.raises(ModemError):
            check_body("x" * 161)

    def test_body_printable_only(self):
        with pytest.raises(ModemError):
            check_body("line\nbreak")
        with pytest.raises(ModemError):
            check_body("caf\xe9")


class TestGoldenTranscript:
    """Walk the frozen exchange three ways."""

    EXPECTED_EVENTS = [
        AtEvent(EventKind.OK),
        AtEvent(EventKind.OK),
        AtEvent(EventKind.OK),
        AtEvent(EventKind.PROMPT),
        AtEvent(EventKind.LINE, text="+CMGS: 1"),
        AtEvent(EventKind.OK),
        AtEvent(EventKind.SMS_ARRIVED, index=1),
        AtEvent(EventKind.INBOUND_SMS, sender="+15550100", body="STATUS"),
        AtEvent(EventKind.OK),
        AtEvent(EventKind.ERROR),
        AtEvent(EventKind.ERROR),
    ]

    # the TX lines, as the command objects that must produce them
    TX_COMMANDS = [
        ModemCommand.attention(),
        ModemCommand.set_baud(9600),
        ModemCommand.set_text_mode(),
        ModemCommand.send_sms_header("+15550001"),
        ModemCommand.sms_body(ALERT_BODY),
        ModemCommand.read_sms(1),
        None,  # GARBAGE: intentionally not encodable
        ModemCommand.read_sms(1),
    ]

    def test_encoder_produces_tx_bytes(self):
        tx_bytes = [unescape(p) for tag, p in load_transcript() if tag == "TX"]
        assert len(tx_bytes) == len(self.TX_COMMANDS)
        for raw, cmd in zip(tx_bytes, self.TX_COMMANDS):
            if cmd is not None:
                assert encode_command(cmd) == raw

    def test_virtual_modem_answers_rx_bytes(self):
        modem = VirtualModem(SimClock())
        for tag, payload in load_transcript():
            if tag == "TX":
                modem.write(unescape(payload))
            elif tag == "INJECT":
                sender, _, body = payload.partition("|")
                modem.inject_sms(sender, body)
            elif tag == "RX":
                assert modem.read() == unescape(payload)

    def rx_stream(self) -> bytes:
        return b"".join(unescape(p) for tag, p in load_transcript() if tag == "RX")

    def test_decoder_yields_expected_events(self):
        events, rest = decode_stream(self.rx_stream())
        assert rest == b""
        assert events == self.EXPECTED_EVENTS

    def test_decoder_invariant_under_chunking(self):
        stream = self.rx_stream()
        rng = random.Random(20250819)
        for _ in range(200):
            cuts = sorted(rng.randrange(len(stream) + 1) for _ in range(rng.randrange(8)))
            events, buf = [], b""
            for lo, hi in zip([0] + cuts, cuts + [len(stream)]):
                buf += stream[lo:hi]
                got, buf = decode_stream(buf)
                events.extend(got)
            got, buf = decode_stream(buf)
            events.extend(got)
            assert buf == b""
            assert events == self.EXPECTED_EVENTS


class TestDecodeStream:
    def test_partial_line_waits(self):
        events, rest = decode_stream(b"\r\nO")
        assert events == []
        events, rest = decode_stream(rest + b"K\r\n")
        assert events == [AtEvent(EventKind.OK)]
        assert rest == b""

    def test_bare_gt_waits_for_prompt_space(self):
        events, rest = decode_stream(b"\r\n>")
        assert events == []
        events, rest = decode_stream(rest + b" ")
        assert events == [AtEvent(EventKind.PROMPT)]

    def test_cmgr_header_held_until_body_complete(self):
        head = b'\r\n+CMGR: "REC UNREAD","+1555","","00/01/01,00:00:00+00"\r\nSTA'
        events, rest = decode_stream(head)
        assert events == []
        events, rest = decode_stream(rest + b"TUS\r\n\r\nOK\r\n")
        assert events == [
            AtEvent(EventKind.INBOUND_SMS, sender="+1555", body="STATUS"),
            AtEvent(EventKind.OK),
        ]

    def test_unrecognized_line_surfaces_as_line_event(self):
        events, _ = decode_stream(b"\r\n+CSQ: 18,0\r\n")
        assert events == [AtEvent(EventKind.LINE, text="+CSQ: 18,0")]

    @given(st.binary(max_size=96), st.integers(0, 95))
    def test_split_anywhere_decodes_identically(self, blob, cut):
        cut = min(cut, len(blob))
        whole, whole_rest = decode_stream(blob)
        first, buf = decode_stream(blob[:cut])
        second, split_rest = decode_stream(buf + blob[cut:])
        assert first + second == whole
        assert split_rest == whole_rest


class TestSendSms:
    def test_happy_path_single_attempt(self):
        clock = SimClock()
        modem, session = fresh_session(clock)
        outcome = send_sms(session, "+15550001", "HELLO", Config())
        assert outcome.delivered and outcome.attempts == 1
        assert outcome.failure_reason == ""
        assert modem.deliveries == [("+15550001", "HELLO")]
        assert clock.now_ms == 0  # synchronous peer, no waiting

    def test_protocol_order_mode_header_body(self):
        modem, session = fresh_session()
        send_sms(session, "+15550001", "HELLO", Config())
        assert modem.transcript == [
            ("cmd", "AT+CMGF=1"),
            ("cmd", 'AT+CMGS="+15550001"'),
            ("body", "HELLO"),
        ]

    def test_error_twice_then_delivered(self):
        clock = SimClock()
        modem, session = fresh_session(clock)
        modem.arm_error_once()
        modem.arm_error_once()
        outcome = send_sms(session, "+15550001", "HELLO", Config())
        assert outcome.delivered and outcome.attempts == 3
        assert clock.now_ms == 2 * Config().sms_retry_backoff_ms
        assert modem.deliveries == [("+15550001", "HELLO")]

    def test_silent_modem_exhausts_retries(self):
        clock = SimClock()
        modem, session = fresh_session(clock)
        modem.silence_for(10**6)
        cfg = Config()
        outcome = send_sms(session, "+15550001", "HELLO", cfg)
        assert not outcome.delivered
        assert outcome.attempts == cfg.sms_retry_max + 1
        assert outcome.failure_reason == "timeout"
        assert modem.deliveries == []
        # 4 attempts time out on the first stage; 3 backoffs in between
        expected = 4 * cfg.sms_ok_timeout_ms + 3 * cfg.sms_retry_backoff_ms
        assert clock.now_ms == expected

    def test_silence_mid_run_recovers(self):
        clock = SimClock()
        modem, session = fresh_session(clock)
        modem.silence_for(6000)  # first attempt times out, second one lands
        outcome = send_sms(session, "+15550001", "HELLO", Config())
        assert outcome.delivered and outcome.attempts == 2
        assert clock.now_ms == 7000  # 5000 timeout + 2000 backoff

    def test_attempt_count_tracks_armed_errors(self):
        cfg = Config()
        for armed in range(7):
            modem, session = fresh_session()
            for _ in range(armed):
                modem.arm_error_once()
            outcome = send_sms(session, "+1", "X", cfg)
            assert outcome.delivered == (armed <= cfg.sms_retry_max)
            assert outcome.attempts == min(armed + 1, cfg.sms_retry_max + 1)

    def test_closed_transport_short_circuits(self):
        modem, session = fresh_session()
        modem.closed = True
        outcome = send_sms(session, "+1", "X", Config())
        assert (outcome.delivered, outcome.attempts) == (False, 1)
        assert outcome.failure_reason == "transport closed"
        assert modem.transcript == []

    def test_oversize_body_rejected_before_wire(self):
        modem, session = fresh_session()
        with pytest.raises(ModemError):
            send_sms(session, "+1", "y" * 161, Config())
        assert modem.transcript == []

    def test_exact_160_goes_through(self):
        modem, session = fresh_session()
        outcome = send_sms(session, "+1", "z" * 160, Config())
        assert outcome.delivered
        assert modem.deliveries[0][1] == "z" * 160


class TestInbound:
    def test_fetch_round_trip(self):
        modem, session = fresh_session()
        modem.inject_sms("+15550100", "STATUS")
        events = session.poll()
        assert [e.kind for e in events] == [EventKind.SMS_ARRIVED]
        sms = fetch_inbound(session, events[0])
        assert (sms.sender, sms.body) == ("+15550100", "STATUS")

    def test_fetch_requires_arrival_event(self):
        _, session = fresh_session()
        with pytest.raises(ModemError):
            fetch_inbound(session, AtEvent(EventKind.OK))

    def test_slot_consumed_after_read(self):
        modem, session = fresh_session()
        modem.inject_sms("+1", "PING")
        (event,) = session.poll()
        fetch_inbound(session, event)
        with pytest.raises(ModemError):
            fetch_inbound(session, event)  # same slot again: modem says ERROR

    def test_read_does_not_stall_the_clock(self):
        clock = SimClock()
        modem, session = fresh_session(clock)
        modem.inject_sms("+1", "PING")
        (event,) = session.poll()
        fetch_inbound(session, event)
        assert clock.now_ms == 0  # trailing OK consumed without a timeout jump

    def test_notification_parks_during_send(self):
        modem, session = fresh_session()
        modem.inject_sms("+15550100", "LOC")  # arrives before the send starts
        outcome = send_sms(session, "+15550001", "HELLO", Config())
        assert outcome.delivered
        kinds = [e.kind for e in session.poll()]
        assert EventKind.SMS_ARRIVED in kinds
