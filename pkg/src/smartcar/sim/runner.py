"""Discrete-time executor: advances a fixed tick, feeds scripted inputs
through the virtual devices into the controller, interprets the actions
it emits, and accumulates the run report.

The loop is strictly single-threaded. Sending an SMS blocks inside the
tick and moves the clock (timeouts, retry backoff), exactly like
firmware busy-waiting on the modem; events falling due during the block
are delivered at the next tick.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field

from ..config import Config
from ..controller import ActionKind, SafetyController
from ..messages import coordinate_text
from ..modem import EventKind, ModemError, ModemSession, send_sms, fetch_inbound
from ..nmea import parse_sentence
from ..types import ScenarioError
from . import scenario as sc
from .clock import SimClock
from .devices import SensorBoard, VirtualGps, VirtualModem

log = logging.getLogger(__name__)

REPORT_HEADER = "smartcar-report v1"


@dataclass(frozen=True)
class LogRecord:
    tag: str  # "A" action, "S" send outcome, "M" delivered message
    t_ms: int
    text: str


@dataclass
class Counters:
    sentences_parsed: int = 0
    checksum_failures: int = 0
    sms_sent: int = 0
    sms_failed: int = 0
    sms_retries: int = 0

    def lines(self) -> list[str]:
        return [
            f"C sentences_parsed={self.sentences_parsed}",
            f"C checksum_failures={self.checksum_failures}",
            f"C sms_sent={self.sms_sent}",
            f"C sms_failed={self.sms_failed}",
            f"C sms_retries={self.sms_retries}",
        ]


@dataclass(frozen=True)
class SendRecord:
    t_ms: int
    destination: str
    body: str
    delivered: bool
    attempts: int
    reason: str


@dataclass
class SimReport:
    tick_ms: int
    until_ms: int
    records: list[LogRecord] = field(default_factory=list)
    outbound_sms: list[tuple[int, str, str]] = field(default_factory=list)
    sends: list[SendRecord] = field(default_factory=list)
    counters: Counters = field(default_factory=Counters)
    final_state: list[tuple[str, str]] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)

    def serialize(self) -> str:
        lines = [REPORT_HEADER, f"tick_ms={self.tick_ms}", f"until_ms={self.until_ms}"]
        lines.extend(f"{r.tag} t={r.t_ms} {r.text}" for r in self.records)
        lines.extend(self.counters.lines())
        lines.extend(f"F {key}={value}" for key, value in self.final_state)
        lines.extend(f"V {text}" for text in self.violations)
        return "\n".join(lines) + "\n"


class _Executor:
    def __init__(self, events: list[sc.ScenarioEvent], config: Config, until_ms: int):
        if events and until_ms < events[-1].t_ms:
            raise ScenarioError(
                f"until_ms={until_ms} ends before the last event at t={events[-1].t_ms}"
            )
        self.config = config
        self.events = deque(events)
        self.clock = SimClock()
        self.modem = VirtualModem(self.clock)
        self.gps_feed = VirtualGps()
        self.board = SensorBoard()
        self.session = ModemSession(
            transport=self.modem, clock=self.clock, ok_timeout_ms=config.sms_ok_timeout_ms
        )
        self.controller = SafetyController(config)
        self.report = SimReport(tick_ms=config.tick_ms, until_ms=until_ms)
        self.send_action_count = 0

    # -- bookkeeping -----------------------------------------------------

    def _record_action(self, t_ms: int, text: str) -> None:
        self.report.records.append(LogRecord("A", t_ms, text))

    def _record_send(self, dest: str, body: str, delivered: bool, attempts: int, reason: str) -> None:
        t = self.clock.now_ms
        self.report.sends.append(SendRecord(t, dest, body, delivered, attempts, reason))
        self.report.records.append(
            LogRecord(
                "S",
                t,
                f"delivered={'yes' if delivered else 'no'} attempts={attempts} "
                f"reason={reason or '-'} dest={dest} body={body}",
            )
        )
        self.report.counters.sms_retries += attempts - 1
        if delivered:
            self.report.counters.sms_sent += 1
            self.report.outbound_sms.append((t, dest, body))
            self.report.records.append(LogRecord("M", t, f"dest={dest} body={body}"))
        else:
            self.report.counters.sms_failed += 1

    # -- per-tick stages ---------------------------------------------------

    def _apply_event(self, ev: sc.ScenarioEvent) -> None:
        if isinstance(ev, sc.Impact):
            self.board.impact = ev.level
        elif isinstance(ev, sc.Panic):
            self.board.panic = ev.level
        elif isinstance(ev, sc.Alcohol):
            self.board.alcohol_raw = ev.counts
        elif isinstance(ev, sc.Rain):
            self.board.rain_wet = ev.wet
            self.board.rain_intensity = ev.intensity
        elif isinstance(ev, sc.Cabin):
            self.board.temp_c = ev.temp_c
            self.board.humidity_pct = ev.humidity_pct
        elif isinstance(ev, sc.GpsLine):
            self.gps_feed.push_raw(ev.t_ms, ev.text)
        elif isinstance(ev, sc.SmsIn):
            self.modem.inject_sms(ev.sender, ev.body)
        elif isinstance(ev, sc.ModemFault):
            if ev.mode == sc.ERROR_ONCE:
                self.modem.arm_error_once()
            else:
                self.modem.silence_for(ev.duration_ms)

    def _interpret(self, actions) -> None:
        for action in actions:
            t = self.clock.now_ms
            if action.kind is ActionKind.ASSERT_AIRBAG_LINE:
                self._record_action(t, "airbag-line asserted")
            elif action.kind is ActionKind.SEND_ALERT:
                alert = action.alert
                self._record_action(
                    t, f"alert kind={alert.kind.name} dest={alert.destination} body={alert.body}"
                )
                self.send_action_count += 1
                self._dispatch(alert.destination, alert.body)
            elif action.kind is ActionKind.SEND_REPLY:
                self._record_action(t, f"reply dest={action.dest} body={action.text}")
                self.send_action_count += 1
                self._dispatch(action.dest, action.text)
            elif action.kind is ActionKind.SET_WIPER:
                cmd = action.wiper
                self._record_action(
                    t, f"wiper mode={cmd.mode.name} angle={cmd.servo_angle_deg:.1f}"
                )
            elif action.kind is ActionKind.SET_ENGINE:
                state = "yes" if action.engine_enabled else "no"
                self._record_action(t, f"engine enabled={state}")
            else:
                self._record_action(t, f"note {action.text}")

    def _dispatch(self, dest: str, body: str) -> None:
        try:
            outcome = send_sms(self.session, dest, body, self.config)
        except ModemError as exc:
            self._record_send(dest, body, False, 1, f"rejected: {exc}")
            return
        self._record_send(dest, body, outcome.delivered, outcome.attempts, outcome.failure_reason)

    def _step_gps(self) -> None:
        for line in self.gps_feed.poll(self.clock.now_ms):
            sentence = parse_sentence(line)
            if sentence.checksum_ok:
                self.report.counters.sentences_parsed += 1
            else:
                self.report.counters.checksum_failures += 1
            self._interpret(self.controller.step(sentence, self.clock.now_ms))

    def _step_frame(self) -> None:
        frame = self.board.sample(self.clock.now_ms)
        self._interpret(self.controller.step(frame, self.clock.now_ms))

    def _step_inbound(self) -> None:
        for event in self.session.poll():
            if event.kind is not EventKind.SMS_ARRIVED:
                log.debug("ignoring unsolicited modem event: %r", event)
                continue
            try:
                sms = fetch_inbound(self.session, event)
            except ModemError as exc:
                self._record_action(self.clock.now_ms, f"note inbound-read-failed: {exc}")
                continue
            self._interpret(self.controller.step(sms, self.clock.now_ms))

    def _check_interlock(self) -> None:
        ema = self.controller.interlock.ema
        if ema is not None and ema >= self.config.alcohol_threshold and self.controller.engine_enabled:
            self.report.violations.append(
                f"t={self.clock.now_ms} interlock: engine enabled while ema={ema:.1f}"
                f" >= {self.config.alcohol_threshold}"
            )

    # -- audits ------------------------------------------------------------

    def _check_conservation(self) -> None:
        delivered = [(dest, body) for _, dest, body in self.report.outbound_sms]
        if delivered != self.modem.deliveries:
            self.report.violations.append(
                f"conservation: report lists {len(delivered)} deliveries,"
                f" modem recorded {len(self.modem.deliveries)}"
            )
        if self.send_action_count != len(self.report.sends):
            self.report.violations.append(
                f"conservation: {self.send_action_count} send actions,"
                f" {len(self.report.sends)} send records"
            )

    def _check_clock_order(self) -> None:
        last = 0
        for rec in self.report.records:
            if rec.t_ms < last:
                self.report.violations.append(
                    f"clock: record at t={rec.t_ms} after one at t={last}"
                )
                return
            last = rec.t_ms

    def _final_state(self) -> None:
        ema = self.controller.interlock.ema
        fix = self.controller.gps.last_fix
        self.report.final_state = [
            ("engine_enabled", "yes" if self.controller.engine_enabled else "no"),
            ("wiper_mode", self.controller.wiper.mode.name),
            ("alcohol_ema", "none" if ema is None else f"{ema:.3f}"),
            ("gps_fix", coordinate_text(fix.latitude, fix.longitude) if fix else "none"),
            ("pending_alerts", str(len(self.controller.pending_alerts))),
        ]

    def run(self) -> SimReport:
        while self.clock.now_ms <= self.report.until_ms:
            while self.events and self.events[0].t_ms <= self.clock.now_ms:
                self._apply_event(self.events.popleft())
            self._step_gps()
            self._step_frame()
            self._step_inbound()
            self._check_interlock()
            self.clock.advance(self.config.tick_ms)
        self._check_conservation()
        self._check_clock_order()
        self._final_state()
        return self.report


def run(scenario: list[sc.ScenarioEvent], config: Config, until_ms: int) -> SimReport:
    """Execute a loaded scenario to completion and return the report."""
    return _Executor(scenario, config, until_ms).run()
