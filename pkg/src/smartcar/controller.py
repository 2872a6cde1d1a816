"""Deterministic reactive core: impact debounce and airbag line, panic
latch, alcohol interlock, rain-driven wiper, remote-query dispatch.

The controller is a pure state machine over simulation time: it consumes
timestamped inputs (sensor frames, NMEA sentences, inbound texts) and
emits Action values. It performs no I/O itself (the harness interprets
the actions), so replaying an input transcript reproduces the action
transcript exactly.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import IntEnum, Enum

from .config import Config
from .messages import format_alert, format_reply, parse_query
from .nmea import GpsState, NmeaSentence, update_fix
from .types import AlertKind, AlertMessage, InboundSms, SensorFrame


class WiperMode(IntEnum):
    # ordering matters: more water never selects a slower mode
    OFF = 0
    INTERMITTENT = 1
    LOW = 2
    HIGH = 3


SERVO_MAX_DEG = 170.0

# full cycle length and the sweep portion at its start, ms; the
# remainder of an intermittent cycle rests at 0 degrees
WIPER_PERIOD_MS = {WiperMode.HIGH: 1000, WiperMode.LOW: 2000, WiperMode.INTERMITTENT: 4000}
WIPER_ACTIVE_MS = {WiperMode.HIGH: 1000, WiperMode.LOW: 2000, WiperMode.INTERMITTENT: 2000}


@dataclass(frozen=True)
class WiperCommand:
    mode: WiperMode
    servo_angle_deg: float

    def __post_init__(self):
        if self.mode is WiperMode.OFF and self.servo_angle_deg != 0.0:
            raise ValueError("wiper Off requires servo angle 0")
        if not 0.0 <= self.servo_angle_deg <= SERVO_MAX_DEG:
            raise ValueError(f"servo angle out of range: {self.servo_angle_deg}")


class ActionKind(Enum):
    ASSERT_AIRBAG_LINE = "assert_airbag_line"
    SEND_ALERT = "send_alert"
    SEND_REPLY = "send_reply"
    SET_WIPER = "set_wiper"
    SET_ENGINE = "set_engine"
    LOG = "log"


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    alert: AlertMessage | None = None
    dest: str = ""
    text: str = ""
    wiper: WiperCommand | None = None
    engine_enabled: bool = False


def assert_airbag_line() -> Action:
    return Action(ActionKind.ASSERT_AIRBAG_LINE)


def send_alert(alert: AlertMessage) -> Action:
    return Action(ActionKind.SEND_ALERT, alert=alert)


def send_reply(dest: str, text: str) -> Action:
    return Action(ActionKind.SEND_REPLY, dest=dest, text=text)


def set_wiper(cmd: WiperCommand) -> Action:
    return Action(ActionKind.SET_WIPER, wiper=cmd)


def set_engine(enabled: bool) -> Action:
    return Action(ActionKind.SET_ENGINE, engine_enabled=enabled)


def log_action(text: str) -> Action:
    return Action(ActionKind.LOG, text=text)


def wiper_mode(rain_wet: int, rain_intensity: int, config: Config) -> WiperMode:
    """Digital line gates wiping entirely; the analog level picks the speed."""
    if not rain_wet:
        return WiperMode.OFF
    if rain_intensity <= config.wiper_intermittent_max:
        return WiperMode.INTERMITTENT
    if rain_intensity <= config.wiper_low_max:
        return WiperMode.LOW
    return WiperMode.HIGH


def servo_angle(mode: WiperMode, phase_ms: int) -> float:
    """Triangle sweep 0 -> 170 -> 0 over the mode's active window.

    phase_ms is time since the mode was entered; it wraps at the full
    period. Intermittent cycles rest at 0 for their second half.
    """
    if mode is WiperMode.OFF:
        return 0.0
    phase = phase_ms % WIPER_PERIOD_MS[mode]
    active = WIPER_ACTIVE_MS[mode]
    if phase >= active:
        return 0.0
    half = active / 2.0
    if phase <= half:
        return SERVO_MAX_DEG * (phase / half)
    return SERVO_MAX_DEG * ((active - phase) / half)


class ImpactDebouncer:
    """Count-in-window debounce for the bouncy impact line.

    Triggers when at least ``min_high`` high samples fall inside the
    trailing half-open window (now - window_ms, now], then latches for
    ``refractory_ms``. A lone spike never deploys anything.
    """

    def __init__(self, window_ms: int, min_high: int, refractory_ms: int):
        self.window_ms = window_ms
        self.min_high = min_high
        self.refractory_ms = refractory_ms
        self.latch_until_ms = 0
        self._highs: deque[int] = deque()  # timestamps of recent high samples

    def update(self, now_ms: int, level: int) -> bool:
        if level:
            self._highs.append(now_ms)
        while self._highs and now_ms - self._highs[0] >= self.window_ms:
            self._highs.popleft()
        if len(self._highs) >= self.min_high and now_ms >= self.latch_until_ms:
            self.latch_until_ms = now_ms + self.refractory_ms
            return True
        return False


class AlcoholInterlock:
    """EMA-smoothed hysteresis gate on the raw alcohol channel.

    The engine-enable line drops when the smoothed value reaches the
    engage threshold and returns only below the release threshold; one
    alert per engagement.
    """

    EMA_ALPHA = 0.2

    def __init__(self, threshold: int, release: int):
        self.threshold = threshold
        self.release = release
        self.ema: float | None = None
        self.engine_enabled = True
        self.alert_sent_this_engagement = False

    def update(self, raw: int) -> tuple[bool, bool]:
        """Feed one sample; returns (engine_line_changed, alert_due)."""
        self.ema = raw if self.ema is None else self.EMA_ALPHA * raw + (1 - self.EMA_ALPHA) * self.ema
        if self.engine_enabled and self.ema >= self.threshold:
            self.engine_enabled = False
            alert_due = not self.alert_sent_this_engagement
            self.alert_sent_this_engagement = True
            return True, alert_due
        if not self.engine_enabled and self.ema < self.release:
            self.engine_enabled = True
            self.alert_sent_this_engagement = False
            return True, False
        return False, False


@dataclass
class _PendingAlert:
    kind: AlertKind
    deadline_ms: int


class SafetyController:
    """Owns the controller state; step() is the only way time moves."""

    def __init__(self, config: Config):
        self.config = config
        self.gps = GpsState()
        self.impact = ImpactDebouncer(
            config.impact_window_ms, config.impact_min_high, config.impact_refractory_ms
        )
        self.interlock = AlcoholInterlock(config.alcohol_threshold, config.alcohol_release)
        self.panic_latch_until_ms = 0
        self._panic_prev = 0
        self.wiper = WiperCommand(WiperMode.OFF, 0.0)
        self._wiper_mode_since_ms = 0
        self.last_frame: SensorFrame | None = None
        self.pending_alerts: deque[_PendingAlert] = deque()

    @property
    def engine_enabled(self) -> bool:
        return self.interlock.engine_enabled

    @property
    def alcohol_ema(self) -> float | None:
        return self.interlock.ema

    def step(self, event, now_ms: int) -> list[Action]:
        """Route one input; returns the actions it caused, in fixed order."""
        actions: list[Action] = []
        if isinstance(event, NmeaSentence):
            self.gps = update_fix(self.gps, event, now_ms)
        elif isinstance(event, SensorFrame):
            self.last_frame = event
            self._step_impact(event.impact, now_ms, actions)
            self._step_panic(event.panic, now_ms, actions)
            self._step_alcohol(event.alcohol_raw, now_ms, actions)
            self._step_wiper(event.rain_wet, event.rain_intensity, now_ms, actions)
        elif isinstance(event, InboundSms):
            self._step_sms(event, now_ms, actions)
        else:
            actions.append(log_action(f"unhandled input: {event!r}"))
        self._drain_pending(now_ms, actions)
        return actions

    # -- sub-operations -------------------------------------------------

    def _step_impact(self, level: int, now_ms: int, actions: list[Action]) -> None:
        if self.impact.update(now_ms, level):
            self._on_accident(now_ms, actions)

    def _on_accident(self, now_ms: int, actions: list[Action]) -> None:
        # safety-critical line first; the SMS can wait for a fix
        actions.append(assert_airbag_line())
        self._request_alert(AlertKind.ACCIDENT, now_ms, actions)

    def _step_panic(self, level: int, now_ms: int, actions: list[Action]) -> None:
        rising = level == 1 and self._panic_prev == 0
        self._panic_prev = level
        if rising and now_ms >= self.panic_latch_until_ms:
            self.panic_latch_until_ms = now_ms + self.config.panic_refractory_ms
            self._request_alert(AlertKind.PANIC, now_ms, actions)

    def _step_alcohol(self, raw: int, now_ms: int, actions: list[Action]) -> None:
        changed, alert_due = self.interlock.update(raw)
        if changed:
            actions.append(set_engine(self.interlock.engine_enabled))
        if alert_due:
            self._request_alert(AlertKind.ALCOHOL, now_ms, actions)

    def _step_wiper(self, wet: int, intensity: int, now_ms: int, actions: list[Action]) -> None:
        mode = wiper_mode(wet, intensity, self.config)
        if mode is not self.wiper.mode:
            self._wiper_mode_since_ms = now_ms
        command = WiperCommand(mode, servo_angle(mode, now_ms - self._wiper_mode_since_ms))
        if command != self.wiper:
            self.wiper = command
            actions.append(set_wiper(command))

    def _step_sms(self, sms: InboundSms, now_ms: int, actions: list[Action]) -> None:
        frame = self.last_frame if self.last_frame is not None else SensorFrame(t_ms=now_ms)
        reply = format_reply(
            parse_query(sms.body), frame, self.gps, self.config, self.engine_enabled
        )
        actions.append(send_reply(sms.sender, reply))

    # -- alert release --------------------------------------------------

    def _request_alert(self, kind: AlertKind, now_ms: int, actions: list[Action]) -> None:
        """Emit now if a fresh fix exists, else park until one arrives
        or gps_wait_ms runs out."""
        if self.gps.fresh(now_ms, self.config.gps_stale_ms):
            actions.append(send_alert(format_alert(kind, self.gps, self.config, now_ms)))
        else:
            self.pending_alerts.append(_PendingAlert(kind, now_ms + self.config.gps_wait_ms))

    def _drain_pending(self, now_ms: int, actions: list[Action]) -> None:
        while self.pending_alerts:
            head = self.pending_alerts[0]
            if self.gps.fresh(now_ms, self.config.gps_stale_ms) or now_ms >= head.deadline_ms:
                self.pending_alerts.popleft()
                actions.append(send_alert(format_alert(head.kind, self.gps, self.config, now_ms)))
            else:
                break
