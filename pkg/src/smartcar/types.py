"""Shared value types for the telematics core.

Everything here is an immutable value: safe to copy between contexts,
hashable where it matters, validated at construction. Time is simulation
milliseconds supplied by the harness; nothing in this package reads a
wall clock.
"""

from dataclasses import dataclass
from enum import Enum

ADC_MAX = 1023  # 10-bit analog inputs
SMS_MAX_LEN = 160  # GSM-7 single-message budget, 1 char = 1 septet


class AlertKind(Enum):
    ACCIDENT = "Accident"
    PANIC = "Panic"
    ALCOHOL = "Alcohol"


@dataclass(frozen=True)
class GeoFix:
    """Latest decoded GPS position.

    latitude/longitude are decimal degrees; timestamp_ms is the simulation
    time at decode; satellites is 0 when the accepted sentence carried no
    count and none is known from an earlier fix.
    """

    latitude: float
    longitude: float
    timestamp_ms: int
    valid: bool
    satellites: int = 0

    def __post_init__(self):
        if self.valid:
            if not -90.0 <= self.latitude <= 90.0:
                raise ValueError(f"latitude out of range: {self.latitude}")
            if not -180.0 <= self.longitude <= 180.0:
                raise ValueError(f"longitude out of range: {self.longitude}")
        if self.satellites < 0:
            raise ValueError(f"satellites must be >= 0, got {self.satellites}")


@dataclass(frozen=True)
class SensorFrame:
    """One sampling instant of every virtual sensor channel."""

    t_ms: int
    impact: int = 0
    panic: int = 0
    alcohol_raw: int = 0
    rain_wet: int = 0
    rain_intensity: int = 0
    temp_c: float = 20.0
    humidity_pct: float = 50.0

    def __post_init__(self):
        for name in ("impact", "panic", "rain_wet"):
            if getattr(self, name) not in (0, 1):
                raise ValueError(f"{name} must be logic 0/1, got {getattr(self, name)}")
        for name in ("alcohol_raw", "rain_intensity"):
            value = getattr(self, name)
            if not 0 <= value <= ADC_MAX:
                raise ValueError(f"{name} must be within 0..{ADC_MAX}, got {value}")
        if not 0.0 <= self.humidity_pct <= 100.0:
            raise ValueError(f"humidity_pct must be within 0..100, got {self.humidity_pct}")


@dataclass(frozen=True)
class AlertMessage:
    """Outbound alert SMS: kind, destination number, rendered body."""

    kind: AlertKind
    destination: str
    body: str

    def __post_init__(self):
        if len(self.body) > SMS_MAX_LEN:
            raise ValueError(f"alert body exceeds {SMS_MAX_LEN} chars ({len(self.body)})")


@dataclass(frozen=True)
class InboundSms:
    """A text message received by the modem, after fetch and decode."""

    sender: str
    body: str


class ConfigError(ValueError):
    """Raised for malformed or invariant-violating configuration text."""


class ScenarioError(ValueError):
    """Raised for malformed scenario script lines."""


class ModemError(RuntimeError):
    """Raised for modem protocol misuse (oversize body, dead transport, failed fetch)."""
