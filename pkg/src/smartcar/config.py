"""Runtime configuration: thresholds, timing windows, alert routing.

Config files are UTF-8 ``key = value`` lines; ``#`` starts a comment line,
blank lines are ignored, LF and CRLF both accepted. Unknown keys are
permitted (and skipped) so one file can serve several firmware variants.
All thresholds are raw 10-bit ADC counts; all times are milliseconds.
"""

from dataclasses import dataclass, fields

from .types import ADC_MAX, ConfigError

_BOOL_WORDS = {"true": True, "1": True, "false": False, "0": False}


@dataclass(frozen=True)
class Config:
    alert_primary_number: str = "+15550001"
    alert_safety_number: str = "+15550002"
    alcohol_threshold: int = 450
    alcohol_release: int = 400
    impact_window_ms: int = 100
    impact_min_high: int = 5
    impact_refractory_ms: int = 60000
    panic_refractory_ms: int = 30000
    gps_stale_ms: int = 5000
    gps_wait_ms: int = 10000
    sms_retry_max: int = 3
    sms_retry_backoff_ms: int = 2000
    sms_ok_timeout_ms: int = 5000
    wiper_intermittent_max: int = 300
    wiper_low_max: int = 700
    tick_ms: int = 10
    # Interlock policy: False = inhibit starting only, True = also cut a
    # running engine. The simulation has no running-engine model, so both
    # settings drive the same enable line; the flag is carried for
    # deployments that do distinguish.
    alcohol_cutoff_while_running: bool = False

    def __post_init__(self):
        validate(self)


_DURATION_KEYS = (
    "impact_window_ms",
    "impact_refractory_ms",
    "panic_refractory_ms",
    "gps_stale_ms",
    "gps_wait_ms",
    "sms_retry_backoff_ms",
    "sms_ok_timeout_ms",
    "tick_ms",
)


def validate(cfg: Config) -> None:
    """Check cross-field invariants, raising ConfigError naming the keys."""
    if cfg.alcohol_release >= cfg.alcohol_threshold:
        raise ConfigError(
            "alcohol_release must be < alcohol_threshold "
            f"(got {cfg.alcohol_release} >= {cfg.alcohol_threshold})"
        )
    if not cfg.wiper_intermittent_max < cfg.wiper_low_max < ADC_MAX + 1:
        raise ConfigError(
            "require wiper_intermittent_max < wiper_low_max < 1024 "
            f"(got {cfg.wiper_intermittent_max}, {cfg.wiper_low_max})"
        )
    for key in _DURATION_KEYS:
        if getattr(cfg, key) <= 0:
            raise ConfigError(f"{key} must be > 0 (got {getattr(cfg, key)})")


def load_config(source: str) -> Config:
    """Parse ``key = value`` text into a Config, defaulting missing keys.

    Raises ConfigError with the 1-based line number for a line that has
    content but no '=', or for a value that does not parse as the field's
    type; cross-field invariant violations raise from Config construction.
    """
    field_types = {f.name: f.type for f in fields(Config)}
    overrides: dict[str, object] = {}
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in field_types:
            continue  # unknown keys permitted
        kind = field_types[key]
        try:
            if kind in (int, "int"):
                overrides[key] = int(value)
            elif kind in (bool, "bool"):
                overrides[key] = _parse_bool(value)
            else:
                overrides[key] = value
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    return Config(**overrides)


def load_config_file(path: str) -> Config:
    with open(path, encoding="utf-8") as fh:
        return load_config(fh.read())


def dump_config(cfg: Config) -> str:
    """Render a Config back to key/value text; load_config round-trips it."""
    lines = []
    for f in fields(Config):
        value = getattr(cfg, f.name)
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


def _parse_bool(text: str) -> bool:
    try:
        return _BOOL_WORDS[text.lower()]
    except KeyError:
        raise ValueError(f"not a boolean: {text!r}") from None
