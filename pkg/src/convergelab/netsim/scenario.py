"""Scenario files: line-oriented ``section.key = value`` text.

Every key has a declared type and default; unknown keys, bad values and
duplicates are errors. ``#`` starts a comment.
"""

from __future__ import annotations

import importlib.resources
from types import SimpleNamespace

from convergelab.crypto import ec


class InvalidScenario(ValueError):
    pass


def _hexint(text: str) -> int:
    return int(text, 0)


def _csv(text: str) -> tuple[str, ...]:
    items = tuple(s.strip() for s in text.split(",") if s.strip())
    if not items:
        raise ValueError("empty list")
    return items


P256_TEXT = {
    "p": hex(ec.P256.p),
    "a": hex(ec.P256.a),
    "b": hex(ec.P256.b),
    "gx": hex(ec.P256.gx),
    "gy": hex(ec.P256.gy),
    "n": hex(ec.P256.n),
}

# (section, key): (parser, default as text)
SCHEMA: dict[tuple[str, str], tuple] = {
    ("curve", "name"): (str, "P-256"),
    **{("curve", k): (_hexint, v) for k, v in P256_TEXT.items()},
    ("topology", "coupling"): (str, "hybrid"),
    ("topology", "wlan_stations"): (int, "10"),
    ("topology", "umts_stations"): (int, "10"),
    ("links", "wlan_bps"): (float, "11e6"),
    ("links", "wlan_delay_s"): (float, "0.001"),
    ("links", "wlan_queue_bytes"): (int, "500000"),
    ("links", "wlan_slot_s"): (float, "20e-6"),
    ("links", "wlan_difs_s"): (float, "50e-6"),
    ("links", "wlan_cw_min"): (int, "31"),
    ("links", "wlan_cw_max"): (int, "1023"),
    ("links", "wlan_max_busy"): (float, "0.95"),
    ("links", "umts_bps"): (float, "2e6"),
    ("links", "umts_delay_s"): (float, "0.005"),
    ("links", "umts_queue_bytes"): (int, "250000"),
    ("links", "core_bps"): (float, "100e6"),
    ("links", "core_delay_s"): (float, "0.002"),
    ("links", "core_queue_bytes"): (int, "1000000"),
    ("links", "sgsn_bps"): (float, "100e6"),
    ("links", "sgsn_queue_bytes"): (int, "1000000"),
    ("traffic", "start_s"): (float, "5"),
    ("traffic", "mix"): (_csv, "ftp,http,mm"),
    ("traffic", "ftp_request_bytes"): (int, "100"),
    ("traffic", "ftp_file_bytes_mean"): (float, "50000"),
    ("traffic", "ftp_think_s_mean"): (float, "30"),
    ("traffic", "http_request_bytes"): (int, "350"),
    ("traffic", "http_page_bytes_mean"): (float, "10000"),
    ("traffic", "http_objects_max"): (int, "5"),
    ("traffic", "http_object_bytes_mean"): (float, "5000"),
    ("traffic", "http_think_s_mean"): (float, "15"),
    ("traffic", "mm_bitrate_bps"): (float, "64000"),
    ("traffic", "mm_packet_bytes"): (int, "800"),
    ("traffic", "mm_on_s_mean"): (float, "10"),
    ("traffic", "mm_off_s_mean"): (float, "5"),
    ("traffic", "billing_record_bytes"): (int, "500"),
    ("traffic", "billing_period_s"): (float, "60"),
    ("auth", "protocol"): (str, "ecdh-aka"),
    ("auth", "wlan_access"): (str, "eap"),
    ("auth", "reauth_period_s"): (float, "300"),
    ("auth", "p_sync"): (float, "0.05"),
    ("auth", "av_batch"): (int, "5"),
    ("auth", "frame_overhead_bytes"): (int, "40"),
    ("auth", "umts_message_bytes"): (int, "120"),
    ("auth", "epoch_s"): (float, "0"),
    ("sim", "seed"): (int, "1"),
    ("sim", "duration_s"): (float, "600"),
    ("sim", "sample_period_s"): (float, "1"),
}

SECTIONS = ("curve", "topology", "links", "traffic", "auth", "sim")
COUPLINGS = ("loose", "tight", "hybrid")
PROTOCOLS = ("aka", "ecdh-aka")
APPS = ("ftp", "http", "mm")


class Scenario:
    def __init__(self, values: dict[tuple[str, str], object], raw: dict[tuple[str, str], str]) -> None:
        self._values = values
        self._raw = raw
        for section in SECTIONS:
            ns = SimpleNamespace(**{k: v for (s, k), v in values.items() if s == section})
            setattr(self, section, ns)

    def get(self, section: str, key: str):
        return self._values[(section, key)]

    def with_overrides(self, overrides: dict[str, str]) -> "Scenario":
        raw = dict(self._raw)
        for dotted, text in overrides.items():
            raw[_split_key(dotted)] = str(text)
        return _build(raw)

    def resolved(self) -> dict[str, str]:
        return {f"{s}.{k}": self._raw[(s, k)] for (s, k) in SCHEMA}

    def to_text(self) -> str:
        return "".join(f"{key} = {val}\n" for key, val in self.resolved().items())

    def curve_params(self) -> ec.CurveParams:
        c = self.curve
        try:
            return ec.CurveParams(p=c.p, a=c.a % c.p, b=c.b, gx=c.gx, gy=c.gy, n=c.n, name=c.name)
        except ValueError as exc:
            raise InvalidScenario(f"curve: {exc}") from None

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Scenario) and self.resolved() == other.resolved()


def _split_key(dotted: str) -> tuple[str, str]:
    section, _, key = dotted.strip().partition(".")
    if (section, key) not in SCHEMA:
        raise InvalidScenario(f"unknown key {dotted.strip()!r}")
    return section, key


def _validate(s: Scenario) -> None:
    t, a, sim, lk = s.topology, s.auth, s.sim, s.links
    if t.coupling not in COUPLINGS:
        raise InvalidScenario(f"topology.coupling must be one of {COUPLINGS}")
    if a.protocol not in PROTOCOLS:
        raise InvalidScenario(f"auth.protocol must be one of {PROTOCOLS}")
    if a.wlan_access not in ("eap", "password"):
        raise InvalidScenario("auth.wlan_access must be eap or password")
    if t.wlan_stations < 0 or t.umts_stations < 0 or t.wlan_stations + t.umts_stations == 0:
        raise InvalidScenario("workstation counts must be non-negative and not both zero")
    if not 0.0 <= a.p_sync <= 1.0:
        raise InvalidScenario("auth.p_sync must be in [0, 1]")
    if a.av_batch < 1 or a.reauth_period_s <= 0:
        raise InvalidScenario("auth.av_batch and auth.reauth_period_s must be positive")
    if sim.duration_s < 0 or sim.sample_period_s <= 0:
        raise InvalidScenario("sim.duration_s >= 0 and sim.sample_period_s > 0 required")
    for k in ("wlan_bps", "umts_bps", "core_bps", "sgsn_bps"):
        if getattr(lk, k) <= 0:
            raise InvalidScenario(f"links.{k} must be positive")
    if not 0 < lk.wlan_cw_min <= lk.wlan_cw_max or not 0 <= lk.wlan_max_busy < 1:
        raise InvalidScenario("bad WLAN contention parameters")
    bad = [m for m in s.traffic.mix if m not in APPS]
    if bad:
        raise InvalidScenario(f"traffic.mix has unknown applications {bad}")
    s.curve_params()


def _build(raw: dict[tuple[str, str], str]) -> Scenario:
    values = {}
    for key, (parser, default) in SCHEMA.items():
        text = raw.get(key, default)
        try:
            values[key] = parser(text)
        except ValueError:
            raise InvalidScenario(f"{key[0]}.{key[1]}: cannot parse {text!r}") from None
    full_raw = {key: raw.get(key, default) for key, (_, default) in SCHEMA.items()}
    s = Scenario(values, full_raw)
    _validate(s)
    return s


def parse_scenario(text: str) -> Scenario:
    raw: dict[tuple[str, str], str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidScenario(f"line {lineno}: expected 'section.key = value'")
        dotted, value = (p.strip() for p in line.split("=", 1))
        key = _split_key(dotted)
        if key in raw:
            raise InvalidScenario(f"line {lineno}: duplicate key {dotted}")
        raw[key] = value
    return _build(raw)


def load_scenario(path: str | None = None) -> Scenario:
    if path is None:
        text = importlib.resources.files("convergelab.data").joinpath("default.scenario").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return parse_scenario(text)


def default_scenario() -> Scenario:
    return load_scenario(None)
