"""QoS metric series, zero-order-hold time averages, CSV export and A/B comparison."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field

from convergelab import kernels

METRIC_IDS = (
    "wlan_load_bps",
    "wlan_media_access_delay_s",
    "wlan_delay_s",
    "wlan_throughput_bps",
    "ftp_traffic_sent_bps",
    "http_traffic_sent_bps",
    "umts_rx_throughput_bps",
    "umts_tx_load_bps",
)

# expected direction of (proposed - baseline) on the final time average
EXPECTED_DIRECTION = {
    "wlan_load_bps": "lower",
    "wlan_media_access_delay_s": "lower",
    "wlan_delay_s": "lower",
    "wlan_throughput_bps": "higher",
    "ftp_traffic_sent_bps": "lower",
    "http_traffic_sent_bps": "lower",
    "umts_rx_throughput_bps": "higher",
    "umts_tx_load_bps": "lower",
}

CSV_HEADER = ("time_s", "value")
# keys allowed to differ between the two runs of a comparison
COMPARABLE_AXES = ("protocol", "coupling")
IGNORED_KEYS = ("out_dir", "force", "code_version", "backend")


class NonMonotonicTime(ValueError):
    pass


class EmptySeries(ValueError):
    pass


class ScenarioMismatch(ValueError):
    pass


@dataclass
class MetricSeries:
    metric_id: str
    times: list[float] = field(default_factory=list)
    values: list[float] = field(default_factory=list)

    def record(self, t: float, v: float) -> None:
        if self.times and not t > self.times[-1]:
            raise NonMonotonicTime(f"{self.metric_id}: t={t!r} not after {self.times[-1]!r}")
        self.times.append(float(t))
        self.values.append(float(v))

    def __len__(self) -> int:
        return len(self.times)

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.times, self.values))

    @property
    def last(self) -> float:
        if not self.values:
            raise EmptySeries(self.metric_id)
        return self.values[-1]


def record(series: MetricSeries, t: float, v: float) -> None:
    series.record(t, v)


def time_average(series: MetricSeries) -> MetricSeries:
    """Running time-weighted mean under zero-order hold from t = 0."""
    if not series.times:
        raise EmptySeries(series.metric_id)
    avg = kernels.zoh_running_mean(series.times, series.values)
    return MetricSeries(series.metric_id, list(series.times), list(avg))


def final_average(series: MetricSeries) -> float:
    return time_average(series).last if series.times else 0.0


def series_to_csv(series: MetricSeries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for t, v in zip(series.times, series.values):
        w.writerow((repr(t), repr(v)))
    return buf.getvalue()


def parse_csv(text: str, metric_id: str = "") -> MetricSeries:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError("missing time_s,value header")
    s = MetricSeries(metric_id)
    for row in rows[1:]:
        s.record(float(row[0]), float(row[1]))
    return s


def load_csv_dir(out_dir: str) -> dict[str, MetricSeries]:
    out = {}
    for mid in METRIC_IDS:
        with open(os.path.join(out_dir, f"{mid}.csv"), encoding="ascii") as fh:
            out[mid] = parse_csv(fh.read(), mid)
    return out


def export_csv(series: dict[str, MetricSeries], out_dir: str) -> list[str]:
    """Write one ``<metric_id>.csv`` per metric holding its running time average."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for mid in METRIC_IDS:
        s = series.get(mid, MetricSeries(mid))
        avg = time_average(s) if s.times else s
        path = os.path.join(out_dir, f"{mid}.csv")
        with open(path, "w", newline="", encoding="ascii") as fh:
            fh.write(series_to_csv(avg))
        paths.append(path)
    return paths


@dataclass
class RunRecord:
    config: dict
    series: dict[str, MetricSeries]
    averaged: bool = False  # series already hold running time averages (loaded from CSV)

    def final(self, metric_id: str) -> float:
        s = self.series.get(metric_id, MetricSeries(metric_id))
        if not s.times:
            return 0.0
        return s.last if self.averaged else final_average(s)


@dataclass(frozen=True)
class ComparisonRow:
    metric_id: str
    a: float
    b: float

    @property
    def delta(self) -> float:
        return self.a - self.b

    @property
    def direction(self) -> str:
        if self.a < self.b:
            return "lower"
        if self.a > self.b:
            return "higher"
        return "equal"


@dataclass
class ComparisonReport:
    label_a: str
    label_b: str
    axis: str | None
    rows: list[ComparisonRow]
    expectation_checked: bool = False

    def failures(self) -> list[str]:
        if not self.expectation_checked:
            return []
        return [r.metric_id for r in self.rows if r.direction != EXPECTED_DIRECTION[r.metric_id]]

    def to_text(self) -> str:
        lines = [f"A = {self.label_a}", f"B = {self.label_b}", f"axis = {self.axis or 'none'}", ""]
        lines.append(f"{'metric':<28}{'A':>18}{'B':>18}{'A-B':>18}  verdict")
        for r in self.rows:
            verdict = r.direction
            if self.expectation_checked:
                want = EXPECTED_DIRECTION[r.metric_id]
                verdict += "  ok" if r.direction == want else f"  expected {want}"
            lines.append(f"{r.metric_id:<28}{r.a:>18.6g}{r.b:>18.6g}{r.delta:>18.6g}  {verdict}")
        if self.expectation_checked:
            bad = self.failures()
            lines += ["", "all directional expectations hold" if not bad else "expectation failed: " + ", ".join(bad)]
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["metric_id", "a_final", "b_final", "delta", "direction", "expected"])
        for r in self.rows:
            exp = EXPECTED_DIRECTION[r.metric_id] if self.expectation_checked else ""
            w.writerow([r.metric_id, repr(r.a), repr(r.b), repr(r.delta), r.direction, exp])
        return buf.getvalue()


def _axis(a: dict, b: dict) -> str | None:
    keys = (set(a) | set(b)) - set(IGNORED_KEYS)
    differing = sorted(k for k in keys if a.get(k) != b.get(k))
    if not differing:
        return None
    if len(differing) > 1 or differing[0] not in COMPARABLE_AXES:
        raise ScenarioMismatch(f"runs differ in {', '.join(differing)}")
    return differing[0]


def _label(cfg: dict) -> str:
    return f"{cfg.get('protocol')}/{cfg.get('coupling')}/seed={cfg.get('seed')}"


def compare(run_a: RunRecord, run_b: RunRecord) -> ComparisonReport:
    axis = _axis(run_a.config, run_b.config)
    rows = [ComparisonRow(mid, run_a.final(mid), run_b.final(mid)) for mid in METRIC_IDS]
    checked = axis == "protocol" and run_a.config.get("protocol") == "ecdh-aka" and run_b.config.get("protocol") == "aka"
    return ComparisonReport(_label(run_a.config), _label(run_b.config), axis, rows, checked)
