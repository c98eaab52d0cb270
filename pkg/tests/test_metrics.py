import math
import os
import random
from fractions import Fraction

import pytest

from convergelab import kernels
from convergelab.metrics import (
    METRIC_IDS,
    EmptySeries,
    MetricSeries,
    NonMonotonicTime,
    RunRecord,
    ScenarioMismatch,
    compare,
    export_csv,
    parse_csv,
    series_to_csv,
    time_average,
)


def series(pairs, mid="wlan_load_bps"):
    s = MetricSeries(mid)
    for t, v in pairs:
        s.record(t, v)
    return s


def zoh_exact(times, values):
    """Exact running mean: first value held over [0, t0], then each value until the next sample."""
    T = [Fraction(t) for t in times]
    V = [Fraction(v) for v in values]
    acc = V[0] * T[0]
    out = [V[0]]
    for i in range(1, len(T)):
        acc += V[i - 1] * (T[i] - T[i - 1])
        out.append(acc / T[i])
    return out


def random_series(rng, n):
    t, times, values = 0.0, [], []
    for _ in range(n):
        t += rng.uniform(1e-3, 5.0)
        times.append(t)
        values.append(rng.uniform(-1e6, 1e6) if rng.random() < 0.5 else rng.expovariate(1e-3))
    return times, values


def test_record_appends():
    s = MetricSeries("wlan_delay_s")
    s.record(1.0, 2.0)
    assert len(s) == 1 and s.samples == [(1.0, 2.0)]


def test_record_rejects_equal_time():
    s = series([(1.0, 0.0)])
    with pytest.raises(NonMonotonicTime):
        s.record(1.0, 5.0)


def test_many_monotone_appends():
    rng = random.Random(0)
    s, t = MetricSeries("wlan_delay_s"), 0.0
    for _ in range(10**6):
        t += rng.random() + 1e-9
        s.record(t, 1.0)
    assert len(s) == 10**6 and all(a < b for a, b in zip(s.times, s.times[1:]))


def test_time_average_constant():
    avg = time_average(series([(t, 7.5) for t in (0.5, 1, 2, 3.25)]))
    assert avg.values == [7.5] * 4


def test_time_average_step_holds_previous_value():
    # value 0 held over [0, 2), the jump to 10 only counts from t = 2 onwards
    assert time_average(series([(1, 0), (2, 10)])).values == [0.0, 0.0]
    assert time_average(series([(1, 0), (2, 10), (4, 10)])).values == [0.0, 0.0, 5.0]


def test_time_average_empty():
    with pytest.raises(EmptySeries):
        time_average(MetricSeries("wlan_delay_s"))


@pytest.mark.parametrize("backend", ["python", "compiled"])
def test_time_average_matches_exact_oracle(backend):
    if backend == "compiled" and not kernels.compiled_available():
        pytest.skip("extension not built")
    rng = random.Random(2024)
    kernels.use_backend(backend)
    try:
        for _ in range(100):
            times, values = random_series(rng, rng.randint(1, 400))
            got = time_average(series(zip(times, values))).values
            for g, want in zip(got, zoh_exact(times, values)):
                scale = max(1.0, max(abs(v) for v in values))
                assert abs(g - float(want)) <= 1e-9 * scale
    finally:
        kernels.use_backend("compiled" if kernels.compiled_available() else "python")


def test_time_average_agrees_with_fine_grid_integrator():
    s = series([(0.5, 3.0), (1.25, -1.0), (2.0, 4.0), (3.0, 0.0)])
    dt, total = 1e-3, 0.0
    values = dict(zip(s.times, s.values))
    for i in range(3000):
        mid = (i + 0.5) * dt
        # v_{i-1} is in force over (t_{i-1}, t_i]; v_0 also covers [0, t_0]
        prev = [tt for tt in s.times if tt < mid]
        total += (values[prev[-1]] if prev else s.values[0]) * dt
    assert time_average(s).values[-1] == pytest.approx(total / 3.0, abs=1e-9)


def test_csv_round_trip_12_digits():
    rng = random.Random(9)
    times, values = random_series(rng, 200)
    s = series(zip(times, values))
    back = parse_csv(series_to_csv(s), s.metric_id)
    for a, b in zip(s.values + s.times, back.values + back.times):
        assert float(f"{a:.12g}") == float(f"{b:.12g}")


def test_csv_bytes_are_plain(tmp_path):
    s = series([(1.0, 0.1), (2.0, 1e-7)])
    text = series_to_csv(s)
    assert text.startswith("time_s,value\n") and "\r" not in text and "," not in text.splitlines()[1].split(",")[1]
    paths = export_csv({s.metric_id: s}, str(tmp_path))
    assert sorted(os.path.basename(p) for p in paths) == sorted(f"{m}.csv" for m in METRIC_IDS)
    empty = (tmp_path / "wlan_delay_s.csv").read_bytes()
    assert empty == b"time_s,value\n"


def _run(config, seed):
    rng = random.Random(seed)
    return RunRecord(config, {m: series([(t, rng.random()) for t in range(1, 20)], m) for m in METRIC_IDS})


def test_compare_self_is_zero():
    r = _run({"protocol": "aka", "coupling": "hybrid", "seed": 1}, 3)
    rep = compare(r, r)
    assert all(row.delta == 0 and row.direction == "equal" for row in rep.rows)
    assert rep.axis is None


def test_compare_antisymmetric():
    a = _run({"protocol": "ecdh-aka", "coupling": "hybrid", "seed": 1}, 1)
    b = _run({"protocol": "aka", "coupling": "hybrid", "seed": 1}, 2)
    ab, ba = compare(a, b), compare(b, a)
    for x, y in zip(ab.rows, ba.rows):
        assert x.delta == -y.delta
        assert math.copysign(1, x.delta) == -math.copysign(1, y.delta)
    assert ab.axis == "protocol" and ab.expectation_checked and not ba.expectation_checked


def test_compare_rejects_two_axes():
    a = _run({"protocol": "ecdh-aka", "coupling": "hybrid", "seed": 1}, 1)
    b = _run({"protocol": "aka", "coupling": "tight", "seed": 1}, 1)
    with pytest.raises(ScenarioMismatch):
        compare(a, b)


def test_compare_rejects_other_differences():
    a = _run({"protocol": "aka", "coupling": "hybrid", "seed": 1}, 1)
    b = _run({"protocol": "aka", "coupling": "hybrid", "seed": 2}, 1)
    with pytest.raises(ScenarioMismatch):
        compare(a, b)


def test_report_text_and_csv():
    a = _run({"protocol": "ecdh-aka", "coupling": "hybrid", "seed": 1}, 1)
    b = _run({"protocol": "aka", "coupling": "hybrid", "seed": 1}, 2)
    rep = compare(a, b)
    assert "wlan_throughput_bps" in rep.to_text()
    lines = rep.to_csv().splitlines()
    assert lines[0] == "metric_id,a_final,b_final,delta,direction,expected" and len(lines) == 9
