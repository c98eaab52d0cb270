"""Command line: run | compare | attack | validate.

Exit codes: 0 ok, 2 configuration error, 3 simulation failure, 4 a
directional expectation failed in ``compare``, 5 the attack matrix differs
from the reference, 6 a crypto self-test failed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import shutil
import sys
import time
from typing import Sequence

from convergelab import __version__, kernels, metrics, seceval
from convergelab.crypto.selftest import run_selftests
from convergelab.netsim.scenario import InvalidScenario, Scenario, load_scenario
from convergelab.netsim.sim import SimResult, run_simulation
from convergelab.protocol import Protocol
from convergelab.protocol.backend import BACKEND_OVERHEAD

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_DIRECTION, EXIT_MATRIX, EXIT_SELFTEST = 0, 2, 3, 4, 5, 6
MANIFEST = "manifest.json"
RESOLVED = "scenario.resolved"


class ConfigError(Exception):
    pass


def run_config(s: Scenario) -> dict[str, str]:
    """Flat resolved config; the compared axes get short names."""
    cfg = s.resolved()
    renamed = {"auth.protocol": "protocol", "topology.coupling": "coupling", "sim.seed": "seed",
               "sim.duration_s": "duration_s"}
    return {renamed.get(k, k): v for k, v in cfg.items()}


def build_scenario(path: str | None, protocol: str | None = None, coupling: str | None = None,
                   seed: int | None = None, duration: float | None = None) -> Scenario:
    try:
        s = load_scenario(path)
        over = {}
        if protocol is not None:
            over["auth.protocol"] = protocol
        if coupling is not None:
            over["topology.coupling"] = coupling
        if seed is not None:
            over["sim.seed"] = str(seed)
        if duration is not None:
            over["sim.duration_s"] = repr(float(duration))
        return s.with_overrides(over) if over else s
    except OSError as exc:
        raise ConfigError(f"cannot read scenario: {exc}") from None
    except InvalidScenario as exc:
        raise ConfigError(str(exc)) from None


def prepare_out(out: str, force: bool) -> None:
    if os.path.exists(out):
        if not force:
            raise ConfigError(f"{out} exists; pass --force to overwrite")
        if os.path.isdir(out):
            shutil.rmtree(out)
        else:
            os.remove(out)
    os.makedirs(out)


def _sha256(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def manifest_for(s: Scenario, result: SimResult, csv_paths: list[str], elapsed: float) -> dict:
    a = s.auth
    return {
        "tool": "convergelab",
        "code_version": __version__,
        "kernel_backend": kernels.backend(),
        "config": run_config(s),
        "scenario_file": RESOLVED,
        "modeled_overheads": {
            "frame_overhead_bytes": a.frame_overhead_bytes,
            "umts_message_bytes": a.umts_message_bytes,
            "av_batch": a.av_batch,
            "p_sync": a.p_sync,
            "reauth_period_s": a.reauth_period_s,
            "backend_overhead_bytes": BACKEND_OVERHEAD,
        },
        "auth": result.auth_summary(),
        "purity": vars(result.purity) | {"pure": result.purity.pure},
        "sgsn_drops": result.sgsn_drops,
        "drops_by_link": result.drops_by_link,
        "conservation": result.conservation,
        "causality_violations": result.causality_violations,
        "events": result.events,
        "trace_digest": result.trace_digest,
        "final_time_averages": {m: metrics.final_average(result.series[m]) for m in metrics.METRIC_IDS},
        "csv_sha256": {os.path.basename(p): _sha256(p) for p in csv_paths},
        "wall_time_s": round(elapsed, 3),
    }


def execute_run(s: Scenario, out: str) -> tuple[SimResult, dict]:
    """Simulate, then write CSVs, the resolved scenario and the manifest into ``out`` (must exist)."""
    t0 = time.perf_counter()
    result = run_simulation(s)
    paths = metrics.export_csv(result.series, out)
    with open(os.path.join(out, RESOLVED), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(s.to_text())
    man = manifest_for(s, result, paths, time.perf_counter() - t0)
    with open(os.path.join(out, MANIFEST), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(man, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return result, man


def _summary(man: dict) -> str:
    c = man["config"]
    lines = [f"run {c['protocol']} / {c['coupling']} / seed {c['seed']} / {c['duration_s']} s"]
    for flow, st in sorted(man["auth"].items()):
        lines.append(f"  auth {flow:<12} n={st['count']:<4} messages/auth={st['mean_messages']:.2f}"
                     f" bytes/auth={st['mean_bytes']:.1f}")
    for m, v in man["final_time_averages"].items():
        lines.append(f"  {m:<28}{v:.6g}")
    lines.append(f"  sgsn drops {man['sgsn_drops']}, hybrid purity {'ok' if man['purity']['pure'] else 'VIOLATED'}")
    return "\n".join(lines)


def cmd_run(args: argparse.Namespace) -> int:
    s = build_scenario(args.scenario, _one(args.protocol, "protocol"), _one(args.coupling, "coupling"),
                       args.seed, args.duration)
    out = args.out or "run-out"
    prepare_out(out, args.force)
    try:
        _, man = execute_run(s, out)
    except InvalidScenario as exc:
        raise ConfigError(str(exc)) from None
    print(_summary(man))
    print(f"wrote {out}")
    return EXIT_OK


def _one(values: list[str] | None, name: str) -> str | None:
    if not values:
        return None
    if len(values) > 1:
        raise ConfigError(f"run takes one --{name}")
    return values[0]


def _pair(values: list[str] | None, default: tuple[str, str] | None) -> tuple[str | None, str | None]:
    if not values:
        return default if default else (None, None)
    if len(values) == 1:
        return values[0], values[0]
    if len(values) == 2:
        return values[0], values[1]
    raise ConfigError("compare takes at most two values per axis")


def _load_run(path: str) -> metrics.RunRecord:
    try:
        with open(os.path.join(path, MANIFEST), encoding="utf-8") as fh:
            man = json.load(fh)
        return metrics.RunRecord(man["config"], metrics.load_csv_dir(path), averaged=True)
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot load run from {path}: {exc}") from None


def cmd_compare(args: argparse.Namespace) -> int:
    out = args.out or "compare-out"
    if args.runs:
        prepare_out(out, args.force)
        rec_a, rec_b = (_load_run(p) for p in args.runs)
    else:
        pa, pb = _pair(args.protocol, ("ecdh-aka", "aka") if not args.coupling or len(args.coupling) < 2 else None)
        ca, cb = _pair(args.coupling, None)
        if pa != pb and ca != cb:
            raise ConfigError("compare varies one axis at a time (protocol or coupling)")
        sa = build_scenario(args.scenario, pa, ca, args.seed, args.duration)
        sb = build_scenario(args.scenario, pb, cb, args.seed, args.duration)
        prepare_out(out, args.force)
        records = []
        for tag, s in (("a", sa), ("b", sb)):
            os.makedirs(os.path.join(out, tag))
            res, _ = execute_run(s, os.path.join(out, tag))
            records.append(metrics.RunRecord(run_config(s), res.series))
        rec_a, rec_b = records
    try:
        report = metrics.compare(rec_a, rec_b)
    except metrics.ScenarioMismatch as exc:
        raise ConfigError(f"runs are not comparable: {exc}") from None
    text = report.to_text()
    with open(os.path.join(out, "comparison.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    with open(os.path.join(out, "comparison.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report.to_csv())
    print(text, end="")
    return EXIT_DIRECTION if report.failures() else EXIT_OK


def cmd_attack(args: argparse.Namespace) -> int:
    try:
        protocols = [Protocol.parse(p) for p in (args.protocol or ["aka", "ecdh-aka"])]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if Protocol.PASSWORD in protocols:
        raise ConfigError("attack covers aka and ecdh-aka")
    seeds = tuple(range(args.seed or 0, (args.seed or 0) + args.runs_per_property))
    reports = [seceval.evaluate_matrix(p, seeds) for p in protocols]
    text = "\n".join(seceval.format_report(r) for r in reports)
    print(text)
    if args.out:
        prepare_out(args.out, args.force)
        with open(os.path.join(args.out, "attack_report.txt"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
        with open(os.path.join(args.out, "attack_report.csv"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(seceval.report_csv(reports))
    bad = {r.protocol.value: seceval.mismatches(r) for r in reports if seceval.mismatches(r)}
    if bad:
        print(f"matrix mismatch: {bad}")
        return EXIT_MATRIX
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    s = build_scenario(args.scenario)
    results = run_selftests(s.curve_params())
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}{'  ' + r.detail if r.detail else ''}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_SELFTEST


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="convergelab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"convergelab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, sim=True):
        sp.add_argument("--scenario", help="scenario file (default: bundled default.scenario)")
        sp.add_argument("--protocol", action="append", choices=["aka", "ecdh-aka"])
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out")
        sp.add_argument("--force", action="store_true", help="overwrite --out if it exists")
        if sim:
            sp.add_argument("--coupling", action="append", choices=["loose", "tight", "hybrid"])
            sp.add_argument("--duration", type=float, help="simulated seconds")

    common(sub.add_parser("run", help="simulate one configuration"))
    cp = sub.add_parser("compare", help="simulate two configurations and compare final time averages")
    common(cp)
    cp.add_argument("--runs", nargs=2, metavar=("DIR_A", "DIR_B"), help="compare two finished run directories")
    ap = sub.add_parser("attack", help="run the attack matrix")
    common(ap, sim=False)
    ap.add_argument("--runs-per-property", type=int, default=20)
    vp = sub.add_parser("validate", help="crypto self-tests")
    vp.add_argument("--scenario")
    return p


COMMANDS = {"run": cmd_run, "compare": cmd_compare, "attack": cmd_attack, "validate": cmd_validate}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # anything escaping a simulation is a runtime failure
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
