"""Batch harness: run the verification suites for one geometry case and write a report.

Exit status is 0 when every check passes, 1 when a check fails and 2 for an
invalid configuration.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import homotopy as hp
from . import suites
from .geometry import get_case

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
REPORT_FORMAT = "c3geom-report/1"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    case: str = "ho"
    seed: int = 0
    samples: int = 100
    tolerance: float = 1e-9
    k_budget: int | None = None
    suites: tuple = ("all",)
    out: str | None = None

    def validate(self) -> None:
        if self.case not in ("hh", "ho", "oo"):
            raise ConfigError(f"unknown case {self.case!r}")
        if self.samples < 1:
            raise ConfigError("samples must be at least 1")
        if not self.tolerance > 0 or math.isinf(self.tolerance):
            raise ConfigError("tolerance must be a positive number")
        if self.k_budget is not None and self.k_budget < 0:
            raise ConfigError("k-budget must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        known = set(suites.SUITES) | {"all"}
        for s in self.suites:
            if s not in known:
                raise ConfigError(f"unknown suite {s!r}")
        if "covering" in self.suites and self.case != "hh":
            raise ConfigError("the covering suite only applies to case hh")

    def selected(self) -> list:
        if "all" in self.suites:
            return [s for s in suites.SUITES if s != "covering" or self.case == "hh"]
        return [s for s in suites.SUITES if s in self.suites]

    def resolved_k_budget(self) -> int:
        if self.k_budget is not None:
            return self.k_budget
        return suites.default_k_budget(get_case(self.case))


@dataclass
class Report:
    config: RunConfig
    checks: list = field(default_factory=list)  # (suite, Check)
    stats: dict = field(default_factory=dict)  # suite -> dict
    logs: dict = field(default_factory=dict)  # name -> (source, MoveLog)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for _, c in self.checks)

    def outcome_vector(self) -> list:
        return [(s, c.name, c.passed) for s, c in self.checks]

    def render(self) -> str:
        cfg = self.config
        rows = [
            ("format", REPORT_FORMAT),
            ("config.case", cfg.case),
            ("config.seed", cfg.seed),
            ("config.samples", cfg.samples),
            ("config.tolerance", cfg.tolerance),
            ("config.k_budget", cfg.resolved_k_budget()),
            ("config.suites", ",".join(cfg.selected())),
        ]
        for i, (suite, c) in enumerate(self.checks):
            p = f"check.{i}"
            rows += [
                (f"{p}.suite", suite),
                (f"{p}.name", c.name),
                (f"{p}.passed", c.passed),
                (f"{p}.samples", c.samples),
                (f"{p}.max_error", c.max_error),
                (f"{p}.counterexample", c.counterexample or ""),
            ]
        for suite in sorted(self.stats):
            for key in sorted(self.stats[suite]):
                rows.append((f"stats.{suite}.{key}", self.stats[suite][key]))
        for name in sorted(self.logs):
            rows.append((f"movelog.{name}", len(self.logs[name][1])))
        failed = sum(1 for _, c in self.checks if not c.passed)
        rows += [
            ("summary.checks", len(self.checks)),
            ("summary.failed", failed),
            ("summary.passed", failed == 0),
            ("wall_time", self.wall_time),
        ]
        return "".join(f"{k} = {_fmt(v)}\n" for k, v in rows)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    if isinstance(v, str):
        return v.replace("\n", " ")
    return str(v)


def run(config: RunConfig) -> Report:
    config.validate()
    case = get_case(config.case)
    report = Report(config)
    t0 = time.perf_counter()
    n, tol = config.samples, config.tolerance
    for name in config.selected():
        rng = suites.sub_rng(config.seed, name)
        if name == "algebra":
            res = suites.algebra_suite(case, rng, n, tol)
        elif name == "geometry":
            res = suites.geometry_suite(case, rng, n, tol)
        elif name == "covering":
            res = suites.covering_suite(case, rng, n, tol)
        else:
            res = suites.homotopy_suite(case, rng, n, tol, config.resolved_k_budget())
        report.checks += [(name, c) for c in res.checks]
        if res.stats:
            report.stats[name] = res.stats
        report.logs.update(res.logs)
    report.wall_time = time.perf_counter() - t0
    return report


def write_report(report: Report, out: str) -> None:
    path = Path(out)
    path.write_text(report.render())
    if report.logs:
        side = Path(f"{out}.movelogs")
        side.mkdir(exist_ok=True)
        case = get_case(report.config.case)
        for name, (source, log) in sorted(report.logs.items()):
            (side / f"{name}.jsonl").write_text(log.dumps(case, source))


def replay_file(path: str) -> int:
    """Replay a MoveLog side file from its recorded source path."""
    case, log, source = hp.MoveLog.loads(Path(path).read_text())
    if source is None:
        print("move log has no source path", file=sys.stderr)
        return EXIT_CONFIG
    try:
        out = hp.replay(source, log)
    except hp.HomotopyError as exc:
        print(f"replay failed: {exc}")
        return EXIT_FAIL
    print(f"case = {case.name}")
    print(f"moves = {len(log)}")
    print(f"source = {source.types()}")
    print(f"target = {out.types()}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="c3geom", description=__doc__.splitlines()[0])
    ap.add_argument("--case", choices=("hh", "ho", "oo"), default="ho")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--samples", type=int, default=100, help="samples per check")
    ap.add_argument("--tolerance", type=float, default=1e-9)
    ap.add_argument("--k-budget", type=int, default=None, help="K used in the C(k), D(k) budgets")
    ap.add_argument("--suite", default="all", help="comma separated: algebra,geometry,covering,homotopy,all")
    ap.add_argument("--out", default=None, help="report path (stdout if omitted)")
    ap.add_argument("--replay", default=None, metavar="MOVELOG", help="replay a move log side file and exit")
    return ap


def main(argv: list | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.replay:
        try:
            return replay_file(args.replay)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    config = RunConfig(
        case=args.case,
        seed=args.seed,
        samples=args.samples,
        tolerance=args.tolerance,
        k_budget=args.k_budget,
        suites=tuple(s.strip() for s in args.suite.split(",") if s.strip()),
        out=args.out,
    )
    try:
        config.validate()
        if config.out is not None:
            parent = os.path.dirname(os.path.abspath(config.out))
            if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
                raise ConfigError(f"cannot write to {config.out}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = run(config)
    if config.out is None:
        sys.stdout.write(report.render())
    else:
        try:
            write_report(report, config.out)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        failed = [f"{s}:{c.name}" for s, c in report.checks if not c.passed]
        print(f"{len(report.checks) - len(failed)}/{len(report.checks)} checks passed")
        for f in failed:
            print(f"FAILED {f}")
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
