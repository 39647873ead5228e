"""Command-line front end.

Exit codes: 0 success / safe, 1 usage or configuration error, 2 safety
violation detected.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Iterable, Sequence

from . import config as cfgmod
from .cbf import Linear
from .charts import CRITERIA, certify_boundary, rasterize
from .config import ConfigError
from .sim import COLUMNS, IntegrationError, monitor, run

EXIT_OK, EXIT_USAGE, EXIT_UNSAFE = 0, 1, 2
CERTIFY_TOL = 1e-9


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(c if isinstance(c, str) else fmt(c) for c in row) + "\n")


def _gnuplot_trajectory(csv_path: Path) -> str:
    name = csv_path.name
    return (
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't [s]'\n"
        "set multiplot layout 2,2\n"
        f"plot '{name}' using 1:2 with lines\n"
        f"plot '{name}' using 1:3 with lines, '' using 1:4 with lines\n"
        f"plot '{name}' using 1:10 with lines, '' using 1:9 with lines, '' using 1:11 with lines\n"
        f"plot '{name}' using 1:6 with lines, '' using 1:7 with lines\n"
        "unset multiplot\n"
    )


def _gnuplot_chart(csv_path: Path) -> str:
    return (
        "set datafile separator ','\nset xlabel 'B [1/s]'\nset ylabel 'A [1/s]'\n"
        f"plot '{csv_path.name}' using 1:($3 > 0 ? $2 : 1/0) every ::1 with points pt 5 ps 0.3 title 'member'\n"
    )


def _gains_override(args):
    return cfgmod.parse_gains(args.gains) if args.gains else None


def cmd_simulate(args) -> int:
    cfg = cfgmod.load_config(args.config)
    scenario = cfgmod.scenario_from(cfg, _gains_override(args))
    monitored = cfgmod.monitored_from(cfg)
    traj = run(scenario)
    summary = monitor(traj, monitored)
    out = Path(args.out or "trajectory.csv")
    write_csv(out, COLUMNS, traj.as_array())
    out.with_suffix(".gp").write_text(_gnuplot_trajectory(out))
    for line in summary.lines():
        print(line)
    first = summary.first_violation
    print("verdict: " + ("safe" if first is None else f"unsafe, first violation at t = {first:.6g} s"))
    return EXIT_OK if first is None else EXIT_UNSAFE


def cmd_chart(args) -> int:
    if args.criterion not in CRITERIA:
        raise ConfigError(f"--criterion must be one of {CRITERIA} for chart")
    cfg = cfgmod.load_config(args.config)
    spec = cfgmod.chart_spec_from(cfg, args.criterion)
    try:
        grid = rasterize(spec)
    except ValueError as exc:
        raise ConfigError(f"chart.C: {exc}") from None
    out = Path(args.out or f"chart_{args.criterion}.csv")
    write_csv(out, ["B", "A", "member"], grid.rows())
    out.with_suffix(".gp").write_text(_gnuplot_chart(out))
    print(f"wrote {grid.member.size} cells ({int(grid.member.sum())} members) to {out}")
    return EXIT_OK


def cmd_certify(args) -> int:
    if args.criterion not in ("th", "ttc"):
        raise ConfigError("--criterion must be 'th' or 'ttc' for certify")
    cfg = cfgmod.load_config(args.config)
    gains = _gains_override(args) or cfgmod.gains_from(cfg)
    if cfg["certify.samples"] <= 0:
        raise ConfigError("certify.samples must be positive")
    report = certify_boundary(
        args.criterion,
        gains,
        policy=cfgmod.policy_from(cfg),
        safety=cfgmod.safety_from(cfg),
        resistance=cfgmod.resistance_from(cfg),
        v_bar=cfg["certify.v_bar"],
        gamma=cfgmod.brake_bound_from(cfg),
        samples=cfg["certify.samples"],
        seed=args.seed,
        alpha=Linear(cfg["sim.alpha_rate"]),
        alpha_e=Linear(cfg["sim.alpha_e_rate"]),
    )
    s = report.argmin_state
    print(f"worst_margin = {fmt(report.worst_margin)}")
    print(f"argmin_state = D {fmt(s.D)}, v {fmt(s.v)}, vL {fmt(s.vL)}")
    print(f"samples = {report.samples}")
    ok = report.worst_margin >= -CERTIFY_TOL
    print("verdict: " + ("certified" if ok else "boundary violation found"))
    return EXIT_OK if ok else EXIT_UNSAFE


SWEEP_HEADER = ["A", "B", "C", "min_hD", "min_hTH", "min_hTTC", "violation", "error"]


def cmd_sweep(args) -> int:
    cfg = cfgmod.load_config(args.config)
    gain_list = cfgmod.parse_gain_list(cfg["sweep.gains"])
    monitored = cfgmod.monitored_from(cfg)
    rows = []
    for g in gain_list:
        try:
            summary = monitor(run(cfgmod.scenario_from(cfg, g)), monitored)
        except (ConfigError, ValueError, RuntimeError) as exc:
            nan = float("nan")
            rows.append([g.A, g.B, g.C, nan, nan, nan, "", str(exc).replace(",", ";")])
            continue
        m = summary.min_h
        rows.append([g.A, g.B, g.C, m["hD"], m["hTH"], m["hTTC"], not summary.safe, ""])
    out = Path(args.out or "sweep.csv")
    write_csv(out, SWEEP_HEADER, rows)
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "chart": cmd_chart, "certify": cmd_certify, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="safeccc", description="Safety-critical connected cruise control toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value configuration file (defaults when omitted)")
        p.add_argument("--out", help="output CSV path")
        p.add_argument("--criterion", default="th", help="th | ttc | plant | string")
        p.add_argument("--gains", help="A,B,C overriding gains.* from the config")
        p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrationError as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
