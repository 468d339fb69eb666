"""Command-line entry point: ``tranchesim validate|run|sweep``.

Exit codes: 0 success, 1 invalid scenario or sweep document, 2 bad command
line (argparse), 3 runtime failure, 4 file system error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import yaml

from . import __version__
from .config import load_yaml, parse_scenario
from .errors import ConfigError
from .scenario import RunReport, run
from .sweep import load_sweep, run_sweep

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 3
EXIT_IO = 4


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def report_tables(report: RunReport) -> dict[str, tuple[list[str], list[list]]]:
    """CSV extracts of a run: agent payouts, policy outcome, state timeline, pool prices."""
    pol = report.policy
    per_token = [pol["c_payout_a"], pol["c_payout_b"], pol["cx_payout"], pol["cy_payout"]]
    payouts = [
        [a, b["c_paid"], b["cx_paid"], b["cy_paid"], b["a_redeemed"], b["b_redeemed"]] + per_token
        for a, b in report.agents.items()
    ]
    policy = [[
        pol["final_state"], pol["c_payout_a"], pol["c_payout_b"], pol["cx_payout"],
        pol["cy_payout"], pol["interest"], report.scenario_hash, report.version,
    ]]
    venue_ids = list(report.snapshots[0]["venues"]) if report.snapshots else []
    states, prices = [], []
    for snap in report.snapshots:
        row = [snap["t"], snap["state"], snap["c_conserved"]]
        for vid in venue_ids:
            v = snap["venues"][vid]
            row += [v["exchange_rate"], v["liquid"]]
        states.append(row)
        for pid, pool in snap["pools"].items():
            prices.append([snap["t"], pid, pool["reserve0"], pool["reserve1"], pool["price"] or ""])
    venue_cols = [c for vid in venue_ids for c in (f"rate_{vid}", f"liquid_{vid}")]
    return {
        "payouts.csv": (
            ["agent", "c_paid", "cx_paid", "cy_paid", "a_redeemed", "b_redeemed",
             "c_per_a", "c_per_b", "cx_per_token", "cy_per_token"],
            payouts,
        ),
        "policy.csv": (
            ["final_state", "c_payout_a", "c_payout_b", "cx_payout", "cy_payout", "interest",
             "scenario_hash", "version"],
            policy,
        ),
        "states.csv": (["t", "state", "c_conserved"] + venue_cols, states),
        "prices.csv": (["t", "pool", "reserve0", "reserve1", "price"], prices),
    }


class _Out:
    def __init__(self, quiet: bool):
        self.quiet = quiet

    def info(self, msg: str) -> None:
        if not self.quiet:
            print(msg)

    def error(self, msg: str) -> None:
        print(msg, file=sys.stderr)


def _print_diags(out: _Out, path: str, diags) -> None:
    for field, msg in diags:
        out.error(f"{path}: {field or '<root>'}: {msg}")


def _load_scenario(path: str, seed: int | None):
    data = load_yaml(path)
    if seed is not None and isinstance(data, dict):
        data["seed"] = seed
    return parse_scenario(data)


def cmd_validate(args, out: _Out) -> int:
    _load_scenario(args.file, None)
    out.info(f"{args.file}: ok")
    return EXIT_OK


def cmd_run(args, out: _Out) -> int:
    scenario = _load_scenario(args.file, args.seed)
    report = run(scenario)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [out_dir / "report.json"]
    written[0].write_text(report.to_json(), encoding="utf-8")
    if args.format == "csv":
        for name, (header, rows) in report_tables(report).items():
            target = out_dir / name
            target.write_text(_csv_text(header, rows), encoding="utf-8")
            written.append(target)
    pol = report.policy
    out.info(
        f"{scenario.name or args.file}: {pol['final_state']}  "
        f"A={pol['c_payout_a']} B={pol['c_payout_b']} Cx={pol['cx_payout']} Cy={pol['cy_payout']}"
    )
    for p in written:
        out.info(f"  wrote {p}")
    return EXIT_OK


def cmd_sweep(args, out: _Out) -> int:
    spec = load_sweep(args.spec)
    header, rows = run_sweep(spec, Path(args.spec).parent, seed=args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / f"{Path(args.spec).stem}.csv"
    target.write_text(_csv_text(header, rows), encoding="utf-8")
    meta = out_dir / f"{Path(args.spec).stem}.meta.json"
    meta.write_text(json.dumps({"tool": "tranchesim", "version": __version__, "spec": str(args.spec),
                                "kind": spec.kind, "rows": len(rows)}, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")
    out.info(f"{args.spec}: {len(rows)} rows -> {target}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tranchesim", description="Tranche insurance protocol simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--quiet", "-q", action="store_true", help="only print errors")
    # also accepted after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", "-q", action="store_true", default=argparse.SUPPRESS, help="only print errors")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a scenario file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", parents=[common], help="run a scenario and write its report")
    p.add_argument("file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="json: report.json only; csv: report.json plus CSV extracts")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", parents=[common], help="run a parameter sweep to CSV")
    p.add_argument("spec")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="override the seed of every swept scenario")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = _Out(args.quiet)
    target = getattr(args, "file", None) or getattr(args, "spec", "")
    try:
        return args.func(args, out)
    except ConfigError as err:
        _print_diags(out, target, err.diagnostics)
        return EXIT_INVALID
    except yaml.YAMLError as err:
        out.error(f"{target}: malformed document: {err}")
        return EXIT_INVALID
    except OSError as err:
        out.error(f"{err.filename or target}: {err.strerror or err}")
        return EXIT_IO
    except Exception as err:  # noqa: BLE001 - any other failure is a runtime error
        out.error(f"{target}: runtime error: {type(err).__name__}: {err}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
