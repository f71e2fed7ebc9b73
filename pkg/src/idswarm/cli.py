"""Command-line frontend.

Subcommands: synth-catalog, validate, select, distribute, simulate,
report. Exit codes: 0 success, 1 config/validation error, 2 catalog
generation failure, 3 empty shortlist, 4 simulation runtime error.
Every subcommand is deterministic given its flags; artifacts carry no
timestamps.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import catalog as catalog_mod
from . import reporting, simulator
from .distributor import (
    CapacityReport,
    DistributionParams,
    FlowBatch,
    distribute_flows,
    merge_reports,
)
from .errors import (
    ConfigError,
    EmptyShortlist,
    GenerationError,
    ParseError,
    SimulationError,
    ValidationError,
)
from .pareto import offline_select
from .scenario import constraints_from_dict, load_bundled_scenario, load_scenario
from .selector import select_online


class _Parser(argparse.ArgumentParser):
    # Usage mistakes are configuration errors: exit 1, not argparse's 2.
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="idswarm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth-catalog", help="generate a seeded synthetic catalog CSV")
    synth.add_argument("--seed", type=_u64, default=7)
    synth.add_argument("--n-per-platform", type=int, default=12)
    synth.add_argument("--out", default="catalog.csv", help="output CSV path")
    synth.add_argument("--quiet", action="store_true")
    synth.set_defaults(func=cmd_synth)

    validate = sub.add_parser("validate", help="validate a catalog CSV")
    validate.add_argument("catalog")
    validate.add_argument("--quiet", action="store_true")
    validate.set_defaults(func=cmd_validate)

    select = sub.add_parser("select", help="run offline+online selection for one drone")
    select.add_argument("--catalog", required=True)
    select.add_argument("--platform", required=True, help="platform label, e.g. rpi4b")
    select.add_argument("--storage-budget-mb", type=float, required=True)
    select.add_argument(
        "--constraints",
        default="{}",
        help="constraints JSON literal or a path to a JSON file",
    )
    select.add_argument("--current", default=None, help="currently active implementation id")
    select.add_argument("--quiet", action="store_true")
    select.set_defaults(func=cmd_select)

    distribute = sub.add_parser("distribute", help="plan flow distribution from broadcast reports")
    distribute.add_argument("--catalog", required=True)
    distribute.add_argument("--reports", required=True, help="capacity reports, JSON lines")
    distribute.add_argument("--flows", required=True, help="flow batches, JSON lines")
    distribute.add_argument("--epoch", type=int, default=None)
    distribute.add_argument("--alpha", type=float, default=1.0)
    distribute.add_argument("--beta", type=float, default=0.5)
    distribute.add_argument("--gamma", type=float, default=0.5)
    distribute.add_argument("--staleness-epochs", type=int, default=2)
    distribute.add_argument("--out", default=None, help="also write the plan JSON here")
    distribute.add_argument("--quiet", action="store_true")
    distribute.set_defaults(func=cmd_distribute)

    simulate = sub.add_parser("simulate", help="run a scenario and write metrics/logs/figures")
    simulate.add_argument("scenario", nargs="?", default=None, help="scenario JSON path")
    simulate.add_argument(
        "--bundled", action="store_true", help="run the packaged default scenario"
    )
    simulate.add_argument("--seed", type=_u64, default=42)
    simulate.add_argument(
        "--seeds", default=None, help="comma-separated seed list; outputs go to seed-<n>/ subdirs"
    )
    simulate.add_argument("--out", default="simout", help="output directory")
    simulate.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    simulate.add_argument("--quiet", action="store_true")
    simulate.set_defaults(func=cmd_simulate)

    report = sub.add_parser("report", help="aggregate runs into one comparison CSV and figure")
    report.add_argument("metrics", nargs="+", help="metrics.json files to compare")
    report.add_argument("--out", default="comparison.csv", help="comparison CSV path")
    report.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    report.add_argument("--quiet", action="store_true")
    report.set_defaults(func=cmd_report)

    return parser


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def cmd_synth(args) -> int:
    if args.n_per_platform < 1:
        raise ConfigError(f"--n-per-platform must be >= 1, got {args.n_per_platform}")
    result = catalog_mod.synth_catalog(args.seed, args.n_per_platform)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    catalog_mod.save_catalog(result, out)
    _say(args, f"wrote {len(result)} entries to {out}")
    return 0


def cmd_validate(args) -> int:
    loaded = catalog_mod.load_catalog(args.catalog)
    per_platform = {
        kind.label: len(loaded.for_platform(kind)) for kind in catalog_mod.PlatformKind
    }
    counts = ", ".join(f"{label}: {count}" for label, count in per_platform.items())
    _say(args, f"ok: {len(loaded)} entries ({counts})")
    return 0


def _load_constraints(text: str):
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"constraints are not valid JSON: {exc}") from exc
    else:
        path = Path(text)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read constraints file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"constraints file {path} is not valid JSON: {exc}") from exc
    return constraints_from_dict(data)


def cmd_select(args) -> int:
    loaded = catalog_mod.load_catalog(args.catalog)
    try:
        platform = catalog_mod.PlatformKind.from_label(args.platform)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if args.storage_budget_mb <= 0:
        raise ConfigError(f"--storage-budget-mb must be > 0, got {args.storage_budget_mb}")
    constraints = _load_constraints(args.constraints)
    shortlist = offline_select(loaded, platform, args.storage_budget_mb)
    if not shortlist:
        raise EmptyShortlist(
            f"no {platform.label} implementation fits {args.storage_budget_mb} MiB"
        )
    decision = select_online(shortlist, constraints, current=args.current)
    print(json.dumps(decision.to_dict(), sort_keys=True, indent=2))
    return 0


def _read_jsonl(path: str, label: str) -> list[dict]:
    records = []
    try:
        with Path(path).open(encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    records.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise ConfigError(f"{label} {path}:{line_no} is not valid JSON: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read {label} {path}: {exc}") from exc
    return records


def cmd_distribute(args) -> int:
    loaded = catalog_mod.load_catalog(args.catalog)
    try:
        reports = [CapacityReport.from_dict(r) for r in _read_jsonl(args.reports, "reports")]
        flows = [FlowBatch.from_dict(f) for f in _read_jsonl(args.flows, "flows")]
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad report or flow record: {exc}") from exc
    params = DistributionParams(
        alpha=args.alpha,
        beta=args.beta,
        gamma=args.gamma,
        staleness_epochs=args.staleness_epochs,
    )
    epoch = args.epoch if args.epoch is not None else max((r.epoch for r in reports), default=0)
    view = merge_reports(reports, epoch, params.staleness_epochs)
    plan = distribute_flows(view, flows, params, loaded.by_id, epoch=epoch)
    text = json.dumps(plan.to_dict(), sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def _run_one(config, catalog, seed: int, out_dir: Path, args) -> None:
    result = simulator.Simulation(config, seed, catalog).run()
    paths = reporting.write_run_outputs(result, out_dir, figures=not args.no_figures)
    swarm = result.metrics.swarm
    _say(
        args,
        f"seed {seed}: {swarm.flows_analyzed} flows analyzed, "
        f"{swarm.detected} detected, {swarm.dropped} dropped -> {paths['metrics']}",
    )


def cmd_simulate(args) -> int:
    if args.bundled == (args.scenario is not None):
        raise ConfigError("give exactly one of a scenario path or --bundled")
    if args.bundled:
        config = load_bundled_scenario()
        base_dir = Path(".")
    else:
        scenario_path = Path(args.scenario)
        config = load_scenario(scenario_path)
        base_dir = scenario_path.parent
    loaded = config.catalog.load(base_dir)
    out_dir = Path(args.out)
    if args.seeds is not None:
        try:
            seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
        except ValueError as exc:
            raise ConfigError(f"--seeds must be a comma-separated integer list: {exc}") from exc
        if not seeds:
            raise ConfigError("--seeds named no seeds")
        for seed in seeds:
            _run_one(config, loaded, seed, out_dir / f"seed-{seed}", args)
    else:
        _run_one(config, loaded, args.seed, out_dir, args)
    return 0


def cmd_report(args) -> int:
    rows = reporting.comparison_rows([Path(p) for p in args.metrics])
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    reporting.write_comparison_csv(rows, out)
    written = [out]
    if not args.no_figures:
        figure = out.with_suffix(".png")
        reporting.render_comparison_figure(rows, figure)
        written.append(figure)
    _say(args, "wrote " + ", ".join(str(p) for p in written))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except GenerationError as exc:
        print(f"generation error: {exc}", file=sys.stderr)
        return 2
    except EmptyShortlist as exc:
        print(f"empty shortlist: {exc}", file=sys.stderr)
        return 3
    except SimulationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
