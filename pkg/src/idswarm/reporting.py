"""Run artifacts: metrics JSON, delimited summaries, event logs, plot data,
and rendered figures.

Every delimited/JSON artifact is byte-deterministic for identical runs
(no timestamps, sorted keys, repr floats). Figures are rendered with the
Agg backend straight to files next to the data they visualize.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .errors import ConfigError
from .simulator import Event, SimResult

SUMMARY_COLUMNS = (
    "drone_id",
    "flows_generated",
    "flows_analyzed",
    "malicious_total",
    "detected",
    "missed",
    "dropped",
    "mean_latency_ms",
    "energy_j",
    "comm_bytes",
    "impl_switches",
)

COMPARISON_COLUMNS = (
    "run",
    "scenario",
    "seed",
    "flows_generated",
    "flows_analyzed",
    "detected",
    "missed",
    "dropped",
    "detection_rate",
    "mean_latency_ms",
    "energy_j",
    "comm_bytes",
    "impl_switches",
)

_PNG_METADATA = {"Software": None}


def _cell(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def write_metrics_json(result: SimResult, path: Path) -> None:
    document = json.dumps(result.metrics_document(), sort_keys=True, indent=2)
    path.write_text(document + "\n", encoding="utf-8")


def write_events_jsonl(events: Sequence[Event], path: Path) -> None:
    with path.open("w", encoding="utf-8") as handle:
        for event in events:
            handle.write(json.dumps(event.to_dict(), sort_keys=True, separators=(",", ":")))
            handle.write("\n")


def write_summary_csv(result: SimResult, path: Path) -> None:
    """One row per drone plus a trailing swarm row."""
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        rows = list(result.metrics.per_drone.items()) + [("swarm", result.metrics.swarm)]
        for drone_id, metrics in rows:
            record = metrics.to_dict()
            writer.writerow([drone_id] + [_cell(record[c]) for c in SUMMARY_COLUMNS[1:]])


_PLOT_SERIES = (
    ("battery.csv", "battery_j"),
    ("queue_length.csv", "queued_flows"),
    ("detections.csv", "detected_cum"),
)


def write_plotdata(result: SimResult, plot_dir: Path) -> None:
    """Tidy per-drone time series under plotdata/: battery, queue, detections."""
    plot_dir.mkdir(parents=True, exist_ok=True)
    for filename, column in _PLOT_SERIES:
        with (plot_dir / filename).open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["time_s", "drone_id", column])
            for sample in result.samples:
                writer.writerow(
                    [_cell(sample["time_s"]), sample["drone_id"], _cell(sample[column])]
                )


def _series_by_drone(samples: Iterable[Mapping], column: str) -> dict[str, tuple[list, list]]:
    series: dict[str, tuple[list, list]] = {}
    for sample in samples:
        times, values = series.setdefault(sample["drone_id"], ([], []))
        times.append(sample["time_s"])
        values.append(sample[column])
    return series


_FIGURES = (
    ("battery.png", "battery_j", "battery charge (J)"),
    ("queue_length.png", "queued_flows", "queued flows"),
    ("detections.png", "detected_cum", "cumulative detections"),
)


def render_run_figures(result: SimResult, fig_dir: Path) -> list[Path]:
    """Render the run's time series to PNG files; returns the paths."""
    fig_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for filename, column, ylabel in _FIGURES:
        fig, ax = plt.subplots(figsize=(8, 4.5))
        for drone_id, (times, values) in sorted(_series_by_drone(result.samples, column).items()):
            ax.plot(times, values, marker=".", label=drone_id)
        ax.set_xlabel("mission time (s)")
        ax.set_ylabel(ylabel)
        ax.set_title(f"{result.scenario_name} (seed {result.seed})")
        ax.grid(True, alpha=0.4)
        if result.samples:
            ax.legend(loc="best", fontsize=8)
        target = fig_dir / filename
        fig.savefig(target, bbox_inches="tight", metadata=_PNG_METADATA)
        plt.close(fig)
        written.append(target)
    return written


def write_run_outputs(result: SimResult, out_dir: Path, figures: bool = True) -> dict[str, Path]:
    """Write the full artifact set for one run and return the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "metrics": out_dir / "metrics.json",
        "summary": out_dir / "summary.csv",
        "events": out_dir / "events.jsonl",
        "plotdata": out_dir / "plotdata",
    }
    write_metrics_json(result, paths["metrics"])
    write_summary_csv(result, paths["summary"])
    write_events_jsonl(result.events, paths["events"])
    write_plotdata(result, paths["plotdata"])
    if figures:
        paths["figures"] = out_dir / "figures"
        render_run_figures(result, paths["figures"])
    return paths


def load_metrics_document(path: Path) -> dict:
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read metrics document {path}: {exc}") from exc
    for key in ("swarm", "scenario", "seed"):
        if key not in document:
            raise ConfigError(f"metrics document {path} is missing {key!r}")
    return document


def comparison_rows(paths: Sequence[Path]) -> list[dict]:
    """Flatten several runs' metrics.json files into comparison rows."""
    rows = []
    labels = [Path(p).resolve().parent.name or str(p) for p in paths]
    if len(set(labels)) != len(labels):
        labels = [str(p) for p in paths]
    for label, path in zip(labels, paths):
        document = load_metrics_document(path)
        swarm = document["swarm"]
        malicious_analyzed = swarm["detected"] + swarm["missed"]
        rows.append(
            {
                "run": label,
                "scenario": document["scenario"],
                "seed": document["seed"],
                "flows_generated": swarm["flows_generated"],
                "flows_analyzed": swarm["flows_analyzed"],
                "detected": swarm["detected"],
                "missed": swarm["missed"],
                "dropped": swarm["dropped"],
                "detection_rate": (
                    swarm["detected"] / malicious_analyzed if malicious_analyzed else 0.0
                ),
                "mean_latency_ms": swarm["mean_latency_ms"],
                "energy_j": swarm["energy_j"],
                "comm_bytes": swarm["comm_bytes"],
                "impl_switches": swarm["impl_switches"],
            }
        )
    return rows


def write_comparison_csv(rows: Sequence[Mapping], path: Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(COMPARISON_COLUMNS)
        for row in rows:
            writer.writerow([_cell(row[c]) for c in COMPARISON_COLUMNS])


def render_comparison_figure(rows: Sequence[Mapping], path: Path) -> Path:
    """Bar chart of detection rate and energy across runs."""
    path = Path(path)
    labels = [str(row["run"]) for row in rows]
    fig, (ax_rate, ax_energy) = plt.subplots(1, 2, figsize=(10, 4.5))
    positions = range(len(rows))
    ax_rate.bar(positions, [row["detection_rate"] for row in rows], color="#2c7fb8")
    ax_rate.set_ylabel("detection rate")
    ax_rate.set_ylim(0.0, 1.0)
    ax_energy.bar(positions, [row["energy_j"] for row in rows], color="#d95f0e")
    ax_energy.set_ylabel("energy (J)")
    for ax in (ax_rate, ax_energy):
        ax.set_xticks(list(positions))
        ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
        ax.grid(True, axis="y", alpha=0.4)
    fig.tight_layout()
    fig.savefig(path, bbox_inches="tight", metadata=_PNG_METADATA)
    plt.close(fig)
    return path
