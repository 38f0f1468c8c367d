"""Report assembly and serialization: CSV rows, JSON aggregates, and the
matplotlib figure rendering used by the `report` CLI subcommand.

Reports are fully deterministic: no timestamps, sorted JSON keys, floats
serialized with shortest round-trip repr.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .estimator import rmse
from .wiping import HUMAN_BASELINE_ALPHA_PCT

ROWS_FILE = "rows.csv"
REPORT_FILE = "report.json"


@dataclass
class Report:
    kind: str
    rows: list
    aggregates: dict
    config: dict
    version: str
    extras: dict = field(default_factory=dict)


def _fnum(value) -> float:
    return float(value)


def _ok_rows(rows):
    return [r for r in rows if str(r.get("status", "ok")) == "ok"]


def compute_aggregates(kind: str, rows: list) -> dict:
    """Aggregate metrics from report rows.

    Accepts rows with numeric or string values so that aggregates can be
    recomputed bit-exactly from the serialized CSV.
    """
    if kind == "estimate":
        ok = _ok_rows(rows)
        errors = [_fnum(r["error_deg"]) for r in ok]
        agg = {
            "n_trials": len(rows),
            "n_failed": len(rows) - len(ok),
            "rmse_deg": rmse(errors) if errors else None,
            "mean_f_score": (float(np.mean([_fnum(r["f_score"]) for r in ok]))
                             if ok else None),
        }
        per_angle = {}
        for r in ok:
            per_angle.setdefault(str(_fnum(r["angle_deg"])), []).append(
                _fnum(r["error_deg"]))
        agg["per_angle_rmse_deg"] = {k: rmse(v) for k, v in sorted(per_angle.items())}
        return agg
    if kind == "wipe":
        alphas = [_fnum(r["alpha_pct"]) for r in rows]
        return {
            "n_trials": len(rows),
            "mean_alpha_pct": float(np.mean(alphas)) if alphas else None,
            "human_reference_alpha_pct": HUMAN_BASELINE_ALPHA_PCT,
            "n_lost_contact": sum(int(_fnum(r["lost_contact"])) for r in rows),
            "mean_in_band_fraction": (float(np.mean(
                [_fnum(r["in_band_fraction"]) for r in rows])) if rows else None),
        }
    if kind == "timing":
        successes = [r for r in rows if int(_fnum(r["success"]))]
        return {
            "n_cells": len(rows),
            "n_success": len(successes),
            "min_success_spray_s": (min(_fnum(r["spray_duration_s"])
                                        for r in successes) if successes else None),
            "min_success_capture_s": (min(_fnum(r["capture_budget_s"])
                                          for r in successes) if successes else None),
        }
    if kind == "background":
        ok = _ok_rows(rows)
        errors = [_fnum(r["error_deg"]) for r in ok]
        per_bg = {}
        for r in ok:
            per_bg.setdefault(str(r["background"]), []).append(
                _fnum(r["f_score_mean"]))
        return {
            "n_rows": len(rows),
            "n_failed": len(rows) - len(ok),
            "rmse_deg": rmse(errors) if errors else None,
            "mean_f_score_per_background": {k: float(np.mean(v))
                                            for k, v in sorted(per_bg.items())},
        }
    raise ValueError(f"unknown report kind {kind!r}")


def _cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_report(report: Report, outdir) -> None:
    """Write rows.csv, report.json and any extra trace files."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if report.rows:
        fields = list(report.rows[0].keys())
        with open(outdir / ROWS_FILE, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(fields)
            for row in report.rows:
                writer.writerow([_cell(row[k]) for k in fields])
    payload = {
        "kind": report.kind,
        "version": report.version,
        "config": report.config,
        "aggregates": report.aggregates,
        "n_rows": len(report.rows),
    }
    (outdir / REPORT_FILE).write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n")
    for name, traces in report.extras.items():
        with open(outdir / f"{name}.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["trial", "step", "value"])
            for trial, trace in enumerate(traces):
                for step, value in enumerate(trace):
                    writer.writerow([trial, step, repr(float(value))])


def read_rows(outdir) -> list:
    with open(Path(outdir) / ROWS_FILE, newline="") as fh:
        return list(csv.DictReader(fh))


def read_report_json(outdir) -> dict:
    return json.loads((Path(outdir) / REPORT_FILE).read_text())


def render_figures(outdir) -> list:
    """Render figures for a written report; returns the created paths."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    outdir = Path(outdir)
    meta = read_report_json(outdir)
    rows = read_rows(outdir) if (outdir / ROWS_FILE).exists() else []
    kind = meta["kind"]
    created = []

    def save(fig, name):
        path = outdir / name
        fig.savefig(path, dpi=120)
        plt.close(fig)
        created.append(path)

    if kind == "estimate":
        ok = _ok_rows(rows)
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for r in ok:
            if not r["trace"]:
                continue
            pairs = [p.split(":") for p in r["trace"].split(";")]
            offs = [float(a) for a, _ in pairs]
            lens = [float(b) for _, b in pairs]
            ax.plot(offs, lens, lw=0.8,
                    label=f"truth {float(r['angle_deg']):+.0f} deg, trial {r['trial']}")
        ax.set_xlabel("arc offset [deg]")
        ax.set_ylabel("measured footprint length [mm]")
        ax.set_title("Footprint length across the viewpoint sweep")
        if ok:
            ax.legend(fontsize=6, ncol=2)
        save(fig, "sweep_lengths.png")

        fig, ax = plt.subplots(figsize=(6, 4))
        errs = [float(r["error_deg"]) for r in ok]
        ax.bar(range(len(errs)), errs, color="steelblue")
        if meta["aggregates"].get("rmse_deg") is not None:
            ax.axhline(meta["aggregates"]["rmse_deg"], color="crimson", ls="--",
                       label=f"RMSE {meta['aggregates']['rmse_deg']:.2f} deg")
            ax.axhline(-meta["aggregates"]["rmse_deg"], color="crimson", ls="--")
            ax.legend()
        ax.set_xlabel("trial index")
        ax.set_ylabel("estimation error [deg]")
        save(fig, "errors.png")

    elif kind == "wipe":
        trace_path = outdir / "force_traces.csv"
        if trace_path.exists():
            fig, ax = plt.subplots(figsize=(7, 4))
            with open(trace_path, newline="") as fh:
                by_trial = {}
                for rec in csv.DictReader(fh):
                    by_trial.setdefault(rec["trial"], []).append(float(rec["value"]))
            for trial, values in by_trial.items():
                ax.plot(values, lw=0.8, label=f"trial {trial}")
            ax.axhspan(3.0, 8.0, color="green", alpha=0.12, label="force band")
            ax.set_xlabel("step")
            ax.set_ylabel("contact force [N]")
            ax.legend(fontsize=7)
            save(fig, "force_trace.png")

        fig, ax = plt.subplots(figsize=(5, 4))
        alphas = [float(r["alpha_pct"]) for r in rows]
        labels = [f"trial {r['trial']}" for r in rows]
        alphas.append(meta["aggregates"]["human_reference_alpha_pct"])
        labels.append("human ref")
        ax.bar(labels, alphas, color=["steelblue"] * len(rows) + ["gray"])
        ax.set_ylabel("wiped area [%]")
        save(fig, "alpha.png")

    elif kind == "timing":
        sprays = sorted({float(r["spray_duration_s"]) for r in rows})
        budgets = sorted({float(r["capture_budget_s"]) for r in rows})
        grid = np.zeros((len(sprays), len(budgets)))
        for r in rows:
            i = sprays.index(float(r["spray_duration_s"]))
            j = budgets.index(float(r["capture_budget_s"]))
            grid[i, j] = int(r["success"])
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.imshow(grid, cmap="RdYlGn", vmin=0, vmax=1, aspect="auto",
                  origin="lower")
        ax.set_xticks(range(len(budgets)), [f"{b:g}" for b in budgets])
        ax.set_yticks(range(len(sprays)), [f"{s:g}" for s in sprays])
        ax.set_xlabel("capture budget [s]")
        ax.set_ylabel("one-way spray duration [s]")
        ax.set_title("Timing grid (green = success)")
        save(fig, "timing_grid.png")

    elif kind == "background":
        ok = _ok_rows(rows)
        names = sorted({r["background"] for r in ok})
        fig, ax = plt.subplots(figsize=(7, 4))
        width = 0.8 / max(1, len(names))
        for k, name in enumerate(names):
            sub = [r for r in ok if r["background"] == name]
            xs = np.arange(len(sub)) + k * width
            ax.bar(xs, [float(r["f_score_mean"]) for r in sub], width,
                   label=Path(name).name)
        ax.set_ylabel("extraction F-score")
        ax.set_xlabel("angle index")
        ax.legend(fontsize=7)
        save(fig, "fscores.png")
    else:
        raise ConfigError(f"cannot render figures for report kind {kind!r}")

    return created
