"""Renders a protocol run directory into human-facing artifacts.

Output: report.md with metric tables, summary.csv for spreadsheets, and
two PNG figures (mean accuracy per model, pairwise p-value grid). All
inputs come from the JSON files a protocol run leaves behind, so a
report can be rebuilt at any time without re-running any model.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  backend must be set first

from .errors import DataError  # noqa: E402
from .evaluation import MODEL_ORDER  # noqa: E402

METRIC_NAMES = ("accuracy", "precision", "recall", "f1")


def load_protocol_dir(protocol_dir):
    protocol_dir = Path(protocol_dir)
    manifest_path = protocol_dir / "protocol.json"
    if not manifest_path.exists():
        raise DataError(f"{protocol_dir} has no protocol.json; "
                        "was this directory produced by an evaluation run?")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    summaries = {}
    for path in sorted((protocol_dir / "summary").glob("*.json")):
        summary = json.loads(path.read_text(encoding="utf-8"))
        summaries[summary["model"]] = summary
    if not summaries:
        raise DataError(f"{protocol_dir}/summary holds no model summaries")
    pairwise = {}
    mcnemar_dir = protocol_dir / "mcnemar"
    if mcnemar_dir.exists():
        for path in sorted(mcnemar_dir.glob("*.json")):
            record = json.loads(path.read_text(encoding="utf-8"))
            pairwise[path.stem] = record
    return manifest, summaries, pairwise


def _ordered(summaries: dict) -> list[str]:
    known = [name for name in MODEL_ORDER if name in summaries]
    extra = sorted(set(summaries) - set(known))
    return known + extra


def _metric_table(summaries, block: str) -> list[str]:
    lines = ["| model | " + " | ".join(METRIC_NAMES) + " |",
             "|---" * 5 + "|"]
    for name in _ordered(summaries):
        entry = summaries[name][block]
        cells = " | ".join(
            f"{entry[m]:.4f} ({entry[m + '_exact']})" for m in METRIC_NAMES)
        lines.append(f"| {name} | {cells} |")
    return lines


def write_markdown(manifest, summaries, pairwise, out_dir: Path) -> Path:
    lines = ["# Detection protocol report", ""]
    lines.append(f"- corpus hash: `{manifest['corpus_hash']}`")
    lines.append(f"- configuration hash: `{manifest['config_hash']}`")
    lines.append(f"- seed {manifest['seed']}, "
                 f"{manifest['repeats']} repeat(s) x {manifest['k']} folds")
    lines.append(f"- models: {', '.join(manifest['models'])}")
    lines += ["", "![mean accuracy](accuracy.png)", ""]
    lines += ["## Mean over fold cells", ""]
    lines += _metric_table(summaries, "mean")
    lines += ["", "## Pooled over all test decisions", ""]
    lines += _metric_table(summaries, "pooled")
    if pairwise:
        lines += ["", "## Paired comparisons (McNemar)", "",
                  "![pairwise](pairwise.png)", "",
                  "| pair | b | c | method | p | significant |",
                  "|---|---|---|---|---|---|"]
        for key in sorted(pairwise):
            rec = pairwise[key]
            lines.append(
                f"| {rec['first']} vs {rec['second']} | {rec['b']} | "
                f"{rec['c']} | {rec['method']} | {rec['p_value']:.3g} | "
                f"{'yes' if rec['significant'] else 'no'} |")
    path = out_dir / "report.md"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_csv(summaries, out_dir: Path) -> Path:
    path = out_dir / "summary.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model"]
                        + [f"mean_{m}" for m in METRIC_NAMES]
                        + [f"pooled_{m}" for m in METRIC_NAMES])
        for name in _ordered(summaries):
            summary = summaries[name]
            writer.writerow(
                [name]
                + [repr(summary["mean"][m]) for m in METRIC_NAMES]
                + [repr(summary["pooled"][m]) for m in METRIC_NAMES])
    return path


def plot_accuracy(summaries, out_dir: Path) -> Path:
    names = _ordered(summaries)
    means = [summaries[n]["mean"]["accuracy"] for n in names]
    spans = []
    for n in names:
        accs = [c["accuracy"] for c in summaries[n]["cells"]]
        mean = summaries[n]["mean"]["accuracy"]
        spans.append((mean - min(accs), max(accs) - mean))
    fig, ax = plt.subplots(figsize=(8, 0.45 * len(names) + 1.2))
    y = range(len(names))
    ax.barh(y, means, xerr=list(zip(*spans)) if spans else None,
            color="#4878a8", capsize=3)
    ax.set_yticks(list(y), names)
    ax.invert_yaxis()
    ax.set_xlim(0.0, 1.0)
    ax.set_xlabel("accuracy (mean over fold cells, bars span cell range)")
    ax.axvline(0.5, color="#999999", linestyle=":", linewidth=1)
    for i, value in enumerate(means):
        ax.text(value + 0.01, i, f"{value:.3f}", va="center", fontsize=8)
    fig.tight_layout()
    path = out_dir / "accuracy.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_pairwise(pairwise, summaries, out_dir: Path) -> Path:
    names = _ordered(summaries)
    index = {n: i for i, n in enumerate(names)}
    grid = [[None] * len(names) for _ in names]
    for rec in pairwise.values():
        if rec["first"] in index and rec["second"] in index:
            i, j = index[rec["first"]], index[rec["second"]]
            grid[i][j] = grid[j][i] = rec
    fig, ax = plt.subplots(
        figsize=(0.6 * len(names) + 2, 0.6 * len(names) + 1.5))
    values = [[1.0 if cell is None else cell["p_value"] for cell in row]
              for row in grid]
    image = ax.imshow(values, vmin=0.0, vmax=1.0, cmap="RdYlGn_r")
    ax.set_xticks(range(len(names)), names, rotation=90, fontsize=7)
    ax.set_yticks(range(len(names)), names, fontsize=7)
    for i in range(len(names)):
        for j in range(len(names)):
            cell = grid[i][j]
            if i == j or cell is None:
                continue
            mark = "*" if cell["significant"] else ""
            ax.text(j, i, f"{cell['p_value']:.2g}{mark}", ha="center",
                    va="center", fontsize=6)
    fig.colorbar(image, ax=ax, label="McNemar p-value")
    ax.set_title("paired comparisons (* significant at 0.05)", fontsize=9)
    fig.tight_layout()
    path = out_dir / "pairwise.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_report(protocol_dir, out_dir) -> dict:
    """Builds every artifact; returns name-to-path for the CLI to list."""
    manifest, summaries, pairwise = load_protocol_dir(protocol_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "markdown": write_markdown(manifest, summaries, pairwise, out_dir),
        "csv": write_csv(summaries, out_dir),
        "accuracy_figure": plot_accuracy(summaries, out_dir),
    }
    if pairwise:
        paths["pairwise_figure"] = plot_pairwise(pairwise, summaries,
                                                 out_dir)
    return paths
