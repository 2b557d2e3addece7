"""Report rendering: aligned text tables, per-query TSV exports, and PNG
figures. Figures always use the Agg backend so reports render on headless
machines."""

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .errors import ConfigError
from .evaluation import EvalReport

__all__ = [
    "METRIC_LABELS",
    "format_summary_table",
    "write_per_query_tsv",
    "hard_topic_ids",
    "metric_deltas",
    "format_delta_table",
    "write_delta_tsv",
    "render_means_figure",
    "render_delta_figure",
    "render_histogram_figure",
]

METRIC_LABELS = {"ndcg10": "NDCG@10", "map": "MAP", "r1000": "R@1000"}
_METRICS = tuple(METRIC_LABELS)


def _fmt(value: float | None, mark: str = "") -> str:
    if value is None:
        return "NA"
    return f"{value:.4f}{mark}"


def format_summary_table(rows, improved=None) -> str:
    """One line per run. ``rows`` is a list of (label, EvalReport);
    ``improved`` maps a label to the metric names significantly better
    than the baseline, shown with the customary '+' suffix."""
    improved = improved or {}
    width = max([len("run")] + [len(label) for label, _ in rows]) + 2
    header = "run".ljust(width) + "".join(
        METRIC_LABELS[m].rjust(10) for m in _METRICS
    ) + "  queries"
    lines = [header]
    for label, report in rows:
        cells = []
        for metric in _METRICS:
            mark = "+" if metric in improved.get(label, ()) else ""
            cells.append(_fmt(report.means.get(metric), mark).rjust(10))
        lines.append(label.ljust(width) + "".join(cells) + f"  {report.num_queries:>7}")
    return "\n".join(lines)


def write_per_query_tsv(path, report: EvalReport) -> None:
    lines = ["qid\tndcg10\tmap\tr1000"]
    for qid in sorted(report.per_query):
        row = report.per_query[qid]
        lines.append(qid + "\t" + "\t".join(_fmt(row[m]) for m in _METRICS))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def hard_topic_ids(report: EvalReport, fraction: float = 0.2) -> list[str]:
    """The bottom ``fraction`` of queries by NDCG@10, ties broken by qid;
    at least one query is always selected."""
    if not 0.0 < fraction <= 1.0:
        raise ConfigError(f"fraction must be in (0, 1], got {fraction}")
    ordered = sorted(
        report.per_query, key=lambda qid: (report.per_query[qid]["ndcg10"], qid)
    )
    count = max(1, math.floor(len(ordered) * fraction))
    return ordered[:count]


def metric_deltas(report_a: EvalReport, report_b: EvalReport, qids) -> dict[str, dict]:
    """Per-query metric differences run_b - run_a, None when either side
    is undefined."""
    out = {}
    for qid in qids:
        row_a = report_a.per_query[qid]
        row_b = report_b.per_query[qid]
        out[qid] = {
            m: None if row_a[m] is None or row_b[m] is None else row_b[m] - row_a[m]
            for m in _METRICS
        }
    return out


def _delta_means(deltas: dict[str, dict]) -> dict[str, float | None]:
    means = {}
    for metric in _METRICS:
        values = [row[metric] for row in deltas.values() if row[metric] is not None]
        means[metric] = math.fsum(values) / len(values) if values else None
    return means


def format_delta_table(deltas: dict[str, dict]) -> str:
    width = max([len("qid")] + [len(qid) for qid in deltas]) + 2
    header = "qid".ljust(width) + "".join(
        ("d" + METRIC_LABELS[m]).rjust(10) for m in _METRICS
    )
    lines = [header]
    for qid in sorted(deltas):
        cells = "".join(
            (_fmt(deltas[qid][m], "") if deltas[qid][m] is None else f"{deltas[qid][m]:+.4f}").rjust(10)
            for m in _METRICS
        )
        lines.append(qid.ljust(width) + cells)
    means = _delta_means(deltas)
    lines.append(
        "mean".ljust(width)
        + "".join(
            ("NA" if means[m] is None else f"{means[m]:+.4f}").rjust(10)
            for m in _METRICS
        )
    )
    return "\n".join(lines)


def write_delta_tsv(path, deltas: dict[str, dict]) -> None:
    lines = ["qid\td_ndcg10\td_map\td_r1000"]
    for qid in sorted(deltas):
        lines.append(
            qid
            + "\t"
            + "\t".join(
                "NA" if deltas[qid][m] is None else f"{deltas[qid][m]:+.6f}"
                for m in _METRICS
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def render_means_figure(path, rows) -> None:
    """Grouped bars, one group per metric, one bar per run."""
    labels = [label for label, _ in rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    group_width = 0.8
    bar_width = group_width / max(1, len(rows))
    for i, (label, report) in enumerate(rows):
        xs = [j + i * bar_width for j in range(len(_METRICS))]
        ys = [report.means.get(m, 0.0) for m in _METRICS]
        ax.bar(xs, ys, width=bar_width, label=label)
    ax.set_xticks([j + group_width / 2 - bar_width / 2 for j in range(len(_METRICS))])
    ax.set_xticklabels([METRIC_LABELS[m] for m in _METRICS])
    ax.set_ylabel("mean score")
    ax.set_ylim(0.0, 1.05)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_delta_figure(path, deltas: dict[str, dict], metric: str = "ndcg10") -> None:
    """Horizontal per-query delta bars for one metric."""
    qids = sorted(deltas)
    values = [deltas[qid][metric] or 0.0 for qid in qids]
    fig, ax = plt.subplots(figsize=(7, max(2.5, 0.3 * len(qids))))
    colors = ["tab:green" if v >= 0 else "tab:red" for v in values]
    ax.barh(range(len(qids)), values, color=colors)
    ax.set_yticks(range(len(qids)))
    ax.set_yticklabels(qids, fontsize=8)
    ax.invert_yaxis()
    ax.axvline(0.0, color="black", linewidth=0.8)
    ax.set_xlabel(f"delta {METRIC_LABELS[metric]}")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_histogram_figure(path, report: EvalReport, metric: str = "ndcg10") -> None:
    values = [
        row[metric] for row in report.per_query.values() if row[metric] is not None
    ]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(values, bins=min(20, max(5, len(values))), range=(0.0, 1.0), edgecolor="black")
    ax.set_xlabel(METRIC_LABELS[metric])
    ax.set_ylabel("queries")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
