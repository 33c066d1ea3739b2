"""Analysis report: a delimited summary plus a rendered state diagram.

`write_report` takes a finished pipeline run and produces two files in the
output directory: `report.csv` with the structural and verification
results (one row per fact, one per spec leaf), and `states.png`, the local
transition system drawn with the computed phases as node colors.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import networkx as nx

from .phasing import PhaseResult
from .verify import PipelineResult


def report_rows(pr: PipelineResult) -> list[tuple[str, str]]:
    rows: list[tuple[str, str]] = [("mode", pr.mode)]
    if pr.ts is not None:
        rows.append(("process", pr.ts.core.name))
        rows.append(("states", str(len(pr.ts.states))))
    if pr.phases is not None:
        rows.append(("phases", str(pr.phases)))
    if pr.cutoff is not None:
        rows.append(("cutoff", str(pr.cutoff.cutoff)))
        for al in pr.cutoff.per_leaf:
            rows.append((f"leaf {al.leaf.render()}",
                         f"cutoff {al.cutoff}" if al.amenable
                         else "not amenable"))
    if pr.verdict is not None:
        v = pr.verdict
        rows += [("result", v.result), ("n", str(v.n)),
                 ("states explored", str(v.states_explored)),
                 ("wall seconds", f"{v.wall_seconds:.3f}")]
    for d in pr.diagnostics:
        rows.append((f"{d.severity}[{d.code}]", d.message))
    return rows


def _phase_colors(ph: PhaseResult, n_states: int, crash_idx: int):
    cmap = plt.colormaps["tab10"]
    colors = ["#dddddd"] * n_states
    for i, phase in enumerate(ph.phases):
        c = cmap(i % 10)
        for s in phase:
            colors[s] = c
    colors[crash_idx] = "#555555"
    return colors


def draw_states(ts, ph: PhaseResult, path: Path) -> None:
    """Render the local transition system, one node per state, phase-colored."""
    g = nx.MultiDiGraph()
    for i in range(len(ts.states)):
        g.add_node(i)
    labels: dict[tuple[int, int], list[str]] = {}
    for t in ts.transitions:
        g.add_edge(t.src, t.dst)
        labels.setdefault((t.src, t.dst), []).append(t.label.render())

    pos = nx.spring_layout(g, seed=7)
    fig, ax = plt.subplots(figsize=(max(6, len(ts.states)), max(5, len(ts.states) * 0.8)))
    nx.draw_networkx_nodes(
        g, pos, ax=ax, node_size=1800,
        node_color=_phase_colors(ph, len(ts.states), ts.crash_idx))
    nx.draw_networkx_edges(g, pos, ax=ax, node_size=1800,
                           connectionstyle="arc3,rad=0.12")
    nx.draw_networkx_labels(
        g, pos, ax=ax, font_size=7,
        labels={i: ts.render_state(i) for i in range(len(ts.states))})
    nx.draw_networkx_edge_labels(
        g, pos, ax=ax, font_size=6,
        edge_labels={k: "\n".join(sorted(set(v))) for k, v in labels.items()})
    ax.set_title(f"{ts.core.name}: local states, colored by phase")
    ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_report(pr: PipelineResult, ph: PhaseResult | None,
                 outdir: str | Path) -> list[Path]:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    csv_path = out / "report.csv"
    with open(csv_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["key", "value"])
        w.writerows(report_rows(pr))
    written.append(csv_path)

    if pr.ts is not None and ph is not None:
        png_path = out / "states.png"
        draw_states(pr.ts, ph, png_path)
        written.append(png_path)
    return written
