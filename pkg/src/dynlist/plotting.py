"""Figure rendering for the CLI report paths.

Figures are written to files next to the machine-readable output; there
is no interactive display, so the Agg backend is forced before pyplot is
touched.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def save_bandwidth_figure(trace, path) -> None:
    """Per-round peak message size against the protocol's bit budget."""
    rounds = [rep.round_index for rep in trace.reports]
    bits = [rep.max_message_bits for rep in trace.reports]
    bounds = [rep.verdict.bound_bits for rep in trace.reports if rep.verdict is not None]

    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.step(rounds, bits, where="mid", label="max message bits")
    if bounds:
        ax.axhline(bounds[0], color="crimson", linestyle="--", linewidth=1,
                   label=f"bound ({bounds[0]} bits)")
    ax.set_xlabel("round")
    ax.set_ylabel("bits")
    ax.set_title(f"peak per-link bandwidth, protocol={trace.protocol}")
    ax.set_ylim(bottom=0)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_bench_figure(rows: list[dict], path) -> None:
    """Throughput per protocol across initial graph sizes."""
    fig, ax = plt.subplots(figsize=(7, 4))
    by_proto: dict[str, list[dict]] = {}
    for row in rows:
        by_proto.setdefault(row["protocol"], []).append(row)
    for proto, group in sorted(by_proto.items()):
        group = sorted(group, key=lambda r: r["n0"])
        ax.plot([r["n0"] for r in group], [r["rounds_per_sec"] for r in group],
                marker="o", label=proto)
    ax.set_xlabel("initial nodes")
    ax.set_ylabel("rounds / second")
    ax.set_title("simulation throughput (verification included)")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
