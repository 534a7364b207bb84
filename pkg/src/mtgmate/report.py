"""Figures and CSV tables: board size against n, and how forced play is."""
from __future__ import annotations

import csv
from collections import Counter
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import compiler as C  # noqa: E402
from . import harness as H  # noqa: E402
from . import tm as T  # noqa: E402


def linear_family(n):
    """E y1 A y2 ... : (x - y1 - ... - yn = 0), one sentence per n."""
    quants = " ".join(f"{'E' if i % 2 == 0 else 'A'} y{i + 1}" for i in range(n))
    poly = "x" + "".join(f" - y{i + 1}" for i in range(n))
    return T.parse_sentence(f"{quants} : ({poly} = 0)")


def size_rows(max_n=16, family=linear_family):
    rows = []
    for n in range(1, max_n + 1):
        sentence = family(n)
        state = C.compile_mate_in_n(sentence)
        rep = C.build_report(state)
        rows.append({
            "n": n,
            "sentence": sentence.render(),
            "permanents": rep.total_permanents,
            "watchers": rep.watcher_count,
            "tape_cells": rep.tape_length,
            "gadget_permanents": rep.total_permanents - rep.watcher_count - rep.tape_length,
            "states": rep.state_count,
            "alphabet": rep.alphabet_size,
        })
    return rows


def linear_fit(xs, ys):
    """Least-squares line; returns (slope, intercept, r_squared)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - float((resid ** 2).sum()) / ss_tot
    return float(slope), float(intercept), r2


def forcedness_counts(cycles=200):
    """Legal-action counts at every decision point: bisimulation runs plus one mate board."""
    counts = Counter()
    words = {"unary-incrementer": "1" * cycles, "parity-marker": "10" * (cycles // 2), "bouncer": "S"}
    for name in ("unary-incrementer", "parity-marker", "three-state-loop", "bouncer"):
        m = T.REFERENCE_MACHINES[name]()
        rep = H.verify_bisimulation(m, T.initial_config(m, words.get(name, "")), cycles)
        for k, v in rep.histogram.items():
            counts[("post-activation", int(k))] += v
    v = H.run_forced(C.compile_mate_in_n("E y1 A y2 : (y1*y2 - y2 = 0)"), [1, 3], x_bound=4)
    for k, c in v.stats.hist_pre.items():
        counts[("pre-activation", k)] += c
    for k, c in v.stats.hist_post.items():
        counts[("post-activation", k)] += c
    return counts


def _write_csv(path, rows, fields):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for r in rows:
            w.writerow(r)


def write_report(out_dir, max_n=16, cycles=200):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rows = size_rows(max_n)
    _write_csv(out / "size_vs_n.csv", rows, list(rows[0]))
    ns = [r["n"] for r in rows]
    sizes = [r["permanents"] for r in rows]
    slope, intercept, r2 = linear_fit(ns, sizes)
    _write_csv(out / "size_fit.csv", [{"slope": f"{slope:.6f}", "intercept": f"{intercept:.6f}",
                                       "r_squared": f"{r2:.6f}"}], ["slope", "intercept", "r_squared"])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ns, sizes, "o", label="compiled board")
    grid = np.linspace(min(ns), max(ns), 100)
    ax.plot(grid, slope * grid + intercept, "-", label=f"fit {slope:.1f} n + {intercept:.0f} (R² = {r2:.4f})")
    ax.set_xlabel("n (quantified inputs)")
    ax.set_ylabel("permanents on the battlefield")
    ax.set_title("Board size of compiled mate-in-n boards")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "size_vs_n.png", dpi=120)
    plt.close(fig)

    counts = forcedness_counts(cycles)
    frows = [{"phase": phase, "legal_actions": k, "decision_points": v}
             for (phase, k), v in sorted(counts.items())]
    _write_csv(out / "forcedness.csv", frows, ["phase", "legal_actions", "decision_points"])
    fig, ax = plt.subplots(figsize=(6, 4))
    phases = sorted({p for p, _ in counts})
    ks = sorted({k for _, k in counts})
    width = 0.8 / max(len(phases), 1)
    for i, phase in enumerate(phases):
        xs = [k + (i - (len(phases) - 1) / 2) * width for k in ks]
        ax.bar(xs, [counts.get((phase, k), 0) for k in ks], width=width, label=phase)
    ax.set_yscale("log")
    ax.set_xticks(ks)
    ax.set_xlabel("legal actions at the decision point")
    ax.set_ylabel("decision points (log scale)")
    ax.set_title("Forcedness histogram")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "forcedness.png", dpi=120)
    plt.close(fig)

    return {"rows": rows, "fit": {"slope": slope, "intercept": intercept, "r_squared": r2},
            "forcedness": frows,
            "files": sorted(p.name for p in out.iterdir())}
