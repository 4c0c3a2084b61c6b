#!/usr/bin/env python3
"""Scatter-plot the projection CSVs written by `dqlap project`.

Usage:
    plot_projection.py <projection_truth.csv> [projection_predicted.csv] [out.png]

Convenience only; any tool that reads x,y,label CSV works just as well.
"""

import csv
import sys


def read_points(path):
    xs, ys, labels = [], [], []
    with open(path, newline="") as handle:
        for row in csv.DictReader(handle):
            xs.append(float(row["x"]))
            ys.append(float(row["y"]))
            labels.append(int(row["label"]))
    return xs, ys, labels


def main():
    if len(sys.argv) < 2:
        print(__doc__)
        return 1

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    files = [p for p in sys.argv[1:] if p.endswith(".csv")]
    out = next((p for p in sys.argv[1:] if not p.endswith(".csv")), "projection.png")

    fig, axes = plt.subplots(1, len(files), figsize=(6 * len(files), 5), squeeze=False)
    for ax, path in zip(axes[0], files):
        xs, ys, labels = read_points(path)
        for label, color, name in ((1, "gold", "normal"), (0, "purple", "fault")):
            sel = [i for i, l in enumerate(labels) if l == label]
            ax.scatter([xs[i] for i in sel], [ys[i] for i in sel], s=6, c=color,
                       label=name, alpha=0.7)
        ax.set_title(path.rsplit("/", 1)[-1])
        ax.set_xlabel("component 1")
        ax.set_ylabel("component 2")
        ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
