# SPDX-License-Identifier: Apache-2.0
"""Plot NMSE-vs-SNR curves from one or more sweep result CSVs.

Usage:
    python3 tools/plot_sweep.py out/results.csv [more.csv ...] [--out plot.png]

Curves are grouped by (solver, pilot, variant, kfd); per-group NMSE is the
linear-scale mean over samples and offsets at each SNR. Without matplotlib
the aggregated table is printed instead.
"""

import argparse
import csv
import math
import sys
from collections import defaultdict


def load_rows(paths):
    rows = []
    for path in paths:
        with open(path, newline="") as f:
            lines = [ln for ln in f if not ln.startswith("#")]
        for row in csv.DictReader(lines):
            if row["nmse_db"] == "nan" or int(row["offset"]) < 0:
                continue
            rows.append(row)
    return rows


def aggregate(rows):
    acc = defaultdict(lambda: [0.0, 0])
    for r in rows:
        group = (r["solver"], r["pilot"], r["variant"], r["kfd"])
        snr = float("inf") if r["snr_db"] == "inf" else float(r["snr_db"])
        a = acc[(group, snr)]
        a[0] += 10.0 ** (float(r["nmse_db"]) / 10.0)
        a[1] += 1
    curves = defaultdict(list)
    for (group, snr), (s, n) in sorted(acc.items()):
        curves[group].append((snr, 10.0 * math.log10(s / n)))
    return curves


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv", nargs="+")
    ap.add_argument("--out", default="nmse_vs_snr.png")
    args = ap.parse_args()

    curves = aggregate(load_rows(args.csv))
    if not curves:
        sys.exit("no plottable rows found")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not available; aggregated values:")
        for group, pts in curves.items():
            label = "/".join(group)
            for snr, nmse in pts:
                print(f"{label:40s} snr={snr:>6} dB  nmse={nmse:8.2f} dB")
        return

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for group, pts in curves.items():
        finite = [(s, v) for s, v in pts if math.isfinite(s)]
        if not finite:
            continue
        xs, ys = zip(*sorted(finite))
        ax.plot(xs, ys, marker="o", label="/".join(group))
    ax.set_xlabel("SNR [dB]")
    ax.set_ylabel("NMSE [dB]")
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
