#!/usr/bin/env python3
"""Plot the CSV files written by `oqw sweep` and `oqw relax`.

    python3 scripts/plot_runs.py out/ [-o figure.png]

Draws whichever of sweep.csv, branches.csv, relax.csv and marginals.csv
exist in the directory.
"""

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def plot_sweep(ax_re, ax_im, sweep, branches):
    if branches is not None:
        for col in branches.columns:
            if col.startswith("re_branch"):
                ax_re.plot(branches["beta"], branches[col], color="0.8", lw=0.8)
            elif col.startswith("im_branch"):
                ax_im.plot(branches["beta"], branches[col], color="0.8", lw=0.8)
    for k, style in (("2", "-"), ("3", "--")):
        ax_re.plot(sweep["beta"], sweep[f"re_lambda{k}"], style, label=f"mode {k}")
        ax_im.plot(sweep["beta"], sweep[f"im_lambda{k}"], style, label=f"mode {k}")
    ax_re.set_ylabel("Re λ")
    ax_im.set_ylabel("Im λ")
    ax_im.set_xlabel("β")
    ax_re.legend()


def plot_relax(ax, relax, title):
    cols = [c for c in relax.columns if c.startswith("p_")]
    target = 1.0 / len(cols)
    for c in cols:
        resid = (relax[c] - target).abs().clip(lower=1e-17)
        ax.semilogy(relax["step"], resid, label=c)
    ax.set_xlabel("step")
    ax.set_ylabel("|p - 1/N|")
    ax.set_title(title)
    ax.legend(fontsize="small")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("run_dir", type=Path)
    parser.add_argument("-o", "--output", type=Path, default=None)
    args = parser.parse_args()

    def load(name):
        path = args.run_dir / name
        return pd.read_csv(path) if path.exists() else None

    sweep, branches = load("sweep.csv"), load("branches.csv")
    relax, marg = load("relax.csv"), load("marginals.csv")

    panels = []
    if sweep is not None:
        panels += ["sweep_re", "sweep_im"]
    if relax is not None:
        panels.append("relax")
    if marg is not None:
        panels.append("marginals")
    if not panels:
        sys.exit(f"no known CSV files in {args.run_dir}")

    fig, axes = plt.subplots(len(panels), 1, figsize=(6, 3 * len(panels)), squeeze=False)
    axes = dict(zip(panels, axes[:, 0]))
    if sweep is not None:
        plot_sweep(axes["sweep_re"], axes["sweep_im"], sweep, branches)
    if relax is not None:
        plot_relax(axes["relax"], relax, "relax.csv")
    if marg is not None:
        plot_relax(axes["marginals"], marg, "marginals.csv")

    fig.tight_layout()
    out = args.output or args.run_dir / "plot.png"
    fig.savefig(out, dpi=150)
    print(out)


if __name__ == "__main__":
    main()
