#!/usr/bin/env python3
"""Plot regret curves and sample trajectories from a run's output directory.

Usage: plot_results.py OUT_DIR [--save DIR]

Reads OUT_DIR/regret.csv and OUT_DIR/trajectories.csv and writes
regret.png and trajectories.png (to --save, default OUT_DIR).
"""

import argparse
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def plot_regret(out_dir: pathlib.Path, save_dir: pathlib.Path) -> None:
    df = pd.read_csv(out_dir / "regret.csv")
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for algo, color in (("onm", "tab:blue"), ("ogd", "tab:orange")):
        mean = df[f"{algo}_regret_mean"]
        if mean.isna().all():
            continue
        se = df[f"{algo}_regret_stderr"]
        ax.plot(df["t"], mean, color=color, label=algo.upper())
        ax.fill_between(df["t"], mean - 2 * se, mean + 2 * se, color=color, alpha=0.2)
    ax.set_xlabel("round t")
    ax.set_ylabel("cumulative dynamic regret")
    ax.set_yscale("log")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(save_dir / "regret.png", dpi=150)
    plt.close(fig)


def plot_trajectories(out_dir: pathlib.Path, save_dir: pathlib.Path) -> None:
    df = pd.read_csv(out_dir / "trajectories.csv")
    fig, ax = plt.subplots(figsize=(6, 6))
    first = True
    for rep, group in df.groupby("replication"):
        ax.plot(group["target_x"], group["target_y"], "k--", lw=1,
                label="target" if first else None)
        ax.plot(group["onm_x"], group["onm_y"], "tab:blue", lw=1,
                label="ONM" if first else None)
        if not group["ogd_x"].isna().all():
            ax.plot(group["ogd_x"], group["ogd_y"], "tab:orange", lw=1,
                    label="OGD" if first else None)
        first = False
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_aspect("equal", adjustable="datalim")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(save_dir / "trajectories.png", dpi=150)
    plt.close(fig)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out_dir", type=pathlib.Path)
    parser.add_argument("--save", type=pathlib.Path, default=None)
    args = parser.parse_args()
    save_dir = args.save or args.out_dir
    save_dir.mkdir(parents=True, exist_ok=True)
    plot_regret(args.out_dir, save_dir)
    plot_trajectories(args.out_dir, save_dir)
    print(f"wrote {save_dir / 'regret.png'} and {save_dir / 'trajectories.png'}")


if __name__ == "__main__":
    main()
