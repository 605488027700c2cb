#!/usr/bin/env python3
"""Turn experiment CSVs into figures.

Usage: python scripts/plot_csv.py RUN_DIR [RUN_DIR ...]

Recognizes the CSVs the CLI emits (decay curves, gap scans, expectation
trajectories, cone surfaces) by their headers and writes one PNG per file
next to the input.
"""

import pathlib
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def read_csv(path):
    header = None
    rows = []
    for line in path.read_text().splitlines():
        if line.startswith("#") or not line.strip():
            continue
        if header is None:
            header = line.split(",")
            continue
        rows.append(line.split(","))
    cols = {
        name: np.array([_maybe_float(r[i]) for r in rows])
        for i, name in enumerate(header)
    }
    return cols


def _maybe_float(cell):
    try:
        return float(cell)
    except ValueError:
        return np.nan


def plot_file(path: pathlib.Path) -> None:
    cols = read_csv(path)
    fig, ax = plt.subplots(figsize=(5, 3.4))
    if {"x", "value"} <= set(cols):
        ax.semilogy(cols["x"], np.abs(cols["value"]) + 1e-300, "o-", label="measured")
        if "envelope_fit" in cols and np.isfinite(cols["envelope_fit"]).any():
            ax.semilogy(cols["x"], cols["envelope_fit"], "--", label="power-law fit")
        ax.set_xlabel("radius")
        ax.set_ylabel("operator norm")
        ax.legend()
    elif {"s", "gap"} <= set(cols):
        ax.plot(cols["s"], cols["gap"], "o-")
        ax.set_xlabel("s")
        ax.set_ylabel("spectral gap")
    elif {"s", "omega_approx"} <= set(cols):
        ax.plot(cols["s"], cols["omega_approx"], "o-", label="truncated evolution")
        if np.isfinite(cols.get("omega_oracle", np.array(np.nan))).any():
            ax.plot(cols["s"], cols["omega_oracle"], "x--", label="exact ground state")
        ax.set_xlabel("s")
        ax.set_ylabel("expectation")
        ax.legend()
    elif {"t", "distance", "comm_norm"} <= set(cols):
        for d in np.unique(cols["distance"]):
            mask = cols["distance"] == d
            ax.semilogy(cols["t"][mask], cols["comm_norm"][mask] + 1e-300,
                        "o-", label=f"d={int(d)}")
        ax.set_xlabel("t")
        ax.set_ylabel("commutator norm")
        ax.legend(fontsize=7)
    elif {"s", "projector_error"} <= set(cols):
        ax.semilogy(cols["s"], cols["projector_error"] + 1e-300, "-")
        ax.set_xlabel("s")
        ax.set_ylabel("projector transport error")
    else:
        plt.close(fig)
        return
    ax.set_title(path.stem)
    fig.tight_layout()
    out = path.with_suffix(".png")
    fig.savefig(out, dpi=150)
    plt.close(fig)
    print(f"wrote {out}")


def main() -> None:
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    for run_dir in sys.argv[1:]:
        for path in sorted(pathlib.Path(run_dir).glob("*.csv")):
            plot_file(path)


if __name__ == "__main__":
    main()
