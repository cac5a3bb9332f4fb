#!/usr/bin/env python3
"""Plot CSV output of the ptrguard CLI. Needs pandas and matplotlib.

  ptrguard spectrum --input data/barriers8.json --kmax 3.5 --points 4000 --out t.csv
  scripts/plot.py spectrum t.csv --ptrs ptrs.csv -o spectrum.png
"""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402


def spectrum(args, ax):
    t = pd.read_csv(args.csv)
    ax.plot(t["k"], t["T_N"], lw=1)
    if args.ptrs:
        for k in pd.read_csv(args.ptrs)["k"]:
            ax.axvline(k, color="k", ls=":", lw=0.6)
    ax.set_xlabel("k d")
    ax.set_ylabel("T")


def field(args, ax):
    f = pd.read_csv(args.csv)
    ax.plot(f["x"], f["abs_psi"], label="|psi|")
    ax.plot(f["x"], f["re_psi"], lw=0.8, label="Re psi")
    ax.plot(f["x"], f["im_psi"], lw=0.8, label="Im psi")
    ax.set_xlabel("x / d")
    ax.legend()


def sweep(args, ax):
    s = pd.read_csv(args.csv)
    s = s[s["one_minus_T"] > 0]
    ax.loglog(s["epsilon"], s["one_minus_T"], "o-", ms=3)
    slope = np.polyfit(np.log(s["epsilon"]), np.log(s["one_minus_T"]), 1)[0]
    ax.set_title(f"fitted slope {slope:.2f}")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("1 - T at the peak")


def ep(args, ax):
    e = pd.read_csv(args.csv)
    for s in ("a", "b"):
        ax.plot(e["epsilon"], e[f"re_k{s}"], label=f"Re k_{s}")
        ax.plot(e["epsilon"], e[f"im_k{s}"], ls="--", label=f"Im k_{s}")
    ax.set_xlabel("epsilon")
    ax.legend()


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("kind", choices=["spectrum", "field", "sweep", "ep"])
    p.add_argument("csv")
    p.add_argument("--ptrs", help="ptrs CSV, marked on a spectrum")
    p.add_argument("-o", "--output", default="plot.png")
    args = p.parse_args()
    fig, ax = plt.subplots(figsize=(7, 4))
    {"spectrum": spectrum, "field": field, "sweep": sweep, "ep": ep}[args.kind](args, ax)
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
