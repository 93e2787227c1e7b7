#!/usr/bin/env python3
"""Error-vs-noise curves with fitted logarithmic rates.

One panel per phantom; x axis log(delta), y axis log(error); curves
grouped by error norm (color) and wave number (marker).  Fitted lines
``exp(c) * log(3 + delta^-2)^p`` from rates.csv are overlaid with the
slope annotated.

Usage: rates.py --records records.csv --rates rates.csv --out fig4.png
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import numpy as np
from common import phantom_label, read_rates, read_records

NORM_COLOR = {"L2": "tab:blue", "H1": "tab:red"}
KAPPA_MARKERS = ["o", "s", "^", "d", "v", "*"]


def build_figure(records: list[dict], rates: list[dict]):
    import matplotlib.pyplot as plt

    phantoms = sorted({phantom_label(r) for r in records})
    kappas = sorted({r["kappa"] for r in records})
    markers = {k: KAPPA_MARKERS[i % len(KAPPA_MARKERS)] for i, k in enumerate(kappas)}
    fit_by_key = {(f["norm"], f["phantom"], f["kappa"]): f for f in rates}

    ncols = max(len(phantoms), 1)
    fig, axes = plt.subplots(1, ncols, figsize=(4.2 * ncols, 3.6), squeeze=False)
    for ax, phantom in zip(axes[0], phantoms):
        for norm in sorted({"L2" if r["m_err"] == 0 else "H1" for r in records}):
            for kappa in kappas:
                group = [
                    r
                    for r in records
                    if phantom_label(r) == phantom
                    and ("L2" if r["m_err"] == 0 else "H1") == norm
                    and r["kappa"] == kappa
                    and r["disc_ok"]
                    and r["rel_error"] > 0
                ]
                if len(group) < 2:
                    if group:
                        warnings.warn(f"skipping {phantom}/{norm}/kappa={kappa}: fewer than 2 rows")
                    continue
                group.sort(key=lambda r: r["delta"])
                deltas = np.array([r["delta"] for r in group])
                errors = np.array([r["rel_error"] for r in group])
                ax.loglog(
                    deltas,
                    errors,
                    linestyle="none",
                    marker=markers[kappa],
                    color=NORM_COLOR.get(norm, "k"),
                    label=f"{norm}, $\\kappa$={kappa:g}",
                )
                fit = fit_by_key.get((norm, phantom, kappa))
                if fit is not None:
                    dd = np.geomspace(deltas.min(), deltas.max(), 100)
                    model = np.exp(fit["c"]) * np.log(3 + dd**-2.0) ** fit["p"]
                    ax.loglog(dd, model, "-", color=NORM_COLOR.get(norm, "k"), alpha=0.6)
                    ax.annotate(
                        f"p = {fit['p']:.2f}",
                        xy=(dd[len(dd) // 2], model[len(model) // 2]),
                        fontsize=8,
                        color=NORM_COLOR.get(norm, "k"),
                    )
        ax.set_title(phantom)
        ax.set_xlabel(r"noise level $\delta$")
        ax.set_ylabel("relative error")
        ax.legend(fontsize=7)
    fig.tight_layout()
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--records", required=True)
    parser.add_argument("--rates", required=True)
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    records = read_records(args.records)
    rates = read_rates(args.rates)
    fig = build_figure(records, rates)
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
