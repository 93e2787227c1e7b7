#!/usr/bin/env python3
"""Reconstructions of one ground truth across wave numbers, one panel each.

All panels share a single color scale so resolution differences are
directly comparable.

Usage: kappa_panels.py --fields q_k7.bin q_k14.bin --labels 7 14 --out fig5.png
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

from common import read_field
from slices import midplane


def build_figure(fields, labels, side: float):
    import matplotlib.pyplot as plt

    imgs = [midplane(f) for f in fields]
    vmin = min(i.min() for i in imgs)
    vmax = max(i.max() for i in imgs)
    if vmin == vmax:
        vmin, vmax = vmin - 1e-12, vmax + 1e-12
    extent = [-side / 2, side / 2, -side / 2, side / 2]
    n = len(imgs)
    fig, axes = plt.subplots(1, n, figsize=(4.0 * n, 3.8), squeeze=False)
    for ax, img, label in zip(axes[0], imgs, labels):
        im = ax.imshow(img.T, origin="lower", vmin=vmin, vmax=vmax, extent=extent)
        ax.set_title(f"$\\kappa$ = {label}")
    fig.colorbar(im, ax=list(axes[0]), shrink=0.85)
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--fields", nargs="+", required=True)
    parser.add_argument("--labels", nargs="+", required=True)
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    if len(args.fields) != len(args.labels):
        parser.error("--fields and --labels must have the same length")
    fields, sides = [], []
    for path in args.fields:
        values, meta = read_field(path)
        fields.append(values)
        sides.append(meta["side"])
    fig = build_figure(fields, args.labels, sides[0])
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
