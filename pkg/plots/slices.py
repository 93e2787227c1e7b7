#!/usr/bin/env python3
"""Side-by-side mid-plane slices of the exact and reconstructed source.

Both panels share one color scale spanning the joint data range.

Usage: slices.py --truth q_dagger.bin --recon q_alpha.bin --out fig.png
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import numpy as np
from common import read_field


def midplane(values: np.ndarray) -> np.ndarray:
    if values.ndim == 3:
        return values[:, :, values.shape[2] // 2]
    return values


def build_figure(truth: np.ndarray, recon: np.ndarray, side: float):
    import matplotlib.pyplot as plt

    a, b = midplane(truth), midplane(recon)
    vmin = min(a.min(), b.min())
    vmax = max(a.max(), b.max())
    if vmin == vmax:
        vmin, vmax = vmin - 1e-12, vmax + 1e-12
    extent = [-side / 2, side / 2, -side / 2, side / 2]
    fig, axes = plt.subplots(1, 2, figsize=(8.4, 3.8))
    for ax, img, title in zip(axes, (a, b), ("exact", "reconstruction")):
        im = ax.imshow(img.T, origin="lower", vmin=vmin, vmax=vmax, extent=extent)
        ax.set_title(title)
    fig.colorbar(im, ax=axes, shrink=0.85)
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--truth", required=True)
    parser.add_argument("--recon", required=True)
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    truth, meta_t = read_field(args.truth)
    recon, meta_r = read_field(args.recon)
    if truth.shape != recon.shape:
        parser.error(f"field shapes differ: {truth.shape} vs {recon.shape}")
    fig = build_figure(truth, recon, meta_t["side"])
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
