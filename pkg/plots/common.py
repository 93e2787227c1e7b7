"""Shared I/O helpers for the plotting scripts.

The scripts consume only the toolkit's documented file formats — the
records/rates CSVs and the little-endian float64 field dumps with JSON
sidecars — and never recompute any science.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import numpy as np

RECORD_FLOATS = ("R", "kappa", "delta", "error", "rel_error", "alpha_final", "wallclock_s")
RECORD_INTS = ("lambda", "m_penalty", "m_err", "N", "seed")


def read_records(path: str | Path) -> list[dict]:
    """records.csv rows with numeric fields parsed."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            for key in RECORD_FLOATS:
                row[key] = float(row[key])
            for key in RECORD_INTS:
                row[key] = int(row[key])
            row["disc_ok"] = row["disc_ok"] == "True"
            rows.append(row)
    return rows


def read_rates(path: str | Path) -> list[dict]:
    """rates.csv rows with numeric fields parsed."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            for key in ("kappa", "p", "c", "r2", "p_theory"):
                row[key] = float(row[key])
            rows.append(row)
    return rows


def read_field(path: str | Path) -> tuple[np.ndarray, dict]:
    """Field dump -> (values reshaped to the grid, sidecar metadata)."""
    path = Path(path)
    meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    values = np.fromfile(path, dtype="<f8").reshape((meta["n"],) * meta["dim"])
    return values, meta


def phantom_label(row: dict) -> str:
    return f"{'linear' if row['lambda'] == 1 else 'cubic'}-{row['phantom']}"
