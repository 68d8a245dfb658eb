"""File writers: CSV tables and the JSON run summary.

Numeric CSV fields use decimal (positional) notation with nine
significant digits so byte-level comparison of outputs is meaningful
across runs and worker counts.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .noise import RatePath


def format_sig(x: float) -> str:
    """Decimal notation with exactly 9 significant digits, never scientific."""
    x = float(x)
    if not np.isfinite(x):
        return "nan" if np.isnan(x) else ("inf" if x > 0 else "-inf")
    if x == 0.0:
        return "0.00000000"
    mantissa, _, exponent = f"{x:.8e}".partition("e")
    negative = mantissa.startswith("-")
    digits = mantissa.lstrip("-").replace(".", "")
    e = int(exponent)
    if e >= 8:
        body = digits + "0" * (e - 8)
    elif e >= 0:
        body = digits[:e + 1] + "." + digits[e + 1:]
    else:
        body = "0." + "0" * (-e - 1) + digits
    return ("-" if negative else "") + body


def write_g2_csv(path, taus, g2_by_column) -> None:
    """``g2.csv`` with fixed columns tau,g2_dd,g2_aa,g2_da,g2_ad."""
    columns = [g2_by_column[name] for name in ("dd", "aa", "da", "ad")]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("tau,g2_dd,g2_aa,g2_da,g2_ad\n")
        for k, tau in enumerate(taus):
            row = [format_sig(tau)] + [format_sig(col[k]) for col in columns]
            fh.write(",".join(row) + "\n")


def write_adiabatic_csv(path, taus, values) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("tau,g2_aa_adiabatic\n")
        for tau, value in zip(taus, values):
            fh.write(f"{format_sig(tau)},{format_sig(value)}\n")


def write_path_csv(path, rate_path: RatePath) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,gamma5\n")
        for k, value in enumerate(rate_path.values):
            t = rate_path.t0 + k * rate_path.dt
            fh.write(f"{format_sig(t)},{format_sig(value)}\n")


def write_summary_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n",
                          encoding="utf-8")
