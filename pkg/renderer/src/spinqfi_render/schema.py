"""CSV input contract: fixed headers per quantity, filename-encoded field
strength for the per-h files.

These schemas mirror the engine's documented CSV outputs; the renderer
never recomputes physics from them, it only plots cells.
"""

from __future__ import annotations

import re
from pathlib import Path

import pandas as pd

SCHEMAS = {
    "qfi_map": ("tJ", "j", "F_j"),
    "otoc_map": ("tJ", "j", "C_x", "C_y", "C_z", "C_sum"),
    "decode_map": ("tJ", "w", "F_dec", "F_block", "restart_best_id"),
    "hierarchy_series": ("tJ", "F_k", "F_dec", "F_block", "C_y"),
    "depletion": ("tJ", "h", "eta"),
    "rate_fit": ("h", "gamma_star", "window_lo", "window_hi", "slope_global"),
}

_H_SUFFIX = re.compile(r"_h([0-9.eE+-]+)$")


class SchemaError(ValueError):
    """Raised when an input CSV violates the documented contract."""


def classify(path: str | Path) -> str:
    """Quantity name from the header row alone."""
    header = tuple(pd.read_csv(path, nrows=0).columns)
    for name, columns in SCHEMAS.items():
        if header == columns:
            return name
    # an incomplete header still classifies when it is an unambiguous subset
    # of one schema, so load() can name the missing column(s)
    partial = [
        name
        for name, columns in SCHEMAS.items()
        if header and set(header) < set(columns)
    ]
    if len(partial) == 1:
        return partial[0]
    raise SchemaError(f"unrecognized CSV header {list(header)} in {path}")


def field_strength(path: str | Path) -> float | None:
    """h parsed from a `<quantity>_h<value>.csv` filename, else None."""
    m = _H_SUFFIX.search(Path(path).stem)
    return float(m.group(1)) if m else None


def load(path: str | Path, expected: str) -> pd.DataFrame:
    """Read and validate one CSV against the expected quantity schema."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"input CSV not found: {path}")
    frame = pd.read_csv(path)
    columns = SCHEMAS[expected]
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise SchemaError(
            f"{path}: missing column(s) {missing} for quantity {expected!r}"
        )
    if frame.empty:
        raise SchemaError(f"{path}: no data rows")
    return frame
