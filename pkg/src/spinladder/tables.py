"""Plot-ready tables and their CSV / JSON manifest serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class SeriesTable:
    """A named numeric table: one CSV file per table."""

    name: str
    columns: tuple[str, ...]
    rows: np.ndarray = field(repr=False)  # shape (n_rows, n_columns)

    def __post_init__(self):
        rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        if rows.shape[1] != len(self.columns):
            raise ValueError(
                f"table {self.name}: {rows.shape[1]} columns vs {len(self.columns)} names"
            )
        object.__setattr__(self, "rows", rows)

    def to_payload(self) -> dict:
        return {
            "name": self.name,
            "columns": list(self.columns),
            "rows": [[float(x) for x in row] for row in self.rows],
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "SeriesTable":
        return cls(
            name=payload["name"],
            columns=tuple(payload["columns"]),
            rows=np.asarray(payload["rows"], dtype=float),
        )


def write_csv(table: SeriesTable, path: Path | str) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(",".join(table.columns) + "\n")
        for row in table.rows:
            fh.write(",".join("%.17g" % x for x in row) + "\n")
    return path


def write_manifest(manifest: dict, path: Path | str) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"not JSON serde friendly: {type(obj)}")


def write_outputs(tables: list[SeriesTable], manifest: dict, out_dir: Path | str) -> list[Path]:
    """Write every table as CSV plus the run manifest; returns written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for table in tables:
        paths.append(write_csv(table, out / f"{table.name}.csv"))
    manifest = dict(manifest, outputs=[p.name for p in paths])
    paths.append(write_manifest(manifest, out / "manifest.json"))
    return paths
