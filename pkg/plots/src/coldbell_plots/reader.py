"""Reader for the coldbell sweep CSV schema.

The file starts with a `# coldbell-sweep key=value ...` comment carrying the
schema version, config hash, seed, solver and (for three-site rings) the
revival frequency, followed by a fixed-order column header and one row per
grid cell.  Empty fields are missing values.
"""

from __future__ import annotations

from pathlib import Path


class SweepFormatError(ValueError):
    """The input file does not follow the sweep CSV schema."""


def load_sweep_csv(path) -> tuple[dict, list[dict]]:
    text = Path(path).read_text(encoding="utf-8")
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise SweepFormatError(f"{path}: empty file")
    meta: dict = {}
    body = 0
    for line in lines:
        if not line.startswith("#"):
            break
        for token in line.lstrip("# ").split()[1:]:
            key, _, value = token.partition("=")
            meta[key] = value
        body += 1
    if body >= len(lines):
        raise SweepFormatError(f"{path}: no column header found")
    header = lines[body].split(",")
    if "t" not in header:
        raise SweepFormatError(f"{path}: missing the time column 't'")
    rows = []
    for line in lines[body + 1 :]:
        values = line.split(",")
        if len(values) != len(header):
            raise SweepFormatError(f"{path}: ragged row {line!r}")
        record: dict = {}
        for key, value in zip(header, values):
            if key == "solver":
                record[key] = value
            else:
                record[key] = float(value) if value else None
        rows.append(record)
    return meta, rows
