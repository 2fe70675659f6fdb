"""File readers and writers.

All tabular data is UTF-8 CSV with a required header; reports are JSON
written with sorted keys so that repeated runs are byte-identical.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import InputError
from .seqcore import DatasetRecord


def read_fasta(path) -> list[tuple[str, str]]:
    """Parse ``>id`` records; multi-line sequences are joined."""
    records: list[tuple[str, str]] = []
    header = None
    chunks: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith(">"):
                if header is not None:
                    records.append((header, "".join(chunks)))
                header = line[1:].split()[0] if line[1:].strip() else f"seq{len(records) + 1}"
                chunks = []
            else:
                if header is None:
                    raise InputError(f"{path}:{lineno}: sequence data before first '>' header")
                chunks.append(line)
    if header is not None:
        records.append((header, "".join(chunks)))
    return records


def write_fasta(path, records: Iterable[tuple[str, str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rid, seq in records:
            fh.write(f">{rid}\n{seq}\n")


def _parse_label(raw: str, lineno: int, path):
    raw = (raw or "").strip()
    if raw == "":
        return None
    try:
        value = float(raw)
    except ValueError:
        raise InputError(f"{path}:{lineno}: label {raw!r} is not numeric") from None
    if not math.isfinite(value):
        raise InputError(f"{path}:{lineno}: non-finite label {raw!r}")
    return int(value) if value.is_integer() and raw.lstrip("-").isdigit() else value


def read_records(path) -> list[DatasetRecord]:
    """Read a ``sequence,label[,source][,unit][,id]`` CSV."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return []
        fields = [f.strip() for f in reader.fieldnames]
        if "sequence" not in fields:
            raise InputError(f"{path}: header must contain a 'sequence' column")
        reader.fieldnames = fields
        out = []
        for lineno, row in enumerate(reader, 2):
            seq = (row.get("sequence") or "").strip()
            if not seq:
                raise InputError(f"{path}:{lineno}: empty sequence")
            out.append(DatasetRecord(
                sequence=seq,
                label=_parse_label(row.get("label"), lineno, path),
                source=(row.get("source") or "").strip(),
                unit=(row.get("unit") or "").strip(),
                id=(row.get("id") or "").strip() or f"r{len(out)}",
            ))
    return out


def write_records(path, records: Sequence[DatasetRecord], extra: dict[str, Sequence] | None = None) -> None:
    cols = ["id", "sequence", "label", "source"]
    if any(r.unit for r in records):
        cols.append("unit")
    extra = extra or {}
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols + list(extra))
        for i, r in enumerate(records):
            row = [r.id, r.sequence, format_value(r.label), r.source]
            if "unit" in cols:
                row.append(r.unit)
            row.extend(format_value(v[i]) for v in extra.values())
            w.writerow(row)


def read_pairs(path) -> list[dict]:
    """Read a peptide-protein CSV with ``peptide,protein[,label]`` columns."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        fields = [f.strip() for f in (reader.fieldnames or [])]
        if not {"peptide", "protein"} <= set(fields):
            raise InputError(f"{path}: header must contain 'peptide' and 'protein'")
        reader.fieldnames = fields
        rows = []
        for lineno, row in enumerate(reader, 2):
            rows.append({
                "id": (row.get("id") or "").strip() or f"p{len(rows)}",
                "peptide": row["peptide"].strip().upper(),
                "protein": row["protein"].strip().upper(),
                "label": _parse_label(row.get("label", "1"), lineno, path),
            })
    return rows


def format_value(value) -> str:
    """Stable text form: floats use repr (shortest round-trip)."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_table(path, header: Sequence[str], rows: Iterable[Sequence], delimiter: str = ",",
                comment: str | None = None) -> None:
    """Write a delimited table; ``comment`` becomes a leading ``# ...`` line."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_value(v) for v in row])


def read_table(path, delimiter: str = ",") -> Iterator[dict]:
    """Read a table written by ``write_table``, skipping ``#`` comment lines."""
    with open(path, encoding="utf-8", newline="") as fh:
        yield from csv.DictReader((line for line in fh if not line.startswith("#")), delimiter=delimiter)


def write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def read_lines(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]
