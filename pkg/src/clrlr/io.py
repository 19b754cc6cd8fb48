"""Delimited-text readers and writers."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .compositional import CountMatrix
from .errors import DimensionError, ParseError

DELIMITERS = {"tsv": "\t", "csv": ","}


@dataclass(frozen=True)
class CountTable:
    sample_ids: list
    taxa_ids: list
    counts: CountMatrix

    def __post_init__(self):
        n, p = self.counts.shape
        if len(self.sample_ids) != n or len(self.taxa_ids) != p:
            raise DimensionError("id vectors do not match the count matrix")
        for kind, ids in (("sample", self.sample_ids), ("taxon", self.taxa_ids)):
            seen = set()
            for ident in ids:
                if ident in seen:
                    raise ParseError(f"duplicate {kind} id", token=ident)
                seen.add(ident)


def infer_format(path) -> str:
    suffix = Path(path).suffix.lower().lstrip(".")
    return suffix if suffix in DELIMITERS else "tsv"


def fmt(x) -> str:
    """Shortest string that round-trips the float exactly."""
    return repr(float(x))


def read_counts(path, format=None) -> CountTable:
    """Read a count table: header of taxon ids, then one sample per row.

    The first header cell is a corner label and is ignored. Every other
    cell must be a base-10 nonnegative integer.
    """
    format = format or infer_format(path)
    if format not in DELIMITERS:
        raise ParseError(f"unknown format {format!r}; expected one of {sorted(DELIMITERS)}")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh, delimiter=DELIMITERS[format]))
    rows = [(i, row) for i, row in enumerate(rows, start=1) if any(cell.strip() for cell in row)]
    if not rows:
        raise ParseError("empty count file")
    _, header = rows[0]
    taxa = [t.strip() for t in header[1:]]
    if len(taxa) < 2:
        raise ParseError(f"need at least 2 taxa, found {len(taxa)}", line=rows[0][0])
    if len(rows) < 2:
        raise ParseError("count matrix has no samples")
    samples, values = [], []
    for lineno, row in rows[1:]:
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(row)}", line=lineno)
        samples.append(row[0].strip())
        parsed = []
        for col, token in enumerate(row[1:], start=2):
            tok = token.strip()
            if not (tok.isascii() and tok.isdigit()):
                raise ParseError("count must be a nonnegative integer", line=lineno, column=col, token=token)
            parsed.append(int(tok, 10))
        values.append(parsed)
    return CountTable(samples, taxa, CountMatrix(np.array(values, dtype=np.int64)))


def write_counts(path, table: CountTable, format=None) -> None:
    format = format or infer_format(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter=DELIMITERS[format], lineterminator="\n")
        writer.writerow(["sample"] + list(table.taxa_ids))
        for sid, row in zip(table.sample_ids, table.counts.values):
            writer.writerow([sid] + [str(int(x)) for x in row])


def write_matrix(path, matrix, row_ids=None, col_ids=None) -> None:
    """Write a labelled real matrix as CSV with round-trip float formatting."""
    matrix = np.asarray(matrix, dtype=float)
    n, p = matrix.shape
    row_ids = row_ids if row_ids is not None else [str(i) for i in range(n)]
    col_ids = col_ids if col_ids is not None else [str(j) for j in range(p)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sample"] + list(col_ids))
        for rid, row in zip(row_ids, matrix):
            writer.writerow([rid] + [fmt(x) for x in row])


def read_matrix(path):
    """Inverse of :func:`write_matrix`; returns ``(matrix, row_ids, col_ids)``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    col_ids = rows[0][1:]
    row_ids = [r[0] for r in rows[1:]]
    matrix = np.array([[float(x) for x in r[1:]] for r in rows[1:]], dtype=float)
    return matrix, row_ids, col_ids


def write_rows(path, header, rows) -> None:
    """Write records; floats are formatted for exact round trip."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(x) if isinstance(x, (float, np.floating)) else x for x in row])


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
