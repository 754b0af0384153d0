"""Delimited-text readers and writers.

All files are comma-separated with a header row. Slot and region indices
are 1-based; pre-task history slots are numbered ``<= 0``.
"""
from __future__ import annotations

import csv
import os
from pathlib import Path
from typing import Iterable, Sequence

from .core import FormatError, SensingReport

REPORT_HEADER = ("mu", "slot", "region", "value")
TRUTH_HEADER = ("slot", "region", "value")
PREDICTION_HEADER = ("slot", "region", "ghat")
RECORD_HEADER = ("slot", "mu", "region", "value", "q", "kept", "iterations", "converged")
TRAJECTORY_HEADER = ("slot", "mu", "reputation")
METRICS_HEADER = ("method", "f1", "reputation_distance", "noise_reduction_ratio")


def fmt(x) -> str:
    """Shortest round-trip text for numbers; keeps output byte-stable."""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_rows(path: str | os.PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_rows(path: str | os.PathLike, header: Sequence[str], types: Sequence[type]):
    """Yield ``(line_no, parsed_row)``; raise :class:`FormatError` on bad input.

    An empty file yields nothing.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None:
            return
        if tuple(c.strip() for c in first) != tuple(header):
            raise FormatError(f"expected header {','.join(header)!r}, got {','.join(first)!r}", 1)
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise FormatError(f"expected {len(header)} fields, got {len(row)}", line)
            try:
                yield line, tuple(t(c.strip()) for t, c in zip(types, row))
            except ValueError as exc:
                raise FormatError(str(exc), line) from None


def write_reports(path, reports: Iterable[SensingReport]) -> None:
    write_rows(path, REPORT_HEADER, ((r.mu, r.slot, r.region, float(r.value)) for r in reports))


def read_reports(path) -> list[SensingReport]:
    out = []
    for line, (mu, slot, region, value) in read_rows(path, REPORT_HEADER, (int, int, int, float)):
        try:
            out.append(SensingReport(mu, slot, region, value))
        except ValueError as exc:
            raise FormatError(str(exc), line) from None
    return out


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
