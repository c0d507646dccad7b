#!/usr/bin/env python3
"""
Report files: one JSON record per line, '#'-prefixed header and summary.

    # matconc report v1
    # master_seed: 20240101
    {"bound_name": "khintchine_upper", ...}
    ...
    # summary
    # | bound_name | records | verified | ...

Keys are sorted and floats use repr, so identical records give identical bytes.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Union

import numpy as np
import pandas as pd

from bounds import ERROR, ESTIMATED, RECORDED, VERIFIED, VIOLATED, BoundReport
from core.errors import ReportFormatError

logger = logging.getLogger(__name__)

REPORT_HEADER = "# matconc report v1"
SUMMARY_MARKER = "# summary"
VERDICT_COLUMNS = (VERIFIED, ESTIMATED, VIOLATED, RECORDED, ERROR)


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def record_line(report: BoundReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, default=_plain)


def summary_frame(records: Sequence[BoundReport]) -> pd.DataFrame:
    """Per-bound verdict counts with the smallest and largest ratio seen"""
    rows = [{"bound_name": r.bound_name, "verdict": r.verdict, "ratio": r.ratio} for r in records]
    df = pd.DataFrame(rows, columns=["bound_name", "verdict", "ratio"])
    counts = pd.crosstab(df["bound_name"], df["verdict"]).reindex(columns=list(VERDICT_COLUMNS), fill_value=0)
    ratios = df.dropna(subset=["ratio"]).groupby("bound_name")["ratio"].agg(["min", "max"])
    summary = counts.join(ratios, how="left")
    summary.insert(0, "records", counts.sum(axis=1))
    summary = summary.rename(columns={"min": "min_ratio", "max": "max_ratio"})
    return summary.sort_index().reset_index()


def summary_lines(records: Sequence[BoundReport]) -> List[str]:
    table = summary_frame(records).to_markdown(index=False, floatfmt=".6g")
    return [SUMMARY_MARKER] + [f"# {line}" for line in table.splitlines()]


def write_report(records: Sequence[BoundReport], path: Union[str, Path],
                 metadata: Mapping[str, object] = None) -> Path:
    """Write records plus a summary table; an empty list gives a header-only file"""
    path = Path(path)
    lines = [REPORT_HEADER]
    for key in sorted(metadata or {}):
        lines.append(f"# {key}: {json.dumps(metadata[key], sort_keys=True, default=_plain)}")
    lines.extend(record_line(r) for r in records)
    if records:
        lines.extend(summary_lines(records))
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("\n".join(lines) + "\n")
    except OSError as e:
        raise ReportFormatError(f"cannot write report {path}: {e}") from e
    logger.info("wrote %d records to %s", len(records), path)
    return path


def _read_lines(path: Union[str, Path]) -> List[str]:
    try:
        with open(path, encoding="utf-8") as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise ReportFormatError(f"cannot read report {path}: {e}") from e
    if not lines or lines[0] != REPORT_HEADER:
        raise ReportFormatError(f"{path} is not a matconc report (missing {REPORT_HEADER!r})")
    return lines


def _report_from_dict(raw: Dict, where: str) -> BoundReport:
    try:
        raw = dict(raw)
        raw["notes"] = tuple(raw.get("notes", ()))
        return BoundReport(**raw)
    except (TypeError, ValueError) as e:
        raise ReportFormatError(f"{where}: malformed record: {e}") from e


def load_report(path: Union[str, Path]) -> List[BoundReport]:
    records = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as e:
            raise ReportFormatError(f"{path}:{lineno}: {e}") from e
        records.append(_report_from_dict(raw, f"{path}:{lineno}"))
    return records


def read_metadata(path: Union[str, Path]) -> Dict[str, object]:
    """Header fields written by write_report(metadata=...)"""
    out = {}
    for line in _read_lines(path)[1:]:
        if not line.startswith("# ") or line == SUMMARY_MARKER:
            break
        key, sep, value = line[2:].partition(": ")
        if not sep:
            break
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError as e:
            raise ReportFormatError(f"{path}: bad metadata line {line!r}") from e
    return out
