#!/usr/bin/env python3
"""
Report writer

Every experiment emits `{experiment}_{seed}.csv` and a text summary next
to it; an Excel workbook with a styled header row is optional.
"""

import logging
import math
import os
from typing import Dict, Optional

import pandas as pd
from openpyxl import Workbook
from openpyxl.styles import Alignment, Border, Font, PatternFill, Side

logger = logging.getLogger(__name__)

_THIN = Side(style="thin")
_BORDER = Border(left=_THIN, right=_THIN, top=_THIN, bottom=_THIN)


def save_table_to_excel(df: pd.DataFrame, output_file: str, sheet_name: str = "report") -> str:
    """
    Save a table to an Excel file with a formatted header row

    Args:
        df: Table to write
        output_file: Target path (.xlsx)
        sheet_name: Worksheet title

    Returns:
        Path written
    """
    wb = Workbook()
    ws = wb.active
    ws.title = sheet_name[:31]
    columns = [str(c) for c in df.columns]

    for j, header in enumerate(columns, start=1):
        cell = ws.cell(row=1, column=j, value=header)
        cell.font = Font(bold=True)
        cell.fill = PatternFill(start_color="E0E0E0", end_color="E0E0E0", fill_type="solid")
        cell.alignment = Alignment(horizontal="center", wrap_text=True)
        cell.border = _BORDER

    for i, row in enumerate(df.itertuples(index=False), start=2):
        for j, value in enumerate(row, start=1):
            if isinstance(value, float) and math.isnan(value):
                value = None
            elif hasattr(value, "item"):
                value = value.item()
            cell = ws.cell(row=i, column=j, value=value)
            cell.border = _BORDER
            cell.alignment = Alignment(horizontal="right" if isinstance(value, (int, float)) else "left")

    for j, column in enumerate(ws.columns, start=1):
        longest = max((len(str(c.value)) for c in column if c.value is not None), default=0)
        ws.column_dimensions[column[0].column_letter].width = min((longest + 2) * 1.2, 40)

    wb.save(output_file)
    logger.info(f"✅ Saved {len(df)} rows to Excel file: {output_file}")
    return output_file


def write_report(
    df: pd.DataFrame,
    experiment: str,
    seed: int,
    out_dir: str,
    summary_text: str = "",
    xlsx: bool = False,
) -> Dict[str, str]:
    """
    Write an experiment table and its summary

    Returns:
        {'csv': path, 'txt': path[, 'xlsx': path]}
    """
    if out_dir and not os.path.exists(out_dir):
        os.makedirs(out_dir, exist_ok=True)
        logger.info(f"Created output directory: {out_dir}")
    stem = os.path.join(out_dir, f"{experiment}_{seed}")
    paths = {"csv": stem + ".csv", "txt": stem + ".txt"}
    try:
        df.to_csv(paths["csv"], index=False, lineterminator="\n")
        with open(paths["txt"], "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{experiment} (seed {seed})\n\n")
            fh.write(summary_text.rstrip() + "\n" if summary_text else df.to_string(index=False) + "\n")
        if xlsx:
            paths["xlsx"] = save_table_to_excel(df, stem + ".xlsx", sheet_name=experiment)
    except OSError as e:
        logger.error(f"❌ Error writing report {stem}: {e}")
        raise
    logger.info(f"✅ Report written: {paths['csv']}")
    return paths


def write_table(df: pd.DataFrame, path: str, summary_text: str = "", xlsx: bool = False) -> Dict[str, str]:
    """Write a table to an explicit CSV path, with a .txt summary beside it"""
    directory = os.path.dirname(path)
    if directory and not os.path.exists(directory):
        os.makedirs(directory, exist_ok=True)
    stem, _ = os.path.splitext(path)
    paths = {"csv": path, "txt": stem + ".txt"}
    df.to_csv(path, index=False, lineterminator="\n")
    with open(paths["txt"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write((summary_text.rstrip() if summary_text else df.to_string(index=False)) + "\n")
    if xlsx:
        paths["xlsx"] = save_table_to_excel(df, stem + ".xlsx")
    logger.info(f"✅ Report written: {path}")
    return paths


def format_percent_table(df: pd.DataFrame, digits: Optional[int] = 1) -> str:
    return df.to_string(index=False, float_format=lambda v: f"{v:.{digits}f}")
