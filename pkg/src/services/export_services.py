# src/services/export_services.py
"""
Result export: eigenvalue / band / convergence tables to CSV (pandas) and
Excel (xlsxwriter, optional), audit logs as JSON lines, and sparse matrix
dumps in coordinate ASCII.
"""

import json
import logging
from collections.abc import Iterable, Sequence
from datetime import datetime
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import scipy.sparse as sp

logger = logging.getLogger(__name__)

try:
    import xlsxwriter

    EXCEL_AVAILABLE = True
except ImportError:
    EXCEL_AVAILABLE = False
    logger.warning("⚠️ xlsxwriter not installed. Excel export disabled.")

EIGENVALUE_COLUMNS = [
    "kappa", "re", "im", "residual", "metric", "disk_id", "region",
    "mesh_level", "dofs", "config_hash", "thz",
]
BAND_COLUMNS = ["kappa", "branch", "re", "im", "residual", "classification", "thz"]
CONVERGENCE_COLUMNS = ["level", "dofs", "h", "re", "im", "order"]

FLOAT_FORMAT = "%.10g"


def _jsonable(value: Any) -> Any:
    """json.dumps default hook for complex numbers and numpy scalars/arrays"""
    if isinstance(value, complex | np.complexfloating):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()] if np.iscomplexobj(value) else value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


class ExportService:
    """Writes result tables and solver records to the output directory"""

    @staticmethod
    def to_frame(rows: Iterable[dict[str, Any]], columns: Sequence[str]) -> pd.DataFrame:
        df = pd.DataFrame(list(rows))
        for column in columns:
            if column not in df.columns:
                df[column] = pd.Series(dtype=object)
        return df[list(columns)]

    @staticmethod
    def export_to_csv(rows: Iterable[dict[str, Any]], path: str | Path, columns: Sequence[str]) -> Path:
        """Export a result table to CSV; column order is fixed for reproducible bytes"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        df = ExportService.to_frame(rows, columns)
        df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
        logger.info(f"💾 Wrote {len(df)} rows to {path}")
        return path

    @staticmethod
    def export_to_excel(
        rows: Iterable[dict[str, Any]],
        path: str | Path,
        columns: Sequence[str],
        title: str = "Resonances",
    ) -> Path:
        """Single-sheet workbook with a title block and formatted header row"""
        if not EXCEL_AVAILABLE:
            raise ValueError("Excel export not available. Install xlsxwriter.")
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        df = ExportService.to_frame(rows, columns)

        workbook = xlsxwriter.Workbook(str(path), {"nan_inf_to_errors": True})
        header_format = workbook.add_format(
            {"bold": True, "bg_color": "#1A1A1A", "font_color": "#FFFFFF", "border": 1, "align": "center"}
        )
        title_format = workbook.add_format({"bold": True, "font_size": 14})
        subtitle_format = workbook.add_format({"font_size": 10, "font_color": "#666666"})
        number_format = workbook.add_format({"num_format": "0.000000000"})

        worksheet = workbook.add_worksheet(title[:31])
        worksheet.write(0, 0, title, title_format)
        worksheet.write(1, 0, f"Generated: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}", subtitle_format)
        worksheet.write(2, 0, f"Total rows: {len(df)}", subtitle_format)
        for col, header in enumerate(columns):
            worksheet.write(4, col, header, header_format)
            worksheet.set_column(col, col, 16)
        for row_idx, record in enumerate(df.itertuples(index=False), start=5):
            for col, value in enumerate(record):
                if value is None or (isinstance(value, float) and np.isnan(value)):
                    worksheet.write_blank(row_idx, col, None)
                elif isinstance(value, float | np.floating):
                    worksheet.write_number(row_idx, col, float(value), number_format)
                else:
                    worksheet.write(row_idx, col, value if isinstance(value, int | str) else str(value))
        workbook.close()
        logger.info(f"📊 Excel export written to {path}")
        return path

    @staticmethod
    def export_tables(
        rows: list[dict[str, Any]],
        stem: str | Path,
        columns: Sequence[str],
        formats: Sequence[str] = ("csv",),
        title: str = "Resonances",
    ) -> list[Path]:
        """Write every requested format; xlsx is skipped with a warning when unavailable"""
        written = [ExportService.export_to_csv(rows, Path(f"{stem}.csv"), columns)]
        if "xlsx" in formats:
            if EXCEL_AVAILABLE:
                written.append(ExportService.export_to_excel(rows, Path(f"{stem}.xlsx"), columns, title))
            else:
                logger.warning("⚠️ xlsx requested but xlsxwriter is missing; skipped")
        return written

    @staticmethod
    def write_audit_log(events: Iterable[dict[str, Any]], path: str | Path) -> Path:
        """One JSON object per line, keys sorted for stable bytes"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as handle:
            for event in events:
                handle.write(json.dumps(event, default=_jsonable, sort_keys=True) + "\n")
        return path

    @staticmethod
    def read_audit_log(path: str | Path) -> list[dict[str, Any]]:
        with Path(path).open(encoding="utf-8") as handle:
            return [json.loads(line) for line in handle if line.strip()]

    @staticmethod
    def export_matrix_coo(matrix: sp.spmatrix, path: str | Path) -> Path:
        """Coordinate ASCII: header 'rows cols nnz', then 'row col re im' per entry"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        coo = sp.coo_matrix(matrix)
        values = coo.data.astype(complex)
        with path.open("w", encoding="utf-8") as handle:
            handle.write(f"{coo.shape[0]} {coo.shape[1]} {coo.nnz}\n")
            for r, c, v in zip(coo.row, coo.col, values):
                handle.write(f"{r} {c} {v.real:.17g} {v.imag:.17g}\n")
        logger.info(f"💾 Matrix ({coo.shape[0]}x{coo.shape[1]}, nnz={coo.nnz}) dumped to {path}")
        return path
