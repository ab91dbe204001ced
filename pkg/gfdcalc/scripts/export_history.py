"""Export recorded verification checks (1 row = 1 run x check).

Usage examples:
  python -m gfdcalc.scripts.export_history --format csv --out data/history.csv
  python -m gfdcalc.scripts.export_history --format xlsx --run-id 3 --run-id 4
"""
import argparse
import csv
import os
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from gfdcalc.errors import GfdError, OutputError
from gfdcalc.report import load_checks

env_file = os.getenv("ENV_FILE")
if env_file:
    load_dotenv(env_file)
else:
    load_dotenv(".env.local")

HEADER = [
    "run_id",
    "command",
    "started_at",
    "prefactor_mode",
    "tolerance_override",
    "run_passed",
    "check",
    "group",
    "passed",
    "max_deviation",
    "detail",
]


def _row(run, check) -> list:
    return [
        run.id,
        run.command,
        run.started_at or "",
        run.prefactor_mode,
        "" if run.tolerance_override is None else run.tolerance_override,
        "yes" if run.passed else "no",
        check.name,
        check.group,
        "yes" if check.passed else "no",
        "" if check.max_deviation is None else f"{check.max_deviation:.6e}",
        check.detail or "",
    ]


def export_csv(rows, path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(HEADER)
            for run, check in rows:
                writer.writerow(_row(run, check))
    except OSError as exc:
        raise OutputError(f"cannot write history export: {exc.strerror or exc}", path) from exc
    return path


def export_xlsx(rows, path: Path) -> Path:
    """Export history as XLSX using openpyxl"""
    try:
        from openpyxl import Workbook
        from openpyxl.styles import Alignment, Font, PatternFill
    except ImportError as exc:
        raise OutputError("openpyxl not installed. Please install it to use XLSX export.", path) from exc

    wb = Workbook()
    ws = wb.active
    ws.title = "history"
    ws.append([h.replace("_", " ").title() for h in HEADER])

    # Style header
    header_fill = PatternFill(start_color="4472C4", end_color="4472C4", fill_type="solid")
    header_font = Font(bold=True, color="FFFFFF")
    for cell in ws[1]:
        cell.fill = header_fill
        cell.font = header_font
        cell.alignment = Alignment(horizontal="center", vertical="center", wrap_text=True)

    for run, check in rows:
        ws.append(_row(run, check))

    ws.column_dimensions["A"].width = 8   # run id
    ws.column_dimensions["B"].width = 10  # command
    ws.column_dimensions["C"].width = 20  # started at
    for col in ["D", "E", "F", "H", "I", "J"]:
        ws.column_dimensions[col].width = 14
    ws.column_dimensions["G"].width = 20  # check
    ws.column_dimensions["K"].width = 40  # detail

    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        wb.save(path)
    except OSError as exc:
        raise OutputError(f"cannot write history export: {exc.strerror or exc}", path) from exc
    return path


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="Export recorded verification checks")
    parser.add_argument('--format', choices=['csv', 'xlsx'], default='csv')
    parser.add_argument('--out', help='Output file (default: <output-dir>/history.<format>)')
    parser.add_argument('--output-dir', default=os.getenv("GFD_OUTPUT_DIR", "data"))
    parser.add_argument('--run-id', type=int, action='append', help='Restrict to a run (repeatable)')
    parser.add_argument('--database-url', help='Override DATABASE_URL')
    args = parser.parse_args(argv)

    database_url = args.database_url or os.getenv("DATABASE_URL")
    if not database_url:
        print("ERROR: DATABASE_URL environment variable (or --database-url) is required")
        return 2
    path = Path(args.out) if args.out else Path(args.output_dir) / f"history.{args.format}"

    try:
        rows = load_checks(database_url, args.run_id)
        if args.format == "xlsx":
            export_xlsx(rows, path)
        else:
            export_csv(rows, path)
    except GfdError as exc:
        print(f"ERROR: {exc}")
        return 2
    print(f"✓ History exported: {path} ({len(rows)} rows)")
    return 0


if __name__ == '__main__':
    raise SystemExit(main())
