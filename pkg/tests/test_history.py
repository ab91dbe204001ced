import csv

import pytest
from openpyxl import load_workbook

from gfdcalc.main import main
from gfdcalc.scripts import export_history, setup_db


def test_setup_db_refuses_without_flag(tmp_path, monkeypatch, capsys):
    monkeypatch.delenv("AUTO_CREATE_TABLES", raising=False)
    url = f"sqlite:///{tmp_path / 'h.db'}"
    assert setup_db.main(["--create-tables", "--database-url", url]) == 2
    assert "refusing" in capsys.readouterr().out


def test_setup_db_creates_tables(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("AUTO_CREATE_TABLES", "1")
    url = f"sqlite:///{tmp_path / 'h.db'}"
    assert setup_db.main(["--create-tables", "--database-url", url]) == 0
    tables = setup_db.list_tables(setup_db.get_engine(url))
    assert {"verificationrun", "checkrecord", "tablereproduction"} <= set(tables)


def test_setup_db_needs_url():
    with pytest.raises(SystemExit):
        setup_db.get_engine(None)


def test_verify_records_history(history_url, capsys):
    assert main(["verify", "--filter", "tables", "--database-url", history_url]) == 0
    assert main(["table", "--id", "1", "--prefactor-mode", "cd", "--database-url", history_url]) == 1
    capsys.readouterr()

    assert main(["history", "--database-url", history_url]) == 0
    out = capsys.readouterr().out
    lines = [l for l in out.splitlines() if l.strip().startswith(("1 ", "2 "))]
    assert len(lines) == 2
    # newest first
    assert lines[0].split()[:2] == ["2", "table"]
    assert lines[1].split()[:2] == ["1", "verify"]


def test_history_from_environment(history_url, monkeypatch, capsys):
    monkeypatch.setenv("DATABASE_URL", history_url)
    assert main(["history"]) == 0
    assert "(no runs recorded)" in capsys.readouterr().out


def test_history_without_database_exits_2(capsys):
    assert main(["history"]) == 2
    assert "no database configured" in capsys.readouterr().err


def test_export_history_csv(history_url, tmp_path, capsys):
    assert main(["verify", "--filter", "specfun", "--database-url", history_url]) == 0
    out = tmp_path / "history.csv"
    assert export_history.main(["--database-url", history_url, "--out", str(out)]) == 0
    assert "(2 rows)" in capsys.readouterr().out

    with open(out, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert [r["check"] for r in rows] == ["gamma_kernel", "prefactor"]
    assert all(r["passed"] == "yes" and r["group"] == "specfun" for r in rows)


def test_export_history_xlsx_by_run(history_url, tmp_path):
    assert main(["verify", "--filter", "prefactor", "--database-url", history_url]) == 0
    assert main(["verify", "--filter", "tables", "--database-url", history_url]) == 0
    out = tmp_path / "history.xlsx"
    assert export_history.main(["--format", "xlsx", "--run-id", "2", "--database-url", history_url, "--out", str(out)]) == 0

    ws = load_workbook(out).active
    assert ws["A1"].value == "Run Id"
    assert [ws.cell(row=r, column=7).value for r in range(2, ws.max_row + 1)] == ["table1", "table2", "table3"]


def test_export_history_default_path(history_url, tmp_path):
    assert export_history.main(["--database-url", history_url, "--output-dir", str(tmp_path / "exports")]) == 0
    assert (tmp_path / "exports" / "history.csv").read_text(encoding="utf-8").startswith("run_id,command")


def test_export_history_needs_url(capsys):
    assert export_history.main([]) == 2
    assert "DATABASE_URL" in capsys.readouterr().out
