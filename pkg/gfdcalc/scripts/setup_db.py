"""Run-history DB setup helper.

Usage examples:
  AUTO_CREATE_TABLES=1 python -m gfdcalc.scripts.setup_db --create-tables
  python -m gfdcalc.scripts.setup_db --list-tables --database-url sqlite:///data/history.db
"""
import argparse
import os
from typing import List, Optional

from dotenv import load_dotenv
from sqlalchemy import inspect
from sqlmodel import SQLModel, create_engine

env_file = os.getenv("ENV_FILE")
if env_file:
    load_dotenv(env_file)
else:
    load_dotenv(".env.local")


def get_engine(database_url: Optional[str] = None):
    # Require a URL from the flag or the environment; do not fall back
    database_url = database_url or os.getenv("DATABASE_URL")
    if not database_url:
        raise SystemExit("DATABASE_URL environment variable (or --database-url) is required")
    return create_engine(database_url, echo=False)


def create_tables(engine) -> bool:
    if os.getenv("AUTO_CREATE_TABLES", "0") != "1":
        print("AUTO_CREATE_TABLES is not '1'; refusing to run create_all from CLI helper")
        return False
    # registers the history tables on SQLModel.metadata
    import gfdcalc.models  # noqa: F401

    SQLModel.metadata.create_all(engine)
    print("Created/verified tables via SQLModel.metadata.create_all")
    list_tables(engine)
    return True


def list_tables(engine) -> List[str]:
    tables = inspect(engine).get_table_names()
    print("Tables in target DB:", tables)
    return tables


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="Create or inspect the run-history tables")
    parser.add_argument('--create-tables', action='store_true')
    parser.add_argument('--list-tables', action='store_true')
    parser.add_argument('--database-url', help='Override DATABASE_URL')
    args = parser.parse_args(argv)

    if not (args.create_tables or args.list_tables):
        parser.print_help()
        return 0

    engine = get_engine(args.database_url)
    ok = True
    if args.create_tables:
        ok = create_tables(engine)
    if args.list_tables:
        list_tables(engine)
    return 0 if ok else 2


if __name__ == '__main__':
    raise SystemExit(main())
