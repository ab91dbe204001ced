from typing import Optional
from sqlmodel import SQLModel, Field

# ==========================================
# run history (optional, needs DATABASE_URL)
# ==========================================
class VerificationRun(SQLModel, table=True):
    id: Optional[int] = Field(default=None, primary_key=True)
    command: str = Field(default="verify", index=True)  # verify / table

    started_at: Optional[str] = None
    finished_at: Optional[str] = None

    filter: Optional[str] = None
    tolerance_override: Optional[float] = None
    prefactor_mode: str = Field(default="gfd")  # gfd / cd

    passed: bool = Field(default=False)
    n_checks: int = Field(default=0)
    n_failed: int = Field(default=0)


class CheckRecord(SQLModel, table=True):
    id: Optional[int] = Field(default=None, primary_key=True)
    run_id: int = Field(foreign_key="verificationrun.id", index=True)

    name: str = Field(index=True)
    group: str = Field(default="")
    passed: bool = Field(default=False)
    max_deviation: Optional[float] = None
    detail: Optional[str] = None


class TableReproduction(SQLModel, table=True):
    id: Optional[int] = Field(default=None, primary_key=True)
    run_id: int = Field(foreign_key="verificationrun.id", index=True)

    table_id: str = Field(index=True)  # "1" / "2" / "3"
    t: float
    method: str  # Present / CD
    computed: float
    reference: float
    deviation: float
