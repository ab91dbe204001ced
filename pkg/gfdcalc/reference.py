"""Published comparison tables for the fractional Riccati problems.

Values are transcribed as printed; ``None`` marks a blank cell.
"""
import enum
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Tuple

from .errors import GfdInputError
from .odesolve import ProblemLabel
from .specfun import FracOrder

TABLE_T_VALUES = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)

PRESENT = "Present"
CD = "CD"


class TableId(enum.Enum):
    TABLE1 = "1"
    TABLE2 = "2"
    TABLE3 = "3"


@dataclass(frozen=True)
class ReferenceRow:
    t: float
    columns: Mapping[str, Optional[float]]


@dataclass(frozen=True)
class ReferenceTable:
    id: TableId
    title: str
    problem: ProblemLabel
    alpha: FracOrder
    methods: Tuple[str, ...]
    rows: Tuple[ReferenceRow, ...]
    tolerance: float
    decimals: int
    aliases: Mapping[str, str]

    def __post_init__(self):
        if tuple(r.t for r in self.rows) != TABLE_T_VALUES:
            raise GfdInputError(f"table {self.id.value} must list t = {TABLE_T_VALUES}")

    def resolve(self, method: str) -> str:
        return self.aliases.get(method, method)

    def column(self, method: str) -> Tuple[Optional[float], ...]:
        key = self.resolve(method)
        if key not in self.methods:
            raise GfdInputError(f"table {self.id.value} has no column {method!r}")
        return tuple(r.columns.get(key) for r in self.rows)

    def cell_decimals(self, value: Optional[float]) -> int:
        """Decimals to print a cell with: the table's, or more when the literal carries more."""
        if value is None:
            return self.decimals
        return max(self.decimals, literal_decimals(value))


def literal_decimals(value: float) -> int:
    """Digits after the point in the shortest repr of a transcribed value."""
    text = repr(float(value))
    if "e" in text or "." not in text:
        return 0
    return len(text.split(".", 1)[1].rstrip("0"))


def _rows(methods: Tuple[str, ...], *values) -> Tuple[ReferenceRow, ...]:
    rows = []
    for t, cells in zip(TABLE_T_VALUES, values):
        rows.append(ReferenceRow(t, dict(zip(methods, cells))))
    return tuple(rows)


_T1_METHODS = (PRESENT, "BPM", "EHPM", "IABMM", CD)
_T2_METHODS = (PRESENT, "BPM", "MHPM", "IABMM", CD)
_T3_METHODS = (PRESENT, "BPM", "FTBM", "IABMM", CD)

TABLES: Dict[TableId, ReferenceTable] = {
    TableId.TABLE1: ReferenceTable(
        TableId.TABLE1,
        "Riccati D^a y + y^2 = 1 at alpha = 3/4",
        ProblemLabel.RICCATI1,
        FracOrder(0.75),
        _T1_METHODS,
        _rows(
            _T1_METHODS,
            (0.0, 0.0, 0.0, 0.0, 0.0),
            (0.31439, 0.30996891, 0.3214, 0.3117, 0.37889),
            (0.49848, 0.48162749, 0.5077, 0.4855, 0.58539),
            (0.63022, 0.59777979, 0.6259, 0.6045, 0.72064),
            (0.72609, 0.67884745, 0.7028, 0.6880, 0.81029),
            (0.79618, 0.73684181, 0.7542, 0.7478, 0.87006),
        ),
        tolerance=5e-5,
        decimals=5,
        aliases={},
    ),
    TableId.TABLE2: ReferenceTable(
        TableId.TABLE2,
        "Riccati D^a y + y^2 = 1 at alpha = 9/10",
        ProblemLabel.RICCATI1,
        FracOrder(0.9),
        _T2_METHODS,
        _rows(
            _T2_METHODS,
            (0.0, 0.0, 0.0, 0.0, 0.0),
            (0.23952, 0.23878798, 0.2391, 0.2393, 0.25526),
            (0.42667, 0.42258214, 0.4229, 0.4234, 0.45191),
            (0.57607, 0.56617082, 0.5653, 0.5679, 0.60539),
            (0.69138, 0.67462642, 0.6740, 0.6774, 0.72063),
            (0.7778, 0.75460256, 0.7569, 0.7584, 0.80445),
        ),
        tolerance=5e-5,
        decimals=5,
        # the text calls this column EHPM, the header MHPM
        aliases={"EHPM": "MHPM"},
    ),
    TableId.TABLE3: ReferenceTable(
        TableId.TABLE3,
        "Riccati D^a y = 2y - y^2 + 1 at alpha = 9/10",
        ProblemLabel.RICCATI2,
        FracOrder(0.9),
        _T3_METHODS,
        _rows(
            _T3_METHODS,
            (0.0, 0.0, 0.0, 0.0, 0.0),
            (0.30718, 0.31488815, 0.31485423, None, 0.33295),
            (0.67131, 0.69756771, 0.69751826, None, 0.73105),
            (1.0666, 1.10789047, 0.90364539, None, 1.1561),
            (1.4397, 1.47772823, 1.47768008, None, 1.5422),
            (1.7485, 1.76542008, 1.76525852, 1.7356, 1.8457),
        ),
        tolerance=5e-4,
        decimals=4,
        aliases={},
    ),
}

# figure id -> (problem, alpha)
FIGURES: Dict[int, Tuple[ProblemLabel, float]] = {
    1: (ProblemLabel.RICCATI1, 0.75),
    2: (ProblemLabel.RICCATI1, 0.9),
    3: (ProblemLabel.RICCATI2, 0.9),
}


def get_table(table_id) -> ReferenceTable:
    if isinstance(table_id, TableId):
        return TABLES[table_id]
    try:
        return TABLES[TableId(str(table_id))]
    except ValueError:
        raise GfdInputError(f"unknown table id {table_id!r}; expected 1, 2 or 3") from None
