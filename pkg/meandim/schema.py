"""Schema classes for the meandim package."""

from __future__ import annotations

import math
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from . import SPEC_VERSION, __version__
from .exceptions import PreconditionError


class VersionResponse(BaseModel):
    """
    Response model for `meandim --version`.

    Attributes:
        version (str): The version of the tool.
        spec_version (str): The version of the requirements it implements.
    """

    version: str = __version__
    spec_version: str = SPEC_VERSION


class GrowthTable(BaseModel):
    """
    Growth function of a group up to a radius.

    Attributes:
        group (str): The group label.
        radii (list[int]): The radii 0..n_max.
        ball_sizes (list[int]): gamma_S(0..n_max).
        enumeration (list | None): The elements ordered by (word length,
            generator-lexicographic order), when requested.
        degree_fit (float): The fitted growth degree.
        bass_degree (int | None): The exact degree from the lower central series.
    """

    group: str
    radii: list[int]
    ball_sizes: list[int]
    enumeration: list[Any] | None = None
    degree_fit: float
    bass_degree: int | None = None

    @model_validator(mode="after")
    def _check_sizes(self) -> GrowthTable:
        if self.ball_sizes and self.ball_sizes[0] != 1:
            raise ValueError("gamma(0) must be 1.")
        if any(b < a for a, b in zip(self.ball_sizes, self.ball_sizes[1:])):
            raise ValueError("The growth function must be nondecreasing.")
        return self


class TableRow(BaseModel):
    """
    One cell of a convergence table.

    Attributes:
        N (int | None): The G1 radius.
        M (int | None): The depth, i.e. the scale 2^-M.
        value (float): The estimator value.
        exact (bool): Whether the value is exact (not an upper bound or a
            floating point estimate).
        epsilon (float | None): The distortion level, for rate distortion rows.
        extrapolated (float | None): The boundary-corrected N -> infinity value.
    """

    model_config = ConfigDict(frozen=True)

    N: int | None = None
    M: int | None = None
    value: float
    exact: bool = True
    epsilon: float | None = None
    extrapolated: float | None = None

    @field_validator("value")
    @classmethod
    def _check_finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("Table values must be finite.")
        return value


class ConvergenceTable(BaseModel):
    """
    Rows (N, M, value) tracking an estimator towards its theoretical limit.

    Attributes:
        estimator (str): The estimator name.
        rows (list[TableRow]): The rows, sorted by (M, N).
        target (float | None): The predicted limit, None when unknown.
    """

    estimator: str
    rows: list[TableRow] = Field(default_factory=list)
    target: float | None = None

    @field_validator("rows")
    @classmethod
    def _sort_rows(cls, rows: list[TableRow]) -> list[TableRow]:
        return sorted(rows, key=lambda row: (row.M or 0, row.N or 0))

    def value_at(self, N: int | None, M: int | None) -> float:
        """
        Return the value of the row (N, M).

        Args:
            N (int | None): The radius.
            M (int | None): The depth.

        Returns:
            float: The value.

        Raises:
            KeyError: If there is no such row.
        """
        for row in self.rows:
            if row.N == N and row.M == M:
                return row.value
        raise KeyError((N, M))

    @property
    def exact(self) -> bool:
        """True when every row is exact."""
        return all(row.exact for row in self.rows)


class GrowthConstants(BaseModel):
    """
    Finite-range proxies of c1 = limsup |B(n)|/n and c2 = liminf |B(n)|/n.

    Attributes:
        group (str): The group label.
        estimates (list[float]): |B(n)|/n for n = 1..n_max.
        c1 (float): The tail maximum.
        c2 (float): The tail minimum.
        slope (float): Least-squares slope of gamma(n) over the tail.
        degree_fit (float): The fitted growth degree of the group.
    """

    group: str
    estimates: list[float]
    c1: float
    c2: float
    slope: float
    degree_fit: float

    @model_validator(mode="after")
    def _check_order(self) -> GrowthConstants:
        if self.c2 > self.c1:
            raise ValueError("c2 cannot exceed c1.")
        return self

    @property
    def c(self) -> float:
        """The growth rate used as the theorem constant."""
        return self.slope


class PatternCount(BaseModel):
    """
    The number of patterns a subshift admits on a window.

    Attributes:
        value (int): The count |pi_W(X)|, or an upper bound.
        log2 (float | None): log2 of the count; None when it is 0.
        exact (bool): False when only locally admissible patterns were counted.
        method (str): How the count was obtained.
        cells (int): The window size.
    """

    value: int
    log2: float | None
    exact: bool
    method: str
    cells: int

    def positive_log2(self) -> float:
        """Return log2 of the count, which must be positive."""
        if self.log2 is None:
            raise PreconditionError("The subshift admits no pattern on this window.")
        return self.log2


class Verdict(BaseModel):
    """
    Comparison of an achieved value with its predicted target.

    Attributes:
        name (str): What is compared.
        target (float | None): The predicted value.
        achieved (float): The computed value.
        deviation (float | None): |achieved - target|.
        exact (bool): Whether `achieved` is exact.
        passed (bool | None): Whether the comparison holds, when it is a check.
    """

    name: str
    target: float | None = None
    achieved: float
    deviation: float | None = None
    exact: bool = True
    passed: bool | None = None

    @model_validator(mode="after")
    def _fill_deviation(self) -> Verdict:
        if self.target is not None and self.deviation is None:
            self.deviation = abs(self.achieved - self.target)
        return self


class Timestamp(BaseModel):
    """Wall-clock data, the only nondeterministic part of a report."""

    started: str = ""
    wall_time_s: float = 0.0


class ReportMetadata(BaseModel):
    """
    Metadata of a report.

    Attributes:
        tool_version (str): The meandim version.
        spec_version (str): The requirements version.
        command (str): The subcommand.
        config_hash (str): SHA-256 of the canonical run config.
        seed (int): The random seed.
        timestamp (Timestamp): Start time and wall time.
    """

    tool_version: str = __version__
    spec_version: str = SPEC_VERSION
    command: str
    config_hash: str
    seed: int = 0
    timestamp: Timestamp = Field(default_factory=Timestamp)


class Findings(BaseModel):
    """
    Tables, verdicts and diagnostics computed by one operation.

    Attributes:
        tables (list[ConvergenceTable]): Numeric tables.
        verdicts (list[Verdict]): Target comparisons and checks.
        diagnostics (dict[str, Any]): Further structured results.
    """

    tables: list[ConvergenceTable] = Field(default_factory=list)
    verdicts: list[Verdict] = Field(default_factory=list)
    diagnostics: dict[str, Any] = Field(default_factory=dict)

    def table(self, estimator: str) -> ConvergenceTable:
        """
        Return the table produced by an estimator.

        Args:
            estimator (str): The estimator name.

        Returns:
            ConvergenceTable: The table.

        Raises:
            KeyError: If the report has no such table.
        """
        for table in self.tables:
            if table.estimator == estimator:
                return table
        raise KeyError(estimator)

    def verdict(self, name: str) -> Verdict:
        """Return the verdict with the given name."""
        for verdict in self.verdicts:
            if verdict.name == name:
                return verdict
        raise KeyError(name)


class Report(Findings):
    """
    The result of one run: findings plus run metadata.

    Attributes:
        metadata (ReportMetadata): Run metadata.
    """

    metadata: ReportMetadata


class HypothesisCheck(BaseModel):
    """
    One inequality among the hypotheses of the covering lemma.

    Attributes:
        name (str): `containment`, `tempered` or `cross_level`.
        level (int): The level i, counted from 1.
        index (int): The shape index k, counted from 1.
        lhs (float): The measured side.
        rhs (float): The bound.
        passed (bool): Whether lhs <= rhs.
    """

    name: str
    level: int
    index: int
    lhs: float
    rhs: float
    passed: bool


class HypothesisReport(BaseModel):
    """
    Exact evaluation of the covering lemma hypotheses of an instance.

    Attributes:
        checks (list[HypothesisCheck]): Every evaluated inequality.
        alpha (float): min_i |D A_{i,*}| / |F|.
        passed (bool): Whether every check holds.
    """

    checks: list[HypothesisCheck] = Field(default_factory=list)
    alpha: float
    passed: bool

    @property
    def failures(self) -> list[HypothesisCheck]:
        """The checks that do not hold."""
        return [check for check in self.checks if not check.passed]


class SelectionResult(BaseModel):
    """
    An eps-disjoint subfamily of translates chosen from a covering instance.

    Attributes:
        chosen (list[tuple[int, int, Any]]): Translates (i, j, a) standing for
            F_{i,j} a, levels and indices counted from 1.
        epsilon (float): The disjointness parameter 10 delta^(1/4).
        covered (int): |U F|, computed by set union.
        ambient_size (int): |F|.
        target (float): (alpha - delta^(1/4)) |F|.
        met_target (bool): Whether covered >= target.
        disjoint (bool): Whether the family was re-verified eps-disjoint.
        heuristic (bool): Whether that verification used the greedy heuristic.
        restarts (int): Randomized restarts used after the greedy pass.
        total_size (int): The sum of the translate sizes.
    """

    chosen: list[tuple[int, int, Any]] = Field(default_factory=list)
    epsilon: float
    covered: int
    ambient_size: int
    target: float
    met_target: bool
    disjoint: bool
    heuristic: bool = False
    restarts: int = 0
    total_size: int = 0

    @property
    def covered_fraction(self) -> float:
        """|U F| / |F|."""
        return self.covered / self.ambient_size
