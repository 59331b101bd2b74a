"""Services classes and utils for the meandim package."""

import csv
import hashlib
import io
import json
import logging
import math
import time
from datetime import datetime, timezone
from typing import Callable, ClassVar

from .covering import check_hypotheses, generate_instance, select_subfamily
from .enums import Command, OutputFormat
from .estimators import (
    default_measure,
    growth_constants,
    h_top_estimate,
    hdim_lower_table,
    hdim_upper_table,
    mdim_M_estimate,
    s_rate,
    verify_theorem1,
)
from .exceptions import PreconditionError
from .groups import growth_table, is_tempered_prefix
from .information import (
    entropy_rate,
    lower_depth,
    measure_entropy,
    rd_lower,
    rd_upper,
    upper_depth,
    verify_theorem2,
)
from .model import GroupSpec, MeasureSpec, RunConfig, SubshiftSpec, TranslateArray
from .schema import (
    ConvergenceTable,
    Findings,
    Report,
    ReportMetadata,
    TableRow,
    Timestamp,
    Verdict,
)
from .subshifts import ball_window, check_compatible, count_patterns

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("estimator", "N", "M", "value", "exact_flag", "target")


def config_hash(config: RunConfig) -> str:
    """
    Return the SHA-256 of the canonical JSON form of a run config.

    Args:
        config (RunConfig): The run.

    Returns:
        str: The hex digest.
    """
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()


class MeanDimController:
    """
    Controller running one subcommand of a run config.

    Attributes:
        config (RunConfig): The run.
    """

    commands: ClassVar[dict[Command, str]] = {
        Command.GROUP: "group_growth",
        Command.COUNT: "count",
        Command.ENTROPY: "entropy",
        Command.MDIM: "mdim",
        Command.HDIM: "hdim",
        Command.RDIM: "rdim",
        Command.COVERING: "covering",
        Command.VERIFY_T1: "verify_t1",
        Command.VERIFY_T2: "verify_t2",
    }

    def __init__(self, config: RunConfig) -> None:
        self.config = config

    @property
    def group(self) -> GroupSpec:
        """The configured group; every command needs one except `covering`."""
        if self.config.group is None:
            raise PreconditionError(f"{self.config.command.value} needs a <group>.")
        return self.config.group

    @property
    def shift(self) -> SubshiftSpec:
        """The configured subshift, checked against the group."""
        if self.config.shift is None:
            raise PreconditionError(f"{self.config.command.value} needs a <shift>.")
        check_compatible(self.group, self.config.shift)
        return self.config.shift

    @property
    def measure(self) -> MeasureSpec:
        """The configured measure, or the default measure of the subshift."""
        measure = self.config.measure or default_measure(self.shift)
        if measure is None:
            raise PreconditionError(
                f"{self.config.command.value} needs a <measure> for this subshift."
            )
        return measure

    def run(self) -> Report:
        """
        Run the configured subcommand.

        Returns:
            Report: The findings with run metadata.
        """
        started = datetime.now(timezone.utc)
        clock = time.perf_counter()
        method: Callable[[], Findings] = getattr(
            self, self.commands[self.config.command]
        )
        logger.info("Running %s", self.config.command.value)
        findings = method()
        metadata = ReportMetadata(
            command=self.config.command.value,
            config_hash=config_hash(self.config),
            seed=self.config.seed,
            timestamp=Timestamp(
                started=started.isoformat(),
                wall_time_s=time.perf_counter() - clock,
            ),
        )
        return Report(**findings.model_dump(), metadata=metadata)

    def group_growth(self) -> Findings:
        """Return the growth table of the group, with optional witnesses."""
        budget = self.config.budget
        table = growth_table(self.group, budget.n_max, self.config.enumerate)
        rows = [
            TableRow(N=n, value=float(size))
            for n, size in zip(table.radii, table.ball_sizes)
        ]
        diagnostics: dict = {
            "degree_fit": table.degree_fit,
            "bass_degree": table.bass_degree,
        }
        if table.enumeration is not None:
            diagnostics["enumeration"] = table.enumeration
        if self.config.tempered and budget.n_max >= 1:
            diagnostics["tempered_constant"] = float(
                is_tempered_prefix(self.group, budget.n_max)
            )
        verdicts = []
        if table.bass_degree is not None:
            verdicts.append(
                Verdict(
                    name="degree",
                    target=float(table.bass_degree),
                    achieved=table.degree_fit,
                    exact=False,
                )
            )
        return Findings(
            tables=[ConvergenceTable(estimator="growth", rows=rows)],
            verdicts=verdicts,
            diagnostics=diagnostics,
        )

    def count(self) -> Findings:
        """Count the patterns on the window B_S1(M)B_S1(N) x B_S2(M)."""
        budget = self.config.budget
        window = ball_window(budget.window_N, budget.window_M, self.group)
        result = count_patterns(self.shift, window, self.group)
        rows = []
        if result.log2 is not None:
            rows.append(
                TableRow(
                    N=budget.window_N,
                    M=budget.window_M,
                    value=result.log2,
                    exact=result.exact,
                )
            )
        return Findings(
            tables=[ConvergenceTable(estimator="log2_count", rows=rows)],
            diagnostics={
                "count": str(result.value),
                "method": result.method,
                "cells": result.cells,
                "window": window.provenance,
            },
        )

    def entropy(self) -> Findings:
        """Tabulate the topological entropy, and h_mu when a measure is given."""
        budget = self.config.budget
        tables = [
            h_top_estimate(self.shift, self.group, budget.n_list, self.config.jobs)
        ]
        if self.config.measure is not None:
            tables.append(
                measure_entropy(
                    self.config.measure, self.shift, self.group, budget.n_list
                )
            )
        verdicts = [
            Verdict(
                name=table.estimator,
                target=table.target,
                achieved=table.rows[-1].value,
                exact=table.exact,
            )
            for table in tables
            if table.rows
        ]
        return Findings(tables=tables, verdicts=verdicts)

    def mdim(self) -> Findings:
        """Tabulate S(X, G1, d, 2^-M) / M and the rate at the deepest M."""
        budget = self.config.budget
        jobs = self.config.jobs
        table = mdim_M_estimate(
            self.shift, self.group, budget.M_list, budget.N_list, jobs, budget.n_max
        )
        rate = s_rate(self.shift, self.group, budget.M_list[-1], budget.N_list, jobs)
        assert self.group.right is not None
        constants = growth_constants(self.group.right, max(budget.n_max, 1))
        verdict = Verdict(
            name="mdim_M",
            target=table.target,
            achieved=table.value_at(budget.N_list[-1], budget.M_list[-1]),
            exact=table.exact,
        )
        return Findings(
            tables=[table, rate],
            verdicts=[verdict],
            diagnostics=constants.model_dump(exclude={"estimates"}),
        )

    def hdim(self) -> Findings:
        """Tabulate the scale-Hausdorff upper bound and its mass certificate."""
        budget = self.config.budget
        jobs = self.config.jobs
        upper = hdim_upper_table(
            self.shift, self.group, budget.M_list, budget.N_list, jobs
        )
        tables = [upper]
        measure = self.config.measure or default_measure(self.shift)
        if measure is not None:
            lower = hdim_lower_table(
                self.shift, measure, self.group, budget.M_list, budget.N_list, jobs
            )
            tables.append(lower)
        return Findings(tables=tables)

    def rdim(self) -> Findings:
        """
        Tabulate the rate distortion bounds over eps and N, raw and divided
        by log2(1/eps).
        """
        budget = self.config.budget
        measure, shift, group = self.measure, self.shift, self.group
        eps_list = budget.eps_list or tuple(
            0.75 * budget.delta * 2.0**-M for M in budget.M_list
        )
        assert group.right is not None
        constants = growth_constants(group.right, max(budget.n_max, 1))
        target = constants.c * entropy_rate(measure)
        upper, lower, upper_scaled, lower_scaled = [], [], [], []
        for eps in eps_list:
            scale = math.log2(1.0 / eps)
            for N in budget.N_list:
                value = rd_upper(measure, shift, group, N, eps)
                row = TableRow(N=N, M=upper_depth(eps), value=value, epsilon=eps)
                upper.append(row)
                upper_scaled.append(row.model_copy(update={"value": value / scale}))
                if eps >= budget.delta:
                    continue
                value = rd_lower(measure, shift, group, N, eps, budget.delta)
                row = TableRow(
                    N=N, M=lower_depth(eps, budget.delta), value=value, epsilon=eps
                )
                lower.append(row)
                lower_scaled.append(row.model_copy(update={"value": value / scale}))
        return Findings(
            tables=[
                ConvergenceTable(estimator="rd_upper", rows=upper),
                ConvergenceTable(estimator="rd_lower", rows=lower),
                ConvergenceTable(
                    estimator="rd_upper_per_log", rows=upper_scaled, target=target
                ),
                ConvergenceTable(
                    estimator="rd_lower_per_log", rows=lower_scaled, target=target
                ),
            ],
            diagnostics={"c": constants.c, "delta": budget.delta},
        )

    def instance(self) -> TranslateArray:
        """The configured covering instance, or the generated preset."""
        if self.config.instance is not None:
            return self.config.instance
        if self.config.generate:
            return generate_instance(self.config.generate, self.config.seed)
        raise PreconditionError("covering needs an <instance> or a <generate> preset.")

    def covering(self) -> Findings:
        """Check the hypotheses of an instance and select a subfamily."""
        instance = self.instance()
        report = check_hypotheses(instance)
        result = select_subfamily(instance, self.config.seed)
        verdicts = [
            Verdict(
                name="coverage",
                target=result.target,
                achieved=float(result.covered),
                passed=result.met_target,
            ),
            Verdict(
                name="eps-disjoint",
                target=result.epsilon,
                achieved=float(len(result.chosen)),
                exact=not result.heuristic,
                passed=result.disjoint,
            ),
        ]
        return Findings(
            verdicts=verdicts,
            diagnostics={
                "hypotheses": report.model_dump(),
                "selection": result.model_dump(),
                "depth": instance.depth,
            },
        )

    def verify_t1(self) -> Findings:
        """Compare the mean dimension proxies with c * h_top."""
        return verify_theorem1(
            self.shift,
            self.group,
            self.config.budget,
            self.config.measure,
            self.config.jobs,
        )

    def verify_t2(self) -> Findings:
        """Show the rate distortion bounds closing on c * h_mu."""
        return verify_theorem2(self.measure, self.shift, self.group, self.config.budget)


def run(config: RunConfig) -> Report:
    """
    Run a config.

    Args:
        config (RunConfig): The run.

    Returns:
        Report: The report.
    """
    return MeanDimController(config).run()


def _cell(value: float | int | None) -> str:
    if value is None:
        return ""
    return json.dumps(value)


def emit(report: Report, output_format: OutputFormat) -> bytes:
    """
    Serialize a report.

    CSV has one line per table row with the header
    `estimator,N,M,value,exact_flag,target`; numbers are written as JSON
    writes them, so both formats carry identical numeric cells. JSON keys are
    sorted.

    Args:
        report (Report): The report.
        output_format (OutputFormat): csv or json.

    Returns:
        bytes: The UTF-8 encoded document.
    """
    if output_format == OutputFormat.JSON:
        document = json.dumps(report.model_dump(mode="json"), sort_keys=True, indent=2)
        return (document + "\n").encode()
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for table in report.tables:
        for row in table.rows:
            writer.writerow(
                [
                    table.estimator,
                    _cell(row.N),
                    _cell(row.M),
                    _cell(row.value),
                    str(row.exact).lower(),
                    _cell(table.target),
                ]
            )
    return buffer.getvalue().encode()
