"""
Tail tables for a scenario: analytic curves, oracle tails and their comparison.
"""
import logging
from typing import IO, Tuple, Union

import numpy as np
import pandas as pd

from .models import ModelKind, StationaryAnalysis, analyze
from .oracle import (
    AXIS_X,
    AXIS_Y,
    OracleResult,
    stationary_1d,
    stationary_2d_priority,
    stationary_2d_tandem,
    tail_of,
)
from .performance import measure_performance
from .scenario import Scenario

ANALYTIC_COLUMNS = ["R", "exact", "asymptotic", "doob"]
ORACLE_COLUMNS = ["R", "oracle"]
COMPARE_COLUMNS = ["R", "exact", "asymptotic", "doob", "oracle", "ratio"]


def write_csv(frame: pd.DataFrame, target: Union[str, IO]) -> None:
    """Write a table with 17 significant digits and empty cells for missing values."""
    frame.to_csv(target, float_format="%.17g", na_rep="", lineterminator="\n", index=False)


class TailReport:
    """Builds the analyze / oracle / compare tables of one scenario."""

    def __init__(self, scenario: Scenario):
        """Initialize with a validated scenario.

        Args:
            scenario: Model and numerical settings
        """
        self.scenario = scenario
        self.logger = logging.getLogger(__name__)
        self._analysis = None
        self._oracle = None

    @property
    def r_values(self) -> np.ndarray:
        return np.arange(self.scenario.r_max + 1)

    def analysis(self) -> StationaryAnalysis:
        if self._analysis is None:
            s = self.scenario
            self._analysis = analyze(s.to_model_spec(), s.order, s.r_max)
        return self._analysis

    def oracle(self) -> OracleResult:
        """Run (once) the truncated-chain oracle matching the scenario's model."""
        if self._oracle is None:
            s = self.scenario
            s.check_oracle_bounds()
            settings = dict(n_max=s.truncation, tol=s.tol, max_iterations=s.max_iterations)
            if s.model is ModelKind.PRIORITY:
                self._oracle = stationary_2d_priority(s.arrivals, s.arrivals_b, **settings)
            elif s.model is ModelKind.TANDEM:
                self._oracle = stationary_2d_tandem(s.arrivals, s.arrivals_b, **settings)
            else:
                self._oracle = stationary_1d(s.arrivals, s.service_p, **settings)
        return self._oracle

    @property
    def oracle_axis(self) -> str:
        """Flow 2 (queue 2) for the two-queue models, the only queue otherwise."""
        return AXIS_Y if self.scenario.is_two_flow else AXIS_X

    @measure_performance
    def analytic_frame(self) -> pd.DataFrame:
        """Columns R, exact, asymptotic, doob; exact is empty for tandem."""
        result = self.analysis()
        r_max = self.scenario.r_max
        exact = result.tail if result.tail is not None else np.full(r_max + 1, np.nan)
        self.logger.info(f"Analytic tail for '{self.scenario.name}': C={result.asym_prefactor:.6g}, "
                         f"base={result.asym_base:.10g}")
        return pd.DataFrame({
            "R": self.r_values,
            "exact": exact,
            "asymptotic": result.asymptotic_curve(r_max),
            "doob": result.doob_curve(r_max),
        }, columns=ANALYTIC_COLUMNS)

    @measure_performance
    def oracle_frame(self) -> Tuple[pd.DataFrame, OracleResult]:
        """Columns R, oracle, plus the oracle diagnostics."""
        result = self.oracle()
        tail = tail_of(result, self.oracle_axis)[: self.scenario.r_max + 1]
        frame = pd.DataFrame({"R": self.r_values, "oracle": tail}, columns=ORACLE_COLUMNS)
        return frame, result

    def compare_frame(self) -> Tuple[pd.DataFrame, OracleResult]:
        """Analytic and oracle columns side by side, ratio = oracle / asymptotic."""
        analytic = self.analytic_frame()
        simulated, result = self.oracle_frame()
        merged = analytic.merge(simulated, on="R", how="left")
        merged["ratio"] = merged["oracle"] / merged["asymptotic"]
        improvement = (merged["doob"] / merged["asymptotic"]).iloc[-1]
        self.logger.info(f"'{self.scenario.name}': reference curve sits {improvement:.4f}x "
                         "above the asymptotic curve")
        return merged[COMPARE_COLUMNS], result
