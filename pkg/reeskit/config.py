"""
Runtime settings and the resource budget.

Settings come from environment variables (see reeskit.constants for names and defaults);
command-line flags override them.
"""

import logging
import os
import threading
import time
from dataclasses import dataclass, replace
from typing import Optional

from reeskit import constants
from reeskit.errors import BudgetExceededError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Settings:
    gb_step_budget: int = constants.DEFAULT_GB_STEP_BUDGET
    cell_budget: int = constants.DEFAULT_CELL_BUDGET
    wall_clock_seconds: float = constants.DEFAULT_WALL_CLOCK_SECONDS
    threads: int = constants.DEFAULT_THREADS
    log_level: str = constants.DEFAULT_LOG_LEVEL

    def with_overrides(
        self,
        threads: Optional[int] = None,
        gb_step_budget: Optional[int] = None,
        cell_budget: Optional[int] = None,
    ) -> "Settings":
        changes: dict = {}
        if threads is not None:
            changes["threads"] = threads
        if gb_step_budget is not None:
            changes["gb_step_budget"] = gb_step_budget
        if cell_budget is not None:
            changes["cell_budget"] = cell_budget
        return replace(self, **changes)


def _int_env(name: str, default: int) -> int:
    raw = os.environ.get(name, "")
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")
    if value < 0:
        raise ValueError(f"{name} must be non-negative, got {value}")
    return value


def load_settings() -> Settings:
    """
    Read settings from the environment.

    Returns:
        Settings with defaults for every unset variable.
    """
    raw_clock = os.environ.get(constants.ENV_WALL_CLOCK_SECONDS, "")
    try:
        wall_clock = float(raw_clock) if raw_clock else constants.DEFAULT_WALL_CLOCK_SECONDS
    except ValueError:
        raise ValueError(
            f"{constants.ENV_WALL_CLOCK_SECONDS} must be a number, got {raw_clock!r}"
        )
    threads = _int_env(constants.ENV_THREADS, constants.DEFAULT_THREADS)
    return Settings(
        gb_step_budget=_int_env(
            constants.ENV_GB_STEP_BUDGET, constants.DEFAULT_GB_STEP_BUDGET
        ),
        cell_budget=_int_env(constants.ENV_CELL_BUDGET, constants.DEFAULT_CELL_BUDGET),
        wall_clock_seconds=wall_clock,
        threads=max(1, threads),
        log_level=os.environ.get(constants.ENV_LOG_LEVEL, constants.DEFAULT_LOG_LEVEL),
    )


class Budget:
    """
    Thread-safe counters for Gröbner steps, graded-piece cells and wall-clock time.

    A limit of 0 means unlimited.
    """

    def __init__(
        self,
        gb_steps: int = 0,
        cells: int = 0,
        wall_clock_seconds: float = 0.0,
    ):
        self.gb_step_limit = gb_steps
        self.cell_limit = cells
        self.wall_clock_seconds = wall_clock_seconds
        self.gb_steps = 0
        self.cells = 0
        self._started = time.monotonic()
        self._lock = threading.Lock()

    @classmethod
    def from_settings(cls, settings: Settings) -> "Budget":
        return cls(
            gb_steps=settings.gb_step_budget,
            cells=settings.cell_budget,
            wall_clock_seconds=settings.wall_clock_seconds,
        )

    @classmethod
    def unlimited(cls) -> "Budget":
        return cls()

    def charge_gb_step(self) -> None:
        with self._lock:
            self.gb_steps += 1
            if self.gb_step_limit and self.gb_steps > self.gb_step_limit:
                raise BudgetExceededError("groebner steps", self.gb_step_limit)
        self.check_clock()

    def charge_cells(self, count: int = 1) -> None:
        with self._lock:
            self.cells += count
            if self.cell_limit and self.cells > self.cell_limit:
                raise BudgetExceededError("cells", self.cell_limit)
        self.check_clock()

    def check_clock(self) -> None:
        if not self.wall_clock_seconds:
            return
        elapsed = time.monotonic() - self._started
        if elapsed > self.wall_clock_seconds:
            logger.warning(f"⚠️ Wall-clock limit reached after {elapsed:.1f}s")
            raise BudgetExceededError("wall clock seconds", self.wall_clock_seconds)
