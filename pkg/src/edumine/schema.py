"""Attribute names of the per-student feature table and the row type."""

from __future__ import annotations

from dataclasses import astuple, dataclass, fields
from typing import Optional

PREDICTORS = (
    "PE_total_time",
    "PE_total_attempts",
    "PE_reset",
    "PE_model",
    "PE_exercise",
    "SS_total_time",
    "SS_total_visit",
    "slide",
    "Interaction",
    "Total_time",
    "Total_attempts",
    "Total_hints",
    "gaming",
    "exercise",
)
TARGET = "etest"
COLUMNS = PREDICTORS + (TARGET,)
ID_COLUMN = "student_id"

# etest at or below this percentage is labelled ``bad``
PASS_THRESHOLD = 65.0


@dataclass(frozen=True)
class FeatureRow:
    """One student's aggregated interaction profile.

    Times are in seconds, everything else except ``etest`` is a count.
    ``etest`` is the final exam score in percent, ``None`` until graded.
    """

    PE_total_time: float = 0.0
    PE_total_attempts: int = 0
    PE_reset: int = 0
    PE_model: int = 0
    PE_exercise: int = 0
    SS_total_time: float = 0.0
    SS_total_visit: int = 0
    slide: int = 0
    Interaction: int = 0
    Total_time: float = 0.0
    Total_attempts: int = 0
    Total_hints: int = 0
    gaming: int = 0
    exercise: int = 0
    etest: Optional[float] = None

    def as_tuple(self):
        return astuple(self)

    def predictors(self):
        return tuple(getattr(self, name) for name in PREDICTORS)

    def violations(self):
        """Return human-readable descriptions of broken row invariants."""
        problems = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is not None and value < 0:
                problems.append(f"{f.name} is negative")
        if self.slide > self.SS_total_visit:
            problems.append("slide exceeds SS_total_visit")
        if self.PE_total_time > self.Total_time:
            problems.append("PE_total_time exceeds Total_time")
        if self.SS_total_time > self.Total_time:
            problems.append("SS_total_time exceeds Total_time")
        if self.etest is not None and not 0.0 <= self.etest <= 100.0:
            problems.append("etest outside [0, 100]")
        return problems
