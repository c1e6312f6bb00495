# utils/trace.py
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

TRACE_COLUMNS = ("phase", "iteration", "mu", "T_candidate", "F", "objective", "max_violation", "newton_steps")


@dataclass
class TraceRecorder:
    """Collects progress rows (newton, sumt, bound, bisect) for the CSV trace."""
    rows: List[Dict[str, object]] = field(default_factory=list)

    def record(
        self,
        phase: str,
        iteration: int,
        mu: Optional[float] = None,
        T: Optional[float] = None,
        F: Optional[float] = None,
        objective: Optional[float] = None,
        max_violation: Optional[float] = None,
        newton_steps: Optional[int] = None,
    ) -> None:
        self.rows.append({
            "phase": phase,
            "iteration": iteration,
            "mu": mu,
            "T_candidate": T,
            "F": F,
            "objective": objective,
            "max_violation": max_violation,
            "newton_steps": newton_steps,
        })

    def phase(self, name: str) -> List[Dict[str, object]]:
        return [row for row in self.rows if row["phase"] == name]

    def __len__(self) -> int:
        return len(self.rows)
