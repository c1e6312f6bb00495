# config/settings.py
from __future__ import annotations
import logging
import os
from dataclasses import dataclass
from dotenv import load_dotenv

load_dotenv()  # load .env once, everywhere else just import SETTINGS


def _env_float(name: str, default: str) -> float:
    raw = os.getenv(name, default)
    try:
        return float(raw)
    except ValueError:
        raise RuntimeError(f"{name} must be a number, got {raw!r}")


def _env_int(name: str, default: str) -> int:
    raw = os.getenv(name, default)
    try:
        return int(raw)
    except ValueError:
        raise RuntimeError(f"{name} must be an integer, got {raw!r}")


@dataclass(frozen=True)
class _Settings:
    # --- Logging ---
    LOG_LEVEL: str = os.getenv("EHSCHED_LOG", "INFO")
    PRINT_CONFIG_ON_STARTUP: bool = os.getenv("EHSCHED_PRINT_CONFIG", "false").lower() == "true"

    # --- SUMT / Newton ---
    MU0: str = os.getenv("EHSCHED_MU0", "auto")                     # auto|<number>
    ETA: float = _env_float("EHSCHED_ETA", "2")
    EPS_NEWTON: float = _env_float("EHSCHED_EPS_NEWTON", "1e-8")
    EPS_SUMT: float = _env_float("EHSCHED_EPS_SUMT", "1e-10")
    NEWTON_MAX_STEPS: int = _env_int("EHSCHED_NEWTON_MAX_STEPS", "200")
    ARMIJO_C: float = _env_float("EHSCHED_ARMIJO_C", "1e-4")
    BACKTRACK_BETA: float = _env_float("EHSCHED_BACKTRACK_BETA", "0.5")
    LEVENBERG_INIT: float = _env_float("EHSCHED_LEVENBERG_INIT", "1e-10")
    FEAS_TOL: float = _env_float("EHSCHED_FEAS_TOL", "1e-6")

    # --- Bisection ---
    EPS_BISECT: float = _env_float("EHSCHED_EPS_BISECT", "1e-3")
    MAX_BOUND_EXTENSIONS: int = _env_int("EHSCHED_MAX_BOUND_EXTENSIONS", "60")

    # --- Oracles ---
    GRID_STEP: float = _env_float("EHSCHED_GRID_STEP", "1e-3")
    GRID_MAX_DIMS: int = _env_int("EHSCHED_GRID_MAX_DIMS", "3")

    def __post_init__(self):
        if self.MU0 != "auto":
            try:
                mu0 = float(self.MU0)
            except ValueError:
                raise RuntimeError(f"EHSCHED_MU0 must be 'auto' or a number, got {self.MU0!r}")
            if mu0 <= 0:
                raise RuntimeError("EHSCHED_MU0 must be positive")
        if self.ETA <= 1:
            raise RuntimeError("EHSCHED_ETA must be > 1")
        for name in ("EPS_NEWTON", "EPS_SUMT", "EPS_BISECT", "FEAS_TOL", "GRID_STEP", "LEVENBERG_INIT"):
            if getattr(self, name) <= 0:
                raise RuntimeError(f"EHSCHED_{name} must be > 0")
        if not 0 < self.BACKTRACK_BETA < 1:
            raise RuntimeError("EHSCHED_BACKTRACK_BETA must lie in (0, 1)")
        if not 0 < self.ARMIJO_C < 0.5:
            raise RuntimeError("EHSCHED_ARMIJO_C must lie in (0, 0.5)")
        if self.NEWTON_MAX_STEPS < 1 or self.MAX_BOUND_EXTENSIONS < 1 or self.GRID_MAX_DIMS < 1:
            raise RuntimeError("step, extension and dimension caps must be >= 1")

    def pretty(self) -> str:
        return (
            "=== Settings ===\n"
            f"LOG_LEVEL: {self.LOG_LEVEL}\n"
            f"MU0: {self.MU0} | ETA: {self.ETA}\n"
            f"EPS_NEWTON: {self.EPS_NEWTON} | EPS_SUMT: {self.EPS_SUMT} | EPS_BISECT: {self.EPS_BISECT}\n"
            f"NEWTON_MAX_STEPS: {self.NEWTON_MAX_STEPS} | ARMIJO_C: {self.ARMIJO_C} | BETA: {self.BACKTRACK_BETA}\n"
            f"LEVENBERG_INIT: {self.LEVENBERG_INIT} | FEAS_TOL: {self.FEAS_TOL}\n"
            f"MAX_BOUND_EXTENSIONS: {self.MAX_BOUND_EXTENSIONS}\n"
            f"GRID_STEP: {self.GRID_STEP} | GRID_MAX_DIMS: {self.GRID_MAX_DIMS}\n"
        )


SETTINGS = _Settings()

# Optional: log a quick summary on import
if SETTINGS.PRINT_CONFIG_ON_STARTUP:
    logging.getLogger(__name__).info(SETTINGS.pretty())
