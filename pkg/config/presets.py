# config/presets.py
from __future__ import annotations

from dataclasses import replace
from typing import Optional

from pipelines.scheduler import ScheduleConfig
from solvers.newton import NewtonConfig
from solvers.sumt import SumtConfig


def default_config() -> ScheduleConfig:
    """Thresholds straight from SETTINGS (mu0 'auto' unless EHSCHED_MU0 says otherwise)."""
    return ScheduleConfig()


def paper_preset() -> ScheduleConfig:
    """mu0=1, eta=2, eps_N=1e-8, eps_S=1e-10, eps_b=1e-3."""
    return ScheduleConfig(
        eps_bisect=1e-3,
        sumt=SumtConfig(mu0=1.0, eta=2.0, eps_sumt=1e-10, newton=NewtonConfig(eps_newton=1e-8)),
    )


def fast_preset() -> ScheduleConfig:
    """paper_preset with the relaxed Newton (1e-3) and bisection (1e-2) thresholds."""
    return with_overrides(paper_preset(), eps_newton=1e-3, eps_bisect=1e-2)


PRESETS = {
    "default": default_config,
    "paper": paper_preset,
    "fast": fast_preset,
}


def with_overrides(
    cfg: ScheduleConfig,
    mu0: Optional[object] = None,
    eta: Optional[float] = None,
    eps_newton: Optional[float] = None,
    eps_sumt: Optional[float] = None,
    eps_bisect: Optional[float] = None,
    feas_tol: Optional[float] = None,
) -> ScheduleConfig:
    """Copy of cfg with every non-None override applied."""
    newton = cfg.sumt.newton if eps_newton is None else replace(cfg.sumt.newton, eps_newton=eps_newton)
    sumt_changes = {"newton": newton}
    if mu0 is not None:
        sumt_changes["mu0"] = mu0 if mu0 == "auto" else float(mu0)
    if eta is not None:
        sumt_changes["eta"] = eta
    if eps_sumt is not None:
        sumt_changes["eps_sumt"] = eps_sumt
    if feas_tol is not None:
        sumt_changes["feas_tol"] = feas_tol
    out = replace(cfg, sumt=replace(cfg.sumt, **sumt_changes))
    if eps_bisect is not None:
        out = replace(out, eps_bisect=eps_bisect)
    return out
