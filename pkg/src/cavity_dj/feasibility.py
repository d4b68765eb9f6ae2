"""Timing budget of the cavity protocol against atomic and cavity lifetimes."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from math import pi

from .dynamics import tau_for_phi

FEASIBLE_MARGIN = 10.0
MARGINAL_MARGIN = 1.0


@dataclass(frozen=True)
class HardwareParams:
    """Rydberg-atom / superconducting-cavity numbers. Rates in rad/s, times in s."""

    g: float = 2 * pi * 25e3
    delta: float = 2 * pi * 100e3
    radiative_time: float = 1e-2
    cavity_damping_time: float = 1e-2

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")


@dataclass(frozen=True)
class FeasibilityReport:
    tau_per_atom: float
    prep_time: float
    n_atoms: int
    total_time: float
    radiative_margin: float
    damping_margin: float
    verdict: str

    def to_dict(self) -> dict:
        return asdict(self)


def verdict_for(radiative_margin: float, damping_margin: float) -> str:
    worst = min(radiative_margin, damping_margin)
    if worst > FEASIBLE_MARGIN:
        return "feasible"
    if worst > MARGINAL_MARGIN:
        return "marginal"
    return "infeasible"


def feasibility_report(hw: HardwareParams, phi: float, n_atoms: int) -> FeasibilityReport:
    """Total time = one resonant preparation pulse ``(pi/2)/g`` plus ``n_atoms``
    dispersive passages of ``tau = phi delta / g^2`` each."""
    if n_atoms < 1:
        raise ValueError("n_atoms must be >= 1")
    tau = tau_for_phi(phi, hw.g, hw.delta)
    prep = (pi / 2) / hw.g
    total = n_atoms * tau + prep
    rad = hw.radiative_time / total
    damp = hw.cavity_damping_time / total
    return FeasibilityReport(tau, prep, n_atoms, total, rad, damp, verdict_for(rad, damp))


def max_feasible_atoms(hw: HardwareParams, phi: float, limit: int = 1_000_000) -> int:
    """Largest register size still rated ``feasible`` (0 if even one atom is not)."""
    lo, hi = 0, limit
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if feasibility_report(hw, phi, mid).verdict == "feasible":
            lo = mid
        else:
            hi = mid - 1
    return lo
