"""Composition of the two diagonal sectors into a full measurement run.

The up sector relaxes under +g weighted by the spin's r_up population, the
down sector under -g weighted by r_down; their conditional pointer
distributions must each conserve their Born weight.  Off-diagonal (coherence)
dynamics is reported only through its time scales and suppression ratios;
no coherence trajectory is computed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .analytic import RegimeReport, classify_regime, time_scales
from .fokker_planck import FPConfig, gaussian_field, solve_fp
from .master import evolve, initial_distribution
from .model import ModelParams, derived_scales

__all__ = [
    "SpinState",
    "SectorOutcome",
    "OffdiagonalScales",
    "MeasurementReport",
    "run_measurement",
    "offdiagonal_scales",
]


@dataclass(frozen=True)
class SpinState:
    """Initial state of the measured spin: diagonal populations and coherence."""

    r_up: float
    r_down: float
    offdiag_mag: float = 0.0

    def __post_init__(self):
        if self.r_up < 0 or self.r_down < 0:
            raise ValueError("populations must be nonnegative")
        if abs(self.r_up + self.r_down - 1.0) > 1e-12:
            raise ValueError("populations must sum to 1")
        bound = math.sqrt(self.r_up * self.r_down)
        if self.offdiag_mag < 0 or self.offdiag_mag > bound + 1e-12:
            raise ValueError("coherence magnitude violates the Cauchy-Schwarz bound")


@dataclass
class SectorOutcome:
    sector: str
    born_weight: float
    p_correct: float
    p_wrong: float
    peak_m: float
    mass_drift: float
    final: object  # DiscreteDistribution or ContinuumField


@dataclass(frozen=True)
class OffdiagonalScales:
    tau_red: float
    t_recurrence: float
    bath_suppression_ratio: float
    spread_suppression_ratio: float
    theta: float
    tau_reg: float
    ordering_ok: bool  # tau_red < theta < tau_reg


@dataclass
class MeasurementReport:
    sectors: dict
    born_check: float
    offdiag: OffdiagonalScales | None
    offdiag_mag: float  # carried through; decays on the tau_red scale
    regime: RegimeReport
    conclusive: bool
    faithful: bool | None  # None when the run ended before the horizon


def _mirrored_for_scales(params: ModelParams) -> ModelParams:
    """Frame with nonnegative effective coupling, for toward-target scales."""
    if params.g_eff >= 0:
        return params
    return replace(params, sector="up", coupling_g=-params.g_eff,
                   m_offset=-params.m_offset)


def _sector_run_master(params: ModelParams, t_end: float, tol: float,
                       init_kind: str):
    init = initial_distribution(params, init_kind)
    res = evolve(init, params, t_end, tol=tol)
    dist = res.final
    m_rep = -params.g_eff / (params.coupling_j - params.temp_bath)
    below = dist.mass_below(m_rep)
    above = dist.total() - below
    drift = abs(dist.total() - 1.0)
    return dist, above, below, drift


def _sector_run_fp(params: ModelParams, t_end: float, cfg: FPConfig):
    init = gaussian_field(params, cfg)
    fld = solve_fp(params, init, [t_end], cfg)[0]
    m_rep = -params.g_eff / (params.coupling_j - params.temp_bath)
    dm = fld.dm
    below = float(fld.values[fld.mesh < m_rep].sum() * dm)
    above = fld.total() - below
    drift = abs(fld.total() - 1.0)
    return fld, above, below, drift


def run_measurement(spin: SpinState, params: ModelParams, t_end: float,
                    engine: str = "master", tol: float = 1e-9,
                    fp_config: FPConfig | None = None,
                    p_wrong_bound: float = 1e-3,
                    stray_ratio_max: float = 1.0,
                    coupling_ratio_min: float = 1.0,
                    g0: float = 0.0,
                    g_spread: float = 0.0,
                    init_kind: str = "exact-paramagnet") -> MeasurementReport:
    """Run both diagonal sectors and assemble the measurement verdict.

    Faithfulness requires all of: every sector's wrong-peak mass below
    `p_wrong_bound`, the pre-measurement bias ratio below `stray_ratio_max`,
    and the coupling ratio above `coupling_ratio_min`.  A run shorter than
    the registration/relaxation horizon is flagged inconclusive (faithful is
    None) rather than unfaithful.
    """
    params.require_ferromagnetic()
    if engine not in ("master", "fp"):
        raise ValueError("engine must be 'master' or 'fp'")
    sectors = {}
    horizon = 0.0
    for name, weight in (("up", spin.r_up), ("down", spin.r_down)):
        sp = replace(params, sector=name)
        if engine == "master":
            final, above, below, drift = _sector_run_master(sp, t_end, tol, init_kind)
            peak = final.peak()
        else:
            final, above, below, drift = _sector_run_fp(sp, t_end,
                                                        fp_config or FPConfig())
            peak = final.peak()
        correct, wrong = (above, below) if sp.g_eff > 0 else (below, above)
        if sp.g_eff == 0.0:
            correct, wrong = above, below  # symmetric: bookkeeping only
        sectors[name] = SectorOutcome(
            sector=name, born_weight=weight, p_correct=correct, p_wrong=wrong,
            peak_m=peak, mass_drift=drift, final=final,
        )
        ts = time_scales(_mirrored_for_scales(sp))
        horizon = max(horizon, min(ts.tau_reg, ts.tau_relax))

    born_check = max(s.mass_drift for s in sectors.values())
    regime = classify_regime(params, g0=g0)
    offd = offdiagonal_scales(params, g_spread) if params.coupling_g > 0 else None
    conclusive = t_end >= horizon
    if not conclusive:
        faithful = None
    else:
        faithful = (
            all(s.p_wrong < p_wrong_bound for s in sectors.values())
            and regime.stray_bias_ratio < stray_ratio_max
            and regime.coupling_ratio > coupling_ratio_min
        )
    return MeasurementReport(
        sectors=sectors,
        born_check=born_check,
        offdiag=offd,
        offdiag_mag=spin.offdiag_mag,
        regime=regime,
        conclusive=conclusive,
        faithful=faithful,
    )


def offdiagonal_scales(params: ModelParams, g_spread: float = 0.0
                       ) -> OffdiagonalScales:
    """Coherence-decay time scales and the two recurrence-suppression ratios.

    tau_red = hbar/(sqrt(2N) g); recurrences at pi hbar/(2g) are harmless
    when the bath ratio gamma N hbar^2 Gamma^2 / g^2 or the coupling-spread
    ratio (dg/g) sqrt(N) is large.  Also reports whether the scale ordering
    tau_red < theta < tau_reg holds.
    """
    g = params.coupling_g
    if g <= 0:
        raise ValueError("offdiagonal scales need a positive coupling g")
    if g_spread < 0:
        raise ValueError("g_spread must be nonnegative")
    n, hb = params.n_spins, params.hbar
    tau_red = hb / (math.sqrt(2.0 * n) * g)
    t_rec = math.pi * hb / (2.0 * g)
    bath_ratio = params.gamma * n * hb * hb * params.debye_cutoff**2 / (g * g)
    spread_ratio = g_spread / g * math.sqrt(n) if g_spread > 0 else 0.0
    if params.temp_bath < params.coupling_j:
        ds = derived_scales(_mirrored_for_scales(params))
        theta = ds.theta
        tau_reg = time_scales(_mirrored_for_scales(params)).tau_reg
    else:
        theta = math.inf
        tau_reg = math.inf
    ordering = tau_red < theta < tau_reg
    return OffdiagonalScales(
        tau_red=tau_red,
        t_recurrence=t_rec,
        bath_suppression_ratio=bath_ratio,
        spread_suppression_ratio=spread_ratio,
        theta=theta,
        tau_reg=tau_reg,
        ordering_ok=ordering,
    )
