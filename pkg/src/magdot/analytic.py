"""Closed-form layer: characteristics, transported Gaussians, scaling profile,
splitting probabilities and the named time scales.

These are the independent oracles against which the numerical solvers are
checked.  Three characteristic models are available:

* "exact-quadrature": integrates dm'/v(m') with the fixed-point poles
  subtracted analytically (log terms in closed form), so travel times stay
  accurate arbitrarily close to the fixed points;
* "linearized": the exponential flow of the drift linearized about m = 0;
* "cubic-v": the closed-form flow of the cubic drift model, valid between
  the two ferromagnetic attractors for a small repeller offset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .model import (
    ModelParams,
    DerivedScales,
    derived_scales,
    drift_v,
    drift_v_prime,
    drift_zeros,
)
from .special import erfc

__all__ = [
    "CharMap",
    "CharacteristicsError",
    "RegimeReport",
    "TimeScales",
    "SuzukiProfile",
    "closed_form_P",
    "peak_width_delta",
    "suzuki_alpha",
    "suzuki_profile",
    "suzuki_peak_positions",
    "suzuki_second_max_onset",
    "suzuki_tail_density",
    "split_probabilities",
    "time_scales",
    "classify_regime",
]

_MODELS = ("exact-quadrature", "linearized", "cubic-v")


class CharacteristicsError(RuntimeError):
    """Degenerate or cross-basin characteristic request."""


@dataclass(frozen=True)
class TimeScales:
    tau_reg: float
    t_width_max: float
    delta_max: float
    t_flat: float
    tau_relax: float


@dataclass(frozen=True)
class RegimeReport:
    lam: float
    classification: str  # deterministic | marginal | active-bifurcation
    p_plus: float
    p_minus: float
    tau_reg: float
    tau_relax: float
    t_flat: float
    t_width_max: float
    delta_max: float
    stray_bias_ratio: float      # squared pre-measurement bias over its ceiling
    coupling_ratio: float        # squared coupling bias over the same scale


@dataclass(frozen=True)
class SuzukiProfile:
    values: np.ndarray
    alpha: float
    lam: float


class _ExactFlow:
    """Antiderivative of 1/v on one basin, poles handled in closed form.

    Phi(x) = Q_reg(x) + sum_i ln|x - z_i| / v'(z_i), where Q_reg integrates
    1/v minus its simple poles (smooth across the whole closed basin).
    Phi is monotone on the basin, and travel time is Phi(m) - Phi(mu).
    """

    _GRID = 2000

    def __init__(self, params: ModelParams, lo: float, hi: float,
                 poles: list[tuple[float, float]]):
        self.lo = lo
        self.hi = hi
        self.poles = poles
        span = hi - lo
        self.edge = 1e-13 * span

        def f_reg(x):
            x = np.asarray(x, dtype=float)
            val = 1.0 / drift_v(params, x)
            for z, s in poles:
                val = val - 1.0 / (s * (x - z))
            return val

        # cumulative Gauss-Legendre panels over the closed basin
        edges = np.linspace(lo, hi, self._GRID + 1)
        xg, wg = np.polynomial.legendre.leggauss(15)
        half = 0.5 * (edges[1:] - edges[:-1])
        mid = 0.5 * (edges[1:] + edges[:-1])
        nodes = mid[:, None] + half[:, None] * xg[None, :]
        panel = half * (f_reg(nodes) @ wg)
        q = np.concatenate([[0.0], np.cumsum(panel)])
        self._q_reg = CubicSpline(edges, q)

    def _phi(self, x: float) -> float:
        val = float(self._q_reg(x))
        for z, s in self.poles:
            val += math.log(abs(x - z)) / s
        return val

    def contains(self, x: float) -> bool:
        return self.lo < x < self.hi

    def travel(self, mu: float, m: float) -> float:
        return self._phi(m) - self._phi(mu)

    def advect(self, x0: float, t: float) -> float:
        """Point reached from x0 after time t (negative t runs backward)."""
        if t == 0.0:
            return x0
        target = self._phi(x0) + t
        a, b = self.lo + self.edge, self.hi - self.edge
        fa, fb = self._phi(a) - target, self._phi(b) - target
        if fa == 0.0:
            return a
        if fb == 0.0:
            return b
        if fa * fb > 0.0:
            # past the reachable end within float resolution: saturate
            return a if abs(fa) < abs(fb) else b
        return float(brentq(lambda x: self._phi(x) - target, a, b,
                            xtol=1e-15, rtol=8.9e-16, maxiter=200))


@dataclass(frozen=True)
class CharMap:
    """Forward/inverse characteristic maps for one drift model."""

    params: ModelParams
    model: str = "exact-quadrature"

    def __post_init__(self):
        if self.model not in _MODELS:
            raise ValueError(f"model must be one of {_MODELS}")

    # -- shared scale helpers ------------------------------------------

    def _scales(self) -> DerivedScales:
        return derived_scales(self.params)

    # -- exact model ----------------------------------------------------

    def _flow_for(self, *points: float) -> _ExactFlow:
        zeros = _cached_zeros(self.params)
        for x in points:
            for z, _ in zeros:
                if abs(x - z) < 1e-12:
                    raise CharacteristicsError(
                        f"point {x} sits on a fixed point of the drift")
            if not -1.0 < x < 1.0:
                raise CharacteristicsError(f"point {x} outside (-1, 1)")
        bounds = [-1.0] + [z for z, _ in zeros] + [1.0]
        idx = {np.searchsorted(bounds, x) for x in points}
        if len(idx) > 1:
            raise CharacteristicsError(
                "points lie on opposite sides of a fixed point; "
                "the travel time between them diverges")
        i = idx.pop()
        lo, hi = bounds[i - 1], bounds[i]
        poles = [(z, s) for z, s in zeros if z == lo or z == hi]
        return _cached_flow(self.params, lo, hi, tuple(poles))

    # -- public maps ------------------------------------------------------

    def forward(self, mu: float, t: float) -> float:
        """m(mu, t): characteristic through mu advanced by t."""
        mu, t = float(mu), float(t)
        if self.model == "exact-quadrature":
            return self._flow_for(mu).advect(mu, t)
        ds = self._scales()
        if self.model == "linearized":
            e = math.exp(t / ds.theta)
            return mu * e - ds.m_repel * (e - 1.0)
        # cubic model: exact inversion of the printed backward map, so the
        # forward/backward pair composes to the identity; collapses to the
        # printed forward form when the repeller offset vanishes
        m_f, m_p = ds.m_ferro, ds.m_repel
        if abs(mu) >= m_f:
            raise CharacteristicsError("cubic map defined for |m| < m_F")
        if t == 0.0:
            return mu
        e = math.exp(-t / ds.theta)
        w = mu - m_p
        a = e * e * m_f**2 + w * w * (1.0 - e * e)
        b = 2.0 * m_p * w * w * (1.0 - e * e)
        c = w * w * ((1.0 - e * e) * m_p**2 - m_f**2)
        sgn = 1.0 if w >= 0 else -1.0
        y = (-b + sgn * math.sqrt(b * b - 4.0 * a * c)) / (2.0 * a)
        return m_p + y

    def inverse(self, m: float, t: float) -> float:
        """mu(m, t): the starting point whose characteristic reaches m at t."""
        m, t = float(m), float(t)
        if self.model == "exact-quadrature":
            return self._flow_for(m).advect(m, -t)
        ds = self._scales()
        if self.model == "linearized":
            e = math.exp(t / ds.theta)
            return m / e + ds.m_repel * (1.0 - 1.0 / e)
        if abs(m) >= ds.m_ferro:
            raise CharacteristicsError("cubic map defined for |m| < m_F")
        return float(_cubic_inverse_printed(ds, m, t))

    def travel_time(self, mu: float, m: float) -> float:
        """t such that the characteristic through mu reaches m."""
        mu, m = float(mu), float(m)
        if self.model == "exact-quadrature":
            return self._flow_for(mu, m).travel(mu, m)
        ds = self._scales()
        m_f, m_p = ds.m_ferro, ds.m_repel
        if self.model == "linearized":
            ratio = (m - m_p) / (mu - m_p)
            if ratio <= 0:
                raise CharacteristicsError("points on opposite sides of m_P")
            return ds.theta * math.log(ratio)
        if not (abs(m) < m_f and abs(mu) < m_f):
            raise CharacteristicsError("cubic map defined for |m| < m_F")
        u = (mu - m_p) ** 2
        v = (m - m_p) ** 2
        if (mu - m_p) * (m - m_p) <= 0:
            raise CharacteristicsError("points on opposite sides of m_P")
        den = v * m_f**2 - u * m * m
        arg = u * (m_f**2 - m * m) / den
        if den <= 0 or arg <= 0:
            raise CharacteristicsError("points not connected by the cubic flow")
        return -0.5 * ds.theta * math.log(arg)


@lru_cache(maxsize=32)
def _cached_flow(params: ModelParams, lo: float, hi: float, poles) -> _ExactFlow:
    return _ExactFlow(params, lo, hi, list(poles))


@lru_cache(maxsize=64)
def _cached_zeros(params: ModelParams):
    return tuple((fp.m, drift_v_prime(params, fp.m))
                 for fp in drift_zeros(params))


def _diffusion_c(params: ModelParams, t: float, theta: float) -> float:
    j, tb = params.coupling_j, params.temp_bath
    return -math.expm1(-2.0 * t / theta) * tb / (j - tb)


def _cubic_v(ds: DerivedScales, m, theta: float):
    m = np.asarray(m, dtype=float)
    return (m - ds.m_repel) * (ds.m_ferro**2 - m * m) / (theta * ds.m_ferro**2)


def _cubic_inverse_printed(ds: DerivedScales, m, t: float):
    """The cubic model's backward map in its printed small-repeller form,

        mu = m_P + (m - m_P) e^{-t/theta} m_F / sqrt(m_F^2 - m^2(1-e^{-2t/theta}))

    This is *not* the exact inverse of the forward map (they agree only to
    first order in m_P/m_F), but it is the form the transported-Gaussian
    density is built from, and it tracks the true flow markedly better than
    the exactly-inverted forward map does.
    """
    m = np.asarray(m, dtype=float)
    e = math.exp(-t / ds.theta)
    m_f, m_p = ds.m_ferro, ds.m_repel
    return m_p + (m - m_p) * e * m_f / np.sqrt(
        m_f**2 - m * m * (1.0 - e * e))


def _cubic_inverse_printed_jacobian(ds: DerivedScales, m, t: float):
    """d mu/d m of the printed backward map: the probability-conserving
    transport factor.  Coincides with the drift-velocity ratio v(mu)/v(m)
    when the repeller offset vanishes."""
    m = np.asarray(m, dtype=float)
    e = math.exp(-t / ds.theta)
    m_f, m_p = ds.m_ferro, ds.m_repel
    d = m_f**2 - m * m * (1.0 - e * e)
    return e * m_f * (m_f**2 - m * m_p * (1.0 - e * e)) / d**1.5


def closed_form_P(params: ModelParams, m, t: float, model: str = "gaussian-cubic"):
    """Transported-density solutions of the drift-diffusion dynamics.

    model "drift-only": pure transport of the initial Gaussian along the
    exact characteristics (no diffusion).  "gaussian-linear": drift and
    diffusion with everything linearized about the origin.  "gaussian-cubic":
    the workhorse, diffusion blurring of the initial condition combined with
    the cubic-drift transport; valid between the attractors.
    """
    scalar = np.isscalar(m)
    m_arr = np.atleast_1d(np.asarray(m, dtype=float))
    ds = derived_scales(params)
    theta = ds.theta
    n = params.n_spins
    m0, d0 = params.m_offset, params.delta0

    if model == "drift-only":
        cmap = CharMap(params, "exact-quadrature")
        if t == 0.0:
            mu = m_arr.copy()
        else:
            mu = np.array([cmap.inverse(x, t) for x in m_arr])
        jac = drift_v(params, mu) / drift_v(params, m_arr)
        out = (math.sqrt(n / (2.0 * math.pi)) / d0
               * np.exp(-0.5 * n * ((mu - m0) / d0) ** 2) * jac)
    elif model == "gaussian-linear":
        c = _diffusion_c(params, t, theta)
        width2 = c + d0 * d0
        cmap = CharMap(params, "linearized")
        mu = np.array([cmap.inverse(x, t) for x in m_arr])
        out = (math.sqrt(n / (2.0 * math.pi * width2))
               * np.exp(-0.5 * n * (mu - m0) ** 2 / width2)
               * math.exp(-t / theta))
    elif model == "gaussian-cubic":
        if np.any(np.abs(m_arr) >= ds.m_ferro):
            raise ValueError("gaussian-cubic density defined for |m| < m_F")
        c = _diffusion_c(params, t, theta)
        width2 = c + d0 * d0
        if t == 0.0:
            mu = m_arr.copy()
            jac = np.ones_like(m_arr)
        else:
            mu = _cubic_inverse_printed(ds, m_arr, t)
            jac = _cubic_inverse_printed_jacobian(ds, m_arr, t)
        out = (math.sqrt(n / (2.0 * math.pi * width2))
               * np.exp(-0.5 * n * (mu - m0) ** 2 / width2) * jac)
    else:
        raise ValueError(f"unknown model {model!r}")
    return float(out[0]) if scalar else out


# -- scaling-regime profile -------------------------------------------------


def suzuki_alpha(params: ModelParams, t: float) -> float:
    ds = derived_scales(params)
    return math.sqrt(params.n_spins / 2.0) * math.exp(-t / ds.theta) \
        * ds.m_ferro / ds.delta_total


def suzuki_profile(params: ModelParams, m, t: float) -> SuzukiProfile:
    """Intermediate-time profile in the scaling window e^{t/theta} ~ sqrt(N).

    P(m) = (alpha m_F^2 / sqrt(pi)) (m_F^2 - m^2)^{-3/2}
           exp[-(alpha m / sqrt(m_F^2 - m^2) - lambda)^2],
    normalized on (-m_F, m_F) for any alpha, lambda.  The caller judges
    window validity from the returned alpha.
    """
    ds = derived_scales(params)
    alpha = suzuki_alpha(params, t)
    lam = ds.lam
    m_arr = np.atleast_1d(np.asarray(m, dtype=float))
    vals = np.zeros_like(m_arr)
    inside = np.abs(m_arr) < ds.m_ferro
    mm = m_arr[inside]
    gap = ds.m_ferro**2 - mm * mm
    z = alpha * mm / np.sqrt(gap)
    vals[inside] = (alpha * ds.m_ferro**2 / math.sqrt(math.pi)
                    / gap**1.5 * np.exp(-(z - lam) ** 2))
    return SuzukiProfile(values=vals if not np.isscalar(m) else float(vals[0]),
                         alpha=alpha, lam=lam)


def suzuki_peak_positions(params: ModelParams, alpha: float):
    """Maxima of the unbiased scaling profile: +/- m_F sqrt(1 - 2 alpha^2/3).

    Returns None before the two-peak onset (alpha^2 >= 3/2).
    """
    if alpha * alpha >= 1.5:
        return None
    ds = derived_scales(params)
    m = ds.m_ferro * math.sqrt(1.0 - 2.0 * alpha * alpha / 3.0)
    return (-m, m)


def suzuki_second_max_onset(params: ModelParams):
    """Birth of the second (negative-side) maximum for a biased profile.

    Solves m2^3 = -lam m_F^2 sqrt(m_F^2 - 2 m2^2)/sqrt(6) by bisection and
    returns (m2, alpha2, t2).  No closed reference value exists; tests check
    that (m2, alpha2) is a degenerate stationary point of the profile.
    """
    ds = derived_scales(params)
    lam, m_f = ds.lam, ds.m_ferro
    if lam <= 0:
        raise ValueError("second-maximum onset defined for positive bias")

    def f(m2):
        return m2**3 + lam * m_f**2 * math.sqrt(m_f**2 - 2.0 * m2**2) / math.sqrt(6.0)

    lo, hi = -m_f / math.sqrt(2.0) + 1e-15, 0.0
    m2 = brentq(f, lo, hi, xtol=1e-15)
    alpha2 = math.sqrt(1.5 * (m_f**2 - m2**2) * (m_f**2 - 2.0 * m2**2) / m_f**4)
    t2 = ds.theta * math.log(
        math.sqrt(params.n_spins / 2.0) * m_f / (ds.delta_total * alpha2))
    return m2, alpha2, t2


def suzuki_tail_density(params: ModelParams, m, alpha: float):
    """Small-alpha shape of the peak forming near +m_F.

    In x = (2/alpha^2)(m_F - m)/m_F the density is e^{-1/x}/(2 sqrt(pi) x^{3/2})
    per unit x, with its maximum at x = 2/3; expressed here per unit m.
    """
    ds = derived_scales(params)
    m_arr = np.atleast_1d(np.asarray(m, dtype=float))
    x = (2.0 / alpha**2) * (ds.m_ferro - m_arr) / ds.m_ferro
    out = np.zeros_like(m_arr)
    pos = x > 0
    out[pos] = (np.exp(-1.0 / x[pos]) / (2.0 * math.sqrt(math.pi) * x[pos] ** 1.5)
                * 2.0 / (alpha**2 * ds.m_ferro))
    return float(out[0]) if np.isscalar(m) else out


# -- splitting, time scales, regime ------------------------------------------


def peak_width_delta(params: ModelParams, t) -> np.ndarray | float:
    """Width factor delta(t) of the moving peak (leading order in the bias).

    delta(t) = sqrt(C(t) + delta0^2) v(m(t)) / v(m0) with the cubic drift and
    the small-bias flow from the origin; the peak width is delta(t)/sqrt(N).
    Grows by drift-velocity dispersion, peaks when the center passes
    m_F/sqrt(3), then shrinks toward the equilibrium width.
    """
    ds = derived_scales(params)
    theta, m_f, b = ds.theta, ds.m_ferro, ds.bias_b
    if b <= 0:
        raise ValueError("width trajectory needs a positive bias")
    t = np.asarray(t, dtype=float)
    be = b * np.exp(t / theta)
    m_t = be * m_f / np.sqrt(m_f**2 + be * be)
    c = -np.expm1(-2.0 * t / theta) * params.temp_bath / (params.coupling_j
                                                          - params.temp_bath)
    out = np.sqrt(c + params.delta0**2) * m_t * (m_f**2 - m_t**2) / (b * m_f**2)
    return out if out.ndim else float(out)


def split_probabilities(params: ModelParams) -> tuple[float, float]:
    """(p_plus, p_minus): asymptotic weights of the two ferromagnetic peaks."""
    ds = derived_scales(params)
    p_minus = 0.5 * erfc(ds.lam)
    return 1.0 - p_minus, p_minus


def time_scales(params: ModelParams) -> TimeScales:
    """Named times of the relaxation, in raw units (divide by theta to match
    figure axes).  The biased-regime scales diverge as the bias vanishes and
    are +inf for b <= 0; mirror the sector first for a negative bias.
    """
    ds = derived_scales(params)
    th, m_f, b, delta = ds.theta, ds.m_ferro, ds.bias_b, ds.delta_total
    n = params.n_spins
    if b > 0:
        tau_reg = th * math.log(3.0 * m_f / b)
        t_width = th * math.log(m_f / (math.sqrt(2.0) * b))
        d_max = 2.0 * m_f * delta / (3.0 * math.sqrt(3.0) * b)
    else:
        tau_reg = t_width = d_max = math.inf
    t_flat = th * math.log((m_f / delta) * math.sqrt(n / 3.0))
    tau_relax = th * math.log((m_f / delta) * math.sqrt(10.0 * n / 3.0))
    return TimeScales(tau_reg=tau_reg, t_width_max=t_width, delta_max=d_max,
                      t_flat=t_flat, tau_relax=tau_relax)


def classify_regime(params: ModelParams, lambda_threshold: float = 3.0,
                    g0: float = 0.0) -> RegimeReport:
    """Regime label plus the two measurement-condition ratios.

    deterministic for |lambda| >= threshold, active-bifurcation for
    |lambda| <= 1, marginal in between.  stray_bias_ratio compares the
    squared pre-measurement bias (stray field g0 plus offset m0) against
    delta^2/N; it must be small for the paramagnet to survive until the
    coupling is switched on.  coupling_ratio is the same ratio built from
    the measurement coupling g; it must be large for faithful registration.
    """
    if lambda_threshold <= 0:
        raise ValueError("lambda_threshold must be positive")
    ds = derived_scales(params)
    ts = time_scales(params)
    p_plus, p_minus = split_probabilities(params)
    lam = ds.lam
    if abs(lam) >= lambda_threshold:
        label = "deterministic"
    elif abs(lam) <= 1.0:
        label = "active-bifurcation"
    else:
        label = "marginal"
    j, t = params.coupling_j, params.temp_bath
    n = params.n_spins
    denom = ds.delta_total**2 / n
    stray = (g0 / (j - t) + params.m_offset) ** 2 / denom
    coupling = (params.g_eff / (j - t)) ** 2 / denom
    return RegimeReport(
        lam=lam,
        classification=label,
        p_plus=p_plus,
        p_minus=p_minus,
        tau_reg=ts.tau_reg,
        tau_relax=ts.tau_relax,
        t_flat=ts.t_flat,
        t_width_max=ts.t_width_max,
        delta_max=ts.delta_max,
        stray_bias_ratio=stray,
        coupling_ratio=coupling,
    )
