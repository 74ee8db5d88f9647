"""Phonon bath spectral function and its finite-time windowed transform.

The bath enters the magnet dynamics only through

    Ktilde(w)   = (hbar^2 w / 4) exp(-|w|/Gamma) / (exp(hbar w / T) - 1)
    Ktilde_t(w) = int dw' Ktilde(w') sin((w'-w) t) / (pi (w'-w))

The windowed form is evaluated by panel quadrature in frequency, with panels
aligned to the sinc oscillation and split at the kernel kink w' = 0.  The
module also provides the closed-form time autocorrelation K(s) (a trigamma
pair), which tests use as an independent time-domain oracle for Ktilde_t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = [
    "KernelSpec",
    "KernelConvergenceError",
    "spectral_density",
    "windowed_spectral",
    "autocorrelation",
]

_GL15_X, _GL15_W = leggauss(15)
_GL7_X, _GL7_W = leggauss(7)

_NODE_CHUNK = 65536  # cap on simultaneous integrand evaluations


class KernelConvergenceError(RuntimeError):
    """Panel budget exhausted before the requested tolerance was reached."""


@dataclass(frozen=True)
class KernelSpec:
    temp_bath: float
    debye_cutoff: float
    hbar: float = 1.0

    def __post_init__(self):
        if self.temp_bath <= 0:
            raise ValueError("temp_bath must be positive")
        if self.debye_cutoff <= 0:
            raise ValueError("debye_cutoff must be positive")


def spectral_density(spec: KernelSpec, omega):
    """Ktilde(w); the w = 0 value is the continuous limit hbar*T/4.

    Nonnegative for all real w: numerator and denominator flip sign together.
    """
    w = np.asarray(omega, dtype=float)
    hb, t, cut = spec.hbar, spec.temp_bath, spec.debye_cutoff
    x = hb * w / t
    small = np.abs(x) < 1e-8
    xs = np.where(small, 1.0, x)
    # w/(e^x - 1) = (T/hbar) * x/expm1(x); overflow in expm1 gives 0, correct
    with np.errstate(over="ignore"):
        ratio = np.where(small, 1.0 - x / 2.0, xs / np.expm1(xs))
    out = 0.25 * hb * t * ratio * np.exp(-np.abs(w) / cut)
    return out if out.ndim else float(out)


def _sinc_factor(dw, t):
    """sin(dw*t) / (pi*dw), continuous through dw = 0 (value t/pi)."""
    return (t / math.pi) * np.sinc(dw * (t / math.pi))


def _panel_integrals(spec, omega, t, edges):
    """GL15 integrals and GL15-GL7 error estimates on each panel."""
    a = edges[:-1]
    b = edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)

    def rule(xg, wg):
        vals = np.empty((len(a), len(xg)))
        rows_per_chunk = max(1, _NODE_CHUNK // len(xg))
        for i in range(0, len(a), rows_per_chunk):
            sl = slice(i, min(i + rows_per_chunk, len(a)))
            nodes = mid[sl, None] + half[sl, None] * xg[None, :]
            f = spectral_density(spec, nodes) * _sinc_factor(nodes - omega, t)
            vals[sl] = f
        return half * (vals @ wg)

    i15 = rule(_GL15_X, _GL15_W)
    i7 = rule(_GL7_X, _GL7_W)
    return i15, np.abs(i15 - i7)


def _initial_edges(spec, omega, t, abs_target):
    hb, temp, cut = spec.hbar, spec.temp_bath, spec.debye_cutoff
    # negative side decays like exp(w/Gamma); positive like exp(-w(1/Gamma + hbar/T))
    l_neg = cut * max(8.0, math.log(0.25 * hb * hb * cut / abs_target + math.e))
    r_pos = 1.0 / cut + hb / temp
    l_pos = (1.0 / r_pos) * max(8.0, math.log(0.25 * hb * hb / (r_pos * abs_target) + math.e))
    lo = min(-l_neg, omega - 8.0 * math.pi / t)
    hi = max(l_pos, omega + 8.0 * math.pi / t)

    width = math.pi / t
    min_width = (hi - lo) / 64.0
    width = max(width, min_width)
    n_left = int(math.ceil((omega - lo) / width))
    n_right = int(math.ceil((hi - omega) / width))
    edges = np.concatenate([
        omega - width * np.arange(n_left, 0, -1),
        omega + width * np.arange(0, n_right + 1),
    ])
    if edges[0] > lo:
        edges = np.concatenate([[lo], edges])
    if edges[-1] < hi:
        edges = np.concatenate([edges, [hi]])
    # split at the |w| kink of the Debye factor
    if edges[0] < 0.0 < edges[-1] and not np.any(edges == 0.0):
        edges = np.sort(np.concatenate([edges, [0.0]]))
    return edges


def windowed_spectral(spec: KernelSpec, omega: float, t: float,
                      tol: float = 1e-8, max_panels: int = 400_000) -> float:
    """Ktilde_t(omega): the spectral function seen through a time window [-t, t].

    Equals 0 at t = 0 and converges to spectral_density(omega) for
    t >> max(hbar/T, 1/Gamma).  Adaptive panel bisection refines until the
    GL15/GL7 disagreement falls below `tol` relative to the result scale;
    raises KernelConvergenceError when the panel budget runs out (too large
    Gamma*t for the requested tolerance).
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if not (0.0 < tol <= 1e-2):
        raise ValueError("tol must lie in (0, 1e-2]")
    if t == 0.0:
        return 0.0
    omega = float(omega)
    scale = max(abs(spectral_density(spec, omega)), 0.25 * spec.hbar * spec.temp_bath)
    abs_target = tol * scale

    edges = _initial_edges(spec, omega, t, abs_target)
    i15, err = _panel_integrals(spec, omega, t, edges)
    for _ in range(60):
        if err.sum() <= abs_target or len(i15) > max_panels:
            break
        # bisect every panel holding more than its share of the error budget
        bad = err > abs_target / max(len(err), 1)
        if not np.any(bad):
            bad = err >= err.max()
        a, b = edges[:-1][bad], edges[1:][bad]
        new_edges = np.sort(np.unique(np.concatenate([edges, 0.5 * (a + b)])))
        edges = new_edges
        i15, err = _panel_integrals(spec, omega, t, edges)
    if err.sum() > abs_target:
        raise KernelConvergenceError(
            f"windowed kernel quadrature stalled at error {err.sum():.3e} "
            f"(target {abs_target:.3e}, {len(i15)} panels, Gamma*t = "
            f"{spec.debye_cutoff * t:.3g})"
        )
    return float(i15.sum())


# -- closed-form autocorrelation ------------------------------------------

_BERNOULLI = (1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730, 7.0 / 6)


def _trigamma(z):
    """psi'(z) for complex arrays, Re z > 0: recurrence + asymptotic series."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros_like(z)
    zz = z.copy()
    for _ in range(32):  # push |z| beyond 16 for the asymptotic tail
        mask = np.abs(zz) < 16.0
        if not mask.any():
            break
        out[mask] += 1.0 / zz[mask] ** 2
        zz[mask] += 1.0
    inv = 1.0 / zz
    inv2 = inv * inv
    tail = inv + 0.5 * inv2
    term = inv2
    for b2k in _BERNOULLI:
        term = term * inv2
        tail += b2k * term * zz  # B_2k / z^(2k+1)
    return out + tail


def autocorrelation(spec: KernelSpec, s):
    """Bath autocorrelation K(s) (complex; K(-s) = conj(K(s))).

    Closed form: K(s) = (T^2/8 pi) [psi'(1 + c - i tau) + psi'(c + i tau)]
    with c = T/(hbar Gamma) and tau = s T / hbar.
    """
    s = np.asarray(s, dtype=float)
    t, hb, cut = spec.temp_bath, spec.hbar, spec.debye_cutoff
    c = t / (hb * cut)
    tau = s * t / hb
    val = (t * t / (8.0 * math.pi)) * (
        _trigamma(1.0 + c - 1j * tau) + _trigamma(c + 1j * tau)
    )
    return val if val.ndim else complex(val)
