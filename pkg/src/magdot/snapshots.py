"""Snapshot CSV emission and cross-run comparison.

Schema: long format with header `t,m,P` where P is the continuum-normalized
density (N/2) P_d for discrete states.  Numbers carry 17 significant digits
so files round-trip exactly and identical runs are byte-identical.
"""

from __future__ import annotations

import os
from collections import OrderedDict

import numpy as np

from .fokker_planck import ContinuumField
from .master import DiscreteDistribution

__all__ = [
    "as_density",
    "write_long_csv",
    "write_split_csv",
    "read_long_csv",
    "l1_distance",
    "compare_dirs",
]

FMT = "%.17g"


def as_density(state) -> tuple[float, np.ndarray, np.ndarray]:
    """(time, m grid, density) view of a discrete or continuum state."""
    if isinstance(state, DiscreteDistribution):
        return state.time, state.grid, state.density()
    if isinstance(state, ContinuumField):
        return state.time, state.mesh, state.values
    raise TypeError(f"unsupported state type {type(state)!r}")


def write_long_csv(path: str, states) -> None:
    with open(path, "w") as fh:
        fh.write("t,m,P\n")
        for state in states:
            t, m, p = as_density(state)
            ts = FMT % t
            for mi, pi in zip(m, p):
                fh.write(f"{ts},{FMT % mi},{FMT % pi}\n")


def write_split_csv(out_dir: str, states) -> list[str]:
    """One `m,P` file per snapshot with a `# t=<value>` header line."""
    paths = []
    for i, state in enumerate(states):
        t, m, p = as_density(state)
        path = os.path.join(out_dir, f"snapshot_{i:04d}.csv")
        with open(path, "w") as fh:
            fh.write(f"# t={FMT % t}\n")
            fh.write("m,P\n")
            for mi, pi in zip(m, p):
                fh.write(f"{FMT % mi},{FMT % pi}\n")
        paths.append(path)
    return paths


def read_long_csv(path: str) -> "OrderedDict[float, tuple[np.ndarray, np.ndarray]]":
    """Snapshots keyed by time, in file order."""
    groups: OrderedDict[float, list] = OrderedDict()
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "t,m,P":
            raise ValueError(f"{path}: expected header 't,m,P', got {header!r}")
        for line in fh:
            ts, ms, ps = line.rstrip("\n").split(",")
            groups.setdefault(float(ts), []).append((float(ms), float(ps)))
    out: OrderedDict[float, tuple[np.ndarray, np.ndarray]] = OrderedDict()
    for t, rows in groups.items():
        arr = np.asarray(rows)
        out[t] = (arr[:, 0], arr[:, 1])
    return out


def l1_distance(m_a, p_a, m_b, p_b) -> float:
    """L1 distance between two densities, resampled onto the finer grid."""
    m_a, p_a = np.asarray(m_a, float), np.asarray(p_a, float)
    m_b, p_b = np.asarray(m_b, float), np.asarray(p_b, float)
    if len(m_b) > len(m_a):
        m_a, p_a, m_b, p_b = m_b, p_b, m_a, p_a
    p_b_on_a = np.interp(m_a, m_b, p_b)
    return float(np.trapezoid(np.abs(p_a - p_b_on_a), m_a))


def compare_dirs(path_a: str, path_b: str, time_rtol: float = 1e-9):
    """Match snapshot times of two long-format files and compute L1 per time."""
    snaps_a = read_long_csv(path_a)
    snaps_b = read_long_csv(path_b)
    results = []
    for t_a, (m_a, p_a) in snaps_a.items():
        for t_b, (m_b, p_b) in snaps_b.items():
            if abs(t_a - t_b) <= time_rtol * max(1.0, abs(t_a)):
                results.append((t_a, l1_distance(m_a, p_a, m_b, p_b)))
                break
    return results
