"""Long-time behaviour: effective Hamiltonian, rotation numbers, periodic limits.

``estimate_alpha`` measures the linear drift of ``min_x u`` under repeated
periods of the Lax-Oleinik map.  ``estimate_rho`` follows weak
characteristics ``x' = dH/dp(y)`` of the entropy solution started from the
constant state ``c``; :func:`rho_from_alpha` is the finite-difference route
to the same number, so comparing the two is a consistency check.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import entropy as en
from . import hamiltonian as ham
from . import lax_oleinik as lo
from .errors import NoConvergence, NoPeriodDetected
from .graphs import default_threshold, extract_graph, hausdorff_distance
from .grid import GridFunction, l1_distance, mean, primitive

T_MAX = 12
HISTORY = 16
Q_MAX = 12
RATIONAL_TOL = 2e-3
ALPHA_STDERR_BOUND = 1e-3


@dataclass
class AsymptoticsReport:
    c: float
    alpha: float
    alpha_stderr: float
    rho: float
    T_of_c: int
    detected_T: int | None
    limit_snapshots: list = field(default_factory=list, repr=False)
    residual: float = math.nan
    convergence_series: list = field(default_factory=list, repr=False)
    limit_graph_distance: float = math.nan
    iterations: int = 0

    @property
    def converged(self):
        return self.detected_T is not None

    def to_dict(self, snapshots=False):
        out = {
            "c": self.c,
            "alpha": self.alpha,
            "alpha_stderr": self.alpha_stderr,
            "rho": self.rho,
            "T_of_c": self.T_of_c,
            "detected_T": self.detected_T,
            "residual": _finite(self.residual),
            "limit_graph_distance": _finite(self.limit_graph_distance),
            "iterations": self.iterations,
            "convergence_series": [[int(k), float(d)] for k, d in self.convergence_series],
        }
        if snapshots:
            out["limit_snapshots"] = [list(map(float, s.values)) for s in self.limit_snapshots]
        return out

    def to_json(self, snapshots=False):
        return json.dumps(self.to_dict(snapshots), sort_keys=True, indent=2)


def _finite(v):
    return None if v is None or not math.isfinite(v) else float(v)


# -- effective Hamiltonian ------------------------------------------------------

def _slope_fit(k, a):
    k = np.asarray(k, dtype=float)
    a = np.asarray(a, dtype=float)
    kc = k - k.mean()
    slope = float(np.dot(kc, a - a.mean()) / np.dot(kc, kc))
    resid = a - a.mean() - slope * kc
    dof = max(len(k) - 2, 1)
    stderr = math.sqrt(float(np.dot(resid, resid)) / dof / float(np.dot(kc, kc)))
    return slope, stderr


def estimate_alpha(spec, cfg, c, n_periods=32, stderr_bound=ALPHA_STDERR_BOUND):
    """Effective Hamiltonian ``alpha(c)`` and the regression standard error."""
    if n_periods < 16:
        raise ValueError("n_periods must be at least 16")
    cfg = cfg.with_c(c)
    u = GridFunction.constant(0.0, cfg.n)
    mins = []
    for k in range(n_periods):
        u = lo.apply_periods(spec, cfg, u, 1, t0=float(k))
        mins.append(float(np.min(u.values)))
    half = n_periods // 2
    slope, stderr = _slope_fit(np.arange(half, n_periods), mins[half:])
    if stderr > stderr_bound:
        raise NoConvergence(f"alpha regression stderr {stderr:.3g} > {stderr_bound:.3g}")
    return -slope, stderr


def rho_from_alpha(spec, cfg, c, h=0.05, n_periods=32):
    """Centered difference ``(alpha(c+h) - alpha(c-h)) / 2h``."""
    hi, _ = estimate_alpha(spec, cfg, c + h, n_periods)
    lo_, _ = estimate_alpha(spec, cfg, c - h, n_periods)
    return (hi - lo_) / (2 * h)


# -- weak characteristics ---------------------------------------------------------

def filippov_velocity(spec, yvals, x, threshold):
    """Velocity field of weak characteristics at positions ``x``.

    Cell values are interpolated linearly between cell centres; across a
    detected downward jump the midpoint of ``[y-, y+]`` is used.
    """
    n = yvals.size
    s = np.asarray(x) * n - 0.5
    j = np.floor(s).astype(int)
    th = s - j
    left = yvals[j % n]
    right = yvals[(j + 1) % n]
    val = np.where(left - right > threshold, 0.5 * (left + right), (1 - th) * left + th * right)
    return ham.kinetic_dp(spec, val)


class _Tracker:
    """Explicit-Euler weak characteristics advanced alongside the DP layers."""

    def __init__(self, spec, starts):
        self.spec = spec
        self.x = np.array(starts, dtype=float)
        self.origin = self.x.copy()
        self.t_origin = None

    def advance(self, yvals, dt):
        thr = default_threshold(GridFunction(yvals))
        self.x = self.x + dt * filippov_velocity(self.spec, yvals, np.mod(self.x, 1.0), thr)

    def reset(self, t):
        self.origin = self.x.copy()
        self.t_origin = t

    def rotation(self, t):
        return (self.x - self.origin) / (t - self.t_origin)


def weak_characteristic_rotation(spec, cfg, y0, n_periods=64, starts=8, burn_in=None, t0=0.0):
    """Rotation numbers of weak characteristics from ``starts`` equally spaced points.

    Characteristics move from the start, but displacements are measured only
    after ``burn_in`` periods (default a quarter of ``n_periods``) so that
    the transient approach to the limit regime is discarded.
    """
    burn_in = n_periods // 4 if burn_in is None else int(burn_in)
    if not 0 <= burn_in < n_periods:
        raise ValueError("burn_in must lie in [0, n_periods)")
    if np.isscalar(starts):
        starts = (np.arange(int(starts)) + 0.5) / int(starts)
    trk = _Tracker(spec, starts)
    dt = cfg.dt
    y = y0
    t = float(t0)
    for k in range(n_periods):
        if k == burn_in:
            trk.reset(t)
        yprev = np.array(y.values)
        c = mean(y)
        u0 = primitive(y)
        for t_next, u in lo.iterate_layers(spec, cfg.with_c(c), u0, t, cfg.m):
            trk.advance(yprev, dt)
            yprev = c + (np.roll(u, -1) - u) * cfg.n
            t = t_next
        y = GridFunction(yprev)
    return trk.rotation(t)


def estimate_rho(spec, cfg, c, n_periods=64, starts=8, burn_in=None):
    """Rotation number ``rho(c)``: mean rotation of weak characteristics of the solution from ``y = c``."""
    if n_periods < 32:
        raise ValueError("n_periods must be at least 32")
    y0 = GridFunction.constant(c, cfg.n)
    return float(np.mean(weak_characteristic_rotation(spec, cfg, y0, n_periods, starts, burn_in)))


def rational_period(rho, q_max=Q_MAX, tol=RATIONAL_TOL):
    """Smallest ``q <= q_max`` with ``|rho - p/q| <= tol``; 1 if there is none."""
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    for q in range(1, q_max + 1):
        p = round(rho * q)
        if abs(rho - p / q) <= tol:
            return q
    return 1


# -- periodic limits ----------------------------------------------------------------

def _evolve_tracked(spec, cfg, y, t, trk, track):
    """One period of ``E`` from time ``t``; returns ``(E(y), drift of u at x=0)``."""
    c = mean(y)
    yprev = np.array(y.values)
    u = primitive(y).values
    for _, u in lo.iterate_layers(spec, cfg.with_c(c), u, t, cfg.m):
        if track:
            trk.advance(yprev, cfg.dt)
        yprev = c + (np.roll(u, -1) - u) * cfg.n
    return GridFunction(yprev), float(u[0])


def find_period(history, tol, T_max=T_MAX):
    """Smallest ``T`` with ``||y_N - y_{N-T}||_1 <= tol`` for the last entry ``y_N``."""
    last = history[-1]
    for T in range(1, min(T_max, len(history) - 1) + 1):
        if l1_distance(last, history[-1 - T]) <= tol:
            return T
    return None


def detect_asymptotic_period(spec, cfg, y0, n_max=64, tol=1e-3, T_max=T_MAX,
                             raise_on_failure=True):
    """Iterate ``E`` ``n_max`` times and identify the period of the limit regime."""
    if n_max < 32:
        raise ValueError("n_max must be at least 32")
    c = mean(y0)
    history = [y0]
    drifts = []
    trk = _Tracker(spec, (np.arange(8) + 0.5) / 8)
    measure_from = n_max // 2
    y = y0
    for k in range(n_max):
        if k == measure_from:
            trk.reset(float(k))
        y, drift = _evolve_tracked(spec, cfg, y, float(k), trk, True)
        history.append(y)
        drifts.append(drift)
    rho = float(np.mean(trk.rotation(float(n_max))))
    T_of_c = rational_period(rho)
    T = find_period(history[-HISTORY - 1:], tol, T_max)

    block = T or 1
    tail = np.array(drifts[-(HISTORY // block) * block:]).reshape(-1, block).sum(axis=1) / block
    alpha = -float(np.mean(tail))
    alpha_se = float(np.std(tail, ddof=1) / math.sqrt(len(tail))) if len(tail) > 1 else 0.0

    report = AsymptoticsReport(c=c, alpha=alpha, alpha_stderr=alpha_se, rho=rho,
                               T_of_c=T_of_c, detected_T=T, iterations=n_max)
    if T is None:
        if raise_on_failure:
            raise NoPeriodDetected(f"no period T <= {T_max} within {n_max} iterations", report)
        return report
    report.limit_snapshots = history[-T:]
    omega0 = history[-T]
    extra, _ = _evolve_tracked(spec, cfg, history[-1], float(n_max), trk, False)
    report.residual = l1_distance(extra, omega0)
    report.convergence_series = [(k, l1_distance(history[k + T], history[k]))
                                 for k in range(len(history) - T)]
    report.limit_graph_distance = hausdorff_distance(extract_graph(history[-1]),
                                                     extract_graph(history[-1 - T]))
    return report


def corollary_check(spec, cfg, y0, n_list, tol=1e-3, T_max=T_MAX):
    """Track whether iterates of a continuous ``y0`` stay graphs of continuous functions.

    The limit ``z`` is the last iterate once a period ``T`` is found on the
    tail of the orbit.  When no iterate has a jump, the L1 distance to ``z``
    must be constant along the orbit (the reversed operator is also an L1
    contraction), which forces ``y0 = z``.
    """
    n_list = sorted(set(int(n) for n in n_list))
    horizon = max(n_list)
    history = en.entropy_iterates(spec, cfg, y0, horizon)
    graphs = {n: extract_graph(history[n]) for n in n_list}
    T = find_period(history[-HISTORY - 1:], tol, T_max) if horizon > 1 else None
    z = history[-1]
    dist = [l1_distance(history[n], z) for n in n_list]
    jumps = [graphs[n].has_jumps for n in n_list]
    d_h = [hausdorff_distance(graphs[a], graphs[b]) for a, b in zip(n_list, n_list[1:])]
    all_free = not any(jumps) and not extract_graph(y0).has_jumps
    spread = max(dist) - min(dist)
    return {
        "n": n_list,
        "has_jumps": jumps,
        "distance_to_limit": dist,
        "successive_hausdorff": d_h,
        "limit_period": T,
        "all_jump_free": all_free,
        "distance_spread": spread,
        "distances_constant": (spread <= tol) if all_free else None,
    }


def scan_subharmonic(spec, cfg, cs, shape=None, n_max=64, tol=1e-3):
    """Period detection over a list of means; returns ``(c, rho, T_of_c, detected_T)`` rows."""
    shape = shape or (lambda x: 0.5 * np.sin(2 * np.pi * x))
    rows = []
    for c in cs:
        y0 = GridFunction.from_function(lambda x: c + shape(x), cfg.n)
        rep = detect_asymptotic_period(spec, cfg, y0, n_max, tol, raise_on_failure=False)
        rows.append((float(c), rep.rho, rep.T_of_c, rep.detected_T))
    return rows
