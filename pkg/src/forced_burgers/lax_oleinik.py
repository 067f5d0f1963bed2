"""Discrete Hopf-Lax-Oleinik operator as dynamic programming on a space-time grid.

One time step of length ``dt = 1/m`` maps nodal values ``u`` to

    u'(x_i) = min_y [ u(y) + A(t, y, x_i) ],

where ``A`` is the straight-line, midpoint-rule action of ``L - c v`` and
``y`` ranges over departure points whose velocity lies in ``[-v_max, v_max]``.

Two candidate sets are available:

* ``interpolate=True`` (default): ``y`` ranges over whole cells and ``u`` is
  linearly interpolated.  On each cell the cost is convex in the position
  inside the cell, so the cell minimum is the stationary point
  ``v = dK/dp(c + slope)`` or an end point.  The potential is evaluated at
  the midpoint between ``x_i`` and the cell centre, which keeps every
  candidate independent of ``u``; the operator is then exactly monotone,
  nonexpansive in sup-norm and commutes with constants.
* ``interpolate=False``: ``y`` ranges over grid nodes only.  Velocities are
  then quantized to multiples of ``m/n``.

Ties are broken by smallest displacement, then leftmost departure point.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import hamiltonian as ham
from .errors import ConfigError, WindowExceeded, WindowSaturated
from .grid import GridFunction, is_power_of_two, nodes

DEFAULT_M = 64
DEFAULT_V_MAX = 4.0
DEFAULT_BUDGET = 1 << 22


@dataclass(frozen=True)
class LaxOleinikConfig:
    n: int = 512
    m: int = DEFAULT_M
    v_max: float = DEFAULT_V_MAX
    c: float = 0.0
    interpolate: bool = True
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if not is_power_of_two(self.n):
            raise ConfigError("grid.n", f"must be a power of two, got {self.n}")
        if self.m < 1:
            raise ConfigError("grid.m", "must be positive")
        if self.v_max <= 0:
            raise ConfigError("grid.v_max", "must be positive")
        if self.v_max / self.m < 2.0 / self.n - 1e-15:
            raise ConfigError("grid.v_max", "one-step window must span at least two cells")
        if 2 * self.window >= self.n:
            raise ConfigError("grid.v_max", "velocity window must stay below half the circle")
        if self.m * self.n > self.budget:
            raise ConfigError("grid", f"m*n={self.m * self.n} exceeds budget {self.budget}")

    @property
    def dt(self):
        return 1.0 / self.m

    @property
    def window(self):
        """Half-width of the one-step window in cells."""
        return int(math.floor(self.v_max * self.n / self.m + 1e-9))

    def with_c(self, c):
        return LaxOleinikConfig(self.n, self.m, self.v_max, float(c), self.interpolate, self.budget)

    def with_grid(self, n=None, m=None):
        return LaxOleinikConfig(n or self.n, m or self.m, self.v_max, self.c,
                                self.interpolate, self.budget)


@dataclass(frozen=True)
class ValueChain:
    """Layers ``u_{t0 + k dt}`` with, for ``k >= 1``, the chosen departure points.

    ``argmins[k-1][i]`` is the departure position (in grid-index units,
    reduced to ``[0, n)``) of the minimizer reaching node ``i`` at layer ``k``.
    In lattice mode these are integers.
    """

    spec: ham.HamiltonianSpec
    cfg: LaxOleinikConfig
    t0: float
    layers: tuple = field(repr=False)
    argmins: tuple = field(repr=False)

    @property
    def dt(self):
        return self.cfg.dt

    @property
    def c(self):
        return self.cfg.c

    @property
    def last(self):
        return self.layers[-1]

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(len(self.layers))

    def to_csv(self):
        lines = ["k,x,u"]
        for k, layer in enumerate(self.layers):
            for x, u in zip(layer.x, layer.values):
                lines.append(f"{k},{x:.17g},{u:.17g}")
        return "\n".join(lines) + "\n"


# -- single-step action ---------------------------------------------------

def step_action(spec, t, x_from, x_to, dt, c, winding=0, v_max=DEFAULT_V_MAX):
    """Midpoint-rule action of the straight step from ``x_from`` to ``x_to + winding``."""
    d = float(x_to) - float(x_from) + int(winding)
    if abs(d) > v_max * dt * (1 + 1e-12):
        raise WindowExceeded(f"displacement {d} exceeds window {v_max * dt}")
    v = d / dt
    lag, _ = ham.legendre_lagrangian(spec, t + dt / 2, (x_from + d / 2) % 1.0, v)
    return dt * (lag - c * v)


# -- precomputed stencils -------------------------------------------------

class _Stencil:
    def __init__(self, spec, cfg):
        n, w = cfg.n, cfg.window
        self.spec, self.cfg = spec, cfg
        self.n, self.w, self.dt = n, w, cfg.dt
        i = np.arange(n)[:, None]
        if cfg.interpolate:
            o = np.arange(-w, w)
            self.o = o.astype(float)
            self.j = (i + o) % n
            self.j1 = (self.j + 1) % n
            self.q = (4 * i + 2 * o + 1) % (4 * n)
            self.vgrid = np.arange(4 * n) / (4 * n)
        else:
            o = np.arange(-w, w + 1)
            self.o = o.astype(float)
            self.j = (i + o) % n
            self.q = (2 * i + o) % (2 * n)
            self.vgrid = np.arange(2 * n) / (2 * n)
        # kinetic Lagrangian at integer displacements -w..w (cells)
        lattice_v = np.arange(-w, w + 1) / (n * cfg.dt)
        self.lattice_kin = ham.lagrangian_table(spec, lattice_v)


@functools.lru_cache(maxsize=32)
def _stencil(spec, cfg):
    return _Stencil(spec, cfg)


def _potential_samples(st, t):
    if not st.spec.has_potential:
        return None
    return ham.potential(st.spec, t + st.dt / 2, st.vgrid)


def _select(cost, disp):
    """Row-wise argmin; exact ties go to smallest |disp|, then leftmost column."""
    best = cost.min(axis=1)
    key = np.where(cost <= best[:, None], np.abs(disp), np.inf)
    return best, np.argmin(key, axis=1)


def _bellman(st, u, t):
    """One DP step on raw arrays. Returns (u_next, departure positions, displacement in cells)."""
    spec, n, dt, c = st.spec, st.n, st.dt, st.cfg.c
    scale = n * dt
    vsamp = _potential_samples(st, t)
    rows = np.arange(n)
    if st.cfg.interpolate:
        du = np.roll(u, -1) - u
        pcell = c + du * n
        vstar = ham.kinetic_dp(spec, pcell)
        theta = np.clip(-st.o - vstar[st.j] * scale, 0.0, 1.0)
        disp = -st.o - theta
        v = disp / scale
        if spec.is_quadratic:
            kin = 0.5 * v * v
        else:
            interior_kin = pcell * vstar - ham.kinetic(spec, pcell)
            inner = (theta > 0.0) & (theta < 1.0)
            table_idx = np.clip(np.rint(disp).astype(int) + st.w, 0, 2 * st.w)
            kin = np.where(inner, interior_kin[st.j], st.lattice_kin[table_idx])
        cost = u[st.j] + theta * du[st.j] + dt * (kin - c * v)
        if vsamp is not None:
            cost = cost - dt * vsamp[st.q]
        best, col = _select(cost, disp)
        d = disp[rows, col]
    else:
        disp = -st.o
        lag = dt * (st.lattice_kin[(disp + st.w).astype(int)] - c * disp / scale)
        cost = u[st.j] + lag[None, :]
        if vsamp is not None:
            cost = cost - dt * vsamp[st.q]
        best, col = _select(cost, np.broadcast_to(disp, cost.shape))
        d = disp[col]
    if np.any(np.abs(d) >= st.w - 1e-9):
        warnings.warn("minimizer on the velocity-window boundary; increase v_max",
                      WindowSaturated, stacklevel=3)
    dep = np.mod(rows - d, n)
    return best, dep, d


def lax_oleinik_step(spec, cfg, u, t):
    """One DP step from time ``t``; returns ``(u_next, departure positions)``."""
    _check_size(cfg, u)
    nxt, dep, _ = _bellman(_stencil(spec, cfg), u.values, float(t))
    return GridFunction(nxt), dep


def lax_oleinik_chain(spec, cfg, u0, t0=0.0, n_steps=None):
    """``n_steps`` DP steps (default: one period) keeping every layer."""
    _check_size(cfg, u0)
    st = _stencil(spec, cfg)
    n_steps = cfg.m if n_steps is None else int(n_steps)
    layers, argmins = [u0], []
    u = u0.values
    for k in range(n_steps):
        u, dep, _ = _bellman(st, u, t0 + k * cfg.dt)
        dep.setflags(write=False)
        layers.append(GridFunction(u))
        argmins.append(dep)
    return ValueChain(spec, cfg, float(t0), tuple(layers), tuple(argmins))


def lax_oleinik_period(spec, cfg, u0, t0=0.0):
    """One full period: the discrete ``V^c`` applied to ``u0``."""
    return lax_oleinik_chain(spec, cfg, u0, t0, cfg.m)


def iterate_layers(spec, cfg, u0, t0=0.0, n_steps=None):
    """Yield ``(t, u_values)`` after each step without storing the chain."""
    st = _stencil(spec, cfg)
    u = np.asarray(u0.values if isinstance(u0, GridFunction) else u0, dtype=float)
    n_steps = cfg.m if n_steps is None else int(n_steps)
    for k in range(n_steps):
        u, _, _ = _bellman(st, u, t0 + k * cfg.dt)
        yield t0 + (k + 1) * cfg.dt, u


def apply_steps(spec, cfg, u0, t0=0.0, n_steps=None):
    """Final layer after ``n_steps`` DP steps (default one period), nothing stored."""
    _check_size(cfg, u0)
    u = u0.values
    for _, u in iterate_layers(spec, cfg, u0, t0, n_steps):
        pass
    return GridFunction(u)


def apply_periods(spec, cfg, u0, periods=1, t0=0.0):
    """``(V^c)^periods u0``."""
    return apply_steps(spec, cfg, u0, t0, periods * cfg.m)


def _check_size(cfg, u):
    if u.n != cfg.n:
        raise ConfigError("grid.n", f"function has {u.n} nodes, config expects {cfg.n}")


# -- calibrated curves ----------------------------------------------------

def _departure_at(chain, k, xi):
    """Best departure (index units, unwrapped) for destination ``xi`` at layer ``k``."""
    spec, cfg = chain.spec, chain.cfg
    n, dt, c, w = cfg.n, cfg.dt, cfg.c, cfg.window
    scale = n * dt
    u = chain.layers[k - 1].values
    t = chain.t0 + (k - 1) * dt
    j = np.arange(math.floor(xi) - w, math.floor(xi) + w + 1)
    lo = np.maximum(0.0, xi - j - w)
    hi = np.minimum(1.0, xi - j + w)
    keep = lo <= hi
    j, lo, hi = j[keep], lo[keep], hi[keep]
    jm, j1 = j % n, (j + 1) % n
    du = u[j1] - u[jm]
    p = c + du * n
    vstar = ham.kinetic_dp(spec, p)
    theta = np.clip(xi - j - vstar * scale, lo, hi)
    disp = xi - j - theta
    v = disp / scale
    inner = (theta > lo) & (theta < hi)
    if spec.is_quadratic:
        kin = 0.5 * v * v
    else:
        kin = np.array([pi * vi - float(ham.kinetic(spec, pi)) if ins
                        else ham.legendre_lagrangian(spec, 0.0, 0.0, vi)[0]
                        for pi, vi, ins in zip(p, v, inner)])
    cost = u[jm] + theta * du + dt * (kin - c * v)
    if spec.has_potential:
        mid = (xi / n + (j + 0.5) / n) / 2
        cost = cost - dt * ham.potential(spec, t + dt / 2, mid)
    best, col = _select(cost[None, :], disp[None, :])
    return float(j[col[0]] + theta[col[0]])


def _layer_slope(u, xi):
    """Slope of the piecewise-linear ``u`` at index position ``xi`` (mean of both sides at a node)."""
    n = u.n
    vals = u.values
    j = math.floor(xi)
    right = (vals[(j + 1) % n] - vals[j % n]) * n
    if xi != j:
        return right
    left = (vals[j % n] - vals[(j - 1) % n]) * n
    return 0.5 * (left + right)


def backtrack_minimizer(chain, x_end_index, momenta="steps"):
    """Follow minimizers from node ``x_end_index`` of the last layer back to ``t0``.

    Returns a Trajectory at the layer times.  With ``momenta="steps"`` the
    step momenta are ``dL/dv`` at the step midpoints (the momentum of the
    original Hamiltonian, since the chain minimizes ``L - c v``); momenta at
    layer times are the average of the two adjacent step momenta, linearly
    extrapolated at both ends.  With ``momenta="gradient"`` they are
    ``c + du/dx`` of each layer along the curve, which is less noisy when
    step velocities are quantized.
    """
    if len(chain.layers) < 2:
        raise ValueError("chain needs at least two layers")
    if momenta not in ("steps", "gradient"):
        raise ValueError(f"unknown momentum reconstruction {momenta!r}")
    cfg = chain.cfg
    n, dt = cfg.n, cfg.dt
    K = len(chain.layers) - 1
    pos = np.empty(K + 1)
    pos[K] = float(x_end_index)
    for k in range(K, 0, -1):
        xi = pos[k]
        if float(xi).is_integer():
            i = int(xi) % n
            d = (i - chain.argmins[k - 1][i] + n / 2) % n - n / 2
            pos[k - 1] = xi - d
        else:
            pos[k - 1] = _departure_at(chain, k, xi)
    x_lift = pos / n
    times = chain.t0 + dt * np.arange(K + 1)
    if momenta == "gradient":
        p = np.array([chain.c + _layer_slope(layer, xi) for layer, xi in zip(chain.layers, pos)])
        return ham.Trajectory(chain.t0, dt, times, x_lift, p)
    vel = np.diff(x_lift) / dt
    mids = (x_lift[:-1] + x_lift[1:]) / 2
    step_p = np.array([ham.lagrangian_dv(chain.spec, t + dt / 2, x % 1.0, v)
                       for t, x, v in zip(times[:-1], mids, vel)])
    p = np.empty(K + 1)
    if K == 1:
        p[:] = step_p[0]
    else:
        p[1:-1] = 0.5 * (step_p[:-1] + step_p[1:])
        p[0] = 1.5 * step_p[0] - 0.5 * step_p[1]
        p[-1] = 1.5 * step_p[-1] - 0.5 * step_p[-2]
    return ham.Trajectory(chain.t0, dt, times, x_lift, p)


def path_action(chain, curve):
    """Sum of one-step actions along a backtracked curve (same formula as the DP)."""
    cfg, spec = chain.cfg, chain.spec
    n, dt, c = cfg.n, cfg.dt, cfg.c
    total = 0.0
    for k in range(len(curve.times) - 1):
        x0, x1 = curve.x_lift[k], curve.x_lift[k + 1]
        d = x1 - x0
        v = d / dt
        t = curve.times[k]
        if cfg.interpolate:
            cell = math.floor(x0 * n + 1e-12)
            mid = (x1 + (cell + 0.5) / n) / 2
        else:
            mid = x0 + d / 2
        lag, _ = ham.legendre_lagrangian(spec, t + dt / 2, mid % 1.0, v)
        total += dt * (lag - c * v)
    return total


def interpolate_nodes(u, x):
    """Periodic linear interpolation of nodal values at positions ``x``."""
    n = u.n
    s = np.asarray(x, dtype=float) * n
    j = np.floor(s).astype(int)
    th = s - j
    vals = u.values
    return (1 - th) * vals[j % n] + th * vals[(j + 1) % n]


def hopf_lax_free(u0_fn, x, c=0.0, t=1.0, fine=10 * 512, kinetic_lag=None):
    """Brute-force Hopf-Lax formula for ``V = 0``: ``min_z u0(z) + t L((x - z)/t) - c (x - z)``.

    ``z`` ranges over a fine grid on the lifted line around each ``x``.
    """
    kinetic_lag = kinetic_lag or (lambda v: 0.5 * v * v)
    z = np.arange(-3 * fine, 4 * fine) / fine
    vals = u0_fn(np.mod(z, 1.0))
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    for k, xk in enumerate(x):
        d = xk - z
        out[k] = np.min(vals + t * kinetic_lag(d / t) - c * d)
    return out


__all__ = [
    "LaxOleinikConfig", "ValueChain", "step_action", "lax_oleinik_step",
    "lax_oleinik_chain", "lax_oleinik_period", "iterate_layers", "apply_steps", "apply_periods",
    "backtrack_minimizer", "path_action", "interpolate_nodes", "hopf_lax_free", "nodes",
]
