"""Entropy solutions of ``y_t + (H(t, x, y))_x = 0`` on the circle.

The evolution operator is built from the Hamilton-Jacobi semigroup: take
the mean ``c`` and the primitive ``u`` of ``y``, run the Lax-Oleinik DP with
momentum shift ``c``, and differentiate back.  A Godunov finite-volume
scheme (flux ``y**2/2`` with Strang-split source ``-V_x``) is kept as an
independent check.

Grid values are cell quantities: ``y_i`` is the slope of ``u`` across
``[x_i, x_{i+1}]``; the Godunov scheme uses the same cells.
"""
from __future__ import annotations

import math

import numpy as np

from . import hamiltonian as ham
from . import lax_oleinik as lo
from .errors import CflViolation
from .grid import GridFunction, mean, primitive, staggered_derivative


def entropy_evolve(spec, cfg, y, t0=0.0, n_steps=None):
    """Evolve ``y`` by ``n_steps`` DP steps of length ``1/m`` (default: one period)."""
    c = mean(y)
    u = lo.apply_steps(spec, cfg.with_c(c), primitive(y), t0, n_steps)
    return c + staggered_derivative(u)


def entropy_step(spec, cfg, y, t0=0.0):
    """The period map ``E``."""
    return entropy_evolve(spec, cfg, y, t0, cfg.m)


def entropy_iterates(spec, cfg, y, count, t0=0.0):
    """``[y, E(y), ..., E^count(y)]``."""
    out = [y]
    for k in range(count):
        out.append(entropy_step(spec, cfg, out[-1], t0 + k))
    return out


def entropy_layers(spec, cfg, y, t0=0.0, n_steps=None):
    """Yield ``(t, y_t values)`` after every DP step."""
    c = mean(y)
    u0 = primitive(y)
    n = y.n
    for t, u in lo.iterate_layers(spec, cfg.with_c(c), u0, t0, n_steps):
        yield t, c + (np.roll(u, -1) - u) * n


# -- finite-volume oracle -------------------------------------------------

def _godunov_flux(a, b):
    # exact Riemann flux for f(y) = y**2/2
    return np.maximum(0.5 * np.maximum(a, 0.0) ** 2, 0.5 * np.minimum(b, 0.0) ** 2)


def _source_cells(spec, t, n):
    if not spec.has_potential:
        return None
    edges = ham.potential(spec, t, np.arange(n + 1) / n)
    return -np.diff(edges) * n


def godunov_step(spec, y, t, dt):
    """One Strang-split step: half source, Godunov flux, half source."""
    if not spec.is_quadratic:
        raise ValueError("the finite-volume oracle handles p**2/2 only")
    n = y.n
    vals = np.array(y.values)
    speed = float(np.max(np.abs(vals))) if n else 0.0
    if dt * speed > 1.0 / n * (1 + 1e-12):
        raise CflViolation(f"dt*max|y| = {dt * speed:.3g} > 1/n = {1 / n:.3g}")
    src = _source_cells(spec, t + dt / 4, n)
    if src is not None:
        vals = vals + 0.5 * dt * src
    flux = _godunov_flux(vals, np.roll(vals, -1))  # interface i+1/2
    vals = vals - dt * n * (flux - np.roll(flux, 1))
    src = _source_cells(spec, t + 3 * dt / 4, n)
    if src is not None:
        vals = vals + 0.5 * dt * src
    return GridFunction(vals)


def godunov_evolve(spec, y, t0, t1, cfl=0.5):
    """Finite-volume evolution from ``t0`` to ``t1`` with adaptive CFL-limited steps."""
    t = float(t0)
    n = y.n
    src_bound = sum(2 * math.pi * abs(k) * math.hypot(a, b)
                    for k, _, a, b in spec.potential_coeffs)
    while t < t1 - 1e-14:
        speed = float(np.max(np.abs(y.values))) + 0.5 * src_bound / n + 1e-12
        dt = min(cfl / (n * speed), t1 - t)
        y = godunov_step(spec, y, t, dt)
        t += dt
    return y


# -- reversal ---------------------------------------------------------------

def reversed_spec(spec):
    """Spec of ``H(-t, x, -p)``."""
    terms = [ham.PotentialTerm(kx, -kt, a, b) for kx, kt, a, b in spec.potential_coeffs]
    poly = tuple(a if k % 2 == 0 else -a for k, a in enumerate(spec.momentum_poly))
    return ham.HamiltonianSpec(spec.kind, tuple(terms), poly).canonical()
