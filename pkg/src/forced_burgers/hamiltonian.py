"""Hamiltonians H(t, x, p) on the cylinder T x R, their Lagrangians and flows.

Two families are supported:

* ``SEPARABLE_FORCED``: ``H = p**2/2 + V(t, x)`` with ``V`` a finite real
  Fourier series in ``x`` and ``t`` (integer wave numbers only, so ``V`` is
  1-periodic in both variables).
* ``PURE_MOMENTUM``: ``H = K(p)`` with ``K`` a convex superlinear polynomial.

Each potential term ``(k_x, k_t, a, b)`` contributes

    a * cos(2*pi*(k_x*x + k_t*t)) + b * sin(2*pi*(k_x*x + k_t*t)).

Products such as ``cos(2*pi*x) * cos(2*pi*t)`` are expanded with
:func:`product_terms`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import BlowUp, ConfigError, NoConvergence

TWO_PI = 2.0 * math.pi
QUADRATIC = (0.0, 0.0, 0.5)

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 200
P_MAX = 50.0


class Kind(str, enum.Enum):
    SEPARABLE_FORCED = "separable_forced"
    PURE_MOMENTUM = "pure_momentum"


class PotentialTerm(NamedTuple):
    k_x: int
    k_t: int
    amp_cos: float
    amp_sin: float


def product_terms(amp, x_fn, k_x, t_fn, k_t):
    """Expand ``amp * x_fn(2 pi k_x x) * t_fn(2 pi k_t t)`` into potential terms.

    ``x_fn`` and ``t_fn`` are ``"cos"`` or ``"sin"``.
    """
    half = 0.5 * amp
    plus, minus = (k_x, k_t), (k_x, -k_t)
    if (x_fn, t_fn) == ("cos", "cos"):
        return [PotentialTerm(*plus, half, 0.0), PotentialTerm(*minus, half, 0.0)]
    if (x_fn, t_fn) == ("sin", "sin"):
        return [PotentialTerm(*minus, half, 0.0), PotentialTerm(*plus, -half, 0.0)]
    if (x_fn, t_fn) == ("sin", "cos"):
        return [PotentialTerm(*plus, 0.0, half), PotentialTerm(*minus, 0.0, half)]
    if (x_fn, t_fn) == ("cos", "sin"):
        return [PotentialTerm(*plus, 0.0, half), PotentialTerm(*minus, 0.0, -half)]
    raise ValueError(f"unknown trigonometric factors {x_fn!r}, {t_fn!r}")


def _canonical_terms(terms):
    merged = {}
    for k_x, k_t, a, b in terms:
        k_x, k_t = int(k_x), int(k_t)
        if k_x < 0 or (k_x == 0 and k_t < 0):
            # cos is even, sin is odd
            k_x, k_t, b = -k_x, -k_t, -b
        if k_x == 0 and k_t == 0:
            b = 0.0
        ca, cb = merged.get((k_x, k_t), (0.0, 0.0))
        merged[(k_x, k_t)] = (ca + float(a), cb + float(b))
    out = [PotentialTerm(kx, kt, a, b) for (kx, kt), (a, b) in sorted(merged.items())
           if a != 0.0 or b != 0.0]
    return tuple(out)


@dataclass(frozen=True)
class HamiltonianSpec:
    """Immutable description of ``H(t, x, p)``."""

    kind: Kind = Kind.SEPARABLE_FORCED
    potential_coeffs: tuple = ()
    momentum_poly: tuple = QUADRATIC

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        terms = tuple(PotentialTerm(int(t[0]), int(t[1]), float(t[2]), float(t[3]))
                      for t in self.potential_coeffs)
        object.__setattr__(self, "potential_coeffs", terms)
        poly = tuple(float(a) for a in self.momentum_poly)
        object.__setattr__(self, "momentum_poly", poly)
        if kind is Kind.SEPARABLE_FORCED and _trim(poly) != QUADRATIC:
            raise ConfigError("spec.momentum_poly",
                              "separable_forced Hamiltonians use p**2/2")
        if kind is Kind.PURE_MOMENTUM and terms:
            raise ConfigError("spec.potential", "pure_momentum Hamiltonians carry no potential")
        _check_convex(poly)

    # -- constructors -----------------------------------------------------
    @classmethod
    def free(cls):
        return cls(Kind.SEPARABLE_FORCED, ())

    @classmethod
    def pendulum(cls, amp=0.2):
        """Autonomous pendulum ``V = amp cos(2 pi x)``."""
        return cls(Kind.SEPARABLE_FORCED, (PotentialTerm(1, 0, amp, 0.0),))

    @classmethod
    def forced_pendulum(cls, amp=0.2):
        """``V = amp cos(2 pi x) cos(2 pi t)``."""
        return cls(Kind.SEPARABLE_FORCED, tuple(product_terms(amp, "cos", 1, "cos", 1)))

    @classmethod
    def pure_momentum(cls, poly=QUADRATIC):
        return cls(Kind.PURE_MOMENTUM, (), tuple(poly))

    # -- properties -------------------------------------------------------
    @property
    def is_quadratic(self):
        return _trim(self.momentum_poly) == QUADRATIC

    @property
    def is_autonomous(self):
        return all(t.k_t == 0 for t in self.potential_coeffs)

    @property
    def has_potential(self):
        return bool(self.potential_coeffs)

    def canonical(self):
        """Same Hamiltonian with merged, sign-normalized and sorted terms."""
        return HamiltonianSpec(self.kind, _canonical_terms(self.potential_coeffs),
                               _trim(self.momentum_poly))

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "potential": [list(t) for t in self.potential_coeffs],
            "momentum_poly": list(self.momentum_poly),
        }

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("spec", "expected a JSON object")
        kind = data.get("kind", Kind.SEPARABLE_FORCED.value)
        try:
            kind = Kind(kind)
        except ValueError:
            raise ConfigError("spec.kind", f"unknown kind {kind!r}") from None
        terms = []
        for i, term in enumerate(data.get("potential", [])):
            if isinstance(term, dict):
                try:
                    terms += product_terms(float(term["amp"]), term.get("x", "cos"),
                                           int(term.get("k_x", 1)), term.get("t", "cos"),
                                           int(term.get("k_t", 0)))
                except (KeyError, ValueError, TypeError) as exc:
                    raise ConfigError(f"spec.potential[{i}]", str(exc)) from None
            elif isinstance(term, (list, tuple)) and len(term) == 4:
                try:
                    kx, kt, a, b = (float(v) for v in term)
                except (TypeError, ValueError):
                    raise ConfigError(f"spec.potential[{i}]", "entries must be numbers") from None
                if int(kx) != kx or int(kt) != kt:
                    raise ConfigError(f"spec.potential[{i}]", "wave numbers must be integers")
                terms.append(PotentialTerm(int(kx), int(kt), a, b))
            else:
                raise ConfigError(f"spec.potential[{i}]",
                                  "expected [k_x, k_t, amp_cos, amp_sin] or a product object")
        poly = data.get("momentum_poly", QUADRATIC)
        return cls(kind, tuple(terms), tuple(poly))


def _trim(poly):
    poly = list(poly)
    while len(poly) > 1 and poly[-1] == 0.0:
        poly.pop()
    return tuple(float(a) for a in poly)


def _check_convex(poly):
    poly = _trim(poly)
    deg = len(poly) - 1
    if deg < 2 or deg % 2 or poly[-1] <= 0:
        raise ConfigError("spec.momentum_poly",
                          "must have even degree >= 2 and a positive leading coefficient")
    second = P.polyder(np.array(poly), 2)
    grid = np.linspace(-P_MAX, P_MAX, 4001)
    if np.any(P.polyval(grid, second) < -1e-12):
        raise ConfigError("spec.momentum_poly", "must be convex in p")


# -- evaluation -----------------------------------------------------------

def potential(spec, t, x):
    """V(t, x); broadcasts over array arguments."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    out = np.zeros(np.broadcast(t, x).shape)
    for k_x, k_t, a, b in spec.potential_coeffs:
        phase = TWO_PI * (k_x * x + k_t * t)
        if a:
            out = out + a * np.cos(phase)
        if b:
            out = out + b * np.sin(phase)
    return out


def potential_dx(spec, t, x):
    """Analytic ``dV/dx``."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    out = np.zeros(np.broadcast(t, x).shape)
    for k_x, k_t, a, b in spec.potential_coeffs:
        if k_x == 0:
            continue
        phase = TWO_PI * (k_x * x + k_t * t)
        out = out + TWO_PI * k_x * (b * np.cos(phase) - a * np.sin(phase))
    return out


def kinetic(spec, p):
    if spec.is_quadratic:
        return 0.5 * np.square(p)
    return P.polyval(p, spec.momentum_poly)


def kinetic_dp(spec, p):
    if spec.is_quadratic:
        return np.asarray(p, dtype=float) * 1.0
    return P.polyval(p, P.polyder(np.array(spec.momentum_poly)))


def kinetic_dpp(spec, p):
    if spec.is_quadratic:
        return np.ones_like(np.asarray(p, dtype=float))
    return P.polyval(p, P.polyder(np.array(spec.momentum_poly), 2))


def eval_hamiltonian(spec, t, x, p):
    return float(kinetic(spec, p) + potential(spec, t, x))


def eval_vector_field(spec, t, point):
    """X = (dH/dp, -dH/dx) at ``point``."""
    return (float(kinetic_dp(spec, point.p)), float(-potential_dx(spec, t, point.x)))


def solve_velocity(spec, v):
    """Momentum ``p`` with ``dK/dp(p) = v`` (safeguarded Newton with bisection)."""
    if spec.is_quadratic:
        return float(v)
    v = float(v)
    tol = NEWTON_TOL * max(1.0, abs(v))

    def resid(p):
        return float(kinetic_dp(spec, p)) - v

    lo, hi = v - 1.0, v + 1.0
    width = 1.0
    while resid(lo) > 0:
        width *= 2
        lo = v - width
    width = 1.0
    while resid(hi) < 0:
        width *= 2
        hi = v + width
    p = min(max(v, lo), hi)
    for _ in range(NEWTON_MAX_ITER):
        r = resid(p)
        if abs(r) <= tol:
            return p
        if r > 0:
            hi = p
        else:
            lo = p
        slope = float(kinetic_dpp(spec, p))
        step = p - r / slope if slope > 0 else math.nan
        p = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 1e-15 * max(1.0, abs(p)):
            if abs(resid(p)) <= 1e3 * tol:
                return p
    raise NoConvergence(f"Legendre transform did not converge for v={v}")


def legendre_lagrangian(spec, t, x, v):
    """Return ``(L(t, x, v), p*)`` with ``L = sup_p (p v - H)`` and ``p*`` the maximizer."""
    if spec.is_quadratic:
        return 0.5 * v * v - float(potential(spec, t, x)), float(v)
    p = solve_velocity(spec, v)
    return p * v - float(kinetic(spec, p)) - float(potential(spec, t, x)), p


def lagrangian_dv(spec, t, x, v):
    """``dL/dv``, which equals the conjugate momentum."""
    return legendre_lagrangian(spec, t, x, v)[1]


# -- flow -----------------------------------------------------------------

@dataclass(frozen=True)
class PhasePoint:
    x: float
    p: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x) % 1.0)
        object.__setattr__(self, "p", float(self.p))


@dataclass(frozen=True)
class Trajectory:
    """Time-stamped RK4 orbit; ``x_lift`` keeps the winding that ``x`` forgets."""

    t0: float
    dt: float
    times: np.ndarray = field(repr=False)
    x_lift: np.ndarray = field(repr=False)
    p: np.ndarray = field(repr=False)

    @property
    def x(self):
        return np.mod(self.x_lift, 1.0)

    @property
    def points(self):
        return [PhasePoint(x, p) for x, p in zip(self.x_lift, self.p)]

    @property
    def end(self):
        return PhasePoint(self.x_lift[-1], self.p[-1])

    def __len__(self):
        return len(self.times)


def _rhs(spec, t, x, p):
    return kinetic_dp(spec, p), -potential_dx(spec, t, x)


def _steps(t0, t1, dt):
    span = t1 - t0
    if span == 0:
        return []
    if dt <= 0:
        raise ValueError("dt must be positive")
    h = math.copysign(dt, span)
    n_full = int(math.floor(abs(span) / dt + 1e-9))
    steps = [h] * n_full
    rest = span - n_full * h
    if abs(rest) > 1e-12 * max(1.0, abs(span)):
        steps.append(rest)
    return steps


def flow_arrays(spec, t0, t1, x, p, dt=1e-3, p_max=P_MAX, record=False):
    """RK4 flow of many points at once; ``x`` is returned lifted (not reduced)."""
    x = np.array(x, dtype=float, copy=True)
    p = np.array(p, dtype=float, copy=True)
    t = float(t0)
    history = [(t, x.copy(), p.copy())] if record else None
    for h in _steps(float(t0), float(t1), dt):
        k1x, k1p = _rhs(spec, t, x, p)
        k2x, k2p = _rhs(spec, t + h / 2, x + h / 2 * k1x, p + h / 2 * k1p)
        k3x, k3p = _rhs(spec, t + h / 2, x + h / 2 * k2x, p + h / 2 * k2p)
        k4x, k4p = _rhs(spec, t + h, x + h * k3x, p + h * k3p)
        x = x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        p = p + h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        t += h
        if np.any(np.abs(p) > p_max) or not np.all(np.isfinite(p)):
            raise BlowUp(f"|p| exceeded {p_max} at t={t:.6g}")
        if record:
            history.append((t, x.copy(), p.copy()))
    if record:
        return history
    return x, p


def integrate_flow(spec, t0, t1, start, dt=1e-3, p_max=P_MAX):
    """Orbit of ``start`` under the time-dependent Hamiltonian flow from t0 to t1."""
    hist = flow_arrays(spec, t0, t1, np.array([start.x]), np.array([start.p]),
                       dt=dt, p_max=p_max, record=True)
    times = np.array([h[0] for h in hist])
    xs = np.array([h[1][0] for h in hist])
    ps = np.array([h[2][0] for h in hist])
    return Trajectory(float(t0), float(dt), times, xs, ps)


def time_one_map(spec, start, dt=1e-3, p_max=P_MAX):
    """The map phi = phi_{0,1} applied to one phase point."""
    x, p = flow_arrays(spec, 0.0, 1.0, np.array([start.x]), np.array([start.p]),
                       dt=dt, p_max=p_max)
    return PhasePoint(x[0], p[0])


def time_one_jacobian(spec, start, h=1e-5, dt=1e-3):
    """Central finite-difference Jacobian of phi at ``start`` (in lifted coordinates)."""
    x0, p0 = start.x, start.p
    xs = np.array([x0 + h, x0 - h, x0, x0])
    ps = np.array([p0, p0, p0 + h, p0 - h])
    x1, p1 = flow_arrays(spec, 0.0, 1.0, xs, ps, dt=dt)
    return np.array([[(x1[0] - x1[1]) / (2 * h), (x1[2] - x1[3]) / (2 * h)],
                     [(p1[0] - p1[1]) / (2 * h), (p1[2] - p1[3]) / (2 * h)]])


def lagrangian_table(spec, velocities: Sequence[float]):
    """Kinetic part of the Lagrangian ``sup_p (p v - K(p))`` at each velocity."""
    v = np.asarray(velocities, dtype=float)
    if spec.is_quadratic:
        return 0.5 * v * v
    out = np.empty_like(v)
    for i, vi in enumerate(v.ravel()):
        p = solve_velocity(spec, vi)
        out.flat[i] = p * vi - float(kinetic(spec, p))
    return out
