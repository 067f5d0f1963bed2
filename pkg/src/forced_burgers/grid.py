"""Periodic functions sampled on a uniform grid of the circle R/Z.

``values[i]`` is the sample at ``x_i = i/n``.  Quadrature is the uniform
Riemann sum, and :func:`primitive` / :func:`staggered_derivative` form an
exact discrete inverse pair (up to the mean), so a function and the
derivative of its primitive agree to rounding.
"""
from __future__ import annotations

import io
import math

import numpy as np

from .errors import SizeMismatch

DEFAULT_N = 512


def is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


class GridFunction:
    """Immutable 1-periodic function sampled at ``i/n``."""

    __slots__ = ("_values",)

    def __init__(self, values):
        arr = np.array(values, dtype=float, copy=True).ravel()
        if not is_power_of_two(arr.size):
            raise ValueError(f"grid size must be a power of two, got {arr.size}")
        arr.setflags(write=False)
        self._values = arr

    @classmethod
    def from_function(cls, fn, n=DEFAULT_N):
        return cls(fn(nodes(n)))

    @classmethod
    def constant(cls, value, n=DEFAULT_N):
        return cls(np.full(n, float(value)))

    @property
    def values(self):
        return self._values

    @property
    def n(self):
        return self._values.size

    @property
    def x(self):
        return nodes(self.n)

    def __len__(self):
        return self.n

    def __array__(self, dtype=None, copy=None):
        return self._values if dtype is None else self._values.astype(dtype)

    def __add__(self, other):
        return GridFunction(self._values + _raw(other, self.n))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFunction(self._values - _raw(other, self.n))

    def __rsub__(self, other):
        return GridFunction(_raw(other, self.n) - self._values)

    def __neg__(self):
        return GridFunction(-self._values)

    def __mul__(self, scalar):
        return GridFunction(self._values * float(scalar))

    __rmul__ = __mul__

    def __repr__(self):
        return f"GridFunction(n={self.n}, mean={mean(self):.6g})"

    def to_csv(self):
        return to_csv(self)


def _raw(other, n):
    if isinstance(other, GridFunction):
        if other.n != n:
            raise SizeMismatch(f"grid sizes differ: {n} vs {other.n}")
        return other.values
    return float(other)


def nodes(n):
    return np.arange(n) / n


def mean(f):
    # exactly rounded sum, so constants have their own value as mean
    return math.fsum(f.values) / f.n


def l1_distance(f, g):
    if f.n != g.n:
        raise SizeMismatch(f"grid sizes differ: {f.n} vs {g.n}")
    return float(np.sum(np.abs(f.values - g.values)) / f.n)


def sup_distance(f, g):
    if f.n != g.n:
        raise SizeMismatch(f"grid sizes differ: {f.n} vs {g.n}")
    return float(np.max(np.abs(f.values - g.values)))


def primitive(y):
    """``u(x_k) = sum_{i<k} (y_i - mean y)/n``; periodic because the mean is removed."""
    centered = (y.values - mean(y)) / y.n
    u = np.empty(y.n)
    u[0] = 0.0
    np.cumsum(centered[:-1], out=u[1:])
    return GridFunction(u)


def staggered_derivative(u):
    """Cyclic forward difference ``(u_{i+1} - u_i) n``."""
    return GridFunction((np.roll(u.values, -1) - u.values) * u.n)


def max_oneside_slope(f):
    """Discrete one-sided Lipschitz constant ``max_i (f_{i+1} - f_i) n``."""
    return float(np.max(np.roll(f.values, -1) - f.values) * f.n)


def to_csv(f):
    buf = io.StringIO()
    buf.write("x,value\n")
    for x, v in zip(f.x, f.values):
        buf.write(f"{x:.17g},{v:.17g}\n")
    return buf.getvalue()


def from_csv(text):
    rows = [line.split(",") for line in text.strip().splitlines()[1:]]
    return GridFunction([float(r[1]) for r in rows])


def fourier_series(n, terms, constant=0.0):
    """Samples of ``constant + sum a cos(2 pi k x) + b sin(2 pi k x)`` over ``(k, a, b)`` terms."""
    x = nodes(n)
    out = np.full(n, float(constant))
    for k, a, b in terms:
        out += a * np.cos(2 * np.pi * k * x) + b * np.sin(2 * np.pi * k * x)
    return GridFunction(out)


def random_smooth(rng, n, modes=4, amplitude=0.5, constant=0.0):
    """Random trigonometric polynomial; mode ``k`` has standard deviation ``amplitude/k``."""
    k = np.arange(1, modes + 1)
    coef = rng.standard_normal((modes, 2)) * (amplitude / k)[:, None]
    return fourier_series(n, [(int(kk), a, b) for kk, (a, b) in zip(k, coef)], constant)
