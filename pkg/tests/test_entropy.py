import numpy as np
import pytest
from hypothesis import given, strategies as st

from forced_burgers import entropy as en
from forced_burgers.errors import CflViolation
from forced_burgers.grid import (GridFunction, l1_distance, max_oneside_slope, mean, random_smooth,
                                 staggered_derivative, primitive)
from forced_burgers.hamiltonian import HamiltonianSpec, Kind, PotentialTerm
from forced_burgers.lax_oleinik import LaxOleinikConfig

TWO_PI = 2 * np.pi


def sine(n, amp=1.0, const=0.0):
    return GridFunction.from_function(lambda x: const + amp * np.sin(TWO_PI * x), n)


@pytest.mark.parametrize("c", [0.0, 0.3, -1.0])
def test_constants_are_fixed_exactly(free, cfg, c):
    y = GridFunction.constant(c, cfg.n)
    assert np.array_equal(en.entropy_step(free, cfg, y).values, y.values)


def test_factorization_by_hand(forced, small_cfg):
    from forced_burgers import lax_oleinik as lo
    y = random_smooth(np.random.default_rng(2), small_cfg.n, 3, 0.4, 0.2)
    u = lo.apply_periods(forced, small_cfg.with_c(mean(y)), primitive(y))
    assert np.array_equal(en.entropy_step(forced, small_cfg, y).values,
                          (mean(y) + staggered_derivative(u)).values)


@given(st.integers(0, 2 ** 31 - 1), st.floats(-1, 1))
def test_mean_is_preserved(seed, c):
    cfg = LaxOleinikConfig(n=64, m=8, v_max=2.0)
    y = random_smooth(np.random.default_rng(seed), 64, 4, 0.5, c)
    assert abs(mean(en.entropy_step(HamiltonianSpec.forced_pendulum(), cfg, y)) - mean(y)) < 1e-13


def test_nwave_matches_godunov(free, cfg):
    y0 = sine(cfg.n)
    gap = l1_distance(en.entropy_step(free, cfg, y0), en.godunov_evolve(free, y0, 0.0, 1.0))
    assert gap <= 5e-2


def test_forced_evolution_matches_godunov(forced):
    cfg = LaxOleinikConfig(n=512, m=64)
    y0 = sine(512, 0.5, 0.2)
    gap = l1_distance(en.entropy_step(forced, cfg, y0), en.godunov_evolve(forced, y0, 0.0, 1.0))
    assert gap <= 5e-2


@given(st.integers(0, 2 ** 31 - 1), st.integers(0, 2 ** 31 - 1))
def test_l1_contraction(sa, sb):
    spec = HamiltonianSpec.forced_pendulum()
    cfg = LaxOleinikConfig(n=128, m=16, v_max=3.0)
    y = random_smooth(np.random.default_rng(sa), 128, 4, 0.5, 0.1)
    z = random_smooth(np.random.default_rng(sb), 128, 4, 0.5, 0.1)
    z = z - mean(z) + mean(y)
    assert l1_distance(en.entropy_step(spec, cfg, y), en.entropy_step(spec, cfg, z)) <= l1_distance(y, z) + 10 / 128


@given(st.integers(0, 2 ** 31 - 1), st.floats(0.01, 0.5))
def test_monotone(seed, bump):
    spec = HamiltonianSpec.forced_pendulum()
    cfg = LaxOleinikConfig(n=128, m=16, v_max=3.0)
    y = random_smooth(np.random.default_rng(seed), 128, 4, 0.5)
    z = GridFunction(y.values + bump * (1 + np.cos(TWO_PI * y.x)) / 2)
    assert np.all(en.entropy_step(spec, cfg, y).values <= en.entropy_step(spec, cfg, z).values + 10 / 128)


def test_oleinik_bound_after_one_period(forced):
    cfg = LaxOleinikConfig(n=256, m=32, v_max=4.0)
    rng = np.random.default_rng(5)
    slopes = [max_oneside_slope(en.entropy_step(forced, cfg, random_smooth(rng, 256, 6, 1.0, rng.uniform(-1, 1))))
              for _ in range(10)]
    # one-sided bound ~ 1/t plus forcing, independent of the data
    assert max(slopes) < 4.0


def test_reversal_before_shocks():
    spec = HamiltonianSpec(Kind.SEPARABLE_FORCED, [PotentialTerm(1, 0, 0.1, 0.0), PotentialTerm(1, 1, 0.0, 0.1)])
    cfg = LaxOleinikConfig()
    y = GridFunction.from_function(lambda x: 0.05 + 0.1 * np.sin(TWO_PI * x) + 0.05 * np.cos(2 * TWO_PI * x), cfg.n)
    fwd = en.entropy_evolve(spec, cfg, y, 0.0, cfg.m // 4)
    back = en.entropy_evolve(en.reversed_spec(spec), cfg, -fwd, -0.25, cfg.m // 4)
    assert l1_distance(back, -y) <= 5e-2
    # the evolution moved y by more than the reversal error
    assert l1_distance(fwd, y) > 2 * l1_distance(back, -y)


# -- finite-volume oracle -------------------------------------------------------------------

def test_godunov_keeps_constants(free):
    y = GridFunction.constant(0.7, 256)
    assert np.array_equal(en.godunov_evolve(free, y, 0.0, 1.0).values, y.values)


def test_godunov_shock_speed(free):
    n = 512
    y = GridFunction.from_function(lambda x: np.where(x < 0.5, 1.0, 0.0), n)
    t = 0.4
    out = en.godunov_evolve(free, y, 0.0, t).values
    # shock from x=1/2 moves at speed 1/2; the rarefaction from x=0 spreads behind it
    x = np.arange(n) / n
    region = (x > 0.55) & (x < 0.85)
    front = x[region][np.argmin(np.abs(out[region] - 0.5))]
    assert abs(front - (0.5 + 0.5 * t)) <= 1.5 / n


def test_godunov_rarefaction(free):
    n = 512
    y = GridFunction.from_function(lambda x: np.where(x < 0.5, -0.5, 0.5), n)
    x = np.arange(n) / n
    scaled = []
    for t in (0.1, 0.2, 0.4):
        out = en.godunov_evolve(free, y, 0.0, t)
        scaled.append(max_oneside_slope(out) * t)
        fan = np.abs(x - 0.5) < 0.4 * t
        assert np.max(np.abs(out.values[fan] - (x[fan] - 0.5) / t)) < 0.05
    # slope * t stays level, i.e. the one-sided slope decays like 1/t
    assert max(scaled) / min(scaled) < 1.15


def test_cfl_violation(free):
    with pytest.raises(CflViolation):
        en.godunov_step(free, GridFunction.constant(1.0, 64), 0.0, 0.1)


def test_godunov_rejects_nonquadratic():
    spec = HamiltonianSpec.pure_momentum((0, 0, 0, 0, 0.25))
    with pytest.raises(ValueError):
        en.godunov_step(spec, GridFunction.constant(0.0, 64), 0.0, 1e-3)


# -- reversal --------------------------------------------------------------------------------

def test_reversed_spec_examples(pendulum, forced):
    assert en.reversed_spec(pendulum) == pendulum.canonical()
    assert en.reversed_spec(forced) == forced.canonical()
    sin_t = HamiltonianSpec.from_dict({"potential": [{"amp": 1.0, "x": "cos", "k_x": 1, "t": "sin", "k_t": 1}]})
    neg = HamiltonianSpec.from_dict({"potential": [{"amp": -1.0, "x": "cos", "k_x": 1, "t": "sin", "k_t": 1}]})
    assert en.reversed_spec(sin_t) == neg.canonical()


@given(st.floats(0, 1), st.floats(0, 1))
def test_reversed_potential_is_time_reflection(t, x):
    from forced_burgers.hamiltonian import potential
    spec = HamiltonianSpec(Kind.SEPARABLE_FORCED, [PotentialTerm(1, 1, 0.2, 0.1), PotentialTerm(2, -3, 0.0, 0.4)])
    assert potential(en.reversed_spec(spec), t, x) == pytest.approx(potential(spec, -t, x), abs=1e-14)


def test_reversed_momentum_polynomial():
    spec = HamiltonianSpec.pure_momentum((0.0, 0.3, 0.5, 0.1, 0.2))
    assert en.reversed_spec(spec).momentum_poly == (0.0, -0.3, 0.5, -0.1, 0.2)
