import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tailpole import distkit, roots, scaling
from tailpole.errors import InputError, OrderViolation

from .conftest import family_system

# 40-digit oracle values (tests/oracles/derive_values.py)
Z0_F = 1.5654058252455583
Z1_F = 1.7676954309008522 - 0.64988631136928537j
z1_F = 0.7830295120591443 + 0.27858159614978961j


def test_interior_basics(inst_f, poles_f):
    assert len(poles_f.interior) == inst_f.s
    assert poles_f.interior[0].value == 1
    assert [z.index for z in poles_f.interior] == list(range(inst_f.s))
    for z in poles_f.interior:
        assert z.residual < 1e-11
        assert abs(z.value) <= 1 + 1e-12
        assert z.kind is roots.ZeroKind.INTERIOR


def test_first_interior_zero_matches_oracle(poles_f):
    assert poles_f.interior[1].value == pytest.approx(z1_F, abs=1e-12)


def test_first_interior_zero_distance_to_seed(inst_f, poles_f):
    # frozen: the O(1/s) seed error has a constant near 6 at b0 = 1
    gap = abs(poles_f.interior[1].value - scaling.asym_interior_zero(inst_f, 1))
    assert gap == pytest.approx(0.0591320619, abs=1e-9)


def test_instance_g_poles(poles_g):
    assert [z.value for z in poles_g.interior] == [1]
    assert poles_g.Z0 == pytest.approx(2.25, abs=1e-14)
    assert poles_g.saddle.value.real == pytest.approx(1.5, abs=1e-14)


def test_dominant_pole_instance_f(inst_f, poles_f):
    z0 = poles_f.exterior[poles_f.k_max]
    assert z0.value.imag == 0.0
    assert z0.value.real == pytest.approx(Z0_F, abs=1e-14)
    assert z0.residual < 1e-11
    # frozen distance to the 1.4 landmark
    assert abs(z0.value.real - 1.4) == pytest.approx(0.16540582524555902, abs=1e-12)


def test_first_exterior_zero_matches_oracle(poles_f):
    assert poles_f.Z(1) == pytest.approx(Z1_F, abs=1e-12)


def test_exterior_pair_two(inst_f, poles_f):
    assert poles_f.Z(-2) == pytest.approx(poles_f.Z(2).conjugate(), abs=1e-15)
    assert abs(poles_f.Z(2)) > abs(poles_f.Z(1)) > poles_f.Z0


def test_exterior_residuals_and_order(poles_f):
    mods = [abs(poles_f.Z(k)) for k in range(poles_f.k_max + 1)]
    assert mods == sorted(mods)
    for z in poles_f.exterior:
        assert z.residual < 1e-11
        assert abs(z.value) > 1


def test_conjugate_symmetry(inst_f, poles_f):
    vals = poles_f.interior_values(include_one=True)
    s = inst_f.s
    for j in range(1, s):
        assert abs(vals[j] - vals[s - j].conjugate()) < 1e-10
    for k in range(1, poles_f.k_max + 1):
        assert abs(poles_f.Z(k) - poles_f.Z(-k).conjugate()) < 1e-10


def test_interior_zeros_distinct(poles_f):
    v = poles_f.interior_values(include_one=True)
    gaps = np.abs(v[:, None] - v[None, :]) + np.eye(v.size)
    assert gaps.min() > 1e-9


def test_substitution_residuals(inst_f, poles_f):
    allz = np.concatenate([poles_f.interior_values(True),
                           [z.value for z in poles_f.exterior]])
    assert roots.substitution_residual(inst_f, allz).max() < 1e-9


def test_saddle_instance_f(inst_f, poles_f):
    zsp = poles_f.saddle.value.real
    # closed form for Bernoulli(1/2): 180 z / (1 + z) = 100
    assert zsp == pytest.approx(1.25, abs=1e-15)
    assert 1 < zsp < poles_f.Z0
    assert abs(zsp - 1.2) <= 0.05


@pytest.mark.parametrize("s", [25, 100, 400])
def test_saddle_is_a_minimum(s):
    p, poles = family_system(s)
    x = poles.saddle.value.real
    X, dX, d2X = (complex(v).real for v in distkit.pgf_derivs(p.dist, x))
    g2 = 1 / x**2 + (p.n / p.s) * (d2X / X - (dX / X) ** 2)
    assert g2 > 0


def test_argument_principle_instance_f(inst_f, poles_f):
    assert roots.argument_principle_count(inst_f, (1 + poles_f.Z0) / 2) == 100
    between = (poles_f.Z0 + abs(poles_f.Z(1))) / 2
    assert roots.argument_principle_count(inst_f, between) == 101


def test_argument_principle_instance_g(inst_g):
    assert roots.argument_principle_count(inst_g, 1.5) == 1


@pytest.mark.parametrize("s", [25, 100, 400])
def test_argument_principle_family(s):
    p, poles = family_system(s)
    assert roots.argument_principle_count(p, (1 + poles.Z0) / 2) == s


@pytest.mark.parametrize("s", [100, 400, 1600])
def test_interior_seed_error_is_order_one_over_s(s):
    p, poles = family_system(s)
    worst = max(
        s * abs(poles.interior[j].value - scaling.asym_interior_zero(p, j)) for j in range(1, 6))
    assert worst < 10


def test_interior_seed_error_constant_settles():
    worst = []
    for s in (100, 400, 1600):
        p, poles = family_system(s)
        worst.append(max(
            s * abs(poles.interior[j].value - scaling.asym_interior_zero(p, j))
            for j in range(1, 6)))
    # frozen: 38.1, 41.9, 43.8; bounded, with increments shrinking
    assert worst == pytest.approx([38.12, 41.90, 43.82], abs=0.01)
    assert worst[2] - worst[1] < worst[1] - worst[0]


def test_exterior_seed_error_constant_settles():
    for k in (0, 2):
        scaled = []
        for s in (100, 400, 1600):
            p, poles = family_system(s)
            scaled.append(s * abs(poles.Z(k) - scaling.asym_exterior_zero(p, k)))
        assert scaled[0] > scaled[1] > scaled[2]
        assert scaled[2] < 50


def test_threaded_result_is_identical(inst_f):
    a = roots.find_poles(inst_f, k_max=2)
    b = roots.find_poles(inst_f, k_max=2, workers=4)
    assert a == b


def test_order_violation_when_s_too_small(inst_g):
    with pytest.raises(OrderViolation):
        roots.exterior_zeros(inst_g, 1)


def test_uncomputed_pole_lookup(poles_f):
    with pytest.raises(InputError):
        poles_f.Z(6)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.15, 0.85), st.integers(8, 60), st.floats(0.3, 2.5))
def test_random_bernoulli_systems(prob, n, beta):
    d = distkit.bernoulli(prob)
    s = scaling.capacity_for(n, beta, d)
    if s >= n:
        return
    p = scaling.derive_params(n, s, d)
    poles = roots.find_poles(p)
    assert len(poles.interior) == s
    assert max(z.residual for z in poles.interior) < 1e-11
    assert 1 < poles.saddle.value.real < poles.Z0
    assert roots.argument_principle_count(p, (1 + poles.Z0) / 2) == s
    assert math.isfinite(poles.Z0)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(0.05, 1.0), min_size=3, max_size=4), st.integers(5, 30))
def test_random_multilevel_sources(weights, n):
    d = distkit.from_pmf([w / sum(weights) for w in weights])
    s = scaling.capacity_for(n, 1.0, d)
    if s >= n * d.degree:
        return
    p = scaling.derive_params(n, s, d)
    poles = roots.find_poles(p, k_max=0)
    vals = poles.interior_values(include_one=True)
    assert vals.size == s
    assert roots.substitution_residual(p, vals).max() < 1e-9
    assert roots.argument_principle_count(p, (1 + poles.Z0) / 2) == s
