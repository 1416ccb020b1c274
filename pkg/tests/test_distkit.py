import cmath
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tailpole import distkit
from tailpole.errors import (
    BranchAmbiguity,
    InputError,
    LatticePeriodic,
    NegativeMass,
    NotNormalized,
    ZeroVariance,
)


def test_bernoulli_half_moments():
    d = distkit.from_pmf([0.5, 0.5])
    assert d.mu == 0.5
    assert d.sigma2 == 0.25
    assert d.support_span == 1


def test_point_mass_rejected():
    with pytest.raises(ZeroVariance):
        distkit.from_pmf([0, 1])


def test_lattice_reports_gcd():
    with pytest.raises(LatticePeriodic) as info:
        distkit.from_pmf([0.5, 0, 0.5])
    assert info.value.gcd == 2


@pytest.mark.parametrize(
    "probs, err",
    [([], InputError), ([0.5, float("nan")], InputError), ([1.2, -0.2], NegativeMass),
     ([0.5, 0.4], NotNormalized)],
)
def test_invalid_pmfs(probs, err):
    with pytest.raises(err):
        distkit.from_pmf(probs)


def test_small_normalization_slack_is_absorbed():
    d = distkit.from_pmf([0.5, 0.5 + 5e-10])
    assert math.isclose(float(np.sum(d.pmf)), 1.0, abs_tol=1e-15)


def test_trailing_zeros_do_not_raise_degree():
    assert distkit.from_pmf([0.3, 0.7, 0.0, 0.0]).degree == 1


def test_pgf_derivs_bernoulli():
    d = distkit.bernoulli(0.4)
    assert distkit.pgf_derivs(d, 1) == (1.0, 0.4, 0.0)
    x, dx, d2x = distkit.pgf_derivs(d, 2.25)
    assert (x, dx, d2x) == pytest.approx((1.5, 0.4, 0.0), abs=1e-15)


def test_pgf_derivs_binomial_two():
    d = distkit.from_pmf([0.36, 0.48, 0.16])
    assert distkit.pgf_derivs(d, 1) == pytest.approx((1.0, 0.8, 0.32), abs=1e-15)


def test_log_pgf_values():
    d = distkit.bernoulli(0.5)
    assert distkit.log_pgf(d, 1) == 0
    assert distkit.log_pgf(d, 1.4) == pytest.approx(math.log(1.2), abs=1e-15)
    assert distkit.log_pgf(d, 1.4) == pytest.approx(0.182322, abs=1e-6)
    with pytest.raises(BranchAmbiguity):
        distkit.log_pgf(d, -1)


def test_log_aggregate_values():
    assert distkit.log_aggregate(distkit.bernoulli(0.5), 180, 1) == 0
    assert distkit.log_aggregate(distkit.bernoulli(0.4), 2, 2.25) == pytest.approx(
        0.810930, abs=1e-6)
    assert distkit.log_aggregate(distkit.bernoulli(0.5), 180, 1.4) == pytest.approx(
        180 * math.log(1.2), rel=1e-14)


def test_json_round_trip(tmp_path):
    d = distkit.from_pmf([0.2, 0.5, 0.3], name="three")
    path = tmp_path / "d.json"
    path.write_text(distkit.dump_distribution(d))
    back = distkit.load_distribution(path)
    assert back.name == "three"
    np.testing.assert_array_equal(back.pmf, d.pmf)


def test_json_without_pmf_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"name": "x"}))
    with pytest.raises(InputError):
        distkit.load_distribution(path)


pmfs = st.lists(st.floats(0.01, 1.0), min_size=2, max_size=6).map(
    lambda w: [x / sum(w) for x in w])


@settings(max_examples=40, deadline=None)
@given(pmfs, st.floats(0.1, 2.0), st.floats(-math.pi, math.pi))
def test_derivatives_match_central_differences(probs, r, theta):
    d = distkit.from_pmf(probs)
    z = r * cmath.exp(1j * theta)
    h = 1e-5
    x, dx, d2x = distkit.pgf_derivs(d, z)
    xp, dxp, _ = distkit.pgf_derivs(d, z + h)
    xm, dxm, _ = distkit.pgf_derivs(d, z - h)
    assert abs((xp - xm) / (2 * h) - dx) < 1e-6
    assert abs((dxp - dxm) / (2 * h) - d2x) < 1e-6


@settings(max_examples=40, deadline=None)
@given(pmfs, st.integers(1, 30), st.floats(0.2, 1.5), st.floats(-1.2, 1.2))
def test_log_aggregate_matches_power(probs, n, r, theta):
    d = distkit.from_pmf(probs)
    z = r * cmath.exp(1j * theta)
    x = complex(distkit.pgf(d, z))
    if x.real <= 0 and abs(x.imag) < 1e-12:
        return
    direct = x**n
    via_log = cmath.exp(distkit.log_aggregate(d, n, z))
    assert abs(via_log - direct) <= 1e-10 * abs(direct)


@settings(max_examples=20, deadline=None)
@given(pmfs, st.sampled_from([1.05, 1.2]))
def test_modulus_peaks_on_positive_axis(probs, r1):
    d = distkit.from_pmf(probs)
    theta = 2 * math.pi * np.arange(1, 10_000) / 10_000
    ring = np.abs(distkit.pgf(d, r1 * np.exp(1j * theta)))
    assert ring.max() < float(distkit.pgf(d, r1))
