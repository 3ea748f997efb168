import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ogk import young as yg
from ogk.errors import ConfigError, DivergentRatio, UnboundedConjugate


def grid_conjugate(phi, y, lo=0.0, hi=50.0, n=200001):
    """Brute-force oracle: max of x*y - Phi(x) on a dense grid."""
    x = np.linspace(lo, hi, n)
    return float(np.max(x * y - phi(x)))


# conjugates


def test_conjugate_self_dual_half_square():
    assert yg.conjugate(yg.normalized_power(2), 3.0) == pytest.approx(4.5, abs=1e-12)


def test_conjugate_cubic_over_three():
    expect = 2 ** 1.5 * 2 / 3
    assert expect == pytest.approx(1.8856180831641, abs=1e-12)
    assert yg.conjugate(yg.normalized_power(3), 2.0) == pytest.approx(expect, abs=1e-12)
    assert yg.conjugate(yg.normalized_power(3), 2.0, use_closed_form=False) == pytest.approx(expect, rel=1e-10)
    assert grid_conjugate(yg.normalized_power(3), 2.0) == pytest.approx(expect, rel=1e-8)


def test_conjugate_square_quarter():
    phi = yg.power(2)
    assert yg.conjugate(phi, 4.0) == pytest.approx(4.0, abs=1e-12)
    assert yg.conjugate(phi, 4.0, use_closed_form=False) == pytest.approx(4.0, rel=1e-10)
    assert grid_conjugate(phi, 4.0, hi=10.0) == pytest.approx(4.0, rel=1e-8)


def test_conjugate_vectorised_and_even():
    phi = yg.power(3)
    ys = np.array([-2.0, 0.0, 0.5, 2.0])
    out = yg.conjugate(phi, ys)
    assert out.shape == (4,)
    assert out[0] == pytest.approx(out[3])
    assert out[1] == 0.0


def test_conjugate_of_cosh_matches_grid():
    phi = yg.cosh_minus_one()
    for y in (0.3, 1.0, 4.0):
        assert yg.conjugate(phi, y) == pytest.approx(grid_conjugate(phi, y, hi=6.0), rel=1e-7)


def test_numeric_conjugate_of_xlogx_matches_grid():
    phi = yg.xlogx()
    for y in (0.5, 2.0, 5.0):
        assert yg.conjugate(phi, y) == pytest.approx(grid_conjugate(phi, y, hi=200.0, n=400001), rel=1e-6)


def test_linear_function_has_unbounded_conjugate():
    lin = yg.YoungFunction("linear", lambda x: x, lambda x: np.ones_like(x), is_n_function=False)
    assert yg.conjugate(lin, 0.5, use_closed_form=False) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(UnboundedConjugate):
        yg.conjugate(lin, 2.0)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["power:1.5", "power:3", "npower:2", "npower:3", "cosh"]),
       st.floats(0.01, 20.0))
def test_closed_and_numeric_conjugates_agree(pid, y):
    phi = yg.from_id(pid)
    closed = yg.conjugate(phi, y)
    numeric = yg.conjugate(phi, y, use_closed_form=False)
    assert numeric == pytest.approx(closed, rel=1e-9, abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(yg.ZOO_IDS), st.floats(1e-3, 20.0), st.floats(1e-3, 20.0))
def test_fenchel_young(pid, x, y):
    phi = yg.from_id(pid)
    psi = yg.complement(phi)
    assert phi(x) + psi(y) - x * y >= -1e-9 * max(1.0, x * y)


def test_complement_of_complement_is_original():
    phi = yg.power(3)
    back = yg.complement(yg.complement(phi))
    xs = np.linspace(0, 5, 11)
    assert np.allclose(back(xs), phi(xs))
    assert yg.check_complementary(phi, yg.complement(phi))


# doubling


def test_doubling_constant_of_square():
    est = yg.delta2_estimate(yg.power(2))
    assert est.constant == pytest.approx(4.0, abs=1e-12)
    assert not est.divergent


def test_doubling_constant_of_xlogx_below_four():
    est = yg.delta2_estimate(yg.xlogx())
    assert 2.0 <= est.constant <= 4.0
    assert not est.divergent
    xs = np.array([1e2, 1e4, 1e6])
    phi = yg.xlogx()
    ratios = phi(2 * xs) / phi(xs)
    assert np.all(np.diff(ratios) < 0)  # the ratio decreases to its limit 2 from above


def test_cosh_is_flagged_divergent():
    assert yg.delta2_estimate(yg.cosh_minus_one()).divergent


def test_doubling_threshold_ignores_small_arguments():
    est = yg.delta2_estimate(yg.power(2), threshold=10.0)
    assert est.threshold == 10.0
    assert est.constant == pytest.approx(4.0)


# dilation majorant


def test_dilation_majorant_square_pair():
    phi = yg.power(2)
    assert yg.psi_tilde(phi, yg.complement(phi), 3.0) == pytest.approx(9.0, rel=1e-12)


def test_dilation_majorant_cubic_pair():
    phi = yg.power(3)
    assert yg.psi_tilde(phi, yg.complement(phi), 2.0) == pytest.approx(8.0, rel=1e-12)


@pytest.mark.parametrize("pid", ["power:2", "npower:3", "xlogx"])
def test_dilation_majorant_at_one(pid):
    phi = yg.from_id(pid)
    psi = yg.power(2)  # any doubling partner
    assert yg.psi_tilde(phi, psi, 1.0) == pytest.approx(1.0, abs=1e-12)


def test_dilation_majorant_shape_preserved():
    phi = yg.power(2)
    a = np.array([[0.5, 2.0], [3.0, 0.0]])
    out = yg.psi_tilde(phi, yg.complement(phi), a)
    assert out.shape == (2, 2)
    assert out[1, 1] == 0.0


def test_tabulated_majorant_exact_for_power_pairs():
    phi = yg.power(3)
    psi = yg.complement(phi)
    tilde = yg.make_psi_tilde(phi, psi)
    a = np.array([1e-3, 0.3, 1.0, 2.5, 7.0, 1e4])
    expect = np.where(a > 1, a**3, a**1.5)
    assert np.allclose(tilde(a), expect, rtol=1e-12)


def test_majorant_refuses_non_doubling_pair():
    phi = yg.xlogx()
    with pytest.raises(DivergentRatio):
        yg.make_psi_tilde(phi, yg.complement(phi))


# inverse and axioms


def test_inverse_anchors():
    assert yg.inverse(yg.power(2), 9.0) == pytest.approx(3.0, rel=1e-12)
    assert yg.inverse(yg.normalized_power(3), 9.0) == pytest.approx(3.0, rel=1e-12)
    assert yg.inverse(yg.power(2), 0.0) == 0.0


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(yg.ZOO_IDS), st.floats(1e-4, 50.0))
def test_inverse_roundtrip(pid, x):
    phi = yg.from_id(pid)
    assert yg.inverse(phi, phi(x)) == pytest.approx(x, rel=1e-10)


@pytest.mark.parametrize("pid", yg.ZOO_IDS)
def test_zoo_members_are_young_functions(pid):
    phi = yg.from_id(pid)
    assert yg.check_young(phi).ok
    assert yg.check_young(yg.complement(phi)).ok


def test_bad_ids_are_config_errors():
    for bad in ("power:1", "power:x", "nonsense"):
        with pytest.raises(ConfigError):
            yg.from_id(bad)
