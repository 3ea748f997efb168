import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ogk import convalg as ca
from ogk import convolutor as cv
from ogk import groupoid as gm
from ogk import young as yg
from ogk.orlicz import Section, fiber_gauge_norms, fiber_orlicz_norms


def ctx_for(gid, pid="power:2", density=False):
    g = gm.from_id(gid)
    h = gm.haar_from_density(g, 1.0 + 0.5 * np.arange(len(g.units))) if density else gm.counting_haar(g)
    return ca.make_context(g, h, yg.from_id(pid))


def rand_section(g, rng, complex_=False):
    v = rng.normal(size=g.n)
    return Section(g, v + 1j * rng.normal(size=g.n) if complex_ else v)


def rand_rep(ctx, rng, k=2):
    g = ctx.groupoid
    return cv.represent([(rand_section(g, rng), rand_section(g, rng)) for _ in range(k)], ctx)


# convolutor relation


@pytest.mark.parametrize("gid", ["pair:2", "pair:3", "bundle:S3", "transform:Z2on3"])
def test_left_convolutions_are_convolutors(gid):
    ctx = ctx_for(gid, density=True)
    rng = np.random.default_rng(0)
    L = cv.candidate(cv.left_convolution_operator(rand_section(ctx.groupoid, rng), ctx), ctx, rng, trials=10)
    r = cv.is_convolutor(L, ctx, trials=10, rng=rng)
    assert r.is_convolutor and r.deviation <= 1e-10 and r.witness is None


def test_identity_and_range_multiplier_are_convolutors():
    ctx = ctx_for("pair:3")
    rng = np.random.default_rng(1)
    for op in (cv.identity_operator(ctx), cv.range_multiplier(rng.normal(size=3), ctx)):
        assert cv.is_convolutor(cv.candidate(op, ctx, rng, trials=5), ctx, trials=5).is_convolutor


def test_domain_multiplier_on_pair_groupoid_is_not():
    ctx = ctx_for("pair:2")
    w = cv.find_non_convolutor_witness(ctx, np.random.default_rng(2))
    assert w is not None
    b, rep = w
    assert not rep.is_convolutor and rep.witness is not None
    # a direct oracle confirms the failure: T(f*g) != Tf*g for some delta pair
    T = cv.domain_multiplier(b, ctx).matrix
    eye = np.eye(4)
    devs = [np.abs(T @ ca.convolve(eye[x], eye[y], ctx).values - ca.convolve(T @ eye[x], eye[y], ctx).values).max()
            for x in range(4) for y in range(4)]
    assert max(devs) > 1e-6


# pairing


def test_pairing_of_fiber_indicators_is_fiber_size():
    ctx = ctx_for("bundle:Z2,Z3")
    one = Section(ctx.groupoid, np.ones(5))
    assert cv.pairing(one, one, ctx).tolist() == [2.0, 3.0]
    assert not np.any(cv.pairing(one, Section.zeros(ctx.groupoid), ctx))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["pair:3", "bundle:Z2,Z3", "transform:S3"]), st.sampled_from(["power:1.5", "npower:3"]),
       st.integers(0, 2**32 - 1))
def test_pairing_bound(gid, pid, seed):
    ctx = ctx_for(gid, pid, density=True)
    rng = np.random.default_rng(seed)
    a, b = rand_section(ctx.groupoid, rng, True), rand_section(ctx.groupoid, rng)
    scale = np.abs(a.values).max() * np.abs(b.values).max() * ctx.groupoid.n
    assert cv.pairing_bound_slack(a, b, ctx) >= -1e-9 * scale


# representations and phi_T


def test_representation_consistency_and_cost():
    ctx = ctx_for("pair:3", "npower:3")
    rep = rand_rep(ctx, np.random.default_rng(3), 3)
    assert rep.consistency(ctx) == 0.0
    assert rep.cost > 0
    naive = sum(ca.convolve(gi, fi.reflect(), ctx).values for gi, fi in rep.terms)
    assert np.allclose(rep.value.values, naive, atol=1e-13)


def test_identity_functional_is_the_pairing():
    ctx = ctx_for("transform:Z2on3", density=True)
    rng = np.random.default_rng(4)
    g, f = rand_section(ctx.groupoid, rng), rand_section(ctx.groupoid, rng)
    rep = cv.represent([(g, f)], ctx)
    assert np.allclose(cv.phi_T(cv.identity_operator(ctx), rep, ctx), cv.pairing(f, g, ctx), atol=1e-13)


@pytest.mark.parametrize("gid", ["pair:2", "bundle:S3", "transform:Z2on3"])
def test_null_representations_have_zero_value(gid):
    ctx = ctx_for(gid, density=True)
    rng = np.random.default_rng(5)
    T = cv.candidate(cv.left_convolution_operator(rand_section(ctx.groupoid, rng), ctx), ctx, rng, trials=5)
    for n in cv.null_representations(ctx, rng):
        assert np.abs(n.value.values).max() <= 1e-12 * max(1.0, n.cost)
        assert np.abs(cv.phi_T(T, n, ctx)).max() <= 1e-9 * max(1.0, n.cost)


def test_split_representation_is_well_defined():
    ctx = ctx_for("pair:3", "npower:3")
    rng = np.random.default_rng(6)
    T = cv.candidate(cv.left_convolution_operator(rand_section(ctx.groupoid, rng), ctx), ctx, rng, trials=5)
    for _ in range(5):
        rep = rand_rep(ctx, rng)
        other = cv.split_representation(rep, ctx, rng)
        assert np.allclose(other.value.values, rep.value.values, atol=1e-12)
        assert np.abs(cv.phi_T(T, rep, ctx) - cv.phi_T(T, other, ctx)).max() <= 1e-9 * max(1.0, rep.cost)


def test_functional_of_left_convolution():
    ctx = ctx_for("bundle:S3")
    rng = np.random.default_rng(7)
    k = rand_section(ctx.groupoid, rng)
    T = cv.left_convolution_operator(k, ctx)
    rep = rand_rep(ctx, rng)
    assert np.allclose(cv.phi_T(T, rep, ctx), cv.pairing(k, rep.value, ctx), atol=1e-10)


# sandwich


@pytest.mark.parametrize("pid", ["power:2", "npower:3"])
def test_sandwich_for_random_left_convolution(pid):
    ctx = ctx_for("pair:3", pid, density=True)
    rng = np.random.default_rng(8)
    T = cv.candidate(cv.left_convolution_operator(rand_section(ctx.groupoid, rng), ctx), ctx, rng, trials=50)
    reps = [rand_rep(ctx, rng, int(rng.integers(1, 4))) for _ in range(30)]
    sw = cv.norm_sandwich_check(T, ctx, reps, rng)
    costs = np.array([r.cost for r in reps])
    assert np.all(sw.upper_slacks >= -1e-9 * 2 * sw.norm_estimate * costs)
    assert sw.lower_gap <= 1e-6 * sw.norm_estimate


def test_lower_sandwich_for_identity_on_z2():
    ctx = ctx_for("bundle:Z2")
    rng = np.random.default_rng(9)
    T = cv.candidate(cv.identity_operator(ctx), ctx, rng, trials=20)
    sw = cv.norm_sandwich_check(T, ctx, [rand_rep(ctx, rng) for _ in range(5)], rng)
    assert sw.norm_estimate == pytest.approx(1.0, abs=1e-12)
    assert sw.lower_best >= 1.0 - 1e-6


def test_zero_operator_sandwich():
    ctx = ctx_for("pair:2")
    rng = np.random.default_rng(10)
    T = cv.candidate(cv.zero_operator(ctx), ctx, rng, trials=5)
    sw = cv.norm_sandwich_check(T, ctx, [rand_rep(ctx, rng) for _ in range(5)], rng)
    assert sw.norm_estimate == 0.0
    assert sw.min_upper_slack >= 0.0


def test_dual_direction_is_normalised_and_nearly_extremal():
    ctx = ctx_for("bundle:Z2,Z3", "npower:3")
    rng = np.random.default_rng(11)
    xi = rand_section(ctx.groupoid, rng, True)
    g = cv.dual_direction(xi, ctx)
    assert np.allclose(fiber_gauge_norms(ctx.psi, g, ctx.haar), 1.0, rtol=1e-10)
    got = np.abs(cv.pairing(xi, g, ctx))
    assert np.allclose(got, fiber_orlicz_norms(ctx.phi, xi, ctx.haar), rtol=1e-6)


# module actions


def test_module_actions_with_constant_one():
    ctx = ctx_for("pair:3")
    rep = rand_rep(ctx, np.random.default_rng(12))
    bh, hb = cv.module_actions(np.ones(3), rep, ctx)
    assert np.allclose(bh.value.values, rep.value.values, atol=1e-13)
    assert np.allclose(hb.value.values, rep.value.values, atol=1e-13)


def test_module_action_with_unit_indicator():
    ctx = ctx_for("pair:3")
    g = ctx.groupoid
    rep = rand_rep(ctx, np.random.default_rng(13))
    b = np.array([0.0, 1.0, 0.0])
    _, hb = cv.module_actions(b, rep, ctx)
    off = g.unit_of != 1
    assert np.all(np.abs(hb.value.values[off]) <= 1e-13)
    assert np.allclose(hb.value.values[~off], rep.value.values[~off], atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["pair:3", "transform:S3", "union:pair:2+bundle:Z3"]), st.integers(0, 2**32 - 1))
def test_module_actions_pointwise_and_cost(gid, seed):
    ctx = ctx_for(gid, density=True)
    rng = np.random.default_rng(seed)
    rep = rand_rep(ctx, rng)
    b = rng.normal(size=len(ctx.groupoid.units))
    d = cv.module_action_deviation(b, rep, ctx)
    scale = max(1.0, np.abs(rep.value.values).max() * np.abs(b).max())
    assert d["bh"] <= 1e-12 * scale and d["hb"] <= 1e-12 * scale
    tol = 1e-9 * max(1.0, rep.cost * np.abs(b).max())
    assert d["bh_cost_slack"] >= -tol and d["hb_cost_slack"] >= -tol
    T = cv.left_convolution_operator(rand_section(ctx.groupoid, rng), ctx)
    assert cv.right_module_deviation(T, b, rep, ctx) <= 1e-12 * max(1.0, rep.cost * np.abs(b).max())


def test_truncation_is_exact_on_finite_groupoids():
    ctx = ctx_for("transform:S3", density=True)
    rng = np.random.default_rng(14)
    T = cv.candidate(cv.left_convolution_operator(rand_section(ctx.groupoid, rng), ctx), ctx, rng, trials=20)
    tr = cv.truncation_check(T, ctx, rng, trials=20)
    assert tr.deviation <= 1e-12
    assert tr.slack >= 0
    Z = cv.candidate(cv.zero_operator(ctx), ctx, rng, trials=5)
    z = cv.truncation_check(Z, ctx, rng, trials=5)
    assert z.deviation == 0.0 and z.norm_T == 0.0 and z.norm_T1 == 0.0
