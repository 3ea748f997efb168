import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ogk import convalg as ca
from ogk import groupoid as gm
from ogk import orlicz as oz
from ogk import young as yg
from ogk.errors import DivergentRatio, FiberMismatch, NotDelta2, NotGroupBundle
from ogk.orlicz import FiberFunction, Section


def naive_convolve(f, k, g, h):
    """Direct oracle: (f*k)(x) = sum over y in G^{r(x)} of f(y) k(y^-1 x) lambda(y)."""
    out = np.zeros(g.n, dtype=complex)
    for x in range(g.n):
        for y in g.fiber(int(g.r[x])):
            out[x] += f[y] * k[g.product[(int(g.inv[y]), x)]] * h.weights[y]
    return out


def ctx_for(gid, pid="power:2", density=False):
    g = gm.from_id(gid)
    h = gm.haar_from_density(g, 1.0 + 0.5 * np.arange(len(g.units))) if density else gm.counting_haar(g)
    return ca.make_context(g, h, yg.from_id(pid))


# convolution


def test_pair_two_anchor():
    g = gm.pair_groupoid(2)
    got = ca.convolve(np.array([1.0, 2, 3, 4]), np.array([0.0, 1, 1, 0]), gm.counting_haar(g))
    assert got.values.tolist() == [2.0, 1.0, 4.0, 3.0]


def test_z2_group_algebra():
    g = gm.from_id("bundle:Z2")
    got = ca.convolve(np.array([1.0, 2.0]), np.array([3.0, 5.0]), gm.counting_haar(g)).values
    assert got.tolist() == [13.0, 11.0]


@pytest.mark.parametrize("n", range(1, 7))
def test_pair_convolution_is_matrix_product_on_deltas(n):
    g = gm.pair_groupoid(n)
    h = gm.counting_haar(g)
    eye = np.eye(g.n)
    for x in range(g.n):
        for y in range(g.n):
            got = ca.convolve(eye[x], eye[y], h).values.reshape(n, n)
            assert np.array_equal(got, eye[x].reshape(n, n) @ eye[y].reshape(n, n))


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_pair_convolution_random_matrices(n, seed):
    rng = np.random.default_rng(seed)
    A, B = rng.normal(size=(n, n)), rng.normal(size=(n, n))
    g = gm.pair_groupoid(n)
    got = ca.pair_matrix(ca.convolve(A.ravel(), B.ravel(), gm.counting_haar(g)), n)
    assert np.allclose(got, A @ B, rtol=0, atol=1e-12 * n * max(1.0, np.abs(A).max() * np.abs(B).max()))


@pytest.mark.parametrize("gid", gm.ZOO_IDS)
def test_convolution_matches_naive_oracle(gid):
    g = gm.from_id(gid)
    h = gm.haar_from_density(g, 1.0 + 0.5 * np.arange(len(g.units)))
    rng = np.random.default_rng(0)
    f = rng.normal(size=g.n) + 1j * rng.normal(size=g.n)
    k = rng.normal(size=g.n)
    assert np.allclose(ca.convolve(f, k, h).values, naive_convolve(f, k, g, h), atol=1e-12)


@pytest.mark.parametrize("gid", ["pair:3", "transform:S3", "union:pair:2+bundle:Z3"])
def test_convolution_is_associative(gid):
    g = gm.from_id(gid)
    h = gm.counting_haar(g)
    rng = np.random.default_rng(1)
    a, b, c = (rng.normal(size=g.n) for _ in range(3))
    lhs = ca.convolve(ca.convolve(a, b, h), c, h).values
    rhs = ca.convolve(a, ca.convolve(b, c, h), h).values
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_convolve_rows_and_matrices_agree_with_convolve():
    ctx = ctx_for("transform:Z2on3", density=True)
    g = ctx.groupoid
    rng = np.random.default_rng(2)
    F, G = rng.normal(size=(4, g.n)), rng.normal(size=(4, g.n))
    rows = ca.convolve_rows(F, G, ctx)
    for i in range(4):
        ref = ca.convolve(F[i], G[i], ctx).values
        assert np.allclose(rows[i], ref, atol=1e-13)
        assert np.allclose(ca.left_conv_matrix(F[i], ctx) @ G[i], ref, atol=1e-13)
        assert np.allclose(ca.right_conv_matrix(G[i], ctx) @ F[i], ref, atol=1e-13)


# left regular representation


def test_left_translate_pair_groupoid():
    ctx = ctx_for("pair:2")
    # x = (1,2): from the row over unit (2,2) to the row over unit (1,1)
    lf = ca.left_translate(1, FiberFunction(3, np.array([5.0, 7.0])), ctx)
    assert lf.unit == 0
    assert lf.values.tolist() == [5.0, 7.0]
    with pytest.raises(FiberMismatch):
        ca.left_translate(1, FiberFunction(0, np.array([5.0, 7.0])), ctx)


@pytest.mark.parametrize("gid", gm.ZOO_IDS)
@pytest.mark.parametrize("pid", ["power:1.5", "xlogx", "cosh"])
def test_left_translation_is_isometric(gid, pid):
    g = gm.from_id(gid)
    h = gm.haar_from_density(g, 1.0 + 0.5 * (np.arange(len(g.units)) % 3))
    ctx = ca.ConvolutionContext(g, h, yg.from_id(pid), yg.power(2))
    rng = np.random.default_rng(4)
    for x in range(g.n):
        f = FiberFunction(int(g.d[x]), rng.normal(size=g.fiber(int(g.d[x])).size))
        assert ca.isometry_deviation(x, f, ctx) <= 1e-12


def test_translation_covariance():
    ctx = ctx_for("transform:S3", density=True)
    g = ctx.groupoid
    rng = np.random.default_rng(6)
    f, k = Section(g, rng.normal(size=g.n)), Section(g, rng.normal(size=g.n))
    assert max(ca.translation_covariance_deviation(z, f, k, ctx) for z in range(g.n)) <= 1e-12


# bounds


@pytest.mark.parametrize("gid", ["pair:3", "bundle:Z2,Z3", "transform:S3"])
@pytest.mark.parametrize("pid", ["power:1.5", "npower:3", "xlogx"])
def test_banach_algebra_bound(gid, pid):
    ctx = ctx_for(gid, pid, density=True)
    g = ctx.groupoid
    rng = np.random.default_rng(7)
    for _ in range(20):
        f, k = oz.random_section(g, rng, True), oz.random_section(g, rng)
        r = ca.banach_algebra_bound_check(f, k, ctx)
        assert r.slack >= -1e-9 * r.bound
        assert r.extra["rescaled_slack"] >= -1e-9 * max(1.0, r.bound)


def test_banach_bound_zero_boundary():
    ctx = ctx_for("pair:2")
    z = Section.zeros(ctx.groupoid)
    assert ca.banach_algebra_bound_check(z, z, ctx).slack == 0.0


def test_banach_rows_match_single_checks():
    ctx = ctx_for("bundle:Z2,Z3", "npower:3")
    rng = np.random.default_rng(8)
    F, G = rng.normal(size=(5, 5)), rng.normal(size=(5, 5))
    rows = ca.banach_algebra_bound_rows(F, G, ctx)
    single = [ca.banach_algebra_bound_check(Section(ctx.groupoid, a), Section(ctx.groupoid, b), ctx).slack
              for a, b in zip(F, G)]
    assert np.allclose(rows["slack"], single, rtol=1e-12)


def test_commutativity_on_abelian_bundle():
    ctx = ctx_for("bundle:Z2,Z3")
    rng = np.random.default_rng(9)
    f, k = oz.random_section(ctx.groupoid, rng), oz.random_section(ctx.groupoid, rng)
    assert ca.commutativity_check(f, k, ctx) <= 1e-12


def test_commutativity_precondition():
    ctx = ctx_for("pair:2")
    z = Section.zeros(ctx.groupoid)
    with pytest.raises(NotGroupBundle):
        ca.commutativity_check(z, z, ctx)


def test_s3_has_noncommuting_pair():
    ctx = ctx_for("bundle:S3")
    w = ca.noncommuting_witness(ctx)
    assert w is not None
    x, y, dev = w
    eye = np.eye(6)
    assert not np.allclose(ca.convolve(eye[x], eye[y], ctx).values, ca.convolve(eye[y], eye[x], ctx).values)


def test_left_convolver_by_unit_indicator_is_identity():
    ctx = ctx_for("pair:3")
    g = ctx.groupoid
    e = np.zeros(g.n)
    e[list(g.units)] = 1.0
    r = ca.left_convolver_norm_check(Section(g, e), ctx, trials=50)
    assert r.bound == 1.0
    assert r.estimate == pytest.approx(1.0, abs=1e-12)
    assert r.slack >= -1e-12


def test_left_convolver_zero():
    ctx = ctx_for("pair:2")
    r = ca.left_convolver_norm_check(Section.zeros(ctx.groupoid), ctx, trials=10)
    assert r.bound == 0.0 and r.slack == 0.0


@pytest.mark.parametrize("pid", ["power:1.5", "npower:3", "xlogx"])
def test_left_convolver_bound_random(pid):
    ctx = ctx_for("transform:S3", pid, density=True)
    rng = np.random.default_rng(10)
    for _ in range(3):
        r = ca.left_convolver_norm_check(oz.random_section(ctx.groupoid, rng, True), ctx, trials=200, rng=rng)
        assert r.slack >= -1e-9 * r.bound


def test_k_constant_anchor_and_right_convolver_bound():
    ctx = ctx_for("bundle:Z2,Z3", "npower:2")
    g = ctx.groupoid
    e = np.zeros(g.n)
    e[list(g.units)] = 1.0
    K, tilde = ca.k_constant(Section(g, e), ctx)
    assert K == pytest.approx(np.sqrt(2.0), rel=1e-9)
    r = ca.right_convolver_bound_check(Section(g, e), ctx, trials=100)
    assert r.bound == pytest.approx(4.0, rel=1e-9)
    assert r.estimate == pytest.approx(1.0, abs=1e-12)
    assert r.slack == pytest.approx(3.0, rel=1e-9)
    assert r.extra["tilde_convex"]


def test_right_convolver_of_zero():
    ctx = ctx_for("pair:2", "power:3")
    r = ca.right_convolver_bound_check(Section.zeros(ctx.groupoid), ctx, trials=10)
    assert r.bound == 0.0 and r.estimate == 0.0 and r.slack == 0.0


@pytest.mark.parametrize("pid", ["power:1.5", "power:3", "npower:3"])
def test_right_convolver_bound_random(pid):
    ctx = ctx_for("pair:3", pid, density=True)
    rng = np.random.default_rng(11)
    for _ in range(3):
        r = ca.right_convolver_bound_check(oz.random_section(ctx.groupoid, rng), ctx, trials=200, rng=rng)
        assert r.slack >= -1e-9 * r.bound


def test_right_convolver_requires_doubling_pair():
    ctx = ctx_for("pair:2", "xlogx")
    with pytest.raises(DivergentRatio):
        ca.right_convolver_bound_check(Section.zeros(ctx.groupoid), ctx, trials=1)


def test_make_context_rejects_non_doubling():
    g = gm.pair_groupoid(2)
    with pytest.raises(NotDelta2):
        ca.make_context(g, gm.counting_haar(g), yg.cosh_minus_one())
    ctx = ca.make_context(g, gm.counting_haar(g), yg.cosh_minus_one(), require_delta2=False)
    assert not ctx.phi_delta2


# identity


@pytest.mark.parametrize("gid", gm.ZOO_IDS)
@pytest.mark.parametrize("density", [False, True])
def test_exact_identity(gid, density):
    ctx = ctx_for(gid, density=density)
    e, rep = ca.approximate_identity(ctx, trials=20)
    assert rep.exact and rep.max_deviation <= 1e-12
    rng = np.random.default_rng(12)
    f = rng.normal(size=ctx.groupoid.n)
    assert np.abs(ca.convolve(f, e, ctx).values - f).max() <= 1e-12
    assert not np.any(ca.convolve(e, np.zeros(ctx.groupoid.n), ctx).values)
