"""Convolution on sections, translation operators and operator-norm bounds.

``(f*g)(x) = sum_{y in G^{r(x)}} f(y) g(y^{-1} x) lambda^{r(x)}(y)``.

Operator norms are only ever *estimated from below*: the maximum ratio over
all coordinate deltas plus random samples.  Every bound check compares such
an estimate against a proven upper bound, so a negative slack is a genuine
counterexample, never an artefact of the sampling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .config import TOL, Tolerances
from .errors import DivergentRatio, FiberMismatch, NotDelta2, NotGroupBundle
from .groupoid import FiniteGroupoid, HaarSystem, validate_groupoid, validate_haar
from .orlicz import (
    FiberFunction,
    Section,
    batch_gauge,
    fiber_l1_norms,
    gauge_norm,
    l1_embedding_constant,
    sup_gauge,
    sup_gauge_rows,
    sup_l1,
)
from .young import YoungFunction, complement, delta2_estimate, inverse, make_psi_tilde


@dataclass(frozen=True, eq=False)
class ConvolutionContext:
    groupoid: FiniteGroupoid
    haar: HaarSystem
    phi: YoungFunction
    psi: YoungFunction
    tol: Tolerances = TOL
    phi_delta2: bool = True
    psi_delta2: bool = True
    compact: bool = True  # every finite groupoid is compact
    notes: tuple = ()

    @property
    def g(self) -> FiniteGroupoid:
        return self.groupoid

    @property
    def h(self) -> HaarSystem:
        return self.haar


def make_context(
    g: FiniteGroupoid,
    h: HaarSystem,
    phi: YoungFunction,
    psi: Optional[YoungFunction] = None,
    require_delta2: bool = True,
    x0: float = 0.0,
    tol: Tolerances = TOL,
) -> ConvolutionContext:
    """Validate groupoid and Haar system and record doubling flags.

    ``x0`` is the threshold of the at-infinity doubling condition that the
    compact case permits; the default 0 asks for doubling on the whole grid.
    Raises :class:`NotDelta2` when ``require_delta2`` and ``phi`` fails.
    """
    rep = validate_groupoid(g)
    if not rep.valid:
        raise ValueError(f"invalid groupoid {g.name}: {rep.violations[:3]}")
    hrep = validate_haar(g, h)
    if not hrep.valid:
        raise ValueError(f"invalid Haar system on {g.name}: {hrep.violations[:3]}")
    psi = psi or complement(phi)
    d_phi = not delta2_estimate(phi, threshold=x0).divergent
    d_psi = not delta2_estimate(psi, threshold=x0).divergent
    if require_delta2 and not d_phi:
        raise NotDelta2(f"{phi.name} fails the doubling condition (x0={x0:g})")
    notes = (f"doubling threshold x0={x0:g}",)
    return ConvolutionContext(g, h, phi, psi, tol, d_phi, d_psi, True, notes)


# ---------------------------------------------------------------------------
# convolution


def _values(f) -> np.ndarray:
    return f.values if isinstance(f, Section) else np.asarray(f)


def convolve(f, g, ctx) -> Section:
    """``f * g`` for sections (``ctx`` may be a context or a Haar system with a groupoid)."""
    grp, h = _gh(ctx)
    X, Y, Z = grp.conv_triples
    fv, gv = _values(f), _values(g)
    terms = fv[Y] * gv[Z] * h.weights[Y]
    if np.iscomplexobj(terms):
        out = np.bincount(X, weights=terms.real, minlength=grp.n) + 1j * np.bincount(
            X, weights=terms.imag, minlength=grp.n
        )
    else:
        out = np.bincount(X, weights=terms, minlength=grp.n)
    return Section(grp, out)


def _gh(ctx) -> tuple:
    if isinstance(ctx, ConvolutionContext):
        return ctx.groupoid, ctx.haar
    if isinstance(ctx, HaarSystem) and ctx.groupoid is not None:
        return ctx.groupoid, ctx
    raise TypeError("need a ConvolutionContext or a HaarSystem attached to a groupoid")


def _scatter(grp: FiniteGroupoid) -> np.ndarray:
    X = grp.conv_triples[0]
    S = np.zeros((X.size, grp.n))
    S[np.arange(X.size), X] = 1.0
    return S


def convolve_rows(F: np.ndarray, G: np.ndarray, ctx) -> np.ndarray:
    """Row-wise ``F[t] * G[t]``."""
    grp, h = _gh(ctx)
    X, Y, Z = grp.conv_triples
    F, G = np.atleast_2d(F), np.atleast_2d(G)
    return (F[:, Y] * G[:, Z] * h.weights[Y]) @ _scatter(grp)


def left_conv_matrix(f, ctx) -> np.ndarray:
    """Matrix ``M`` with ``f * g = M @ g``."""
    grp, h = _gh(ctx)
    X, Y, Z = grp.conv_triples
    fv = _values(f)
    M = np.zeros((grp.n, grp.n), dtype=np.result_type(fv, float))
    np.add.at(M, (X, Z), fv[Y] * h.weights[Y])
    return M


def right_conv_matrix(F, ctx) -> np.ndarray:
    """Matrix ``M`` with ``g * F = M @ g``."""
    grp, h = _gh(ctx)
    X, Y, Z = grp.conv_triples
    Fv = _values(F)
    M = np.zeros((grp.n, grp.n), dtype=np.result_type(Fv, float))
    np.add.at(M, (X, Y), Fv[Z] * h.weights[Y])
    return M


def reflect(f: Section) -> Section:
    return f.reflect()


def pair_matrix(f: Section, n: int) -> np.ndarray:
    """View a section on ``pair:n`` as an ``n x n`` matrix ``M[a, b] = f(a, b)``."""
    return np.asarray(f.values).reshape(n, n)


# ---------------------------------------------------------------------------
# left regular representation


def left_translate(x: int, f: FiberFunction, ctx) -> FiberFunction:
    """``(L_x f)(z) = f(x^{-1} z)`` from ``G^{d(x)}`` to ``G^{r(x)}``."""
    grp, _ = _gh(ctx)
    src_unit = int(grp.d[x])
    if f.unit is not None and f.unit != src_unit:
        raise FiberMismatch(f"L_{x} acts on G^{src_unit}, got a function on G^{f.unit}")
    if len(f.values) != grp.fiber(src_unit).size:
        raise FiberMismatch("fiber length mismatch")
    target, source = grp.translation(x)
    vals = np.asarray(f.values)[grp.position[source]]
    return FiberFunction(int(grp.r[x]), vals)


def translation_covariance_deviation(z: int, f: Section, g: Section, ctx) -> float:
    """``max |L_z (f*g)^{d(z)} - (f~ * g)^{r(z)}|`` where ``f~`` carries ``L_z f^{d(z)}`` on ``G^{r(z)}``."""
    grp, _ = _gh(ctx)
    lhs = left_translate(z, convolve(f, g, ctx).fiber(int(grp.d[z])), ctx)
    moved = left_translate(z, f.fiber(int(grp.d[z])), ctx)
    ft = Section.from_fibers(grp, {int(grp.r[z]): moved.values})
    if np.iscomplexobj(f.values) and not np.iscomplexobj(ft.values):
        ft = Section(grp, ft.values.astype(complex))
    rhs = convolve(ft, g, ctx).fiber(int(grp.r[z]))
    return float(np.max(np.abs(lhs.values - rhs.values)))


# ---------------------------------------------------------------------------
# linear operators and norm estimates


@dataclass(frozen=True, eq=False)
class LinearOperatorOnSections:
    action: Callable[[np.ndarray], np.ndarray]  # value vector -> value vector
    name: str
    claimed_bound: Optional[float] = None
    matrix: Optional[np.ndarray] = None

    def __call__(self, f):
        if isinstance(f, Section):
            return Section(f.groupoid, self.action(f.values))
        return self.action(np.asarray(f))

    def rows(self, V: np.ndarray) -> np.ndarray:
        if self.matrix is not None:
            return np.atleast_2d(V) @ self.matrix.T
        return np.array([self.action(v) for v in np.atleast_2d(V)])

    @classmethod
    def from_matrix(cls, M: np.ndarray, name: str, claimed_bound: Optional[float] = None):
        return cls(lambda v: M @ v, name, claimed_bound, M)


def linearity_deviation(op: LinearOperatorOnSections, grp: FiniteGroupoid, rng, trials: int = 5) -> float:
    worst = 0.0
    for _ in range(trials):
        a, b = rng.normal(size=grp.n), rng.normal(size=grp.n)
        s, t = rng.normal(size=2)
        dev = op.action(s * a + t * b) - (s * op.action(a) + t * op.action(b))
        worst = max(worst, float(np.max(np.abs(dev))))
    return worst


def probe_rows(grp: FiniteGroupoid, rng, trials: int, complex_: bool = False) -> np.ndarray:
    """All coordinate deltas followed by ``trials`` random sections (Gaussian and sparse)."""
    rows = [np.eye(grp.n)]
    if trials:
        R = rng.normal(size=(trials, grp.n))
        if complex_:
            R = R + 1j * rng.normal(size=(trials, grp.n))
        mask = rng.random(size=(trials, grp.n)) < 0.5
        R[: trials // 2] *= mask[: trials // 2]
        R[np.all(R == 0, axis=1), 0] = 1.0
        rows.append(R)
    return np.vstack(rows)


@dataclass
class NormEstimate:
    value: float  # max ratio found (a lower bound for the true norm)
    samples: int
    argmax: int


def operator_norm_estimate(op: LinearOperatorOnSections, ctx, probes: np.ndarray,
                           den: Optional[np.ndarray] = None) -> NormEstimate:
    """``max ||T g||^0_Phi / ||g||^0_Phi`` over the probe rows.

    ``den`` may carry the probe norms when the same probes serve many operators.
    """
    grp, h = ctx.groupoid, ctx.haar
    num = sup_gauge_rows(ctx.phi, op.rows(probes), h, grp)
    if den is None:
        den = sup_gauge_rows(ctx.phi, probes, h, grp)
    ratio = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    i = int(np.argmax(ratio))
    return NormEstimate(float(ratio[i]), len(probes), i)


@dataclass
class BoundCheck:
    bound: float
    estimate: float
    slack: float
    extra: dict = field(default_factory=dict)


def left_convolver(f: Section, ctx) -> LinearOperatorOnSections:
    return LinearOperatorOnSections.from_matrix(left_conv_matrix(f, ctx), "L_f", sup_l1(f, ctx.haar))


def right_convolver(F: Section, ctx) -> LinearOperatorOnSections:
    return LinearOperatorOnSections.from_matrix(right_conv_matrix(F, ctx), "R_F")


def left_convolver_norm_check(f: Section, ctx, trials: int = 1000, rng=None) -> BoundCheck:
    """``||f||_1 - estimate(||L_f||)``; nonnegative since ``||L_f|| <= ||f||_1``."""
    rng = rng or np.random.default_rng(0)
    bound = sup_l1(f, ctx.haar)
    est = operator_norm_estimate(left_convolver(f, ctx), ctx, probe_rows(ctx.groupoid, rng, trials))
    return BoundCheck(bound, est.value, bound - est.value, {"samples": est.samples})


def k_constant(F: Section, ctx, grid=None) -> tuple:
    """``K_F`` for the right-convolver bound, with the dilation majorant used.

    ``K_F = max(sup_u ||Phi^{-1} o |F^u| ||^0, sup_u ||Psi^{-1} o |F-check^u| ||^0)``,
    both gauge norms taken with respect to the grid majorant of
    ``Phi(ab)/Phi(b)`` and ``Psi(ab)/Psi(b)``.  Raises :class:`DivergentRatio`
    unless both functions are doubling.
    """
    tilde = make_psi_tilde(ctx.phi, ctx.psi, grid)
    grp, h = ctx.groupoid, ctx.haar
    a1 = inverse(ctx.phi, np.abs(F.values))
    a2 = inverse(ctx.psi, np.abs(F.reflect().values))
    nu = len(grp.units)
    seg = grp.unit_of
    k1 = batch_gauge(tilde, a1, h.weights, seg, nu).max()
    k2 = batch_gauge(tilde, a2, h.weights, seg, nu).max()
    return float(max(k1, k2)), tilde


def tilde_convexity_flag(tilde: YoungFunction, upto: float = 4.0) -> bool:
    """True when the sampled majorant passes a midpoint-convexity check on [0, upto]."""
    xs = np.linspace(0.0, upto, 41)
    a, b = np.meshgrid(xs, xs)
    return bool(np.all(tilde((a + b) / 2) <= (tilde(a) + tilde(b)) / 2 * (1 + 1e-9) + 1e-15))


def right_convolver_bound_check(F: Section, ctx, trials: int = 1000, rng=None, grid=None) -> BoundCheck:
    """``2 K_F^2 - estimate(||R_F||)``."""
    rng = rng or np.random.default_rng(0)
    if not (ctx.phi_delta2 and ctx.psi_delta2):
        raise DivergentRatio(f"pair ({ctx.phi.name}, {ctx.psi.name}) is not doubling on both sides")
    K, tilde = k_constant(F, ctx, grid)
    bound = 2.0 * K * K
    est = operator_norm_estimate(right_convolver(F, ctx), ctx, probe_rows(ctx.groupoid, rng, trials))
    return BoundCheck(
        bound,
        est.value,
        bound - est.value,
        {"K_F": K, "samples": est.samples, "tilde_convex": tilde_convexity_flag(tilde)},
    )


def banach_algebra_bound_check(f: Section, g: Section, ctx, d: Optional[float] = None) -> BoundCheck:
    """``2 ||f||_1 ||g||^0_Phi - ||f*g||^0_Phi`` and the rescaled submultiplicativity slack.

    With ``||.||' = 2 d ||.||^0_Phi`` the second slack is
    ``||f||' ||g||' - ||f*g||'``.
    """
    if d is None:
        d = l1_embedding_constant(ctx.psi, ctx.groupoid, ctx.haar)
    fg = sup_gauge(ctx.phi, convolve(f, g, ctx), ctx.haar)
    nf = sup_gauge(ctx.phi, f, ctx.haar)
    ng = sup_gauge(ctx.phi, g, ctx.haar)
    bound = 2.0 * sup_l1(f, ctx.haar) * ng
    rescaled = (2 * d * nf) * (2 * d * ng) - 2 * d * fg
    return BoundCheck(bound, fg, bound - fg, {"d": d, "rescaled_slack": rescaled})


def banach_algebra_bound_rows(F: np.ndarray, G: np.ndarray, ctx, d: Optional[float] = None) -> dict:
    """Vectorised version of :func:`banach_algebra_bound_check` over row pairs."""
    grp, h = ctx.groupoid, ctx.haar
    if d is None:
        d = l1_embedding_constant(ctx.psi, grp, h)
    FG = convolve_rows(F, G, ctx)
    fg = sup_gauge_rows(ctx.phi, FG, h, grp)
    nf = sup_gauge_rows(ctx.phi, F, h, grp)
    ng = sup_gauge_rows(ctx.phi, G, h, grp)
    l1 = np.array([fiber_l1_norms(Section(grp, row), h).max() for row in np.atleast_2d(F)])
    slack = 2.0 * l1 * ng - fg
    rescaled = (2 * d * nf) * (2 * d * ng) - 2 * d * fg
    return {"slack": slack, "rescaled_slack": rescaled, "scale": np.maximum(2.0 * l1 * ng, 1.0), "d": d}


def commutativity_check(f: Section, g: Section, ctx) -> float:
    """``max |f*g - g*f|``; only meaningful on group bundles."""
    grp = ctx.groupoid if isinstance(ctx, ConvolutionContext) else _gh(ctx)[0]
    if not grp.is_group_bundle:
        raise NotGroupBundle(f"{grp.name} has elements with d(x) != r(x)")
    return float(np.max(np.abs(convolve(f, g, ctx).values - convolve(g, f, ctx).values)))


def noncommuting_witness(ctx) -> Optional[tuple]:
    """Exhaustive search over delta pairs for ``delta_x * delta_y != delta_y * delta_x``."""
    grp, _ = _gh(ctx)
    if not grp.is_group_bundle:
        raise NotGroupBundle(f"{grp.name} is not a group bundle")
    eye = np.eye(grp.n)
    for x in range(grp.n):
        for y in range(x + 1, grp.n):
            dev = commutativity_check(Section(grp, eye[x]), Section(grp, eye[y]), ctx)
            if dev > 0.5:
                return x, y, dev
    return None


# ---------------------------------------------------------------------------
# identity


@dataclass
class IdentityReport:
    max_deviation: float
    l1_norm: float
    exact: bool
    trials: int


def approximate_identity(ctx, rng=None, trials: int = 20) -> tuple:
    """``e = 1/lambda^u({u})`` on units, 0 elsewhere, and a report on ``e*f = f``.

    On a finite discrete groupoid the approximate identity net stabilises at
    its first term; ``e`` is an exact two-sided identity for every Haar system.
    """
    grp, h = _gh(ctx)
    rng = rng or np.random.default_rng(0)
    e = np.zeros(grp.n)
    units = np.array(grp.units)
    e[units] = 1.0 / h.weights[units]
    e = Section(grp, e)
    worst = 0.0
    for f in probe_rows(grp, rng, trials, complex_=True):
        worst = max(worst, float(np.max(np.abs(convolve(e, f, ctx).values - f))))
    l1 = sup_l1(e, h)
    return e, IdentityReport(worst, l1, worst <= TOL.exact, trials + grp.n)


def isometry_deviation(x: int, f: FiberFunction, ctx) -> float:
    """``| ||L_x f||^0 - ||f||^0 |`` relative to ``||f||^0``."""
    grp, h = _gh(ctx)
    lf = left_translate(x, f, ctx)
    a = gauge_norm(ctx.phi, f, h.fiber_weights(int(grp.d[x])))
    b = gauge_norm(ctx.phi, lf, h.fiber_weights(int(grp.r[x])))
    return abs(a - b) / max(a, 1e-300)
