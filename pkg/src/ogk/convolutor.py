"""Convolutors, the representation algebra ``sum g_i * f_i-check`` and the pairing ``phi_T``.

On a finite groupoid every convolutor ``T`` is left convolution by ``T e``
where ``e`` is the exact identity, and ``phi_T(h)(u) = <T e, h>(u)``.  The
checks here do not use that shortcut: ``phi_T`` is always evaluated from the
terms of a representation, so well-definedness is tested, not assumed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .config import TOL
from .convalg import (
    LinearOperatorOnSections,
    approximate_identity,
    convolve,
    left_conv_matrix,
    operator_norm_estimate,
    probe_rows,
)
from .orlicz import Section, batch_amemiya, fiber_gauge_norms, sup_gauge, sup_gauge_rows


# ---------------------------------------------------------------------------
# representations


@dataclass(frozen=True, eq=False)
class ARepresentation:
    terms: Tuple[Tuple[Section, Section], ...]  # (g_i, f_i)
    value: Section
    cost: float
    tag: str = "compact support"  # every finite section has compact support

    def recomputed(self, ctx) -> Section:
        return represent_value(self.terms, ctx)

    def consistency(self, ctx) -> float:
        return float(np.max(np.abs(self.recomputed(ctx).values - self.value.values), initial=0.0))


def represent_value(terms, ctx) -> Section:
    g = ctx.groupoid
    out = np.zeros(g.n, dtype=complex if any(np.iscomplexobj(a.values) or np.iscomplexobj(b.values) for a, b in terms) else float)
    for gi, fi in terms:
        out = out + convolve(gi, fi.reflect(), ctx).values
    return Section(g, out)


def term_cost(gi: Section, fi: Section, ctx) -> float:
    return sup_gauge(ctx.phi, fi, ctx.haar) * sup_gauge(ctx.psi, gi, ctx.haar)


def represent(terms, ctx) -> ARepresentation:
    """``h = sum g_i * f_i-check`` with cost ``sum ||f_i||^0_Phi ||g_i||^0_Psi``."""
    terms = tuple((gi, fi) for gi, fi in terms)
    cost = float(sum(term_cost(gi, fi, ctx) for gi, fi in terms))
    return ARepresentation(terms, represent_value(terms, ctx), cost)


def split_representation(rep: ARepresentation, ctx, rng) -> ARepresentation:
    """Same value, different terms: every ``g_i`` is split as ``g_i' + (g_i - g_i')``."""
    terms = []
    for gi, fi in rep.terms:
        part = Section(gi.groupoid, rng.normal(size=gi.values.shape))
        terms += [(part, fi), (gi - part, fi)]
    return represent(terms, ctx)


def null_representations(ctx, rng, e: Optional[Section] = None) -> List[ARepresentation]:
    """Representations whose value is the zero section.

    * ``(g, f), (-g, f)``
    * ``(g1, f), (g2, f), (-(g1 + g2), f)``
    * ``(g, f), (-(g * f-check), e)``: nontrivial, relies on ``e`` being the identity.
    """
    grp = ctx.groupoid
    if e is None:
        e, _ = approximate_identity(ctx)
    rs = lambda: Section(grp, rng.normal(size=grp.n))  # noqa: E731
    g, f, g1, g2 = rs(), rs(), rs(), rs()
    h = convolve(g, f.reflect(), ctx)
    return [
        represent([(g, f), (-g, f)], ctx),
        represent([(g1, f), (g2, f), (-(g1 + g2), f)], ctx),
        represent([(g, f), (-h, e)], ctx),
    ]


# ---------------------------------------------------------------------------
# convolutors


@dataclass(frozen=True, eq=False)
class ConvolutorCandidate:
    operator: LinearOperatorOnSections
    norm_estimate: float
    probes: Optional[np.ndarray] = None

    @property
    def matrix(self) -> np.ndarray:
        return self.operator.matrix


def candidate(op: LinearOperatorOnSections, ctx, rng=None, trials: int = 200, extra=None) -> ConvolutorCandidate:
    """Attach a sampled lower estimate of ``||T||`` on the gauge sup-norm.

    ``extra`` rows are added to the probe set; the sandwich check puts every
    ``f_i`` it uses there so that its upper bound is rigorous.
    """
    rng = rng or np.random.default_rng(0)
    if op.matrix is None:
        op = LinearOperatorOnSections.from_matrix(op.rows(np.eye(ctx.groupoid.n)).T, op.name)
    probes = probe_rows(ctx.groupoid, rng, trials)
    if extra is not None and len(extra):
        probes = np.vstack([probes, np.atleast_2d(extra)])
    est = operator_norm_estimate(op, ctx, probes)
    return ConvolutorCandidate(op, est.value, probes)


def left_convolution_operator(k: Section, ctx) -> LinearOperatorOnSections:
    return LinearOperatorOnSections.from_matrix(left_conv_matrix(k, ctx), "L_h")


def identity_operator(ctx) -> LinearOperatorOnSections:
    return LinearOperatorOnSections.from_matrix(np.eye(ctx.groupoid.n), "identity")


def zero_operator(ctx) -> LinearOperatorOnSections:
    n = ctx.groupoid.n
    return LinearOperatorOnSections.from_matrix(np.zeros((n, n)), "zero")


def range_multiplier(b: np.ndarray, ctx) -> LinearOperatorOnSections:
    """``f -> b(r(x)) f(x)``; a convolutor since it commutes with right convolution."""
    grp = ctx.groupoid
    return LinearOperatorOnSections.from_matrix(np.diag(np.asarray(b)[grp.unit_of]), "mult_r")


def domain_multiplier(b: np.ndarray, ctx) -> LinearOperatorOnSections:
    """``f -> b(d(x)) f(x)``; not a convolutor unless ``b`` is constant on orbits."""
    grp = ctx.groupoid
    dom = grp.unit_of[grp.d]
    return LinearOperatorOnSections.from_matrix(np.diag(np.asarray(b)[dom]), "mult_d")


@dataclass
class ConvolutorReport:
    deviation: float  # sup-gauge norm of T(f*g) - Tf*g, worst case
    witness: Optional[tuple]
    pairs: int
    tolerance: float

    @property
    def is_convolutor(self) -> bool:
        return self.deviation <= self.tolerance


def is_convolutor(T: ConvolutorCandidate, ctx, trials: int = 50, rng=None,
                  tol: float = TOL.projection, exhaustive_limit: int = 64) -> ConvolutorReport:
    """Worst ``||T(f*g) - Tf*g||^0_Phi`` over delta pairs and random pairs."""
    grp = ctx.groupoid
    rng = rng or np.random.default_rng(0)
    M = T.matrix
    worst, witness, pairs = 0.0, None, 0
    if grp.n <= exhaustive_limit:
        eye = np.eye(grp.n)
        # column b of D_a is T(delta_a * delta_b) - T(delta_a) * delta_b
        D = np.vstack([(M @ left_conv_matrix(eye[a], ctx) - left_conv_matrix(M @ eye[a], ctx)).T for a in range(grp.n)])
        dev = sup_gauge_rows(ctx.phi, D, ctx.haar, grp)
        i = int(np.argmax(dev))
        pairs += grp.n * grp.n
        if dev[i] > worst:
            worst, witness = float(dev[i]), (grp.label(i // grp.n), grp.label(i % grp.n))
    for _ in range(trials):
        f, g = rng.normal(size=grp.n), rng.normal(size=grp.n)
        lhs = M @ convolve(f, g, ctx).values
        rhs = convolve(M @ f, g, ctx).values
        dev = sup_gauge(ctx.phi, Section(grp, lhs - rhs), ctx.haar)
        pairs += 1
        if dev > worst:
            worst, witness = dev, ("random", "random")
    return ConvolutorReport(worst, witness if worst > tol else None, pairs, tol)


def find_non_convolutor_witness(ctx, rng=None, tries: int = 20) -> Optional[tuple]:
    """Search random non-constant ``b`` for a domain multiplier that fails the convolutor relation."""
    rng = rng or np.random.default_rng(0)
    nu = len(ctx.groupoid.units)
    for _ in range(tries):
        b = rng.normal(size=nu)
        rep = is_convolutor(candidate(domain_multiplier(b, ctx), ctx, rng, trials=0), ctx, trials=0)
        if not rep.is_convolutor:
            return b, rep
    return None


# ---------------------------------------------------------------------------
# pairing and phi_T


def pairing(xi: Section, eta: Section, ctx) -> np.ndarray:
    """``<xi, eta>(u) = sum_{G^u} xi eta lambda^u`` as an array over units."""
    grp = ctx.groupoid
    if xi.values.shape != eta.values.shape:
        raise ValueError("shape mismatch")
    prod = xi.values * eta.values * ctx.haar.weights
    nu = len(grp.units)
    if np.iscomplexobj(prod):
        return np.bincount(grp.unit_of, prod.real, nu) + 1j * np.bincount(grp.unit_of, prod.imag, nu)
    return np.bincount(grp.unit_of, prod, nu)


def pairing_bound_slack(xi: Section, eta: Section, ctx) -> float:
    """``min_u 2 ||xi^u||^0_Phi ||eta^u||^0_Psi - |<xi, eta>(u)|``."""
    p = np.abs(pairing(xi, eta, ctx))
    a = fiber_gauge_norms(ctx.phi, xi, ctx.haar)
    b = fiber_gauge_norms(ctx.psi, eta, ctx.haar)
    return float(np.min(2 * a * b - p))


def phi_T(T, rep: ARepresentation, ctx) -> np.ndarray:
    """``sum_i <T f_i, g_i>`` as an array over units."""
    op = T.operator if isinstance(T, ConvolutorCandidate) else T
    grp = ctx.groupoid
    out = np.zeros(len(grp.units), dtype=complex if np.iscomplexobj(rep.value.values) else float)
    for gi, fi in rep.terms:
        out = out + pairing(op(fi), gi, ctx)
    return out


# ---------------------------------------------------------------------------
# sandwich


def dual_direction(xi: Section, ctx) -> Section:
    """A section ``g`` with ``||g^u||^0_Psi = 1`` nearly maximising ``<xi, g>(u)`` on every fiber.

    Uses the Amemiya minimiser ``k``: ``g = conj(sign xi) Phi'(k |xi|)``,
    then rescales each fiber onto the unit sphere of the ``Psi`` gauge norm.
    """
    grp, h = ctx.groupoid, ctx.haar
    a = np.abs(xi.values)
    nu = len(grp.units)
    _, kstar = batch_amemiya(ctx.phi, a, h.weights, grp.unit_of, nu)
    k = np.nan_to_num(kstar, nan=0.0)[grp.unit_of]
    sgn = np.where(a > 0, np.conj(xi.values) / np.where(a > 0, a, 1.0), 0.0)
    if not np.iscomplexobj(xi.values):
        sgn = sgn.real
    g = Section(grp, sgn * ctx.phi.right_derivative(k * a))
    nrm = fiber_gauge_norms(ctx.psi, g, h)
    scale = np.where(nrm > 0, 1.0 / np.where(nrm > 0, nrm, 1.0), 0.0)
    return g.scale_units(scale)


@dataclass
class SandwichReport:
    norm_estimate: float
    upper_slacks: np.ndarray  # 2 ||T|| cost - ||phi_T(h)||_inf per representation
    lower_best: float  # best ||phi_T(h)||_inf found with cost <= 1
    lower_gap: float  # norm_estimate - lower_best (<= 0 means witnessed)
    extra: dict = field(default_factory=dict)

    @property
    def min_upper_slack(self) -> float:
        return float(np.min(self.upper_slacks)) if len(self.upper_slacks) else float("inf")


def norm_sandwich_check(T: ConvolutorCandidate, ctx, reps: List[ARepresentation], rng=None,
                        lower_trials: int = 50) -> SandwichReport:
    """Check ``||phi_T(h)|| <= 2 ||T|| cost(h)`` and look for ``||phi_T(h)|| >= ||T||`` with cost 1.

    The norm estimate is a lower bound, so the upper inequality is only
    rigorous when every ``f_i`` used is among the probes; this function
    re-estimates ``||T||`` with all of them added.
    """
    rng = rng or np.random.default_rng(0)
    fs = [fi.values for r in reps for _, fi in r.terms]
    probes = T.probes if T.probes is not None else probe_rows(ctx.groupoid, rng, lower_trials)
    if fs:
        probes = np.vstack([probes, np.array(fs)])
    est = operator_norm_estimate(T.operator, ctx, probes)
    T = ConvolutorCandidate(T.operator, est.value, probes)
    norm = T.norm_estimate
    upper = np.array([2 * norm * r.cost - float(np.max(np.abs(phi_T(T, r, ctx)), initial=0.0)) for r in reps])
    # lower side: single-term reps g * f-check with unit-cost normalisation
    best = 0.0
    # the probe attaining the estimate is always tried: pairing T f against its
    # dual direction gives the Orlicz norm of T f, which dominates the gauge norm
    search = np.vstack([T.probes[est.argmax : est.argmax + 1], T.probes[: ctx.groupoid.n + lower_trials]])
    for row in search:
        nf = sup_gauge(ctx.phi, Section(ctx.groupoid, row), ctx.haar)
        if nf == 0:
            continue
        f = Section(ctx.groupoid, row / nf)
        g = dual_direction(T.operator(f), ctx)
        if not np.any(g.values):
            continue
        rep = represent([(g, f)], ctx)
        val = float(np.max(np.abs(phi_T(T, rep, ctx)))) / max(rep.cost, 1e-300) if rep.cost > 0 else 0.0
        best = max(best, val)
    return SandwichReport(norm, upper, best, norm - best, {"probes": len(T.probes)})


# ---------------------------------------------------------------------------
# module actions


def module_actions(b: np.ndarray, rep: ARepresentation, ctx) -> tuple:
    """Representations of ``bh`` and ``hb``.

    ``(bh)(x) = b(d(x)) h(x)`` is ``sum g_i * (f_i b)-check`` and
    ``(hb)(x) = h(x) b(r(x))`` is ``sum (g_i b) * f_i-check`` where
    ``(f b)(x) = b(r(x)) f(x)``.
    """
    b = np.asarray(b)
    bh = represent([(gi, fi.scale_units(b)) for gi, fi in rep.terms], ctx)
    hb = represent([(gi.scale_units(b), fi) for gi, fi in rep.terms], ctx)
    return bh, hb


def module_action_deviation(b: np.ndarray, rep: ARepresentation, ctx) -> dict:
    """Pointwise deviations from direct multiplication and cost slacks."""
    grp = ctx.groupoid
    b = np.asarray(b)
    bh, hb = module_actions(b, rep, ctx)
    dom = grp.unit_of[grp.d]
    direct_bh = b[dom] * rep.value.values
    direct_hb = rep.value.values * b[grp.unit_of]
    bound = float(np.max(np.abs(b), initial=0.0)) * rep.cost
    return {
        "bh": float(np.max(np.abs(bh.value.values - direct_bh), initial=0.0)),
        "hb": float(np.max(np.abs(hb.value.values - direct_hb), initial=0.0)),
        "bh_cost_slack": bound - bh.cost,
        "hb_cost_slack": bound - hb.cost,
        "representations": (bh, hb),
    }


def right_module_deviation(T, b: np.ndarray, rep: ARepresentation, ctx) -> float:
    """``max_u |phi_T(hb)(u) - phi_T(h)(u) b(u)|``."""
    _, hb = module_actions(b, rep, ctx)
    return float(np.max(np.abs(phi_T(T, hb, ctx) - phi_T(T, rep, ctx) * np.asarray(b)), initial=0.0))


# ---------------------------------------------------------------------------
# truncation by the identity


@dataclass
class TruncationReport:
    deviation: float  # sup over probes of ||T(e*f) - Tf||^0
    norm_T: float
    norm_T1: float

    @property
    def slack(self) -> float:
        return 2 * self.norm_T - self.norm_T1


def truncation_check(T: ConvolutorCandidate, ctx, rng=None, trials: int = 50) -> TruncationReport:
    """``T_1 f = T(e * f)`` with the exact identity ``e``; ``T_1 = T`` at finite scale."""
    rng = rng or np.random.default_rng(0)
    e, _ = approximate_identity(ctx)
    E = left_conv_matrix(e, ctx)
    T1 = LinearOperatorOnSections.from_matrix(T.matrix @ E, "T_1")
    probes = probe_rows(ctx.groupoid, rng, trials)
    dev = sup_gauge_rows(ctx.phi, probes @ (T1.matrix - T.matrix).T, ctx.haar, ctx.groupoid)
    n0 = operator_norm_estimate(T.operator, ctx, probes).value
    n1 = operator_norm_estimate(T1, ctx, probes).value
    return TruncationReport(float(np.max(dev, initial=0.0)), n0, n1)
