"""Fiberwise Orlicz spaces over a finite groupoid.

Norm algorithms work on *batches*: a flat array of absolute values, matching
Haar weights and a segment id per entry (one segment per fiber).  Everything
public is a thin wrapper around the two batch engines :func:`batch_gauge` and
:func:`batch_amemiya`.

With a finite unit space every section is bounded and vanishes at infinity,
so the section space is simply "one vector per unit".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .config import TOL
from .errors import BoundViolated, NoMinimum, NotProbability
from .groupoid import FiniteGroupoid, HaarSystem
from .young import YoungFunction


@dataclass(frozen=True, eq=False)
class FiberFunction:
    unit: Optional[int]
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class Section:
    """One value per groupoid element; ``fiber(u)`` slices out ``xi^u``."""

    groupoid: FiniteGroupoid
    values: np.ndarray

    def __post_init__(self):
        if np.shape(self.values) != (self.groupoid.n,):
            raise ValueError(f"section needs {self.groupoid.n} values, got {np.shape(self.values)}")

    def fiber(self, u: int) -> FiberFunction:
        return FiberFunction(u, self.values[self.groupoid.fiber(u)])

    def fibers(self) -> dict:
        return {u: self.fiber(u) for u in self.groupoid.units}

    @classmethod
    def from_fibers(cls, g: FiniteGroupoid, parts: dict) -> "Section":
        vals = np.zeros(g.n, dtype=complex if any(np.iscomplexobj(np.asarray(v)) for v in parts.values()) else float)
        for u, v in parts.items():
            v = v.values if isinstance(v, FiberFunction) else np.asarray(v)
            vals[g.fiber(int(u))] = v
        return cls(g, vals)

    @classmethod
    def zeros(cls, g: FiniteGroupoid) -> "Section":
        return cls(g, np.zeros(g.n))

    def reflect(self) -> "Section":
        """``x -> xi(x^{-1})``."""
        return Section(self.groupoid, self.values[self.groupoid.inv])

    def scale_units(self, b) -> "Section":
        """Module action ``(xi b)(x) = b(r(x)) xi(x)``; ``b`` aligned with ``units``."""
        b = np.asarray(b)
        return Section(self.groupoid, self.values * b[self.groupoid.unit_of])

    def __add__(self, other: "Section") -> "Section":
        return Section(self.groupoid, self.values + other.values)

    def __sub__(self, other: "Section") -> "Section":
        return Section(self.groupoid, self.values - other.values)

    def __neg__(self) -> "Section":
        return Section(self.groupoid, -self.values)

    def __mul__(self, c) -> "Section":
        return Section(self.groupoid, c * self.values)

    __rmul__ = __mul__


def random_section(g: FiniteGroupoid, rng: np.random.Generator, complex_: bool = False, scale: float = 1.0) -> Section:
    v = rng.normal(size=g.n)
    if complex_:
        v = v + 1j * rng.normal(size=g.n)
    return Section(g, scale * v)


def _fiber_weights(f: FiberFunction, h) -> np.ndarray:
    if h is None:
        return np.ones(len(f.values))
    if isinstance(h, HaarSystem):
        return h.fiber_weights(f.unit)
    w = np.asarray(h, dtype=float)
    if w.shape != np.shape(f.values):
        raise ValueError("weights and values differ in length")
    return w


def _as_fiber(f) -> FiberFunction:
    return f if isinstance(f, FiberFunction) else FiberFunction(None, np.asarray(f))


# ---------------------------------------------------------------------------
# batch engines


def _seg_sum(vals: np.ndarray, seg: np.ndarray, nseg: int) -> np.ndarray:
    return np.bincount(seg, weights=vals, minlength=nseg)


def _seg_max(vals: np.ndarray, seg: np.ndarray, nseg: int) -> np.ndarray:
    out = np.zeros(nseg)
    np.maximum.at(out, seg, vals)
    return out


def _canonical(a: np.ndarray, w: np.ndarray, seg: np.ndarray) -> tuple:
    # sum each segment in a fixed order (ascending |f|, then weight) so results
    # do not depend on how the segment's entries happen to be listed
    order = np.lexsort((w, a, seg))
    return a[order], w[order], seg[order]


def batch_modular(phi: YoungFunction, a: np.ndarray, w: np.ndarray, seg: np.ndarray, nseg: int) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        v = phi(a) * w
    bad = np.isnan(v)
    if bad.any():
        v = np.where(bad, np.inf, v)
    return _seg_sum(v, seg, nseg)


def batch_gauge(phi: YoungFunction, a: np.ndarray, w: np.ndarray, seg: np.ndarray, nseg: int) -> np.ndarray:
    """Root ``k`` of ``modular(f/k) = 1`` per segment (0 for zero segments).

    Doubling/halving gives a ``[k, 2k]`` bracket, then 52 bisection steps
    shrink it to the last bits of the mantissa.
    """
    a, w, seg = _canonical(np.abs(a), np.broadcast_to(w, np.shape(a)), seg)
    top = _seg_max(a, seg, nseg)
    live = top > 0
    k = np.where(live, top, 1.0)

    def over(kk):  # modular(f/kk) > 1
        return batch_modular(phi, a / kk[seg], w, seg, nseg) > 1.0

    hi = k.copy()
    grow = live & over(hi)
    while np.any(grow):
        hi = np.where(grow, hi * 2.0, hi)
        grow = grow & over(hi)
    lo = hi / 2.0
    shrink = live & ~over(lo)
    while np.any(shrink):
        hi = np.where(shrink, lo, hi)
        lo = np.where(shrink, lo / 2.0, lo)
        shrink = shrink & ~over(lo)
    for _ in range(52):
        mid = 0.5 * (lo + hi)
        o = over(mid)
        lo = np.where(o, mid, lo)
        hi = np.where(o, hi, mid)
    return np.where(live, 0.5 * (lo + hi), 0.0)


_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def batch_amemiya(
    phi: YoungFunction,
    a: np.ndarray,
    w: np.ndarray,
    seg: np.ndarray,
    nseg: int,
    per_decade: int = 64,
    span: tuple = (1e-8, 1e8),
    rtol: float = TOL.golden,
) -> tuple:
    """Minimise ``A(k) = (1 + modular(k f)) / k`` per segment.

    The log-grid of ``k`` (``per_decade`` points per decade over ``span``,
    scaled by ``1/max|f|``) is searched for its discrete minimum; ``A`` is
    convex in ``1/k`` so the grid sequence is unimodal and an index ternary
    search returns the same point a full scan would.  Golden-section
    refinement on the two neighbouring cells follows.  Returns
    ``(norms, argmins)``; zero segments give norm 0 and argmin NaN.
    """
    a, w, seg = _canonical(np.abs(a), np.broadcast_to(w, np.shape(a)), seg)
    top = _seg_max(a, seg, nseg)
    live = top > 0
    scale = np.where(live, 1.0 / np.where(live, top, 1.0), 1.0)
    e0, e1 = np.log10(span[0]), np.log10(span[1])
    npts = int(round((e1 - e0) * per_decade)) + 1
    step = (e1 - e0) / (npts - 1)

    def k_at(idx):
        return scale * 10.0 ** (e0 + step * idx)

    def A(kk):
        with np.errstate(over="ignore", invalid="ignore"):
            val = (1.0 + batch_modular(phi, kk[seg] * a, w, seg, nseg)) / kk
        return np.where(np.isfinite(val), val, np.inf)

    lo = np.zeros(nseg, dtype=np.int64)
    hi = np.full(nseg, npts - 1, dtype=np.int64)
    while True:
        act = live & (hi - lo > 2)
        if not np.any(act):
            break
        third = (hi - lo) // 3
        m1, m2 = lo + third, hi - third
        a1, a2 = A(k_at(m1)), A(k_at(m2))
        left = a1 < a2
        hi = np.where(act & left, m2, hi)
        lo = np.where(act & ~left, m1, lo)
    best = lo.copy()
    best_val = A(k_at(lo))
    for off in (1, 2):
        idx = np.minimum(lo + off, hi)
        v = A(k_at(idx))
        better = v < best_val
        best = np.where(better, idx, best)
        best_val = np.where(better, v, best_val)
    edge = live & ((best == 0) | (best == npts - 1))
    if np.any(edge):
        raise NoMinimum("Amemiya functional monotone over the scan range (not an N-function?)")

    # golden section on [k_{best-1}, k_{best+1}] in log k
    x0 = np.log(k_at(best - 1))
    x1 = np.log(k_at(best + 1))
    width = 2 * step * np.log(10.0)
    n_iter = max(int(np.ceil(np.log(rtol / width) / np.log(_INVPHI))), 1)
    c = x1 - _INVPHI * (x1 - x0)
    d = x0 + _INVPHI * (x1 - x0)
    fc, fd = A(np.exp(c)), A(np.exp(d))
    for _ in range(n_iter):
        left = fc < fd
        x1 = np.where(left, d, x1)
        x0 = np.where(left, x0, c)
        new_c = x1 - _INVPHI * (x1 - x0)
        new_d = x0 + _INVPHI * (x1 - x0)
        fnew = A(np.exp(np.where(left, new_c, new_d)))
        c, fc, d, fd = (
            np.where(left, new_c, d),
            np.where(left, fnew, fd),
            np.where(left, c, new_d),
            np.where(left, fc, fnew),
        )
    kmid = np.exp(0.5 * (x0 + x1))
    cand = np.stack([best_val, A(kmid), fc, fd])
    ks = np.stack([k_at(best), kmid, np.exp(c), np.exp(d)])
    j = np.argmin(cand, axis=0)
    cols = np.arange(nseg)
    norms = np.where(live, cand[j, cols], 0.0)
    argmins = np.where(live, ks[j, cols], np.nan)
    return norms, argmins


def flatten(vectors, weights=None) -> tuple:
    """Pack a list of vectors (and optional weight vectors) into batch arrays."""
    lens = np.array([len(v) for v in vectors], dtype=np.int64)
    a = np.abs(np.concatenate([np.asarray(v) for v in vectors])) if len(vectors) else np.zeros(0)
    w = np.concatenate([np.asarray(x, dtype=float) for x in weights]) if weights is not None else np.ones(a.size)
    seg = np.repeat(np.arange(len(vectors)), lens)
    return a, w, seg, len(vectors)


# ---------------------------------------------------------------------------
# single-fiber operations


def modular(phi: YoungFunction, f, h=None) -> float:
    """``sum_t Phi(|f(t)|) lambda^u(t)``.

    ``h`` is a :class:`HaarSystem` (with ``f.unit`` set), a weight vector, or
    ``None`` for counting measure.
    """
    f = _as_fiber(f)
    w = _fiber_weights(f, h)
    return float(np.sum(phi(np.abs(f.values)) * w))


def gauge_norm(phi: YoungFunction, f, h=None) -> float:
    """Luxemburg norm ``inf{k > 0: modular(f/k) <= 1}``, as the root of ``modular(f/k) = 1``."""
    f = _as_fiber(f)
    w = _fiber_weights(f, h)
    a = np.abs(f.values).astype(float)
    if not np.any(a):
        return 0.0
    k = float(batch_gauge(phi, a, w, np.zeros(a.size, dtype=np.int64), 1)[0])
    m = float(np.sum(phi(a / k) * w))
    if not abs(m - 1.0) <= 1e-9:
        raise ArithmeticError(f"gauge root check failed: modular(f/k) = {m!r}")
    return k


def orlicz_norm(phi: YoungFunction, f, h=None, return_argmin: bool = False):
    """Orlicz norm via the Amemiya infimum ``inf_k (1 + modular(k f)) / k``."""
    f = _as_fiber(f)
    w = _fiber_weights(f, h)
    a = np.abs(f.values).astype(float)
    if not np.any(a):
        return (0.0, float("nan")) if return_argmin else 0.0
    n, k = batch_amemiya(phi, a, w, np.zeros(a.size, dtype=np.int64), 1)
    return (float(n[0]), float(k[0])) if return_argmin else float(n[0])


def l1_norm(f, h=None) -> float:
    f = _as_fiber(f)
    return float(np.sum(np.abs(f.values) * _fiber_weights(f, h)))


def pairing_value(f, g, h=None) -> complex:
    """Bilinear ``sum f g lambda`` (no conjugation)."""
    f, g = _as_fiber(f), _as_fiber(g)
    return complex(np.sum(f.values * g.values * _fiber_weights(f, h)))


def holder_check(phi: YoungFunction, psi: YoungFunction, f, g, h=None) -> float:
    """Slack ``||f||^0_Phi ||g||_Psi - sum |f g| lambda`` (nonnegative in exact arithmetic)."""
    f, g = _as_fiber(f), _as_fiber(g)
    lhs = float(np.sum(np.abs(f.values * g.values) * _fiber_weights(f, h)))
    return gauge_norm(phi, f, h) * orlicz_norm(psi, g, h) - lhs


def jensen_check(phi: YoungFunction, f, nu, tol: float = 1e-12) -> float:
    """Slack ``sum Phi(f) nu - Phi(sum f nu)`` for a probability vector ``nu``."""
    f = np.asarray(f, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if np.any(nu < 0) or abs(nu.sum() - 1.0) > tol:
        raise NotProbability(f"weights sum to {nu.sum()!r}")
    return float(np.sum(phi(f) * nu) - phi(np.sum(f * nu)))


@dataclass(frozen=True)
class NormReport:
    gauge: float
    orlicz: float
    amemiya_argmin: Optional[float]
    l1: float
    lower_slack: float  # orlicz - gauge
    upper_slack: float  # 2 gauge - orlicz

    def ok(self, rel: float = TOL.relative) -> bool:
        tol = rel * max(self.gauge, 1e-300)
        return self.lower_slack >= -tol and self.upper_slack >= -tol


def norm_report(phi: YoungFunction, f, h=None) -> NormReport:
    g0 = gauge_norm(phi, f, h)
    o, k = orlicz_norm(phi, f, h, return_argmin=True)
    return NormReport(g0, o, None if np.isnan(k) else k, l1_norm(f, h), o - g0, 2 * g0 - o)


def dual_ball_lower_bound(
    phi: YoungFunction, psi: YoungFunction, f, h=None, rng=None, samples: int = 64
) -> float:
    """Lower bound for ``||f||_Phi`` from ``|sum f g lambda|`` over ``g`` on the unit ``Psi``-gauge sphere.

    Test oracle independent of the Amemiya minimiser: random directions plus
    the direction ``Phi'(|f|)`` (the extremal one up to scaling).
    """
    f = _as_fiber(f)
    w = _fiber_weights(f, h)
    rng = rng or np.random.default_rng(0)
    a = np.abs(f.values)
    if not np.any(a):
        return 0.0
    sign = np.conj(np.sign(f.values)) if np.iscomplexobj(f.values) else np.sign(f.values)
    dirs = [phi.right_derivative(a * s) for s in np.geomspace(0.05, 20.0, 25) / a.max()]
    dirs += [np.abs(rng.normal(size=a.size)) for _ in range(samples)]
    best = 0.0
    vecs = [np.asarray(dv, dtype=float) * sign for dv in dirs if np.any(dv)]
    norms = batch_gauge(psi, *flatten(vecs, [w] * len(vecs)))
    for v, nv in zip(vecs, norms):
        best = max(best, abs(np.sum(f.values * v * w)) / nv)
    return float(best)


# ---------------------------------------------------------------------------
# sections


def _section_batch(xi: Section, h: HaarSystem) -> tuple:
    g = xi.groupoid
    return np.abs(xi.values), h.weights, g.unit_of, len(g.units)


def fiber_gauge_norms(phi: YoungFunction, xi: Section, h: HaarSystem) -> np.ndarray:
    """``||xi^u||^0_Phi`` for every unit, in ``units`` order."""
    return batch_gauge(phi, *_section_batch(xi, h))


def fiber_orlicz_norms(phi: YoungFunction, xi: Section, h: HaarSystem) -> np.ndarray:
    return batch_amemiya(phi, *_section_batch(xi, h))[0]


def fiber_l1_norms(xi: Section, h: HaarSystem) -> np.ndarray:
    g = xi.groupoid
    return _seg_sum(np.abs(xi.values) * h.weights, g.unit_of, len(g.units))


def sup_gauge(phi: YoungFunction, xi: Section, h: HaarSystem) -> float:
    """Section norm ``sup_u ||xi^u||^0_Phi``."""
    return float(fiber_gauge_norms(phi, xi, h).max())


def sup_orlicz(phi: YoungFunction, xi: Section, h: HaarSystem) -> float:
    return float(fiber_orlicz_norms(phi, xi, h).max())


def sup_l1(xi: Section, h: HaarSystem) -> float:
    return float(fiber_l1_norms(xi, h).max())


def l1_embedding_constant(psi: YoungFunction, g: FiniteGroupoid, h: HaarSystem) -> float:
    """Admissible ``d`` with ``||f||_1 <= d ||f||^0_Phi``: ``sup_u ||chi_{G^u}||_Psi``.

    Hölder with ``g = chi_{G^u}`` gives the bound fiber by fiber; ``psi`` is
    the complement of the ``Phi`` whose gauge norm appears on the right.
    Finite groupoids have ``sup_u lambda^u(G) < inf`` so the constant exists.
    """
    ones = Section(g, np.ones(g.n))
    return float(fiber_orlicz_norms(psi, ones, h).max())


def l1_embedding_slack(phi: YoungFunction, d: float, xi: Section, h: HaarSystem) -> float:
    """``d sup_u ||xi^u||^0_Phi - sup_u ||xi^u||_1``."""
    return d * sup_gauge(phi, xi, h) - sup_l1(xi, h)


def extend_fiber_to_section(
    phi: YoungFunction, g_fiber: FiberFunction, k: float, g: FiniteGroupoid, h: HaarSystem
) -> Section:
    """Section equal to ``g_fiber`` at its unit and zero elsewhere, with sup-norm ``<= k``."""
    r = gauge_norm(phi, g_fiber, h)
    if r > k * (1 + TOL.root):
        raise BoundViolated(f"fiber norm {r:g} exceeds bound {k:g}")
    vals = np.zeros(g.n, dtype=np.result_type(g_fiber.values, float))
    vals[g.fiber(g_fiber.unit)] = g_fiber.values
    return Section(g, vals)


NormValue = Union[float, np.ndarray]


# ---------------------------------------------------------------------------
# many sections at once (rows of a matrix)


def _rows_batch(V: np.ndarray, h: HaarSystem, g: FiniteGroupoid) -> tuple:
    V = np.atleast_2d(V)
    t, n = V.shape
    nu = len(g.units)
    seg = (np.arange(t)[:, None] * nu + g.unit_of[None, :]).ravel()
    return np.abs(V).ravel(), np.tile(h.weights, t), seg, t * nu


def sup_gauge_rows(phi: YoungFunction, V: np.ndarray, h: HaarSystem, g: FiniteGroupoid) -> np.ndarray:
    """Section gauge norm of every row of ``V``."""
    V = np.atleast_2d(V)
    per = batch_gauge(phi, *_rows_batch(V, h, g))
    return per.reshape(V.shape[0], len(g.units)).max(axis=1)


def sup_l1_rows(V: np.ndarray, h: HaarSystem, g: FiniteGroupoid) -> np.ndarray:
    V = np.atleast_2d(V)
    a, w, seg, nseg = _rows_batch(V, h, g)
    return _seg_sum(a * w, seg, nseg).reshape(V.shape[0], len(g.units)).max(axis=1)
