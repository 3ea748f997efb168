"""Young functions and N-functions.

A :class:`YoungFunction` wraps a vectorised evaluator on ``[0, inf)``; calls
are extended to the whole line by evenness.  Conjugates are taken in closed
form when the function carries one and otherwise by locating the point where
the right derivative crosses ``y`` (the stationarity condition of
``x*y - Phi(x)``), which is monotone for convex functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .config import TOL
from .errors import ConfigError, DivergentRatio, UnboundedConjugate

Evaluator = Callable[[np.ndarray], np.ndarray]

_BISECT_STEPS = 42  # 2**-42 < 1e-12 on a [a, 2a] bracket


def log_grid(lo: float = 1e-8, hi: float = 1e8, per_decade: int = 20) -> np.ndarray:
    decades = np.log10(hi) - np.log10(lo)
    return np.logspace(np.log10(lo), np.log10(hi), int(round(decades * per_decade)) + 1)


@dataclass(frozen=True, eq=False)
class YoungFunction:
    name: str
    evaluator: Evaluator
    derivative: Optional[Evaluator] = None  # right derivative on [0, inf)
    conjugate_closed_form: Optional[Evaluator] = None
    conjugate_derivative: Optional[Evaluator] = None
    is_n_function: bool = True
    delta2_constant: Optional[float] = None
    meta: dict = field(default_factory=dict)

    def __call__(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        with np.errstate(over="ignore", invalid="ignore"):
            out = self.evaluator(x)
        # numeric evaluators promote scalars to 1-d arrays; keep the input's shape
        return out.reshape(x.shape) if np.ndim(out) != x.ndim else out

    def right_derivative(self, x):
        x = np.asarray(x, dtype=float)
        if self.derivative is not None:
            with np.errstate(over="ignore", invalid="ignore"):
                return self.derivative(x)
        # one-sided difference quotient; only used for user-supplied functions
        h = 1e-7 * np.maximum(1.0, x)
        return (self(x + h) - self(x)) / h

    def __repr__(self) -> str:
        return f"YoungFunction({self.name!r})"


# ---------------------------------------------------------------------------
# zoo


def power(p: float) -> YoungFunction:
    """``Phi(x) = x**p`` with conjugate ``(p-1) (y/p)**q``."""
    if not p > 1:
        raise ConfigError(f"power exponent must exceed 1, got {p}")
    q = p / (p - 1)
    return YoungFunction(
        name=f"power:{p:g}",
        evaluator=lambda x: x**p,
        derivative=lambda x: p * x ** (p - 1),
        conjugate_closed_form=lambda y: (p - 1) * (y / p) ** q,
        conjugate_derivative=lambda y: (y / p) ** (q - 1),
        delta2_constant=2.0**p,
        meta={"family": "power", "p": p, "q": q, "conjugate_delta2": 2.0**q},
    )


def normalized_power(p: float) -> YoungFunction:
    """``Phi(x) = x**p / p`` with conjugate ``y**q / q``."""
    if not p > 1:
        raise ConfigError(f"power exponent must exceed 1, got {p}")
    q = p / (p - 1)
    return YoungFunction(
        name=f"npower:{p:g}",
        evaluator=lambda x: x**p / p,
        derivative=lambda x: x ** (p - 1),
        conjugate_closed_form=lambda y: y**q / q,
        conjugate_derivative=lambda y: y ** (q - 1),
        delta2_constant=2.0**p,
        meta={"family": "npower", "p": p, "q": q, "conjugate_delta2": 2.0**q},
    )


def xlogx() -> YoungFunction:
    """``Phi(x) = x log(1 + x)``; the conjugate has no closed form."""
    return YoungFunction(
        name="xlogx",
        evaluator=lambda x: x * np.log1p(x),
        derivative=lambda x: np.log1p(x) + x / (1.0 + x),
        delta2_constant=4.0,
        meta={"family": "xlogx"},
    )


def _cosh_conj(y):
    # y asinh(y) - (sqrt(1+y^2) - 1), written to avoid cancellation near 0
    return y * np.arcsinh(y) - y * y / (np.sqrt(1.0 + y * y) + 1.0)


def cosh_minus_one() -> YoungFunction:
    """``Phi(x) = cosh(x) - 1``.  Not doubling: cosh(2x)/cosh(x) is unbounded."""
    return YoungFunction(
        name="cosh",
        evaluator=lambda x: 2.0 * np.sinh(0.5 * x) ** 2,
        derivative=np.sinh,
        conjugate_closed_form=_cosh_conj,
        conjugate_derivative=np.arcsinh,
        delta2_constant=None,
        meta={"family": "cosh", "noncompact_ok": False},
    )


ZOO_IDS = ("power:1.5", "power:2", "power:3", "npower:2", "npower:3", "xlogx", "cosh")


def from_id(ident: str) -> YoungFunction:
    """Resolve ``power:<p>``, ``npower:<p>``, ``xlogx``, ``cosh`` or ``conj:<id>``."""
    ident = ident.strip()
    if ident.startswith("conj:"):
        return complement(from_id(ident[5:]))
    head, _, arg = ident.partition(":")
    try:
        if head == "power":
            return power(float(arg))
        if head == "npower":
            return normalized_power(float(arg))
    except ValueError as exc:
        raise ConfigError(f"bad Young function id {ident!r}") from exc
    if ident == "xlogx":
        return xlogx()
    if ident == "cosh":
        return cosh_minus_one()
    raise ConfigError(f"unknown Young function id {ident!r}")


def zoo() -> list[YoungFunction]:
    return [from_id(i) for i in ZOO_IDS]


# ---------------------------------------------------------------------------
# conjugation


def _bracket_root(g: Callable[[np.ndarray], np.ndarray], target: np.ndarray, cap: float):
    """Bracket the smallest x >= 0 with g(x) >= target for nondecreasing g.

    Returns ``(lo, hi, ok)``; ``ok`` is False where g stays below the target
    up to ``cap``.  Targets <= g(0) get ``lo = hi = 0``.
    """
    target = np.asarray(target, dtype=float)
    lo = np.zeros_like(target)
    hi = np.ones_like(target)
    g0 = g(np.zeros_like(target))
    trivial = target <= g0

    # grow upwards
    grow = ~trivial & ~(g(hi) >= target)
    while np.any(grow):
        hi = np.where(grow, hi * 2.0, hi)
        grow = grow & ~(g(hi) >= target) & (hi <= cap)
    ok = trivial | (g(hi) >= target)
    lo = np.where(hi > 1.0, hi / 2.0, 0.0)

    # shrink downwards so the bracket is [a, 2a]
    shrink = ~trivial & ok & (hi <= 1.0)
    lo = np.where(shrink, 0.5, lo)
    while True:
        need = shrink & (g(lo) >= target) & (lo > 1e-300)
        if not np.any(need):
            break
        hi = np.where(need, lo, hi)
        lo = np.where(need, lo / 2.0, lo)
    lo = np.where(trivial, 0.0, lo)
    hi = np.where(trivial, 0.0, hi)
    return lo, hi, ok


def _bisect(g, target, lo, hi, steps: int = _BISECT_STEPS):
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        up = g(mid) >= target
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
    return lo, hi


def stationary_point(phi: YoungFunction, y, cap: float = TOL.bracket_cap) -> np.ndarray:
    """Point where the right derivative of ``phi`` crosses ``y``; NaN if unbounded."""
    y = np.atleast_1d(np.abs(np.asarray(y, dtype=float)))
    lo, hi, ok = _bracket_root(phi.right_derivative, y, cap)
    lo, hi = _bisect(phi.right_derivative, y, lo, hi)
    # both ends are admissible; keep whichever gives the larger x*y - Phi(x)
    val_lo = lo * y - phi(lo)
    val_hi = hi * y - phi(hi)
    x = np.where(val_hi >= val_lo, hi, lo)
    return np.where(ok, x, np.nan)


def numeric_conjugate(phi: YoungFunction, y, cap: float = TOL.bracket_cap) -> np.ndarray:
    """Vectorised conjugate by stationarity; ``inf`` where the bracket exceeds ``cap``."""
    y = np.atleast_1d(np.abs(np.asarray(y, dtype=float)))
    x = stationary_point(phi, y, cap)
    with np.errstate(invalid="ignore"):
        val = np.maximum(x * y - phi(x), 0.0)
    return np.where(np.isnan(x), np.inf, val)


def conjugate(phi: YoungFunction, y, use_closed_form: bool = True):
    """Complementary function ``Psi(y) = sup_x (x|y| - Phi(x))``.

    Raises :class:`UnboundedConjugate` when no stationary point exists below
    the bracket cap, i.e. the supremum is infinite.
    """
    scalar = np.ndim(y) == 0
    ya = np.atleast_1d(np.abs(np.asarray(y, dtype=float)))
    if use_closed_form and phi.conjugate_closed_form is not None:
        with np.errstate(over="ignore"):
            out = phi.conjugate_closed_form(ya)
    else:
        out = numeric_conjugate(phi, ya)
        if np.any(np.isinf(out)):
            bad = ya[np.isinf(out)][0]
            raise UnboundedConjugate(f"{phi.name}: conjugate diverges at y={bad:g}")
    return float(out[0]) if scalar else out


def complement(phi: YoungFunction) -> YoungFunction:
    """The conjugate of ``phi`` as a Young function in its own right."""
    if phi.conjugate_closed_form is not None:
        ev = phi.conjugate_closed_form
        der = phi.conjugate_derivative or (lambda y: stationary_point(phi, y))
    else:
        ev = lambda y: numeric_conjugate(phi, y)  # noqa: E731
        der = lambda y: np.nan_to_num(stationary_point(phi, y), nan=np.inf)  # noqa: E731
    d2 = phi.meta.get("conjugate_delta2")
    meta = {"family": "conjugate", "of": phi.name}
    if "q" in phi.meta:
        meta["p"], meta["q"] = phi.meta["q"], phi.meta["p"]
        meta["conjugate_delta2"] = phi.delta2_constant
    return YoungFunction(
        name=f"conj:{phi.name}",
        evaluator=ev,
        derivative=der,
        conjugate_closed_form=phi.evaluator,
        conjugate_derivative=phi.derivative,
        is_n_function=phi.is_n_function,
        delta2_constant=d2,
        meta=meta,
    )


def inverse(phi: YoungFunction, y):
    """``x >= 0`` with ``Phi(x) = y``, by bracketed bisection (relative 1e-12)."""
    scalar = np.ndim(y) == 0
    ya = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(ya < 0):
        raise ValueError("inverse needs y >= 0")
    lo, hi, ok = _bracket_root(phi, ya, TOL.bracket_cap)
    lo, hi = _bisect(phi, ya, lo, hi)
    x = np.where(ok, 0.5 * (lo + hi), np.nan)
    x = np.where(ya == 0, 0.0, x)
    return float(x[0]) if scalar else x


# ---------------------------------------------------------------------------
# doubling condition and dilation bounds


def _diverges(values: np.ndarray, grid: np.ndarray, rel: float = 1e-6) -> bool:
    """Running sup still climbing across the top decade of ``grid``."""
    if not np.all(np.isfinite(values)):
        return True
    top = values[grid >= grid[-1] / 10.0]
    if top.size < 2:
        return False
    return bool(np.all(np.diff(top) > 0) and top[-1] > top[0] * (1.0 + rel))


@dataclass(frozen=True)
class Delta2Estimate:
    constant: float  # sup of Phi(2x)/Phi(x) on the grid (finite part)
    divergent: bool
    threshold: float = 0.0


def delta2_estimate(phi: YoungFunction, grid=None, threshold: float = 0.0) -> Delta2Estimate:
    """Sampled doubling constant ``sup Phi(2x)/Phi(x)`` over ``grid`` points >= threshold.

    ``threshold`` is the ``x0`` of the doubling-at-infinity variant used for
    compact groupoids.
    """
    grid = log_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0):
        raise ValueError("grid must be nonempty and positive")
    grid = np.sort(grid[grid >= threshold])
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        ratio = phi(2.0 * grid) / phi(grid)
    divergent = _diverges(np.maximum.accumulate(np.nan_to_num(ratio, nan=np.inf)), grid)
    finite = ratio[np.isfinite(ratio)]
    const = float(finite.max()) if finite.size else float("nan")
    return Delta2Estimate(const, divergent, threshold)


def _dilation_sup(phi: YoungFunction, a: np.ndarray, grid: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        ratios = phi(np.outer(a, grid)) / phi(grid)[None, :]
    return ratios


def psi_tilde(phi: YoungFunction, psi: YoungFunction, a, grid=None, check: bool = True):
    """``max(sup_b Phi(ab)/Phi(b), sup_b Psi(ab)/Psi(b))`` with sups over ``grid``.

    Grid sups are lower bounds for the true suprema; for power pairs the ratios
    are constant in ``b`` and the value is exact.
    """
    grid = log_grid() if grid is None else np.asarray(grid, dtype=float)
    scalar = np.ndim(a) == 0
    shape = np.shape(a)
    a = np.asarray(a, dtype=float).ravel()
    out = np.empty_like(a)
    for j in range(0, a.size, 256):
        chunk = a[j : j + 256]
        best = np.zeros_like(chunk)
        for f in (phi, psi):
            r = _dilation_sup(f, chunk, grid)
            for i in np.nonzero(chunk > 1.0)[0] if check else ():
                if _diverges(r[i], grid):
                    raise DivergentRatio(f"{f.name}: dilation ratio unbounded at a={chunk[i]:g}")
            best = np.maximum(best, np.nanmax(np.where(np.isfinite(r), r, np.nan), axis=1))
        out[j : j + 256] = np.where(chunk == 0, 0.0, best)
    return float(out[0]) if scalar else out.reshape(shape)


_TILDE_CACHE: dict = {}


def make_psi_tilde(phi: YoungFunction, psi: YoungFunction, grid=None, per_decade: int = 40) -> YoungFunction:
    """Grid dilation majorant as a Young function (used for the right-convolver constant).

    The majorant is tabulated once on a log grid of ``a`` (with ``a = 1`` as a
    node) and evaluated by linear interpolation in log-log coordinates,
    extrapolating with the end slopes.  Power pairs are piecewise power
    functions with their kink at 1, so for them the interpolant is exact.
    Raises :class:`DivergentRatio` up front if either function fails the
    doubling condition on the grid.
    """
    key = (phi.name, psi.name, per_decade) if grid is None else None
    if key is not None and key in _TILDE_CACHE:
        return _TILDE_CACHE[key]
    grid = log_grid() if grid is None else np.asarray(grid, dtype=float)
    for f in (phi, psi):
        if delta2_estimate(f, grid).divergent:
            raise DivergentRatio(f"{f.name} is not doubling on the sample grid")
    nodes = np.union1d(log_grid(1e-6, 1e6, per_decade), [1.0])
    la = np.log(nodes)
    lt = np.log(psi_tilde(phi, psi, nodes, grid, check=False))
    s0 = (lt[1] - lt[0]) / (la[1] - la[0])
    s1 = (lt[-1] - lt[-2]) / (la[-1] - la[-2])

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            lx = np.log(x)
        ly = np.interp(lx, la, lt)
        ly = np.where(lx < la[0], lt[0] + s0 * (lx - la[0]), ly)
        ly = np.where(lx > la[-1], lt[-1] + s1 * (lx - la[-1]), ly)
        with np.errstate(over="ignore"):
            return np.where(x > 0, np.exp(ly), 0.0)

    out = YoungFunction(name=f"tilde({phi.name},{psi.name})", evaluator=evaluate, meta={"family": "tilde"})
    if key is not None:
        _TILDE_CACHE[key] = out
    return out


def check_complementary(phi: YoungFunction, psi: YoungFunction, rel: float = 1e-8) -> bool:
    ys = np.linspace(0.05, 5.0, 25)
    ref = conjugate(phi, ys)
    return bool(np.allclose(psi(ys), ref, rtol=rel, atol=1e-12))


# ---------------------------------------------------------------------------
# invariants


@dataclass
class YoungCheck:
    name: str
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def check_young(phi: YoungFunction, grid=None, slack: float = 1e-12) -> YoungCheck:
    """Sampled checks: Phi(0)=0, monotone, midpoint convex, N-function limits."""
    rep = YoungCheck(phi.name)
    xs = np.linspace(0.0, 20.0, 401) if grid is None else np.asarray(grid, dtype=float)
    if phi(0.0) != 0.0:
        rep.failures.append(("phi(0)", float(phi(0.0))))
    v = phi(xs)
    if np.any(np.diff(v) < -slack * np.abs(v[1:])):
        i = int(np.argmin(np.diff(v)))
        rep.failures.append(("monotone", float(xs[i])))
    a, b = np.meshgrid(xs[::8], xs[::8])
    mid = phi((a + b) / 2)
    avg = (phi(a) + phi(b)) / 2
    bad = mid > avg * (1 + slack) + 1e-300
    if np.any(bad):
        i = np.argwhere(bad)[0]
        rep.failures.append(("convexity", (float(a[tuple(i)]), float(b[tuple(i)]))))
    if phi.is_n_function:
        lg = log_grid(1e-8, 1e8, 4)
        with np.errstate(over="ignore", invalid="ignore"):
            ratio = phi(lg) / lg
        ratio = np.nan_to_num(ratio, nan=np.inf)
        if np.any(np.diff(ratio) < -slack * np.abs(ratio[1:])):
            rep.failures.append(("n-function trend", "Phi(x)/x not nondecreasing"))
        at_one = float(phi(1.0))
        # growth at infinity may be only logarithmic (x log x), so ask for a trend
        if not (ratio[0] < 1e-3 * at_one and ratio[-1] > 10.0 * at_one):
            rep.failures.append(("n-function limits", (float(ratio[0]), float(ratio[-1]))))
    return rep
