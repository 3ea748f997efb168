"""Deterministic check suites.

Every suite takes a :class:`SuiteConfig` and returns a :class:`SuiteReport`
made of named checks.  A check carries a *slack* (positive means the
inequality or identity holds with room to spare) and a tolerance; its verdict
is ``pass`` iff ``slack >= -tolerance``.  Identities are recorded with slack
``-deviation``.
"""

from __future__ import annotations

import time
import zlib
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import convalg as ca
from . import convolutor as cv
from . import fieldlab as fl
from . import groupoid as gm
from . import ideals as idl
from . import orlicz as oz
from . import young as yg
from .config import default_tolerances
from .errors import DivergentRatio, NotDelta2
from .orlicz import Section

SCHEMA_VERSION = 1

DOUBLING_IDS = ("power:1.5", "power:2", "power:3", "npower:2", "npower:3", "xlogx")
POWER_IDS = ("power:1.5", "power:2", "power:3", "npower:2", "npower:3")


@dataclass
class SuiteConfig:
    seed: int = 0
    trials: int = 1000
    groupoids: Optional[Sequence[str]] = None  # None: the whole zoo
    phis: Optional[Sequence[str]] = None  # None: the suite's default Young functions
    inject_fault: Optional[str] = None


@dataclass
class Check:
    name: str
    slack: float
    tolerance: float
    verdict: str
    witness: Optional[str] = None
    cases: int = 0


@dataclass
class SuiteReport:
    suite: str
    seed: int
    trials: int
    groupoids: List[str]
    young: List[str]
    checks: List[Check] = field(default_factory=list)
    skipped: List[dict] = field(default_factory=list)
    wall_time_s: float = 0.0
    schema_version: int = SCHEMA_VERSION

    @property
    def passed(self) -> bool:
        return all(c.verdict == "pass" for c in self.checks)

    def add(self, name: str, slack: float, tolerance: float, witness=None, cases: int = 0) -> Check:
        slack = float(slack)
        if not np.isfinite(slack):
            slack = -1e300 if np.isnan(slack) or slack < 0 else 1e300
        ok = slack >= -tolerance
        c = Check(name, slack, float(tolerance), "pass" if ok else "fail", None if ok else _fmt(witness), int(cases))
        self.checks.append(c)
        return c

    def identity(self, name: str, deviation: float, tolerance: float, witness=None, cases: int = 0) -> Check:
        return self.add(name, -float(deviation), tolerance, witness, cases)

    def flag(self, name: str, ok: bool, witness=None, cases: int = 0) -> Check:
        return self.add(name, 0.0 if ok else -1.0, 0.0, witness, cases)

    def skip(self, item: str, reason: str) -> None:
        self.skipped.append({"item": item, "reason": reason})

    def to_dict(self, timing: bool = True) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        if not timing:
            d.pop("wall_time_s")
        return d


def _fmt(w) -> Optional[str]:
    if w is None:
        return "see slack"
    if callable(w):
        w = w()
    return str(w)


def suite_rng(name: str, seed: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), zlib.crc32(name.encode())])


def random_rows(rng, t: int, n: int, complex_frac: float = 0.3) -> np.ndarray:
    """``t`` random vectors: Gaussian with log-uniform scale, some sparse, some complex."""
    V = rng.normal(size=(t, n)) * 10.0 ** rng.uniform(-1.5, 1.5, size=(t, 1))
    sparse = rng.random(t) < 0.25
    V[sparse] *= rng.random(size=(int(sparse.sum()), n)) < 0.4
    V[~np.any(V != 0, axis=1), 0] = 1.0
    cplx = rng.random(t) < complex_frac
    if np.any(cplx):
        V = V.astype(complex)
        V[cplx] += 1j * rng.normal(size=(int(cplx.sum()), n)) * np.abs(V[cplx]).max(axis=1, keepdims=True)
    return V


def _density(g: gm.FiniteGroupoid) -> gm.HaarSystem:
    # exact binary fractions keep invariance checks exact
    return gm.haar_from_density(g, 1.0 + 0.5 * (np.arange(len(g.units)) % 3))


def _haars(g: gm.FiniteGroupoid) -> list:
    return [gm.counting_haar(g), _density(g)]


def _groupoids(cfg: SuiteConfig) -> list:
    return [gm.from_id(i) for i in (cfg.groupoids or gm.ZOO_IDS)]


def _phis(cfg: SuiteConfig, default: Sequence[str]) -> list:
    return list(cfg.phis or default)


def _rows_norms(phi, V, h, g, which="gauge") -> np.ndarray:
    """Per-(row, unit) norms, shape ``(rows, units)``."""
    a, w, seg, nseg = oz._rows_batch(V, h, g)
    if which == "gauge":
        out = oz.batch_gauge(phi, a, w, seg, nseg)
    else:
        out = oz.batch_amemiya(phi, a, w, seg, nseg)[0]
    return out.reshape(np.atleast_2d(V).shape[0], len(g.units))


def _strict(slack, scale):
    """The stricter of the absolute slack and the slack relative to ``scale``."""
    slack = np.asarray(slack, dtype=float)
    scale = np.asarray(scale, dtype=float)
    rel = np.where(scale > 0, slack / np.where(scale > 0, scale, 1.0), slack)
    return np.minimum(slack, rel)


def _worst(values: np.ndarray, labels: Callable[[int], str]) -> tuple:
    i = int(np.argmin(values))
    return float(values[i]), (lambda: labels(i))


# ---------------------------------------------------------------------------
# suites


def suite_young(cfg: SuiteConfig, rep: SuiteReport) -> None:
    tol = default_tolerances()
    rng = suite_rng("young", cfg.seed)
    ids = _phis(cfg, yg.ZOO_IDS)
    for pid in ids:
        phi = yg.from_id(pid)
        psi = yg.complement(phi)
        for f in (phi, psi):
            chk = yg.check_young(f)
            rep.flag(f"young-axioms:{f.name}", chk.ok, chk.failures[:3], 1)
        ys = np.sort(10.0 ** rng.uniform(-2, 1, size=max(20, cfg.trials // 20)))
        if phi.conjugate_closed_form is not None:
            closed = phi.conjugate_closed_form(ys)
            numeric = yg.numeric_conjugate(phi, ys)
            rel = np.abs(closed - numeric) / np.maximum(1.0, np.abs(closed))
            rep.identity(f"conjugate-closed-vs-numeric:{pid}", rel.max(), tol.relative, f"y={ys[np.argmax(rel)]:.6g}", ys.size)
        xs = 10.0 ** rng.uniform(-2, 1, size=ys.size)
        back = yg.inverse(phi, phi(xs))
        rel = np.abs(back - xs) / xs
        rep.identity(f"inverse-roundtrip:{pid}", rel.max(), tol.relative, f"x={xs[np.argmax(rel)]:.6g}", xs.size)
        est = yg.delta2_estimate(phi)
        expect_doubling = pid != "cosh"
        rep.flag(f"doubling-classification:{pid}", (not est.divergent) == expect_doubling,
                 f"constant={est.constant}", 1)
        if pid in POWER_IDS:
            p = phi.meta["p"]
            q = phi.meta["q"]
            a = np.array([0.25, 0.5, 2.0, 3.0])
            expect = np.where(a > 1, a ** max(p, q), a ** min(p, q))
            got = yg.psi_tilde(phi, psi, a)
            rep.identity(f"dilation-majorant-exact:{pid}", np.max(np.abs(got - expect) / expect), tol.relative, a.tolist(), a.size)
    if any(i == "xlogx" for i in ids):
        phi = yg.from_id("xlogx")
        try:
            yg.make_psi_tilde(phi, yg.complement(phi))
            rep.flag("dilation-majorant-divergence:xlogx", False, "conjugate ratio judged bounded", 1)
        except DivergentRatio:
            rep.flag("dilation-majorant-divergence:xlogx", True, None, 1)


def suite_groupoid(cfg: SuiteConfig, rep: SuiteReport) -> None:
    for g in _groupoids(cfg):
        r = gm.validate_groupoid(g)
        rep.flag(f"axioms:{g.name}", r.valid, r.violations[:3], sum(r.checks.values()))
        r = gm.left_translation_bijective(g)
        rep.flag(f"translations-bijective:{g.name}", r.valid, r.violations[:3], g.n)
        for h in _haars(g):
            r = gm.validate_haar(g, h)
            rep.flag(f"haar-invariance:{g.name}:{h.name}", r.valid, r.violations[:3], sum(r.checks.values()))
    # negative control: a non-invariant weight must be rejected
    g = gm.pair_groupoid(2)
    bad = gm.validate_haar(g, gm.HaarSystem(np.array([1.0, 2.0, 1.0, 1.0]), "skewed", g))
    rep.flag("haar-negative-control:pair:2", not bad.valid, "skewed weights accepted", 1)
    # negative control: a corrupted product must be rejected
    z3 = gm.from_id("bundle:Z3")
    bad = gm.validate_groupoid(gm.corrupt_product(z3, (1, 1), (1, 2)))
    rep.flag("axioms-negative-control:bundle:Z3", "associativity" in bad.kinds(), "corruption not detected", 1)
    if cfg.inject_fault == "assoc":
        broken = gm.corrupt_product(z3, (1, 1), (1, 2))
        r = gm.validate_groupoid(broken)
        rep.flag("injected-fault:assoc", r.valid, r.violations[:3], sum(r.checks.values()))


def suite_norms(cfg: SuiteConfig, rep: SuiteReport) -> None:
    """Closed-form anchors: gauge norm of ``x^p`` is the p-norm; Orlicz norm of ``x^2`` is twice the 2-norm."""
    tol = default_tolerances()
    rng = suite_rng("norms", cfg.seed)
    count = 10 * cfg.trials
    lens = rng.integers(1, 65, size=count)
    vecs = [rng.normal(size=k) * 10.0 ** rng.uniform(-2, 2) for k in lens]
    a, w, seg, nseg = oz.flatten(vecs)
    for p in (1.5, 2.0, 3.0):
        phi = yg.power(p)
        got = oz.batch_gauge(phi, a, w, seg, nseg)
        ref = np.bincount(seg, a**p, nseg) ** (1 / p)
        rel = np.abs(got - ref) / ref
        i = int(np.argmax(rel))
        rep.identity(f"gauge-equals-p-norm:p={p:g}", rel[i], 1e-9, f"vector {i} of length {lens[i]}", count)
    got = oz.batch_amemiya(yg.power(2.0), a, w, seg, nseg)[0]
    ref = 2 * np.sqrt(np.bincount(seg, a * a, nseg))
    rel = np.abs(got - ref) / ref
    i = int(np.argmax(rel))
    rep.identity("orlicz-equals-twice-2-norm", rel[i], tol.relative, f"vector {i} of length {lens[i]}", count)
    # two anchors with hand values
    rep.identity("anchor:gauge(3,4)=5", abs(oz.gauge_norm(yg.power(2), [3.0, 4.0]) - 5.0), 1e-12, None, 1)
    rep.identity("anchor:orlicz(3,4)=10", abs(oz.orlicz_norm(yg.power(2), [3.0, 4.0]) - 10.0), 1e-9, None, 1)


def _all_phi_psi(ids) -> list:
    out = []
    for pid in ids:
        phi = yg.from_id(pid)
        out += [(pid, phi), ("conj:" + pid, yg.complement(phi))]
    return out


def _is_numeric(f: yg.YoungFunction) -> bool:
    # complement without a closed conjugate: every evaluation solves a root problem
    return f.name.startswith("conj:xlogx")


def suite_sandwich(cfg: SuiteConfig, rep: SuiteReport) -> None:
    """``||f||^0 <= ||f|| <= 2 ||f||^0`` fiber by fiber, relative slacks."""
    rng = suite_rng("sandwich", cfg.seed)
    for g in _groupoids(cfg):
        for h in _haars(g):
            for pid, f in _all_phi_psi(_phis(cfg, yg.ZOO_IDS)):
                t = max(10, cfg.trials // (20 if _is_numeric(f) else 4))
                V = random_rows(rng, t, g.n)
                g0 = _rows_norms(f, V, h, g, "gauge")
                o = _rows_norms(f, V, h, g, "orlicz")
                live = g0 > 0  # empty fibers of sparse rows: both norms are 0
                den = np.where(live, g0, 1.0)
                lower = np.where(live, _strict(o - g0, den), 0.0)
                upper = np.where(live, _strict(2 * g0 - o, den), 0.0)
                s, wit = _worst(np.minimum(lower, upper).ravel(), lambda i: f"row {i // len(g.units)} unit {g.units[i % len(g.units)]}")
                rep.add(f"sandwich:{g.name}:{h.name}:{pid}", s, 1e-8, wit, g0.size)


def suite_holder(cfg: SuiteConfig, rep: SuiteReport) -> None:
    """Hölder, Fenchel-Young and Jensen slacks."""
    tol = default_tolerances()
    rng = suite_rng("holder", cfg.seed)
    count = 10 * cfg.trials
    ids = _phis(cfg, yg.ZOO_IDS)
    for pid in ids:
        phi = yg.from_id(pid)
        psi = yg.complement(phi)
        n = count
        # Fenchel-Young, including equality points y = Phi'(x)
        x = 10.0 ** rng.uniform(-2, 1, size=n)
        y = 10.0 ** rng.uniform(-2, 1, size=n)
        y[: n // 10] = phi.right_derivative(x[: n // 10])
        fy = phi(x) + psi(y) - x * y
        s, wit = _worst(fy, lambda i: f"x={x[i]:.6g}, y={y[i]:.6g}")
        rep.add(f"fenchel-young:{pid}", s, tol.slack, wit, n)
        # Hölder: sum |f g| <= ||f||^0_Phi ||g||_Psi
        lens = rng.integers(1, 17, size=n)
        fs = [rng.normal(size=k) * 10.0 ** rng.uniform(-1, 1) for k in lens]
        gs = [rng.normal(size=k) * 10.0 ** rng.uniform(-1, 1) for k in lens]
        ws = [rng.choice([0.5, 1.0, 2.0], size=k) for k in lens]
        nf = oz.batch_gauge(phi, *oz.flatten(fs, ws))
        ng = oz.batch_amemiya(psi, *oz.flatten(gs, ws))[0]
        lhs = np.array([np.sum(np.abs(a * b) * w) for a, b, w in zip(fs, gs, ws)])
        sl = nf * ng - lhs
        s, wit = _worst(sl, lambda i: f"instance {i}, length {lens[i]}")
        rep.add(f"holder:{pid}", s, tol.slack, wit, len(lens))
        # Jensen for probability vectors
        m = n // 10
        vals = [10.0 ** rng.uniform(-1, 1) * np.abs(rng.normal(size=k)) for k in rng.integers(1, 9, size=m)]
        nus = [rng.dirichlet(np.ones(len(v))) for v in vals]
        js = np.array([oz.jensen_check(phi, v, nu) for v, nu in zip(vals, nus)])
        s, wit = _worst(js, lambda i: f"instance {i}")
        rep.add(f"jensen:{pid}", s, tol.slack, wit, m)


def suite_l1(cfg: SuiteConfig, rep: SuiteReport) -> None:
    """``||f^u||_1 <= d ||f^u||^0_Phi`` with ``d = sup_u ||chi_{G^u}||_Psi``."""
    tol = default_tolerances()
    rng = suite_rng("l1", cfg.seed)
    for g in _groupoids(cfg):
        for h in _haars(g):
            for pid in _phis(cfg, yg.ZOO_IDS):
                phi = yg.from_id(pid)
                psi = yg.complement(phi)
                d = oz.l1_embedding_constant(psi, g, h)
                t = max(10, cfg.trials // 4)
                V = random_rows(rng, t, g.n)
                g0 = _rows_norms(phi, V, h, g)
                a, w, seg, nseg = oz._rows_batch(V, h, g)
                l1 = np.bincount(seg, a * w, nseg).reshape(g0.shape)
                sl = _strict(d * g0 - l1, l1)
                s, wit = _worst(sl.ravel(), lambda i: f"row {i // len(g.units)}")
                rep.add(f"l1-embedding:{g.name}:{h.name}:{pid}", s, tol.slack, wit, g0.size)
    # anchor: the indicator of a 3-element fiber under x^2 has l1 norm 3 = sqrt(3) * sqrt(3)
    g = gm.pair_groupoid(3)
    d = oz.l1_embedding_constant(yg.complement(yg.power(2)), g, gm.counting_haar(g))
    rep.identity("anchor:l1-constant:pair:3:power:2", abs(d - np.sqrt(3.0)), 1e-8, f"d={d!r}", 1)


def suite_convolution(cfg: SuiteConfig, rep: SuiteReport) -> None:
    """Pair groupoid against matrix products, associativity, anchors."""
    rng = suite_rng("convolution", cfg.seed)
    worst, wit, cases = 0.0, None, 0
    for n in range(1, 7):
        g = gm.pair_groupoid(n)
        h = gm.counting_haar(g)
        eye = np.eye(g.n)
        for x in range(g.n):
            for y in range(g.n):
                got = ca.convolve(eye[x], eye[y], h).values.reshape(n, n)
                ref = eye[x].reshape(n, n) @ eye[y].reshape(n, n)
                dev = float(np.max(np.abs(got - ref)))
                cases += 1
                if dev > worst:
                    worst, wit = dev, f"pair:{n} deltas {g.label(x)}, {g.label(y)}"
    rep.identity("pair-matmul-exhaustive:n<=6", worst, 1e-12, wit, cases)
    worst, wit, cases = 0.0, None, 0
    per = max(1, cfg.trials // 200)
    for n in range(1, 33):
        g = gm.pair_groupoid(n)
        h = gm.counting_haar(g)
        for _ in range(per):
            A = rng.normal(size=(n, n))
            B = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            got = ca.convolve(A.ravel(), B.ravel(), h).values.reshape(n, n)
            dev = float(np.max(np.abs(got - A @ B)) / max(1.0, np.abs(A).max() * np.abs(B).max() * n))
            cases += 1
            if dev > worst:
                worst, wit = dev, f"pair:{n}"
    rep.identity("pair-matmul-random:n<=32", worst, 1e-12, wit, cases)
    for g in _groupoids(cfg):
        for h in _haars(g):
            t = max(5, cfg.trials // 20)
            F, G, H = (random_rows(rng, t, g.n) for _ in range(3))
            lhs = ca.convolve_rows(ca.convolve_rows(F, G, h), H, h)
            rhs = ca.convolve_rows(F, ca.convolve_rows(G, H, h), h)
            scale = np.maximum(1.0, np.abs(F).max(1) * np.abs(G).max(1) * np.abs(H).max(1) * g.n**2)
            dev = np.max(np.abs(lhs - rhs), axis=1) / scale
            rep.identity(f"associativity:{g.name}:{h.name}", dev.max(), 1e-12, f"triple {int(np.argmax(dev))}", t)
    if cfg.inject_fault == "assoc":
        broken = gm.corrupt_product(gm.from_id("bundle:Z3"), (1, 1), (1, 2))
        hb = gm.counting_haar(broken)
        eye = np.eye(broken.n)
        worst, wit = 0.0, None
        for x in range(broken.n):
            for y in range(broken.n):
                for z in range(broken.n):
                    lhs = ca.convolve(ca.convolve(eye[x], eye[y], hb), eye[z], hb).values
                    rhs = ca.convolve(eye[x], ca.convolve(eye[y], eye[z], hb), hb).values
                    dev = float(np.max(np.abs(lhs - rhs)))
                    if dev > worst:
                        worst, wit = dev, f"deltas {broken.label(x)}, {broken.label(y)}, {broken.label(z)}"
        rep.identity("injected-fault:assoc:convolution", worst, 1e-12, wit, broken.n**3)
    # anchors
    g = gm.pair_groupoid(2)
    h = gm.counting_haar(g)
    got = ca.convolve(np.array([1.0, 2, 3, 4]), np.array([0.0, 1, 1, 0]), h).values
    rep.identity("anchor:pair:2-swap-columns", np.max(np.abs(got - [2, 1, 4, 3])), 0.0, got.tolist(), 1)
    g = gm.from_id("bundle:Z2")
    h = gm.counting_haar(g)
    got = ca.convolve(np.array([1.0, 2.0]), np.array([3.0, 5.0]), h).values
    rep.identity("anchor:Z2-group-algebra", np.max(np.abs(got - [13.0, 11.0])), 0.0, got.tolist(), 1)


def suite_isometry(cfg: SuiteConfig, rep: SuiteReport) -> None:
    """``||L_x f||^0 = ||f||^0`` for every element, and translation covariance of convolution."""
    rng = suite_rng("isometry", cfg.seed)
    per = max(10, cfg.trials // 10)
    for g in _groupoids(cfg):
        for h in _haars(g):
            for pid in _phis(cfg, ("power:1.5", "npower:3", "xlogx", "cosh")):
                phi = yg.from_id(pid)
                worst, wit = 0.0, None
                for x in range(g.n):
                    du, ru = int(g.d[x]), int(g.r[x])
                    target, source = g.translation(x)
                    F = random_rows(rng, per, source.size)
                    # F[:, i] lives on G^{d(x)} in fiber order; L_x F on G^{r(x)}
                    moved = F[:, g.position[source]]
                    wd, wr = h.fiber_weights(du), h.fiber_weights(ru)
                    seg = np.repeat(np.arange(per), source.size)
                    a = oz.batch_gauge(phi, np.abs(F).ravel(), np.tile(wd, per), seg, per)
                    b = oz.batch_gauge(phi, np.abs(moved).ravel(), np.tile(wr, per), seg, per)
                    dev = np.max(np.abs(a - b) / a)
                    if dev > worst:
                        worst, wit = float(dev), f"x={g.label(x)}"
                rep.identity(f"isometry:{g.name}:{h.name}:{pid}", worst, 1e-12, wit, g.n * per)
            # covariance L_z(f*g) = (L_z f)*g on random pairs
            worst = 0.0
            for z in range(g.n):
                f = Section(g, random_rows(rng, 1, g.n)[0])
                k = Section(g, random_rows(rng, 1, g.n)[0])
                scale = max(1.0, np.abs(f.values).max() * np.abs(k.values).max() * g.n)
                ctx = ca.ConvolutionContext(g, h, yg.power(2), yg.complement(yg.power(2)))
                worst = max(worst, ca.translation_covariance_deviation(z, f, k, ctx) / scale)
            rep.identity(f"translation-covariance:{g.name}:{h.name}", worst, 1e-12, None, g.n)


def _ctx(g, h, pid, **kw):
    return ca.make_context(g, h, yg.from_id(pid), **kw)


def suite_banach(cfg: SuiteConfig, rep: SuiteReport) -> None:
    """``||f*g||^0 <= 2 ||f||_1 ||g||^0``, rescaled submultiplicativity, commutativity."""
    tol = default_tolerances()
    rng = suite_rng("banach", cfg.seed)
    for g in _groupoids(cfg):
        for h in _haars(g):
            for pid in _phis(cfg, DOUBLING_IDS + ("cosh",)):
                try:
                    ctx = _ctx(g, h, pid)
                except NotDelta2 as exc:
                    rep.skip(f"{g.name}:{h.name}:{pid}", str(exc))
                    continue
                F = random_rows(rng, cfg.trials, g.n)
                G = random_rows(rng, cfg.trials, g.n)
                r = ca.banach_algebra_bound_rows(F, G, ctx)
                s, wit = _worst(_strict(r["slack"], r["scale"]), lambda i: f"pair {i}")
                rep.add(f"convolution-bound:{g.name}:{h.name}:{pid}", s, tol.slack, wit, cfg.trials)
                s, wit = _worst(r["rescaled_slack"] / np.maximum(r["scale"], 1.0), lambda i: f"pair {i}")
                rep.add(f"rescaled-submultiplicative:{g.name}:{h.name}:{pid}", s, tol.slack, wit, cfg.trials)
        if g.is_group_bundle and g.is_abelian_bundle():
            h = gm.counting_haar(g)
            t = max(10, cfg.trials // 10)
            F, G = random_rows(rng, t, g.n), random_rows(rng, t, g.n)
            dev = np.abs(ca.convolve_rows(F, G, h) - ca.convolve_rows(G, F, h)).max()
            rep.identity(f"commutative:{g.name}", dev, 1e-12, None, t)
    s3 = gm.from_id("bundle:S3")
    w = ca.noncommuting_witness(_ctx(s3, gm.counting_haar(s3), "power:2"))
    rep.flag("noncommuting-witness:bundle:S3", w is not None, "no witness", 1)


def suite_convolvers(cfg: SuiteConfig, rep: SuiteReport) -> None:
    """Sampled ``||L_f|| <= ||f||_1`` and ``||R_F|| <= 2 K_F^2``."""
    tol = default_tolerances()
    rng = suite_rng("convolvers", cfg.seed)
    for g in _groupoids(cfg):
        for h in _haars(g):
            for pid in _phis(cfg, DOUBLING_IDS):
                ctx = _ctx(g, h, pid)
                probes = ca.probe_rows(g, rng, cfg.trials, complex_=True)
                den = oz.sup_gauge_rows(ctx.phi, probes, h, g)
                worst, wit, cases = np.inf, None, 0
                for j in range(3):
                    f = Section(g, random_rows(rng, 1, g.n)[0])
                    bound = oz.sup_l1(f, h)
                    est = ca.operator_norm_estimate(ca.left_convolver(f, ctx), ctx, probes, den).value
                    s = float(_strict(bound - est, bound))
                    cases += len(probes)
                    if s < worst:
                        worst, wit = s, f"f #{j}"
                rep.add(f"left-convolver:{g.name}:{h.name}:{pid}", worst, tol.slack, wit, cases)
                if pid not in POWER_IDS:
                    rep.skip(f"right-convolver:{g.name}:{h.name}:{pid}", "complement fails the doubling condition")
                    continue
                worst, wit, cases, convex = np.inf, None, 0, True
                Fs = [Section(g, random_rows(rng, 1, g.n, 0.0)[0]) for _ in range(2)]
                e = np.zeros(g.n)
                e[list(g.units)] = 1.0
                Fs.append(Section(g, e))
                for j, F in enumerate(Fs):
                    r = ca.right_convolver_bound_check(F, ctx, trials=0)
                    est = ca.operator_norm_estimate(ca.right_convolver(F, ctx), ctx, probes, den).value
                    s = float(_strict(r.bound - est, r.bound))
                    convex &= r.extra["tilde_convex"]
                    cases += len(probes)
                    if s < worst:
                        worst, wit = s, f"F #{j}, K_F={r.extra['K_F']:.6g}"
                rep.add(f"right-convolver:{g.name}:{h.name}:{pid}", worst, tol.slack, wit, cases)
                rep.flag(f"majorant-convex:{g.name}:{h.name}:{pid}", convex, "sampled majorant not midpoint convex", 1)
    # anchor: npower:2 on bundle:Z2,Z3 with F the indicator of the units gives K_F = sqrt 2
    g = gm.from_id("bundle:Z2,Z3")
    ctx = _ctx(g, gm.counting_haar(g), "npower:2")
    e = np.zeros(g.n)
    e[list(g.units)] = 1.0
    K, _ = ca.k_constant(Section(g, e), ctx)
    rep.identity("anchor:K_F=sqrt2", abs(K - np.sqrt(2.0)), 1e-9, f"K_F={K!r}", 1)


def suite_approx_identity(cfg: SuiteConfig, rep: SuiteReport) -> None:
    """Exact identity on finite groupoids, truncation and shrinking identities over a sampled base."""
    rng = suite_rng("approx_identity", cfg.seed)
    for g in _groupoids(cfg):
        for h in _haars(g):
            ctx = ca.ConvolutionContext(g, h, yg.power(2), yg.complement(yg.power(2)))
            e, _ = ca.approximate_identity(ctx, rng, trials=0)
            F = random_rows(rng, max(10, cfg.trials // 10), g.n)
            E = np.broadcast_to(e.values, F.shape)
            left = np.abs(ca.convolve_rows(E, F, h) - F).max()
            right = np.abs(ca.convolve_rows(F, E, h) - F).max()
            rep.identity(f"identity:{g.name}:{h.name}", max(left, right), 1e-12, None, len(F))
            L = cv.candidate(cv.left_convolution_operator(Section(g, F[0]), ctx), ctx, rng, trials=20)
            tr = cv.truncation_check(L, ctx, rng, trials=20)
            rep.identity(f"truncation-exact:{g.name}:{h.name}", tr.deviation, 1e-12, None, 1)
            rep.add(f"truncation-norm:{g.name}:{h.name}", tr.slack, default_tolerances().slack, None, 1)
    phi = yg.power(2)
    runs = [("z4-smooth", [[0, 1, 3], [0]]), ("z4-smooth", None), ("z2-linear", None), ("constant", None)]
    for name, filt in runs:
        fam = fl.load_family(name)
        ex = fl.shrinking_identity_experiment(fam, phi, filt, N=8)
        tag = f"{name}:{'default' if filt is None else filt}"
        rep.flag(f"shrinking-monotone:{tag}", ex.monotone, ex.errors.tolist(), len(ex.errors))
        rep.identity(f"shrinking-terminal:{tag}", ex.terminal, 1e-12, ex.errors.tolist(), 1)


def suite_ideals(cfg: SuiteConfig, rep: SuiteReport) -> None:
    """Invariant subbundles versus left ideals."""
    rng = suite_rng("ideals", cfg.seed)
    gs = _groupoids(cfg)
    n = max(200, cfg.trials // 5)
    gens = (idl.random_subbundle, idl.orbit_subbundle, idl.sparse_pattern_subbundle)
    agree, pos, witness = 0, 0, None
    module_dev = 0.0
    for i in range(n):
        g = gs[i % len(gs)]
        h = gm.counting_haar(g) if i % 2 == 0 else _density(g)
        ctx = ca.ConvolutionContext(g, h, yg.power(2), yg.complement(yg.power(2)))
        sub = gens[i % 3](g, rng)
        v = idl.ideal_invariance_equivalence(sub, ctx, trials=5, rng=rng)
        module_dev = max(module_dev, idl.module_closure_deviation(sub, rng, 2))
        agree += v.agree
        pos += v.invariant
        if not v.agree and witness is None:
            witness = v.counterexample
    rep.add("invariant-iff-left-ideal:random", agree - n, 0.0, witness, n)
    rep.identity("module-closure", module_dev, 1e-10, None, n)
    rep.flag("mix-of-verdicts", 0 < pos < n, f"{pos} of {n} invariant", n)
    # structured pair: pair groupoid rank pattern (1, 0) and the group bundle analogue
    g = gm.pair_groupoid(2)
    ctx = ca.ConvolutionContext(g, gm.counting_haar(g), yg.power(2), yg.complement(yg.power(2)))
    v = idl.ideal_invariance_equivalence(idl.Subbundle.from_vectors(g, {0: list(np.eye(2))}), ctx, rng=rng)
    rep.flag("pair:2-pattern-(1,0)-neither", (not v.invariant) and (not v.left_ideal), v.details["invariance"]["violations"][:1], 1)
    g = gm.from_id("bundle:Z2,Z3")
    ctx = ca.ConvolutionContext(g, gm.counting_haar(g), yg.power(2), yg.complement(yg.power(2)))
    v = idl.ideal_invariance_equivalence(idl.Subbundle.from_vectors(g, {0: list(np.eye(2))}), ctx, rng=rng)
    rep.flag("bundle:Z2,Z3-pattern-(1,0)-both", v.invariant and v.left_ideal, v.details, 1)
    for gid in ("pair:3", "transform:S3"):
        g = gm.from_id(gid)
        ctx = ca.ConvolutionContext(g, gm.counting_haar(g), yg.power(2), yg.complement(yg.power(2)))
        for sub in (idl.Subbundle.zero(g), idl.Subbundle.full(g)):
            v = idl.ideal_invariance_equivalence(sub, ctx, rng=rng)
            rep.flag(f"{sub.name}-bundle:{gid}", v.invariant and v.left_ideal, v.details, 1)


def _random_rep(g, ctx, rng, terms=None) -> cv.ARepresentation:
    k = terms or int(rng.integers(1, 4))
    return cv.represent(
        [(Section(g, random_rows(rng, 1, g.n)[0]), Section(g, random_rows(rng, 1, g.n)[0])) for _ in range(k)], ctx
    )


def suite_convolutor(cfg: SuiteConfig, rep: SuiteReport) -> None:
    """Convolutor relation, pairing bounds, well-definedness of ``phi_T``, module actions, sandwich."""
    tol = default_tolerances()
    rng = suite_rng("convolutor", cfg.seed)
    gids = cfg.groupoids or ("pair:2", "pair:3", "bundle:Z2,Z3", "bundle:S3", "transform:Z2on3")
    for gid in gids:
        g = gm.from_id(gid)
        for h in _haars(g):
            for pid in _phis(cfg, ("power:2", "npower:3")):
                ctx = _ctx(g, h, pid)
                tag = f"{g.name}:{h.name}:{pid}"
                t = max(10, cfg.trials // len(gids) // 4)
                # left convolutions are convolutors
                worst = 0.0
                for _ in range(t):
                    L = cv.ConvolutorCandidate(cv.left_convolution_operator(Section(g, random_rows(rng, 1, g.n)[0]), ctx), 0.0)
                    worst = max(worst, cv.is_convolutor(L, ctx, trials=1, rng=rng, exhaustive_limit=9).deviation)
                rep.identity(f"left-convolution-is-convolutor:{tag}", worst, 1e-10, None, t)
                for name, op in (("identity", cv.identity_operator(ctx)),
                                 ("range-multiplier", cv.range_multiplier(rng.normal(size=len(g.units)), ctx))):
                    r = cv.is_convolutor(cv.ConvolutorCandidate(op, 0.0), ctx, trials=5, rng=rng)
                    rep.identity(f"{name}-is-convolutor:{tag}", r.deviation, 1e-10, r.witness, r.pairs)
                # pairing bound
                X, Y = random_rows(rng, t, g.n), random_rows(rng, t, g.n)
                sl = [cv.pairing_bound_slack(Section(g, a), Section(g, b), ctx) for a, b in zip(X, Y)]
                s, wit = _worst(np.array(sl), lambda i: f"pair {i}")
                rep.add(f"pairing-bound:{tag}", s, tol.slack, wit, t)
                # phi_T for a random left convolution
                k = Section(g, random_rows(rng, 1, g.n)[0])
                reps = [_random_rep(g, ctx, rng) for _ in range(t)]
                T = cv.candidate(cv.left_convolution_operator(k, ctx), ctx, rng, trials=50)
                sw = cv.norm_sandwich_check(T, ctx, reps, rng, lower_trials=10)
                costs = np.array([r.cost for r in reps])
                s, wit = _worst(_strict(sw.upper_slacks, 2 * sw.norm_estimate * costs), lambda i: f"rep {i}")
                rep.add(f"sandwich-upper:{tag}", s, tol.slack, wit, t)
                rep.add(f"sandwich-lower:{tag}", -sw.lower_gap / sw.norm_estimate, 1e-6, f"best {sw.lower_best:.6g}", t)
                nulls = [n for _ in range(max(3, t // 10)) for n in cv.null_representations(ctx, rng)]
                dev = max(float(np.max(np.abs(cv.phi_T(T, n, ctx)))) for n in nulls)
                rep.identity(f"null-representation:{tag}", dev, tol.slack, None, len(nulls))
                split = max(float(np.max(np.abs(cv.phi_T(T, r, ctx) - cv.phi_T(T, cv.split_representation(r, ctx, rng), ctx))))
                            / max(r.cost, 1.0) for r in reps[: max(3, t // 10)])
                rep.identity(f"well-defined-under-splitting:{tag}", split, tol.slack, None, max(3, t // 10))
                # phi_{L_k}(h) = <k, h>
                dev = max(float(np.max(np.abs(cv.phi_T(T, r, ctx) - cv.pairing(k, r.value, ctx)))) / max(r.cost, 1.0)
                          for r in reps[: max(3, t // 10)])
                rep.identity(f"phi-of-left-convolution:{tag}", dev, tol.slack, None, max(3, t // 10))
                # module actions
                mdev, rdev, cslack = 0.0, 0.0, np.inf
                for r in reps[: max(3, t // 10)]:
                    b = rng.normal(size=len(g.units))
                    d = cv.module_action_deviation(b, r, ctx)
                    scale = max(1.0, np.abs(r.value.values).max() * np.abs(b).max())
                    mdev = max(mdev, d["bh"] / scale, d["hb"] / scale)
                    cslack = min(cslack, min(d["bh_cost_slack"], d["hb_cost_slack"]) / max(r.cost * np.abs(b).max(), 1e-300))
                    # floating point cannot resolve 1e-12 absolutely once phi_T reaches 1e4 and up
                    mag = max(1.0, float(np.max(np.abs(cv.phi_T(T, r, ctx) * b))))
                    rdev = max(rdev, cv.right_module_deviation(T, b, r, ctx) / mag)
                rep.identity(f"module-actions-pointwise:{tag}", mdev, 1e-12, None, max(3, t // 10))
                rep.add(f"module-actions-cost:{tag}", cslack, tol.slack, None, max(3, t // 10))
                rep.identity(f"right-module-identity:{tag}", rdev, 1e-12, None, max(3, t // 10))
    # lower sandwich anchor: identity on bundle:Z2 with x^2
    g = gm.from_id("bundle:Z2")
    ctx = _ctx(g, gm.counting_haar(g), "power:2")
    T = cv.candidate(cv.identity_operator(ctx), ctx, rng, trials=50)
    sw = cv.norm_sandwich_check(T, ctx, [_random_rep(g, ctx, rng) for _ in range(20)], rng)
    rep.add("anchor:identity-norm-one", -abs(sw.norm_estimate - 1.0), 1e-12, sw.norm_estimate, 1)
    rep.add("anchor:lower-sandwich-identity:bundle:Z2", sw.lower_best - (1.0 - 1e-6), 0.0, sw.lower_best, 1)
    # the zero operator
    Z = cv.candidate(cv.zero_operator(ctx), ctx, rng, trials=5)
    sw = cv.norm_sandwich_check(Z, ctx, [_random_rep(g, ctx, rng) for _ in range(5)], rng)
    rep.add("zero-operator-sandwich", sw.min_upper_slack, tol.slack, None, 5)
    # a multiplier by a function of d is not a convolutor on the pair groupoid
    g = gm.pair_groupoid(2)
    ctx = _ctx(g, gm.counting_haar(g), "power:2")
    w = cv.find_non_convolutor_witness(ctx, rng)
    rep.flag("non-convolutor-witness:pair:2", w is not None, "no witness", 1)


def suite_field(cfg: SuiteConfig, rep: SuiteReport) -> None:
    """Sampled continuity of norm profiles and of translations over a parameter grid."""
    phi = yg.power(2)
    fam = fl.load_family("z2-linear")
    r = fl.norm_continuity_profile(fam, phi, "gauge", N=32)
    rep.identity("closed-form:z2-linear", r.closed_form_error, 1e-9, None, 33 + 65)
    rep.add("refinement-ratio:z2-linear:gauge", 0.75 - r.ratio, 0.0, f"ratio={r.ratio:.6g}", 2)
    s = fl.strong_continuity_profile(fam, phi, N=32)
    rep.identity("strong-equals-norm-difference:z2-linear",
                 np.max(np.abs(s.coarse.adjacent_diff - r.coarse.adjacent_diff)), 1e-12, None, 33)
    rep.add("refinement-ratio:z2-linear:strong", 0.75 - s.ratio, 0.0, f"ratio={s.ratio:.6g}", 2)
    fam = fl.load_family("z4-smooth")
    for which in ("gauge", "orlicz"):
        r = fl.norm_continuity_profile(fam, phi, which, N=32)
        rep.add(f"refinement-ratio:z4-smooth:{which}", 0.75 - r.ratio, 0.0, f"ratio={r.ratio:.6g}", 2)
    s = fl.strong_continuity_profile(fam, phi, N=32)
    rep.add("refinement-ratio:z4-smooth:strong", 0.75 - s.ratio, 0.0, f"ratio={s.ratio:.6g}", 2)
    fam = fl.load_family("constant")
    r = fl.norm_continuity_profile(fam, phi, "gauge", N=32)
    rep.identity("constant-family-modulus", max(r.coarse.modulus, r.fine.modulus), 1e-12, None, 2)
    rep.identity("closed-form:constant", r.closed_form_error, 1e-9, None, 2)
    s = fl.strong_continuity_profile(fam, phi, N=32)
    rep.identity("constant-family-strong", max(s.coarse.modulus, s.fine.modulus), 1e-12, None, 2)
    for name in fl.PRESETS:
        rep.flag(f"family-valid:{name}", fl.load_family(name).validate(8), "Haar validation failed", 1)


SUITES: Dict[str, Callable[[SuiteConfig, SuiteReport], None]] = {
    "approx_identity": suite_approx_identity,
    "banach": suite_banach,
    "convolution": suite_convolution,
    "convolutor": suite_convolutor,
    "convolvers": suite_convolvers,
    "field": suite_field,
    "groupoid": suite_groupoid,
    "holder": suite_holder,
    "ideals": suite_ideals,
    "isometry": suite_isometry,
    "l1": suite_l1,
    "norms": suite_norms,
    "sandwich": suite_sandwich,
    "young": suite_young,
}

# module names resolve to the suites that exercise them
GROUPS = {
    "young": ["young"],
    "groupoid": ["groupoid"],
    "orlicz": ["holder", "l1", "norms", "sandwich"],
    "convalg": ["approx_identity", "banach", "convolution", "convolvers", "isometry"],
    "ideals": ["ideals"],
    "convolutor": ["convolutor"],
    "fieldlab": ["field"],
}


def resolve(selector: str) -> List[str]:
    from .errors import ConfigError

    if selector == "all":
        return sorted(SUITES)
    if selector in SUITES:
        return [selector]
    if selector in GROUPS:
        return sorted(GROUPS[selector])
    raise ConfigError(f"unknown suite {selector!r}; choose from all, {', '.join(sorted(set(SUITES) | set(GROUPS)))}")


def run_suite(name: str, cfg: SuiteConfig) -> SuiteReport:
    gids = list(cfg.groupoids or gm.ZOO_IDS)
    rep = SuiteReport(name, cfg.seed, cfg.trials, gids, list(cfg.phis or []))
    t0 = time.perf_counter()
    SUITES[name](cfg, rep)
    rep.wall_time_s = round(time.perf_counter() - t0, 3)
    return rep


def _run_pair(args) -> SuiteReport:
    return run_suite(*args)


def run_suites(selector: str, cfg: SuiteConfig, jobs: int = 1) -> List[SuiteReport]:
    """Run the selected suites; results come back ordered by suite name."""
    names = resolve(selector)
    if jobs > 1 and len(names) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_run_pair, [(n, cfg) for n in names]))
    else:
        reports = [run_suite(n, cfg) for n in names]
    return sorted(reports, key=lambda r: r.suite)
