"""Subbundles of the section space, invariance under translation, and left ideals.

A subbundle assigns to every unit ``u`` a subspace ``I(u)`` of functions on the
fiber ``G^u``.  The sections with ``f^u in I(u)`` for all ``u`` form a module
over functions on the units, and that module is a left ideal exactly when the
subbundle is carried into itself by every left translation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .config import TOL
from .convalg import convolve, left_conv_matrix
from .groupoid import FiniteGroupoid, ValidationReport
from .orlicz import Section


@dataclass(frozen=True, eq=False)
class Subbundle:
    """Per-unit orthonormal bases; ``bases[u]`` has shape ``(len(G^u), dim_u)``."""

    groupoid: FiniteGroupoid
    bases: Dict[int, np.ndarray]
    name: str = "subbundle"

    @classmethod
    def from_vectors(cls, g: FiniteGroupoid, vectors: dict, name: str = "subbundle", rtol: float = 1e-10):
        """Build from spanning vectors per unit (missing units get the zero space).

        The vectors are orthonormalised by an SVD; dependent
        vectors are dropped.
        """
        bases = {}
        for u in g.units:
            m = g.fiber(u).size
            vs = [np.asarray(v, dtype=complex if np.iscomplexobj(v) else float) for v in vectors.get(u, [])]
            if vs and any(v.shape != (m,) for v in vs):
                raise ValueError(f"vector length mismatch on fiber {u}")
            bases[u] = _orthonormal(np.array(vs).T if vs else np.zeros((m, 0)), rtol)
        return cls(g, bases, name)

    @classmethod
    def zero(cls, g: FiniteGroupoid):
        return cls.from_vectors(g, {}, "zero")

    @classmethod
    def full(cls, g: FiniteGroupoid):
        return cls(g, {u: np.eye(g.fiber(u).size) for u in g.units}, "full")

    def dim(self, u: int) -> int:
        return self.bases[u].shape[1]

    @property
    def dims(self) -> tuple:
        return tuple(self.dim(u) for u in self.groupoid.units)

    def residual(self, u: int, v: np.ndarray) -> float:
        """Euclidean distance from ``v`` to ``I(u)``."""
        Q = self.bases[u]
        v = np.asarray(v)
        return float(np.linalg.norm(v - Q @ (Q.conj().T @ v)))

    def contains_section(self, f: Section) -> float:
        return max(self.residual(u, f.fiber(u).values) for u in self.groupoid.units)

    def random_member(self, rng, complex_: bool = False) -> Section:
        parts = {}
        for u in self.groupoid.units:
            c = rng.normal(size=self.dim(u))
            if complex_:
                c = c + 1j * rng.normal(size=self.dim(u))
            parts[u] = self.bases[u] @ c
        return Section.from_fibers(self.groupoid, parts)

    def to_dict(self) -> dict:
        return {
            "groupoid": self.groupoid.name,
            "name": self.name,
            "bases": {str(u): np.real_if_close(self.bases[u].T).tolist() for u in self.groupoid.units},
        }


def _orthonormal(A: np.ndarray, rtol: float) -> np.ndarray:
    # SVD rather than plain QR so that rank is decided reliably
    if A.shape[1] == 0:
        return A.astype(float)
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    if s[0] == 0:
        return np.zeros((A.shape[0], 0))
    return U[:, : int(np.sum(s > rtol * s[0]))]


def module_closure_deviation(sub: Subbundle, rng, trials: int = 5) -> float:
    """Residual of ``b(r(x)) f(x)`` for random ``b`` on units and ``f`` in the bundle."""
    worst = 0.0
    for _ in range(trials):
        f = sub.random_member(rng)
        b = rng.normal(size=len(sub.groupoid.units))
        worst = max(worst, sub.contains_section(f.scale_units(b)))
    return worst


def is_invariant(sub: Subbundle, ctx=None, tol: float = TOL.projection) -> ValidationReport:
    """Check ``L_x I(d(x)) in I(r(x))`` for every element ``x`` on every basis vector."""
    g = sub.groupoid
    rep = ValidationReport(f"invariance of {sub.name} on {g.name}")
    worst = 0.0
    for x in range(g.n):
        du, ru = int(g.d[x]), int(g.r[x])
        target, source = g.translation(x)
        perm = g.position[source]
        for j in range(sub.dim(du)):
            moved = sub.bases[du][perm, j]
            res = sub.residual(ru, moved)
            worst = max(worst, res)
            if res > tol:
                rep.fail("translation", g.label(x), f"basis vector {j} of I({g.label(du)}) leaves I({g.label(ru)}) by {res:.3g}")
    rep.checks["translation"] = g.n
    rep.notes.append(f"max residual {worst:.3g}")
    return rep


def is_left_ideal(sub: Subbundle, ctx, trials: int = 20, rng=None, tol: float = TOL.projection,
                  exhaustive_limit: int = 64) -> ValidationReport:
    """Check ``f * g`` stays in the bundle for ``g`` in the bundle.

    Uses every delta section ``f`` (exhaustive) on groupoids with at most
    ``exhaustive_limit`` elements, plus ``trials`` random pairs.
    """
    g = sub.groupoid
    rng = rng or np.random.default_rng(0)
    rep = ValidationReport(f"left ideal test of {sub.name} on {g.name}")
    worst = 0.0
    # the bundle is spanned by basis vectors placed on single fibers
    gens = []
    for u in g.units:
        for j in range(sub.dim(u)):
            gens.append((u, j, Section.from_fibers(g, {u: sub.bases[u][:, j]})))
    if g.n <= exhaustive_limit:
        for x in range(g.n):
            M = left_conv_matrix(np.eye(g.n)[x], ctx)
            for u, j, s in gens:
                res = sub.contains_section(Section(g, M @ s.values))
                worst = max(worst, res)
                if res > tol:
                    rep.fail("delta", f"{g.label(x)} * I({g.label(u)})[{j}]", f"residual {res:.3g}")
    for _ in range(trials):
        f = Section(g, rng.normal(size=g.n))
        h = sub.random_member(rng)
        res = sub.contains_section(convolve(f, h, ctx))
        worst = max(worst, res)
        if res > tol:
            rep.fail("random", "random pair", f"residual {res:.3g}")
    rep.checks["delta"] = g.n * len(gens) if g.n <= exhaustive_limit else 0
    rep.checks["random"] = trials
    rep.notes.append(f"max residual {worst:.3g}")
    return rep


@dataclass
class EquivalenceVerdict:
    invariant: bool
    left_ideal: bool
    counterexample: Optional[dict] = None
    details: dict = field(default_factory=dict)

    @property
    def agree(self) -> bool:
        return self.invariant == self.left_ideal


def ideal_invariance_equivalence(sub: Subbundle, ctx, trials: int = 20, rng=None) -> EquivalenceVerdict:
    """Run both tests; on disagreement keep the bundle for inspection."""
    inv = is_invariant(sub, ctx)
    ide = is_left_ideal(sub, ctx, trials, rng)
    v = EquivalenceVerdict(inv.valid, ide.valid)
    v.details = {"invariance": inv.to_dict(), "ideal": ide.to_dict()}
    if not v.agree:
        v.counterexample = sub.to_dict()
    return v


def random_subbundle(g: FiniteGroupoid, rng, name: str = "random") -> Subbundle:
    """Uniform per-fiber dimension, Gaussian spanning vectors."""
    vectors = {}
    for u in g.units:
        m = g.fiber(u).size
        k = int(rng.integers(0, m + 1))
        vectors[u] = list(rng.normal(size=(k, m)))
    return Subbundle.from_vectors(g, vectors, name)


def orbit_subbundle(g: FiniteGroupoid, rng, seeds: int = 1, name: str = "orbit") -> Subbundle:
    """Span of all translates of a few random fiber vectors; invariant by construction.

    Translates of translates are translates, so the span of the orbit
    ``{L_x v : d(x) = u}`` is carried into itself.
    """
    vectors = {u: [] for u in g.units}
    for _ in range(seeds):
        u0 = int(rng.choice(g.units))
        v = rng.normal(size=g.fiber(u0).size)
        for x in g.cofiber(u0):
            target, source = g.translation(int(x))
            vectors[int(g.r[x])].append(v[g.position[source]])
    return Subbundle.from_vectors(g, vectors, name)


def sparse_pattern_subbundle(g: FiniteGroupoid, rng, name: str = "pattern") -> Subbundle:
    """Each fiber gets either the zero space or the full space; often non-invariant."""
    vectors = {}
    for u in g.units:
        m = g.fiber(u).size
        vectors[u] = list(np.eye(m)) if rng.random() < 0.5 else []
    return Subbundle.from_vectors(g, vectors, name)
