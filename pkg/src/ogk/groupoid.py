"""Finite groupoids, Haar systems and a constructor zoo.

Elements are dense integer ids ``0..N-1``.  The product is a dict keyed by
composable pairs ``(x, y)`` with ``d(x) == r(y)``.  The discrete topology is
assumed throughout, so every continuity axiom holds trivially; validators
record that fact instead of skipping it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .config import TOL
from .errors import ConfigError, UnknownUnit

CONTINUITY_NOTE = "continuity axioms: trivially satisfied (discrete unit space)"
SECOND_COUNTABLE_NOTE = "second countability: vacuous for finite groupoids"


@dataclass(frozen=True, eq=False)
class FiniteGroupoid:
    r: np.ndarray
    d: np.ndarray
    inv: np.ndarray
    product: dict
    units: tuple
    name: str = "groupoid"
    labels: Optional[tuple] = None

    @property
    def n(self) -> int:
        return len(self.r)

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"FiniteGroupoid({self.name!r}, elements={self.n}, units={len(self.units)})"

    def label(self, x: int) -> str:
        return self.labels[x] if self.labels else str(x)

    def mul(self, x: int, y: int) -> int:
        return self.product[(x, y)]

    @cached_property
    def unit_index(self) -> dict:
        return {u: i for i, u in enumerate(self.units)}

    @cached_property
    def _fibers(self) -> dict:
        return {u: np.flatnonzero(self.r == u) for u in self.units}

    @cached_property
    def _cofibers(self) -> dict:
        return {u: np.flatnonzero(self.d == u) for u in self.units}

    def fiber(self, u: int) -> np.ndarray:
        """``G^u = r^{-1}(u)`` in ascending element order."""
        try:
            return self._fibers[u]
        except KeyError:
            raise UnknownUnit(f"{u} is not a unit of {self.name}") from None

    def cofiber(self, u: int) -> np.ndarray:
        """``G_u = d^{-1}(u)``."""
        try:
            return self._cofibers[u]
        except KeyError:
            raise UnknownUnit(f"{u} is not a unit of {self.name}") from None

    @cached_property
    def position(self) -> np.ndarray:
        """Index of each element inside its range fiber."""
        pos = np.empty(self.n, dtype=np.int64)
        for u in self.units:
            fib = self.fiber(u)
            pos[fib] = np.arange(fib.size)
        return pos

    @cached_property
    def unit_of(self) -> np.ndarray:
        """Dense unit index ``0..len(units)-1`` of ``r(x)``, for segment sums."""
        idx = np.empty(self.n, dtype=np.int64)
        for i, u in enumerate(self.units):
            idx[self.fiber(u)] = i
        return idx

    @property
    def is_group_bundle(self) -> bool:
        return bool(np.all(self.r == self.d))

    def is_abelian_bundle(self) -> bool:
        if not self.is_group_bundle:
            return False
        return all(self.product[(x, y)] == self.product[(y, x)] for (x, y) in self.product)

    @cached_property
    def conv_triples(self) -> tuple:
        """Arrays ``(X, Y, Z)`` listing every ``y in G^{r(x)}`` with ``z = y^{-1} x``."""
        xs, ys, zs = [], [], []
        for x in range(self.n):
            for y in self.fiber(int(self.r[x])):
                xs.append(x)
                ys.append(int(y))
                zs.append(self.product[(int(self.inv[y]), x)])
        return (np.array(xs, dtype=np.int64), np.array(ys, dtype=np.int64), np.array(zs, dtype=np.int64))

    def translation(self, x: int) -> tuple:
        """``(target, source)`` with ``target = G^{r(x)}`` and ``source[i] = x^{-1} target[i]``."""
        target = self.fiber(int(self.r[x]))
        xi = int(self.inv[x])
        source = np.array([self.product[(xi, int(z))] for z in target], dtype=np.int64)
        return target, source


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    subject: str
    checks: dict = field(default_factory=dict)  # check name -> number of cases examined
    violations: list = field(default_factory=list)  # (kind, witness, detail)
    notes: list = field(default_factory=list)
    max_witnesses: int = 25
    _counts: dict = field(default_factory=dict)

    def fail(self, kind: str, witness, detail: str = "") -> None:
        self._counts[kind] = self._counts.get(kind, 0) + 1
        if self._counts[kind] <= self.max_witnesses:
            self.violations.append((kind, witness, detail))

    @property
    def valid(self) -> bool:
        return not self._counts

    def count(self, kind: str) -> int:
        return self._counts.get(kind, 0)

    def kinds(self) -> set:
        return set(self._counts)

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "valid": self.valid,
            "checks": dict(self.checks),
            "violation_counts": dict(sorted(self._counts.items())),
            "violations": [
                {"kind": k, "witness": list(w) if isinstance(w, tuple) else w, "detail": d}
                for k, w, d in self.violations
            ],
            "notes": list(self.notes),
        }


def validate_groupoid(g: FiniteGroupoid) -> ValidationReport:
    """Exhaustive check of the groupoid axioms; never raises."""
    rep = ValidationReport(g.name)
    n = g.n
    units = set(g.units)
    if not (len(g.d) == len(g.inv) == n):
        rep.fail("shape", (len(g.r), len(g.d), len(g.inv)), "r, d, inv lengths differ")
        return rep
    for x in range(n):
        if not (0 <= g.r[x] < n and 0 <= g.d[x] < n and 0 <= g.inv[x] < n):
            rep.fail("shape", x, "id out of range")
    if not rep.valid:
        return rep

    for u in units:
        if g.r[u] != u or g.d[u] != u:
            rep.fail("unit", u, "r(u) = d(u) = u fails")
    for x in range(n):
        if g.r[x] not in units or g.d[x] not in units:
            rep.fail("unit", x, "r(x) or d(x) is not a unit")
    rep.checks["units"] = len(units)

    for x in range(n):
        xi = int(g.inv[x])
        if g.inv[xi] != x:
            rep.fail("involution", x, "(x^-1)^-1 != x")
        if g.r[xi] != g.d[x] or g.d[xi] != g.r[x]:
            rep.fail("involution", x, "r(x^-1) != d(x)")
    rep.checks["involution"] = n

    expected = {(x, y) for x in range(n) for y in range(n) if g.d[x] == g.r[y]}
    keys = set(g.product)
    for pair in sorted(expected - keys):
        rep.fail("composability", pair, "composable pair missing from product")
    for pair in sorted(keys - expected):
        rep.fail("composability", pair, "product defined on non-composable pair")
    rep.checks["composability"] = len(expected)

    for (x, y), xy in sorted(g.product.items()):
        if not (0 <= xy < n) or g.r[xy] != g.r[x] or g.d[xy] != g.d[y]:
            rep.fail("range/domain", (x, y), "r(xy) = r(x), d(xy) = d(y) fails")
    if not rep.valid:
        return rep

    mul = g.product
    triples = 0
    for (x, y), xy in sorted(mul.items()):
        for z in g.fiber(int(g.d[y])):
            z = int(z)
            triples += 1
            if mul[(xy, z)] != mul[(x, mul[(y, z)])]:
                rep.fail("associativity", (x, y, z), "(xy)z != x(yz)")
    rep.checks["associativity"] = triples

    for (x, y), xy in sorted(mul.items()):
        xi = int(g.inv[x])
        if mul.get((xi, xy)) != y:
            rep.fail("cancellation", (x, y), "x^-1 (xy) != y")
        yi = int(g.inv[y])
        if mul.get((xy, yi)) != x:
            rep.fail("cancellation", (x, y), "(xy) y^-1 != x")
    for x in range(n):
        if mul.get((x, int(g.d[x]))) != x or mul.get((int(g.r[x]), x)) != x:
            rep.fail("identity", x, "x d(x) = x = r(x) x fails")
        if mul.get((x, int(g.inv[x]))) != g.r[x]:
            rep.fail("identity", x, "x x^-1 != r(x)")
    rep.checks["cancellation"] = len(mul)
    rep.notes.extend([CONTINUITY_NOTE, SECOND_COUNTABLE_NOTE])
    return rep


def left_translation_bijective(g: FiniteGroupoid) -> ValidationReport:
    """``y -> xy`` must map ``G^{d(x)}`` bijectively onto ``G^{r(x)}``."""
    rep = ValidationReport(f"{g.name}: left translation")
    for x in range(g.n):
        image = sorted(g.product[(x, int(y))] for y in g.fiber(int(g.d[x])))
        if image != g.fiber(int(g.r[x])).tolist():
            rep.fail("translation", x, "not a bijection of fibers")
    rep.checks["translation"] = g.n
    return rep


# ---------------------------------------------------------------------------
# Haar systems


@dataclass(frozen=True, eq=False)
class HaarSystem:
    """``weights[x] = lambda^{r(x)}({x})``; each element sits in exactly one fiber."""

    weights: np.ndarray
    name: str = "haar"
    groupoid: Optional[FiniteGroupoid] = None

    def fiber_weights(self, u: int, g: Optional[FiniteGroupoid] = None) -> np.ndarray:
        g = g or self.groupoid
        if g is None:
            raise ValueError("Haar system is not attached to a groupoid")
        return self.weights[g.fiber(u)]

    def fiber_mass(self, g: Optional[FiniteGroupoid] = None) -> np.ndarray:
        """``lambda^u(G)`` per unit, in ``g.units`` order."""
        g = g or self.groupoid
        return np.bincount(g.unit_of, weights=self.weights, minlength=len(g.units))

    def unit_weights(self, g: Optional[FiniteGroupoid] = None) -> np.ndarray:
        """``lambda^u({u})`` per unit."""
        g = g or self.groupoid
        return self.weights[np.array(g.units)]

    @property
    def is_integer(self) -> bool:
        return bool(np.all(self.weights == np.round(self.weights)))


def counting_haar(g: FiniteGroupoid) -> HaarSystem:
    return HaarSystem(np.ones(g.n), "counting", g)


def haar_from_density(g: FiniteGroupoid, rho) -> HaarSystem:
    """Left invariant system ``lambda^u({z}) = rho(d(z))`` from a positive unit density.

    ``rho`` is a mapping unit -> weight or a sequence aligned with ``g.units``.
    """
    if isinstance(rho, dict):
        dens = np.array([float(rho[u]) for u in g.units])
    else:
        dens = np.asarray(rho, dtype=float)
    order = {u: i for i, u in enumerate(g.units)}
    return HaarSystem(dens[[order[int(u)] for u in g.d]], "density", g)


def haar_from_fibers(g: FiniteGroupoid, per_unit: dict) -> HaarSystem:
    """Build from ``{unit: [weights in fiber order]}`` (unit keys may be str)."""
    w = np.full(g.n, np.nan)
    for key, vals in per_unit.items():
        u = int(key)
        fib = g.fiber(u)
        vals = np.asarray(vals, dtype=float)
        if vals.shape != fib.shape:
            raise ConfigError(f"unit {u}: expected {fib.size} weights, got {vals.size}")
        w[fib] = vals
    if np.any(np.isnan(w)):
        missing = sorted({int(g.r[x]) for x in np.flatnonzero(np.isnan(w))})
        raise ConfigError(f"Haar weights missing for units {missing}")
    return HaarSystem(w, "custom", g)


def validate_haar(g: FiniteGroupoid, h: HaarSystem, atol: float = TOL.haar) -> ValidationReport:
    """Positivity on every fiber and exact left invariance.

    Left invariance in delta-function form: ``lambda^{d(x)}(x^{-1} z) =
    lambda^{r(x)}(z)`` for every ``x`` and ``z in G^{r(x)}``.  Integer weights
    are compared exactly.
    """
    rep = ValidationReport(f"{g.name}: {h.name}")
    w = h.weights
    if w.shape != (g.n,):
        rep.fail("shape", w.shape, "one weight per element expected")
        return rep
    for x in np.flatnonzero(~(w > 0)):
        rep.fail("support", int(x), f"weight {w[x]!r} not positive")
    tol = 0.0 if h.is_integer else atol
    cases = 0
    for x in range(g.n):
        target, source = g.translation(x)
        cases += target.size
        for z, s in zip(target.tolist(), source.tolist()):
            if abs(w[s] - w[z]) > tol:
                rep.fail("invariance", (x, z), f"lambda(x^-1 z)={w[s]:g} vs lambda(z)={w[z]:g}")
    rep.checks["support"] = g.n
    rep.checks["invariance"] = cases
    rep.notes.append("axiom (ii), continuity of u -> lambda(f)(u): " + CONTINUITY_NOTE.split(": ")[1])
    return rep


# ---------------------------------------------------------------------------
# groups


def cyclic_table(n: int) -> np.ndarray:
    a = np.arange(n)
    return (a[:, None] + a[None, :]) % n


def _perm_table(perms: Sequence[tuple]) -> np.ndarray:
    index = {p: i for i, p in enumerate(perms)}
    m = len(perms)
    t = np.empty((m, m), dtype=np.int64)
    for i, p in enumerate(perms):
        for j, q in enumerate(perms):
            t[i, j] = index[tuple(p[k] for k in q)]  # (p o q)(k) = p(q(k))
    return t


def symmetric_perms(k: int) -> list:
    return list(itertools.permutations(range(k)))


def symmetric_table(k: int = 3) -> np.ndarray:
    return _perm_table(symmetric_perms(k))


def klein_table() -> np.ndarray:
    a = np.arange(4)
    return a[:, None] ^ a[None, :]


def group_table(name: str) -> np.ndarray:
    """``Z<n>``, ``S3``, ``S4`` or ``V4``."""
    key = name.strip().upper()
    if key.startswith("Z") and key[1:].isdigit() and int(key[1:]) >= 1:
        return cyclic_table(int(key[1:]))
    if key in ("S3", "S4"):
        return symmetric_table(int(key[1]))
    if key == "V4":
        return klein_table()
    raise ConfigError(f"unknown group {name!r}")


def _identity_and_inverse(table: np.ndarray) -> tuple:
    m = table.shape[0]
    ident = next(e for e in range(m) if np.array_equal(table[e], np.arange(m)))
    inv = np.array([int(np.flatnonzero(table[a] == ident)[0]) for a in range(m)])
    return ident, inv


# ---------------------------------------------------------------------------
# constructors


def pair_groupoid(n: int) -> FiniteGroupoid:
    """``S x S`` on ``S = {1..n}`` with ``(a,b)(b,c) = (a,c)``; id of ``(a,b)`` is ``(a-1)n + (b-1)``."""
    if n < 1:
        raise ConfigError("pair groupoid needs n >= 1")
    ids = lambda a, b: a * n + b  # noqa: E731  (0-based internally)
    r = np.array([ids(a, a) for a in range(n) for _ in range(n)])
    d = np.array([ids(b, b) for _ in range(n) for b in range(n)])
    inv = np.array([ids(b, a) for a in range(n) for b in range(n)])
    product = {(ids(a, b), ids(b, c)): ids(a, c) for a in range(n) for b in range(n) for c in range(n)}
    labels = tuple(f"({a + 1},{b + 1})" for a in range(n) for b in range(n))
    units = tuple(ids(a, a) for a in range(n))
    return FiniteGroupoid(r, d, inv, product, units, f"pair:{n}", labels)


def group_bundle(tables: Sequence, names: Optional[Sequence[str]] = None) -> FiniteGroupoid:
    """Disjoint union of groups over distinct units (``d = r`` everywhere)."""
    r, inv, labels, product, units = [], [], [], {}, []
    offset = 0
    names = list(names) if names else [f"G{i}" for i in range(len(tables))]
    for gname, tab in zip(names, tables):
        tab = np.asarray(tab, dtype=np.int64)
        m = tab.shape[0]
        ident, ginv = _identity_and_inverse(tab)
        u = offset + ident
        units.append(u)
        r.extend([u] * m)
        inv.extend((offset + ginv).tolist())
        labels.extend(f"{gname}[{a}]" for a in range(m))
        for a in range(m):
            for b in range(m):
                product[(offset + a, offset + b)] = offset + int(tab[a, b])
        offset += m
    r = np.array(r, dtype=np.int64)
    name = "bundle:" + ",".join(names)
    return FiniteGroupoid(r, r.copy(), np.array(inv, dtype=np.int64), product, tuple(units), name, tuple(labels))


def transformation_groupoid(table, action, group_name: str = "G") -> FiniteGroupoid:
    """Action groupoid ``Gamma x X`` with ``r(g,s) = g.s``, ``d(g,s) = s``.

    ``action[g][s]`` is the image of point ``s`` under group element ``g``.
    Products: ``(g, h.s)(h, s) = (gh, s)``; inverse ``(g, s)^-1 = (g^-1, g.s)``.
    """
    table = np.asarray(table, dtype=np.int64)
    action = np.asarray(action, dtype=np.int64)
    m, k = action.shape
    ident, ginv = _identity_and_inverse(table)
    eid = lambda g_, s: g_ * k + s  # noqa: E731
    r = np.array([action[g_, s] for g_ in range(m) for s in range(k)])
    d = np.array([s for _ in range(m) for s in range(k)])
    units_pts = np.array([eid(ident, s) for s in range(k)])
    r = units_pts[r]
    d = units_pts[d]
    inv = np.array([eid(int(ginv[g_]), int(action[g_, s])) for g_ in range(m) for s in range(k)])
    product = {}
    for g_ in range(m):
        for h_ in range(m):
            for s in range(k):
                product[(eid(g_, int(action[h_, s])), eid(h_, s))] = eid(int(table[g_, h_]), s)
    labels = tuple(f"({group_name}[{g_}],{s + 1})" for g_ in range(m) for s in range(k))
    return FiniteGroupoid(r, d, inv, product, tuple(units_pts.tolist()), f"transform:{group_name}", labels)


def disjoint_union(*parts: FiniteGroupoid) -> FiniteGroupoid:
    r, d, inv, units, labels, product = [], [], [], [], [], {}
    off = 0
    for p in parts:
        r.extend((p.r + off).tolist())
        d.extend((p.d + off).tolist())
        inv.extend((p.inv + off).tolist())
        units.extend(u + off for u in p.units)
        labels.extend(f"{p.name}/{p.label(x)}" for x in range(p.n))
        product.update({(x + off, y + off): z + off for (x, y), z in p.product.items()})
        off += p.n
    name = "union:" + "+".join(p.name for p in parts)
    return FiniteGroupoid(
        np.array(r), np.array(d), np.array(inv), product, tuple(units), name, tuple(labels)
    )


def corrupt_product(g: FiniteGroupoid, a: tuple, b: tuple) -> FiniteGroupoid:
    """Copy of ``g`` with the product entries at pairs ``a`` and ``b`` swapped (fault injection)."""
    prod = dict(g.product)
    prod[a], prod[b] = prod[b], prod[a]
    return FiniteGroupoid(g.r, g.d, g.inv, prod, g.units, g.name + "!corrupt", g.labels)


# ---------------------------------------------------------------------------
# zoo ids

ZOO_IDS = (
    "pair:1",
    "pair:2",
    "pair:3",
    "bundle:Z2,Z3",
    "bundle:S3",
    "bundle:Z4",
    "transform:Z2",
    "transform:S3",
    "transform:Z2on3",
    "union:pair:2+bundle:Z3",
)


def _transform(ident: str) -> FiniteGroupoid:
    key = ident.strip().upper()
    if key == "S3":
        perms = symmetric_perms(3)
        action = np.array([[p[s] for s in range(3)] for p in perms])
        return transformation_groupoid(_perm_table(perms), action, "S3")
    if key == "Z2ON3":
        action = np.array([[0, 1, 2], [1, 0, 2]])
        return transformation_groupoid(cyclic_table(2), action, "Z2on3")
    if key.startswith("Z") and key[1:].isdigit():
        n = int(key[1:])
        a = np.arange(n)
        return transformation_groupoid(cyclic_table(n), (a[:, None] + a[None, :]) % n, f"Z{n}")
    raise ConfigError(f"unknown transformation groupoid {ident!r}")


def from_id(ident: str) -> FiniteGroupoid:
    """Resolve a zoo id such as ``pair:3``, ``bundle:Z2,Z3``, ``transform:S3``, ``union:a+b``."""
    ident = ident.strip()
    head, _, arg = ident.partition(":")
    try:
        if head == "pair":
            return pair_groupoid(int(arg))
        if head == "bundle":
            names = [s.strip() for s in arg.split(",") if s.strip()]
            if not names:
                raise ConfigError("bundle needs at least one group")
            return group_bundle([group_table(s) for s in names], names)
        if head == "transform":
            return _transform(arg)
        if head == "union":
            return disjoint_union(*(from_id(p) for p in arg.split("+")))
    except ValueError as exc:
        raise ConfigError(f"bad groupoid id {ident!r}") from exc
    raise ConfigError(f"unknown groupoid id {ident!r}")


def zoo() -> list[FiniteGroupoid]:
    return [from_id(i) for i in ZOO_IDS]
