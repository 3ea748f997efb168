"""Parametrised Haar families over a sampled unit space.

The unit space ``[0, 1]`` is replaced by a uniform grid; over every sample
sits a copy of a fixed finite group with Haar weight depending on ``u``.  The
result is an ordinary finite group bundle, so every quantity below is
computed with the same convolution and norm engines as everything else.
Continuity statements become statements about the sampled modulus
``max |g(u_{i+1}) - g(u_i)|`` and how it shrinks when the grid is doubled.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .config import TOL
from .convalg import convolve, left_translate
from .errors import ConfigError, FiltrationInvalid
from .groupoid import (
    HaarSystem,
    _identity_and_inverse,
    group_bundle,
    group_table,
    validate_groupoid,
    validate_haar,
)
from .orlicz import Section, fiber_gauge_norms, fiber_orlicz_norms, gauge_norm
from .young import YoungFunction


@dataclass(frozen=True, eq=False)
class ParametrizedFamily:
    name: str
    group: str  # fiber template, e.g. "Z2"
    haar_weight: Callable[[float], float]  # u -> weight of each fiber element
    section: Callable[[float, int], complex]  # (u, template element) -> value
    closed_form: Optional[Callable[[np.ndarray], np.ndarray]] = None  # u -> gauge norm for power:2
    lipschitz: bool = True

    @property
    def table(self) -> np.ndarray:
        return group_table(self.group)

    @property
    def m(self) -> int:
        return self.table.shape[0]

    def samples(self, N: int) -> np.ndarray:
        """``N + 1`` equally spaced points, so ``N`` intervals of length ``1/N``."""
        if N < 1:
            raise ConfigError("grid size must be at least 1")
        return np.linspace(0.0, 1.0, N + 1)

    def build(self, N: int) -> tuple:
        """``(groupoid, haar, section, samples)`` for the grid with ``N`` intervals."""
        us = self.samples(N)
        tab = self.table
        g = group_bundle([tab] * len(us), [f"{self.group}@{u:.6g}" for u in us])
        m = self.m
        w = np.repeat([float(self.haar_weight(u)) for u in us], m)
        vals = np.array([self.section(u, a) for u in us for a in range(m)])
        if not np.iscomplexobj(vals) or not np.any(vals.imag):
            vals = vals.real.astype(float)
        h = HaarSystem(w, f"{self.name}-haar", g)
        return g, h, Section(g, vals), us

    def validate(self, N: int = 8) -> bool:
        g, h, _, _ = self.build(N)
        return validate_groupoid(g).valid and validate_haar(g, h).valid


# ---------------------------------------------------------------------------
# presets


def _z2_linear() -> ParametrizedFamily:
    return ParametrizedFamily(
        "z2-linear", "Z2", lambda u: 1.0 + u, lambda u, a: 1.0, lambda u: np.sqrt(2.0 * (1.0 + u))
    )


def _constant() -> ParametrizedFamily:
    return ParametrizedFamily(
        "constant", "Z3", lambda u: 1.0, lambda u, a: float(a + 1), lambda u: np.full_like(u, np.sqrt(14.0))
    )


def _z4_smooth() -> ParametrizedFamily:
    def sec(u, a):
        t = 2 * np.pi * a / 4
        return np.cos(t) + u * np.sin(t) + 0.5 * u * u + 1j * u * np.sin(2 * t + u)

    return ParametrizedFamily("z4-smooth", "Z4", lambda u: 1.0 + u * u, sec)


PRESETS = {"z2-linear": _z2_linear, "constant": _constant, "z4-smooth": _z4_smooth}


def _poly(coeffs) -> Callable[[float], float]:
    c = [float(x) for x in coeffs]
    return lambda u: float(np.polyval(c[::-1], u))


def family_from_dict(data: dict) -> ParametrizedFamily:
    """Custom family: polynomial weight and per-element polynomial sections (ascending coefficients).

    ``{"name": ..., "group": "Z3", "weight": [1, 0.5],
    "section": [[1], [0, 1], [2, 0, -1]], "section_imag": [...]}``
    """
    try:
        group = str(data["group"])
        m = group_table(group).shape[0]
        weight = _poly(data["weight"])
        re = [_poly(c) for c in data["section"]]
        im = [_poly(c) for c in data.get("section_imag", [[0]] * m)]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad family description: {exc}") from None
    if len(re) != m or len(im) != m:
        raise ConfigError(f"section needs {m} coefficient lists for {group}")
    if np.min([weight(u) for u in np.linspace(0, 1, 1001)]) <= 0:
        raise ConfigError("family weight must be positive on [0, 1]")
    sec = lambda u, a: complex(re[a](u), im[a](u)) if "section_imag" in data else re[a](u)  # noqa: E731
    return ParametrizedFamily(str(data.get("name", "custom")), group, weight, sec)


def load_family(ident: str) -> ParametrizedFamily:
    """Preset name or path to a JSON family description."""
    if ident in PRESETS:
        return PRESETS[ident]()
    path = Path(ident)
    if path.suffix == ".json":
        if not path.exists():
            raise ConfigError(f"no such family file {ident}")
        try:
            return family_from_dict(json.loads(path.read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{ident}: {exc}") from None
    raise ConfigError(f"unknown family {ident!r}; presets: {', '.join(sorted(PRESETS))}")


# ---------------------------------------------------------------------------
# profiles


@dataclass
class Profile:
    u: np.ndarray
    values: np.ndarray
    adjacent_diff: np.ndarray  # |values[i] - values[i-1]|, 0 at i = 0

    @property
    def modulus(self) -> float:
        return float(np.max(self.adjacent_diff, initial=0.0))

    def rows(self) -> list:
        return [(float(a), float(b), float(c)) for a, b, c in zip(self.u, self.values, self.adjacent_diff)]


@dataclass
class ContinuityReport:
    coarse: Profile
    fine: Optional[Profile]
    closed_form_error: Optional[float] = None

    @property
    def ratio(self) -> Optional[float]:
        if self.fine is None:
            return None
        if self.coarse.modulus == 0:
            return 0.0
        return self.fine.modulus / self.coarse.modulus


def _profile(u: np.ndarray, values: np.ndarray) -> Profile:
    return Profile(u, values, np.concatenate([[0.0], np.abs(np.diff(values))]))


def norm_profile(fam: ParametrizedFamily, phi: YoungFunction, N: int, which: str = "gauge") -> Profile:
    g, h, s, us = fam.build(N)
    if which == "gauge":
        vals = fiber_gauge_norms(phi, s, h)
    elif which == "orlicz":
        vals = fiber_orlicz_norms(phi, s, h)
    else:
        raise ConfigError(f"unknown norm {which!r}")
    return _profile(us, vals)


def norm_continuity_profile(fam: ParametrizedFamily, phi: YoungFunction, which: str = "gauge",
                            N: int = 32, refine: bool = True) -> ContinuityReport:
    """Norm of the family section at every sample, for ``N`` and optionally ``2N`` intervals."""
    coarse = norm_profile(fam, phi, N, which)
    fine = norm_profile(fam, phi, 2 * N, which) if refine else None
    err = None
    if fam.closed_form is not None and which == "gauge" and phi.name == "power:2":
        err = max(float(np.max(np.abs(p.values - fam.closed_form(p.u)))) for p in (coarse, fine) if p is not None)
    return ContinuityReport(coarse, fine, err)


def strong_continuity_profile(fam: ParametrizedFamily, phi: YoungFunction,
                              x_path: Optional[Callable[[float], int]] = None, N: int = 32,
                              refine: bool = True) -> ContinuityReport:
    """Adjacent-sample deviations of ``h_u = L_{x_u} eta^u`` compared through the template.

    The deviation between neighbours ``u, u'`` is
    ``max(||h_{u'} - h_u||^0_{u'}, | ||h_u||^0_u - ||h_{u'}||^0_{u'} |)``: the
    first term compares the functions, the second the norms, since the two
    fibers carry different Haar weights.
    """
    if x_path is None:
        x_path = lambda u: 1 if fam.m > 1 else 0  # noqa: E731

    def one(n):
        g, h, s, us = fam.build(n)
        m = fam.m
        moved, norms = [], []
        for i, u in enumerate(us):
            unit = g.units[i]
            x = i * m + int(x_path(u))
            lf = left_translate(x, s.fiber(unit), h)
            moved.append(lf.values)
            norms.append(gauge_norm(phi, lf, h.fiber_weights(unit)))
        dev = [0.0]
        for i in range(1, len(us)):
            w = h.fiber_weights(g.units[i])
            diff = gauge_norm(phi, moved[i] - moved[i - 1], w)
            dev.append(max(diff, abs(norms[i] - norms[i - 1])))
        return Profile(us, np.array(norms), np.array(dev))

    return ContinuityReport(one(N), one(2 * N) if refine else None)


# ---------------------------------------------------------------------------
# shrinking identities


@dataclass
class IdentityExperiment:
    errors: np.ndarray  # sup_u ||e_n * f - f||^0 per level
    monotone: bool
    terminal: float
    filtration: list = field(default_factory=list)

    @property
    def exact_at_end(self) -> bool:
        return self.terminal <= TOL.exact


def default_filtration(group: str) -> list:
    """Balls ``{-r..r}`` of shrinking radius for cyclic groups, ``[all, {e}]`` otherwise."""
    tab = group_table(group)
    m = tab.shape[0]
    ident, _ = _identity_and_inverse(tab)
    if group.upper().startswith("Z"):
        return [sorted({a % m for a in range(-r, r + 1)}) for r in range(m // 2, -1, -1)]
    return [list(range(m)), [ident]]


def shrinking_identity_experiment(fam: ParametrizedFamily, phi: YoungFunction,
                                  filtration: Optional[Sequence[Sequence[int]]] = None,
                                  N: int = 8) -> IdentityExperiment:
    """``e_n = chi_{U_n} / lambda^u(U_n)`` on every fiber; errors ``||e_n * f - f||^0``."""
    filtration = [sorted(set(int(a) for a in U)) for U in (filtration or default_filtration(fam.group))]
    ident, _ = _identity_and_inverse(fam.table)
    if not filtration:
        raise FiltrationInvalid("empty filtration")
    if ident not in filtration[-1]:
        raise FiltrationInvalid(f"last set {filtration[-1]} misses the identity {ident}")
    for a, b in zip(filtration, filtration[1:]):
        if not set(b) <= set(a):
            raise FiltrationInvalid(f"{b} is not contained in {a}")
    if any(not (0 <= x < fam.m) for U in filtration for x in U):
        raise FiltrationInvalid("filtration names elements outside the group")
    g, h, s, us = fam.build(N)
    m = fam.m
    errors = []
    for U in filtration:
        mask = np.zeros(m, dtype=bool)
        mask[U] = True
        ind = np.tile(mask, len(us)).astype(float)
        mass = np.bincount(g.unit_of, ind * h.weights, len(g.units))
        e = Section(g, ind / mass[g.unit_of])
        err = fiber_gauge_norms(phi, convolve(e, s, h) - s, h)
        errors.append(float(np.max(err)))
    errors = np.array(errors)
    mono = bool(np.all(np.diff(errors) <= TOL.exact * max(1.0, float(errors.max(initial=0.0)))))
    return IdentityExperiment(errors, mono, float(errors[-1]), filtration)
