"""JSON readers and writers for groupoids, Haar systems, sections and subbundles.

All fiber-indexed data lists values in ascending element-id order within
the fiber ``G^u``.  See ``docs/formats.md``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import groupoid as gmod
from .errors import ConfigError
from .groupoid import FiniteGroupoid, HaarSystem
from .ideals import Subbundle
from .orlicz import Section


def _read(path) -> object:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"no such file {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def groupoid_to_dict(g: FiniteGroupoid) -> dict:
    return {
        "name": g.name,
        "elements": g.n,
        "r": g.r.tolist(),
        "d": g.d.tolist(),
        "inv": g.inv.tolist(),
        "product": [[x, y, z] for (x, y), z in sorted(g.product.items())],
        "units": list(g.units),
        "labels": list(g.labels),
    }


def groupoid_from_dict(data: dict) -> FiniteGroupoid:
    try:
        n = int(data["elements"])
        r = np.array(data["r"], dtype=np.int64)
        d = np.array(data["d"], dtype=np.int64)
        inv = np.array(data["inv"], dtype=np.int64)
        product = {(int(x), int(y)): int(z) for x, y, z in data["product"]}
        units = tuple(int(u) for u in data["units"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad groupoid description: {exc}") from None
    if not (len(r) == len(d) == len(inv) == n):
        raise ConfigError("r, d and inv must have one entry per element")
    if any(not (0 <= v < n) for arr in (r, d, inv) for v in arr) or any(
        not (0 <= v < n) for key in product for v in (*key, product[key])
    ):
        raise ConfigError("element ids must lie in 0..elements-1")
    labels = tuple(data.get("labels") or (str(i) for i in range(n)))
    return FiniteGroupoid(r, d, inv, product, units, str(data.get("name", "custom")), labels)


def load_groupoid(ident: str) -> FiniteGroupoid:
    """Zoo id or path to a JSON file."""
    if ident.endswith(".json"):
        return groupoid_from_dict(_read(ident))
    return gmod.from_id(ident)


def haar_to_dict(g: FiniteGroupoid, h: HaarSystem) -> dict:
    return {str(u): h.weights[g.fiber(u)].tolist() for u in g.units}


def load_haar(ident: str, g: FiniteGroupoid) -> HaarSystem:
    """``counting`` or a JSON file keyed by unit id."""
    if ident in (None, "", "counting"):
        return gmod.counting_haar(g)
    data = _read(ident)
    try:
        per_unit = {int(k): [float(x) for x in v] for k, v in data.items()}
        return gmod.haar_from_fibers(g, per_unit)
    except (AttributeError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad Haar description: {exc}") from None


def _parse_values(vals) -> np.ndarray:
    out = []
    for v in vals:
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise ConfigError("complex values are [re, im] pairs")
            out.append(complex(float(v[0]), float(v[1])))
        else:
            out.append(complex(float(v), 0.0))
    arr = np.array(out, dtype=complex)
    return arr.real.copy() if not np.any(arr.imag) else arr


def section_to_dict(s: Section) -> dict:
    g = s.groupoid
    out = {}
    for u in g.units:
        vals = np.asarray(s.values[g.fiber(u)], dtype=complex)
        out[str(u)] = [[float(v.real), float(v.imag)] for v in vals]
    return out


def section_from_dict(data: dict, g: FiniteGroupoid) -> Section:
    try:
        parts = {int(k): _parse_values(v) for k, v in data.items()}
    except (AttributeError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad section description: {exc}") from None
    for u, vals in parts.items():
        if u not in g.units:
            raise ConfigError(f"{u} is not a unit of {g.name}")
        if len(vals) != g.fiber(u).size:
            raise ConfigError(f"fiber {u} has {g.fiber(u).size} elements, got {len(vals)} values")
    return Section.from_fibers(g, parts)


def load_section(path, g: FiniteGroupoid) -> Section:
    return section_from_dict(_read(path), g)


def subbundle_to_dict(sub: Subbundle) -> dict:
    return {str(u): np.real_if_close(sub.bases[u].T).tolist() for u in sub.groupoid.units}


def subbundle_from_dict(data: dict, g: FiniteGroupoid) -> Subbundle:
    try:
        vectors = {int(k): [_parse_values(v) for v in vs] for k, vs in data.items()}
    except (AttributeError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad subbundle description: {exc}") from None
    try:
        return Subbundle.from_vectors(g, vectors)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
