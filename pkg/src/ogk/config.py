"""Numerical tolerances shared by every module."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

from .errors import ConfigError


@dataclass(frozen=True)
class Tolerances:
    root: float = 1e-12  # bisection, relative
    golden: float = 1e-10  # golden-section refinement, relative
    young_slack: float = 1e-10  # Fenchel-Young, absolute
    slack: float = 1e-9  # norm / operator inequalities
    exact: float = 1e-12  # algebraic identities (associativity, e*f=f, ...)
    relative: float = 1e-8  # norm equivalence, relative
    projection: float = 1e-10  # subspace residuals
    haar: float = 1e-14  # left invariance for float weights
    bracket_cap: float = 1e30  # conjugate bracket growth limit


def default_tolerances() -> Tolerances:
    """Defaults, with ``OGK_TOLERANCE`` overriding the inequality slack."""
    tol = Tolerances()
    env = os.environ.get("OGK_TOLERANCE")
    if env:
        try:
            value = float(env)
        except ValueError:
            value = float("nan")
        if not value >= 0:
            raise ConfigError(f"OGK_TOLERANCE must be a nonnegative number, got {env!r}")
        tol = replace(tol, slack=value)
    return tol


def _safe_defaults() -> Tolerances:
    try:
        return default_tolerances()
    except ConfigError:
        return Tolerances()  # the command line reports the bad value


TOL = _safe_defaults()
