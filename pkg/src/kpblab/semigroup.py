"""Free KP-II group U(t) and the KPB-II semigroup W(t) as diagonal multipliers.

U(t) multiplies each mode by exp(i t P(xi, eta)) and is unitary on L^2.
W(t) multiplies by exp(i t P(xi, eta) - xi^2 |t|); the |t| in the damping
extends the semigroup to negative times as a contraction in both directions.

Factor tables are cached per (grid, t, kind) in a small LRU cache, since time
steppers reuse few distinct t values.  Cached arrays are read-only.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .spectral_core import Grid2D, SpectralField, dispersion_values, is_kp_admissible

__all__ = [
    "PropagatorTable",
    "free_table",
    "semigroup_table",
    "heat_table",
    "apply_U",
    "apply_W",
    "apply_heat",
]


class PropagatorTable:
    """Per-mode multiplier table for one propagator at one time."""

    __slots__ = ("t", "factors")

    def __init__(self, t: float, factors: np.ndarray):
        self.t = t
        self.factors = factors


@lru_cache(maxsize=64)
def _symbol(grid: Grid2D) -> np.ndarray:
    return dispersion_values(grid).values


@lru_cache(maxsize=64)
def _factors(grid: Grid2D, t: float, kind: str) -> np.ndarray:
    P = _symbol(grid)
    if kind == "U":
        factors = np.exp(1j * t * P)
    elif kind == "W":
        xi2 = (grid.xi ** 2)[:, None]
        factors = np.exp(1j * t * P - xi2 * abs(t))
    elif kind == "heat":
        xi2 = (grid.xi ** 2)[:, None]
        factors = np.exp(-xi2 * abs(t)) * np.ones_like(P)
    else:  # pragma: no cover - internal misuse
        raise ValueError(f"unknown propagator kind {kind!r}")
    factors.setflags(write=False)
    return factors


def free_table(grid: Grid2D, t: float) -> PropagatorTable:
    """Multiplier table for the free group U(t): exp(i t P)."""
    return PropagatorTable(t=float(t), factors=_factors(grid, float(t), "U"))


def semigroup_table(grid: Grid2D, t: float) -> PropagatorTable:
    """Multiplier table for W(t): exp(i t P - xi^2 |t|)."""
    return PropagatorTable(t=float(t), factors=_factors(grid, float(t), "W"))


def heat_table(grid: Grid2D, t: float) -> PropagatorTable:
    """Multiplier table for the damping factor exp(-xi^2 |t|)."""
    return PropagatorTable(t=float(t), factors=_factors(grid, float(t), "heat"))


def _require_admissible(f: SpectralField, op: str) -> None:
    if not is_kp_admissible(f, tol=1e-10):
        raise ValueError(
            f"{op} requires a KP-admissible field (zero xi=0 line); "
            "apply project_zero_x_mean first")


def apply_U(f: SpectralField, t: float) -> SpectralField:
    """Apply the free group U(t).  Preserves the L^2 norm."""
    _require_admissible(f, "apply_U")
    return SpectralField(grid=f.grid, coeffs=f.coeffs * free_table(f.grid, t).factors)


def apply_W(f: SpectralField, t: float) -> SpectralField:
    """Apply the dissipative semigroup W(t) (|t| damping for t < 0)."""
    _require_admissible(f, "apply_W")
    return SpectralField(grid=f.grid, coeffs=f.coeffs * semigroup_table(f.grid, t).factors)


def apply_heat(f: SpectralField, t: float) -> SpectralField:
    """Apply only the damping factor exp(-xi^2 |t|)."""
    _require_admissible(f, "apply_heat")
    return SpectralField(grid=f.grid, coeffs=f.coeffs * heat_table(f.grid, t).factors)
