"""Operator algebra on fields: pseudo-conformal map, reflection, conjugation,
and the one-dimensional gauge maps between the quintic and derivative
equations.

The pseudo-conformal map acts on snapshots carrying explicit time metadata,
so the time relabeling t -> -1/t can never be misaligned by a call site.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    FREQUENCY,
    POSITION,
    ComplexField,
    _reflect_values,
    diagnostics,
    dilate,
    free_propagate,
    inverse_fourier,
    l2_difference,
    quadratic_phase,
    resample,
)
from .errors import NlslabError


@dataclass(frozen=True)
class GaugeParams:
    """Coupling and sign of the phase twist exp(+-i lambda * cumulative mass)."""

    lam: float
    sign: int = +1

    def __post_init__(self):
        if not np.isfinite(self.lam):
            raise ValueError("gauge coupling must be finite")
        if self.sign not in (+1, -1):
            raise ValueError("gauge sign must be +1 or -1")


@dataclass(frozen=True)
class SnapshotAtTime:
    """A field together with the time it was taken at."""

    field: ComplexField
    time: float

    def __post_init__(self):
        if not np.isfinite(self.time):
            raise ValueError("snapshot time must be finite")


def pseudo_conformal(s: SnapshotAtTime) -> SnapshotAtTime:
    """Apply the space-time map (t, x) -> (-1/t, x/t) with its chirp factor.

    The input snapshot is read as u(-1/t, .); the output is the transformed
    solution at time t = -1/s.time, living on the grid rescaled by |t|.
    Unitary in L2.
    """
    if s.time == 0.0:
        raise ValueError("pseudo_conformal requires a nonzero snapshot time")
    t = -1.0 / s.time
    out = quadratic_phase(dilate(s.field, t), t)
    return SnapshotAtTime(out, t)


def reflect(f: ComplexField) -> ComplexField:
    """Spatial reflection about the origin via the periodic index map."""
    return f.with_values(_reflect_values(f.shaped))


def conjugate(f: ComplexField) -> ComplexField:
    """Pointwise complex conjugation."""
    return f.with_values(np.conj(f.shaped))


def _cumulative_trapezoid(w, h):
    out = np.zeros_like(w)
    out[1:] = np.cumsum(0.5 * (w[1:] + w[:-1])) * h
    return out


def gauge(f: ComplexField, g: GaugeParams) -> ComplexField:
    """Multiply by exp(sign * i * lambda * P(x)), P the cumulative |f|^2 mass.

    One-dimensional only.  P accumulates by trapezoid from the left grid
    edge, which stands in for the left-infinite integral; the field must
    therefore carry negligible boundary mass.
    """
    if f.grid.dim != 1:
        raise NlslabError("gauge transform is defined in one dimension only")
    if f.space != POSITION:
        raise NlslabError("gauge transform acts on position-space fields")
    d = diagnostics(f)
    if d.boundary_mass_fraction > 1e-6:
        raise NlslabError(
            f"boundary mass fraction {d.boundary_mass_fraction:.2e} too large "
            "for the left-edge cumulative integral (limit 1e-6)"
        )
    w = np.abs(f.values) ** 2
    phase_arg = g.sign * g.lam * _cumulative_trapezoid(w, f.grid.spacings[0])
    return f.with_values(f.values * np.exp(1j * phase_arg))


def gauge_phase_profile(f: ComplexField, g: GaugeParams) -> np.ndarray:
    """The accumulated phase sign*lambda*P(x) used by :func:`gauge`."""
    w = np.abs(f.values) ** 2
    return g.sign * g.lam * _cumulative_trapezoid(w, f.grid.spacings[0])


def spectral_profile_decay_ladder(phi: ComplexField, times) -> list:
    """|| U0(t) F^{-1} phi - (Psi phi)(t, .) ||_L2 over a ladder of times.

    ``phi`` is a frequency-space field (the static profile the
    pseudo-conformal map is applied to).  Both routes are evaluated with the
    actual operators and compared on the free route's grid.
    """
    if phi.space != FREQUENCY:
        raise NlslabError("the decay ladder takes a frequency-space profile")
    base = inverse_fourier(phi)
    out = []
    for t in times:
        route_free = free_propagate(base, t)
        snap = SnapshotAtTime(phi.retagged(POSITION), -1.0 / t)
        route_psi = pseudo_conformal(snap).field
        moved = resample(route_psi, route_free.grid)
        out.append((float(t), l2_difference(route_free, moved)))
    return out
