"""Time integration: Strang split-step for the power nonlinearity, and an
integrating-factor RK4 for the derivative equation as an independent oracle.

Both substeps of the splitting are unitary (the nonlinear flow is an exact
phase rotation), so the splitting error is purely commutator-driven and mass
is conserved to roundoff.  The derivative equation is integrated in the
interaction picture w(t) = U0(-t) psi(t), which removes the stiff linear
phase from the RK4 stability constraint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    POSITION,
    ComplexField,
    _dft,
    _idft,
    diagnostics,
    free_propagate,
    l2_norm,
)
from .errors import SolverHealthError

HEALTH_CHECKS_PER_RUN = 8
MAX_DT_HALVINGS = 4


@dataclass(frozen=True)
class NLSParams:
    """Power nonlinearity mu |u|^(2 sigma) u with signed coupling mu."""

    dim: int = 1
    sigma: float | None = None
    mu: float = 1.0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if self.sigma is None:
            object.__setattr__(self, "sigma", 2.0 / self.dim)
        if not (self.sigma > 0):
            raise ValueError("sigma must be positive")

    @property
    def critical(self):
        return abs(self.sigma - 2.0 / self.dim) < 1e-14


@dataclass(frozen=True)
class DNLSParams:
    """Coupling of the derivative nonlinearity i*lambda*(|psi|^2)_x psi."""

    lam: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.lam):
            raise ValueError("lambda must be finite")


@dataclass(frozen=True)
class StepControl:
    dt: float = 1e-3
    max_steps: int = 10_000_000
    mass_drift_tol: float = 1e-8
    tail_tol: float = 1e-5
    boundary_tol: float = 1e-5

    def __post_init__(self):
        if not (self.dt > 0):
            raise ValueError("dt must be positive")
        for name in ("mass_drift_tol", "tail_tol", "boundary_tol"):
            if not (getattr(self, name) > 0):
                raise ValueError(f"{name} must be positive")


def _nonlinear_phase(values, dt_half, p: NLSParams):
    return values * np.exp(-1j * p.mu * np.abs(values) ** (2.0 * p.sigma) * dt_half)


def nls_step(u: ComplexField, dt: float, p: NLSParams) -> ComplexField:
    """One Strang step: half nonlinear phase, free flow, half nonlinear phase."""
    v = _nonlinear_phase(u.values, 0.5 * dt, p)
    v = free_propagate(u.with_values(v), dt)
    return v.with_values(_nonlinear_phase(v.values, 0.5 * dt, p))


def _check_health(f, mass0, c: StepControl, t, context):
    mass = l2_norm(f) ** 2
    drift = abs(mass - mass0) / mass0 if mass0 > 0 else 0.0
    d = diagnostics(f)
    bad = {}
    if drift > c.mass_drift_tol:
        bad["mass_drift"] = drift
    if d.spectral_tail_fraction > c.tail_tol:
        bad["spectral_tail_fraction"] = d.spectral_tail_fraction
    if d.boundary_mass_fraction > c.boundary_tol:
        bad["boundary_mass_fraction"] = d.boundary_mass_fraction
    if bad:
        bad["t"] = t
        raise SolverHealthError(f"{context}: health violation at t={t:.6g}: {bad}", bad)
    return drift, d


def nls_evolve(
    u0: ComplexField,
    t0: float,
    t1: float,
    p: NLSParams,
    c: StepControl,
    observer=None,
) -> ComplexField:
    """Evolve with repeated Strang steps and an exact final partial step.

    ``observer(t, field)``, when given, is called after every step (and once
    at t0).  Aborts with SolverHealthError when the resolution or mass
    monitors trip.
    """
    span = t1 - t0
    if span == 0.0:
        return u0
    n_full = int(abs(span) / c.dt)
    remainder = abs(span) - n_full * c.dt
    if remainder < 1e-12 * c.dt:
        remainder = 0.0
    total_steps = n_full + (1 if remainder else 0)
    if total_steps > c.max_steps:
        raise SolverHealthError(
            f"evolution needs {total_steps} steps, max_steps={c.max_steps}"
        )
    sgn = 1.0 if span > 0 else -1.0
    mass0 = l2_norm(u0) ** 2
    check_every = max(1, total_steps // HEALTH_CHECKS_PER_RUN)
    u = u0
    t = t0
    _check_health(u, mass0, c, t, "nls_evolve (initial state)")
    if observer is not None:
        observer(t, u)
    for k in range(total_steps):
        dt = c.dt if k < n_full else remainder
        u = nls_step(u, sgn * dt, p)
        t = t0 + sgn * min((k + 1) * c.dt, abs(span))
        if observer is not None:
            observer(t, u)
        if (k + 1) % check_every == 0 or k + 1 == total_steps:
            _check_health(u, mass0, c, t, "nls_evolve")
    return u


def _spatial_derivative(values_shaped, grid):
    f = ComplexField(grid, values_shaped.reshape(-1), POSITION)
    spec = _dft(f)
    xi = spec.grid.axis_coords(0)
    return _idft(spec.with_values(spec.shaped * (1j * xi))).shaped


def _dnls_rhs(w_values, t, psi_grid, lam):
    """dw/dt = lambda * U0(-t)[ (|psi|^2)_x psi ], psi = U0(t) w."""
    if (
        not np.isfinite(w_values.view(np.float64)).all()
        or np.max(np.abs(w_values)) > 1e8
    ):
        raise SolverHealthError(
            f"dnls_evolve: blow-up in a Runge-Kutta stage at t={t:.6g}",
            {"mass_drift": float("inf"), "t": t},
        )
    w = ComplexField(psi_grid, w_values.reshape(-1), POSITION)
    psi = free_propagate(w, t)
    density_x = _spatial_derivative(np.abs(psi.shaped) ** 2, psi_grid)
    forcing = psi.with_values(density_x * psi.shaped)
    return lam * free_propagate(forcing, -t).shaped


def dnls_evolve(
    psi0: ComplexField,
    t0: float,
    t1: float,
    p: DNLSParams,
    c: StepControl,
    observer=None,
) -> ComplexField:
    """Integrating-factor RK4 for the derivative equation (1d only).

    Mass is conserved by the continuum equation; the measured drift is a
    pure accuracy monitor.  On violation the step is halved and the run
    restarted, up to MAX_DT_HALVINGS times.
    """
    if psi0.grid.dim != 1:
        raise SolverHealthError("dnls_evolve is one-dimensional")
    dt = c.dt
    last_exc = None
    for _ in range(MAX_DT_HALVINGS + 1):
        try:
            return _dnls_run(psi0, t0, t1, p, c, dt, observer)
        except SolverHealthError as exc:
            if "mass_drift" not in exc.diagnostics:
                raise
            last_exc = exc
            dt *= 0.5
    raise SolverHealthError(
        f"dnls_evolve: mass drift persists after {MAX_DT_HALVINGS} dt halvings "
        f"(last: {last_exc})",
        last_exc.diagnostics if last_exc else None,
    )


def _dnls_run(psi0, t0, t1, p, c, dt, observer):
    span = t1 - t0
    if span == 0.0:
        return psi0
    n_full = int(abs(span) / dt)
    remainder = abs(span) - n_full * dt
    if remainder < 1e-12 * dt:
        remainder = 0.0
    total_steps = n_full + (1 if remainder else 0)
    if total_steps > c.max_steps:
        raise SolverHealthError(
            f"dnls evolution needs {total_steps} steps, max_steps={c.max_steps}"
        )
    sgn = 1.0 if span > 0 else -1.0
    grid = psi0.grid
    mass0 = l2_norm(psi0) ** 2
    check_every = max(1, total_steps // HEALTH_CHECKS_PER_RUN)
    _check_health(psi0, mass0, c, t0, "dnls_evolve (initial state)")
    # interaction picture state at t0: w = U0(-t0) psi(t0)
    w = free_propagate(psi0, -t0).shaped
    t = t0
    if observer is not None:
        observer(t0, psi0)
    for k in range(total_steps):
        h = (dt if k < n_full else remainder) * sgn
        k1 = _dnls_rhs(w, t, grid, p.lam)
        k2 = _dnls_rhs(w + 0.5 * h * k1, t + 0.5 * h, grid, p.lam)
        k3 = _dnls_rhs(w + 0.5 * h * k2, t + 0.5 * h, grid, p.lam)
        k4 = _dnls_rhs(w + h * k3, t + h, grid, p.lam)
        w = w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = t0 + sgn * min((k + 1) * dt, abs(span))
        if not np.isfinite(w.view(np.float64)).all():
            raise SolverHealthError(
                f"dnls_evolve: blow-up at t={t:.6g} (dt={h:.3g})",
                {"mass_drift": float("inf"), "t": t},
            )
        psi = free_propagate(ComplexField(grid, w.reshape(-1), POSITION), t)
        if observer is not None:
            observer(t, psi)
        if (k + 1) % check_every == 0 or k + 1 == total_steps:
            _check_health(psi, mass0, c, t, "dnls_evolve")
    return psi


def residual(trajectory, equation) -> float:
    """Strong-form PDE residual of a sampled trajectory, maximized over the
    interior snapshots: central time difference minus the spectral right-hand
    side, in L2.
    """
    snaps = list(trajectory)
    if len(snaps) < 3:
        raise ValueError("residual needs at least 3 equispaced snapshots")
    times = np.array([s.time for s in snaps])
    dts = np.diff(times)
    if np.max(np.abs(dts - dts[0])) > 1e-9 * abs(dts[0]):
        raise ValueError("snapshots must be equispaced in time")
    dt = dts[0]
    worst = 0.0
    for k in range(1, len(snaps) - 1):
        u = snaps[k].field
        du_dt = (snaps[k + 1].field.values - snaps[k - 1].field.values) / (2.0 * dt)
        spec = _dft(u)
        lap = _idft(spec.with_values(spec.shaped * (-spec.grid.radius_squared()))).values
        if isinstance(equation, NLSParams):
            rhs = equation.mu * np.abs(u.values) ** (2.0 * equation.sigma) * u.values
        elif isinstance(equation, DNLSParams):
            dens_x = _spatial_derivative(np.abs(u.shaped) ** 2, u.grid).reshape(-1)
            rhs = 1j * equation.lam * dens_x * u.values
        else:
            raise TypeError(f"unknown equation parameters: {equation!r}")
        r = 1j * du_dt + 0.5 * lap - rhs
        worst = max(worst, float(np.sqrt(u.grid.cell_volume * np.sum(np.abs(r) ** 2))))
    return worst
