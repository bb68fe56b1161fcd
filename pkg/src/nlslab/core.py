"""Grids, complex fields, and the continuum-convention spectral operators.

All grids are uniform, periodic and centered: the left endpoint of every
axis is -N*h/2, so the sample coordinates straddle the origin and the dual
(frequency) grid of a centered grid is again centered.  With the explicit
(2pi)^{-n/2} h^n scaling the discrete transform matches the continuum
Fourier transform on resolved fields and Plancherel holds to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridCompatibilityError, MassLossError, SpaceTagError

POSITION = "position"
FREQUENCY = "frequency"

# Fraction of the per-axis range counted as the "outer" shell by diagnostics.
OUTER_SHELL = 0.125

# Row-block size for the dense trigonometric evaluation used by resample().
_RESAMPLE_BLOCK = 512


@dataclass(frozen=True)
class GridDescriptor:
    """Uniform periodic grid, centered about the origin.

    counts    per-axis sample count N (power of two, >= 8)
    spacings  per-axis spacing h > 0
    offsets   per-axis left endpoint, always -N*h/2
    """

    counts: tuple
    spacings: tuple
    offsets: tuple

    def __post_init__(self):
        counts = tuple(int(n) for n in self.counts)
        spacings = tuple(float(h) for h in self.spacings)
        offsets = tuple(float(x) for x in self.offsets)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "spacings", spacings)
        object.__setattr__(self, "offsets", offsets)
        if not (1 <= len(counts) <= 2):
            raise ValueError(f"dimension must be 1 or 2, got {len(counts)}")
        if not (len(counts) == len(spacings) == len(offsets)):
            raise ValueError("counts, spacings, offsets must have equal length")
        for n, h, x0 in zip(counts, spacings, offsets):
            if n < 8 or (n & (n - 1)) != 0:
                raise ValueError(f"axis count {n} is not a power of two >= 8")
            if not (h > 0) or not np.isfinite(h):
                raise ValueError(f"axis spacing {h} must be positive and finite")
            centered = -0.5 * n * h
            if abs(x0 - centered) > 1e-12 * max(1.0, abs(centered)):
                raise ValueError(f"grid is not centered: x0={x0}, expected {centered}")

    @classmethod
    def centered(cls, counts, spacings):
        counts = tuple(int(n) for n in np.atleast_1d(counts))
        spacings = tuple(float(h) for h in np.atleast_1d(spacings))
        offsets = tuple(-0.5 * n * h for n, h in zip(counts, spacings))
        return cls(counts, spacings, offsets)

    @property
    def dim(self):
        return len(self.counts)

    @property
    def size(self):
        return int(np.prod(self.counts))

    @property
    def cell_volume(self):
        return float(np.prod(self.spacings))

    @property
    def extents(self):
        """Per-axis half-width N*h/2 of the domain."""
        return tuple(0.5 * n * h for n, h in zip(self.counts, self.spacings))

    def axis_coords(self, axis):
        n, h, x0 = self.counts[axis], self.spacings[axis], self.offsets[axis]
        return x0 + h * np.arange(n)

    def coordinate_arrays(self):
        """Sparse meshgrid of the sample coordinates."""
        axes = [self.axis_coords(a) for a in range(self.dim)]
        return np.meshgrid(*axes, indexing="ij", sparse=True)

    def radius_squared(self):
        """|x|^2 evaluated on the grid, shaped like a field."""
        coords = self.coordinate_arrays()
        r2 = np.zeros(self.counts)
        for c in coords:
            r2 = r2 + c**2
        return r2

    def dual(self):
        """The implied frequency grid: spacing 2*pi/(N*h), again centered."""
        spacings = tuple(2.0 * np.pi / (n * h) for n, h in zip(self.counts, self.spacings))
        return GridDescriptor.centered(self.counts, spacings)


def grids_close(a: GridDescriptor, b: GridDescriptor, rtol=1e-12):
    if a.counts != b.counts:
        return False
    for ha, hb in zip(a.spacings, b.spacings):
        if abs(ha - hb) > rtol * max(abs(ha), abs(hb)):
            return False
    return True


def require_same_grid(a, b, what="fields"):
    if not grids_close(a.grid, b.grid):
        raise GridCompatibilityError(f"{what} live on incompatible grids: {a.grid} vs {b.grid}")


@dataclass(frozen=True)
class ComplexField:
    """Complex samples on a grid, tagged position- or frequency-space.

    ``values`` is flat, row-major over the axes, and immutable.
    """

    grid: GridDescriptor
    values: np.ndarray
    space: str

    def __post_init__(self):
        arr = np.ascontiguousarray(self.values, dtype=np.complex128).reshape(-1)
        if arr.size != self.grid.size:
            raise ValueError(f"values length {arr.size} != grid size {self.grid.size}")
        if not np.isfinite(arr.view(np.float64)).all():
            raise ValueError("field contains non-finite entries")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        if self.space not in (POSITION, FREQUENCY):
            raise ValueError(f"unknown space tag {self.space!r}")

    @property
    def shaped(self):
        return self.values.reshape(self.grid.counts)

    def with_values(self, values):
        return ComplexField(self.grid, np.asarray(values).reshape(-1), self.space)

    def retagged(self, space):
        """Reinterpret the same samples in the other space (no transform)."""
        return ComplexField(self.grid, self.values, space)


def field_from_function(grid, fn, space=POSITION):
    """Sample ``fn(*coords)`` on the grid."""
    coords = grid.coordinate_arrays()
    vals = np.asarray(fn(*coords), dtype=np.complex128)
    vals = np.broadcast_to(vals, grid.counts)
    return ComplexField(grid, vals.reshape(-1), space)


def _require_space(f, space, op):
    if f.space != space:
        raise SpaceTagError(f"{op} expects a {space}-space field, got {f.space}")


def _alternating_signs(n):
    # exp(-i * x0 * xi_k) = (-1)^k exactly on centered grids
    k = np.arange(n) - n // 2
    return np.where(k % 2 == 0, 1.0, -1.0)


def _apply_axis_weights(shaped, weights):
    out = shaped
    dim = shaped.ndim
    for axis, w in enumerate(weights):
        shape = [1] * dim
        shape[axis] = len(w)
        out = out * w.reshape(shape)
    return out


def _dft(field: ComplexField) -> ComplexField:
    """Continuum-convention forward transform onto the dual grid (tag-free)."""
    g = field.grid
    dual = g.dual()
    pref = (2.0 * np.pi) ** (-0.5 * g.dim) * g.cell_volume
    spec = np.fft.fftshift(np.fft.fftn(field.shaped))
    signs = [_alternating_signs(n) for n in g.counts]
    spec = pref * _apply_axis_weights(spec, signs)
    return ComplexField(dual, spec.reshape(-1), FREQUENCY)


def _idft(field: ComplexField) -> ComplexField:
    """Inverse of :func:`_dft`, mapping a field back onto the dual of its grid."""
    g = field.grid
    dual = g.dual()
    signs = [_alternating_signs(n) for n in g.counts]
    spec = _apply_axis_weights(field.shaped, signs)
    pref = (2.0 * np.pi) ** (-0.5 * g.dim) * g.cell_volume * g.size
    vals = pref * np.fft.ifftn(np.fft.ifftshift(spec))
    return ComplexField(dual, vals.reshape(-1), POSITION)


def forward_fourier(f: ComplexField) -> ComplexField:
    """F f(xi) = (2pi)^{-n/2} integral f(x) exp(-i x.xi) dx, discretized."""
    _require_space(f, POSITION, "forward_fourier")
    return _dft(f)


def inverse_fourier(f: ComplexField) -> ComplexField:
    """Inverse transform; round-trips with forward_fourier to roundoff."""
    _require_space(f, FREQUENCY, "inverse_fourier")
    return _idft(f)


def free_propagate(f: ComplexField, t: float) -> ComplexField:
    """Multiply the spectrum by exp(-i t |xi|^2 / 2); exact for all t.

    Position fields are conjugated through the transform; frequency fields
    get the multiplier on their own coordinates.
    """
    t = float(t)
    if f.space == FREQUENCY:
        phase = np.exp(-0.5j * t * f.grid.radius_squared())
        return f.with_values(f.shaped * phase)
    spec = _dft(f)
    phase = np.exp(-0.5j * t * spec.grid.radius_squared())
    out = _idft(spec.with_values(spec.shaped * phase))
    return ComplexField(f.grid, out.values, f.space)


def quadratic_phase(f: ComplexField, t: float) -> ComplexField:
    """The operator M_t: pointwise multiplication by exp(i |x|^2 / (2t))."""
    t = float(t)
    if t == 0.0:
        raise ValueError("quadratic_phase requires t != 0")
    phase = np.exp(0.5j * f.grid.radius_squared() / t)
    return f.with_values(f.shaped * phase)


def _reflect_values(shaped):
    out = shaped
    for axis in range(shaped.ndim):
        out = np.roll(np.flip(out, axis=axis), 1, axis=axis)
    return out


def dilate(f: ComplexField, t: float) -> ComplexField:
    """The operator D_t: (it)^{-n/2} f(x/t) on the grid rescaled by |t|.

    Principal branch of (it)^{n/2}; L2-unitary for every t != 0.  Negative t
    reflects the samples through the periodic index map.
    """
    t = float(t)
    if t == 0.0:
        raise ValueError("dilate requires t != 0")
    g = f.grid
    scale = (1j * t) ** (-0.5 * g.dim)
    vals = f.shaped
    if t < 0:
        vals = _reflect_values(vals)
    new_grid = GridDescriptor.centered(g.counts, tuple(h * abs(t) for h in g.spacings))
    return ComplexField(new_grid, (scale * vals).reshape(-1), f.space)


def resample(f: ComplexField, target: GridDescriptor) -> ComplexField:
    """Band-limited (trigonometric) interpolation of ``f`` onto ``target``.

    Target points outside the source's fundamental domain get zeros (the
    periodic extension is never unrolled).  Raises MassLossError when the
    target box fails to cover the mass of ``f``.
    """
    _require_space(f, POSITION, "resample")
    src = f.grid
    if target.dim != src.dim:
        raise ValueError("resample cannot change dimensionality")
    if grids_close(src, target):
        return ComplexField(target, f.values, f.space)

    _check_mass_on_target(f, target)

    spec = _dft(f)
    dual = spec.grid
    pref = (2.0 * np.pi) ** (-0.5 * src.dim) * dual.cell_volume
    vals = spec.shaped
    # Contract one axis at a time with exp(i x_target xi), blockwise to
    # bound memory; rows for out-of-domain target points are zeroed.
    for axis in range(src.dim):
        xt = target.axis_coords(axis)
        xi = dual.axis_coords(axis)
        lo = src.offsets[axis]
        hi = lo + src.counts[axis] * src.spacings[axis]
        pad = 1e-9 * src.spacings[axis]
        inside = (xt >= lo - pad) & (xt < hi - pad)
        vals = np.moveaxis(vals, axis, 0)
        out = np.empty((len(xt),) + vals.shape[1:], dtype=np.complex128)
        for start in range(0, len(xt), _RESAMPLE_BLOCK):
            stop = min(start + _RESAMPLE_BLOCK, len(xt))
            e = np.exp(1j * np.outer(xt[start:stop], xi))
            out[start:stop] = np.tensordot(e, vals, axes=(1, 0))
        out[~inside] = 0.0
        vals = np.moveaxis(out, 0, axis)
    return ComplexField(target, (pref * vals).reshape(-1), POSITION)


def _check_mass_on_target(f, target):
    g = f.grid
    density = np.abs(f.shaped) ** 2
    total = density.sum()
    if total == 0.0:
        return
    outside = np.zeros(g.counts, dtype=bool)
    for axis in range(g.dim):
        x = g.axis_coords(axis)
        lo = target.offsets[axis]
        hi = lo + target.counts[axis] * target.spacings[axis]
        ax_out = (x < lo) | (x >= hi)
        shape = [1] * g.dim
        shape[axis] = len(x)
        outside |= ax_out.reshape(shape)
    lost = density[outside].sum() / total
    if lost > 1e-6:
        raise MassLossError(
            f"target grid drops {lost:.3e} of the field's mass (limit 1e-6)"
        )


def norms(f: ComplexField) -> dict:
    """L2 norm, |xi|-weighted spectral seminorm, |x|-weighted norm, sup norm."""
    g = f.grid
    vol = g.cell_volume
    shaped = f.shaped
    l2 = float(np.sqrt(vol * np.sum(np.abs(shaped) ** 2)))
    if f.space == POSITION:
        spec = _dft(f)
    else:
        spec = f
    w = np.sqrt(spec.grid.radius_squared())
    h1 = float(
        np.sqrt(spec.grid.cell_volume * np.sum((w * np.abs(spec.shaped)) ** 2))
    )
    r = np.sqrt(g.radius_squared())
    weighted_x = float(np.sqrt(vol * np.sum((r * np.abs(shaped)) ** 2)))
    linf = float(np.max(np.abs(shaped))) if shaped.size else 0.0
    return {"l2": l2, "h1_seminorm": h1, "weighted_x": weighted_x, "linf": linf}


def l2_norm(f: ComplexField) -> float:
    return float(np.sqrt(f.grid.cell_volume * np.sum(np.abs(f.values) ** 2)))


def l2_difference(a: ComplexField, b: ComplexField) -> float:
    require_same_grid(a, b)
    return float(np.sqrt(a.grid.cell_volume * np.sum(np.abs(a.values - b.values) ** 2)))


@dataclass(frozen=True)
class FieldDiagnostics:
    """Mass fractions in the outer 1/8 of the frequency and position ranges."""

    l2: float
    spectral_tail_fraction: float
    boundary_mass_fraction: float


def _outer_shell_fraction(field: ComplexField) -> float:
    g = field.grid
    density = np.abs(field.shaped) ** 2
    total = density.sum()
    if total == 0.0:
        return 0.0
    outer = np.zeros(g.counts, dtype=bool)
    for axis in range(g.dim):
        x = np.abs(g.axis_coords(axis))
        cut = (1.0 - OUTER_SHELL) * g.extents[axis]
        shape = [1] * g.dim
        shape[axis] = len(x)
        outer |= (x >= cut).reshape(shape)
    return float(density[outer].sum() / total)


def diagnostics(f: ComplexField) -> FieldDiagnostics:
    if f.space == POSITION:
        boundary = _outer_shell_fraction(f)
        tail = _outer_shell_fraction(_dft(f))
    else:
        tail = _outer_shell_fraction(f)
        boundary = _outer_shell_fraction(_idft(f))
    return FieldDiagnostics(
        l2=l2_norm(f),
        spectral_tail_fraction=tail,
        boundary_mass_fraction=boundary,
    )
