"""Translation, dyadic averaging, ball averaging and the maximal operator.

These are the four operators driving the compactness machinery, together
with the symmetric-difference probe for metrical continuity of a measure.
Balls are sets of cell centers within Euclidean distance r (strict), clipped
to the box; dyadic schemes partition an inner box R_m = [-2^m, 2^m)^n into
congruent cubes of side 2^t aligned with the cell lattice.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import EmptyBall, NotInvertible, SchemeMismatch, ShapeMismatch
from .grids import Grid
from .spaces import SampledVectorField, lp_w_norm
from .weight_fields import MatrixWeightField, MeasureDensity, ScalarWeightField


def shift_values(values: np.ndarray, grid: Grid, shift: tuple[int, ...]) -> np.ndarray:
    """Index-shifted copy of a (M, d) value array with zero fill."""
    d = values.shape[-1]
    vals = values.reshape(grid.shape + (d,))
    out = np.zeros_like(vals)
    src = []
    dst = []
    for k in shift:
        n = grid.N
        if abs(k) >= n:
            return np.zeros_like(values)
        if k >= 0:
            dst.append(slice(k, n))
            src.append(slice(0, n - k))
        else:
            dst.append(slice(0, n + k))
            src.append(slice(-k, n))
    out[tuple(dst)] = vals[tuple(src)]
    return out.reshape(values.shape)


def translate(f: SampledVectorField, y) -> SampledVectorField:
    """Translation (tau_y f)(x) = f(x - y) with zero extension outside the box.

    y must be a lattice vector (integer multiples of the cell width).
    """
    shift = f.grid.shift_of(y)
    return SampledVectorField(f.grid, shift_values(f.values, f.grid, shift))


# ---------------------------------------------------------------------------
# dyadic averaging


def _aligned_cells(grid: Grid, length: float) -> int:
    """Number of cells covering a length that must be an exact multiple of h."""
    ratio = length / grid.h
    k = int(round(ratio))
    if k < 1 or abs(ratio - k) > 1e-9:
        raise SchemeMismatch(f"length {length} is not a positive multiple of h={grid.h}")
    return k


@dataclass(frozen=True)
class DyadicScheme:
    """Partition of R_m = [-2^m, 2^m)^n into dyadic cubes of side 2^t.

    The number of cubes is 2^((m + 1 - t) n).  Both the outer box and the
    cube side must align with the cell lattice, and each cube must contain a
    power-of-two number of cells per axis so that cube means are exact for
    piecewise-constant data.
    """

    grid: Grid
    m: int
    t: int

    def __post_init__(self):
        if self.t > self.m:
            raise SchemeMismatch(f"inner generation t={self.t} exceeds m={self.m}")
        if self.outer_half > self.grid.L + 1e-12:
            raise SchemeMismatch(f"outer box [-2^{self.m}, 2^{self.m})^n exceeds the grid box")
        cells = _aligned_cells(self.grid, self.side)
        if cells & (cells - 1) != 0:
            raise SchemeMismatch("cells per cube per axis must be a power of two")
        if self.outer_half < self.grid.L:
            # the outer box boundary must itself sit on the cell lattice
            _aligned_cells(self.grid, self.grid.L - self.outer_half)

    @property
    def outer_half(self) -> float:
        return float(2.0 ** self.m)

    @property
    def side(self) -> float:
        return float(2.0 ** self.t)

    @property
    def cubes_per_axis(self) -> int:
        return 2 ** (self.m + 1 - self.t)

    @property
    def num_cubes(self) -> int:
        return self.cubes_per_axis ** self.grid.n

    @property
    def cells_per_cube_axis(self) -> int:
        return _aligned_cells(self.grid, self.side)

    @cached_property
    def axis_range(self) -> tuple[int, int]:
        """Index range [a, b) of cells inside [-2^m, 2^m) along one axis."""
        grid = self.grid
        a = int(round((grid.L - self.outer_half) / grid.h))
        b = int(round((grid.L + self.outer_half) / grid.h))
        return a, b

    def inside_mask(self) -> np.ndarray:
        a, b = self.axis_range
        ax = np.zeros(self.grid.N, dtype=bool)
        ax[a:b] = True
        if self.grid.n == 1:
            return ax
        return np.logical_and.outer(ax, ax).ravel()


def _tree_mean(arr: np.ndarray, axis: int) -> np.ndarray:
    """Mean along a power-of-two axis by pairwise halving.

    The fixed balanced tree makes the reduction bit-reproducible and keeps
    means of identical values exact (every partial sum is a power-of-two
    multiple), which is what makes dyadic averaging exactly idempotent.
    """
    k = arr.shape[axis]
    m = np.moveaxis(arr, axis, 0)
    while m.shape[0] > 1:
        m = m[0::2] + m[1::2]
    return np.moveaxis(m, 0, axis).sum(axis=axis) / k


def dyadic_coefficients(f: SampledVectorField, scheme: DyadicScheme) -> np.ndarray:
    """Cube means of f over the scheme, shape (num_cubes, d)."""
    if f.grid != scheme.grid:
        raise SchemeMismatch("field and scheme grids differ")
    a, b = scheme.axis_range
    nc = scheme.cubes_per_axis
    cpc = scheme.cells_per_cube_axis
    if f.grid.n == 1:
        block = f.values[a:b].reshape(nc, cpc, f.d)
        return _tree_mean(block, 1).reshape(-1, f.d)
    vals = f.values.reshape(f.grid.N, f.grid.N, f.d)
    block = vals[a:b, a:b].reshape(nc, cpc, nc, cpc, f.d)
    return _tree_mean(_tree_mean(block, 3), 1).reshape(-1, f.d)


def field_from_coefficients(scheme: DyadicScheme, coeffs: np.ndarray, d: int) -> SampledVectorField:
    """Piecewise-constant field with the given cube values, zero outside R_m."""
    grid = scheme.grid
    a, b = scheme.axis_range
    nc = scheme.cubes_per_axis
    cpc = scheme.cells_per_cube_axis
    out = np.zeros((grid.num_points, d), dtype=np.complex128)
    if grid.n == 1:
        block = np.repeat(coeffs.reshape(nc, d), cpc, axis=0)
        out[a:b] = block
    else:
        c = coeffs.reshape(nc, nc, d)
        block = np.repeat(np.repeat(c, cpc, axis=0), cpc, axis=1)
        o = out.reshape(grid.N, grid.N, d)
        o[a:b, a:b] = block
        out = o.reshape(grid.num_points, d)
    return SampledVectorField(grid, out)


def dyadic_average(f: SampledVectorField, scheme: DyadicScheme) -> SampledVectorField:
    """Piecewise-constant projection: the mean of f over the cube containing x,
    zero outside the outer box.  Idempotent and reproducing constants on R_m."""
    coeffs = dyadic_coefficients(f, scheme)
    return field_from_coefficients(scheme, coeffs, f.d)


# ---------------------------------------------------------------------------
# ball averaging


@dataclass
class BallScheme:
    """Discrete balls of one radius r >= 2h against a measure density.

    The ball at x is the set of cell centers with |y - x| < r, clipped to
    the box; its measure is the quadrature of the density over those cells.
    """

    grid: Grid
    r: float
    mu: MeasureDensity

    def __post_init__(self):
        if self.mu.grid != self.grid:
            raise ShapeMismatch("density lives on a different grid")
        if self.r < 2.0 * self.grid.h * (1 - 1e-12):
            raise ValueError(f"radius {self.r} below the 2h resolution floor")

    @property
    def reach(self) -> int:
        """Largest integer k with k * h < r."""
        return int(np.ceil(self.r / self.grid.h - 1e-12)) - 1

    @cached_property
    def offsets(self) -> list[tuple[int, ...]]:
        """Integer offsets of cells strictly inside the ball (n = 2 only)."""
        k = self.reach
        out = []
        r2 = (self.r / self.grid.h) ** 2
        for k1 in range(-k, k + 1):
            for k2 in range(-k, k + 1):
                if k1 * k1 + k2 * k2 < r2 * (1 - 1e-12):
                    out.append((k1, k2))
        return out

    @cached_property
    def measures(self) -> np.ndarray:
        """mu[B(x, r)] at every grid point."""
        return _window_sum(self.grid, self.mu.values, self) * self.grid.h ** self.grid.n


def _window_sum(grid: Grid, values: np.ndarray, scheme: BallScheme) -> np.ndarray:
    """Sum of values over the discrete ball at every center (boundary-clipped)."""
    k = scheme.reach
    if grid.n == 1:
        flat = values.reshape(grid.N, -1)
        c = np.concatenate([np.zeros((1,) + flat.shape[1:]), np.cumsum(flat, axis=0)], axis=0)
        i = np.arange(grid.N)
        lo = np.maximum(i - k, 0)
        hi = np.minimum(i + k + 1, grid.N)
        out = c[hi] - c[lo]
        return out.reshape(values.shape)
    vals = values.reshape((grid.N, grid.N) + values.shape[1:])
    out = np.zeros_like(vals)
    for (k1, k2) in scheme.offsets:
        src_r = slice(max(0, -k1), grid.N - max(0, k1))
        dst_r = slice(max(0, k1), grid.N - max(0, -k1))
        src_c = slice(max(0, -k2), grid.N - max(0, k2))
        dst_c = slice(max(0, k2), grid.N - max(0, -k2))
        out[dst_r, dst_c] += vals[src_r, src_c]
    return out.reshape(values.shape)


def ball_average(f: SampledVectorField, mu: MeasureDensity, scheme: BallScheme) -> SampledVectorField:
    """Average operator S_r f(x): the mu-mean of f over the ball at x."""
    if f.grid != scheme.grid:
        raise ShapeMismatch("field and ball scheme grids differ")
    if mu.grid != f.grid:
        raise ShapeMismatch("density grid mismatch")
    if mu is scheme.mu:
        meas = scheme.measures
    else:
        meas = _window_sum(f.grid, mu.values, scheme) * f.grid.h ** f.grid.n
    if np.any(meas <= 0.0):
        raise EmptyBall(f"a ball of radius {scheme.r} has zero measure")
    weighted = f.values * mu.values[:, None]
    sums = _window_sum(f.grid, weighted, scheme) * f.grid.h ** f.grid.n
    # divide real and imaginary parts separately: IEEE real division keeps
    # S_r of a constant exactly constant
    out = sums.real / meas[:, None] + 1j * (sums.imag / meas[:, None])
    return SampledVectorField(f.grid, out)


def symdiff_measure(x, y, r: float, mu: MeasureDensity) -> float:
    """mu[B(x, r) symmetric-difference B(y, r)] by cell counting.

    x and y are grid points (cell-center coordinates).
    """
    grid = mu.grid
    if r < 2.0 * grid.h * (1 - 1e-12):
        raise ValueError("radius below the 2h resolution floor")
    px = np.atleast_1d(np.asarray(x, dtype=np.float64))
    py = np.atleast_1d(np.asarray(y, dtype=np.float64))
    pts = grid.points
    in_x = np.linalg.norm(pts - px, axis=1) < r
    in_y = np.linalg.norm(pts - py, axis=1) < r
    return mu.measure(in_x ^ in_y)


# ---------------------------------------------------------------------------
# Christ-Goldberg maximal operator


def dyadic_radii(grid: Grid) -> list[float]:
    """Default ball family radii: 2h, 4h, ... capped at L."""
    out = []
    r = 2.0 * grid.h
    while r <= grid.L * (1 + 1e-12):
        out.append(r)
        r *= 2.0
    return out


def christ_goldberg_maximal(f: SampledVectorField, w: MatrixWeightField, p: float,
                            radii: list[float] | None = None) -> ScalarWeightField:
    """Maximal function M_w f(x): the supremum over balls of the family that
    contain x of the Lebesgue-average of |W^{1/p}(x) W^{-1/p}(y) f(y)|.

    The family consists of balls centered at grid points with dyadic radii;
    the result is a lower estimate of the all-balls supremum.
    """
    if not w.invertible:
        raise NotInvertible("maximal operator requires an invertible weight")
    if f.grid != w.grid or f.d != w.d:
        raise ShapeMismatch("field and weight do not match")
    grid = f.grid
    if radii is None:
        radii = dyadic_radii(grid)
    wp = w.power(1.0 / p)
    wm = w.power(-1.0 / p)
    g = np.einsum("mij,mj->mi", wm, f.values)
    m_points = grid.num_points
    out = np.zeros(m_points)
    lebesgue = MeasureDensity.lebesgue(grid)
    schemes = [BallScheme(grid, r, lebesgue) for r in radii]
    counts = [_window_sum(grid, np.ones(m_points), s) for s in schemes]
    if grid.n == 1:
        idx = np.arange(grid.N)
        for xi in range(m_points):
            phi = np.linalg.norm(np.einsum("ij,mj->mi", wp[xi], g), axis=1)
            c = np.concatenate([[0.0], np.cumsum(phi)])
            best = 0.0
            for s, cnt in zip(schemes, counts):
                k = s.reach
                lo = np.maximum(idx - k, 0)
                hi = np.minimum(idx + k + 1, grid.N)
                means = (c[hi] - c[lo]) / cnt
                z0, z1 = max(0, xi - k), min(grid.N, xi + k + 1)
                local = float(np.max(means[z0:z1]))
                if local > best:
                    best = local
            out[xi] = best
    else:
        pts = grid.points
        for xi in range(m_points):
            phi = np.linalg.norm(np.einsum("ij,mj->mi", wp[xi], g), axis=1)
            best = 0.0
            for s, cnt in zip(schemes, counts):
                near = np.linalg.norm(pts - pts[xi], axis=1) < s.r
                means = _window_sum(grid, phi, s)[near] / cnt[near]
                local = float(np.max(means))
                if local > best:
                    best = local
            out[xi] = best
    return ScalarWeightField(grid, out)


def cg_domination_constant(f: SampledVectorField, w: MatrixWeightField, p: float,
                           radii: list[float] | None = None) -> float:
    """Measured constant C in |W^{1/p}(x) S_r f(x)| <= C * M_w(W^{1/p} f)(x).

    The maximum ratio over all grid points and family radii; the ball at x
    itself belongs to the family, so the mathematical value is at most 1.
    """
    grid = f.grid
    if radii is None:
        radii = dyadic_radii(grid)
    wp = w.power(1.0 / p)
    wpf = SampledVectorField(grid, np.einsum("mij,mj->mi", wp, f.values))
    maximal = christ_goldberg_maximal(wpf, w, p, radii).values
    lebesgue = MeasureDensity.lebesgue(grid)
    worst = 0.0
    for r in radii:
        sr = ball_average(f, lebesgue, BallScheme(grid, r, lebesgue))
        lhs = np.linalg.norm(np.einsum("mij,mj->mi", wp, sr.values), axis=1)
        mask = maximal > 1e-14 * np.max(maximal + 1e-300)
        if not np.any(mask):
            continue
        ratio = float(np.max(lhs[mask] / maximal[mask]))
        worst = max(worst, ratio)
    return worst


# ---------------------------------------------------------------------------
# instance probes


def differentiation_errors(f: SampledVectorField, mu: MeasureDensity,
                           radii: list[float]) -> list[tuple[float, float]]:
    """Pointwise convergence probe: sup over interior points of |S_r f - f|.

    Interior means the ball at the point is not clipped by the box.  Returns
    (r, sup_error) pairs in the order given.
    """
    grid = f.grid
    out = []
    for r in radii:
        scheme = BallScheme(grid, r, mu)
        sr = ball_average(f, mu, scheme)
        interior = grid.radii <= grid.L - r
        if not np.any(interior):
            raise ValueError(f"no interior points for radius {r}")
        err = np.linalg.norm(sr.values - f.values, axis=1)
        out.append((r, float(np.max(err[interior]))))
    return out


def averaging_bound(fields: list[SampledVectorField], w: MatrixWeightField, p: float,
                    radii: list[float], mu: MeasureDensity | None = None) -> float:
    """Measured sup over fields and radii of ||S_r f|| / ||f|| in L^p(W)."""
    grid = w.grid
    dens = mu if mu is not None else MeasureDensity.lebesgue(grid)
    worst = 0.0
    for r in radii:
        scheme = BallScheme(grid, r, dens)
        for f in fields:
            denom = lp_w_norm(f, w, p)
            if denom <= 0:
                continue
            num = lp_w_norm(ball_average(f, dens, scheme), w, p)
            worst = max(worst, num / denom)
    return worst
