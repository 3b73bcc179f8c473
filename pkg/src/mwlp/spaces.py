"""Norms and modulars on sampled vector fields.

Covers the constant-exponent matrix-weighted norm, norm families with a
per-point evaluator, variable-exponent modulars with the Luxemburg norm,
ellipsoidal fitting of a single norm, and the degenerate Sobolev norm.
All integrals are midpoint-rule quadratures on the field's grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateNorm,
    NonFinite,
    NormAxiomViolation,
    ShapeMismatch,
)
from .grids import Grid
from .weight_fields import MatrixWeightField, MeasureDensity

#: Luxemburg bisection: relative tolerance and iteration cap
LUX_TOL = 1e-8
LUX_MAX_ITER = 200

#: ellipsoid fit: duality gap, iteration cap, default samples per dimension
MVEE_GAP = 1e-7
MVEE_MAX_ITER = 10_000
JOHN_SAMPLES_PER_DIM = 200
#: margin applied to the calibrated rescaling so the lower sandwich bound
#: survives fresh test directions between calibration samples
JOHN_SCALE_MARGIN = 1.01


@dataclass
class SampledVectorField:
    """C^d-valued samples at the cell centers of a grid, shape (M, d)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] != self.grid.num_points:
            raise ShapeMismatch(f"expected (M, d) with M={self.grid.num_points}, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise NonFinite("vector field has non-finite values")
        v.setflags(write=False)
        self.values = v

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_function(cls, grid: Grid, fn, d: int | None = None) -> "SampledVectorField":
        vals = np.asarray(fn(grid.points), dtype=np.complex128)
        if vals.ndim == 1:
            vals = vals[:, None]
        if d is not None and vals.shape[1] != d:
            raise ShapeMismatch(f"function returned d={vals.shape[1]}, expected {d}")
        return cls(grid, vals)

    @classmethod
    def zero(cls, grid: Grid, d: int) -> "SampledVectorField":
        return cls(grid, np.zeros((grid.num_points, d), dtype=np.complex128))

    def __sub__(self, other: "SampledVectorField") -> "SampledVectorField":
        _check_same_shape(self, other)
        return SampledVectorField(self.grid, self.values - other.values)

    def __add__(self, other: "SampledVectorField") -> "SampledVectorField":
        _check_same_shape(self, other)
        return SampledVectorField(self.grid, self.values + other.values)

    def scaled(self, c: complex) -> "SampledVectorField":
        return SampledVectorField(self.grid, c * self.values)

    def masked(self, mask: np.ndarray) -> "SampledVectorField":
        vals = np.where(mask[:, None], self.values, 0.0)
        return SampledVectorField(self.grid, vals)


def _check_same_shape(f: SampledVectorField, g: SampledVectorField):
    if f.grid != g.grid or f.d != g.d:
        raise ShapeMismatch("fields live on different grids or dimensions")


@dataclass
class ExponentField:
    """Bounded exponent function p(x) in [1, p_+] sampled at cell centers."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.num_points,):
            raise ShapeMismatch(f"expected ({self.grid.num_points},), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise NonFinite("exponent field has non-finite values")
        if np.any(v < 1.0):
            raise ValueError("exponents must satisfy p(x) >= 1")
        v.setflags(write=False)
        self.values = v
        self.p_plus = float(np.max(v))
        self.p_minus = float(np.min(v))

    @classmethod
    def constant(cls, grid: Grid, p: float) -> "ExponentField":
        return cls(grid, np.full(grid.num_points, float(p)))

    @property
    def is_constant(self) -> bool:
        return self.p_plus == self.p_minus


class NormFamily:
    """Family of norms rho_x on C^d, one per grid point.

    Either derived from a matrix weight as rho_x(v) = |W^{1/p}(x) v|, or
    supplied as a vectorized oracle (points, values) -> per-point norms.
    Oracle-backed families are spot-checked for absolute homogeneity and
    the triangle inequality on random samples at construction.
    """

    def __init__(self, grid: Grid, d: int, evaluator, description: str = "",
                 validate: bool = False, rng: np.random.Generator | None = None):
        self.grid = grid
        self.d = d
        self._evaluator = evaluator
        self.description = description
        if validate:
            self._spot_check(rng or np.random.default_rng(0))

    @classmethod
    def from_matrix_weight(cls, w: MatrixWeightField, p: float) -> "NormFamily":
        wp = w.power(1.0 / p)
        wp.setflags(write=False)
        if w.d == 1:
            scal = wp[:, 0, 0].real.copy()
            scal.setflags(write=False)

            def evaluator(values):
                return scal * np.abs(values[..., 0])
        else:
            def evaluator(values):
                return np.linalg.norm(
                    np.einsum("mij,...mj->...mi", wp, values), axis=-1)

        fam = cls(w.grid, w.d, evaluator, description=f"|W^(1/{p}) v| from matrix weight")
        fam.weight = w
        fam.p_used = p
        return fam

    @classmethod
    def from_oracle(cls, grid: Grid, d: int, fn, description: str = "oracle norm family",
                    rng: np.random.Generator | None = None) -> "NormFamily":
        def evaluator(values):
            return np.asarray(fn(grid.points, values), dtype=np.float64)

        return cls(grid, d, evaluator, description=description, validate=True, rng=rng)

    def evaluate(self, values: np.ndarray) -> np.ndarray:
        """Per-point norms rho_x(values[x]), shape (M,)."""
        out = np.asarray(self._evaluator(values), dtype=np.float64)
        if out.shape != (self.grid.num_points,):
            raise ShapeMismatch("norm evaluator returned a wrong shape")
        return out

    def _spot_check(self, rng: np.random.Generator, samples: int = 4, tol: float = 1e-8):
        m = self.grid.num_points
        zero = np.zeros((m, self.d), dtype=np.complex128)
        if np.any(np.abs(self.evaluate(zero)) > tol):
            raise NormAxiomViolation("rho_x(0) != 0")
        for _ in range(samples):
            v = rng.standard_normal((m, self.d)) + 1j * rng.standard_normal((m, self.d))
            w = rng.standard_normal((m, self.d)) + 1j * rng.standard_normal((m, self.d))
            c = complex(rng.standard_normal(), rng.standard_normal())
            rv, rw = self.evaluate(v), self.evaluate(w)
            scale = np.maximum(rv, 1.0)
            if np.any(np.abs(self.evaluate(c * v) - abs(c) * rv) > tol * np.abs(c) * scale + tol):
                raise NormAxiomViolation("absolute homogeneity fails on samples")
            if np.any(self.evaluate(v + w) > rv + rw + tol * np.maximum(rv + rw, 1.0)):
                raise NormAxiomViolation("triangle inequality fails on samples")


# ---------------------------------------------------------------------------
# norms and modulars


def lp_w_norm(f: SampledVectorField, w: MatrixWeightField, p: float,
              mu: MeasureDensity | None = None) -> float:
    """|| f ||_{L^p(W)} = ( integral |W^{1/p}(x) f(x)|^p dmu )^{1/p}.

    mu defaults to Lebesgue measure.  For d = 1 this reduces to the scalar
    weighted norm ( integral w |f|^p dmu )^{1/p} computed directly.
    """
    if f.grid != w.grid or f.d != w.d:
        raise ShapeMismatch("field and weight do not match")
    if w.d == 1:
        wv = w.values[:, 0, 0].real
        dens = wv * np.abs(f.values[:, 0]) ** p
    else:
        wp = w.power(1.0 / p)
        dens = np.linalg.norm(np.einsum("mij,mj->mi", wp, f.values), axis=1) ** p
    if mu is not None:
        if mu.grid != f.grid:
            raise ShapeMismatch("density grid mismatch")
        dens = dens * mu.values
    return float(f.grid.quadrature(dens) ** (1.0 / p))


def lp_rho_norm(f: SampledVectorField, rho: NormFamily, p: float,
                mu: MeasureDensity | None = None) -> float:
    """|| f ||_{L^p(rho)} for a norm family, with optional density measure."""
    if f.grid != rho.grid or f.d != rho.d:
        raise ShapeMismatch("field and norm family do not match")
    dens = rho.evaluate(f.values) ** p
    if mu is not None:
        dens = dens * mu.values
    return float(f.grid.quadrature(dens) ** (1.0 / p))


def modular(f: SampledVectorField, rho: NormFamily, pf: ExponentField) -> float:
    """Variable-exponent modular: integral of rho_x(f(x))^{p(x)} dx."""
    if f.grid != rho.grid or f.d != rho.d:
        raise ShapeMismatch("field and norm family do not match")
    if pf.grid != f.grid:
        raise ShapeMismatch("exponent field grid mismatch")
    dens = np.power(rho.evaluate(f.values), pf.values)
    return float(f.grid.quadrature(dens))


def luxemburg_norm(f: SampledVectorField, rho: NormFamily, pf: ExponentField) -> float:
    """Luxemburg norm: inf { lam > 0 : modular(f / lam) <= 1 }, by bisection.

    The modular of f / lam is strictly decreasing in lam for nonzero f, so
    bisection on the bracket [min, max] of modular^{1/p_-}, modular^{1/p_+}
    is safe; the upper end is doubled if the modular there still exceeds 1.
    """
    mu0 = modular(f, rho, pf)
    if not np.isfinite(mu0):
        raise NonFinite("modular is not finite")
    if mu0 == 0.0:
        return 0.0

    rho_vals = rho.evaluate(f.values)
    pv = pf.values
    hn = f.grid.h ** f.grid.n

    def modular_scaled(lam: float) -> float:
        return float(np.sum(np.power(rho_vals / lam, pv)) * hn)

    ends = (mu0 ** (1.0 / pf.p_minus), mu0 ** (1.0 / pf.p_plus))
    lo = max(min(ends), 1e-12)
    hi = max(ends) + 1.0
    guard = 0
    while modular_scaled(hi) > 1.0 and guard < 60:
        hi *= 2.0
        guard += 1
    for _ in range(LUX_MAX_ITER):
        if hi - lo <= LUX_TOL * max(hi, 1e-12):
            break
        mid = 0.5 * (lo + hi)
        if modular_scaled(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return float(0.5 * (lo + hi))


# ---------------------------------------------------------------------------
# space descriptor: one object that knows how to size and compare fields


class Space:
    """A weighted function space: evaluates norms, modulars and distances.

    Three flavors:
      * matrix_weight(W, p, mu): L^p(W, mu), constant exponent,
      * norm_family(rho, p, mu): L^p(rho, mu), constant exponent,
      * variable(rho, pf): L^{p(.)}(rho) with the Luxemburg norm; sizes
        are modulars ("bounded in the sense of the modular").

    For p < 1 the distance is the p-th power of the quasi-norm, which is
    subadditive and safe for covering arguments.
    """

    def __init__(self, grid: Grid, d: int, rho: NormFamily, *, p: float | None = None,
                 exponent: ExponentField | None = None, mu: MeasureDensity | None = None,
                 label: str = ""):
        if (p is None) == (exponent is None):
            raise ValueError("exactly one of p, exponent must be given")
        if exponent is not None and mu is not None:
            raise ValueError("variable-exponent spaces are defined against Lebesgue measure")
        self.grid = grid
        self.d = d
        self.rho = rho
        self.p = p
        self.exponent = exponent
        self.mu = mu
        self.label = label or "space"

    @classmethod
    def matrix_weight(cls, w: MatrixWeightField, p: float,
                      mu: MeasureDensity | None = None) -> "Space":
        rho = NormFamily.from_matrix_weight(w, p)
        sp = cls(w.grid, w.d, rho, p=p, mu=mu, label=f"L^{p}(W{', mu' if mu else ''})")
        sp.weight = w
        return sp

    @classmethod
    def norm_family(cls, rho: NormFamily, p: float,
                    mu: MeasureDensity | None = None) -> "Space":
        return cls(rho.grid, rho.d, rho, p=p, mu=mu, label=f"L^{p}(rho{', mu' if mu else ''})")

    @classmethod
    def variable(cls, rho: NormFamily, exponent: ExponentField) -> "Space":
        return cls(rho.grid, rho.d, rho, exponent=exponent,
                   label=f"L^p(.)(rho), p in [{exponent.p_minus}, {exponent.p_plus}]")

    @property
    def is_variable(self) -> bool:
        return self.exponent is not None

    def norm(self, f: SampledVectorField) -> float:
        if self.is_variable:
            return luxemburg_norm(f, self.rho, self.exponent)
        return lp_rho_norm(f, self.rho, self.p, self.mu)

    def modular(self, f: SampledVectorField) -> float:
        if self.is_variable:
            return modular(f, self.rho, self.exponent)
        return self.norm(f) ** self.p

    def size(self, f: SampledVectorField) -> float:
        """Boundedness functional: the modular for variable exponents, else the norm."""
        return self.modular(f) if self.is_variable else self.norm(f)

    def dist(self, f: SampledVectorField, g: SampledVectorField) -> float:
        """Covering metric: norm of the difference; modular form for p < 1."""
        diff = f - g
        if self.is_variable:
            return luxemburg_norm(diff, self.rho, self.exponent)
        nrm = lp_rho_norm(diff, self.rho, self.p, self.mu)
        return nrm ** self.p if self.p < 1.0 else nrm


# ---------------------------------------------------------------------------
# ellipsoidal fit of a single norm (John ellipsoid)


def _mvee_centered(points: np.ndarray, gap_tol: float = MVEE_GAP,
                   max_iter: int = MVEE_MAX_ITER) -> np.ndarray:
    """Minimum-volume origin-centered ellipsoid of a symmetric point cloud.

    Khachiyan-style multiplicative updates on the design weights u:
    at each step the point with the largest w_j = v_j^H M(u)^{-1} v_j,
    M(u) = sum u_j v_j v_j^H, receives the exact line-search weight
    alpha = (w/d - 1)/(w - 1).  M^{-1} and w are maintained by rank-one
    Sherman-Morrison updates with periodic refreshes; points whose
    constraint is clearly slack are pruned, and containment over the full
    input cloud is enforced exactly by a final rescale (so pruning can only
    cost a sliver of optimality, never validity).
    """
    m, d = points.shape
    pts = points
    conj = points.conj()
    u = np.full(m, 1.0 / m)

    def refresh():
        mu_mat = (pts * u[:, None]).T @ conj
        minv = np.linalg.inv(mu_mat)
        w = np.einsum("ji,ij->j", conj, minv @ pts.T).real
        return minv, w

    minv, w = refresh()
    for it in range(max_iter):
        r = int(np.argmax(w))
        wr = float(w[r])
        if wr <= d * (1.0 + gap_tol):
            break
        alpha = (wr / d - 1.0) / (wr - 1.0)
        u *= 1.0 - alpha
        u[r] += alpha
        # Sherman-Morrison update of M^{-1} and of all w_j
        b = minv @ pts[r]
        t = conj @ b
        denom = 1.0 - alpha + alpha * wr
        minv = (minv - (alpha / denom) * np.outer(b, b.conj())) / (1.0 - alpha)
        w = (w - (alpha / denom) * np.abs(t) ** 2) / (1.0 - alpha)
        if it % 500 == 499:
            if pts.shape[0] > 4 * d:
                keep = (u > 1e-12) | (w > 0.8 * d)
                if np.count_nonzero(keep) >= 2 * d and np.count_nonzero(~keep) > 0:
                    pts = pts[keep]
                    conj = conj[keep]
                    u = u[keep]
                    u /= np.sum(u)
            minv, w = refresh()
    mu_mat = (pts * u[:, None]).T @ conj
    a = np.linalg.inv(mu_mat) / d
    a = 0.5 * (a + a.conj().T)
    # exact containment over the full cloud: scale so max_j v^H A v = 1
    vals = np.einsum("ji,ik,jk->j", points.conj(), a, points).real
    return a / float(np.max(vals))


def _psd_sqrt(a: np.ndarray) -> np.ndarray:
    lam, u = np.linalg.eigh(a)
    lam = np.maximum(lam, 0.0)
    out = (u * np.sqrt(lam)) @ u.conj().T
    return 0.5 * (out + out.conj().T)


def _eval_norm(rho, vecs: np.ndarray) -> np.ndarray:
    """Evaluate a single norm on a (K, d) batch, accepting scalar callables."""
    try:
        out = np.asarray(rho(vecs), dtype=np.float64)
        if out.shape == (vecs.shape[0],):
            return out
    except Exception:
        pass
    return np.array([float(rho(v)) for v in vecs], dtype=np.float64)


def john_ellipsoid(rho, d: int, sphere_samples: int | None = None,
                   rng: np.random.Generator | None = None,
                   calibration_samples: int = 2000,
                   refinement_rounds: int = 3) -> np.ndarray:
    """Fit a positive-definite W with rho(v) <= |W v| <= sqrt(d)(1+delta) rho(v).

    Random directions are normalized onto the rho-unit sphere, the sample is
    symmetrized, and the minimum-volume centered ellipsoid of the cloud is
    computed by multiplicative updates.  Because random directions can miss
    the extremal support of spiky unit balls, the fit is refined: a probe
    batch locates the directions where the ellipsoid most exceeds the norm
    and appends them to the sample before refitting.  The ellipsoid form is
    converted to W and rescaled by a single scalar so the left inequality is
    tight on the calibration sample (a 1% margin keeps it valid on fresh
    directions).
    """
    if rng is None:
        rng = np.random.default_rng(0)
    if sphere_samples is None:
        sphere_samples = JOHN_SAMPLES_PER_DIM * d

    def unit_sphere(count: int) -> np.ndarray:
        vecs = rng.standard_normal((count, d)) + 1j * rng.standard_normal((count, d))
        norms = _eval_norm(rho, vecs)
        good = norms > 1e-12
        if not np.all(np.isfinite(norms)) or np.sum(good) < count // 2:
            raise DegenerateNorm("norm oracle produced non-finite or zero values")
        return vecs[good] / norms[good][:, None]

    axes = np.eye(d, dtype=np.complex128)
    axis_norms = _eval_norm(rho, axes)
    if np.any(axis_norms <= 1e-12) or not np.all(np.isfinite(axis_norms)):
        raise DegenerateNorm("norm oracle degenerate along coordinate axes")
    sample = np.concatenate([axes / axis_norms[:, None], unit_sphere(sphere_samples)])
    # rank check on the cloud
    gram = sample.conj().T @ sample
    lam = np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))
    if lam[0] <= 1e-10 * max(lam[-1], 1.0):
        raise DegenerateNorm("sampled sphere points are rank-deficient")

    w_raw = None
    for _round in range(max(refinement_rounds, 1)):
        symmetrized = np.concatenate([sample, -sample], axis=0)
        a = _mvee_centered(symmetrized)
        w_raw = _psd_sqrt(a)
        if _round == refinement_rounds - 1:
            break
        probe = unit_sphere(4 * sphere_samples)
        excess = np.linalg.norm(probe @ w_raw.T, axis=1)  # rho = 1 on the probe
        worst = np.argsort(excess)[-max(sphere_samples // 8, 8):]
        if float(excess[worst[-1]]) <= 1.0 + 1e-9:
            break
        sample = np.concatenate([sample, probe[worst]])

    calib = np.concatenate([sample, unit_sphere(calibration_samples)], axis=0)
    rho_vals = _eval_norm(rho, calib)
    ellip_vals = np.linalg.norm(calib @ w_raw.T, axis=1)
    c = JOHN_SCALE_MARGIN * float(np.max(rho_vals / ellip_vals))
    return c * w_raw


# ---------------------------------------------------------------------------
# degenerate Sobolev norm


def gradient(f: SampledVectorField) -> SampledVectorField:
    """Gradient of a scalar field by central differences, one-sided at faces.

    Returns an n-component field on the same grid.
    """
    if f.d != 1:
        raise ShapeMismatch("gradient is defined for scalar fields")
    grid = f.grid
    h = grid.h
    vals = f.values[:, 0].reshape(grid.shape)
    comps = []
    for ax in range(grid.n):
        g = np.empty_like(vals)
        sl = [slice(None)] * grid.n

        def take(i0, i1):
            s = sl.copy()
            s[ax] = slice(i0, i1)
            return tuple(s)

        g[take(1, -1)] = (vals[take(2, None)] - vals[take(None, -2)]) / (2 * h)
        g[take(0, 1)] = (vals[take(1, 2)] - vals[take(0, 1)]) / h
        g[take(-1, None)] = (vals[take(-1, None)] - vals[take(-2, -1)]) / h
        comps.append(g.ravel())
    return SampledVectorField(grid, np.stack(comps, axis=1))


def degenerate_sobolev_norm(f: SampledVectorField, w: MatrixWeightField, p: float) -> float:
    """||f||_{L^p(v)} + ||grad f||_{L^p(W)} with v = ||W||_op pointwise.

    f must be scalar-valued and W must have d equal to the grid dimension.
    """
    if f.d != 1:
        raise ShapeMismatch("degenerate Sobolev norm takes a scalar field")
    if w.grid != f.grid or w.d != f.grid.n:
        raise ShapeMismatch("weight dimension must equal the grid dimension")
    v = w.op_norm_field()
    zero_dens = v.values * np.abs(f.values[:, 0]) ** p
    zero_term = f.grid.quadrature(zero_dens) ** (1.0 / p)
    grad_term = lp_w_norm(gradient(f), w, p)
    return float(zero_term + grad_term)
