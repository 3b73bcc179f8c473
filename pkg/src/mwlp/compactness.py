"""Compactness moduli, constructive epsilon-nets and their certificates.

The three moduli (boundedness, tail, equicontinuity in its translation,
twisted and averaging variants) quantify the hypotheses of the covering
constructions; the net builders execute those constructions and measure
the constants they achieve instead of assuming any implicit ones.  Every
net carries a brute-force certificate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ModuliTooLarge,
    NotInvertible,
    NotTotallyBoundedInput,
    RadiusExceedsBox,
    SchemeMismatch,
    ShapeMismatch,
)
from .grids import Grid
from .operators import (
    BallScheme,
    DyadicScheme,
    ball_average,
    dyadic_average,
    shift_values,
    translate,
)
from .spaces import SampledVectorField, Space, lp_w_norm
from .weight_fields import MatrixWeightField, MeasureDensity, ScalarWeightField


@dataclass
class FunctionFamily:
    """A finite sampled family sharing one grid, with optional provenance."""

    members: list
    metadata: str = ""

    def __post_init__(self):
        if len(self.members) == 0:
            raise ValueError("function family must be nonempty")
        g = self.members[0].grid
        d = self.members[0].d
        for f in self.members:
            if f.grid != g or f.d != d:
                raise ShapeMismatch("family members have inconsistent shapes")

    @property
    def grid(self) -> Grid:
        return self.members[0].grid

    @property
    def d(self) -> int:
        return self.members[0].d

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, k: int) -> SampledVectorField:
        return self.members[k]


@dataclass
class ModuliReport:
    """Measured boundedness, tail and equicontinuity curves of a family."""

    bound: float
    tail_curve: list
    equi_curve: list
    notion: str
    space_label: str
    family_metadata: str = ""

    def as_dict(self) -> dict:
        return {
            "bound": self.bound,
            "tail_curve": [[r, v] for r, v in self.tail_curve],
            "equicontinuity_curve": [[r, v] for r, v in self.equi_curve],
            "notion": self.notion,
            "space": self.space_label,
            "family": self.family_metadata,
        }


@dataclass
class EpsilonNet:
    """Net centers with a per-member certificate.

    Every member was matched to its nearest center; the recorded constant
    c_net is the measured max distance divided by epsilon.
    """

    epsilon: float
    centers: list
    assignment: list
    distances: list
    c_net: float
    route: str
    params: dict = field(default_factory=dict)
    space_label: str = ""

    @property
    def size(self) -> int:
        return len(self.centers)


@dataclass
class Certificate:
    passed: bool
    worst_member: int
    worst_distance: float
    threshold: float
    distances: list

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "worst_member": self.worst_member,
            "worst_distance": self.worst_distance,
            "threshold": self.threshold,
            "per_member_distance": list(self.distances),
        }


def default_radius_ladder(grid: Grid) -> list[float]:
    L = grid.L
    return [L / 8, L / 4, L / 2, 3 * L / 4]


def default_scale_ladder(grid: Grid) -> list[float]:
    """Dyadic scales 2h, 4h, ... up to L/4."""
    out = []
    s = 2.0 * grid.h
    while s <= grid.L / 4 * (1 + 1e-12):
        out.append(s)
        s *= 2.0
    return out


# ---------------------------------------------------------------------------
# moduli


def boundedness_modulus(family: FunctionFamily, space: Space) -> float:
    """sup over members of the space size (norm, or modular when variable)."""
    return max(space.size(f) for f in family)


def tail_modulus(family: FunctionFamily, R: float, space: Space) -> float:
    """sup over members of the size of f restricted to {|x| >= R}."""
    grid = family.grid
    if R >= grid.L:
        raise RadiusExceedsBox(f"tail radius {R} must be below L={grid.L}")
    if R < 0:
        raise ValueError("tail radius must be non-negative")
    mask = grid.outside_ball(R)
    return max(space.size(f.masked(mask)) for f in family)


def translation_modulus(family: FunctionFamily, r: float, space: Space) -> float:
    """sup over members and lattice shifts 0 < |y| <= r of the size of tau_y f - f."""
    grid = family.grid
    worst = 0.0
    for f in family:
        for k in grid.lattice_shifts(r):
            diff = SampledVectorField(
                grid, shift_values(f.values, grid, k) - f.values)
            worst = max(worst, space.size(diff))
    return worst


def _diagonalized(family: FunctionFamily, w: MatrixWeightField):
    """Pointwise diagonalization: D(x) = diag(eigenvalues), f~ = U^H f."""
    lam, u = w.eig()
    m, d = lam.shape
    diag = np.zeros((m, d, d), dtype=np.complex128)
    idx = np.arange(d)
    diag[:, idx, idx] = np.maximum(lam, 0.0)
    d_field = MatrixWeightField(w.grid, diag, invertible=w.invertible)
    tilted = [
        SampledVectorField(f.grid, np.einsum("mji,mj->mi", u.conj(), f.values))
        for f in family
    ]
    return d_field, FunctionFamily(tilted, metadata=family.metadata + " (diagonalized)")


def twisted_modulus(family: FunctionFamily, w: MatrixWeightField, p: float, r: float) -> float:
    """Equicontinuity after pointwise diagonalization: the translation modulus
    of f~ = U^H f in L^p(D), D = diag of the eigenvalue functions of W."""
    if w.grid != family.grid or w.d != family.d:
        raise ShapeMismatch("weight does not match the family")
    d_field, tilted = _diagonalized(family, w)
    return translation_modulus(tilted, r, Space.matrix_weight(d_field, p))


def averaging_modulus(family: FunctionFamily, space: Space, r: float,
                      eval_radius: float | None = None) -> float:
    """sup over members of ||(S_r f - f) chi_{B(0, R_eval)}||.

    S_r averages against the space's measure.  The default evaluation
    region keeps every ball unclipped: R_eval = L - r.
    """
    grid = family.grid
    mu = space.mu if space.mu is not None else MeasureDensity.lebesgue(grid)
    if eval_radius is None:
        eval_radius = grid.L - r
    if eval_radius <= 0 or eval_radius + r > grid.L * (1 + 1e-12):
        raise RadiusExceedsBox(f"evaluation radius {eval_radius} plus r={r} exceeds the box")
    scheme = BallScheme(grid, r, mu)
    mask = grid.inside_ball(eval_radius)
    worst = 0.0
    for f in family:
        diff = ball_average(f, mu, scheme) - f
        worst = max(worst, space.size(diff.masked(mask)))
    return worst


def moduli_report(family: FunctionFamily, space: Space, notion: str = "translation",
                  radius_ladder: list[float] | None = None,
                  scale_ladder: list[float] | None = None,
                  weight: MatrixWeightField | None = None,
                  p: float | None = None) -> ModuliReport:
    """Measure the boundedness, tail and equicontinuity curves on the ladders."""
    grid = family.grid
    radii = radius_ladder if radius_ladder is not None else default_radius_ladder(grid)
    scales = scale_ladder if scale_ladder is not None else default_scale_ladder(grid)
    bound = boundedness_modulus(family, space)
    tail = [(R, tail_modulus(family, R, space)) for R in radii]
    if notion == "translation":
        equi = [(r, translation_modulus(family, r, space)) for r in scales]
    elif notion == "twisted":
        w = weight if weight is not None else getattr(space, "weight", None)
        if w is None:
            raise ValueError("twisted notion requires a matrix weight")
        pp = p if p is not None else space.p
        equi = [(r, twisted_modulus(family, w, pp, r)) for r in scales]
    elif notion == "averaging":
        equi = [(r, averaging_modulus(family, space, r)) for r in scales]
    else:
        raise ValueError(f"unknown equicontinuity notion {notion!r}")
    return ModuliReport(bound=bound, tail_curve=tail, equi_curve=equi, notion=notion,
                        space_label=space.label, family_metadata=family.metadata)


# ---------------------------------------------------------------------------
# greedy covering


def greedy_cover(count: int, dist_fn, radius: float, max_centers: int | None = None):
    """Greedy farthest-point covering with first-index tie-breaking.

    dist_fn(i, j) must be a metric between items i and j.  Returns
    (center_item_indices, assignment, distances) with every item within
    radius of its assigned center.
    """
    cap = count if max_centers is None else max_centers
    centers = [0]
    dists = np.array([dist_fn(i, 0) for i in range(count)])
    assignment = np.zeros(count, dtype=int)
    while float(np.max(dists)) > radius:
        j = int(np.argmax(dists))
        if len(centers) + 1 > cap:
            raise NotTotallyBoundedInput(
                f"covering requires more than {cap} centers at radius {radius}")
        centers.append(j)
        for i in range(count):
            dij = dist_fn(i, j)
            if dij < dists[i]:
                dists[i] = dij
                assignment[i] = len(centers) - 1
    return centers, assignment.tolist(), dists.tolist()


# ---------------------------------------------------------------------------
# net builders


def _box_tail(family: FunctionFamily, half: float, space: Space) -> float:
    """sup over members of the size of f outside the box [-half, half)^n."""
    pts = family.grid.points
    outside = np.any((pts < -half) | (pts >= half), axis=1)
    return max(space.size(f.masked(outside)) for f in family)


def build_net_dyadic(family: FunctionFamily, epsilon: float, space: Space,
                     notion: str = "translation",
                     weight: MatrixWeightField | None = None,
                     max_centers: int | None = None) -> EpsilonNet:
    """Constructive net via dyadic averaging.

    Picks the smallest outer generation m with the tail beyond the box
    [-2^m, 2^m)^n under epsilon and the smallest ladder scale 2^t whose
    translation (or twisted) modulus is under epsilon, projects every member
    to its piecewise-constant average, and covers the projections greedily
    at radius epsilon.  Certificate distances are measured in the ambient
    space against the piecewise-constant centers.
    """
    grid = family.grid
    # outer generation: dyadic half-widths up to L
    m_candidates = []
    mm = int(np.ceil(np.log2(max(4 * grid.h, 1e-12))))
    while 2.0 ** mm <= grid.L * (1 + 1e-12):
        m_candidates.append(mm)
        mm += 1
    chosen_m = None
    tail_value = None
    for m in m_candidates:
        v = _box_tail(family, 2.0 ** m, space)
        if v < epsilon:
            chosen_m = m
            tail_value = v
            break
    if chosen_m is None:
        raise ModuliTooLarge(f"no dyadic box keeps the tail under {epsilon}")

    scale_candidates = []
    for s in default_scale_ladder(grid):
        if s > 2.0 ** chosen_m:
            continue
        t = int(round(np.log2(s)))
        if abs(2.0 ** t - s) <= 1e-9 * s:
            scale_candidates.append((s, t))
    if not scale_candidates:
        raise SchemeMismatch(
            "no ladder scale is an exact power of two on this grid; "
            "dyadic nets need L to be a power of two")
    chosen_t = None
    equi_value = None
    for s, t in scale_candidates:
        if notion == "twisted":
            w = weight if weight is not None else getattr(space, "weight", None)
            if w is None:
                raise ValueError("twisted notion requires a matrix weight")
            v = twisted_modulus(family, w, space.p, s)
        else:
            v = translation_modulus(family, s, space)
        if v < epsilon:
            chosen_t = t
            equi_value = v
            break
    if chosen_t is None:
        raise ModuliTooLarge(f"no ladder scale keeps the {notion} modulus under {epsilon}")

    scheme = DyadicScheme(grid, chosen_m, chosen_t)
    projections = [dyadic_average(f, scheme) for f in family]
    proj_err = max(space.dist(f, g) for f, g in zip(family, projections))

    def dist_fn(i: int, j: int) -> float:
        return space.dist(projections[i], projections[j])

    center_idx, assignment, _proj_d = greedy_cover(len(family), dist_fn, epsilon, max_centers)
    centers = [projections[k] for k in center_idx]
    distances = [space.dist(family[i], centers[assignment[i]]) for i in range(len(family))]
    worst = max(distances)
    net = EpsilonNet(
        epsilon=epsilon,
        centers=centers,
        assignment=assignment,
        distances=distances,
        c_net=worst / epsilon,
        route="dyadic",
        params={
            "m": chosen_m,
            "t": chosen_t,
            "num_cubes": scheme.num_cubes,
            "notion": notion,
            "tail_value": tail_value,
            "equicontinuity_value": equi_value,
            "projection_error": proj_err,
            "center_members": [int(k) for k in center_idx],
        },
        space_label=space.label,
    )
    cert = certify_net(family, net, space)
    if not cert.passed:
        raise AssertionError("freshly built net failed its own certificate")
    return net


def build_net_average(family: FunctionFamily, epsilon: float, w: MatrixWeightField,
                      mu: MeasureDensity | None, p: float,
                      radius_ladder: list[float] | None = None,
                      scale_ladder: list[float] | None = None,
                      max_centers: int | None = None) -> EpsilonNet:
    """Constructive net via ball averaging with the epsilon/3 budget split.

    Chooses R with tail under epsilon/3 and r with the averaging modulus on
    B(0, R) under epsilon/3, then clusters the averaged members in the
    uniform norm at radius epsilon / A, where
    A = 3 (integral over B(0, R) of ||W||_op dmu)^{1/p}.  Centers are the
    averaged representatives restricted to B(0, R).
    """
    if p < 1.0:
        raise ValueError("the averaging route needs p >= 1; use the dyadic route for p < 1")
    if p == 1.0 and not w.invertible:
        raise NotInvertible("p = 1 needs an invertible weight with bounded inverse")
    grid = family.grid
    dens = mu if mu is not None else MeasureDensity.lebesgue(grid)
    space = Space.matrix_weight(w, p, dens)
    radii = radius_ladder if radius_ladder is not None else default_radius_ladder(grid)
    scales = scale_ladder if scale_ladder is not None else default_scale_ladder(grid)

    chosen_R = None
    tail_value = None
    for R in radii:
        v = tail_modulus(family, R, space)
        if v < epsilon / 3:
            chosen_R = R
            tail_value = v
            break
    if chosen_R is None:
        raise ModuliTooLarge(f"no ladder radius keeps the tail under {epsilon / 3}")

    chosen_r = None
    avg_value = None
    for r in scales:
        if r >= chosen_R or chosen_R + r > grid.L * (1 + 1e-12):
            continue
        v = averaging_modulus(family, space, r, eval_radius=chosen_R)
        if v < epsilon / 3:
            chosen_r = r
            avg_value = v
            break
    if chosen_r is None:
        raise ModuliTooLarge(f"no ladder scale keeps the averaging modulus under {epsilon / 3}")

    inside = grid.inside_ball(chosen_R)
    op_norms = w.op_norm_field().values
    a_const = 3.0 * float(np.sum(op_norms[inside] * dens.values[inside])
                          * grid.h ** grid.n) ** (1.0 / p)

    scheme = BallScheme(grid, chosen_r, dens)
    averaged = [ball_average(f, dens, scheme) for f in family]
    stacked = np.stack([g.values for g in averaged])

    def dist_uniform(i: int, j: int) -> float:
        diff = stacked[i][inside] - stacked[j][inside]
        return float(np.max(np.linalg.norm(diff, axis=1)))

    uniform_radius = epsilon / a_const
    center_idx, assignment, uniform_d = greedy_cover(
        len(family), dist_uniform, uniform_radius, max_centers)
    centers = [averaged[k].masked(inside) for k in center_idx]
    distances = [space.dist(family[i], centers[assignment[i]]) for i in range(len(family))]
    worst = max(distances)
    net = EpsilonNet(
        epsilon=epsilon,
        centers=centers,
        assignment=assignment,
        distances=distances,
        c_net=worst / epsilon,
        route="average",
        params={
            "R": chosen_R,
            "r": chosen_r,
            "A": a_const,
            "budgets": {
                "tail": epsilon / 3,
                "averaging": epsilon / 3,
                "uniform_radius": uniform_radius,
            },
            "tail_value": tail_value,
            "averaging_value": avg_value,
            "worst_uniform_distance": float(np.max(uniform_d)),
            "center_members": [int(k) for k in center_idx],
        },
        space_label=space.label,
    )
    cert = certify_net(family, net, space)
    if not cert.passed:
        raise AssertionError("freshly built net failed its own certificate")
    return net


def certify_net(family: FunctionFamily, net: EpsilonNet, space: Space,
                epsilon: float | None = None, c_net: float | None = None) -> Certificate:
    """Brute-force recomputation of the covering property.

    For every member, the distance to its nearest center is recomputed and
    checked against c_net * epsilon (both default to the net's recorded
    values).  The worst member is reported either way.
    """
    eps = net.epsilon if epsilon is None else epsilon
    c = net.c_net if c_net is None else c_net
    threshold = c * eps
    dists = []
    for f in family:
        dmin = min(space.dist(f, g) for g in net.centers)
        dists.append(dmin)
    worst_idx = int(np.argmax(dists))
    worst = float(dists[worst_idx])
    passed = worst <= threshold * (1 + 1e-9) + 1e-15
    return Certificate(passed=passed, worst_member=worst_idx, worst_distance=worst,
                       threshold=threshold, distances=dists)


# ---------------------------------------------------------------------------
# necessity direction


@dataclass
class NecessityRow:
    epsilon: float
    net_size: int
    R: float
    r: float
    tail_value: float
    tail_bound: float
    averaging_value: float
    averaging_bound: float
    s_r_constant: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "net_size": self.net_size,
            "R": self.R,
            "r": self.r,
            "tail_value": self.tail_value,
            "tail_bound": self.tail_bound,
            "averaging_value": self.averaging_value,
            "averaging_bound": self.averaging_bound,
            "measured_s_r_constant": self.s_r_constant,
            "passed": self.passed,
        }


@dataclass
class NecessityReport:
    rows: list
    passed: bool
    space_label: str
    ap_value: float | None = None

    def as_dict(self) -> dict:
        return {
            "rows": [r.as_dict() for r in self.rows],
            "passed": self.passed,
            "space": self.space_label,
            "ap_constant": self.ap_value,
        }


def necessity_check(family: FunctionFamily, epsilons: list[float], w: MatrixWeightField,
                    p: float, mu: MeasureDensity | None = None,
                    radius_ladder: list[float] | None = None,
                    scale_ladder: list[float] | None = None,
                    max_centers: int | None = None,
                    ap_value: float | None = None) -> NecessityReport:
    """Mirror the necessity argument: from an epsilon-net of members, derive a
    tail radius R and an averaging scale r, then verify the family moduli
    against the triangle-inequality bounds with measured constants.

    Requires p > 1; ap_value, if supplied, documents the A_p estimate of the
    weight over the family used (the check itself does not recompute it).
    """
    if not p > 1:
        raise ValueError("the necessity characterization needs p > 1")
    grid = family.grid
    dens = mu if mu is not None else MeasureDensity.lebesgue(grid)
    space = Space.matrix_weight(w, p, dens)
    radii = radius_ladder if radius_ladder is not None else default_radius_ladder(grid)
    scales = scale_ladder if scale_ladder is not None else default_scale_ladder(grid)

    rows = []
    for eps in epsilons:
        def dist_fn(i: int, j: int) -> float:
            return space.dist(family[i], family[j])

        center_idx, assignment, _d = greedy_cover(len(family), dist_fn, eps, max_centers)
        centers = [family[k] for k in center_idx]

        # tail radius from the centers: R = max over centers of the smallest
        # ladder radius whose center tail is below eps
        per_center_R = []
        for g in centers:
            single = FunctionFamily([g])
            rk = None
            for R in radii:
                if tail_modulus(single, R, space) < eps:
                    rk = R
                    break
            per_center_R.append(rk if rk is not None else radii[-1])
        R_star = max(per_center_R)
        tail_val = tail_modulus(family, R_star, space)
        tail_bound = 2.0 * eps

        # averaging scale from the centers: the largest ladder scale at which
        # every center is eps-close to its average
        r_star = None
        for r in sorted(scales, reverse=True):
            if r >= grid.L / 2:
                continue
            ok = True
            for g in centers:
                if averaging_modulus(FunctionFamily([g]), space, r) >= eps:
                    ok = False
                    break
            if ok:
                r_star = r
                break
        if r_star is None:
            r_star = min(scales)

        # measured boundedness constant of S_r on the member-center differences
        scheme = BallScheme(grid, r_star, dens)
        cs = 0.0
        for i, f in enumerate(family):
            g = centers[assignment[i]]
            diff = f - g
            denom = space.norm(diff)
            if denom <= 1e-13:
                continue
            num = space.norm(ball_average(diff, dens, scheme).masked(
                grid.inside_ball(grid.L - r_star)))
            cs = max(cs, num / denom)
        avg_val = averaging_modulus(family, space, r_star)
        avg_bound = (2.0 + cs) * eps
        passed = tail_val <= tail_bound * (1 + 1e-9) and avg_val <= avg_bound * (1 + 1e-9)
        rows.append(NecessityRow(
            epsilon=eps, net_size=len(centers), R=R_star, r=r_star,
            tail_value=tail_val, tail_bound=tail_bound,
            averaging_value=avg_val, averaging_bound=avg_bound,
            s_r_constant=cs, passed=passed,
        ))
    return NecessityReport(rows=rows, passed=all(r.passed for r in rows),
                           space_label=space.label, ap_value=ap_value)


# ---------------------------------------------------------------------------
# componentwise reduction


@dataclass
class ComponentwiseReduction:
    """Scalar-weighted reductions of a vector family after diagonalization.

    Component i carries the family {(U^H f)_i} with the scalar weight
    lambda_i; the recombination ratios compare the diagonal-weighted norm of
    f~ with the sum of the component norms.
    """

    weights: list
    families: list
    diag_norms: list
    component_norms: np.ndarray
    ratios: np.ndarray

    @property
    def c_low(self) -> float:
        return float(np.min(self.ratios))

    @property
    def c_high(self) -> float:
        return float(np.max(self.ratios))


def componentwise_reduction(family: FunctionFamily, w: MatrixWeightField,
                            p: float) -> ComponentwiseReduction:
    """Split a family into d scalar-weighted families via diagonalization.

    Works for PSD weights without invertibility.  Ratios are reported only
    for members with a nonzero component-norm sum.
    """
    d_field, tilted = _diagonalized(family, w)
    lam, _u = w.eig()
    grid = family.grid
    d = family.d
    weights = [ScalarWeightField(grid, np.maximum(lam[:, i], 0.0)) for i in range(d)]
    comp_fields = [
        [SampledVectorField(grid, tf.values[:, i:i + 1]) for tf in tilted]
        for i in range(d)
    ]
    families = [FunctionFamily(fs, metadata=f"component {i}") for i, fs in enumerate(comp_fields)]

    diag_norms = [lp_w_norm(tf, d_field, p) for tf in tilted]
    k = len(family)
    comp_norms = np.zeros((k, d))
    for i in range(d):
        wfield = MatrixWeightField.from_scalar(weights[i])
        for j, g in enumerate(comp_fields[i]):
            comp_norms[j, i] = lp_w_norm(g, wfield, p)
    sums = comp_norms.sum(axis=1)
    ratios = np.array([dn / s for dn, s in zip(diag_norms, sums) if s > 1e-300])
    if ratios.size == 0:
        ratios = np.array([1.0])
    return ComponentwiseReduction(weights=weights, families=families,
                                  diag_norms=diag_norms, component_norms=comp_norms,
                                  ratios=ratios)


# ---------------------------------------------------------------------------
# dyadic approximation probe


def phi_error_constant(family: FunctionFamily, scheme: DyadicScheme, space: Space) -> dict:
    """Measured constant in the dyadic approximation estimate.

    Compares the modular of f - Phi(f) with the sum of the tail modular
    beyond the scheme's outer box and the translation modular at the cube
    scale; the returned constant is the worst ratio over the family.
    """
    half = scheme.outer_half
    scale = scheme.side
    c_worst = 0.0
    detail = []
    for f in family:
        err = space.modular(f - dyadic_average(f, scheme))
        tail_m = space.modular(f.masked(_outside_box_mask(family.grid, half)))
        trans_m = _translation_modular(f, scale, space)
        denom = tail_m + trans_m
        ratio = err / denom if denom > 0 else (0.0 if err == 0 else np.inf)
        c_worst = max(c_worst, ratio)
        detail.append({"error_modular": err, "tail_modular": tail_m,
                       "translation_modular": trans_m, "ratio": ratio})
    return {"constant": c_worst, "m": scheme.m, "t": scheme.t, "detail": detail}


def _outside_box_mask(grid: Grid, half: float) -> np.ndarray:
    pts = grid.points
    return np.any((pts < -half) | (pts >= half), axis=1)


def _translation_modular(f: SampledVectorField, scale: float, space: Space) -> float:
    grid = f.grid
    worst = 0.0
    for k in grid.lattice_shifts(scale):
        y = tuple(ki * grid.h for ki in k)
        worst = max(worst, space.modular(translate(f, y) - f))
    return worst
