"""Numerical rank checks for the nondegeneracy conditions behind the estimates.

Every condition is an open rank or critical-point statement about
Jacobians of the transformation (or diffeomorphism) family along the
surface; here each is sampled over a grid of parameters and directions,
reduced to singular values, and reported with the worst-case margin
sigma_required / sigma_1.  A pass certifies the condition on the sample
cloud at the stated tolerance, not globally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable

import numpy as np

from .families import TransformFamily, sphere_directions
from .geometry import SurfaceChart, chart_jacobian

__all__ = [
    "RankReport",
    "DiffeoFamily",
    "gamma_pullback",
    "check_condition_14",
    "check_condition_41",
    "check_condition_56",
    "check_condition_58",
    "check_condition_59",
    "check_christ_condition",
    "delta_s",
    "tangent_directions",
    "curve_derivatives",
    "reparametrize_family",
    "builtin_case_names",
    "run_builtin_check",
]

RANK_TOL = 1e-8


@dataclass
class RankReport:
    """Sampled singular-value verdict for one nondegeneracy condition.

    ``margins`` holds sigma_required/sigma_1 per sample; ``min_margin`` is
    their minimum and the check passes iff it exceeds ``tol``.  The verdict
    certifies the sampled cloud only.
    """

    condition: str
    n_samples: int
    min_margin: float
    tol: float
    passed: bool
    margins: np.ndarray = field(repr=False, default=None)
    worst_singular_values: np.ndarray = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        margins = np.asarray(self.margins, dtype=float)
        return {
            "condition": self.condition,
            "n_samples": int(self.n_samples),
            "min_margin": float(self.min_margin),
            "tol": float(self.tol),
            "pass": bool(self.passed),
            "margin_quartiles": [float(q) for q in
                                 np.percentile(margins, [0, 25, 50, 75, 100])],
            "worst_singular_values": [float(s) for s in
                                      np.asarray(self.worst_singular_values)],
            "sampled_only": True,
            "details": self.details,
        }


def _finish(condition, margins, tol, sv_per_sample, details) -> RankReport:
    margins = np.asarray(margins, dtype=float)
    iworst = int(np.argmin(margins))
    return RankReport(
        condition=condition,
        n_samples=len(margins),
        min_margin=float(margins[iworst]),
        tol=tol,
        passed=bool(margins[iworst] > tol),
        margins=margins,
        worst_singular_values=np.asarray(sv_per_sample[iworst]),
        details=details,
    )


# ---------------------------------------------------------------------------
# sampling helpers
# ---------------------------------------------------------------------------

def _box_grid(box: np.ndarray, counts) -> np.ndarray:
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    if np.isscalar(counts):
        counts = [int(counts)] * len(box)
    axes = [np.linspace(lo, hi, c + 2)[1:-1] if c > 1 else [0.5 * (lo + hi)]
            for (lo, hi), c in zip(box, counts)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def tangent_directions(chart: SurfaceChart, count: int, seed: int = 0) -> np.ndarray:
    """Unit vectors tangent to the surface at sampled points (the set
    orthogonal to sampled Gauss-map directions, for hypersurfaces)."""
    pts = chart.probe_points(5)
    jac = chart_jacobian(chart, pts)        # (P, n, k)
    rng = np.random.default_rng(seed)
    out = []
    per = max(1, count // len(pts))
    for i in range(len(pts)):
        q, _ = np.linalg.qr(jac[i])         # (n, k) orthonormal tangent basis
        coef = rng.normal(size=(per, jac.shape[2]))
        coef /= np.linalg.norm(coef, axis=1)[:, None]
        out.append(coef @ q.T)
    dirs = np.concatenate(out, axis=0)
    return dirs / np.linalg.norm(dirs, axis=1)[:, None]


def curve_derivatives(chart: SurfaceChart, t: float, h: float = 1e-5):
    """First and second derivative of a k = 1 chart at parameter t."""
    pts = np.array([[t - h], [t], [t + h]])
    v = chart.eval(pts)
    dot = (v[2] - v[0]) / (2.0 * h)
    ddot = (v[2] - 2.0 * v[1] + v[0]) / h**2
    return dot, ddot


def reparametrize_family(family: TransformFamily, fwd: Callable,
                         new_box) -> TransformFamily:
    """The same family in new parameter coordinates s -> T_{fwd(s)}."""
    def ev(s, x):
        return family.eval(np.atleast_1d(fwd(np.atleast_1d(s))), x)

    return TransformFamily(
        ambient_dim=family.ambient_dim,
        param_dim=family.param_dim,
        eval=ev,
        param_box=new_box,
        fd_step=family.fd_step,
        name=family.name + "_reparam",
    )


# ---------------------------------------------------------------------------
# condition (1.4): rank n of [Xi^t J_T ; Xi^t J_{dT/ds_k}]
# ---------------------------------------------------------------------------

def check_condition_14(family: TransformFamily, x_box, xi_count: int = 32,
                       s_counts=5, x_counts=2, tol: float = RANK_TOL,
                       seed: int = 0) -> RankReport:
    """Sampled rank-n check of the stacked direction-Jacobian matrix.

    Rows are Xi^t J_{T_s}(x) and Xi^t J_{dT_s/ds_k}(x) over all m parameter
    derivatives.  With m > n-1 the verdict searches the (n-1)-subsets of
    parameter directions and keeps the best margin, mirroring how extra
    parameters are integrated out.
    """
    n, m = family.ambient_dim, family.param_dim
    if m < n - 1:
        raise ValueError("condition (1.4) needs m >= n-1 parameters")
    s_pts = _box_grid(family.param_box, s_counts)
    x_pts = _box_grid(x_box, x_counts)
    xis, _ = sphere_directions(n, xi_count, scheme="halton", seed=seed)

    subsets = (list(combinations(range(m), n - 1)) if m > n - 1
               else [tuple(range(m))])
    margins, svs = [], []
    for s in s_pts:
        J = family.jacobian_x(s, x_pts)                     # (X, n, n)
        Jd = np.stack([family.jacobian_ds(s, x_pts, k_)
                       for k_ in range(m)], axis=1)         # (X, m, n, n)
        for ix in range(len(x_pts)):
            stackJ = np.concatenate([J[ix][None], Jd[ix]], axis=0)  # (1+m, n, n)
            rows = np.einsum("rij,bi->brj", stackJ, xis)    # (B, 1+m, n)
            best = np.full(len(xis), -np.inf)
            best_sv = None
            for sub in subsets:
                take = [0] + [1 + j for j in sub]
                sv = np.linalg.svd(rows[:, take, :], compute_uv=False)
                marg = sv[:, n - 1] / sv[:, 0]
                improve = marg > best
                if best_sv is None:
                    best_sv = sv.copy()
                else:
                    best_sv[improve] = sv[improve]
                best = np.maximum(best, marg)
            margins.extend(best.tolist())
            svs.extend(list(best_sv))
    return _finish("1.4", margins, tol,
                   svs, {"n": n, "m": m, "xi_count": xi_count,
                         "subset_search": m > n - 1,
                         "s_samples": len(s_pts), "x_samples": len(x_pts)})


# ---------------------------------------------------------------------------
# condition (4.1): nonsingularity of [J_T Phi ; J_{dT/ds} Phi], n = 2
# ---------------------------------------------------------------------------

def check_condition_41(family: TransformFamily, phi_range=(0.0, 2.0 * np.pi),
                       phi_count: int = 64, s_counts: int = 64,
                       x_box=None, x_counts: int = 2,
                       tol: float = RANK_TOL) -> RankReport:
    """Planar variant: the 2x2 matrix of J_{T_s} Phi and J_{dT_s/ds} Phi
    must be nonsingular for tangent-cone directions Phi = (cos phi, sin phi)."""
    if family.ambient_dim != 2 or family.param_dim != 1:
        raise ValueError("condition (4.1) is the planar single-parameter form")
    phis = np.linspace(phi_range[0], phi_range[1], phi_count, endpoint=False)
    dirs = np.stack([np.cos(phis), np.sin(phis)], axis=1)
    x_pts = _box_grid([[-1, 1], [-1, 1]] if x_box is None else x_box, x_counts)
    s_pts = _box_grid(family.param_box, s_counts)
    margins, svs = [], []
    for s in s_pts:
        J = family.jacobian_x(s, x_pts)
        Jd = family.jacobian_ds(s, x_pts, 0)
        for ix in range(len(x_pts)):
            r1 = dirs @ J[ix].T          # (B, 2): (J Phi)^t
            r2 = dirs @ Jd[ix].T
            mats = np.stack([r1, r2], axis=1)
            sv = np.linalg.svd(mats, compute_uv=False)
            margins.extend((sv[:, 1] / sv[:, 0]).tolist())
            svs.extend(list(sv))
    return _finish("4.1", margins, tol, svs,
                   {"phi_count": phi_count, "s_samples": len(s_pts)})


# ---------------------------------------------------------------------------
# Christ-style curvature condition, n = 2
# ---------------------------------------------------------------------------

def check_christ_condition(family: TransformFamily, curve: SurfaceChart,
                           s_counts: int = 32, t_counts: int = 32,
                           tol: float = RANK_TOL) -> RankReport:
    """rank [J_{T_s} gamma' , J_{T_s} gamma'' , J_{dT_s/ds} gamma'] = 2 sampled
    over (s, t) for a planar curve."""
    if family.ambient_dim != 2 or curve.param_dim != 1:
        raise ValueError("the combinatorial condition is planar, k = 1")
    s_pts = _box_grid(family.param_box, s_counts)
    t_pts = _box_grid(curve.domain, t_counts)[:, 0]
    margins, svs = [], []
    for s in s_pts:
        for t in t_pts:
            x = curve.eval(np.array([[t]]))
            dot, ddot = curve_derivatives(curve, t)
            J = family.jacobian_x(s, x)[0]
            Jd = family.jacobian_ds(s, x, 0)[0]
            cols = np.stack([J @ dot, J @ ddot, Jd @ dot], axis=1)  # 2 x 3
            sv = np.linalg.svd(cols, compute_uv=False)
            margins.append(sv[1] / sv[0])
            svs.append(sv)
    return _finish("christ", margins, tol, svs,
                   {"s_samples": len(s_pts), "t_samples": len(t_pts)})


# ---------------------------------------------------------------------------
# delta(s): the case-split diagnostic of the hypersurface argument
# ---------------------------------------------------------------------------

def delta_s(family: TransformFamily, xi, s, x0, tangents) -> float:
    """inf over tangent directions of max_k |Xi^t J_{dT_s/ds_k}(x0) Phi|.

    Strictly positive values put s in the directly-integrable case of the
    hypersurface decay argument; the infimum over an empty tangent set is
    an error.
    """
    tangents = np.atleast_2d(np.asarray(tangents, dtype=float))
    if len(tangents) == 0:
        raise ValueError("empty tangent-direction sample set")
    xi = np.asarray(xi, dtype=float)
    xi = xi / np.linalg.norm(xi)
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    vals = np.empty((family.param_dim, len(tangents)))
    for k_ in range(family.param_dim):
        Jd = family.jacobian_ds(s, x0, k_)[0]
        vals[k_] = np.abs((xi @ Jd) @ tangents.T)
    return float(np.min(np.max(vals, axis=0)))


# ---------------------------------------------------------------------------
# families of diffeomorphisms and the velocity pullback
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DiffeoFamily:
    """Family gamma(x, s, t): for each (s, t) a diffeomorphism of R^n.

    ``eval(x, s, t)`` maps a batch of x; t has k components (curves k = 1,
    higher-dimensional integrands k > 1).
    """

    ambient_dim: int
    param_dim: int
    t_dim: int
    eval: Callable
    s_box: np.ndarray
    t_box: np.ndarray
    fd_step: float = 1e-5

    def __post_init__(self):
        object.__setattr__(self, "s_box",
                           np.asarray(self.s_box, float).reshape(-1, 2))
        object.__setattr__(self, "t_box",
                           np.asarray(self.t_box, float).reshape(-1, 2))

    def invert(self, y, s, t, tol: float = 1e-11, maxiter: int = 60):
        """Solve gamma(x, s, t) = y by Newton iteration with FD Jacobians."""
        y = np.atleast_2d(np.asarray(y, dtype=float))
        x = y.copy()
        n = self.ambient_dim
        for _ in range(maxiter):
            r = self.eval(x, s, t) - y
            if np.max(np.abs(r)) < tol:
                return x
            Jx = np.empty((len(x), n, n))
            for i in range(n):
                h = self.fd_step * (1.0 + np.abs(x[:, i]))
                up, dn = x.copy(), x.copy()
                up[:, i] += h
                dn[:, i] -= h
                Jx[:, :, i] = (self.eval(up, s, t) - self.eval(dn, s, t)) / (2 * h)[:, None]
            x = x - np.linalg.solve(Jx, r[:, :, None])[:, :, 0]
        raise RuntimeError("Newton inversion of the diffeomorphism failed")


def gamma_pullback(family: DiffeoFamily, y, s, t) -> np.ndarray:
    """Velocity pullback Gamma(y, s; t) = D_{t'} (gamma_{t+t'} o gamma_t^{-1})(y).

    Computed as the t-partial of gamma at the Newton preimage of y; rows
    are the k parameter velocities, each a vector in R^n (shape (k, n)).
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    xstar = family.invert(y, s, t)
    rows = []
    for i in range(family.t_dim):
        h = family.fd_step * (1.0 + abs(float(t[i])))
        up, dn = t.copy(), t.copy()
        up[i] += h
        dn[i] -= h
        rows.append((family.eval(xstar, s, up) - family.eval(xstar, s, dn))[0] / (2 * h))
    return np.stack(rows, axis=0)


# ---------------------------------------------------------------------------
# condition (5.6): no critical points of (s,t) -> Gamma'.eta' / Gamma_1
# ---------------------------------------------------------------------------

def _grid_axes(box, counts):
    box = np.asarray(box, float).reshape(-1, 2)
    if np.isscalar(counts):
        counts = [int(counts)] * len(box)
    return [np.linspace(lo, hi, c) for (lo, hi), c in zip(box, counts)]


def _gamma_on_grid(family: DiffeoFamily, y, s_axes, t_axes) -> np.ndarray:
    """Gamma evaluated on the tensor grid: shape (*s_shape, *t_shape, k, n)."""
    s_shape = tuple(len(a) for a in s_axes)
    t_shape = tuple(len(a) for a in t_axes)
    out = np.empty(s_shape + t_shape + (family.t_dim, family.ambient_dim))
    y = np.atleast_2d(np.asarray(y, float))
    for si in np.ndindex(s_shape if s_shape else (1,)):
        s = np.array([s_axes[d][si[d]] for d in range(len(s_shape))])
        for ti in np.ndindex(t_shape):
            t = np.array([t_axes[d][ti[d]] for d in range(len(t_shape))])
            G = gamma_pullback(family, y, s, t)
            idx = (si if s_shape else ()) + ti
            out[idx] = G
    return out


def check_condition_56(family: DiffeoFamily, eta_count: int = 8,
                       s_counts: int = 9, t_counts: int = 33,
                       y=None, tol_grad: float = 1e-6,
                       tol: float = RANK_TOL) -> RankReport:
    """Critical-point check for curve families (k = 1).

    Evaluates the pullback on an (s, t) grid, forms the ratio
    Gamma'.eta'/Gamma_1 for sampled eta', and requires its (s, t) gradient
    to stay away from zero; also reports the equivalent matrix-rank margin
    of [Gamma_1 D Gamma' - D Gamma_1 (x) Gamma'].  Gamma_1 must stay away
    from zero (rotate coordinates otherwise).
    """
    if family.t_dim != 1:
        raise ValueError("condition (5.6) is the curve (k = 1) form")
    n, m = family.ambient_dim, family.param_dim
    y = np.zeros(n) if y is None else np.asarray(y, float)
    s_axes = _grid_axes(family.s_box, s_counts) if m else []
    t_axes = _grid_axes(family.t_box, t_counts)
    G = _gamma_on_grid(family, y, s_axes, t_axes)   # (*s, *t, 1, n)
    G = G[..., 0, :]                                # (*s, *t, n)
    g1 = G[..., 0]
    if np.min(np.abs(g1)) < 1e-6:
        raise ValueError(
            "Gamma_1 vanishes on the grid; rotate coordinates so the first "
            "velocity component stays nonzero"
        )
    steps = [ax[1] - ax[0] for ax in (*s_axes, *t_axes)]
    etas, _ = sphere_directions(max(n - 1, 2), eta_count, scheme="halton") \
        if n - 1 >= 2 else (np.array([[1.0]]), None)
    etas = etas[:, : n - 1]
    etas = etas / np.linalg.norm(etas, axis=1)[:, None]

    margins, svs = [], []
    # gradient of the ratio, minimum over the grid interior, per eta'
    for eta in etas:
        ratio = np.tensordot(G[..., 1:], eta, axes=([-1], [0])) / g1
        grads = np.gradient(ratio, *steps) if ratio.ndim > 1 else \
            [np.gradient(ratio, steps[0])]
        gnorm = np.sqrt(np.sum([g**2 for g in grads], axis=0))
        margins.append(float(np.min(gnorm)))
        svs.append(np.array([np.min(gnorm)]))

    # equivalent matrix form: rows Gamma_1 D Gamma' - D Gamma_1 (x) Gamma'
    dG1 = np.gradient(g1, *steps) if g1.ndim > 1 else [np.gradient(g1, steps[0])]
    dGp = [np.gradient(G[..., 1:], step, axis=d)
           for d, step in enumerate(steps)]
    rows = np.stack([g1[..., None] * dGp[d] - dG1[d][..., None] * G[..., 1:]
                     for d in range(len(steps))], axis=-2)  # (*grid, m+1, n-1)
    flat = rows.reshape(-1, m + 1, n - 1)
    sv = np.linalg.svd(flat, compute_uv=False)
    scale = np.maximum(sv[:, 0], 1e-300)
    if m + 1 < n - 1:
        rank_margin = 0.0
        iworst = 0
    else:
        ratios = sv[:, n - 2] / scale
        rank_margin = float(np.min(ratios))
        iworst = int(np.argmin(ratios))
    grad_min = min(margins)
    passed = grad_min > tol_grad and (m + 1 >= n - 1) and rank_margin > tol
    report = RankReport(
        condition="5.6",
        n_samples=int(np.prod([len(a) for a in (*s_axes, *t_axes)])) * len(etas),
        min_margin=grad_min,
        tol=tol_grad,
        passed=passed,
        margins=np.asarray(margins),
        worst_singular_values=sv[iworst],
        details={"matrix_rank_margin": rank_margin, "eta_count": len(etas),
                 "necessary_m_ge": n - 2, "m": m},
    )
    return report


# ---------------------------------------------------------------------------
# condition (5.8): translation-invariant curves gamma0(s;t) = (t, g(s;t))
# ---------------------------------------------------------------------------

def check_condition_58(g: Callable, m: int, n: int, s_box=None, t_box=(-0.5, 0.5),
                       s_counts: int = 9, t_counts: int = 33,
                       tol: float = RANK_TOL, h: float = 1e-5) -> RankReport:
    """rank [D_s g_dot ; g_ddot] = n-1 sampled over (s, t).

    ``g(s, t)`` maps an m-vector and a scalar to the n-1 graph components
    of the translation-invariant curve family (t, g(s; t)).
    """
    s_box = np.asarray([[-0.5, 0.5]] * m if s_box is None else s_box,
                       float).reshape(-1, 2)
    t_vals = np.linspace(t_box[0], t_box[1], t_counts)
    s_pts = _box_grid(s_box, s_counts) if m else np.zeros((1, 0))

    def gdot(s, t):
        return (np.asarray(g(s, t + h)) - np.asarray(g(s, t - h))) / (2 * h)

    margins, svs = [], []
    for s in s_pts:
        for t in t_vals:
            gdd = (np.asarray(g(s, t + h)) - 2.0 * np.asarray(g(s, t))
                   + np.asarray(g(s, t - h))) / h**2
            rows = [gdd]
            for j in range(m):
                sp, sm = s.copy(), s.copy()
                sp[j] += h
                sm[j] -= h
                rows.append((gdot(sp, t) - gdot(sm, t)) / (2 * h))
            M = np.stack(rows, axis=0)          # (m+1, n-1)
            sv = np.linalg.svd(M, compute_uv=False)
            if m + 1 < n - 1:
                margins.append(0.0)
            else:
                scale = sv[0] if sv[0] > 0 else 1.0
                margins.append(sv[n - 2] / scale)
            svs.append(sv)
    return _finish("5.8", margins, tol, svs,
                   {"m": m, "n": n, "s_samples": len(s_pts),
                    "t_samples": t_counts})


# ---------------------------------------------------------------------------
# condition (5.9): k-surface generalization
# ---------------------------------------------------------------------------

def check_condition_59(family: DiffeoFamily, eta_count: int = 8,
                       s_counts: int = 5, t_counts: int = 5, y=None,
                       tol: float = RANK_TOL,
                       fd_rel: float = 1e-4) -> RankReport:
    """rank D_{s,t} ((Gamma'^*)^{-1} Gamma'' eta'') = k for sampled eta''.

    Gamma' is the leading k x k block of the pullback (must stay
    invertible), Gamma'' the trailing k x (n-k) block.
    """
    n, m, k = family.ambient_dim, family.param_dim, family.t_dim
    y = np.zeros(n) if y is None else np.asarray(y, float)
    if n - k < 1:
        raise ValueError("need k < n")
    etas, _ = sphere_directions(max(n - k, 2), eta_count, scheme="halton") \
        if n - k >= 2 else (np.array([[1.0]]), None)
    etas = etas[:, : n - k]
    etas = etas / np.linalg.norm(etas, axis=1)[:, None]

    s_pts = _box_grid(family.s_box, s_counts) if m else np.zeros((1, 0))
    t_pts = _box_grid(family.t_box, t_counts)

    def F(s, t, eta):
        G = gamma_pullback(family, y, s, t)
        Gp = G[:, :k]
        sv = np.linalg.svd(Gp, compute_uv=False)
        if sv[-1] <= 1e-8 * sv[0]:
            raise ValueError("Gamma' is singular on the sample grid")
        return np.linalg.solve(Gp.T, G[:, k:] @ eta)

    margins, svs = [], []
    for s in s_pts:
        for t in t_pts:
            for eta in etas:
                cols = []
                for j in range(m + k):
                    if j < m:
                        hj = fd_rel * (1.0 + abs(s[j]))
                        sp, sm = s.copy(), s.copy()
                        sp[j] += hj
                        sm[j] -= hj
                        cols.append((F(sp, t, eta) - F(sm, t, eta)) / (2 * hj))
                    else:
                        i = j - m
                        hj = fd_rel * (1.0 + abs(t[i]))
                        tp, tm = t.copy(), t.copy()
                        tp[i] += hj
                        tm[i] -= hj
                        cols.append((F(s, tp, eta) - F(s, tm, eta)) / (2 * hj))
                M = np.stack(cols, axis=1)      # k x (m+k)
                sv = np.linalg.svd(M, compute_uv=False)
                scale = max(sv[0], 1e-300)
                margins.append(sv[k - 1] / scale if len(sv) >= k else 0.0)
                svs.append(sv)
    return _finish("5.9", margins, tol, svs,
                   {"k": k, "m": m, "eta_count": len(etas),
                    "s_samples": len(s_pts), "t_samples": len(t_pts)})


# ---------------------------------------------------------------------------
# builtin cases (CLI `check` subcommand)
# ---------------------------------------------------------------------------

def _translation_invariant_curve(curve_fn, n, t_box) -> DiffeoFamily:
    def ev(x, s, t):
        return np.atleast_2d(x) - np.asarray(curve_fn(float(t[0])))[None, :]

    return DiffeoFamily(ambient_dim=n, param_dim=0, t_dim=1, eval=ev,
                        s_box=np.zeros((0, 2)), t_box=[t_box])


def _so3_curve_family(curve_fn, s_half=0.2, t_box=(-0.4, 0.4)) -> DiffeoFamily:
    from .families import rotation_axis_angle

    def ev(x, s, t):
        R = rotation_axis_angle(np.atleast_1d(s))
        return np.atleast_2d(x) - (R @ np.asarray(curve_fn(float(t[0]))))[None, :]

    return DiffeoFamily(ambient_dim=3, param_dim=3, t_dim=1, eval=ev,
                        s_box=[[-s_half, s_half]] * 3, t_box=[t_box])


def _so3_surface_family(s_half=0.2, t_half=0.3) -> DiffeoFamily:
    from .families import rotation_axis_angle

    def ev(x, s, t):
        R = rotation_axis_angle(np.atleast_1d(s))
        u = np.atleast_1d(t)
        p = np.array([u[0], u[1], 0.5 * (u[0] ** 2 + u[1] ** 2)])
        return np.atleast_2d(x) - (R @ p)[None, :]

    return DiffeoFamily(ambient_dim=3, param_dim=3, t_dim=2, eval=ev,
                        s_box=[[-s_half, s_half]] * 3,
                        t_box=[[-t_half, t_half]] * 2)


def _rotated_parabola_graph(s, t):
    # rotations of (t, t^2, 0) about the x2-axis, reparametrized to the
    # graph form (t, g(s; t))
    s0 = float(np.atleast_1d(s)[0]) if np.size(s) else 0.0
    c = np.cos(s0)
    return np.array([t**2 / c**2, -t * np.tan(s0)])


def builtin_case_names() -> dict:
    """Supported (condition -> case names) for the check subcommand."""
    return {
        "1.4": ["rotations2d", "rotations3d", "identity2d", "identity3d",
                "translations2d"],
        "4.1": ["rotations2d", "identity2d"],
        "christ": ["rotations2d", "identity2d"],
        "5.6": ["parabola_m0", "line_m0", "exp_map"],
        "5.8": ["rotated_parabola_r3", "twisted_line_m1", "linear_m1"],
        "5.9": ["parabola_m0", "line_m0", "so3_curve_r3", "so3_surface_r3",
                "constant_r3"],
    }


def run_builtin_check(condition: str, case: str, tol: float = RANK_TOL,
                      invert: bool = False, seed: int = 0) -> RankReport:
    """Run a named builtin configuration of one rank condition.

    ``invert`` replaces the transformation family by its pointwise inverse
    (the conditions are equivalences between the two).
    """
    from .families import (identity_family, inverse_family, rotation_family,
                           translation_family)
    from .geometry import make_builtin_surface

    def famtr(f):
        return inverse_family(f) if invert else f

    if condition == "1.4":
        configs = {
            "rotations2d": (famtr(rotation_family(2)), [[-1, 1], [-1, 1]]),
            "rotations3d": (famtr(rotation_family(3, param_box=[[-0.4, 0.4]] * 3)),
                            [[-1, 1]] * 3),
            "identity2d": (famtr(identity_family(2, m=1)), [[-1, 1], [-1, 1]]),
            "identity3d": (famtr(identity_family(3, m=2)), [[-1, 1]] * 3),
            "translations2d": (famtr(translation_family(np.eye(2))),
                               [[-1, 1], [-1, 1]]),
        }
        fam, x_box = configs[case]
        return check_condition_14(fam, x_box, tol=tol, seed=seed)
    if condition == "4.1":
        configs = {
            "rotations2d": famtr(rotation_family(2)),
            "identity2d": famtr(identity_family(2, m=1)),
        }
        return check_condition_41(configs[case], s_counts=32, tol=tol)
    if condition == "christ":
        if case == "rotations2d":
            fam = famtr(rotation_family(2))
            curve = make_builtin_surface("parabola_graph", n=2)
        elif case == "identity2d":
            fam = famtr(identity_family(2, m=1))
            curve = make_builtin_surface("segment")
        else:
            raise ValueError(f"unknown christ case {case!r}")
        return check_christ_condition(fam, curve, tol=tol)
    if condition == "5.6":
        configs = {
            "parabola_m0": _translation_invariant_curve(
                lambda t: np.array([t, t**2]), 2, (-0.5, 0.5)),
            "line_m0": _translation_invariant_curve(
                lambda t: np.array([t, 0.5 * t]), 2, (-0.5, 0.5)),
            "exp_map": _translation_invariant_curve(
                lambda t: np.array([t + 0.1 * t**2, 0.3 * t + 0.5 * t**2]),
                2, (-0.4, 0.4)),
        }
        return check_condition_56(configs[case], tol=tol)
    if condition == "5.8":
        configs = {
            "rotated_parabola_r3": (_rotated_parabola_graph, 1, 3,
                                    [[-0.5, 0.5]]),
            "twisted_line_m1": (lambda s, t: np.array([float(np.atleast_1d(s)[0]) * t]),
                                1, 2, [[-0.5, 0.5]]),
            "linear_m1": (lambda s, t: np.array([0.7 * t, 0.1 * t]), 1, 3,
                          [[-0.5, 0.5]]),
        }
        g, m, n, s_box = configs[case]
        return check_condition_58(g, m=m, n=n, s_box=s_box, tol=tol)
    if condition == "5.9":
        configs = {
            "parabola_m0": _translation_invariant_curve(
                lambda t: np.array([t, t**2]), 2, (-0.5, 0.5)),
            "line_m0": _translation_invariant_curve(
                lambda t: np.array([t, 0.5 * t]), 2, (-0.5, 0.5)),
            "so3_curve_r3": _so3_curve_family(
                lambda t: np.array([t, t**2, t**3])),
            "so3_surface_r3": _so3_surface_family(),
            "constant_r3": DiffeoFamily(
                ambient_dim=3, param_dim=1, t_dim=1,
                eval=lambda x, s, t: np.atleast_2d(x)
                - np.array([t[0], 0.4 * t[0], 0.1 * t[0]])[None, :],
                s_box=[[-0.3, 0.3]], t_box=[[-0.3, 0.3]]),
        }
        fam = configs[case]
        counts = dict(s_counts=2, t_counts=3) if fam.t_dim > 1 else \
            dict(s_counts=3, t_counts=9)
        return check_condition_59(fam, tol=tol, **counts)
    raise ValueError(f"unknown condition {condition!r}")
