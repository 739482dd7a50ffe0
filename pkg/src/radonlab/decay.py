"""Spherical and family averages of |mu_hat| with fitted decay exponents.

The measured quantity is the directional L^p mean of the transform at
dyadic radii; its log-log slope against the radius is compared with the
predicted exponent (-k/2 for smooth k-surface charts, and the three-regime
table for the model surfaces x_n = |x'|^beta split at p = 2(beta-1)/(beta-2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .families import TransformFamily, sphere_directions
from .geometry import SurfaceChart, apply_family, smoothstep_bump
from .oscillatory import mu_hat, mu_hat_batch, mu_hat_polygon_exact

__all__ = [
    "DecayReport",
    "direction_count",
    "spherical_average",
    "decay_sweep",
    "fit_decay_exponent",
    "predicted_slope",
    "family_average_decay",
    "family_decay_sweep",
]


# ---------------------------------------------------------------------------
# report container
# ---------------------------------------------------------------------------

@dataclass
class DecayReport:
    """Measured averages at dyadic levels plus the fitted and predicted slopes."""

    p: float
    rho_levels: np.ndarray
    averages: np.ndarray
    fitted_slope: float
    slope_stderr: float
    r_squared: float
    predicted_slope: float | None = None
    regime: str = ""
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "p": None if math.isinf(self.p) else self.p,
            "p_is_inf": math.isinf(self.p),
            "rho_levels": [float(r) for r in self.rho_levels],
            "averages": [float(a) for a in self.averages],
            "fitted_slope": self.fitted_slope,
            "slope_stderr": self.slope_stderr,
            "r_squared": self.r_squared,
            "predicted_slope": self.predicted_slope,
            "regime": self.regime,
            "meta": self.meta,
        }


# ---------------------------------------------------------------------------
# direction budgeting
# ---------------------------------------------------------------------------

def direction_count(rho: float, chart_kind: str = "graph", p: float = 2.0) -> int:
    """Default direction count at radius rho.

    The floor max(64, 4 sqrt(rho)) matches the sampling contract; charts
    whose transform has caustic peaks need more: the model beta surfaces
    scale like rho^{3/4} (the width of their axial peak) and polygon
    boundaries like rho (sinc lobes around each edge normal).
    """
    base = max(64, int(np.ceil(4.0 * np.sqrt(rho))))
    if chart_kind == "beta_surface":
        return max(base, int(np.ceil(4.0 * rho ** 0.75)))
    if chart_kind == "polygon_boundary":
        return max(256, int(np.ceil(8.0 * rho)))
    if math.isinf(p):
        return max(base, int(np.ceil(4.0 * rho ** 0.75)))
    return base


def caustic_directions_2d(rho: float, floor: int = 64, zone: float = 0.4,
                          ppp: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """S^1 quadrature with panels refined geometrically toward +-e_2.

    The model surfaces x_2 = |x_1|^beta concentrate |mu_hat(rho omega)|
    in an axial peak of width ~ rho^{-3/4}; uniform angle grids alias it.
    Panels halve toward pi/2 and 3pi/2 until they resolve that scale, with
    Gauss-Legendre nodes per panel, so the directional mean integrates the
    peak to quadrature accuracy.
    """
    tip = max(0.25 * rho ** -0.75, 1e-5)
    rel = [zone]
    while rel[-1] * 0.5 > tip:
        rel.append(rel[-1] * 0.5)
    rel.append(0.0)
    edges = []
    for center in (0.5 * np.pi, 1.5 * np.pi):
        for a, b in zip(rel[:-1], rel[1:]):
            edges.append((center - a, center - b))
            edges.append((center + b, center + a))
    spans = [
        (0.5 * np.pi + zone, 1.5 * np.pi - zone),
        (1.5 * np.pi + zone, 2.5 * np.pi - zone),
    ]
    n_refined = len(edges) * ppp
    outer_panels = max(8, int(np.ceil((floor - n_refined) / ppp)))
    for lo, hi in spans:
        bounds = np.linspace(lo, hi, outer_panels // 2 + 1)
        edges.extend(zip(bounds[:-1], bounds[1:]))
    xg, wg = np.polynomial.legendre.leggauss(ppp)
    angles, wts = [], []
    for lo, hi in edges:
        half = 0.5 * (hi - lo)
        angles.append(0.5 * (lo + hi) + half * xg)
        wts.append(half * wg)
    angles = np.concatenate(angles)
    wts = np.concatenate(wts)
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return dirs, wts / wts.sum()


def _direction_set(chart: SurfaceChart, rho: float, count: int | None,
                   p: float, offset: float):
    n = chart.ambient_dim
    floor = max(64, int(np.ceil(4.0 * np.sqrt(rho))))
    if count is None and chart.kind == "beta_surface" and n == 2:
        return caustic_directions_2d(rho, floor=floor)
    cnt = count if count is not None else direction_count(rho, chart.kind, p)
    if cnt < floor:
        raise ValueError(f"direction count {cnt} below required {floor} at rho={rho}")
    return sphere_directions(n, cnt, offset=offset)


# ---------------------------------------------------------------------------
# spherical averages
# ---------------------------------------------------------------------------

def spherical_average(chart: SurfaceChart, p: float, rho: float,
                      directions=None, count: int | None = None,
                      tol: float = 1e-6, offset: float = 0.0,
                      exact_polygon: bool = False) -> float:
    """Directional L^p mean of |mu_hat(rho omega)| over the unit sphere.

    ``directions`` may be a precomputed (dirs, weights) pair; otherwise a
    quadrature of at least max(64, 4 sqrt(rho)) directions is generated.
    ``p = inf`` takes the maximum over sampled directions.
    """
    if not (p >= 1.0):
        raise ValueError("p must be >= 1 (or inf)")
    if directions is None:
        directions = _direction_set(chart, rho, count, p, offset)
    dirs, wts = directions
    if chart.kind == "polygon_boundary" and exact_polygon:
        vals = np.abs(np.atleast_1d(mu_hat_polygon_exact(chart, rho * dirs)))
    else:
        vals = np.abs(mu_hat_batch(chart, rho * dirs, tol=tol))
    if math.isinf(p):
        return float(np.max(vals))
    return float((np.sum(wts * vals ** p)) ** (1.0 / p))


def decay_sweep(chart: SurfaceChart, rho_levels, ps, count: int | None = None,
                tol: float = 1e-4, offset: float = 0.0,
                exact_polygon: bool = False,
                direction=None, threads: int = 1) -> dict:
    """Averages over dyadic levels for one or more exponents p at once.

    The transform values at each level are computed once and reused across
    the requested p's.  ``direction`` switches to the fixed-ray mode
    (pointwise |mu_hat| along one direction; p is ignored).  Levels are
    independent work units (``threads``).  Returns a dict mapping p to a
    DecayReport.
    """
    from .util import parallel_map

    rho_levels = np.asarray(rho_levels, dtype=float)
    ps = list(np.atleast_1d(ps))
    if direction is not None:
        d = np.asarray(direction, float)
        d = d / np.linalg.norm(d)
        vals = np.array(parallel_map(
            lambda r: abs(mu_hat(chart, r * d, tol=tol)), rho_levels, threads))
        slope, stderr, r2 = fit_decay_exponent(rho_levels, vals)
        rep = DecayReport(
            p=math.inf, rho_levels=rho_levels, averages=vals,
            fitted_slope=slope, slope_stderr=stderr, r_squared=r2,
            meta={"mode": "ray", "direction": [float(x) for x in d]},
        )
        return {"ray": rep}

    def level_values(rho):
        dirs, wts = _direction_set(chart, rho, count, max(ps), offset)
        if chart.kind == "polygon_boundary" and exact_polygon:
            vals = np.abs(np.atleast_1d(mu_hat_polygon_exact(chart, rho * dirs)))
        else:
            vals = np.abs(mu_hat_batch(chart, rho * dirs, tol=tol))
        return dirs, wts, vals

    per_level = parallel_map(level_values, rho_levels, threads)
    reports = {}
    averages = {p: [] for p in ps}
    counts = []
    for dirs, wts, vals in per_level:
        counts.append(len(dirs))
        for p in ps:
            if math.isinf(p):
                averages[p].append(float(np.max(vals)))
            else:
                averages[p].append(float(np.sum(wts * vals ** p) ** (1.0 / p)))
    for p in ps:
        avgs = np.asarray(averages[p])
        slope, stderr, r2 = fit_decay_exponent(rho_levels, avgs)
        pred, regime = predicted_slope(chart, p)
        reports[p] = DecayReport(
            p=float(p), rho_levels=rho_levels, averages=avgs,
            fitted_slope=slope, slope_stderr=stderr, r_squared=r2,
            predicted_slope=pred, regime=regime,
            meta={"direction_counts": counts, "tol": tol},
        )
    return reports


# ---------------------------------------------------------------------------
# slope fitting and predictions
# ---------------------------------------------------------------------------

def fit_decay_exponent(levels, averages) -> tuple[float, float, float]:
    """Least-squares slope of log2(average) against log2(rho).

    Returns (slope, stderr, r_squared).  Requires at least 5 levels and
    strictly positive averages.
    """
    levels = np.asarray(levels, dtype=float)
    averages = np.asarray(averages, dtype=float)
    if len(levels) < 5:
        raise ValueError("need at least 5 dyadic levels for a slope fit")
    if np.any(averages <= 0.0):
        raise ValueError("averages must be strictly positive")
    x = np.log2(levels)
    y = np.log2(averages)
    n = len(x)
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    resid = y - (ym + slope * (x - xm))
    ssr = float(np.sum(resid**2))
    sst = float(np.sum((y - ym) ** 2))
    stderr = float(np.sqrt(ssr / (n - 2) / sxx))
    r2 = 1.0 if sst == 0.0 else 1.0 - ssr / sst
    return slope, stderr, r2


def predicted_slope(chart_or_kind, p: float = 2.0, n: int | None = None,
                    k: int | None = None, beta: float | None = None):
    """Predicted decay exponent for a chart kind.

    Smooth (and convex nonsmooth) k-surface charts: -k/2, the L^2
    average-decay exponent.  Model beta surfaces: -(n-1)/2 below the
    critical p = 2(beta-1)/(beta-2); the same power with a logarithmic
    factor at the critical p (flagged, not measured); and
    -(n-1)(1/p + 1/beta - 1/(p beta)) above it.

    Returns (slope, regime) with regime in {smooth, sub, critical, super}.
    """
    if isinstance(chart_or_kind, SurfaceChart):
        kind = chart_or_kind.kind
        n = chart_or_kind.ambient_dim
        k = chart_or_kind.param_dim
        beta = chart_or_kind.params.get("beta")
    else:
        kind = chart_or_kind
    if kind == "beta_surface":
        if beta is None or n is None:
            raise ValueError("beta surface prediction needs n and beta")
        crit = 2.0 * (beta - 1.0) / (beta - 2.0)
        if math.isinf(p):
            return -(n - 1) / beta, "super"
        if abs(p - crit) <= 1e-9:
            return -(n - 1) / 2.0, "critical"
        if p < crit:
            return -(n - 1) / 2.0, "sub"
        return -(n - 1) * (1.0 / p + 1.0 / beta - 1.0 / (p * beta)), "super"
    if k is None:
        raise ValueError("prediction needs the parameter dimension k")
    return -k / 2.0, "smooth"


# ---------------------------------------------------------------------------
# family averages (transformed measures)
# ---------------------------------------------------------------------------

def _family_grid(family: TransformFamily, s_counts):
    """Per-axis quadrature over the family's parameter box.

    Periodic axes get midpoint rules (trapezoid on the circle), others
    Gauss-Legendre.  Returns (points (S, m), weights (S,)) with weights
    carrying the box measure.
    """
    m = family.param_dim
    if np.isscalar(s_counts):
        s_counts = [int(s_counts)] * m
    axes = []
    for i, (lo, hi) in enumerate(family.param_box):
        cnt = int(s_counts[i])
        if i in family.periodic_axes:
            x = lo + (hi - lo) * (np.arange(cnt) + 0.5) / cnt
            w = np.full(cnt, (hi - lo) / cnt)
        else:
            xg, wg = np.polynomial.legendre.leggauss(cnt)
            x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xg
            w = 0.5 * (hi - lo) * wg
        axes.append((x, w))
    mesh = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    wts = axes[0][1]
    for _, w in axes[1:]:
        wts = np.multiply.outer(wts, w)
    return pts, wts.ravel()


def _default_psi(family: TransformFamily):
    """Smooth parameter weight: flat on periodic boxes, a plateau bump else."""
    all_periodic = set(family.periodic_axes) == set(range(family.param_dim))
    if all_periodic:
        return lambda s: np.ones(len(np.atleast_2d(s)))
    lo = family.param_box[:, 0]
    hi = family.param_box[:, 1]
    center = 0.5 * (lo + hi)
    radius = 0.5 * np.min(hi - lo)
    return smoothstep_bump(0.5 * radius, 0.999 * radius, center=center)


def family_average_decay(chart: SurfaceChart, family: TransformFamily, xi,
                         psi=None, s_counts: int = 8, tol: float = 1e-4) -> float:
    """Weighted L^2 mean over the family of |mu_hat of the transformed chart|.

    Computes ``(sum w_s Psi(s) |mu_hat_s(xi)|^2 / sum w_s Psi(s))^{1/2}``;
    the normalization makes the identity family reduce exactly to
    |mu_hat(xi)|.  Linear families evaluate through the batched transform
    at the pulled-back frequencies M(s)^T xi, which is the same sum.
    """
    xi = np.asarray(xi, dtype=float)
    s_pts, s_wts = _family_grid(family, s_counts)
    psi_fn = psi if psi is not None else _default_psi(family)
    pw = s_wts * np.asarray(psi_fn(s_pts), dtype=float)
    total = float(np.sum(pw))
    if total <= 0:
        raise ValueError("parameter weight vanishes on the quadrature grid")
    if family.linear_matrix is not None:
        mats = np.stack([family.linear_matrix(s) for s in s_pts])
        xis = np.einsum("sij,i->sj", mats, xi)   # rows M(s)^T xi
        vals = np.abs(mu_hat_batch(chart, xis, tol=tol))
    else:
        vals = np.empty(len(s_pts))
        for i, s in enumerate(s_pts):
            comp = apply_family(family, s, chart)
            vals[i] = abs(mu_hat(comp, xi, tol=tol))
    return float(np.sqrt(np.sum(pw * vals**2) / total))


def family_decay_sweep(chart: SurfaceChart, family: TransformFamily, direction,
                       rho_levels, psi=None, s_counts: int = 8,
                       tol: float = 1e-4, threads: int = 1) -> DecayReport:
    """Family-averaged decay along one frequency direction at dyadic radii."""
    from .util import parallel_map

    rho_levels = np.asarray(rho_levels, dtype=float)
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    vals = np.array(parallel_map(
        lambda r: family_average_decay(chart, family, r * d, psi=psi,
                                       s_counts=s_counts, tol=tol),
        rho_levels, threads))
    slope, stderr, r2 = fit_decay_exponent(rho_levels, vals)
    n = chart.ambient_dim
    return DecayReport(
        p=2.0, rho_levels=rho_levels, averages=vals,
        fitted_slope=slope, slope_stderr=stderr, r_squared=r2,
        predicted_slope=-(n - 1) / 2.0, regime="family-L2",
        meta={"direction": [float(x) for x in d], "s_counts": s_counts,
              "family": family.name},
    )
