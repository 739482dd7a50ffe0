"""Empirical probes of the averaging operators' norm-mapping claims.

A probe drives the operator with a scaling family of inputs (shrinking
balls, or thin plates aligned to a flat piece of the surface) and fits the
log-log slope of output-to-input norm ratios against the thickness.  A
slope near zero is consistent with boundedness on the tested exponent
pair; a negative slope measures the blowup rate of the counterexample
family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .decay import fit_decay_exponent
from .families import RotationSampler
from .geometry import SurfaceChart, chart_jacobian
from .oscillatory import chart_mass
from .radon import AveragedField, GridField, apply_averaged, convolve, discretize_measure

__all__ = [
    "NormProbeReport",
    "lp_norm",
    "mixed_norm",
    "ball_field",
    "plate_field",
    "knapp_probe",
    "exponent_table",
]


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def lp_norm(f: GridField, p: float) -> float:
    """Riemann-sum L^p norm with cell volumes; p = inf takes the maximum."""
    if math.isinf(p):
        return float(np.max(np.abs(f.values)))
    if p < 1.0:
        raise ValueError("p must be >= 1 (or inf)")
    return float((np.sum(np.abs(f.values) ** p) * f.cell_volume) ** (1.0 / p))


def mixed_norm(stack: AveragedField, inner_p: float, outer_r: float) -> float:
    """Outer L^r (over the parameter, weighted) of inner L^p slice norms.

    Parameter weights are normalized, so constant stacks return the slice
    norm and r = inf returns the supremum over sampled parameters.
    """
    inner = np.array([lp_norm(stack.slice_field(i), inner_p)
                      for i in range(len(stack.values))])
    w = stack.param_weights / stack.param_weights.sum()
    if math.isinf(outer_r):
        return float(np.max(inner))
    return float(np.sum(w * inner**outer_r) ** (1.0 / outer_r))


# ---------------------------------------------------------------------------
# probe input families
# ---------------------------------------------------------------------------

def ball_field(lo, hi, shape, center, delta: float) -> GridField:
    """Indicator of a delta-ball sampled at cell centers."""
    c = np.asarray(center, dtype=float)

    def fn(X):
        return (np.linalg.norm(X - c[None, :], axis=1) <= delta).astype(float)

    return GridField.from_function(lo, hi, shape, fn)


def plate_field(lo, hi, shape, center, axis, length: float, delta: float) -> GridField:
    """Indicator of a length x delta plate with long side along ``axis``."""
    c = np.asarray(center, dtype=float)
    e = np.asarray(axis, dtype=float)
    e = e / np.linalg.norm(e)

    def fn(X):
        d = X - c[None, :]
        along = d @ e
        perp2 = np.sum(d * d, axis=1) - along**2
        return ((np.abs(along) <= 0.5 * length)
                & (perp2 <= (0.5 * delta) ** 2)).astype(float)

    return GridField.from_function(lo, hi, shape, fn)


# ---------------------------------------------------------------------------
# Knapp-style probes
# ---------------------------------------------------------------------------

@dataclass
class NormProbeReport:
    """Norm ratios of a scaling family against the thickness, with verdict."""

    p: float
    q: float
    outer_r: float
    deltas: np.ndarray
    input_norms: np.ndarray
    output_norms: np.ndarray
    ratio_slope: float
    slope_stderr: float
    verdict: str
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "outer_r": None if math.isinf(self.outer_r) else self.outer_r,
            "deltas": [float(d) for d in self.deltas],
            "input_norms": [float(v) for v in self.input_norms],
            "output_norms": [float(v) for v in self.output_norms],
            "ratio_slope": self.ratio_slope,
            "slope_stderr": self.slope_stderr,
            "verdict": self.verdict,
            "meta": self.meta,
        }


def _chart_bounding_radius(chart: SurfaceChart) -> float:
    pts = chart.eval(chart.probe_points(33))
    return float(np.max(np.linalg.norm(pts, axis=1)))


def _chart_bounding_box(chart: SurfaceChart) -> np.ndarray:
    pts = chart.eval(chart.probe_points(33))
    return np.max(np.abs(pts), axis=0)


def knapp_probe(chart: SurfaceChart, averaging: str, p: float, q: float,
                deltas, family: str = "ball", center=(0.0, 0.0),
                plate_axis=(1.0, 0.0), plate_length: float = 1.0,
                grid_div: int = 4, theta_count: int = 16,
                bounded_tol: float = 0.02, box_margin: float = 0.1,
                method: str = "fft", outer_r: float | None = None,
                threads: int = 1) -> NormProbeReport:
    """Scaling-family probe of ``f -> f * mu`` (or its rotation average).

    ``averaging`` is 'fixed_theta' or 'rotations'.  ``family`` selects the
    input shape: 'ball' (delta-ball indicator) or 'plate' (delta x length
    plate along ``plate_axis``, the flat-piece-aligned family).  Grids have
    spacing delta/grid_div (the contract requires h <= delta/4).  Fits the
    slope of log(output q-norm / input p-norm) against log(delta); slopes
    above ``-bounded_tol`` give the bounded-consistent verdict, others
    blowup with the fitted rate.  For rotation averaging, ``outer_r``
    selects a mixed norm L^r(dtheta; L^q(dx)) different from the default
    r = q.  Thickness levels are independent work units (``threads``).
    """
    if averaging not in ("fixed_theta", "rotations"):
        raise ValueError("averaging must be 'fixed_theta' or 'rotations'")
    if grid_div < 4:
        raise ValueError("grid resolution must satisfy h <= delta/4")
    deltas = np.sort(np.asarray(deltas, dtype=float))[::-1]
    if len(deltas) < 4 or np.any(np.diff(deltas) >= 0):
        raise ValueError("need a strictly decreasing delta sequence, >= 4 points")

    n = chart.ambient_dim
    center = np.asarray(center, dtype=float)
    # rotations sweep the measure through its full radius; a fixed measure
    # only reaches its per-axis extent
    if averaging == "rotations":
        reach = np.full(n, _chart_bounding_radius(chart))
        rotations = RotationSampler(n, count=theta_count).sample()
    else:
        reach = _chart_bounding_box(chart)
        rotations = None

    e = np.asarray(plate_axis, float)
    e = e / np.linalg.norm(e)
    if family == "ball":
        f_half = np.full(n, 0.0)
    elif family == "plate":
        f_half = 0.5 * plate_length * np.abs(e)
    else:
        raise ValueError("family must be 'ball' or 'plate'")

    def run_level(delta):
        h = delta / grid_div
        shape, los, his = [], [], []
        for d in range(n):
            half_d = abs(center[d]) + f_half[d] + delta + reach[d] + box_margin
            cells = int(np.ceil(2.0 * half_d / h))
            shape.append(cells)
            los.append(center[d] - 0.5 * cells * h)
            his.append(center[d] + 0.5 * cells * h)
        if family == "ball":
            f = ball_field(los, his, shape, center, delta)
        else:
            f = plate_field(los, his, shape, center, e, plate_length, delta)
        if averaging == "fixed_theta":
            meas = discretize_measure(chart, 0.5 * h)
            out_norm = lp_norm(convolve(f, meas, method=method), q)
        else:
            stack = apply_averaged(f, chart, rotations=rotations, method=method)
            out_norm = mixed_norm(stack, q, outer_r if outer_r is not None else q)
        return tuple(shape), lp_norm(f, p), out_norm

    from .util import parallel_map

    results = parallel_map(run_level, deltas, threads)
    grids = [r[0] for r in results]
    in_norms = [r[1] for r in results]
    out_norms = [r[2] for r in results]
    ratios = np.asarray(out_norms) / np.asarray(in_norms)
    slope, stderr, _ = fit_decay_exponent(deltas, ratios) if len(deltas) >= 5 \
        else _short_fit(deltas, ratios)
    verdict = "bounded-consistent" if slope >= -bounded_tol else f"blowup({slope:.3f})"
    r_used = (outer_r if outer_r is not None else q) if averaging == "rotations" \
        else math.nan
    return NormProbeReport(
        p=p, q=q, outer_r=r_used,
        deltas=deltas, input_norms=np.asarray(in_norms),
        output_norms=np.asarray(out_norms),
        ratio_slope=slope, slope_stderr=stderr, verdict=verdict,
        meta={"averaging": averaging, "family": family, "grid_div": grid_div,
              "grids": grids, "theta_count": theta_count,
              "chart_kind": chart.kind, "measure_mass": chart_mass(chart)},
    )


def _short_fit(deltas, ratios):
    x = np.log2(deltas)
    y = np.log2(ratios)
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    resid = y - (ym + slope * (x - xm))
    stderr = float(np.sqrt(np.sum(resid**2) / max(len(x) - 2, 1) / sxx))
    return slope, stderr, 0.0


# ---------------------------------------------------------------------------
# theorem exponent tables
# ---------------------------------------------------------------------------

def exponent_table(theorem: str, n: int | None = None, k: int | None = None,
                   beta: float | None = None, p: Fraction | None = None):
    """Exponent pairs asserted by the mapping theorems, as exact fractions.

    - 'thm1': the planar convex-curve pair (3/2, 3).
    - 'thm2': convex hypersurfaces in R^n, ((n+1)/n, n+1).
    - 'thm3': smooth k-surfaces in R^n, ((2n-k)/n, (2n-k)/(n-k)).
    - 'thm7': k = 1 nondegenerate curve families, ((2n-1)/n, (2n-1)/(n-1)).
    - 'thm6': model-surface mixed norms; returns (p, p', r) with
      r = p'(n-1)(beta-1) / ((p'-2) beta - 2(n-1)) on the open interval
      (n+1)/n < p < (2 beta + 2(n-1)) / (beta + 2(n-1)), and r = inf above
      its upper endpoint.

    The dual pairs satisfy 1/p + 1/q = 1 exactly.
    """
    if theorem == "thm1":
        return Fraction(3, 2), Fraction(3)
    if theorem == "thm2":
        if n is None:
            raise ValueError("thm2 needs n")
        return Fraction(n + 1, n), Fraction(n + 1)
    if theorem == "thm3":
        if n is None or k is None:
            raise ValueError("thm3 needs n and k")
        if not 1 <= k <= n - 1:
            raise ValueError("need 1 <= k <= n-1")
        return Fraction(2 * n - k, n), Fraction(2 * n - k, n - k)
    if theorem == "thm7":
        if n is None:
            raise ValueError("thm7 needs n")
        return Fraction(2 * n - 1, n), Fraction(2 * n - 1, n - 1)
    if theorem == "thm6":
        if n is None or beta is None or p is None:
            raise ValueError("thm6 needs n, beta and p")
        p = Fraction(p).limit_denominator(10**9)
        beta_f = Fraction(beta).limit_denominator(10**9)
        lower = Fraction(n + 1, n)
        upper = (2 * beta_f + 2 * (n - 1)) / (beta_f + 2 * (n - 1))
        if p > upper:
            return p, p / (p - 1), math.inf
        if not (lower < p < upper):
            raise ValueError(
                f"thm6 needs p strictly inside ({lower}, {upper}); endpoints "
                "are not asserted"
            )
        pprime = p / (p - 1)
        r = pprime * (n - 1) * (beta_f - 1) / ((pprime - 2) * beta_f - 2 * (n - 1))
        return p, pprime, r
    raise ValueError(f"unsupported theorem tag {theorem!r}")
