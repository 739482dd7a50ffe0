"""Gridded application of the averaged Radon operators.

Translation-invariant application is convolution of a sampled field with
the chart's measure, discretized to quadrature points and scattered onto
the field's lattice by area weighting (cloud-in-cell); the direct and FFT
paths consume the identical scattered measure.  The generalized transform
integrates ``f(gamma(x, s, t)) chi(t) dt`` per output point with
multilinear lookups of f.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .geometry import SurfaceChart, chart_jacobian, rotate_chart, apply_family
from .oscillatory import chart_mass

__all__ = [
    "GridField",
    "DiscreteMeasure",
    "AveragedField",
    "discretize_measure",
    "scatter_to_grid",
    "convolve",
    "convolve_adjoint",
    "apply_averaged",
    "apply_generalized",
    "interp_multilinear",
]


# ---------------------------------------------------------------------------
# GridField
# ---------------------------------------------------------------------------

@dataclass
class GridField:
    """Sampled scalar field on a uniform, cell-centered box grid.

    ``values[i, j, ...]`` lives at ``lo + (idx + 1/2) h`` with
    ``h = (hi - lo) / shape``.  ``cell_volume`` is the product of spacings.
    """

    lo: np.ndarray
    hi: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != len(self.lo):
            raise ValueError("value array rank must match box dimension")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    @property
    def shape(self) -> tuple:
        return self.values.shape

    @property
    def spacing(self) -> np.ndarray:
        return (self.hi - self.lo) / np.asarray(self.shape, dtype=float)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axes(self) -> list:
        h = self.spacing
        return [
            self.lo[d] + (np.arange(self.shape[d]) + 0.5) * h[d]
            for d in range(len(self.lo))
        ]

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    @staticmethod
    def from_function(lo, hi, shape, fn) -> "GridField":
        g = GridField(np.asarray(lo, float), np.asarray(hi, float),
                      np.zeros(tuple(shape)))
        vals = np.asarray(fn(g.points()), dtype=float).reshape(g.shape)
        g.values = vals
        return g

    # -- persistence: one flat binary file with a JSON header line ----------

    def save(self, path) -> None:
        header = {
            "format": "radonlab-grid/1",
            "dims": len(self.lo),
            "lo": [float(x) for x in self.lo],
            "hi": [float(x) for x in self.hi],
            "shape": [int(s) for s in self.shape],
            "dtype": "float64",
            "order": "C",
        }
        with open(path, "wb") as fh:
            fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
            fh.write(np.ascontiguousarray(self.values, dtype=np.float64).tobytes())

    @staticmethod
    def load(path) -> "GridField":
        with open(path, "rb") as fh:
            header = json.loads(fh.readline().decode())
            if header.get("format") != "radonlab-grid/1":
                raise ValueError("not a radonlab grid file")
            raw = fh.read()
        vals = np.frombuffer(raw, dtype=np.float64).reshape(header["shape"]).copy()
        return GridField(np.array(header["lo"]), np.array(header["hi"]), vals)


@dataclass
class AveragedField:
    """Stack of output slices over the parameter samples, with their weights."""

    grid: GridField
    values: np.ndarray          # (S, *grid.shape)
    param_weights: np.ndarray   # (S,), sums to 1
    params: list = field(default_factory=list)

    def slice_field(self, i: int) -> GridField:
        return GridField(self.grid.lo, self.grid.hi, self.values[i])


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------

@dataclass
class DiscreteMeasure:
    """Quadrature pushforward of a chart: points in R^n with weights >= 0."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float)
        if np.any(self.weights < -1e-15):
            raise ValueError("measure weights must be nonnegative")

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def reflected(self) -> "DiscreteMeasure":
        return DiscreteMeasure(-self.points, self.weights.copy())


def discretize_measure(chart: SurfaceChart, spacing: float,
                       rule: str = "auto") -> DiscreteMeasure:
    """Quadrature points and weights of the chart measure at a target spacing.

    ``spacing`` is the largest allowed distance between neighboring points
    (pass half the target grid cell for the two-points-per-cell-crossing
    contract).  Uniform midpoint rules serve closed charts; open charts get
    composite Gauss-Legendre panels.  The total weight must reproduce the
    chart mass to 1e-10 of scale, else the density is flagged as too low.
    """
    probe = chart.probe_points(9)
    jac = chart_jacobian(chart, probe)                       # (P, n, k)
    speed = np.max(np.linalg.norm(jac, axis=1), axis=0)      # (k,), per axis
    span = chart.domain[:, 1] - chart.domain[:, 0]
    counts = np.maximum(4, np.ceil(speed * span / max(spacing, 1e-12)).astype(int))

    if rule == "auto":
        rule = "uniform" if chart.closed else "gauss"
    axes = []
    for i, (lo, hi) in enumerate(chart.domain):
        cnt = int(counts[i])
        if rule == "uniform":
            x = lo + (hi - lo) * (np.arange(cnt) + 0.5) / cnt
            w = np.full(cnt, (hi - lo) / cnt)
        elif rule == "gauss":
            breaks = chart.panel_breaks[i] if i < len(chart.panel_breaks) else ()
            edges = [lo] + [b for b in breaks if lo < b < hi] + [hi]
            xg, wg = np.polynomial.legendre.leggauss(12)
            xs, ws = [], []
            panels = max(len(edges) - 1, int(np.ceil(cnt / 12)))
            for a, b in zip(edges[:-1], edges[1:]):
                seg = max(1, int(np.ceil(panels * (b - a) / (hi - lo))))
                bounds = np.linspace(a, b, seg + 1)
                for p0, p1 in zip(bounds[:-1], bounds[1:]):
                    half = 0.5 * (p1 - p0)
                    xs.append(0.5 * (p0 + p1) + half * xg)
                    ws.append(half * wg)
            x = np.concatenate(xs)
            w = np.concatenate(ws)
        else:
            raise ValueError(f"unknown rule {rule!r}")
        axes.append((x, w))
    if chart.param_dim == 1:
        upts = axes[0][0][:, None]
        uwts = axes[0][1]
    else:
        mesh = np.meshgrid(*[a[0] for a in axes], indexing="ij")
        upts = np.stack([m.ravel() for m in mesh], axis=1)
        uwts = axes[0][1]
        for _, w in axes[1:]:
            uwts = np.multiply.outer(uwts, w)
        uwts = uwts.ravel()

    weights = uwts * chart.weight(upts)
    keep = weights > 0.0
    weights = weights[keep]
    target = chart_mass(chart)
    defect = abs(weights.sum() - target)
    if defect > 1e-5 * max(1.0, abs(target)):
        raise ValueError(
            f"discretization mass defect {defect:.3e} at spacing {spacing}; "
            "density too low against the target grid"
        )
    # renormalize to the exact chart mass (C^2 cutoffs converge only
    # algebraically under the node rule; the defect above stays tiny)
    weights = weights * (target / weights.sum())
    return DiscreteMeasure(chart.eval(upts[keep]), weights)


# ---------------------------------------------------------------------------
# convolution
# ---------------------------------------------------------------------------

def scatter_to_grid(m: DiscreteMeasure, f: GridField):
    """Area-weighted (cloud-in-cell) deposit of measure masses on f's step lattice.

    A point y splits its mass among the offsets floor(y/h) and neighbors, so
    that (f * m)[i] = sum_o M[o] f[i - o] runs over integer lattice offsets.
    Returns (masses array, jmin) where array index j maps to offset jmin + j.
    """
    h = f.spacing
    g = m.points / h[None, :]
    base = np.floor(g).astype(int)
    frac = g - base
    ndim = len(f.lo)
    jmin = base.min(axis=0)
    jmax = base.max(axis=0) + 1
    arr = np.zeros(tuple(jmax - jmin + 1))
    for corner in range(2**ndim):
        bits = [(corner >> d) & 1 for d in range(ndim)]
        idx = tuple(
            base[:, d] - jmin[d] + bits[d] for d in range(ndim)
        )
        w = m.weights.copy()
        for d in range(ndim):
            w = w * (frac[:, d] if bits[d] else 1.0 - frac[:, d])
        np.add.at(arr, idx, w)
    return arr, jmin


def _support_bbox(values: np.ndarray, rel_tol: float = 1e-9):
    # support up to negligible tails; smooth rapidly-decaying fields with
    # sub-rel_tol edge values count as compactly supported
    peak = np.max(np.abs(values))
    if peak == 0.0:
        return None
    nz = np.nonzero(np.abs(values) > rel_tol * peak)
    return (np.array([a.min() for a in nz]), np.array([a.max() for a in nz]))


def convolve(f: GridField, m: DiscreteMeasure, method: str = "fft",
             check_padding: bool = True) -> GridField:
    """(f * m)(x) on f's grid; methods 'direct' and 'fft' share the scattered measure.

    Requires f's support to sit at least the measure's reach away from the
    box edge, so the output (same box) loses nothing; otherwise raises with
    the padding that would be needed.  The FFT path zero-pads (linear, never
    circular), so values inside the box are exact either way;
    ``check_padding=False`` permits deliberate truncation at the boundary.
    """
    if method not in ("direct", "fft"):
        raise ValueError("method must be 'direct' or 'fft'")
    marr, jmin = scatter_to_grid(m, f)
    bbox = _support_bbox(f.values) if check_padding else None
    if bbox is not None:
        lo_idx, hi_idx = bbox
        jmax = jmin + np.array(marr.shape) - 1
        out_lo = lo_idx + jmin
        out_hi = hi_idx + jmax
        need_lo = np.maximum(0, -out_lo) * f.spacing
        need_hi = np.maximum(0, out_hi - (np.array(f.shape) - 1)) * f.spacing
        if np.any(need_lo > 0) or np.any(need_hi > 0):
            raise ValueError(
                "insufficient padding: enlarge the box by "
                f"{need_lo.tolist()} below and {need_hi.tolist()} above"
            )
    full = signal.convolve(f.values, marr, mode="full", method=method)
    out = np.zeros(f.shape)
    src, dst = [], []
    for d in range(len(f.shape)):
        start = -jmin[d]
        lo_clip = max(0, -start)
        hi_clip = min(f.shape[d], full.shape[d] - start)
        src.append(slice(start + lo_clip, start + hi_clip))
        dst.append(slice(lo_clip, hi_clip))
    out[tuple(dst)] = full[tuple(src)]
    return GridField(f.lo, f.hi, out)


def convolve_adjoint(g: GridField, m: DiscreteMeasure, method: str = "fft") -> GridField:
    """Adjoint of ``f -> f * m`` on the grid: convolution with the reflected measure.

    No padding requirement: out-of-box lookups read as zero, which pairs
    exactly with forward outputs of properly padded inputs.
    """
    return convolve(g, m.reflected(), method=method, check_padding=False)


# ---------------------------------------------------------------------------
# averaged application (stack over rotations / family parameters)
# ---------------------------------------------------------------------------

def apply_averaged(f: GridField, chart: SurfaceChart, rotations=None,
                   family=None, s_points=None, s_weights=None,
                   spacing: float | None = None, method: str = "fft",
                   min_samples: int = 16) -> AveragedField:
    """Stacked convolutions with the transformed measures, one slice per sample.

    ``rotations`` is a (matrices, weights) pair; alternatively a family plus
    explicit s_points/s_weights.  Parameter weights are attached normalized.
    """
    if spacing is None:
        spacing = 0.5 * float(np.min(f.spacing))
    if rotations is not None:
        mats, wts = rotations
        if len(mats) < min_samples:
            raise ValueError(f"need at least {min_samples} parameter samples")
        charts = [rotate_chart(chart, th) for th in mats]
        params = [np.asarray(th) for th in mats]
        weights = np.asarray(wts, dtype=float)
    elif family is not None:
        s_points = np.atleast_2d(np.asarray(s_points, dtype=float))
        if len(s_points) < min_samples:
            raise ValueError(f"need at least {min_samples} parameter samples")
        charts = [apply_family(family, s, chart) for s in s_points]
        params = [s for s in s_points]
        weights = (np.full(len(s_points), 1.0 / len(s_points))
                   if s_weights is None else np.asarray(s_weights, dtype=float))
    else:
        raise ValueError("provide rotations or a family with s_points")
    weights = weights / weights.sum()
    slices = np.empty((len(charts),) + f.shape)
    for i, ch in enumerate(charts):
        meas = discretize_measure(ch, spacing)
        slices[i] = convolve(f, meas, method=method).values
    return AveragedField(grid=GridField(f.lo, f.hi, np.zeros(f.shape)),
                         values=slices, param_weights=weights, params=params)


# ---------------------------------------------------------------------------
# generalized (nontranslation-invariant) application
# ---------------------------------------------------------------------------

def interp_multilinear(f: GridField, pts: np.ndarray):
    """Multilinear interpolation of f at physical points; zero outside the box.

    Returns (values, outside_count).
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    h = f.spacing
    g = (pts - f.lo[None, :]) / h[None, :] - 0.5
    ndim = len(f.lo)
    shape = np.array(f.shape)
    inside = np.ones(len(pts), dtype=bool)
    for d in range(ndim):
        inside &= (g[:, d] > -0.5) & (g[:, d] < shape[d] - 0.5)
    out = np.zeros(len(pts))
    gi = g[inside]
    base = np.floor(gi).astype(int)
    frac = gi - base
    acc = np.zeros(len(gi))
    for corner in range(2**ndim):
        bits = [(corner >> d) & 1 for d in range(ndim)]
        idx = []
        w = np.ones(len(gi))
        for d in range(ndim):
            j = np.clip(base[:, d] + bits[d], 0, shape[d] - 1)
            idx.append(j)
            w = w * (frac[:, d] if bits[d] else 1.0 - frac[:, d])
        acc += w * f.values[tuple(idx)]
    out[inside] = acc
    return out, int(len(pts) - inside.sum())


def _check_t_injective(gamma, out_grid, s_points, t_domain, tol=1e-8):
    t_domain = np.asarray(t_domain, dtype=float).reshape(-1, 2)
    k = len(t_domain)
    x0 = (0.5 * (out_grid.lo + out_grid.hi))[None, :]
    t_probes = np.stack(
        np.meshgrid(*[np.linspace(lo, hi, 3) for lo, hi in t_domain], indexing="ij"),
        axis=-1,
    ).reshape(-1, k)
    for s in s_points[: min(len(s_points), 3)]:
        for t in t_probes:
            cols = []
            for i in range(k):
                h = 1e-6 * (1.0 + abs(t[i]))
                up, dn = t.copy(), t.copy()
                up[i] += h
                dn[i] -= h
                cols.append((gamma(x0, s, up) - gamma(x0, s, dn))[0] / (2 * h))
            sv = np.linalg.svd(np.stack(cols, axis=1), compute_uv=False)
            if sv[-1] <= tol * sv[0]:
                raise ValueError("D_t gamma loses injectivity at a probe point")


def apply_generalized(f: GridField, gamma, chi, out_grid: GridField,
                      s_points, t_domain, t_counts,
                      t_rule: str = "gauss") -> tuple[AveragedField, int]:
    """Generalized transform: per (x, s), quadrature of f(gamma(x,s,t)) chi(t) dt.

    ``gamma(x, s, t)`` maps a batch of x to a batch of ambient points for one
    (s, t); D_t gamma must be injective at probe points.  Lookups of f use
    multilinear interpolation; points leaving f's box read as zero (the
    compact-support contract) and are counted in the returned total.
    ``t_rule`` is 'gauss' (composite panels) or 'uniform' (midpoint grid).
    """
    s_points = np.atleast_2d(np.asarray(s_points, dtype=float))
    t_domain = np.asarray(t_domain, dtype=float).reshape(-1, 2)
    k = len(t_domain)
    _check_t_injective(gamma, out_grid, s_points, t_domain)
    if np.isscalar(t_counts):
        t_counts = [int(t_counts)] * k
    axes = []
    for (lo, hi), cnt in zip(t_domain, t_counts):
        if t_rule == "uniform":
            xs = lo + (hi - lo) * (np.arange(cnt) + 0.5) / cnt
            ws = np.full(cnt, (hi - lo) / cnt)
            axes.append((xs, ws))
            continue
        xg, wg = np.polynomial.legendre.leggauss(12)
        panels = max(1, int(np.ceil(cnt / 12)))
        bounds = np.linspace(lo, hi, panels + 1)
        xs, ws = [], []
        for a, b in zip(bounds[:-1], bounds[1:]):
            half = 0.5 * (b - a)
            xs.append(0.5 * (a + b) + half * xg)
            ws.append(half * wg)
        axes.append((np.concatenate(xs), np.concatenate(ws)))
    if k == 1:
        t_nodes = axes[0][0][:, None]
        t_wts = axes[0][1]
    else:
        mesh = np.meshgrid(*[a[0] for a in axes], indexing="ij")
        t_nodes = np.stack([m.ravel() for m in mesh], axis=1)
        t_wts = axes[0][1]
        for _, w in axes[1:]:
            t_wts = np.multiply.outer(t_wts, w)
        t_wts = t_wts.ravel()

    chi_vals = np.asarray(chi(t_nodes), dtype=float)
    X = out_grid.points()
    outside_total = 0
    slices = np.zeros((len(s_points),) + out_grid.shape)
    for i, s in enumerate(s_points):
        acc = np.zeros(len(X))
        for tn, tw, cv in zip(t_nodes, t_wts, chi_vals):
            if cv == 0.0:
                continue
            pts = gamma(X, s, tn)
            vals, nout = interp_multilinear(f, pts)
            outside_total += nout
            acc += tw * cv * vals
        slices[i] = acc.reshape(out_grid.shape)
    stack = AveragedField(
        grid=GridField(out_grid.lo, out_grid.hi, np.zeros(out_grid.shape)),
        values=slices,
        param_weights=np.full(len(s_points), 1.0 / len(s_points)),
        params=[s for s in s_points],
    )
    return stack, outside_total
