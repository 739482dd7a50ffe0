"""Surface charts: parametrized measure-carrying patches with smooth cutoffs.

A chart is a map ``Phi: Omega in R^k -> R^n`` together with a nonnegative
weight ``chi`` on the parameter box.  The carried measure is the pushforward
of ``chi(u) du``; every downstream module (transforms, decay averages, Radon
application) consumes charts through this interface only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "SurfaceChart",
    "bump_weight",
    "smoothstep_bump",
    "uniform_weight",
    "make_builtin_surface",
    "rotate_chart",
    "apply_family",
    "chart_jacobian",
]

# Relative finite-difference step, central differences (balances truncation
# and roundoff at double precision).
FD_STEP = 1e-5


# ---------------------------------------------------------------------------
# cutoff weights
# ---------------------------------------------------------------------------

def bump_weight(center, radius, scale: float = 1.0) -> Callable:
    """Standard smooth bump ``scale * exp(1/(q^2-1))`` with ``q = |u-center|/radius``.

    Infinitely differentiable, supported on ``q < 1``, peak value
    ``scale/e`` at the center.
    """
    center = np.atleast_1d(np.asarray(center, dtype=float))
    radius = float(radius)

    def chi(u: np.ndarray) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        q2 = np.sum(((u - center) / radius) ** 2, axis=1)
        out = np.zeros(len(q2))
        inside = q2 < 1.0 - 1e-14
        out[inside] = scale * np.exp(1.0 / (q2[inside] - 1.0))
        return out

    return chi


def _smoothstep(x: np.ndarray) -> np.ndarray:
    # quintic smoothstep: C^2 seams, monotone on [0, 1]
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (x * (6.0 * x - 15.0) + 10.0)


def smoothstep_bump(r_inner: float = 0.5, r_outer: float = 1.0, center=None) -> Callable:
    """Radial plateau bump: 1 for ``|u| <= r_inner``, 0 for ``|u| >= r_outer``.

    Smoothstep-based transition; identically 1 in a neighborhood of the
    center, which is what the dyadic decomposition of the model surfaces
    requires of their cutoff.
    """
    if not 0.0 < r_inner < r_outer:
        raise ValueError("need 0 < r_inner < r_outer")

    def chi(u: np.ndarray) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        v = u if center is None else u - np.asarray(center, dtype=float)
        r = np.sqrt(np.sum(v * v, axis=1))
        return _smoothstep((r_outer - r) / (r_outer - r_inner))

    return chi


def uniform_weight(value: float = 1.0) -> Callable:
    def chi(u: np.ndarray) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        return np.full(len(u), float(value))

    return chi


# ---------------------------------------------------------------------------
# SurfaceChart
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SurfaceChart:
    """A parametrized, measure-carrying surface patch.

    Attributes
    ----------
    ambient_dim : int
        Dimension n of the ambient space.
    param_dim : int
        Dimension k of the parameter domain, 1 <= k <= n-1.
    domain : ndarray (k, 2)
        Axis-aligned parameter box, rows (lo, hi).
    eval : callable
        Vectorized map; (m, k) parameter points -> (m, n) ambient points.
    weight : callable
        Vectorized nonnegative cutoff; (m, k) points -> (m,) weights.
    kind : str
        One of {graph, circle, polygon_boundary, beta_surface, custom}.
    closed : bool
        True when the parameter box is periodic (closed curve); the
        boundary-vanishing requirement on the weight then does not apply.
    convex : bool
        Convexity flag; checked discretely for polygon/circle kinds.
    panel_breaks : tuple of tuples
        Per-axis parameter values where eval loses smoothness (polygon
        vertices); quadrature panels never straddle them.
    params : dict
        Kind-specific data (radius, vertices, beta, ...).

    Instances are immutable after construction and evaluation is pure, so
    charts are safe to share across threads.
    """

    ambient_dim: int
    param_dim: int
    domain: np.ndarray
    eval: Callable
    weight: Callable
    kind: str = "custom"
    closed: bool = False
    convex: bool = False
    panel_breaks: tuple = ()
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        dom = np.asarray(self.domain, dtype=float).reshape(self.param_dim, 2)
        object.__setattr__(self, "domain", dom)
        if not (1 <= self.param_dim <= self.ambient_dim - 1):
            raise ValueError("need 1 <= k <= n-1")
        if np.any(dom[:, 1] <= dom[:, 0]):
            raise ValueError("domain box must have positive extent")

    # -- helpers ------------------------------------------------------------

    def probe_points(self, per_axis: int = 9) -> np.ndarray:
        """Interior tensor grid of parameter points used for invariant checks."""
        axes = [
            np.linspace(lo, hi, per_axis + 2)[1:-1]
            for lo, hi in self.domain
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def validate(self, rank_tol: float = 1e-8, boundary_tol: float = 1e-12) -> None:
        """Check the chart invariants; raises ValueError on violation.

        Verifies that the weight vanishes on the domain boundary (open
        charts only), that the finite-difference Jacobian has full rank k
        at interior probe points, and discrete convexity when the convex
        flag is set on a polygon or circle chart.
        """
        if not self.closed:
            for axis in range(self.param_dim):
                for end in (0, 1):
                    pts = self.probe_points(5)
                    pts[:, axis] = self.domain[axis, end]
                    w = self.weight(pts)
                    if np.any(np.abs(w) > boundary_tol):
                        raise ValueError(
                            f"weight does not vanish on boundary axis {axis}"
                        )
        pts = self.probe_points(7)
        jac = chart_jacobian(self, pts)
        sv = np.linalg.svd(jac, compute_uv=False)
        bad = sv[:, self.param_dim - 1] <= rank_tol * sv[:, 0]
        if np.any(bad):
            raise ValueError("chart Jacobian loses rank at probe points")
        if self.convex and self.kind in ("polygon_boundary", "circle"):
            _check_discrete_convexity(self)


def chart_jacobian(chart: SurfaceChart, pts: np.ndarray) -> np.ndarray:
    """Central-difference Jacobian D_u Phi, shape (m, n, k)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    m, k = pts.shape
    jac = np.empty((m, chart.ambient_dim, k))
    span = chart.domain[:, 1] - chart.domain[:, 0]
    for i in range(k):
        h = FD_STEP * (1.0 + np.abs(pts[:, i])) * max(span[i], 1.0)
        up = pts.copy()
        dn = pts.copy()
        up[:, i] += h
        dn[:, i] -= h
        jac[:, :, i] = (chart.eval(up) - chart.eval(dn)) / (2.0 * h)[:, None]
    return jac


def _check_discrete_convexity(chart: SurfaceChart) -> None:
    verts = chart.params.get("vertices")
    if verts is None:
        return
    verts = np.asarray(verts, dtype=float)
    edges = np.roll(verts, -1, axis=0) - verts
    cross = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(
        edges, -1, axis=0
    )[:, 0]
    nonzero = cross[np.abs(cross) > 1e-14 * np.max(np.abs(cross))]
    if len(nonzero) and (np.any(nonzero > 0) and np.any(nonzero < 0)):
        raise ValueError("vertex list is not convex but convex flag is set")


# ---------------------------------------------------------------------------
# builtin surfaces
# ---------------------------------------------------------------------------

def make_builtin_surface(name: str, **params) -> SurfaceChart:
    """Construct one of the builtin measure-carrying surfaces.

    Supported names and parameters:

    - ``circle``: radius (1.0), weight_value (1.0).  Full circle, uniform
      arc-length weight, periodic parameter.
    - ``polygon``: vertices as an (V, 2) array or flat list, traversed once;
      uniform per-edge weights unless edge_weights is given.
    - ``parabola_graph``: n (2), curvature (2.0), cutoff_radius (0.5),
      graph (u, (c/2)|u|^2) with a smooth bump weight.
    - ``beta_surface``: n, beta (> 2 required).  Graph x_n = |x'|^beta with a
      smoothstep plateau weight identically 1 near the origin.
    - ``sphere``: n, cutoff_radius (0.35).  Graph patch of the unit sphere
      around the north pole with a smooth bump weight.
    - ``moment_curve_segment``: n, cutoff_radius (0.45).  Curve
      (t, t^2, ..., t^n) with a smooth bump weight.

    Returns a chart satisfying all SurfaceChart invariants.
    """
    builders = {
        "circle": _make_circle,
        "polygon": _make_polygon,
        "segment": _make_segment,
        "parabola_graph": _make_parabola_graph,
        "beta_surface": _make_beta_surface,
        "sphere": _make_sphere,
        "moment_curve_segment": _make_moment_curve,
    }
    if name not in builders:
        raise ValueError(f"unknown builtin surface {name!r}")
    chart = builders[name](**params)
    chart.validate()
    return chart


def _make_circle(radius: float = 1.0, weight_value: float = 1.0) -> SurfaceChart:
    radius = float(radius)
    if radius <= 0:
        raise ValueError("radius must be positive")

    def ev(t):
        t = np.atleast_2d(np.asarray(t, dtype=float))[:, 0]
        return np.stack([radius * np.cos(t), radius * np.sin(t)], axis=1)

    return SurfaceChart(
        ambient_dim=2,
        param_dim=1,
        domain=[[0.0, 2.0 * np.pi]],
        eval=ev,
        weight=uniform_weight(weight_value),
        kind="circle",
        closed=True,
        convex=True,
        params={"radius": radius, "weight_value": float(weight_value)},
    )


def _make_polygon(vertices, edge_weights=None, convex: bool = True) -> SurfaceChart:
    verts = np.asarray(vertices, dtype=float).reshape(-1, 2)
    if len(verts) < 3:
        raise ValueError("polygon needs at least 3 vertices")
    edges = np.roll(verts, -1, axis=0) - verts
    lengths = np.linalg.norm(edges, axis=1)
    if np.any(lengths <= 0):
        raise ValueError("degenerate polygon edge")
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    perimeter = cum[-1]
    if edge_weights is None:
        edge_weights = np.ones(len(verts))
    else:
        edge_weights = np.asarray(edge_weights, dtype=float)
        if edge_weights.shape != (len(verts),):
            raise ValueError("need one weight per edge")

    dirs = edges / lengths[:, None]

    def ev(t):
        t = np.atleast_2d(np.asarray(t, dtype=float))[:, 0]
        t = np.clip(t, 0.0, perimeter)
        idx = np.clip(np.searchsorted(cum, t, side="right") - 1, 0, len(verts) - 1)
        return verts[idx] + (t - cum[idx])[:, None] * dirs[idx]

    def wt(t):
        t = np.atleast_2d(np.asarray(t, dtype=float))[:, 0]
        idx = np.clip(np.searchsorted(cum, t, side="right") - 1, 0, len(verts) - 1)
        return edge_weights[idx]

    chart = SurfaceChart(
        ambient_dim=2,
        param_dim=1,
        domain=[[0.0, perimeter]],
        eval=ev,
        weight=wt,
        kind="polygon_boundary",
        closed=True,
        convex=convex,
        panel_breaks=(tuple(cum[1:-1]),),
        params={
            "vertices": verts,
            "edge_weights": edge_weights,
            "edge_lengths": lengths,
            "perimeter": perimeter,
        },
    )
    if convex:
        _check_discrete_convexity(chart)
    return chart


def _make_segment(length: float = 1.0, direction=(1.0, 0.0)) -> SurfaceChart:
    """Flat segment through the origin: the degenerate convex curve."""
    length = float(length)
    e = np.asarray(direction, dtype=float)
    e = e / np.linalg.norm(e)
    n = len(e)

    def ev(t):
        t = np.atleast_2d(np.asarray(t, dtype=float))[:, 0]
        return t[:, None] * e[None, :]

    # plateau arc weight: flat over most of the segment, smooth falloff
    return SurfaceChart(
        ambient_dim=n,
        param_dim=1,
        domain=[[-0.55 * length, 0.55 * length]],
        eval=ev,
        weight=smoothstep_bump(0.35 * length, 0.5 * length),
        kind="graph",
        convex=True,
        params={"length": length, "direction": e},
    )


def _make_parabola_graph(
    n: int = 2, curvature: float = 2.0, cutoff_radius: float = 0.5
) -> SurfaceChart:
    n = int(n)
    c = float(curvature)
    r = float(cutoff_radius)
    k = n - 1

    def ev(u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        h = 0.5 * c * np.sum(u * u, axis=1)
        return np.concatenate([u, h[:, None]], axis=1)

    box = [[-1.2 * r, 1.2 * r]] * k
    return SurfaceChart(
        ambient_dim=n,
        param_dim=k,
        domain=box,
        eval=ev,
        weight=bump_weight(np.zeros(k), r),
        kind="graph",
        convex=True,
        params={"curvature": c, "cutoff_radius": r},
    )


def _make_beta_surface(n: int, beta: float, support_radius: float = 0.5) -> SurfaceChart:
    n = int(n)
    beta = float(beta)
    if beta <= 2.0:
        raise ValueError("beta_surface requires beta > 2")
    k = n - 1
    r_out = float(support_radius)

    def ev(u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        h = np.sum(u * u, axis=1) ** (beta / 2.0)
        return np.concatenate([u, h[:, None]], axis=1)

    # weight psi(2u): identically 1 on |u| <= r_out/2, 0 beyond r_out, so the
    # dyadic ring decomposition telescopes exactly to this cutoff
    weight = smoothstep_bump(0.5 * r_out, r_out)
    breaks = ((0.0,),) * k if (beta != round(beta) or int(round(beta)) % 2) else ()
    return SurfaceChart(
        ambient_dim=n,
        param_dim=k,
        domain=[[-1.2 * r_out, 1.2 * r_out]] * k,
        eval=ev,
        weight=weight,
        kind="beta_surface",
        convex=True,
        panel_breaks=breaks,
        params={"beta": beta, "support_radius": r_out},
    )


def _make_sphere(n: int = 3, cutoff_radius: float = 0.35) -> SurfaceChart:
    n = int(n)
    r = float(cutoff_radius)
    if not 0 < r < 0.9:
        raise ValueError("cutoff_radius must lie in (0, 0.9)")
    k = n - 1

    def ev(u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        h = np.sqrt(np.maximum(1.0 - np.sum(u * u, axis=1), 0.0))
        return np.concatenate([u, h[:, None]], axis=1)

    return SurfaceChart(
        ambient_dim=n,
        param_dim=k,
        domain=[[-1.2 * r, 1.2 * r]] * k,
        eval=ev,
        weight=bump_weight(np.zeros(k), r),
        kind="graph",
        convex=True,
        params={"cutoff_radius": r},
    )


def _make_moment_curve(n: int = 3, cutoff_radius: float = 0.45) -> SurfaceChart:
    n = int(n)
    r = float(cutoff_radius)

    def ev(t):
        t = np.atleast_2d(np.asarray(t, dtype=float))[:, 0]
        return np.stack([t ** (j + 1) for j in range(n)], axis=1)

    return SurfaceChart(
        ambient_dim=n,
        param_dim=1,
        domain=[[-1.2 * r, 1.2 * r]],
        eval=ev,
        weight=bump_weight([0.0], r),
        kind="graph",
        params={"cutoff_radius": r},
    )


# ---------------------------------------------------------------------------
# chart operations
# ---------------------------------------------------------------------------

def rotate_chart(chart: SurfaceChart, theta: np.ndarray) -> SurfaceChart:
    """Chart of the rotated measure: <f, mu_theta> = <f(theta^-1 .), mu>.

    The returned chart evaluates ``u -> theta^T Phi(u)``, which gives the
    transform identity ``mu_hat_theta(xi) = mu_hat(theta xi)``.
    """
    theta = np.asarray(theta, dtype=float)
    n = chart.ambient_dim
    if theta.shape != (n, n):
        raise ValueError("rotation dimension mismatch")
    if np.max(np.abs(theta.T @ theta - np.eye(n))) > 1e-10:
        raise ValueError("matrix is not orthogonal")
    base = chart.eval

    def ev(u):
        return base(u) @ theta  # rows become theta^T Phi(u)

    params = dict(chart.params, rotated=True)
    if "vertices" in params:
        params["vertices"] = np.asarray(params["vertices"], dtype=float) @ theta

    return SurfaceChart(
        ambient_dim=n,
        param_dim=chart.param_dim,
        domain=chart.domain,
        eval=ev,
        weight=chart.weight,
        kind=chart.kind,
        closed=chart.closed,
        convex=chart.convex,
        panel_breaks=chart.panel_breaks,
        params=params,
    )


def apply_family(family, s, chart: SurfaceChart) -> SurfaceChart:
    """Compose a chart with a transformation family member: u -> T_s(Phi(u)).

    The weight is unchanged.  Raises ValueError when s lies outside the
    family's parameter box.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    box = family.param_box
    if s.shape != (family.param_dim,):
        raise ValueError("parameter dimension mismatch")
    if np.any(s < box[:, 0] - 1e-12) or np.any(s > box[:, 1] + 1e-12):
        raise ValueError("parameter point outside family param_box")
    if family.ambient_dim != chart.ambient_dim:
        raise ValueError("ambient dimension mismatch")
    base = chart.eval

    def ev(u):
        return family.eval(s, base(u))

    params = dict(chart.params, transformed=True)
    params.pop("vertices", None)  # no longer straight edges in general
    return SurfaceChart(
        ambient_dim=chart.ambient_dim,
        param_dim=chart.param_dim,
        domain=chart.domain,
        eval=ev,
        weight=chart.weight,
        kind="custom",
        closed=chart.closed,
        convex=False,
        panel_breaks=chart.panel_breaks,
        params=params,
    )
