"""Fourier transforms of surface-carried measures by oscillation-resolving quadrature.

``mu_hat`` approximates ``int e^{-2 pi i xi . Phi(u)} chi(u) du`` with
composite Gauss-Legendre panels sized to the local oscillation (at least 8
nodes per period for any accepted value) and a doubling refinement whose
successive values must agree to the requested tolerance.  Closed-form fast
paths cover polygon boundaries; the dyadic ring decomposition reproduces the
transform of the model surfaces x_n = |x'|^beta scale by scale.
"""

from __future__ import annotations

import warnings
import weakref
from dataclasses import dataclass

import numpy as np

from .families import sphere_directions
from .geometry import SurfaceChart, chart_jacobian, smoothstep_bump

__all__ = [
    "FrequencyGrid",
    "QuadratureError",
    "mu_hat",
    "mu_hat_batch",
    "chart_mass",
    "mu_hat_polygon_exact",
    "mu_hat_beta_dyadic",
    "mu_hat_beta_dyadic_terms",
    "lemma1_envelope",
]

_PPP = 12          # Gauss-Legendre nodes per panel
_NPP_LADDER = (4, 8, 16, 32, 64, 128)   # nodes per oscillation period
_SAFETY = 1.1      # margin on the finite-difference period estimate
_MASS_FLOOR = 0.05  # absolute convergence floor, as a fraction of the mass
_CHUNK_ENTRIES = 6_000_000  # max phase-matrix entries held at once


class QuadratureError(RuntimeError):
    """Oscillatory quadrature failed to converge; carries the last two estimates."""

    def __init__(self, message, last=None, previous=None):
        super().__init__(message)
        self.last = last
        self.previous = previous


# ---------------------------------------------------------------------------
# FrequencyGrid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrequencyGrid:
    """Dyadic radial levels times a direction quadrature on S^{n-1}.

    ``directions`` are unit vectors with weights summing to 1; ``ray``
    marks the fixed-single-direction mode used for pointwise decay probes.
    """

    rho_levels: np.ndarray
    directions: np.ndarray
    weights: np.ndarray
    ray: bool = False

    def __post_init__(self):
        object.__setattr__(self, "rho_levels", np.asarray(self.rho_levels, float))
        object.__setattr__(self, "directions", np.atleast_2d(np.asarray(self.directions, float)))
        object.__setattr__(self, "weights", np.asarray(self.weights, float))
        norms = np.linalg.norm(self.directions, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-12:
            raise ValueError("directions must be unit vectors")
        if abs(self.weights.sum() - 1.0) > 1e-10:
            raise ValueError("direction weights must sum to 1")

    @staticmethod
    def dyadic(rho_min: float, levels: int, n: int, count: int,
               scheme: str = "auto", offset: float = 0.0) -> "FrequencyGrid":
        rhos = rho_min * 2.0 ** np.arange(levels)
        dirs, wts = sphere_directions(n, count, scheme=scheme, offset=offset)
        return FrequencyGrid(rhos, dirs, wts)

    @staticmethod
    def along_ray(direction, rho_levels) -> "FrequencyGrid":
        d = np.asarray(direction, float)
        d = d / np.linalg.norm(d)
        return FrequencyGrid(np.asarray(rho_levels, float), d[None, :],
                             np.array([1.0]), ray=True)


# ---------------------------------------------------------------------------
# per-chart caches (charts are immutable; keyed by identity)
# ---------------------------------------------------------------------------

_probe_cache: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()
_mass_cache: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _probe_data(chart: SurfaceChart):
    data = _probe_cache.get(chart)
    if data is None:
        per_axis = 33 if chart.param_dim == 1 else 17
        pts = chart.probe_points(per_axis)
        jac = chart_jacobian(chart, pts)  # (P, n, k)
        data = jac
        _probe_cache[chart] = data
    return data


def _cycles_per_axis(chart: SurfaceChart, xis: np.ndarray) -> np.ndarray:
    """Estimated oscillation periods of xi . Phi along each parameter axis."""
    jac = _probe_data(chart)                      # (P, n, k)
    grad = np.einsum("pnk,bn->pbk", jac, xis)     # d(xi.Phi)/du_k at probes
    peak = np.max(np.abs(grad), axis=0)           # (B, k)
    span = chart.domain[:, 1] - chart.domain[:, 0]
    return _SAFETY * peak * span[None, :]


# ---------------------------------------------------------------------------
# composite Gauss-Legendre grids
# ---------------------------------------------------------------------------

def _gl_cache(m: int):
    if not hasattr(_gl_cache, "store"):
        _gl_cache.store = {}
    if m not in _gl_cache.store:
        _gl_cache.store[m] = np.polynomial.legendre.leggauss(m)
    return _gl_cache.store[m]


def _axis_rule(lo: float, hi: float, breaks, cycles: float, npp: int):
    """Panelized Gauss-Legendre rule; panels never straddle breakpoints."""
    edges = [lo] + [b for b in breaks if lo < b < hi] + [hi]
    total = hi - lo
    target_nodes = max(npp * cycles, 3.0 * npp)
    panels_needed = max(len(edges) - 1, int(np.ceil(target_nodes / _PPP)))
    xg, wg = _gl_cache(_PPP)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        seg_panels = max(1, int(np.ceil(panels_needed * (b - a) / total)))
        bounds = np.linspace(a, b, seg_panels + 1)
        for p0, p1 in zip(bounds[:-1], bounds[1:]):
            half = 0.5 * (p1 - p0)
            nodes.append(0.5 * (p0 + p1) + half * xg)
            weights.append(half * wg)
    return np.concatenate(nodes), np.concatenate(weights)


def _tensor_rule(chart: SurfaceChart, cycles: np.ndarray, npp: int):
    """Tensor-product rule over the chart domain: points (P, k), weights (P,)."""
    axes = []
    for i, (lo, hi) in enumerate(chart.domain):
        breaks = chart.panel_breaks[i] if i < len(chart.panel_breaks) else ()
        axes.append(_axis_rule(lo, hi, breaks, float(cycles[i]), npp))
    if chart.param_dim == 1:
        return axes[0][0][:, None], axes[0][1]
    mesh = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    wts = axes[0][1]
    for _, w in axes[1:]:
        wts = np.multiply.outer(wts, w)
    return pts, wts.ravel()


def _quad_sum(chart: SurfaceChart, pts: np.ndarray, wts: np.ndarray,
              xis: np.ndarray) -> np.ndarray:
    """Sum w chi(u) e^{-2 pi i xi . Phi(u)} for a batch of frequencies.

    Accumulated in fixed-size chunks with pairwise partial sums, so results
    are bit-stable regardless of thread count.
    """
    B = len(xis)
    step = max(1, _CHUNK_ENTRIES // max(B, 1))
    partials = []
    for start in range(0, len(pts), step):
        sl = slice(start, start + step)
        phi = chart.eval(pts[sl])
        w = wts[sl] * chart.weight(pts[sl])
        phase = (2.0 * np.pi) * (phi @ xis.T)      # (chunk, B)
        re = w @ np.cos(phase)
        im = w @ np.sin(phase)
        partials.append(re - 1j * im)
    return np.sum(np.stack(partials, axis=0), axis=0)


# ---------------------------------------------------------------------------
# mu_hat
# ---------------------------------------------------------------------------

def mu_hat_batch(chart: SurfaceChart, xis, tol: float = 1e-6,
                 return_nodes: bool = False):
    """Vectorized ``mu_hat`` over a batch of frequencies sharing one rule.

    The rule is sized to the worst oscillation in the batch and refined by
    doubling the nodes-per-period until successive values for every
    frequency agree within ``tol`` (relative, with an absolute floor of a
    small fraction of the total mass).  Accepted values always come from a
    rule with at least 8 nodes per period.
    """
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    if xis.shape[1] != chart.ambient_dim:
        raise ValueError("frequency dimension mismatch")
    mass = chart_mass(chart)
    cycles = np.max(_cycles_per_axis(chart, xis), axis=0)
    prev = None
    nodes_used = 0
    for npp in _NPP_LADDER:
        pts, wts = _tensor_rule(chart, cycles, npp)
        cur = _quad_sum(chart, pts, wts, xis)
        nodes_used = len(pts)
        if prev is not None:
            scale = np.maximum(np.abs(cur), _MASS_FLOOR * mass)
            if np.all(np.abs(cur - prev) <= tol * scale):
                return (cur, nodes_used) if return_nodes else cur
        prev = cur
    raise QuadratureError(
        f"mu_hat did not converge to tol={tol} within the refinement ladder",
        last=prev, previous=None,
    )


def mu_hat(chart: SurfaceChart, xi, tol: float = 1e-6) -> complex:
    """Fourier transform of the chart's measure at a single frequency.

    Approximates ``int_Omega e^{-2 pi i xi . Phi(u)} chi(u) du`` (the
    e^{-2 pi i} convention throughout).  Raises QuadratureError when the
    refinement ladder fails to converge.
    """
    return complex(mu_hat_batch(chart, np.asarray(xi, float)[None, :], tol=tol)[0])


def chart_mass(chart: SurfaceChart, tol: float = 1e-12) -> float:
    """Total mass ``int chi(u) du`` of the chart's parameter measure."""
    mass = _mass_cache.get(chart)
    if mass is not None:
        return mass
    cycles = np.zeros(chart.param_dim)
    prev = None
    for npp in _NPP_LADDER:
        pts, wts = _tensor_rule(chart, cycles, npp)
        cur = float(np.sum(wts * chart.weight(pts)))
        if prev is not None and abs(cur - prev) <= tol * max(abs(cur), 1e-300):
            _mass_cache[chart] = cur
            return cur
        prev = cur
    _mass_cache[chart] = prev
    return prev


# ---------------------------------------------------------------------------
# polygon boundaries: exact per-edge transform
# ---------------------------------------------------------------------------

def mu_hat_polygon_exact(chart: SurfaceChart, xis) -> np.ndarray:
    """Closed-form transform of a polygon-boundary chart (per-edge weights).

    Each straight edge contributes ``w L e^{-2 pi i xi.A} e^{-pi i L xi.d}
    sinc(L xi.d)``; the sinc series branch makes the ``xi
    perpendicular-to-edge`` case exact rather than singular.  Accepts a
    single frequency or a batch; returns complex value(s).
    """
    if chart.kind != "polygon_boundary" or "vertices" not in chart.params:
        raise ValueError("exact path requires a polygon_boundary chart")
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    verts = np.asarray(chart.params["vertices"], float)
    lengths = np.asarray(chart.params["edge_lengths"], float)
    wts = np.asarray(chart.params["edge_weights"], float)
    dirs = (np.roll(verts, -1, axis=0) - verts) / lengths[:, None]

    a = xis @ dirs.T                 # (B, E): xi . edge direction
    start_phase = xis @ verts.T      # (B, E): xi . A_e
    la = lengths[None, :] * a
    vals = (
        wts[None, :]
        * lengths[None, :]
        * np.exp(-2j * np.pi * start_phase)
        * np.exp(-1j * np.pi * la)
        * np.sinc(la)
    )
    out = vals.sum(axis=1)
    return out if len(out) > 1 else out[0]


# ---------------------------------------------------------------------------
# dyadic decomposition of the model-surface transform
# ---------------------------------------------------------------------------

def _beta_ring_chart(chart: SurfaceChart) -> SurfaceChart:
    """Annulus piece phi = psi - psi(2 .) of the beta-surface cutoff."""
    beta = chart.params["beta"]
    r = chart.params["support_radius"]
    k = chart.param_dim
    psi = smoothstep_bump(r, 2.0 * r)

    def phi_weight(u):
        u = np.atleast_2d(np.asarray(u, float))
        return psi(u) - psi(2.0 * u)

    def ev(u):
        u = np.atleast_2d(np.asarray(u, float))
        h = np.sum(u * u, axis=1) ** (beta / 2.0)
        return np.concatenate([u, h[:, None]], axis=1)

    return SurfaceChart(
        ambient_dim=chart.ambient_dim,
        param_dim=k,
        domain=[[-2.2 * r, 2.2 * r]] * k,
        eval=ev,
        weight=phi_weight,
        kind="custom",
        params={"beta": beta},
    )


def mu_hat_beta_dyadic_terms(chart: SurfaceChart, xi, J: int,
                             tol: float = 1e-7) -> np.ndarray:
    """The J ring-scale terms 2^{-(n-1)j} I(2^{-j} xi', 2^{-beta j} xi_n)."""
    if chart.kind != "beta_surface":
        raise ValueError("dyadic decomposition requires a beta_surface chart")
    if J < 1:
        raise ValueError("need J >= 1 dyadic terms")
    xi = np.asarray(xi, dtype=float)
    n = chart.ambient_dim
    beta = chart.params["beta"]
    ring = _beta_ring_chart(chart)
    js = np.arange(1, J + 1)
    zetas = np.concatenate(
        [xi[None, :-1] * 2.0 ** (-js)[:, None],
         xi[None, -1:] * 2.0 ** (-beta * js)[:, None]],
        axis=1,
    )
    ring_vals = mu_hat_batch(ring, zetas, tol=tol)
    return 2.0 ** (-(n - 1) * js) * ring_vals


def mu_hat_beta_dyadic(chart: SurfaceChart, xi, J: int, tol: float = 1e-7) -> complex:
    """Transform of a beta-surface measure summed over J dyadic ring scales.

    Agrees with ``mu_hat`` once J exceeds the truncation bound log2|xi|;
    smaller J triggers a warning carrying the tail estimate.
    """
    xi = np.asarray(xi, dtype=float)
    terms = mu_hat_beta_dyadic_terms(chart, xi, J, tol=tol)
    rho = np.linalg.norm(xi)
    if rho > 1.0 and J < np.log2(rho):
        k = chart.param_dim
        r = chart.params["support_radius"]
        psi_mass = _psi_mass(k, r)
        tail = 2.0 ** (-(J + 1) * k) * psi_mass
        warnings.warn(
            f"J={J} below the truncation bound log2|xi|={np.log2(rho):.1f}; "
            f"tail estimate {tail:.3e}",
            stacklevel=2,
        )
    return complex(np.sum(terms))


def _psi_mass(k: int, r: float) -> float:
    psi = smoothstep_bump(r, 2.0 * r)
    axes = [np.linspace(-2.2 * r, 2.2 * r, 801)] * k
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    h = (axes[0][1] - axes[0][0]) ** k
    return float(np.sum(psi(pts)) * h)


# ---------------------------------------------------------------------------
# decay envelopes of the model surfaces
# ---------------------------------------------------------------------------

def lemma1_envelope(n: int, beta: float, xi) -> tuple[float, float]:
    """The two pointwise decay envelopes of the model-surface transform.

    Returns ``(bound31, bound32)`` where ``bound31 = |xi'|^{-(n-1)(beta-2) /
    (2(beta-1))} |xi_n|^{-(n-1)/(2(beta-1))}`` and ``bound32 =
    |xi|^{-(n-1)/beta}``, without constants (slope comparison only).
    A vanishing |xi'| (or |xi_n|) makes bound31 the +inf marker.
    """
    if beta <= 2.0:
        raise ValueError("envelopes require beta > 2")
    xi = np.asarray(xi, dtype=float)
    if np.all(xi == 0.0):
        raise ValueError("xi must be nonzero")
    xp = float(np.linalg.norm(xi[:-1]))
    xn = float(abs(xi[-1]))
    e1 = (n - 1) * (beta - 2.0) / (2.0 * (beta - 1.0))
    e2 = (n - 1) / (2.0 * (beta - 1.0))
    bound31 = np.inf if (xp == 0.0 or xn == 0.0) else xp ** (-e1) * xn ** (-e2)
    bound32 = float(np.linalg.norm(xi)) ** (-(n - 1) / beta)
    return bound31, bound32
