"""Smooth transformation families of R^n and rotation-group sampling.

A family is a map ``(s, x) -> T_s(x)`` over a compact parameter box
``K in R^m``; Jacobians in x and the x-Jacobians of the s-derivatives are
obtained by central finite differences.  Rotation samplers produce
orthogonal matrices with normalized Haar weights, by exact angle grids
(n = 2), Euler-angle product quadrature (n = 3), or seeded low-discrepancy
points pushed through QR orthonormalization (n >= 3).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import qmc
from scipy.special import ndtri

__all__ = [
    "TransformFamily",
    "rotation_family",
    "translation_family",
    "shear_family",
    "identity_family",
    "inverse_family",
    "newton_invert",
    "RotationSampler",
    "sphere_directions",
    "rotation_2d",
    "rotation_axis_angle",
]


# ---------------------------------------------------------------------------
# rotation matrices
# ---------------------------------------------------------------------------

def rotation_2d(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def rotation_axis_angle(v) -> np.ndarray:
    """Rodrigues formula: rotation by |v| radians about axis v in R^3."""
    v = np.asarray(v, dtype=float)
    phi = np.linalg.norm(v)
    K = np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])
    if phi < 1e-12:
        return np.eye(3) + K + 0.5 * (K @ K)
    return (
        np.eye(3)
        + (np.sin(phi) / phi) * K
        + ((1.0 - np.cos(phi)) / phi**2) * (K @ K)
    )


def _euler_zyz(alpha: float, beta: float, gamma: float) -> np.ndarray:
    rz = lambda a: np.array(
        [[np.cos(a), -np.sin(a), 0.0], [np.sin(a), np.cos(a), 0.0], [0.0, 0.0, 1.0]]
    )
    ry = lambda b: np.array(
        [[np.cos(b), 0.0, np.sin(b)], [0.0, 1.0, 0.0], [-np.sin(b), 0.0, np.cos(b)]]
    )
    return rz(alpha) @ ry(beta) @ rz(gamma)


# ---------------------------------------------------------------------------
# TransformFamily
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TransformFamily:
    """Smooth family s -> T_s of maps of R^n over a compact parameter box.

    ``eval(s, x)`` takes a single parameter point s (shape (m,)) and a batch
    of ambient points x (shape (b, n)).  ``linear_matrix``, when provided,
    returns the (n, n) matrix of a linear T_s and enables batched fast paths
    downstream; it must agree with ``eval``.
    """

    ambient_dim: int
    param_dim: int
    eval: Callable
    param_box: np.ndarray
    fd_step: float = 1e-5
    linear_matrix: Callable | None = None
    periodic_axes: tuple = ()
    name: str = "family"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        box = np.asarray(self.param_box, dtype=float).reshape(self.param_dim, 2)
        object.__setattr__(self, "param_box", box)

    # -- finite differences ---------------------------------------------------

    def jacobian_x(self, s, x) -> np.ndarray:
        """J_{T_s}(x) by central differences, shape (b, n, n)."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        x = np.atleast_2d(np.asarray(x, dtype=float))
        n = self.ambient_dim
        jac = np.empty((len(x), n, n))
        for i in range(n):
            h = self.fd_step * (1.0 + np.abs(x[:, i]))
            up = x.copy()
            dn = x.copy()
            up[:, i] += h
            dn[:, i] -= h
            jac[:, :, i] = (self.eval(s, up) - self.eval(s, dn)) / (2.0 * h)[:, None]
        return jac

    def jacobian_ds(self, s, x, k: int) -> np.ndarray:
        """J of the map dT_s/ds_k at x (central differences in s), (b, n, n)."""
        s = np.atleast_1d(np.asarray(s, dtype=float)).copy()
        h = self.fd_step * (1.0 + abs(float(s[k])))
        up = s.copy()
        dn = s.copy()
        up[k] += h
        dn[k] -= h
        return (self.jacobian_x(up, x) - self.jacobian_x(dn, x)) / (2.0 * h)

    def ds_eval(self, s, x, k: int) -> np.ndarray:
        """dT_s/ds_k (x) by central differences, shape (b, n)."""
        s = np.atleast_1d(np.asarray(s, dtype=float)).copy()
        h = self.fd_step * (1.0 + abs(float(s[k])))
        up = s.copy()
        dn = s.copy()
        up[k] += h
        dn[k] -= h
        return (self.eval(up, x) - self.eval(dn, x)) / (2.0 * h)

    def check_invertible(self, s, x, tol: float = 1e-8) -> bool:
        """Round-trip Newton inversion check on a batch of points."""
        y = self.eval(s, np.atleast_2d(x))
        xb = newton_invert(self, s, y, tol=tol)
        return bool(np.max(np.abs(self.eval(s, xb) - y)) < 10 * tol)


def newton_invert(family: TransformFamily, s, y, tol: float = 1e-10, maxiter: int = 50):
    """Solve T_s(x) = y for x by Newton iteration with FD Jacobians."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    x = y.copy()
    for _ in range(maxiter):
        r = family.eval(s, x) - y
        if np.max(np.abs(r)) < tol:
            return x
        J = family.jacobian_x(s, x)
        x = x - np.linalg.solve(J, r[:, :, None])[:, :, 0]
    r = family.eval(s, x) - y
    if np.max(np.abs(r)) < 100 * tol:
        return x
    raise RuntimeError("Newton inversion did not converge")


# -- factories ----------------------------------------------------------------

def rotation_family(n: int, param_box=None) -> TransformFamily:
    """Rotations of R^n as a transformation family.

    n = 2 uses the angle coordinate (periodic over [0, 2pi) by default).
    n = 3 uses exponential (axis-angle) coordinates, which keep the chart
    nonsingular at the identity; Euler charts degenerate there and would
    spuriously break the rank conditions.
    """
    if n == 2:
        box = [[0.0, 2.0 * np.pi]] if param_box is None else param_box

        def ev(s, x):
            R = rotation_2d(float(np.atleast_1d(s)[0]))
            return np.atleast_2d(x) @ R.T

        return TransformFamily(
            ambient_dim=2,
            param_dim=1,
            eval=ev,
            param_box=box,
            linear_matrix=lambda s: rotation_2d(float(np.atleast_1d(s)[0])),
            periodic_axes=(0,) if param_box is None else (),
            name="rotation2d",
        )
    if n == 3:
        box = [[-0.5, 0.5]] * 3 if param_box is None else param_box

        def ev(s, x):
            R = rotation_axis_angle(np.atleast_1d(s))
            return np.atleast_2d(x) @ R.T

        return TransformFamily(
            ambient_dim=3,
            param_dim=3,
            eval=ev,
            param_box=box,
            linear_matrix=lambda s: rotation_axis_angle(np.atleast_1d(s)),
            name="rotation3d",
        )
    raise NotImplementedError("rotation_family supports n in {2, 3}")


def translation_family(directions, param_box=None) -> TransformFamily:
    """T_s(x) = x + sum_k s_k v_k for fixed direction vectors v_k."""
    V = np.atleast_2d(np.asarray(directions, dtype=float))
    m, n = V.shape
    box = [[-1.0, 1.0]] * m if param_box is None else param_box

    def ev(s, x):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.atleast_2d(x) + s @ V

    return TransformFamily(
        ambient_dim=n, param_dim=m, eval=ev, param_box=box, name="translation"
    )


def shear_family(param_box=None) -> TransformFamily:
    """Planar shears T_s(x) = (x1 + s x2, x2)."""
    box = [[-1.0, 1.0]] if param_box is None else param_box

    def mat(s):
        return np.array([[1.0, float(np.atleast_1d(s)[0])], [0.0, 1.0]])

    def ev(s, x):
        return np.atleast_2d(x) @ mat(s).T

    return TransformFamily(
        ambient_dim=2,
        param_dim=1,
        eval=ev,
        param_box=box,
        linear_matrix=mat,
        name="shear",
    )


def identity_family(n: int, m: int = 1, param_box=None) -> TransformFamily:
    """Degenerate family T_s = Id for all s (rank-condition counterexample)."""
    box = [[-1.0, 1.0]] * m if param_box is None else param_box

    def ev(s, x):
        return np.atleast_2d(np.asarray(x, dtype=float)).copy()

    return TransformFamily(
        ambient_dim=n,
        param_dim=m,
        eval=ev,
        param_box=box,
        linear_matrix=lambda s: np.eye(n),
        name="identity",
    )


def inverse_family(family: TransformFamily, tol: float = 1e-11) -> TransformFamily:
    """The family s -> T_s^{-1}, evaluated by Newton inversion."""
    if family.linear_matrix is not None:
        base_mat = family.linear_matrix

        def mat(s):
            return np.linalg.inv(base_mat(s))

        def ev(s, x):
            return np.atleast_2d(x) @ mat(s).T

        return TransformFamily(
            ambient_dim=family.ambient_dim,
            param_dim=family.param_dim,
            eval=ev,
            param_box=family.param_box,
            fd_step=family.fd_step,
            linear_matrix=mat,
            periodic_axes=family.periodic_axes,
            name=family.name + "_inv",
        )

    def ev(s, x):
        return newton_invert(family, s, x, tol=tol)

    return TransformFamily(
        ambient_dim=family.ambient_dim,
        param_dim=family.param_dim,
        eval=ev,
        param_box=family.param_box,
        fd_step=family.fd_step,
        name=family.name + "_inv",
    )


# ---------------------------------------------------------------------------
# rotation-group and sphere sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RotationSampler:
    """Sampler for SO(n) with normalized Haar weights.

    Schemes: ``uniform_angles`` (n = 2, exact), ``product_quadrature``
    (n = 3: trapezoid in the two periodic Euler angles, Gauss-Legendre in
    cos(beta) which carries the sin(beta) Haar factor), ``low_discrepancy``
    (n >= 3: seeded Halton points mapped to Gaussians and orthonormalized
    by QR, equal weights).
    """

    n: int
    scheme: str = "auto"
    count: int = 64
    seed: int = 0

    def _resolved_scheme(self) -> str:
        if self.scheme != "auto":
            return self.scheme
        return {2: "uniform_angles", 3: "product_quadrature"}.get(
            self.n, "low_discrepancy"
        )

    def sample(self):
        """Return (matrices (N, n, n), weights (N,)); weights sum to 1."""
        scheme = self._resolved_scheme()
        if scheme == "uniform_angles":
            if self.n != 2:
                raise ValueError("uniform_angles requires n = 2")
            ang = 2.0 * np.pi * (np.arange(self.count) + 0.5) / self.count
            mats = np.stack([rotation_2d(a) for a in ang])
            return mats, np.full(self.count, 1.0 / self.count)
        if scheme == "product_quadrature":
            if self.n != 3:
                raise ValueError("product_quadrature requires n = 3")
            na = max(2, int(round(self.count ** (1.0 / 3.0))))
            return so3_product_sample(na, na, na)
        if scheme == "low_discrepancy":
            return _low_discrepancy_rotations(self.n, self.count, self.seed)
        raise ValueError(f"unknown scheme {scheme!r}")


def so3_product_sample(na: int, nb: int, ng: int):
    """Euler ZYZ product rule on SO(3): alpha, gamma uniform, beta Gauss in cos."""
    alpha = 2.0 * np.pi * (np.arange(na) + 0.5) / na
    gamma = 2.0 * np.pi * (np.arange(ng) + 0.5) / ng
    xb, wb = np.polynomial.legendre.leggauss(nb)
    beta = np.arccos(xb)
    mats = np.empty((na * nb * ng, 3, 3))
    wts = np.empty(na * nb * ng)
    idx = 0
    for i, a in enumerate(alpha):
        for j, b in enumerate(beta):
            for k, g in enumerate(gamma):
                mats[idx] = _euler_zyz(a, b, g)
                wts[idx] = wb[j]
                idx += 1
    wts /= wts.sum()
    return mats, wts


def _low_discrepancy_rotations(n: int, count: int, seed: int):
    sampler = qmc.Halton(d=n * n, scramble=True, seed=seed)
    u = sampler.random(count)
    g = ndtri(np.clip(u, 1e-12, 1.0 - 1e-12)).reshape(count, n, n)
    mats = np.empty_like(g)
    for i in range(count):
        q, r = np.linalg.qr(g[i])
        q = q * np.sign(np.diag(r))
        if np.linalg.det(q) < 0:
            q[:, -1] = -q[:, -1]
        mats[i] = q
    return mats, np.full(count, 1.0 / count)


def sphere_directions(n: int, count: int, scheme: str = "auto", seed: int = 0,
                      offset: float = 0.0):
    """Unit directions on S^{n-1} with quadrature weights summing to 1.

    n = 2: uniform angles (optionally offset to break alignment with a
    surface's symmetry axes).  n = 3: Gauss-Legendre in the polar cosine
    times uniform azimuth.  Any n: ``halton`` gives seeded equal-weight
    low-discrepancy directions (used for direction sampling rather than
    quadrature).
    """
    if scheme == "auto":
        scheme = {2: "uniform", 3: "gauss_product"}.get(n, "halton")
    if scheme == "uniform":
        if n != 2:
            raise ValueError("uniform angle directions require n = 2")
        ang = 2.0 * np.pi * (np.arange(count) + 0.5) / count + offset
        dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        return dirs, np.full(count, 1.0 / count)
    if scheme == "gauss_product":
        if n != 3:
            raise ValueError("gauss_product directions require n = 3")
        nphi = max(4, int(np.ceil(np.sqrt(2.0 * count))))
        npol = max(2, int(np.ceil(count / nphi)))
        xp, wp = np.polynomial.legendre.leggauss(npol)
        phi = 2.0 * np.pi * (np.arange(nphi) + 0.5) / nphi + offset
        ct = xp[:, None] * np.ones(nphi)[None, :]
        st = np.sqrt(1.0 - ct**2)
        dirs = np.stack(
            [st * np.cos(phi)[None, :], st * np.sin(phi)[None, :], ct * np.ones_like(phi)[None, :]],
            axis=2,
        ).reshape(-1, 3)
        wts = np.repeat(wp, nphi) / (2.0 * nphi)
        return dirs, wts / wts.sum()
    if scheme == "halton":
        sampler = qmc.Halton(d=n, scramble=True, seed=seed)
        g = ndtri(np.clip(sampler.random(count), 1e-12, 1.0 - 1e-12))
        norms = np.linalg.norm(g, axis=1)
        norms[norms == 0] = 1.0
        dirs = g / norms[:, None]
        return dirs, np.full(count, 1.0 / count)
    raise ValueError(f"unknown direction scheme {scheme!r}")
