import numpy as np
import pytest

from radonlab.families import (RotationSampler, rotation_2d, rotation_family,
                               shear_family, translation_family)
from radonlab.geometry import (SurfaceChart, apply_family, bump_weight,
                               chart_jacobian, make_builtin_surface,
                               rotate_chart, smoothstep_bump)
from radonlab.oscillatory import chart_mass, mu_hat


UNIT_SQUARE = [[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]


def test_builtin_charts_satisfy_invariants():
    for name, kwargs in [
        ("circle", {}),
        ("polygon", {"vertices": UNIT_SQUARE}),
        ("segment", {}),
        ("parabola_graph", {"n": 2}),
        ("parabola_graph", {"n": 3, "curvature": 4.0, "cutoff_radius": 0.35}),
        ("beta_surface", {"n": 2, "beta": 4.0}),
        ("beta_surface", {"n": 3, "beta": 3.0}),
        ("sphere", {"n": 3}),
        ("moment_curve_segment", {"n": 3}),
    ]:
        chart = make_builtin_surface(name, **kwargs)
        chart.validate()  # boundary weight, Jacobian rank, convexity


def test_circle_is_canonical_parametrization():
    c = make_builtin_surface("circle", radius=1.0)
    t = np.array([[0.0], [np.pi / 2]])
    pts = c.eval(t)
    assert np.allclose(pts, [[1.0, 0.0], [0.0, 1.0]], atol=1e-15)
    assert c.param_dim == 1 and c.ambient_dim == 2


def test_beta_surface_graph_and_plateau():
    b = make_builtin_surface("beta_surface", n=2, beta=4.0)
    t = np.array([[0.3], [-0.2]])
    assert np.allclose(b.eval(t), [[0.3, 0.3**4], [-0.2, 0.2**4]], atol=1e-15)
    # weight identically 1 in a neighborhood of the origin
    near = np.linspace(-0.2, 0.2, 9)[:, None]
    assert np.allclose(b.weight(near), 1.0, atol=1e-15)


def test_beta_surface_rejects_beta_le_2():
    with pytest.raises(ValueError):
        make_builtin_surface("beta_surface", n=2, beta=2.0)


def test_square_polygon_is_convex_and_nonconvex_rejected():
    make_builtin_surface("polygon", vertices=UNIT_SQUARE)  # passes
    bad = [[0, 0], [1, 0], [0.2, 0.1], [0, 1]]
    with pytest.raises(ValueError):
        make_builtin_surface("polygon", vertices=bad)


def test_open_chart_weight_vanishes_on_boundary():
    p = make_builtin_surface("parabola_graph", n=2)
    lo, hi = p.domain[0]
    w = p.weight(np.array([[lo], [hi]]))
    assert np.all(np.abs(w) <= 1e-12)


def test_chart_jacobian_rank_full():
    s = make_builtin_surface("sphere", n=3)
    jac = chart_jacobian(s, s.probe_points(5))
    sv = np.linalg.svd(jac, compute_uv=False)
    assert np.all(sv[:, 1] > 1e-8 * sv[:, 0])


def test_rotate_chart_identity_and_axis_swap():
    c = make_builtin_surface("circle")
    t = c.probe_points(7)
    same = rotate_chart(c, np.eye(2))
    assert np.allclose(same.eval(t), c.eval(t), atol=1e-15)

    seg = make_builtin_surface("segment")
    rot = rotate_chart(seg, rotation_2d(np.pi / 2))
    pts = rot.eval(np.array([[0.3]]))
    # the rotated measure lives on theta^{-1} of the original support
    assert abs(pts[0, 0]) < 1e-12 and abs(pts[0, 1] + 0.3) < 1e-12


def test_rotate_chart_fourier_identity():
    # mu_hat(rotated chart, xi) == mu_hat(chart, theta xi)
    chart = make_builtin_surface("parabola_graph", n=2)
    theta = rotation_2d(0.7)
    xi = np.array([3.1, -2.4])
    lhs = mu_hat(rotate_chart(chart, theta), xi, tol=1e-9)
    rhs = mu_hat(chart, theta @ xi, tol=1e-9)
    assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(rhs))


def test_rotate_chart_dimension_mismatch():
    c = make_builtin_surface("circle")
    with pytest.raises(ValueError):
        rotate_chart(c, np.eye(3))


def test_apply_family_rotation_at_zero_is_identity():
    c = make_builtin_surface("circle")
    fam = rotation_family(2)
    moved = apply_family(fam, [0.0], c)
    t = c.probe_points(9)
    assert np.allclose(moved.eval(t), c.eval(t), atol=1e-14)


def test_apply_family_translation_shifts():
    c = make_builtin_surface("circle")
    fam = translation_family(np.eye(2))
    moved = apply_family(fam, [0.25, -0.5], c)
    t = c.probe_points(5)
    assert np.allclose(moved.eval(t), c.eval(t) + np.array([0.25, -0.5]), atol=1e-14)


def test_apply_family_shear_jacobian_matches_analytic():
    # analytic composition oracle: D(T_s o Phi) = [[1, s], [0, 1]] @ D Phi
    par = make_builtin_surface("parabola_graph", n=2)
    fam = shear_family()
    s = 0.3
    sheared = apply_family(fam, [s], par)
    t = par.probe_points(7)
    J = chart_jacobian(sheared, t)[:, :, 0]
    tt = t[:, 0]
    analytic = np.stack([1.0 + s * 2.0 * tt, 2.0 * tt], axis=1)
    assert np.max(np.abs(J - analytic)) < 1e-6 * (1 + np.max(np.abs(analytic)))


def test_apply_family_outside_box_rejected():
    c = make_builtin_surface("circle")
    fam = rotation_family(2)
    with pytest.raises(ValueError):
        apply_family(fam, [100.0], c)


def test_family_invertibility_roundtrip():
    fam = shear_family()
    x = np.array([[0.3, -0.2], [1.0, 0.5]])
    assert fam.check_invertible([0.4], x)


def test_family_fd_jacobian_matches_analytic():
    fam = shear_family()
    x = np.array([[0.7, -0.3]])
    J = fam.jacobian_x([0.25], x)[0]
    assert np.max(np.abs(J - np.array([[1.0, 0.25], [0.0, 1.0]]))) < 1e-6


def test_rotation_sampler_invariants():
    for n, count in [(2, 32), (3, 64)]:
        mats, wts = RotationSampler(n, count=count).sample()
        assert abs(wts.sum() - 1.0) < 1e-12
        for th in mats:
            assert np.max(np.abs(th.T @ th - np.eye(n))) < 1e-12
            assert abs(np.linalg.det(th) - 1.0) < 1e-12
    mats, wts = RotationSampler(4, scheme="low_discrepancy", count=32).sample()
    for th in mats:
        assert np.max(np.abs(th.T @ th - np.eye(4))) < 1e-12
        assert abs(np.linalg.det(th) - 1.0) < 1e-12


def test_haar_invariance_of_sampler_averages():
    # average of g(theta theta0) equals average of g(theta) within MC error
    mats, wts = RotationSampler(3, scheme="product_quadrature", count=12**3).sample()
    theta0 = rotation_family(3).linear_matrix(np.array([0.3, -0.2, 0.5]))
    v = np.array([1.0, 0.0, 0.0])

    def g(ths):
        return np.einsum("sij,j->si", ths, v)[:, 2] ** 2

    a = float(np.sum(wts * g(mats)))
    b = float(np.sum(wts * g(mats @ theta0)))
    assert abs(a - b) < 3e-3  # smooth test function, product rule is accurate


def test_reparametrization_independence_of_transform():
    # same measure under u -> 2u with compensated weight
    base = make_builtin_surface("parabola_graph", n=2)

    def ev(u):
        return base.eval(2.0 * np.atleast_2d(u))

    def wt(u):
        return 2.0 * base.weight(2.0 * np.atleast_2d(u))

    half = SurfaceChart(
        ambient_dim=2, param_dim=1,
        domain=base.domain / 2.0, eval=ev, weight=wt, kind="graph",
    )
    xi = np.array([5.0, 3.0])
    a = mu_hat(base, xi, tol=1e-10)
    b = mu_hat(half, xi, tol=1e-10)
    assert abs(a - b) < 1e-8


def test_polygon_mass_is_weighted_perimeter():
    weights = [1.0, 0.5, 2.0, 1.5]
    sq = make_builtin_surface("polygon", vertices=UNIT_SQUARE,
                              edge_weights=weights)
    # unit square: each edge length 1, closed form sum w_e L_e
    assert abs(chart_mass(sq) - sum(weights)) < 1e-12


def test_bump_and_plateau_profiles():
    chi = bump_weight([0.0], 1.0)
    assert chi(np.array([[0.0]]))[0] == pytest.approx(np.exp(-1.0))
    assert chi(np.array([[1.0]]))[0] == 0.0
    psi = smoothstep_bump(0.5, 1.0)
    assert psi(np.array([[0.3]]))[0] == 1.0
    assert psi(np.array([[1.1]]))[0] == 0.0
    mid = psi(np.array([[0.75]]))[0]
    assert 0.0 < mid < 1.0
