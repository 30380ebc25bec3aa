import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from sphere_ie.catalog import (
    CartanCubic,
    CliffordTorus,
    Equator,
    SurfaceSpecError,
    Transformed,
    cartan_field,
    cartan_munzner_eval,
    cartan_sample,
    expected_ie,
    haar_rotations,
    mat_to_vec,
    parallel_translate,
    parse_surface,
    profile_lambdas,
    random_rotation,
    sample_sphere,
    sphere_rule,
    sphere_volume,
    vec_to_mat,
)
from sphere_ie.geometry import GeometryError, shape_from_level_set

S3 = math.sqrt(3)


def test_sphere_volumes():
    assert sphere_volume(1) == pytest.approx(2 * math.pi)
    assert sphere_volume(3) == pytest.approx(2 * math.pi ** 2)
    assert sphere_volume(4) == pytest.approx(8 * math.pi ** 2 / 3)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_sphere_rule_integrates_low_moments(m):
    x, w = sphere_rule(m, 12)
    vol = sphere_volume(m)
    assert np.sum(w) == pytest.approx(vol, rel=1e-13)
    assert np.allclose(np.linalg.norm(x, axis=1), 1, atol=1e-14)
    second = (w[:, None] * x ** 2).sum(0)
    assert np.allclose(second, vol / (m + 1), rtol=1e-12)
    assert np.allclose((w[:, None] * x ** 4).sum(0), 3 * vol / ((m + 1) * (m + 3)), rtol=1e-12)


def test_minimal_torus_principal_data():
    t = CliffordTorus.minimal(1, 4)
    vals = sorted(np.repeat(*zip(*t.principal)))
    assert np.allclose(vals, [-1 / S3] * 3 + [S3], atol=1e-14)
    assert abs(t.H) < 1e-15 and t.S == pytest.approx(4)


def test_einstein_torus_principal_data():
    t = parse_surface("clifford:k=2,n=4,r=einstein")
    assert t.r1 == pytest.approx(math.sqrt(0.5))
    assert sorted(np.repeat(*zip(*t.principal))) == pytest.approx([-1, -1, 1, 1])
    assert abs(t.f3) < 1e-14 and t.is_einstein


def test_nonminimal_torus_constant_h(rng):
    t = CliffordTorus(1, 4, 0.3)
    r2 = math.sqrt(1 - 0.09)
    assert t.n * t.H == pytest.approx(r2 / 0.3 - 3 * 0.3 / r2)
    Hs = [np.trace(p.shape) / 4 for p in t.sample_points(20, rng)]
    assert np.ptp(Hs) < 1e-12 and Hs[0] == pytest.approx(t.H, abs=1e-12)


def test_torus_points_validate(rng):
    for p in CliffordTorus(2, 5, 0.4).sample_points(20, rng):
        p.validate()


def test_torus_closed_form_matches_level_set(rng):
    for t in (CliffordTorus.minimal(1, 4), CliffordTorus(2, 5, 0.4), CliffordTorus.einstein(2, 4)):
        F, _ = t.level_set()
        for x in t.sample_positions(100, rng):
            p, q = t.point_at(x), shape_from_level_set(F, x)
            assert np.allclose(p.nu, q.nu, atol=1e-12)
            assert np.allclose(p.ambient_shape(), q.ambient_shape(), atol=1e-8)


def test_torus_volume_formula():
    t = CliffordTorus.minimal(1, 4)
    assert t.volume == pytest.approx(0.5 * (0.75) ** 1.5 * 2 * math.pi * 2 * math.pi ** 2)
    total = sum(b.weights.sum() for b in t.quadrature_batches(8))
    assert total == pytest.approx(t.volume, rel=1e-13)


def test_torus_quadrature_second_moments():
    t = CliffordTorus.minimal(1, 4)
    acc = np.zeros(6)
    for b in t.quadrature_batches(24):
        acc += b.weights @ b.x ** 2
    ratios = acc / t.volume
    assert np.allclose(ratios[:2], 1 / 8, atol=1e-14) and np.allclose(ratios[2:], 3 / 16, atol=1e-14)


def test_quadrature_node_budget():
    with pytest.raises(ValueError, match="Monte Carlo"):
        next(CliffordTorus.minimal(3, 7).quadrature_batches(24))


def test_cartan_normalization_maximum():
    # oracle: maximize Tr(X^3) over unit traceless symmetric matrices
    f = lambda y: -np.trace(np.linalg.matrix_power(vec_to_mat(y / np.linalg.norm(y)), 3))
    best = min((minimize(f, y0) for y0 in np.eye(5)), key=lambda r: r.fun)
    assert -best.fun == pytest.approx(1 / math.sqrt(6), abs=1e-8)
    assert cartan_munzner_eval(np.diag([2.0, -1, -1]) / math.sqrt(6)) == pytest.approx(1.0, abs=1e-14)


def test_cartan_minimal_level_example():
    X = np.diag([1 / math.sqrt(2), -1 / math.sqrt(2), 0])
    assert abs(cartan_munzner_eval(X)) < 1e-15


def test_cartan_conjugation_invariance(rng):
    X = vec_to_mat(sample_sphere(5, 1, rng)[0])
    Q = haar_rotations(10, rng)
    vals = cartan_munzner_eval(Q @ X @ Q.transpose(0, 2, 1))
    assert np.allclose(vals, cartan_munzner_eval(X), atol=1e-12)


def test_matrix_model_is_isometric(rng):
    y = sample_sphere(5, 3, rng)
    M = vec_to_mat(y)
    assert np.allclose(np.einsum("nij,mji->nm", M, M), y @ y.T, atol=1e-14)
    assert np.allclose(np.trace(M, axis1=1, axis2=2), 0, atol=1e-15)
    assert np.allclose(mat_to_vec(M), y, atol=1e-15)


def test_cartan_field_derivatives(rng):
    F = cartan_field()
    y = sample_sphere(5, 1, rng)[0]
    h = 1e-6
    grad = np.array([(F.value(y + h * e) - F.value(y - h * e)) / (2 * h) for e in np.eye(5)])
    assert np.allclose(grad, F.gradient(y), atol=1e-8)
    hess = np.array([(F.gradient(y + h * e) - F.gradient(y - h * e)) / (2 * h) for e in np.eye(5)])
    assert np.allclose(hess, F.hessian(y), atol=1e-7)


def test_cartan_samples(rng):
    s = CartanCubic()
    x = s.sample_positions(2000, rng)
    assert np.max(np.abs(cartan_munzner_eval(x))) < 1e-12
    for p in s.sample_points(50, rng):
        p.validate()
        assert np.allclose(np.sort(np.linalg.eigvalsh(p.shape)), [-S3, 0, S3], atol=1e-7)


def test_cartan_orbit_mean_is_zero():
    x = CartanCubic().sample_positions(1_000_000, np.random.default_rng(5))
    se = x.std(0) / 1000
    assert np.all(np.abs(x.mean(0)) <= 4 * se)


def test_cartan_sample_is_seeded():
    a, b = cartan_sample(math.pi / 6, 3), cartan_sample(math.pi / 6, 3)
    assert np.array_equal(a.x, b.x)
    assert abs(cartan_munzner_eval(a.x)) < 1e-12


def test_cartan_orbit_invariants_are_constant(rng):
    s = CartanCubic()
    stats = np.array([[np.trace(p.shape), np.sum(p.shape ** 2), np.trace(np.linalg.matrix_power(p.shape, 3))]
                      for p in s.sample_points(40, rng)])
    assert np.all(stats.std(0) < 1e-8)
    assert np.allclose(stats.mean(0), [0, 6, 0], atol=1e-8)


def test_cartan_rejects_focal_theta():
    with pytest.raises(GeometryError):
        CartanCubic(1e-7)


def test_cartan_volume():
    assert CartanCubic().volume == pytest.approx(4 * math.pi ** 2, rel=1e-14)


@pytest.mark.parametrize("delta, level", [(0.0, 0.0), (math.pi / 6, 1.0), (-math.pi / 6, -1.0), (0.1, None)])
def test_parallel_translate(delta, level):
    p = cartan_sample(math.pi / 6, 11)
    y = parallel_translate(p, delta)
    target = math.cos(3 * (math.pi / 6 - delta)) if level is None else level
    assert cartan_munzner_eval(y) == pytest.approx(target, abs=1e-9)
    if delta == 0:
        assert np.array_equal(y, p.x)


@settings(max_examples=30, deadline=None)
@given(st.floats(-1.0, 1.0))
def test_parallel_translate_round_trip(delta):
    p = cartan_sample(math.pi / 6, 2)
    y = parallel_translate(p, delta)
    nu = np.cos(delta) * p.nu - np.sin(delta) * p.x  # transported normal
    back = np.cos(-delta) * y + np.sin(-delta) * nu
    assert np.allclose(back, p.x, atol=1e-14)


def test_profile_cartan():
    prof = profile_lambdas(3, 1, 1)
    assert prof.theta0 == pytest.approx(math.pi / 6)
    assert [v for v, _ in prof.lambdas] == pytest.approx([S3, 0, -S3], abs=1e-14)


@pytest.mark.parametrize("k, n", [(1, 4), (2, 4), (2, 5), (3, 7)])
def test_profile_g2_matches_torus(k, n):
    prof = profile_lambdas(2, k, n - k)
    t = CliffordTorus.minimal(k, n)
    assert dict((m, v) for v, m in prof.lambdas) == pytest.approx(dict((m, v) for v, m in t.principal)) \
        if k != n - k else sorted(v for v, _ in prof.lambdas) == pytest.approx(sorted(v for v, _ in t.principal))
    assert prof.lambdas[0] == pytest.approx((t.kappa1, k))


def test_profile_g4():
    prof = profile_lambdas(4, 2, 2)
    assert prof.n == 8
    assert abs(prof.mean_curvature_sum) < 1e-10
    assert prof.S == pytest.approx(24, abs=1e-9)


@pytest.mark.parametrize("g, mp, mm", [(6, 1, 1), (6, 2, 2), (4, 1, 2), (4, 3, 4), (3, 2, 2), (1, 3, 3)])
def test_profiles_are_minimal_with_expected_s(g, mp, mm):
    prof = profile_lambdas(g, mp, mm)
    assert prof.n == g * (mp + mm) // 2
    assert abs(prof.mean_curvature_sum) < 1e-10
    assert prof.S == pytest.approx(prof.n * (g - 1), abs=1e-9)
    assert 0 < prof.theta0 < math.pi / g or g == 1


@pytest.mark.parametrize("args", [(5, 1, 1), (3, 1, 2), (2, 0, 1)])
def test_profile_rejections(args):
    with pytest.raises(ValueError):
        profile_lambdas(*args)


@pytest.mark.parametrize(
    "text, kind",
    [
        ("equator:n=4", Equator),
        ("clifford:k=1,n=4,r=minimal", CliffordTorus),
        ("clifford:k=2,n=4,r=0.7071", CliffordTorus),
        ("clifford:k=2,n=4,r=einstein", CliffordTorus),
        ("cartan", CartanCubic),
    ],
)
def test_parse_surfaces(text, kind):
    s = parse_surface(text)
    assert isinstance(s, kind) and s.text == text


def test_parse_profile():
    prof = parse_surface("profile:g=3,m=1,1")
    assert prof.text == "profile:g=3,m=1,1" and prof.n == 3


@pytest.mark.parametrize(
    "text, position",
    [
        ("clifford:k=0,n=4", 11),
        ("clifford:k=1,n=4,r=1.5", 19),
        ("clifford:k=1,n=4", 16),
        ("torus:k=1", 0),
        ("equator:n=x", 10),
        ("cartan:extra", 6),
        ("profile:g=5,m=1,1", 10),
        ("clifford:k=1,n=4,r=einstein", 11),
    ],
)
def test_parse_errors_carry_position(text, position):
    with pytest.raises(SurfaceSpecError) as err:
        parse_surface(text)
    assert err.value.position == position
    assert "^" in str(err.value)


def test_expected_ie_table():
    assert expected_ie(parse_surface("equator:n=4")) is True
    assert expected_ie(parse_surface("cartan")) is True
    assert expected_ie(parse_surface("clifford:k=2,n=4,r=einstein")) is True
    assert expected_ie(parse_surface("clifford:k=1,n=4,r=minimal")) is False
    assert expected_ie(parse_surface("clifford:k=1,n=4,r=0.3")) is False


def test_transformed_surface_geometry(rng):
    base = CliffordTorus(1, 4, 0.3)
    Q = random_rotation(6, rng)
    s = Transformed(base, Q, flip=True)
    assert s.text.endswith("@rot@flip") and s.k == 1
    for p in s.sample_points(10, rng):
        p.validate()
        q = base.point_at(Q.T @ p.x)
        assert np.allclose(np.sort(np.linalg.eigvalsh(p.shape)), np.sort(-np.linalg.eigvalsh(q.shape)), atol=1e-12)
    F, c = s.level_set()
    x = s.sample_positions(1, rng)[0]
    assert F.value(x) == pytest.approx(c, abs=1e-12)
    assert np.allclose(shape_from_level_set(F, x).ambient_shape(), s.point_at(x).ambient_shape(), atol=1e-8)
