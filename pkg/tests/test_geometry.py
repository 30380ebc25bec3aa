import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sphere_ie.catalog import CartanCubic, CliffordTorus, cartan_field, cartan_eigenvalues, mat_to_vec
from sphere_ie.geometry import (
    FocalPointError,
    GeometryError,
    LevelSetField,
    SurfacePoint,
    curvature_invariants,
    level_set_retract,
    ricci_quadratic_form,
    shape_from_level_set,
    tangent_frame,
    traceless_ricci_form,
)

unit_vectors = st.lists(st.floats(-1, 1), min_size=5, max_size=5).filter(lambda v: np.linalg.norm(v) > 0.1)


def _orthonormal_pair(u, v):
    x = np.asarray(u) / np.linalg.norm(u)
    w = np.asarray(v, dtype=float) - (np.dot(v, x)) * x
    return x, w / np.linalg.norm(w)


def test_frame_coordinate_case():
    e = np.eye(5)
    F = tangent_frame(e[0], e[1])
    assert F.shape == (3, 5)
    assert {tuple(np.abs(r).round(12)) for r in F} == {tuple(e[i]) for i in (2, 3, 4)}


@settings(max_examples=60, deadline=None)
@given(unit_vectors, unit_vectors)
def test_frame_is_orthonormal_complement(u, v):
    x = np.asarray(u) / np.linalg.norm(u)
    w = np.asarray(v) - np.dot(v, x) * x
    if np.linalg.norm(w) < 1e-3:
        return
    x, nu = _orthonormal_pair(u, v)
    F = tangent_frame(x, nu)
    assert np.allclose(F @ F.T, np.eye(3), atol=1e-12)
    assert np.max(np.abs(F @ x)) < 1e-12
    assert np.max(np.abs(F @ nu)) < 1e-12


def test_frame_at_torus_point():
    r1, r2 = 0.5, math.sqrt(0.75)
    x = np.array([r1, 0, r2, 0, 0])
    nu = np.array([r2, 0, -r1, 0, 0])
    F = tangent_frame(x, nu)
    assert np.max(np.abs(F @ x)) < 1e-12 and np.max(np.abs(F @ nu)) < 1e-12
    assert np.allclose(F @ F.T, np.eye(3), atol=1e-12)


def test_frame_is_deterministic():
    x, nu = _orthonormal_pair([1, 2, 3, 4, 5], [0, 1, 0, -1, 2])
    assert np.array_equal(tangent_frame(x, nu), tangent_frame(x, nu))


@pytest.mark.parametrize("x, nu", [([2, 0, 0, 0, 0], [0, 1, 0, 0, 0]), ([1, 0, 0, 0, 0], [1, 0, 0, 0, 0])])
def test_frame_rejects_invalid_pairs(x, nu):
    with pytest.raises(GeometryError):
        tangent_frame(np.array(x, float), np.array(nu, float))


def test_invariants_totally_geodesic():
    c = curvature_invariants(np.zeros((4, 4)))
    assert (c.H, c.S, c.f3, c.rho, c.R) == (0.0, 0.0, 0.0, 1.0, 12.0)


def test_invariants_minimal_torus():
    A = np.diag([math.sqrt(3)] + [-1 / math.sqrt(3)] * 3)
    c = curvature_invariants(A)
    assert abs(c.H) < 1e-15 and c.S == pytest.approx(4, abs=1e-14)
    assert c.f3 == pytest.approx(8 / math.sqrt(3), abs=1e-13)


def test_invariants_cartan():
    c = curvature_invariants(np.diag([math.sqrt(3), 0, -math.sqrt(3)]))
    assert c.S == pytest.approx(6, abs=1e-14) and abs(c.f3) < 1e-14


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=16, max_size=16))
def test_invariants_definitional_and_eigen_oracle(entries):
    M = np.reshape(entries, (4, 4))
    A = M + M.T
    c = curvature_invariants(A)
    n = 4
    assert c.rho - 1 == pytest.approx((n * n * c.H ** 2 - c.S) / (n * (n - 1)), abs=1e-12)
    lam = np.linalg.eigvalsh(A)
    assert c.S == pytest.approx(np.sum(lam ** 2), rel=1e-9, abs=1e-9)
    assert c.f3 == pytest.approx(np.sum(lam ** 3), rel=1e-9, abs=1e-9)
    assert c.S >= n * c.H ** 2 - 1e-9


def test_invariants_reject_asymmetric():
    with pytest.raises(GeometryError):
        curvature_invariants(np.array([[0, 1.0], [0, 0]]))


def test_ricci_equator_is_round():
    v = np.array([0.6, 0.8, 0, 0])
    assert ricci_quadratic_form(np.zeros((4, 4)), v, 0.0) == pytest.approx(3.0)


def test_einstein_torus_ricci():
    A = np.diag([1.0, 1.0, -1.0, -1.0])
    for v in np.eye(4):
        assert ricci_quadratic_form(A, v, 0.0) == pytest.approx(2.0)
        assert abs(traceless_ricci_form(A, v)) < 1e-14


def test_minimal_torus_ricci_in_circle_direction():
    A = np.diag([math.sqrt(3)] + [-1 / math.sqrt(3)] * 3)
    assert abs(ricci_quadratic_form(A, np.eye(4)[0], 0.0)) < 1e-14


def test_level_set_linear_height_gives_equator():
    e1 = np.eye(6)[0]
    F = LevelSetField(lambda x: float(x[0]), lambda x: e1, lambda x: np.zeros((6, 6)))
    x = np.array([0, 0.6, 0, 0.8, 0, 0])
    p = shape_from_level_set(F, x)
    p.validate()
    assert np.array_equal(p.nu, e1) and np.max(np.abs(p.shape)) == 0


def test_level_set_orientation_flip(rng):
    surface = CartanCubic()
    x = surface.sample_positions(1, rng)[0]
    F = cartan_field()
    p, q = shape_from_level_set(F, x), shape_from_level_set(-F, x)
    assert np.allclose(q.nu, -p.nu) and np.allclose(q.shape, -p.shape, atol=1e-12)


def test_cartan_level_set_spectrum(rng):
    for x in CartanCubic().sample_positions(10, rng):
        p = shape_from_level_set(cartan_field(), x)
        p.validate()
        assert np.allclose(np.sort(np.linalg.eigvalsh(p.shape)), [-math.sqrt(3), 0, math.sqrt(3)], atol=1e-8)


def test_cartan_focal_point_rejected():
    X = np.diag(cartan_eigenvalues(0.0))  # two equal eigenvalues
    with pytest.raises(FocalPointError):
        shape_from_level_set(cartan_field(), mat_to_vec(X))


def test_retraction_lands_on_level(rng):
    F = cartan_field()
    x = CartanCubic().sample_positions(1, rng)[0]
    y = level_set_retract(F, 0.0, x + 1e-3 * rng.standard_normal(5))
    assert abs(F.value(y)) < 1e-12 and abs(np.linalg.norm(y) - 1) < 1e-14


def test_surface_point_is_immutable_and_validates():
    t = CliffordTorus.minimal(1, 4)
    p = t.point([1, 0], [0, 1, 0, 0])
    p.validate()
    with pytest.raises(ValueError):
        p.x[0] = 2.0
    bad = SurfacePoint(p.x, p.x, p.frame, p.shape)
    with pytest.raises(GeometryError):
        bad.validate()


def test_largest_curvature_bound_on_minimal_catalog(surfaces):
    for key in ("torus", "einstein", "cartan", "equator"):
        s = surfaces[key]
        lam_max = max(abs(v) for v, _ in s.principal)
        bound = (s.n - 1) / s.n * s.S
        assert lam_max ** 2 <= bound + 1e-12
        equality = abs(lam_max ** 2 - bound) < 1e-12 and s.S > 0
        assert equality == (key == "torus")
