"""Pointwise geometry of a hypersurface M^n in S^{n+1} inside R^{n+2}.

Conventions: the shape operator is A(X) = -(d nu)(X) for tangent X, so the
round unit sphere with outward normal has A = -Id.  Frames are stored as rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

UNIT_TOL = 1e-10
FOCAL_TOL = 1e-8


class GeometryError(ValueError):
    """Raised when input data violates a geometric precondition."""


class FocalPointError(GeometryError):
    """The sphere-tangential gradient of a level-set function vanishes."""


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SurfacePoint:
    x: np.ndarray
    nu: np.ndarray
    frame: np.ndarray  # (n, n+2), orthonormal rows spanning T_xM
    shape: np.ndarray  # (n, n), matrix of A in `frame`

    def __post_init__(self):
        for name in ("x", "nu", "frame", "shape"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def n(self) -> int:
        return self.shape.shape[0]

    def ambient_shape(self) -> np.ndarray:
        """A as a symmetric operator on R^{n+2} vanishing on span{x, nu}."""
        return self.frame.T @ self.shape @ self.frame

    def flipped(self) -> "SurfacePoint":
        return SurfacePoint(self.x, -self.nu, self.frame, -self.shape)

    def validate(self, tol: float = UNIT_TOL) -> None:
        x, nu, E = self.x, self.nu, self.frame
        if abs(np.linalg.norm(x) - 1.0) > tol or abs(np.linalg.norm(nu) - 1.0) > tol:
            raise GeometryError("x and nu must be unit vectors")
        if abs(x @ nu) > tol:
            raise GeometryError("nu is not orthogonal to x")
        if E.shape != (len(x) - 2, len(x)):
            raise GeometryError(f"frame has shape {E.shape}, expected {(len(x) - 2, len(x))}")
        if np.max(np.abs(E @ E.T - np.eye(len(E)))) > tol:
            raise GeometryError("frame is not orthonormal")
        if np.max(np.abs(E @ x)) > tol or np.max(np.abs(E @ nu)) > tol:
            raise GeometryError("frame is not orthogonal to x and nu")
        if np.max(np.abs(self.shape - self.shape.T)) > tol:
            raise GeometryError("shape matrix is not symmetric")


@dataclass(frozen=True)
class CurvatureSummary:
    n: int
    H: float
    S: float
    f3: float
    rho: float
    R: float


@dataclass(frozen=True)
class LevelSetField:
    """A smooth function on R^{n+2} with ambient gradient and Hessian."""

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray]

    def __neg__(self) -> "LevelSetField":
        return LevelSetField(
            lambda x: -self.value(x),
            lambda x: -self.gradient(x),
            lambda x: -self.hessian(x),
        )


def _check_unit_pair(x: np.ndarray, nu: np.ndarray, tol: float) -> None:
    if abs(np.linalg.norm(x) - 1.0) > tol or abs(np.linalg.norm(nu) - 1.0) > tol:
        raise GeometryError("x and nu must be unit vectors")
    if abs(x @ nu) > tol:
        raise GeometryError("x and nu must be orthogonal")


def tangent_frame(x, nu, tol: float = UNIT_TOL) -> np.ndarray:
    """Orthonormal basis of span{x, nu}^perp as an (n, n+2) array.

    Gram-Schmidt over the standard basis; candidates whose residual norm falls
    below 1e-6 are skipped, so the result is deterministic.
    """
    x = np.asarray(x, dtype=float)
    nu = np.asarray(nu, dtype=float)
    _check_unit_pair(x, nu, tol)
    d = len(x)
    basis = [x, nu]
    out = []
    for e in np.eye(d):
        v = e.copy()
        for _ in range(2):  # re-orthogonalize once for stability
            for b in basis:
                v -= (v @ b) * b
        norm = np.linalg.norm(v)
        if norm < 1e-6:
            continue
        v /= norm
        basis.append(v)
        out.append(v)
        if len(out) == d - 2:
            break
    return np.array(out)


def curvature_invariants(shape, tol: float = UNIT_TOL) -> CurvatureSummary:
    A = np.asarray(shape, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or n < 2:
        raise GeometryError(f"shape must be a square matrix of size >= 2, got {A.shape}")
    if np.max(np.abs(A - A.T)) > tol:
        raise GeometryError("shape matrix is not symmetric")
    H = np.trace(A) / n
    S = float(np.sum(A * A))
    f3 = float(np.trace(A @ A @ A))
    rho = 1.0 + (n * n * H * H - S) / (n * (n - 1))
    return CurvatureSummary(n=n, H=float(H), S=S, f3=f3, rho=float(rho), R=float(n * (n - 1) * rho))


def ricci_quadratic_form(shape, v, H: float) -> float:
    """Ric(v, v) from the Gauss equation Ric = (n-1) Id + nH A - A^2."""
    A = np.asarray(shape, dtype=float)
    v = np.asarray(v, dtype=float)
    n = A.shape[0]
    Av = A @ v
    return float((n - 1) * (v @ v) + n * H * (Av @ v) - Av @ Av)


def traceless_ricci_form(shape, v) -> float:
    """Ric(v, v) - (R/n)|v|^2, the integrand of the Integral-Einstein condition."""
    c = curvature_invariants(shape)
    return ricci_quadratic_form(shape, v, c.H) - c.R / c.n * float(np.dot(v, v))


def level_set_normal(field: LevelSetField, x) -> tuple[np.ndarray, np.ndarray, float]:
    """Return (nu, ambient gradient, |w|) where w is the sphere-tangential gradient."""
    x = np.asarray(x, dtype=float)
    G = np.asarray(field.gradient(x), dtype=float)
    w = G - (G @ x) * x
    norm = np.linalg.norm(w)
    if norm < FOCAL_TOL:
        raise FocalPointError(f"sphere-tangential gradient has norm {norm:.3e}")
    return w / norm, G, norm


def shape_from_level_set(field: LevelSetField, x, tol: float = UNIT_TOL) -> SurfacePoint:
    x = np.asarray(x, dtype=float)
    if abs(np.linalg.norm(x) - 1.0) > tol:
        raise GeometryError("x must lie on the unit sphere")
    nu, G, wnorm = level_set_normal(field, x)
    frame = tangent_frame(x, nu)
    # spherical Hessian on vectors orthogonal to x
    hess = np.asarray(field.hessian(x), dtype=float) - (G @ x) * np.eye(len(x))
    shape = -(frame @ hess @ frame.T) / wnorm
    if np.max(np.abs(shape - shape.T)) > 1e-9:
        raise GeometryError("level-set shape operator is not symmetric")
    return SurfacePoint(x, nu, frame, 0.5 * (shape + shape.T))


def level_set_retract(field: LevelSetField, level: float, y, max_iter: int = 50) -> np.ndarray:
    """Project y onto {F = level} in the sphere by Newton steps along the normal geodesic.

    For isoparametric families the normal geodesics are shared by all level
    sets, so the limit is the metric projection of y/|y|.
    """
    x = np.asarray(y, dtype=float)
    x = x / np.linalg.norm(x)
    for _ in range(max_iter):
        nu, _, wnorm = level_set_normal(field, x)
        t = -(field.value(x) - level) / wnorm
        x = np.cos(t) * x + np.sin(t) * nu
        x /= np.linalg.norm(x)
        if abs(t) < 1e-15:
            return x
    raise RetractionError(f"level-set projection did not converge in {max_iter} iterations")


class RetractionError(GeometryError):
    pass
