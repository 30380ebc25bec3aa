"""Concrete hypersurfaces of the unit sphere with exact sampling.

Every surface exposes the same small interface used by the integrators and
checks: closed-form principal curvatures, volume, batched samples (quadrature
nodes or Monte Carlo draws), a metric-projection retraction and a normal field.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np
from scipy.special import gammaln, roots_gegenbauer

from .geometry import (
    GeometryError,
    LevelSetField,
    SurfacePoint,
    level_set_normal,
    level_set_retract,
    tangent_frame,
)

MAX_QUAD_DEGREE = 256
MAX_QUAD_NODES = 2_000_000
FOCAL_MARGIN = 1e-6


class SurfaceSpecError(ValueError):
    """Bad surface description; `position` is the 0-based column of the fault."""

    def __init__(self, message: str, text: str = "", position: int = 0):
        self.text = text
        self.position = position
        if text:
            message = f"{message}\n  {text}\n  {' ' * position}^"
        super().__init__(message)


class MethodMismatchError(ValueError):
    pass


def sphere_volume(m: int) -> float:
    """Riemannian volume of the unit sphere S^m."""
    return float(np.exp(np.log(2.0) + (m + 1) / 2 * np.log(np.pi) - gammaln((m + 1) / 2)))


def sample_sphere(dim: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform points on the unit sphere of R^dim."""
    g = rng.standard_normal((size, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


# --------------------------------------------------------------------------
# product quadrature on round spheres


def sphere_rule(m: int, degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor rule on the unit S^m with `degree` nodes per angle.

    The periodic angle uses the uniform rule; each polar angle theta of
    S^j = {(cos th, sin th * y)} uses Gauss nodes in t = cos th for the weight
    (1 - t^2)^((j-2)/2) (Gauss-Legendre for j = 2, Gauss-Gegenbauer above),
    which makes the rule exact for polynomials of degree < degree in the
    ambient coordinates (the periodic rule is the limiting factor).

    Returns nodes (N, m+1) and weights summing to Vol(S^m).
    """
    if m < 1:
        raise ValueError("sphere dimension must be >= 1")
    phi = 2 * np.pi * np.arange(degree) / degree
    w_phi = np.full(degree, 2 * np.pi / degree)
    nodes = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    weights = w_phi
    for j in range(2, m + 1):
        if j == 2:
            t, w = np.polynomial.legendre.leggauss(degree)
        else:
            t, w = roots_gegenbauer(degree, (j - 1) / 2)
        s = np.sqrt(1.0 - t * t)[:, None, None]
        new = np.concatenate([np.broadcast_to(t[:, None, None], (degree, len(nodes), 1)), s * nodes[None]], axis=2)
        nodes = new.reshape(-1, j + 1)
        weights = (w[:, None] * weights[None, :]).ravel()
    return nodes, weights


def _check_degree(degree: int, total: int) -> None:
    if not 2 <= degree <= MAX_QUAD_DEGREE:
        raise ValueError(f"quadrature degree {degree} outside [2, {MAX_QUAD_DEGREE}]")
    if total > MAX_QUAD_NODES:
        raise ValueError(
            f"quadrature would use {total} nodes (limit {MAX_QUAD_NODES}); use Monte Carlo instead"
        )


# --------------------------------------------------------------------------
# batches


@dataclass(frozen=True)
class SampleBatch:
    """A chunk of surface points with integration weights.

    For quadrature `weights` are the node weights; for Monte Carlo they are all
    Vol(M)/n_total.  `shape_apply` maps tangent vectors of shape (N, ..., d)
    to A applied pointwise.
    """

    x: np.ndarray
    nu: np.ndarray
    weights: np.ndarray
    shape_apply: Callable[[np.ndarray], np.ndarray]

    def __len__(self) -> int:
        return len(self.x)


def _bcast(arr: np.ndarray, like: np.ndarray) -> np.ndarray:
    """Insert singleton axes so that (N, d) broadcasts against (N, ..., d)."""
    return arr.reshape(arr.shape[:1] + (1,) * (like.ndim - 2) + arr.shape[1:])


# --------------------------------------------------------------------------
# surfaces


class Surface:
    """Base class; subclasses fill in the geometry."""

    text: str
    n: int
    #: principal curvatures as (value, multiplicity) in the surface's orientation
    principal: tuple[tuple[float, int], ...]
    supports_quadrature = True

    @property
    def dim(self) -> int:
        return self.n + 2

    @property
    def H(self) -> float:
        return sum(v * m for v, m in self.principal) / self.n

    @property
    def S(self) -> float:
        return sum(v * v * m for v, m in self.principal)

    @property
    def f3(self) -> float:
        return sum(v ** 3 * m for v, m in self.principal)

    @property
    def rho(self) -> float:
        n = self.n
        return 1.0 + (n * n * self.H ** 2 - self.S) / (n * (n - 1))

    @property
    def is_minimal(self) -> bool:
        return abs(self.H) < 1e-12

    @property
    def is_totally_geodesic(self) -> bool:
        return self.S < 1e-12

    @property
    def volume(self) -> float:
        raise NotImplementedError

    def normal_at(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def retract(self, y: np.ndarray) -> np.ndarray:
        """Metric projection of an ambient point onto M."""
        raise NotImplementedError

    def shape_apply(self, x: np.ndarray, nu: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def point_at(self, x) -> SurfacePoint:
        x = np.asarray(x, dtype=float)
        nu = self.normal_at(x)
        frame = tangent_frame(x, nu)
        A = self.shape_apply(x[None], nu[None], frame[None])[0]  # rows A e_i
        shape = frame @ A.T
        return SurfacePoint(x, nu, frame, 0.5 * (shape + shape.T))

    def quadrature_batches(self, degree: int, chunk: int = 1 << 13) -> Iterator[SampleBatch]:
        raise MethodMismatchError(f"{self.text}: no product quadrature available")

    def sample_positions(self, size: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def mc_batches(self, size: int, rng: np.random.Generator, chunk: int = 1 << 13) -> Iterator[SampleBatch]:
        w = self.volume / size
        done = 0
        while done < size:
            m = min(chunk, size - done)
            yield self._batch(self.sample_positions(m, rng), np.full(m, w))
            done += m

    def sample_points(self, count: int, rng: np.random.Generator) -> list[SurfacePoint]:
        return [self.point_at(x) for x in self.sample_positions(count, rng)]

    def _batch(self, x: np.ndarray, weights: np.ndarray, nu: np.ndarray | None = None) -> SampleBatch:
        if nu is None:
            nu = self.normal_batch(x)
        return SampleBatch(x, nu, weights, lambda v, x=x, nu=nu: self.shape_apply(x, nu, v))

    def normal_batch(self, x: np.ndarray) -> np.ndarray:
        return np.array([self.normal_at(p) for p in x])

    def level_set(self) -> tuple[LevelSetField, float]:
        """An ambient function F and level c with M = {F = c} and nu along grad F."""
        raise NotImplementedError

    def factor_weights(self, a: np.ndarray) -> tuple[float, float] | None:
        """(|a_1|^2, |a_2|^2) for product surfaces, None otherwise."""
        return None

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.text}>"


class Equator(Surface):
    """The totally geodesic S^n = {x_1 = 0} with normal e_1."""

    def __init__(self, n: int):
        if n < 2:
            raise ValueError("equator needs n >= 2")
        self.n = n
        self.text = f"equator:n={n}"
        self.principal = ((0.0, n),)

    @property
    def volume(self) -> float:
        return sphere_volume(self.n)

    def normal_at(self, x):
        e = np.zeros(self.dim)
        e[0] = 1.0
        return e

    def normal_batch(self, x):
        nu = np.zeros_like(x)
        nu[:, 0] = 1.0
        return nu

    def retract(self, y):
        y = np.array(y, dtype=float)
        y[0] = 0.0
        return y / np.linalg.norm(y)

    def shape_apply(self, x, nu, v):
        return np.zeros_like(v)

    def _embed(self, y: np.ndarray) -> np.ndarray:
        return np.concatenate([np.zeros((len(y), 1)), y], axis=1)

    def sample_positions(self, size, rng):
        return self._embed(sample_sphere(self.n + 1, size, rng))

    def quadrature_batches(self, degree, chunk=1 << 13):
        _check_degree(degree, degree ** self.n)
        nodes, weights = sphere_rule(self.n, degree)
        for i in range(0, len(nodes), chunk):
            yield self._batch(self._embed(nodes[i:i + chunk]), weights[i:i + chunk])

    def level_set(self):
        d = self.dim
        e = np.eye(d)[0]
        return LevelSetField(lambda x: float(x[0]), lambda x: e.copy(), lambda x: np.zeros((d, d))), 0.0


class CliffordTorus(Surface):
    """S^k(r1) x S^{n-k}(r2) with x = (r1 u, r2 v) and nu = (-r2 u, r1 v).

    With this normal the S^k factor has principal curvature r2/r1 > 0 and the
    S^{n-k} factor has -r1/r2.
    """

    def __init__(self, k: int, n: int, r1: float, text: str | None = None):
        if n < 2 or not 1 <= k <= n - 1:
            raise ValueError(f"need 1 <= k <= n-1, got k={k}, n={n}")
        if not 0.0 < r1 < 1.0:
            raise ValueError(f"radius must lie in (0, 1), got {r1}")
        self.k, self.n, self.r1 = k, n, float(r1)
        self.r2 = math.sqrt(1.0 - self.r1 ** 2)
        self.kappa1 = self.r2 / self.r1
        self.kappa2 = -self.r1 / self.r2
        self.principal = ((self.kappa1, k), (self.kappa2, n - k))
        self.text = text or f"clifford:k={k},n={n},r={self.r1!r}"

    @classmethod
    def minimal(cls, k: int, n: int) -> "CliffordTorus":
        return cls(k, n, math.sqrt(k / n), text=f"clifford:k={k},n={n},r=minimal")

    @classmethod
    def einstein(cls, k: int, n: int) -> "CliffordTorus":
        if not 2 <= k <= n - 2:
            raise ValueError("Einstein tori need 2 <= k <= n-2")
        return cls(k, n, math.sqrt((k - 1) / (n - 2)), text=f"clifford:k={k},n={n},r=einstein")

    @property
    def is_einstein(self) -> bool:
        return 2 <= self.k <= self.n - 2 and abs(self.r1 ** 2 - (self.k - 1) / (self.n - 2)) < 1e-12

    @property
    def volume(self) -> float:
        k, n = self.k, self.n
        return self.r1 ** k * self.r2 ** (n - k) * sphere_volume(k) * sphere_volume(n - k)

    def _split(self, v):
        return v[..., : self.k + 1], v[..., self.k + 1:]

    def point(self, u, v) -> SurfacePoint:
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if abs(np.linalg.norm(u) - 1) > 1e-12 or abs(np.linalg.norm(v) - 1) > 1e-12:
            raise GeometryError("torus factors must be unit vectors")
        return self.point_at(np.concatenate([self.r1 * u, self.r2 * v]))

    def normal_at(self, x):
        a, b = self._split(np.asarray(x, dtype=float))
        u = a / np.linalg.norm(a)
        v = b / np.linalg.norm(b)
        return np.concatenate([-self.r2 * u, self.r1 * v])

    def normal_batch(self, x):
        a, b = self._split(x)
        u = a / np.linalg.norm(a, axis=-1, keepdims=True)
        v = b / np.linalg.norm(b, axis=-1, keepdims=True)
        return np.concatenate([-self.r2 * u, self.r1 * v], axis=-1)

    def retract(self, y):
        a, b = self._split(np.asarray(y, dtype=float))
        return np.concatenate([self.r1 * a / np.linalg.norm(a), self.r2 * b / np.linalg.norm(b)])

    def shape_apply(self, x, nu, v):
        a, b = self._split(x)
        u = _bcast(a / np.linalg.norm(a, axis=-1, keepdims=True), v)
        w = _bcast(b / np.linalg.norm(b, axis=-1, keepdims=True), v)
        va, vb = self._split(v)
        ta = va - np.sum(va * u, axis=-1, keepdims=True) * u
        tb = vb - np.sum(vb * w, axis=-1, keepdims=True) * w
        return np.concatenate([self.kappa1 * ta, self.kappa2 * tb], axis=-1)

    def sample_positions(self, size, rng):
        u = sample_sphere(self.k + 1, size, rng)
        v = sample_sphere(self.n - self.k + 1, size, rng)
        return np.concatenate([self.r1 * u, self.r2 * v], axis=1)

    def quadrature_batches(self, degree, chunk=1 << 13):
        _check_degree(degree, degree ** self.n)
        nu_, wu = sphere_rule(self.k, degree)
        nv, wv = sphere_rule(self.n - self.k, degree)
        scale = self.r1 ** self.k * self.r2 ** (self.n - self.k)
        rows = max(1, chunk // len(nv))
        for i in range(0, len(nu_), rows):
            u = nu_[i:i + rows]
            x = np.concatenate(
                [
                    np.repeat(self.r1 * u, len(nv), axis=0),
                    np.tile(self.r2 * nv, (len(u), 1)),
                ],
                axis=1,
            )
            w = scale * np.outer(wu[i:i + rows], wv).ravel()
            yield self._batch(x, w)

    def level_set(self):
        k1, d = self.k + 1, self.dim
        mask = np.r_[np.zeros(k1), np.ones(d - k1)]
        return (
            LevelSetField(
                lambda x: float(x[k1:] @ x[k1:]) - self.r2 ** 2,
                lambda x: 2 * mask * x,
                lambda x: 2 * np.diag(mask),
            ),
            0.0,
        )

    def factor_weights(self, a):
        a1, a2 = self._split(np.asarray(a, dtype=float))
        return float(a1 @ a1), float(a2 @ a2)


# --------------------------------------------------------------------------
# Cartan's cubic: traceless symmetric 3x3 matrices with <X, Y> = Tr(XY)

_s2, _s6 = math.sqrt(2.0), math.sqrt(6.0)
CARTAN_BASIS = np.array(
    [
        np.diag([1.0, -1.0, 0.0]) / _s2,
        np.diag([1.0, 1.0, -2.0]) / _s6,
        np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]]) / _s2,
        np.array([[0, 0, 1], [0, 0, 0], [1, 0, 0]]) / _s2,
        np.array([[0, 0, 0], [0, 0, 1], [0, 1, 0]]) / _s2,
    ],
    dtype=float,
)
CARTAN_SCALE = _s6  # max of Tr(X^3) on the unit sphere is 1/sqrt(6)


_BASIS_FLAT = CARTAN_BASIS.reshape(5, 9)
# _HESS_KERNEL[k, l] . vec(X) = Tr(E_k E_l X)
_HESS_KERNEL = np.einsum("kab,lbc->klca", CARTAN_BASIS, CARTAN_BASIS).reshape(25, 9)


def vec_to_mat(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    return (y @ _BASIS_FLAT).reshape(y.shape[:-1] + (3, 3))


def mat_to_vec(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return X.reshape(X.shape[:-2] + (9,)) @ _BASIS_FLAT.T


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return vec_to_mat(X) if X.shape[-1] == 5 and X.shape[-2:] != (3, 3) else X


def cartan_munzner_eval(X) -> float | np.ndarray:
    """F(X) = sqrt(6) Tr(X^3); accepts 5-vectors or 3x3 matrices (batched)."""
    M = _as_matrix(X)
    return CARTAN_SCALE * np.einsum("...ij,...jk,...ki->...", M, M, M)


def cartan_field() -> LevelSetField:
    def value(y):
        return float(cartan_munzner_eval(y))

    def gradient(y):
        X = vec_to_mat(y)
        return 3 * CARTAN_SCALE * mat_to_vec(X @ X)

    def hessian(y):
        X = vec_to_mat(y)
        B = CARTAN_BASIS
        # d_k d_l Tr(X^3) = 3 Tr(E_k E_l X + E_l E_k X)
        T = np.einsum("kab,lbc,ca->kl", B, B, X)
        return 3 * CARTAN_SCALE * (T + T.T)

    return LevelSetField(value, gradient, hessian)


def haar_rotations(size: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform SO(3) matrices from normalized Gaussian quaternions."""
    q = rng.standard_normal((size, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    w, x, y, z = q.T
    return np.stack(
        [
            np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)], -1),
            np.stack([2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)], -1),
            np.stack([2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)], -1),
        ],
        axis=1,
    )


def cartan_eigenvalues(theta: float) -> np.ndarray:
    """Spectrum of the orbit F = cos(3 theta)."""
    return 2 / _s6 * np.cos(theta + 2 * np.pi * np.arange(3) / 3)


class CartanCubic(Surface):
    """Level set F = cos(3 theta) of Cartan's isoparametric cubic in S^4.

    The default theta = pi/6 is the minimal member.  The normal points along the
    tangential gradient of F, i.e. towards the focal set F = 1.
    """

    supports_quadrature = False

    def __init__(self, theta: float = math.pi / 6, text: str | None = None):
        if not FOCAL_MARGIN < theta < math.pi / 3 - FOCAL_MARGIN:
            raise GeometryError(f"theta={theta} is focal or outside (0, pi/3)")
        self.theta = float(theta)
        self.n = 3
        self.level = math.cos(3 * theta)
        self.principal = tuple((1 / math.tan(theta + j * math.pi / 3), 1) for j in range(3))
        self.text = text or ("cartan" if abs(theta - math.pi / 6) < 1e-15 else f"cartan:theta={theta!r}")
        self._field = cartan_field()

    @property
    def volume(self) -> float:
        # Orbit SO(3)/(Z2 x Z2) with metric |[W, X]|^2; SO(3) has volume 8 pi^2
        mu = cartan_eigenvalues(self.theta)
        gaps = abs(mu[0] - mu[1]) * abs(mu[0] - mu[2]) * abs(mu[1] - mu[2])
        return 8 * np.pi ** 2 * 2 * _s2 * gaps / 4

    def level_set(self):
        return self._field, self.level

    def normal_at(self, x):
        return level_set_normal(self._field, x)[0]

    def normal_batch(self, y):
        X = vec_to_mat(y)
        G = 3 * CARTAN_SCALE * mat_to_vec(X @ X)
        w = G - np.sum(G * y, axis=-1, keepdims=True) * y
        return w / np.linalg.norm(w, axis=-1, keepdims=True)

    def retract(self, y):
        return level_set_retract(self._field, self.level, y)

    def ambient_shape_batch(self, y, nu):
        """A as (N, 5, 5) symmetric operators: -P (Hess F - <grad F, x> I) P / |w|."""
        X = vec_to_mat(y)
        G = 3 * CARTAN_SCALE * mat_to_vec(X @ X)
        Gx = np.sum(G * y, axis=-1)
        wnorm = np.linalg.norm(G - Gx[:, None] * y, axis=-1)
        T = (X.reshape(-1, 9) @ _HESS_KERNEL.T).reshape(-1, 5, 5)
        hess = 3 * CARTAN_SCALE * (T + T.transpose(0, 2, 1)) - Gx[:, None, None] * np.eye(5)
        P = np.eye(5) - y[:, :, None] * y[:, None, :] - nu[:, :, None] * nu[:, None, :]
        return -(P @ hess @ P) / wnorm[:, None, None]

    def shape_apply(self, y, nu, v):
        A = self.ambient_shape_batch(y, nu)
        flat = v.reshape(len(v), -1, 5)
        return (flat @ A).reshape(v.shape)  # A is symmetric

    def sample_positions(self, size, rng):
        Q = haar_rotations(size, rng)
        D = cartan_eigenvalues(self.theta)
        return mat_to_vec(np.einsum("nij,j,nkj->nik", Q, D, Q))


def cartan_sample(theta: float, seed: int) -> SurfacePoint:
    """One Haar-distributed point of the Cartan orbit at level theta."""
    surface = CartanCubic(theta)
    return surface.sample_points(1, np.random.default_rng(seed))[0]


def parallel_translate(p: SurfacePoint, delta: float) -> np.ndarray:
    return np.cos(delta) * p.x + np.sin(delta) * p.nu


# --------------------------------------------------------------------------
# rigid motions and orientation flips


class Transformed(Surface):
    """Image of a surface under x -> Q x, optionally with the normal reversed."""

    def __init__(self, base: Surface, rotation: np.ndarray | None = None, flip: bool = False):
        self.base = base
        self.n = base.n
        self.Q = np.eye(base.dim) if rotation is None else np.asarray(rotation, dtype=float)
        self.sign = -1.0 if flip else 1.0
        self.principal = tuple((self.sign * v, m) for v, m in base.principal)
        self.supports_quadrature = base.supports_quadrature
        tags = (["rot"] if rotation is not None else []) + (["flip"] if flip else [])
        self.text = base.text + "".join(f"@{t}" for t in tags)

    @property
    def volume(self):
        return self.base.volume

    def normal_at(self, x):
        return self.sign * self.Q @ self.base.normal_at(self.Q.T @ x)

    def normal_batch(self, x):
        return self.sign * self.base.normal_batch(x @ self.Q) @ self.Q.T

    def retract(self, y):
        return self.Q @ self.base.retract(self.Q.T @ np.asarray(y, dtype=float))

    def shape_apply(self, x, nu, v):
        Av = self.base.shape_apply(x @ self.Q, self.sign * (nu @ self.Q), v @ self.Q)
        return self.sign * Av @ self.Q.T

    def sample_positions(self, size, rng):
        return self.base.sample_positions(size, rng) @ self.Q.T

    def quadrature_batches(self, degree, chunk=1 << 13):
        for b in self.base.quadrature_batches(degree, chunk):
            yield self._batch(b.x @ self.Q.T, b.weights, self.sign * b.nu @ self.Q.T)

    def level_set(self):
        F, c = self.base.level_set()
        Q, s = self.Q, self.sign
        field = LevelSetField(
            lambda x: s * F.value(Q.T @ x),
            lambda x: s * Q @ F.gradient(Q.T @ x),
            lambda x: s * Q @ F.hessian(Q.T @ x) @ Q.T,
        )
        return field, s * c

    def factor_weights(self, a):
        return self.base.factor_weights(self.Q.T @ np.asarray(a, dtype=float))

    def __getattr__(self, name):
        # expose base attributes such as k, r1, theta
        if name == "base":
            raise AttributeError(name)
        return getattr(self.base, name)


def random_rotation(dim: int, rng: np.random.Generator) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((dim, dim)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


# --------------------------------------------------------------------------
# isoparametric profiles (g, m+, m-)


@dataclass(frozen=True)
class IsoparametricProfile:
    g: int
    m_plus: int
    m_minus: int
    theta0: float
    lambdas: tuple[tuple[float, int], ...] = field(default=())

    @property
    def n(self) -> int:
        return sum(m for _, m in self.lambdas)

    @property
    def text(self) -> str:
        return f"profile:g={self.g},m={self.m_plus},{self.m_minus}"

    @property
    def mean_curvature_sum(self) -> float:
        return sum(v * m for v, m in self.lambdas)

    @property
    def S(self) -> float:
        return sum(v * v * m for v, m in self.lambdas)


def profile_lambdas(g: int, m_plus: int, m_minus: int) -> IsoparametricProfile:
    if g not in (1, 2, 3, 4, 6):
        raise ValueError(f"g must be one of 1, 2, 3, 4, 6; got {g}")
    if m_plus < 1 or m_minus < 1:
        raise ValueError("multiplicities must be positive")
    if g % 2 == 1 and m_plus != m_minus:
        raise ValueError("odd g forces equal multiplicities")
    c0 = (m_minus - m_plus) / (m_minus + m_plus)
    theta0 = math.acos(c0) / g
    lambdas = tuple(
        (1.0 / math.tan(theta0 + j * math.pi / g), m_plus if j % 2 == 0 else m_minus) for j in range(g)
    )
    # cot(pi/2) is 6e-17 in floating point; snap exact zeros
    lambdas = tuple((0.0 if abs(v) < 1e-15 else v, m) for v, m in lambdas)
    prof = IsoparametricProfile(g, m_plus, m_minus, theta0, lambdas)
    if abs(prof.mean_curvature_sum) > 1e-10 * max(1.0, prof.S):
        raise GeometryError(f"profile {prof.text} is not minimal: sum m_j lambda_j = {prof.mean_curvature_sum}")
    return prof


# --------------------------------------------------------------------------
# surface description grammar
#
#   equator:n=<int>
#   clifford:k=<int>,n=<int>,r=<minimal|einstein|float>
#   cartan
#   profile:g=<int>,m=<int>,<int>

_INT = re.compile(r"[0-9]+")
_FLOAT = re.compile(r"[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?")


class _Scanner:
    def __init__(self, text: str):
        self.text, self.pos = text, 0

    def error(self, msg: str, pos: int | None = None):
        raise SurfaceSpecError(msg, self.text, self.pos if pos is None else pos)

    def expect(self, lit: str):
        if not self.text.startswith(lit, self.pos):
            self.error(f"expected {lit!r}")
        self.pos += len(lit)

    def match(self, pattern: re.Pattern, what: str) -> tuple[str, int]:
        m = pattern.match(self.text, self.pos)
        if not m:
            self.error(f"expected {what}")
        start, self.pos = self.pos, m.end()
        return m.group(0), start

    def integer(self) -> tuple[int, int]:
        s, start = self.match(_INT, "an integer")
        return int(s), start

    def end(self):
        if self.pos != len(self.text):
            self.error("unexpected trailing input")


def parse_surface(text: str):
    """Parse a surface description into a Surface or IsoparametricProfile."""
    sc = _Scanner(text)
    kind = re.match(r"[a-z]*", text).group(0)
    sc.pos = len(kind)
    if kind == "cartan":
        sc.end()
        return CartanCubic()
    if kind not in ("equator", "clifford", "profile"):
        sc.error(f"unknown surface kind {kind!r}", 0)
    sc.expect(":")
    if kind == "equator":
        sc.expect("n=")
        n, pos = sc.integer()
        sc.end()
        if n < 2:
            sc.error("n must be >= 2", pos)
        return Equator(n)
    if kind == "profile":
        sc.expect("g=")
        g, gpos = sc.integer()
        sc.expect(",m=")
        mp, ppos = sc.integer()
        sc.expect(",")
        mm, mpos = sc.integer()
        sc.end()
        if g not in (1, 2, 3, 4, 6):
            sc.error("g must be one of 1, 2, 3, 4, 6", gpos)
        if mp < 1:
            sc.error("multiplicity must be >= 1", ppos)
        if mm < 1:
            sc.error("multiplicity must be >= 1", mpos)
        if g % 2 == 1 and mp != mm:
            sc.error("odd g requires equal multiplicities", ppos)
        return profile_lambdas(g, mp, mm)
    sc.expect("k=")
    k, kpos = sc.integer()
    sc.expect(",n=")
    n, npos = sc.integer()
    if n < 2:
        sc.error("n must be >= 2", npos)
    if not 1 <= k <= n - 1:
        sc.error(f"k={k} out of range 1..{n - 1}", kpos)
    sc.expect(",r=")
    rpos = sc.pos
    if text.startswith("minimal", rpos):
        sc.pos += len("minimal")
        sc.end()
        return CliffordTorus.minimal(k, n)
    if text.startswith("einstein", rpos):
        sc.pos += len("einstein")
        sc.end()
        if not 2 <= k <= n - 2:
            sc.error("einstein radius needs 2 <= k <= n-2", kpos)
        return CliffordTorus.einstein(k, n)
    s, _ = sc.match(_FLOAT, "'minimal', 'einstein' or a number")
    sc.end()
    r = float(s)
    if not 0.0 < r < 1.0:
        sc.error("radius must lie in (0, 1)", rpos)
    return CliffordTorus(k, n, r, text=text)


def expected_ie(surface) -> bool | None:
    """Whether the surface is Integral-Einstein according to closed-form evaluation.

    Equators are Einstein; minimal isoparametric surfaces with g >= 3 are IE.
    Tori are decided by evaluating both sides of the hypersurface criterion for
    the two factor directions, where the defect is affine in |a_1|^2.
    """
    base = surface.base if isinstance(surface, Transformed) else surface
    if isinstance(base, Equator):
        return True
    if isinstance(base, CartanCubic):
        return abs(base.theta - math.pi / 6) < 1e-12 or None
    if isinstance(base, CliffordTorus):
        return abs(torus_ie_defect(base, 1.0)) < 1e-12 and abs(torus_ie_defect(base, 0.0)) < 1e-12
    return None


def torus_ie_sides(t: CliffordTorus, a1_sq: float) -> tuple[float, float]:
    """Both sides of the hypersurface IE criterion divided by Vol, closed form.

    Uses int phi^2 / V = r1^2 |a1|^2/(k+1) + r2^2 |a2|^2/(n-k+1) and the
    analogous formula for psi with r1, r2 swapped.
    """
    k, n, r1, r2 = t.k, t.n, t.r1, t.r2
    a2_sq = 1.0 - a1_sq
    phi2 = r1 ** 2 * a1_sq / (k + 1) + r2 ** 2 * a2_sq / (n - k + 1)
    psi2 = r2 ** 2 * a1_sq / (k + 1) + r1 ** 2 * a2_sq / (n - k + 1)
    lhs = 1 - (n + 1) * phi2 - psi2
    rhs = (t.rho - 1) * (1 - phi2 - (n + 1) * psi2)
    return lhs, rhs


def torus_ie_defect(t: CliffordTorus, a1_sq: float) -> float:
    lhs, rhs = torus_ie_sides(t, a1_sq)
    return lhs - rhs


def is_minimal_clifford_one(surface) -> bool:
    """The minimal torus S^1(sqrt(1/n)) x S^{n-1}(sqrt((n-1)/n)) in either factor order."""
    base = surface.base if isinstance(surface, Transformed) else surface
    if not isinstance(base, CliffordTorus):
        return False
    return base.k in (1, base.n - 1) and base.is_minimal
