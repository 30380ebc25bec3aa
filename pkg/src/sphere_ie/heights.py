"""Height functions phi_a = <x, a>, psi_a = <nu, a> and their derivatives.

`analytic_derivatives` evaluates the closed-form gradients, Hessian and
Laplacians; `fd_laplacian` is an independent finite-difference oracle built
on a metric-projection retraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import CurvatureSummary, SurfacePoint, curvature_invariants

DEFAULT_STEP = 1e-3


@dataclass(frozen=True)
class HeightData:
    phi: float
    psi: float
    aT: np.ndarray
    grad_phi: np.ndarray | None = None
    hess_phi: np.ndarray | None = None
    lap_phi: float | None = None
    grad_psi: np.ndarray | None = None
    lap_psi: float | None = None
    # the -n <grad H, a> term of the psi Laplacian; zero on CMC surfaces
    grad_H_term: float = 0.0
    constant_mean_curvature: bool = True


def height_pair(a, p: SurfacePoint) -> HeightData:
    a = np.asarray(a, dtype=float)
    if abs(np.linalg.norm(a) - 1.0) > 1e-10:
        raise ValueError("direction a must be a unit vector")
    phi = float(p.x @ a)
    psi = float(p.nu @ a)
    return HeightData(phi=phi, psi=psi, aT=p.frame @ a)


def analytic_derivatives(a, p: SurfacePoint, curv: CurvatureSummary | None = None,
                         constant_mean_curvature: bool = True) -> HeightData:
    if not constant_mean_curvature:
        raise NotImplementedError("psi Laplacian needs grad H; only CMC surfaces are supported")
    curv = curv or curvature_invariants(p.shape)
    h = height_pair(a, p)
    n, A = p.n, p.shape
    hess_phi = -h.phi * np.eye(n) + h.psi * A
    return HeightData(
        phi=h.phi,
        psi=h.psi,
        aT=h.aT,
        grad_phi=h.aT,
        hess_phi=hess_phi,
        lap_phi=-n * h.phi + n * curv.H * h.psi,
        grad_psi=-A @ h.aT,
        lap_psi=n * curv.H * h.phi - curv.S * h.psi,
    )


def fd_second_sums(field: Callable[[np.ndarray, np.ndarray], np.ndarray], p: SurfacePoint,
                   retract: Callable[[np.ndarray], np.ndarray],
                   normal: Callable[[np.ndarray], np.ndarray], step: float) -> np.ndarray:
    f0 = np.asarray(field(p.x, p.nu), dtype=float)
    total = np.zeros_like(f0)
    for e in p.frame:
        for s in (step, -step):
            y = retract(p.x + s * e)
            total = total + field(y, normal(y))
        total = total - 2 * f0
    return total / step ** 2


def fd_laplacian(field, p: SurfacePoint, retract, normal, step: float = DEFAULT_STEP,
                 return_error: bool = False):
    """Laplace-Beltrami of `field(x, nu)` at p from second differences along
    retracted tangent steps, Richardson-refined against step 2h.

    `field` may return an array (e.g. one entry per direction a).
    """
    if not 1e-4 <= step <= 1e-2:
        raise ValueError("step must lie in [1e-4, 1e-2]")
    coarse = fd_second_sums(field, p, retract, normal, 2 * step)
    fine = fd_second_sums(field, p, retract, normal, step)
    value = (4 * fine - coarse) / 3
    if return_error:
        return value, np.abs(value - fine)
    return value


def phi_field(directions: np.ndarray):
    directions = np.atleast_2d(directions)
    return lambda x, nu: directions @ x


def psi_field(directions: np.ndarray):
    directions = np.atleast_2d(directions)
    return lambda x, nu: directions @ nu
