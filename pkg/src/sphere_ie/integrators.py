"""Integral functionals over catalog surfaces and isoparametric profiles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .catalog import (
    IsoparametricProfile,
    MethodMismatchError,
    SampleBatch,
    Surface,
    sample_sphere,
    sphere_volume,
)

MC_SIGMAS = 4.0
MC_ATOL = 1e-9
DEFAULT_DEGREE = 24


@dataclass(frozen=True)
class Quadrature:
    degree: int = DEFAULT_DEGREE


@dataclass(frozen=True)
class MonteCarlo:
    n: int = 1_000_000
    seed: int = 0
    chunk: int = 1 << 13


@dataclass(frozen=True)
class MonteCarloEstimate:
    """value and stderr are floats or arrays of matching shape; stderr is 0 for quadrature."""

    value: float | np.ndarray
    stderr: float | np.ndarray
    n_samples: int
    seed: int | None

    def __getitem__(self, idx) -> "MonteCarloEstimate":
        return MonteCarloEstimate(
            np.asarray(self.value)[idx], np.asarray(self.stderr)[idx], self.n_samples, self.seed
        )

    def agrees_with(self, target, atol: float = MC_ATOL) -> np.ndarray | bool:
        return np.abs(np.asarray(self.value) - target) <= np.maximum(atol, MC_SIGMAS * np.asarray(self.stderr))


class _Welford:
    """Chunked mean/variance with Chan's merge; deterministic in chunk order."""

    def __init__(self):
        self.count = 0
        self.mean = None
        self.m2 = None

    def add(self, values: np.ndarray):
        nb = len(values)
        mb = values.mean(axis=0)
        m2b = ((values - mb) ** 2).sum(axis=0)
        if self.mean is None:
            self.count, self.mean, self.m2 = nb, mb, m2b
            return
        na = self.count
        delta = mb - self.mean
        tot = na + nb
        self.mean = self.mean + delta * nb / tot
        self.m2 = self.m2 + m2b + delta ** 2 * na * nb / tot
        self.count = tot


def batches(surface: Surface, method):
    if isinstance(method, Quadrature):
        return surface.quadrature_batches(method.degree)
    if isinstance(method, MonteCarlo):
        return surface.mc_batches(method.n, np.random.default_rng(method.seed), method.chunk)
    raise MethodMismatchError(f"unknown integration method {method!r}")


def default_method(surface: Surface, samples: int = 1_000_000, seed: int = 0,
                   degree: int = DEFAULT_DEGREE):
    if surface.supports_quadrature:
        return Quadrature(degree)
    return MonteCarlo(samples, seed)


def integrate(surface: Surface, integrand: Callable[[SampleBatch], np.ndarray], method) -> MonteCarloEstimate:
    """Integral of integrand over M; the integrand maps a SampleBatch to (N,) or (N, ...)."""
    if isinstance(method, Quadrature):
        total, count = None, 0
        for b in batches(surface, method):
            part = np.tensordot(b.weights, np.asarray(integrand(b), dtype=float), axes=(0, 0))
            total = part if total is None else total + part
            count += len(b)
        return MonteCarloEstimate(total, np.zeros_like(total), count, None)
    acc = _Welford()
    for b in batches(surface, method):
        acc.add(np.asarray(integrand(b), dtype=float))
    vol = surface.volume
    var = acc.m2 / (acc.count - 1)
    return MonteCarloEstimate(vol * acc.mean, vol * np.sqrt(var / acc.count), acc.count, method.seed)


def integrate_sphere_mc(dim: int, integrand: Callable[[np.ndarray], np.ndarray], n: int,
                        seed: int) -> MonteCarloEstimate:
    """Plain Monte Carlo over the whole unit sphere of R^dim."""
    x = sample_sphere(dim, n, np.random.default_rng(seed))
    f = np.asarray(integrand(x), dtype=float)
    vol = sphere_volume(dim - 1)
    return MonteCarloEstimate(vol * f.mean(0), vol * f.std(0, ddof=1) / math.sqrt(n), n, seed)


# --------------------------------------------------------------------------
# per-direction functionals


def _ambient_shape(surface: Surface, b: SampleBatch) -> np.ndarray:
    """(N, d, d) symmetric matrices of A extended by zero on span{x, nu}."""
    N, d = b.x.shape
    eye = np.broadcast_to(np.eye(surface.dim), (N, d, d))
    return b.shape_apply(eye)  # row i is A e_i


def _pointwise(surface: Surface, b: SampleBatch, directions: np.ndarray) -> dict[str, np.ndarray]:
    """All integrands used by the checks, each of shape (N, m).

    Since A x = A nu = 0 in ambient form, A a^T = A a, <A a^T, a^T> = <A a, a>
    and |a^T|^2 = |a|^2 - phi^2 - psi^2, so no (N, m, d) arrays are needed.
    """
    n = surface.n
    H, S, f3, rho = surface.H, surface.S, surface.f3, surface.rho
    R = n * (n - 1) * rho
    phi = b.x @ directions.T
    psi = b.nu @ directions.T
    Aa = _ambient_shape(surface, b) @ directions.T  # (N, d, m)
    AaT_aT = np.einsum("ndm,md->nm", Aa, directions)
    AaT2 = np.einsum("ndm,ndm->nm", Aa, Aa)
    aT2 = np.sum(directions * directions, axis=1) - phi ** 2 - psi ** 2
    ric = (n - 1) * aT2 + n * H * AaT_aT - AaT2
    route_a = ric - R / n * aT2
    lhs = 1 - (n + 1) * phi ** 2 - psi ** 2
    rhs = (rho - 1) * (1 - phi ** 2 - (n + 1) * psi ** 2)
    route_b = (n - 1) * (lhs - rhs)
    lap_phi = -n * phi + n * H * psi
    hess_phi2 = n * phi ** 2 - 2 * n * H * phi * psi + S * psi ** 2
    reilly_lhs = lap_phi ** 2 - hess_phi2
    return {
        "phi2": phi ** 2,
        "psi2": psi ** 2,
        "phipsi": phi * psi,
        "aT2": aT2,
        "AaT2": AaT2,
        "ie_lhs": lhs,
        "ie_rhs": rhs,
        "route_a": route_a,
        "route_b": route_b,
        "route_diff": route_a - route_b,
        "ie_left": lhs + n * H * phi * psi,
        "reilly": reilly_lhs - ric,
        "reilly_lhs": reilly_lhs,
        "ricci": ric,
        "cheng_yau": S * (phi ** 2 - psi ** 2) - f3 * phi * psi,
        # int S psi^2 - |A a^T|^2 = nH int phi psi on CMC surfaces
        "deltapsi2": S * psi ** 2 - AaT2 - n * H * phi * psi,
        "phi2_minus_psi2": phi ** 2 - psi ** 2,
        "mcsc_ie": route_a - S * ((n + 2) * phi ** 2 - 1),
    }


@dataclass
class DirectionalIntegrals:
    """Integrals over M of every named integrand, for each direction."""

    surface: Surface
    directions: np.ndarray
    method: object
    estimates: dict[str, MonteCarloEstimate]
    sup_abs_phi: np.ndarray
    inf_phi: np.ndarray

    def __getitem__(self, name: str) -> MonteCarloEstimate:
        return self.estimates[name]

    @property
    def volume(self) -> float:
        return self.surface.volume


def directional_integrals(surface: Surface, directions: np.ndarray, method) -> DirectionalIntegrals:
    """Integrate every check integrand for each direction in one sweep.

    If the first n+2 directions form an orthonormal frame, the frame sum of
    phi^2 is included as "frame_sum" (same value in every column).
    """
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    d = surface.dim
    head = directions[:d]
    has_frame = len(directions) >= d and np.allclose(head @ head.T, np.eye(d), atol=1e-12)
    sup_abs = np.zeros(len(directions))
    inf_phi = np.full(len(directions), np.inf)
    quad = isinstance(method, Quadrature)
    acc: dict[str, object] = {}
    count = 0
    for b in batches(surface, method):
        vals = _pointwise(surface, b, directions)
        if has_frame:
            vals["frame_sum"] = np.repeat(vals["phi2"][:, :d].sum(axis=1, keepdims=True), len(directions), axis=1)
        proj = b.x @ directions.T
        np.maximum(sup_abs, np.abs(proj).max(axis=0), out=sup_abs)
        np.minimum(inf_phi, proj.min(axis=0), out=inf_phi)
        count += len(b)
        for k, v in vals.items():
            if quad:
                acc[k] = acc.get(k, 0.0) + b.weights @ v
            else:
                acc.setdefault(k, _Welford()).add(v)
    if quad:
        estimates = {k: MonteCarloEstimate(v, np.zeros_like(v), count, None) for k, v in acc.items()}
    else:
        vol = surface.volume
        estimates = {
            k: MonteCarloEstimate(vol * w.mean, vol * np.sqrt(w.m2 / (w.count - 1) / w.count), w.count, method.seed)
            for k, w in acc.items()
        }
    return DirectionalIntegrals(surface, directions, method, estimates, sup_abs, inf_phi)


@dataclass(frozen=True)
class FunctionalReport:
    vol: float
    int_phi2: MonteCarloEstimate
    int_psi2: MonteCarloEstimate
    int_phipsi: MonteCarloEstimate
    ie_defect_curvature: MonteCarloEstimate
    ie_defect_height: MonteCarloEstimate


def functional_report(surface: Surface, a, method) -> FunctionalReport:
    d = directional_integrals(surface, np.atleast_2d(a), method)
    return FunctionalReport(d.volume, d["phi2"][0], d["psi2"][0], d["phipsi"][0], d["route_a"][0], d["route_b"][0])


def ie_defect(surface: Surface, a, method) -> tuple[MonteCarloEstimate, MonteCarloEstimate]:
    """(curvature route, height-function route) for the integrated traceless Ricci form."""
    r = functional_report(surface, a, method)
    return r.ie_defect_curvature, r.ie_defect_height


# --------------------------------------------------------------------------
# isoparametric profiles

_QUAD_KW = dict(epsabs=1e-14, epsrel=1e-13, limit=200)


def profile_h(profile: IsoparametricProfile, theta):
    """Volume density of the parallel map M_theta0 -> M_theta."""
    theta = np.asarray(theta, dtype=float)
    t = profile.theta0 - theta
    out = np.ones_like(theta)
    for lam, mult in profile.lambdas:
        out = out * (np.cos(t) - np.sin(t) * lam) ** mult
    return out if out.ndim else float(out)


def profile_abs_h_integral(profile: IsoparametricProfile) -> float:
    val, _ = quad(lambda t: abs(profile_h(profile, t)), 0.0, math.pi / profile.g, **_QUAD_KW)
    return val


def profile_alpha(profile: IsoparametricProfile) -> float:
    t0 = profile.theta0
    val, _ = quad(lambda t: math.sin(t0 - t) ** 2 * abs(profile_h(profile, t)), 0.0, math.pi / profile.g, **_QUAD_KW)
    return val


def profile_volume(profile: IsoparametricProfile) -> float:
    """Vol(M_theta0) from Vol(M) * int |h| = Vol(S^{n+1})."""
    return sphere_volume(profile.n + 1) / profile_abs_h_integral(profile)


class DegenerateProfileError(ArithmeticError):
    pass


@dataclass(frozen=True)
class ProfileL2:
    abs_h: float
    alpha: float
    volume: float
    coefficient: float
    int_phi2: float
    printed_coefficient: float
    printed_int_phi2: float
    degenerate: bool = False


def profile_l2(profile: IsoparametricProfile, allow_degenerate: bool = False) -> ProfileL2:
    """Solve the sweep identity for int_M phi_a^2.

    Integrating phi_a^2 over the parallel family and pulling back to the
    minimal level gives

        (int|h| - (n+2) alpha) int phi^2 + alpha Vol(M) = Vol(S^{n+1})/(n+2).

    The variant with leading coefficient (1 - (n+2) alpha) is also solved and
    returned for comparison.  For g=1 the coefficient vanishes identically;
    with `allow_degenerate` the result then carries NaN for int phi^2 instead
    of raising.
    """
    n = profile.n
    abs_h = profile_abs_h_integral(profile)
    alpha = profile_alpha(profile)
    vol = sphere_volume(n + 1) / abs_h
    rhs = sphere_volume(n + 1) / (n + 2) - alpha * vol
    coef = abs_h - (n + 2) * alpha
    printed = 1.0 - (n + 2) * alpha
    printed_val = rhs / printed if abs(printed) > 1e-10 else math.nan
    if abs(coef) < 1e-10:
        if not allow_degenerate:
            raise DegenerateProfileError(f"{profile.text}: coefficient int|h| - (n+2) alpha vanishes")
        return ProfileL2(abs_h, alpha, vol, coef, math.nan, printed, printed_val, True)
    return ProfileL2(abs_h, alpha, vol, coef, rhs / coef, printed, printed_val)


def l2_from_profile(profile: IsoparametricProfile) -> float:
    return profile_l2(profile).int_phi2
