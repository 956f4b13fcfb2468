"""Core elliptical distribution model.

An elliptical law is (mu, Sigma, g): location, dispersion and a density
generator.  Its characteristic function factors as
exp(i t'mu) * phi(t' Sigma t) for a scalar characteristic generator phi;
this module provides the closed forms of phi for the named families, the
uniform-sphere characteristic function, normalizing constants, radial
densities and matrix square roots, with the Hankel quadrature route as the
generic fallback.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DivergentIntegralError, DomainError, NoClosedFormError
from .generators import (
    DensityGenerator,
    Family,
    closed_moment_integral,
    moment_exists,
)
from .quadrature import QuadratureControl, moment_integral, phi_hankel
from .specfun import bessel_j, bessel_k, gamma_fn, hyp0f1, hyp1f1

__all__ = [
    "CFMethod",
    "ComplexCF",
    "EllipticalSpec",
    "uniform_sphere_cf",
    "normalizing_constant",
    "radial_density",
    "closed_form_generator",
    "char_generator",
    "cf",
    "matrix_roots",
]

_SYM_TOL = 1e-12
_EIG_TOL = 1e-12


class CFMethod(enum.Enum):
    CLOSED_FORM = "closed"
    HANKEL = "hankel"
    MONTE_CARLO = "mc"


@dataclass(frozen=True)
class ComplexCF:
    """A characteristic-function value with an optional error estimate."""

    re: float
    im: float
    abs_err: Optional[float]
    method: CFMethod

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    def __complex__(self) -> complex:
        return complex(self.re, self.im)


def _as_vector(x, n: int, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.shape != (n,):
        raise DomainError(f"{name}: expected shape ({n},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name}: contains non-finite entries")
    return arr


def _check_symmetric(sigma: np.ndarray, name: str = "sigma") -> np.ndarray:
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise DomainError(f"{name}: must be a square matrix, got shape {sigma.shape}")
    scale = max(1.0, float(np.abs(sigma).max()))
    asym = float(np.abs(sigma - sigma.T).max())
    if asym > _SYM_TOL * scale:
        raise DomainError(f"{name}: not symmetric (max asymmetry {asym:.3e})")
    return 0.5 * (sigma + sigma.T)


class EllipticalSpec:
    """An elliptical distribution (n, mu, Sigma, generator).

    Sigma may be positive semi-definite (rank-deficient specs still have a
    characteristic function); density and sampling queries require full
    rank.  Immutable after construction.
    """

    def __init__(self, n: int, mu, sigma, generator: DensityGenerator):
        if not (isinstance(n, (int, np.integer)) and n >= 1):
            raise DomainError("EllipticalSpec: n must be an integer >= 1")
        self.n = int(n)
        self.mu = _as_vector(mu, self.n, "mu")
        sigma = np.asarray(sigma, dtype=float)
        self.sigma = _check_symmetric(sigma)
        self.generator = generator

        eigvals, eigvecs = np.linalg.eigh(self.sigma)
        scale = max(1.0, float(eigvals.max(initial=0.0)))
        if eigvals.min(initial=0.0) < -_EIG_TOL * scale:
            raise DomainError(
                f"sigma: not positive semi-definite (min eigenvalue {eigvals.min():.3e})"
            )
        self._eigvals = np.clip(eigvals, 0.0, None)
        self._eigvecs = eigvecs
        self.rank = int(np.sum(self._eigvals > _EIG_TOL * scale))

        self._validate_generator_dimension()
        self.mu.setflags(write=False)
        self.sigma.setflags(write=False)

    def _validate_generator_dimension(self) -> None:
        gen, n = self.generator, self.n
        p = gen.params
        if gen.family is Family.GENERALIZED_T and int(p["n"]) != n:
            raise DomainError(
                f"generator: generalized-t profile built for n={int(p['n'])}, spec has n={n}"
            )
        if gen.family is Family.PEARSON_VII and not p["N"] > 0.5 * n:
            raise DomainError("generator: Pearson VII requires N > n/2")
        if gen.family is Family.KOTZ and not 2.0 * p["N"] + n > 2.0:
            raise DomainError("generator: Kotz requires 2N + n > 2")
        if gen.family is Family.BESSEL and not p["a"] > -0.5 * n:
            raise DomainError("generator: Bessel requires a > -n/2")
        exists = moment_exists(gen, float(n))
        if exists is False:
            raise DomainError("generator: moment integral diverges in this dimension")
        if exists is None:
            try:
                moment_integral(gen, n)
            except DivergentIntegralError as exc:
                raise DomainError(
                    "generator: moment integral diverges (checked numerically)"
                ) from exc

    def sym_root(self) -> np.ndarray:
        """Symmetric PSD square root of Sigma."""
        root = self._eigvecs @ np.diag(np.sqrt(self._eigvals)) @ self._eigvecs.T
        return 0.5 * (root + root.T)

    def chol_factor(self) -> np.ndarray:
        """A with A'A = Sigma; requires full rank (used by sampling)."""
        if self.rank < self.n:
            raise DomainError(
                f"sigma has rank {self.rank} < {self.n}: no Cholesky factor"
            )
        return np.linalg.cholesky(self.sigma).T

    def quadratic_form(self, t: np.ndarray) -> float:
        q = float(t @ self.sigma @ t)
        return max(q, 0.0)


def uniform_sphere_cf(n: int, s: float) -> float:
    """CF of the uniform law on the unit sphere surface, at s = ||t||^2.

    Gamma(n/2) (2/||t||)^((n-2)/2) J_((n-2)/2)(||t||); the 0F1 series form
    is used near the origin where the Bessel form has a removable 0/0.
    """
    if n < 1:
        raise DomainError("uniform_sphere_cf: n must be >= 1")
    if s < 0.0:
        raise DomainError("uniform_sphere_cf: s = ||t||^2 must be >= 0")
    x = math.sqrt(s)
    if x < 1e-3:
        return hyp0f1(0.5 * n, -0.25 * s)
    half_order = 0.5 * (n - 2.0)
    return gamma_fn(0.5 * n) * (2.0 / x) ** half_order * bessel_j(half_order, x)


def normalizing_constant(
    n: int, gen: DensityGenerator, ctl: QuadratureControl | None = None
) -> float:
    """c_n = Gamma(n/2) pi^(-n/2) / int_0^inf z^(n/2-1) g(z) dz.

    Closed forms for the named families; numeric for custom generators.
    """
    closed = closed_moment_integral(gen, float(n))
    if closed is not None:
        if not math.isfinite(closed):
            raise DomainError("normalizing_constant: moment integral diverges")
        m = closed
    else:
        try:
            m = moment_integral(gen, n, ctl or QuadratureControl()).value
        except DivergentIntegralError as exc:
            raise DomainError("normalizing_constant: moment integral diverges") from exc
    return gamma_fn(0.5 * n) / (math.pi ** (0.5 * n) * m)


def radial_density(spec: EllipticalSpec, v: float) -> float:
    """Density of the generating variate R at v >= 0 (full-rank specs only)."""
    if v < 0.0:
        raise DomainError("radial_density: v must be >= 0")
    if spec.rank < spec.n:
        raise DomainError("radial_density: undefined for rank-deficient sigma")
    gen = spec.generator
    if v > gen.support_radius:
        return 0.0
    n = spec.n
    c_n = normalizing_constant(n, gen)
    return c_n * 2.0 * math.pi ** (0.5 * n) / gamma_fn(0.5 * n) * v ** (n - 1) * gen.g(v * v)


def closed_form_generator(gen: DensityGenerator, n: int, q: float) -> float:
    """Closed-form characteristic generator phi(q), q = t' Sigma t.

    Raises NoClosedFormError for (family, parameter) combinations without
    one; callers fall back to the Hankel quadrature route.
    """
    if q < 0.0:
        raise DomainError("closed_form_generator: q must be >= 0")
    fam = gen.family
    p = gen.params
    if fam is Family.NORMAL:
        return math.exp(-0.5 * q)
    if fam is Family.UNIFORM_BALL:
        return hyp0f1(0.5 * n + 1.0, -0.25 * q)
    if fam is Family.GENERALIZED_T:
        if q == 0.0:
            return 1.0
        s, m = p["s"], p["m"]
        u = math.sqrt(q)
        half_m = 0.5 * m
        return (
            u**half_m
            * s ** (0.5 * half_m)
            / (2.0 ** (half_m - 1.0) * gamma_fn(half_m))
            * bessel_k(half_m, math.sqrt(s) * u)
        )
    if fam is Family.PEARSON_II:
        return hyp0f1(0.5 * n + p["m"] + 1.0, -0.25 * q)
    if fam is Family.PEARSON_VII:
        if q == 0.0:
            return 1.0
        big_n, s = p["N"], p["s"]
        u = math.sqrt(q)
        return (
            2.0 ** (0.5 * n - big_n + 1.0)
            / gamma_fn(big_n - 0.5 * n)
            * s ** (0.5 * big_n - 0.25 * n)
            * u ** (big_n - 0.5 * n)
            * bessel_k(0.5 * n - big_n, math.sqrt(s) * u)
        )
    if fam is Family.KOTZ:
        big_n, r, s = p["N"], p["r"], p["s"]
        if s == 1.0:
            return hyp1f1(0.5 * n + big_n - 1.0, 0.5 * n, -q / (4.0 * r))
        if s == 0.5 and big_n == 1.0:
            # the exponent match in the Laplace-type Bessel integral only
            # holds at N = 1; other N go through the quadrature route
            return (
                2.0 ** (n - 1.0)
                * gamma_fn(0.5 * n)
                * gamma_fn(0.5 * (n + 1.0))
                * r ** (n + 1.0)
                / (math.sqrt(math.pi) * gamma_fn(float(n)) * (r * r + q) ** (0.5 * (n + 1.0)))
            )
        raise NoClosedFormError(
            f"no closed form for Kotz with s={s}, N={big_n}; use the Hankel route"
        )
    if fam is Family.BESSEL:
        a, beta = p["a"], p["beta"]
        return (1.0 + beta * beta * q) ** (-(0.5 * n + a))
    raise NoClosedFormError(
        f"no closed form for family {fam.value}; use the Hankel route"
    )


def char_generator(
    gen: DensityGenerator,
    n: int,
    q: float,
    route: str = "auto",
    ctl: QuadratureControl | None = None,
) -> tuple[float, Optional[float], CFMethod]:
    """phi(q) by the requested route: (value, abs_err, method)."""
    if route not in ("auto", "closed", "hankel"):
        raise DomainError(f"char_generator: unknown route {route!r}")
    if route in ("auto", "closed"):
        try:
            return closed_form_generator(gen, n, q), None, CFMethod.CLOSED_FORM
        except NoClosedFormError:
            if route == "closed":
                raise
    res = phi_hankel(gen, n, math.sqrt(q), ctl or QuadratureControl())
    return res.value, res.err_est, CFMethod.HANKEL


def cf(
    spec: EllipticalSpec,
    t,
    route: str = "auto",
    ctl: QuadratureControl | None = None,
) -> ComplexCF:
    """Characteristic function exp(i t'mu) phi(t' Sigma t) at the point t."""
    t = _as_vector(t, spec.n, "t")
    if not t.any():
        return ComplexCF(1.0, 0.0, 0.0, CFMethod.CLOSED_FORM)
    q = spec.quadratic_form(t)
    phi, abs_err, method = char_generator(spec.generator, spec.n, q, route, ctl)
    phase = float(t @ spec.mu)
    return ComplexCF(math.cos(phase) * phi, math.sin(phase) * phi, abs_err, method)


def matrix_roots(sigma) -> tuple[np.ndarray, np.ndarray]:
    """(A, S) with A'A = Sigma and S the symmetric PSD root, S @ S = Sigma.

    A is the Cholesky factor for positive definite Sigma; rank-deficient
    PSD matrices fall back to an eigenfactor with the same A'A property.
    """
    sigma = _check_symmetric(np.asarray(sigma, dtype=float))
    eigvals, eigvecs = np.linalg.eigh(sigma)
    scale = max(1.0, float(eigvals.max(initial=0.0)))
    if eigvals.min(initial=0.0) < -_EIG_TOL * scale:
        raise DomainError(
            f"matrix_roots: not positive semi-definite (min eigenvalue {eigvals.min():.3e})"
        )
    clamped = np.clip(eigvals, 0.0, None)
    sym = eigvecs @ np.diag(np.sqrt(clamped)) @ eigvecs.T
    sym = 0.5 * (sym + sym.T)
    try:
        a = np.linalg.cholesky(sigma).T
    except np.linalg.LinAlgError:
        a = np.diag(np.sqrt(clamped)) @ eigvecs.T
    return a, sym
