"""Real-order special functions for the characteristic-function engine.

Bessel J of the first kind, the MacDonald function K, the hypergeometric
series 0F1 and 1F1 (Kummer), gamma/log-gamma, Bessel-J zeros, the Dawson
function and the standard normal CDF at a purely imaginary argument.

Every truncated series honours a :class:`SeriesControl` policy and reports
the number of terms consumed.  Non-convergence raises
:class:`~ellipcf.errors.ConvergenceError`; a silent NaN is never returned.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError, DomainError

__all__ = [
    "SeriesControl",
    "SpecialValue",
    "gamma_fn",
    "log_gamma_fn",
    "bessel_j",
    "bessel_j_zero",
    "bessel_k",
    "hyp0f1",
    "hyp1f1",
    "dawson",
    "erfi",
    "norm_cdf_imag",
    "norm_cdf_imag_scaled",
]


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for power series."""

    rel_tol: float = 1e-14
    max_terms: int = 500

    def __post_init__(self) -> None:
        if not self.rel_tol > 0.0:
            raise DomainError("SeriesControl.rel_tol must be positive")
        if self.max_terms < 1:
            raise DomainError("SeriesControl.max_terms must be >= 1")


@dataclass(frozen=True)
class SpecialValue:
    """A series result with its convergence diagnostics.

    ``converged = False`` means the value must not be used.
    """

    value: float
    terms_used: int
    converged: bool


_DEFAULT_CTL = SeriesControl()

# Series / asymptotic switchover for J_nu.  Keeps the float64 series below
# ~5e-13 cancellation error while the Hankel expansion is already usable.
_J_SWITCH_BASE = 12.0

# Below this the 0F1 series is evaluated directly; beyond, cancellation in
# float64 forces the Bessel-J route (argument x = 2*sqrt(-z) >= 10).
_HYP0F1_NEG_SWITCH = -25.0


def gamma_fn(x: float) -> float:
    """Gamma function; poles (nonpositive integers) raise DomainError."""
    if x <= 0.0 and x == math.floor(x):
        raise DomainError(f"gamma_fn: pole at nonpositive integer x={x}")
    return math.gamma(x)


def log_gamma_fn(x: float) -> float:
    """log |Gamma(x)|; poles raise DomainError."""
    if x <= 0.0 and x == math.floor(x):
        raise DomainError(f"log_gamma_fn: pole at nonpositive integer x={x}")
    return math.lgamma(x)


# ---------------------------------------------------------------------------
# Bessel J
# ---------------------------------------------------------------------------


def _bessel_j_series(nu: float, x: float, ctl: SeriesControl) -> SpecialValue:
    # J_nu(x) = (x/2)^nu / Gamma(nu+1) * sum_k (-x^2/4)^k / (k! (nu+1)_k)
    half = 0.5 * x
    if nu > 30.0:
        lead = math.exp(nu * math.log(half) - log_gamma_fn(nu + 1.0))
    else:
        lead = half**nu / gamma_fn(nu + 1.0)
    msq = -(half * half)
    term = 1.0
    total = 1.0
    small_streak = 0
    kmin = 0.5 * x  # term magnitudes peak near k ~ x/2
    for k in range(1, ctl.max_terms + 1):
        term *= msq / (k * (nu + k))
        total += term
        if abs(term) <= ctl.rel_tol * abs(total) and k >= kmin:
            small_streak += 1
            if small_streak >= 2:
                return SpecialValue(lead * total, k, True)
        else:
            small_streak = 0
    return SpecialValue(lead * total, ctl.max_terms, False)


def _bessel_j_asymptotic(nu: float, x: float) -> SpecialValue:
    # Hankel expansion: J_nu(x) ~ sqrt(2/(pi x)) (cos(w) P - sin(w) Q),
    # w = x - nu pi/2 - pi/4, summed to the smallest term.
    mu4 = 4.0 * nu * nu
    w = x - nu * (0.5 * math.pi) - 0.25 * math.pi
    p_sum = 1.0
    q_sum = 0.0
    c = 1.0
    best = 1.0
    terms = 1
    for j in range(1, 80):
        odd = 2 * j - 1
        c *= (mu4 - odd * odd) / (8.0 * j * x)
        ac = abs(c)
        if ac >= best and j > 2:
            break  # divergence onset: optimal truncation reached
        best = min(best, ac)
        if j % 2 == 1:
            q_sum += c if (j - 1) // 2 % 2 == 0 else -c
        else:
            p_sum += c if (j // 2) % 2 == 0 else -c
        terms = j + 1
        if ac < 1e-18:
            break
    value = math.sqrt(2.0 / (math.pi * x)) * (math.cos(w) * p_sum - math.sin(w) * q_sum)
    return SpecialValue(value, terms, best < 1e-10)


def bessel_j(nu: float, x: float, ctl: SeriesControl = _DEFAULT_CTL) -> float:
    """Bessel function of the first kind, real order nu > -1, x >= 0."""
    if not math.isfinite(x) or x < 0.0:
        raise DomainError(f"bessel_j: x must be finite and >= 0, got {x}")
    if nu <= -1.0:
        raise DomainError(f"bessel_j: order must satisfy nu > -1, got {nu}")
    if x == 0.0:
        if nu == 0.0:
            return 1.0
        if nu > 0.0:
            return 0.0
        raise DomainError("bessel_j: J_nu diverges at x=0 for nu < 0")
    if x < max(_J_SWITCH_BASE, 2.0 * abs(nu)):
        sv = _bessel_j_series(nu, x, ctl)
    else:
        sv = _bessel_j_asymptotic(nu, x)
    if not sv.converged:
        raise ConvergenceError(
            f"bessel_j(nu={nu}, x={x}) did not converge after {sv.terms_used} terms"
        )
    return sv.value


_JZERO_CACHE: dict[float, list[float]] = {}
_JZERO_LOCK = threading.Lock()


def bessel_j_zero(nu: float, k: int) -> float:
    """k-th positive zero of J_nu (k >= 1), for nu >= -1/2.

    Half-integer orders reduce to sine/cosine zeros; the general case walks
    forward in steps below the minimal zero spacing and bisects each bracket.
    Cached per order; safe for concurrent use.
    """
    if k < 1:
        raise DomainError("bessel_j_zero: k must be a positive integer")
    if nu < -0.5:
        raise DomainError("bessel_j_zero: requires nu >= -1/2")
    if nu == 0.5:
        return k * math.pi
    if nu == -0.5:
        return (k - 0.5) * math.pi

    zeros = _JZERO_CACHE.setdefault(nu, [])
    if len(zeros) >= k:  # lock-free read: the list is append-only
        return zeros[k - 1]
    with _JZERO_LOCK:
        return _extend_zero_cache(zeros, nu, k)


def _extend_zero_cache(zeros: list[float], nu: float, k: int) -> float:
    while len(zeros) < k:
        lo = zeros[-1] + 1e-9 if zeros else 1e-3
        step = 0.5  # minimal spacing of J_nu zeros exceeds this for nu >= -1/2
        f_lo = bessel_j(nu, lo) if lo > 1e-6 else 1.0  # J_nu > 0 near 0
        x = lo
        bracket = None
        for _ in range(10000):
            x_next = x + step
            f_next = bessel_j(nu, x_next)
            if f_lo == 0.0:
                bracket = (x, x)
                break
            if f_lo * f_next < 0.0:
                bracket = (x, x_next)
                break
            x, f_lo = x_next, f_next
        if bracket is None:
            raise ConvergenceError(
                f"bessel_j_zero: failed to bracket zero #{len(zeros) + 1} of J_{nu}"
            )
        a, b = bracket
        if a != b:
            fa = bessel_j(nu, a)
            for _ in range(200):
                m = 0.5 * (a + b)
                if b - a <= 1e-13 * max(1.0, b):
                    break
                fm = bessel_j(nu, m)
                if fa * fm <= 0.0:
                    b = m
                else:
                    a, fa = m, fm
        zeros.append(0.5 * (a + b))
    return zeros[k - 1]


# ---------------------------------------------------------------------------
# MacDonald function K
# ---------------------------------------------------------------------------

_GL20_NODES, _GL20_WEIGHTS = np.polynomial.legendre.leggauss(20)


def _bessel_k_half_integer(m: int, x: float) -> float:
    # K_{m+1/2} by upward recurrence from the exact K_{1/2}; stable since K
    # grows with the order.
    k_half = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x)
    if m == 0:
        return k_half
    prev = k_half
    cur = k_half * (1.0 + 1.0 / x)  # K_{3/2}
    order = 1.5
    while order < m + 0.5:
        prev, cur = cur, prev + (2.0 * order / x) * cur
        order += 1.0
    return cur


def _bessel_k_integral(nu: float, x: float) -> float:
    # K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt, scaled by e^x so the
    # integrand starts at 1; truncated where it drops below ~1e-20.
    target = 46.0
    t_up = 3.0
    for _ in range(40):
        t_new = math.acosh(1.0 + (target + nu * t_up) / x)
        if abs(t_new - t_up) < 1e-9:
            t_up = t_new
            break
        t_up = t_new

    n_panels = int(max(12.0, t_up * max(math.sqrt(x), nu / 6.0, 1.0)))
    n_panels = min(n_panels, 800)
    edges = np.linspace(0.0, t_up, n_panels + 1)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        halfw = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        t = mid + halfw * _GL20_NODES
        vals = np.exp(-x * (np.cosh(t) - 1.0)) * np.cosh(nu * t)
        total += halfw * float(_GL20_WEIGHTS @ vals)
    return math.exp(-x) * total


def bessel_k(nu: float, x: float) -> float:
    """MacDonald function K_nu(x) for x > 0; K is even in the order."""
    if not x > 0.0:
        raise DomainError(f"bessel_k: requires x > 0, got {x}")
    nu = abs(nu)
    two_nu = 2.0 * nu
    if abs(two_nu - round(two_nu)) < 1e-12 and round(two_nu) % 2 == 1:
        return _bessel_k_half_integer(int(round(two_nu)) // 2, x)
    return _bessel_k_integral(nu, x)


# ---------------------------------------------------------------------------
# Hypergeometric series
# ---------------------------------------------------------------------------


def _check_not_pole(gamma: float, name: str) -> None:
    if gamma <= 0.0 and abs(gamma - round(gamma)) < 1e-13:
        raise DomainError(f"{name}: lower parameter {gamma} is a nonpositive integer")


def _sum_ratio_series(
    ratio: Callable[[int], float], ctl: SeriesControl, kmin: float
) -> SpecialValue:
    # Sum 1 + t_1 + t_2 + ... with t_{k} = t_{k-1} * ratio(k-1); stops after
    # two consecutive negligible terms past the term-magnitude peak.
    term = 1.0
    total = 1.0
    small_streak = 0
    for k in range(1, ctl.max_terms + 1):
        term *= ratio(k - 1)
        total += term
        if term == 0.0:
            return SpecialValue(total, k, True)  # terminating series
        if abs(term) <= ctl.rel_tol * abs(total) and k >= kmin:
            small_streak += 1
            if small_streak >= 2:
                return SpecialValue(total, k, True)
        else:
            small_streak = 0
    return SpecialValue(total, ctl.max_terms, False)


def hyp0f1(gamma: float, z: float, ctl: SeriesControl = _DEFAULT_CTL) -> float:
    """Generalized hypergeometric series 0F1(gamma; z).

    Large negative z is evaluated through Bessel J (the two functions are
    related by an exact identity); the direct float64 series would lose all
    accuracy to cancellation there.
    """
    _check_not_pole(gamma, "hyp0f1")
    if z == 0.0:
        return 1.0
    if z < _HYP0F1_NEG_SWITCH:
        x = 2.0 * math.sqrt(-z)
        return gamma_fn(gamma) * (0.5 * x) ** (1.0 - gamma) * bessel_j(gamma - 1.0, x)
    sv = _sum_ratio_series(
        lambda k: z / ((k + 1.0) * (gamma + k)), ctl, 2.0 * math.sqrt(abs(z))
    )
    if not sv.converged:
        raise ConvergenceError(
            f"hyp0f1(gamma={gamma}, z={z}) did not converge after {sv.terms_used} terms"
        )
    return sv.value


def hyp1f1(alpha: float, gamma: float, z: float, ctl: SeriesControl = _DEFAULT_CTL) -> float:
    """Kummer's confluent hypergeometric function 1F1(alpha; gamma; z).

    Negative arguments go through the Kummer transform
    1F1(a; c; z) = e^z 1F1(c-a; c; -z) to avoid cancellation.
    """
    _check_not_pole(gamma, "hyp1f1")
    if z == 0.0 or alpha == gamma:
        return math.exp(z)
    if alpha == 0.0:
        return 1.0
    if z < 0.0:
        a2 = gamma - alpha
        sv = _sum_ratio_series(
            lambda k: (a2 + k) * (-z) / ((gamma + k) * (k + 1.0)), ctl, abs(z)
        )
        scale = math.exp(z)
    else:
        sv = _sum_ratio_series(
            lambda k: (alpha + k) * z / ((gamma + k) * (k + 1.0)), ctl, abs(z)
        )
        scale = 1.0
    if not sv.converged:
        raise ConvergenceError(
            f"hyp1f1(alpha={alpha}, gamma={gamma}, z={z}) did not converge "
            f"after {sv.terms_used} terms"
        )
    return scale * sv.value


# ---------------------------------------------------------------------------
# Dawson function and the normal CDF at imaginary argument
# ---------------------------------------------------------------------------


def dawson(x: float) -> float:
    """Dawson integral D(x) = exp(-x^2) * int_0^x exp(t^2) dt."""
    ax = abs(x)
    if ax == 0.0:
        return 0.0
    if ax <= 6.0:
        # exp(-x^2) * series for the inner integral; all terms positive, so
        # no cancellation, only benign dynamic range.
        xsq = ax * ax
        u = ax  # x^(2k+1) / k!
        total = ax
        for k in range(1, 200):
            u *= xsq / k
            term = u / (2 * k + 1)
            total += term
            if term <= 1e-17 * total:
                break
        val = math.exp(-xsq) * total
    else:
        # asymptotic series D(x) ~ 1/(2x) sum (2k-1)!!/(2x^2)^k, far past
        # optimal truncation accuracy at |x| > 6
        inv2xsq = 1.0 / (2.0 * ax * ax)
        term = 1.0
        total = 1.0
        for k in range(1, 60):
            term *= (2 * k - 1) * inv2xsq
            total += term
            if term <= 1e-17 * total:
                break
        val = total / (2.0 * ax)
    return val if x > 0 else -val


def erfi(x: float) -> float:
    """Imaginary error function erfi(x) = 2/sqrt(pi) * exp(x^2) * D(x)."""
    return 2.0 / math.sqrt(math.pi) * math.exp(x * x) * dawson(x)


def norm_cdf_imag_scaled(y: float) -> tuple[complex, float]:
    """Standard normal CDF at iy as (mantissa, log_scale).

    Phi(iy) = mantissa * exp(log_scale) with log_scale = y^2/2.  The mantissa
    is bounded (|Re| <= 1/2, |Im| <= 0.31), so callers can cancel the growing
    exponential against their own decaying one before exponentiating.
    """
    if not math.isfinite(y):
        raise DomainError(f"norm_cdf_imag_scaled: y must be finite, got {y}")
    log_scale = 0.5 * y * y
    mantissa = complex(
        0.5 * math.exp(-log_scale),
        dawson(y / math.sqrt(2.0)) / math.sqrt(math.pi),
    )
    return mantissa, log_scale


def norm_cdf_imag(y: float) -> complex:
    """Standard normal CDF at the purely imaginary point iy.

    Phi(iy) = 1/2 + (i/2) erfi(y / sqrt(2)).  Raises OverflowError once the
    exponential scale exceeds float range; use the scaled variant there.
    """
    mantissa, log_scale = norm_cdf_imag_scaled(y)
    if log_scale > 709.0:
        raise OverflowError(
            f"norm_cdf_imag overflows at y={y}; use norm_cdf_imag_scaled"
        )
    scale = math.exp(log_scale)
    return complex(0.5, scale * mantissa.imag)
