"""Adaptive panel quadrature and the Bessel-kernel radial integrals.

The oscillatory integrator splits the axis at consecutive scaled Bessel
zeros, integrates each inter-zero panel with adaptive Gauss-Legendre, and
accelerates the alternating panel sums with an iterated Euler transform.
This evaluates the characteristic generator of any density generator,
including user-supplied ones without closed forms.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    ConvergenceError,
    DivergentIntegralError,
    DomainError,
    MomentUndefinedError,
)
from .generators import DensityGenerator, closed_moment_integral, moment_exists
from .specfun import bessel_j, bessel_j_zero, gamma_fn

__all__ = [
    "QuadratureControl",
    "QuadResult",
    "adaptive_interval",
    "moment_integral",
    "radial_moment",
    "integrate_bessel_oscillatory",
    "phi_hankel",
]


@dataclass(frozen=True)
class QuadratureControl:
    """Error targets and resource limits for the quadrature routines."""

    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    max_panels: int = 400
    tail_cutoff: float = 1e-16

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0.0 and self.rel_tol > 0.0):
            raise DomainError("QuadratureControl tolerances must be positive")
        if self.max_panels < 2:
            raise DomainError("QuadratureControl.max_panels must be >= 2")


@dataclass(frozen=True)
class QuadResult:
    value: float
    err_est: float
    panels_used: int
    tail_bound: float


_DEFAULT_CTL = QuadratureControl()

_G7_NODES, _G7_WEIGHTS = np.polynomial.legendre.leggauss(7)
_G15_NODES, _G15_WEIGHTS = np.polynomial.legendre.leggauss(15)


def _gauss_pair(f: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    # 15-point value with |G15 - G7| as a conservative error estimate.
    halfw = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    v15 = halfw * sum(
        w * f(mid + halfw * x) for x, w in zip(_G15_NODES, _G15_WEIGHTS)
    )
    v7 = halfw * sum(w * f(mid + halfw * x) for x, w in zip(_G7_NODES, _G7_WEIGHTS))
    return v15, abs(v15 - v7)


def _dyadic_seeds(a: float, b: float, min_cell: float = 0.25) -> tuple[float, ...]:
    # interior breakpoints halving toward the left edge, so an integrand
    # concentrated near `a` cannot hide between the Gauss nodes of one huge
    # panel
    width = b - a
    if width <= 8.0 * min_cell:
        return ()
    levels = min(48, int(math.ceil(math.log2(width / min_cell))))
    return tuple(a + width * 2.0 ** (-j) for j in range(levels, 0, -1))


def adaptive_interval(
    f: Callable[[float], float],
    a: float,
    b: float,
    abs_tol: float,
    rel_tol: float,
    max_panels: int = 256,
    seeds: tuple[float, ...] = (),
) -> tuple[float, float, int]:
    """Adaptive Gauss-Legendre on [a, b]: (value, err_est, panels_used).

    Bisects the worst panel until the summed error estimate meets the
    tolerance or the panel budget runs out; never raises, callers judge the
    returned estimate.  `seeds` are interior breakpoints of the initial
    partition.
    """
    if b <= a:
        return 0.0, 0.0, 0
    edges = [a, *[s for s in seeds if a < s < b], b]
    heap = []
    total_val = total_err = 0.0
    panels = 0
    seq = 0
    for pa, pb in zip(edges[:-1], edges[1:]):
        val, err = _gauss_pair(f, pa, pb)
        heapq.heappush(heap, (-err, seq, pa, pb, val, err))
        total_val += val
        total_err += err
        panels += 1
        seq += 1
    while panels < max_panels:
        if total_err <= max(abs_tol, rel_tol * abs(total_val)):
            break
        neg_err, _, pa, pb, pval, perr = heapq.heappop(heap)
        mid = 0.5 * (pa + pb)
        lv, le = _gauss_pair(f, pa, mid)
        rv, re = _gauss_pair(f, mid, pb)
        total_val += lv + rv - pval
        total_err += le + re - perr
        heapq.heappush(heap, (-le, seq, pa, mid, lv, le))
        heapq.heappush(heap, (-re, seq + 1, mid, pb, rv, re))
        seq += 2
        panels += 1
    return total_val, total_err, panels


def moment_integral(
    gen: DensityGenerator, n: int, ctl: QuadratureControl = _DEFAULT_CTL
) -> QuadResult:
    """int_0^inf z^(n/2-1) g(z) dz by adaptive panels, always numerically.

    Written in the radius variable (z = w^2) so the n = 1 endpoint is
    regular; the first unit window additionally substitutes w = y^3 to
    absorb any remaining algebraic singularity at the origin.  Infinite
    support is handled with doubling windows and a geometric tail estimate;
    a non-shrinking tail raises DivergentIntegralError.
    """
    return _radial_power_integral(gen, float(n), ctl)


def _radial_power_integral(
    gen: DensityGenerator, d: float, ctl: QuadratureControl
) -> QuadResult:
    # 2 * int_0^R w^(d-1) g(w^2) dw with R = support radius (maybe inf).
    g = gen.g

    def first_window(y: float) -> float:
        # w = y^3 on [0, 1]: integrand 3 y^2 * y^(3(d-1)) g(y^6)
        return 3.0 * y ** (3.0 * d - 1.0) * g(y**6)

    def w_integrand(w: float) -> float:
        return w ** (d - 1.0) * g(w * w)

    radius = gen.support_radius
    win_abs = 0.125 * ctl.abs_tol
    if radius <= 1.0:
        val, err, panels = adaptive_interval(
            lambda y: first_window(y) if y**3 < radius else 0.0,
            0.0,
            radius ** (1.0 / 3.0),
            win_abs,
            0.125 * ctl.rel_tol,
        )
        return QuadResult(2.0 * val, 2.0 * err, panels, 0.0)

    total, err_total, panels = adaptive_interval(
        first_window, 0.0, 1.0, win_abs, 0.125 * ctl.rel_tol
    )
    if math.isfinite(radius):
        val, err, p = adaptive_interval(
            w_integrand, 1.0, radius, win_abs, 0.125 * ctl.rel_tol
        )
        return QuadResult(2.0 * (total + val), 2.0 * (err_total + err), panels + p, 0.0)

    lo = 1.0
    prev_window = None
    flat_streak = 0
    for _ in range(100):
        hi = 2.0 * lo
        wval, werr, p = adaptive_interval(w_integrand, lo, hi, win_abs, 0.125 * ctl.rel_tol)
        total += wval
        err_total += werr
        panels += p
        thresh = 0.5 * max(ctl.abs_tol, ctl.rel_tol * abs(total))
        if prev_window is not None and prev_window > 0.0:
            ratio = wval / prev_window
            if wval >= 0.999 * prev_window and abs(wval) > thresh:
                flat_streak += 1
                if flat_streak >= 12:
                    raise DivergentIntegralError(
                        "moment integral: window contributions are not shrinking"
                    )
            else:
                flat_streak = 0
            if 0.0 <= ratio < 0.995:
                tail = wval * ratio / (1.0 - ratio)
                if tail < thresh:
                    total += tail
                    err_total += tail
                    return QuadResult(2.0 * total, 2.0 * err_total, panels, 2.0 * tail)
        elif abs(wval) <= 0.25 * thresh and prev_window is not None:
            return QuadResult(2.0 * total, 2.0 * err_total, panels, 2.0 * abs(wval))
        prev_window = wval
        lo = hi
    raise DivergentIntegralError("moment integral: tail bound did not converge")


def radial_moment(
    gen: DensityGenerator, n: int, k: int, ctl: QuadratureControl = _DEFAULT_CTL
) -> float:
    """E[R^(2k)] under the radial density of the generator in dimension n.

    Equals the ratio of moment integrals at dimension parameters n + 2k and
    n.  Raises MomentUndefinedError when the moment does not exist, which
    disables the small-argument series route for that generator.
    """
    if k < 0:
        raise DomainError("radial_moment: k must be >= 0")
    if k == 0:
        return 1.0
    key = ("radial_moment", n, k)
    if key in gen.moment_cache:
        return gen.moment_cache[key]
    exists = moment_exists(gen, n + 2.0 * k)
    if exists is False:
        raise MomentUndefinedError(
            f"E[R^{2 * k}] does not exist for family {gen.family.value} in dimension {n}"
        )
    try:
        num = _radial_power_integral(gen, n + 2.0 * k, ctl)
    except DivergentIntegralError as exc:
        raise MomentUndefinedError(
            f"E[R^{2 * k}] appears divergent for this generator (dimension {n})"
        ) from exc
    den = _moment_n(gen, n, ctl)
    value = num.value / den
    gen.moment_cache[key] = value
    return value


def _moment_n(gen: DensityGenerator, n: int, ctl: QuadratureControl) -> float:
    key = ("moment", float(n))
    if key not in gen.moment_cache:
        closed = closed_moment_integral(gen, float(n))
        if closed is not None and math.isfinite(closed):
            gen.moment_cache[key] = closed
        else:
            gen.moment_cache[key] = moment_integral(gen, n, ctl).value
    return gen.moment_cache[key]


# ---------------------------------------------------------------------------
# Oscillatory integration against a Bessel kernel
# ---------------------------------------------------------------------------


def _kernel(nu: float, x: float) -> float:
    # J_nu with closed forms at nu = +-1/2 (avoids the nu < 0 series branch
    # for the one-dimensional cosine case).
    if x == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    if nu == -0.5:
        return math.sqrt(2.0 / (math.pi * x)) * math.cos(x)
    if nu == 0.5:
        return math.sqrt(2.0 / (math.pi * x)) * math.sin(x)
    return bessel_j(nu, x)


def _euler_accelerate(partial_sums: list[float]) -> tuple[float, float]:
    # Iterated averaging of the partial-sum sequence; returns the deepest
    # diagonal value and the size of its last refinement.
    row = list(partial_sums)
    last = row[-1]
    prev = last
    while len(row) > 1:
        row = [0.5 * (row[i] + row[i + 1]) for i in range(len(row) - 1)]
        prev, last = last, row[-1]
    return last, abs(last - prev)


def integrate_bessel_oscillatory(
    f: Callable[[float], float],
    nu: float,
    omega: float,
    ctl: QuadratureControl = _DEFAULT_CTL,
    support_radius: float = math.inf,
) -> QuadResult:
    """int_0^R f(r) J_nu(omega r) dr with R the (possibly infinite) support.

    The integration axis is split at the scaled Bessel zeros; each panel is
    integrated adaptively, and for infinite support the alternating panel
    sums are Euler-accelerated so algebraically decaying envelopes (heavy
    tails) still converge in a bounded panel budget.
    """
    if not omega > 0.0:
        raise DomainError("integrate_bessel_oscillatory: omega must be > 0")

    def integrand(r: float) -> float:
        return f(r) * _kernel(nu, omega * r)

    panel_abs = ctl.abs_tol / 64.0
    panel_rel = min(ctl.rel_tol, 1e-10)

    contributions: list[float] = []
    partials: list[float] = []
    quad_err = 0.0
    panels_used = 0
    running = 0.0
    peak = 0.0
    prev_acc: Optional[float] = None
    acc_ok_streak = 0
    b_prev = 0.0

    for k in range(1, ctl.max_panels + 1):
        zk = bessel_j_zero(nu, k) / omega
        b_k = min(zk, support_radius)
        if b_k <= b_prev:
            break
        val, err, p = adaptive_interval(
            integrand, b_prev, b_k, panel_abs, panel_rel,
            seeds=_dyadic_seeds(b_prev, b_k),
        )
        contributions.append(val)
        running += val
        partials.append(running)
        quad_err += err
        panels_used += p
        peak = max(peak, abs(val))
        b_prev = b_k

        if b_k >= support_radius:
            # finite support exhausted: plain sum, no tail
            return QuadResult(running, quad_err, panels_used, 0.0)

        tol = max(ctl.abs_tol, ctl.rel_tol * abs(running))
        if abs(val) <= max(ctl.tail_cutoff * max(peak, 1e-300), 1e-300) and abs(
            val
        ) <= 0.01 * tol:
            # envelope has decayed below the cutoff: geometric tail bound
            tail = abs(val)
            return QuadResult(running, quad_err + tail, panels_used, tail)

        if k >= 10 and k % 2 == 0:
            start = contributions.index(max(contributions, key=abs))
            acc, resid = _euler_accelerate(partials[start:])
            tol_acc = 0.25 * max(ctl.abs_tol, ctl.rel_tol * abs(acc))
            if prev_acc is not None and abs(acc - prev_acc) < tol_acc and resid < tol_acc:
                acc_ok_streak += 1
                if acc_ok_streak >= 2:
                    err_est = max(resid * 4.0, abs(acc - prev_acc) * 2.0, quad_err)
                    return QuadResult(acc, err_est, panels_used, abs(val))
            else:
                acc_ok_streak = 0
            prev_acc = acc

        if k >= 16:
            c = contributions
            if abs(c[-1]) > abs(c[-2]) > abs(c[-3]) > abs(c[-4]) and abs(c[-1]) > peak * 0.5:
                raise ConvergenceError(
                    "integrate_bessel_oscillatory: envelope is not decaying"
                )

    if prev_acc is not None:
        acc, resid = _euler_accelerate(partials)
        err_est = max(resid * 4.0, quad_err)
        if err_est <= 10.0 * max(ctl.abs_tol, ctl.rel_tol * abs(acc)):
            return QuadResult(acc, err_est, panels_used, abs(contributions[-1]))
    raise ConvergenceError(
        f"integrate_bessel_oscillatory: no convergence within {ctl.max_panels} panels"
    )


# ---------------------------------------------------------------------------
# The characteristic generator by Hankel-type quadrature
# ---------------------------------------------------------------------------


def _phi_small_u_series(
    gen: DensityGenerator, n: int, u: float, ctl: QuadratureControl
) -> QuadResult:
    # phi(u^2) = sum_k (-u^2/4)^k / ((n/2)_k k!) * E[R^(2k)], valid for any
    # generator possessing the needed moments; raises MomentUndefinedError
    # otherwise so the caller can fall back to the oscillatory route.
    mqsq = -0.25 * u * u
    total = 1.0
    coeff = 1.0
    for k in range(1, 30):
        coeff *= mqsq / ((0.5 * n + k - 1.0) * k)
        term = coeff * radial_moment(gen, n, k, ctl)
        total += term
        if abs(term) <= ctl.rel_tol * abs(total):
            return QuadResult(total, abs(term) + 1e-16, 0, 0.0)
    raise ConvergenceError("phi_hankel: small-u moment series did not converge")


def phi_hankel(
    gen: DensityGenerator,
    n: int,
    u: float,
    ctl: QuadratureControl = _DEFAULT_CTL,
) -> QuadResult:
    """Characteristic generator phi(u^2) by the radial Bessel integral.

    phi(u^2) = c_n (2 pi)^(n/2) u^(-(n-2)/2) *
               int_0^inf r^(n/2) J_((n-2)/2)(r u) g(r^2) dr

    u = 0 returns exactly 1.  Below u = 1e-3 the removable u-singularity is
    sidestepped with a moment series (for generators whose moments exist).
    """
    if n < 1:
        raise DomainError("phi_hankel: dimension must be >= 1")
    if u < 0.0:
        raise DomainError("phi_hankel: u must be >= 0")
    if u == 0.0:
        return QuadResult(1.0, 0.0, 0, 0.0)
    if u < 1e-3:
        try:
            return _phi_small_u_series(gen, n, u, ctl)
        except MomentUndefinedError:
            pass  # heavy tails: only the oscillatory route is available

    moment_n = _moment_n(gen, n, ctl)
    c_n = gamma_fn(0.5 * n) / (math.pi ** (0.5 * n) * moment_n)
    prefactor = c_n * (2.0 * math.pi) ** (0.5 * n) * u ** (-0.5 * (n - 2.0))

    def envelope(r: float) -> float:
        return r ** (0.5 * n) * gen.g(r * r)

    inner = QuadratureControl(
        abs_tol=ctl.abs_tol / max(prefactor, 1.0),
        rel_tol=ctl.rel_tol,
        max_panels=ctl.max_panels,
        tail_cutoff=ctl.tail_cutoff,
    )
    res = integrate_bessel_oscillatory(
        envelope, 0.5 * (n - 2.0), u, inner, gen.support_radius
    )
    return QuadResult(
        prefactor * res.value,
        abs(prefactor) * res.err_est,
        res.panels_used,
        abs(prefactor) * res.tail_bound,
    )
