"""Special functions and numerical kernels shared by the asymptotic modules.

Contents
--------
elliptic_KE            complete elliptic integrals K, E by the AGM
hermite_He             probabilists' Hermite polynomials
loop_series_Q          the loop integral (1/2pi i) oint z^(-n-1) (1-z)^(-1) e^(1/(1-z)) dz
cut_integral           branch-cut loop integral by residue-at-infinity extraction
parabolic_cylinder_H   the transition-layer integral H(Delta_1)
harmonic               harmonic numbers
find_root_bracketed    Brent root finding on a sign-changing bracket
tanh_sinh / quad_adaptive / quad_to_infinity   quadrature kernels
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

from scipy.optimize import brentq

from .errors import (
    BracketFailure,
    MaxDepthExceeded,
    ModulusOutOfRange,
    NoSignChange,
)

_PI_OVER_2 = math.pi / 2.0


# ---------------------------------------------------------------------------
# elliptic integrals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EllipticPair:
    """Complete elliptic integrals of the first and second kind at modulus k."""

    K: float
    E: float


def elliptic_KE(k: float) -> EllipticPair:
    """K(k) and E(k) by the arithmetic-geometric mean, modulus convention.

    AGM iterates a <- (a+b)/2, b <- sqrt(ab) from (1, sqrt(1-k^2));
    K = pi/(2*AGM) and E = K*(1 - sum 2^(n-1) c_n^2) with c_n = (a_n-b_n)/2,
    c_0 = k.  Iteration stops when successive means differ by < 1e-15.
    """
    if not 0.0 <= k < 1.0:
        raise ModulusOutOfRange(f"modulus must be in [0, 1), got {k}")
    a = 1.0
    b = math.sqrt(1.0 - k * k)
    c_sum = 0.5 * k * k  # 2^(-1) * c_0^2
    pow2 = 1.0
    while abs(a - b) >= 1e-15:
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        c_sum += pow2 * c * c
        pow2 *= 2.0
    K = math.pi / (2.0 * a)
    E = K * (1.0 - c_sum)
    return EllipticPair(K=K, E=E)


# ---------------------------------------------------------------------------
# Hermite polynomials (probabilists' convention)
# ---------------------------------------------------------------------------

def hermite_He(j: int, z: float) -> float:
    """He_j(z) with He_0 = 1, He_1 = z, He_{j+1} = z He_j - j He_{j-1}."""
    if j < 0 or j > 200:
        raise ValueError(f"Hermite index must be in [0, 200], got {j}")
    if j == 0:
        return 1.0
    prev, cur = 1.0, z
    for m in range(1, j):
        prev, cur = cur, z * cur - m * prev
    return cur


# ---------------------------------------------------------------------------
# loop-integral series Q(n)
# ---------------------------------------------------------------------------

def loop_series_Q(n: int) -> float:
    """Q(n) = (1/2pi i) oint z^(-n-1) (1-z)^(-1) exp(1/(1-z)) dz, |z| < 1.

    Coefficient extraction gives the convergent series
    Q(n) = sum_{j>=0} (n+j)! / (n! (j!)^2), summed until a term drops below
    1e-16 of the partial sum.  n! Q(n) is an integer multiple of e's partial
    structure: n! Q(n) / e is an integer.
    """
    if n < 0 or n > 500:
        raise ValueError(f"series index must be in [0, 500], got {n}")
    term = 1.0
    total = 1.0
    j = 0
    while True:
        j += 1
        term *= (n + j) / (j * j)
        total += term
        if term < 1e-16 * total:
            return total


def loop_series_Q_log(n: int) -> float:
    """log Q(n), stable for indices where Q would lose range in doubles."""
    if n < 0 or n > 500:
        raise ValueError(f"series index must be in [0, 500], got {n}")
    # log of term_j = lgamma(n+j+1) - lgamma(n+1) - 2 lgamma(j+1); running
    # max-shifted accumulation keeps the sum in range.
    log_terms = []
    lg_n = math.lgamma(n + 1)
    j = 0
    best = -math.inf
    while True:
        lt = math.lgamma(n + j + 1) - lg_n - 2.0 * math.lgamma(j + 1)
        log_terms.append(lt)
        best = max(best, lt)
        if j > 2 and lt < best - 40.0:
            break
        j += 1
    return best + math.log(math.fsum(math.exp(lt - best) for lt in log_terms))


# ---------------------------------------------------------------------------
# branch-cut loop integral
# ---------------------------------------------------------------------------

def cut_integral(n: int, a: complex, z_minus: complex, z_plus: complex) -> complex:
    """oint z^n (z_plus - z)^(-a) (z - z_minus)^(a-1) dz around the cut.

    The loop encircles the segment [z_minus, z_plus] counterclockwise and the
    integrand is analytic exterior to the cut, so the value equals 2*pi*i
    times the z^(-1) coefficient of the expansion at infinity.  The branch is
    fixed by writing the two power factors as
        z^(-a) (1 - z_plus/z)^(-a) * z^(a-1) (1 - z_minus/z)^(a-1)
    with principal branches of (1 - w)^c; any residual phase prefactor from
    the application is supplied by the caller.  The z^(-1) coefficient is the
    finite convolution over i + k = n of the two binomial series, computed
    with ratio-recursive coefficients.
    """
    if z_minus == z_plus:
        raise ValueError("branch points coincide")
    # (1 - z_plus/z)^(-a) = sum_i  rising(a, i)/i!      * (z_plus/z)^i
    # (1 - z_minus/z)^(a-1) = sum_k rising(1-a, k)/k!   * (z_minus/z)^k
    up = [complex(1.0)]
    vp = [complex(1.0)]
    for i in range(n):
        up.append(up[-1] * (a + i) / (i + 1))
        vp.append(vp[-1] * (1.0 - a + i) / (i + 1))
    total = complex(0.0)
    zp_pow = complex(1.0)
    zm_pows = [complex(1.0)]
    for _ in range(n):
        zm_pows.append(zm_pows[-1] * z_minus)
    for i in range(n + 1):
        total += up[i] * zp_pow * vp[n - i] * zm_pows[n - i]
        zp_pow *= z_plus
    return 2j * math.pi * total


# ---------------------------------------------------------------------------
# transition-layer parabolic-cylinder-type integral
# ---------------------------------------------------------------------------

def parabolic_cylinder_H(delta1: float, rho: float) -> float:
    """H(Delta_1) = (1/sqrt(2pi)) int_0^inf u^(rho/(1-rho)) e^(-(1-rho)^2 (u-Delta_1)^2 / 2) du.

    Evaluated by tanh-sinh quadrature after shifting u = y + Delta_1; the
    Gaussian factor confines the mass to |y| = O(1/(1-rho)), so the infinite
    tail is truncated where the exponent is below -1500.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must be in (0, 1), got {rho}")
    p = rho / (1.0 - rho)
    s = 1.0 - rho
    width = math.sqrt(2.0 * 1500.0) / s

    def integrand(u: float) -> float:
        if u <= 0.0:
            return 0.0
        y = u - delta1
        expo = -0.5 * s * s * y * y + p * math.log(u)
        return math.exp(expo) if expo > -745.0 else 0.0

    lo = 0.0
    hi = max(delta1, 0.0) + width
    val = tanh_sinh(integrand, lo, hi, rel_tol=1e-11)
    return val / math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# harmonic numbers
# ---------------------------------------------------------------------------

def harmonic(n: int) -> float:
    """H_n = 1 + 1/2 + ... + 1/n, with H_0 = 0."""
    if n < 0:
        raise ValueError(f"harmonic index must be >= 0, got {n}")
    return math.fsum(1.0 / k for k in range(1, n + 1))


# ---------------------------------------------------------------------------
# bracketed root finding
# ---------------------------------------------------------------------------

def find_root_bracketed(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-12,
) -> float:
    """Brent's method on [lo, hi]; requires a sign change and |f(root)| <= tol."""
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise NoSignChange(f"f({lo}) = {flo} and f({hi}) = {fhi} have equal sign")
    root = brentq(f, lo, hi, xtol=1e-14, rtol=8.9e-16, maxiter=200)
    if abs(f(root)) > tol:
        raise BracketFailure(
            f"root at {root} leaves |f| = {abs(f(root)):.3e} > tol = {tol:.3e}"
        )
    return float(root)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and endpoint-singularity exponents for quad_adaptive."""

    rel_tol: float = 1e-12
    max_depth: int = 12
    exponent_a: float = 0.0
    exponent_b: float = 0.0

    def __post_init__(self) -> None:
        if not 1e-14 <= self.rel_tol <= 1e-3:
            raise ValueError(f"rel_tol must be in [1e-14, 1e-3], got {self.rel_tol}")
        if self.exponent_a <= -1.0 or self.exponent_b <= -1.0:
            raise ValueError("endpoint exponents must each be > -1")


def tanh_sinh(
    f: Callable[[float], float],
    a: float,
    b: float,
    rel_tol: float = 1e-12,
    max_depth: int = 12,
) -> float:
    """Level-doubling tanh-sinh rule on [a, b].

    Nodes x = m + c*tanh(pi/2 sinh(t)) on a dyadically refined t-mesh; stops
    when two successive levels agree to rel_tol.  Integrable endpoint
    singularities are handled by the double-exponential node clustering.
    """
    if a == b:
        return 0.0
    if a > b:
        return -tanh_sinh(f, b, a, rel_tol, max_depth)
    m = 0.5 * (a + b)
    c = 0.5 * (b - a)
    t_max = 4.0  # tanh(pi/2 sinh 4) is within 1e-37 of 1

    def node_sum(h: float, only_odd: bool) -> float:
        total = 0.0
        k = 1 if only_odd else 0
        step = 2 if only_odd else 1
        while k * h <= t_max:
            if k == 0:
                total += h * _PI_OVER_2 * f(m)
                k += step
                continue
            t = k * h
            sh = _PI_OVER_2 * math.sinh(t)
            # distance of the node pair from the endpoints, c*(1 - tanh(sh))
            # in the cancellation-free form; keeps singular-endpoint nodes
            # exact instead of quantized at eps.
            delta = c * 2.0 / (math.exp(2.0 * sh) + 1.0)
            w = h * _PI_OVER_2 * math.cosh(t) / math.cosh(sh) ** 2
            if delta == 0.0 or w == 0.0:
                break
            x_hi = b - delta
            x_lo = a + delta
            if x_hi < b:
                total += w * f(x_hi)
            if x_lo > a:
                total += w * f(x_lo)
            k += step
        return total

    h = 1.0
    total = node_sum(h, only_odd=False)
    prev = c * total
    for _ in range(max_depth):
        h *= 0.5
        total = 0.5 * total + node_sum(h, only_odd=True)
        cur = c * total
        if abs(cur - prev) <= rel_tol * max(abs(cur), 1e-300):
            return cur
        prev = cur
    raise MaxDepthExceeded(
        f"tanh-sinh did not reach rel_tol={rel_tol} within {max_depth} levels"
    )


def quad_adaptive(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: QuadratureSpec = QuadratureSpec(),
) -> float:
    """Integrate f over [a, b] honoring declared endpoint exponents.

    A declared exponent p at an endpoint means f ~ (distance)^p there; the
    substitution distance = w^(1/(p+1)) renders the integrand bounded before
    the tanh-sinh pass (for p = -1/2 this is the v = w^2 substitution).
    """
    g = f
    lo, hi = a, b
    if spec.exponent_a != 0.0:
        p = spec.exponent_a
        q = 1.0 / (p + 1.0)
        inner_a, inner_f = lo, g

        def g_a(w: float, _f=inner_f, _a=inner_a, _q=q) -> float:
            return _f(_a + w ** _q) * _q * w ** (_q - 1.0)

        g = g_a
        lo, hi = 0.0, (hi - inner_a) ** (p + 1.0)
    if spec.exponent_b != 0.0:
        if spec.exponent_a != 0.0:
            raise ValueError("declare at most one singular endpoint per call")
        p = spec.exponent_b
        q = 1.0 / (p + 1.0)
        inner_b, inner_f = hi, g

        def g_b(w: float, _f=inner_f, _b=inner_b, _q=q) -> float:
            return _f(_b - w ** _q) * _q * w ** (_q - 1.0)

        g = g_b
        lo, hi = 0.0, (inner_b - lo) ** (p + 1.0)
    return tanh_sinh(g, lo, hi, spec.rel_tol, spec.max_depth)


def quad_to_infinity(
    f: Callable[[float], float],
    a: float,
    rel_tol: float = 1e-12,
    max_depth: int = 12,
) -> float:
    """Integrate f over [a, inf) via v = a + w/(1-w) and tanh-sinh on [0, 1)."""

    def g(w: float) -> float:
        r = 1.0 - w
        return f(a + w / r) / (r * r)

    return tanh_sinh(g, 0.0, 1.0, rel_tol, max_depth)
