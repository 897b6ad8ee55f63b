"""Special functions and quadrature rules used throughout the package.

Gamma-type quantities lean on :mod:`scipy.special`; the Gauss hypergeometric
function is evaluated here directly because the radial kernel needs it close
to the singular point ``x = 1`` where a plain power series is useless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize, special

__all__ = [
    "QuadRule",
    "FracConstants",
    "ln_gamma",
    "hyp2f1",
    "hyp2f1_complement",
    "gauss_jacobi",
    "gauss_legendre",
    "bessel_j_zero",
    "frac_constants",
    "sphere_area",
    "ball_volume",
]

# Switch from the Gauss series to the 1 - x connection formulas above this.
SERIES_CUTOFF = 0.75
# |c - a - b - m| below this is treated as the logarithmic (integer) case.
INTEGER_TOL = 1e-8
_MAX_TERMS = 4000


@dataclass(frozen=True)
class QuadRule:
    """Gauss rule for the weight ``(1 - z)**alpha * (1 + z)**beta`` on (-1, 1)."""

    nodes: np.ndarray
    weights: np.ndarray
    alpha: float
    beta: float
    order: int

    @property
    def jacobi_exponents(self) -> tuple[float, float]:
        return (self.alpha, self.beta)

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


@dataclass(frozen=True)
class FracConstants:
    """Normalising constants attached to the pair (N, s).

    ``c_Ns`` multiplies the singular integral / Gagliardo form, ``p_Ns`` the
    Poisson kernel of the extension and ``a_s`` links the weighted normal
    derivative of the extension back to the fractional Laplacian.
    """

    N: int
    s: float
    c_Ns: float
    p_Ns: float
    a_s: float
    gamma_1ps_sq: float


def ln_gamma(x):
    """Natural log of the Gamma function for positive arguments."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError(f"ln_gamma requires x > 0, got {x!r}")
    out = special.gammaln(arr)
    return float(out) if out.ndim == 0 else out


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere S^{N-1} in R^N (|S^0| = 2)."""
    return 2.0 * math.pi ** (N / 2) / math.gamma(N / 2)


def ball_volume(N: int) -> float:
    return sphere_area(N) / N


# ---------------------------------------------------------------------------
# Gauss hypergeometric function
# ---------------------------------------------------------------------------


def _series(a, b, c, x):
    """Plain Gauss series, vectorised over ``x`` (assumed |x| well below 1)."""
    x = np.asarray(x, dtype=float)
    term = np.ones_like(x)
    total = np.ones_like(x)
    for n in range(_MAX_TERMS):
        term = term * ((a + n) * (b + n) / ((n + 1.0) * (c + n))) * x
        total = total + term
        if not np.any(np.abs(term) > 1e-17 * np.abs(total)):
            # One more term guards against an accidental tiny Pochhammer factor.
            if n > 2:
                break
    return total


def _log_case(a, b, m, y):
    """F(a, b; a + b + m; 1 - y) for integer m >= 0 (logarithmic connection)."""
    y = np.asarray(y, dtype=float)
    c = a + b + m
    out = np.zeros_like(y)
    if m > 0:
        pref = math.gamma(m) * special.gamma(c) * special.rgamma(a + m) * special.rgamma(b + m)
        term = np.ones_like(y)
        acc = np.ones_like(y)
        for n in range(m - 1):
            term = term * ((a + n) * (b + n) / ((n + 1.0) * (1.0 - m + n))) * y
            acc = acc + term
        out = out + pref * acc
    pref2 = -special.gamma(c) * special.rgamma(a) * special.rgamma(b) * (-1.0) ** m
    if pref2 == 0.0:
        return out
    logy = np.log(y)
    coef = 1.0 / math.factorial(m)
    power = y**m
    acc = np.zeros_like(y)
    for n in range(_MAX_TERMS):
        psi = (
            -special.digamma(n + 1.0)
            - special.digamma(n + m + 1.0)
            + special.digamma(a + m + n)
            + special.digamma(b + m + n)
        )
        contrib = coef * power * (logy + psi)
        acc = acc + contrib
        if n > 2 and not np.any(np.abs(contrib) > 1e-17 * np.abs(acc)):
            break
        coef = coef * (a + m + n) * (b + m + n) / ((n + 1.0) * (n + m + 1.0))
        power = power * y
    return out + pref2 * acc


def _connection(a, b, c, y):
    """Evaluate F(a, b; c; 1 - y) for small y via the linear transformation."""
    y = np.asarray(y, dtype=float)
    d = c - a - b
    m = round(d)
    if abs(d - m) < INTEGER_TOL:
        if m >= 0:
            return _log_case(a, b, int(m), y)
        # Euler: F(a,b;c;x) = (1-x)^{c-a-b} F(c-a, c-b; c; x), which flips the sign of m.
        return y**d * _log_case(c - a, c - b, int(-m), y)
    g1 = special.gamma(c) * special.gamma(d) * special.rgamma(c - a) * special.rgamma(c - b)
    g2 = special.gamma(c) * special.gamma(-d) * special.rgamma(a) * special.rgamma(b)
    out = np.zeros_like(y)
    if g1 != 0.0:
        out = out + g1 * _series(a, b, 1.0 - d, y)
    if g2 != 0.0:
        out = out + g2 * y**d * _series(c - a, c - b, 1.0 + d, y)
    return out


def hyp2f1(a: float, b: float, c: float, x):
    """Gauss hypergeometric function 2F1(a, b; c; x) for 0 <= x < 1.

    ``x`` may be an array; ``a``, ``b``, ``c`` are scalars. The series is
    summed directly for ``x <= 0.75`` and the 1 - x connection formulas
    (with logarithmic terms when ``c - a - b`` is an integer) are used above.
    """
    if c <= 0 and float(c).is_integer():
        raise ValueError("c must not be a non-positive integer")
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or np.any(xa >= 1) or np.any(np.isnan(xa)):
        raise ValueError("hyp2f1 is only defined here for 0 <= x < 1")
    out = np.empty_like(xa)
    low = xa <= SERIES_CUTOFF
    if np.any(low):
        out[low] = _series(a, b, c, xa[low])
    if np.any(~low):
        out[~low] = _connection(a, b, c, 1.0 - xa[~low])
    return float(out) if out.ndim == 0 else out


def hyp2f1_complement(a: float, b: float, c: float, y):
    """2F1(a, b; c; 1 - y), taking the complement ``y = 1 - x`` in (0, 1].

    Callers that know ``1 - x`` exactly (e.g. ``(rho - r)(rho + r) / rho^2``)
    avoid the cancellation of forming ``x`` first.
    """
    if c <= 0 and float(c).is_integer():
        raise ValueError("c must not be a non-positive integer")
    ya = np.asarray(y, dtype=float)
    if np.any(~(ya > 0)) or np.any(ya > 1):
        raise ValueError("complement argument must lie in (0, 1]")
    out = np.empty_like(ya)
    high = ya < 1.0 - SERIES_CUTOFF
    if np.any(high):
        out[high] = _connection(a, b, c, ya[high])
    if np.any(~high):
        out[~high] = _series(a, b, c, 1.0 - ya[~high])
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


@lru_cache(maxsize=256)
def _gauss_jacobi_cached(order: int, alpha: float, beta: float) -> QuadRule:
    if alpha == 0.0 and beta == 0.0:
        z, w = np.polynomial.legendre.leggauss(order)
    else:
        z, w = special.roots_jacobi(order, alpha, beta)
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    z.setflags(write=False)
    w.setflags(write=False)
    return QuadRule(z, w, float(alpha), float(beta), int(order))


def gauss_jacobi(order: int, alpha: float, beta: float) -> QuadRule:
    """Gauss-Jacobi rule with ``order`` nodes for (1-z)^alpha (1+z)^beta."""
    if order < 1:
        raise ValueError("order must be >= 1")
    if alpha <= -1 or beta <= -1:
        raise ValueError("Jacobi exponents must exceed -1")
    return _gauss_jacobi_cached(int(order), float(alpha), float(beta))


def gauss_legendre(order: int) -> QuadRule:
    return gauss_jacobi(order, 0.0, 0.0)


def jacobi_moment(k: int, alpha: float, beta: float) -> float:
    """Integral of z**k against the Jacobi weight, independent of any Gauss rule.

    m_0 is a Beta function; integrating z^k (1 - z^2) w' by parts gives
    (k + 2 + alpha + beta) m_{k+1} = (beta - alpha) m_k + k m_{k-1}.
    """
    m_prev = 0.0
    m = 2.0 ** (alpha + beta + 1) * math.exp(special.betaln(alpha + 1, beta + 1))
    for j in range(k):
        m_prev, m = m, ((beta - alpha) * m + j * m_prev) / (j + 2 + alpha + beta)
    return m


# ---------------------------------------------------------------------------
# Bessel zeros (classical s -> 1 reference)
# ---------------------------------------------------------------------------


def bessel_j_zero(nu: float, k: int) -> float:
    """k-th positive zero of J_nu, by bracketing on a fine scan then Brent."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if nu <= -1:
        raise ValueError("nu must exceed -1")
    # McMahon gives the location to O(1/beta); scan a little past it.
    beta = (k + nu / 2 - 0.25) * math.pi
    upper = beta + 2.0 * math.pi + nu
    xs = np.arange(max(1e-3, 0.5 * nu), upper, 0.05)
    vals = special.jv(nu, xs)
    flips = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if len(flips) < k:
        raise RuntimeError(f"could not bracket zero {k} of J_{nu}")
    i = flips[k - 1]
    return float(optimize.brentq(lambda x: special.jv(nu, x), xs[i], xs[i + 1], xtol=1e-15, rtol=1e-15))


# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------


def frac_constants(N: int, s: float) -> FracConstants:
    if not (0 < s < 1):
        raise ValueError(f"s must lie in (0, 1), got {s}")
    if N < 1:
        raise ValueError("N must be a positive integer")
    lg = special.gammaln
    log_c = (
        2 * s * math.log(2.0)
        - (N / 2) * math.log(math.pi)
        + math.log(s)
        + lg((N + 2 * s) / 2)
        - lg(1 - s)
    )
    # 1/p = pi^{N/2} Gamma(s) / Gamma(N/2 + s)
    log_p = lg(N / 2 + s) - (N / 2) * math.log(math.pi) - lg(s)
    log_a = (1 - 2 * s) * math.log(2.0) + lg(1 - s) - lg(s)
    return FracConstants(
        N=N,
        s=s,
        c_Ns=math.exp(log_c),
        p_Ns=math.exp(log_p),
        a_s=math.exp(log_a),
        gamma_1ps_sq=math.exp(2 * lg(1 + s)),
    )
