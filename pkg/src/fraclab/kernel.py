"""Radial interaction kernel and a slow, independent Gagliardo-form oracle.

Nothing in here uses the spectral basis: the oracle integrates the nonlocal
form directly in polar coordinates so that it can be used to catch mistakes
in the closed-form stiffness of :mod:`fraclab.discretization`.

Convention: ``[v, w]_s = (c_{N,s} / 2) * iint (v(x)-v(y)) (w(x)-w(y)) |x-y|^{-N-2s}``
over R^N x R^N, which equals ``int |xi|^{2s} conj(v^) w^`` for the unitary
Fourier transform and ``int v (-Lap)^s w`` for the pointwise operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special

from .specfun import frac_constants, gauss_jacobi, gauss_legendre, hyp2f1_complement, sphere_area

__all__ = [
    "RadialProfile",
    "ContractError",
    "theta",
    "killing_potential",
    "oracle_form",
    "disjoint_form",
]


class ContractError(ValueError):
    pass


@dataclass(frozen=True)
class RadialProfile:
    """A radial profile r -> value that must vanish for r >= 1."""

    eval: Callable
    smoothness_tag: str = "analytic"

    def __call__(self, r):
        return self.eval(r)


_EXTERIOR_PROBES = np.array([1.0, 1.0 + 1e-9, 1.25, 2.0, 7.0])


def _check_exterior(v):
    vals = np.asarray(v(_EXTERIOR_PROBES), dtype=float)
    if np.any(vals != 0):
        raise ContractError("profile does not vanish outside the unit ball")


# ---------------------------------------------------------------------------
# Theta_N
# ---------------------------------------------------------------------------


def _theta_series_coeffs(N: int, s: float, n_terms: int) -> np.ndarray:
    a, b, c = (N + 2 * s) / 2, s + 1, N / 2
    q = np.empty(n_terms)
    q[0] = 1.0
    for n in range(n_terms - 1):
        q[n + 1] = q[n] * (a + n) * (b + n) / ((n + 1) * (c + n))
    return q


def theta(N: int, s: float, r, rho):
    """Spherical mean kernel int_{S^{N-1}} |r e_1 - rho y|^{-N-2s} dsigma(y), r < rho.

    N = 1 uses the two-point sum over S^0; N > 1 uses
    |S^{N-1}| rho^{-N-2s} 2F1((N+2s)/2, s+1; N/2; r^2/rho^2).
    """
    r = np.asarray(r, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if np.any(r < 0) or np.any(~(r < rho)):
        raise ValueError("theta requires 0 <= r < rho")
    if N == 1:
        out = (rho - r) ** (-1 - 2 * s) + (rho + r) ** (-1 - 2 * s)
    else:
        r, rho = np.broadcast_arrays(r, rho)
        # 1 - r^2/rho^2 formed without cancellation
        y = np.minimum((rho - r) * (rho + r) / rho**2, 1.0)
        F = hyp2f1_complement((N + 2 * s) / 2, s + 1, N / 2, y)
        out = sphere_area(N) * rho ** (-N - 2 * s) * F
    return float(out) if np.ndim(out) == 0 else out


def _theta_sym(N, s, r, rho):
    lo = np.minimum(r, rho)
    hi = np.maximum(r, rho)
    return theta(N, s, lo, hi)


# ---------------------------------------------------------------------------
# exterior (killing) potential
# ---------------------------------------------------------------------------

_TAIL_START = 10.0


def _kappa_tail(N, s, r):
    """c * int_R^inf Theta(r, rho) rho^{N-1} drho, summed term by term."""
    R = _TAIL_START
    q = _theta_series_coeffs(N, s, 60)
    n = np.arange(q.size)
    x = (np.asarray(r, dtype=float)[..., None] / R) ** 2
    terms = q * x**n * R ** (-2 * s) / (2 * s + 2 * n)
    return sphere_area(N) * terms.sum(axis=-1)


@lru_cache(maxsize=64)
def _kappa_cached(N: int, s: float, r_key: tuple) -> np.ndarray:
    g = gauss_legendre(16)
    out = np.empty(len(r_key))
    for i, r in enumerate(r_key):
        d = 1.0 - r
        edges = [1.0]
        k = 0
        while edges[-1] < _TAIL_START:
            edges.append(min(r + d * 2.0 ** (k + 1), _TAIL_START))
            k += 1
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            rho = a + 0.5 * (b - a) * (1 + np.asarray(g.nodes))
            w = 0.5 * (b - a) * g.weights
            total += np.dot(w, theta(N, s, r, rho) * rho ** (N - 1))
        out[i] = total
    return out + _kappa_tail(N, s, np.array(r_key))


def killing_potential(N: int, s: float, r):
    """kappa(r) = c_{N,s} int_{rho > 1} Theta_N(r, rho) rho^{N-1} drho for 0 <= r < 1.

    This is the contribution of the exterior of the ball to the form:
    ``c int_{|y|>1} |x - y|^{-N-2s} dy`` at ``|x| = r``.
    """
    ra = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(ra < 0) or np.any(ra >= 1):
        raise ValueError("killing_potential requires 0 <= r < 1")
    c = frac_constants(N, s).c_Ns
    vals = c * _kappa_cached(N, float(s), tuple(ra.tolist()))
    return float(vals[0]) if np.ndim(r) == 0 else vals.reshape(np.shape(r))


# ---------------------------------------------------------------------------
# oracle quadrature
# ---------------------------------------------------------------------------


def _graded_edges(levels: int, to_zero: bool = True, to_one: bool = True, ratio: float = 0.5):
    """Panel edges on [0, 1] refined geometrically toward the chosen ends."""
    inner = [0.25, 0.5, 0.75]
    left = [0.25 * ratio**k for k in range(1, levels)] if to_zero else []
    right = [1 - 0.25 * ratio**k for k in range(1, levels)] if to_one else []
    return np.array(sorted({0.0, 1.0, *inner, *left, *right}))


def _composite(edges, q, power_at_zero: float = 0.0):
    """Composite Gauss-Legendre on the panels; the first panel optionally
    absorbs a ``u**power_at_zero`` endpoint singularity into a Jacobi weight."""
    g = gauss_legendre(q)
    a, b = edges[:-1, None], edges[1:, None]
    x = a + 0.5 * (b - a) * (1 + np.asarray(g.nodes))
    w = 0.5 * (b - a) * g.weights
    if power_at_zero and edges[0] == 0.0:
        gj = gauss_jacobi(q, 0.0, power_at_zero)
        h = edges[1]
        xj = 0.5 * h * (1 + np.asarray(gj.nodes))
        x[0] = xj
        w[0] = (0.5 * h) ** (1 + power_at_zero) * gj.weights / xj**power_at_zero
    return x.ravel(), w.ravel()


@dataclass(frozen=True)
class _FormRule:
    r: np.ndarray
    rho: np.ndarray
    w_pair: np.ndarray
    r_ext: np.ndarray
    w_ext: np.ndarray


@lru_cache(maxsize=32)
def _form_rule(N: int, s: float, resolution: int) -> _FormRule:
    q = resolution
    levels = min(max(12, 2 * resolution), 36)
    c = frac_constants(N, s).c_Ns
    S = sphere_area(N)
    r, wr = _composite(_graded_edges(levels, to_zero=True, to_one=True), q)
    # (v(r) - v(rho))^2 Theta ~ u^{1-2s} on the diagonal
    u, wu = _composite(_graded_edges(levels, to_zero=True, to_one=True), q, 1 - 2 * s)
    R = np.broadcast_to(r[:, None], (r.size, u.size)).ravel()
    rho = (r[:, None] + (1 - r[:, None]) * u[None, :]).ravel()
    W = np.outer(wr * (1 - r), wu).ravel()
    # nodes that round onto the diagonal carry v(r) - v(rho) = 0 exactly
    keep = rho > R
    R, rho, W = R[keep], rho[keep], W[keep]
    # triangle r < rho, doubled; (c/2) * 2 = c
    W = W * c * S * R ** (N - 1) * rho ** (N - 1) * theta(N, s, R, rho)
    kappa = killing_potential(N, s, r)
    w_ext = wr * S * kappa * r ** (N - 1)
    return _FormRule(r=R, rho=rho, w_pair=W, r_ext=r, w_ext=w_ext)


@lru_cache(maxsize=16)
def _knot_rule(N: int, s: float, knots: tuple, q: int) -> _FormRule:
    """Form rule for profiles that are smooth between the given knots.

    Every panel in r and, for each r node, every panel in rho stays between
    consecutive knots, so kinks of piecewise-linear profiles never fall
    inside a Gauss panel. The rho panels are also graded toward rho = r.
    """
    levels = 30
    c = frac_constants(N, s).c_Ns
    S = sphere_area(N)
    k = np.array(sorted({x for x in knots if 0 < x < 1}))
    last = k[-1] if k.size else 0.0
    toward_one = 1 - (1 - last) * 0.5 ** np.arange(1, levels)
    r_edges = np.unique(np.concatenate([[0.0, 1.0], k, toward_one]))
    r, wr = _composite(r_edges, q)
    g = gauss_legendre(q)
    gn = np.asarray(g.nodes)
    gj = gauss_jacobi(q, 0.0, 1 - 2 * s)
    jn = np.asarray(gj.nodes)
    Rs, Ps, Ws = [], [], []
    for ri, wi in zip(r, wr):
        d = 1.0 - ri
        geo = ri + d * 0.5 ** np.arange(levels)
        e = np.unique(np.concatenate([[ri], k[k > ri], geo]))
        # first panel carries the (rho - r)^{1-2s} behaviour in its weight
        h = e[1] - e[0]
        x0 = e[0] + 0.5 * h * (1 + jn)
        with np.errstate(divide="ignore"):
            # nodes that round onto rho = r are dropped below
            w0 = (0.5 * h) ** (2 - 2 * s) * gj.weights / (x0 - e[0]) ** (1 - 2 * s)
        a, b = e[1:-1, None], e[2:, None]
        x = (a + 0.5 * (b - a) * (1 + gn)).ravel()
        w = (0.5 * (b - a) * g.weights).ravel()
        Rs.append(np.full(q + x.size, ri))
        Ps.append(np.concatenate([x0, x]))
        Ws.append(wi * np.concatenate([w0, w]))
    R = np.concatenate(Rs)
    rho = np.concatenate(Ps)
    W = np.concatenate(Ws)
    keep = rho > R
    R, rho, W = R[keep], rho[keep], W[keep]
    W = W * c * S * R ** (N - 1) * rho ** (N - 1) * theta(N, s, R, rho)
    kappa = killing_potential(N, s, r)
    w_ext = wr * S * kappa * r ** (N - 1)
    return _FormRule(r=R, rho=rho, w_pair=W, r_ext=r, w_ext=w_ext)


def oracle_form(v, w, N: int, s: float, resolution: int = 8, knots=None) -> float:
    """Gagliardo form [v, w]_s of two radial profiles by direct quadrature.

    The interior part is integrated over r < rho with rho = r + (1 - r) u on
    tensor Gauss panels graded toward the diagonal (u -> 0), toward rho = 1
    (u -> 1) and toward the corner r -> 1; the exterior part uses the killing
    potential. Both profiles must vanish for r >= 1.

    Profiles that are only piecewise smooth (e.g. linear interpolants) should
    pass their break radii as ``knots``; the panels are then aligned with them.
    """
    _check_exterior(v)
    if w is not v:
        _check_exterior(w)
    if knots is not None:
        rule = _knot_rule(int(N), float(s), tuple(float(x) for x in knots), int(resolution))
    else:
        rule = _form_rule(int(N), float(s), int(resolution))
    dv = np.asarray(v(rule.r), dtype=float) - np.asarray(v(rule.rho), dtype=float)
    dw = dv if w is v else np.asarray(w(rule.r), dtype=float) - np.asarray(w(rule.rho), dtype=float)
    ve = np.asarray(v(rule.r_ext), dtype=float)
    we = ve if w is v else np.asarray(w(rule.r_ext), dtype=float)
    return float(np.dot(rule.w_pair, dv * dw) + np.dot(rule.w_ext, ve * we))


@lru_cache(maxsize=64)
def _disjoint_rule(N: int, s: float, r0: float, resolution: int, knots: tuple = ()):
    q = resolution
    levels = min(max(12, 2 * resolution), 36)
    c = frac_constants(N, s).c_Ns
    S = sphere_area(N)
    k = np.array(sorted({x for x in knots if 0 < x < 1 and x != r0}))
    # panels graded toward the interface r = rho = r0 from both sides
    inner = r0 * (1 - np.concatenate([[0.0], 0.5 ** np.arange(1, levels), [1.0]]))
    outer = r0 + (1 - r0) * np.concatenate([[0.0], 0.5 ** np.arange(1, levels), [1.0]])
    r_edges = np.unique(np.concatenate([inner, k[k < r0]]))
    rho_edges = np.unique(np.concatenate([outer, k[k > r0]]))
    r, wr = _composite(r_edges, q)
    rho, wrho = _composite(rho_edges, q)
    R, P = np.meshgrid(r, rho, indexing="ij")
    W = np.outer(wr * r ** (N - 1), wrho * rho ** (N - 1))
    W = W * theta(N, s, R, P) * c * S
    return R.ravel(), P.ravel(), W.ravel()


def disjoint_form(a, b, N: int, s: float, r0: float, resolution: int = 8, knots=()) -> float:
    """[a, b]_s when ``a`` lives in B_{r0} and ``b`` in the annulus r0 < |x| < 1.

    With disjoint supports only the cross term survives:
    ``[a, b]_s = -c |S^{N-1}| int_{r0}^1 rho^{N-1} b(rho) int_0^{r0} a(r) Theta(r, rho) r^{N-1} dr drho``.
    ``knots`` are break radii of piecewise-smooth profiles, as in :func:`oracle_form`.
    """
    if not 0 < r0 < 1:
        raise ValueError("r0 must lie in (0, 1)")
    kn = tuple(float(x) for x in knots)
    R, P, W = _disjoint_rule(int(N), float(s), float(r0), int(resolution), kn)
    return float(-np.dot(W, np.asarray(a(R), dtype=float) * np.asarray(b(P), dtype=float)))


def sphere_quadrature_theta(N: int, s: float, r: float, rho: float, order: int = 200) -> float:
    """Slow check of theta by polar-angle quadrature (N >= 2), for tests."""
    if N == 1:
        return (rho - r) ** (-1 - 2 * s) + (rho + r) ** (-1 - 2 * s)
    g = gauss_jacobi(order, (N - 3) / 2, (N - 3) / 2)
    # y_1 = t with weight (1 - t^2)^{(N-3)/2} on [-1, 1], times |S^{N-2}|
    t = np.asarray(g.nodes)
    vals = (r * r + rho * rho - 2 * r * rho * t) ** (-(N + 2 * s) / 2)
    return float(sphere_area(N - 1) * np.dot(g.weights, vals))
