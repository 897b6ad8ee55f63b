"""Weighted Jacobi spectral basis on the unit ball for radial functions.

The basis is

    phi_n(r) = (1 - r^2)_+^s  P_n^{(s, N/2 - 1)}(2 r^2 - 1),

which has the exact ``dist(x, boundary)^s`` boundary behaviour, and satisfies
``(-Lap)^s phi_n = mu_n P_n^{(s, N/2-1)}(2|x|^2 - 1)`` inside the ball. As a
consequence the fractional stiffness matrix is diagonal and traces at the
boundary are available in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import special

from .specfun import QuadRule, frac_constants, gauss_jacobi, sphere_area

__all__ = [
    "Params",
    "RadialFunction",
    "SpectralOperator",
    "AssemblyError",
    "basis_eval",
    "basis_function",
    "basis_matrix",
    "stiffness_coefficient",
    "stiffness_diagonal",
    "mu",
    "jacobi_norm_sq",
    "radial_rule",
    "assemble",
    "trace_psi",
    "pohozaev_bilinear_check",
]


class AssemblyError(RuntimeError):
    pass


@dataclass(frozen=True)
class Params:
    """Problem parameters shared by every solver.

    ``s = 1`` is accepted only so that classical reference paths can carry a
    ``Params``; fractional assembly rejects it.
    """

    N: int
    s: float
    n_basis: int = 32
    quad_order: int | None = None
    sign_eps: float = 1e-8

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        if not (0 < self.s <= 1):
            raise ValueError(f"s must lie in (0, 1], got {self.s!r}")
        if self.n_basis < 1:
            raise ValueError("n_basis must be positive")
        if self.quad_order is None:
            object.__setattr__(self, "quad_order", 2 * self.n_basis + 24)
        if self.quad_order < self.n_basis + 4:
            raise ValueError("quad_order must be >= n_basis + 4")
        if not (0 < self.sign_eps < 1):
            raise ValueError("sign_eps must lie in (0, 1)")

    @property
    def beta(self) -> float:
        return self.N / 2 - 1

    @property
    def fractional(self) -> bool:
        return self.s < 1

    def with_(self, **changes) -> "Params":
        values = dict(N=self.N, s=self.s, n_basis=self.n_basis, quad_order=None, sign_eps=self.sign_eps)
        if "n_basis" not in changes and "quad_order" not in changes:
            values["quad_order"] = self.quad_order
        values.update(changes)
        return Params(**values)

    def critical_exponent(self) -> float:
        """Fractional Sobolev exponent 2*_s (infinite when 2s >= N)."""
        if 2 * self.s < self.N:
            return 2 * self.N / (self.N - 2 * self.s)
        return math.inf


def _require_fractional(params: Params):
    if not params.fractional:
        raise ValueError("s = 1 is only supported on the classical Bessel reference path")


# ---------------------------------------------------------------------------
# basis and closed-form coefficients
# ---------------------------------------------------------------------------


def _jacobi(n, params: Params, z):
    return special.eval_jacobi(n, params.s, params.beta, z)


def _jacobi_deriv(n, params: Params, z):
    if n == 0:
        return np.zeros_like(np.asarray(z, dtype=float))
    a, b = params.s, params.beta
    return 0.5 * (n + a + b + 1) * special.eval_jacobi(n - 1, a + 1, b + 1, z)


def basis_eval(n: int, r, params: Params):
    """phi_n(r); identically zero for r >= 1."""
    if not 0 <= n < params.n_basis:
        raise IndexError(f"basis index {n} out of range")
    r = np.asarray(r, dtype=float)
    inside = r < 1
    rr = np.where(inside, r, 0.0)
    val = (1 - rr**2) ** params.s * _jacobi(n, params, 2 * rr**2 - 1)
    out = np.where(inside, val, 0.0)
    return float(out) if out.ndim == 0 else out


def poly_matrix(params: Params, r) -> np.ndarray:
    """P_n(2 r^2 - 1) for all n, shape (n_basis, len(r)); no boundary factor."""
    z = 2 * np.asarray(r, dtype=float) ** 2 - 1
    return np.array([_jacobi(n, params, z) for n in range(params.n_basis)])


def basis_matrix(params: Params, r) -> np.ndarray:
    r = np.atleast_1d(np.asarray(r, dtype=float))
    inside = r < 1
    rr = np.where(inside, r, 0.0)
    weight = np.where(inside, (1 - rr**2) ** params.s, 0.0)
    return poly_matrix(params, rr) * weight


def mu(n, N: int, s: float):
    """Eigen-relation factor: (-Lap)^s phi_n = mu_n P_n(2|x|^2 - 1) in B."""
    n = np.asarray(n, dtype=float)
    lg = special.gammaln
    log_mu = 2 * s * math.log(2) + lg(1 + s + n) + lg(N / 2 + s + n) - lg(n + 1) - lg(N / 2 + n)
    out = np.exp(log_mu)
    return float(out) if out.ndim == 0 else out


def jacobi_norm_sq(n, alpha: float, beta: float):
    """int_{-1}^1 (1-z)^alpha (1+z)^beta P_n^{(alpha,beta)}(z)^2 dz."""
    n = np.asarray(n, dtype=float)
    lg = special.gammaln
    ab = alpha + beta
    log_h = (
        (ab + 1) * math.log(2)
        - np.log(2 * n + ab + 1)
        + lg(n + alpha + 1)
        + lg(n + beta + 1)
        - lg(n + ab + 1)
        - lg(n + 1)
    )
    out = np.exp(log_h)
    return float(out) if out.ndim == 0 else out


def radial_norm(n, params: Params):
    """h_n = int_B (1-|x|^2)^s P_n(2|x|^2-1)^2 dx, so [phi_m, phi_n]_s = mu_n h_n delta_mn."""
    N, s = params.N, params.s
    return sphere_area(N) * 0.5 ** (s + N / 2 + 1) * jacobi_norm_sq(n, s, params.beta)


def stiffness_coefficient(n: int, params: Params) -> float:
    _require_fractional(params)
    if not 0 <= n < params.n_basis:
        raise IndexError(f"basis index {n} out of range")
    return float(mu(n, params.N, params.s) * radial_norm(n, params))


def stiffness_diagonal(params: Params) -> np.ndarray:
    return np.array([stiffness_coefficient(n, params) for n in range(params.n_basis)])


# ---------------------------------------------------------------------------
# radial quadrature
# ---------------------------------------------------------------------------


def _mapped(rule: QuadRule, a: float, b: float, alpha: float, beta: float):
    """Map a Jacobi rule on (-1, 1) to (a, b) for weight (b - z)^alpha (z - a)^beta."""
    half = 0.5 * (b - a)
    z = a + half * (1 + rule.nodes)
    w = rule.weights * half ** (1 + alpha + beta)
    return z, w


def radial_rule(params: Params, gamma: float, order: int | None = None, breakpoints=()):
    """Nodes ``r`` and weights ``w`` with

        sum_i w_i f(r_i) ~= int_0^1 (1 - r^2)^gamma f(r) r^{N-1} dr.

    Without breakpoints this is a single Gauss-Jacobi rule in z = 2r^2 - 1 and
    is exact for f polynomial in r^2 of degree < 2*order. Breakpoints (radii)
    split the z-interval; the end panels keep the singular Jacobi factor in
    the weight and the inner panels are Gauss-Legendre.
    """
    order = order or params.quad_order
    beta = params.beta
    scale = 0.5 ** (gamma + params.N / 2 + 1)
    cuts = sorted({2 * b * b - 1 for b in breakpoints if 0 < b < 1})
    if not cuts:
        rule = gauss_jacobi(order, gamma, beta)
        z, w = np.asarray(rule.nodes), rule.weights * scale
        return np.sqrt((1 + z) / 2), w
    edges = [-1.0] + cuts + [1.0]
    zs, ws = [], []
    last = len(edges) - 2
    for k in range(last + 1):
        a, b = edges[k], edges[k + 1]
        if k == 0:
            z, w = _mapped(gauss_jacobi(order, 0.0, beta), a, b, 0.0, beta)
            w = w * (1 - z) ** gamma
        elif k == last:
            z, w = _mapped(gauss_jacobi(order, gamma, 0.0), a, b, gamma, 0.0)
            w = w * (1 + z) ** beta
        else:
            z, w = _mapped(gauss_jacobi(order, 0.0, 0.0), a, b, 0.0, 0.0)
            w = w * (1 - z) ** gamma * (1 + z) ** beta
        zs.append(z)
        ws.append(w)
    z = np.concatenate(zs)
    return np.sqrt((1 + z) / 2), np.concatenate(ws) * scale


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------


@dataclass
class SpectralOperator:
    stiffness_diag: np.ndarray
    mass: np.ndarray
    params: Params
    potential: np.ndarray | None = None

    @property
    def stiffness(self) -> np.ndarray:
        return np.diag(self.stiffness_diag)

    def form_matrix(self) -> np.ndarray:
        """Matrix of [u, v]_s + int V u v in the basis."""
        A = self.stiffness
        return A if self.potential is None else A + self.potential


def mass_matrix(params: Params) -> np.ndarray:
    r, w = radial_rule(params, 2 * params.s)
    Pm = poly_matrix(params, r)
    M = sphere_area(params.N) * (Pm * w) @ Pm.T
    return 0.5 * (M + M.T)


def potential_matrix(params: Params, V) -> np.ndarray:
    """int_B V phi_m phi_n dx for a radial ``PotentialProfile``-like object.

    ``V.boundary_power`` (gamma) declares V = (1-r^2)^gamma * smooth, so the
    Jacobi weight absorbs the non-smooth factor. ``V.breakpoints`` lists radii
    where V is not smooth.
    """
    gamma = float(getattr(V, "boundary_power", 0.0))
    breaks = tuple(getattr(V, "breakpoints", ()))
    order = params.quad_order if not breaks else max(params.quad_order, 2 * params.n_basis + 24)
    r, w = radial_rule(params, 2 * params.s + gamma, order=order, breakpoints=breaks)
    vals = np.asarray(V.eval(r), dtype=float)
    if gamma:
        vals = vals / (1 - r**2) ** gamma
    bad = ~np.isfinite(vals)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise AssemblyError(f"potential is not finite at quadrature node r={r[i]!r}")
    Pm = poly_matrix(params, r)
    P = sphere_area(params.N) * (Pm * (w * vals)) @ Pm.T
    return 0.5 * (P + P.T)


def assemble(params: Params, V=None) -> SpectralOperator:
    _require_fractional(params)
    A = stiffness_diagonal(params)
    M = mass_matrix(params)
    P = None
    if V is not None and not getattr(V, "is_zero", False):
        P = potential_matrix(params, V)
    return SpectralOperator(stiffness_diag=A, mass=M, params=params, potential=P)


# ---------------------------------------------------------------------------
# radial functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialFunction:
    """A radial function sum_n coeffs[n] phi_n, vanishing outside the ball."""

    coeffs: np.ndarray
    params: Params = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.params.n_basis,):
            raise ValueError(f"expected {self.params.n_basis} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coeffs", c)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = self.coeffs @ basis_matrix(self.params, r.ravel())
        out = out.reshape(r.shape)
        return float(out) if out.ndim == 0 else out

    def smooth_part(self, r):
        """u(r) / (1 - r^2)^s, a polynomial in r^2 (valid for r <= 1)."""
        r = np.asarray(r, dtype=float)
        return (self.coeffs @ poly_matrix(self.params, r.ravel())).reshape(r.shape)

    def __mul__(self, k: float) -> "RadialFunction":
        return RadialFunction(self.coeffs * k, self.params)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __add__(self, other: "RadialFunction") -> "RadialFunction":
        if other.params != self.params:
            raise ValueError("cannot add functions with different parameters")
        return RadialFunction(self.coeffs + other.coeffs, self.params)

    def __sub__(self, other):
        return self + (-other)

    @cached_property
    def _mass(self):
        return mass_matrix(self.params)

    def integral(self) -> float:
        """int_B u dx; only phi_0 has a nonzero mean by Jacobi orthogonality."""
        return float(self.coeffs[0] * radial_norm(0, self.params))

    def l2_norm(self) -> float:
        return float(np.sqrt(self.coeffs @ self._mass @ self.coeffs))

    def inner(self, other: "RadialFunction") -> float:
        return float(self.coeffs @ self._mass @ other.coeffs)

    def energy(self) -> float:
        """[u]_s^2 from the diagonal stiffness."""
        return float(self.coeffs**2 @ stiffness_diagonal(self.params))

    def frac_laplacian(self, r):
        """(-Lap)^s u at interior radii, from the basis eigen-relation."""
        p = self.params
        mus = mu(np.arange(p.n_basis), p.N, p.s)
        r = np.asarray(r, dtype=float)
        return ((self.coeffs * mus) @ poly_matrix(p, r.ravel())).reshape(r.shape)

    def as_profile(self):
        return self


def basis_function(n: int, params: Params) -> RadialFunction:
    c = np.zeros(params.n_basis)
    c[n] = 1.0
    return RadialFunction(c, params)


def jacobi_at_one(n, alpha: float):
    """P_n^{(alpha, beta)}(1) = binom(n + alpha, n)."""
    n = np.asarray(n, dtype=float)
    return np.exp(special.gammaln(n + alpha + 1) - special.gammaln(n + 1) - special.gammaln(alpha + 1))


def trace_psi(u: RadialFunction) -> float:
    """Boundary value of u(x) / (1 - |x|)^s, i.e. the fractional normal derivative."""
    p = u.params
    vals = jacobi_at_one(np.arange(p.n_basis), p.s)
    return float(2**p.s * np.dot(u.coeffs, vals))


def pohozaev_bilinear_check(m: int, n: int, params: Params, stiffness=None) -> float:
    """Relative residual of the bilinear Pohozaev identity on two basis functions.

    Checks

        int_B (x.grad phi_m) (-Lap)^s phi_n + int_B (x.grad phi_n) (-Lap)^s phi_m
            = -Gamma(1+s)^2 int_{dB} psi_m psi_n - (N - 2s) [phi_m, phi_n]_s

    where the left side uses the eigen-relation and exact Jacobi quadrature and
    the right side uses the closed-form traces and the stiffness entries.
    """
    _require_fractional(params)
    N, s, beta = params.N, params.s, params.beta
    order = params.quad_order
    S = sphere_area(N)
    mus = mu(np.array([m, n]), N, s)

    def lhs_term(i, j, mu_j):
        # int_0^1 r phi_i'(r) P_j(2r^2-1) r^{N-1} dr, written in z = 2r^2 - 1:
        # r phi_i' = -2s r^2 (1-r^2)^{s-1} P_i + 4 r^2 (1-r^2)^s P_i'.
        pref = 0.5 ** (N / 2 + 1)
        g1 = gauss_jacobi(order, s - 1, beta)
        z1 = np.asarray(g1.nodes)
        t1 = -2 * s * 0.5 ** (s - 1) * 0.5 * np.dot(
            g1.weights, (1 + z1) * _jacobi(i, params, z1) * _jacobi(j, params, z1)
        )
        g2 = gauss_jacobi(order, s, beta)
        z2 = np.asarray(g2.nodes)
        t2 = 4 * 0.5**s * 0.5 * np.dot(
            g2.weights, (1 + z2) * _jacobi_deriv(i, params, z2) * _jacobi(j, params, z2)
        )
        return S * pref * mu_j * (t1 + t2)

    lhs = lhs_term(m, n, mus[1]) + lhs_term(n, m, mus[0])

    A = stiffness if stiffness is not None else None
    if A is None:
        form = stiffness_coefficient(m, params) if m == n else 0.0
    else:
        form = float(A[m]) if m == n else 0.0
    psi = 2**s * jacobi_at_one(np.array([m, n]), s)
    g2 = frac_constants(N, s).gamma_1ps_sq
    rhs = -g2 * S * psi[0] * psi[1] - (N - 2 * s) * form
    return float(abs(lhs - rhs) / (1 + abs(rhs)))
