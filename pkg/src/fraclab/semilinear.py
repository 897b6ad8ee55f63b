"""Radial ground states of (-Lap)^s u + lambda u = u^p in the unit ball.

The ground state is found variationally: minimise c^T (A + lambda M) c on
the sphere {int |u_c|^{p+1} = 1} by normalised nonlinear inverse iteration
(a projected gradient flow preconditioned by A + lambda M), rescale the
minimiser so that it solves the equation, and polish with Newton steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .discretization import Params, RadialFunction, assemble, poly_matrix, radial_rule, trace_psi
from .eigensolver import QualitativeReport, qualitative_report, solve
from .potentials import PotentialProfile
from .specfun import frac_constants, sphere_area

__all__ = [
    "GroundState",
    "ConvergenceError",
    "ground_state",
    "diagnostics",
    "pohozaev_residual",
    "linearized_potential",
    "multistart",
    "continuation_branch",
    "Branch",
]

RESIDUAL_TOL = 1e-9
_GRID = (np.arange(1024) + 0.5) / 1024


class ConvergenceError(RuntimeError):
    pass


@dataclass
class GroundState:
    u: RadialFunction
    lam: float
    p: float
    energy_level: float = math.nan
    psi_u1: float = math.nan
    sigma1: float = math.nan
    sigma2: float = math.nan
    pohozaev_residual: float = math.nan
    nondeg_margin: float = math.nan
    converged: bool = False
    pde_residual: float = math.nan
    iterations: int = 0
    linearized: QualitativeReport | None = field(default=None, repr=False)
    notes: tuple = ()

    @property
    def params(self) -> Params:
        return self.u.params

    def invariant_flags(self) -> dict:
        vals = self.u(_GRID)
        return {
            "positive": bool(np.min(vals) > 0),
            "decreasing": bool(np.all(np.diff(vals) < 0)),
            "spectral_window": bool(self.sigma1 < -self.lam < self.sigma2),
            "hopf_positive": bool(self.psi_u1 > 0),
            "nondegenerate": bool(self.nondeg_margin > 0),
        }

    def summary(self) -> dict:
        return {
            "lambda": self.lam,
            "p": self.p,
            "converged": self.converged,
            "pde_residual": self.pde_residual,
            "energy_level": self.energy_level,
            "psi_u1": self.psi_u1,
            "sigma1": self.sigma1,
            "sigma2": self.sigma2,
            "nondeg_margin_radial": self.nondeg_margin,
            "pohozaev_residual": self.pohozaev_residual,
            "iterations": self.iterations,
        }


# ---------------------------------------------------------------------------
# nonlinear quadrature
# ---------------------------------------------------------------------------


class _Nonlinear:
    """Integrals of |u|^{p-1} u against the basis, exact up to the smoothness of |q|^{p-1} q.

    With u = (1 - r^2)^s q(r), every nonlinear integrand carries the factor
    (1 - r^2)^{s(p+1)}, which the Jacobi weight absorbs.
    """

    def __init__(self, params: Params, p: float):
        self.params = params
        self.p = p
        order = max(params.quad_order, 3 * params.n_basis + 16)
        r, w = radial_rule(params, params.s * (p + 1), order=order)
        self.P = poly_matrix(params, r)
        self.w = w * sphere_area(params.N)

    def q(self, c):
        return c @ self.P

    def power_integral(self, c) -> float:
        """int |u|^{p+1}."""
        return float(np.dot(self.w, np.abs(self.q(c)) ** (self.p + 1)))

    def load(self, c) -> np.ndarray:
        """b_m = int |u|^{p-1} u phi_m."""
        q = self.q(c)
        return self.P @ (self.w * np.abs(q) ** (self.p - 1) * q)

    def jacobian(self, c) -> np.ndarray:
        """G_mn = p int |u|^{p-1} phi_m phi_n."""
        q = self.q(c)
        return self.p * (self.P * (self.w * np.abs(q) ** (self.p - 1))) @ self.P.T


def _validate(params: Params, p: float, lam: float):
    if not params.fractional:
        raise ValueError("ground states need 0 < s < 1")
    crit = params.critical_exponent()
    if not (1 < p < crit - 1):
        raise ValueError(f"p={p} outside the subcritical range (1, {crit - 1})")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------


def _inverse_iteration(H, nl: _Nonlinear, c, tol=1e-12, max_iter=2000):
    """Normalised inverse iteration on {int |u|^{p+1} = 1}; returns (c, m, iterations)."""
    cho = scipy.linalg.cho_factor(H)
    e = 1.0 / (nl.p + 1)
    c = c / nl.power_integral(c) ** e
    m = float(c @ H @ c)
    for it in range(1, max_iter + 1):
        new = scipy.linalg.cho_solve(cho, nl.load(c))
        new = new / nl.power_integral(new) ** e
        m_new = float(new @ H @ new)
        step = np.linalg.norm(new - c) / np.linalg.norm(new)
        c, m = new, m_new
        if step < tol:
            break
    return c, m, it


def _newton(H, nl: _Nonlinear, c, tol=1e-14, max_iter=40):
    """Newton on (A + lambda M) c = b(c); returns (c, relative residual, iterations)."""
    res = np.inf
    for it in range(1, max_iter + 1):
        b = nl.load(c)
        R = H @ c - b
        res = np.linalg.norm(R) / np.linalg.norm(b)
        if res < tol:
            return c, res, it
        dc = np.linalg.solve(H - nl.jacobian(c), R)
        c = c - dc
        if not np.all(np.isfinite(c)):
            break
    b = nl.load(c)
    return c, float(np.linalg.norm(H @ c - b) / np.linalg.norm(b)), max_iter


def ground_state(N: int, s: float, p: float, lam: float, params: Params | None = None, init=None,
                 run_diagnostics: bool = True) -> GroundState:
    """Least-energy radial solution of (-Lap)^s u + lam u = u^p, u = 0 outside B.

    ``init`` (coefficients) seeds the iteration; the default is phi_0. A run
    that does not reach the residual target is returned with
    ``converged = False`` and its invariants unchecked.
    """
    params = params or Params(N, s)
    if params.N != N or params.s != s:
        raise ValueError("params do not match (N, s)")
    _validate(params, p, lam)
    op = assemble(params)
    H = op.form_matrix() + lam * op.mass
    nl = _Nonlinear(params, p)
    c0 = np.zeros(params.n_basis)
    c0[0] = 1.0
    if init is not None:
        c0 = np.asarray(init, dtype=float).copy()
        if c0.shape != (params.n_basis,):
            raise ValueError("init has the wrong number of coefficients")
    c, m, it1 = _inverse_iteration(H, nl, c0)
    c = c * m ** (1.0 / (p - 1))
    c, res, it2 = _newton(H, nl, c)
    u = RadialFunction(c, params)
    if u(0.0) < 0:
        u = -u
    gs = GroundState(u=u, lam=float(lam), p=float(p), pde_residual=float(res), iterations=it1 + it2)
    gs.energy_level = (0.5 - 1.0 / (p + 1)) * nl.power_integral(u.coeffs)
    gs.converged = bool(res <= RESIDUAL_TOL and np.min(u(_GRID)) > 0)
    if gs.converged and run_diagnostics:
        gs = diagnostics(gs)
        gs.converged = all(gs.invariant_flags().values())
    return gs


def linearized_potential(gs: GroundState) -> PotentialProfile:
    """V = -p u^{p-1}, which carries the boundary factor (1 - r^2)^{s(p-1)}."""
    u, p = gs.u, gs.p

    def V(r):
        return -p * np.abs(np.asarray(u(r), dtype=float)) ** (p - 1)

    prof = PotentialProfile(eval=V, boundary_power=u.params.s * (p - 1), label="-p*u^(p-1)")
    return replace(prof, monotone_nondecreasing=prof.check_monotone())


def pohozaev_residual(gs: GroundState) -> float:
    """Relative defect of the ground-state Pohozaev identity

        (2N/(p+1) - (N-2s)) int u^{p+1} - 2 s lam int u^2 = Gamma(1+s)^2 |dB| psi_u(1)^2.
    """
    params = gs.params
    N, s, p = params.N, params.s, gs.p
    nl = _Nonlinear(params, p)
    kappa = 2 * N / (p + 1) - (N - 2 * s)
    bulk = kappa * nl.power_integral(gs.u.coeffs)
    l2 = gs.u.l2_norm() ** 2
    psi = trace_psi(gs.u)
    boundary = frac_constants(N, s).gamma_1ps_sq * sphere_area(N) * psi**2
    return float(abs(bulk - 2 * s * gs.lam * l2 - boundary) / bulk)


def diagnostics(gs: GroundState) -> GroundState:
    """Linearised spectrum, radial nondegeneracy margin, Hopf trace and Pohozaev defect."""
    if not gs.converged:
        raise ConvergenceError("diagnostics need a converged ground state")
    params = gs.params
    V = linearized_potential(gs)
    es = solve(V, params.n_basis, params)
    out = replace(gs)
    out.sigma1 = float(es.sigmas[0])
    out.sigma2 = float(es.sigmas[1])
    out.nondeg_margin = float(np.min(np.abs(es.sigmas + gs.lam)))
    out.psi_u1 = trace_psi(gs.u)
    out.pohozaev_residual = pohozaev_residual(gs)
    out.linearized = qualitative_report(es)
    notes = [] if V.monotone_nondecreasing else ["linearized potential failed the monotone grid check"]
    out.notes = tuple(notes)
    return out


def multistart(N, s, p, lam, params: Params | None = None, seeds=range(10), spread: float = 0.5):
    """Solve from random positive-leaning starts; returns (solutions, max coefficient distance)."""
    params = params or Params(N, s)
    sols = []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        c0 = np.zeros(params.n_basis)
        c0[0] = 1.0
        decay = 1.0 / (1.0 + np.arange(params.n_basis)) ** 2
        c0 = c0 + spread * rng.standard_normal(params.n_basis) * decay
        sols.append(ground_state(N, s, p, lam, params, init=c0, run_diagnostics=False))
    ref = sols[0].u.coeffs
    spread_out = max(np.linalg.norm(g.u.coeffs - ref) for g in sols)
    return sols, float(spread_out)


# ---------------------------------------------------------------------------
# continuation
# ---------------------------------------------------------------------------


@dataclass
class Branch:
    axis: str
    values: list
    states: list
    complete: bool
    max_step_distance: float
    reversal_distance: float = math.nan


def _solve_at(axis, value, base, init):
    N, s, p, lam, n_basis = base["N"], base["s"], base["p"], base["lam"], base["n_basis"]
    if axis == "p":
        p = value
    elif axis == "s":
        s = value
    elif axis == "lambda":
        lam = value
    else:
        raise ValueError(f"unknown continuation axis {axis!r}")
    params = Params(N, s, n_basis)
    return ground_state(N, s, p, lam, params, init=init)


def _run(axis, values, base, init=None):
    states = []
    prev = init
    for v in values:
        gs = _solve_at(axis, v, base, prev)
        if not gs.converged and states:
            # one bisection retry: step halfway first, then to the target
            mid = 0.5 * (values[len(states) - 1] + v)
            half = _solve_at(axis, mid, base, prev)
            if half.converged:
                gs = _solve_at(axis, v, base, half.u.coeffs)
        states.append(gs)
        if not gs.converged:
            return states, False
        prev = gs.u.coeffs
    return states, True


def continuation_branch(axis: str, start: float, end: float, steps: int, *, N: int, s: float = 0.5,
                        p: float = 2.0, lam: float = 0.0, n_basis: int = 32, reverse_check: bool = True) -> Branch:
    """Follow the ground state along ``axis`` in ``steps`` uniform increments.

    Each step is warm-started from the previous solution. With
    ``reverse_check`` the branch is walked back to ``start`` and the distance
    to the first solution is recorded.
    """
    base = dict(N=N, s=s, p=p, lam=lam, n_basis=n_basis)
    values = list(np.linspace(start, end, steps + 1))
    states, complete = _run(axis, values, base)
    dist = 0.0
    for a, b in zip(states[:-1], states[1:]):
        dist = max(dist, float(np.linalg.norm(a.u.coeffs - b.u.coeffs)))
    branch = Branch(axis, values[: len(states)], states, complete, dist)
    if complete and reverse_check:
        back, ok = _run(axis, values[::-1], base, init=states[-1].u.coeffs)
        if ok:
            branch.reversal_distance = float(np.linalg.norm(back[-1].u.coeffs - states[0].u.coeffs))
    return branch
