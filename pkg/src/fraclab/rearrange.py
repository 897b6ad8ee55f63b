"""Discrete Schwarz symmetrization of radial grid profiles and the inequality
checks that drive the simplicity argument for second eigenfunctions.

A :class:`GridFunction` is piecewise constant on radial cells. The
rearrangement permutes (value, cell-measure) pairs, so every distribution
quantity is preserved exactly. When a nonlocal energy is needed the grid
values are turned into a continuous profile by linear interpolation in the
volume coordinate m = r^N through the cell centres (the form of a step
function is infinite for s >= 1/2). On an equal-measure grid the hat
functions are then translates of each other, so rearranging the nodal values
behaves like rearranging the cells themselves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import ContractError, disjoint_form, oracle_form
from .potentials import PotentialProfile
from .specfun import ball_volume

__all__ = [
    "GridFunction",
    "equal_measure_edges",
    "schwarz",
    "profile",
    "almgren_lieb_check",
    "hardy_littlewood_check",
    "cross_term_check",
    "random_profile",
    "random_split_profile",
]

# multiplicative slack on nonlocal inequalities, well above the oracle error
FORM_RTOL = 1e-3
# Gauss points per panel for the knot-aligned form rules (about 1e-5 relative)
FORM_RESOLUTION = 6
# volume fractions of B_{r0} offered by random_split_profile; a short list keeps
# the disjoint-form rules cached across a sweep
SPLIT_FRACTIONS = (0.25, 0.5, 0.75)


def equal_measure_edges(M: int, N: int) -> np.ndarray:
    """Edges 0 = r_0 < ... < r_M = 1 of M shells with equal volume."""
    return (np.arange(M + 1) / M) ** (1.0 / N)


@dataclass(frozen=True)
class GridFunction:
    """Piecewise-constant radial function on the cells [edges[i], edges[i+1])."""

    edges: np.ndarray
    values: np.ndarray
    N: int

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if e.ndim != 1 or v.shape != (e.size - 1,):
            raise ValueError("need len(values) == len(edges) - 1")
        if e[0] != 0.0 or abs(e[-1] - 1.0) > 1e-14 or np.any(np.diff(e) <= 0):
            raise ValueError("edges must increase strictly from 0 to 1")
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, f, N: int, M: int = 200, edges=None) -> "GridFunction":
        """Samples of ``f`` at the cell centres of an equal-measure grid."""
        e = equal_measure_edges(M, N) if edges is None else np.asarray(edges, dtype=float)
        g = cls(e, np.zeros(e.size - 1), N)
        return cls(e, np.asarray(f(g.radii), dtype=float), N)

    @property
    def radii(self) -> np.ndarray:
        """Cell centres in the volume coordinate, mapped back to radii."""
        m = self.edges**self.N
        return (0.5 * (m[1:] + m[:-1])) ** (1.0 / self.N)

    @property
    def measure_weights(self) -> np.ndarray:
        """Exact volume of each shell."""
        return ball_volume(self.N) * np.diff(self.edges**self.N)

    def positive_part(self) -> "GridFunction":
        return GridFunction(self.edges, np.maximum(self.values, 0.0), self.N)

    def negative_part(self) -> "GridFunction":
        """max(-v, 0), a nonnegative function."""
        return GridFunction(self.edges, np.maximum(-self.values, 0.0), self.N)

    def lq_norm(self, q: float) -> float:
        return float(np.dot(self.measure_weights, np.abs(self.values) ** q) ** (1.0 / q))

    def support_measure(self) -> float:
        return float(self.measure_weights[self.values != 0].sum())

    def distribution(self, level: float) -> float:
        """|{v > level}|."""
        return float(self.measure_weights[self.values > level].sum())

    def integrate(self, weight) -> float:
        """sum over cells of measure * weight(midpoint) * value."""
        w = np.asarray(weight(self.radii), dtype=float)
        return float(np.dot(self.measure_weights, w * self.values))


def schwarz(v: GridFunction) -> GridFunction:
    """Decreasing rearrangement of a nonnegative grid function.

    Cells are stably sorted by value (descending) and stacked outward from
    the origin. On an equal-measure grid this is a permutation of values on
    the same grid; otherwise the result lives on a new partition whose shells
    carry the sorted cell measures.
    """
    if np.any(v.values < 0):
        raise ContractError("schwarz requires a nonnegative function")
    order = np.argsort(-v.values, kind="stable")
    meas = v.measure_weights[order]
    widths = np.diff(v.edges**v.N)
    if np.allclose(widths, widths[0], rtol=1e-12, atol=0):
        return GridFunction(v.edges, v.values[order], v.N)
    cum = np.concatenate([[0.0], np.cumsum(meas)])
    edges = (cum / cum[-1]) ** (1.0 / v.N)
    edges[-1] = 1.0
    return GridFunction(edges, v.values[order], v.N)


def profile(g: GridFunction, lo: float = 0.0, hi: float = 1.0):
    """Continuous radial profile through the cell centres inside (lo, hi).

    Linear in r^N between nodes, flat toward r = 0 when ``lo == 0``, dropping
    to zero at the other end points and vanishing outside (lo, hi).
    """
    mid = g.radii
    keep = (mid > lo) & (mid < hi)
    x = mid[keep]
    y = g.values[keep]
    if lo == 0.0:
        xs = np.concatenate([[0.0], x, [hi]])
        ys = np.concatenate([[y[0] if y.size else 0.0], y, [0.0]])
    else:
        xs = np.concatenate([[lo], x, [hi]])
        ys = np.concatenate([[0.0], y, [0.0]])

    N = g.N
    ms = xs**N

    def f(r):
        r = np.asarray(r, dtype=float)
        out = np.interp(r**N, ms, ys)
        return np.where((r >= lo) & (r < hi), out, 0.0)

    return f


@dataclass(frozen=True)
class InequalityResult:
    lhs: float
    rhs: float
    ok: bool
    tolerance: float


def _energy(g: GridFunction, N, s, resolution):
    if not np.any(g.values):
        return 0.0
    f = profile(g)
    return oracle_form(f, f, N, s, resolution, knots=tuple(g.radii))


def almgren_lieb_check(v: GridFunction, N: int, s: float, resolution: int = FORM_RESOLUTION) -> InequalityResult:
    """[v_*]_s^2 <= [v^+]_s^2 with v_* the Schwarz symmetrization of v^+."""
    if v.N != N:
        raise ValueError("grid dimension does not match N")
    vp = v.positive_part()
    vs = schwarz(vp)
    lhs = _energy(vs, N, s, resolution)
    rhs = _energy(vp, N, s, resolution)
    tol = FORM_RTOL * abs(rhs)
    return InequalityResult(lhs, rhs, bool(lhs <= rhs + tol), tol)


def hardy_littlewood_check(v: GridFunction, V: PotentialProfile, sigma: float, tol: float = 1e-12) -> InequalityResult:
    """int (sigma - V) v_*^2 >= int (sigma - V) (v^+)^2 for nondecreasing V."""
    if not V.monotone_nondecreasing:
        raise ContractError("potential is not certified radially nondecreasing")
    vp = v.positive_part()
    vs = schwarz(vp)

    def weight(r):
        return sigma - np.asarray(V(r), dtype=float)

    sq = lambda g: GridFunction(g.edges, g.values**2, g.N)
    lhs = sq(vs).integrate(weight)
    rhs = sq(vp).integrate(weight)
    slack = tol * (1 + abs(rhs))
    return InequalityResult(lhs, rhs, bool(lhs >= rhs - slack), slack)


def _split_radius(v: GridFunction) -> float:
    """Cell edge separating positive values (inside) from negative ones (outside)."""
    pos = np.nonzero(v.values > 0)[0]
    neg = np.nonzero(v.values < 0)[0]
    if pos.size == 0 or neg.size == 0:
        raise ContractError("need both a positive and a negative part")
    if pos.max() >= neg.min():
        raise ContractError("positive part must lie inside the negative part")
    return float(v.edges[pos.max() + 1])


def cross_term_check(v: GridFunction, N: int, s: float, resolution: int = FORM_RESOLUTION) -> InequalityResult:
    """-[v_*, v^-]_s <= -[v^+, v^-]_s when v^+ lives in B_{r0} and v^- outside.

    ``v^-`` is the nonnegative negative part; both mixed forms only involve
    disjoint supports and are computed with :func:`fraclab.kernel.disjoint_form`.
    """
    if v.N != N:
        raise ValueError("grid dimension does not match N")
    r0 = _split_radius(v)
    vp, vm = v.positive_part(), v.negative_part()
    vs = schwarz(vp)
    if not np.array_equal(vs.edges, v.edges):
        raise ContractError("cross-term check needs an equal-measure grid")
    b = profile(vm, lo=r0, hi=1.0)
    knots = tuple(v.radii)
    lhs = -disjoint_form(profile(vs, hi=r0), b, N, s, r0, resolution, knots)
    rhs = -disjoint_form(profile(vp, hi=r0), b, N, s, r0, resolution, knots)
    tol = FORM_RTOL * abs(rhs)
    return InequalityResult(lhs, rhs, bool(lhs <= rhs + tol), tol)


# ---------------------------------------------------------------------------
# random test profiles
# ---------------------------------------------------------------------------


def _bumps(rng, k, lo, hi):
    centers = rng.uniform(lo, hi, k)
    widths = rng.uniform(0.04, 0.25, k) * (hi - lo)
    amps = rng.normal(size=k)
    return centers, widths, amps


def random_profile(rng: np.random.Generator, n_bumps: int = 4):
    """Smooth random radial profile that vanishes at r = 1 and may change sign."""
    c, w, a = _bumps(rng, n_bumps, 0.0, 1.0)

    def f(r):
        r = np.asarray(r, dtype=float)
        g = np.exp(-0.5 * ((r[..., None] - c) / w) ** 2) @ a
        return np.where(r < 1, g * (1 - r**2), 0.0)

    return f


def random_split_profile(rng: np.random.Generator, N: int, M: int = 200) -> GridFunction:
    """Random grid function with v >= 0 on B_{r0} and v <= 0 on the annulus."""
    edges = equal_measure_edges(M, N)
    k = int(round(M * SPLIT_FRACTIONS[int(rng.integers(len(SPLIT_FRACTIONS)))]))
    r0 = edges[k]
    ci, wi, ai = _bumps(rng, 3, 0.0, r0)
    co, wo, ao = _bumps(rng, 2, r0, 1.0)
    mid = 0.5 * (edges[1:] + edges[:-1])
    inner = np.abs(np.exp(-0.5 * ((mid[:, None] - ci) / wi) ** 2) @ ai) * (r0 - mid)
    outer = np.abs(np.exp(-0.5 * ((mid[:, None] - co) / wo) ** 2) @ ao) * (mid - r0) * (1 - mid)
    vals = np.where(mid < r0, inner, -outer)
    return GridFunction(edges, vals, N)
