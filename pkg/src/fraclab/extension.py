"""s-harmonic extension of radial functions through the Poisson kernel.

    W(x, t) = p_{N,s} t^{2s} int_B w(y) (t^2 + |x - y|^2)^{-(N+2s)/2} dy

For radial w the angular integral is the sphere kernel

    K(r, rho, t) = int_{S^{N-1}} (A - B y_1)^{-e} dsigma(y),
    A = t^2 + r^2 + rho^2,  B = 2 r rho,  e = (N + 2s) / 2,

which equals |S^{N-1}| A^{-e} 2F1(e/2, (e+1)/2; N/2; B^2/A^2); it is a
two-point sum for N = 1 and elementary for N = 3. The remaining radial
integral is done by Gauss quadrature with the (1 - rho)^s edge behaviour of
the spectral basis absorbed into a Jacobi weight.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .discretization import Params, RadialFunction, poly_matrix
from .kernel import ContractError
from .specfun import frac_constants, gauss_jacobi, gauss_legendre, hyp2f1, hyp2f1_complement, sphere_area

__all__ = [
    "ExtensionField",
    "NodalReport",
    "DegenerateFieldError",
    "sphere_kernel",
    "poisson_extend",
    "extension_at",
    "tail_moment",
    "nodal_count",
    "nodal_domains",
    "extension_consistency",
    "harmonic_residual",
    "default_grids",
]

# Gauss points per radial panel
PANEL_ORDER = 8
# widest panel used for the radial integral when t is large
MAX_PANEL = 1.0 / 16
# below this t the kernel is too narrow for shared uniform panels
GRADED_BELOW = 5e-3


class DegenerateFieldError(ValueError):
    pass


# ---------------------------------------------------------------------------
# sphere kernel
# ---------------------------------------------------------------------------


def sphere_kernel(N: int, s: float, r, rho, t):
    """K(r, rho, t) = int_{S^{N-1}} (t^2 + r^2 + rho^2 - 2 r rho y_1)^{-(N+2s)/2} dsigma."""
    r, rho, t = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (r, rho, t)))
    e = (N + 2 * s) / 2
    A = t * t + r * r + rho * rho
    B = 2 * r * rho
    # A - B = t^2 + (r - rho)^2 without cancellation
    AmB = t * t + (r - rho) ** 2
    ApB = t * t + (r + rho) ** 2
    if N == 1:
        return AmB ** (-e) + ApB ** (-e)
    x = np.divide(B, A, out=np.zeros_like(A), where=A > 0)
    out = np.empty_like(A)
    if N == 3:
        # 2 pi int_{-1}^1 (A - B y)^{-e} dy, closed form away from B = 0
        far = x >= 0.1
        out[far] = (
            2 * np.pi / (B[far] * (e - 1)) * (AmB[far] ** (1 - e) - ApB[far] ** (1 - e))
        )
        near = ~far
        if np.any(near):
            out[near] = sphere_area(3) * A[near] ** (-e) * hyp2f1(e / 2, (e + 1) / 2, 1.5, x[near] ** 2)
        return out
    y = AmB * ApB / (A * A)
    small = x * x <= 0.5
    if np.any(small):
        out[small] = hyp2f1(e / 2, (e + 1) / 2, N / 2, x[small] ** 2)
    if np.any(~small):
        out[~small] = hyp2f1_complement(e / 2, (e + 1) / 2, N / 2, y[~small])
    return sphere_area(N) * A ** (-e) * out


# ---------------------------------------------------------------------------
# radial rules
# ---------------------------------------------------------------------------


def _panels(edges, s):
    """Gauss nodes/weights on [0, 1] panels; the panel ending at 1 carries
    the weight (1 - rho)^s, every other panel has (1 - rho)^s folded into the
    weights so that callers integrate (1 - rho)^s g(rho) uniformly."""
    q = PANEL_ORDER
    g = gauss_legendre(q)
    gj = gauss_jacobi(q, s, 0.0)
    a, b = edges[:-2, None], edges[1:-1, None]
    x = (a + 0.5 * (b - a) * (1 + np.asarray(g.nodes))).ravel()
    w = (0.5 * (b - a) * g.weights).ravel() * (1 - x) ** s
    a, b = edges[-2], edges[-1]
    xl = a + 0.5 * (b - a) * (1 + np.asarray(gj.nodes))
    wl = (0.5 * (b - a)) ** (1 + s) * gj.weights
    return np.concatenate([x, xl]), np.concatenate([w, wl])


def _uniform_rule(t: float, s: float):
    h = min(max(t, GRADED_BELOW), MAX_PANEL)
    n = int(np.ceil(1.0 / h - 1e-9))
    return _panels(np.linspace(0.0, 1.0, n + 1), s)


def _graded_rule(r: float, t: float, s: float, levels: int = 40):
    """Panels refined geometrically around rho = r on the scale t."""
    c = min(max(r, 0.0), 1.0)
    d = max(t, abs(r - c))
    steps = d * 2.0 ** np.arange(-2, levels)
    pts = np.concatenate([c - steps, c + steps, np.linspace(0, 1, 17), [c]])
    edges = np.unique(np.clip(pts, 0.0, 1.0))
    return _panels(edges, s)


def _smooth_basis(params: Params, rho):
    """phi_n(rho) rho^{N-1} / (1 - rho)^s for all n, shape (n_basis, len(rho))."""
    return poly_matrix(params, rho) * ((1 + rho) ** params.s * rho ** (params.N - 1))


def _basis_extension(params: Params, r, t, rule):
    """E[n, i] = p t^{2s} int phi_n(rho) rho^{N-1} K(r_i, rho, t) drho."""
    rho, w = rule
    p = frac_constants(params.N, params.s).p_Ns
    G = _smooth_basis(params, rho) * w
    K = sphere_kernel(params.N, params.s, np.asarray(r)[:, None], rho[None, :], t)
    return p * t ** (2 * params.s) * (G @ K.T)


_TABLES: "OrderedDict[tuple, np.ndarray]" = OrderedDict()
_TABLE_CACHE_SIZE = 6


def _extension_table(params: Params, r_grid: np.ndarray, t_grid: np.ndarray) -> np.ndarray:
    """E[n, i, j]: extension of phi_n at (r_i, t_j); cached per grid."""
    key = (params, r_grid.tobytes(), t_grid.tobytes())
    if key in _TABLES:
        _TABLES.move_to_end(key)
        return _TABLES[key]
    s = params.s
    E = np.empty((params.n_basis, r_grid.size, t_grid.size))
    for j, t in enumerate(t_grid):
        if t == 0:
            E[:, :, j] = np.array([np.asarray(RadialFunction(np.eye(params.n_basis)[n], params)(r_grid))
                                   for n in range(params.n_basis)])
        elif t >= GRADED_BELOW:
            E[:, :, j] = _basis_extension(params, r_grid, t, _uniform_rule(t, s))
        else:
            for i, r in enumerate(r_grid):
                E[:, i : i + 1, j] = _basis_extension(params, [r], t, _graded_rule(r, t, s))
    E.setflags(write=False)
    _TABLES[key] = E
    if len(_TABLES) > _TABLE_CACHE_SIZE:
        _TABLES.popitem(last=False)
    return E


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExtensionField:
    """W(r_i, t_j) on a tensor grid; ``values`` has shape (len(r), len(t))."""

    r_grid: np.ndarray
    t_grid: np.ndarray
    values: np.ndarray
    source: RadialFunction

    def rows(self):
        """(r, t, W) triples in r-major order, for CSV dumps."""
        R, T = np.meshgrid(self.r_grid, self.t_grid, indexing="ij")
        return np.column_stack([R.ravel(), T.ravel(), self.values.ravel()])


def default_grids(extent: float = 4.0, cells: int = 400):
    """Cell-centred r grid on (0, extent) and t grid from 0 on [0, extent]."""
    r = (np.arange(cells) + 0.5) * (extent / cells)
    t = np.arange(cells + 1) * (extent / cells)
    return r, t


def poisson_extend(w: RadialFunction, r_grid=None, t_grid=None) -> ExtensionField:
    if r_grid is None or t_grid is None:
        dr, dt = default_grids()
        r_grid = dr if r_grid is None else r_grid
        t_grid = dt if t_grid is None else t_grid
    r_grid = np.ascontiguousarray(r_grid, dtype=float)
    t_grid = np.ascontiguousarray(t_grid, dtype=float)
    if np.any(t_grid < 0):
        raise ValueError("t must be nonnegative")
    if np.any(r_grid < 0):
        raise ValueError("r must be nonnegative")
    E = _extension_table(w.params, r_grid, t_grid)
    values = np.tensordot(w.coeffs, E, axes=1)
    zero = t_grid == 0
    if np.any(zero):
        values[:, zero] = np.asarray(w(r_grid))[:, None]
    return ExtensionField(r_grid, t_grid, values, w)


def extension_at(w: RadialFunction, r: float, t: float) -> float:
    """W(r, t) at a single point with a rule graded around rho = r."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return float(w(r))
    E = _basis_extension(w.params, [r], t, _graded_rule(r, t, w.params.s))
    return float(w.coeffs @ E[:, 0])


def tail_moment(w: RadialFunction, t: float) -> float:
    """t^N W(0, t), which tends to p_{N,s} int_B w as t grows."""
    if not t > 0:
        raise ValueError("t must be positive")
    return t ** w.params.N * extension_at(w, 0.0, t)


# ---------------------------------------------------------------------------
# nodal domains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NodalReport:
    count: int
    positive: int
    negative: int
    touches_bottom: tuple
    threshold: float


def nodal_domains(field: ExtensionField, sign_eps: float | None = None) -> NodalReport:
    """Connected components (4-neighbour) of {W > 0} and {W < 0} on the grid.

    Values with |W| <= sign_eps * max|W| count as zero. ``touches_bottom``
    records, per component, whether it reaches the row t = 0 inside r < 1.
    """
    eps = field.source.params.sign_eps if sign_eps is None else sign_eps
    W = field.values
    scale = float(np.max(np.abs(W)))
    if not scale > 0:
        raise DegenerateFieldError("extension field is identically zero")
    thr = eps * scale
    structure = ndimage.generate_binary_structure(2, 1)
    bottom = np.zeros_like(W, dtype=bool)
    j0 = np.nonzero(field.t_grid == field.t_grid.min())[0]
    bottom[np.ix_(field.r_grid < 1, j0)] = True
    touches = []
    counts = []
    for mask in (W > thr, W < -thr):
        labels, n = ndimage.label(mask, structure=structure)
        counts.append(n)
        hit = set(np.unique(labels[bottom & mask]).tolist())
        touches.extend(k in hit for k in range(1, n + 1))
    return NodalReport(
        count=counts[0] + counts[1],
        positive=counts[0],
        negative=counts[1],
        touches_bottom=tuple(touches),
        threshold=thr,
    )


def nodal_count(field: ExtensionField, sign_eps: float | None = None) -> int:
    if field.r_grid.max() < 2 or field.t_grid.max() < 2:
        raise ContractError("nodal counting needs r and t to reach at least 2")
    return nodal_domains(field, sign_eps).count


# ---------------------------------------------------------------------------
# consistency with the fractional Laplacian
# ---------------------------------------------------------------------------

_FIT_T = np.geomspace(5e-3, 5e-2, 10)


def extension_consistency(w: RadialFunction, x_probe: float, t_samples=None) -> float:
    """Relative mismatch between the weighted normal derivative of W and a_s (-Lap)^s w.

    W(x, t) - w(x) is fitted on small t by b t^{2s} + c t^2 + d t^{2+2s} + e t^4
    so that -lim t^{1-2s} dW/dt = -2 s b, which is compared with
    a_s (-Lap)^s w(x) from the spectral eigen-relation.
    """
    if not 0 < x_probe < 1:
        raise ValueError("x_probe must be an interior radius")
    t = _FIT_T if t_samples is None else np.asarray(t_samples, dtype=float)
    if t.size < 4 or np.any(t <= 0):
        raise ContractError("need at least 4 positive t samples for the fit")
    p = w.params
    s = p.s
    y = np.array([extension_at(w, x_probe, tk) for tk in t]) - w(x_probe)
    cols = [t ** (2 * s), t**2, t ** (2 + 2 * s), t**4]
    X = np.column_stack(cols)
    # scale columns so the least-squares problem is well conditioned
    norms = np.linalg.norm(X, axis=0)
    coef, *_ = np.linalg.lstsq(X / norms, y, rcond=None)
    b = coef[0] / norms[0]
    target = frac_constants(p.N, s).a_s * float(w.frac_laplacian(x_probe))
    return float(abs(-2 * s * b - target) / (1 + abs(target)))


def harmonic_residual(field: ExtensionField, r_window=(0.1, 0.7), t_window=(0.1, 0.7)) -> float:
    """Max relative residual of div(t^{1-2s} grad W) = 0 on an interior window.

    Uses the conservative 5-point stencil for
    r^{1-N} d_r(r^{N-1} t^{1-2s} d_r W) + d_t(t^{1-2s} d_t W) with uniform spacing;
    each residual is divided by the sum of the magnitudes of its flux terms.
    """
    p = field.source.params
    N, s = p.N, p.s
    r, t, W = field.r_grid, field.t_grid, field.values
    hr = np.diff(r)
    ht = np.diff(t)
    if not (np.allclose(hr, hr[0]) and np.allclose(ht, ht[0])):
        raise ValueError("harmonic_residual needs uniform grids")
    hr, ht = hr[0], ht[0]
    i = np.nonzero((r >= r_window[0]) & (r <= r_window[1]))[0]
    j = np.nonzero((t >= t_window[0]) & (t <= t_window[1]))[0]
    i = i[(i > 0) & (i < r.size - 1)]
    j = j[(j > 0) & (j < t.size - 1)]
    I, J = np.meshgrid(i, j, indexing="ij")
    rc, tc = r[I], t[J]
    rp, rm = rc + hr / 2, rc - hr / 2
    tp, tm = tc + ht / 2, tc - ht / 2
    wt = tc ** (1 - 2 * s)
    fr_p = rp ** (N - 1) * (W[I + 1, J] - W[I, J])
    fr_m = rm ** (N - 1) * (W[I, J] - W[I - 1, J])
    ft_p = tp ** (1 - 2 * s) * (W[I, J + 1] - W[I, J])
    ft_m = tm ** (1 - 2 * s) * (W[I, J] - W[I, J - 1])
    radial = wt * (fr_p - fr_m) / (rc ** (N - 1) * hr**2)
    vertical = (ft_p - ft_m) / ht**2
    scale = wt * (np.abs(fr_p) + np.abs(fr_m)) / (rc ** (N - 1) * hr**2) + (np.abs(ft_p) + np.abs(ft_m)) / ht**2
    return float(np.max(np.abs(radial + vertical) / scale))
