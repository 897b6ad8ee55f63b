"""Radial Dirichlet eigenpairs of (-Lap)^s + V and their qualitative shape."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg

from .discretization import Params, RadialFunction, assemble, trace_psi
from .potentials import PotentialProfile, zero_potential

__all__ = [
    "EigenSet",
    "QualitativeReport",
    "SolverError",
    "DegenerateFunctionError",
    "solve",
    "sign_change_count",
    "sign_pattern",
    "qualitative_report",
]


class SolverError(RuntimeError):
    pass


class DegenerateFunctionError(ValueError):
    pass


@dataclass
class EigenSet:
    """Ascending Galerkin eigenvalues with L^2(B)-normalised eigenfunctions.

    Sign convention: ``w_1 > 0`` and ``w_k(0) > 0`` for k >= 2.
    """

    sigmas: np.ndarray
    functions: list
    potential: PotentialProfile
    params: Params
    form_matrix: np.ndarray
    mass: np.ndarray

    def rayleigh(self, k: int) -> float:
        c = self.functions[k].coeffs
        return float(c @ self.form_matrix @ c / (c @ self.mass @ c))

    def __len__(self):
        return len(self.sigmas)


def solve(V: PotentialProfile | None, k_max: int, params: Params) -> EigenSet:
    """Lowest ``k_max`` radial eigenpairs from the pencil (A + P) c = sigma M c.

    The eigenvalues are Galerkin (min-max) upper bounds of the true radial
    eigenvalues on the span of the first ``n_basis`` basis functions.
    """
    if k_max > params.n_basis:
        raise ValueError(f"k_max={k_max} exceeds n_basis={params.n_basis}")
    V = V if V is not None else zero_potential()
    op = assemble(params, V)
    H = op.form_matrix()
    M = op.mass
    try:
        scipy.linalg.cholesky(M, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SolverError("mass matrix is not positive definite") from exc
    sig, vec = scipy.linalg.eigh(H, M, subset_by_index=[0, k_max - 1])
    funcs = []
    for k in range(k_max):
        c = vec[:, k]
        f = RadialFunction(c, params)
        if k == 0:
            ref = f.integral()
        else:
            ref = f(0.0)
        if ref < 0:
            f = -f
        funcs.append(f)
    return EigenSet(sigmas=np.asarray(sig), functions=funcs, potential=V, params=params, form_matrix=H, mass=M)


def sign_pattern(values, eps: float) -> np.ndarray:
    """-1/0/+1 with entries below ``eps * max|values|`` treated as zero."""
    values = np.asarray(values, dtype=float)
    scale = np.max(np.abs(values)) if values.size else 0.0
    if scale == 0 or not np.isfinite(scale):
        raise DegenerateFunctionError("function is identically zero on the grid")
    sgn = np.sign(values)
    sgn[np.abs(values) <= eps * scale] = 0
    if not np.any(sgn):
        raise DegenerateFunctionError("function is below the sign threshold everywhere")
    return sgn.astype(int)


def _radial_grid(grid_size: int) -> np.ndarray:
    # cell midpoints of a uniform grid on (0, 1)
    return (np.arange(grid_size) + 0.5) / grid_size


def sign_change_count(w: RadialFunction, grid_size: int = 1024, eps: float | None = None) -> int:
    """Number of strict sign alternations of ``w`` on a uniform radial grid."""
    if grid_size < 256:
        raise ValueError("grid_size must be >= 256")
    eps = w.params.sign_eps if eps is None else eps
    sgn = sign_pattern(w(_radial_grid(grid_size)), eps)
    nz = sgn[sgn != 0]
    return int(np.count_nonzero(nz[1:] != nz[:-1]))


@dataclass
class QualitativeReport:
    simplicity_gap: float
    sign_changes_w2: int
    r0: float | None
    r0_error: float
    w2_monotone_on_core: bool
    hopf_value: float
    integral_sign_product: float
    sigma1: float
    sigma2: float
    sigma3: float

    def theorem_flags(self) -> dict:
        return {
            "simple": self.simplicity_gap > 1e-6,
            "one_sign_change": self.sign_changes_w2 == 1,
            "monotone_core": self.w2_monotone_on_core,
            "hopf_negative": self.hopf_value < 0,
            "integral_sign_negative": self.integral_sign_product < 0,
        }

    def as_dict(self) -> dict:
        return asdict(self)


def qualitative_report(es: EigenSet, grid_size: int = 1024) -> QualitativeReport:
    if len(es) < 3:
        raise ValueError("need at least three eigenpairs")
    eps = es.params.sign_eps
    w2 = es.functions[1]
    s1, s2, s3 = (float(x) for x in es.sigmas[:3])
    gap = (s3 - s2) / (1 + abs(s2))

    r = _radial_grid(grid_size)
    vals = w2(r)
    sgn = sign_pattern(vals, eps)
    nz_idx = np.nonzero(sgn)[0]
    flips = nz_idx[1:][sgn[nz_idx[1:]] != sgn[nz_idx[:-1]]]
    count = len(flips)
    h = 1.0 / grid_size
    r0 = None
    monotone = False
    if count == 1:
        j = flips[0]
        prev = nz_idx[np.searchsorted(nz_idx, j) - 1]
        r0 = 0.5 * (r[prev] + r[j])
        core = vals[r < r0]
        tol = eps * np.max(np.abs(vals))
        monotone = bool(np.all(np.diff(core) <= tol))
    product = float(w2(0.0) * w2.integral())
    return QualitativeReport(
        simplicity_gap=float(gap),
        sign_changes_w2=int(count),
        r0=None if r0 is None else float(r0),
        r0_error=h,
        w2_monotone_on_core=monotone,
        hopf_value=trace_psi(w2),
        integral_sign_product=product,
        sigma1=s1,
        sigma2=s2,
        sigma3=s3,
    )


def classical_radial_eigenvalue(N: int, k: int) -> float:
    """k-th radial Dirichlet eigenvalue of -Lap on the unit ball: j_{N/2-1,k}^2."""
    from .specfun import bessel_j_zero

    return bessel_j_zero(N / 2 - 1, k) ** 2
