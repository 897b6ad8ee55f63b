import types

import numpy as np
import pytest

from fraclab.discretization import Params, RadialFunction, poly_matrix
from fraclab.eigensolver import (
    DegenerateFunctionError,
    SolverError,
    classical_radial_eigenvalue,
    qualitative_report,
    sign_change_count,
    sign_pattern,
    solve,
)
from fraclab.potentials import parse_potential, zero_potential
from fraclab.specfun import bessel_j_zero
from fraclab.verify import NS_GRID, POTENTIAL_FAMILY

NB = 32


@pytest.fixture(scope="module")
def family_reports():
    out = {}
    for N, s in NS_GRID:
        for expr in POTENTIAL_FAMILY:
            out[N, s, expr] = qualitative_report(solve(parse_potential(expr), 3, Params(N, s, NB)))
    return out


class TestSolve:
    def test_interval_half_laplacian(self):
        es = solve(zero_potential(), 2, Params(1, 0.5, 40))
        assert es.sigmas[0] == pytest.approx(1.1578, abs=0.005)
        assert es.sigmas[1] == pytest.approx(4.317, abs=0.02)
        # consistent with the asymptotic law n pi / 2 - pi / 8 for the even modes n = 1, 3
        assert abs(es.sigmas[1] - (3 * np.pi / 2 - np.pi / 8)) < 0.01

    def test_constant_shift(self):
        p = Params(2, 0.4, 24)
        base = solve(parse_potential("10*r^2"), 5, p).sigmas
        shifted = solve(parse_potential("10*r^2 + 3.25"), 5, p).sigmas
        np.testing.assert_allclose(shifted, base + 3.25, atol=1e-10, rtol=0)

    @pytest.mark.parametrize("N,s", [(1, 0.3), (3, 0.7)])
    def test_galerkin_upper_bounds_decrease(self, N, s):
        V = parse_potential("25*r^4")
        coarse = solve(V, 3, Params(N, s, 20)).sigmas
        fine = solve(V, 3, Params(N, s, 40)).sigmas
        assert np.all(coarse >= fine - 1e-12)

    def test_rayleigh_and_orthonormality(self):
        es = solve(parse_potential("r^2 + step(r-0.4)"), 6, Params(3, 0.25, NB))
        G = np.array([[f.inner(g) for g in es.functions] for f in es.functions])
        assert np.max(np.abs(G - np.eye(6))) <= 1e-8
        for k in range(6):
            assert es.rayleigh(k) == pytest.approx(es.sigmas[k], rel=1e-8)

    def test_sign_convention(self):
        es = solve(zero_potential(), 3, Params(2, 0.5, NB))
        w1, w2 = es.functions[:2]
        assert np.all(w1((np.arange(1000) + 0.5) / 1000) > 0)
        assert w2(0.0) > 0
        assert len(es) == 3

    def test_k_max_contract(self):
        with pytest.raises(ValueError):
            solve(None, 9, Params(1, 0.5, 8))

    def test_indefinite_mass(self, monkeypatch):
        n = 4
        fake = types.SimpleNamespace(form_matrix=lambda: np.eye(n), mass=-np.eye(n))
        monkeypatch.setattr("fraclab.eigensolver.assemble", lambda params, V: fake)
        with pytest.raises(SolverError):
            solve(None, 2, Params(1, 0.5, n))


class TestSignChanges:
    def test_first_and_second(self):
        es = solve(zero_potential(), 2, Params(2, 0.25, NB))
        assert sign_change_count(es.functions[0]) == 0
        assert sign_change_count(es.functions[1]) == 1

    def test_two_changes_against_polynomial_roots(self):
        p = Params(2, 0.5, 3)
        # pick c so that the polynomial factor is (z + 0.5)(z - 0.4) in z = 2r^2 - 1
        z = np.array([-0.9, 0.0, 0.8])
        c = np.linalg.solve(poly_matrix(p, np.sqrt((1 + z) / 2)).T, (z + 0.5) * (z - 0.4))
        u = RadialFunction(c, p)
        assert sign_change_count(u, 1024) == 2
        grid = (np.arange(1024) + 0.5) / 1024
        flips = grid[1:][np.diff(np.sign(u(grid))) != 0]
        roots = np.sqrt((1 + np.array([-0.5, 0.4])) / 2)
        np.testing.assert_allclose(flips, roots, atol=1 / 1024)

    def test_grid_minimum(self):
        u = RadialFunction(np.ones(3), Params(1, 0.5, 3))
        with pytest.raises(ValueError):
            sign_change_count(u, 128)

    def test_degenerate(self):
        with pytest.raises(DegenerateFunctionError):
            sign_change_count(RadialFunction(np.zeros(3), Params(1, 0.5, 3)))
        with pytest.raises(DegenerateFunctionError):
            sign_pattern([0.0, 0.0], 1e-8)

    def test_threshold_suppresses_noise(self):
        vals = np.array([1.0, 1e-12, -1e-12, 1e-12, -0.5])
        assert list(sign_pattern(vals, 1e-8)) == [1, 0, 0, 0, -1]


class TestQualitative:
    def test_family_flags(self, family_reports):
        for key, rep in family_reports.items():
            flags = rep.theorem_flags()
            assert all(flags.values()), (key, flags)
            assert rep.r0 is not None and 0 < rep.r0 < 1
            assert rep.r0_error == 1 / 1024

    def test_zero_potential_gap(self, family_reports):
        for N, s in NS_GRID:
            assert family_reports[N, s, "0"].simplicity_gap > 0.01

    def test_equivalence(self, family_reports):
        for rep in family_reports.values():
            assert (rep.sign_changes_w2 == 1) == (rep.integral_sign_product < 0)

    def test_needs_three_pairs(self):
        with pytest.raises(ValueError):
            qualitative_report(solve(None, 2, Params(1, 0.5, 8)))

    def test_as_dict(self):
        rep = qualitative_report(solve(None, 3, Params(1, 0.5, 16)))
        d = rep.as_dict()
        assert set(d) >= {"simplicity_gap", "sign_changes_w2", "r0", "hopf_value", "integral_sign_product"}


class TestContinuity:
    def test_lipschitz_in_potential_scale(self):
        V = parse_potential("25*r^4")
        ts = np.linspace(0, 1, 20)
        s2 = np.array([solve(V.scaled(t), 2, Params(2, 0.5, NB)).sigmas[1] for t in ts])
        assert np.max(np.abs(np.diff(s2))) <= (ts[1] - ts[0]) * 25.0 + 1e-12
        assert np.all(np.diff(s2) >= 0)

    @pytest.mark.parametrize("N", [1, 2, 3])
    def test_uniform_bound_in_s(self, N):
        bound = bessel_j_zero(N / 2 - 1, 2) ** 2 + 1
        for s in np.arange(1, 10) / 10:
            assert solve(None, 2, Params(N, s, NB)).sigmas[1] <= bound

    def test_classical_reference(self):
        assert classical_radial_eigenvalue(2, 1) == pytest.approx(5.7832, abs=1e-4)
        assert classical_radial_eigenvalue(1, 1) == pytest.approx((np.pi / 2) ** 2)
