import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fraclab.kernel import ContractError
from fraclab.potentials import constant_potential, parse_potential
from fraclab.rearrange import (
    GridFunction,
    almgren_lieb_check,
    cross_term_check,
    equal_measure_edges,
    hardy_littlewood_check,
    profile,
    random_profile,
    random_split_profile,
    schwarz,
)
from fraclab.specfun import ball_volume

M = 60


def _grid(values, N, edges=None):
    e = equal_measure_edges(len(values), N) if edges is None else edges
    return GridFunction(e, np.asarray(values, dtype=float), N)


nonneg = arrays(np.float64, M, elements=st.floats(0, 5, allow_subnormal=False))


class TestGridFunction:
    @pytest.mark.parametrize("N", [1, 2, 3])
    def test_total_measure(self, N):
        g = _grid(np.zeros(M), N)
        assert g.measure_weights.sum() == pytest.approx(ball_volume(N), rel=1e-12)
        g2 = _grid(np.zeros(M), N, edges=np.linspace(0, 1, M + 1))
        assert g2.measure_weights.sum() == pytest.approx(ball_volume(N), rel=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            GridFunction(np.array([0.0, 0.5, 1.0]), np.zeros(3), 2)
        with pytest.raises(ValueError):
            GridFunction(np.array([0.1, 0.5, 1.0]), np.zeros(2), 2)

    def test_sample_and_parts(self):
        g = GridFunction.sample(lambda r: np.cos(4 * r), 2, M=100)
        assert np.all(g.positive_part().values >= 0)
        assert np.all(g.negative_part().values >= 0)
        np.testing.assert_allclose(g.positive_part().values - g.negative_part().values, g.values)


class TestSchwarz:
    def test_fixed_point(self):
        g = _grid(np.linspace(3, 0, M), 2)
        np.testing.assert_array_equal(schwarz(g).values, g.values)

    @pytest.mark.parametrize("N", [1, 2, 3])
    def test_annulus_indicator_becomes_ball(self, N):
        vals = np.zeros(M)
        vals[20:35] = 1.0
        out = schwarz(_grid(vals, N))
        assert np.all(out.values[:15] == 1) and np.all(out.values[15:] == 0)
        assert out.support_measure() == pytest.approx(_grid(vals, N).support_measure(), rel=1e-12)

    def test_rejects_negative(self):
        with pytest.raises(ContractError):
            schwarz(_grid(-np.ones(M), 2))

    @settings(max_examples=60, deadline=None)
    @given(vals=nonneg, N=st.integers(1, 3), uniform=st.booleans())
    def test_equimeasurable(self, vals, N, uniform):
        edges = np.linspace(0, 1, M + 1) if uniform else None
        g = _grid(vals, N, edges)
        out = schwarz(g)
        assert np.all(np.diff(out.values) <= 0)
        for q in (1, 2, 4):
            assert out.lq_norm(q) == pytest.approx(g.lq_norm(q), rel=1e-10, abs=1e-300)
        cell = g.measure_weights.max()
        assert abs(out.support_measure() - g.support_measure()) <= cell + 1e-12
        for level in np.linspace(0, vals.max(), 50):
            assert abs(out.distribution(level) - g.distribution(level)) <= 1e-12 * ball_volume(N)
        # support sits in the ball of the same measure
        if g.support_measure() > 0:
            r_star = (g.support_measure() / ball_volume(N)) ** (1 / N)
            last = out.edges[np.nonzero(out.values)[0].max() + 1]
            assert last <= r_star + 1e-12


class TestAlmgrenLieb:
    def test_decreasing_profile_is_equality(self):
        g = GridFunction.sample(lambda r: 1 - r**2, 2, M=80)
        res = almgren_lieb_check(g, 2, 0.5)
        assert res.ok
        assert res.lhs == pytest.approx(res.rhs, rel=1e-10)

    @pytest.mark.parametrize("N,s", [(1, 0.25), (2, 0.5), (3, 0.75)])
    def test_annulus_bump_strict(self, N, s):
        g = GridFunction.sample(lambda r: np.exp(-80 * (r - 0.7) ** 2), N, M=80)
        res = almgren_lieb_check(g, N, s)
        assert res.ok and res.lhs < 0.99 * res.rhs

    @pytest.mark.parametrize("seed", range(4))
    def test_random_profiles(self, seed):
        rng = np.random.default_rng(seed)
        N, s = 1 + seed % 3, (0.25, 0.5, 0.75)[seed % 3]
        g = GridFunction.sample(random_profile(rng), N)
        assert almgren_lieb_check(g, N, s).ok

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            almgren_lieb_check(_grid(np.ones(M), 2), 3, 0.5)


class TestHardyLittlewood:
    def test_constant_potential_equality(self):
        g = GridFunction.sample(lambda r: np.sin(7 * r) ** 2, 2, M=100)
        res = hardy_littlewood_check(g, constant_potential(2.0), 5.0)
        assert res.ok
        assert abs(res.lhs - res.rhs) <= 1e-12 * (1 + abs(res.rhs))

    def test_strict_for_annulus(self):
        g = GridFunction.sample(lambda r: np.exp(-80 * (r - 0.7) ** 2), 2, M=100)
        res = hardy_littlewood_check(g, parse_potential("r^2"), 1.0)
        assert res.ok and res.lhs > res.rhs + 1e-3

    def test_uncertified_potential(self):
        with pytest.raises(ContractError):
            hardy_littlewood_check(_grid(np.ones(M), 2), parse_potential("-r^2"), 1.0)

    @settings(max_examples=60, deadline=None)
    @given(
        vals=arrays(np.float64, M, elements=st.floats(-3, 3, allow_subnormal=False)),
        steps=st.lists(st.tuples(st.floats(0.0, 1.0), st.floats(0, 10)), min_size=1, max_size=4),
        sigma=st.floats(-5, 20),
        N=st.integers(1, 3),
    )
    def test_random_step_potentials(self, vals, steps, sigma, N):
        text = " + ".join(f"{h!r}*step(r-{a!r})" for a, h in steps)
        assert hardy_littlewood_check(_grid(vals, N), parse_potential(text), sigma).ok


class TestCrossTerm:
    def test_already_decreasing_is_equality(self):
        edges = equal_measure_edges(100, 2)
        mid = 0.5 * (edges[1:] + edges[:-1])
        r0 = edges[50]
        vals = np.where(mid < r0, r0 - mid, -(mid - r0) * (1 - mid))
        res = cross_term_check(GridFunction(edges, vals, 2), 2, 0.5)
        assert res.ok and res.lhs == pytest.approx(res.rhs, rel=1e-12)

    def test_bump_near_interface_strict(self):
        edges = equal_measure_edges(100, 2)
        mid = 0.5 * (edges[1:] + edges[:-1])
        r0 = edges[50]
        inner = np.exp(-300 * (mid - 0.95 * r0) ** 2)
        vals = np.where(mid < r0, inner, -(mid - r0) * (1 - mid))
        res = cross_term_check(GridFunction(edges, vals, 2), 2, 0.5)
        assert res.ok and res.lhs < res.rhs - 10 * res.tolerance

    @pytest.mark.parametrize("seed", range(3))
    def test_random_split(self, seed):
        rng = np.random.default_rng(100 + seed)
        N = 1 + seed
        assert cross_term_check(random_split_profile(rng, N), N, 0.5).ok

    def test_overlap_contract(self):
        vals = np.ones(M)
        vals[::7] = -1
        with pytest.raises(ContractError):
            cross_term_check(_grid(vals, 2), 2, 0.5)
        with pytest.raises(ContractError):
            cross_term_check(_grid(np.ones(M), 2), 2, 0.5)

    def test_needs_equal_measure_grid(self):
        e = np.linspace(0, 1, M + 1)
        vals = np.where(np.arange(M) < 30, np.arange(M) % 5 + 1.0, -1.0)
        with pytest.raises(ContractError):
            cross_term_check(GridFunction(e, vals, 2), 2, 0.5)


def test_profile_interpolates_nodes():
    g = GridFunction.sample(lambda r: 1 + r, 3, M=40)
    f = profile(g)
    np.testing.assert_allclose(f(g.radii), g.values, rtol=1e-12)
    assert f(1.0) == 0.0 and f(1.5) == 0.0
    h = profile(g, lo=0.5, hi=0.8)
    assert h(0.3) == 0.0 and h(0.9) == 0.0
