import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sci_integrate

from panelband.curves import (
    CosineCoeffs,
    Grid,
    PanelSeries,
    cosine_coeffs,
    integrate,
    make_grid,
    partial_sum_reconstruct,
    sample_mean_sd,
    standardized_sum,
    sup_abs_max,
    trapezoid_weights,
)
from panelband.errors import InvalidArgumentError


class TestGrid:
    def test_endpoints(self):
        assert make_grid(2).points.tolist() == [0.0, 1.0]
        assert make_grid(3).points.tolist() == [0.0, 0.5, 1.0]

    def test_spacing_101(self):
        g = make_grid(101)
        assert g.count == 101
        assert g.spacing == pytest.approx(0.01)
        assert g.points[0] == 0.0 and g.points[-1] == 1.0

    @pytest.mark.parametrize("G", [0, 1, -3])
    def test_rejects_small(self, G):
        with pytest.raises(InvalidArgumentError):
            make_grid(G)

    def test_points_read_only(self):
        g = make_grid(5)
        with pytest.raises(ValueError):
            g.points[0] = 3.0

    def test_equality_and_hash(self):
        assert make_grid(7) == make_grid(7)
        assert hash(make_grid(7)) == hash(make_grid(7))
        assert make_grid(7) != make_grid(8)


class TestQuadrature:
    def test_weights_sum_to_one(self):
        for G in (2, 3, 11, 101):
            assert trapezoid_weights(make_grid(G)).sum() == pytest.approx(1.0, abs=1e-14)

    def test_linear_exact(self):
        grid = make_grid(11)
        assert integrate(3 * grid.points + 1, grid) == pytest.approx(2.5, abs=1e-14)


class TestCosineCoeffs:
    def test_constant(self):
        grid = make_grid(101)
        a = cosine_coeffs(np.full(101, 3.0), grid, 6).a
        assert a[0] == pytest.approx(3.0, abs=1e-13)
        np.testing.assert_allclose(a[1:], 0.0, atol=1e-12)

    def test_cos_self_coefficient(self):
        grid = make_grid(1001)
        a = cosine_coeffs(np.cos(np.pi * grid.points), grid, 3).a
        np.testing.assert_allclose(a, [0.0, 1.0, 0.0, 0.0], atol=1e-4)

    def test_u_squared_closed_form(self):
        # 2 * int_0^1 u^2 cos(k pi u) du = 4 (-1)^k / (k pi)^2; checked against quad first
        ks = np.arange(1, 5)
        closed = 4.0 * (-1.0) ** ks / (ks * np.pi) ** 2
        quad = [2 * sci_integrate.quad(lambda u, k=k: u * u * math.cos(k * math.pi * u), 0, 1)[0] for k in ks]
        np.testing.assert_allclose(quad, closed, atol=1e-12)

        grid = make_grid(1001)
        a = cosine_coeffs(grid.points**2, grid, 4).a
        assert abs(a[0] - 1.0 / 3.0) < 1e-4
        np.testing.assert_allclose(a[1:], closed, atol=1e-4)

    def test_batched_leading_axes(self, rng):
        grid = make_grid(41)
        x = rng.standard_normal((3, 2, 41))
        batch = cosine_coeffs(x, grid, 5).a
        assert batch.shape == (3, 2, 6)
        np.testing.assert_allclose(batch[1, 1], cosine_coeffs(x[1, 1], grid, 5).a, rtol=1e-13)

    def test_needs_enough_points(self):
        with pytest.raises(InvalidArgumentError):
            cosine_coeffs(np.zeros(5), make_grid(5), 4)

    @settings(max_examples=30, deadline=None)
    @given(
        c1=st.floats(-5, 5), c2=st.floats(-5, 5),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_linearity(self, c1, c2, seed):
        grid = make_grid(33)
        r = np.random.default_rng(seed)
        x, y = r.standard_normal(33), r.standard_normal(33)
        lhs = cosine_coeffs(c1 * x + c2 * y, grid, 8).a
        rhs = c1 * cosine_coeffs(x, grid, 8).a + c2 * cosine_coeffs(y, grid, 8).a
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)

    def test_orthogonality(self):
        grid = make_grid(2001)
        for k in (1, 2, 5):
            a = cosine_coeffs(np.cos(k * np.pi * grid.points), grid, 8).a
            expected = np.zeros(9)
            expected[k] = 1.0
            np.testing.assert_allclose(a, expected, atol=1e-5)


class TestReconstruct:
    def test_constant(self):
        np.testing.assert_allclose(partial_sum_reconstruct(CosineCoeffs([5.0]), make_grid(9)), 5.0)

    def test_direct(self):
        grid = make_grid(9)
        curve = partial_sum_reconstruct(CosineCoeffs([1.0, 2.0]), grid)
        np.testing.assert_allclose(curve, 1 + 2 * np.cos(np.pi * grid.points), atol=1e-14)

    def test_round_trip_u_squared(self):
        grid = make_grid(1001)
        x = grid.points**2
        errs = [np.max(np.abs(partial_sum_reconstruct(cosine_coeffs(x, grid, K), grid) - x)) for K in (5, 10, 25, 50)]
        assert all(b < a for a, b in zip(errs, errs[1:]))
        # the sup sits at u = 1, where the dropped terms 4 / (k pi)^2 all share a sign
        k = np.arange(51, 10**7)
        tail = np.sum(4.0 / (k * np.pi) ** 2)
        assert errs[-1] == pytest.approx(tail, abs=5e-5)
        resid = partial_sum_reconstruct(cosine_coeffs(x, grid, 50), grid) - x
        assert math.sqrt(integrate(resid**2, grid)) < 1e-3
        assert np.max(np.abs(resid[50:951])) < 1e-3


class TestMoments:
    def test_single_curve(self, rng):
        x = rng.standard_normal((1, 2, 7))
        np.testing.assert_array_equal(standardized_sum(PanelSeries(x)), x[0])

    def test_identical_curves(self, rng):
        x = rng.standard_normal((2, 7))
        panel = PanelSeries(np.broadcast_to(x, (9, 2, 7)).copy())
        np.testing.assert_allclose(standardized_sum(panel), 3.0 * x, rtol=1e-14)

    def test_cancellation(self, rng):
        x = rng.standard_normal((2, 7))
        np.testing.assert_allclose(standardized_sum(PanelSeries(np.stack([x, -x]))), 0.0, atol=1e-15)

    def test_constant_panel(self):
        mean, sd = sample_mean_sd(PanelSeries(np.full((6, 2, 5), 1.25)))
        np.testing.assert_allclose(mean, 1.25)
        np.testing.assert_allclose(sd, 0.0, atol=1e-15)

    def test_two_points(self):
        x = np.zeros((2, 1, 3))
        x[0, 0, 1], x[1, 0, 1] = 2.5, -2.5
        mean, sd = sample_mean_sd(PanelSeries(x))
        assert mean[0, 1] == 0.0
        assert sd[0, 1] == pytest.approx(2.5)

    def test_two_pass_oracle(self, rng):
        x = rng.standard_normal((50, 3, 11)) * 4 + 100
        mean, sd = sample_mean_sd(PanelSeries(x))
        for j in range(3):
            for g in range(11):
                col = [float(v) for v in x[:, j, g]]
                mu = math.fsum(col) / len(col)
                var = math.fsum((v - mu) ** 2 for v in col) / len(col)
                assert mean[j, g] == pytest.approx(mu, rel=1e-12)
                assert sd[j, g] == pytest.approx(math.sqrt(var), rel=1e-12)

    def test_needs_two_curves(self):
        with pytest.raises(InvalidArgumentError):
            sample_mean_sd(PanelSeries(np.zeros((1, 1, 3))))


def test_sup_abs_max():
    assert sup_abs_max(np.zeros((2, 3))) == 0.0
    m = np.zeros((2, 3))
    m[1, 2] = -7
    assert sup_abs_max(m) == 7.0
    assert sup_abs_max([[1, -3], [2, 0.5]]) == 3.0


class TestPanelSeries:
    def test_shape_checks(self):
        with pytest.raises(InvalidArgumentError):
            PanelSeries(np.zeros((3, 4)))
        with pytest.raises(InvalidArgumentError):
            PanelSeries(np.zeros((3, 2, 5)), make_grid(6))

    def test_non_finite(self):
        x = np.zeros((3, 2, 5))
        x[1, 1, 1] = np.nan
        with pytest.raises(InvalidArgumentError):
            PanelSeries(x)

    def test_scaled_and_add(self, small_panel):
        doubled = small_panel + small_panel
        np.testing.assert_allclose(doubled.data, small_panel.scaled(2.0).data)
        assert isinstance(small_panel.grid, Grid)
