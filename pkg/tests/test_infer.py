import math

import numpy as np
import pytest

from panelband.boot import BootstrapConfig
from panelband.curves import PanelSeries, make_grid
from panelband.errors import InvalidArgumentError
from panelband.infer import (
    band_contains,
    center_within_curve,
    fit_harmonics,
    jscb,
    pair_indices,
    parallelism_statistic,
    parallelism_test,
)
from panelband.simgen import SimConfig, simulate_panel


@pytest.fixture(scope="module")
def par_panel():
    return simulate_panel(SimConfig(n=120, r=4, G=41, seed=8))


class TestJscb:
    def test_width_identity(self, par_panel):
        bands = jscb(par_panel, BootstrapConfig(m=4, B=300))
        sd = par_panel.data.std(axis=0)
        np.testing.assert_allclose(
            bands.upper - bands.lower, 2 * bands.quantile * sd / math.sqrt(par_panel.n), rtol=1e-12
        )

    def test_center_strictly_inside(self, par_panel):
        bands = jscb(par_panel, BootstrapConfig(m=4, B=100))
        assert np.all(bands.lower < bands.center) and np.all(bands.center < bands.upper)

    def test_alpha_nesting(self, par_panel):
        wide = jscb(par_panel, BootstrapConfig(m=4, B=400, alpha=0.01))
        narrow = jscb(par_panel, BootstrapConfig(m=4, B=400, alpha=0.2))
        assert np.all(wide.lower <= narrow.lower) and np.all(narrow.upper <= wide.upper)

    def test_mv_used_when_m_missing(self, par_panel):
        bands = jscb(par_panel, BootstrapConfig(B=50))
        assert 2 <= bands.m_used <= 18
        assert bands.B_used == 50 and bands.replicates.shape == (50,)

    def test_rescaling_equivariant(self, par_panel):
        cfg = BootstrapConfig(m=3, B=100)
        a = jscb(par_panel, cfg)
        b = jscb(par_panel.scaled(7.0), cfg)
        assert b.quantile == pytest.approx(a.quantile, rel=1e-10)
        np.testing.assert_allclose(b.halfwidth, 7 * a.halfwidth, rtol=1e-10)


class TestContains:
    @pytest.fixture
    def bands(self, par_panel):
        return jscb(par_panel, BootstrapConfig(m=4, B=100))

    def test_center(self, bands):
        assert band_contains(bands, bands.center) == (True, [True] * 4)

    def test_single_violation(self, bands):
        cand = bands.center.copy()
        cand[2, 7] = bands.upper[2, 7] + 1e-9
        overall, per = band_contains(bands, cand)
        assert not overall and per == [True, True, False, True]

    def test_closed(self, bands):
        assert band_contains(bands, bands.upper)[0]
        assert band_contains(bands, bands.lower)[0]

    def test_shape(self, bands):
        with pytest.raises(InvalidArgumentError):
            band_contains(bands, np.zeros((3, 41)))


class TestCenterWithin:
    def test_constant(self):
        W = center_within_curve(PanelSeries(np.full((2, 1, 11), 4.0)))
        np.testing.assert_allclose(W, 0.0, atol=1e-14)

    def test_cos_unchanged(self):
        grid = make_grid(101)
        x = np.cos(np.pi * grid.points)[None, None, :]
        np.testing.assert_allclose(center_within_curve(PanelSeries(x, grid)), x, atol=1e-6)

    def test_identity_line(self):
        grid = make_grid(101)
        x = grid.points[None, None, :]
        np.testing.assert_allclose(center_within_curve(PanelSeries(x, grid))[0, 0], grid.points - 0.5, atol=1e-6)


class TestStatistic:
    def test_shifted_copies(self, par_panel):
        x = par_panel.data[:, :1]
        panel = PanelSeries(np.concatenate([x, x + 5.0], axis=1), par_panel.grid)
        T, pairwise, _ = parallelism_statistic(panel)
        assert T == 0.0
        assert pairwise[0, 1] == 0.0

    def test_hand_computed(self):
        # grid {0, 1/2, 1}; trapezoid weights (1/4, 1/2, 1/4)
        x = np.array(
            [
                [[0.0, 1.0, 0.0], [0.0, 0.0, 0.0]],
                [[1.0, 1.0, 1.0], [0.0, 2.0, 0.0]],
            ]
        )
        # W_1 = (+-1/2) pattern minus 0; W_2 = 0 minus (+-1) pattern
        # D = (-1/2, 1/2, -1/2), (1, -1, 1); S = (1/2, -1/2, 1/2)/sqrt2; sd = 3/4
        T, pairwise, V = parallelism_statistic(PanelSeries(x))
        assert T == pytest.approx(math.sqrt(2) / 3, rel=1e-14)
        np.testing.assert_allclose(V, [[0.75, 0.75, 0.75]], rtol=1e-14)
        assert np.isnan(pairwise[0, 0]) and pairwise[0, 1] == pairwise[1, 0]

    def test_shift_invariance(self, par_panel, rng):
        shifted = PanelSeries(par_panel.data + rng.normal(size=(1, 4, 1)) * 10, par_panel.grid)
        a, pa, _ = parallelism_statistic(par_panel)
        b, pb, _ = parallelism_statistic(shifted)
        assert b == pytest.approx(a, abs=1e-12 * max(1.0, a))
        np.testing.assert_allclose(pb, pa, rtol=1e-9)

    def test_scale_invariance(self, par_panel):
        a = parallelism_statistic(par_panel)[0]
        assert parallelism_statistic(par_panel.scaled(7.0))[0] == pytest.approx(a, rel=1e-10)

    def test_needs_two_panels(self):
        with pytest.raises(InvalidArgumentError):
            parallelism_statistic(PanelSeries(np.zeros((5, 1, 3))))

    def test_pairs(self):
        assert pair_indices(3) == [(0, 1), (0, 2), (1, 2)]


class TestParallelismTest:
    def test_consistency(self, par_panel):
        res = parallelism_test(par_panel, BootstrapConfig(m=4, B=200, seed=2))
        assert res.statistic == np.nanmax(res.pairwise)
        srt = np.sort(res.replicates)
        assert res.critical_value == srt[189]
        assert res.reject == (res.statistic > res.critical_value)
        for j, k in pair_indices(4):
            count = np.sum(res.replicates >= res.pairwise[j, k])
            assert res.pairwise_pvalues[j, k] == pytest.approx((1 + count) / 201)
        # the largest pairwise statistic has the smallest p-value
        j, k = np.unravel_index(np.nanargmax(res.pairwise), res.pairwise.shape)
        assert res.pairwise_pvalues[j, k] == np.nanmin(res.pairwise_pvalues)

    def test_b1(self, par_panel):
        res = parallelism_test(par_panel, BootstrapConfig(m=4, B=1))
        assert res.critical_value == res.replicates[0]
        assert isinstance(res.reject, bool)

    def test_alpha_zero_uses_max(self, par_panel):
        res = parallelism_test(par_panel, BootstrapConfig(m=4, B=100, alpha=0.0))
        assert res.critical_value == res.replicates.max()

    def test_shifted_copies_never_reject(self, par_panel):
        x = par_panel.data[:, :1]
        panel = PanelSeries(np.concatenate([x, x - 2.0, x + 5.0], axis=1), par_panel.grid)
        res = parallelism_test(panel, BootstrapConfig(m=3, B=50))
        assert res.statistic == 0.0 and not res.reject

    def test_scale_invariance(self, par_panel):
        cfg = BootstrapConfig(m=4, B=200, seed=6)
        a = parallelism_test(par_panel, cfg)
        b = parallelism_test(par_panel.scaled(7.0), cfg)
        assert abs(b.statistic - a.statistic) <= 1e-10 * a.statistic
        assert abs(b.critical_value - a.critical_value) <= 1e-10 * a.critical_value
        assert a.reject == b.reject

    def test_mv_on_pairs(self, par_panel):
        res = parallelism_test(par_panel, BootstrapConfig(B=20))
        assert res.m_used >= 1

    def test_detects_nonparallel(self, par_panel):
        tilt = np.zeros((4, 41))
        tilt[0] = 2.0 * par_panel.grid.points
        panel = PanelSeries(par_panel.data + tilt, par_panel.grid)
        res = parallelism_test(panel, BootstrapConfig(m=4, B=200))
        assert res.reject
        assert res.pairwise_pvalues[0, 1] < 0.05 and res.pairwise_pvalues[1, 2] > 0.05

    def test_to_dict(self, par_panel):
        d = parallelism_test(par_panel, BootstrapConfig(m=4, B=10)).to_dict()
        assert {"statistic", "critical_value", "reject", "m", "B"} <= set(d)


def test_fit_harmonics_reproduces_low_order():
    grid = make_grid(51)
    u = grid.points
    y = 1 + np.cos(2 * np.pi * u) - 0.5 * np.sin(4 * np.pi * u)
    np.testing.assert_allclose(fit_harmonics(y, grid)[0], y, atol=1e-12)
