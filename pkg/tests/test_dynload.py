import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from voltstab import dynload as dl
from voltstab.dynload import DlLoadParams, LoadState, RegionClass, RootPolicy
from voltstab.errors import DomainError, InvalidNetwork, NoRealPositiveRoot
from voltstab.numerics import bisect_refine, grid_sign_scan_oracle
from voltstab.powerflow import NetworkParams, PowerPoint, voltage_residual

NET = NetworkParams(1.0, 0.02, 0.02)
TABLE2 = DlLoadParams()
UNIT = DlLoadParams(p0=1.0, q0=1.0, tp=1.0, tq=1.0)
EQ_STATE = LoadState(1.00944, 1.09951)

# Reference-load equilibria from an independent 40-digit evaluation.
V_HIGH = 0.961171687744137
V_LOW = 0.000288986236531758


class TestParams:
    def test_table2_defaults(self):
        p = TABLE2
        assert (p.p0, p.q0, p.a, p.b, p.tp, p.tq) == (1.0, 1.0, 0.5625, 3.0, 1.0, 1.0)
        assert p.pt_coeffs == (-0.08, 0.96, 0.12)
        assert p.qt_coeffs == (3.255, -3.49, 1.155)

    @pytest.mark.parametrize("kw", [{"tp": 0.0}, {"tq": -1.0}, {"p0": float("inf")}])
    def test_rejects_invalid(self, kw):
        with pytest.raises(ValueError):
            DlLoadParams(**kw)


class TestCharacteristics:
    def test_ps_unit_voltage(self):
        assert dl.ps(TABLE2, 1.0) == 1.0

    def test_ps_at_equilibrium(self):
        assert dl.ps(TABLE2, 0.9612) == pytest.approx(0.97798623273, abs=1e-10)
        assert dl.ps(TABLE2, 0.9612) == pytest.approx(0.97799, abs=1e-5)

    def test_qs_at_equilibrium(self):
        assert dl.qs(TABLE2, 0.9612) == pytest.approx(0.888057908928, abs=1e-11)
        assert dl.qs(TABLE2, 0.9612) == pytest.approx(0.88810, abs=1e-4)

    def test_zero_voltage(self):
        assert dl.ps(TABLE2, 0.0) == 0.0
        assert dl.ps(DlLoadParams(a=0.0, p0=5.0), 0.0) == 5.0

    def test_negative_voltage(self):
        with pytest.raises(DomainError):
            dl.ps(TABLE2, -0.1)
        with pytest.raises(DomainError):
            dl.qs(TABLE2, -0.1)

    def test_transient_characteristics(self):
        assert dl.pt(TABLE2, 1.0) == pytest.approx(1.0, abs=1e-15)
        assert dl.pt(TABLE2, 0.0) == 0.12
        assert dl.qt(TABLE2, 1.0) == pytest.approx(0.92, abs=1e-15)

    @given(st.floats(0.0, 2.0))
    def test_qt_positive(self, v):
        assert dl.qt(TABLE2, v) > 0.0


class TestLoadPower:
    def test_zero_state(self):
        assert dl.load_power(TABLE2, LoadState(0.0, 0.0), 0.7) == PowerPoint(0.0, 0.0)

    def test_unit_state(self):
        s = dl.load_power(TABLE2, LoadState(1.0, 1.0), 1.0)
        assert (s.p2, s.q2) == pytest.approx((1.0, 0.92), abs=1e-15)

    def test_equilibrium_state(self):
        s = dl.load_power(TABLE2, EQ_STATE, 0.9612)
        assert s.p2 == pytest.approx(0.97799, abs=1e-4)
        assert s.q2 == pytest.approx(0.88810, abs=1e-4)


class TestStateDerivative:
    def test_zero_at_steady_state(self):
        st_ = dl.steady_state(TABLE2, 0.9612)
        assert st_.x == pytest.approx(1.00944, abs=1e-5)
        assert st_.y == pytest.approx(1.09951, abs=1e-4)
        assert dl.state_derivative(TABLE2, st_, 0.9612) == pytest.approx((0.0, 0.0), abs=1e-15)

    def test_exact_equilibrium_state(self):
        st_ = dl.steady_state(TABLE2, V_HIGH)
        assert (st_.x, st_.y) == pytest.approx((1.009447906, 1.099466343), abs=1e-9)

    def test_empty_state(self):
        assert dl.state_derivative(UNIT, LoadState(0.0, 0.0), 1.0) == (1.0, 1.0)

    @pytest.mark.parametrize("a,b", [(0.0, 0.0), (0.5625, 3.0), (2.0, 1.0)])
    def test_unit_state(self, a, b):
        params = DlLoadParams(a=a, b=b)
        dx, dy = dl.state_derivative(params, LoadState(1.0, 1.0), 1.0)
        assert dx == pytest.approx(0.0, abs=1e-15)
        assert dy == pytest.approx(0.08, abs=1e-15)

    def test_time_constants_scale(self):
        slow = DlLoadParams(tp=2.0, tq=4.0)
        dx, dy = dl.state_derivative(slow, LoadState(0.0, 0.0), 1.0)
        assert (dx, dy) == (0.5, 0.25)


class TestCoupledVoltage:
    def test_zero_load(self):
        assert dl.coupled_voltage(TABLE2, NET, LoadState(0.0, 0.0)) == pytest.approx(1.0, abs=1e-14)

    def test_equilibrium_state(self):
        v = dl.coupled_voltage(TABLE2, NET, EQ_STATE, RootPolicy.MAXIMUM)
        assert v == pytest.approx(0.9612, abs=1e-4)
        assert abs(dl.coupled_residual(TABLE2, NET, EQ_STATE, v)) < 1e-8

    def test_overload(self):
        with pytest.raises(NoRealPositiveRoot):
            dl.coupled_voltage(TABLE2, NET, LoadState(30.0, 30.0))

    def test_requires_equal_rx(self):
        with pytest.raises(InvalidNetwork):
            dl.coupled_voltage(TABLE2, NetworkParams(1.0, 0.02, 0.04), EQ_STATE)

    def test_minimum_policy_picks_low_branch(self):
        v = dl.coupled_voltage(TABLE2, NET, EQ_STATE, RootPolicy.MINIMUM)
        assert 0.0 < v < 0.5

    def test_coefficients_match_power_flow(self):
        # Substituting the load into the two-node equation gives the same value.
        for v in (0.1, 0.5, 0.9612, 1.3):
            lhs = dl.coupled_residual(TABLE2, NET, EQ_STATE, v)
            rhs = voltage_residual(NET, dl.load_power(TABLE2, EQ_STATE, v), v)
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-14)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.0, 4.0), st.floats(0.0, 4.0))
    def test_policy_consistency(self, x, y):
        s = LoadState(x, y)
        try:
            hi = dl.coupled_voltage(TABLE2, NET, s, RootPolicy.MAXIMUM)
            lo = dl.coupled_voltage(TABLE2, NET, s, RootPolicy.MINIMUM)
        except NoRealPositiveRoot:
            return
        assert hi >= lo > 0.0
        for v in (hi, lo):
            assert dl.pt(TABLE2, v) * x >= 0.0


def test_coupled_roots_match_grid_oracle():
    rng = np.random.default_rng(3)
    states = [LoadState(*rng.uniform(0.0, 4.0, 2)) for _ in range(300)]
    checked = 0
    for s in states:
        coeffs = dl.coupled_coefficients(TABLE2, NET, s)

        def f(v, coeffs=coeffs):
            return np.polynomial.polynomial.polyval(v, coeffs)

        roots = dl.admissible_voltages(TABLE2, NET, s)
        if any(b - a < 1e-3 for a, b in zip(roots, roots[1:])):
            continue
        brackets = grid_sign_scan_oracle(f, (1e-12, 2.0), 100_000)
        oracle = [bisect_refine(f, b, tol=0.0) for b in brackets]
        assert len(roots) == len(oracle)
        assert roots == pytest.approx(oracle, abs=1e-7)
        checked += 1
    assert checked > 250


class TestEquilibria:
    def test_table2(self):
        eq = dl.dl_equilibria(TABLE2, NET)
        # V = 0 is an equilibrium too: both exponents are positive.
        assert eq[0] == 0.0
        assert eq[1:] == pytest.approx([V_LOW, V_HIGH], abs=1e-12)
        assert eq[1] == pytest.approx(0.0002889, abs=1e-6)
        assert eq[2] == pytest.approx(0.9612, abs=1e-3)

    def test_zero_load(self):
        eq = dl.dl_equilibria(DlLoadParams(p0=0.0, q0=0.0, a=0.0, b=0.0), NET)
        assert eq == pytest.approx([1.0], abs=1e-12)

    def test_zero_load_positive_exponents(self):
        eq = dl.dl_equilibria(DlLoadParams(p0=0.0, q0=0.0), NET)
        assert eq == pytest.approx([0.0, 1.0], abs=1e-12)

    def test_case3_post_disturbance(self):
        assert dl.dl_equilibria(DlLoadParams(p0=8.0, q0=8.0, a=0.0, b=0.0), NET) == []

    def test_case1_post_disturbance(self):
        eq = dl.dl_equilibria(DlLoadParams(p0=6.0, q0=6.0, a=0.0, b=0.0), NET)
        assert eq == pytest.approx([0.4, 0.6], abs=1e-12)

    def test_case2_post_disturbance(self):
        eq = dl.dl_equilibria(DlLoadParams(p0=18.0, q0=0.0, a=0.5625, b=3.0), NET)
        assert eq == [0.0]

    @pytest.mark.parametrize(
        "params",
        [TABLE2, DlLoadParams(p0=5.0, q0=5.0, a=0.0, b=0.0), DlLoadParams(p0=2.0, q0=0.5, a=1.0, b=2.0)],
    )
    def test_fixed_point(self, params):
        for v in dl.dl_equilibria(params, NET):
            if v == 0.0:
                continue
            s = dl.steady_state(params, v)
            assert dl.state_derivative(params, s, v) == pytest.approx((0.0, 0.0), abs=1e-15)
            assert abs(dl.coupled_residual(params, NET, s, v)) <= 1e-8


class TestRegion:
    def test_equilibrium_cell(self):
        assert dl.classify_state(TABLE2, NET, EQ_STATE) is RegionClass.TWO_ROOTS

    def test_overloaded_cell(self):
        assert dl.classify_state(TABLE2, NET, LoadState(30.0, 30.0)) is RegionClass.FEWER_ROOTS

    def test_empty_cell(self):
        assert dl.classify_state(TABLE2, NET, LoadState(0.0, 0.0)) is RegionClass.FEWER_ROOTS

    def test_scan_grid(self):
        grid = dl.valid_region_scan(TABLE2, NET, (0.0, 1.00944), (0.0, 1.09951), 2)
        assert grid.valid.shape == (2, 2)
        assert grid.classify(1, 1) is RegionClass.TWO_ROOTS
        assert grid.classify(0, 0) is RegionClass.FEWER_ROOTS

    def test_scan_is_worker_independent(self):
        one = dl.valid_region_scan(TABLE2, NET, (0.0, 6.0), (0.0, 6.0), 13)
        two = dl.valid_region_scan(TABLE2, NET, (0.0, 6.0), (0.0, 6.0), 13, jobs=2)
        assert np.array_equal(one.valid, two.valid)
        assert one.valid.any() and not one.valid.all()

    def test_scan_rejects_bad_input(self):
        with pytest.raises(ValueError):
            dl.valid_region_scan(TABLE2, NET, resolution=1)
        with pytest.raises(ValueError):
            dl.valid_region_scan(TABLE2, NET, x_range=(-1.0, 1.0))

    def test_fan_states_filter(self):
        kept = dl.fan_states(TABLE2, NET, [(1.0, 1.0), (30.0, 30.0), (0.0, 0.0)])
        assert kept == [LoadState(1.0, 1.0)]


def test_steady_state_round_trip():
    for v in np.linspace(0.05, 1.4, 30):
        s = dl.steady_state(TABLE2, float(v))
        p = dl.load_power(TABLE2, s, float(v))
        assert p.p2 == pytest.approx(dl.ps(TABLE2, float(v)), rel=1e-14)
        assert p.q2 == pytest.approx(dl.qs(TABLE2, float(v)), rel=1e-14)
        assert math.isfinite(s.x) and math.isfinite(s.y)
