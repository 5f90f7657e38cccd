"""Semi-discrete dispersion curves, error measures, and resolution limits.

Frozen reference values below were produced by an independent oracle that
evaluates |w+(k)| by direct complex summation of the raw table coefficients
on a dense grid, with the band-edge values computed in exact rational
arithmetic (w+(pi) = sum_l a_l (-1)^l).
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbpkit.dispersion import (
    detect_swm,
    dispersion_central,
    dispersion_upwind,
    epsilon_invariance_check,
    error_report,
    phase_velocity,
    refinement_factor,
    symbol,
    write_dispersion_csv,
)
from sbpkit.operators import CentralStencil, get_interior, list_builtin_interiors

EPS_INF = {
    "up2": 0.491187, "up3": 0.575587, "up4": 0.151174, "up5": 0.660469,
    "up6": 0.320939, "up7": 0.708974, "up8": 0.417948, "up9": 0.741310,
    "drp4": 0.059217, "drp5": 0.049314, "drp6": 0.042847, "drp7": 0.042154,
}
L2_PLAIN_PCT = {
    "up2": 41.131, "up3": 40.974, "up4": 7.669, "up5": 43.820,
    "up6": 17.510, "up7": 44.106, "up8": 23.438, "up9": 43.674,
    "drp4": 2.564, "drp5": 1.736, "drp6": 1.357, "drp7": 1.285,
    "central2": 73.760, "central4": 64.279, "central6": 58.819,
    "central8": 55.090,
}
L2_OF_REL_PCT = {
    "up2": 35.025, "up3": 27.899, "up4": 6.001, "up5": 28.841,
    "up6": 11.029, "up7": 28.437, "up8": 14.765, "up9": 27.774,
    "drp4": 2.154, "drp5": 1.321, "drp6": 0.969, "drp7": 0.886,
    "central2": 52.201, "central4": 42.783, "central6": 38.078,
    "central8": 35.082,
}
# resolvable band fraction h* at tolerance delta = 0.05 / 0.025 / 0.015
H_STAR = {
    "up2": (0.127, 0.088, 0.068), "up3": (0.379, 0.311, 0.271),
    "up4": (0.383, 0.299, 0.255), "up5": (0.478, 0.417, 0.379),
    "up6": (0.717, 0.682, 0.418), "up7": (0.544, 0.488, 0.453),
    "up8": (0.689, 0.652, 0.631), "up9": (0.590, 0.539, 0.506),
    "drp4": (0.990, 0.363, 0.294), "drp5": (1.000, 0.972, 0.484),
    "drp6": (1.000, 0.980, 0.840), "drp7": (1.000, 0.980, 0.967),
    "central2": (0.176, 0.124, 0.096), "central4": (0.366, 0.304, 0.266),
    "central6": (0.473, 0.414, 0.377), "central8": (0.541, 0.487, 0.452),
}
# wrong-signed group velocity somewhere inside the open band
SWM_FLAG = {
    "up2": False, "up3": True, "up4": False, "up5": True,
    "up6": True, "up7": True, "up8": True, "up9": True,
    "drp4": False, "drp5": False, "drp6": False, "drp7": False,
    "central2": True, "central4": True, "central6": True, "central8": True,
}
# exact band-edge frequencies, biased rows only (central rows vanish there)
OMEGA_PI = {
    "up6": Fraction(32, 15),
    "drp4": Fraction(133, 45),
    "drp5": Fraction(224, 75),
    "drp6": Fraction(4736, 1575),
    "drp7": Fraction(33176, 11025),
}


def curve_for(name):
    st_ = get_interior(name)
    if isinstance(st_, CentralStencil):
        return dispersion_central(st_)
    return dispersion_upwind(st_)


def exact_band_edge(name):
    """Independent oracle: w+(pi) = sum_l a_l (-1)^l in exact rationals."""
    st_ = get_interior(name)
    if isinstance(st_, CentralStencil):
        st_ = st_.as_interior()
    total = sum((Fraction(c) * (-1 if l % 2 else 1)
                 for c, l in zip(st_.coeffs, st_.offsets)), Fraction(0))
    return abs(total)


# ------------------------------------------------------------------- symbol

class TestSymbol:
    @pytest.mark.parametrize("name", ("up4", "drp6", "central4"))
    def test_matches_direct_complex_sum(self, name):
        st_ = get_interior(name)
        it = st_.as_interior() if isinstance(st_, CentralStencil) else st_
        poly = symbol(st_)
        ks = np.linspace(0.05, np.pi, 37)
        direct = sum(float(c) * np.exp(1j * l * ks)
                     for c, l in zip(it.coeffs, it.offsets))
        assert np.abs(poly.evaluate(ks) - direct).max() < 1e-13

    def test_consistency_shows_at_origin(self):
        poly = symbol(get_interior("up5"))
        assert abs(poly.evaluate(0.0)) < 1e-15


# ------------------------------------------------------------------- curves

class TestCurves:
    @pytest.mark.parametrize("name", sorted(OMEGA_PI))
    def test_band_edge_exact(self, name):
        curve = curve_for(name)
        want = OMEGA_PI[name]
        # rational identity on the squared curve: the stored cosine
        # coefficients alternate-sum to the exact square
        got_sq = sum((Fraction(c) * (-1 if j % 2 else 1)
                      for j, c in enumerate(curve.cos_sq_coeffs)), Fraction(0))
        assert got_sq == want * want
        assert curve.omega_at(np.pi) == pytest.approx(float(want), abs=1e-6)
        assert exact_band_edge(name) == want

    def test_central_band_edge_vanishes(self):
        for name in ("central2", "central4", "central6", "central8"):
            assert curve_for(name).omega_at(np.pi) < 1e-14

    def test_central4_half_band_value(self):
        # 2*(2/3*sin(pi/2) - 1/12*sin(pi)) = 4/3
        curve = curve_for("central4")
        assert curve.omega_at(np.pi / 2) == pytest.approx(4.0 / 3.0, abs=1e-14)

    def test_central_dispatch_equals_folded_interior(self):
        cen = get_interior("central6")
        a = dispersion_central(cen)
        b = dispersion_upwind(cen.as_interior())
        assert np.abs(a.omega - b.omega).max() < 1e-13

    def test_slope_limit_is_unity(self):
        for name in ("up2", "up7", "drp4", "drp7", "central8"):
            assert curve_for(name).slope_limit() == pytest.approx(1.0, abs=1e-12)

    @given(st.floats(0.01, math.pi))
    @settings(max_examples=30, deadline=None)
    def test_omega_is_sqrt_of_square(self, k):
        curve = curve_for("drp5")
        assert curve.omega_at(k) ** 2 == pytest.approx(
            max(curve.omega_sq_at(k), 0.0), abs=1e-12)


# ------------------------------------------------------------- error report

class TestErrorReport:
    @pytest.mark.parametrize("name", sorted(EPS_INF))
    def test_eps_inf_pins(self, name):
        rep = error_report(curve_for(name))
        assert rep.eps_inf == pytest.approx(EPS_INF[name], abs=2e-6)

    def test_central_relative_error_saturates(self):
        # omega_N(pi) = 0 while omega = pi, so the relative error is 1
        for name in ("central2", "central6"):
            rep = error_report(curve_for(name))
            assert rep.eps_inf == 1.0
            assert rep.eps_rel[-1] == 1.0

    @pytest.mark.parametrize("name", sorted(L2_PLAIN_PCT))
    def test_l2_pins_both_conventions(self, name):
        rep = error_report(curve_for(name))
        assert 100.0 * rep.l2_rel == pytest.approx(L2_PLAIN_PCT[name],
                                                   abs=2e-3)
        assert 100.0 * rep.l2_of_relative == pytest.approx(
            L2_OF_REL_PCT[name], abs=2e-3)

    def test_drp_beats_plain_upwind_per_order(self):
        for order in (4, 5, 6, 7):
            assert L2_OF_REL_PCT[f"drp{order}"] < L2_OF_REL_PCT[f"up{order}"]
            rep_d = error_report(curve_for(f"drp{order}"))
            rep_u = error_report(curve_for(f"up{order}"))
            assert rep_d.l2_of_relative < rep_u.l2_of_relative
            assert rep_d.l2_rel < rep_u.l2_rel

    def test_envelope_monotone_and_dominates(self):
        rep = error_report(curve_for("up6"))
        assert np.all(np.diff(rep.envelope) >= 0.0)
        assert np.all(rep.envelope >= rep.eps_rel - 1e-15)
        assert rep.eps_inf >= rep.eps_rel.max() - 1e-12

    def test_grid_excludes_origin(self):
        rep = error_report(curve_for("drp4"))
        assert rep.k[0] > 0.0
        assert rep.k[-1] == pytest.approx(np.pi, abs=1e-15)

    def test_eps_inf_location(self):
        rep = error_report(curve_for("drp6"))
        assert 0.0 < rep.k_at_eps_inf <= np.pi
        curve = curve_for("drp6")
        local = abs(curve.omega_at(rep.k_at_eps_inf) - rep.k_at_eps_inf) \
            / rep.k_at_eps_inf
        assert local == pytest.approx(rep.eps_inf, rel=1e-9)


# --------------------------------------------------------------- resolution

class TestRefinement:
    @pytest.mark.parametrize("name", sorted(H_STAR))
    def test_h_star_pins(self, name):
        curve = curve_for(name)
        for delta, want in zip((0.05, 0.025, 0.015), H_STAR[name]):
            assert refinement_factor(curve, delta=delta) == pytest.approx(
                want, abs=2e-3)

    def test_drp_resolves_full_band_at_loose_tolerance(self):
        for name in ("drp5", "drp6", "drp7"):
            assert refinement_factor(curve_for(name), delta=0.05) == 1.0

    def test_fourth_power_cost_ratio(self):
        # work scales like (1/h*)^4 in 3+1 dimensions; the optimized rows
        # should win at the tight tolerance for every order
        for order in (4, 5, 6, 7):
            hd = refinement_factor(curve_for(f"drp{order}"), delta=0.015)
            hu = refinement_factor(curve_for(f"up{order}"), delta=0.015)
            assert (1.0 / hd) ** 4 < (1.0 / hu) ** 4

    def test_argument_validation(self):
        curve = curve_for("up4")
        with pytest.raises(ValueError):
            refinement_factor(curve, delta=0.0)
        with pytest.raises(ValueError):
            refinement_factor(curve, delta=-0.1)
        with pytest.raises(ValueError):
            refinement_factor(curve, k=0.0, delta=0.05)
        with pytest.raises(ValueError):
            refinement_factor(curve, k=4.0, delta=0.05)

    def test_huge_tolerance_resolves_everything(self):
        assert refinement_factor(curve_for("up2"), delta=10.0) == 1.0


# ---------------------------------------------------------- group velocity

class TestGroupVelocity:
    @pytest.mark.parametrize("name", sorted(SWM_FLAG))
    def test_swm_flags(self, name):
        assert detect_swm(curve_for(name)) is SWM_FLAG[name]

    def test_flag_matches_report(self):
        for name in ("up3", "drp6", "central4"):
            assert error_report(curve_for(name)).swm is SWM_FLAG[name]

    def test_band_edge_group_velocity_is_flat(self):
        # d(omega^2)/dk = -sum j c_j sin(jk) vanishes identically at pi,
        # so no real-coefficient row transports the alternating mode
        for name in ("up2", "up6", "drp6", "central6"):
            curve = curve_for(name)
            assert abs(curve.domega_sq_at(np.pi)) < 1e-12

    def test_phase_velocity_endpoints(self):
        curve = curve_for("drp6")
        vp = phase_velocity(curve)
        assert vp[0] == pytest.approx(1.0, abs=1e-12)
        assert vp[-1] == pytest.approx(0.957153, abs=1e-5)
        assert vp.shape == curve.k.shape


# ------------------------------------------------------------------- extras

class TestInvarianceAndCsv:
    def test_epsilon_scale_invariance(self):
        curve = curve_for("drp5")
        for h in (1.0, 0.25, 0.01):
            before, after = epsilon_invariance_check(curve, h)
            assert after == pytest.approx(before, rel=1e-12)

    def test_epsilon_invariance_rejects_bad_h(self):
        curve = curve_for("up4")
        for h in (0.0, -1.0, 1.5):
            with pytest.raises(ValueError):
                epsilon_invariance_check(curve, h)

    def test_csv_writer_layout(self, tmp_path):
        curve = curve_for("up6")
        rep = error_report(curve)
        path = tmp_path / "d.csv"
        with open(path, "w") as fh:
            write_dispersion_csv(rep, curve, fh)
        lines = path.read_text().strip().splitlines()
        assert lines[0].startswith("operator=")
        assert "eps_inf=" in lines[0]
        assert lines[1] == "k,omega_N,eps_rel,envelope,v_p"
        first = lines[2].split(",")
        assert len(first) == 5
        assert float(first[0]) > 0.0

    def test_all_sixteen_builtins_have_curves(self):
        for name in list_builtin_interiors():
            curve = curve_for(name)
            assert curve.omega.shape == curve.k.shape
            assert np.all(curve.omega >= 0.0)
