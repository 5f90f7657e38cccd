"""Stencil tables, dense assembly, and algebraic validation checks."""

import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbpkit.operators import (
    BoundaryClosure,
    CentralStencil,
    DualPairOperator,
    assemble,
    assemble_periodic,
    build_central_interior,
    build_drp_interior,
    build_upwind_interior,
    get_interior,
    get_operator,
    list_builtin_interiors,
    list_builtin_operators,
    load_operator,
    minus_stencil,
    operator_from_dict,
    operator_to_dict,
    save_operator,
    verify_accuracy,
    verify_sbp,
    verify_upwind,
)

BUILTIN_MIN_N = {"drp4": 14, "drp5": 20, "drp6": 26, "drp7": 26,
                 "up6": 23, "central6": 23}
DECLARED = {"drp4": (4, 2), "drp5": (5, 2), "drp6": (6, 3), "drp7": (7, 3),
            "up6": (6, 3), "central6": (6, 3)}
FIRST_WEIGHT = {"drp4": 0.407206, "drp5": 0.318079, "drp6": 0.294425,
                "drp7": 0.370747, "up6": 0.2995079909712447,
                "central6": 0.3000677172043041}


# ------------------------------------------------------------------- tables

class TestInteriorTables:
    @pytest.mark.parametrize("order", range(2, 10))
    def test_upwind_consistency_exact(self, order):
        st_ = build_upwind_interior(order)
        assert st_.moment(0) == 0
        assert st_.moment(1) == 1

    @pytest.mark.parametrize("order", range(4, 8))
    def test_drp_consistency_exact(self, order):
        st_ = build_drp_interior(order)
        assert st_.moment(0) == 0
        assert st_.moment(1) == 1

    def test_upwind_taylor_orders(self):
        for order in range(2, 10):
            assert build_upwind_interior(order).taylor_order() == order

    def test_order9_print_correction(self):
        fixed = build_upwind_interior(9)
        printed = build_upwind_interior(9, as_printed=True)
        by_off = dict(zip(fixed.offsets, fixed.coeffs))
        assert by_off[3] == Fraction(2, 21)
        printed_by_off = dict(zip(printed.offsets, printed.coeffs))
        assert printed_by_off[3] == Fraction(20, 21)
        assert printed.moment(0) != 0  # the misprint breaks consistency

    def test_order8_print_correction(self):
        fixed = build_upwind_interior(8)
        printed = build_upwind_interior(8, as_printed=True)
        assert dict(zip(fixed.offsets, fixed.coeffs))[4] == Fraction(-1, 28)
        assert dict(zip(printed.offsets, printed.coeffs))[4] == Fraction(1, 28)

    def test_drp4_trades_taylor_for_dispersion(self):
        st_ = build_drp_interior(4)
        assert st_.taylor_order() == 3
        assert st_.dispersion_order() >= 4

    def test_central_as_interior_antisymmetric(self):
        cen = build_central_interior(6)
        it = cen.as_interior()
        a = it.as_floats()
        assert np.allclose(a, -a[::-1])

    def test_interior_name_listing(self):
        names = list_builtin_interiors()
        assert len(names) == 16
        assert names[0] == "up2" and "drp6" in names and "central8" in names

    def test_unknown_interior_raises(self):
        with pytest.raises(KeyError):
            get_interior("nosuch")


# ------------------------------------------------------------------ builtins

class TestBuiltinOperators:
    def test_listing(self):
        assert list_builtin_operators() == ["drp4", "drp5", "drp6", "drp7",
                                            "up6", "central6"]

    @pytest.mark.parametrize("name", BUILTIN_MIN_N)
    def test_minimum_n(self, name):
        assert get_operator(name).minimum_n == BUILTIN_MIN_N[name]

    @pytest.mark.parametrize("name", BUILTIN_MIN_N)
    def test_validation_suite(self, name):
        """SBP residual, dissipation sign, accuracy orders, weight row."""
        op = get_operator(name)
        for n in (op.minimum_n, 24, 48):
            if n < op.minimum_n:
                continue
            assert verify_sbp(op, n) <= 5e-6
            assert verify_upwind(op, n) <= 1e-4
            assert tuple(verify_accuracy(op, n)) == DECLARED[name]
        h = np.asarray(op.closure.h, dtype=float)
        assert np.all(h > 0)
        assert 0.25 <= h.min() <= 0.45

    @pytest.mark.parametrize("name", FIRST_WEIGHT)
    def test_first_quadrature_weight(self, name):
        op = get_operator(name)
        assert float(op.closure.h[0]) == pytest.approx(FIRST_WEIGHT[name],
                                                       abs=1e-6)

    @pytest.mark.parametrize("name", BUILTIN_MIN_N)
    def test_weight_sum_complements_interior(self, name):
        """Boundary weights integrate the half-cells the band cannot: the
        s block weights sum to s - 1/2 so that total quadrature matches
        the trapezoid mass of the domain."""
        op = get_operator(name)
        s = op.closure.s
        total = float(np.sum(op.closure.h))
        assert total == pytest.approx(s - 0.5, abs=2e-5)

    def test_solved_closures_are_exact(self):
        for name in ("up6", "central6"):
            op = get_operator(name)
            assert op.closure.is_exact
            assert verify_sbp(op, op.minimum_n) == 0.0

    def test_interior_only_name_is_distinguished(self):
        with pytest.raises(KeyError, match="interior-only"):
            get_operator("up4")
        with pytest.raises(KeyError, match="unknown operator"):
            get_operator("nosuch")


# ------------------------------------------------------------------ assembly

class TestAssembly:
    def test_shapes_and_b_matrix(self):
        op = get_operator("drp5")
        n = 24
        Qp, Qm, H, B, Dp, Dm = assemble(op, n)
        B = np.asarray(B, dtype=float)
        assert Dp.shape == (n, n) and Dm.shape == (n, n)
        assert B[0, 0] == -1.0 and B[-1, -1] == 1.0
        assert np.count_nonzero(B) == 2

    def test_sbp_identity_dense(self):
        for name in list_builtin_operators():
            op = get_operator(name)
            n = max(op.minimum_n, 24)
            _, _, H, B, Dp, Dm = assemble(op, n)
            B = np.asarray(B, dtype=float)
            resid = (H @ Dp).T + H @ Dm - B
            assert np.abs(resid).max() <= 5e-6

    def test_qbar_is_persymmetric(self):
        op = get_operator("drp6")
        n = 30
        Qp, _, _, B, _, _ = assemble(op, n)
        Qb = np.asarray(Qp, dtype=float) - 0.5 * np.asarray(B, dtype=float)
        assert np.abs(Qb - Qb[::-1, ::-1].T).max() < 1e-12

    def test_derivative_of_constants_and_line(self):
        # closures carry six published digits, so residuals sit near 1e-5
        # on the unit-spacing grid and scale with 1/h elsewhere
        op = get_operator("drp7")
        n = 32
        _, _, _, _, Dp, Dm = assemble(op, n, h=1.0)
        ones = np.ones(n)
        x = np.arange(n, dtype=float)
        assert np.abs(Dp @ ones).max() < 2e-5
        assert np.abs(Dm @ ones).max() < 2e-5
        assert np.abs(Dp @ x - 1.0).max() < 2e-4
        assert np.abs(Dm @ x - 1.0).max() < 2e-4

    def test_grid_too_small_raises(self):
        op = get_operator("drp4")  # s = 4
        with pytest.raises(ValueError, match="grid too small"):
            assemble(op, 8)

    def test_accuracy_needs_clear_row(self):
        op = get_operator("drp4")
        with pytest.raises(ValueError, match="too small"):
            verify_accuracy(op, 9)

    def test_scaling_in_h(self):
        op = get_operator("up6")
        _, _, _, _, D1, _ = assemble(op, 24, h=1.0)
        _, _, _, _, D2, _ = assemble(op, 24, h=0.5)
        assert np.allclose(D2, 2.0 * D1)

    @given(st.integers(26, 60))
    @settings(max_examples=12, deadline=None)
    def test_sbp_residual_any_grid(self, n):
        assert verify_sbp(get_operator("drp6"), n) <= 5e-6
        assert verify_sbp(get_operator("up6"), n) == 0.0


class TestPeriodicAssembly:
    def test_minus_is_negative_transpose(self):
        for name in ("up4", "drp6", "central4"):
            Dp, Dm, H = assemble_periodic(get_interior(name), 31, h=0.1)
            assert np.abs(Dm + Dp.T).max() < 1e-14

    def test_annihilates_constants(self):
        Dp, Dm, _ = assemble_periodic(get_interior("drp5"), 25)
        ones = np.ones(25)
        assert np.abs(Dp @ ones).max() < 1e-13
        assert np.abs(Dm @ ones).max() < 1e-13

    def test_too_few_points_raises(self):
        with pytest.raises(ValueError):
            assemble_periodic(get_interior("drp6"), 8)

    def test_minus_stencil_reverses(self):
        st_ = get_interior("up5")
        ms = minus_stencil(st_)
        assert np.allclose(ms.as_floats(), -st_.as_floats()[::-1])
        assert (ms.r1, ms.r2) == (st_.r2, st_.r1)


# ---------------------------------------------------------------------- io

class TestSerialization:
    @pytest.mark.parametrize("name", ("drp4", "up6"))
    def test_roundtrip_preserves_everything(self, name, tmp_path):
        op = get_operator(name)
        path = tmp_path / f"{name}.json"
        save_operator(op, path)
        back = load_operator(path)
        assert back.name == op.name
        assert back.minimum_n == op.minimum_n
        assert back.closure.is_exact == op.closure.is_exact
        assert np.array_equal(back.closure.q, op.closure.q)
        assert np.array_equal(back.closure.h, op.closure.h)
        assert verify_sbp(back, back.minimum_n) == verify_sbp(op, op.minimum_n)

    def test_exact_entries_survive_as_rationals(self, tmp_path):
        op = get_operator("central6")
        path = tmp_path / "c6.json"
        save_operator(op, path)
        doc = json.loads(path.read_text())
        entries = [e for row in doc["closure"]["q"] for e in row]
        assert all(isinstance(e, str) for e in entries)
        assert any("/" in e for e in entries)
        back = load_operator(path)
        assert back.closure.is_exact
        assert verify_sbp(back, back.minimum_n) == 0.0

    def test_dict_roundtrip(self):
        op = get_operator("drp5")
        back = operator_from_dict(operator_to_dict(op))
        assert np.array_equal(back.closure.q, op.closure.q)

    def test_malformed_offsets_rejected(self):
        doc = operator_to_dict(get_operator("drp4"))
        doc["interior"]["offsets"] = [0, 2, 3, 4, 5, 6]  # gap: not contiguous
        with pytest.raises(ValueError):
            operator_from_dict(doc)

    def test_tail_mismatch_rejected(self):
        """A closure block whose transition columns contradict the interior
        band cannot form an operator."""
        op = get_operator("drp4")
        q = op.closure.q.copy()
        q[0, -1] += 0.5  # tail column touched by the band
        bad = BoundaryClosure(op.closure.s, q, op.closure.h)
        with pytest.raises(ValueError, match="tail"):
            DualPairOperator("bad", op.interior, bad)

    def test_nonpositive_weight_rejected(self):
        op = get_operator("drp4")
        h = op.closure.h.copy()
        h[0] = 0.0
        with pytest.raises(ValueError, match="positive"):
            BoundaryClosure(op.closure.s, op.closure.q, h)
