import math
from fractions import Fraction

import numpy as np
import pytest

from qmeter.core import projector, validate_povm
from qmeter.engine import helstrom, p_rates
from qmeter import phase_covariant as pc

PHI_GRID = np.linspace(0.0, 2 * np.pi, 12, endpoint=False)


def ps_max_oracle(n):
    # Independent form: 1/2 + (1/2^{N+1}) Σ_k √(C(N,k) C(N,k-1)), with the product
    # written as a single binomial ratio.
    total = 0.0
    for k in range(1, n + 1):
        total += math.comb(n, k) * math.sqrt(k / (n - k + 1))
    return 0.5 + total / 2 ** (n + 1)


class TestBasisKets:
    def test_phi_zero(self):
        plus, minus = pc.pc_basis_kets(0.0)
        np.testing.assert_allclose(plus, np.array([1, 1]) / math.sqrt(2))
        np.testing.assert_allclose(minus, np.array([1, -1]) / math.sqrt(2))

    def test_phi_half_pi(self):
        plus, minus = pc.pc_basis_kets(math.pi / 2)
        np.testing.assert_allclose(plus, np.array([1, 1j]) / math.sqrt(2), atol=1e-15)
        np.testing.assert_allclose(minus, np.array([1, -1j]) / math.sqrt(2), atol=1e-15)

    @pytest.mark.parametrize("phi", [0.0, 0.4, 2.0, 5.9])
    def test_orthogonal_and_sigma_z(self, phi):
        plus, minus = pc.pc_basis_kets(phi)
        assert abs(np.vdot(plus, minus)) <= 1e-15
        np.testing.assert_allclose(minus, np.diag([1, -1]) @ plus, atol=1e-12)


class TestOperators:
    def test_n1_block(self):
        dec = pc.block_decomposition(1)
        blk = dec.blocks[1]
        assert blk.b_nk == pytest.approx(0.5)
        assert blk.weight == pytest.approx(0.5)
        r_plus, _, _ = pc.pc_build_r_analytic(1)
        # |φ+_{1,1}> = (|0>|1> + |1>|0>)/√2 is an eigenvector with eigenvalue weight/2 = 1/4.
        v = np.array([0, 1, 1, 0]) / math.sqrt(2)
        np.testing.assert_allclose(r_plus @ v, 0.25 * v, atol=1e-15)

    def test_n2_weights(self):
        weights = [b.weight for b in pc.block_decomposition(2).blocks]
        assert weights == pytest.approx([1 / 8, 3 / 8, 3 / 8, 1 / 8])

    @pytest.mark.parametrize("n", range(1, 7))
    def test_traces_and_quadrature_oracle(self, n):
        r_plus, r_minus, _ = pc.pc_build_r_analytic(n)
        assert np.trace(r_plus).real == pytest.approx(0.5, abs=1e-12)
        assert np.trace(r_minus).real == pytest.approx(0.5, abs=1e-12)
        q_plus, q_minus = pc.pc_build_r_quadrature(n, 2 * (n + 2))
        assert np.max(np.abs(q_plus - r_plus)) <= 1e-10
        assert np.max(np.abs(q_minus - r_minus)) <= 1e-10

    def test_quadrature_examples(self):
        r_plus, r_minus, _ = pc.pc_build_r_analytic(1)
        q_plus, q_minus = pc.pc_build_r_quadrature(1, 8)
        assert np.max(np.abs(q_plus - r_plus)) <= 1e-12
        r_plus, _, _ = pc.pc_build_r_analytic(4)
        assert np.max(np.abs(pc.pc_build_r_quadrature(4, 16)[0] - r_plus)) <= 1e-10

    def test_quadrature_below_floor(self):
        with pytest.raises(ValueError):
            pc.pc_build_r_quadrature(1, 2)

    def test_n_zero(self):
        with pytest.raises(ValueError):
            pc.pc_build_r_analytic(0)


class TestDeterministic:
    def test_n1(self):
        assert pc.pc_deterministic(1)[1] == pytest.approx(0.75)

    def test_n2(self):
        assert pc.pc_deterministic(2)[1] == pytest.approx(0.5 + math.sqrt(2) / 4)

    def test_monotone_in_copies(self):
        assert pc.ps_max(8) > pc.ps_max(4) > pc.ps_max(2)

    @pytest.mark.parametrize("n", range(1, 7))
    def test_matches_oracle_and_helstrom(self, n):
        povm, p_s = pc.pc_deterministic(n)
        assert p_s == pytest.approx(ps_max_oracle(n), abs=1e-13)
        r_plus, r_minus, _ = pc.pc_build_r_analytic(n)
        assert helstrom(r_plus, r_minus).p_success == pytest.approx(p_s, abs=1e-9)
        assert validate_povm(povm, 1e-10).passed
        ps, pi, pe = p_rates(povm, r_plus, r_minus)
        assert ps == pytest.approx(p_s, abs=1e-10)
        assert pi == 0.0


class TestUnambiguous:
    @pytest.mark.parametrize("n,expected", [(1, 0.5), (2, 0.5), (3, 0.375), (4, 0.375)])
    def test_values(self, n, expected):
        assert pc.pc_unambiguous(n)[1] == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("n", range(1, 7))
    def test_zero_errors_and_rates(self, n):
        povm, p_i = pc.pc_unambiguous(n)
        r_plus, r_minus, _ = pc.pc_build_r_analytic(n)
        assert validate_povm(povm, 1e-10).passed
        assert abs(np.trace(povm["+"] @ r_minus)) <= 1e-10
        assert abs(np.trace(povm["-"] @ r_plus)) <= 1e-10
        ps, pi, _ = p_rates(povm, r_plus, r_minus)
        assert pi == pytest.approx(p_i, abs=1e-10)
        assert ps == pytest.approx(1 - p_i, abs=1e-10)

    @pytest.mark.parametrize("n", range(1, 4))
    def test_parity_law_exact(self, n):
        assert pc.p_i_unambiguous_exact(2 * n - 1) == pc.p_i_unambiguous_exact(2 * n)

    @pytest.mark.parametrize("n", range(1, 13))
    def test_parity_form_matches_block_sum(self, n):
        assert pc.p_i_unambiguous_exact(n) == pc.p_i_unambiguous_sum_exact(n)

    def test_exact_values(self):
        assert pc.p_i_unambiguous_exact(4) == Fraction(3, 8)
        assert pc.p_i_unambiguous_exact(5) == Fraction(5, 16)

    def test_asymptotic(self):
        n = 64
        p_i = pc.p_i_unambiguous_exact(n)
        approx = 2 / math.sqrt(2 * math.pi * n)
        assert abs(float(p_i) - approx) / float(p_i) <= 0.02


class TestInterpolated:
    @pytest.mark.parametrize("n", range(1, 5))
    def test_endpoints(self, n):
        _, p_s, p_i = pc.pc_interpolated(n, pc.PcInterpolationParams(0.0))
        assert p_i == pytest.approx(0.0, abs=1e-10)
        assert p_s == pytest.approx(pc.ps_max(n), abs=1e-10)
        for eta in (0.0, 0.7):
            _, p_s, p_i = pc.pc_interpolated(n, pc.PcInterpolationParams(1.0, eta))
            assert p_i == pytest.approx(pc.p_i_unambiguous(n), abs=1e-10)
            assert p_s == pytest.approx(1 - p_i, abs=1e-10)

    @pytest.mark.parametrize("n", range(1, 5))
    def test_povm_rates_match_closed_form(self, n):
        r_plus, r_minus, _ = pc.pc_build_r_analytic(n)
        for a in (0.1, 0.5, 0.62, 0.75, 0.95):
            povm, p_s, p_i = pc.pc_interpolated(n, pc.PcInterpolationParams(a, 0.3))
            assert validate_povm(povm, 1e-10).passed
            ps, pi, _ = p_rates(povm, r_plus, r_minus)
            assert ps == pytest.approx(p_s, abs=1e-10)
            assert pi == pytest.approx(p_i, abs=1e-10)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            pc.PcInterpolationParams(1.2)
        with pytest.raises(ValueError):
            pc.PcInterpolationParams(0.5, -0.1)

    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_mirror_blocks_share_rates(self, n):
        for a in np.linspace(0, 1, 11):
            for k in range(1, n + 1):
                s = pc.block_solution(n, k, float(a))
                m = pc.block_solution(n, n + 1 - k, float(a))
                assert s.flipped != m.flipped or math.comb(n, k) == math.comb(n, k - 1)
                assert s.p_s == pytest.approx(m.p_s, abs=1e-12)
                assert s.p_i == pytest.approx(m.p_i, abs=1e-12)

    def test_angle_continuous_at_threshold(self):
        n, k = 3, 1
        ratio = math.sqrt(math.comb(n, k) / math.comb(n, k - 1))
        a_th = 0.5 * (1 + 1 / ratio)
        assert pc.block_angle(n, k, a_th)[0] == pytest.approx(1.0, abs=1e-12)
        assert pc.block_angle(n, k, a_th - 1e-9)[0] == 1.0

    @pytest.mark.parametrize("n", [2, 3, 5])
    @pytest.mark.parametrize("target", [0.0, 0.01, 0.1, 0.2, 0.3])
    def test_inversion(self, n, target):
        target = min(target, pc.p_i_unambiguous(n))
        params = pc.pc_params_for_p_i(n, target)
        assert pc.pc_rates(n, params)[1] == pytest.approx(target, abs=1e-10)

    def test_inversion_out_of_range(self):
        with pytest.raises(ValueError):
            pc.pc_params_for_p_i(2, 0.6)


class TestTradeoffCurve:
    @pytest.mark.parametrize("n", range(1, 5))
    def test_monotone_and_endpoints(self, n):
        pts = pc.pc_tradeoff_curve(n, 41)
        ordered = sorted(pts, key=lambda p: (p.p_i, p.p_rs))
        for a, b in zip(ordered, ordered[1:]):
            assert b.p_rs >= a.p_rs - 1e-12
        assert pts[0].p_i == pytest.approx(0.0, abs=1e-9)
        assert pts[0].p_rs == pytest.approx(pc.ps_max(n), abs=1e-9)
        assert pts[-1].p_i == pytest.approx(pc.p_i_unambiguous(n), abs=1e-9)
        assert pts[-1].p_rs == pytest.approx(1.0, abs=1e-9)

    def test_curve_sorted_by_p_i(self):
        # Along the sweep order P_I itself is nondecreasing.
        pts = pc.pc_tradeoff_curve(3, 21)
        assert all(b.p_i >= a.p_i - 1e-12 for a, b in zip(pts, pts[1:]))

    def test_interior_points_strictly_between(self):
        pts = pc.pc_tradeoff_curve(2, 21)
        lo, hi = pts[0].p_rs, pts[-1].p_rs
        interior = [p for p in pts if 1e-9 < p.p_i < pc.p_i_unambiguous(2) - 1e-9]
        assert interior
        assert all(lo < p.p_rs < hi for p in interior)

    def test_grid_too_small(self):
        with pytest.raises(ValueError):
            pc.pc_tradeoff_curve(2, 1)


class TestEffectivePovm:
    def test_deterministic_n1(self):
        povm, _ = pc.pc_deterministic(1)
        eff = pc.pc_effective_data_povm(povm, 0.0, 1)
        plus, minus = pc.pc_basis_kets(0.0)
        np.testing.assert_allclose(eff["+"], 0.75 * projector(plus) + 0.25 * projector(minus), atol=1e-12)

    def test_unambiguous_n2(self):
        povm, _ = pc.pc_unambiguous(2)
        for phi in PHI_GRID:
            np.testing.assert_allclose(pc.pc_effective_data_povm(povm, phi, 2)["?"], 0.5 * np.eye(2), atol=1e-10)

    def test_spectra_covariant(self):
        povm, _, _ = pc.pc_interpolated(3, pc.PcInterpolationParams(0.7))
        a = pc.pc_effective_data_povm(povm, 0.3, 3)
        b = pc.pc_effective_data_povm(povm, 4.0, 3)
        for label in povm.labels:
            np.testing.assert_allclose(np.linalg.eigvalsh(a[label]), np.linalg.eigvalsh(b[label]), atol=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    @pytest.mark.parametrize("a,eta", [(0.0, 0.0), (0.3, 0.0), (0.5, 0.4), (0.8, 0.0), (1.0, 0.0)])
    def test_covariant_forms(self, n, a, eta):
        povm, p_s, p_i = pc.pc_interpolated(n, pc.PcInterpolationParams(a, eta))
        p_e = 1 - p_s - p_i
        for phi in PHI_GRID:
            eff = pc.pc_effective_data_povm(povm, phi, n)
            plus, minus = pc.pc_basis_kets(phi)
            np.testing.assert_allclose(eff["?"], p_i * np.eye(2), atol=1e-10)
            np.testing.assert_allclose(eff["+"], p_s * projector(plus) + p_e * projector(minus), atol=1e-9)
            np.testing.assert_allclose(eff["-"], p_s * projector(minus) + p_e * projector(plus), atol=1e-9)

    def test_layout_mismatch(self):
        povm, _ = pc.pc_deterministic(2)
        with pytest.raises(ValueError):
            pc.pc_effective_data_povm(povm, 0.0, 3)
