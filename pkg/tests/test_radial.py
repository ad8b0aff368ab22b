import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from screwon.core import ModelParams, nondimensionalize
from screwon.errors import DomainError, FreeParticleError, ResolutionError
from screwon.radial import (FORMS, RadialProblem, asymptotic_tail, double_scaling_eigensolve,
                            eigensolve, fd_eigenpairs, frobenius_coeffs, ode_residual,
                            shoot_eigenvalues, to_physical)

from .oracles import basis_levels

P1 = ModelParams(lam=1.0, k=1.0, p_z=0.3, l=1)
# frozen from basis_levels (Laguerre basis), agreeing with both routes to < 1e-10
FROZEN_P1 = [5.908258752265129, 12.127465047443797, 19.19173645450936,
             26.919832659850552, 35.2058081204767]
FROZEN_DS = [2.115726499826525, 4.370692894261208, 6.992290892182236, 9.896039538465864]


class TestProblem:
    def test_coefficients_full(self):
        rp = RadialProblem.from_params(P1)
        assert rp.coefficients == pytest.approx((1.0, 0.95, 0.25, 1.0))

    def test_forms(self):
        dp = nondimensionalize(ModelParams(lam=2.0, k=1.0, hbar=0.5, p_z=0.2, l=2))
        weak = RadialProblem.from_dimensionless(dp, form="weak").coefficients
        high = RadialProblem.from_dimensionless(dp, form="high_energy").coefficients
        assert weak == (dp.hbar_t ** 2, 1.0, 0.0, 0.0)
        assert high[1] == high[2] == dp.beta_t
        ds = RadialProblem.double_scaling(3.0, -2)
        assert ds.coefficients == (1.0, 2.25, 2.25, -6.0)
        assert ds.energy_scale == pytest.approx(1 / 9)

    def test_double_scaling_from_params(self):
        rp = RadialProblem.from_params(ModelParams(lam=2.0, hbar=0.5, l=1), "double_scaling")
        assert rp.dp is None and rp.g_t == pytest.approx(4.0)

    def test_rejects(self):
        with pytest.raises(DomainError):
            RadialProblem.from_params(P1, "bogus")
        with pytest.raises(DomainError):
            RadialProblem.double_scaling(0.0, 1)
        with pytest.raises(FreeParticleError):
            RadialProblem.from_params(ModelParams(k=0.0))
        assert set(FORMS) == {"full", "weak", "high_energy", "double_scaling"}

    def test_v_eff(self):
        rp = RadialProblem.from_params(P1)
        assert rp.v_eff(2.0) == pytest.approx(0.95 * 4 + 0.25 * 16 + 1.0 + 0.25)


class TestEigenvalues:
    def test_frozen_fd(self):
        assert np.allclose(eigensolve(RadialProblem.from_params(P1), 5).energies, FROZEN_P1,
                           rtol=1e-10, atol=0)

    def test_frozen_shoot(self):
        got = eigensolve(RadialProblem.from_params(P1), 5, method="shoot").energies
        assert np.allclose(got, FROZEN_P1, rtol=1e-10, atol=0)

    def test_basis_oracle(self):
        ref = basis_levels(1.0, 0.95, 0.25, 1.0, 1, 5)
        assert np.allclose(ref, FROZEN_P1, rtol=1e-9)

    @settings(max_examples=15)
    @given(st.floats(0.1, 10.0), st.floats(0.3, 2.0), st.floats(-1.0, 1.0), st.integers(-3, 3))
    def test_fd_vs_basis(self, lam, hbar, pz, l):
        p = ModelParams(lam=lam, hbar=hbar, p_z=pz, l=l)
        rp = RadialProblem.from_params(p)
        c, A, B, C = rp.coefficients
        if A <= 0:
            return
        got = eigensolve(rp, 3).energies
        ref = basis_levels(c, A, B, C, l, 3, N=160)
        assert np.allclose(got, ref, rtol=1e-7)

    def test_double_scaling_frozen(self):
        assert np.allclose(double_scaling_eigensolve(2.0, 1, 4), FROZEN_DS, rtol=1e-10)
        shoot = eigensolve(RadialProblem.double_scaling(2.0, 1), 4, method="shoot").energies
        assert np.allclose(shoot, FROZEN_DS, rtol=1e-10)

    def test_double_scaling_depends_on_g_only(self):
        a = double_scaling_eigensolve(1.5, 2, 3)
        b = eigensolve(RadialProblem.from_params(ModelParams(lam=3.0, hbar=10.0, k=5.0, l=2),
                                                 "double_scaling"), 3).energies
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("l", [0, 1, -2, 4])
    def test_weak_form_exact(self, l):
        dp = nondimensionalize(ModelParams(lam=0.7, hbar=0.6, l=l))
        got = eigensolve(RadialProblem.from_dimensionless(dp, form="weak"), 6).energies
        exact = 2 * 0.6 * (2 * np.arange(6) + abs(l) + 1)
        assert np.allclose(got, exact, rtol=1e-8)

    def test_both_methods_rows(self):
        tab = eigensolve(RadialProblem.from_params(P1), 3, method="both")
        assert len(tab) == 6
        assert {r.method for r in tab} == {"radial-fd", "radial-shoot"}
        # shooting rows carry their distance from the FD value
        assert max(r.residual for r in tab if r.method == "radial-shoot") < 1e-9
        assert tab.quantity == "E1_t"

    def test_user_box_too_small(self):
        with pytest.raises(ResolutionError):
            fd_eigenpairs(RadialProblem.from_params(P1), 3, R=1.0)

    def test_count_validation(self):
        with pytest.raises(DomainError):
            eigensolve(RadialProblem.from_params(P1), 0)
        with pytest.raises(DomainError):
            eigensolve(RadialProblem.from_params(P1), 2, method="magic")

    def test_eigenvectors(self):
        res = fd_eigenpairs(RadialProblem.from_params(P1), 4, vectors=True)
        h = res.R / res.N
        gram = (res.rho * res.r[:, None]).T @ res.rho * h
        assert np.allclose(gram, np.eye(4), atol=1e-10)
        # level n has n interior nodes
        for j in range(4):
            s = np.sign(res.rho[:, j][np.abs(res.rho[:, j]) > 1e-8])
            assert np.sum(s[1:] != s[:-1]) == j

    def test_to_physical(self):
        E = to_physical(P1, np.array(FROZEN_P1))
        assert E[0] == pytest.approx(0.5 * (FROZEN_P1[0] + 0.09 + 1.0))

    def test_shoot_guesses(self):
        ev = shoot_eigenvalues(RadialProblem.from_params(P1), 2, guesses=[10.0, 14.0])
        assert np.allclose(ev, FROZEN_P1[:2], rtol=1e-10)


class TestFrobenius:
    @pytest.mark.parametrize("l", [0, 1, -3])
    def test_recurrence(self, l):
        rp = RadialProblem.from_params(P1.replace(l=l))
        fs = frobenius_coeffs(rp, 7.0, 30)
        c, A, B, C = rp.coefficients
        rho = fs.coeffs
        al = abs(l)
        for n in range(6, 31, 2):
            rhs = (C - 7.0) / c * rho[n - 2] + A / c * rho[n - 4] + B / c * rho[n - 6]
            assert (n * n + 2 * n * al) * rho[n] == pytest.approx(rhs, rel=1e-13, abs=1e-300)
        assert np.all(rho[1::2] == 0.0)
        assert fs.eta == al

    def test_low_order_closed_form(self):
        # rho_2 = (C - eps) / (c (4 + 4|l|))
        rp = RadialProblem.from_params(P1)
        fs = frobenius_coeffs(rp, 5.0, 6, rho0=2.0)
        assert fs.coeffs[2] == pytest.approx(2.0 * (1.0 - 5.0) / 8.0)

    def test_series_matches_eigenfunction(self):
        rp = RadialProblem.from_params(P1)
        res = fd_eigenpairs(rp, 1, vectors=True)
        fs = frobenius_coeffs(rp, res.eps[0], 40)
        r = res.r[(res.r > 0.05) & (res.r < 0.5)]
        rho = np.interp(r, res.r, res.rho[:, 0])
        ratio = rho / fs(r)
        assert np.ptp(ratio) / ratio.mean() < 1e-4

    @pytest.mark.parametrize("N", [6, 8, 10])
    def test_residual_order(self, N):
        rp = RadialProblem.from_params(P1)
        fs = frobenius_coeffs(rp, 6.0, N)
        r = np.array([0.1, 0.2])
        res = np.abs(ode_residual(rp, 6.0, fs(r), fs.derivative(r), fs.second_derivative(r), r))
        # relative residual ~ r^N
        assert math.log(res[1] / res[0] / 2.0) / math.log(2.0) == pytest.approx(N, abs=0.3)

    def test_derivatives(self):
        fs = frobenius_coeffs(RadialProblem.from_params(P1.replace(l=2)), 4.0, 12)
        r, h = 0.4, 1e-5
        assert fs.derivative(r) == pytest.approx((fs(r + h) - fs(r - h)) / (2 * h), rel=1e-8)
        assert fs.second_derivative(r) == pytest.approx(
            (fs.derivative(r + h) - fs.derivative(r - h)) / (2 * h), rel=1e-8)

    @pytest.mark.parametrize("N", [5, 7.5, -1])
    def test_bad_N(self, N):
        with pytest.raises(DomainError):
            frobenius_coeffs(RadialProblem.from_params(P1), 1.0, N)


class TestTail:
    def test_tail_solves_equation_asymptotically(self):
        rp = RadialProblem.from_params(P1)
        r = np.array([6.0, 8.0])
        h = 1e-4
        f = lambda x: asymptotic_tail(rp, x)
        d1 = (f(r + h) - f(r - h)) / (2 * h)
        d2 = (f(r + h) - 2 * f(r) + f(r - h)) / h ** 2
        res = ode_residual(rp, 6.0, f(r), d1, d2, r) / (rp.coefficients[2] * r ** 4 * f(r))
        assert np.all(np.abs(res) < 0.05)
        assert abs(res[1]) < abs(res[0])

    def test_weak_has_no_quartic_tail(self):
        dp = nondimensionalize(P1)
        with pytest.raises(DomainError):
            asymptotic_tail(RadialProblem.from_dimensionless(dp, form="weak"), 3.0)
