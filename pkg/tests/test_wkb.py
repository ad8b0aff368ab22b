import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from screwon.core import ModelParams
from screwon.errors import (BracketError, ClassicallyForbiddenError, DegenerateTurningPointsError,
                            DomainError, FreeParticleError)
from screwon.wkb import (action, action_integral, effective_minimum, fit_power_law, map_to_zj,
                         quantize, quantize_sweep, turning_points, weak_coupling_spectrum)

from .oracles import action_quad_x, radial_action_quad, wkb_levels_quad

P1 = ModelParams(lam=1.0, k=1.0, p_z=0.3, l=1)
P2 = ModelParams(lam=2.5, k=0.7, m=1.3, mu=0.8, hbar=0.6, p_z=-0.4, l=-2)

# frozen from wkb_levels_quad (r-space quadrature of the Darboux Hamiltonian)
FROZEN_P1 = [4.97405325192395, 8.314724004334185, 12.023530566582542,
             16.033941450929728, 20.303475880624]
FROZEN_P2 = [11.79291373314291, 43.68493844243798]

params = st.builds(ModelParams, lam=st.floats(0.05, 30.0), k=st.floats(0.1, 5.0),
                   m=st.floats(0.3, 3.0), mu=st.floats(0.3, 3.0), hbar=st.floats(0.2, 3.0),
                   p_z=st.floats(-2.0, 2.0), l=st.integers(-4, 4))


class TestTurningPoints:
    def test_roots_solve_cubic(self):
        ap = turning_points(P2, 20.0)
        c, b, a = ap.roots
        assert c < 0 < b < a
        for x in ap.roots:
            assert abs(ap.Q(x)) <= 1e-12 * ap.scale
        assert ap.Q(0.5 * (a + b)) > 0

    def test_modulus(self):
        ap = turning_points(P1, 10.0)
        c, b, a = ap.roots
        assert ap.zeta.zeta ** 2 == pytest.approx((a - b) / (a - c), rel=1e-15)

    def test_minimum_matches_oracle(self):
        rs = np.geomspace(0.05, 5, 20001)
        from .oracles import radial_energy
        e = min(radial_energy(P2, r) for r in rs)
        assert effective_minimum(P2) == pytest.approx(e, rel=1e-6)

    def test_forbidden(self):
        e0 = effective_minimum(P1)
        with pytest.raises(ClassicallyForbiddenError) as exc:
            turning_points(P1, e0 - 1.0)
        assert exc.value.e_min == e0

    def test_degenerate(self):
        with pytest.raises(DegenerateTurningPointsError):
            turning_points(P1, effective_minimum(P1))

    def test_free_particle(self):
        with pytest.raises(FreeParticleError):
            effective_minimum(ModelParams(k=0.0))

    def test_beta_zero_quadratic(self):
        p = ModelParams(lam=0.0, k=1.0, l=2)
        ap = turning_points(p, 5.0)
        assert ap.roots[0] == -math.inf
        assert action_integral(ap) == pytest.approx(action_quad_x(ap), rel=1e-12)


class TestAction:
    @given(params, st.floats(0.01, 100.0))
    def test_elliptic_vs_quad(self, p, frac):
        e0 = effective_minimum(p)
        ap = turning_points(p, e0 + frac * max(abs(e0), 1.0))
        assert action_integral(ap, "elliptic") == pytest.approx(action_quad_x(ap), rel=1e-9)

    @given(params, st.floats(0.01, 100.0))
    def test_trapezoid_vs_quad(self, p, frac):
        e0 = effective_minimum(p)
        ap = turning_points(p, e0 + frac * max(abs(e0), 1.0))
        assert action_integral(ap, "trapezoid") == pytest.approx(action_quad_x(ap), rel=1e-10)

    def test_r_space_oracle(self):
        for E in (3.0, 10.0, 40.0):
            assert action(P1, E) == pytest.approx(radial_action_quad(P1, E), rel=1e-10)

    def test_near_minimum_small_oscillation(self):
        # S ~ pi (E - E_min) / omega_r just above the minimum; auto route stays accurate
        e0 = effective_minimum(P1)
        ap = turning_points(P1, e0 * (1 + 1e-7))
        assert action_integral(ap) == pytest.approx(action_quad_x(ap), rel=1e-8)

    def test_below_minimum_is_zero(self):
        assert action(P1, effective_minimum(P1) - 1) == 0.0

    @given(params)
    def test_monotone(self, p):
        e0 = effective_minimum(p)
        s = [action(p, e0 + d) for d in np.geomspace(1e-3, 1e3, 12) * max(abs(e0), 1)]
        assert all(np.diff(s) > 0)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            action_integral(turning_points(P1, 10.0), "simpson")


class TestQuantize:
    def test_frozen_oracle(self):
        assert np.allclose(quantize(P1, range(1, 6)).energies, FROZEN_P1, rtol=1e-12, atol=0)
        assert np.allclose(quantize(P2, [3, 10]).energies, FROZEN_P2, rtol=1e-12, atol=0)

    @pytest.mark.slow
    def test_live_oracle(self):
        ref = wkb_levels_quad(P1, [2, 4], maslov=0.5)
        got = quantize(P1, [2, 4], maslov=0.5).energies
        assert np.allclose(got, ref, rtol=1e-10)

    def test_action_residual(self):
        tab = quantize(P2, [1, 5, 50])
        for row in tab:
            assert row.residual < 1e-12
            assert action(P2, row.E) == pytest.approx(row.n * math.pi * P2.hbar, rel=1e-12)

    def test_sorted_and_increasing(self):
        tab = quantize(P1, [5, 1, 3])
        assert list(tab.ns) == [1, 3, 5]
        assert tab.is_increasing()

    def test_maslov_domain(self):
        with pytest.raises(DomainError):
            quantize(P1, [0])
        quantize(P1, [0], maslov=0.5)

    def test_ceiling(self):
        with pytest.raises(BracketError):
            quantize(P1, [1000], e_ceiling=10.0)

    def test_weak_coupling_identification(self):
        # lambda -> 0: E1 -> (2n + |l|) hbar k / sqrt(mu) under the integer rule
        p = ModelParams(lam=1e-8, k=1.3, mu=1.7, hbar=0.8, l=3)
        ns = np.array([1, 10, 100])
        E = quantize(p, ns).energies
        E1 = E - p.k ** 2 / 2 - p.p_theta * p.lam * p.k * p.m / (2 * p.mu)
        assert np.allclose(E1, (2 * ns + 3) * p.hbar * p.k / math.sqrt(p.mu), rtol=1e-7)

    def test_weak_coupling_spectrum(self):
        p = ModelParams(lam=0.0, k=2.0, mu=4.0, hbar=0.5, p_z=1.0)
        assert weak_coupling_spectrum(p, 3) == pytest.approx(2.0 + 4 * 0.5 * 2 / 2 + 1 / 8)
        with pytest.raises(DomainError):
            weak_coupling_spectrum(p, -1)

    @given(params)
    def test_sweep_matches_quantize(self, p):
        ns = [1, 7, 40]
        a = quantize(p, ns).energies
        b = quantize_sweep(p, ns).energies
        assert np.allclose(a, b, rtol=1e-12)

    def test_sweep_unpolished(self):
        ns = list(range(100, 2000, 100))
        a = quantize(P1, ns).energies
        b = quantize_sweep(P1, ns, polish=False).energies
        assert np.allclose(a, b, rtol=1e-6)

    def test_csv(self):
        text = quantize(P1, [1, 2]).to_csv()
        lines = text.strip().splitlines()
        assert len(lines) == 3
        assert "4.97405325192" in lines[1]


class TestFits:
    def test_exact_power_law(self):
        x = np.geomspace(1, 100, 10)
        f = fit_power_law(x, 3 * x ** 0.7)
        assert f.exponent == pytest.approx(0.7, rel=1e-12)
        assert f.prefactor == pytest.approx(3.0, rel=1e-12)
        assert f.r2 == pytest.approx(1.0)

    @pytest.mark.parametrize("x,y", [([1, 2], [1, 2]), ([1, 2, 3], [1, -2, 3]), ([1, 2, 3], [1, 2])])
    def test_rejects(self, x, y):
        with pytest.raises(DomainError):
            fit_power_law(x, y)


class TestZJMap:
    def test_mass_root(self):
        p = ModelParams(lam=1.5, k=0.8, m=1.1, hbar=0.7, p_z=0.2, l=1)
        z = map_to_zj(p)
        M = z.mu_plus
        res = 16 * M * M - 4 * p.k ** 2 * p.hbar ** 2 * M - p.hbar ** 2 * (
            p.lam ** 2 * p.k ** 2 * p.m ** 2 - 4 * p.lam * p.k * p.p_z)
        assert abs(res) < 1e-13
        assert z.mu_plus >= z.mu_minus
        assert z.g < 0
        assert z.calE(z.energy_shift + 2.0) == pytest.approx(2.0)
