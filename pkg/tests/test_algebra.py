import random
from fractions import Fraction as F

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from screwon.algebra import (GENERATOR_NAMES, GaussianRational, WeylElement, build_generators,
                             casimir_check, commutation_table, commutator, heisenberg_check,
                             poisson_bracket, verify_nilpotency)
from screwon.classical import ls_rhs
from screwon.core import ModelParams
from screwon.errors import DomainError

X, Y = sp.symbols("x y")
P = ModelParams(lam=0.7, k=1.3, m=0.9, hbar=1.1, p_z=0.4)


def apply(op: WeylElement, f):
    """Act with ``op`` on a sympy expression by direct differentiation."""
    out = 0
    for (i, j, a, b), c in op.terms.items():
        g = f
        if a:
            g = sp.diff(g, X, a)
        if b:
            g = sp.diff(g, Y, b)
        out += sp.nsimplify(complex(c)) * X ** i * Y ** j * g
    return sp.expand(out)


def random_element(rng, deg=3, exact=True):
    terms = {}
    for _ in range(rng.randint(1, 4)):
        key = tuple(rng.randint(0, deg) for _ in range(4))
        if sum(key) <= deg:
            terms[key] = GaussianRational(F(rng.randint(-5, 5), rng.randint(1, 4)), F(rng.randint(-3, 3)))
    return WeylElement(terms, exact=exact)


class TestWeyl:
    def test_canonical_commutator(self):
        assert commutator(WeylElement.x(), WeylElement.dx()) == WeylElement.scalar(-1)
        assert commutator(WeylElement.dy(), WeylElement.y()) == WeylElement.scalar(1)
        assert commutator(WeylElement.x(), WeylElement.dy()).is_zero()

    def test_s1_on_xy(self):
        lam, m, k, hb = sp.symbols("lambda m k hbar")
        g = build_generators(ModelParams(lam=2.0, k=3.0, m=0.5, hbar=0.25))
        got = apply(g["S1"], X * Y)
        want = (-sp.I * hb * Y - lam / 2 * m * k * X * Y ** 2).subs({lam: 2, m: sp.Rational(1, 2),
                                                                     k: 3, hb: sp.Rational(1, 4)})
        assert sp.simplify(got - want) == 0

    def test_product_matches_composition(self):
        rng = random.Random(7)
        f = X ** 3 * Y ** 2 + 2 * X * Y ** 4 + 5
        for _ in range(30):
            A, B = random_element(rng), random_element(rng)
            assert sp.expand(apply(A * B, f) - apply(A, apply(B, f))) == 0

    def test_associativity_and_jacobi(self):
        rng = random.Random(11)
        for _ in range(200):
            A, B, C = (random_element(rng) for _ in range(3))
            assert (A * B) * C == A * (B * C)
            jac = (commutator(A, commutator(B, C)) + commutator(B, commutator(C, A))
                   + commutator(C, commutator(A, B)))
            assert jac.is_zero()

    def test_adjoint_involution(self):
        rng = random.Random(3)
        for _ in range(50):
            A, B = random_element(rng), random_element(rng)
            assert A.adjoint().adjoint() == A
            assert (A * B).adjoint() == B.adjoint() * A.adjoint()

    def test_bad_key(self):
        with pytest.raises(ValueError):
            WeylElement({(1, 2, 3): 1.0})

    def test_float_pruning(self):
        w = WeylElement({(0, 0, 0, 0): 1.0, (1, 0, 0, 0): 1e-20})
        assert list(w.terms) == [(0, 0, 0, 0)]

    def test_gaussian_rational(self):
        z = GaussianRational(F(1, 2), F(-3))
        assert z * z.conjugate() == GaussianRational(F(37, 4))
        assert (z / z) == GaussianRational(1)
        assert complex(z) == 0.5 - 3j


class TestGenerators:
    def test_requires_lambda(self):
        with pytest.raises(DomainError):
            build_generators(P.replace(lam=0.0))

    @pytest.mark.parametrize("exact", [False, True])
    def test_table(self, exact):
        rows = commutation_table(build_generators(P, exact=exact), P)
        assert len(rows) == 21
        tol = 0.0 if exact else 1e-13
        assert all(r["residual"] <= tol for r in rows)
        assert sum(not r["zero"] for r in rows) == 5

    def test_hermitian(self):
        for name, g in build_generators(P, exact=True).items():
            assert g.adjoint() == g, name

    @pytest.mark.parametrize("exact", [False, True])
    def test_nilpotency(self, exact):
        r = verify_nilpotency(build_generators(P, exact=exact))
        assert r["triple_residual"] == 0.0
        assert r["double_noncentral_residual"] <= (0.0 if exact else 1e-13)
        assert r["double_count"] == 216 and r["triple_count"] == 1512

    @given(st.floats(0.1, 5), st.floats(0.1, 5), st.floats(0.1, 3), st.floats(-2, 2))
    def test_casimir(self, lam, k, m, pz):
        p = ModelParams(lam=lam, k=k, m=m, p_z=pz)
        c = casimir_check(build_generators(p), p)
        assert c["casimir_is_scalar"]
        assert c["L3_commutator_residual"] <= 1e-13
        assert c["casimir_commutator_residual"] <= 1e-13
        assert c["shift_residual"] <= 1e-13
        assert c["expected_shift"] == pytest.approx(k * pz / lam)

    def test_casimir_exact(self):
        c = casimir_check(build_generators(P, exact=True), P)
        assert c["shift_residual"] == 0.0

    @pytest.mark.parametrize("exact", [False, True])
    def test_heisenberg(self, exact):
        rows = heisenberg_check(build_generators(P, exact=exact), P)
        byrel = {r["relation"]: r for r in rows}
        assert set(byrel) == {f"d{v}{a}/dt" for v in "SL" for a in (1, 2, 3)}
        for r in rows:
            assert r["residual"] <= (0.0 if exact else 1e-13)
            assert r["matched_ordering"] != "none"
        # the symmetrised ordering always reproduces the Euler equations
        for a in (1, 2, 3):
            assert byrel[f"dS{a}/dt"]["residual_symmetrized"] <= (0.0 if exact else 1e-13)


class TestClassicalLimit:
    def test_symbols_and_brackets(self):
        # (1/i hbar)[A, B] -> {A, B} on symbols, and the Euler flow is recovered
        hb = 1e-3
        p = P.replace(hbar=hb, p_z=0.0)
        g = build_generators(p)
        sym = {n: g[n].symbol(hb) for n in GENERATOR_NAMES}
        pt = np.array([0.3, -0.4, 0.2, 0.5])  # x, y, px, py

        def ev(poly):
            return sum(complex(c) * pt[0] ** i * pt[1] ** j * pt[2] ** a * pt[3] ** b
                       for (i, j, a, b), c in poly.items())

        ls = np.array([ev(sym[n]).real for n in ("L1", "L2", "L3", "S1", "S2", "S3")])
        H = {}
        for n in ("L1", "L2", "L3", "S1", "S2", "S3"):
            for key, c in poisson_bracket(sym[n], sym[n]).items():
                H[key] = c
        assert not H  # {f, f} = 0
        for n, a in zip(("S1", "S2", "S3", "L1", "L2"), (3, 4, 5, 0, 1)):
            # {X, H_cl} with H_cl = (S.S + L.L)/2 + k S3 / lambda
            total = 0.0
            for m in ("S1", "S2", "S3", "L1", "L2", "L3"):
                total += ev(sym[m]).real * ev(poisson_bracket(sym[n], sym[m])).real
            total += p.k / p.lam * ev(poisson_bracket(sym[n], sym["S3"])).real
            assert total == pytest.approx(ls_rhs(ls, p)[a], abs=1e-9)
