"""Polynomial-coefficient differential operators on the (x, y) plane.

A :class:`WeylElement` is a finite sum of terms ``c * x^i y^j d_x^a d_y^b``
with derivatives written to the right.  Products follow the Leibniz rule,
so commutators are computed exactly in the chosen coefficient field:

* complex floats (default); tiny coefficients are pruned relative to the
  element's largest one;
* :class:`GaussianRational`, exact complex rationals, used when
  ``exact=True``.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from math import comb

from .core import ModelParams
from .errors import DomainError

__all__ = [
    "GaussianRational",
    "WeylElement",
    "build_generators",
    "commutator",
    "commutation_table",
    "verify_nilpotency",
    "casimir_check",
    "heisenberg_check",
    "poisson_bracket",
    "GENERATOR_NAMES",
]

GENERATOR_NAMES = ("L1", "L2", "L3", "K3", "S1", "S2", "S3")
_PRUNE = 1e-14


class GaussianRational:
    """Exact complex number with :class:`fractions.Fraction` parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, v) -> "GaussianRational":
        if isinstance(v, GaussianRational):
            return v
        if isinstance(v, complex):
            return cls(Fraction(v.real), Fraction(v.imag))
        return cls(Fraction(v), 0)

    def __add__(self, o):
        o = GaussianRational.coerce(o)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, o):
        return self + (-GaussianRational.coerce(o))

    def __rsub__(self, o):
        return GaussianRational.coerce(o) - self

    def __mul__(self, o):
        o = GaussianRational.coerce(o)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = GaussianRational.coerce(o)
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("division by zero")
        return self * GaussianRational(o.re / d, -o.im / d)

    def __rtruediv__(self, o):
        return GaussianRational.coerce(o) / self

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __abs__(self):
        return math.hypot(float(self.re), float(self.im))

    def __eq__(self, o):
        try:
            o = GaussianRational.coerce(o)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"


def _ff(n, s):
    """Falling factorial n (n-1) ... (n-s+1)."""
    out = 1
    for q in range(s):
        out *= n - q
    return out


class WeylElement:
    """Immutable sum of ``coeff * x^i y^j d_x^a d_y^b`` terms.

    Terms are stored in a dict keyed by ``(a, b, i, j)`` order tuples via
    :attr:`terms` as ``{(i, j, a, b): coeff}``.
    """

    __slots__ = ("_terms", "exact")

    def __init__(self, terms=None, exact: bool = False):
        self.exact = exact
        clean = {}
        for key, c in (terms or {}).items():
            key = tuple(int(v) for v in key)
            if len(key) != 4 or min(key) < 0:
                raise ValueError(f"bad term key {key!r}")
            c = GaussianRational.coerce(c) if exact else complex(c)
            if c:
                clean[key] = clean.get(key, 0) + c if key in clean else c
        if not exact and clean:
            top = max(abs(v) for v in clean.values())
            clean = {k: v for k, v in clean.items() if abs(v) > _PRUNE * top}
        elif exact:
            clean = {k: v for k, v in clean.items() if v}
        # canonical order: derivative multi-order, then monomial
        self._terms = dict(sorted(clean.items(), key=lambda kv: (kv[0][2] + kv[0][3], kv[0][2], kv[0][3], kv[0][0], kv[0][1])))

    # -- constructors
    @classmethod
    def scalar(cls, c, exact=False):
        return cls({(0, 0, 0, 0): c}, exact)

    @classmethod
    def x(cls, exact=False):
        return cls({(1, 0, 0, 0): 1}, exact)

    @classmethod
    def y(cls, exact=False):
        return cls({(0, 1, 0, 0): 1}, exact)

    @classmethod
    def dx(cls, exact=False):
        return cls({(0, 0, 1, 0): 1}, exact)

    @classmethod
    def dy(cls, exact=False):
        return cls({(0, 0, 0, 1): 1}, exact)

    # -- inspection
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def norm(self) -> float:
        return max((abs(v) for v in self._terms.values()), default=0.0)

    def is_zero(self) -> bool:
        return not self._terms

    def is_central(self) -> bool:
        """True when the element is a multiple of the identity."""
        return all(k == (0, 0, 0, 0) for k in self._terms)

    def scalar_part(self):
        return self._terms.get((0, 0, 0, 0), GaussianRational(0) if self.exact else 0j)

    def degree(self) -> int:
        return max((sum(k) for k in self._terms), default=0)

    # -- arithmetic
    def _wrap(self, other):
        if isinstance(other, WeylElement):
            return other
        return WeylElement.scalar(other, self.exact)

    def _mode(self, other):
        return self.exact and other.exact

    def __add__(self, other):
        other = self._wrap(other)
        out = dict(self._terms)
        for k, v in other._terms.items():
            out[k] = out[k] + v if k in out else v
        return WeylElement(out, self._mode(other))

    __radd__ = __add__

    def __neg__(self):
        return WeylElement({k: -v for k, v in self._terms.items()}, self.exact)

    def __sub__(self, other):
        return self + (-self._wrap(other))

    def __rsub__(self, other):
        return self._wrap(other) - self

    def __mul__(self, other):
        if not isinstance(other, WeylElement):
            c = GaussianRational.coerce(other) if self.exact else complex(other)
            return WeylElement({k: v * c for k, v in self._terms.items()}, self.exact)
        exact = self._mode(other)
        out = {}
        for (i, j, a, b), c1 in self._terms.items():
            for (k, l, cx, dy), c2 in other._terms.items():
                base = c1 * c2
                # d_x^a x^k = sum_s C(a,s) k!/(k-s)! x^(k-s) d_x^(a-s)
                for s in range(min(a, k) + 1):
                    fx = comb(a, s) * _ff(k, s)
                    for t in range(min(b, l) + 1):
                        f = fx * comb(b, t) * _ff(l, t)
                        key = (i + k - s, j + l - t, a + cx - s, b + dy - t)
                        val = base * f
                        out[key] = out[key] + val if key in out else val
        return WeylElement(out, exact)

    def __rmul__(self, other):
        return self * other

    def __truediv__(self, other):
        if self.exact:
            inv = GaussianRational(1) / GaussianRational.coerce(other)
        else:
            inv = 1 / complex(other)
        return self * inv

    def __pow__(self, n: int):
        out = WeylElement.scalar(1, self.exact)
        for _ in range(int(n)):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, WeylElement):
            other = self._wrap(other)
        return (self - other).is_zero()

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def adjoint(self) -> "WeylElement":
        """Formal adjoint: (c x^i y^j d^alpha)^dagger = (-d)^alpha conj(c) x^i y^j."""
        out = WeylElement({}, self.exact)
        for (i, j, a, b), c in self._terms.items():
            d = WeylElement({(0, 0, a, b): (-1) ** (a + b)}, self.exact)
            mono = WeylElement({(i, j, 0, 0): c.conjugate()}, self.exact)
            out = out + d * mono
        return out

    def residual(self, other) -> float:
        return (self - self._wrap(other)).norm()

    def symbol(self, hbar) -> dict:
        """Classical symbol with d -> i p / hbar: ``{(i, j, a, b): coeff}`` in x, y, px, py."""
        out = {}
        for (i, j, a, b), c in self._terms.items():
            out[(i, j, a, b)] = complex(c) * (1j / hbar) ** (a + b)
        return out

    def to_complex(self) -> "WeylElement":
        return WeylElement({k: complex(v) for k, v in self._terms.items()}, False)

    def __repr__(self):
        if not self._terms:
            return "WeylElement(0)"
        parts = []
        for (i, j, a, b), c in self._terms.items():
            f = "".join(s for s in (
                f"x^{i}" if i else "", f"y^{j}" if j else "",
                f"dx^{a}" if a else "", f"dy^{b}" if b else "") if s)
            parts.append(f"({c})" + (f"*{f}" if f else ""))
        return " + ".join(parts)


def commutator(A: WeylElement, B: WeylElement) -> WeylElement:
    """[A, B] = A B - B A."""
    return A * B - B * A


def poisson_bracket(f: dict, g: dict) -> dict:
    """{f, g} for polynomials ``{(i, j, a, b): c}`` in (x, y, px, py)."""
    def d(poly, var):
        out = {}
        for key, c in poly.items():
            if key[var]:
                k2 = list(key)
                k2[var] -= 1
                out[tuple(k2)] = out.get(tuple(k2), 0) + c * key[var]
        return out

    def mul(p, q):
        out = {}
        for k1, c1 in p.items():
            for k2, c2 in q.items():
                k = tuple(u + v for u, v in zip(k1, k2))
                out[k] = out.get(k, 0) + c1 * c2
        return out

    res = {}
    for qv, pv in ((0, 2), (1, 3)):
        for k, c in mul(d(f, qv), d(g, pv)).items():
            res[k] = res.get(k, 0) + c
        for k, c in mul(d(f, pv), d(g, qv)).items():
            res[k] = res.get(k, 0) - c
    return {k: c for k, c in res.items() if c != 0}


# ---------------------------------------------------------------------------
# generators and checks


def _num(v, exact):
    return GaussianRational(Fraction(v)) if exact else complex(v)


def build_generators(p: ModelParams, exact: bool = False) -> dict:
    """The seven generators on the fixed-p_z sector.

    L1 = k y, L2 = -k x, L3 = -m k I, K3 = -k I,
    S1 = -i hbar d_x - (lambda/2) m k y,
    S2 = -i hbar d_y + (lambda/2) m k x,
    S3 = (p_z - k/lambda) I - (lambda k / 2)(x^2 + y^2).

    With ``exact=True`` every float parameter is taken at its exact binary
    value and all arithmetic is exact.
    """
    if p.lam == 0:
        raise DomainError("generators need lambda != 0 (S3 contains k / lambda)")
    n = lambda v: _num(v, exact)
    k, lam, m, hb, pz = n(p.k), n(p.lam), n(p.m), n(p.hbar), n(p.p_z)
    i = GaussianRational(0, 1) if exact else 1j
    half = n(Fraction(1, 2))
    W = lambda t: WeylElement(t, exact)
    gens = {
        "L1": W({(0, 1, 0, 0): k}),
        "L2": W({(1, 0, 0, 0): -k}),
        "L3": W({(0, 0, 0, 0): -m * k}),
        "K3": W({(0, 0, 0, 0): -k}),
        "S1": W({(0, 0, 1, 0): -i * hb, (0, 1, 0, 0): -half * lam * m * k}),
        "S2": W({(0, 0, 0, 1): -i * hb, (1, 0, 0, 0): half * lam * m * k}),
        "S3": W({(0, 0, 0, 0): pz - k / lam, (2, 0, 0, 0): -half * lam * k,
                 (0, 2, 0, 0): -half * lam * k}),
    }
    return gens


def _ih(p, exact):
    return (GaussianRational(0, 1) * GaussianRational(Fraction(p.hbar))) if exact else 1j * p.hbar


def _scale(gens):
    return max(g.norm() for g in gens.values())


def commutation_table(gens: dict, p: ModelParams) -> list:
    """Every pairwise commutator against the expected value.

    Expected nonzero brackets: [L1,S2] = -i hbar K3, [L2,S1] = i hbar K3,
    [S1,S2] = i hbar lambda L3, [S1,S3] = -i hbar lambda L2,
    [S2,S3] = i hbar lambda L1; all other pairs commute.
    """
    exact = gens["L1"].exact
    ih = _ih(p, exact)
    lam = _num(p.lam, exact)
    expected = {
        ("L1", "S2"): gens["K3"] * (-ih),
        ("L2", "S1"): gens["K3"] * ih,
        ("S1", "S2"): gens["L3"] * (ih * lam),
        ("S1", "S3"): gens["L2"] * (-(ih * lam)),
        ("S2", "S3"): gens["L1"] * (ih * lam),
    }
    names = list(GENERATOR_NAMES)
    scale = _scale(gens) ** 2
    rows = []
    for a, b in itertools.combinations(names, 2):
        got = commutator(gens[a], gens[b])
        if (a, b) in expected:
            want = expected[(a, b)]
        elif (b, a) in expected:
            want = -expected[(b, a)]
        else:
            want = WeylElement({}, exact)
        rows.append({"relation": f"[{a},{b}]", "residual": got.residual(want) / scale,
                     "zero": want.is_zero()})
    return rows


def verify_nilpotency(gens: dict) -> dict:
    """Double brackets among L_a, S_a are central; triple brackets vanish."""
    names = ["L1", "L2", "L3", "S1", "S2", "S3"]
    scale = _scale(gens)
    double_res = 0.0
    triple_res = 0.0
    n_double = n_triple = 0
    for a, b in itertools.product(names, repeat=2):
        ab = commutator(gens[a], gens[b])
        for c in names:
            abc = commutator(ab, gens[c])
            n_double += 1
            noncentral = WeylElement({k: v for k, v in abc.terms.items() if k != (0, 0, 0, 0)}, abc.exact)
            double_res = max(double_res, noncentral.norm() / scale ** 3)
            for d in GENERATOR_NAMES:
                n_triple += 1
                triple_res = max(triple_res, commutator(abc, gens[d]).norm() / scale ** 4)
    return {"double_noncentral_residual": double_res, "triple_residual": triple_res,
            "double_count": n_double, "triple_count": n_triple,
            "step3": double_res == 0.0 and triple_res == 0.0}


def casimir_operator(gens: dict, p: ModelParams) -> WeylElement:
    """c k^2 = (L1^2 + L2^2 + L3^2)/2 + k S3 / lambda."""
    exact = gens["L1"].exact
    half = _num(Fraction(1, 2), exact)
    k_over_lam = _num(Fraction(p.k) / Fraction(p.lam), exact) if exact else p.k / p.lam
    L2sum = gens["L1"] * gens["L1"] + gens["L2"] * gens["L2"] + gens["L3"] * gens["L3"]
    return L2sum * half + gens["S3"] * k_over_lam


def casimir_check(gens: dict, p: ModelParams) -> dict:
    """L3 and c k^2 commute with every generator; c k^2 is a scalar.

    The scalar minus (k^2 m^2/2 - k^2/lambda^2) should equal k p_z / lambda.
    """
    exact = gens["L1"].exact
    C = casimir_operator(gens, p)
    scale = _scale(gens)
    comm_L3 = max(commutator(gens["L3"], g).norm() for g in gens.values()) / scale ** 2
    comm_C = max(commutator(C, g).norm() for g in gens.values()) / scale ** 3
    if exact:
        F = Fraction
        base = F(p.k) ** 2 * F(p.m) ** 2 / 2 - F(p.k) ** 2 / F(p.lam) ** 2
        shift = C.scalar_part() - base
        want = F(p.k) * F(p.p_z) / F(p.lam)
        shift_res = abs(shift - want)
        shift_val = complex(shift)
    else:
        base = p.k ** 2 * p.m ** 2 / 2 - p.k ** 2 / p.lam ** 2
        shift_val = complex(C.scalar_part()) - base
        want = p.k * p.p_z / p.lam
        shift_res = abs(shift_val - want)
    return {"L3_commutator_residual": comm_L3, "casimir_commutator_residual": comm_C,
            "casimir_is_scalar": C.is_central(), "eigenvalue_shift": shift_val,
            "expected_shift": complex(want), "shift_residual": float(shift_res) / max(scale ** 2, 1.0)}


_EPS = {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1, (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}


def hamiltonian_operator(gens: dict, p: ModelParams) -> WeylElement:
    """H = (S_a S_a + L_a L_a)/2 + k S3 / lambda + k^2 / (2 lambda^2)."""
    exact = gens["L1"].exact
    n = lambda v: _num(v, exact)
    half = n(Fraction(1, 2))
    S = [gens["S1"], gens["S2"], gens["S3"]]
    L = [gens["L1"], gens["L2"], gens["L3"]]
    H = sum((s * s for s in S), WeylElement({}, exact)) + sum((l * l for l in L), WeylElement({}, exact))
    H = H * half
    if exact:
        kl = Fraction(p.k) / Fraction(p.lam)
        H = H + S[2] * n(kl) + WeylElement.scalar(n(kl * kl / 2), exact)
    else:
        H = H + S[2] * (p.k / p.lam) + WeylElement.scalar(p.k ** 2 / (2 * p.lam ** 2))
    return H


def heisenberg_check(gens: dict, p: ModelParams) -> list:
    """Compare (1/i hbar)[X_a, H] with the Euler right-hand sides.

    For S_a both orderings lambda eps_abc S_b L_c and its symmetrised form
    are tested; the report names the ordering that matches (or ``none``).
    """
    exact = gens["L1"].exact
    ih = _ih(p, exact)
    lam = _num(p.lam, exact)
    half = _num(Fraction(1, 2), exact)
    H = hamiltonian_operator(gens, p)
    S = [gens["S1"], gens["S2"], gens["S3"]]
    L = [gens["L1"], gens["L2"], gens["L3"]]
    zero = WeylElement({}, exact)
    K = [zero, zero, gens["K3"]]
    scale = max(_scale(gens), 1.0) ** 3
    rows = []
    for a in range(3):
        lhs = commutator(S[a], H) / ih
        plain = zero
        sym = zero
        for (x, b, c), s in _EPS.items():
            if x != a:
                continue
            plain = plain + (S[b] * L[c]) * (lam * s)
            sym = sym + (S[b] * L[c] + L[c] * S[b]) * (lam * s * half)
        rp, rs = lhs.residual(plain) / scale, lhs.residual(sym) / scale
        tol = 0.0 if exact else 1e-13
        match = "symmetrized" if rs <= tol else ("plain" if rp <= tol else "none")
        if rs <= tol and rp <= tol:
            match = "both"
        rows.append({"relation": f"dS{a + 1}/dt", "matched_ordering": match,
                     "residual": min(rp, rs), "residual_plain": rp, "residual_symmetrized": rs})
    for a in range(3):
        lhs = commutator(L[a], H) / ih
        rhs = zero
        for (x, b, c), s in _EPS.items():
            if x == a:
                rhs = rhs + (K[b] * S[c]) * s
        r = lhs.residual(rhs) / scale
        rows.append({"relation": f"dL{a + 1}/dt", "matched_ordering": "unique",
                     "residual": r})
    return rows
