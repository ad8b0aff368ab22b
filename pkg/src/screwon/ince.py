"""Singularity classification of y'' + p(z) y' + q(z) y = 0 with rational p, q.

Every point gets a kind (ordinary, regular-elementary,
regular-nonelementary, irregular), indicial exponents when regular and a
Poincare rank.  The Ince type ``[a,b,c_s,...]`` counts elementary regular
points, nonelementary regular points and irregular points grouped by
species (twice the rank).

Two arithmetic modes exist.  When every coefficient is rational
(``int``, :class:`fractions.Fraction` or a parsed literal), classification
is exact: finite singular points are handled through squarefree
factorisations and gcds, so no root is ever approximated for a decision.
Float input uses companion-matrix roots with multiplicity clustering.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, NumericalError

__all__ = [
    "RationalFunction",
    "RationalODE",
    "SingularPoint",
    "SingularityReport",
    "ParseError",
    "parse_ode",
    "classify_finite",
    "classify_infinity",
    "classify",
    "ince_type",
    "change_variable",
    "substitute_square",
    "substitute_root",
    "mobius",
    "gauge_transform",
    "confluence_count",
    "radial_ode",
    "hypergeometric",
    "confluent_hypergeometric",
    "lame",
    "heun",
]

ELEMENTARY_TOL = 1e-9
INDETERMINATE_TOL = 1e-6
CLUSTER_TOL = 1e-8


# ---------------------------------------------------------------------------
# dense polynomials, ascending coefficient lists


def _is_exact_value(c) -> bool:
    return isinstance(c, (int, Fraction)) and not isinstance(c, bool)


def _trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _padd(a, b):
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def _pscale(a, c):
    return _trim([x * c for x in a])


def _psub(a, b):
    return _padd(a, _pscale(b, -1))


def _pmul(a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _trim(out)


def _ppow(a, n):
    out = [1]
    for _ in range(n):
        out = _pmul(out, a)
    return out


def _pdivmod(a, b):
    a, b = _trim(a), _trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [0] * max(len(a) - len(b) + 1, 1)
    r = list(a)
    lead = b[-1]
    while len(r) >= len(b) and r:
        shift = len(r) - len(b)
        c = r[-1] / lead
        q[shift] = c
        for i, y in enumerate(b):
            r[shift + i] -= c * y
        r.pop()
        r = _trim(r)
    return _trim(q), r


def _monic(a):
    a = _trim(a)
    return [x / a[-1] for x in a] if a else a


def _pgcd(a, b):
    """Monic gcd; exact for rational coefficients."""
    a, b = _trim(a), _trim(b)
    while b:
        _, r = _pdivmod(a, b)
        a, b = b, r
    return _monic(a) if a else []


def _pderiv(a):
    return _trim([i * a[i] for i in range(1, len(a))])


def _peval(a, z):
    out = 0
    for c in reversed(a):
        out = out * z + c
    return out


def _deg(a):
    return len(_trim(a)) - 1


def _squarefree(a):
    """Yun's algorithm: {multiplicity: squarefree monic factor}."""
    a = _monic(a)
    out = {}
    if _deg(a) < 1:
        return out
    b = _pderiv(a)
    c = _pgcd(a, b)
    w = _pdivmod(a, c)[0]
    y = _pdivmod(b, c)[0]
    z = _psub(y, _pderiv(w))
    i = 1
    while _deg(w) >= 1:
        g = _pgcd(w, z)
        if _deg(g) >= 1:
            out[i] = g
        w = _pdivmod(w, g)[0]
        y = _pdivmod(z, g)[0]
        z = _psub(y, _pderiv(w))
        i += 1
    return out


def _roots(a) -> np.ndarray:
    a = _trim(a)
    if len(a) <= 1:
        return np.zeros(0, dtype=complex)
    return np.roots(np.array([complex(c) for c in reversed(a)]))


def _cluster(roots: np.ndarray, tol=CLUSTER_TOL):
    """Merge numerically split multiple roots.

    A group of m roots is merged when its spread s satisfies
    s**m <= tol * scale**m, the perturbation law of an m-fold root.
    Returns a list of (centroid, multiplicity).
    """
    remaining = list(roots)
    out = []
    while remaining:
        r0 = remaining.pop(0)
        group = [r0]
        changed = True
        while changed:
            changed = False
            c = np.mean(group)
            scale = max(1.0, abs(c))
            m = len(group) + 1
            for r in list(remaining):
                if abs(r - c) <= scale * tol ** (1.0 / m):
                    group.append(r)
                    remaining.remove(r)
                    changed = True
                    break
        out.append((complex(np.mean(group)), len(group)))
    return out


# ---------------------------------------------------------------------------
# rational functions


class RationalFunction:
    """num(z) / den(z) with ascending coefficient lists.

    Exact functions (all coefficients int/Fraction) are kept reduced with a
    monic denominator.
    """

    __slots__ = ("num", "den", "exact")

    def __init__(self, num: Sequence, den: Sequence = (1,), exact: Optional[bool] = None):
        num, den = list(num), list(den)
        if exact is None:
            exact = all(_is_exact_value(c) for c in num + den)
        if exact:
            num = [Fraction(c) if not isinstance(c, float) else Fraction(c) for c in num]
            den = [Fraction(c) if not isinstance(c, float) else Fraction(c) for c in den]
        else:
            num = [complex(c) if isinstance(c, complex) else float(c) for c in num]
            den = [complex(c) if isinstance(c, complex) else float(c) for c in den]
        num, den = _trim(num), _trim(den)
        if not den:
            raise DomainError("denominator is identically zero")
        if exact:
            if not num:
                den = [Fraction(1)]
            else:
                g = _pgcd(num, den)
                if _deg(g) >= 1:
                    num = _pdivmod(num, g)[0]
                    den = _pdivmod(den, g)[0]
                lead = den[-1]
                num = [c / lead for c in num]
                den = [c / lead for c in den]
        self.num, self.den, self.exact = num, den, exact

    @classmethod
    def const(cls, c, exact=None):
        return cls([c], [1], exact)

    @classmethod
    def z(cls, exact=True):
        return cls([0, 1], [1], exact)

    def _coerce(self, o):
        if isinstance(o, RationalFunction):
            return o
        return RationalFunction([o], [1], self.exact and _is_exact_value(o))

    def _mode(self, o):
        return self.exact and o.exact

    def __add__(self, o):
        o = self._coerce(o)
        return RationalFunction(_padd(_pmul(self.num, o.den), _pmul(o.num, self.den)),
                                _pmul(self.den, o.den), self._mode(o))

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(_pscale(self.num, -1), self.den, self.exact)

    def __sub__(self, o):
        return self + (-self._coerce(o))

    def __rsub__(self, o):
        return self._coerce(o) - self

    def __mul__(self, o):
        o = self._coerce(o)
        return RationalFunction(_pmul(self.num, o.num), _pmul(self.den, o.den), self._mode(o))

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._coerce(o)
        if not o.num:
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(_pmul(self.num, o.den), _pmul(self.den, o.num), self._mode(o))

    def __rtruediv__(self, o):
        return self._coerce(o) / self

    def __pow__(self, n: int):
        n = int(n)
        if n < 0:
            return RationalFunction(_ppow(self.den, -n), _ppow(self.num, -n), self.exact)
        return RationalFunction(_ppow(self.num, n), _ppow(self.den, n), self.exact)

    def __call__(self, z):
        return _peval(self.num, z) / _peval(self.den, z)

    def __eq__(self, o):
        o = self._coerce(o)
        return not _psub(_pmul(self.num, o.den), _pmul(o.num, self.den))

    def __hash__(self):
        return hash((tuple(self.num), tuple(self.den)))

    def is_zero(self):
        return not self.num

    def derivative(self):
        n = _psub(_pmul(_pderiv(self.num), self.den), _pmul(self.num, _pderiv(self.den)))
        return RationalFunction(n, _pmul(self.den, self.den), self.exact)

    def compose(self, phi: "RationalFunction") -> "RationalFunction":
        """self(phi(w))."""
        d = max(_deg(self.num), _deg(self.den), 0)
        a, b = phi.num, phi.den

        def hom(poly):
            out = []
            for i, c in enumerate(poly):
                if c != 0:
                    out = _padd(out, _pscale(_pmul(_ppow(a, i), _ppow(b, d - i)), c))
            return out

        return RationalFunction(hom(self.num), hom(self.den), self.exact and phi.exact)

    @property
    def order_at_infinity(self) -> float:
        """K with f = O(z^K) as z -> infinity; -inf for the zero function."""
        if not self.num:
            return -math.inf
        return _deg(self.num) - _deg(self.den)

    def leading(self):
        return self.num[-1] / self.den[-1] if self.num else 0

    def to_dict(self) -> dict:
        enc = (lambda c: str(c)) if self.exact else (lambda c: c if isinstance(c, float) else [c.real, c.imag])
        return {"num": [enc(c) for c in self.num], "den": [enc(c) for c in self.den]}

    def __repr__(self):
        return f"RationalFunction(num={self.num}, den={self.den})"


def _rf_from_json(d) -> RationalFunction:
    def dec(c):
        if isinstance(c, str):
            return Fraction(c)
        return c
    if isinstance(d, (int, float, str)):
        return RationalFunction([dec(d)], [1])
    return RationalFunction([dec(c) for c in d["num"]], [dec(c) for c in d.get("den", [1])])


@dataclass(frozen=True)
class RationalODE:
    """y'' + p(z) y' + q(z) y = 0."""

    p: RationalFunction
    q: RationalFunction

    @property
    def exact(self) -> bool:
        return self.p.exact and self.q.exact

    @classmethod
    def from_coeffs(cls, p_num, p_den=(1,), q_num=(0,), q_den=(1,)):
        """Build from ascending coefficient lists."""
        return cls(RationalFunction(p_num, p_den), RationalFunction(q_num, q_den))

    @classmethod
    def from_dict(cls, d: dict) -> "RationalODE":
        if "equation" in d:
            return parse_ode(d["equation"])
        try:
            return cls(_rf_from_json(d["p"]), _rf_from_json(d["q"]))
        except KeyError as exc:
            raise DomainError(f"coefficient JSON needs keys 'p' and 'q' (missing {exc})") from None

    def to_dict(self) -> dict:
        return {"p": self.p.to_dict(), "q": self.q.to_dict()}


# ---------------------------------------------------------------------------
# parsing


class ParseError(DomainError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at offset {position}")


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
                    r"|(?P<yder>y''|y')|(?P<y>y)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
                    r"|(?P<op>[-+*/^()=]))")


def _tokenize(text):
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[start]!r}", start, text)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), start))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok[2], self.text)

    def expect(self, kind, value=None):
        t = self.peek()
        if t[0] != kind or (value is not None and t[1] != value):
            self.error(f"expected {value or kind}, found {t[1] or 'end of input'!r}")
        return self.take()

    # equation := "y''" { sign expr "*" ("y'" | "y") } "=" "0"
    def equation(self):
        t = self.expect("yder")
        if t[1] != "y''":
            self.error("equation must start with y''", t)
        p = RationalFunction.const(0, True)
        q = RationalFunction.const(0, True)
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            sign = -1 if self.take()[1] == "-" else 1
            nxt = self.peek()
            if nxt[0] in ("yder", "y"):
                coeff, target = RationalFunction.const(1, True), self.take()
            else:
                coeff = self.expr()
                self.expect("op", "*")
                target = self.peek()
                if target[0] not in ("yder", "y"):
                    self.error("expected y' or y after coefficient")
                self.take()
            if target[1] == "y'":
                p = p + coeff * sign
            elif target[1] == "y":
                q = q + coeff * sign
            else:
                self.error("y'' may appear only once", target)
        self.expect("op", "=")
        z = self.expect("num")
        if Fraction(z[1]) != 0:
            self.error("right-hand side must be 0", z)
        if self.peek()[0] != "end":
            self.error("trailing input")
        return RationalODE(p, q)

    def expr(self):
        out = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def _stops_term(self):
        # "expr * y" ends the coefficient
        return self.peek()[1] == "*" and self.peek(1)[0] in ("y", "yder")

    def term(self):
        out = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/" and not self._stops_term():
            op = self.take()
            rhs = self.unary()
            if op[1] == "*":
                out = out * rhs
            else:
                if rhs.is_zero():
                    raise ParseError("division by zero", op[2], self.text)
                out = out / rhs
        return out

    def unary(self):
        t = self.peek()
        if t[0] == "op" and t[1] in "+-":
            self.take()
            v = self.unary()
            return -v if t[1] == "-" else v
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            sign = 1
            if self.peek()[1] in "+-":
                sign = -1 if self.take()[1] == "-" else 1
            t = self.peek()
            if t[0] != "num" or not re.fullmatch(r"\d+", t[1]):
                self.error("nonrational construct: exponent must be an integer literal")
            self.take()
            return base ** (sign * int(t[1]))
        return base

    def atom(self):
        t = self.peek()
        if t[0] == "num":
            self.take()
            return RationalFunction.const(Fraction(t[1]), True)
        if t[0] == "name":
            if t[1] == "z":
                self.take()
                return RationalFunction.z(True)
            self.error(f"nonrational construct: unknown name {t[1]!r}")
        if t[1] == "(":
            self.take()
            v = self.expr()
            self.expect("op", ")")
            return v
        self.error(f"unexpected token {t[1] or 'end of input'!r}")


def parse_ode(text: str) -> RationalODE:
    """Parse ``"y'' + (expr)*y' + (expr)*y = 0"`` into exact rational p, q.

    ``expr`` is rational arithmetic in ``z`` with ``+ - * /``, integer
    powers ``^`` and numeric literals (taken as exact decimals).  Either
    term may be omitted.
    """
    return _Parser(text).equation()


# ---------------------------------------------------------------------------
# classification


@dataclass
class SingularPoint:
    location: object  # complex or "inf"
    kind: str
    indicial: Optional[tuple] = None
    rank: Optional[Fraction] = None
    species: Optional[int] = None
    exact: bool = False
    indeterminate: bool = False
    pole_orders: tuple = (0, 0)

    @property
    def is_infinity(self):
        return self.location == "inf"

    def to_dict(self) -> dict:
        loc = "inf" if self.is_infinity else [float(np.real(self.location)), float(np.imag(self.location))]
        d = {"location": loc, "kind": self.kind, "pole_orders": list(self.pole_orders),
             "rank": None if self.rank is None else str(self.rank), "exact": self.exact}
        if self.indicial is not None:
            d["indicial"] = [[float(np.real(r)), float(np.imag(r))] for r in self.indicial]
        if self.species is not None:
            d["species"] = self.species
        if self.indeterminate:
            d["indeterminate"] = True
        return d


@dataclass
class SingularityReport:
    points: list = field(default_factory=list)
    exact: bool = False

    @property
    def ince_type(self) -> str:
        return _render_type(self.points)

    def to_dict(self) -> dict:
        return {"ince_type": self.ince_type, "exact": self.exact,
                "points": [pt.to_dict() for pt in self.points]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def summary(self) -> str:
        lines = [f"Ince type {self.ince_type} ({'exact' if self.exact else 'floating-point'} arithmetic)"]
        for pt in self.points:
            if pt.is_infinity:
                where = "z = inf"
            else:
                z = complex(pt.location)
                where = f"z = {z.real:.12g}" + (f"{z.imag:+.12g}i" if z.imag else "")
            extra = ""
            if pt.kind == "irregular":
                extra = f", rank {pt.rank}, species {pt.species}"
            elif pt.indicial is not None:
                r1, r2 = pt.indicial
                extra = f", exponents {complex(r1):.6g} / {complex(r2):.6g}"
            flag = " (indeterminate)" if pt.indeterminate else ""
            lines.append(f"  {where}: {pt.kind}{extra}{flag}")
        return "\n".join(lines)


def _indicial(A, B):
    A, B = complex(A), complex(B)
    s = np.sqrt(complex((A - 1) ** 2 - 4 * B))
    return ((1 - A + s) / 2, (1 - A - s) / 2)


def _regular_kind_numeric(A, B):
    r1, r2 = _indicial(A, B)
    gap = abs(abs(r1 - r2) - 0.5)
    if gap <= ELEMENTARY_TOL:
        return "regular-elementary", (r1, r2), False
    return "regular-nonelementary", (r1, r2), gap <= INDETERMINATE_TOL


def _finite_rank(op, oq) -> Fraction:
    return max(Fraction(op - 1), Fraction(oq, 2) - 1)


def _pole_order_exact(f: RationalFunction, z0: Fraction):
    """(order, leading Laurent coefficient data) of f at rational z0."""
    lin = [-z0, Fraction(1)]
    k = 0
    den = f.den
    while True:
        qt, r = _pdivmod(den, lin)
        if r:
            break
        den = qt
        k += 1
    return k, den


def classify_finite(ode: RationalODE, z0) -> SingularPoint:
    """Classify a finite point from the pole orders of p and q there."""
    exact = ode.exact and _is_exact_value(z0)
    if exact:
        z0 = Fraction(z0)
        op, rp = _pole_order_exact(ode.p, z0)
        oq, rq = _pole_order_exact(ode.q, z0)
        A = _peval(ode.p.num, z0) / _peval(rp, z0) if op == 1 else Fraction(0)
        B = _peval(ode.q.num, z0) / _peval(rq, z0) if oq == 2 else Fraction(0)
    else:
        z0 = complex(z0)
        op, A = _numeric_order(ode.p, z0, 1)
        oq, B = _numeric_order(ode.q, z0, 2)
    return _point_from_orders(z0, op, oq, A, B, exact)


def _point_from_orders(z0, op, oq, A, B, exact) -> SingularPoint:
    z0 = complex(z0)
    if op == 0 and oq == 0:
        return SingularPoint(z0, "ordinary", indicial=(0j, 1 + 0j), rank=None, exact=exact, pole_orders=(0, 0))
    if op >= 2 or oq >= 3:
        g = _finite_rank(op, oq)
        return SingularPoint(z0, "irregular", rank=g, species=int(2 * g), exact=exact, pole_orders=(op, oq))
    g = _finite_rank(op, oq)
    if exact:
        disc = (A - 1) ** 2 - 4 * B
        kind = "regular-elementary" if disc == Fraction(1, 4) else "regular-nonelementary"
        return SingularPoint(z0, kind, indicial=_indicial(A, B), rank=g, exact=True, pole_orders=(op, oq))
    kind, ind, flag = _regular_kind_numeric(A, B)
    return SingularPoint(z0, kind, indicial=ind, rank=g, indeterminate=flag, pole_orders=(op, oq))


def _numeric_order(f: RationalFunction, z0: complex, target: int):
    """Pole order at z0 and lim (z - z0)^target f(z) from clustered roots."""
    def split(poly):
        roots = _cluster(_roots(poly))
        mult = 0
        rest = complex(_trim(poly)[-1]) if _trim(poly) else 0j
        for c, m in roots:
            if abs(c - z0) <= max(1.0, abs(z0)) * CLUSTER_TOL ** (1.0 / (m + 1)):
                mult += m
            else:
                rest *= (z0 - c) ** m
        return mult, rest

    if f.is_zero():
        return 0, 0j
    mn, vn = split(f.num)
    md, vd = split(f.den)
    order = max(md - mn, 0)
    lim = vn / vd if md - mn == target else 0j
    return order, lim


def classify_infinity(ode: RationalODE) -> SingularPoint:
    """Classify z = inf through the Laurent data of p and q at infinity."""
    K1 = ode.p.order_at_infinity
    K2 = ode.q.order_at_infinity
    exact = ode.exact
    g = 1 + max(Fraction(K1) if K1 > -math.inf else -math.inf,
                 Fraction(K2, 2) if K2 > -math.inf else -math.inf)
    if g == -math.inf:
        g = None
    p1 = ode.p.leading() if K1 == -1 else 0
    q2 = ode.q.leading() if K2 == -2 else 0
    orders = (K1, K2)
    if K1 >= 0 or K2 >= -1:
        g = Fraction(g)
        return SingularPoint("inf", "irregular", rank=g, species=int(2 * g), exact=exact, pole_orders=orders)
    if p1 == 2 and K2 <= -4:
        return SingularPoint("inf", "ordinary", indicial=(0j, 1 + 0j), exact=exact, pole_orders=orders)
    # zeta = 1/z: A = 2 - p1, B = q2
    A = 2 - p1
    B = q2
    if exact:
        disc = (A - 1) ** 2 - 4 * B
        kind = "regular-elementary" if disc == Fraction(1, 4) else "regular-nonelementary"
        return SingularPoint("inf", kind, indicial=_indicial(A, B), rank=g, exact=True, pole_orders=orders)
    kind, ind, flag = _regular_kind_numeric(A, B)
    return SingularPoint("inf", kind, indicial=ind, rank=g, indeterminate=flag, pole_orders=orders)


def _finite_exact(ode: RationalODE) -> list:
    Pd = _squarefree(ode.p.den)
    Qd = _squarefree(ode.q.den)
    sqf_p = [Fraction(1)]
    for f in Pd.values():
        sqf_p = _pmul(sqf_p, f)
    sqf_q = [Fraction(1)]
    for f in Qd.values():
        sqf_q = _pmul(sqf_q, f)
    classes = []
    for i, Pi in Pd.items():
        for j, Qj in Qd.items():
            g = _pgcd(Pi, Qj)
            if _deg(g) >= 1:
                classes.append((i, j, g))
        rest = _pdivmod(Pi, _pgcd(Pi, sqf_q))[0]
        if _deg(rest) >= 1:
            classes.append((i, 0, rest))
    for j, Qj in Qd.items():
        rest = _pdivmod(Qj, _pgcd(Qj, sqf_p))[0]
        if _deg(rest) >= 1:
            classes.append((0, j, rest))

    pts = []
    for i, j, R in classes:
        if i >= 2 or j >= 3:
            g = _finite_rank(i, j)
            for z0 in _roots(R):
                pts.append(SingularPoint(complex(z0), "irregular", rank=g, species=int(2 * g),
                                         exact=True, pole_orders=(i, j)))
            continue
        # A(z) = Np/Dp' at simple poles, B(z) = 2 Nq/Dq'' at double poles
        one = RationalFunction.const(1, True)
        A = RationalFunction(ode.p.num, _pderiv(ode.p.den), True) if i == 1 else RationalFunction.const(0, True)
        B = (RationalFunction(_pscale(ode.q.num, 2), _pderiv(_pderiv(ode.q.den)), True)
             if j == 2 else RationalFunction.const(0, True))
        disc = (A - one) * (A - one) - B * 4 - RationalFunction.const(Fraction(1, 4), True)
        G = _pgcd(R, disc.num) if disc.num else _monic(R)
        H = _pdivmod(R, G)[0] if _deg(G) >= 1 else R
        g = _finite_rank(i, j)
        for poly, kind in ((G, "regular-elementary"), (H, "regular-nonelementary")):
            if _deg(poly) < 1:
                continue
            for z0 in _roots(poly):
                Av = complex(A(complex(z0))) if i == 1 else 0j
                Bv = complex(B(complex(z0))) if j == 2 else 0j
                pts.append(SingularPoint(complex(z0), kind, indicial=_indicial(Av, Bv), rank=g,
                                         exact=True, pole_orders=(i, j)))
    return pts


def _finite_numeric(ode: RationalODE) -> list:
    cands = [c for c, _ in _cluster(_roots(ode.p.den))] + [c for c, _ in _cluster(_roots(ode.q.den))]
    locs = []
    for c in cands:
        if all(abs(c - d) > max(1.0, abs(d)) * math.sqrt(CLUSTER_TOL) for d in locs):
            locs.append(c)
    pts = []
    for z0 in locs:
        pt = classify_finite(ode, z0)
        if pt.kind != "ordinary":
            pts.append(pt)
    return pts


def _sort_key(pt):
    if pt.is_infinity:
        return (1, 0.0, 0.0)
    z = complex(pt.location)
    return (0, round(z.real, 12), round(z.imag, 12))


def classify(ode: RationalODE) -> SingularityReport:
    """All finite singular points plus the point at infinity."""
    pts = _finite_exact(ode) if ode.exact else _finite_numeric(ode)
    pts.sort(key=_sort_key)
    pts.append(classify_infinity(ode))
    return SingularityReport(pts, ode.exact)


def _render_type(points) -> str:
    if any(pt.indeterminate for pt in points):
        raise NumericalError("elementary test is indeterminate at some point; use exact rational input")
    a = sum(pt.kind == "regular-elementary" for pt in points)
    b = sum(pt.kind == "regular-nonelementary" for pt in points)
    species = {}
    for pt in points:
        if pt.kind == "irregular":
            species[pt.species] = species.get(pt.species, 0) + 1
    irr = ",".join(f"{n}_{s}" for s, n in sorted(species.items())) or "0"
    return f"[{a},{b},{irr}]"


def ince_type(ode: RationalODE) -> str:
    """Ince type string such as ``"[0,1,1_6]"``."""
    return classify(ode).ince_type


def confluence_count(report: SingularityReport) -> int:
    """Elementary regular points the equation is a confluence of.

    Elementary counts 1, nonelementary 2, species s counts s + 2.
    """
    total = 0
    for pt in report.points:
        if pt.kind == "regular-elementary":
            total += 1
        elif pt.kind == "regular-nonelementary":
            total += 2
        elif pt.kind == "irregular":
            total += pt.species + 2
    return total


# ---------------------------------------------------------------------------
# transformations


def change_variable(ode: RationalODE, phi: RationalFunction) -> RationalODE:
    """Substitute z = phi(w); returns the equation in w.

    P(w) = -phi''/phi' + phi' p(phi), Q(w) = phi'^2 q(phi).
    """
    d1 = phi.derivative()
    if d1.is_zero():
        raise DomainError("substitution must be nonconstant")
    d2 = d1.derivative()
    P = -(d2 / d1) + d1 * ode.p.compose(phi)
    Q = d1 * d1 * ode.q.compose(phi)
    return RationalODE(P, Q)


def substitute_square(ode: RationalODE) -> RationalODE:
    """z = w^2; doubles the rank at infinity."""
    return change_variable(ode, RationalFunction([0, 0, 1], [1], ode.exact))


def mobius(ode: RationalODE, a, b, c, d) -> RationalODE:
    """z = (a w + b) / (c w + d)."""
    if a * d - b * c == 0:
        raise DomainError("degenerate fractional linear map (ad - bc = 0)")
    return change_variable(ode, RationalFunction([b, a], [d, c], ode.exact))


def _even_odd(poly):
    even = [poly[i] for i in range(0, len(poly), 2)]
    odd = [poly[i] for i in range(1, len(poly), 2)]
    return _trim(even), _trim(odd)


def substitute_root(ode: RationalODE) -> RationalODE:
    """x = z^2 for an equation with odd p and even q; halves the rank at infinity.

    P(x) = 1/(2x) + p(sqrt x)/(2 sqrt x), Q(x) = q(sqrt x)/(4x).
    """
    ex = ode.exact
    X = RationalFunction([0, 1], [1], ex)
    half = Fraction(1, 2) if ex else 0.5

    def odd_over_z(f):
        ne, no = _even_odd(f.num)
        de, do = _even_odd(f.den)
        if not f.num:
            return RationalFunction.const(0, ex)
        if not ne and not do:
            return RationalFunction(no, de, ex)
        if not no and not de:
            return RationalFunction(ne, _pmul([0, 1], do), ex)
        raise DomainError("p must be an odd function of z for x = z^2")

    def even(f):
        ne, no = _even_odd(f.num)
        de, do = _even_odd(f.den)
        if not f.num:
            return RationalFunction.const(0, ex)
        if not no and not do:
            return RationalFunction(ne, de, ex)
        if not ne and not de:
            return RationalFunction(no, do, ex)
        raise DomainError("q must be an even function of z for x = z^2")

    P = RationalFunction.const(half, ex) / X + odd_over_z(ode.p) * half
    Q = even(ode.q) * (half * half) / X
    return RationalODE(P, Q)


def gauge_transform(ode: RationalODE, mu=0, R1: Optional[RationalFunction] = None,
                    R2: Optional[RationalFunction] = None) -> RationalODE:
    """Equation for a(z) where y = F a, F = z^mu R1 exp(R2).

    With u = F'/F: P = p + 2u, Q = q + p u + u' + u^2.
    """
    ex = ode.exact
    u = RationalFunction([mu], [0, 1], ex and _is_exact_value(mu))
    if R1 is not None:
        u = u + R1.derivative() / R1
    if R2 is not None:
        u = u + R2.derivative()
    P = ode.p + u * 2
    Q = ode.q + ode.p * u + u.derivative() + u * u
    return RationalODE(P, Q)


# ---------------------------------------------------------------------------
# named equations


def _F(v):
    return Fraction(v)


def radial_ode(c, A, B, C, eps, l) -> RationalODE:
    """-c(rho'' + rho'/r - l^2 rho/r^2) + (A r^2 + B r^4 + C) rho = eps rho.

    Floats are taken at their exact binary values.  Accepts a
    :class:`screwon.radial.RadialProblem` via :func:`radial_ode_from_problem`.
    """
    c, A, B, C, eps, l = map(_F, (c, A, B, C, eps, l))
    if c == 0:
        raise DomainError("c must be nonzero")
    p = RationalFunction([0, 1], [0, 0, 1])  # 1/r
    # q = -l^2/r^2 - (A r^2 + B r^4 + C - eps)/c
    poly = [-(C - eps) / c, 0, -A / c, 0, -B / c]
    q = RationalFunction([-(l * l)], [0, 0, 1]) + RationalFunction(poly)
    return RationalODE(p, q)


def radial_ode_from_problem(rp, energy) -> RationalODE:
    c, A, B, C = rp.coefficients
    return radial_ode(c, A, B, C, energy, rp.l)


def hypergeometric(a, b, c) -> RationalODE:
    """z(1-z) y'' + [c - (a+b+1) z] y' - a b y = 0."""
    a, b, c = map(_F, (a, b, c))
    den = [0, 1, -1]
    return RationalODE(RationalFunction([c, -(a + b + 1)], den), RationalFunction([-a * b], den))


def confluent_hypergeometric(a, b) -> RationalODE:
    """z y'' + (b - z) y' - a y = 0."""
    a, b = _F(a), _F(b)
    return RationalODE(RationalFunction([b, -1], [0, 1]), RationalFunction([-a], [0, 1]))


def lame(n, h, e=(0, 1, 3)) -> RationalODE:
    """Algebraic Lame form with finite singular points e1, e2, e3."""
    n, h = _F(n), _F(h)
    e = [_F(v) for v in e]
    p = RationalFunction.const(0)
    for ei in e:
        p = p + RationalFunction([Fraction(1, 2)], [-ei, 1])
    cubic = _pmul(_pmul([-e[0], 1], [-e[1], 1]), [-e[2], 1])
    q = RationalFunction([-h / 4, -n * (n + 1) / 4], cubic)
    return RationalODE(p, q)


def heun(a, q0, alpha, beta, gamma, delta) -> RationalODE:
    """General Heun equation; epsilon = alpha + beta + 1 - gamma - delta."""
    a, q0, alpha, beta, gamma, delta = map(_F, (a, q0, alpha, beta, gamma, delta))
    eps = alpha + beta + 1 - gamma - delta
    p = (RationalFunction([gamma], [0, 1]) + RationalFunction([delta], [-1, 1])
         + RationalFunction([eps], [-a, 1]))
    den = _pmul(_pmul([0, 1], [-1, 1]), [-a, 1])
    q = RationalFunction([-q0, alpha * beta], den)
    return RationalODE(p, q)
