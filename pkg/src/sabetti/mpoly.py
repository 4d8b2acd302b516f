"""Sparse multivariate polynomials over the rationals.

Terms map exponent vectors to nonzero coefficients.  Resultants are computed
by a pseudo-remainder Euclidean recursion with exact bookkeeping of the
leading-coefficient factors, so the result equals the Sylvester determinant
including its sign.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import DegenerateDegree, DimensionMismatch
from .rational import Interval, Rational, rat_from_text, rat_to_text
from .upoly import UniPoly


class MultiPoly:
    __slots__ = ("k", "terms")

    def __init__(self, k: int, terms=None):
        self.k = k
        clean: dict[tuple[int, ...], Fraction] = {}
        for exps, coef in (terms or {}).items():
            coef = Fraction(coef)
            if coef == 0:
                continue
            exps = tuple(int(e) for e in exps)
            if len(exps) != k:
                raise DimensionMismatch(f"exponent vector {exps} has length != {k}")
            clean[exps] = clean.get(exps, Fraction(0)) + coef
        self.terms = {e: c for e, c in clean.items() if c != 0}

    @staticmethod
    def constant(k: int, c) -> "MultiPoly":
        return MultiPoly(k, {(0,) * k: Fraction(c)})

    @staticmethod
    def variable(k: int, index: int) -> "MultiPoly":
        """The variable with 0-based index."""
        exps = [0] * k
        exps[index] = 1
        return MultiPoly(k, {tuple(exps): Fraction(1)})

    @staticmethod
    def from_unipoly(p: UniPoly, k: int, var: int) -> "MultiPoly":
        terms = {}
        for e, c in enumerate(p.coeffs):
            if c != 0:
                exps = [0] * k
                exps[var] = e
                terms[tuple(exps)] = c
        return MultiPoly(k, terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(all(e == 0 for e in exps) for exps in self.terms)

    def constant_value(self) -> Rational:
        return self.terms.get((0,) * self.k, Fraction(0))

    def __eq__(self, other):
        return isinstance(other, MultiPoly) and self.k == other.k and self.terms == other.terms

    def __hash__(self):
        return hash((self.k, frozenset(self.terms.items())))

    def key(self):
        """Canonical hashable form (used for caching grid evaluations)."""
        return (self.k, tuple(sorted(self.terms.items())))

    def __repr__(self):
        return f"MultiPoly(k={self.k}, {self.terms})"

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, Fraction(0)) + c
        return MultiPoly(self.k, terms)

    def __neg__(self):
        return MultiPoly(self.k, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return MultiPoly(self.k, {e: c * other for e, c in self.terms.items()})
        if self.k != other.k:
            raise DimensionMismatch("mixed variable counts")
        terms: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, Fraction(0)) + c1 * c2
        return MultiPoly(self.k, terms)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = MultiPoly.constant(self.k, 1)
        base = self
        while n > 0:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            return other
        return MultiPoly.constant(self.k, other)

    def degree_in(self, var: int) -> int:
        if not self.terms:
            return -1
        return max(e[var] for e in self.terms)

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def max_exponents(self) -> tuple[int, ...]:
        if not self.terms:
            return (0,) * self.k
        return tuple(max(e[i] for e in self.terms) for i in range(self.k))

    def coeff_in(self, var: int, power: int) -> "MultiPoly":
        """Coefficient of var**power, as a polynomial in all k variables."""
        terms = {}
        for e, c in self.terms.items():
            if e[var] == power:
                new = list(e)
                new[var] = 0
                terms[tuple(new)] = c
        return MultiPoly(self.k, terms)

    def shift_var(self, var: int, power: int) -> "MultiPoly":
        terms = {}
        for e, c in self.terms.items():
            new = list(e)
            new[var] += power
            terms[tuple(new)] = c
        return MultiPoly(self.k, terms)

    def derivative(self, var: int) -> "MultiPoly":
        terms = {}
        for e, c in self.terms.items():
            if e[var] == 0:
                continue
            new = list(e)
            new[var] -= 1
            terms[tuple(new)] = c * e[var]
        return MultiPoly(self.k, terms)

    def eval(self, point) -> Rational:
        if len(point) != self.k:
            raise DimensionMismatch(f"point has {len(point)} coordinates, expected {self.k}")
        point = [Fraction(x) for x in point]
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for x, exp in zip(point, e):
                if exp:
                    v *= x**exp
            total += v
        return total

    def eval_interval(self, box: list[Interval]) -> Interval:
        """Term-by-term inclusion-isotone enclosure of the range over box."""
        if len(box) != self.k:
            raise DimensionMismatch(f"box has {len(box)} axes, expected {self.k}")
        acc = Interval(0)
        for e, c in self.terms.items():
            term = Interval(c)
            for iv, exp in zip(box, e):
                if exp:
                    term = term * iv.power(exp)
            acc = acc + term
        return acc

    def substitute(self, var: int, value: Rational) -> "MultiPoly":
        """Plug a rational into one variable (result still has k slots)."""
        value = Fraction(value)
        terms: dict[tuple[int, ...], Fraction] = {}
        for e, c in self.terms.items():
            new = list(e)
            exp = new[var]
            new[var] = 0
            c = c * value**exp
            key = tuple(new)
            terms[key] = terms.get(key, Fraction(0)) + c
        return MultiPoly(self.k, terms)

    def to_unipoly(self, var: int) -> UniPoly:
        """View as univariate in var; every other variable must be absent."""
        coeffs = [Fraction(0)] * (self.degree_in(var) + 1)
        for e, c in self.terms.items():
            if any(e[i] != 0 for i in range(self.k) if i != var):
                raise DimensionMismatch("polynomial is not univariate in the requested variable")
            coeffs[e[var]] = c
        return UniPoly(coeffs)

    def univariate_coeffs(self, var: int) -> list["MultiPoly"]:
        """Dense coefficient list in var, lowest degree first."""
        d = self.degree_in(var)
        return [self.coeff_in(var, i) for i in range(d + 1)]

    def to_json(self) -> list[dict]:
        items = sorted(self.terms.items())
        return [{"coef": rat_to_text(c), "exps": list(e)} for e, c in items]

    @staticmethod
    def from_json(data, k: int) -> "MultiPoly":
        terms = {tuple(t["exps"]): rat_from_text(t["coef"]) for t in data}
        return MultiPoly(k, terms)


def _lead_term(p: MultiPoly) -> tuple[tuple[int, ...], Fraction]:
    exps = max(p.terms)  # lexicographic on exponent tuples
    return exps, p.terms[exps]


def exact_div(num: MultiPoly, den: MultiPoly) -> MultiPoly:
    """Divide num by den, which must divide exactly."""
    if den.is_zero():
        raise ZeroDivisionError("division by zero polynomial")
    if den.is_constant():
        return num * (1 / den.constant_value())
    quot = MultiPoly(num.k, {})
    rem = num
    de, dc = _lead_term(den)
    while not rem.is_zero():
        re, rc = _lead_term(rem)
        diff = tuple(a - b for a, b in zip(re, de))
        if any(d < 0 for d in diff):
            raise ArithmeticError("inexact polynomial division")
        t = MultiPoly(num.k, {diff: rc / dc})
        quot = quot + t
        rem = rem - t * den
    return quot


def _pseudo_rem(a: MultiPoly, b: MultiPoly, var: int) -> MultiPoly:
    """prem(a, b) = lc(b)^(deg a - deg b + 1) * a  mod  b   (in var)."""
    db = b.degree_in(var)
    lcb = b.coeff_in(var, db)
    r = a
    e = a.degree_in(var) - db + 1
    while not r.is_zero():
        dr = r.degree_in(var)
        if dr < db:
            break
        lcr = r.coeff_in(var, dr)
        r = lcb * r - lcr.shift_var(var, dr - db) * b
        e -= 1
    if e > 0:
        r = r * lcb**e
    return r


def resultant(p: MultiPoly, q: MultiPoly, var_index: int) -> MultiPoly:
    """Resultant of p and q with respect to one variable.

    Equals the determinant of the Sylvester matrix in that variable; the
    remaining variables survive in the output.
    """
    if p.k != q.k:
        raise DimensionMismatch("mixed variable counts")
    if p.degree_in(var_index) <= 0 or q.degree_in(var_index) <= 0:
        raise DegenerateDegree("both polynomials need positive degree in the eliminated variable")

    a, b = p, q
    negate = False
    if a.degree_in(var_index) < b.degree_in(var_index):
        if (a.degree_in(var_index) * b.degree_in(var_index)) % 2 == 1:
            negate = True
        a, b = b, a

    num = MultiPoly.constant(p.k, 1)
    den = MultiPoly.constant(p.k, 1)
    while True:
        da = a.degree_in(var_index)
        db = b.degree_in(var_index)
        if db == 0:
            # res(a, const) = const^deg(a)
            num = num * b.coeff_in(var_index, 0) ** da
            break
        r = _pseudo_rem(a, b, var_index)
        if r.is_zero():
            return MultiPoly(p.k, {})  # common factor of positive degree
        dr = r.degree_in(var_index)
        # res(a,b) = (-1)^(da*db) * lc(b)^(da - dr - (da-db+1)*db) * res(b,r)
        if (da * db) % 2 == 1:
            negate = not negate
        lcb = b.coeff_in(var_index, db)
        e = da - dr - (da - db + 1) * db
        if e >= 0:
            num = num * lcb**e
        else:
            den = den * lcb ** (-e)
        a, b = b, r

    result = exact_div(num, den)
    return -result if negate else result
