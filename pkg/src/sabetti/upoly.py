"""Univariate polynomials over the rationals: Sturm sequences and real roots.

Coefficients are stored dense, lowest degree first; the zero polynomial is
the empty list.  Root isolation runs on the squarefree part, so input
polynomials may have repeated roots.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import NotIsolating, ZeroPolynomial
from .rational import Interval, Rational, sign


class UniPoly:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = cs

    @staticmethod
    def constant(c) -> "UniPoly":
        return UniPoly([c])

    @staticmethod
    def x() -> "UniPoly":
        return UniPoly([0, 1])

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        """Degree, with the zero polynomial mapped to -1."""
        return len(self.coeffs) - 1

    def leading(self) -> Rational:
        if not self.coeffs:
            return Fraction(0)
        return self.coeffs[-1]

    def __eq__(self, other):
        return isinstance(other, UniPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(self.coeffs))

    def __repr__(self):
        return f"UniPoly({self.coeffs})"

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return UniPoly([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])

    def __neg__(self):
        return UniPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return UniPoly([c * other for c in self.coeffs])
        if self.is_zero() or other.is_zero():
            return UniPoly([])
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return UniPoly(out)

    __rmul__ = __mul__

    def eval(self, x: Rational) -> Rational:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_interval(self, box: Interval) -> Interval:
        """Enclosure of the range over box, term-by-term with tight powers."""
        acc = Interval(0)
        for e, c in enumerate(self.coeffs):
            if c != 0:
                acc = acc + box.power(e) * Interval(c)
        return acc

    def derivative(self) -> "UniPoly":
        return UniPoly([i * c for i, c in enumerate(self.coeffs)][1:])

    def divmod(self, other: "UniPoly") -> tuple["UniPoly", "UniPoly"]:
        if other.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        q = [Fraction(0)] * max(0, self.degree - other.degree + 1)
        r = list(self.coeffs)
        lead = other.leading()
        while len(r) >= len(other.coeffs) and any(c != 0 for c in r):
            while r and r[-1] == 0:
                r.pop()
            if len(r) < len(other.coeffs):
                break
            factor = r[-1] / lead
            shift = len(r) - len(other.coeffs)
            q[shift] = factor
            for i, c in enumerate(other.coeffs):
                r[shift + i] -= factor * c
            r.pop()
        return UniPoly(q), UniPoly(r)

    def rem(self, other: "UniPoly") -> "UniPoly":
        return self.divmod(other)[1]

    def monic(self) -> "UniPoly":
        if self.is_zero():
            return self
        lead = self.leading()
        return UniPoly([c / lead for c in self.coeffs])

    def gcd(self, other: "UniPoly") -> "UniPoly":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a.rem(b)
        return a.monic()

    def squarefree(self) -> "UniPoly":
        """Product of the distinct irreducible factors (same real roots)."""
        if self.degree < 1:
            return self.monic()
        g = self.gcd(self.derivative())
        if g.degree == 0:
            return self.monic()
        return self.divmod(g)[0].monic()

    def root_bound(self) -> Rational:
        """Cauchy bound: all real roots lie in [-B, B]."""
        if self.degree < 1:
            return Fraction(0)
        lead = abs(self.leading())
        return 1 + max(abs(c) for c in self.coeffs[:-1]) / lead


def sturm_sequence(p: UniPoly) -> list[UniPoly]:
    """Sturm sequence of the squarefree part of p."""
    f = p.squarefree()
    seq = [f, f.derivative()]
    while not seq[-1].is_zero():
        seq.append(-seq[-2].rem(seq[-1]))
    seq.pop()
    return seq


def _variations(values) -> int:
    count = 0
    prev = 0
    for v in values:
        s = sign(v)
        if s == 0:
            continue
        if prev != 0 and s != prev:
            count += 1
        prev = s
    return count


def sturm_count(seq: list[UniPoly], lo: Rational, hi: Rational) -> int:
    """Number of distinct real roots in the half-open interval (lo, hi]."""
    va = _variations(f.eval(lo) for f in seq)
    vb = _variations(f.eval(hi) for f in seq)
    return va - vb


def count_roots(p: UniPoly, interval: Interval) -> int:
    """Distinct real roots of p in the closed interval."""
    if p.is_zero():
        raise ZeroPolynomial("cannot count roots of the zero polynomial")
    seq = sturm_sequence(p)
    f = seq[0]
    n = sturm_count(seq, interval.lo, interval.hi)
    if f.eval(interval.lo) == 0:
        n += 1
    return n


def isolate_roots(p: UniPoly, search: Interval | None = None) -> list[Interval]:
    """Disjoint rational intervals, each isolating one distinct real root.

    Exact rational roots come back as point intervals.  Non-point intervals
    [a, b] always satisfy f(a) != 0 != f(b) for the squarefree part f, and
    no emitted interval contains a root of f at an endpoint it shares with
    another emitted interval.
    """
    if p.is_zero():
        raise ZeroPolynomial("cannot isolate roots of the zero polynomial")
    f = p.squarefree()
    if f.degree < 1:
        return []
    if search is None:
        bound = f.root_bound()
        search = Interval(-bound, bound)
    seq = sturm_sequence(f)
    out: list[Interval] = []
    lo, hi = search.lo, search.hi

    def bracket(point: Rational, a: Rational, b: Rational) -> tuple[Rational, Rational]:
        # shrinking bracket (mlo, mhi) around a known root at `point`,
        # clipped to [a, b], containing no other root and with nonzero ends
        w = (b - a) / 4 if b > a else Fraction(1)
        while True:
            mlo = max(a, point - w)
            mhi = min(b, point + w)
            ends_ok = (mlo == point or f.eval(mlo) != 0) and (mhi == point or f.eval(mhi) != 0)
            if ends_ok and sturm_count(seq, mlo, mhi) + (1 if f.eval(mlo) == 0 else 0) == 1:
                return mlo, mhi
            w = w / 2

    def split(a: Rational, b: Rational, count: int):
        # roots strictly inside (a, b); f(a) != 0 != f(b)
        if count == 0:
            return
        mid = (a + b) / 2
        if f.eval(mid) == 0:
            out.append(Interval(mid, mid))
            mlo, mhi = bracket(mid, a, b)
            split(a, mlo, sturm_count(seq, a, mlo))
            split(mhi, b, sturm_count(seq, mhi, b))
            return
        if count == 1:
            out.append(Interval(a, b))
            return
        split(a, mid, sturm_count(seq, a, mid))
        split(mid, b, sturm_count(seq, mid, b))

    if hi == lo:
        if f.eval(lo) == 0:
            out.append(Interval(lo, lo))
        return out
    if f.eval(lo) == 0:
        out.append(Interval(lo, lo))
        lo = bracket(lo, lo, hi)[1]
    if f.eval(hi) == 0:
        out.append(Interval(hi, hi))
        hi = bracket(hi, lo, hi)[0]
    split(lo, hi, sturm_count(seq, lo, hi) - (1 if f.eval(hi) == 0 else 0))
    out.sort(key=lambda iv: (iv.lo, iv.hi))
    # separate intervals that touch at an endpoint
    for i in range(len(out) - 1):
        a, b = out[i], out[i + 1]
        while a.hi >= b.lo:
            if not a.is_point():
                a = refine_root(f, a, a.width / 2)
            if not b.is_point() and a.hi >= b.lo:
                b = refine_root(f, b, b.width / 2)
        out[i], out[i + 1] = a, b
    return out


def refine_root(p: UniPoly, iso: Interval, width: Rational) -> Interval:
    """Shrink an isolating interval of p below the requested width.

    Bisection on the sign of the squarefree part; the input must isolate
    exactly one root, detected by a sign change (or be an exact point).
    """
    if p.is_zero():
        raise ZeroPolynomial("cannot refine a root of the zero polynomial")
    if iso.is_point():
        if p.eval(iso.lo) != 0:
            raise NotIsolating(f"{iso} is not a root of the polynomial")
        return iso
    f = p.squarefree()
    lo, hi = iso.lo, iso.hi
    slo, shi = sign(f.eval(lo)), sign(f.eval(hi))
    if slo == 0:
        return Interval(lo, lo)
    if shi == 0:
        return Interval(hi, hi)
    if slo == shi:
        inside = count_roots(f, iso)
        raise NotIsolating(f"interval {iso} contains {inside} roots, expected 1 with a sign change")
    while hi - lo > width:
        mid = (lo + hi) / 2
        smid = sign(f.eval(mid))
        if smid == 0:
            return Interval(mid, mid)
        if smid == slo:
            lo = mid
        else:
            hi = mid
    return Interval(lo, hi)
