"""Roadmaps of bounded plane algebraic curves Z(q) in R^2.

Distinguished x-values are isolated roots of the eliminant res_y(q, dq/dy)
(plus leading-coefficient roots and input-point abscissas).  Between
consecutive distinguished values the curve is a union of disjoint branches,
one per real root of the fiber polynomial at any rational sample; above a
distinguished value the fiber nodes are certified by a combination of
branch-limit matching (with curve-free gap rectangles proved by interval
subdivision), exact sign changes at the algebraic abscissa, and
interval-Newton verification of critical points.  Everything is exact
rational arithmetic; refinement failures raise rather than guess.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    BranchMatchFailure, DegreeTooSmall, InputError, NonBoundedCurve,
    NotStabilized, OddDegree, PointNotOnCurve,
)
from .mpoly import MultiPoly, resultant
from .rational import Interval, Rational, sign
from .upoly import UniPoly, count_roots, isolate_roots, refine_root

PSEUDO_CRITICAL = "PSEUDO_CRITICAL"
INPUT_POINT = "INPUT_POINT"
ENDPOINT = "ENDPOINT"


# ---------------------------------------------------------------------------
# algebraic numbers: real roots of squarefree rational polynomials

class AlgebraicNumber:
    """A real number given exactly: rational, or an isolated polynomial root."""

    __slots__ = ("poly", "iso")

    def __init__(self, poly: UniPoly | None, iso: Interval):
        self.poly = poly
        self.iso = iso
        if poly is None and not iso.is_point():
            raise InputError("a rational AlgebraicNumber needs a point interval")

    @staticmethod
    def rational(value: Rational) -> "AlgebraicNumber":
        return AlgebraicNumber(None, Interval(value, value))

    def is_rational(self) -> bool:
        return self.iso.is_point()

    def value(self) -> Rational:
        return self.iso.lo

    def __repr__(self):
        if self.is_rational():
            return f"AlgebraicNumber({self.iso.lo})"
        return f"AlgebraicNumber(root in {self.iso})"

    def refine(self, width: Rational) -> None:
        if not self.is_rational() and self.iso.width > width:
            self.iso = refine_root(self.poly, self.iso, width)

    def sign_of(self, g: UniPoly) -> int:
        """Exact sign of g at this number."""
        if g.is_zero():
            return 0
        if self.is_rational():
            return sign(g.eval(self.value()))
        h = self.poly.gcd(g)
        if h.degree >= 1 and sign(h.eval(self.iso.lo)) * sign(h.eval(self.iso.hi)) < 0:
            return 0
        while True:
            rng = g.eval_interval(self.iso)
            s = rng.sign()
            if s is not None:
                return s
            self.iso = refine_root(self.poly, self.iso, self.iso.width / 2)
            if self.iso.is_point():
                return sign(g.eval(self.value()))


def separate(numbers: list[AlgebraicNumber]) -> None:
    """Refine until isolating intervals are pairwise disjoint and ordered.

    The caller must have removed duplicates; equal numbers loop forever, so
    a safety cap raises instead.
    """
    numbers.sort(key=lambda a: (a.iso.lo, a.iso.hi))
    for _ in range(2000):
        numbers.sort(key=lambda a: (a.iso.lo, a.iso.hi))
        clashes = False
        for a, b in zip(numbers, numbers[1:]):
            if a.iso.hi >= b.iso.lo:
                clashes = True
                for n in (a, b):
                    if not n.is_rational():
                        n.refine(n.iso.width / 4)
        if not clashes:
            return
    raise NotStabilized("could not separate distinguished values (duplicate numbers?)")


def _same_number(a: AlgebraicNumber, b: AlgebraicNumber) -> bool:
    if not a.iso.intersects(b.iso):
        return False
    if a.is_rational() and b.is_rational():
        return a.value() == b.value()
    if a.is_rational():
        return b.sign_of(UniPoly([-a.value(), 1])) == 0
    if b.is_rational():
        return a.sign_of(UniPoly([-b.value(), 1])) == 0
    h = a.poly.gcd(b.poly)
    if h.degree < 1:
        return False
    if a.sign_of(h) != 0 or b.sign_of(h) != 0:
        return False
    # both are roots of h; equal iff the same root, i.e. intervals overlap
    # around a single root of h
    hull = a.iso.hull(b.iso)
    return count_roots(h, hull) == 1


def dedup_numbers(numbers: list[AlgebraicNumber]) -> list[AlgebraicNumber]:
    kept: list[AlgebraicNumber] = []
    for n in numbers:
        if not any(_same_number(n, m) for m in kept):
            kept.append(n)
    return kept


# ---------------------------------------------------------------------------
# deformation

def deform(q: MultiPoly, zeta: Rational, c: Rational, dbar: int) -> MultiPoly:
    """zeta * G_k(dbar, c) + (1 - zeta) * q, exactly."""
    if dbar % 2 != 0:
        raise OddDegree(f"dbar must be even, got {dbar}")
    if dbar <= q.total_degree():
        raise DegreeTooSmall(f"dbar must exceed deg(q) = {q.total_degree()}")
    k = q.k
    zeta = Fraction(zeta)
    c = Fraction(c)
    g = MultiPoly(k, {})
    for i in range(k):
        exps = [0] * k
        exps[i] = dbar
        g = g + MultiPoly(k, {tuple(exps): Fraction(1)})
    for i in range(1, k):
        exps = [0] * k
        exps[i] = 2
        g = g + MultiPoly(k, {tuple(exps): Fraction(1)})
    g = Fraction(c**dbar) * g - MultiPoly.constant(k, 2 * k - 1)
    return zeta * g + (1 - zeta) * q


# ---------------------------------------------------------------------------
# curve analysis

class _BiEval:
    """Tight interval evaluation of a bivariate polynomial.

    Coefficients in y are enclosed per-coefficient over the x-interval and
    combined with y-powers, which avoids most of the dependency loss of
    term-by-term evaluation on expanded products.
    """

    __slots__ = ("coeffs",)

    def __init__(self, q: MultiPoly):
        self.coeffs = [c.to_unipoly(0) for c in q.univariate_coeffs(1)]

    def range(self, bx: Interval, by: Interval) -> Interval:
        acc = Interval(0)
        for e, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            acc = acc + c.eval_interval(bx) * by.power(e)
        return acc

    def at(self, x0, y0):
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * y0 + c.eval(x0)
        return acc


def _to_unipoly_in(p: MultiPoly, var: int) -> UniPoly:
    """p must involve only variable var."""
    return p.to_unipoly(var)


def _subst_x(q: MultiPoly, x0: Rational) -> UniPoly:
    return q.substitute(0, x0).to_unipoly(1)


def _subst_y(q: MultiPoly, y0: Rational) -> UniPoly:
    return q.substitute(1, y0).to_unipoly(0)


class _Curve:
    """Shared exact data for one bounded plane curve."""

    def __init__(self, q: MultiPoly):
        if q.k != 2:
            raise InputError("roadmaps are implemented for plane curves (k = 2) only")
        if q.is_zero() or q.is_constant():
            raise InputError("q must be a nonconstant polynomial")
        self.q = q
        self.qy = q.derivative(1)
        self.qx = q.derivative(0)
        if q.degree_in(1) == 0:
            # q depends on x only: zero set is a union of vertical lines
            if isolate_roots(q.to_unipoly(0)):
                raise NonBoundedCurve("curve contains vertical lines")
            self.empty = True
            return
        self.empty = False
        elim = resultant(q, self.qy, 1)
        if elim.is_zero():
            raise InputError("q has repeated factors; pass its squarefree part")
        self.elim = _to_unipoly_in(elim, 0).squarefree()
        if q.degree_in(0) > 0:
            elim_y = resultant(q, self.qx, 0) if self.qx.degree_in(0) > 0 else None
        else:
            elim_y = None
        self.lc_y = q.coeff_in(1, q.degree_in(1))  # polynomial in x
        # y-range bound: every curve point has |y| below the fiber root bound
        # maximized over x; use a crude global bound via coefficient intervals
        self.y_bound = self._fiber_root_bound()

    def _fiber_root_bound(self) -> Fraction:
        # Cauchy-style bound valid on the x-range of interest
        xs = isolate_roots(self.elim)
        if not xs:
            return Fraction(1)
        span = Interval(xs[0].lo - 1, xs[-1].hi + 1)
        coeffs = self.q.univariate_coeffs(1)
        lead = coeffs[-1].eval_interval([span, Interval(0)])
        others = [c.eval_interval([span, Interval(0)]) for c in coeffs[:-1]]
        lead_min = min(abs(lead.lo), abs(lead.hi))
        if lead.lo <= 0 <= lead.hi or lead_min == 0:
            lead_min = None  # leading coefficient may vanish on the span
        big = max((max(abs(o.lo), abs(o.hi)) for o in others), default=Fraction(0))
        if lead_min:
            return 1 + big / lead_min
        return 1 + big  # fallback; escape through lc roots is checked separately


def _critical_boxes(q: MultiPoly, x_roots: list[AlgebraicNumber], max_depth: int = 24):
    """Interval-Newton certified boxes of {q = 0, dq/dy = 0}.

    Returns (confirmed, undecided): confirmed is a list of
    (x_root_index, contracted y_interval); undecided lists candidate boxes
    that were neither confirmed nor excluded within the depth budget.
    """
    qy = q.derivative(1)
    if qy.degree_in(0) >= 1 and q.degree_in(0) >= 1:
        stack_poly = resultant(q, qy, 0)
        f_y = _to_unipoly_in(stack_poly, 1).squarefree()
    elif qy.degree_in(0) == 0:
        f_y = qy.to_unipoly(1).squarefree()
    else:
        f_y = q.to_unipoly(1).squarefree()
    y_roots = isolate_roots(f_y) if f_y.degree >= 1 else []
    # pad candidates into open boxes (Newton needs interior containment)
    y_boxes = []
    for i, c in enumerate(y_roots):
        left = (c.lo - y_roots[i - 1].hi) / 4 if i > 0 else Fraction(1, 2)
        right = (y_roots[i + 1].lo - c.hi) / 4 if i + 1 < len(y_roots) else Fraction(1, 2)
        y_boxes.append(Interval(c.lo - left, c.hi + right))
    evs = (
        _BiEval(q),
        _BiEval(qy),
        _BiEval(q.derivative(0)),
        _BiEval(qy.derivative(0)),
        _BiEval(qy.derivative(1)),
    )

    confirmed: list[tuple[int, Interval]] = []
    undecided: list[tuple[int, Interval]] = []
    for xi, xr in enumerate(x_roots):
        xr.refine(Fraction(1, 16))
        if xr.is_rational():
            # exact fiber: critical ys are the common roots of q(v,.) and qy(v,.)
            v = xr.value()
            fiber = q.substitute(0, v).to_unipoly(1)
            qy_v = qy.substitute(0, v).to_unipoly(1)
            if fiber.is_zero():
                continue
            common = fiber.gcd(qy_v) if not qy_v.is_zero() else fiber
            if common.degree >= 1:
                for iv in isolate_roots(common):
                    confirmed.append((xi, iv))
            continue
        for ybox in y_boxes:
            verdict, tight = _newton_decide(evs, xr, ybox, max_depth)
            if verdict == "yes":
                confirmed.append((xi, tight))
            elif verdict == "maybe":
                undecided.append((xi, ybox))
    return confirmed, undecided


def _idiv(a: Interval, b: Interval) -> Interval:
    if b.lo <= 0 <= b.hi:
        raise ZeroDivisionError("interval division by an interval containing zero")
    cands = (a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi)
    return Interval(min(cands), max(cands))


def _newton_decide(evs, xr: AlgebraicNumber, ybox: Interval, depth: int):
    """Decide {q=0, qy=0} in the box (xr.iso x ybox).

    evs holds _BiEval evaluators for (q, qy, qx, qxy, qyy).  Returns
    ("yes", tight_y_interval) when interval Newton certifies a unique
    solution in some sub-box, ("no", None) when the whole box is excluded,
    ("maybe", None) when the depth budget runs out.
    """
    eq, eqy, eqx, eqxy, eqyy = evs
    boxes = [(Interval(xr.iso.lo, xr.iso.hi), ybox, depth)]
    while boxes:
        bx, by, d = boxes.pop()
        rq = eq.range(bx, by)
        if rq.lo > 0 or rq.hi < 0:
            continue
        rqy = eqy.range(bx, by)
        if rqy.lo > 0 or rqy.hi < 0:
            continue
        a = eqx.range(bx, by)
        b = rqy
        c = eqxy.range(bx, by)
        e = eqyy.range(bx, by)
        det = a * e - b * c
        if not (det.lo <= 0 <= det.hi):
            mx, my = bx.mid, by.mid
            fq = eq.at(mx, my)
            fqy = eqy.at(mx, my)
            # N = m - J^-1 F with J^-1 = [[e, -b], [-c, a]] / det
            nx = Interval(mx) - _idiv(e * fq - b * fqy, det)
            ny = Interval(my) - _idiv(a * fqy - c * fq, det)
            if bx.lo < nx.lo and nx.hi < bx.hi and by.lo < ny.lo and ny.hi < by.hi:
                return "yes", ny
        if d <= 0:
            return "maybe", None
        # split with a small overlap so a solution sitting exactly on a
        # midline is interior to some child (strict Newton containment
        # cannot fire on boundary solutions otherwise)
        ox, oy = bx.width / 8, by.width / 8
        xm, ym = bx.mid, by.mid
        boxes += [
            (Interval(bx.lo, xm + ox), Interval(by.lo, ym + oy), d - 1),
            (Interval(bx.lo, xm + ox), Interval(ym - oy, by.hi), d - 1),
            (Interval(xm - ox, bx.hi), Interval(by.lo, ym + oy), d - 1),
            (Interval(xm - ox, bx.hi), Interval(ym - oy, by.hi), d - 1),
        ]
    return "no", None


@dataclass
class DistinguishedValue:
    isolating: Interval
    kind: str
    number: AlgebraicNumber | None = None
    # probe abscissas just left/right of the value, set during assembly
    probe_width: Fraction | None = None
    probe_left: Fraction | None = None
    probe_right: Fraction | None = None

    def to_json(self) -> dict:
        return {"isolating": self.isolating.to_json(), "kind": self.kind}


def pseudo_critical_x(
    q: MultiPoly,
    smooth_hint: bool = True,
    zeta_start: Rational = Fraction(1, 64),
    max_halvings: int = 10,
) -> list[DistinguishedValue]:
    """x-values of the critical points of the projection to the first axis.

    smooth_hint: solve {q = 0, dq/dy = 0} directly via the eliminant, keeping
    only eliminant roots above which a real solution is certified.
    Otherwise deform the curve and keep the critical values that stabilize
    (nested isolating envelopes) across halvings of the deformation size.
    """
    if smooth_hint:
        return _critical_values_direct(q)
    curve = _Curve(q)
    if curve.empty:
        return []
    xs = isolate_roots(curve.elim)
    bound = max(abs(xs[0].lo), abs(xs[-1].hi), curve.y_bound, Fraction(1)) + 1 if xs else Fraction(2)
    c = Fraction(1, int(bound) + 1)
    dbar = q.total_degree() + 1
    if dbar % 2:
        dbar += 1
    zeta = Fraction(zeta_start)
    prev: list[Interval] | None = None
    for _ in range(max_halvings):
        vals = [dv.isolating for dv in _critical_values_direct(deform(q, zeta, c, dbar))]
        if prev is not None and len(vals) == len(prev):
            envelopes = [Interval(p.lo - 2 * p.width - zeta, p.hi + 2 * p.width + zeta) for p in prev]
            if all(e.contains_interval(v) for e, v in zip(envelopes, vals)):
                return [DistinguishedValue(v, PSEUDO_CRITICAL) for v in vals]
        prev = vals
        zeta /= 2
    raise NotStabilized("deformed critical values did not stabilize")


def _critical_values_direct(q: MultiPoly) -> list[DistinguishedValue]:
    curve = _Curve(q)
    if curve.empty:
        return []
    x_roots = [AlgebraicNumber(curve.elim, iv) for iv in isolate_roots(curve.elim)]
    confirmed, undecided = _critical_boxes(q, x_roots)
    if undecided:
        raise NotStabilized(
            f"{len(undecided)} critical-point candidate box(es) undecided; "
            "use the deformation route or a finer depth"
        )
    real_idx = sorted({xi for xi, _ in confirmed})
    return [
        DistinguishedValue(x_roots[xi].iso, PSEUDO_CRITICAL, number=x_roots[xi])
        for xi in real_idx
    ]


# ---------------------------------------------------------------------------
# roadmap graph

@dataclass
class RoadmapNode:
    value_index: int  # index into the distinguished-value list
    y: Interval
    kind: str
    point: tuple | None = None  # exact rational coordinates when available


@dataclass
class RoadmapEdge:
    kind: str  # "curve" (k=2 has no fiber segments: fibers are finite)
    gap: int  # index of the open interval between distinguished values
    branch: int
    left_node: int
    right_node: int
    x_range: Interval = None


@dataclass
class RoadmapGraph:
    values: list[DistinguishedValue]
    nodes: list[RoadmapNode]
    edges: list[RoadmapEdge]
    gap_samples: list[Rational]
    gap_branches: list[list[Interval]]
    warnings: list[str] = field(default_factory=list)

    def component_count(self) -> int:
        parent = list(range(len(self.nodes)))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for e in self.edges:
            ra, rb = find(e.left_node), find(e.right_node)
            if ra != rb:
                parent[ra] = rb
        return len({find(i) for i in range(len(self.nodes))})

    def node_components(self) -> list[int]:
        parent = list(range(len(self.nodes)))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for e in self.edges:
            ra, rb = find(e.left_node), find(e.right_node)
            if ra != rb:
                parent[ra] = rb
        roots = {}
        out = []
        for i in range(len(self.nodes)):
            r = find(i)
            out.append(roots.setdefault(r, len(roots)))
        return out

    def to_json(self) -> dict:
        return {
            "nodes": [
                {
                    "x": self.values[n.value_index].isolating.to_json(),
                    "y": n.y.to_json(),
                    "kind": n.kind,
                }
                for n in self.nodes
            ],
            "edges": [
                {
                    "type": e.kind,
                    "xrange": e.x_range.to_json() if e.x_range else None,
                    "branch": e.branch,
                    "endpoints": [e.left_node, e.right_node],
                }
                for e in self.edges
            ],
            "values": [v.to_json() for v in self.values],
            "warnings": list(self.warnings),
        }


def _gap_free_certificate(ev: _BiEval, xiv: Interval, ylo: Rational, yhi: Rational, depth: int = 12) -> bool:
    """Prove q != 0 on xiv x [ylo, yhi] by adaptive subdivision in y."""
    if ylo >= yhi:
        return True
    stack = [(ylo, yhi, depth)]
    while stack:
        a, b, d = stack.pop()
        rng = ev.range(xiv, Interval(a, b))
        if rng.lo > 0 or rng.hi < 0:
            continue
        if d <= 0:
            return False
        m = (a + b) / 2
        stack += [(a, m, d - 1), (m, b, d - 1)]
    return True


def _roots_in_candidates(roots: list[Interval], cands: list[Interval], fiber: UniPoly):
    """Map each fiber root to the unique candidate containing it, refining roots."""
    out = []
    for r in roots:
        placed = None
        r_cur = r
        for _ in range(64):
            hits = [i for i, c in enumerate(cands) if c.intersects(r_cur)]
            if len(hits) == 1 and cands[hits[0]].contains_interval(r_cur):
                placed = hits[0]
                break
            if not hits:
                placed = -1
                break
            r_cur = refine_root(fiber, r_cur, r_cur.width / 4 if r_cur.width else Fraction(1))
            if r_cur.is_point():
                hits = [i for i, c in enumerate(cands) if c.contains(r_cur.lo)]
                placed = hits[0] if hits else -1
                break
        if placed is None or placed == -1:
            return None
        out.append(placed)
    return out


def build_roadmap(q: MultiPoly, input_points: list | None = None, max_attempts: int = 12) -> RoadmapGraph:
    """Roadmap of a bounded plane curve, optionally through given points."""
    input_points = [(Fraction(p[0]), Fraction(p[1])) for p in (input_points or [])]
    for pt in input_points:
        if q.eval(list(pt)) != 0:
            raise PointNotOnCurve(f"{pt} does not satisfy the curve equation")
    curve = _Curve(q)
    if curve.empty:
        return RoadmapGraph([], [], [], [], [])

    elim_roots = [AlgebraicNumber(curve.elim, iv) for iv in isolate_roots(curve.elim)]
    confirmed_crit, undecided = _critical_boxes(q, elim_roots)
    if undecided:
        und_x = sorted({xi for xi, _ in undecided})
        raise NotStabilized(f"critical-point candidates above eliminant roots {und_x} undecided")
    crit_idx = {xi for xi, _ in confirmed_crit}

    # distinguished values: (number, kind, eliminant root index or None)
    entries: list[tuple[AlgebraicNumber, str, int | None]] = []
    for pt in input_points:
        entries.append((AlgebraicNumber.rational(pt[0]), INPUT_POINT, None))
    for i, r in enumerate(elim_roots):
        entries.append((r, PSEUDO_CRITICAL if i in crit_idx else ENDPOINT, i))
    if not curve.lc_y.is_constant():
        lc_poly = curve.lc_y.to_unipoly(0).squarefree()
        for iv in isolate_roots(lc_poly):
            entries.append((AlgebraicNumber(lc_poly, iv), ENDPOINT, None))

    # dedup, keeping the earliest entry (input points first) but merging the
    # eliminant index and the strongest kind into the survivor
    kept: list[list] = []
    for n, kind, ei in entries:
        match = next((item for item in kept if _same_number(n, item[0])), None)
        if match is None:
            kept.append([n, kind, ei])
        else:
            if match[2] is None:
                match[2] = ei
            if kind == PSEUDO_CRITICAL and match[1] == ENDPOINT:
                match[1] = kind
    if not kept:
        return RoadmapGraph([], [], [], [], [])
    nums = [item[0] for item in kept]
    separate(nums)
    kept.sort(key=lambda item: item[0].iso.lo)
    nums = [item[0] for item in kept]
    values = [DistinguishedValue(n.iso, item[1], number=n) for n, item in zip(nums, kept)]
    crit_boxes_by_value: dict[int, list[Interval]] = {}
    for vi, item in enumerate(kept):
        if item[2] is not None:
            crit_boxes_by_value[vi] = [ybox for xi, ybox in confirmed_crit if xi == item[2]]

    # boundedness: no curve beyond the outermost distinguished values
    if isolate_roots(_subst_x(q, nums[0].iso.lo - 1)) or isolate_roots(_subst_x(q, nums[-1].iso.hi + 1)):
        raise NonBoundedCurve("curve extends beyond all distinguished values")

    y_cap = curve.y_bound
    ev = _BiEval(q)
    for vi, v in enumerate(values):
        v.probe_width = _probe_width(values, vi)
    for _ in range(max_attempts):
        result = _try_assemble(q, ev, values, nums, y_cap, crit_boxes_by_value)
        if result is not None:
            return result
        for n in nums:
            if not n.is_rational():
                n.refine(n.iso.width / 8)
        for v, n in zip(values, nums):
            v.isolating = n.iso
            v.probe_width = v.probe_width / 4
    raise BranchMatchFailure("branch-to-node matching did not stabilize under refinement")


def _match_fiber(q, ev: _BiEval, n: AlgebraicNumber, value: DistinguishedValue, y_cap, crit_boxes):
    """Nodes above one distinguished value plus the branch maps at its probes.

    Returns (candidates, confirmed_indices, lmap, rmap, pl, pr) or None when
    a certificate failed and the caller should refine and retry.
    """
    if n.is_rational():
        fiber = _subst_x(q, n.value())
        if fiber.is_zero():
            raise NonBoundedCurve("vertical line inside the curve")
        cands = isolate_roots(fiber, Interval(-y_cap, y_cap))
        confirmed = set(range(len(cands)))
        pl = n.value() - value.probe_width
        pr = n.value() + value.probe_width
    else:
        gcand = resultant(q, MultiPoly.from_unipoly(n.poly, 2, 0), 0)
        gy = _to_unipoly_in(gcand, 1)
        if gy.is_zero():
            raise NonBoundedCurve("degenerate fiber eliminant")
        cands = isolate_roots(gy.squarefree(), Interval(-y_cap, y_cap))
        confirmed = set()
        for ci, c in enumerate(cands):
            if n.sign_of(_subst_y(q, c.lo)) * n.sign_of(_subst_y(q, c.hi)) < 0:
                confirmed.add(ci)
        for ybox in crit_boxes:
            for ci, c in enumerate(cands):
                if c.intersects(ybox):
                    confirmed.add(ci)
        pl, pr = n.iso.lo, n.iso.hi

    xiv = Interval(pl, pr)
    padded = _padded_candidates(cands, y_cap)
    for c1, c2 in zip(padded, padded[1:]):
        if not _gap_free_certificate(ev, xiv, c1.hi, c2.lo):
            return None
    if padded:
        if not _gap_free_certificate(ev, xiv, -y_cap, padded[0].lo):
            return None
        if not _gap_free_certificate(ev, xiv, padded[-1].hi, y_cap):
            return None
    lfiber = _subst_x(q, pl)
    rfiber = _subst_x(q, pr)
    lroots = isolate_roots(lfiber, Interval(-y_cap, y_cap)) if not lfiber.is_zero() else []
    rroots = isolate_roots(rfiber, Interval(-y_cap, y_cap)) if not rfiber.is_zero() else []
    lmap = _roots_in_candidates(lroots, padded, lfiber)
    rmap = _roots_in_candidates(rroots, padded, rfiber)
    if lmap is None or rmap is None:
        return None
    confirmed |= set(lmap) | set(rmap)
    for ci in range(len(cands)):
        if ci not in confirmed and not _gap_free_certificate(ev, xiv, cands[ci].lo, cands[ci].hi):
            return None
    return cands, sorted(confirmed), lmap, rmap, pl, pr


def _try_assemble(q, ev, values, nums, y_cap, crit_boxes_by_value):
    m = len(values)
    nodes: list[RoadmapNode] = []
    node_of: dict[tuple[int, int], int] = {}
    left_match: list = [None] * m
    right_match: list = [None] * m
    for vi, v in enumerate(values):
        res = _match_fiber(q, ev, nums[vi], v, y_cap, crit_boxes_by_value.get(vi, []))
        if res is None:
            return None
        cands, confirmed, lmap, rmap, pl, pr = res
        for ci in confirmed:
            node_of[(vi, ci)] = len(nodes)
            c = cands[ci]
            point = (nums[vi].value(), c.lo) if nums[vi].is_rational() and c.is_point() else None
            nodes.append(RoadmapNode(vi, c, v.kind, point))
        left_match[vi] = lmap
        right_match[vi] = rmap
        v.probe_left, v.probe_right = pl, pr

    gap_samples: list[Fraction] = []
    gap_branches: list[list[Interval]] = []
    for g in range(m - 1):
        s = (values[g].probe_right + values[g + 1].probe_left) / 2
        fiber = _subst_x(q, s)
        if fiber.is_zero():
            raise NonBoundedCurve("vertical line inside the curve")
        gap_samples.append(s)
        gap_branches.append(isolate_roots(fiber, Interval(-y_cap, y_cap)))

    edges: list[RoadmapEdge] = []
    for g, branches in enumerate(gap_branches):
        lmatch = right_match[g]
        rmatch = left_match[g + 1]
        if len(lmatch) != len(branches) or len(rmatch) != len(branches):
            return None
        for b in range(len(branches)):
            ln = node_of.get((g, lmatch[b]))
            rn = node_of.get((g + 1, rmatch[b]))
            if ln is None or rn is None:
                return None
            edges.append(
                RoadmapEdge(
                    "curve", g, b, ln, rn,
                    x_range=Interval(values[g].probe_right, values[g + 1].probe_left),
                )
            )
    return RoadmapGraph(values, nodes, edges, gap_samples, gap_branches)


def _probe_width(values, vi) -> Fraction:
    v = values[vi]
    gaps = []
    if vi > 0:
        gaps.append(v.isolating.lo - values[vi - 1].isolating.hi)
    if vi + 1 < len(values):
        gaps.append(values[vi + 1].isolating.lo - v.isolating.hi)
    w = min(gaps) / 4 if gaps else Fraction(1, 4)
    return max(w, Fraction(1, 1 << 30))


def _padded_candidates(cands: list[Interval], y_cap) -> list[Interval]:
    """Inflate candidates into disjoint boxes that probes can land in."""
    out = []
    for i, c in enumerate(cands):
        left_gap = (c.lo - cands[i - 1].hi) / 4 if i > 0 else Fraction(1, 4)
        right_gap = (cands[i + 1].lo - c.hi) / 4 if i + 1 < len(cands) else Fraction(1, 4)
        out.append(Interval(c.lo - left_gap, c.hi + right_gap))
    return out


def curve_components(q: MultiPoly) -> int:
    """Number of connected components of the bounded curve Z(q)."""
    return build_roadmap(q).component_count()


@dataclass
class PathStep:
    edge: RoadmapEdge
    from_node: int
    to_node: int


def connect_point(q: MultiPoly, point) -> list[PathStep]:
    """Path of roadmap edges from the given curve point to the nearest
    pseudo-critical node (leftmost on ties); empty when the point is one."""
    point = (Fraction(point[0]), Fraction(point[1]))
    rm = build_roadmap(q, [point])
    start = None
    for i, n in enumerate(rm.nodes):
        if n.point == point or (
            rm.values[n.value_index].isolating.contains(point[0]) and n.y.contains(point[1])
        ):
            start = i
            break
    if start is None:
        raise PointNotOnCurve(f"{point} not found among roadmap nodes")
    targets = {
        i for i, n in enumerate(rm.nodes) if rm.values[n.value_index].kind == PSEUDO_CRITICAL
    }
    if start in targets:
        return []
    adj: dict[int, list[tuple[int, RoadmapEdge]]] = {}
    for e in rm.edges:
        adj.setdefault(e.left_node, []).append((e.right_node, e))
        adj.setdefault(e.right_node, []).append((e.left_node, e))

    from collections import deque

    prev: dict[int, tuple[int, RoadmapEdge]] = {}
    depth_of = {start: 0}
    queue = deque([start])
    reached: list[int] = []
    found_depth = None
    while queue:
        cur = queue.popleft()
        if found_depth is not None and depth_of[cur] >= found_depth:
            break
        for nxt, e in sorted(adj.get(cur, []), key=lambda t: t[0]):
            if nxt in depth_of:
                continue
            depth_of[nxt] = depth_of[cur] + 1
            prev[nxt] = (cur, e)
            if nxt in targets:
                reached.append(nxt)
                found_depth = depth_of[nxt]
            queue.append(nxt)
    if not reached:
        raise BranchMatchFailure("no pseudo-critical node reachable from the point")
    target = min(
        reached,
        key=lambda i: (rm.values[rm.nodes[i].value_index].isolating.lo, rm.nodes[i].y.lo),
    )
    steps: list[PathStep] = []
    cur = target
    while cur != start:
        parent, e = prev[cur]
        steps.append(PathStep(e, parent, cur))
        cur = parent
    steps.reverse()
    return steps


def sample_edge_points(q: MultiPoly, rm: RoadmapGraph, edge: RoadmapEdge,
                       samples: int = 5, tolerance: Fraction = Fraction(1, 1 << 20)):
    """Rational points along a curve edge with |q| <= tolerance at each."""
    lo, hi = edge.x_range.lo, edge.x_range.hi
    pts = []
    for t in range(1, samples + 1):
        x0 = lo + Fraction(t, samples + 1) * (hi - lo)
        fiber = _subst_x(q, x0)
        roots = isolate_roots(fiber)
        if edge.branch >= len(roots):
            raise BranchMatchFailure("branch disappeared inside a gap")
        r = roots[edge.branch]
        while True:
            y0 = r.mid
            if abs(fiber.eval(y0)) <= tolerance:
                break
            r = refine_root(fiber, r, r.width / 4)
        pts.append((x0, y0))
    return pts


def roadmap_svg(q: MultiPoly, rm: RoadmapGraph, width: int = 480) -> str:
    """Standalone SVG plot of curve samples with the roadmap overlay."""
    pts = []
    for e in rm.edges:
        pts += sample_edge_points(q, rm, e, samples=24, tolerance=Fraction(1, 1024))
    node_pts = []
    for n in rm.nodes:
        node_pts.append((rm.values[n.value_index].isolating.mid, n.y.mid))
    every = pts + node_pts
    if not every:
        return '<svg xmlns="http://www.w3.org/2000/svg" width="10" height="10"/>'
    xs = [float(p[0]) for p in every]
    ys = [float(p[1]) for p in every]
    x0, x1 = min(xs) - 0.5, max(xs) + 0.5
    y0, y1 = min(ys) - 0.5, max(ys) + 0.5
    h = int(width * (y1 - y0) / (x1 - x0)) or width

    def sx(x):
        return (float(x) - x0) / (x1 - x0) * width

    def sy(y):
        return h - (float(y) - y0) / (y1 - y0) * h

    bits = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{h}">']
    for x, y in pts:
        bits.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="1.5" fill="#888"/>')
    for x, y in node_pts:
        bits.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="4" fill="#c00"/>')
    bits.append("</svg>")
    return "\n".join(bits)
