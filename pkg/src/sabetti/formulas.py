"""Quantifier-free semi-algebraic formulas.

A formula is a Boolean tree over polynomial sign atoms.  The text format is
an S-expression grammar; see ``parse_formula``.  Box classification lifts
exact interval evaluation through three-valued logic, so INSIDE and OUTSIDE
verdicts are proofs.
"""

from __future__ import annotations

from enum import IntEnum
from fractions import Fraction

from .errors import ArityError, DimensionMismatch, FormulaSyntaxError
from .mpoly import MultiPoly
from .rational import Interval, Rational, rat_from_text, rat_to_text, sign

EQ, GT, LT, GE, LE = "=0", ">0", "<0", ">=0", "<=0"
RELATIONS = (EQ, GT, LT, GE, LE)
_CLOSED_RELATIONS = (EQ, GE, LE)


class BoxLabel(IntEnum):
    OUTSIDE = 0
    UNKNOWN = 1
    INSIDE = 2


class Atom:
    __slots__ = ("poly", "relation")

    def __init__(self, poly: MultiPoly, relation: str):
        if relation not in RELATIONS:
            raise FormulaSyntaxError(f"unknown relation {relation!r}")
        self.poly = poly
        self.relation = relation

    def __eq__(self, other):
        return isinstance(other, Atom) and self.relation == other.relation and self.poly == other.poly

    def __hash__(self):
        return hash((self.relation, self.poly.key()))

    def __repr__(self):
        return f"Atom({self.relation}, {self.poly.terms})"

    def holds_for_sign(self, s: int) -> bool:
        if self.relation == EQ:
            return s == 0
        if self.relation == GT:
            return s > 0
        if self.relation == LT:
            return s < 0
        if self.relation == GE:
            return s >= 0
        return s <= 0


class Formula:
    """Tree of atoms under and/or/not, plus the constants true and false."""

    __slots__ = ("op", "atom", "args", "k")

    def __init__(self, op: str, k: int, atom: Atom | None = None, args=None):
        self.op = op
        self.k = k
        self.atom = atom
        self.args = list(args) if args else []

    def __eq__(self, other):
        if not isinstance(other, Formula) or self.op != other.op or self.k != other.k:
            return False
        if self.op == "atom":
            return self.atom == other.atom
        return self.args == other.args

    def __hash__(self):
        if self.op == "atom":
            return hash(("atom", self.atom))
        return hash((self.op, tuple(self.args)))

    def __repr__(self):
        return f"Formula({print_formula(self)!r}, k={self.k})"

    def atoms(self) -> list[Atom]:
        """All atoms, in first-appearance order."""
        found: list[Atom] = []
        seen = set()

        def walk(f: Formula):
            if f.op == "atom":
                if f.atom not in seen:
                    seen.add(f.atom)
                    found.append(f.atom)
            for a in f.args:
                walk(a)

        walk(self)
        return found

    def atom_polys(self) -> list[MultiPoly]:
        """Distinct atom polynomials, in first-appearance order."""
        polys: list[MultiPoly] = []
        seen = set()
        for a in self.atoms():
            key = a.poly.key()
            if key not in seen:
                seen.add(key)
                polys.append(a.poly)
        return polys


def true_formula(k: int) -> Formula:
    return Formula("true", k)


def false_formula(k: int) -> Formula:
    return Formula("false", k)


def atom_formula(poly: MultiPoly, relation: str) -> Formula:
    """Atom constructor; vacuous atoms on constants fold to true/false."""
    if poly.is_constant():
        holds = Atom(poly, relation).holds_for_sign(sign(poly.constant_value()))
        return true_formula(poly.k) if holds else false_formula(poly.k)
    return Formula("atom", poly.k, atom=Atom(poly, relation))


def f_and(args, k: int | None = None) -> Formula:
    """Conjunction with true/false absorption; single arg passes through."""
    args = list(args)
    if k is None:
        k = args[0].k
    kept = []
    for a in args:
        if a.op == "false":
            return false_formula(k)
        if a.op != "true":
            kept.append(a)
    if not kept:
        return true_formula(k)
    if len(kept) == 1:
        return kept[0]
    return Formula("and", k, args=kept)


def f_or(args, k: int | None = None) -> Formula:
    args = list(args)
    if k is None:
        k = args[0].k
    kept = []
    for a in args:
        if a.op == "true":
            return true_formula(k)
        if a.op != "false":
            kept.append(a)
    if not kept:
        return false_formula(k)
    if len(kept) == 1:
        return kept[0]
    return Formula("or", k, args=kept)


def f_not(f: Formula) -> Formula:
    if f.op == "true":
        return false_formula(f.k)
    if f.op == "false":
        return true_formula(f.k)
    return Formula("not", f.k, args=[f])


# ---------------------------------------------------------------------------
# parsing

_ATOM_RELS = {"=0": EQ, ">0": GT, "<0": LT, ">=0": GE, "<=0": LE}


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.items: list[tuple[str, int]] = []
        i = 0
        while i < len(text):
            c = text[i]
            if c.isspace():
                i += 1
            elif c in "()":
                self.items.append((c, i))
                i += 1
            else:
                j = i
                while j < len(text) and not text[j].isspace() and text[j] not in "()":
                    j += 1
                self.items.append((text[i:j], i))
                i = j
        self.pos = 0

    def peek(self):
        if self.pos >= len(self.items):
            return None, len(self.text)
        return self.items[self.pos]

    def next(self):
        tok, at = self.peek()
        if tok is None:
            raise FormulaSyntaxError("unexpected end of input", at)
        self.pos += 1
        return tok, at


def _parse_poly(tokens: _Tokens, k: int) -> MultiPoly:
    tok, at = tokens.next()
    if tok == "(":
        head, hat = tokens.next()
        args: list[MultiPoly] = []
        if head == "^":
            base = _parse_poly(tokens, k)
            etok, eat = tokens.next()
            if not etok.isdigit():
                raise FormulaSyntaxError(f"exponent must be a nonnegative integer, got {etok!r}", eat)
            close, cat = tokens.next()
            if close != ")":
                raise FormulaSyntaxError("expected ')'", cat)
            return base ** int(etok)
        if head not in ("+", "*", "-"):
            raise FormulaSyntaxError(f"unknown polynomial operator {head!r}", hat)
        while True:
            tok2, at2 = tokens.peek()
            if tok2 is None:
                raise FormulaSyntaxError("unexpected end of input", at2)
            if tok2 == ")":
                tokens.next()
                break
            args.append(_parse_poly(tokens, k))
        if head == "-":
            if len(args) != 2:
                raise FormulaSyntaxError("'-' takes exactly two arguments", at)
            return args[0] - args[1]
        if not args:
            raise FormulaSyntaxError(f"empty {head!r} application", at)
        acc = args[0]
        for a in args[1:]:
            acc = acc + a if head == "+" else acc * a
        return acc
    if tok == ")":
        raise FormulaSyntaxError("unexpected ')'", at)
    if tok.startswith("x") and tok[1:].isdigit():
        index = int(tok[1:])
        if not 1 <= index <= k:
            raise ArityError(f"variable x{index} out of range for {k} variables")
        return MultiPoly.variable(k, index - 1)
    return MultiPoly.constant(k, rat_from_text(tok))


def _parse_formula(tokens: _Tokens, k: int) -> Formula:
    tok, at = tokens.next()
    if tok == "true":
        return true_formula(k)
    if tok == "false":
        return false_formula(k)
    if tok != "(":
        raise FormulaSyntaxError(f"expected formula, got {tok!r}", at)
    head, hat = tokens.next()
    if head in _ATOM_RELS:
        poly = _parse_poly(tokens, k)
        close, cat = tokens.next()
        if close != ")":
            raise FormulaSyntaxError("expected ')'", cat)
        return atom_formula(poly, _ATOM_RELS[head])
    if head in ("and", "or"):
        args = []
        while True:
            tok2, at2 = tokens.peek()
            if tok2 is None:
                raise FormulaSyntaxError("unexpected end of input", at2)
            if tok2 == ")":
                tokens.next()
                break
            args.append(_parse_formula(tokens, k))
        if not args:
            raise FormulaSyntaxError(f"empty ({head}) is not allowed", hat)
        return Formula(head, k, args=args)
    if head == "not":
        child = _parse_formula(tokens, k)
        close, cat = tokens.next()
        if close != ")":
            raise FormulaSyntaxError("expected ')'", cat)
        return Formula("not", k, args=[child])
    raise FormulaSyntaxError(f"unknown connective {head!r}", hat)


def parse_formula(text: str, variable_count: int) -> Formula:
    """Parse the S-expression formula grammar.

    Polynomials are normalized on the way in: rational coefficients reduced,
    zero terms dropped, and vacuous constant atoms folded to true/false.
    """
    if variable_count < 1:
        raise ArityError("variable_count must be at least 1")
    tokens = _Tokens(text)
    f = _parse_formula(tokens, variable_count)
    tok, at = tokens.peek()
    if tok is not None:
        raise FormulaSyntaxError(f"trailing input {tok!r}", at)
    return f


# ---------------------------------------------------------------------------
# printing

def print_poly(p: MultiPoly) -> str:
    if p.is_zero():
        return "0"
    monomials = []
    for exps, coef in sorted(p.terms.items()):
        factors = []
        if coef != 1 or all(e == 0 for e in exps):
            factors.append(rat_to_text(coef))
        for i, e in enumerate(exps):
            if e == 1:
                factors.append(f"x{i + 1}")
            elif e > 1:
                factors.append(f"(^ x{i + 1} {e})")
        monomials.append(factors[0] if len(factors) == 1 else "(* " + " ".join(factors) + ")")
    if len(monomials) == 1:
        return monomials[0]
    return "(+ " + " ".join(monomials) + ")"


def print_formula(f: Formula) -> str:
    if f.op == "true":
        return "true"
    if f.op == "false":
        return "false"
    if f.op == "atom":
        return f"({f.atom.relation} {print_poly(f.atom.poly)})"
    inner = " ".join(print_formula(a) for a in f.args)
    return f"({f.op} {inner})"


def formula_to_json(f: Formula) -> dict:
    if f.op in ("true", "false"):
        return {"op": f.op}
    if f.op == "atom":
        return {"op": "atom", "rel": f.atom.relation, "poly": f.atom.poly.to_json()}
    return {"op": f.op, "args": [formula_to_json(a) for a in f.args]}


def formula_from_json(data: dict, k: int) -> Formula:
    op = data["op"]
    if op in ("true", "false"):
        return Formula(op, k)
    if op == "atom":
        return atom_formula(MultiPoly.from_json(data["poly"], k), data["rel"])
    return Formula(op, k, args=[formula_from_json(a, k) for a in data["args"]])


# ---------------------------------------------------------------------------
# semantics

def satisfies(f: Formula, point) -> bool:
    """Exact membership of a rational point."""
    if len(point) != f.k:
        raise DimensionMismatch(f"point has {len(point)} coordinates, expected {f.k}")
    if f.op == "true":
        return True
    if f.op == "false":
        return False
    if f.op == "atom":
        return f.atom.holds_for_sign(sign(f.atom.poly.eval(point)))
    if f.op == "and":
        return all(satisfies(a, point) for a in f.args)
    if f.op == "or":
        return any(satisfies(a, point) for a in f.args)
    return not satisfies(f.args[0], point)


def is_p_closed(f: Formula) -> bool:
    """No negation and every atom relation among =0, >=0, <=0."""
    if f.op == "not":
        return False
    if f.op == "atom":
        return f.atom.relation in _CLOSED_RELATIONS
    return all(is_p_closed(a) for a in f.args)


def eval_under_signs(f: Formula, signs: dict) -> bool:
    """Truth of f on the realization of a full sign condition.

    `signs` maps polynomial keys to signs and must cover every atom of f;
    the formula is constant on such a realization.
    """
    if f.op == "true":
        return True
    if f.op == "false":
        return False
    if f.op == "atom":
        return f.atom.holds_for_sign(signs[f.atom.poly.key()])
    if f.op == "and":
        return all(eval_under_signs(a, signs) for a in f.args)
    if f.op == "or":
        return any(eval_under_signs(a, signs) for a in f.args)
    return not eval_under_signs(f.args[0], signs)


def classify_atom_range(relation: str, rng: Interval) -> BoxLabel:
    lo, hi = rng.lo, rng.hi
    if relation == EQ:
        if lo == 0 and hi == 0:
            return BoxLabel.INSIDE
        if lo > 0 or hi < 0:
            return BoxLabel.OUTSIDE
    elif relation == GE:
        if lo >= 0:
            return BoxLabel.INSIDE
        if hi < 0:
            return BoxLabel.OUTSIDE
    elif relation == LE:
        if hi <= 0:
            return BoxLabel.INSIDE
        if lo > 0:
            return BoxLabel.OUTSIDE
    elif relation == GT:
        if lo > 0:
            return BoxLabel.INSIDE
        if hi <= 0:
            return BoxLabel.OUTSIDE
    elif relation == LT:
        if hi < 0:
            return BoxLabel.INSIDE
        if lo >= 0:
            return BoxLabel.OUTSIDE
    return BoxLabel.UNKNOWN


def classify_box(f: Formula, box: list[Interval]) -> BoxLabel:
    """Three-valued box membership proof via interval arithmetic.

    INSIDE and OUTSIDE are sound verdicts for every point of the box; the
    lifting is: not(UNKNOWN)=UNKNOWN, `and` is min, `or` is max over the
    label order OUTSIDE < UNKNOWN < INSIDE.
    """
    if len(box) != f.k:
        raise DimensionMismatch(f"box has {len(box)} axes, expected {f.k}")
    if f.op == "true":
        return BoxLabel.INSIDE
    if f.op == "false":
        return BoxLabel.OUTSIDE
    if f.op == "atom":
        return classify_atom_range(f.atom.relation, f.atom.poly.eval_interval(box))
    if f.op == "and":
        label = BoxLabel.INSIDE
        for a in f.args:
            label = min(label, classify_box(a, box))
            if label == BoxLabel.OUTSIDE:
                break
        return label
    if f.op == "or":
        label = BoxLabel.OUTSIDE
        for a in f.args:
            label = max(label, classify_box(a, box))
            if label == BoxLabel.INSIDE:
                break
        return label
    return BoxLabel(2 - classify_box(f.args[0], box))


# ---------------------------------------------------------------------------
# sign conditions

class SignCondition:
    """A sign vector over an ordered polynomial family.

    ``witness`` optionally records a rational point realizing the condition
    (set by the enumeration in gv_closure); it does not affect equality.
    """

    __slots__ = ("family", "signs", "witness")

    def __init__(self, family: list[MultiPoly], signs, witness=None):
        signs = tuple(int(s) for s in signs)
        if len(family) != len(signs):
            raise DimensionMismatch("family and sign vector lengths differ")
        if any(s not in (-1, 0, 1) for s in signs):
            raise ValueError("signs must be -1, 0 or +1")
        self.family = list(family)
        self.signs = signs
        self.witness = witness

    def __eq__(self, other):
        return (
            isinstance(other, SignCondition)
            and self.signs == other.signs
            and [p.key() for p in self.family] == [p.key() for p in other.family]
        )

    def __hash__(self):
        return hash(self.signs)

    def __repr__(self):
        return f"SignCondition{self.signs}"

    def sign_map(self) -> dict:
        return {p.key(): s for p, s in zip(self.family, self.signs)}


def sign_condition_at(family: list[MultiPoly], point) -> SignCondition:
    return SignCondition(family, [sign(p.eval(point)) for p in family])


_STRICT = {1: GT, -1: LT, 0: EQ}
_WEAK = {1: GE, -1: LE, 0: EQ}


def realize(sigma: SignCondition, z_family: list[MultiPoly] | None = None) -> Formula:
    """Conjunction of Q=0 over z_family with the strict sign atoms of sigma."""
    k = sigma.family[0].k if sigma.family else (z_family[0].k if z_family else 1)
    parts = [atom_formula(q, EQ) for q in (z_family or [])]
    parts += [atom_formula(p, _STRICT[s]) for p, s in zip(sigma.family, sigma.signs)]
    return f_and(parts, k=k)


def weak_relaxation(sigma: SignCondition) -> Formula:
    """The P-closed relaxation: 0 -> =0, +1 -> >=0, -1 -> <=0."""
    k = sigma.family[0].k if sigma.family else 1
    parts = [atom_formula(p, _WEAK[s]) for p, s in zip(sigma.family, sigma.signs)]
    return f_and(parts, k=k)


def box_to_formula(box: list[Interval], k: int) -> Formula:
    """Closed box as a conjunction of linear atoms."""
    parts = []
    for i, iv in enumerate(box):
        x = MultiPoly.variable(k, i)
        parts.append(atom_formula(x - MultiPoly.constant(k, iv.lo), GE))
        parts.append(atom_formula(x - MultiPoly.constant(k, iv.hi), LE))
    return f_and(parts, k=k)
