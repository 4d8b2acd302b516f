"""Closed-bounded replacement and general-position perturbation.

Infinitesimals are realized as a geometric schedule of rationals
eps_i = eta**(2t+1-i), so eps_1 < ... < eps_2t < 1 with constant ratio
1/eta.  Downstream callers validate a choice of eta by recomputing at
eta/2 and accepting on agreement (all outputs are integers).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import DimensionMismatch, NotInSet, NotPClosed, ScheduleTooShort, UnboundedSet
from .formulas import (
    EQ, GE, GT, LE, LT,
    Formula, SignCondition,
    atom_formula, f_and, f_or, is_p_closed, satisfies, sign_condition_at,
)
from .mpoly import MultiPoly
from .rational import Interval, Rational, rat_from_text, rat_to_text


@dataclass(frozen=True)
class EpsilonSchedule:
    """eps_i = base**(2t+1-i) for i = 1..count, count = 2t."""

    count: int
    base: Fraction

    def __post_init__(self):
        if self.count < 0 or self.count % 2 != 0:
            raise ScheduleTooShort(f"schedule length must be even and nonnegative, got {self.count}")
        if not 0 < self.base < 1:
            raise ValueError(f"schedule base must be in (0,1), got {self.base}")

    def value(self, i: int) -> Fraction:
        if not 1 <= i <= self.count:
            raise ScheduleTooShort(f"eps_{i} requested from a schedule of length {self.count}")
        return self.base ** (self.count + 1 - i)

    def values(self) -> list[Fraction]:
        return [self.value(i) for i in range(1, self.count + 1)]

    def halved(self) -> "EpsilonSchedule":
        return EpsilonSchedule(self.count, self.base / 2)

    def to_json(self) -> dict:
        return {"base": rat_to_text(self.base), "count": self.count}

    @staticmethod
    def from_json(data: dict) -> "EpsilonSchedule":
        return EpsilonSchedule(int(data["count"]), rat_from_text(data["base"]))


def level(sigma: SignCondition) -> int:
    return sum(1 for s in sigma.signs if s == 0)


@dataclass(frozen=True)
class LeveledSign:
    sign_condition: SignCondition
    level: int

    @staticmethod
    def of(sigma: SignCondition) -> "LeveledSign":
        return LeveledSign(sigma, level(sigma))


def _band_atoms(p: MultiPoly, eps: Fraction, strict: bool) -> list[Formula]:
    """-eps (<|<=) P (<|<=) eps as two atoms."""
    e = MultiPoly.constant(p.k, eps)
    if strict:
        return [atom_formula(p - e, LT), atom_formula(p + e, GT)]
    return [atom_formula(p - e, LE), atom_formula(p + e, GE)]


def sigma_plus_closed(sigma: SignCondition, eps: EpsilonSchedule, s_formula: Formula) -> Formula:
    """S intersected with |P| <= eps_2m on zeros and weak atoms elsewhere."""
    m = level(sigma)
    if 2 * m > eps.count:
        raise ScheduleTooShort(f"level {m} condition needs eps_{2 * m}")
    parts = [s_formula]
    for p, s in zip(sigma.family, sigma.signs):
        if s == 0:
            parts += _band_atoms(p, eps.value(2 * m), strict=False)
        elif s == 1:
            parts.append(atom_formula(p, GE))
        else:
            parts.append(atom_formula(p, LE))
    return f_and(parts, k=s_formula.k)


def sigma_plus_open(sigma: SignCondition, eps: EpsilonSchedule, s_formula: Formula) -> Formula:
    """S intersected with |P| < eps_2m-1 on zeros and strict atoms elsewhere."""
    m = level(sigma)
    if m > 0 and 2 * m - 1 > eps.count:
        raise ScheduleTooShort(f"level {m} condition needs eps_{2 * m - 1}")
    parts = [s_formula]
    for p, s in zip(sigma.family, sigma.signs):
        if s == 0:
            parts += _band_atoms(p, eps.value(2 * m - 1), strict=True)
        elif s == 1:
            parts.append(atom_formula(p, GT))
        else:
            parts.append(atom_formula(p, LT))
    return f_and(parts, k=s_formula.k)


def _open_complement(sigma: SignCondition, eps: EpsilonSchedule, k: int) -> Formula:
    """Closed complement of the open part of sigma_plus_open.

    Exact: not(-e < P < e and Q > 0 ...) = P >= e or P <= -e or Q <= 0 ...
    """
    m = level(sigma)
    parts = []
    for p, s in zip(sigma.family, sigma.signs):
        if s == 0:
            e = MultiPoly.constant(p.k, eps.value(2 * m - 1))
            parts.append(atom_formula(p - e, GE))
            parts.append(atom_formula(p + e, LE))
        elif s == 1:
            parts.append(atom_formula(p, LE))
        else:
            parts.append(atom_formula(p, GE))
    return f_or(parts, k=k)


def enumerate_sign_conditions(
    family: list[MultiPoly],
    s_formula: Formula,
    resolution: int,
    box: list[Interval] | None = None,
) -> list[SignCondition]:
    """Sign conditions realized at grid sample points of S.

    Samples the (resolution+1)**k grid nodes of the box.  Knowingly
    incomplete: conditions realized only away from every node are missed,
    but every returned condition carries a witness point, so no false
    positives.  Results are sorted by sign vector for determinism.
    """
    if box is None:
        raise UnboundedSet("enumerate_sign_conditions needs a bounding box for S")
    if len(box) != s_formula.k:
        raise DimensionMismatch("box dimension does not match the formula")
    k = s_formula.k
    nodes_per_axis = [
        [iv.lo + Fraction(j, resolution) * iv.width for j in range(resolution + 1)] for iv in box
    ]

    found: dict[tuple, SignCondition] = {}

    def walk(axis: int, prefix: list):
        if axis == k:
            if satisfies(s_formula, prefix):
                sigma = sign_condition_at(family, prefix)
                if sigma.signs not in found:
                    sigma.witness = list(prefix)
                    found[sigma.signs] = sigma
            return
        for v in nodes_per_axis[axis]:
            walk(axis + 1, prefix + [v])

    walk(0, [])
    return [found[s] for s in sorted(found)]


def gv_replace(
    family: list[MultiPoly],
    Sigma: list[SignCondition],
    s_formula: Formula,
    eps: EpsilonSchedule,
    all_conditions: list[SignCondition] | None = None,
    resolution: int = 16,
    box: list[Interval] | None = None,
) -> Formula:
    """Closed-bounded replacement with the same (b0, b1) as the union of Sigma.

    Iterates levels m = 0..t, adding the closed thickenings of Sigma's
    level-m conditions and then intersecting with the exact closed
    complement of every other realizable level-m condition's open
    thickening.  The original strict description is dropped: each of its
    sign-condition pieces is contained in the closed thickening added at
    that piece's level, and subtractions at earlier levels are re-applied
    afterwards, so the resulting set is unchanged and the output formula
    contains closed atoms only.
    """
    t = len(family)
    if eps.count < 2 * t:
        raise ScheduleTooShort(f"family of {t} polynomials needs a schedule of length {2 * t}")
    if all_conditions is None:
        all_conditions = enumerate_sign_conditions(family, s_formula, resolution, box)
    for sigma in Sigma:
        witness = getattr(sigma, "witness", None)
        if witness is not None and not satisfies(s_formula, witness):
            raise NotInSet(f"witness of {sigma} violates the ambient set")

    sigma_keys = {sig.signs for sig in Sigma}
    result = Formula("false", s_formula.k)
    for m in range(t + 1):
        adds = [sigma_plus_closed(s, eps, s_formula) for s in Sigma if level(s) == m]
        result = f_or([result] + adds, k=s_formula.k)
        cuts = [
            _open_complement(s, eps, s_formula.k)
            for s in all_conditions
            if level(s) == m and s.signs not in sigma_keys
        ]
        result = f_and([result] + cuts, k=s_formula.k)
    return result


def star_perturbation(f: Formula, delta: Rational) -> Formula:
    """Inflate a P-closed formula into general position.

    Each distinct atom polynomial P_i (1-based index i in first-appearance
    order) is shifted by delta * H_i with
    H_i = 1 + sum_j i**j * X_j**d', d' = 1 + max total degree:
    P_i >= 0 becomes P_i + delta*H_i >= 0, P_i <= 0 becomes
    P_i - delta*H_i <= 0, and P_i = 0 becomes the conjunction of the two.
    """
    if not is_p_closed(f):
        raise NotPClosed("star_perturbation needs a P-closed formula")
    delta = Fraction(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    polys = f.atom_polys()
    if not polys:
        return f
    k = f.k
    d_prime = 1 + max(p.total_degree() for p in polys)
    index = {p.key(): i + 1 for i, p in enumerate(polys)}

    def h_poly(i: int) -> MultiPoly:
        h = MultiPoly.constant(k, 1)
        for j in range(1, k + 1):
            exps = [0] * k
            exps[j - 1] = d_prime
            h = h + MultiPoly(k, {tuple(exps): Fraction(i**j)})
        return h

    def rewrite(node: Formula) -> Formula:
        if node.op in ("true", "false"):
            return node
        if node.op == "atom":
            p = node.atom.poly
            shift = delta * h_poly(index[p.key()])
            if node.atom.relation == GE:
                return atom_formula(p + shift, GE)
            if node.atom.relation == LE:
                return atom_formula(p - shift, LE)
            return f_and(
                [atom_formula(p - shift, LE), atom_formula(p + shift, GE)], k=k
            )
        return Formula(node.op, k, args=[rewrite(a) for a in node.args])

    return rewrite(f)
