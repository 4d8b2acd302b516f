"""Coverings of closed bounded sets by closed contractible pieces.

Pieces come from level-wise sign-condition thickenings or from grid cells;
contractibility is certified by the cubical oracle ((b0,b1,b2) = (1,0,0) at
two consecutive resolutions).  Pieces that fail are split, first along
their connected components, then by overlapping box bisection, until every
piece certifies or the split depth is exhausted (then the piece is kept,
marked unverified, and surfaced as a warning).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from .cubical import cubical_betti, rasterize
from .errors import InputError, ScheduleTooShort
from .formulas import (
    EQ, GE, LE,
    BoxLabel, Formula, SignCondition,
    atom_formula, box_to_formula, classify_box, f_and, formula_from_json, formula_to_json,
)
from .grid import INSIDE, Grid, connected_components
from .gv import EpsilonSchedule, enumerate_sign_conditions, level
from .mpoly import MultiPoly
from .rational import Interval, rat_from_text, rat_to_text

CONVEX_CELL = "CONVEX_CELL"
ORACLE_CHECKED = "ORACLE_CHECKED"
USER_ASSERTED = "USER_ASSERTED"
UNVERIFIED = "UNVERIFIED"

SIGN_THICKENING = "SIGN_THICKENING"
GRID_CELLS = "GRID_CELLS"
USER = "USER"


@dataclass
class CoverSet:
    formula: Formula
    certificate: str
    witness: list | None = None
    oracle_betti: tuple | None = None
    box: list | None = None  # restriction box the piece was certified on

    def to_json(self) -> dict:
        data = {
            "formula": formula_to_json(self.formula),
            "certificate": self.certificate,
            "witness": [rat_to_text(Fraction(w)) for w in self.witness] if self.witness else None,
        }
        if self.oracle_betti is not None:
            data["oracle_betti"] = list(self.oracle_betti)
        return data


@dataclass
class Cover:
    ambient: Formula
    pieces: list[CoverSet]
    box: list  # ambient bounding box
    warnings: list[str] = field(default_factory=list)
    report: "CoverReport | None" = None

    def to_json(self) -> dict:
        data = {
            "ambient": formula_to_json(self.ambient),
            "pieces": [p.to_json() for p in self.pieces],
            "box": [iv.to_json() for iv in self.box],
            "warnings": list(self.warnings),
        }
        if self.report is not None:
            data["report"] = self.report.to_json()
        return data


@dataclass
class CoverReport:
    passed: bool
    resolution: int
    uncovered: list  # cell boxes INSIDE ambient with no INSIDE piece
    leaks: dict  # piece index -> count of cells INSIDE piece but OUTSIDE ambient

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "resolution": self.resolution,
            "uncovered": [[iv.to_json() for iv in box] for box in self.uncovered],
            "leaks": {str(i): n for i, n in self.leaks.items()},
        }


def sigma_minus(sigma: SignCondition, eps: EpsilonSchedule) -> Formula:
    """Zero atoms kept exact, nonzero atoms pulled in by eps_2j (j = level).

    Level-0 conditions have nothing to thicken; they degenerate to the weak
    relaxation, reported through a warning.
    """
    j = level(sigma)
    k = sigma.family[0].k
    parts = []
    if j == 0:
        warnings.warn("sigma_minus on a level-0 condition degenerates to the weak relaxation")
    for p, s in zip(sigma.family, sigma.signs):
        if s == 0:
            parts.append(atom_formula(p, EQ))
        elif s == 1:
            shift = MultiPoly.constant(k, eps.value(2 * j)) if j > 0 else MultiPoly.constant(k, 0)
            parts.append(atom_formula(p - shift, GE))
        else:
            shift = MultiPoly.constant(k, eps.value(2 * j)) if j > 0 else MultiPoly.constant(k, 0)
            parts.append(atom_formula(p + shift, LE))
    return f_and(parts, k=k)


def sigma_minus_plus(sigma: SignCondition, eps: EpsilonSchedule, s_formula: Formula) -> Formula:
    """S with zero atoms relaxed to |P| <= eps_2j-1 and others pulled in by eps_2j."""
    j = level(sigma)
    k = s_formula.k
    if j > 0 and 2 * j > eps.count:
        raise ScheduleTooShort(f"level {j} condition needs eps_{2 * j}")
    parts = [s_formula]
    for p, s in zip(sigma.family, sigma.signs):
        if s == 0:
            e = MultiPoly.constant(k, eps.value(2 * j - 1))
            parts.append(atom_formula(p - e, LE))
            parts.append(atom_formula(p + e, GE))
        elif s == 1:
            shift = MultiPoly.constant(k, eps.value(2 * j)) if j > 0 else MultiPoly.constant(k, 0)
            parts.append(atom_formula(p - shift, GE))
        else:
            shift = MultiPoly.constant(k, eps.value(2 * j)) if j > 0 else MultiPoly.constant(k, 0)
            parts.append(atom_formula(p + shift, LE))
    return f_and(parts, k=k)


def certify_contractible(f: Formula, box: list[Interval], max_resolution: int = 64):
    """Oracle contractibility check: (b0,b1,b2) at stabilized inner/outer.

    Returns ("empty"|"contractible"|"betti", reading) where reading is the
    stabilized (b0,b1,b2), or ("unknown", last readings) without convergence.
    """
    prev = None
    r = 8
    while r <= max_resolution:
        inner = cubical_betti(rasterize(f, box, r, "INNER"))
        outer = cubical_betti(rasterize(f, box, r, "OUTER"))
        agreed = inner if inner == outer else None
        if agreed is not None and prev is not None and agreed == prev:
            if agreed == (0, 0, 0):
                return "empty", agreed
            if agreed == (1, 0, 0):
                return "contractible", agreed
            return "betti", agreed
        prev = agreed
        r *= 2
    return "unknown", (None if prev is None else prev)


def _pad_box(box: list[Interval], pad_frac: Fraction) -> list[Interval]:
    return [Interval(iv.lo - iv.width * pad_frac, iv.hi + iv.width * pad_frac) for iv in box]


def _clip_box(box: list[Interval], outer: list[Interval]) -> list[Interval]:
    return [
        Interval(max(a.lo, b.lo), min(a.hi, b.hi)) for a, b in zip(box, outer)
    ]


class Lattice:
    """Dyadic lattice over the ambient box.

    All piece-restriction boxes are snapped to lattice coordinates so that
    their linear atoms coincide with shared-grid cell boundaries: the
    adaptive incidence grid then never needs to refine along piece edges,
    and piece overlaps are kept at least two units wide.
    """

    def __init__(self, box: list[Interval], depth: int):
        self.box = list(box)
        self.units = [iv.width / (1 << depth) for iv in box]
        self.depth = depth

    def snap(self, axis: int, value: Fraction, direction: str = "nearest") -> Fraction:
        lo = self.box[axis].lo
        u = self.units[axis]
        q = (value - lo) / u
        if direction == "down":
            j = q.numerator // q.denominator
        elif direction == "up":
            j = -((-q.numerator) // q.denominator)
        else:
            j = (2 * q.numerator + q.denominator) // (2 * q.denominator)
        j = max(0, min(1 << self.depth, j))
        return lo + j * u

    def snap_box_out(self, box: list[Interval]) -> list[Interval]:
        return [
            Interval(self.snap(i, iv.lo, "down"), self.snap(i, iv.hi, "up"))
            for i, iv in enumerate(box)
        ]


def _component_boxes(f: Formula, box: list[Interval], depth: int,
                     lattice: "Lattice | None" = None) -> list[list[Interval]]:
    """Bounding boxes (half-cell padded) of grid components of f on box."""
    grid = Grid(box, depth)
    labels = grid.formula_labels(f)
    comps = connected_components(labels, grid.k, grid.n)
    out = []
    for comp in comps:
        cells = [grid.cell_of_flat(idx) for idx in comp["cells"]]
        lows = [min(c[i] for c in cells) for i in range(grid.k)]
        highs = [max(c[i] for c in cells) for i in range(grid.k)]
        padded = []
        for i in range(grid.k):
            pad = box[i].width / (2 * grid.n)
            padded.append(Interval(grid.endpoint(i, lows[i]) - pad, grid.endpoint(i, highs[i] + 1) + pad))
        clipped = _clip_box(padded, box)
        if lattice is not None:
            clipped = lattice.snap_box_out(clipped)
        out.append(clipped)
    return out


def _certify_or_split(
    f: Formula,
    box: list[Interval],
    piece_resolution: int,
    split_depth: int,
    component_depth: int,
    lattice: Lattice,
) -> tuple[list[CoverSet], list[str]]:
    """Certify one candidate piece, splitting as needed."""
    status, reading = certify_contractible(f, box, piece_resolution)
    if status == "empty":
        return [], []
    if status == "contractible":
        return [CoverSet(f, ORACLE_CHECKED, oracle_betti=reading, box=box)], []
    if status == "betti" and reading[0] > 1 and split_depth > 0:
        boxes = _component_boxes(f, box, component_depth, lattice)
        if len(boxes) > 1:
            pieces: list[CoverSet] = []
            notes: list[str] = []
            for sub in boxes:
                g = f_and([f, box_to_formula(sub, f.k)], k=f.k)
                ps, ns = _certify_or_split(g, sub, piece_resolution, split_depth - 1,
                                           component_depth, lattice)
                pieces += ps
                notes += ns
            return pieces, notes
    # overlapping bisection along the widest axis, on lattice coordinates
    widths = [iv.width for iv in box]
    axis = max(range(len(box)), key=lambda i: widths[i])
    iv = box[axis]
    unit = lattice.units[axis]
    margin = max(2 * unit, lattice.snap(axis, iv.lo + iv.width / 16, "up") - iv.lo)
    mid = lattice.snap(axis, iv.mid)
    can_split = (
        split_depth > 0
        and mid - margin > iv.lo + unit
        and mid + margin < iv.hi - unit
    )
    if not can_split:
        return (
            [CoverSet(f, UNVERIFIED, oracle_betti=None if status == "unknown" else reading, box=box)],
            [f"piece left unverified (status {status}, reading {reading})"],
        )
    lo_box = list(box)
    hi_box = list(box)
    lo_box[axis] = Interval(iv.lo, mid + margin)
    hi_box[axis] = Interval(mid - margin, iv.hi)
    pieces = []
    notes = []
    for sub in (lo_box, hi_box):
        g = f_and([f, box_to_formula(sub, f.k)], k=f.k)
        ps, ns = _certify_or_split(g, sub, piece_resolution, split_depth - 1,
                                   component_depth, lattice)
        pieces += ps
        notes += ns
    return pieces, notes


def build_cover(
    s_formula: Formula,
    family: list[MultiPoly],
    eps: EpsilonSchedule,
    backend: str = SIGN_THICKENING,
    box: list[Interval] | None = None,
    sample_resolution: int = 16,
    piece_resolution: int = 64,
    split_depth: int = 8,
    component_depth: int = 5,
    grid_depth: int = 2,
    verify_resolution: int = 32,
    lattice_depth: int | None = None,
    user_pieces_json: dict | None = None,
) -> Cover:
    """Cover a closed bounded set with closed, oracle-contractible pieces."""
    if box is None:
        raise InputError("build_cover needs the bounding box of S")
    k = s_formula.k
    pieces: list[CoverSet] = []
    notes: list[str] = []
    lattice = Lattice(box, lattice_depth if lattice_depth is not None else grid_depth + 5)

    if backend == SIGN_THICKENING:
        conditions = enumerate_sign_conditions(family, s_formula, sample_resolution, box)
        for sigma in conditions:
            candidate = sigma_minus_plus(sigma, eps, s_formula)
            ps, ns = _certify_or_split(candidate, box, piece_resolution, split_depth,
                                       component_depth, lattice)
            for p in ps:
                if p.witness is None:
                    p.witness = sigma.witness
            pieces += ps
            notes += ns
    elif backend == GRID_CELLS:
        grid = Grid(box, grid_depth)
        labels = grid.formula_labels(s_formula)
        pad = Fraction(1, 2)
        for idx, label in enumerate(labels):
            if label == 0:
                continue
            cell = grid.cell_of_flat(idx)
            cell_box = grid.cell_box(cell)
            enlarged = _clip_box(
                [
                    Interval(cb.lo - cb.width * pad, cb.hi + cb.width * pad)
                    for cb in cell_box
                ],
                box,
            )
            box_f = box_to_formula(enlarged, k)
            if classify_box(s_formula, enlarged) == BoxLabel.INSIDE:
                pieces.append(CoverSet(box_f, CONVEX_CELL, box=enlarged,
                                       witness=[iv.mid for iv in enlarged]))
                continue
            g = f_and([s_formula, box_f], k=k)
            ps, ns = _certify_or_split(g, enlarged, piece_resolution, split_depth,
                                       component_depth, lattice)
            pieces += ps
            notes += ns
    elif backend == USER:
        if user_pieces_json is None:
            raise InputError("USER backend needs the cover JSON")
        for item in user_pieces_json["pieces"]:
            wit = item.get("witness")
            pieces.append(
                CoverSet(
                    formula_from_json(item["formula"], k),
                    USER_ASSERTED,
                    witness=[rat_from_text(w) for w in wit] if wit else None,
                )
            )
    else:
        raise InputError(f"unknown covering backend {backend!r}")

    cover = Cover(s_formula, pieces, box, warnings=notes)
    cover.report = verify_cover(cover, verify_resolution)
    return cover


def verify_cover(cover: Cover, resolution: int) -> CoverReport:
    """Grid check of the covering property and per-piece containment in S."""
    depth = max(1, resolution.bit_length() - 1)
    grid = Grid(cover.box, depth)
    ambient = grid.formula_labels(cover.ambient)
    piece_labels = [grid.formula_labels(p.formula) for p in cover.pieces]
    uncovered = []
    leaks: dict[int, int] = {}
    for idx, label in enumerate(ambient):
        if label == INSIDE and not any(pl[idx] == INSIDE for pl in piece_labels):
            uncovered.append(grid.cell_box(grid.cell_of_flat(idx)))
    for pi, pl in enumerate(piece_labels):
        n = sum(1 for idx in range(grid.size) if pl[idx] == INSIDE and ambient[idx] == 0)
        if n:
            leaks[pi] = n
    return CoverReport(not uncovered and not leaks, 1 << depth, uncovered, leaks)


def cover_from_json(data: dict, k: int) -> Cover:
    """Load a USER cover from its JSON schema."""
    ambient = formula_from_json(data["ambient"], k)
    box = [Interval.from_json(iv) for iv in data["box"]]
    cover = build_cover(
        ambient, [], EpsilonSchedule(0, Fraction(1, 2)), backend=USER, box=box,
        user_pieces_json=data,
    )
    return cover
