"""Mayer-Vietoris bottom row: incidence of cover-piece intersections and
the delta ranks giving b0 and b1.

All single, pairwise and triplewise intersections are decomposed on one
shared grid, so locating a component inside a coarser intersection is exact
cell lookup.  Index tuples are kept sorted ascending; the coboundary signs
follow the dropped-position parity, which makes delta2 . delta1 = 0 hold on
the nose (asserted).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .covering import Cover
from .errors import AmbiguousInclusion, ConsistencyError, NegativeBetti
from .formulas import Formula
from .formulas import f_and
from .grid import INSIDE, UNKNOWN, AdaptiveGrid
from .linalg import RatMatrix, rat_rank
from .rational import Interval


@dataclass
class GridComponent:
    cells: list[int]  # leaf indices in the shared grid
    witness_cell: tuple | None  # origin of a proved-inside leaf, when one exists
    witness_box: list | None
    witness_point: list | None
    fragile: bool
    grid: object | None = None


@dataclass
class ComponentsResult:
    components: list[GridComponent]
    depth: int
    warnings: list[str] = field(default_factory=list)

    def __len__(self):
        return len(self.components)


def grid_components(f: Formula, box: list[Interval], max_depth: int) -> ComponentsResult:
    """Connected components of the kept (non-outside) region of f on box.

    The box is subdivided adaptively to max_depth; kept leaves are grouped
    by face adjacency.  Components with no proved-inside leaf are fragile:
    for a closed set they may be grid artifacts of a thin feature.
    Exhausting max_depth with fragile components is reported in warnings,
    not fatal.
    """
    grid = AdaptiveGrid(box, max_depth, [f])
    comps = grid.components_of(grid.combined_labels((0,)))
    out = []
    warn = []
    for comp in comps:
        witness = comp["witness"]
        out.append(
            GridComponent(
                cells=comp["cells"],
                witness_cell=grid.leaves[witness][0] if witness is not None else None,
                witness_box=grid.leaf_box(witness) if witness is not None else None,
                witness_point=grid.leaf_center(witness) if witness is not None else None,
                fragile=comp["fragile"],
                grid=grid,
            )
        )
    if any(c.fragile for c in out):
        warn.append(
            f"{sum(c.fragile for c in out)} component(s) carry no proved-inside cell at depth {max_depth}"
        )
    return ComponentsResult(out, max_depth, warn)


@dataclass
class IncidenceData:
    """Components of all intersections plus the inclusion maps between levels."""

    components: dict  # sorted index tuple -> list of GridComponent
    inclusion: dict  # (tuple, comp_idx, drop_pos) -> parent comp idx
    depth: int
    piece_count: int
    warnings: list[str] = field(default_factory=list)

    def count(self, tup: tuple) -> int:
        return len(self.components.get(tup, []))

    def tuples_of_size(self, size: int) -> list[tuple]:
        return sorted(t for t in self.components if len(t) == size)

    def to_json(self) -> dict:
        singles = [self.count((i,)) for i in range(self.piece_count)]
        pairs = {
            ",".join(map(str, t)): self.count(t) for t in self.tuples_of_size(2)
        }
        triples = {
            ",".join(map(str, t)): self.count(t) for t in self.tuples_of_size(3)
        }
        inclusion = [
            {"from": [list(t), c], "drop": d, "to": [list(t[:d] + t[d + 1 :]), parent]}
            for (t, c, d), parent in sorted(self.inclusion.items())
        ]
        return {
            "singles": singles,
            "pairs": pairs,
            "triples": triples,
            "inclusion": inclusion,
            "depth": self.depth,
            "warnings": list(self.warnings),
        }


def _structure_key(inc: IncidenceData):
    counts = tuple(sorted((t, len(cs)) for t, cs in inc.components.items()))
    incl = tuple(sorted(inc.inclusion.items()))
    return counts, incl


def build_incidence(cover: Cover, max_depth: int, retries: int = 2) -> IncidenceData:
    """Decompose all 1/2/3-wise intersections of the cover on a shared grid.

    Fragile components trigger a retry one depth deeper; if the incidence
    structure agrees at both depths it is accepted (with a warning kept),
    matching the refinement-stability criterion used everywhere else.
    """
    inc = _build_incidence_at(cover, max_depth)
    attempt = 0
    while any("fragile" in w for w in inc.warnings) and attempt < retries:
        deeper = _build_incidence_at(cover, max_depth + attempt + 1)
        if not any("fragile" in w for w in deeper.warnings):
            return deeper
        if _structure_key(deeper) == _structure_key(inc):
            deeper.warnings.append("fragile components stable under refinement; accepted")
            return deeper
        inc = deeper
        attempt += 1
    return inc


def _resolve_fragile(grid: AdaptiveGrid, cover: Cover, tup: tuple, comp: dict,
                     extra_depth: int = 4):
    """Locally refine a fragile component: certify it nonempty or empty.

    Returns ("real", witness_box, witness_point), ("empty", None, None) or
    ("unknown", None, None).
    """
    hull = None
    for idx in comp["cells"]:
        box = grid.leaf_box(idx)
        if hull is None:
            hull = box
        else:
            hull = [a.hull(b) for a, b in zip(hull, box)]
    target = f_and([cover.pieces[i].formula for i in tup], k=cover.ambient.k)
    local = AdaptiveGrid(hull, extra_depth, [target])
    best = None
    any_unknown = False
    for li, labels in enumerate(local.labels):
        if labels[0] == INSIDE:
            best = li
            break
        if labels[0] == UNKNOWN:
            any_unknown = True
    if best is not None:
        return "real", local.leaf_box(best), local.leaf_center(best)
    if not any_unknown:
        return "empty", None, None
    return "unknown", None, None


def _build_incidence_at(cover: Cover, depth: int) -> IncidenceData:
    grid = AdaptiveGrid(cover.box, depth, [p.formula for p in cover.pieces])
    n_pieces = len(cover.pieces)

    components: dict[tuple, list] = {}
    comp_maps: dict[tuple, dict[int, int]] = {}
    kept_maps: dict[tuple, dict[int, int]] = {}
    warnings: list[str] = []

    def decompose(tup: tuple, kept: dict[int, int]) -> bool:
        if not kept:
            return False
        raw = grid.components_of(kept)
        out = []
        for comp in raw:
            fragile = comp["fragile"]
            witness = comp["witness"]
            wbox = grid.leaf_box(witness) if witness is not None else None
            wpoint = grid.leaf_center(witness) if witness is not None else None
            if fragile:
                status, rbox, rpoint = _resolve_fragile(grid, cover, tup, comp)
                if status == "empty":
                    continue  # phantom: proved to contain no points
                if status == "real":
                    fragile = False
                    wbox, wpoint = rbox, rpoint
            out.append(
                GridComponent(
                    cells=comp["cells"],
                    witness_cell=grid.leaves[witness][0] if witness is not None else None,
                    witness_box=wbox,
                    witness_point=wpoint,
                    fragile=fragile,
                    grid=grid,
                )
            )
        if not out:
            return False
        components[tup] = out
        cmap: dict[int, int] = {}
        for cid, comp in enumerate(out):
            for idx in comp.cells:
                cmap[idx] = cid
        comp_maps[tup] = cmap
        fragile = sum(1 for c in out if c.fragile)
        if fragile:
            warnings.append(f"{fragile} fragile component(s) in intersection {tup} at depth {depth}")
        return True

    for i in range(n_pieces):
        kept = grid.kept_map((i,))
        kept_maps[(i,)] = kept
        decompose((i,), kept)

    nonempty_pairs = []
    for i in range(n_pieces):
        if (i,) not in components:
            continue
        for j in range(i + 1, n_pieces):
            if (j,) not in components:
                continue
            base = kept_maps[(i,)]
            other = kept_maps[(j,)]
            if len(other) < len(base):
                base, other = other, base
            kept = grid.kept_map((i, j), within=[x for x in base if x in other])
            if kept:
                kept_maps[(i, j)] = kept
                if decompose((i, j), kept):
                    nonempty_pairs.append((i, j))

    pair_set = set(nonempty_pairs)
    for i, j in nonempty_pairs:
        for l in range(j + 1, n_pieces):
            if (i, l) in pair_set and (j, l) in pair_set:
                base = kept_maps[(i, j)]
                third = kept_maps[(l,)]
                kept = grid.kept_map((i, j, l), within=[x for x in base if x in third])
                if kept:
                    decompose((i, j, l), kept)

    inclusion: dict[tuple, int] = {}
    for tup, comps in components.items():
        if len(tup) == 1:
            continue
        for drop in range(len(tup)):
            parent_tup = tup[:drop] + tup[drop + 1 :]
            parent_map = comp_maps[parent_tup]
            for ci, comp in enumerate(comps):
                parents = {parent_map.get(cell, -1) for cell in comp.cells}
                if len(parents) != 1 or -1 in parents:
                    raise AmbiguousInclusion(
                        f"component {ci} of {tup} maps to parents {parents} in {parent_tup}"
                    )
                inclusion[(tup, ci, drop)] = parents.pop()

    return IncidenceData(components, inclusion, depth, n_pieces, warnings)


def _column_index(inc: IncidenceData, size: int) -> dict:
    """(tuple, comp_idx) -> dense column index over all tuples of that size."""
    out = {}
    col = 0
    for tup in inc.tuples_of_size(size):
        for ci in range(inc.count(tup)):
            out[(tup, ci)] = col
            col += 1
    return out


def delta1(inc: IncidenceData) -> RatMatrix:
    """Rows: pair components; columns: single components.

    Row of a component c of A_(i,j): +1 on the component of A_j containing c
    (dropping position 0 carries sign +1), -1 on that of A_i.
    """
    singles = _column_index(inc, 1)
    pairs = _column_index(inc, 2)
    m = RatMatrix(len(pairs), len(singles))
    for (tup, ci), row in sorted(pairs.items(), key=lambda kv: kv[1]):
        for drop in range(2):
            parent_tup = tup[:drop] + tup[drop + 1 :]
            parent = inc.inclusion[(tup, ci, drop)]
            col = singles[(parent_tup, parent)]
            s = 1 if drop % 2 == 0 else -1
            m.set(row, col, m.at(row, col) + s)
    return m


def delta2(inc: IncidenceData) -> RatMatrix:
    """Rows: triple components; columns: pair components; signs +,-,+."""
    pairs = _column_index(inc, 2)
    triples = _column_index(inc, 3)
    m = RatMatrix(len(triples), len(pairs))
    for (tup, ci), row in sorted(triples.items(), key=lambda kv: kv[1]):
        for drop in range(3):
            parent_tup = tup[:drop] + tup[drop + 1 :]
            parent = inc.inclusion[(tup, ci, drop)]
            col = pairs[(parent_tup, parent)]
            s = 1 if drop % 2 == 0 else -1
            m.set(row, col, m.at(row, col) + s)
    return m


@dataclass
class NerveResult:
    b0: int
    b1: int
    rank_d1: int
    rank_d2: int
    singles: int
    pairs: int
    triples: int
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "b0": self.b0,
            "b1": self.b1,
            "ranks": {"d1": self.rank_d1, "d2": self.rank_d2},
            "components": {"singles": self.singles, "pairs": self.pairs, "triples": self.triples},
            "warnings": list(self.warnings),
        }


def betti_from_cover(inc: IncidenceData) -> NerveResult:
    """b0 = #singles - rank d1;  b1 = (#pairs - rank d2) - rank d1.

    delta1 maps locally constant functions on single pieces to pair
    intersections and delta2 continues to triples; the ranks are taken
    exactly.  d2 . d1 = 0 is asserted.
    """
    d1 = delta1(inc)
    d2 = delta2(inc)
    if d2.rows and d1.rows and not d2.product_is_zero(d1):
        raise ConsistencyError("delta2 . delta1 != 0: incidence data is inconsistent")
    r1 = rat_rank(d1)
    r2 = rat_rank(d2)
    n_singles = d1.cols
    n_pairs = d1.rows
    n_triples = d2.rows
    b0 = n_singles - r1
    b1 = (n_pairs - r2) - r1
    if b0 < 0 or b1 < 0:
        raise NegativeBetti(f"negative betti numbers b0={b0} b1={b1}")
    return NerveResult(b0, b1, r1, r2, n_singles, n_pairs, n_triples, list(inc.warnings))
