"""Dyadic grids with exact integer-arithmetic formula classification.

A Grid carves a rational box into 2**depth cells per axis.  Cell labels are
the same three-valued verdicts as ``classify_box`` but computed with pure
integer arithmetic: every axis endpoint is a rational with a common
denominator per axis, so polynomial ranges over a cell block reduce to
integer interval products.  Coarse blocks that classify as INSIDE or OUTSIDE
are filled wholesale; only undecided cells are refined, which keeps the work
proportional to the boundary.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm

from .errors import DimensionMismatch
from .formulas import EQ, GE, GT, LE, LT, BoxLabel, Formula
from .mpoly import MultiPoly
from .rational import Interval

OUTSIDE = int(BoxLabel.OUTSIDE)
UNKNOWN = int(BoxLabel.UNKNOWN)
INSIDE = int(BoxLabel.INSIDE)


class Grid:
    def __init__(self, box: list[Interval], depth: int):
        self.box = list(box)
        self.k = len(box)
        self.depth = depth
        self.n = 1 << depth
        self.size = self.n**self.k
        # endpoint j on axis i is (start[i] + j*step[i]) / den[i]
        self._start: list[int] = []
        self._step: list[int] = []
        self._den: list[int] = []
        for iv in self.box:
            a, b = iv.lo.numerator, iv.lo.denominator
            c, d = iv.hi.numerator, iv.hi.denominator
            self._start.append(a * d * self.n)
            self._step.append(c * b - a * d)
            self._den.append(b * d * self.n)
        self._pows: dict[tuple[int, int], list[int]] = {}
        self._atom_cache: dict[tuple, bytearray] = {}
        self._strides = [self.n ** (self.k - 1 - i) for i in range(self.k)]

    # -- geometry ----------------------------------------------------------
    def endpoint(self, axis: int, j: int) -> Fraction:
        return Fraction(self._start[axis] + j * self._step[axis], self._den[axis])

    def cell_box(self, cell: tuple[int, ...]) -> list[Interval]:
        return [Interval(self.endpoint(i, c), self.endpoint(i, c + 1)) for i, c in enumerate(cell)]

    def cell_center(self, cell: tuple[int, ...]) -> list[Fraction]:
        return [(self.endpoint(i, c) + self.endpoint(i, c + 1)) / 2 for i, c in enumerate(cell)]

    def flat_index(self, cell: tuple[int, ...]) -> int:
        idx = 0
        for c in cell:
            idx = idx * self.n + c
        return idx

    def cell_of_flat(self, idx: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.k):
            out.append(idx % self.n)
            idx //= self.n
        return tuple(reversed(out))

    # -- integer interval evaluation ---------------------------------------
    def _pow_table(self, axis: int, e: int) -> list[int]:
        key = (axis, e)
        table = self._pows.get(key)
        if table is None:
            start, step = self._start[axis], self._step[axis]
            table = [(start + j * step) ** e for j in range(self.n + 1)]
            self._pows[key] = table
        return table

    def _axis_range(self, axis: int, e: int, j_lo: int, j_hi: int) -> tuple[int, int]:
        """Integer interval of (numerator of x_axis)**e over endpoints [j_lo, j_hi]."""
        table = self._pow_table(axis, e)
        p_lo, p_hi = table[j_lo], table[j_hi]
        if e % 2 == 1:
            return p_lo, p_hi
        n_lo = self._start[axis] + j_lo * self._step[axis]
        n_hi = self._start[axis] + j_hi * self._step[axis]
        if n_lo >= 0:
            return p_lo, p_hi
        if n_hi <= 0:
            return p_hi, p_lo
        return 0, max(p_lo, p_hi)

    def _scaled_terms(self, poly: MultiPoly) -> list[tuple[int, tuple[int, ...]]]:
        """Terms with integer coefficients after clearing all denominators.

        The polynomial is scaled by a positive constant, so cell range signs
        are unchanged.
        """
        maxes = poly.max_exponents()
        denom = lcm(*(c.denominator for c in poly.terms.values())) if poly.terms else 1
        out = []
        for exps, coef in sorted(poly.terms.items()):
            c = int(coef * denom)
            for i in range(self.k):
                c *= self._den[i] ** (maxes[i] - exps[i])
            out.append((c, exps))
        return out

    def block_range(self, terms, lows: tuple[int, ...], highs: tuple[int, ...]) -> tuple[int, int]:
        """Scaled-integer interval of a polynomial over an index block."""
        total_lo = 0
        total_hi = 0
        for c, exps in terms:
            lo, hi = c, c
            for axis, e in enumerate(exps):
                if e == 0:
                    continue
                f_lo, f_hi = self._axis_range(axis, e, lows[axis], highs[axis])
                cands = (lo * f_lo, lo * f_hi, hi * f_lo, hi * f_hi)
                lo, hi = min(cands), max(cands)
            total_lo += lo
            total_hi += hi
        return total_lo, total_hi

    # -- labels --------------------------------------------------------------
    def atom_labels(self, poly: MultiPoly, relation: str) -> bytearray:
        """Label array over all cells for one sign atom, row-major order."""
        if poly.k != self.k:
            raise DimensionMismatch("atom dimension does not match grid")
        key = (poly.key(), relation)
        cached = self._atom_cache.get(key)
        if cached is not None:
            return cached
        labels = bytearray([UNKNOWN]) * self.size
        terms = self._scaled_terms(poly)

        def classify(lo: int, hi: int) -> int:
            if relation == EQ:
                if lo == 0 and hi == 0:
                    return INSIDE
                if lo > 0 or hi < 0:
                    return OUTSIDE
            elif relation == GE:
                if lo >= 0:
                    return INSIDE
                if hi < 0:
                    return OUTSIDE
            elif relation == LE:
                if hi <= 0:
                    return INSIDE
                if lo > 0:
                    return OUTSIDE
            elif relation == GT:
                if lo > 0:
                    return INSIDE
                if hi <= 0:
                    return OUTSIDE
            elif relation == LT:
                if hi < 0:
                    return INSIDE
                if lo >= 0:
                    return OUTSIDE
            return UNKNOWN

        def fill(block_lo: tuple[int, ...], width: int, value: int) -> None:
            if value == UNKNOWN:
                return  # array is pre-filled with UNKNOWN
            base = self.flat_index(block_lo)
            if self.k == 1:
                labels[base : base + width] = bytes([value]) * width
                return
            row = bytes([value]) * width
            span = [range(0, width) for _ in range(self.k - 1)]
            offsets = [0]
            for axis in range(self.k - 1):
                offsets = [o + d * self._strides[axis] for o in offsets for d in span[axis]]
            for o in offsets:
                labels[base + o : base + o + width] = row

        def recurse(block_lo: tuple[int, ...], width: int) -> None:
            highs = tuple(c + width for c in block_lo)
            lo, hi = self.block_range(terms, block_lo, highs)
            verdict = classify(lo, hi)
            if verdict != UNKNOWN or width == 1:
                fill(block_lo, width, verdict)
                return
            half = width // 2
            corners = [block_lo]
            for axis in range(self.k):
                corners = [c for base in corners for c in (base, tuple(
                    v + (half if i == axis else 0) for i, v in enumerate(base)))]
            seen = set()
            for corner in corners:
                if corner not in seen:
                    seen.add(corner)
                    recurse(corner, half)

        recurse((0,) * self.k, self.n)
        self._atom_cache[key] = labels
        return labels

    def formula_labels(self, f: Formula) -> bytearray:
        """Three-valued labels of a formula on every cell."""
        if f.k != self.k:
            raise DimensionMismatch("formula dimension does not match grid")
        if f.op == "true":
            return bytearray([INSIDE]) * self.size
        if f.op == "false":
            return bytearray([OUTSIDE]) * self.size
        if f.op == "atom":
            return bytearray(self.atom_labels(f.atom.poly, f.atom.relation))
        if f.op == "not":
            child = self.formula_labels(f.args[0])
            return bytearray(2 - v for v in child)
        parts = [self.formula_labels(a) for a in f.args]
        acc = parts[0]
        combine = min if f.op == "and" else max
        for part in parts[1:]:
            acc = bytearray(map(combine, acc, part))
        return acc


def combine_and(labels: list[bytearray]) -> bytearray:
    acc = bytearray(labels[0])
    for other in labels[1:]:
        acc = bytearray(map(min, acc, other))
    return acc


class AdaptiveGrid:
    """Shared quadtree/octree over a box, refined only where any of the
    given formulas is undecided.

    Leaves carry one label per formula, so intersections of any subset of
    the formulas classify by taking minima without re-evaluation, and
    component containment between intersection levels is exact leaf lookup.
    """

    def __init__(self, box: list[Interval], max_depth: int, formulas: list[Formula]):
        self.box = list(box)
        self.k = len(box)
        self.max_depth = max_depth
        self.n = 1 << max_depth
        self._g = Grid(box, max_depth)
        self.formulas = list(formulas)
        # scaled integer terms per distinct atom polynomial; atoms are
        # shared across piece formulas, so key by object id with a
        # structural fallback
        self._terms_by_id: dict[int, list] = {}
        self._terms_by_key: dict = {}
        for f in self.formulas:
            for atom in f.atoms():
                if id(atom.poly) in self._terms_by_id:
                    continue
                key = atom.poly.key()
                terms = self._terms_by_key.get(key)
                if terms is None:
                    terms = self._g._scaled_terms(atom.poly)
                    self._terms_by_key[key] = terms
                self._terms_by_id[id(atom.poly)] = terms
        self.leaves: list[tuple[tuple[int, ...], int]] = []  # (origin, size)
        self.labels: list[tuple[int, ...]] = []  # per-leaf tuple of labels
        self._build((0,) * self.k, self.n)
        self._adjacency: list[tuple[int, int]] | None = None

    # -- classification ------------------------------------------------------
    def _atom_range(self, atom, lows, highs):
        terms = self._terms_by_id.get(id(atom.poly))
        if terms is None:
            terms = self._g._scaled_terms(atom.poly)
            self._terms_by_id[id(atom.poly)] = terms
        return self._g.block_range(terms, lows, highs)

    def _classify(self, f: Formula, lows, highs, memo: dict) -> int:
        if f.op == "true":
            return INSIDE
        if f.op == "false":
            return OUTSIDE
        if f.op == "atom":
            cached = memo.get(id(f.atom))
            if cached is not None:
                return cached
            lo, hi = self._atom_range(f.atom, lows, highs)
            rel = f.atom.relation
            verdict = UNKNOWN
            if rel == "=0":
                if lo == 0 and hi == 0:
                    verdict = INSIDE
                elif lo > 0 or hi < 0:
                    verdict = OUTSIDE
            elif rel == ">=0":
                if lo >= 0:
                    verdict = INSIDE
                elif hi < 0:
                    verdict = OUTSIDE
            elif rel == "<=0":
                if hi <= 0:
                    verdict = INSIDE
                elif lo > 0:
                    verdict = OUTSIDE
            elif rel == ">0":
                if lo > 0:
                    verdict = INSIDE
                elif hi <= 0:
                    verdict = OUTSIDE
            elif rel == "<0":
                if hi < 0:
                    verdict = INSIDE
                elif lo >= 0:
                    verdict = OUTSIDE
            memo[id(f.atom)] = verdict
            return verdict
        if f.op == "and":
            acc = INSIDE
            for a in f.args:
                acc = min(acc, self._classify(a, lows, highs, memo))
                if acc == OUTSIDE:
                    return OUTSIDE
            return acc
        if f.op == "or":
            acc = OUTSIDE
            for a in f.args:
                acc = max(acc, self._classify(a, lows, highs, memo))
                if acc == INSIDE:
                    return INSIDE
            return acc
        return 2 - self._classify(f.args[0], lows, highs, memo)

    def _build(self, origin: tuple[int, ...], size: int) -> None:
        highs = tuple(o + size for o in origin)
        memo: dict = {}
        labels = tuple(self._classify(f, origin, highs, memo) for f in self.formulas)
        if size == 1 or UNKNOWN not in labels:
            self.leaves.append((origin, size))
            self.labels.append(labels)
            return
        half = size // 2
        corners = [origin]
        for axis in range(self.k):
            corners = [
                c
                for base in corners
                for c in (
                    base,
                    tuple(v + (half if i == axis else 0) for i, v in enumerate(base)),
                )
            ]
        for corner in corners:
            self._build(corner, half)

    # -- geometry ------------------------------------------------------------
    def leaf_box(self, index: int) -> list[Interval]:
        origin, size = self.leaves[index]
        return [
            Interval(self._g.endpoint(i, o), self._g.endpoint(i, o + size))
            for i, o in enumerate(origin)
        ]

    def leaf_center(self, index: int):
        origin, size = self.leaves[index]
        return [
            (self._g.endpoint(i, o) + self._g.endpoint(i, o + size)) / 2
            for i, o in enumerate(origin)
        ]

    def adjacency(self) -> list[tuple[int, int]]:
        """Pairs of leaf indices sharing a (k-1)-dimensional face."""
        if self._adjacency is not None:
            return self._adjacency
        pairs: list[tuple[int, int]] = []
        for axis in range(self.k):
            by_lo: dict[int, list[int]] = {}
            for idx, (origin, size) in enumerate(self.leaves):
                by_lo.setdefault(origin[axis], []).append(idx)
            for idx, (origin, size) in enumerate(self.leaves):
                face = origin[axis] + size
                for jdx in by_lo.get(face, ()):  # leaves starting where this one ends
                    o2, s2 = self.leaves[jdx]
                    ok = True
                    for i in range(self.k):
                        if i == axis:
                            continue
                        if not (origin[i] < o2[i] + s2 and o2[i] < origin[i] + size):
                            ok = False
                            break
                    if ok:
                        pairs.append((idx, jdx))
        self._adjacency = pairs
        return pairs

    def combined_labels(self, formula_indices: tuple[int, ...]) -> list[int]:
        """min over the chosen formulas, per leaf (intersection classification)."""
        out = []
        for labels in self.labels:
            v = INSIDE
            for fi in formula_indices:
                if labels[fi] < v:
                    v = labels[fi]
                    if v == OUTSIDE:
                        break
            out.append(v)
        return out

    def kept_map(self, formula_indices: tuple[int, ...], within=None) -> dict[int, int]:
        """leaf index -> intersection label, restricted to kept leaves.

        `within` optionally restricts the scan to a candidate leaf set
        (e.g. the kept set of a sub-tuple)."""
        out: dict[int, int] = {}
        labels = self.labels
        if within is None:
            within = range(len(self.leaves))
        for idx in within:
            row = labels[idx]
            v = INSIDE
            for fi in formula_indices:
                if row[fi] < v:
                    v = row[fi]
                    if v == OUTSIDE:
                        break
            if v != OUTSIDE:
                out[idx] = v
        return out

    def neighbor_lists(self) -> dict[int, list[int]]:
        if getattr(self, "_neighbors", None) is None:
            nb: dict[int, list[int]] = {}
            for a, b in self.adjacency():
                nb.setdefault(a, []).append(b)
                nb.setdefault(b, []).append(a)
            self._neighbors = nb
        return self._neighbors

    def components_of(self, leaf_labels) -> list[dict]:
        """Connected components of kept (non-OUTSIDE) leaves by face adjacency.

        leaf_labels may be a full list or a kept-leaf dict from kept_map.
        """
        if not isinstance(leaf_labels, dict):
            leaf_labels = {
                i: v for i, v in enumerate(leaf_labels) if v != OUTSIDE
            }
        nb = self.neighbor_lists()
        seen: set[int] = set()
        comps: list[dict] = []
        for start in sorted(leaf_labels):
            if start in seen:
                continue
            seen.add(start)
            stack = [start]
            cells = []
            witness = None
            while stack:
                idx = stack.pop()
                cells.append(idx)
                if witness is None and leaf_labels[idx] == INSIDE:
                    witness = idx
                for j in nb.get(idx, ()):  
                    if j in leaf_labels and j not in seen:
                        seen.add(j)
                        stack.append(j)
            cells.sort()
            comps.append({"cells": cells, "witness": witness, "fragile": witness is None})
        comps.sort(key=lambda c: c["cells"][0])
        return comps


def grid_adjacency(k: int, n: int):
    """Flat-index offsets of the 2k face neighbors (with bounds handled by caller)."""
    strides = [n ** (k - 1 - i) for i in range(k)]
    return strides


def connected_components(labels: bytearray, k: int, n: int) -> list[dict]:
    """Face-adjacency components of the kept (non-OUTSIDE) cells.

    Each component reports its cells, one INSIDE witness cell when available
    (else it is fragile), and the count of cells.
    """
    size = n**k
    comp_of = [-1] * size
    comps: list[dict] = []
    strides = [n ** (k - 1 - i) for i in range(k)]
    for start in range(size):
        if labels[start] == OUTSIDE or comp_of[start] != -1:
            continue
        cid = len(comps)
        queue = [start]
        comp_of[start] = cid
        cells = []
        witness = None
        while queue:
            idx = queue.pop()
            cells.append(idx)
            if witness is None and labels[idx] == INSIDE:
                witness = idx
            rem = idx
            coords = []
            for s in strides:
                coords.append(rem // s)
                rem %= s
            for axis, s in enumerate(strides):
                c = coords[axis]
                if c > 0:
                    nb = idx - s
                    if labels[nb] != OUTSIDE and comp_of[nb] == -1:
                        comp_of[nb] = cid
                        queue.append(nb)
                if c < n - 1:
                    nb = idx + s
                    if labels[nb] != OUTSIDE and comp_of[nb] == -1:
                        comp_of[nb] = cid
                        queue.append(nb)
        comps.append({"cells": cells, "witness": witness, "fragile": witness is None})
    return comps


def component_map(comps: list[dict], size: int) -> list[int]:
    out = [-1] * size
    for cid, comp in enumerate(comps):
        for idx in comp["cells"]:
            out[idx] = cid
    return out
