"""Cubical homology oracle for closed bounded sets in up to three variables.

A set is rasterized on a dyadic grid into an inner complex (cells proved
inside) and an outer complex (inner plus undecided cells).  Betti numbers
come from boundary ranks with rational coefficients; since every complex
here is a subcomplex of a grid in R^3, all boundary invariant factors are 1
(no torsion is possible for compacta embeddable in R^3), so ranks over GF(2)
agree with ranks over Q and are used for speed.  Tests cross-check against
Bareiss elimination on the signed matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DimensionUnsupported, InputError
from .formulas import Formula, is_p_closed
from .grid import INSIDE, OUTSIDE, Grid
from .linalg import RatMatrix, gf2_rank
from .rational import Interval, rat_to_text

# cell = (origin, dims): origin is a grid vertex, dims the axes along which
# the cell extends one step; len(dims) is the cell dimension


class CubicalComplex:
    def __init__(self, dimension: int, cubes, resolution: int, box: list[Interval] | None = None):
        if dimension > 3:
            raise DimensionUnsupported("cubical complexes support k <= 3 only")
        self.k = dimension
        self.cubes = frozenset(tuple(c) for c in cubes)
        self.resolution = resolution
        self.box = box

    def __len__(self):
        return len(self.cubes)

    def cells_by_dim(self) -> list[list[tuple]]:
        """All faces of all top cubes, grouped by dimension, sorted."""
        found: list[set] = [set() for _ in range(self.k + 1)]
        all_dims = tuple(range(self.k))
        for origin in self.cubes:
            _add_faces(found, origin, all_dims)
        return [sorted(level) for level in found]

    def dump(self) -> str:
        """Plain-text dump: header "k resolution origin step", one cube per line."""
        if self.box is not None:
            origin = " ".join(rat_to_text(iv.lo) for iv in self.box)
            step = " ".join(rat_to_text(iv.width / self.resolution) for iv in self.box)
        else:
            origin = " ".join(["0"] * self.k)
            step = " ".join(["1"] * self.k)
        lines = [f"{self.k} {self.resolution} {origin} {step}"]
        for cube in sorted(self.cubes):
            lines.append(" ".join(str(c) for c in cube))
        return "\n".join(lines) + "\n"


def _add_faces(found: list[set], origin: tuple, dims: tuple) -> None:
    found[len(dims)].add((origin, dims))
    for t, axis in enumerate(dims):
        rest = dims[:t] + dims[t + 1 :]
        lower = (origin, rest)
        upper_origin = tuple(o + (1 if i == axis else 0) for i, o in enumerate(origin))
        if lower not in found[len(rest)]:
            _add_faces(found, origin, rest)
        if (upper_origin, rest) not in found[len(rest)]:
            _add_faces(found, upper_origin, rest)


def _boundary_pairs(cell) -> list[tuple[tuple, int]]:
    """Faces of a cell with their incidence signs."""
    origin, dims = cell
    out = []
    for t, axis in enumerate(dims):
        rest = dims[:t] + dims[t + 1 :]
        s = 1 if t % 2 == 0 else -1
        upper_origin = tuple(o + (1 if i == axis else 0) for i, o in enumerate(origin))
        out.append(((upper_origin, rest), s))
        out.append(((origin, rest), -s))
    return out


def boundary_matrix(cells_low: list, cells_high: list) -> RatMatrix:
    """Signed boundary matrix: rows are (d-1)-cells, columns are d-cells."""
    index = {cell: i for i, cell in enumerate(cells_low)}
    m = RatMatrix(len(cells_low), len(cells_high))
    for j, cell in enumerate(cells_high):
        for face, s in _boundary_pairs(cell):
            i = index[face]
            m.set(i, j, m.at(i, j) + s)
    return m


def _boundary_rank_gf2(cells_low: list, cells_high: list) -> int:
    index = {cell: i for i, cell in enumerate(cells_low)}
    rows = []
    for cell in cells_high:
        mask = 0
        for face, _ in _boundary_pairs(cell):
            mask ^= 1 << index[face]
        rows.append(mask)
    return gf2_rank(rows)


def _skeleton_components(vertices: list, edges: list) -> int:
    parent = {v: v for v in vertices}

    def find(a):
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    count = len(vertices)
    for origin, dims in edges:
        axis = dims[0]
        other = tuple(o + (1 if i == axis else 0) for i, o in enumerate(origin))
        ra, rb = find((origin, ())), find((other, ()))
        if ra != rb:
            parent[ra] = rb
            count -= 1
    return count


def _bounded_complement_components(c: CubicalComplex) -> int:
    """Number of bounded face-connected components of the voxel complement."""
    n = c.resolution
    k = c.k
    occupied = c.cubes
    seen = set()
    components = 0
    # flood the unbounded region first, seeded from all boundary cells
    outside = []
    for cell in _grid_cells(n, k):
        if cell in occupied:
            continue
        if any(x == 0 or x == n - 1 for x in cell):
            if cell not in seen:
                seen.add(cell)
                outside.append(cell)
    _flood(outside, occupied, seen, n, k)
    for cell in _grid_cells(n, k):
        if cell in occupied or cell in seen:
            continue
        seen.add(cell)
        _flood([cell], occupied, seen, n, k)
        components += 1
    return components


def _grid_cells(n: int, k: int):
    if k == 1:
        return ((i,) for i in range(n))
    if k == 2:
        return ((i, j) for i in range(n) for j in range(n))
    return ((i, j, l) for i in range(n) for j in range(n) for l in range(n))


def _flood(queue: list, occupied, seen, n: int, k: int) -> None:
    while queue:
        cell = queue.pop()
        for axis in range(k):
            for d in (-1, 1):
                x = cell[axis] + d
                if not 0 <= x < n:
                    continue
                nb = cell[:axis] + (x,) + cell[axis + 1 :]
                if nb not in occupied and nb not in seen:
                    seen.add(nb)
                    queue.append(nb)


def boundary_ranks(c: CubicalComplex) -> tuple[list[int], list[int]]:
    """Cell counts per dimension and exact boundary ranks over Q.

    rank d1 comes from the 1-skeleton component count.  A nonempty union of
    closed grid cubes in R^k (k <= 3) admits no k-cycles, so rank dk equals
    the number of k-cells; for k = 3 the remaining rank d2 follows from the
    count of bounded complement components (= b2, Alexander duality).  All
    invariant factors of these matrices are 1, so the same ranks hold over
    any coefficient field; tests cross-check against direct elimination.
    """
    levels = c.cells_by_dim()
    counts = [len(level) for level in levels]
    ranks = [0] * (len(levels) + 2)  # ranks[d] = rank of the boundary map on d-cells
    if counts[0]:
        components = _skeleton_components(levels[0], levels[1]) if len(levels) > 1 else counts[0]
        if len(levels) > 1:
            ranks[1] = counts[0] - components
    if c.k >= 2 and len(levels) > 2 and counts[2]:
        if c.k == 2:
            ranks[2] = counts[2]
        else:
            b2 = _bounded_complement_components(c)
            ranks[2] = counts[2] - counts[3] - b2
    if c.k == 3 and len(levels) > 3 and counts[3]:
        ranks[3] = counts[3]
    return counts, ranks


def cubical_betti(c: CubicalComplex) -> tuple[int, int, int]:
    """(b0, b1, b2): b_i = #i-cells - rank(d_i) - rank(d_{i+1}), exact."""
    if not c.cubes:
        return (0, 0, 0)
    counts, ranks = boundary_ranks(c)
    betti = [counts[d] - ranks[d] - ranks[d + 1] for d in range(len(counts))]
    betti += [0, 0, 0]
    return (betti[0], betti[1], betti[2])


def euler_characteristic(c: CubicalComplex) -> int:
    levels = c.cells_by_dim()
    return sum((-1) ** d * len(level) for d, level in enumerate(levels))


def rasterize(f: Formula, box: list[Interval], resolution: int, mode: str) -> CubicalComplex:
    """Inner or outer cube approximation of the set of f on the box grid.

    INNER keeps cells proved inside; OUTER also keeps undecided cells.
    resolution must be a power of two.
    """
    if f.k > 3:
        raise DimensionUnsupported("rasterize supports k <= 3 only")
    if resolution & (resolution - 1) or resolution < 1:
        raise InputError(f"resolution must be a power of two, got {resolution}")
    if mode not in ("INNER", "OUTER"):
        raise InputError(f"mode must be INNER or OUTER, got {mode!r}")
    grid = Grid(box, resolution.bit_length() - 1)
    labels = grid.formula_labels(f)
    keep = (lambda v: v == INSIDE) if mode == "INNER" else (lambda v: v != OUTSIDE)
    cubes = [grid.cell_of_flat(idx) for idx, v in enumerate(labels) if keep(v)]
    return CubicalComplex(f.k, cubes, resolution, box)


@dataclass
class OracleReading:
    b0: int
    b1: int
    converged: bool
    mode: str  # "sandwich" for closed input, "inner" otherwise
    resolutions: list[int] = field(default_factory=list)
    history: list[dict] = field(default_factory=list)

    def pair(self) -> tuple[int, int]:
        return (self.b0, self.b1)

    def to_json(self) -> dict:
        return {
            "b0": self.b0,
            "b1": self.b1,
            "converged": self.converged,
            "mode": self.mode,
            "resolutions": self.resolutions,
            "history": self.history,
        }


def stable_betti(f: Formula, box: list[Interval], max_resolution: int = 128) -> OracleReading:
    """Refine until the reading stabilizes.

    Closed input: accept the first (b0, b1) where the inner and outer
    complexes agree at a resolution and at its double.  Non-closed input has
    no meaningful outer complex (closures differ), so the criterion becomes
    agreement of the inner reading at consecutive doubled resolutions; the
    mode is recorded in the result.
    """
    if f.k > 3:
        raise DimensionUnsupported("stable_betti supports k <= 3 only")
    sandwich = is_p_closed(f)
    history: list[dict] = []
    readings: list[tuple | None] = []
    resolutions: list[int] = []
    r = 8
    while r <= max_resolution:
        inner = cubical_betti(rasterize(f, box, r, "INNER"))[:2]
        if sandwich:
            outer = cubical_betti(rasterize(f, box, r, "OUTER"))[:2]
            agreed = inner if inner == outer else None
            history.append({"resolution": r, "inner": list(inner), "outer": list(outer)})
        else:
            agreed = inner
            history.append({"resolution": r, "inner": list(inner)})
        resolutions.append(r)
        readings.append(agreed)
        if len(readings) >= 2 and readings[-1] is not None and readings[-1] == readings[-2]:
            b0, b1 = readings[-1]
            return OracleReading(b0, b1, True, "sandwich" if sandwich else "inner",
                                 resolutions, history)
        r *= 2
    last = readings[-1] if readings and readings[-1] is not None else (
        tuple(history[-1]["inner"]) if history else (0, 0))
    return OracleReading(last[0], last[1], False, "sandwich" if sandwich else "inner",
                         resolutions, history)
