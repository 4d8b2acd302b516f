"""End-to-end Betti number and component pipelines.

betti1_closed: bound (radius doubling unless a box is given), perturb into
general position, cover by contractible pieces, build the intersection
incidence, and read b0/b1 off the delta ranks.

betti1_general: non-closed input is first replaced by a closed bounded set
with the same (b0, b1) via the level-wise construction in gv_closure, with
the ambient ball polynomial joined to the atom family so containment of
realizations is decided exactly by signs.  The schedule base eta is
validated by recomputing at eta/2 and accepting on agreement (all outputs
are integers); P-closed input routes straight to the closed pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .covering import GRID_CELLS, UNVERIFIED, build_cover
from .cubical import stable_betti
from .errors import ConvergenceError, CoverageGap, NotPClosed
from .formulas import (
    GE, LE,
    Formula, atom_formula, box_to_formula, eval_under_signs, f_and, is_p_closed,
    print_formula,
)
from .gv import EpsilonSchedule, enumerate_sign_conditions, gv_replace, star_perturbation
from .mpoly import MultiPoly
from .nerve import betti_from_cover, build_incidence, grid_components
from .rational import Interval, Rational, rat_to_text


@dataclass
class PipelineConfig:
    box: list | None = None  # bounding box; None -> radius doubling
    max_radius: int = 64
    eta: Fraction = Fraction(1, 2)
    max_eta_halvings: int = 3
    max_depth: int | None = None  # incidence grid depth (per-k default)
    oracle_resolution: int | None = None
    backend: str = GRID_CELLS
    delta: Fraction | None = None  # star perturbation size; None -> auto
    sample_resolution: int = 32
    grid_depth: int | None = None  # GRID_CELLS cell layer
    split_depth: int = 12
    piece_resolution: int | None = None
    verify_resolution: int | None = None
    oracle_check: bool = False
    closed_shortcut: bool = True  # route P-closed input straight to Algorithm 3

    def depth_for(self, k: int) -> int:
        if self.max_depth is not None:
            return self.max_depth
        return 7 if k <= 2 else 5

    def oracle_res_for(self, k: int) -> int:
        if self.oracle_resolution is not None:
            return self.oracle_resolution
        return 128 if k <= 2 else 64

    def piece_res_for(self, k: int) -> int:
        if self.piece_resolution is not None:
            return self.piece_resolution
        return 64 if k <= 2 else 32

    def grid_depth_for(self, k: int) -> int:
        if self.grid_depth is not None:
            return self.grid_depth
        return 2 if k <= 2 else 1

    def verify_res_for(self, k: int) -> int:
        if self.verify_resolution is not None:
            return self.verify_resolution
        return 64 if k <= 2 else 16


@dataclass
class BettiReport:
    b0: int
    b1: int
    ranks: dict
    cover_size: int
    warnings: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    oracle: dict | None = None

    def pair(self):
        return (self.b0, self.b1)

    def to_json(self) -> dict:
        out = {
            "b0": self.b0,
            "b1": self.b1,
            "ranks": dict(self.ranks),
            "cover_size": self.cover_size,
            "warnings": list(self.warnings),
            "meta": dict(self.meta),
        }
        if self.oracle is not None:
            out["oracle"] = self.oracle
        return out


def _auto_box(radius: int, k: int) -> list[Interval]:
    return [Interval(-radius, radius)] * k


def _auto_delta(f: Formula, box: list[Interval], base: Fraction = Fraction(1, 16)) -> Fraction:
    """delta small enough that every delta*H_i stays below 1/4 on the box."""
    polys = f.atom_polys()
    if not polys:
        return base
    k = f.k
    d_prime = 1 + max(p.total_degree() for p in polys)
    worst = Fraction(1)
    n = len(polys)
    for j, iv in enumerate(box, start=1):
        worst += n**j * max(abs(iv.lo), abs(iv.hi)) ** d_prime
    return min(base, Fraction(1, 4) / worst)


def betti1_closed(f: Formula, cfg: PipelineConfig | None = None) -> BettiReport:
    """First Betti number of a P-closed set via the contractible-cover nerve."""
    cfg = cfg or PipelineConfig()
    if not is_p_closed(f):
        raise NotPClosed("betti1_closed needs a P-closed formula")
    if cfg.box is not None:
        report = _closed_core(f, list(cfg.box), cfg)
        report.meta["radii"] = None
        return report
    radius = 2
    previous = None
    while radius <= cfg.max_radius:
        report = _closed_core(f, _auto_box(radius, f.k), cfg)
        if previous is not None and previous.pair() == report.pair():
            report.meta["radii"] = [radius // 2, radius]
            return report
        previous = report
        radius *= 2
    raise ConvergenceError(
        f"(b0, b1) did not stabilize under radius doubling up to {cfg.max_radius}",
        partial_report=previous,
    )


def _closed_core(f: Formula, box: list[Interval], cfg: PipelineConfig) -> BettiReport:
    k = f.k
    bounded = f_and([f, box_to_formula(box, k)], k=k)
    delta = cfg.delta if cfg.delta is not None else _auto_delta(bounded, box)
    star = star_perturbation(bounded, delta)
    # the perturbed set bulges at most 1/4 beyond the box
    grid_box = [Interval(iv.lo - Fraction(1, 2), iv.hi + Fraction(1, 2)) for iv in box]
    family = star.atom_polys()
    eps = EpsilonSchedule(2 * len(family), cfg.eta)
    depth = cfg.depth_for(k)
    cover = build_cover(
        star,
        family,
        eps,
        backend=cfg.backend,
        box=grid_box,
        sample_resolution=cfg.sample_resolution,
        piece_resolution=cfg.piece_res_for(k),
        split_depth=cfg.split_depth,
        grid_depth=cfg.grid_depth_for(k),
        verify_resolution=cfg.verify_res_for(k),
        lattice_depth=depth - 1,
    )
    warnings = list(cover.warnings)
    if cover.report is not None and not cover.report.passed:
        raise CoverageGap(
            f"cover verification failed: {len(cover.report.uncovered)} uncovered cell(s)",
            partial_report=cover.report.to_json(),
        )
    unverified = sum(1 for p in cover.pieces if p.certificate == UNVERIFIED)
    if unverified:
        warnings.append(f"{unverified} cover piece(s) lack a contractibility certificate")
    inc = build_incidence(cover, depth)
    nerve = betti_from_cover(inc)
    warnings += [w for w in nerve.warnings if w not in warnings]
    report = BettiReport(
        nerve.b0,
        nerve.b1,
        {"d1": nerve.rank_d1, "d2": nerve.rank_d2},
        len(cover.pieces),
        warnings,
        meta={
            "method": "closed-cover-nerve",
            "backend": cfg.backend,
            "box": [iv.to_json() for iv in box],
            "delta": rat_to_text(delta),
            "eta": rat_to_text(cfg.eta),
            "eps": [rat_to_text(v) for v in eps.values()],
            "incidence_depth": inc.depth,
            "components": {
                "singles": nerve.singles,
                "pairs": nerve.pairs,
                "triples": nerve.triples,
            },
        },
    )
    if cfg.oracle_check:
        reading = stable_betti(bounded, grid_box, cfg.oracle_res_for(k))
        report.oracle = reading.to_json()
        if reading.converged and reading.pair() != report.pair():
            warnings.append(
                f"oracle disagreement: nerve {report.pair()} vs oracle {reading.pair()}"
            )
    return report


def _ball_formula(k: int, radius: int) -> tuple[Formula, MultiPoly]:
    rho = MultiPoly(k, {})
    for i in range(k):
        exps = [0] * k
        exps[i] = 2
        rho = rho + MultiPoly(k, {tuple(exps): Fraction(1)})
    rho = rho - MultiPoly.constant(k, radius * radius)
    return atom_formula(rho, LE), rho


def _gv_closed_replacement(f: Formula, radius: int, eta: Fraction, cfg: PipelineConfig):
    """One Gabrielov-Vorobjov replacement at a fixed ball radius and eta."""
    k = f.k
    ball, rho = _ball_formula(k, radius)
    family = f.atom_polys() + [rho]
    box = _auto_box(radius, k)
    conds = enumerate_sign_conditions(family, ball, cfg.sample_resolution, box)
    sigma = [c for c in conds if eval_under_signs(f, c.sign_map())]
    eps = EpsilonSchedule(2 * len(family), eta)
    xprime = gv_replace(family, sigma, ball, eps, all_conditions=conds)
    meta = {
        "radius": radius,
        "eta": rat_to_text(eta),
        "conditions": len(conds),
        "sigma": len(sigma),
        "family_size": len(family),
    }
    return xprime, box, meta


def betti1_general(f: Formula, cfg: PipelineConfig | None = None) -> BettiReport:
    """First Betti number of an arbitrary quantifier-free formula."""
    cfg = cfg or PipelineConfig()
    if cfg.closed_shortcut and is_p_closed(f):
        report = betti1_closed(f, cfg)
        report.meta["general_route"] = "closed-shortcut"
        return report

    def run_at_radius(radius: int) -> BettiReport:
        eta = cfg.eta
        previous = None
        for _ in range(cfg.max_eta_halvings + 1):
            current = _general_core(f, radius, eta, cfg)
            if previous is not None and previous.pair() == current.pair():
                current.meta["eta_pair"] = [rat_to_text(eta * 2), rat_to_text(eta)]
                return current
            previous = current
            eta = eta / 2
        raise ConvergenceError(
            "(b0, b1) did not stabilize under eta halving",
            partial_report=previous,
        )

    if cfg.box is not None:
        hull = max(max(abs(iv.lo), abs(iv.hi)) for iv in cfg.box)
        radius = 2
        while radius < hull:
            radius *= 2
        report = run_at_radius(radius)
        report.meta["radii"] = None
        return report
    radius = 2
    previous = None
    while radius <= cfg.max_radius:
        report = run_at_radius(radius)
        if previous is not None and previous.pair() == report.pair():
            report.meta["radii"] = [radius // 2, radius]
            return report
        previous = report
        radius *= 2
    raise ConvergenceError(
        f"(b0, b1) did not stabilize under radius doubling up to {cfg.max_radius}",
        partial_report=previous,
    )


def _feature_depth(span: Fraction, eps_min: Fraction, base: int, cap: int = 14) -> int:
    """Incidence depth whose cells resolve the finest replacement features.

    The thinnest corpus-relevant feature of a replacement set is a hole of
    radius ~sqrt(eps_min); covering pieces must be splittable below that
    scale and their lattice-floored overlaps must span several incidence
    cells, which needs cells of about sqrt(eps_min)/16.
    """
    cell_target = _sqrt_lower(eps_min) / 16
    size = span
    depth = 0
    while size > cell_target and depth < cap:
        size /= 2
        depth += 1
    return min(max(base, depth), cap)


def _sqrt_lower(x: Fraction) -> Fraction:
    """A rational lower bound for sqrt(x), x in (0, 1]."""
    lo, hi = Fraction(0), Fraction(1)
    for _ in range(20):
        mid = (lo + hi) / 2
        if mid * mid <= x:
            lo = mid
        else:
            hi = mid
    return lo if lo > 0 else x


def _general_core(f: Formula, radius: int, eta: Fraction, cfg: PipelineConfig) -> BettiReport:
    xprime, box, gv_meta = _gv_closed_replacement(f, radius, eta, cfg)
    t = gv_meta["family_size"]
    eps_min = eta ** (2 * t)
    depth = _feature_depth(Fraction(2 * radius), eps_min, cfg.depth_for(f.k))
    inner_cfg = PipelineConfig(**{**cfg.__dict__, "box": box, "eta": eta, "max_depth": depth})
    report = betti1_closed(xprime, inner_cfg)
    report.meta["general_route"] = "gv-replacement"
    report.meta["gv"] = gv_meta
    report.meta["incidence_depth_auto"] = depth
    report.meta["replacement_formula"] = print_formula(xprime)
    return report


@dataclass
class ComponentsReport:
    count: int
    samples: list  # one exact rational point per component, when found
    witness_boxes: list
    warnings: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    roadmap_count: int | None = None

    def to_json(self) -> dict:
        return {
            "count": self.count,
            "samples": [
                [rat_to_text(c) for c in pt] if pt is not None else None for pt in self.samples
            ],
            "witness_boxes": [
                [iv.to_json() for iv in b] if b is not None else None for b in self.witness_boxes
            ],
            "warnings": list(self.warnings),
            "meta": dict(self.meta),
            "roadmap_count": self.roadmap_count,
        }


def components(f: Formula, cfg: PipelineConfig | None = None) -> ComponentsReport:
    """Connected-component count with exact sample points and witness boxes."""
    cfg = cfg or PipelineConfig()
    k = f.k

    def run(box: list[Interval], radius: int | None) -> ComponentsReport:
        warnings: list[str] = []
        witnesses: list[list[Fraction]] = []
        if is_p_closed(f):
            target = f_and([f, box_to_formula(box, k)], k=k)
            meta_extra = {"route": "direct-closed"}
        else:
            assert radius is not None or cfg.box is not None
            r = radius if radius is not None else int(
                max(max(abs(iv.lo), abs(iv.hi)) for iv in box)
            )
            target, box2, gv_meta = _gv_closed_replacement(f, r, cfg.eta, cfg)
            box = box2
            meta_extra = {"route": "gv-replacement", "gv": gv_meta}
        result = grid_components(target, box, cfg.depth_for(k))
        warnings += result.warnings
        samples = []
        boxes = []
        # prefer exact witnesses that satisfy the original formula
        from .formulas import satisfies

        for comp in result.components:
            found = None
            if comp.witness_point is not None and satisfies(f, comp.witness_point):
                found = comp.witness_point
            else:
                for cell in comp.cells[:4096]:
                    center = comp.grid.leaf_center(cell)
                    if satisfies(f, center):
                        found = center
                        break
            if found is None:
                warnings.append("a component has no exact rational sample point at this depth")
            samples.append(found)
            boxes.append(comp.witness_box)
        report = ComponentsReport(
            len(result.components), samples, boxes, warnings,
            meta={"depth": result.depth, **meta_extra},
        )
        return report

    if cfg.box is not None:
        report = run(list(cfg.box), None)
        report.meta["radii"] = None
    else:
        radius = 2
        previous = None
        report = None
        while radius <= cfg.max_radius:
            report = run(_auto_box(radius, k), radius)
            if previous is not None and previous.count == report.count:
                report.meta["radii"] = [radius // 2, radius]
                break
            previous = report
            radius *= 2
        else:
            raise ConvergenceError(
                "component count did not stabilize under radius doubling",
                partial_report=previous,
            )

    # independent roadmap route for plane algebraic inputs
    if k == 2 and f.op == "atom" and f.atom.relation == "=0":
        try:
            from .roadmap import curve_components

            report.roadmap_count = curve_components(f.atom.poly)
            if report.roadmap_count != report.count:
                report.warnings.append(
                    f"roadmap count {report.roadmap_count} != grid count {report.count}"
                )
        except Exception as exc:  # noqa: BLE001 - cross-check is best-effort
            report.warnings.append(f"roadmap cross-check unavailable: {exc}")
    return report
