"""Critical pairs and critical cylinders by string-overlap analysis.

A critical pair is a minimal genuine overlap of two coinitial steps, one of
them equational.  A critical cylinder pairs a step with a relation instance
whose active areas properly interfere: for a named base the step's core and
the base's source window must overlap with neither containing the other,
for an exchange base the core must touch both exchanged factors (anything
less is completable by pure exchange, the trivially-true shape).
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    CellTrace,
    Path,
    Presentation,
    Relation,
    RelationInstance,
    RewriteStep,
    Word,
    instance_sides,
)
from .residuation import (
    PairKey,
    ResidualTable,
    ResiduationError,
    Residuator,
    _pair_key,
)


@dataclass(frozen=True)
class CriticalPair:
    word: Word
    f: RewriteStep  # equational
    g: RewriteStep
    resolved: PairKey | None = None


@dataclass(frozen=True)
class CriticalCylinder:
    f: RewriteStep  # the vertical step
    base: RelationInstance
    flavor: str  # "equational_vertical" | "equational_base"


@dataclass(frozen=True)
class CylinderVerdict:
    residual_targets_equal: str  # "equal" | "exchange_equal" | "unequal"
    top: CellTrace | None
    notes: str = ""
    vertical_residuals: tuple[Path, Path] | None = None
    side_residuals: tuple[Path, Path] | None = None

    @property
    def vertical_residual(self) -> Path | None:
        return self.vertical_residuals[0] if self.vertical_residuals else None


# ---------------------------------------------------------------------------
# overlap geometry


def _placements(u: Word, v: Word) -> list[tuple[int, Word]]:
    """Relative offsets d of factor v against factor u (u starting at 0) such
    that the two genuinely interfere, with the merged word they live on."""
    lu, lv = len(u), len(v)
    out: list[tuple[int, Word]] = []
    if lu == 0 and lv == 0:
        return [(0, ())]
    if lv == 0:
        return [(d, u) for d in range(1, lu)]
    if lu == 0:
        return [(-d, v) for d in range(1, lv)]
    for d in range(-(lv - 1), lu):
        lo, hi = max(0, d), min(lu, d + lv)
        if lo >= hi:
            continue
        if any(u[i] != v[i - d] for i in range(lo, hi)):
            continue
        left = v[: -d] if d < 0 else ()
        right = v[lu - d :] if d + lv > lu else ()
        out.append((d, left + u + right))
    return out


def _proper_overlap(a1: int, b1: int, a2: int, b2: int) -> bool:
    """Intervals intersect and neither contains the other."""
    if min(b1, b2) <= max(a1, a2):
        return False
    return not (a1 <= a2 and b2 <= b1) and not (a2 <= a1 and b1 <= b2)


# ---------------------------------------------------------------------------
# critical pairs


def enumerate_critical_pairs(p: Presentation, table: ResidualTable | None = None) -> list[CriticalPair]:
    """All minimal genuine overlaps (equational step, any step)."""
    out: list[CriticalPair] = []
    seen: set = set()
    gen_index = {g.name: i for i, g in enumerate(p.generators)}
    for e in p.generators:
        if not e.equational:
            continue
        for h in p.generators:
            for d, word in _placements(e.source, h.source):
                e_left, h_left = max(0, -d) if d < 0 else 0, max(0, d)
                f = RewriteStep(word[:e_left], e.name, word[e_left + len(e.source) :])
                g = RewriteStep(word[:h_left], h.name, word[h_left + len(h.source) :])
                if f == g:
                    continue
                key = _pair_key(p, f, g)
                if key in seen:
                    continue
                seen.add(key)
                resolved = key if table is not None and key in table.entries else None
                out.append(CriticalPair(word, f, g, resolved))
    out.sort(
        key=lambda c: (gen_index[c.f.gen], gen_index[c.g.gen], len(c.f.left), len(c.g.left), c.word)
    )
    return out


# ---------------------------------------------------------------------------
# critical cylinders


def _first_steps(p: Presentation, rel: Relation) -> tuple[RewriteStep, ...]:
    heads = []
    for side in (rel.lhs, rel.rhs):
        if side.steps:
            heads.append(side.steps[0])
    return tuple(heads)


def _named_cylinders(p: Presentation, vertical_pool, base_pool) -> list[CriticalCylinder]:
    out = []
    for rel in base_pool:
        window = rel.lhs.source
        for e in vertical_pool:
            if p.mode == "path":
                if rel.lhs.source != e.source:
                    continue
                f = RewriteStep((), e.name, ())
                heads = _first_steps(p, rel)
                if f in heads:
                    continue
                out.append(
                    CriticalCylinder(f, RelationInstance((), (), True, name=rel.name), "")
                )
                continue
            for d, word in _placements(window, e.source):
                w_start = max(0, -d)
                c_start = w_start + d
                if not _proper_overlap(
                    w_start, w_start + len(window), c_start, c_start + len(e.source)
                ):
                    continue
                f = RewriteStep(word[:c_start], e.name, word[c_start + len(e.source) :])
                inst = RelationInstance(word[:w_start], word[w_start + len(window) :], True, name=rel.name)
                lhs, rhs = instance_sides(p, inst)
                if (lhs.steps and f == lhs.steps[0]) or (rhs.steps and f == rhs.steps[0]):
                    continue
                out.append(CriticalCylinder(f, inst, ""))
    return out


def _exchange_cylinders(p: Presentation, vertical_pool, pair_pool) -> list[CriticalCylinder]:
    """Verticals whose core touches both factors of an exchange base."""
    out = []
    for g1 in pair_pool:
        for g2 in pair_pool:
            s1, s2 = p.gen(g1).source, p.gen(g2).source
            for e in vertical_pool:
                core = e.source
                if len(core) < 2:
                    continue
                # first k1 letters of the core close g1's source, last k2 open g2's
                for k1 in range(1, min(len(core), len(s1)) + 1):
                    for k2 in range(1, min(len(core) - k1, len(s2)) + 1):
                        if s1[len(s1) - k1 :] != core[:k1]:
                            continue
                        if s2[:k2] != core[len(core) - k2 :]:
                            continue
                        mid = core[k1 : len(core) - k2]
                        word = s1 + mid + s2
                        f = RewriteStep(s1[: len(s1) - k1], e.name, s2[k2:])
                        inst = RelationInstance((), (), True, exch=(g1, mid, g2))
                        lhs, rhs = instance_sides(p, inst)
                        if f == lhs.steps[0] or f == rhs.steps[0]:
                            continue
                        out.append(CriticalCylinder(f, inst, ""))
    return out


def enumerate_critical_cylinders(
    p: Presentation, table: ResidualTable
) -> list[CriticalCylinder]:
    """All critical (step, relation instance) coincidences, both flavors."""
    eq_gens = [g for g in p.generators if g.equational]
    all_gens = list(p.generators)
    gen_index = {g.name: i for i, g in enumerate(p.generators)}
    out: list[CriticalCylinder] = []

    # flavor 1: equational vertical step against any base
    named1 = _named_cylinders(p, eq_gens, p.relations)
    exch1 = _exchange_cylinders(p, eq_gens, [g.name for g in all_gens])

    # flavor 2: any vertical step against a base with equational sides
    eq_named = [
        r
        for r in p.relations
        if p.is_equational_path(r.lhs) and p.is_equational_path(r.rhs)
    ]
    named2 = _named_cylinders(p, all_gens, eq_named)
    exch2 = _exchange_cylinders(p, all_gens, [g.name for g in eq_gens])

    seen = set()
    for cyl in named1 + exch1 + named2 + exch2:
        key = (cyl.f, cyl.base.left, cyl.base.right, cyl.base.name, cyl.base.exch)
        if key in seen:
            continue
        seen.add(key)
        lhs, rhs = instance_sides(p, cyl.base)
        base_eq = p.is_equational_path(lhs) and p.is_equational_path(rhs)
        flavor = "equational_base" if base_eq else "equational_vertical"
        if flavor == "equational_vertical" and not p.is_equational_step(cyl.f):
            continue
        out.append(CriticalCylinder(cyl.f, cyl.base, flavor))
    out.sort(
        key=lambda c: (
            0 if c.flavor == "equational_vertical" else 1,
            gen_index[c.f.gen],
            c.base.name or "~exch",
            p.fmt_instance(c.base),
            len(c.f.left),
        )
    )
    return out


# ---------------------------------------------------------------------------
# cylinder check


def check_cylinder(
    c: CriticalCylinder,
    p: Presentation,
    table: ResidualTable,
    max_cells: int = 12,
    budget: int = 50_000,
) -> CylinderVerdict:
    """Compare the vertical's residuals along the base's two sides and search
    for the cylinder top connecting the sides' residuals."""
    from . import oracle

    res = Residuator(p, table)
    g1, g2 = instance_sides(p, c.base)
    fpath = Path(g1.source, (c.f,))
    try:
        fg1, g1f = res.pair(fpath, g1)
        fg2, g2f = res.pair(fpath, g2)
    except ResiduationError as exc:
        return CylinderVerdict("unequal", None, notes=f"residuation failed: {exc}")
    if fg1 == fg2:
        verdict = "equal"
    elif oracle.exchange_canonical(fg1, p) == oracle.exchange_canonical(fg2, p):
        verdict = "exchange_equal"
    else:
        verdict = "unequal"
    top = None
    notes = ""
    if p.path_target(g1f) == p.path_target(g2f):
        top = oracle.search_trace(p, g1f, g2f, max_cells=max_cells, budget=budget)
        if top is None:
            notes = "top search exhausted (inconclusive)"
    else:
        notes = "side residuals are not cofinal"
    return CylinderVerdict(verdict, top, notes, (fg1, fg2), (g1f, g2f))


# ---------------------------------------------------------------------------
# trivially completable coincidences (sampled for the weight checks)


def trivial_equational_base_samples(
    p: Presentation, max_mid: int = 2, max_ctx: int = 2
) -> list[tuple[RewriteStep, RelationInstance]]:
    """Sampled (vertical step, equational-sided base) coincidences of the
    trivially completable shape: the vertical does not touch both exchanged
    factors (for exchange bases) or is disjoint/nested (for named bases)."""
    words: list[Word] = [()]
    frontier: list[Word] = [()]
    for _ in range(max_ctx):
        frontier = [w + (o,) for w in frontier for o in p.objects]
        words.extend(frontier)
    mids: list[Word] = [()]
    frontier = [()]
    for _ in range(max_mid):
        frontier = [w + (o,) for w in frontier for o in p.objects]
        mids.extend(frontier)

    eq_gens = [g for g in p.generators if g.equational]
    out: list[tuple[RewriteStep, RelationInstance]] = []
    if p.mode != "monoidal":
        return out

    def verticals(word: Word):
        for g in p.generators:
            k = len(g.source)
            for pos in range(len(word) - k + 1):
                if word[pos : pos + k] == g.source:
                    yield RewriteStep(word[:pos], g.name, word[pos + k :])

    for e1 in eq_gens:
        for e2 in eq_gens:
            for mid in mids:
                span = e1.source + mid + e2.source
                i1 = (0, len(e1.source))
                i2 = (len(e1.source) + len(mid), len(span))
                for x in words:
                    for y in words:
                        word = x + span + y
                        inst = RelationInstance(x, y, True, exch=(e1.name, mid, e2.name))
                        lhs, rhs = instance_sides(p, inst)
                        for f in verticals(word):
                            a, b = len(f.left), len(f.left) + len(p.gen(f.gen).source)
                            c1 = (len(x) + i1[0], len(x) + i1[1])
                            c2 = (len(x) + i2[0], len(x) + i2[1])
                            hits1 = min(b, c1[1]) > max(a, c1[0])
                            hits2 = min(b, c2[1]) > max(a, c2[0])
                            if hits1 and hits2:
                                continue  # critical, not trivial
                            if f in (lhs.steps[0], rhs.steps[0]):
                                continue
                            out.append((f, inst))
    eq_named = [
        r
        for r in p.relations
        if p.is_equational_path(r.lhs) and p.is_equational_path(r.rhs)
    ]
    for rel in eq_named:
        window = rel.lhs.source
        for x in words:
            for y in words:
                word = x + window + y
                inst = RelationInstance(x, y, True, name=rel.name)
                lhs, rhs = instance_sides(p, inst)
                heads = tuple(s.steps[0] for s in (lhs, rhs) if s.steps)
                for f in verticals(word):
                    a, b = len(f.left), len(f.left) + len(p.gen(f.gen).source)
                    if _proper_overlap(a, b, len(x), len(x) + len(window)):
                        continue  # critical, not trivial
                    if f in heads:
                        continue
                    out.append((f, inst))
    return out
