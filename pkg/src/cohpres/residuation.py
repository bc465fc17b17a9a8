"""Residual extraction and computation.

The residual g/f says what remains of a rewrite g after a coinitial
equational rewrite f has been performed.  Local residuals of overlapping
steps come from a table extracted out of the declared relations; disjoint
steps commute through exchange; shared outer context peels off.  Path-level
residuals are computed by the convergent zig-zag strategy (recursing through
the pasting laws with memoization), and each computation can be replayed
into an explicit 2-cell witness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import (
    CellTrace,
    CohpresError,
    Path,
    Presentation,
    RelationInstance,
    RewriteStep,
    Word,
    compose,
    single_cell_trace,
    subpath,
    tensor_ctx,
    trace_concat,
    trace_whisker,
    untensor_ctx,
)

PairKey = tuple[Word, tuple[tuple[str, int], tuple[str, int]]]


class ResiduationError(CohpresError):
    pass


@dataclass(frozen=True)
class TableEntry:
    """A residuation tile in minimal contexts.

    ``first`` is the equational step of the tile; the mediating relation's
    ``forward`` side starts with ``first`` when ``lhs_is_first`` holds.
    """

    first: RewriteStep
    second: RewriteStep
    second_after_first: Path
    first_after_second: Path
    relation: str
    lhs_is_first: bool
    decl_left: Word = ()
    decl_right: Word = ()


@dataclass
class ResidualTable:
    entries: dict[PairKey, TableEntry] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)
    conflicts: list[str] = field(default_factory=list)


def _pair_key(p: Presentation, s1: RewriteStep, s2: RewriteStep) -> PairKey:
    word = p.step_source(s1)
    items = sorted([(s1.gen, len(s1.left)), (s2.gen, len(s2.left))])
    return (word, (items[0], items[1]))


def core_interval(p: Presentation, s: RewriteStep) -> tuple[int, int]:
    """Half-open position interval [start, end) of the step's active factor."""
    start = len(s.left)
    return start, start + len(p.gen(s.gen).source)


def steps_disjoint(p: Presentation, f: RewriteStep, g: RewriteStep) -> bool:
    """Whether two coinitial steps act on independent parts of the word.

    A step with empty source sits at a gap; it is disjoint from another step
    unless the gap falls strictly inside that step's active interval.
    """
    af, bf = core_interval(p, f)
    ag, bg = core_interval(p, g)
    if af == bf and ag == bg:
        return af != ag
    if af == bf:
        return af <= ag or af >= bg
    if ag == bg:
        return ag <= af or ag >= bf
    return bf <= ag or bg <= af


def retype_step(p: Presentation, s: RewriteStep, done: RewriteStep) -> RewriteStep:
    """Adjust a step after a disjoint step ``done`` has been applied first."""
    ad, bd = core_interval(p, done)
    a_s, b_s = core_interval(p, s)
    tgt = p.gen(done.gen).target
    if bd <= a_s:
        new_left = s.left[:ad] + tgt + s.left[bd:]
        return RewriteStep(new_left, s.gen, s.right)
    rel = ad - b_s
    new_right = s.right[:rel] + tgt + s.right[rel + (bd - ad) :]
    return RewriteStep(s.left, s.gen, new_right)


def exchange_instance(
    p: Presentation, first_applied: RewriteStep, second: RewriteStep
) -> RelationInstance:
    """The exchange cell whose from-side applies ``first_applied`` and then
    the retyped ``second`` (the two steps must be disjoint)."""
    a1, b1 = core_interval(p, first_applied)
    a2, b2 = core_interval(p, second)
    word = p.step_source(first_applied)
    if (a1, b1) <= (a2, b2):
        left_step, right_step, fwd = first_applied, second, True
        la, lb, rb = a1, b1, b2
        ra = a2
    else:
        left_step, right_step, fwd = second, first_applied, False
        la, lb, rb = a2, b2, b1
        ra = a1
    return RelationInstance(
        left=word[:la],
        right=word[rb:],
        forward=fwd,
        exch=(left_step.gen, word[lb:ra], right_step.gen),
    )


# ---------------------------------------------------------------------------
# table derivation


def derive_residual_table(p: Presentation) -> ResidualTable:
    """Extract residuation tiles from the declared relations.

    A relation is a tile when one side factors as an equational step followed
    by any path and the other as a different coinitial step followed by an
    equational path, the two head steps genuinely overlapping.
    """
    table = ResidualTable()
    for rel in p.relations:
        found = False
        near_miss = False
        for side_f, side_g, lhs_is_first in (
            (rel.lhs, rel.rhs, True),
            (rel.rhs, rel.lhs, False),
        ):
            if not side_f.steps or not side_g.steps:
                continue
            f0 = side_f.steps[0]
            if not p.is_equational_step(f0):
                continue
            g0 = side_g.steps[0]
            if g0 == f0:
                continue
            near_miss = True
            r_f = subpath(side_f, 1, len(side_f.steps), p)  # g0/f0 candidate
            r_g = subpath(side_g, 1, len(side_g.steps), p)  # f0/g0 candidate
            if not p.is_equational_path(r_g):
                continue
            if steps_disjoint(p, f0, g0):
                continue
            nl = min(len(f0.left), len(g0.left))
            nr = min(len(f0.right), len(g0.right))
            zl, zr = f0.left[:nl], f0.right[len(f0.right) - nr :] if nr else ()
            f0m = RewriteStep(f0.left[nl:], f0.gen, f0.right[: len(f0.right) - nr])
            g0m = RewriteStep(g0.left[nl:], g0.gen, g0.right[: len(g0.right) - nr])
            r_fm = untensor_ctx(p, zl, r_f, zr)
            r_gm = untensor_ctx(p, zl, r_g, zr)
            if r_fm is None or r_gm is None:
                table.diagnostics.append(
                    f"relation '{rel.name}': residual tails do not live in the overlap context"
                )
                continue
            entry = TableEntry(
                first=f0m,
                second=g0m,
                second_after_first=r_fm,
                first_after_second=r_gm,
                relation=rel.name,
                lhs_is_first=lhs_is_first,
                decl_left=zl,
                decl_right=zr,
            )
            key = _pair_key(p, f0m, g0m)
            prev = table.entries.get(key)
            if prev is None:
                table.entries[key] = entry
                found = True
            elif (
                prev.second_after_first == entry.second_after_first
                and prev.first_after_second == entry.first_after_second
                and {prev.first, prev.second} == {entry.first, entry.second}
            ):
                found = True
                if prev.relation != rel.name:
                    table.diagnostics.append(
                        f"relation '{rel.name}': duplicate tile for pair already "
                        f"resolved by '{prev.relation}' (keeping the first)"
                    )
            else:
                msg = (
                    f"conflicting tiles for pair ({p.fmt_step(f0m)}, {p.fmt_step(g0m)}): "
                    f"'{prev.relation}' vs '{rel.name}' (keeping the first)"
                )
                table.conflicts.append(msg)
                table.diagnostics.append(msg)
        if near_miss and not found:
            table.diagnostics.append(
                f"relation '{rel.name}': has an equational head but is not a residuation tile"
            )
    return table


# ---------------------------------------------------------------------------
# step residuals


def _strip_common(p: Presentation, f: RewriteStep, g: RewriteStep):
    nl = min(len(f.left), len(g.left))
    nr = min(len(f.right), len(g.right))
    zl = f.left[:nl]
    zr = f.right[len(f.right) - nr :] if nr else ()
    fm = RewriteStep(f.left[nl:], f.gen, f.right[: len(f.right) - nr])
    gm = RewriteStep(g.left[nl:], g.gen, g.right[: len(g.right) - nr])
    return zl, zr, fm, gm


def _step_pair(p: Presentation, table: ResidualTable, f: RewriteStep, g: RewriteStep):
    """(g/f, f/g, tile) for coinitial steps, at least one equational.

    tile is one of ("equal",), ("exchange", instance) or
    ("table", entry, zl, zr, f_is_first) and is used to emit witnesses.
    """
    if p.step_source(f) != p.step_source(g):
        raise ResiduationError(
            f"steps {p.fmt_step(f)} and {p.fmt_step(g)} are not coinitial"
        )
    if not (p.is_equational_step(f) or p.is_equational_step(g)):
        raise ResiduationError(
            f"residual of ({p.fmt_step(g)}, {p.fmt_step(f)}) undefined: neither is equational"
        )
    if f == g:
        t = p.step_target(f)
        return Path(t, ()), Path(t, ()), ("equal",)
    if steps_disjoint(p, f, g):
        g_after = Path(p.step_target(f), (retype_step(p, g, f),))
        f_after = Path(p.step_target(g), (retype_step(p, f, g),))
        return g_after, f_after, ("exchange", exchange_instance(p, f, g))
    zl, zr, fm, gm = _strip_common(p, f, g)
    key = _pair_key(p, fm, gm)
    entry = table.entries.get(key)
    if entry is None:
        raise ResiduationError(
            f"no residuation tile for the overlapping pair "
            f"({p.fmt_step(f)}, {p.fmt_step(g)}) on {p.fmt_word(p.step_source(f))}"
        )
    if (fm, gm) == (entry.first, entry.second):
        g_res, f_res, f_is_first = entry.second_after_first, entry.first_after_second, True
    elif (gm, fm) == (entry.first, entry.second):
        g_res, f_res, f_is_first = entry.first_after_second, entry.second_after_first, False
    else:
        raise ResiduationError(
            f"tile mismatch for pair ({p.fmt_step(f)}, {p.fmt_step(g)})"
        )
    return (
        tensor_ctx(p, zl, g_res, zr),
        tensor_ctx(p, zl, f_res, zr),
        ("table", entry, zl, zr, f_is_first),
    )


def step_residual(
    f: RewriteStep, g: RewriteStep, table: ResidualTable, p: Presentation
) -> tuple[Path, Path]:
    """(g/f, f/g) for coinitial steps, at least one of them equational."""
    gf, fg, _ = _step_pair(p, table, f, g)
    return gf, fg


# ---------------------------------------------------------------------------
# path residuals


class Residuator:
    """Memoizing implementation of the zig-zag residuation strategy."""

    def __init__(self, p: Presentation, table: ResidualTable, budget: int = 200_000):
        self.p = p
        self.table = table
        self.budget = budget
        self._memo: dict = {}
        self._wmemo: dict = {}
        self._work = 0

    def _tick(self) -> None:
        self._work += 1
        if self._work > self.budget:
            raise ResiduationError("residuation budget exhausted (nontermination suspected)")

    def _check(self, g: Path, f: Path) -> None:
        if g.source != f.source:
            raise ResiduationError(
                f"paths {self.p.fmt_path(g)} and {self.p.fmt_path(f)} are not coinitial"
            )
        if not (self.p.is_equational_path(f) or self.p.is_equational_path(g)):
            raise ResiduationError("residual undefined: neither path is equational")

    def pair(self, g: Path, f: Path) -> tuple[Path, Path]:
        """(g/f, f/g)."""
        self._check(g, f)
        return self._pair(g, f)

    def _pair(self, g: Path, f: Path) -> tuple[Path, Path]:
        key = (g.source, g.steps, f.steps)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        self._tick()
        p = self.p
        if not f.steps:
            res = (g, Path(p.path_target(g), ()))
        elif not g.steps:
            res = (Path(p.path_target(f), ()), f)
        elif f.steps[0] == g.steps[0]:
            res = self._pair(subpath(g, 1, len(g.steps), p), subpath(f, 1, len(f.steps), p))
        else:
            f1, g1 = f.steps[0], g.steps[0]
            a, b, _ = _step_pair(p, self.table, f1, g1)
            g_rest = subpath(g, 1, len(g.steps), p)
            f_rest = subpath(f, 1, len(f.steps), p)
            c, d = self._pair(g_rest, b)
            g_after_f1 = compose(p, a, c)
            e, h = self._pair(g_after_f1, f_rest)
            res = (e, compose(p, d, h))
        self._memo[key] = res
        return res

    # -- witnesses -----------------------------------------------------------

    def pair_with_witness(self, g: Path, f: Path) -> tuple[Path, Path, CellTrace]:
        """(g/f, f/g, trace) with trace : f;(g/f)  =>*  g;(f/g)."""
        self._check(g, f)
        return self._pair_w(g, f)

    def _tile_trace(self, f1: RewriteStep, g1: RewriteStep, a: Path, tile) -> CellTrace:
        p = self.p
        src = Path(p.step_source(f1), (f1,) + a.steps)
        if tile[0] == "exchange":
            return single_cell_trace(p, src, tile[1])
        _, entry, zl, zr, f_is_first = tile
        dl, dr = entry.decl_left, entry.decl_right
        if zl[len(zl) - len(dl) :] != dl or zr[: len(dr)] != dr:
            raise ResiduationError(
                f"cannot attach witness relation '{entry.relation}' outside its declared context"
            )
        outer_l = zl[: len(zl) - len(dl)] if dl else zl
        outer_r = zr[len(dr) :]
        forward = entry.lhs_is_first if f_is_first else not entry.lhs_is_first
        inst = RelationInstance(left=outer_l, right=outer_r, forward=forward, name=entry.relation)
        return single_cell_trace(p, src, inst)

    def _pair_w(self, g: Path, f: Path) -> tuple[Path, Path, CellTrace]:
        key = (g.source, g.steps, f.steps)
        hit = self._wmemo.get(key)
        if hit is not None:
            return hit
        self._tick()
        p = self.p
        if not f.steps:
            res = (g, Path(p.path_target(g), ()), CellTrace(g, ()))
        elif not g.steps:
            res = (Path(p.path_target(f), ()), f, CellTrace(f, ()))
        elif f.steps[0] == g.steps[0]:
            gf, fg, inner = self._pair_w(
                subpath(g, 1, len(g.steps), p), subpath(f, 1, len(f.steps), p)
            )
            pre = Path(f.source, (f.steps[0],))
            end = p.path_target(compose(p, pre, inner.source))
            res = (gf, fg, trace_whisker(p, pre, inner, p.identity(end)))
        else:
            f1, g1 = f.steps[0], g.steps[0]
            a, b, tile = _step_pair(p, self.table, f1, g1)
            g_rest = subpath(g, 1, len(g.steps), p)
            f_rest = subpath(f, 1, len(f.steps), p)
            c, d, t2 = self._pair_w(g_rest, b)
            g_after_f1 = compose(p, a, c)
            e, h, t3 = self._pair_w(g_after_f1, f_rest)
            t1 = self._tile_trace(f1, g1, a, tile)
            pre_f1 = Path(f.source, (f1,))
            pre_g1 = Path(g.source, (g1,))
            ch = compose(p, c, h)
            part1 = trace_whisker(p, pre_f1, t3, p.identity(p.path_target(compose(p, pre_f1, t3.source))))
            part2 = trace_whisker(p, p.identity(f.source), t1, ch)
            part3 = trace_whisker(p, pre_g1, t2, h)
            trace = trace_concat(p, part1, part2, part3)
            res = (e, compose(p, d, h), trace)
        self._wmemo[key] = res
        return res

    # -- 2-cell residuals ------------------------------------------------------

    def cell_residual(
        self, alpha: CellTrace, f: Path, max_cells: int = 12, budget: int = 50_000
    ) -> CellTrace:
        """Residuate a 2-cell trace after a coinitial rewriting path.

        Iterates over the steps of ``f``; for each cell of the trace the two
        endpoint residuals are joined by a bounded search for a connecting
        trace (the local cylinder top).
        """
        from . import oracle  # local import to avoid a module cycle

        p = self.p
        cur = alpha
        remaining = f
        while remaining.steps:
            step_path = Path(remaining.source, remaining.steps[:1])
            states = [cur.source]
            w = cur.source
            for cell in cur.cells:
                from .core import apply_cell

                w = apply_cell(p, w, cell)
                states.append(w)
            residuals = [self._pair(s, step_path)[0] for s in states]
            pieces: list[CellTrace] = []
            for i in range(len(residuals) - 1):
                if residuals[i] == residuals[i + 1]:
                    continue
                top = oracle.search_trace(
                    p, residuals[i], residuals[i + 1], max_cells=max_cells, budget=budget
                )
                if top is None:
                    raise ResiduationError(
                        "no connecting trace found while residuating a 2-cell "
                        f"(cell {i}, after {p.fmt_path(step_path)})"
                    )
                pieces.append(top)
            if pieces:
                cur = trace_concat(p, *pieces)
            else:
                cur = CellTrace(residuals[0], ())
            remaining = subpath(remaining, 1, len(remaining.steps), p)
        return cur


# ---------------------------------------------------------------------------
# spec-level wrappers


@dataclass(frozen=True)
class ResidualWitness:
    left: Path  # f ; (g/f)
    right: Path  # g ; (f/g)
    trace: CellTrace


def path_residual(g: Path, f: Path, table: ResidualTable, p: Presentation) -> Path:
    """The residual g/f of g after f (f or g entirely equational)."""
    return Residuator(p, table).pair(g, f)[0]


def residual_pair(
    g: Path, f: Path, table: ResidualTable, p: Presentation
) -> tuple[Path, Path]:
    return Residuator(p, table).pair(g, f)


def residual_witness(
    f: Path, g: Path, table: ResidualTable, p: Presentation
) -> ResidualWitness:
    """The 2-cell witnessing that (g/f);f and (f/g);g are cofinal equals."""
    res = Residuator(p, table)
    gf, fg, trace = res.pair_with_witness(g, f)
    return ResidualWitness(compose(p, f, gf), compose(p, g, fg), trace)
