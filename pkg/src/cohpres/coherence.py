"""Weight evaluation and the orchestrated assumption checkers.

The checks mirror the convergence, one-dimensional termination, cylinder and
two-dimensional termination assumptions, plus the derived conclusions
(coherence of the presentation and faithfulness of the embedding via the
opposite presentation).  Weight quantifications over infinite instance sets
are verified on deterministic bounded samples and reported as such.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .core import (
    CellTrace,
    Path,
    Presentation,
    RelationInstance,
    RewriteStep,
    WeightSpec,
    instance_sides,
    tensor_ctx,
)
from .critical import (
    CriticalCylinder,
    CriticalPair,
    CylinderVerdict,
    check_cylinder,
    enumerate_critical_cylinders,
    enumerate_critical_pairs,
    trivial_equational_base_samples,
)
from .objects import check_equational_termination, transposition_number
from .residuation import (
    ResidualTable,
    ResiduationError,
    Residuator,
    derive_residual_table,
    retype_step,
    steps_disjoint,
)


class WeightError(Exception):
    pass


# ---------------------------------------------------------------------------
# weight evaluation


def _item_data(item, p: Presentation) -> tuple[str, tuple, tuple, tuple]:
    """(entry key, left ctx, right ctx, source body) of a weighted item."""
    if isinstance(item, RewriteStep):
        return item.gen, item.left, item.right, p.gen(item.gen).source
    if isinstance(item, RelationInstance):
        if item.name is not None:
            rel = p.relation_map[item.name]
            return item.name, item.left, item.right, rel.lhs.source
        f, mid, g = item.exch  # type: ignore[misc]
        return "exch", item.left, item.right, p.gen(f).source + mid + p.gen(g).source
    raise WeightError(f"cannot weigh {item!r}")


def eval_weight(spec: WeightSpec, item, p: Presentation) -> tuple[int, ...]:
    key, left, right, body = _item_data(item, p)
    terms = spec.entries.get(key)
    if terms is None:
        raise WeightError(f"weight {spec.name}: no entry for '{key}'")
    out = []
    for t in terms:
        if t.kind == "const":
            out.append(t.value)
        elif t.kind == "countL":
            out.append(sum(1 for c in left if c == t.args[0]))
        elif t.kind == "countR":
            out.append(sum(1 for c in right if c == t.args[0]))
        elif t.kind == "ctx_transp":
            out.append(transposition_number(left + right, t.args[0], t.args[1]))
        elif t.kind == "word_transp":
            out.append(transposition_number(left + body + right, t.args[0], t.args[1]))
        else:
            raise WeightError(f"unknown weight term kind '{t.kind}'")
    return tuple(out)


def weight_of_path(spec: WeightSpec, path: Path, p: Presentation) -> tuple[int, ...]:
    total = (0,) * spec.dim
    for s in path.steps:
        total = tuple(a + b for a, b in zip(total, eval_weight(spec, s, p)))
    return total


def weight_of_trace(spec: WeightSpec, trace: CellTrace, p: Presentation) -> tuple[int, ...]:
    total = (0,) * spec.dim
    for cell in trace.cells:
        total = tuple(a + b for a, b in zip(total, eval_weight(spec, cell.inst, p)))
    return total


def weight_less(spec: WeightSpec, a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    if spec.order == "lex":
        return a < b
    return all(x <= y for x, y in zip(a, b)) and a != b


# ---------------------------------------------------------------------------
# verdicts and report


@dataclass
class Verdict:
    status: str  # "pass" | "fail" | "inconclusive"
    witnesses: list[str] = field(default_factory=list)
    note: str = ""


@dataclass
class CheckReport:
    mode: str
    a3_mode: str
    strong: bool
    assumptions: dict[str, Verdict]
    critical_pairs: list[CriticalPair]
    cylinders: list[tuple[CriticalCylinder, CylinderVerdict | None]]
    coherent: str
    faithful_embedding: str
    faithful_note: str = ""
    timings: dict[str, float] = field(default_factory=dict)


def omega1(p: Presentation) -> WeightSpec | None:
    return p.weights.get("omega1")


def omega2_vertical(p: Presentation) -> WeightSpec | None:
    return p.weights.get("omega2v") or p.weights.get("omega2")


def omega2_base(p: Presentation) -> WeightSpec | None:
    return p.weights.get("omega2b") or p.weights.get("omega2")


# ---------------------------------------------------------------------------
# A1: residuation tiles + equational termination


def check_a1(
    p: Presentation,
    table: ResidualTable,
    pairs: list[CriticalPair] | None = None,
    term_budget: int = 10_000,
    max_len: int = 6,
) -> Verdict:
    if pairs is None:
        pairs = enumerate_critical_pairs(p, table)
    witnesses: list[str] = []
    for cp in pairs:
        if cp.resolved is None:
            witnesses.append(
                f"unresolved critical pair ({p.fmt_step(cp.f)}, {p.fmt_step(cp.g)}) "
                f"on {p.fmt_word(cp.word)}"
            )
    for msg in table.conflicts:
        witnesses.append(msg)
    term = check_equational_termination(p, budget=term_budget, max_len=max_len)
    if term.status == "cycle":
        witnesses.append(
            "equational cycle: " + " -> ".join(p.fmt_word(w) for w in term.cycle)
        )
    if witnesses:
        return Verdict("fail", witnesses)
    if term.status == "budget_exhausted":
        return Verdict(
            "inconclusive",
            [],
            f"termination exploration exhausted its budget of {term.budget} words",
        )
    return Verdict("pass", [], f"{len(pairs)} critical pairs resolved; terminating")


# ---------------------------------------------------------------------------
# A2: one-dimensional termination weight


def _context_words(p: Presentation, max_len: int) -> list[tuple]:
    words = [()]
    frontier = [()]
    for _ in range(max_len):
        frontier = [w + (o,) for w in frontier for o in p.objects]
        words.extend(frontier)
    return words


def check_a2(
    p: Presentation,
    table: ResidualTable,
    w1: WeightSpec | None = None,
    mid_len: int = 2,
    ctx_len: int = 3,
) -> Verdict:
    if not p.equational_names:
        return Verdict("pass", [], "vacuous: no equational generators")
    if w1 is None:
        w1 = omega1(p)
    if w1 is None:
        return Verdict("inconclusive", [], "no omega1 weight block supplied")
    witnesses: list[str] = []

    def strict(res_w, orig_w, what: str) -> None:
        if not weight_less(w1, res_w, orig_w):
            witnesses.append(f"omega1 not decreasing on {what}: {res_w} !< {orig_w}")

    try:
        entries = sorted(table.entries.items(), key=lambda kv: str(kv[0]))
        for _, e in entries:
            if p.is_equational_step(e.second):
                continue
            strict(
                weight_of_path(w1, e.second_after_first, p),
                eval_weight(w1, e.second, p),
                f"tile residual {p.fmt_path(e.second_after_first)} of {p.fmt_step(e.second)}",
            )
            if p.mode != "monoidal":
                continue
            # context compatibility, sampled over whiskering contexts
            for x in _context_words(p, ctx_len):
                for y in _context_words(p, ctx_len):
                    if not x and not y:
                        continue
                    wres = weight_of_path(
                        w1, tensor_ctx(p, x, e.second_after_first, y), p
                    )
                    worig = eval_weight(
                        w1, RewriteStep(x + e.second.left, e.second.gen, e.second.right + y), p
                    )
                    if not weight_less(w1, wres, worig):
                        witnesses.append(
                            f"omega1 strictness lost under whiskering ({p.fmt_word(x)})...({p.fmt_word(y)}) "
                            f"of tile for {p.fmt_step(e.second)}: {wres} !< {worig}"
                        )
                        break
                else:
                    continue
                break
        # exchange residuals: all generator pairs, middle words up to mid_len
        if p.mode == "monoidal":
            for e in p.generators:
                if not e.equational:
                    continue
                for h in p.generators:
                    for mid in _context_words(p, mid_len):
                        for e_left in (True, False):
                            if e_left:
                                f = RewriteStep((), e.name, mid + h.source)
                                g = RewriteStep(e.source + mid, h.name, ())
                            else:
                                f = RewriteStep(h.source + mid, e.name, ())
                                g = RewriteStep((), h.name, mid + e.source)
                            if not steps_disjoint(p, f, g):
                                continue
                            res = retype_step(p, g, f)
                            strict(
                                eval_weight(w1, res, p),
                                eval_weight(w1, g, p),
                                f"exchange residual {p.fmt_step(res)} of {p.fmt_step(g)} "
                                f"after {p.fmt_step(f)}",
                            )
    except WeightError as exc:
        return Verdict("inconclusive", [], str(exc))
    if witnesses:
        return Verdict("fail", witnesses)
    return Verdict("pass", [], "strict decrease on tiles and sampled exchange residuals")


# ---------------------------------------------------------------------------
# A3 / A3': cylinder property


def _sampled_base_records(
    p: Presentation,
    table: ResidualTable,
    max_cells: int = 8,
    budget: int = 20_000,
):
    """Residuation data for the trivially completable equational-base
    coincidences: (vertical, base, top trace, vertical residual)."""
    from . import oracle

    res = Residuator(p, table)
    records = []
    for f, inst in trivial_equational_base_samples(p):
        lhs, rhs = instance_sides(p, inst)
        fpath = Path(lhs.source, (f,))
        try:
            _, l_res = res.pair(fpath, lhs)
            fg, r_res = res.pair(fpath, rhs)
        except ResiduationError:
            records.append((f, inst, None, None))
            continue
        if l_res == r_res:
            top = CellTrace(l_res, ())
        else:
            top = oracle.search_trace(p, l_res, r_res, max_cells=max_cells, budget=budget)
        records.append((f, inst, top, fg))
    return records


def check_a3(
    p: Presentation,
    table: ResidualTable,
    cylinders: list[CriticalCylinder] | None = None,
    mode: str = "strict",
    max_cells: int = 12,
    budget: int = 50_000,
    base_records=None,
) -> tuple[Verdict, list[tuple[CriticalCylinder, CylinderVerdict]]]:
    if cylinders is None:
        cylinders = enumerate_critical_cylinders(p, table)
    results: list[tuple[CriticalCylinder, CylinderVerdict]] = []
    failures: list[str] = []
    open_questions: list[str] = []
    for cyl in cylinders:
        v = check_cylinder(cyl, p, table, max_cells=max_cells, budget=budget)
        results.append((cyl, v))
        label = f"cylinder ({p.fmt_step(cyl.f)} | {p.fmt_instance(cyl.base)})"
        ok = ("equal",) if mode == "strict" else ("equal", "exchange_equal")
        if v.residual_targets_equal not in ok:
            detail = ""
            if v.vertical_residuals:
                r1, r2 = v.vertical_residuals
                detail = f": {p.fmt_path(r1)} vs {p.fmt_path(r2)}"
            failures.append(
                f"{label}: vertical residuals {v.residual_targets_equal}{detail}"
            )
        if v.top is None:
            # search exhaustion alone is inconclusive, never a failure
            open_questions.append(f"{label}: no top trace found ({v.notes})")
    if mode == "up_to_exchange":
        # condition 2: residuals of exchange cells stay composites of exchanges
        for cyl, v in results:
            if cyl.base.exch is None or v.top is None:
                continue
            if any(c.inst.exch is None for c in v.top.cells):
                failures.append(
                    f"residual of exchange base {p.fmt_instance(cyl.base)} uses "
                    "non-exchange cells"
                )
        if base_records is None:
            base_records = _sampled_base_records(p, table)
        for f, inst, top, _ in base_records:
            if inst.exch is None:
                continue
            if top is None:
                open_questions.append(
                    f"sampled exchange residual after {p.fmt_step(f)} not reconstructed"
                )
            elif any(c.inst.exch is None for c in top.cells):
                failures.append(
                    f"sampled residual of {p.fmt_instance(inst)} after {p.fmt_step(f)} "
                    "uses non-exchange cells"
                )
    if failures:
        return Verdict("fail", failures + open_questions), results
    if open_questions:
        return Verdict("inconclusive", open_questions, "top-trace search exhausted"), results
    return (
        Verdict("pass", [], f"{len(results)} critical cylinders close ({mode})"),
        results,
    )


# ---------------------------------------------------------------------------
# A4: two-dimensional termination weight


def check_a4(
    p: Presentation,
    cylinder_results: list[tuple[CriticalCylinder, CylinderVerdict]],
    strong: bool = False,
    w2v: WeightSpec | None = None,
    w2b: WeightSpec | None = None,
    base_records=None,
    table: ResidualTable | None = None,
) -> Verdict:
    if not p.equational_names:
        return Verdict("pass", [], "vacuous: no equational generators")
    if w2v is None:
        w2v = omega2_vertical(p)
    if w2b is None:
        w2b = omega2_base(p)
    witnesses: list[str] = []
    inconclusive_notes: list[str] = []

    def exempt(rv: Path | None) -> bool:
        return strong and rv is not None and len(rv.steps) <= 1

    try:
        for cyl, v in cylinder_results:
            spec = w2v if cyl.flavor == "equational_vertical" else w2b
            if spec is None:
                return Verdict("inconclusive", [], "missing omega2 weight block")
            if v.top is None:
                inconclusive_notes.append(
                    f"no top trace for ({p.fmt_step(cyl.f)} | {p.fmt_instance(cyl.base)})"
                )
                continue
            if exempt(v.vertical_residual):
                continue
            base_w = eval_weight(spec, cyl.base, p)
            top_w = weight_of_trace(spec, v.top, p)
            if not weight_less(spec, top_w, base_w):
                witnesses.append(
                    f"omega2({p.fmt_instance(cyl.base)}) = {base_w} !> {top_w} = omega2(top)"
                )
        if w2b is not None and table is not None:
            if base_records is None:
                base_records = _sampled_base_records(p, table)
            for f, inst, top, rv in base_records:
                if top is None:
                    inconclusive_notes.append(
                        f"sample after {p.fmt_step(f)}: residual not reconstructed"
                    )
                    continue
                if exempt(rv):
                    continue
                base_w = eval_weight(w2b, inst, p)
                top_w = weight_of_trace(w2b, top, p)
                if not weight_less(w2b, top_w, base_w):
                    if len(top.cells) == 1:
                        res_txt = f"omega2({p.fmt_instance(top.cells[0].inst)})"
                    else:
                        res_txt = "omega2(residual)"
                    witnesses.append(
                        f"omega2({p.fmt_instance(inst)}) = {base_w} !> {top_w} = {res_txt}"
                        f" [vertical {p.fmt_step(f)}]"
                    )
    except WeightError as exc:
        return Verdict("inconclusive", [], str(exc))
    if witnesses:
        return Verdict("fail", witnesses)
    if inconclusive_notes:
        return Verdict("inconclusive", inconclusive_notes, "some tops unavailable")
    note = "strict decrease on cylinder tops"
    if strong:
        note += " (single-step vertical residuals exempted)"
    return Verdict("pass", [], note)


# ---------------------------------------------------------------------------
# the full report


def check_all(
    p: Presentation,
    a3_mode: str = "strict",
    strong: bool = False,
    term_budget: int = 10_000,
    max_len: int = 6,
    max_cells: int = 12,
    budget: int = 50_000,
    run_opposite: bool = True,
) -> CheckReport:
    """Run A1 to A4 in order, derive coherence, and probe the opposite
    presentation for the faithful-embedding conclusion."""
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    table = derive_residual_table(p)
    pairs = enumerate_critical_pairs(p, table)
    a1 = check_a1(p, table, pairs, term_budget=term_budget, max_len=max_len)
    timings["a1"] = time.perf_counter() - t0

    cylinders = enumerate_critical_cylinders(p, table)
    results: list[tuple[CriticalCylinder, CylinderVerdict | None]] = [
        (c, None) for c in cylinders
    ]
    if a1.status != "pass":
        skip = Verdict("inconclusive", [], "skipped: A1 did not pass")
        assumptions = {"a1": a1, "a2": skip, "a3": skip, "a4": skip}
        coherent = "fail" if a1.status == "fail" else "inconclusive"
        report = CheckReport(
            p.mode, a3_mode, strong, assumptions, pairs, results, coherent, "", timings=timings
        )
        _fill_faithful(report, p, a3_mode, strong, run_opposite, term_budget, max_len)
        return report

    t0 = time.perf_counter()
    a2 = check_a2(p, table)
    timings["a2"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    # the up-to-exchange A3 needs the sampled equational-base residuals; in
    # strict mode they are only needed if A4 runs, so defer them
    base_records = (
        _sampled_base_records(p, table)
        if (p.mode == "monoidal" and a3_mode == "up_to_exchange")
        else None
    )
    a3, cyl_results = check_a3(
        p,
        table,
        cylinders,
        mode=a3_mode,
        max_cells=max_cells,
        budget=budget,
        base_records=base_records,
    )
    results = list(cyl_results)
    timings["a3"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if a3.status == "pass":
        a4 = check_a4(
            p, cyl_results, strong=strong, base_records=base_records, table=table
        )
    else:
        a4 = Verdict("inconclusive", [], "skipped: A3 did not pass")
    timings["a4"] = time.perf_counter() - t0

    assumptions = {"a1": a1, "a2": a2, "a3": a3, "a4": a4}
    statuses = [v.status for v in assumptions.values()]
    if all(s == "pass" for s in statuses):
        coherent = "pass"
    elif "fail" in statuses:
        coherent = "fail"
    else:
        coherent = "inconclusive"
    report = CheckReport(
        p.mode, a3_mode, strong, assumptions, pairs, results, coherent, "", timings=timings
    )
    _fill_faithful(report, p, a3_mode, strong, run_opposite, term_budget, max_len)
    return report


def _fill_faithful(
    report: CheckReport,
    p: Presentation,
    a3_mode: str,
    strong: bool,
    run_opposite: bool,
    term_budget: int,
    max_len: int,
) -> None:
    if not run_opposite:
        report.faithful_embedding = "inconclusive"
        report.faithful_note = "opposite presentation not checked"
        return
    from .constructions import opposite

    op = opposite(p)
    t0 = time.perf_counter()
    attempts = [("strict", False), (a3_mode, strong), ("up_to_exchange", True)]
    attempts = list(dict.fromkeys(attempts))
    last = None
    for mode, strg in attempts:
        rep = check_all(
            op,
            a3_mode=mode,
            strong=strg,
            term_budget=term_budget,
            max_len=max_len,
            run_opposite=False,
        )
        last = rep
        if rep.coherent == "pass":
            report.faithful_embedding = "pass"
            report.faithful_note = f"opposite presentation coherent ({mode}"
            report.faithful_note += ", strong)" if strg else ")"
            report.timings["opposite"] = time.perf_counter() - t0
            return
        if rep.assumptions["a1"].status == "fail":
            break  # structural failure; weight-independent, no retry helps
    report.timings["opposite"] = time.perf_counter() - t0
    assert last is not None
    if last.assumptions["a1"].status == "fail":
        report.faithful_embedding = "fail"
        report.faithful_note = "opposite presentation fails convergence (A1)"
    else:
        report.faithful_embedding = "inconclusive"
        report.faithful_note = (
            "opposite presentation not verified with the carried-over weights"
        )


# ---------------------------------------------------------------------------
# structured report serialization


def report_to_dict(report: CheckReport, p: Presentation, include_timings: bool = False) -> dict:
    out: dict = {
        "mode": report.mode,
        "a3_mode": report.a3_mode,
        "strong": report.strong,
        "assumptions": {
            name: {"verdict": v.status, "witnesses": list(v.witnesses), "note": v.note}
            for name, v in report.assumptions.items()
        },
        "criticalPairs": [
            {
                "word": p.fmt_word(cp.word),
                "f": p.fmt_step(cp.f),
                "g": p.fmt_step(cp.g),
                "resolved": cp.resolved is not None,
            }
            for cp in report.critical_pairs
        ],
        "cylinders": [
            {
                "vertical": p.fmt_step(c.f),
                "base": p.fmt_instance(c.base),
                "flavor": c.flavor,
                "verdict": None if v is None else v.residual_targets_equal,
                "topCells": None if v is None or v.top is None else len(v.top.cells),
            }
            for c, v in report.cylinders
        ],
        "coherent": report.coherent,
        "faithfulEmbedding": report.faithful_embedding,
        "faithfulNote": report.faithful_note,
    }
    if include_timings:
        out["timings"] = dict(report.timings)
    return out
