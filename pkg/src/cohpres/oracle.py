"""Brute-force ground truth at desk scale.

Everything here is budgeted and independent of the residuation fast paths:
exchange canonical forms decide commutation equivalence, a bidirectional
search decides 2-cell equality within a budget, hom-sets are enumerated and
partitioned by congruence closure, and a tile-search oracle recomputes
residuals straight from the declared relations.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement

from .core import (
    CellStep,
    CellTrace,
    CohpresError,
    Path,
    Presentation,
    RelationInstance,
    RewriteStep,
    Word,
    compose,
    subpath,
    tensor_ctx,
    trace_concat,
    trace_invert,
)


class ExplosionError(CohpresError):
    pass


# ---------------------------------------------------------------------------
# step geometry (kept local and elementary on purpose)


def _interval(p: Presentation, s: RewriteStep) -> tuple[int, int]:
    a = len(s.left)
    return a, a + len(p.gen(s.gen).source)


def _intervals_independent(a1: int, b1: int, a2: int, b2: int) -> bool:
    if a1 == b1 and a2 == b2:
        return a1 != a2
    if a1 == b1:
        return a1 <= a2 or a1 >= b2
    if a2 == b2:
        return a2 <= a1 or a2 >= b1
    return b1 <= a2 or b2 <= a1


def _consecutive_independent(p: Presentation, s: RewriteStep, t: RewriteStep) -> bool:
    """Whether the later step t commutes with s (disjoint active areas)."""
    a_s, _ = _interval(p, s)
    img_end = a_s + len(p.gen(s.gen).target)
    at, bt = _interval(p, t)
    return _intervals_independent(at, bt, a_s, img_end)


def _swap_consecutive(
    p: Presentation, s: RewriteStep, t: RewriteStep
) -> tuple[RewriteStep, RewriteStep, RelationInstance]:
    """Swap independent consecutive steps s;t into t';s' plus the exchange cell."""
    from .residuation import exchange_instance, retype_step

    w = p.step_source(s)
    a_s = len(s.left)
    ks, ks2 = len(p.gen(s.gen).source), len(p.gen(s.gen).target)
    at = len(t.left)
    kt = len(p.gen(t.gen).source)
    if at + kt <= a_s or (at <= a_s and kt == 0):
        at_w = at
    else:
        at_w = at + ks - ks2
    t_back = RewriteStep(w[:at_w], t.gen, w[at_w + kt :])
    s_after = retype_step(p, s, t_back)
    inst = exchange_instance(p, s, t_back)
    return t_back, s_after, inst


def exchange_canonical(path: Path, p: Presentation) -> Path:
    """The canonical representative of a path up to exchange.

    Repeatedly swaps adjacent independent steps whenever the later one acts
    strictly further left; this sorts commuting steps by position and is the
    identity in path mode.
    """
    return canonical_with_trace(path, p)[0]


def canonical_with_trace(path: Path, p: Presentation) -> tuple[Path, CellTrace]:
    steps = list(path.steps)
    cells: list[CellStep] = []
    cur = Path(path.source, tuple(steps))
    if p.mode == "path":
        return cur, CellTrace(cur, ())
    changed = True
    while changed:
        changed = False
        for i in range(len(steps) - 1):
            s, t = steps[i], steps[i + 1]
            if not _consecutive_independent(p, s, t):
                continue
            a_s = len(s.left)
            ks, ks2 = len(p.gen(s.gen).source), len(p.gen(s.gen).target)
            at = len(t.left)
            kt = len(p.gen(t.gen).source)
            at_w = at if (at + kt <= a_s or (at <= a_s and kt == 0)) else at + ks - ks2
            if at_w >= a_s:
                continue
            t_back, s_after, inst = _swap_consecutive(p, s, t)
            here = Path(path.source, tuple(steps))
            cells.append(
                CellStep(
                    subpath(here, 0, i, p),
                    inst,
                    subpath(here, i + 2, len(steps), p),
                )
            )
            steps[i], steps[i + 1] = t_back, s_after
            changed = True
    return Path(path.source, tuple(steps)), CellTrace(path, tuple(cells))


# ---------------------------------------------------------------------------
# single-cell rewriting moves


def rewrite_moves(p: Presentation, path: Path) -> list[tuple[Path, CellStep]]:
    """All single named-relation or exchange rewrites applicable to a path."""
    out: list[tuple[Path, CellStep]] = []
    words = [path.source]
    for s in path.steps:
        words.append(p.step_target(s))
    n = len(path.steps)
    for rel in p.relations:
        for fwd, lhs, rhs in ((True, rel.lhs, rel.rhs), (False, rel.rhs, rel.lhs)):
            k = len(lhs.steps)
            if k == 0:
                w0 = lhs.source
                for i in range(n + 1):
                    w = words[i]
                    for cut in range(len(w) - len(w0) + 1):
                        if w[cut : cut + len(w0)] != w0:
                            continue
                        x, y = w[:cut], w[cut + len(w0) :]
                        inst = RelationInstance(x, y, fwd, name=rel.name)
                        new_steps = (
                            path.steps[:i]
                            + tensor_ctx(p, x, rhs, y).steps
                            + path.steps[i:]
                        )
                        cell = CellStep(
                            subpath(path, 0, i, p), inst, subpath(path, i, n, p)
                        )
                        out.append((Path(path.source, new_steps), cell))
                continue
            l0 = lhs.steps[0]
            for i in range(n - k + 1):
                s0 = path.steps[i]
                if s0.gen != l0.gen:
                    continue
                dl = len(s0.left) - len(l0.left)
                dr = len(s0.right) - len(l0.right)
                if dl < 0 or dr < 0:
                    continue
                if s0.left[dl:] != l0.left or s0.right[: len(l0.right)] != l0.right:
                    continue
                x = s0.left[:dl]
                y = s0.right[len(l0.right) :]
                seg = tensor_ctx(p, x, lhs, y)
                if path.steps[i : i + k] != seg.steps:
                    continue
                inst = RelationInstance(x, y, fwd, name=rel.name)
                new_steps = (
                    path.steps[:i] + tensor_ctx(p, x, rhs, y).steps + path.steps[i + k :]
                )
                cell = CellStep(subpath(path, 0, i, p), inst, subpath(path, i + k, n, p))
                out.append((Path(path.source, new_steps), cell))
    if p.mode == "monoidal":
        for i in range(n - 1):
            s, t = path.steps[i], path.steps[i + 1]
            if not _consecutive_independent(p, s, t):
                continue
            t_back, s_after, inst = _swap_consecutive(p, s, t)
            new_steps = path.steps[:i] + (t_back, s_after) + path.steps[i + 2 :]
            cell = CellStep(subpath(path, 0, i, p), inst, subpath(path, i + 2, n, p))
            out.append((Path(path.source, new_steps), cell))
    return out


# ---------------------------------------------------------------------------
# bounded 2-cell search


def _raw_key(path: Path):
    return (path.source, path.steps)


def search_trace(
    p: Presentation,
    start: Path,
    goal: Path,
    max_cells: int = 12,
    budget: int = 20_000,
) -> CellTrace | None:
    """Bidirectional breadth-first search for a 2-cell trace start =>* goal.

    Visited states are deduplicated on raw paths; the two searches meet on
    exchange-canonical forms, with the connecting exchange cells spliced in.
    """
    if start.source != goal.source or p.path_target(start) != p.path_target(goal):
        raise CohpresError("search_trace requires parallel paths")
    if start == goal:
        return CellTrace(start, ())

    sides: list[dict] = []
    for origin in (start, goal):
        canon, ctr = canonical_with_trace(origin, p)
        sides.append(
            {
                "traces": {_raw_key(origin): CellTrace(origin, ())},
                "canon": {_raw_key(canon): (_raw_key(origin), ctr)},
                "frontier": [origin],
                "depth": 0,
            }
        )

    def stitch(akey, actr, bkey, bctr) -> CellTrace:
        ta = sides[0]["traces"][akey]
        tb = sides[1]["traces"][bkey]
        return trace_concat(p, ta, actr, trace_invert(p, bctr), trace_invert(p, tb))

    # initial meet check
    for ckey, (akey, actr) in sides[0]["canon"].items():
        if ckey in sides[1]["canon"]:
            bkey, bctr = sides[1]["canon"][ckey]
            return stitch(akey, actr, bkey, bctr)

    visited = 2
    while sides[0]["frontier"] or sides[1]["frontier"]:
        if not sides[0]["frontier"]:
            si = 1
        elif not sides[1]["frontier"]:
            si = 0
        else:
            k0 = (sides[0]["depth"], len(sides[0]["frontier"]))
            k1 = (sides[1]["depth"], len(sides[1]["frontier"]))
            si = 0 if k0 <= k1 else 1
        side, other = sides[si], sides[1 - si]
        if side["depth"] + other["depth"] >= max_cells:
            return None
        side["depth"] += 1
        new_frontier: list[Path] = []
        for node in side["frontier"]:
            base = side["traces"][_raw_key(node)]
            for new_path, cell in rewrite_moves(p, node):
                key = _raw_key(new_path)
                if key in side["traces"]:
                    continue
                visited += 1
                if visited > budget:
                    return None
                trace = CellTrace(base.source, base.cells + (cell,))
                side["traces"][key] = trace
                canon, ctr = canonical_with_trace(new_path, p)
                ckey = _raw_key(canon)
                if ckey not in side["canon"]:
                    side["canon"][ckey] = (key, ctr)
                if ckey in other["canon"]:
                    okey, octr = other["canon"][ckey]
                    if si == 0:
                        return stitch(key, ctr, okey, octr)
                    return stitch(okey, octr, key, ctr)
                new_frontier.append(new_path)
        side["frontier"] = new_frontier
    return None


def cells_equal(
    p1: Path, p2: Path, p: Presentation, budget: int = 20_000, max_cells: int = 12
) -> tuple[str, CellTrace | None]:
    """Decide p1 <=>* p2 within a budget: ('equal', witness) or
    ('unequal_at_budget', None)."""
    trace = search_trace(p, p1, p2, max_cells=max_cells, budget=budget)
    if trace is None:
        return "unequal_at_budget", None
    return "equal", trace


# ---------------------------------------------------------------------------
# hom-set enumeration


@dataclass(frozen=True)
class HomClasses:
    source: Word
    target: Word
    bound: int
    classes: tuple[tuple[Path, ...], ...]

    @property
    def count(self) -> int:
        return len(self.classes)


def _all_steps(p: Presentation, w: Word) -> list[RewriteStep]:
    out = []
    for g in p.generators:
        k = len(g.source)
        for pos in range(len(w) - k + 1):
            if w[pos : pos + k] == g.source:
                out.append(RewriteStep(w[:pos], g.name, w[pos + k :]))
    return out


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def enumerate_hom_classes(
    src: Word, tgt: Word, p: Presentation, bound: int, guard: int = 200_000
) -> HomClasses:
    """All paths src -> tgt of at most ``bound`` steps, partitioned by the
    congruence generated by single relation applications inside the bound."""
    paths: list[Path] = []
    frontier: list[Path] = [Path(src, ())]
    generated = 1
    for _ in range(bound):
        nxt: list[Path] = []
        for path in frontier:
            w = p.path_target(path)
            for s in _all_steps(p, w):
                generated += 1
                if generated > guard:
                    raise ExplosionError(
                        f"hom enumeration exceeded {guard} paths for "
                        f"{p.fmt_word(src)} -> {p.fmt_word(tgt)}"
                    )
                nxt.append(Path(src, path.steps + (s,)))
        frontier = nxt
        paths.extend(q for q in nxt if p.path_target(q) == tgt)
    if src == tgt:
        paths.insert(0, Path(src, ()))
    index = {q.steps: i for i, q in enumerate(paths)}
    uf = _UnionFind(len(paths))
    for i, q in enumerate(paths):
        for new_path, _cell in rewrite_moves(p, q):
            j = index.get(new_path.steps)
            if j is not None:
                uf.union(i, j)
    groups: dict[int, list[Path]] = {}
    for i, q in enumerate(paths):
        groups.setdefault(uf.find(i), []).append(q)
    classes = tuple(
        tuple(sorted(g, key=lambda q: (len(q.steps), p.fmt_path(q))))
        for g in sorted(groups.values(), key=lambda g: (len(g[0].steps), p.fmt_path(g[0])))
    )
    return HomClasses(src, tgt, bound, classes)


# ---------------------------------------------------------------------------
# combinatorial oracle for the surjection PRO


def _monotone_surjections(n: int, k: int) -> int:
    if k == 0:
        return 1 if n == 0 else 0
    if n < k:
        return 0
    count = 0
    for values in combinations_with_replacement(range(k), n):
        if len(set(values)) == k:
            count += 1
    return count


def surjection_count(pq: tuple[int, int], rs: tuple[int, int]) -> int:
    """Number of morphisms (p,q) -> (r,s) in the product of surjection PROs,
    counted by direct enumeration of monotone maps."""
    return _monotone_surjections(pq[0], rs[0]) * _monotone_surjections(pq[1], rs[1])


# ---------------------------------------------------------------------------
# independent tile-search residuation oracle


class OracleFailure(CohpresError):
    pass


def _oracle_tile(p: Presentation, f0: RewriteStep, g0: RewriteStep, word: Word):
    """Find (g0/f0, f0/g0) by scanning relation instances on the word."""
    af, bf = _interval(p, f0)
    ag, bg = _interval(p, g0)
    if _intervals_independent(af, bf, ag, bg):
        # recompute the exchange square from scratch on the word
        tgt_f = p.gen(f0.gen).target
        tgt_g = p.gen(g0.gen).target
        if bf <= ag or (af == bf and af <= ag):
            w_f = word[:af] + tgt_f + word[bf:]
            g_new = RewriteStep(w_f[: ag + len(tgt_f) - (bf - af)], g0.gen, word[bg:])
            w_g = word[:ag] + tgt_g + word[bg:]
            f_new = RewriteStep(word[:af], f0.gen, w_g[bf:])
        else:
            w_f = word[:af] + tgt_f + word[bf:]
            g_new = RewriteStep(word[:ag], g0.gen, w_f[bg:])
            w_g = word[:ag] + tgt_g + word[bg:]
            f_new = RewriteStep(w_g[: af + len(tgt_g) - (bg - ag)], f0.gen, word[bf:])
        return Path(p.step_target(f0), (g_new,)), Path(p.step_target(g0), (f_new,))
    f_eq = p.is_equational_step(f0)
    g_eq = p.is_equational_step(g0)
    for rel in p.relations:
        for side_a, side_b in ((rel.lhs, rel.rhs), (rel.rhs, rel.lhs)):
            if side_a.source and len(side_a.source) > len(word):
                continue
            for cut in range(len(word) - len(side_a.source) + 1):
                if word[cut : cut + len(side_a.source)] != side_a.source:
                    continue
                x, y = word[:cut], word[cut + len(side_a.source) :]
                wa = tensor_ctx(p, x, side_a, y)
                wb = tensor_ctx(p, x, side_b, y)
                if not wa.steps or not wb.steps:
                    continue
                if wa.steps[0] != f0 or wb.steps[0] != g0:
                    continue
                rest_a = subpath(wa, 1, len(wa.steps), p)
                rest_b = subpath(wb, 1, len(wb.steps), p)
                if f_eq and not p.is_equational_path(rest_b):
                    continue
                if not f_eq and g_eq and not p.is_equational_path(rest_a):
                    continue
                return rest_a, rest_b
    raise OracleFailure(
        f"no tile found for ({p.fmt_step(f0)}, {p.fmt_step(g0)}) on {p.fmt_word(word)}"
    )


def oracle_residual_pair(
    g: Path, f: Path, p: Presentation, depth: int = 64
) -> tuple[Path, Path]:
    """(g/f, f/g) recomputed from the raw relations, splitting g first.

    Independent of the residual table and of the memoized strategy; used to
    cross-check residuation results.
    """
    if depth <= 0:
        raise OracleFailure("oracle residuation depth exhausted")
    if g.source != f.source:
        raise OracleFailure("oracle: paths not coinitial")
    if not f.steps:
        return g, Path(p.path_target(g), ())
    if not g.steps:
        return Path(p.path_target(f), ()), f
    if f.steps[0] == g.steps[0]:
        return oracle_residual_pair(
            subpath(g, 1, len(g.steps), p), subpath(f, 1, len(f.steps), p), p, depth - 1
        )
    if len(g.steps) > 1:
        g1 = Path(g.source, g.steps[:1])
        grest = subpath(g, 1, len(g.steps), p)
        g1f, fg1 = oracle_residual_pair(g1, f, p, depth - 1)
        grest_res, f_rest = oracle_residual_pair(grest, fg1, p, depth - 1)
        return compose(p, g1f, grest_res), f_rest
    if len(f.steps) > 1:
        f1 = Path(f.source, f.steps[:1])
        frest = subpath(f, 1, len(f.steps), p)
        gf1, f1g = oracle_residual_pair(g, f1, p, depth - 1)
        gff, frest_after = oracle_residual_pair(gf1, frest, p, depth - 1)
        return gff, compose(p, f1g, frest_after)
    gf, fg = _oracle_tile(p, f.steps[0], g.steps[0], f.source)
    return gf, fg


# ---------------------------------------------------------------------------
# three-way comparison


def normal_words(p: Presentation, max_word: int) -> list[Word]:
    from .objects import equational_successors

    out: list[Word] = []
    frontier: list[Word] = [()]
    if p.mode == "path":
        return [
            (o,) for o in p.objects if not equational_successors((o,), p)
        ]
    if not equational_successors((), p):
        out.append(())
    for _ in range(max_word):
        nxt = []
        for w in frontier:
            for o in p.objects:
                ww = w + (o,)
                nxt.append(ww)
                if not equational_successors(ww, p):
                    out.append(ww)
        frontier = nxt
    return out


def compare_constructions(
    p: Presentation,
    max_word: int,
    max_steps: int,
    oracle_family: str | None = None,
    fraction_samples: int = 20,
    guard: int = 200_000,
) -> dict:
    """Compare hom-set class counts across the constructions at desk scale."""
    from . import constructions as con
    from .residuation import derive_residual_table

    report: dict = {"mode": p.mode, "pairs": [], "notes": [], "verdict": "equal"}
    if p.mode == "path":
        quot = con.quotient_presentation(p)
        loc = con.localization_presentation(p, set(p.equational_names))
        rep_of = con.quotient_class_map(p)
        normals = set(normal_words(p, max_word))
        for u in p.objects:
            for v in p.objects:
                q = enumerate_hom_classes(
                    (rep_of[u],), (rep_of[v],), quot, max_steps, guard
                ).count
                l = enumerate_hom_classes((u,), (v,), loc, max_steps, guard).count
                entry = {
                    "src": u,
                    "tgt": v,
                    "quotient_classes": q,
                    "localization_classes": l,
                }
                if (u,) in normals and (v,) in normals:
                    entry["nf_classes"] = enumerate_hom_classes(
                        (u,), (v,), p, max_steps, guard
                    ).count
                if q != l:
                    entry["mismatch"] = "quotient != localization"
                    report["verdict"] = "unequal"
                report["pairs"].append(entry)
        return report

    table = derive_residual_table(p)
    normals = normal_words(p, max_word)
    for u in normals:
        for v in normals:
            nf = enumerate_hom_classes(u, v, p, max_steps, guard).count
            entry = {"src": p.fmt_word(u), "tgt": p.fmt_word(v), "nf_classes": nf}
            if oracle_family == "ds2":
                pq = (sum(1 for c in u if c == "a"), sum(1 for c in u if c == "b"))
                rs = (sum(1 for c in v if c == "a"), sum(1 for c in v if c == "b"))
                expected = surjection_count(pq, rs)
                entry["surjection_count"] = expected
                if expected != nf:
                    entry["mismatch"] = "nf != surjection oracle"
                    report["verdict"] = "unequal"
            report["pairs"].append(entry)
    agreement = con.sample_fraction_agreement(
        p, table, normals, max_steps, fraction_samples
    )
    report["fractions"] = agreement
    if agreement["checked"] and agreement["agreed"] != agreement["checked"]:
        report["verdict"] = "unequal"
        report["notes"].append("fraction equality disagrees with normal-form images")
    return report
