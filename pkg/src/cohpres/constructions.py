"""The categorical constructions being compared.

Quotient, localization and opposite presentations; Tietze transformations
with bounded derivability checks; the normal-form functor (residuate along
the chosen normalization path, then renormalize the target); tensor on
normal forms; and fraction arithmetic for the category of fractions with
equational denominators.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    CohpresError,
    MorGen,
    Path,
    Presentation,
    Relation,
    RewriteStep,
    TypeCheckError,
    Word,
    compose,
    tensor_ctx,
    validate,
)
from .objects import equational_successors, normalize
from .oracle import cells_equal
from .residuation import ResidualTable, Residuator


class TietzeRefusal(CohpresError):
    """A removal whose derivability could not be established in budget."""


# ---------------------------------------------------------------------------
# opposite, quotient, localization


def _reverse_path(p: Presentation, path: Path) -> Path:
    src = p.path_target(path)
    return Path(src, tuple(reversed(path.steps)))


def opposite(p: Presentation) -> Presentation:
    """Reverse every generator and relation; equational set carries over."""
    gens = tuple(MorGen(g.name, g.target, g.source, g.equational) for g in p.generators)
    op = Presentation(p.mode, p.objects, gens, (), dict(p.weights))
    rels = tuple(
        Relation(r.name, _reverse_path(p, r.lhs), _reverse_path(p, r.rhs))
        for r in p.relations
    )
    return Presentation(p.mode, p.objects, gens, rels, dict(p.weights))


def quotient_class_map(p: Presentation) -> dict[str, str]:
    """Object -> representative of its class under the equational zig-zag
    closure (representative = first declared member)."""
    parent = {o: o for o in p.objects}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    order = {o: i for i, o in enumerate(p.objects)}
    for g in p.generators:
        if not g.equational:
            continue
        a, b = find(g.source[0]), find(g.target[0])
        if a != b:
            lo, hi = (a, b) if order[a] < order[b] else (b, a)
            parent[hi] = lo
    return {o: find(o) for o in p.objects}


def quotient_presentation(p: Presentation) -> Presentation:
    """Identify objects along equational generators and add f => id for each
    equational f.  Path mode only.
    """
    if p.mode != "path":
        raise TypeCheckError("quotient presentation exists in path mode only")
    rep = quotient_class_map(p)
    objects = []
    for o in p.objects:
        if rep[o] == o:
            objects.append(o)
    gens = tuple(
        MorGen(g.name, (rep[g.source[0]],), (rep[g.target[0]],), False)
        for g in p.generators
    )
    quot = Presentation("path", tuple(objects), gens, ())

    def remap(path: Path) -> Path:
        return Path((rep[path.source[0]],), path.steps)

    rels = [Relation(r.name, remap(r.lhs), remap(r.rhs)) for r in p.relations]
    for g in p.generators:
        if g.equational:
            cls = (rep[g.source[0]],)
            rels.append(
                Relation(f"{g.name}_id", Path(cls, (RewriteStep((), g.name, ()),)), Path(cls, ()))
            )
    out = Presentation("path", tuple(objects), gens, tuple(rels))
    problems = validate(out)
    if problems:
        raise TypeCheckError("; ".join(problems))
    return out


def localization_presentation(p: Presentation, sigma: set[str]) -> Presentation:
    """Adjoin a formal inverse and the two invertibility relations for every
    generator in sigma."""
    unknown = sigma - set(p.gen_map)
    if unknown:
        raise TypeCheckError(f"sigma names unknown generators: {sorted(unknown)}")
    gens = list(p.generators)
    rels = list(p.relations)
    for g in p.generators:
        if g.name not in sigma:
            continue
        inv = f"{g.name}_inv"
        if inv in p.gen_map:
            raise TypeCheckError(f"name '{inv}' already taken")
        gens.append(MorGen(inv, g.target, g.source, False))
        fwd = RewriteStep((), g.name, ())
        bwd = RewriteStep((), inv, ())
        rels.append(
            Relation(f"{g.name}_invl", Path(g.source, (fwd, bwd)), Path(g.source, ()))
        )
        rels.append(
            Relation(f"{g.name}_invr", Path(g.target, (bwd, fwd)), Path(g.target, ()))
        )
    out = Presentation(p.mode, p.objects, tuple(gens), tuple(rels), dict(p.weights))
    problems = validate(out)
    if problems:
        raise TypeCheckError("; ".join(problems))
    return out


# ---------------------------------------------------------------------------
# Tietze transformations


def _without_relation(p: Presentation, name: str) -> Presentation:
    rels = tuple(r for r in p.relations if r.name != name)
    return Presentation(p.mode, p.objects, p.generators, rels, dict(p.weights))


def _uses_gen(path: Path, name: str) -> bool:
    return any(s.gen == name for s in path.steps)


def tietze_apply(
    p: Presentation, script: str, budget: int = 10_000, max_cells: int = 10
) -> Presentation:
    """Apply a script of Tietze transformations.

    Verbs: ``addgen N : W -> W := PATH``, ``rmgen N``,
    ``addrel N : PATH => PATH``, ``rmrel N``.  Removals and added relations
    must be derivable within the search budget, otherwise the transformation
    is refused (inconclusive, never unsound).
    """
    import re

    from .core import parse_path, parse_word

    cur = p
    for ln, raw in enumerate(script.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        verb = line.split(None, 1)[0]
        if verb == "addgen":
            m = re.match(r"^addgen\s+(\S+)\s*:\s*(.*?)\s*->\s*(.*?)\s*:=\s*(.*)$", line)
            if not m:
                raise TypeCheckError(f"tietze line {ln}: cannot read '{line}'")
            name, st, tt, pt = m.groups()
            if name in cur.gen_map:
                raise TypeCheckError(f"tietze line {ln}: generator '{name}' already exists")
            src = parse_word(st, cur.objects)
            tgt = parse_word(tt, cur.objects)
            body = parse_path(pt, cur)
            if body.source != src or cur.path_target(body) != tgt:
                raise TypeCheckError(f"tietze line {ln}: defining path has wrong endpoints")
            gens = cur.generators + (MorGen(name, src, tgt, False),)
            cur = Presentation(cur.mode, cur.objects, gens, cur.relations, dict(cur.weights))
            defrel = Relation(f"{name}_def", Path(src, (RewriteStep((), name, ()),)), body)
            cur = Presentation(
                cur.mode, cur.objects, cur.generators, cur.relations + (defrel,), dict(cur.weights)
            )
        elif verb == "rmgen":
            name = line.split()[1]
            if name not in cur.gen_map:
                raise TypeCheckError(f"tietze line {ln}: unknown generator '{name}'")
            defining = None
            for r in cur.relations:
                for one, other in ((r.lhs, r.rhs), (r.rhs, r.lhs)):
                    if (
                        len(one.steps) == 1
                        and one.steps[0] == RewriteStep((), name, ())
                        and not _uses_gen(other, name)
                    ):
                        defining = r
                        break
                if defining:
                    break
            if defining is None:
                raise TietzeRefusal(f"no defining relation found for generator '{name}'")
            for r in cur.relations:
                if r.name != defining.name and (_uses_gen(r.lhs, name) or _uses_gen(r.rhs, name)):
                    raise TietzeRefusal(
                        f"generator '{name}' still occurs in relation '{r.name}'"
                    )
            gens = tuple(g for g in cur.generators if g.name != name)
            rels = tuple(r for r in cur.relations if r.name != defining.name)
            cur = Presentation(cur.mode, cur.objects, gens, rels, dict(cur.weights))
        elif verb == "addrel":
            m = re.match(r"^addrel\s+(\S+)\s*:\s*(.*?)\s*=>\s*(.*)$", line)
            if not m:
                raise TypeCheckError(f"tietze line {ln}: cannot read '{line}'")
            name, lt, rt = m.groups()
            lhs = parse_path(lt, cur)
            rhs = parse_path(rt, cur)
            status, _ = cells_equal(lhs, rhs, cur, budget=budget, max_cells=max_cells)
            if status != "equal":
                raise TietzeRefusal(
                    f"relation '{name}' not derivable within budget; refusing to add"
                )
            cur = Presentation(
                cur.mode,
                cur.objects,
                cur.generators,
                cur.relations + (Relation(name, lhs, rhs),),
                dict(cur.weights),
            )
        elif verb == "rmrel":
            name = line.split()[1]
            rel = cur.relation_map.get(name)
            if rel is None:
                raise TypeCheckError(f"tietze line {ln}: unknown relation '{name}'")
            rest = _without_relation(cur, name)
            status, _ = cells_equal(rel.lhs, rel.rhs, rest, budget=budget, max_cells=max_cells)
            if status != "equal":
                raise TietzeRefusal(
                    f"relation '{name}' not derivable from the others within budget; "
                    "refusing to remove"
                )
            cur = rest
        else:
            raise TypeCheckError(f"tietze line {ln}: unknown verb '{verb}'")
    problems = validate(cur)
    if problems:
        raise TypeCheckError("; ".join(problems))
    return cur


# ---------------------------------------------------------------------------
# normal forms: objects, tensor, functor


def nf_object(x: Word, y: Word, p: Presentation) -> Word:
    """Tensor on normal forms: normalize the concatenation."""
    return normalize(x + y, p).normal


def nf_tensor(
    xhat: Word, f: Path, zhat: Word, p: Presentation, table: ResidualTable
) -> Path:
    """Action of normal-form objects on a morphism: whisker, residuate along
    the normalization of the source, renormalize the target."""
    w0 = xhat + f.source + zhat
    u = normalize(w0, p).path
    whiskered = tensor_ctx(p, xhat, f, zhat)
    res = Residuator(p, table)
    r, _ = res.pair(whiskered, u)
    v = normalize(p.path_target(r), p).path
    return compose(p, r, v)


def nf_functor_apply(f: Path, p: Presentation, table: ResidualTable) -> Path:
    """The normal-form functor on morphisms: u_target . (f / u_source)."""
    u = normalize(f.source, p).path
    res = Residuator(p, table)
    r, _ = res.pair(f, u)
    v = normalize(p.path_target(r), p).path
    return compose(p, r, v)


# ---------------------------------------------------------------------------
# fractions


@dataclass(frozen=True)
class Fraction:
    """A localization morphism: a cofinal pair (numerator, equational
    denominator).  Represents num ; den^-1."""

    num: Path
    den: Path

    def source(self) -> Word:
        return self.num.source

    def target(self) -> Word:
        return self.den.source


def check_fraction(p: Presentation, phi: Fraction) -> None:
    if p.path_target(phi.num) != p.path_target(phi.den):
        raise TypeCheckError("fraction numerator and denominator are not cofinal")
    if not p.is_equational_path(phi.den):
        raise TypeCheckError("fraction denominator must be equational")


def fraction_compose(
    phi1: Fraction, phi2: Fraction, p: Presentation, table: ResidualTable
) -> Fraction:
    """Compose via the residuation square between den1 and num2."""
    check_fraction(p, phi1)
    check_fraction(p, phi2)
    if phi1.target() != phi2.source():
        raise TypeCheckError("fractions do not compose")
    res = Residuator(p, table)
    h, w = res.pair(phi2.num, phi1.den)  # h = num2/den1, w = den1/num2
    return Fraction(compose(p, phi1.num, h), compose(p, phi2.den, w))


def _equational_extensions(p: Presentation, start: Word, max_steps: int) -> list[Path]:
    out = [Path(start, ())]
    frontier = [Path(start, ())]
    for _ in range(max_steps):
        nxt = []
        for q in frontier:
            w = p.path_target(q)
            for s in equational_successors(w, p):
                nq = Path(start, q.steps + (s,))
                nxt.append(nq)
                out.append(nq)
        frontier = nxt
    return out


def fraction_equal(
    phi1: Fraction,
    phi2: Fraction,
    p: Presentation,
    table: ResidualTable,
    budget: int = 8,
    coherent: bool = False,
    cell_budget: int = 20_000,
) -> str:
    """Decide fraction equality: 'equal', 'unequal' (at the search bound) or
    'inconclusive'.

    When the presentation is known coherent, equality reduces to comparing
    normal-form images of the numerators.  Otherwise search for a mediating
    pair of equational morphisms.
    """
    check_fraction(p, phi1)
    check_fraction(p, phi2)
    if phi1.source() != phi2.source() or phi1.target() != phi2.target():
        raise TypeCheckError("fraction_equal requires parallel fractions")
    if coherent:
        n1 = nf_functor_apply(phi1.num, p, table)
        n2 = nf_functor_apply(phi2.num, p, table)
        status, _ = cells_equal(n1, n2, p, budget=cell_budget)
        return "equal" if status == "equal" else "unequal"
    i1 = p.path_target(phi1.den)
    i2 = p.path_target(phi2.den)
    w1s = _equational_extensions(p, i1, budget)
    w2s = _equational_extensions(p, i2, budget)
    by_target: dict[Word, list[Path]] = {}
    for w2 in w2s:
        by_target.setdefault(p.path_target(w2), []).append(w2)
    for w1 in w1s:
        for w2 in by_target.get(p.path_target(w1), []):
            den_ok, _ = cells_equal(
                compose(p, phi1.den, w1), compose(p, phi2.den, w2), p, budget=cell_budget
            )
            if den_ok != "equal":
                continue
            num_ok, _ = cells_equal(
                compose(p, phi1.num, w1), compose(p, phi2.num, w2), p, budget=cell_budget
            )
            if num_ok == "equal":
                return "equal"
    return "unequal"


def _paths_from(p: Presentation, x: Word, bound: int) -> list[Path]:
    paths = [Path(x, ())]
    frontier = [Path(x, ())]
    for _ in range(bound):
        nxt = []
        for q in frontier:
            w = p.path_target(q)
            for g in p.generators:
                k = len(g.source)
                for pos in range(len(w) - k + 1):
                    if w[pos : pos + k] == g.source:
                        nq = Path(x, q.steps + (RewriteStep(w[:pos], g.name, w[pos + k :]),))
                        nxt.append(nq)
                        paths.append(nq)
        frontier = nxt
    return paths


def sample_fraction_agreement(
    p: Presentation,
    table: ResidualTable,
    normals: list[Word],
    bound: int,
    n_samples: int,
) -> dict:
    """Compare the mediating-pair search against normal-form image equality
    on sampled parallel fraction pairs."""
    small: list[Word] = [()]
    frontier: list[Word] = [()]
    for _ in range(4):
        frontier = [w + (o,) for w in frontier for o in p.objects]
        small.extend(frontier)
    srcs = [w for w in small if 3 <= len(w) <= 4][:12]
    if not srcs:
        srcs = [w for w in normals if len(w) <= 3][:4]
    dens_by_target: dict[Word, list[Path]] = {}
    for y in small:
        for u in _equational_extensions(p, y, 2):
            dens_by_target.setdefault(p.path_target(u), []).append(u)
    samples: list[tuple[Fraction, Fraction]] = []
    for x in srcs:
        fractions: list[Fraction] = []
        for num in _paths_from(p, x, min(bound, 3)):
            for den in dens_by_target.get(p.path_target(num), []):
                fractions.append(Fraction(num, den))
        by_sig: dict[tuple[Word, Word], list[Fraction]] = {}
        for phi in fractions:
            by_sig.setdefault((phi.source(), phi.target()), []).append(phi)
        for sig in sorted(by_sig, key=lambda s: (len(s[0]), s)):
            group = by_sig[sig]
            for i in range(len(group)):
                for j in range(i + 1, len(group)):
                    samples.append((group[i], group[j]))
                    if len(samples) >= n_samples:
                        break
                if len(samples) >= n_samples:
                    break
            if len(samples) >= n_samples:
                break
        if len(samples) >= n_samples:
            break
    checked = agreed = 0
    for phi1, phi2 in samples:
        slow = fraction_equal(phi1, phi2, p, table, coherent=False)
        fast = fraction_equal(phi1, phi2, p, table, coherent=True)
        checked += 1
        if slow == fast:
            agreed += 1
    return {"checked": checked, "agreed": agreed}


# ---------------------------------------------------------------------------
# left calculus of fractions


def check_left_fractions(
    p: Presentation,
    table: ResidualTable,
    bound: int = 3,
    coherent: bool = False,
    cell_budget: int = 20_000,
) -> dict:
    """Verify the four closure conditions on bounded samples."""
    out = {
        "condition1": "pass (equational morphisms compose)",
        "condition2": "pass (identities are equational)",
    }
    res = Residuator(p, table)
    words: list[Word]
    if p.mode == "path":
        words = [(o,) for o in p.objects]
    else:
        words = []
        frontier: list[Word] = [()]
        for _ in range(3):
            frontier = [w + (o,) for w in frontier for o in p.objects]
            words.extend(frontier)
    c3_fail = None
    for w in words:
        us = [u for u in _equational_extensions(p, w, bound) if u.steps]
        gs = []
        frontier_p = [Path(w, ())]
        for _ in range(bound):
            nxt = []
            for q in frontier_p:
                ww = p.path_target(q)
                for g in p.generators:
                    k = len(g.source)
                    for pos in range(len(ww) - k + 1):
                        if ww[pos : pos + k] == g.source:
                            nq = Path(w, q.steps + (RewriteStep(ww[:pos], g.name, ww[pos + k :]),))
                            nxt.append(nq)
                            gs.append(nq)
            frontier_p = nxt
        for u in us:
            for g in gs:
                try:
                    gu, ug = res.pair(g, u)
                    if p.path_target(compose(p, u, gu)) != p.path_target(compose(p, g, ug)):
                        c3_fail = f"residuals of ({p.fmt_path(u)}, {p.fmt_path(g)}) not cofinal"
                except Exception:
                    found = _bounded_completion(p, u, g, bound, cell_budget)
                    if not found:
                        c3_fail = (
                            f"no completion found for ({p.fmt_path(u)}, {p.fmt_path(g)})"
                        )
                if c3_fail:
                    break
            if c3_fail:
                break
        if c3_fail:
            break
    out["condition3"] = "pass (residuation closes sampled squares)" if not c3_fail else f"fail: {c3_fail}"
    if coherent:
        out["condition4"] = "pass (equational morphisms are epi under A1-A4)"
    else:
        out["condition4"] = _check_condition4(p, words, bound, cell_budget)
    out["overall"] = (
        "pass"
        if all(str(v).startswith("pass") for k, v in out.items() if k.startswith("condition"))
        else "fail"
    )
    return out


def _bounded_completion(p: Presentation, u: Path, g: Path, bound: int, cell_budget: int) -> bool:
    """Search cofinal (v equational, h) with v.g <=>* h.u."""
    vs = _equational_extensions(p, p.path_target(g), bound)
    hs = []
    start = p.path_target(u)
    frontier = [Path(start, ())]
    hs.append(frontier[0])
    for _ in range(bound):
        nxt = []
        for q in frontier:
            ww = p.path_target(q)
            for gen in p.generators:
                k = len(gen.source)
                for pos in range(len(ww) - k + 1):
                    if ww[pos : pos + k] == gen.source:
                        nq = Path(start, q.steps + (RewriteStep(ww[:pos], gen.name, ww[pos + k :]),))
                        nxt.append(nq)
                        hs.append(nq)
        frontier = nxt
    by_target: dict[Word, list[Path]] = {}
    for h in hs:
        by_target.setdefault(p.path_target(h), []).append(h)
    for v in vs:
        for h in by_target.get(p.path_target(v), []):
            status, _ = cells_equal(
                compose(p, g, v), compose(p, u, h), p, budget=cell_budget
            )
            if status == "equal":
                return True
    return False


def _check_condition4(p: Presentation, words: list[Word], bound: int, cell_budget: int) -> str:
    for w in words[: min(len(words), 6)]:
        us = [u for u in _equational_extensions(p, w, min(bound, 2)) if u.steps]
        for u in us:
            y = p.path_target(u)
            fs = []
            frontier = [Path(y, ())]
            for _ in range(min(bound, 2)):
                nxt = []
                for q in frontier:
                    ww = p.path_target(q)
                    for gen in p.generators:
                        k = len(gen.source)
                        for pos in range(len(ww) - k + 1):
                            if ww[pos : pos + k] == gen.source:
                                nq = Path(
                                    y, q.steps + (RewriteStep(ww[:pos], gen.name, ww[pos + k :]),)
                                )
                                nxt.append(nq)
                                fs.append(nq)
                frontier = nxt
            by_tgt: dict[Word, list[Path]] = {}
            for f in fs:
                by_tgt.setdefault(p.path_target(f), []).append(f)
            for group in by_tgt.values():
                for i in range(len(group)):
                    for j in range(i + 1, len(group)):
                        f1, f2 = group[i], group[j]
                        eq, _ = cells_equal(
                            compose(p, u, f1), compose(p, u, f2), p, budget=cell_budget
                        )
                        if eq != "equal":
                            continue
                        vs = _equational_extensions(p, p.path_target(f1), min(bound, 2))
                        ok = False
                        for v in vs:
                            s, _ = cells_equal(
                                compose(p, f1, v), compose(p, f2, v), p, budget=cell_budget
                            )
                            if s == "equal":
                                ok = True
                                break
                        if not ok:
                            return (
                                "fail: no equalizing v for "
                                f"({p.fmt_path(f1)}, {p.fmt_path(f2)}) after {p.fmt_path(u)}"
                            )
    return "pass (sampled co-equalizing morphisms found)"
