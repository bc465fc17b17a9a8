"""The abstract rewriting system on object words induced by equational rules.

Equational generators rewrite factors of words; this module answers
reachability questions about that system: which steps apply to a word,
whether the system terminates on the explored universe, and what the chosen
normalization path of a word is (leftmost step, ties broken by generator
declaration order).
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import CohpresError, Path, Presentation, RewriteStep, Word


@dataclass(frozen=True)
class NormalizationResult:
    input: Word
    normal: Word
    path: Path  # all steps equational, input -> normal


@dataclass(frozen=True)
class TerminationVerdict:
    status: str  # "terminating" | "cycle" | "budget_exhausted"
    explored: int
    cycle: tuple[Word, ...] = ()
    budget: int = 0


class BudgetExhausted(CohpresError):
    pass


def equational_successors(w: Word, p: Presentation) -> list[RewriteStep]:
    """All equational steps applicable to ``w``.

    Ordered by (left-context length, generator declaration order) so the
    first element is the canonical next step of the normalization strategy.
    """
    out: list[tuple[int, int, RewriteStep]] = []
    for gi, g in enumerate(p.generators):
        if not g.equational:
            continue
        k = len(g.source)
        for pos in range(len(w) - k + 1):
            if w[pos : pos + k] == g.source:
                out.append((pos, gi, RewriteStep(w[:pos], g.name, w[pos + k :])))
    out.sort(key=lambda t: (t[0], t[1]))
    return [s for _, _, s in out]


def _seed_words(p: Presentation, max_len: int) -> list[Word]:
    seeds: list[Word] = []
    seen: set[Word] = set()

    def add(w: Word) -> None:
        if w not in seen:
            seen.add(w)
            seeds.append(w)

    for g in p.generators:
        add(g.source)
        add(g.target)
    for r in p.relations:
        add(r.lhs.source)
        add(p.path_target(r.lhs))
    if p.mode == "path":
        for o in p.objects:
            add((o,))
    else:
        frontier: list[Word] = [()]
        add(())
        for _ in range(max_len):
            nxt = []
            for w in frontier:
                for o in p.objects:
                    ww = w + (o,)
                    nxt.append(ww)
                    add(ww)
            frontier = nxt
    return seeds


def check_equational_termination(
    p: Presentation, budget: int = 10_000, max_len: int = 6
) -> TerminationVerdict:
    """Exhaustively explore the equational step graph and look for cycles.

    The universe is every word reachable from generator/relation endpoint
    words plus (in monoidal mode) all words of length at most ``max_len``.
    A ``budget_exhausted`` verdict is inconclusive, never a pass.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    GRAY, BLACK = 1, 2
    color: dict[Word, int] = {}
    succs: dict[Word, list[Word]] = {}
    explored = 0
    for seed in _seed_words(p, max_len):
        if color.get(seed) == BLACK:
            continue
        color[seed] = GRAY
        explored += 1
        chain: list[Word] = [seed]
        cursor: list[int] = [0]
        while chain:
            w = chain[-1]
            if w not in succs:
                succs[w] = [p.step_target(s) for s in equational_successors(w, p)]
            kids = succs[w]
            if cursor[-1] < len(kids):
                child = kids[cursor[-1]]
                cursor[-1] += 1
                state = color.get(child)
                if state == GRAY:
                    witness = tuple(chain[chain.index(child) :]) + (child,)
                    return TerminationVerdict("cycle", explored, cycle=witness)
                if state == BLACK:
                    continue
                if explored >= budget:
                    return TerminationVerdict("budget_exhausted", explored, budget=budget)
                color[child] = GRAY
                explored += 1
                chain.append(child)
                cursor.append(0)
            else:
                color[w] = BLACK
                chain.pop()
                cursor.pop()
    return TerminationVerdict("terminating", explored)


def normalize(w: Word, p: Presentation, max_steps: int = 10_000) -> NormalizationResult:
    """Rewrite ``w`` with the deterministic strategy until no rule applies."""
    cur = w
    steps: list[RewriteStep] = []
    for _ in range(max_steps):
        nxt = equational_successors(cur, p)
        if not nxt:
            return NormalizationResult(w, cur, Path(w, tuple(steps)))
        steps.append(nxt[0])
        cur = p.step_target(nxt[0])
    raise BudgetExhausted(
        f"normalization of {p.fmt_word(w)} did not finish within {max_steps} steps"
    )


def transposition_number(w: Word, b: str, a: str) -> int:
    """Number of pairs i < j with w[i] = b and w[j] = a."""
    count = 0
    bs = 0
    for letter in w:
        if letter == b:
            bs += 1
        if letter == a:
            count += bs
    return count
