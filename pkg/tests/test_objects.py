from __future__ import annotations

from cohpres.core import parse_presentation
from cohpres.objects import (
    check_equational_termination,
    equational_successors,
    normalize,
    transposition_number,
)

from conftest import all_words


def test_successors_bbaa(ds2):
    succ = equational_successors(tuple("bbaa"), ds2)
    assert [ds2.fmt_step(s) for s in succ] == ["b[g]a"]


def test_successors_normal_form_empty(ds2):
    assert equational_successors(tuple("aabb"), ds2) == []


def test_successors_baba_ordering(ds2):
    succ = equational_successors(tuple("baba"), ds2)
    assert [ds2.fmt_step(s) for s in succ] == ["[g]ba", "ba[g]"]


def test_termination_ds2(ds2):
    v = check_equational_termination(ds2, budget=10_000)
    assert v.status == "terminating"


def test_termination_huet_cycle(huet):
    v = check_equational_termination(huet, budget=10_000)
    assert v.status == "cycle"
    assert v.cycle == (("x",), ("y",), ("x",))


def test_termination_no_equational(deltas):
    v = check_equational_termination(deltas, budget=10_000)
    assert v.status == "terminating"


def test_termination_budget_inconclusive(huet):
    v = check_equational_termination(huet, budget=1)
    assert v.status in ("cycle", "budget_exhausted")  # tiny budget never passes


def test_normalize_examples(ds2):
    r = normalize(tuple("ba"), ds2)
    assert r.normal == tuple("ab")
    assert ds2.fmt_path(r.path) == "[g]"
    assert normalize(tuple("babbaa"), ds2).normal == tuple("aaabbb")
    r2 = normalize(tuple("aabb"), ds2)
    assert r2.normal == tuple("aabb") and r2.path.steps == ()


def test_normalize_idempotent_up_to_length_6(ds2):
    for w in all_words(ds2, 6):
        again = normalize(normalize(w, ds2).normal, ds2)
        assert again.path.steps == ()


def test_normal_forms_are_sorted_words(ds2):
    for w in all_words(ds2, 6):
        nf = normalize(w, ds2).normal
        assert nf == tuple(sorted(w))  # a's before b's
        assert sorted(nf) == sorted(w)


def test_transposition_strictly_decreases_along_steps(ds2):
    for w in all_words(ds2, 6):
        before = transposition_number(w, "b", "a")
        for s in equational_successors(w, ds2):
            after = transposition_number(ds2.step_target(s), "b", "a")
            assert after < before


def test_strategy_independence_of_normal_forms(ds2):
    # Newman at desk scale: every maximal reduction ends in the same word
    def endpoints(w, memo):
        if w in memo:
            return memo[w]
        succ = equational_successors(w, ds2)
        if not succ:
            memo[w] = {w}
            return memo[w]
        acc = set()
        for s in succ:
            acc |= endpoints(ds2.step_target(s), memo)
        memo[w] = acc
        return acc

    memo: dict = {}
    for w in all_words(ds2, 6):
        ends = endpoints(w, memo)
        assert ends == {normalize(w, ds2).normal}


def test_transposition_number_values():
    assert transposition_number(tuple("babbaa"), "b", "a") == 7
    assert transposition_number(tuple("aaabbb"), "b", "a") == 0
    assert transposition_number(tuple("ba"), "b", "a") == 1


def test_termination_budget_exhausted_on_growing_rule():
    p = parse_presentation("mode monoidal\nobjects a\neqgen d : a -> a a\n")
    v = check_equational_termination(p, budget=200)
    assert v.status == "budget_exhausted"
    assert v.budget == 200
