"""Evaluator behavior: models, recursion, aggregates, explanations, errors."""
import pytest

from stratalog.engine import (
    EvaluationError,
    Inconsistent,
    NafCheck,
    NotDerivedError,
    SafetyError,
    evaluate,
    explain,
    query,
)
from stratalog.facts import Fact, Symbol, fact
from stratalog.parser import parse_program

WINDOW_TEXT = """\
#const window = 600.
#const threshold = 5.
failed_count(I, T, C) :-
    attempt(I, T),
    C = #count{T2 : attempt(I, T2), T2 >= T - window, T2 <= T}.
flagged(I, T) :- failed_count(I, T, C), C >= threshold.
"""


def attempts(ip, times):
    return [fact("attempt", ip, t) for t in times]


class TestModels:
    def test_birds_exact_model(self, birds_program):
        model, _ = evaluate(birds_program)
        assert set(model) == {
            fact("bird", Symbol("tweety")),
            fact("penguin", Symbol("polly")),
            fact("abnormal", Symbol("polly")),
            fact("can_fly", Symbol("tweety")),
        }

    def test_facts_only_program(self):
        model, _ = evaluate(parse_program("p(1). q(a, \"b\")."))
        assert set(model) == {fact("p", 1), fact("q", Symbol("a"), "b")}

    def test_extra_facts_merge_with_set_semantics(self, birds_program):
        model, _ = evaluate(
            birds_program,
            extra_facts=[fact("bird", Symbol("tweety")), fact("bird", Symbol("rex"))])
        flying = query(model, "can_fly")
        assert flying == [fact("can_fly", Symbol("rex")),
                          fact("can_fly", Symbol("tweety"))]
        assert list(model).count(fact("bird", Symbol("tweety"))) == 1

    def test_unsafe_program_raises(self):
        with pytest.raises(SafetyError):
            evaluate(parse_program("p(X) :- q(Y)."))

    def test_path_over_four_cycle(self):
        program = parse_program(
            "path(X, Y) :- edge(X, Y)."
            " path(X, Y) :- path(X, Z), edge(Z, Y)."
            " edge(1, 2). edge(2, 3). edge(3, 4). edge(4, 1).")
        model, _ = evaluate(program)
        paths = {args for args in model.atoms("path")}
        assert paths == {(a, b) for a in range(1, 5) for b in range(1, 5)}
        assert len(paths) == 16


class TestQuery:
    def test_results_sorted_by_args(self):
        model, _ = evaluate(parse_program('p(2). p("a"). p(b). p(1).'))
        assert query(model, "p") == [fact("p", 1), fact("p", 2),
                                     fact("p", Symbol("b")), fact("p", "a")]

    def test_unknown_predicate_empty(self, birds_program):
        model, _ = evaluate(birds_program)
        assert query(model, "no_such_predicate") == []


class TestAggregateWindows:
    def test_five_in_window_fires(self):
        program = parse_program(WINDOW_TEXT)
        model, _ = evaluate(program, attempts(Symbol("ip1"), [0, 100, 200, 300, 400]))
        assert fact("flagged", Symbol("ip1"), 400) in set(model)

    def test_four_in_window_does_not_fire(self):
        program = parse_program(WINDOW_TEXT)
        model, _ = evaluate(program, attempts(Symbol("ip1"), [0, 100, 200, 300]))
        assert model.atoms("flagged") == []

    def test_window_edges_inclusive(self):
        program = parse_program(WINDOW_TEXT)
        # the attempt at exactly T - window still counts
        model, _ = evaluate(
            program, attempts(Symbol("ip1"), [0, 150, 300, 450, 600]))
        assert fact("flagged", Symbol("ip1"), 600) in set(model)
        # one second older and it falls out
        model, _ = evaluate(
            program, attempts(Symbol("ip1"), [-1, 150, 300, 450, 600]))
        assert model.atoms("flagged") == []

    def test_counts_are_per_group(self):
        program = parse_program(WINDOW_TEXT)
        mixed = attempts(Symbol("ip1"), [0, 1, 2]) + attempts(Symbol("ip2"), [0, 1])
        model, _ = evaluate(program, mixed)
        counts = {(ip, t): c for ip, t, c in model.atoms("failed_count")}
        assert counts[(Symbol("ip1"), 2)] == 3
        assert counts[(Symbol("ip2"), 1)] == 2

    def test_distinct_tuples_counted_once(self):
        program = parse_program(
            "n(C) :- m(_), C = #count{X, Y : pair(X, Y)}."
            " m(0). pair(1, 1). pair(1, 2). pair(2, 1). pair(1, 1).")
        model, _ = evaluate(program)
        assert model.atoms("n") == [(3,)]

    def test_non_integer_guard_bound_never_fires(self):
        model, _ = evaluate(parse_program(
            "w(X) :- p(X), #count{T : p(T)} >= lots. p(1)."))
        assert model.atoms("w") == []


class TestComparisons:
    def test_kind_order_int_before_symbol_before_string(self):
        model, _ = evaluate(parse_program(
            'lt(X, Y) :- v(X), v(Y), X < Y. v(9). v(banana). v("apple").'))
        pairs = set(model.atoms("lt"))
        assert (9, Symbol("banana")) in pairs
        assert (Symbol("banana"), "apple") in pairs
        assert (9, "apple") in pairs
        assert len(pairs) == 3

    def test_cross_kind_equality_is_false(self):
        model, _ = evaluate(parse_program(
            'eq(X, Y) :- p(X), q(Y), X == Y. ne(X, Y) :- p(X), q(Y), X != Y.'
            ' p(1). q("1").'))
        assert model.atoms("eq") == []
        assert model.atoms("ne") == [(1, "1")]

    def test_arithmetic_works_on_integers(self):
        model, _ = evaluate(parse_program(
            "r(X) :- p(X), X + 1 > 2, X - 1 < 9. p(2). p(1)."))
        assert model.atoms("r") == [(2,)]

    def test_arithmetic_on_symbol_raises_with_position(self):
        with pytest.raises(EvaluationError, match=r"1:1: arithmetic on non-integer"):
            evaluate(parse_program("q(X) :- p(X), X + 1 > 2.\np(a)."))


class TestConstraints:
    def test_violated_constraint_returns_witness(self):
        result = evaluate(parse_program("p(5). p(2).\n:- p(X), X > 3."))
        assert isinstance(result, Inconsistent)
        assert result.witness == {"X": 5}
        assert result.constraint.span.line == 2

    def test_satisfied_constraint_returns_model(self):
        result = evaluate(parse_program("p(2).\n:- p(X), X > 3."))
        model, _ = result
        assert set(model) == {fact("p", 2)}

    def test_constraint_sees_derived_atoms(self):
        result = evaluate(parse_program(
            "q(X) :- p(X). p(7). :- q(X), X == 7."))
        assert isinstance(result, Inconsistent)


class TestExplain:
    def test_rule_node_with_naf_check(self, birds_program):
        _, graph = evaluate(birds_program)
        node = explain(graph, fact("can_fly", Symbol("tweety")))
        assert node.rule is not None
        assert node.rule.head.predicate == "can_fly"
        assert not node.is_fact
        assert node.checks == (NafCheck(fact("abnormal", Symbol("tweety"))),)
        assert str(node.checks[0]) == "not abnormal(tweety) holds"
        (child,) = node.children
        assert child.atom == fact("bird", Symbol("tweety"))
        assert child.is_fact and child.children == []

    def test_fact_node_is_leaf(self, birds_program):
        _, graph = evaluate(birds_program)
        leaf = explain(graph, fact("penguin", Symbol("polly")))
        assert leaf.is_fact and leaf.rule is None and leaf.checks == ()

    def test_underivable_atom_raises(self, birds_program):
        _, graph = evaluate(birds_program)
        with pytest.raises(NotDerivedError):
            explain(graph, fact("can_fly", Symbol("polly")))

    def test_window_explanation_shows_count_checks(self):
        program = parse_program(WINDOW_TEXT)
        _, graph = evaluate(program, attempts(Symbol("ip1"), [0, 100, 200, 300, 400]))
        flagged = explain(graph, fact("flagged", Symbol("ip1"), 400))
        assert [str(c) for c in flagged.checks] == ["5 >= 5"]
        (count_node,) = flagged.children
        assert count_node.atom == fact("failed_count", Symbol("ip1"), 400, 5)
        assert [str(c) for c in count_node.checks] == ["count 5"]
        support_atoms = {c.atom for c in count_node.children}
        assert support_atoms == {fact("attempt", Symbol("ip1"), 400)}

    def test_guard_aggregate_check_string(self):
        program = parse_program(
            "noisy(I) :- conn(I, _), #count{T : conn(I, T)} >= 3."
            " conn(a, 1). conn(a, 2). conn(a, 3).")
        _, graph = evaluate(program)
        node = explain(graph, fact("noisy", Symbol("a")))
        assert [str(c) for c in node.checks] == ["count 3 >= threshold 3"]


class TestDeterminismAndSemantics:
    def test_two_runs_identical(self, bundled_program):
        extra = [fact("login_attempt", "9.9.9.9", t, Symbol("failed"), "root")
                 for t in range(5)]
        first = evaluate(bundled_program, extra)
        second = evaluate(bundled_program, extra)
        assert list(first[0]) == list(second[0])

    def test_lower_strata_unaffected_by_higher_rules(self):
        base = ("b(X) :- a(X), X > 1. a(1). a(2). a(3).",
                "c(X) :- a(X), not b(X).")
        full, _ = evaluate(parse_program(" ".join(base)))
        lower, _ = evaluate(parse_program(base[0]))
        assert [f for f in full if f.predicate in ("a", "b")] == list(lower)

    def test_model_is_a_fixpoint(self, birds_program):
        model, _ = evaluate(birds_program)
        again, _ = evaluate(birds_program, extra_facts=list(model))
        assert set(again) == set(model)

    def test_recursive_rule_reaches_fixpoint_with_delta(self):
        edges = " ".join(f"edge({i}, {i + 1})." for i in range(30))
        program = parse_program(
            "reach(0). reach(Y) :- reach(X), edge(X, Y)." + edges)
        model, _ = evaluate(program)
        assert sorted(model.atoms("reach")) == [(i,) for i in range(31)]
