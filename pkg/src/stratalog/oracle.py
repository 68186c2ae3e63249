"""Deliberately naive reference evaluator for differential testing.

Where the production engine grounds on the fly with indexed joins and
semi-naive deltas, this oracle does the simplest thing that is credibly
correct: enumerate every substitution of each rule's variables over the
universe of constants currently in play, and sweep whole strata with
repeated full passes until nothing changes. Aggregate results are computed
(not guessed) because a count's value need not occur anywhere in the input.

The helpers here are intentionally written from scratch rather than shared
with the engine, so a bug in one implementation cannot hide in both.
"""
from __future__ import annotations

from typing import Optional, Sequence, Union

from .analysis import SafetyError, check_safety, stratify
from .engine import Inconsistent, Model
from .facts import Constant, Fact, Symbol
from .lang import (
    AggregateLiteral,
    ArithTerm,
    Atom,
    Comparison,
    NafLiteral,
    Program,
    Rule,
    Term,
    Variable,
    rule_global_variables,
    term_variables,
)

DEFAULT_MAX_GROUND = 5_000_000


class OracleCapacityError(ValueError):
    pass


class OracleEvaluationError(ValueError):
    pass


def _key(value: Constant) -> tuple:
    if isinstance(value, bool):
        raise OracleEvaluationError("boolean constant")
    if isinstance(value, int):
        return (0, value)
    if isinstance(value, Symbol):
        return (1, value.name)
    return (2, value)


def _holds(left: Constant, op: str, right: Constant) -> bool:
    if op == "==":
        return left == right
    if op == "!=":
        return left != right
    lk, rk = _key(left), _key(right)
    if op == ">=":
        return lk >= rk
    if op == "<=":
        return lk <= rk
    if op == ">":
        return lk > rk
    if op == "<":
        return lk < rk
    raise OracleEvaluationError(f"unknown operator {op!r}")


def _value(term: Term, env: dict[Variable, Constant]) -> Constant:
    if isinstance(term, Variable):
        return env[term]
    if isinstance(term, ArithTerm):
        left = _value(term.left, env)
        right = _value(term.right, env)
        if not isinstance(left, int) or not isinstance(right, int):
            raise OracleEvaluationError("arithmetic on non-integer constant")
        return left + right if term.op == "+" else left - right
    return term


def _ground_atom(atom: Atom, env: dict[Variable, Constant]) -> Fact:
    return Fact(atom.predicate, tuple(_value(t, env) for t in atom.terms))


def _universe(program: Program, model: Model) -> list[Constant]:
    seen: dict[tuple, Constant] = {}

    def note(value: Constant) -> None:
        seen.setdefault(_key(value), value)

    def note_term(term: Term) -> None:
        if isinstance(term, ArithTerm):
            note_term(term.left)
            note_term(term.right)
        elif not isinstance(term, Variable):
            note(term)

    for atom in model:
        for value in atom.args:
            note(value)
    for rule in program.rules:
        if rule.head is not None:
            for term in rule.head.terms:
                note_term(term)
        for literal in rule.body:
            if isinstance(literal, Atom):
                for term in literal.terms:
                    note_term(term)
            elif isinstance(literal, NafLiteral):
                for term in literal.atom.terms:
                    note_term(term)
            elif isinstance(literal, Comparison):
                note_term(literal.left)
                note_term(literal.right)
            elif isinstance(literal, AggregateLiteral):
                note_term(literal.bound)
                for term in literal.aggregate.elements:
                    note_term(term)
                for cond in literal.aggregate.condition:
                    if isinstance(cond, Atom):
                        for term in cond.terms:
                            note_term(term)
                    else:
                        note_term(cond.left)
                        note_term(cond.right)
    return [seen[k] for k in sorted(seen)]


def _assignment_variables(rule: Rule) -> set[Variable]:
    produced: set[Variable] = set()
    for literal in rule.body:
        if isinstance(literal, AggregateLiteral) and literal.is_assignment:
            assert isinstance(literal.bound, Variable)
            produced.add(literal.bound)
    return produced


def _aggregate_locals(literal: AggregateLiteral, enumerated: Sequence[Variable],
                      produced: set[Variable]) -> list[Variable]:
    outer = set(enumerated) | produced
    locals_: dict[Variable, None] = {}
    agg = literal.aggregate
    for term in agg.elements:
        for var in term_variables(term):
            if var not in outer:
                locals_.setdefault(var)
    for cond in agg.condition:
        terms = cond.terms if isinstance(cond, Atom) else (cond.left, cond.right)
        for term in terms:
            for var in term_variables(term):
                if var not in outer:
                    locals_.setdefault(var)
    return list(locals_)


def _count(literal: AggregateLiteral, env: dict[Variable, Constant],
           local_vars: Sequence[Variable], universe: Sequence[Constant],
           model: Model) -> int:
    agg = literal.aggregate
    elements: set[tuple] = set()

    def assign(i: int) -> None:
        if i == len(local_vars):
            for cond in agg.condition:
                if isinstance(cond, Atom):
                    if _ground_atom(cond, env) not in model:
                        return
                elif not _holds(_value(cond.left, env), cond.op, _value(cond.right, env)):
                    return
            element = tuple(_value(t, env) for t in agg.elements)
            elements.add(tuple(_key(v) for v in element))
            return
        for value in universe:
            env[local_vars[i]] = value
            assign(i + 1)
        del env[local_vars[i]]

    assign(0)
    return len(elements)


def _body_holds(rule: Rule, env: dict[Variable, Constant],
                universe: Sequence[Constant], model: Model,
                enumerated: Sequence[Variable],
                produced: set[Variable]) -> bool:
    deferred: list = []
    # First the literals whose variables are all enumerated; anything that
    # mentions a computed aggregate result waits until the count is known.
    for literal in rule.body:
        if isinstance(literal, AggregateLiteral):
            continue
        if isinstance(literal, Atom):
            needed = {v for t in literal.terms for v in term_variables(t)}
        elif isinstance(literal, NafLiteral):
            needed = {v for t in literal.atom.terms for v in term_variables(t)}
        else:
            needed = set(term_variables(literal.left)) | set(term_variables(literal.right))
        if needed & produced:
            deferred.append(literal)
            continue
        if isinstance(literal, Atom):
            if _ground_atom(literal, env) not in model:
                return False
        elif isinstance(literal, NafLiteral):
            if _ground_atom(literal.atom, env) in model:
                return False
        elif not _holds(_value(literal.left, env), literal.op, _value(literal.right, env)):
            return False
    for literal in rule.body:
        if not isinstance(literal, AggregateLiteral):
            continue
        local_vars = _aggregate_locals(literal, enumerated, produced)
        count = _count(literal, dict(env), local_vars, universe, model)
        if literal.is_assignment:
            assert isinstance(literal.bound, Variable)
            if literal.bound in env:
                if env[literal.bound] != count:
                    return False
            else:
                env[literal.bound] = count
        else:
            bound = _value(literal.bound, env)
            if not isinstance(bound, int) or not _holds(count, literal.op, bound):
                return False
    for literal in deferred:
        if isinstance(literal, Atom):
            if _ground_atom(literal, env) not in model:
                return False
        elif isinstance(literal, NafLiteral):
            if _ground_atom(literal.atom, env) in model:
                return False
        elif not _holds(_value(literal.left, env), literal.op, _value(literal.right, env)):
            return False
    return True


def _rule_cost(rule: Rule, enumerated: Sequence[Variable], produced: set[Variable],
               universe_size: int) -> int:
    cost = universe_size ** len(enumerated)
    inner = 1
    for literal in rule.body:
        if isinstance(literal, AggregateLiteral):
            locals_ = _aggregate_locals(literal, enumerated, produced)
            inner += universe_size ** len(locals_)
    return cost * inner


def _pass_rule(rule: Rule, universe: Sequence[Constant], model: Model,
               witness_only: bool = False) -> Union[list[Fact], Optional[dict]]:
    produced = _assignment_variables(rule)
    enumerated = [v for v in rule_global_variables(rule) if v not in produced]
    derived: list[Fact] = []
    env: dict[Variable, Constant] = {}

    def assign(i: int):
        if i == len(enumerated):
            scratch = dict(env)
            if _body_holds(rule, scratch, universe, model, enumerated, produced):
                if witness_only:
                    return scratch
                assert rule.head is not None
                derived.append(_ground_atom(rule.head, scratch))
            return None
        for value in universe:
            env[enumerated[i]] = value
            found = assign(i + 1)
            if found is not None:
                return found
        env.pop(enumerated[i], None)
        return None

    found = assign(0)
    if witness_only:
        return found
    return derived


def naive_oracle(program: Program,
                 extra_facts: Sequence[Fact] = (),
                 max_ground: int = DEFAULT_MAX_GROUND,
                 ) -> Union[Model, Inconsistent]:
    """Reference implementation of :func:`stratalog.engine.evaluate`.

    Refuses inputs whose per-pass grounding work exceeds ``max_ground``
    substitutions (:class:`OracleCapacityError`).
    """
    violations = check_safety(program)
    if violations:
        raise SafetyError(violations)
    stratification = stratify(program)

    model = Model()
    for f in list(program.facts) + list(extra_facts):
        model.add(f)

    by_level: dict[int, list[Rule]] = {}
    constraints: list[Rule] = []
    for rule in program.rules:
        if rule.head is None:
            constraints.append(rule)
        else:
            by_level.setdefault(stratification.level[rule.head.predicate], []).append(rule)

    for level in range(len(stratification.strata)):
        rules = by_level.get(level, [])
        if not rules:
            continue
        changed = True
        while changed:
            changed = False
            universe = _universe(program, model)
            cost = sum(
                _rule_cost(rule, [v for v in rule_global_variables(rule)
                                  if v not in _assignment_variables(rule)],
                           _assignment_variables(rule), len(universe))
                for rule in rules)
            if cost > max_ground:
                raise OracleCapacityError(
                    f"full grounding needs ~{cost} substitutions (limit {max_ground})")
            for rule in rules:
                for atom in _pass_rule(rule, universe, model):
                    if model.add(atom):
                        changed = True

    universe = _universe(program, model)
    for rule in constraints:
        witness = _pass_rule(rule, universe, model, witness_only=True)
        if witness is not None:
            binding = {str(var): value for var, value in sorted(
                witness.items(), key=lambda item: item[0].name)
                if not var.is_anonymous}
            return Inconsistent(rule, binding)
    return model
