"""Evaluating programs: models, queries, explanations, inconsistency.

evaluate() computes the unique model of a stratified program bottom-up and
records, for every derived atom, the first rule instance that produced it.
explain() replays that record as a tree: supporting atoms as children plus
the negation / comparison / count checks the rule instance passed.
"""
from stratalog import Inconsistent, evaluate, explain, parse_program, query

# The classic default-reasoning example: birds fly unless proven abnormal.
BIRDS = """\
can_fly(X) :- bird(X), not abnormal(X).
abnormal(X) :- penguin(X).
bird(tweety).
penguin(polly).
"""

model, graph = evaluate(parse_program(BIRDS))
print("model:", ", ".join(str(atom) for atom in model))

# Note what is *not* in the model: penguins are never declared birds here,
# so polly neither flies nor appears as a bird — only as abnormal.

# query() returns the atoms of one predicate, sorted:
print("can_fly:", query(model, "can_fly"))
print("swims:  ", query(model, "swims"), "(unknown predicates are empty)")

# --- why does tweety fly? --------------------------------------------------
def show(node, depth=1):
    origin = "input fact" if node.is_fact else f"rule at {node.rule.span.line}:{node.rule.span.column}"
    print("  " * depth + f"{node.atom}  [{origin}]")
    for child in node.children:
        show(child, depth + 1)
    for check in node.checks:
        print("  " * (depth + 1) + f"check: {check}")

tweety = query(model, "can_fly")[0]
print("\nderivation of", tweety)
show(explain(graph, tweety))

# --- recursion --------------------------------------------------------------
# Rules may be recursive as long as negation/counting stays acyclic.
GRAPH = """\
path(X, Y) :- edge(X, Y).
path(X, Y) :- path(X, Z), edge(Z, Y).
edge(a, b). edge(b, c). edge(c, a).
"""
reach, _ = evaluate(parse_program(GRAPH))
print(f"\n3-cycle reachability: {len(reach.atoms('path'))} path atoms "
      "(every node reaches every node)")

# --- constraints -------------------------------------------------------------
# A violated constraint does not raise: it returns an Inconsistent result
# carrying the constraint and one witness binding, so callers can report it.
# (Declaring polly a bird makes her both bird and abnormal, which the added
# invariant forbids.)
POLICY = BIRDS + """\
:- bird(X), abnormal(X).
bird(polly).
"""
result = evaluate(parse_program(POLICY))
assert isinstance(result, Inconsistent)
print(f"\nabnormal bird rejected: constraint at line "
      f"{result.constraint.span.line}, witness {result.witness}")
