"""The rule language: facts, rules, negation, aggregates, constraints.

Programs are plain text.  A rule derives its head when every body literal
holds; `not p(...)` holds when p is *underivable* (negation as failure);
`#count{...}` counts distinct matches; a headless rule is a constraint that
makes the whole program inconsistent if its body is ever satisfied.
"""
from stratalog import (
    check_safety,
    format_program,
    parse_program,
    stratify,
)

TEXT = """\
% A small access-policy example.
#const quorum = 2.

% Facts: who vouches for whom, and who is banned.
vouch(alice, carol).  vouch(bob, carol).
vouch(carol, dave).
banned(mallory).

% Count distinct vouchers; admit anyone at quorum who is not banned.
support(P, N) :- vouch(_, P), N = #count{V : vouch(V, P)}.
admitted(P) :- support(P, N), N >= quorum, not banned(P).

% Admission is transitive along vouching, bans still apply.
admitted(P) :- admitted(Q), vouch(Q, P), not banned(P).

% Policy invariant: a banned person must never end up admitted.
:- admitted(P), banned(P).
"""

program = parse_program(TEXT)
print(f"parsed: {len(program.rules)} rules, {len(program.facts)} facts, "
      f"consts {program.consts}")

# --- safety ----------------------------------------------------------------
# Every variable must be bound by a positive body atom (or an aggregate
# assignment) before it is used in the head, a negation, or a comparison.
print("safety violations:", check_safety(program) or "none")

bad = parse_program("reachable(X, Y) :- edge(X, Z).")
for violation in check_safety(bad):
    print(f"unsafe example: variable {violation.variable} {violation.reason} "
          f"in: {violation.rule}")

# --- stratification ---------------------------------------------------------
# Negation and counting must look only at already-finished predicates, so
# predicates are layered; each layer is evaluated to fixpoint in order.
layers = stratify(program)
print("\nevaluation layers:")
for index, group in enumerate(layers.strata):
    print(f"  level {index}: {', '.join(group)}")

# A program where negation feeds its own cycle has no unique meaning and is
# rejected outright:
try:
    stratify(parse_program("p(X) :- q(X), not p(X). q(1)."))
except ValueError as exc:
    print(f"\nrejected: {exc}")

# --- round-tripping ----------------------------------------------------------
# Programs can be pretty-printed and re-parsed without loss.
assert parse_program(format_program(program)) == program
print("\npretty-print round-trip: ok")
