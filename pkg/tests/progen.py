"""Random generator of safe, stratified programs for differential testing.

Programs are built in layers: layer-0 predicates get facts, higher-layer
rule heads may use same-layer predicates positively (recursion) but only
strictly lower layers under negation or inside aggregates. That makes
every generated program safe and stratified by construction, so both
evaluators must accept it and agree on the model.

Two flavors keep the engines' arithmetic semantics comparable: "arith"
programs draw constants from integers only and may use +/- inside guards;
"mixed" programs draw from all three constant kinds but never do
arithmetic, since adding a symbol is a runtime error by design.

Sizes stay small (few variables, a handful of constants) so the naive
oracle's full grounding stays cheap; the caps match the documented limits
(at most 8 predicates, arity 3, 30 facts, 10 rules, 1 aggregate per rule).
"""
from __future__ import annotations

import random
from dataclasses import dataclass

INT_PALETTE = ["0", "1", "2", "3"]
SYM_PALETTE = ["a", "b"]
STR_PALETTE = ['"x"', '"y"']

COMPARE_OPS = ("==", "!=", ">=", "<=", ">", "<")
GUARD_OPS = (">=", "<=", ">", "<", "==")


@dataclass(frozen=True)
class _Pred:
    name: str
    arity: int
    layer: int


def _weighted_arity(rng: random.Random) -> int:
    roll = rng.random()
    if roll < 0.40:
        return 1
    if roll < 0.85:
        return 2
    return 3


def generate_program(seed: int) -> str:
    rng = random.Random(seed)
    arith_mode = rng.random() < 0.5
    palette = list(INT_PALETTE) if arith_mode \
        else INT_PALETTE + SYM_PALETTE + STR_PALETTE

    def const() -> str:
        return rng.choice(palette)

    npreds = rng.randint(3, 8)
    preds: list[_Pred] = []
    for i in range(npreds):
        layer = 0 if i == 0 else rng.choice((0, 0, 1, 1, 2, 3))
        preds.append(_Pred(f"p{i}", _weighted_arity(rng), layer))
    if all(p.layer == 0 for p in preds):
        preds[-1] = _Pred(preds[-1].name, preds[-1].arity, 1)

    rule_heads = [p for p in preds if p.layer > 0]
    fact_preds = [p for p in preds if p.layer == 0]

    lines: list[str] = []

    nrules = rng.randint(3, 10)
    for _ in range(nrules):
        head = rng.choice(rule_heads)
        lower = [p for p in preds if p.layer < head.layer]
        same_or_lower = [p for p in preds if p.layer <= head.layer and p is not head] + [head]

        nvars = 3 if rng.random() < 0.15 else 2
        pool = [f"V{i}" for i in range(nvars)]

        body: list[str] = []
        bound: list[str] = []

        n_pos = 1 + (rng.random() < 0.45)
        for _ in range(n_pos):
            pred = rng.choice(same_or_lower)
            args = []
            for _ in range(pred.arity):
                if rng.random() < 0.8:
                    var = rng.choice(pool)
                    args.append(var)
                    if var not in bound:
                        bound.append(var)
                else:
                    args.append(const())
            body.append(f"{pred.name}({','.join(args)})")

        def bound_or_const() -> str:
            if bound and rng.random() < 0.7:
                return rng.choice(bound)
            return const()

        if rng.random() < 0.3:
            # one aggregate per rule at most
            cond_pred = rng.choice(lower)
            local = "L0"
            cond_args = [bound_or_const() for _ in range(cond_pred.arity)]
            cond_args[rng.randrange(cond_pred.arity)] = local
            condition = f"{cond_pred.name}({','.join(cond_args)})"
            if rng.random() < 0.3:
                condition += f", {local} {rng.choice(COMPARE_OPS)} {bound_or_const()}"
            if bound and rng.random() < 0.3:
                elements = f"{local},{rng.choice(bound)}"
            else:
                elements = local
            k = rng.choice((1, 1, 2, 2, 3))
            if rng.random() < 0.5:
                body.append(f"#count{{{elements} : {condition}}} {rng.choice(GUARD_OPS)} {k}")
            else:
                body.append(f"C = #count{{{elements} : {condition}}}")
                body.append(f"C {rng.choice(('>=', '<=', '>', '=='))} {k}")
                bound.append("C")

        if lower and rng.random() < 0.35:
            pred = rng.choice(lower)
            args = [bound_or_const() for _ in range(pred.arity)]
            body.append(f"not {pred.name}({','.join(args)})")

        if rng.random() < 0.4:
            left = bound_or_const()
            if arith_mode and bound and rng.random() < 0.3:
                left = f"{rng.choice(bound)} {rng.choice('+-')} {rng.choice(INT_PALETTE)}"
            body.append(f"{left} {rng.choice(COMPARE_OPS)} {bound_or_const()}")

        head_args = [bound_or_const() for _ in range(head.arity)]
        # shuffling exercises body-ordering logic; both evaluators must be
        # insensitive to the written order
        rng.shuffle(body)
        lines.append(f"{head.name}({','.join(head_args)}) :- {', '.join(body)}.")

    nfacts = rng.randint(6, 30)
    for _ in range(nfacts):
        pred = rng.choice(fact_preds)
        args = [const() for _ in range(pred.arity)]
        lines.append(f"{pred.name}({','.join(args)}).")

    return "\n".join(lines) + "\n"


if __name__ == "__main__":
    import sys
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
    print(generate_program(seed))
