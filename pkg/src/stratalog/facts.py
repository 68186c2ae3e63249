"""Ground facts and the constants they are built from.

A fact is a predicate name applied to constants. Constants come in three
kinds: integers, symbols (bare lowercase identifiers such as ``failed`` or
``opened``) and strings (quoted, used for IPs and usernames). The same
representation serves as the ground-atom currency of the rule engine.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import IO, Iterable, Union

_SYMBOL_RE = re.compile(r"[a-z][A-Za-z0-9_]*\Z")


@dataclass(frozen=True, slots=True)
class Symbol:
    """A bare lowercase identifier constant, distinct from the string kind."""

    name: str

    def __post_init__(self) -> None:
        if not _SYMBOL_RE.match(self.name):
            raise ValueError(f"invalid symbol: {self.name!r}")

    def __str__(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"Symbol({self.name!r})"


# int, Symbol, or str (in serialized form: 42, failed, "218.188.2.4")
Constant = Union[int, Symbol, str]


def constant_key(value: Constant) -> tuple:
    """Sort key for the kind-first total order: integers < symbols < strings."""
    if isinstance(value, bool):
        raise TypeError("booleans are not constants")
    if isinstance(value, int):
        return (0, value)
    if isinstance(value, Symbol):
        return (1, value.name)
    if isinstance(value, str):
        return (2, value)
    raise TypeError(f"not a constant: {value!r}")


def format_constant(value: Constant) -> str:
    """Serialize a constant; strings are double-quoted with backslash escapes."""
    if isinstance(value, bool):
        raise TypeError("booleans are not constants")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Symbol):
        return value.name
    if isinstance(value, str):
        escaped = (value.replace("\\", "\\\\").replace('"', '\\"')
                   .replace("\n", "\\n").replace("\t", "\\t"))
        return f'"{escaped}"'
    raise TypeError(f"not a constant: {value!r}")


@dataclass(frozen=True, slots=True)
class Fact:
    """A ground atom: predicate name plus constant arguments."""

    predicate: str
    args: tuple[Constant, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(format_constant(a) for a in self.args)})"

    def sort_key(self) -> tuple:
        return (self.predicate, tuple(constant_key(a) for a in self.args))


def fact(predicate: str, *args: Constant) -> Fact:
    """Convenience constructor: ``fact("session", "cyrus", 0, Symbol("opened"), t)``."""
    return Fact(predicate, tuple(args))


def format_fact(f: Fact) -> str:
    """One serialized fact statement, terminator included: ``pred(a,b).``"""
    return f"{f}."


def write_facts_file(facts: Iterable[Fact], sink: IO[str]) -> None:
    """Write facts one per line in input order, ``pred(arg1,...,argN).`` each."""
    for f in facts:
        sink.write(format_fact(f))
        sink.write("\n")
