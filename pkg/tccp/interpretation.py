"""Interpretations: maps from most general calls to sequence sets, modulo variance."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Dict, FrozenSet, Generic, Iterable, Iterator, List, Mapping, Optional, Tuple, TypeVar

from core.constraints import TT, Arith, Constraint, IntCmp, Num, Term, TermEq, Tok, TokenEq, Var, entails, make, merge
from tccp.syntax import Agent, Call, CallPattern, Declaration, Hide, Par, Tell

S = TypeVar("S")


@dataclass(frozen=True)
class Resolution:
    """
    How a call reads an interpretation entry.

    Attributes:
        key (CallPattern): Entry the call resolved to.
        mapping (Dict[str, str]): Renaming of the key's parameters to the call's arguments.
        bindings (Tuple[Tuple[str, Term], ...]): Parameters that received a literal; the entry
            must be instantiated with ``var = literal`` and the variable hidden.
    """

    key: CallPattern
    mapping: Dict[str, str]
    bindings: Tuple[Tuple[str, Term], ...] = ()


def binding_constraint(var: str, literal: Term) -> Constraint:
    if isinstance(literal, Num):
        return make([IntCmp(var, "=", literal.value)])
    if isinstance(literal, Tok):
        return make([TokenEq(var, literal.value)])
    raise ValueError(f"not a literal: {literal}")


@dataclass(frozen=True)
class CallCase:
    """
    One way a call with arithmetic arguments resolves.

    Either an argument evaluates to a literal some key is specialized on (the
    caller's store must entail ``guard``), or it is none of those literals
    (the store must entail no member of ``refused``) and is passed through a
    hidden local bound by ``local = n - 1``.

    Attributes:
        call (Call): The call with literals and locals in place of arithmetic.
        guard (Constraint): What the store must entail for this case.
        refused (FrozenSet[Constraint]): What the store must not entail.
        locals (Tuple[Tuple[str, Arith], ...]): Hidden locals and the expressions they stand for.
    """

    call: Call
    guard: Constraint = TT
    refused: FrozenSet[Constraint] = frozenset()
    locals: Tuple[Tuple[str, Arith], ...] = ()

    @property
    def agent(self) -> Agent:
        agent: Agent = self.call
        for local, term in reversed(self.locals):
            agent = Hide(local, Par(Tell(make([TermEq(local, term)])), agent))
        return agent


def literal_values(keys: Iterable[CallPattern], proc: str, arity: int, position: int) -> List[int]:
    """Integers the keys of ``proc/arity`` are specialized on at ``position``."""
    found = set()
    for key in keys:
        if key.proc == proc and key.arity == arity and isinstance(key.params[position], Num):
            found.add(key.params[position].value)
    return sorted(found)


def call_cases(call: Call, keys: Iterable[CallPattern]) -> List[CallCase]:
    """
    Split a call on the literal values its arithmetic arguments may take.

    ``time-out(n - 1)`` against keys ``time-out(0)`` and ``time-out(n)`` gives
    ``time-out(0)`` under ``n = 1`` and ``time-out(n')`` with ``n' = n - 1``
    while ``n = 1`` is refused. A call without arithmetic is its own only case.
    """
    if not any(isinstance(a, Arith) for a in call.args):
        return [CallCase(call)]
    keys = list(keys)
    options = []
    for i, arg in enumerate(call.args):
        if not isinstance(arg, Arith):
            options.append([(arg, TT, frozenset(), ())])
            continue
        pinned = [(v, make([IntCmp(arg.var, "=", v - arg.offset)])) for v in literal_values(keys, call.proc, len(call.args), i)]
        choices = [(Num(v), c, frozenset(), ()) for v, c in pinned]
        local = f"{arg.var}#val{i}"
        choices.append((Var(local), TT, frozenset(c for _v, c in pinned), ((local, arg),)))
        options.append(choices)
    cases = []
    for combo in product(*options):
        guard = TT
        for _arg, c, _refused, _locals in combo:
            guard = merge(guard, c)
        refused = frozenset().union(*(r for _arg, _c, r, _bound in combo))
        if guard.bottom or any(entails(guard, r) for r in refused):
            continue
        locals_ = tuple(pair for _arg, _c, _r, bound in combo for pair in bound)
        cases.append(CallCase(Call(call.proc, tuple(a for a, _c, _r, _bound in combo)), guard, refused, locals_))
    return cases


def _matches(key: CallPattern, call: Call) -> bool:
    if key.proc != call.proc or key.arity != len(call.args):
        return False
    return all(isinstance(p, Var) or p == a for p, a in zip(key.params, call.args))


class Interpretation(Generic[S]):
    """
    Entries keyed by call pattern; patterns with the same shape are the same key.

    Literal keys such as ``time-out(0)`` are separate entries, preferred over
    the general key whenever the call's literal arguments match them.
    """

    def __init__(self, entries: Mapping[CallPattern, FrozenSet[S]]):
        self.entries: Dict[CallPattern, FrozenSet[S]] = dict(entries)

    def __getitem__(self, key: CallPattern) -> FrozenSet[S]:
        return self.entries[key]

    def __iter__(self) -> Iterator[CallPattern]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Interpretation) and self.entries == other.entries

    def items(self):
        return self.entries.items()

    def keys(self) -> List[CallPattern]:
        return sorted(self.entries, key=str)

    def key_for(self, pattern: CallPattern) -> Optional[CallPattern]:
        for key in self.entries:
            if key.shape == pattern.shape:
                return key
        return None

    def resolve(self, call: Call) -> Optional[Resolution]:
        candidates = [k for k in self.entries if _matches(k, call)]
        if not candidates:
            return None
        key = max(candidates, key=lambda k: (sum(not isinstance(p, Var) for p in k.params), str(k)))
        mapping: Dict[str, str] = {}
        bindings: List[Tuple[str, Term]] = []
        for i, (param, arg) in enumerate(zip(key.params, call.args)):
            if not isinstance(param, Var):
                continue
            if isinstance(arg, Var):
                mapping[param.name] = arg.name
            else:
                local = f"{param.name}#arg{i}"
                mapping[param.name] = local
                bindings.append((local, arg))
        return Resolution(key, mapping, tuple(bindings))


def declaration_keys(declarations: List[Declaration]) -> Dict[tuple, CallPattern]:
    """First head seen per shape; later heads of the same shape are renamed onto it."""
    keys: Dict[tuple, CallPattern] = {}
    for decl in declarations:
        keys.setdefault(decl.head.shape, decl.head)
    return keys


def head_renaming(decl: Declaration, key: CallPattern) -> Dict[str, str]:
    return {
        p.name: k.name
        for p, k in zip(decl.head.params, key.params)
        if isinstance(p, Var) and isinstance(k, Var) and p.name != k.name
    }
