"""
AST, parsers and pretty-printer for tccp programs and behavior specifications.

Programs are lists of items::

    global system : {ok}.
    sort x : stream.
    action :- tell(alert = no).
    init time-out(0).

Specification files map call patterns to sets of sequences written in the
textual tuple syntax shared with the semantic printers::

    spec action = { <tt | {}> tt -> alert = no ; box }.
    external env/1.

The full grammar is documented in ``docs/grammar.md``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Set, Tuple, Union

from lark import Lark, Token, Tree
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken

from core.constraints import (
    FF,
    TT,
    Anon,
    Arith,
    Atom,
    Constraint,
    IntCmp,
    Num,
    StreamCons,
    Term,
    TermEq,
    Tok,
    TokenEq,
    Var,
    hide,
    make,
    merge_all,
    rename_term,
    show_negatives,
    term_vars,
)
from core.errors import TccpSyntaxError, TccpValidationError, UnknownProcessError

_GRAMMAR = r"""
    program:        _item*
    _item:          global_decl | sort_decl | declaration | init_decl
    global_decl:    "global" NAME ":" sort "."
    sort_decl:      "sort" NAME ":" sort "."
    sort:           "int"                                   -> int_sort
                  | "stream"                                -> stream_sort
                  | "{" NAME ("," NAME)* "}"                -> token_sort
    declaration:    head ":-" agent "."
    init_decl:      "init" agent "."
    head:           NAME
                  | NAME "(" arg ("," arg)* ")"
    arg:            NAME                                    -> arg_name
                  | SIGNED_INT                              -> arg_int
                  | NAME "+" SIGNED_INT                     -> arg_plus
                  | NAME "-" SIGNED_INT                     -> arg_minus

    ?agent:         choice
                  | agent "||" choice                       -> par
    ?choice:        unary
                  | choice "+" unary                        -> plus
    ?unary:         "skip"                                  -> skip
                  | "tell" "(" constraint ")"               -> tell
                  | "ask" "(" constraint "->" agent ")"     -> ask
                  | "now" constraint "then" unary "else" unary -> now
                  | "hide" NAME "in" unary                  -> hide
                  | head                                    -> call
                  | "(" agent ")"

    constraint:     "tt"                                    -> c_tt
                  | "ff"                                    -> c_ff
                  | _catom ("," _catom)*                    -> c_conj
    _catom:         atom | exists
    exists:         "exists" NAME "(" constraint ")"
    atom:           NAME "=" term                           -> eq_atom
                  | NAME "=" "[" term "|" term "]"          -> cons_atom
                  | NAME cmp_op SIGNED_INT                  -> cmp_atom
                  | NAME last_op SIGNED_INT                 -> last_atom
    !cmp_op:        "<=" | ">=" | "<" | ">" | "≤" | "≥"
    !last_op:       ".<=" | ".>=" | ".<" | ".>" | ".="
    term:           NAME                                    -> t_name
                  | SIGNED_INT                              -> t_int
                  | "_"                                     -> t_anon
                  | NAME "+" SIGNED_INT                     -> t_plus
                  | NAME "-" SIGNED_INT                     -> t_minus

    spec:           _spec_item*
    _spec_item:     spec_entry | external_decl
    spec_entry:     "spec" head "=" "{" (sequence ("," sequence)*)? "}" "."
    external_decl:  "external" NAME "/" SIGNED_INT "."
    sequence:       (_tuple ";")* terminator
    terminator:     "box"                                   -> box
                  | "..."                                   -> open
    _tuple:         step | stutter
    step:           "<" constraint "|" neg_set ">" constraint "->" constraint count?
    stutter:        "stutt" neg_set count?
    neg_set:        "{" (neg_member ("," neg_member)*)? "}"
    neg_member:     _catom                                  -> neg_single
                  | "(" constraint ")"                      -> neg_group
    count:          "^" SIGNED_INT                          -> count_int
                  | "^" "inf"                               -> count_inf

    NAME:           /[a-z][a-zA-Z0-9_]*(-[a-zA-Z][a-zA-Z0-9_]*)*'*/
    COMMENT:        /%[^\n]*/

    %import common (SIGNED_INT, WS)
    %ignore WS
    %ignore COMMENT
"""

_PARSER = Lark(
    _GRAMMAR,
    start=["program", "spec"],
    parser="lalr",
    lexer="contextual",
    propagate_positions=True,
)

INF = math.inf


def base_name(name: str) -> str:
    """Name a variable's sort is declared under: ``x''``, ``x1`` and ``x#3`` all map to ``x``."""
    return re.sub(r"[#'0-9]+$", "", name) or name


# -----------------------------
# Signature
# -----------------------------


class SortKind(str, Enum):
    TOKEN = "token"
    INT = "int"
    STREAM = "stream"


@dataclass(frozen=True)
class Sort:
    kind: SortKind
    tokens: FrozenSet[str] = frozenset()

    def __str__(self) -> str:
        if self.kind is SortKind.TOKEN:
            return "{" + ", ".join(sorted(self.tokens)) + "}"
        return self.kind.value


@dataclass(frozen=True)
class Signature:
    """
    Declared sorts and global (observable) variables.

    Attributes:
        sorts (Dict[str, Sort]): Sort per base variable name.
        globals (FrozenSet[str]): Names visible in every declaration body.
    """

    sorts: Dict[str, Sort] = field(default_factory=dict)
    globals: FrozenSet[str] = frozenset()

    def sort_of(self, name: str) -> Optional[Sort]:
        return self.sorts.get(name) or self.sorts.get(base_name(name))

    @property
    def tokens(self) -> FrozenSet[str]:
        out: FrozenSet[str] = frozenset()
        for sort in self.sorts.values():
            out |= sort.tokens
        return out


# -----------------------------
# Agents
# -----------------------------


@dataclass(frozen=True)
class Skip:
    def __str__(self) -> str:
        return show_agent(self)


@dataclass(frozen=True)
class Tell:
    constraint: Constraint

    def __str__(self) -> str:
        return show_agent(self)


@dataclass(frozen=True)
class Ask:
    """Guarded choice ``ask(c1 -> A1) + ... + ask(cn -> An)``; never empty."""

    branches: Tuple[Tuple[Constraint, "Agent"], ...]

    def __post_init__(self):
        if not self.branches:
            raise TccpValidationError("ask needs at least one branch")

    def __str__(self) -> str:
        return show_agent(self)


@dataclass(frozen=True)
class Now:
    guard: Constraint
    then: "Agent"
    else_: "Agent"

    def __str__(self) -> str:
        return show_agent(self)


@dataclass(frozen=True)
class Par:
    left: "Agent"
    right: "Agent"

    def __str__(self) -> str:
        return show_agent(self)


@dataclass(frozen=True)
class Hide:
    var: str
    body: "Agent"

    def __str__(self) -> str:
        return show_agent(self)


@dataclass(frozen=True)
class CallPattern:
    """
    A call or declaration head: process name plus arguments.

    Parameters are variables or literals (``time-out(0)``). Two patterns with
    the same :attr:`shape` denote the same most general call up to renaming.
    """

    proc: str
    params: Tuple[Term, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.params)

    @property
    def shape(self) -> Tuple[str, Tuple[Optional[Term], ...]]:
        return self.proc, tuple(None if isinstance(p, Var) else p for p in self.params)

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(p.name for p in self.params if isinstance(p, Var))

    @property
    def is_literal(self) -> bool:
        return any(not isinstance(p, Var) for p in self.params)

    def __str__(self) -> str:
        if not self.params:
            return self.proc
        return f"{self.proc}({', '.join(str(p) for p in self.params)})"


@dataclass(frozen=True)
class Call:
    proc: str
    args: Tuple[Term, ...] = ()

    @property
    def pattern(self) -> CallPattern:
        return CallPattern(self.proc, self.args)

    def __str__(self) -> str:
        return show_agent(self)


Agent = Union[Skip, Tell, Ask, Now, Par, Hide, Call]


@dataclass(frozen=True)
class Declaration:
    head: CallPattern
    body: Agent

    def __str__(self) -> str:
        return f"{self.head} :- {show_agent(self.body)}."


@dataclass(frozen=True)
class Program:
    signature: Signature
    declarations: Tuple[Declaration, ...] = ()
    initial: Optional[Agent] = None

    def procedures(self) -> FrozenSet[Tuple[str, int]]:
        return frozenset((d.head.proc, d.head.arity) for d in self.declarations)

    def declarations_for(self, proc: str, arity: int) -> List[Declaration]:
        return [d for d in self.declarations if d.head.proc == proc and d.head.arity == arity]


# -----------------------------
# Specification files
# -----------------------------


@dataclass(frozen=True)
class SpecStep:
    pos: Constraint
    neg: FrozenSet[Constraint]
    pre: Constraint
    post: Constraint
    count: float = 1

    def __str__(self) -> str:
        return f"<{self.pos} | {show_negatives(self.neg)}> {self.pre} -> {self.post}{show_count(self.count)}"


@dataclass(frozen=True)
class SpecStutter:
    neg: FrozenSet[Constraint]
    count: float = 1

    def __str__(self) -> str:
        return f"stutt{show_negatives(self.neg)}{show_count(self.count)}"


@dataclass(frozen=True)
class SpecSequence:
    """A sequence as written in a spec file, with concrete constraints; ``closed`` means ``box``."""

    tuples: Tuple[Union[SpecStep, SpecStutter], ...] = ()
    closed: bool = False

    def __str__(self) -> str:
        return " ; ".join([str(t) for t in self.tuples] + ["box" if self.closed else "..."])


@dataclass(frozen=True)
class Specification:
    entries: Dict[CallPattern, Tuple[SpecSequence, ...]] = field(default_factory=dict)
    externals: FrozenSet[Tuple[str, int]] = frozenset()

    def entry_for(self, pattern: CallPattern) -> Optional[CallPattern]:
        for key in self.entries:
            if key.shape == pattern.shape:
                return key
        return None


def show_count(count: float) -> str:
    if count == 1:
        return ""
    return " ^inf" if count == INF else f" ^{int(count)}"


# -----------------------------
# Agent utilities
# -----------------------------


def free_variables(agent: Agent) -> FrozenSet[str]:
    if isinstance(agent, Skip):
        return frozenset()
    if isinstance(agent, Tell):
        return agent.constraint.variables()
    if isinstance(agent, Ask):
        out: FrozenSet[str] = frozenset()
        for guard, body in agent.branches:
            out |= guard.variables() | free_variables(body)
        return out
    if isinstance(agent, Now):
        return agent.guard.variables() | free_variables(agent.then) | free_variables(agent.else_)
    if isinstance(agent, Par):
        return free_variables(agent.left) | free_variables(agent.right)
    if isinstance(agent, Hide):
        return free_variables(agent.body) - {agent.var}
    out = frozenset()
    for arg in agent.args:
        out |= term_vars(arg)
    return out


def calls(agent: Agent) -> Iterator[Call]:
    if isinstance(agent, Call):
        yield agent
    elif isinstance(agent, Ask):
        for _guard, body in agent.branches:
            yield from calls(body)
    elif isinstance(agent, Now):
        yield from calls(agent.then)
        yield from calls(agent.else_)
    elif isinstance(agent, Par):
        yield from calls(agent.left)
        yield from calls(agent.right)
    elif isinstance(agent, Hide):
        yield from calls(agent.body)


def substitute(agent: Agent, mapping: Mapping[str, str]) -> Agent:
    """Capture-avoiding renaming of free variables."""
    if not mapping:
        return agent
    if isinstance(agent, Skip):
        return agent
    if isinstance(agent, Tell):
        return Tell(agent.constraint.rename(mapping))
    if isinstance(agent, Ask):
        return Ask(tuple((g.rename(mapping), substitute(b, mapping)) for g, b in agent.branches))
    if isinstance(agent, Now):
        return Now(agent.guard.rename(mapping), substitute(agent.then, mapping), substitute(agent.else_, mapping))
    if isinstance(agent, Par):
        return Par(substitute(agent.left, mapping), substitute(agent.right, mapping))
    if isinstance(agent, Hide):
        inner = {k: v for k, v in mapping.items() if k != agent.var}
        var, body = agent.var, agent.body
        if var in inner.values():
            taken = set(inner.values()) | set(inner) | free_variables(body)
            fresh = var + "'"
            while fresh in taken:
                fresh += "'"
            body = substitute(body, {var: fresh})
            var = fresh
        return Hide(var, substitute(body, inner))
    return Call(agent.proc, tuple(rename_term(a, mapping) for a in agent.args))


# -----------------------------
# Pretty-printer
# -----------------------------


def _is_unary(agent: Agent) -> bool:
    if isinstance(agent, Par):
        return False
    if isinstance(agent, Ask):
        return len(agent.branches) == 1
    return True


def _unary(agent: Agent) -> str:
    text = show_agent(agent)
    return text if _is_unary(agent) else f"({text})"


def show_agent(agent: Agent) -> str:
    if isinstance(agent, Skip):
        return "skip"
    if isinstance(agent, Tell):
        return f"tell({agent.constraint})"
    if isinstance(agent, Ask):
        return " + ".join(f"ask({g} -> {show_agent(b)})" for g, b in agent.branches)
    if isinstance(agent, Now):
        return f"now {agent.guard} then {_unary(agent.then)} else {_unary(agent.else_)}"
    if isinstance(agent, Par):
        right = show_agent(agent.right)
        if isinstance(agent.right, Par):
            right = f"({right})"
        return f"{show_agent(agent.left)} || {right}"
    if isinstance(agent, Hide):
        return f"hide {agent.var} in {_unary(agent.body)}"
    return str(agent.pattern)


def show_program(program: Program) -> str:
    lines = []
    for name, sort in sorted(program.signature.sorts.items()):
        keyword = "global" if name in program.signature.globals else "sort"
        lines.append(f"{keyword} {name} : {sort}.")
    lines.extend(str(d) for d in program.declarations)
    if program.initial is not None:
        lines.append(f"init {show_agent(program.initial)}.")
    return "\n".join(lines) + "\n"


# -----------------------------
# Tree building
# -----------------------------


def _position(node: Union[Tree, Token]) -> Tuple[Optional[int], Optional[int]]:
    if isinstance(node, Token):
        return node.line, node.column
    meta = getattr(node, "meta", None)
    if meta is None or getattr(meta, "empty", True):
        return None, None
    return meta.line, meta.column


def _fail(node: Union[Tree, Token], message: str) -> TccpValidationError:
    line, column = _position(node)
    where = f"{line}:{column}: " if line is not None else ""
    return TccpValidationError(f"{where}{message}")


def _parse_tree(text: str, start: str) -> Tree:
    try:
        return _PARSER.parse(text, start=start)
    except UnexpectedEOF as exc:
        raise TccpSyntaxError("unexpected end of input") from exc
    except UnexpectedToken as exc:
        expected = ", ".join(sorted(exc.accepts or exc.expected))
        raise TccpSyntaxError(f"unexpected '{exc.token}', expected one of: {expected}", exc.line, exc.column) from exc
    except UnexpectedCharacters as exc:
        raise TccpSyntaxError(f"unexpected character {exc.char!r}", exc.line, exc.column) from exc
    except UnexpectedInput as exc:
        raise TccpSyntaxError(str(exc), getattr(exc, "line", None), getattr(exc, "column", None)) from exc


class _Builder:
    """Turns lark trees into AST values, resolving tokens against the signature."""

    def __init__(self, signature: Signature, allow_exists: bool = False):
        self.signature = signature
        self.tokens = signature.tokens
        self.allow_exists = allow_exists

    # sort: "int" | "stream" | "{" NAME ("," NAME)* "}"
    @staticmethod
    def sort(tree: Tree) -> Sort:
        if tree.data == "int_sort":
            return Sort(SortKind.INT)
        if tree.data == "stream_sort":
            return Sort(SortKind.STREAM)
        return Sort(SortKind.TOKEN, frozenset(tok.value for tok in tree.children))

    def _check_sort(self, node, var: str, wanted: SortKind, what: str) -> None:
        sort = self.signature.sort_of(var)
        if sort is not None and sort.kind is not wanted:
            raise _fail(node, f"{what} on {var}, which has sort {sort}")

    # term: NAME | SIGNED_INT | "_" | NAME "+" SIGNED_INT | NAME "-" SIGNED_INT
    def term(self, tree: Tree) -> Term:
        kind, children = tree.data, tree.children
        if kind == "t_anon":
            return Anon()
        if kind == "t_int":
            return Num(int(children[0]))
        if kind == "t_plus":
            return Arith(children[0].value, int(children[1]))
        if kind == "t_minus":
            return Arith(children[0].value, -int(children[1]))
        name = children[0].value
        return Tok(name) if name in self.tokens and self.signature.sort_of(name) is None else Var(name)

    # atom: NAME "=" term | NAME "=" "[" term "|" term "]" | NAME cmp_op SIGNED_INT | NAME last_op SIGNED_INT
    def atoms(self, tree: Tree) -> List[Atom]:
        var = tree.children[0].value
        if tree.data == "cmp_atom":
            op = {"≤": "<=", "≥": ">="}.get(tree.children[1].children[0].value, tree.children[1].children[0].value)
            self._check_sort(tree, var, SortKind.INT, f"comparison '{op}'")
            return [IntCmp(var, op, int(tree.children[2]))]
        if tree.data == "last_atom":
            op = tree.children[1].children[0].value[1:]
            self._check_sort(tree, var, SortKind.STREAM, f"last-value comparison '.{op}'")
            return [IntCmp(var, op, int(tree.children[2]), last=True)]
        if tree.data == "cons_atom":
            self._check_sort(tree, var, SortKind.STREAM, "stream cell")
            head, tail = self.term(tree.children[1]), self.term(tree.children[2])
            if not isinstance(tail, (Var, Anon)):
                raise _fail(tree, f"stream tail of {var} must be a variable or '_'")
            return [StreamCons(var, head, tail)]
        rhs = self.term(tree.children[1])
        sort = self.signature.sort_of(var)
        if isinstance(rhs, Anon):
            return []
        if isinstance(rhs, Tok):
            if sort is not None and (sort.kind is not SortKind.TOKEN or rhs.value not in sort.tokens):
                raise _fail(tree, f"unknown token {rhs.value} for {var} : {sort}")
            return [TokenEq(var, rhs.value)]
        if isinstance(rhs, Num):
            self._check_sort(tree, var, SortKind.INT, "integer equality")
            return [IntCmp(var, "=", rhs.value)]
        if isinstance(rhs, Var):
            other = self.signature.sort_of(rhs.name)
            if sort is not None and other is not None and sort.kind is not other.kind:
                raise _fail(tree, f"sort clash between {var} : {sort} and {rhs.name} : {other}")
        return [TermEq(var, rhs)]

    # constraint: "tt" | "ff" | _catom ("," _catom)*
    def constraint(self, tree: Tree) -> Constraint:
        if tree.data == "c_tt":
            return TT
        if tree.data == "c_ff":
            return FF
        return merge_all(self.catom(child) for child in tree.children)

    # _catom: atom | exists
    def catom(self, tree: Tree) -> Constraint:
        if tree.data == "exists":
            if not self.allow_exists:
                raise _fail(tree, "'exists' is only allowed in specification files")
            return hide(tree.children[0].value, self.constraint(tree.children[1]))
        return make(self.atoms(tree))

    # head: NAME | NAME "(" arg ("," arg)* ")"
    def pattern(self, tree: Tree) -> Tuple[str, List[Tuple[Tree, Term]]]:
        proc = tree.children[0].value
        args = []
        for arg in tree.children[1:]:
            if arg.data == "arg_int":
                args.append((arg, Num(int(arg.children[0]))))
            elif arg.data == "arg_name":
                args.append((arg, self.term(Tree("t_name", arg.children))))
            else:
                sign = 1 if arg.data == "arg_plus" else -1
                args.append((arg, Arith(arg.children[0].value, sign * int(arg.children[1]))))
        return proc, args

    def head(self, tree: Tree) -> CallPattern:
        proc, args = self.pattern(tree)
        seen: Set[str] = set()
        for node, term in args:
            if isinstance(term, Arith):
                raise _fail(node, f"arithmetic is not allowed in the head of {proc}")
            if isinstance(term, Var):
                if term.name in seen:
                    raise _fail(node, f"parameter {term.name} repeated in the head of {proc}")
                seen.add(term.name)
        return CallPattern(proc, tuple(term for _node, term in args))

    # arithmetic arguments (p(n - 1)) stay in the call and are evaluated when it is unfolded
    def call(self, tree: Tree) -> Agent:
        proc, args = self.pattern(tree.children[0])
        for node, term in args:
            if isinstance(term, Arith):
                self._check_sort(node, term.var, SortKind.INT, "arithmetic argument")
        return Call(proc, tuple(term for _node, term in args))

    # ?agent / ?choice / ?unary
    def agent(self, tree: Tree) -> Agent:
        kind = tree.data
        if kind == "skip":
            return Skip()
        if kind == "tell":
            return Tell(self.constraint(tree.children[0]))
        if kind == "ask":
            return Ask(((self.constraint(tree.children[0]), self.agent(tree.children[1])),))
        if kind == "now":
            return Now(self.constraint(tree.children[0]), self.agent(tree.children[1]), self.agent(tree.children[2]))
        if kind == "hide":
            return Hide(tree.children[0].value, self.agent(tree.children[1]))
        if kind == "par":
            return Par(self.agent(tree.children[0]), self.agent(tree.children[1]))
        if kind == "plus":
            left, right = self.agent(tree.children[0]), self.agent(tree.children[1])
            if not isinstance(left, Ask) or not isinstance(right, Ask):
                raise _fail(tree, "'+' combines ask branches only")
            return Ask(left.branches + right.branches)
        if kind == "call":
            return self.call(tree)
        raise _fail(tree, f"internal parser error at {kind}")

    # neg_set: "{" (neg_member ("," neg_member)*)? "}"
    def negatives(self, tree: Tree) -> FrozenSet[Constraint]:
        out = []
        for member in tree.children:
            inner = member.children[0]
            out.append(self.catom(inner) if member.data == "neg_single" else self.constraint(inner))
        return frozenset(out)

    @staticmethod
    def count(tree: Optional[Tree]) -> float:
        if tree is None:
            return 1
        if tree.data == "count_inf":
            return INF
        value = int(tree.children[0])
        if value < 1:
            raise _fail(tree, f"malformed count ^{value}: counts are positive integers or inf")
        return value

    # sequence: (_tuple ";")* terminator
    def sequence(self, tree: Tree) -> SpecSequence:
        *body, terminator = tree.children
        tuples: List[Union[SpecStep, SpecStutter]] = []
        for node in body:
            if tuples and tuples[-1].count == INF:
                raise _fail(node, "no tuple may follow a tuple with count ^inf")
            count_node = node.children[-1] if node.children and node.children[-1].data.startswith("count") else None
            if node.data == "step":
                pos, neg, pre, post = node.children[:4]
                tuples.append(
                    SpecStep(
                        self.constraint(pos),
                        self.negatives(neg),
                        self.constraint(pre),
                        self.constraint(post),
                        self.count(count_node),
                    )
                )
            else:
                tuples.append(SpecStutter(self.negatives(node.children[0]), self.count(count_node)))
        closed = terminator.data == "box"
        if closed and tuples and tuples[-1].count == INF:
            raise _fail(terminator, "a tuple with count ^inf cannot be followed by box")
        return SpecSequence(tuple(tuples), closed)


def _signature_of(tree: Tree) -> Signature:
    sorts: Dict[str, Sort] = {}
    globals_: Set[str] = set()
    for item in tree.children:
        if item.data not in ("global_decl", "sort_decl"):
            continue
        name = item.children[0].value
        sort = _Builder.sort(item.children[1])
        if name in sorts and sorts[name] != sort:
            raise _fail(item, f"{name} declared with two sorts")
        sorts[name] = sort
        if item.data == "global_decl":
            globals_.add(name)
    signature = Signature(sorts, frozenset(globals_))
    clash = signature.tokens & set(sorts)
    if clash:
        raise TccpValidationError(f"names used both as token and variable: {', '.join(sorted(clash))}")
    return signature


def _check_calls(program: Program, agent: Agent, where: str) -> None:
    known = program.procedures()
    names = {proc for proc, _arity in known}
    for call in calls(agent):
        key = (call.proc, len(call.args))
        if key in known:
            continue
        if call.proc in names:
            arities = sorted(a for p, a in known if p == call.proc)
            raise TccpValidationError(
                f"arity mismatch in {where}: {call.proc} called with {len(call.args)} arguments, declared with {arities}"
            )
        raise UnknownProcessError(*key)


def parse_program(text: str) -> Program:
    """
    Parse and validate a tccp program.

    Args:
        text (str): Program source.

    Returns:
        Program: The validated AST.

    Raises:
        TccpSyntaxError: On malformed text.
        TccpValidationError: On arity, sort, token or closedness violations.
        UnknownProcessError: When a call names an undeclared process.
    """
    tree = _parse_tree(text, "program")
    signature = _signature_of(tree)
    declarations: List[Declaration] = []
    initial: Optional[Agent] = None
    shapes: Dict[tuple, Declaration] = {}
    for item in tree.children:
        if item.data == "declaration":
            builder = _Builder(signature)
            head = builder.head(item.children[0])
            body = builder.agent(item.children[1])
            unbound = free_variables(body) - set(head.variables) - signature.globals
            if unbound:
                raise _fail(item, f"unbound variable(s) {', '.join(sorted(unbound))} in {head}")
            if head.shape in shapes:
                raise _fail(item, f"duplicate declaration for {head}")
            decl = Declaration(head, body)
            shapes[head.shape] = decl
            declarations.append(decl)
        elif item.data == "init_decl":
            builder = _Builder(signature)
            initial = builder.agent(item.children[0])
    program = Program(signature, tuple(declarations), initial)
    for decl in declarations:
        _check_calls(program, decl.body, str(decl.head))
    if initial is not None:
        _check_calls(program, initial, "init")
    return program


def parse_agent(text: str, program: Program) -> Agent:
    """Parse a standalone agent (as given to ``simulate --agent``) against a program's signature."""
    tree = _parse_tree(f"init {text}.", "program")
    builder = _Builder(program.signature)
    agent = builder.agent(tree.children[0].children[0])
    _check_calls(program, agent, "agent")
    return agent


def parse_constraint(text: str, program: Program) -> Constraint:
    """Parse a standalone store such as ``system = ok, alert = no`` or ``tt``."""
    tree = _parse_tree(f"init tell({text}).", "program")
    return _Builder(program.signature).constraint(tree.children[0].children[0].children[0])


def parse_spec(text: str, program: Program) -> Specification:
    """
    Parse a specification file against the program it describes.

    Raises:
        TccpSyntaxError: On malformed text, including ``box`` before the last tuple.
        TccpValidationError: On malformed counts, tuples after ``^inf`` or duplicate keys.
        UnknownProcessError: For a key naming neither a declared nor an external process.
    """
    tree = _parse_tree(text, "spec")
    builder = _Builder(program.signature, allow_exists=True)
    externals = frozenset(
        (item.children[0].value, int(item.children[1])) for item in tree.children if item.data == "external_decl"
    )
    known = program.procedures() | externals
    entries: Dict[CallPattern, Tuple[SpecSequence, ...]] = {}
    for item in tree.children:
        if item.data != "spec_entry":
            continue
        key = builder.head(item.children[0])
        if (key.proc, key.arity) not in known:
            raise UnknownProcessError(key.proc, key.arity)
        if any(k.shape == key.shape for k in entries):
            raise _fail(item, f"duplicate specification for {key}")
        entries[key] = tuple(builder.sequence(seq) for seq in item.children[1:])
    return Specification(entries, externals)
