"""
Concrete cylindric constraint system.

Constraints are finite conjunctions of typed atoms kept in a saturated,
canonical form, so entailment reduces to comparing saturated atom sets:
``a |- b`` iff ``a (x) b == a``. The saturation theory is:

* equality substitution: ``x = y`` puts both names in one class and every
  atom on one member is materialized on all members;
* interval reasoning over integer comparisons, per variable (or per last
  value of a stream), including ``x = y + k`` links;
* stream structure: two cells on the same stream unify heads and tails, and
  ``x = [_ | x']`` makes ``x`` and ``x'`` share their last instantiated value.

Hiding a variable saturates first and then drops every atom mentioning it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple, Union

from core import config

# -----------------------------
# Terms
# -----------------------------


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Tok:
    value: str

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Num:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Anon:
    def __str__(self) -> str:
        return "_"


@dataclass(frozen=True)
class Arith:
    """``var + offset``; a negative offset prints as subtraction."""

    var: str
    offset: int

    def __str__(self) -> str:
        if self.offset < 0:
            return f"{self.var} - {-self.offset}"
        return f"{self.var} + {self.offset}"


Term = Union[Var, Tok, Num, Anon, Arith]


def term_vars(term: Term) -> FrozenSet[str]:
    if isinstance(term, Var):
        return frozenset({term.name})
    if isinstance(term, Arith):
        return frozenset({term.var})
    return frozenset()


def rename_term(term: Term, mapping: Mapping[str, str]) -> Term:
    if isinstance(term, Var):
        return Var(mapping.get(term.name, term.name))
    if isinstance(term, Arith):
        return Arith(mapping.get(term.var, term.var), term.offset)
    return term


# -----------------------------
# Atoms
# -----------------------------

COMPARATORS = ("=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class TokenEq:
    var: str
    token: str

    def variables(self) -> FrozenSet[str]:
        return frozenset({self.var})

    def rename(self, mapping: Mapping[str, str]) -> "TokenEq":
        return TokenEq(mapping.get(self.var, self.var), self.token)

    def __str__(self) -> str:
        return f"{self.var} = {self.token}"


@dataclass(frozen=True)
class IntCmp:
    """
    Comparison of an integer variable against a literal.

    Attributes:
        var (str): Constrained variable.
        op (str): One of ``=``, ``<``, ``<=``, ``>``, ``>=``.
        value (int): Literal bound.
        last (bool): When set, the comparison is on the last instantiated
            value of a stream (written with a leading dot, ``x .> 0``).
    """

    var: str
    op: str
    value: int
    last: bool = False

    def __post_init__(self):
        if self.op not in COMPARATORS:
            raise ValueError(f"unknown comparator {self.op!r}")

    def variables(self) -> FrozenSet[str]:
        return frozenset({self.var})

    def rename(self, mapping: Mapping[str, str]) -> "IntCmp":
        return IntCmp(mapping.get(self.var, self.var), self.op, self.value, self.last)

    def __str__(self) -> str:
        dot = "." if self.last else ""
        return f"{self.var} {dot}{self.op} {self.value}"


@dataclass(frozen=True)
class StreamCons:
    var: str
    head: Term
    tail: Term

    def variables(self) -> FrozenSet[str]:
        return frozenset({self.var}) | term_vars(self.head) | term_vars(self.tail)

    def rename(self, mapping: Mapping[str, str]) -> "StreamCons":
        return StreamCons(
            mapping.get(self.var, self.var),
            rename_term(self.head, mapping),
            rename_term(self.tail, mapping),
        )

    def __str__(self) -> str:
        return f"{self.var} = [{self.head} | {self.tail}]"


@dataclass(frozen=True)
class TermEq:
    var: str
    term: Term

    def variables(self) -> FrozenSet[str]:
        return frozenset({self.var}) | term_vars(self.term)

    def rename(self, mapping: Mapping[str, str]) -> "TermEq":
        return TermEq(mapping.get(self.var, self.var), rename_term(self.term, mapping))

    def __str__(self) -> str:
        return f"{self.var} = {self.term}"


Atom = Union[TokenEq, IntCmp, StreamCons, TermEq]


# -----------------------------
# Saturation
# -----------------------------

Interval = Tuple[Optional[int], Optional[int]]


class _UnionFind:
    def __init__(self):
        self.parent: Dict[str, str] = {}

    def find(self, x: str) -> str:
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: str, b: str) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True

    def classes(self, names: Iterable[str]) -> Dict[str, List[str]]:
        out: Dict[str, List[str]] = {}
        for name in sorted(set(names)):
            out.setdefault(self.find(name), []).append(name)
        return out


def _interval_of(op: str, value: int) -> Interval:
    return {
        "=": (value, value),
        "<": (None, value - 1),
        "<=": (None, value),
        ">": (value + 1, None),
        ">=": (value, None),
    }[op]


def _meet_interval(a: Interval, b: Interval) -> Interval:
    lo = b[0] if a[0] is None else a[0] if b[0] is None else max(a[0], b[0])
    hi = b[1] if a[1] is None else a[1] if b[1] is None else min(a[1], b[1])
    return lo, hi


def _shift(a: Interval, k: int) -> Interval:
    return (None if a[0] is None else a[0] + k, None if a[1] is None else a[1] + k)


def _empty(a: Interval) -> bool:
    return a[0] is not None and a[1] is not None and a[0] > a[1]


def _bound_atoms(var: str, interval: Interval, last: bool) -> List[IntCmp]:
    lo, hi = interval
    if lo is not None and lo == hi:
        return [IntCmp(var, "=", lo, last)]
    atoms = []
    if lo is not None:
        atoms.append(IntCmp(var, ">", lo - 1, last))
    if hi is not None:
        atoms.append(IntCmp(var, "<=", hi, last))
    return atoms


def _ground(term: Term) -> bool:
    return isinstance(term, (Tok, Num))


@lru_cache(maxsize=65536)
def _saturate(atoms: FrozenSet[Atom]) -> Optional[FrozenSet[Atom]]:
    """Return the canonical saturated atom set, or None when contradictory."""
    names: Set[str] = set()
    for atom in atoms:
        names |= atom.variables()

    eq = _UnionFind()
    for name in names:
        eq.find(name)

    tokens: Dict[str, Set[str]] = {}
    plain: List[Tuple[str, Interval]] = []
    lasts: List[Tuple[str, Interval]] = []
    ariths: Set[Tuple[str, str, int]] = set()
    conses: Set[Tuple[str, Term, Term]] = set()

    def bind(var: str, term: Term) -> None:
        if isinstance(term, Var):
            eq.union(var, term.name)
        elif isinstance(term, Tok):
            tokens.setdefault(var, set()).add(term.value)
        elif isinstance(term, Num):
            plain.append((var, (term.value, term.value)))
        elif isinstance(term, Arith):
            ariths.add((var, term.var, term.offset))

    for atom in atoms:
        if isinstance(atom, TokenEq):
            tokens.setdefault(atom.var, set()).add(atom.token)
        elif isinstance(atom, IntCmp):
            (lasts if atom.last else plain).append((atom.var, _interval_of(atom.op, atom.value)))
        elif isinstance(atom, TermEq):
            bind(atom.var, atom.term)
        else:
            conses.add((atom.var, atom.head, atom.tail))

    # Two cells on one stream unify component-wise; unions may enable more pairs.
    changed = True
    while changed:
        changed = False
        by_root: Dict[str, List[Tuple[Term, Term]]] = {}
        for var, head, tail in conses:
            by_root.setdefault(eq.find(var), []).append((head, tail))
        for cells in by_root.values():
            for i, (h1, t1) in enumerate(cells):
                for h2, t2 in cells[i + 1:]:
                    for left, right in ((h1, h2), (t1, t2)):
                        if isinstance(left, Anon) or isinstance(right, Anon) or left == right:
                            continue
                        if _ground(left) and _ground(right):
                            return None
                        if isinstance(left, Var) and isinstance(right, Var):
                            changed |= eq.union(left.name, right.name)
                        elif isinstance(left, Var):
                            bind(left.name, right)
                        elif isinstance(right, Var):
                            bind(right.name, left)

    classes = eq.classes(names)

    token_of: Dict[str, str] = {}
    for var, toks in tokens.items():
        root = eq.find(var)
        merged = toks | ({token_of[root]} if root in token_of else set())
        if len(merged) > 1:
            return None
        token_of[root] = next(iter(merged))

    last_alias = _UnionFind()
    for root in classes:
        last_alias.find(root)
    for var, _head, tail in conses:
        if isinstance(tail, Var):
            last_alias.union(eq.find(var), eq.find(tail.name))

    bounds: Dict[str, Interval] = {}
    for var, interval in plain:
        root = eq.find(var)
        bounds[root] = _meet_interval(bounds.get(root, (None, None)), interval)
    last_bounds: Dict[str, Interval] = {}
    for var, interval in lasts:
        root = last_alias.find(eq.find(var))
        last_bounds[root] = _meet_interval(last_bounds.get(root, (None, None)), interval)

    for _ in range(config.SATURATION_ROUNDS):
        moved = False
        for target, source, offset in ariths:
            rt, rs = eq.find(target), eq.find(source)
            bt, bs = bounds.get(rt, (None, None)), bounds.get(rs, (None, None))
            nt = _meet_interval(bt, _shift(bs, offset))
            ns = _meet_interval(bs, _shift(nt, -offset))
            if nt != bt or ns != bs:
                bounds[rt], bounds[rs] = nt, ns
                moved = True
        if not moved:
            break

    if any(_empty(i) for i in bounds.values()) or any(_empty(i) for i in last_bounds.values()):
        return None

    out: Set[Atom] = set()
    for root, members in classes.items():
        for i, name in enumerate(members):
            for other in members[i + 1:]:
                out.add(TermEq(other, Var(name)))
            if root in token_of:
                out.add(TokenEq(name, token_of[root]))
            if root in bounds:
                out.update(_bound_atoms(name, bounds[root], False))
            alias_root = last_alias.find(root)
            if alias_root in last_bounds:
                out.update(_bound_atoms(name, last_bounds[alias_root], True))
    for var, head, tail in conses:
        for name in classes[eq.find(var)]:
            out.add(StreamCons(name, head, tail))
    for target, source, offset in ariths:
        out.add(TermEq(target, Arith(source, offset)))
    return frozenset(out)


# -----------------------------
# Constraints
# -----------------------------


@dataclass(frozen=True)
class Constraint:
    """
    Saturated conjunction of atoms, or Bottom (``ff``).

    Always build through :func:`make` (or the ``TT``/``FF`` constants); the
    raw constructor does not saturate.

    Attributes:
        atoms (FrozenSet[Atom]): Canonical saturated atoms; empty for ``tt``.
        bottom (bool): True for the inconsistent constraint ``ff``.
    """

    atoms: FrozenSet[Atom] = frozenset()
    bottom: bool = False

    @property
    def is_tt(self) -> bool:
        return not self.bottom and not self.atoms

    @property
    def is_ff(self) -> bool:
        return self.bottom

    def variables(self) -> FrozenSet[str]:
        out: FrozenSet[str] = frozenset()
        for atom in self.atoms:
            out |= atom.variables()
        return out

    def rename(self, mapping: Mapping[str, str]) -> "Constraint":
        if self.bottom or not self.atoms or not (self.variables() & set(mapping)):
            return self
        return make(atom.rename(mapping) for atom in self.atoms)

    def __str__(self) -> str:
        if self.bottom:
            return "ff"
        if not self.atoms:
            return "tt"
        return ", ".join(sorted(str(atom) for atom in self.atoms))


TT = Constraint()
FF = Constraint(bottom=True)


def make(atoms: Iterable[Atom]) -> Constraint:
    saturated = _saturate(frozenset(atoms))
    if saturated is None:
        return FF
    return Constraint(saturated)


@lru_cache(maxsize=65536)
def merge(a: Constraint, b: Constraint) -> Constraint:
    """
    Least upper bound ``a (x) b``.

    Args:
        a (Constraint): Left operand.
        b (Constraint): Right operand.

    Returns:
        Constraint: The saturated union, ``FF`` if contradictory.
    """
    if a.bottom or b.bottom:
        return FF
    if not a.atoms:
        return b
    if not b.atoms or b.atoms <= a.atoms:
        return a
    return make(a.atoms | b.atoms)


def merge_all(constraints: Iterable[Constraint]) -> Constraint:
    out = TT
    for c in constraints:
        out = merge(out, c)
    return out


def entails(a: Constraint, b: Constraint) -> bool:
    """True iff every model of ``a`` is a model of ``b`` (``ff`` entails everything)."""
    if a.bottom:
        return True
    if b.bottom:
        return False
    if not b.atoms or b.atoms <= a.atoms:
        return True
    return merge(a, b) == a


@lru_cache(maxsize=65536)
def hide(x: str, a: Constraint) -> Constraint:
    """Cylindrification: drop every saturated atom that mentions ``x``."""
    if a.bottom or x not in a.variables():
        return a
    return make(atom for atom in a.atoms if x not in atom.variables())


def value_of(a: Constraint, x: str) -> Optional[int]:
    """The integer ``a`` pins ``x`` to, if any."""
    if a.bottom:
        return None
    for atom in a.atoms:
        if isinstance(atom, IntCmp) and atom.var == x and atom.op == "=" and not atom.last:
            return atom.value
    return None


# -----------------------------
# Conditions
# -----------------------------


def show_negatives(neg: Iterable[Constraint]) -> str:
    parts = []
    for c in neg:
        text = str(c)
        parts.append(f"({text})" if len(c.atoms) > 1 else text)
    return "{" + ", ".join(sorted(parts)) + "}"


@dataclass(frozen=True)
class Condition:
    """
    Guard ``(pos, neg)`` of a computation step.

    Attributes:
        pos (Constraint): What the store must entail.
        neg (FrozenSet[Constraint]): Constraints the store must not entail.
    """

    pos: Constraint = TT
    neg: FrozenSet[Constraint] = frozenset()

    @property
    def inconsistent(self) -> bool:
        return self.pos.bottom or any(entails(self.pos, n) for n in self.neg)

    def merge(self, other: "Condition") -> "Condition":
        """Componentwise product: positives merged, negatives united."""
        return Condition(merge(self.pos, other.pos), self.neg | other.neg)

    def with_negatives(self, more: Iterable[Constraint]) -> "Condition":
        return Condition(self.pos, self.neg | frozenset(more))

    def rename(self, mapping: Mapping[str, str]) -> "Condition":
        return Condition(self.pos.rename(mapping), frozenset(n.rename(mapping) for n in self.neg))

    def __str__(self) -> str:
        return f"<{self.pos} | {show_negatives(self.neg)}>"


TRIVIAL = Condition()


def satisfies(c: Constraint, eta: Condition) -> bool:
    """``c |> eta``: c entails the positive part, which is consistent, and no negative member."""
    if c.bottom or eta.pos.bottom:
        return False
    if not entails(c, eta.pos):
        return False
    return not any(entails(c, n) for n in eta.neg)
