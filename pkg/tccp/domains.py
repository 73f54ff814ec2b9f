"""
Abstract constraint systems.

A domain pairs an upper carrier (abstract stores, the image of ``tau_plus``)
with a lower carrier (abstract negative components, the image of
``tau_minus``). Three domains ship:

* ``identity``: both carriers are concrete. Upper values are constraints and
  lower values are sets of constraints.
* ``interval`` / ``interval-reversed``: each integer variable (or the last value
  of a stream) is abstracted to one of ``tt, pos, neg, gt10, le10, ff``.
  Stream cells and variable equalities become aliases that share a sign.
  ``interval`` orders ``gt10 <= pos``. ``interval-reversed`` orders ``pos <= gt10``.
* ``depth-k``: the identity domain with a horizon; sequences keep only their
  first ``k`` instants (``TCCP_DEPTH_K``).
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Generic, Iterable, Mapping, Optional, Set, Tuple, TypeVar

from core import config
from core import constraints as cc
from core.constraints import Constraint, IntCmp, StreamCons, TermEq, Var
from core.errors import UnsupportedDomainError

U = TypeVar("U")
L = TypeVar("L")


class AbstractDomain(ABC, Generic[U, L]):
    """Interface every abstract constraint system implements."""

    name: str = ""
    concretizable: bool = False
    # instants kept of every sequence; None keeps them all
    horizon: Optional[int] = None

    @abstractmethod
    def top(self) -> U: ...

    @abstractmethod
    def bottom(self) -> U: ...

    @abstractmethod
    def lower_bottom(self) -> L: ...

    @abstractmethod
    def tau_plus(self, c: Constraint) -> U: ...

    @abstractmethod
    def tau_minus(self, cs: Iterable[Constraint]) -> L: ...

    @abstractmethod
    def meet(self, a: U, b: U) -> U: ...

    @abstractmethod
    def entails(self, a: U, b: U) -> bool: ...

    @abstractmethod
    def is_bottom(self, a: U) -> bool: ...

    @abstractmethod
    def hide(self, x: str, a: U) -> U: ...

    @abstractmethod
    def lower_join(self, a: L, b: L) -> L: ...

    @abstractmethod
    def lower_hide(self, x: str, a: L) -> L: ...

    @abstractmethod
    def bridge(self, a: U, neg: L) -> bool:
        """True when store ``a`` may entail some member of ``neg``."""

    @abstractmethod
    def rename(self, a: U, mapping: Mapping[str, str]) -> U: ...

    @abstractmethod
    def lower_rename(self, a: L, mapping: Mapping[str, str]) -> L: ...

    @abstractmethod
    def show(self, a: U) -> str: ...

    @abstractmethod
    def show_lower(self, a: L) -> str: ...

    def is_top(self, a: U) -> bool:
        return a == self.top()

    def inj(self, c: Constraint, a: U) -> U:
        return self.meet(self.tau_plus(c), a)

    def inj_dual(self, c: Constraint, neg: L) -> L:
        return self.lower_join(self.tau_minus([c]), neg)

    def complement(self, c: Constraint) -> Optional[Constraint]:
        """A guard equivalent to "not c", when the domain can express one."""
        return None


# -----------------------------
# Identity
# -----------------------------


class IdentityDomain(AbstractDomain[Constraint, FrozenSet[Constraint]]):
    name = "identity"
    concretizable = True

    def top(self) -> Constraint:
        return cc.TT

    def bottom(self) -> Constraint:
        return cc.FF

    def lower_bottom(self) -> FrozenSet[Constraint]:
        return frozenset()

    def tau_plus(self, c: Constraint) -> Constraint:
        return c

    def tau_minus(self, cs: Iterable[Constraint]) -> FrozenSet[Constraint]:
        return frozenset(cs)

    def meet(self, a: Constraint, b: Constraint) -> Constraint:
        return cc.merge(a, b)

    def entails(self, a: Constraint, b: Constraint) -> bool:
        return cc.entails(a, b)

    def is_bottom(self, a: Constraint) -> bool:
        return a.bottom

    def hide(self, x: str, a: Constraint) -> Constraint:
        return cc.hide(x, a)

    def lower_join(self, a: FrozenSet[Constraint], b: FrozenSet[Constraint]) -> FrozenSet[Constraint]:
        return a | b

    def lower_hide(self, x: str, a: FrozenSet[Constraint]) -> FrozenSet[Constraint]:
        return frozenset(h for h in (cc.hide(x, c) for c in a) if not h.is_tt)

    def bridge(self, a: Constraint, neg: FrozenSet[Constraint]) -> bool:
        return any(cc.entails(a, c) for c in neg)

    def rename(self, a: Constraint, mapping: Mapping[str, str]) -> Constraint:
        return a.rename(mapping)

    def lower_rename(self, a: FrozenSet[Constraint], mapping: Mapping[str, str]) -> FrozenSet[Constraint]:
        return frozenset(c.rename(mapping) for c in a)

    def show(self, a: Constraint) -> str:
        return str(a)

    def show_lower(self, a: FrozenSet[Constraint]) -> str:
        return cc.show_negatives(a)


# -----------------------------
# Depth-k
# -----------------------------


class DepthDomain(IdentityDomain):
    """
    Concrete constraints, with every sequence cut after its first ``k`` instants.

    Infinite behaviours (an ask waiting forever, a loop) become finite prefixes,
    so a specification can list them in full.
    """

    name = "depth-k"

    def __init__(self, k: int = config.DEPTH_K):
        if k < 1:
            raise UnsupportedDomainError(f"depth-k needs k >= 1, got {k}")
        self.horizon = k


# -----------------------------
# Signs
# -----------------------------


class Sign(str, Enum):
    TOP = "tt"
    POS = "pos"
    NEG = "neg"
    GT10 = "gt10"
    LE10 = "le10"
    BOT = "ff"


class SignTable:
    """
    Meet table of the sign lattice, given by its strict order pairs.

    Incomparable signs meet to ``ff``.
    """

    def __init__(self, name: str, below: Set[Tuple[Sign, Sign]]):
        self.name = name
        self.below = frozenset(below)

    def leq(self, a: Sign, b: Sign) -> bool:
        return a == b or a is Sign.BOT or b is Sign.TOP or (a, b) in self.below

    def meet(self, a: Sign, b: Sign) -> Sign:
        if self.leq(a, b):
            return a
        if self.leq(b, a):
            return b
        return Sign.BOT


STANDARD_TABLE = SignTable("interval", {(Sign.GT10, Sign.POS), (Sign.NEG, Sign.LE10)})
REVERSED_TABLE = SignTable("interval-reversed", {(Sign.POS, Sign.GT10), (Sign.NEG, Sign.LE10)})


@dataclass(frozen=True)
class SignStore:
    """
    Abstract store of the interval domains.

    Attributes:
        signs (Tuple[Tuple[str, Sign], ...]): Sorted non-``tt`` sign per variable.
        aliases (FrozenSet[Tuple[str, str]]): Sorted pairs sharing their (last) value;
            closed under transitivity, so hiding one member keeps the others linked.
        bottom (bool): The inconsistent store.
    """

    signs: Tuple[Tuple[str, Sign], ...] = ()
    aliases: FrozenSet[Tuple[str, str]] = frozenset()
    bottom: bool = False

    def sign(self, var: str) -> Sign:
        for name, sign in self.signs:
            if name == var:
                return sign
        return Sign.TOP

    def variables(self) -> FrozenSet[str]:
        out = {name for name, _sign in self.signs}
        for a, b in self.aliases:
            out |= {a, b}
        return frozenset(out)


SIGN_BOTTOM = SignStore(bottom=True)
SIGN_TOP = SignStore()


def _bounds(c: Constraint) -> Dict[str, Tuple[Optional[int], Optional[int]]]:
    bounds: Dict[str, Tuple[Optional[int], Optional[int]]] = {}
    for atom in c.atoms:
        if not isinstance(atom, IntCmp):
            continue
        lo, hi = bounds.get(atom.var, (None, None))
        v = atom.value
        new_lo = {"=": v, ">": v + 1, ">=": v}.get(atom.op)
        new_hi = {"=": v, "<": v - 1, "<=": v}.get(atom.op)
        if new_lo is not None:
            lo = new_lo if lo is None else max(lo, new_lo)
        if new_hi is not None:
            hi = new_hi if hi is None else min(hi, new_hi)
        bounds[atom.var] = (lo, hi)
    return bounds


def _aliases(c: Constraint) -> Set[Tuple[str, str]]:
    pairs = set()
    for atom in c.atoms:
        if isinstance(atom, StreamCons) and isinstance(atom.tail, Var):
            pairs.add((atom.var, atom.tail.name))
        elif isinstance(atom, TermEq) and isinstance(atom.term, Var):
            pairs.add((atom.var, atom.term.name))
    return pairs


class IntervalDomain(AbstractDomain[SignStore, FrozenSet[SignStore]]):
    """
    Sign abstraction of integer values and last stream values.

    ``tau_plus`` keeps the tightest sign implied by a variable's bounds;
    ``tau_minus`` keeps, for a negative constraint, a store that is only
    reached when the constraint really holds, and drops constraints no sign
    can guarantee (tokens, two-sided ranges).
    """

    def __init__(self, table: SignTable = STANDARD_TABLE):
        self.table = table
        self.name = table.name

    def normalize(self, signs: Mapping[str, Sign], aliases: Iterable[Tuple[str, str]]) -> SignStore:
        parent: Dict[str, str] = {}

        def find(x: str) -> str:
            parent.setdefault(x, x)
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in aliases:
            if a != b:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        names = set(signs) | set(parent)
        merged: Dict[str, Sign] = {}
        for name in names:
            root = find(name)
            merged[root] = self.table.meet(merged.get(root, Sign.TOP), signs.get(name, Sign.TOP))
        if any(s is Sign.BOT for s in merged.values()):
            return SIGN_BOTTOM
        members: Dict[str, list] = {}
        for name in sorted(names):
            members.setdefault(find(name), []).append(name)
        out_signs = []
        pairs = set()
        for root, group in members.items():
            for i, name in enumerate(group):
                if merged[root] is not Sign.TOP:
                    out_signs.append((name, merged[root]))
                for other in group[i + 1:]:
                    pairs.add((name, other))
        return SignStore(tuple(sorted(out_signs)), frozenset(pairs))

    def _sign_of(self, lo: Optional[int], hi: Optional[int]) -> Sign:
        lower = Sign.TOP if lo is None else Sign.GT10 if lo >= 11 else Sign.POS if lo >= 1 else Sign.TOP
        upper = Sign.TOP if hi is None else Sign.NEG if hi <= 0 else Sign.LE10 if hi <= 10 else Sign.TOP
        sign = self.table.meet(lower, upper)
        # two-sided ranges such as [1, 10] have no single sign; keep the lower one
        return lower if sign is Sign.BOT else sign

    @staticmethod
    def _guaranteed(lo: Optional[int], hi: Optional[int]) -> Optional[Sign]:
        if lo is not None and hi is not None:
            return None
        if lo is not None:
            return Sign.POS if lo <= 1 else Sign.GT10 if lo <= 11 else None
        if hi is not None:
            return Sign.LE10 if hi >= 10 else Sign.NEG if hi >= 0 else None
        return Sign.TOP

    def top(self) -> SignStore:
        return SIGN_TOP

    def bottom(self) -> SignStore:
        return SIGN_BOTTOM

    def lower_bottom(self) -> FrozenSet[SignStore]:
        return frozenset()

    def tau_plus(self, c: Constraint) -> SignStore:
        if c.bottom:
            return SIGN_BOTTOM
        signs = {var: self._sign_of(lo, hi) for var, (lo, hi) in _bounds(c).items()}
        return self.normalize(signs, _aliases(c))

    def tau_minus(self, cs: Iterable[Constraint]) -> FrozenSet[SignStore]:
        out = set()
        for c in cs:
            if c.bottom or any(not isinstance(a, (IntCmp, StreamCons, TermEq)) for a in c.atoms):
                continue
            signs = {}
            for var, (lo, hi) in _bounds(c).items():
                sign = self._guaranteed(lo, hi)
                if sign is None:
                    break
                signs[var] = sign
            else:
                store = self.normalize(signs, _aliases(c))
                if store != SIGN_TOP:
                    out.add(store)
        return frozenset(out)

    def meet(self, a: SignStore, b: SignStore) -> SignStore:
        if a.bottom or b.bottom:
            return SIGN_BOTTOM
        if b == SIGN_TOP:
            return a
        if a == SIGN_TOP:
            return b
        signs = dict(a.signs)
        for var, sign in b.signs:
            signs[var] = self.table.meet(signs.get(var, Sign.TOP), sign)
        return self.normalize(signs, a.aliases | b.aliases)

    def entails(self, a: SignStore, b: SignStore) -> bool:
        if a.bottom:
            return True
        if b.bottom:
            return False
        return b.aliases <= a.aliases and all(self.table.leq(a.sign(v), s) for v, s in b.signs)

    def is_bottom(self, a: SignStore) -> bool:
        return a.bottom

    def hide(self, x: str, a: SignStore) -> SignStore:
        if a.bottom or x not in a.variables():
            return a
        return SignStore(
            tuple((v, s) for v, s in a.signs if v != x),
            frozenset(p for p in a.aliases if x not in p),
        )

    def lower_join(self, a: FrozenSet[SignStore], b: FrozenSet[SignStore]) -> FrozenSet[SignStore]:
        return a | b

    def lower_hide(self, x: str, a: FrozenSet[SignStore]) -> FrozenSet[SignStore]:
        return frozenset(h for h in (self.hide(x, s) for s in a) if h != SIGN_TOP)

    def bridge(self, a: SignStore, neg: FrozenSet[SignStore]) -> bool:
        return any(self.entails(a, n) for n in neg)

    def rename(self, a: SignStore, mapping: Mapping[str, str]) -> SignStore:
        if a.bottom or not (a.variables() & set(mapping)):
            return a
        signs: Dict[str, Sign] = {}
        for var, sign in a.signs:
            name = mapping.get(var, var)
            signs[name] = self.table.meet(signs.get(name, Sign.TOP), sign)
        aliases = {(mapping.get(x, x), mapping.get(y, y)) for x, y in a.aliases}
        return self.normalize(signs, aliases)

    def lower_rename(self, a: FrozenSet[SignStore], mapping: Mapping[str, str]) -> FrozenSet[SignStore]:
        return frozenset(self.rename(s, mapping) for s in a)

    def show(self, a: SignStore) -> str:
        if a.bottom:
            return "ff"
        parts = [f"{sign.value}({var})" for var, sign in a.signs]
        parts += [f"{x} ~ {y}" for x, y in sorted(a.aliases)]
        return ", ".join(sorted(parts)) if parts else "tt"

    def show_lower(self, a: FrozenSet[SignStore]) -> str:
        parts = []
        for store in a:
            text = self.show(store)
            parts.append(f"({text})" if len(store.signs) + len(store.aliases) > 1 else text)
        return "{" + ", ".join(sorted(parts)) + "}"

    def complement(self, c: Constraint) -> Optional[Constraint]:
        if len(c.atoms) != 1:
            return None
        (atom,) = tuple(c.atoms)
        if not isinstance(atom, IntCmp) or atom.op not in (">", "<="):
            return None
        flipped = "<=" if atom.op == ">" else ">"
        return cc.make([IntCmp(atom.var, flipped, atom.value, atom.last)])


DOMAINS: Dict[str, AbstractDomain] = {
    "identity": IdentityDomain(),
    "interval": IntervalDomain(STANDARD_TABLE),
    "interval-reversed": IntervalDomain(REVERSED_TABLE),
    "depth-k": DepthDomain(),
}


def get_domain(name: str) -> AbstractDomain:
    try:
        return DOMAINS[name]
    except KeyError:
        raise UnsupportedDomainError(f"unknown domain {name!r}; choose one of {', '.join(DOMAINS)}") from None
