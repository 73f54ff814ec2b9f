"""Conditional tuples, conditional reactive sequences and maximal sequence sets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, Iterable, Mapping, Set, Tuple, Union

from core.constraints import Condition, Constraint, hide, show_negatives


@dataclass(frozen=True)
class Step:
    """
    Guarded store transition ``cond -> <pre, post>``.

    Attributes:
        cond (Condition): What the store must satisfy when the step fires.
        pre (Constraint): Store at the start of the instant.
        post (Constraint): Store at the end of the instant, entailing ``pre``.
    """

    cond: Condition
    pre: Constraint
    post: Constraint

    def rename(self, mapping: Mapping[str, str]) -> "Step":
        return Step(self.cond.rename(mapping), self.pre.rename(mapping), self.post.rename(mapping))

    def project(self, x: str) -> "Step":
        cond = Condition(hide(x, self.cond.pos), _hide_negatives(x, self.cond.neg))
        return Step(cond, hide(x, self.pre), hide(x, self.post))

    def __str__(self) -> str:
        return f"{self.cond} {self.pre} -> {self.post}"


@dataclass(frozen=True)
class Stutter:
    """Suspension of a choice agent: none of ``neg`` is entailed."""

    neg: FrozenSet[Constraint]

    def rename(self, mapping: Mapping[str, str]) -> "Stutter":
        return Stutter(frozenset(n.rename(mapping) for n in self.neg))

    def project(self, x: str) -> "Stutter":
        return Stutter(_hide_negatives(x, self.neg))

    def __str__(self) -> str:
        return f"stutt{show_negatives(self.neg)}"


ConditionalTuple = Union[Step, Stutter]


def _hide_negatives(x: str, neg: Iterable[Constraint]) -> FrozenSet[Constraint]:
    # a negative that says nothing once x is gone can never be refuted, so it is dropped
    return frozenset(n for n in (hide(x, c) for c in neg) if not n.is_tt)


@dataclass(frozen=True)
class Sequence:
    """
    Conditional reactive sequence.

    Attributes:
        tuples (Tuple[ConditionalTuple, ...]): The steps and stutterings in order.
        closed (bool): True when terminated by box; open sequences are unfinished
            or were cut at the depth bound. ``Sequence()`` is the empty sequence.
    """

    tuples: Tuple[ConditionalTuple, ...] = ()
    closed: bool = False

    def __len__(self) -> int:
        return len(self.tuples)

    def cons(self, head: ConditionalTuple) -> "Sequence":
        return Sequence((head,) + self.tuples, self.closed)

    def opened(self) -> "Sequence":
        return Sequence(self.tuples, False) if self.closed else self

    def truncate(self, depth: int) -> "Sequence":
        if len(self.tuples) <= depth:
            return self
        return Sequence(self.tuples[:depth], False)

    def rename(self, mapping: Mapping[str, str]) -> "Sequence":
        if not mapping:
            return self
        return Sequence(tuple(t.rename(mapping) for t in self.tuples), self.closed)

    def __str__(self) -> str:
        return " ; ".join([str(t) for t in self.tuples] + ["box" if self.closed else "..."])


EPSILON = Sequence()
BOX = Sequence(closed=True)

SequenceSet = FrozenSet[Sequence]


def _proper_prefixes(seqs: Iterable[Sequence]) -> Set[Tuple[ConditionalTuple, ...]]:
    out: Set[Tuple[ConditionalTuple, ...]] = set()
    for s in seqs:
        # an open s with the same tuples as a closed t is still a prefix of t
        upto = len(s.tuples) + (1 if s.closed else 0)
        for k in range(upto):
            out.add(s.tuples[:k])
    return out


def maximal(seqs: Iterable[Sequence]) -> SequenceSet:
    """Drop every member that is a proper prefix of another member."""
    members = set(seqs)
    dominated = _proper_prefixes(members)
    return frozenset(s for s in members if s.closed or s.tuples not in dominated)


def prefix_le(r1: Iterable[Sequence], r2: Iterable[Sequence]) -> bool:
    """``prefix(r1)`` is included in ``prefix(r2)``."""
    targets = set(r2)
    closed = {s for s in targets if s.closed}
    prefixes = _proper_prefixes(targets) | {s.tuples for s in targets}
    for s in r1:
        if s == EPSILON:
            continue
        if s.closed:
            if s not in closed:
                return False
        elif s.tuples not in prefixes:
            return False
    return True
