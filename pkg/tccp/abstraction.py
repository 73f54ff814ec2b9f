"""
Abstract conditional sequences and the abstract semantics.

Abstract tuples carry a repetition count (a positive integer or ``inf``);
equal adjacent tuples are always fused, and nothing may follow an ``inf``
tuple. Every operation here takes the :class:`~tccp.domains.AbstractDomain`
whose values fill the tuples.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Set, Tuple, Union

from loguru import logger

from core.constraints import Condition, Constraint
from core.errors import MissingSpecError, TccpValidationError, UnsupportedDomainError
from tccp.domains import AbstractDomain
from tccp.interpretation import Interpretation, binding_constraint, call_cases, declaration_keys, head_renaming
from tccp.sequences import Sequence, SequenceSet, Step, Stutter, maximal
from tccp.syntax import (
    INF,
    Agent,
    Ask,
    Call,
    Declaration,
    Hide,
    Now,
    Par,
    Skip,
    Specification,
    SpecStep,
    Tell,
    show_count,
    substitute,
)


@dataclass(frozen=True)
class AbstractCondition:
    pos: Any
    neg: FrozenSet[Any]

    def satisfied_by(self, a: Any, domain: AbstractDomain) -> bool:
        """``a`` entails ``pos`` (which is not ff) and bridges to no negative."""
        if domain.is_bottom(self.pos) or domain.is_bottom(a):
            return False
        return domain.entails(a, self.pos) and not domain.bridge(a, self.neg)


@dataclass(frozen=True)
class AStep:
    cond: AbstractCondition
    pre: Any
    post: Any
    count: float = 1


@dataclass(frozen=True)
class AStutter:
    neg: FrozenSet[Any]
    count: float = 1


AbstractTuple = Union[AStep, AStutter]


def body(t: AbstractTuple) -> AbstractTuple:
    """The tuple with its count reset to one; tuples fuse when their bodies match."""
    return t if t.count == 1 else replace(t, count=1)


def _check_count(t: AbstractTuple) -> None:
    if not (t.count == INF or (t.count >= 1 and int(t.count) == t.count)):
        raise TccpValidationError(f"invalid repetition count {t.count}")


@dataclass(frozen=True)
class AbstractSequence:
    """
    Collapsed sequence of abstract tuples.

    Attributes:
        tuples (Tuple[AbstractTuple, ...]): Tuples in order, adjacent ones distinct.
        closed (bool): Terminated by box.

    Raises:
        TccpValidationError: When a tuple follows an ``inf`` tuple or a count is not positive.
    """

    tuples: Tuple[AbstractTuple, ...] = ()
    closed: bool = False

    def __post_init__(self):
        for i, t in enumerate(self.tuples):
            _check_count(t)
            if t.count == INF and (i + 1 < len(self.tuples) or self.closed):
                raise TccpValidationError("nothing can follow a tuple repeated ^inf")

    @classmethod
    def build(cls, tuples: Iterable[AbstractTuple], closed: bool) -> "AbstractSequence":
        """Fuse equal adjacent tuples and stop after an ``inf`` tuple."""
        out: List[AbstractTuple] = []
        for t in tuples:
            if out and body(out[-1]) == body(t):
                out[-1] = replace(out[-1], count=out[-1].count + t.count)
            else:
                out.append(t)
            if out[-1].count == INF:
                return cls(tuple(out), False)
        return cls(tuple(out), closed)

    def cons(self, head: AbstractTuple) -> "AbstractSequence":
        return AbstractSequence.build((head,) + self.tuples, self.closed)

    def opened(self) -> "AbstractSequence":
        return AbstractSequence(self.tuples, False) if self.closed else self

    def truncate(self, depth: int) -> "AbstractSequence":
        """Keep at most ``depth`` finite repetitions; an ``inf`` tuple is never cut."""
        out: List[AbstractTuple] = []
        used = 0
        for t in self.tuples:
            if t.count == INF:
                out.append(t)
                break
            if used + t.count > depth:
                if depth > used:
                    out.append(replace(t, count=depth - used))
                return AbstractSequence(tuple(out), False)
            out.append(t)
            used += t.count
        return self if len(out) == len(self.tuples) else AbstractSequence(tuple(out), False)


A_EPSILON = AbstractSequence()
A_BOX = AbstractSequence(closed=True)

AbstractSet = FrozenSet[AbstractSequence]


# -----------------------------
# Printing
# -----------------------------


def show_tuple(t: AbstractTuple, domain: AbstractDomain) -> str:
    if isinstance(t, AStutter):
        return f"stutt{domain.show_lower(t.neg)}{show_count(t.count)}"
    cond = f"<{domain.show(t.cond.pos)} | {domain.show_lower(t.cond.neg)}>"
    return f"{cond} {domain.show(t.pre)} -> {domain.show(t.post)}{show_count(t.count)}"


def show_sequence(s: AbstractSequence, domain: AbstractDomain) -> str:
    return " ; ".join([show_tuple(t, domain) for t in s.tuples] + ["box" if s.closed else "..."])


def show_abstract_set(seqs: Iterable[AbstractSequence], domain: AbstractDomain) -> str:
    lines = sorted(show_sequence(s, domain) for s in seqs)
    return "{\n" + "".join(f"  {line}\n" for line in lines) + "}" if lines else "{}"


# -----------------------------
# Order
# -----------------------------


def abstract_prefix(s: AbstractSequence, t: AbstractSequence) -> bool:
    """
    ``s`` is a prefix of ``t``: equal tuples up to the last one of ``s``, which
    may repeat fewer times than its counterpart. A closed ``s`` must equal ``t``.
    """
    if s.closed:
        return s == t
    n = len(s.tuples)
    if n == 0:
        return True
    if n > len(t.tuples) or s.tuples[:-1] != t.tuples[: n - 1]:
        return False
    last, other = s.tuples[-1], t.tuples[n - 1]
    return body(last) == body(other) and last.count <= other.count


def abstract_maximal(seqs: Iterable[AbstractSequence]) -> AbstractSet:
    members = set(seqs)
    return frozenset(s for s in members if not any(t != s and abstract_prefix(s, t) for t in members))


def abstract_le(r1: Iterable[AbstractSequence], r2: Iterable[AbstractSequence]) -> bool:
    targets = list(r2)
    return all(any(abstract_prefix(s, t) for t in targets) for s in r1)


# -----------------------------
# Abstraction
# -----------------------------


def within_horizon(s: AbstractSequence, domain: AbstractDomain) -> AbstractSequence:
    """``s`` cut after the domain's horizon, ``inf`` tuples included."""
    k = domain.horizon
    if k is None:
        return s
    out: List[AbstractTuple] = []
    used = 0
    for t in s.tuples:
        if used + t.count > k:
            if k > used:
                out.append(replace(t, count=k - used))
            return AbstractSequence(tuple(out), False)
        out.append(t)
        used += t.count
    return s


def alpha_tuple(t: Union[Step, Stutter], domain: AbstractDomain) -> AbstractTuple:
    if isinstance(t, Stutter):
        return AStutter(domain.tau_minus(t.neg))
    cond = AbstractCondition(domain.tau_plus(t.cond.pos), domain.tau_minus(t.cond.neg))
    return AStep(cond, domain.tau_plus(t.pre), domain.tau_plus(t.post))


def alpha_seq(s: Sequence, domain: AbstractDomain) -> AbstractSequence:
    return within_horizon(AbstractSequence.build((alpha_tuple(t, domain) for t in s.tuples), s.closed), domain)


def alpha_set(seqs: Iterable[Sequence], domain: AbstractDomain) -> AbstractSet:
    return abstract_maximal(alpha_seq(s, domain) for s in seqs)


def promote_infinite(s: Sequence, deeper: Iterable[Sequence], domain: AbstractDomain) -> AbstractSequence:
    """
    Abstraction of a sequence cut at the depth bound, with its last tuple
    turned into an ``inf`` tuple when one more unfolding repeats it.

    Args:
        s (Sequence): A sequence of the semantics computed to depth k.
        deeper (Iterable[Sequence]): The same semantics computed to depth k + 1.
        domain (AbstractDomain): Domain the result is shown in.

    Returns:
        AbstractSequence: ``alpha_seq(s)``, promoted only when some sequence in
        ``deeper`` extends ``s`` by a tuple that leaves the store where the last
        step of ``s`` left it and abstracts to the same tuple as that step.
    """
    a = alpha_seq(s, domain)
    if s.closed or not a.tuples or domain.horizon is not None:
        return a
    last = a.tuples[-1]
    if last.count == INF or (isinstance(last, AStep) and last.pre != last.post):
        return a
    store = next((t.post for t in reversed(s.tuples) if isinstance(t, Step)), None)
    n = len(s.tuples)
    for longer in deeper:
        if len(longer.tuples) <= n or longer.tuples[:n] != s.tuples:
            continue
        t = longer.tuples[n]
        if isinstance(t, Step) and (t.pre != t.post or (store is not None and t.post != store)):
            continue
        if body(alpha_tuple(t, domain)) == body(last):
            return AbstractSequence(a.tuples[:-1] + (replace(last, count=INF),), False)
    return a


def abstract_spec(spec: Specification, domain: AbstractDomain) -> Interpretation:
    """Read the sequences of a specification file into an abstract interpretation."""
    entries = {}
    for key, seqs in spec.entries.items():
        out = []
        for seq in seqs:
            tuples = []
            for t in seq.tuples:
                neg = domain.tau_minus(t.neg) if t.neg else domain.lower_bottom()
                if isinstance(t, SpecStep):
                    cond = AbstractCondition(domain.tau_plus(t.pos), neg)
                    tuples.append(AStep(cond, domain.tau_plus(t.pre), domain.tau_plus(t.post), t.count))
                else:
                    tuples.append(AStutter(neg, t.count))
            out.append(within_horizon(AbstractSequence.build(tuples, seq.closed), domain))
        entries[key] = abstract_maximal(out)
    return Interpretation(entries)


def gamma_bounded(seqs: Iterable[AbstractSequence], domain: AbstractDomain, depth: int) -> SequenceSet:
    """
    Concrete sequences of at most ``depth`` tuples represented by ``seqs``.

    Raises:
        UnsupportedDomainError: For domains whose values are not concrete constraints.
    """
    if not domain.concretizable:
        raise UnsupportedDomainError(f"domain {domain.name!r} cannot be concretized")
    out = set()
    for s in seqs:
        tuples: List[Union[Step, Stutter]] = []
        for t in s.tuples:
            n = depth if t.count == INF else int(t.count)
            if isinstance(t, AStep):
                concrete: Union[Step, Stutter] = Step(Condition(t.cond.pos, t.cond.neg), t.pre, t.post)
            else:
                concrete = Stutter(t.neg)
            tuples.extend([concrete] * n)
        out.add(Sequence(tuple(tuples), s.closed).truncate(depth))
    return maximal(out)


# -----------------------------
# Abstract semantic operators
# -----------------------------


def _rename_tuple(t: AbstractTuple, mapping, domain: AbstractDomain) -> AbstractTuple:
    if isinstance(t, AStutter):
        return AStutter(domain.lower_rename(t.neg, mapping), t.count)
    cond = AbstractCondition(domain.rename(t.cond.pos, mapping), domain.lower_rename(t.cond.neg, mapping))
    return AStep(cond, domain.rename(t.pre, mapping), domain.rename(t.post, mapping), t.count)


def abstract_rename(s: AbstractSequence, mapping, domain: AbstractDomain) -> AbstractSequence:
    if not mapping:
        return s
    return AbstractSequence.build((_rename_tuple(t, mapping, domain) for t in s.tuples), s.closed)


def abstract_prop(h: Any, s: AbstractSequence, domain: AbstractDomain) -> AbstractSequence:
    """
    Add the abstract store ``h`` to the stores of ``s``, and to every condition
    that already asks for something.

    Cut (open) before a step whose condition no longer holds and right after a
    step whose end store becomes ff; counts are kept.
    """
    if domain.is_top(h) or not s.tuples:
        return s
    out: List[AbstractTuple] = []
    for t in s.tuples:
        if isinstance(t, AStutter):
            out.append(t)
            continue
        pos = t.cond.pos if domain.is_top(t.cond.pos) else domain.meet(t.cond.pos, h)
        cond = AbstractCondition(pos, t.cond.neg)
        pre = domain.meet(t.pre, h)
        if not cond.satisfied_by(pre, domain):
            return AbstractSequence.build(out, False)
        post = domain.meet(t.post, h)
        out.append(AStep(cond, pre, post, t.count))
        if domain.is_bottom(post):
            return AbstractSequence.build(out, False)
    return AbstractSequence.build(out, s.closed)


def _after(s: AbstractSequence, used: float) -> AbstractSequence:
    head = s.tuples[0]
    if head.count == used:
        return AbstractSequence(s.tuples[1:], s.closed)
    return AbstractSequence((replace(head, count=head.count - used),) + s.tuples[1:], s.closed)


def abstract_par_merge(sa: AbstractSequence, sb: AbstractSequence, domain: AbstractDomain) -> Optional[AbstractSequence]:
    """Synchronize two abstract sequences repetition by repetition; None when they cannot."""
    if not sb.tuples:
        return sa if sb.closed else sa.opened()
    if not sa.tuples:
        return sb if sa.closed else sb.opened()
    ta, tb = sa.tuples[0], sb.tuples[0]
    k = min(ta.count, tb.count)
    ra, rb = _after(sa, k), _after(sb, k)
    if isinstance(ta, AStutter) and isinstance(tb, AStutter):
        rest = abstract_par_merge(ra, rb, domain)
        return None if rest is None else rest.cons(AStutter(domain.lower_join(ta.neg, tb.neg), k))
    if isinstance(ta, AStutter):
        return abstract_par_merge(sb, sa, domain)
    if isinstance(tb, AStutter):
        cond = AbstractCondition(ta.cond.pos, domain.lower_join(ta.cond.neg, tb.neg))
        if not cond.satisfied_by(ta.pre, domain):
            return None
        rest = abstract_par_merge(ra, abstract_prop(ta.post, rb, domain), domain)
        return None if rest is None else rest.cons(AStep(cond, ta.pre, ta.post, k))
    cond = AbstractCondition(domain.meet(ta.cond.pos, tb.cond.pos), domain.lower_join(ta.cond.neg, tb.cond.neg))
    pre = domain.meet(ta.pre, tb.pre)
    if not cond.satisfied_by(pre, domain):
        return None
    post = domain.meet(ta.post, tb.post)
    if domain.is_bottom(post):
        return AbstractSequence((AStep(cond, pre, post),))
    rest = abstract_par_merge(abstract_prop(tb.post, ra, domain), abstract_prop(ta.post, rb, domain), domain)
    return None if rest is None else rest.cons(AStep(cond, pre, post, k))


def abstract_x_connected(s: AbstractSequence, x: str, domain: AbstractDomain) -> bool:
    previous = domain.top()
    for t in s.tuples:
        if not isinstance(t, AStep):
            continue
        visible = domain.hide(x, t.pre)
        if domain.meet(visible, previous) != t.pre:
            return False
        if t.count > 1 and domain.meet(visible, t.post) != t.pre:
            return False
        previous = t.post
    return True


def abstract_project(x: str, s: AbstractSequence, domain: AbstractDomain) -> AbstractSequence:
    out: List[AbstractTuple] = []
    for t in s.tuples:
        if isinstance(t, AStutter):
            out.append(AStutter(domain.lower_hide(x, t.neg), t.count))
        else:
            cond = AbstractCondition(domain.hide(x, t.cond.pos), domain.lower_hide(x, t.cond.neg))
            out.append(AStep(cond, domain.hide(x, t.pre), domain.hide(x, t.post), t.count))
    return AbstractSequence.build(out, s.closed)


def _ask(agent: Ask, interp: Interpretation, domain: AbstractDomain, depth: int) -> AbstractSet:
    base: Set[AbstractSequence] = set()
    for guard, branch in agent.branches:
        g = domain.tau_plus(guard)
        head = AStep(AbstractCondition(g, domain.lower_bottom()), g, g)
        for s in abstract_agent_sem(branch, interp, domain, depth - 1):
            base.add(abstract_prop(g, s, domain).cons(head).truncate(depth))
    if any(guard.is_tt for guard, _branch in agent.branches):
        return abstract_maximal(base)
    neg = domain.tau_minus(guard for guard, _branch in agent.branches)
    out: Set[AbstractSequence] = set(base)
    for k in range(1, depth + 1):
        if k == depth:
            out.add(AbstractSequence((AStutter(neg, k),)))
            break
        out.update(s.cons(AStutter(neg, k)).truncate(depth) for s in base)
    return abstract_maximal(out)


def _guarded(g: Any, seqs: Iterable[AbstractSequence], domain: AbstractDomain) -> Set[AbstractSequence]:
    """Sequences of a branch taken because ``g`` holds at the first instant."""
    out: Set[AbstractSequence] = set()
    for s in seqs:
        if not s.tuples:
            if s.closed:
                out.add(AbstractSequence((AStep(AbstractCondition(g, domain.lower_bottom()), g, g),), True))
            else:
                out.add(s)
            continue
        t, rest = s.tuples[0], AbstractSequence(s.tuples[1:], s.closed)
        if isinstance(t, AStep):
            cond = AbstractCondition(domain.meet(t.cond.pos, g), t.cond.neg)
            pre = domain.meet(t.pre, g)
            if not cond.satisfied_by(pre, domain):
                continue
            post = domain.meet(t.post, g)
            head = AStep(cond, pre, post, t.count)
            if domain.is_bottom(post):
                out.add(AbstractSequence((head,)))
            else:
                out.add(abstract_prop(g, rest, domain).cons(head))
        else:
            cond = AbstractCondition(g, t.neg)
            if not cond.satisfied_by(g, domain):
                continue
            remaining = rest if t.count == 1 else rest.cons(replace(t, count=t.count - 1))
            out.add(abstract_prop(g, remaining, domain).cons(AStep(cond, g, g)))
    return out


def _refused(d: Constraint, seqs: Iterable[AbstractSequence], domain: AbstractDomain) -> Set[AbstractSequence]:
    """Sequences of a branch taken because ``d`` is not entailed at the first instant."""
    top = domain.top()
    out: Set[AbstractSequence] = set()
    for s in seqs:
        if not s.tuples:
            if s.closed:
                cond = AbstractCondition(top, domain.inj_dual(d, domain.lower_bottom()))
                if cond.satisfied_by(top, domain):
                    out.add(AbstractSequence((AStep(cond, top, top),), True))
            else:
                out.add(s)
            continue
        t = s.tuples[0]
        remaining = _after(s, 1)
        if isinstance(t, AStep):
            cond = AbstractCondition(t.cond.pos, domain.inj_dual(d, t.cond.neg))
            if cond.satisfied_by(t.pre, domain):
                out.add(remaining.cons(AStep(cond, t.pre, t.post)))
        else:
            cond = AbstractCondition(top, domain.inj_dual(d, t.neg))
            if cond.satisfied_by(top, domain):
                out.add(remaining.cons(AStep(cond, top, top)))
    return out


def _now(agent: Now, interp: Interpretation, domain: AbstractDomain, depth: int) -> AbstractSet:
    out = _guarded(domain.tau_plus(agent.guard), abstract_agent_sem(agent.then, interp, domain, depth), domain)
    otherwise = abstract_agent_sem(agent.else_, interp, domain, depth)
    complement = domain.complement(agent.guard)
    if complement is not None:
        out |= _guarded(domain.tau_plus(complement), otherwise, domain)
    else:
        out |= _refused(agent.guard, otherwise, domain)
    return abstract_maximal(s.truncate(depth) for s in out)


def _resolved_call(call: Call, interp: Interpretation, domain: AbstractDomain, depth: int) -> AbstractSet:
    resolution = interp.resolve(call)
    if resolution is None:
        raise MissingSpecError(f"{call.proc}/{len(call.args)}")
    top = domain.top()
    head = AStep(AbstractCondition(top, domain.lower_bottom()), top, top)
    out = set()
    for s in interp[resolution.key]:
        s = abstract_rename(s, resolution.mapping, domain)
        for var, literal in resolution.bindings:
            bound = abstract_prop(domain.tau_plus(binding_constraint(var, literal)), s, domain)
            s = abstract_project(var, bound, domain)
        out.add(s.cons(head).truncate(depth))
    return abstract_maximal(out)


def _call(call: Call, interp: Interpretation, domain: AbstractDomain, depth: int) -> AbstractSet:
    cases = call_cases(call, interp.keys())
    if len(cases) == 1 and not cases[0].locals:
        return _resolved_call(cases[0].call, interp, domain, depth)
    out: Set[AbstractSequence] = set()
    for case in cases:
        seqs: Iterable[AbstractSequence] = abstract_agent_sem(case.agent, interp, domain, depth)
        if not case.guard.is_tt:
            seqs = _guarded(domain.tau_plus(case.guard), seqs, domain)
        for d in sorted(case.refused, key=str):
            seqs = _refused(d, seqs, domain)
        out.update(seqs)
    return abstract_maximal(s.truncate(depth) for s in out)


def abstract_agent_sem(agent: Agent, interp: Interpretation, domain: AbstractDomain, depth: int) -> AbstractSet:
    """
    Abstract semantics of ``agent`` under the abstract interpretation ``interp``.

    Args:
        agent (Agent): Agent to evaluate.
        interp (Interpretation): Abstract sequences of the processes the agent calls.
        domain (AbstractDomain): Domain the tuples are drawn from.
        depth (int): Maximum number of finite repetitions per sequence.

    Raises:
        MissingSpecError: If a call has no entry in ``interp``.
    """
    if domain.horizon is not None:
        depth = min(depth, domain.horizon)
    if depth <= 0:
        return frozenset({A_EPSILON})
    if isinstance(agent, Skip):
        return frozenset({A_BOX})
    if isinstance(agent, Tell):
        top = domain.top()
        post = domain.tau_plus(agent.constraint)
        step = AStep(AbstractCondition(top, domain.lower_bottom()), top, post)
        return frozenset({AbstractSequence((step,), not domain.is_bottom(post))})
    if isinstance(agent, Ask):
        return _ask(agent, interp, domain, depth)
    if isinstance(agent, Now):
        return _now(agent, interp, domain, depth)
    if isinstance(agent, Par):
        left = abstract_agent_sem(agent.left, interp, domain, depth)
        right = abstract_agent_sem(agent.right, interp, domain, depth)
        merged = (abstract_par_merge(a, b, domain) for a in left for b in right)
        return abstract_maximal(m.truncate(depth) for m in merged if m is not None)
    if isinstance(agent, Hide):
        inner = abstract_agent_sem(agent.body, interp, domain, depth)
        return abstract_maximal(
            abstract_project(agent.var, s, domain) for s in inner if abstract_x_connected(s, agent.var, domain)
        )
    return _call(agent, interp, domain, depth)


def abstract_immediate_consequences(
    declarations: Iterable[Declaration], interp: Interpretation, domain: AbstractDomain, depth: int
) -> Interpretation:
    """One application of the abstract immediate consequences operator."""
    declarations = list(declarations)
    keys = declaration_keys(declarations)
    joined: Dict = {key: set() for key in keys.values()}
    for decl in declarations:
        key = keys[decl.head.shape]
        decl_body = substitute(decl.body, head_renaming(decl, key))
        joined[key] |= abstract_agent_sem(decl_body, interp, domain, depth)
    logger.debug("abstract consequences computed for {} keys", len(joined))
    return Interpretation({key: abstract_maximal(seqs) for key, seqs in joined.items()})
