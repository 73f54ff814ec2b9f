"""
Concrete denotational semantics over conditional reactive sequences.

Every set computed here is cut at ``depth`` tuples (a cut sequence is open)
and kept maximal. The fixpoint starts from the interpretation mapping every
key to the empty sequence.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Set

from loguru import logger

from core.constraints import FF, TRIVIAL, TT, Condition, Constraint, hide, merge, satisfies
from core.errors import TccpValidationError, UnknownProcessError
from tccp.interpretation import Interpretation, binding_constraint, call_cases, declaration_keys, head_renaming
from tccp.sequences import BOX, EPSILON, Sequence, SequenceSet, Step, Stutter, maximal
from tccp.syntax import Agent, Ask, Call, Declaration, Hide, Now, Par, Skip, Tell, substitute


def prop(h: Constraint, s: Sequence) -> Sequence:
    """
    Add ``h`` to every store of ``s``.

    The sequence is cut (open) just before a step whose strengthened start
    store no longer satisfies its condition, and right after a step whose end
    store becomes ff.
    """
    if h.is_tt or not s.tuples:
        return s
    out = []
    for t in s.tuples:
        if isinstance(t, Stutter):
            out.append(t)
            continue
        pre = merge(t.pre, h)
        if not satisfies(pre, t.cond):
            return Sequence(tuple(out))
        post = merge(t.post, h)
        out.append(Step(t.cond, pre, post))
        if post.bottom:
            return Sequence(tuple(out))
    return Sequence(tuple(out), s.closed)


def par_merge(sa: Sequence, sb: Sequence) -> Optional[Sequence]:
    """
    Combine two sequences running in parallel; None when they cannot synchronize.

    Ending one side with box leaves the other untouched; an unfinished (empty
    open) side makes the result open.
    """
    if not sb.tuples:
        return sa if sb.closed else sa.opened()
    if not sa.tuples:
        return sb if sa.closed else sb.opened()
    ta, tb = sa.tuples[0], sb.tuples[0]
    ra, rb = Sequence(sa.tuples[1:], sa.closed), Sequence(sb.tuples[1:], sb.closed)
    if isinstance(ta, Stutter) and isinstance(tb, Stutter):
        rest = par_merge(ra, rb)
        return None if rest is None else rest.cons(Stutter(ta.neg | tb.neg))
    if isinstance(ta, Stutter):
        return par_merge(sb, sa)
    if isinstance(tb, Stutter):
        cond = ta.cond.with_negatives(tb.neg)
        if not satisfies(ta.pre, cond):
            return None
        rest = par_merge(ra, prop(ta.post, rb))
        return None if rest is None else rest.cons(Step(cond, ta.pre, ta.post))
    cond = ta.cond.merge(tb.cond)
    pre = merge(ta.pre, tb.pre)
    if not satisfies(pre, cond):
        return None
    post = merge(ta.post, tb.post)
    if post.bottom:
        return Sequence((Step(cond, pre, FF),))
    rest = par_merge(prop(tb.post, ra), prop(ta.post, rb))
    return None if rest is None else rest.cons(Step(cond, pre, post))


def x_connected(s: Sequence, x: str) -> bool:
    """
    Local ``x`` information in a start store can only come from the previous step.

    The first step must start without information on ``x``; every later step
    must start from what is visible without ``x`` plus the previous step's end store.
    """
    previous = TT
    for t in s.tuples:
        if isinstance(t, Step):
            if merge(hide(x, t.pre), previous) != t.pre:
                return False
            previous = t.post
    return True


def project(x: str, s: Sequence) -> Sequence:
    return Sequence(tuple(t.project(x) for t in s.tuples), s.closed)


def hide_sem(x: str, inner: Iterable[Sequence]) -> SequenceSet:
    return maximal(project(x, s) for s in inner if x_connected(s, x))


def _ask_sem(agent: Ask, interp: Interpretation, depth: int) -> SequenceSet:
    base: Set[Sequence] = set()
    for guard, body in agent.branches:
        head = Step(Condition(guard), guard, guard)
        for s in agent_sem(body, interp, depth - 1):
            base.add(prop(guard, s).cons(head).truncate(depth))
    if any(guard.is_tt for guard, _body in agent.branches):
        return maximal(base)
    stutter = Stutter(frozenset(guard for guard, _body in agent.branches))
    out: Set[Sequence] = set(base)
    for k in range(1, depth + 1):
        prefix = (stutter,) * k
        if k == depth:
            out.add(Sequence(prefix))
            break
        out.update(Sequence(prefix + s.tuples, s.closed).truncate(depth) for s in base)
    return maximal(out)


def _guarded(d: Constraint, seqs: Iterable[Sequence]) -> Set[Sequence]:
    """Sequences of a branch taken because the store entails ``d`` at the first instant."""
    out: Set[Sequence] = set()
    for s in seqs:
        if s == EPSILON:
            out.add(s)
        elif s == BOX:
            out.add(Sequence((Step(Condition(d), d, d),), True))
        else:
            t, rest = s.tuples[0], Sequence(s.tuples[1:], s.closed)
            if isinstance(t, Step):
                cond = Condition(merge(t.cond.pos, d), t.cond.neg)
                pre = merge(t.pre, d)
                if not satisfies(pre, cond):
                    continue
                post = merge(t.post, d)
                head = Step(cond, pre, post)
                out.add(Sequence((head,)) if post.bottom else prop(d, rest).cons(head))
            else:
                cond = Condition(d, t.neg)
                if satisfies(d, cond):
                    out.add(prop(d, rest).cons(Step(cond, d, d)))
    return out


def _refused(d: Constraint, seqs: Iterable[Sequence]) -> Set[Sequence]:
    """Sequences of a branch taken because the store does not entail ``d`` at the first instant."""
    out: Set[Sequence] = set()
    for s in seqs:
        if s == EPSILON:
            out.add(s)
            continue
        if s == BOX:
            cond = Condition(TT, frozenset({d}))
            if not cond.inconsistent:
                out.add(Sequence((Step(cond, TT, TT),), True))
            continue
        t, rest = s.tuples[0], Sequence(s.tuples[1:], s.closed)
        if isinstance(t, Step):
            cond = t.cond.with_negatives({d})
            if satisfies(t.pre, cond):
                out.add(rest.cons(Step(cond, t.pre, t.post)))
        else:
            cond = Condition(TT, t.neg | {d})
            if not cond.inconsistent:
                out.add(rest.cons(Step(cond, TT, TT)))
    return out


def _now_sem(agent: Now, interp: Interpretation, depth: int) -> SequenceSet:
    out = _guarded(agent.guard, agent_sem(agent.then, interp, depth))
    out |= _refused(agent.guard, agent_sem(agent.else_, interp, depth))
    return maximal(s.truncate(depth) for s in out)


def _resolved_call_sem(call: Call, interp: Interpretation, depth: int) -> SequenceSet:
    resolution = interp.resolve(call)
    if resolution is None:
        raise UnknownProcessError(call.proc, len(call.args))
    head = Step(TRIVIAL, TT, TT)
    out = set()
    for s in interp[resolution.key]:
        s = s.rename(resolution.mapping)
        for var, literal in resolution.bindings:
            s = project(var, prop(binding_constraint(var, literal), s))
        out.add(s.cons(head).truncate(depth))
    return maximal(out)


def _call_sem(call: Call, interp: Interpretation, depth: int) -> SequenceSet:
    cases = call_cases(call, interp.keys())
    if len(cases) == 1 and not cases[0].locals:
        return _resolved_call_sem(cases[0].call, interp, depth)
    out: Set[Sequence] = set()
    for case in cases:
        seqs: Iterable[Sequence] = agent_sem(case.agent, interp, depth)
        if not case.guard.is_tt:
            seqs = _guarded(case.guard, seqs)
        for d in sorted(case.refused, key=str):
            seqs = _refused(d, seqs)
        out.update(seqs)
    return maximal(s.truncate(depth) for s in out)


def agent_sem(agent: Agent, interp: Interpretation, depth: int) -> SequenceSet:
    """
    Semantics of ``agent`` under ``interp``, cut at ``depth`` tuples.

    Args:
        agent (Agent): Agent to evaluate.
        interp (Interpretation): Meaning of the processes the agent calls.
        depth (int): Maximum number of tuples per sequence.

    Returns:
        SequenceSet: Maximal set of conditional reactive sequences.

    Raises:
        UnknownProcessError: If a call has no entry in ``interp``.
    """
    if depth <= 0:
        return frozenset({EPSILON})
    if isinstance(agent, Skip):
        return frozenset({BOX})
    if isinstance(agent, Tell):
        return frozenset({Sequence((Step(TRIVIAL, TT, agent.constraint),), not agent.constraint.bottom)})
    if isinstance(agent, Ask):
        return _ask_sem(agent, interp, depth)
    if isinstance(agent, Now):
        return _now_sem(agent, interp, depth)
    if isinstance(agent, Par):
        left = agent_sem(agent.left, interp, depth)
        right = agent_sem(agent.right, interp, depth)
        merged = (par_merge(a, b) for a in left for b in right)
        return maximal(m.truncate(depth) for m in merged if m is not None)
    if isinstance(agent, Hide):
        return hide_sem(agent.var, agent_sem(agent.body, interp, depth))
    return _call_sem(agent, interp, depth)


def bottom_interpretation(declarations: Iterable[Declaration]) -> Interpretation:
    keys = declaration_keys(list(declarations))
    return Interpretation({key: frozenset({EPSILON}) for key in keys.values()})


def immediate_consequences(declarations: Iterable[Declaration], interp: Interpretation, depth: int) -> Interpretation:
    """Join, per most general call, the body semantics of every matching declaration."""
    declarations = list(declarations)
    keys = declaration_keys(declarations)
    joined: Dict = {key: set() for key in keys.values()}
    for decl in declarations:
        key = keys[decl.head.shape]
        body = substitute(decl.body, head_renaming(decl, key))
        joined[key] |= agent_sem(body, interp, depth)
    return Interpretation({key: maximal(seqs) for key, seqs in joined.items()})


def lfp_bounded(declarations: Iterable[Declaration], depth: int) -> Interpretation:
    """
    Iterate the immediate consequences from the bottom interpretation until stable.

    Raises:
        TccpValidationError: If ``depth`` is not positive.
    """
    if depth < 1:
        raise TccpValidationError("depth must be at least 1")
    declarations: List[Declaration] = list(declarations)
    current = bottom_interpretation(declarations)
    limit = depth + 2
    for iteration in range(1, limit + 1):
        following = immediate_consequences(declarations, current, depth)
        logger.debug("fixpoint iteration {}: {} sequences", iteration, sum(len(v) for _k, v in following.items()))
        if following == current:
            return following
        current = following
    logger.warning("fixpoint not stable after {} iterations at depth {}", limit, depth)
    return current


def truncated(s: Sequence, depth: int) -> bool:
    """Open and exactly as long as the bound: the cut is an artifact of ``depth``."""
    return not s.closed and len(s) == depth
