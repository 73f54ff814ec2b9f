"""
Operational oracle: one-time-unit transitions under maximal parallelism and
bounded behavior sets.

``tell``, ``ask`` and process calls take one time unit; ``now`` and ``hide``
resolve inside the current instant. Hidden variables are renamed to globally
fresh names (``x#3``) when their ``hide`` is entered, so the single global
store can carry local information without capture. Fresh names are projected
out of observed stores.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, List, Optional, Set, Tuple

from loguru import logger

from core.constraints import TT, Arith, Constraint, Num, TermEq, Var, entails, hide, make, merge, value_of
from core.errors import InconsistentStoreError, TccpValidationError, UnknownProcessError
from tccp.interpretation import binding_constraint
from tccp.syntax import Agent, Ask, Call, Declaration, Hide, Now, Par, Program, Skip, Tell, substitute


@dataclass(frozen=True)
class Configuration:
    """
    ``<agent, store>``; ``agent`` is None once the computation terminated.

    Attributes:
        agent (Optional[Agent]): What is left to run.
        store (Constraint): Global store, monotonically growing along a run.
        fresh (int): Counter for fresh variable names.
        suspended (bool): Set when the configuration was reached by a stationary extension.
    """

    agent: Optional[Agent]
    store: Constraint
    fresh: int = 0
    suspended: bool = False


@dataclass(frozen=True)
class _Outcome:
    agent: Optional[Agent]
    tell: Constraint
    active: bool
    fresh: int


def _literal_match(param, arg) -> bool:
    return isinstance(param, Var) or arg == param


def _evaluate(call: Call, store: Constraint, fresh: int) -> Tuple[Call, Constraint, int]:
    """Replace arithmetic arguments by their value in ``store``, or by a fresh local bound to them."""
    args = []
    told = TT
    for arg in call.args:
        if isinstance(arg, Arith):
            value = value_of(store, arg.var)
            if value is not None:
                arg = Num(value + arg.offset)
            else:
                local = f"{arg.var}#{fresh}"
                fresh += 1
                told = merge(told, make([TermEq(local, arg)]))
                arg = Var(local)
        args.append(arg)
    return Call(call.proc, tuple(args)), told, fresh


def _unfold(call: Call, store: Constraint, program: Program, fresh: int) -> List[_Outcome]:
    decls = program.declarations_for(call.proc, len(call.args))
    if not decls:
        raise UnknownProcessError(call.proc, len(call.args))
    call, evaluated, fresh = _evaluate(call, store, fresh)
    literal = [
        d
        for d in decls
        if d.head.is_literal and all(_literal_match(p, a) for p, a in zip(d.head.params, call.args))
    ]
    chosen: List[Declaration] = literal or [d for d in decls if not d.head.is_literal]
    outcomes = []
    for decl in chosen:
        mapping = {}
        told = evaluated
        for param, arg in zip(decl.head.params, call.args):
            if not isinstance(param, Var):
                continue
            if isinstance(arg, Var):
                mapping[param.name] = arg.name
            else:
                local = f"{param.name}#{fresh}"
                fresh += 1
                mapping[param.name] = local
                told = merge(told, binding_constraint(local, arg))
        outcomes.append(_Outcome(substitute(decl.body, mapping), told, True, fresh))
    return outcomes


def _tick(agent: Agent, store: Constraint, program: Program, fresh: int) -> List[_Outcome]:
    if isinstance(agent, Skip):
        return [_Outcome(None, TT, False, fresh)]
    if isinstance(agent, Tell):
        return [_Outcome(None, agent.constraint, True, fresh)]
    if isinstance(agent, Ask):
        enabled = [body for guard, body in agent.branches if entails(store, guard)]
        if not enabled:
            return [_Outcome(agent, TT, False, fresh)]
        return [_Outcome(body, TT, True, fresh) for body in enabled]
    if isinstance(agent, Now):
        branch = agent.then if entails(store, agent.guard) else agent.else_
        return _tick(branch, store, program, fresh)
    if isinstance(agent, Hide):
        local = f"{agent.var}#{fresh}"
        return _tick(substitute(agent.body, {agent.var: local}), store, program, fresh + 1)
    if isinstance(agent, Par):
        out = []
        for left in _tick(agent.left, store, program, fresh):
            for right in _tick(agent.right, store, program, left.fresh):
                if left.agent is None or right.agent is None:
                    rest = left.agent if right.agent is None else right.agent
                else:
                    rest = Par(left.agent, right.agent)
                out.append(_Outcome(rest, merge(left.tell, right.tell), left.active or right.active, right.fresh))
        return out
    return _unfold(agent, store, program, fresh)


def step(cfg: Configuration, program: Program) -> FrozenSet[Configuration]:
    """
    All successors of ``cfg`` after one time unit.

    A configuration whose every component is suspended steps to itself with
    ``suspended`` set; a terminated one has no successors.

    Raises:
        InconsistentStoreError: When the store is already ff.
        UnknownProcessError: When a call has no matching declaration.
    """
    if cfg.store.bottom:
        raise InconsistentStoreError("cannot step from an ff store")
    if cfg.agent is None:
        return frozenset()
    successors: Set[Configuration] = set()
    for outcome in _tick(cfg.agent, cfg.store, program, cfg.fresh):
        if not outcome.active:
            if outcome.agent is not None:
                successors.add(Configuration(outcome.agent, cfg.store, outcome.fresh, True))
            continue
        successors.add(Configuration(outcome.agent, merge(cfg.store, outcome.tell), outcome.fresh))
    return frozenset(successors)


def observe(store: Constraint) -> Constraint:
    for name in sorted(store.variables()):
        if "#" in name:
            store = hide(name, store)
    return store


def behaviors(program: Program, initial: Agent, store: Constraint, depth: int) -> FrozenSet[Tuple[Constraint, ...]]:
    """
    Prefix-closed set of observed store sequences of length at most ``depth``.

    The first element of every nonempty sequence is the initial store. An ff
    successor is recorded but not expanded further.
    """
    if depth < 1:
        raise TccpValidationError("depth must be at least 1")
    start = Configuration(initial, store)
    first = (observe(store),)
    traces: Set[Tuple[Constraint, ...]] = {(), first}
    frontier = [(start, first)]
    seen: Set[Tuple[Configuration, Tuple[Constraint, ...]]] = set()
    while frontier:
        cfg, trace = frontier.pop()
        if len(trace) >= depth or cfg.store.bottom or (cfg, trace) in seen:
            continue
        seen.add((cfg, trace))
        for nxt in step(cfg, program):
            extended = trace + (observe(nxt.store),)
            traces.add(extended)
            frontier.append((nxt, extended))
    logger.debug("simulated {} traces up to depth {}", len(traces), depth)
    return frozenset(traces)
