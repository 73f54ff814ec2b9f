"""Denotational semantics: sequence operators, agent semantics and the bounded fixpoint."""

import pytest

from core.constraints import FF, TRIVIAL, TT, Arith, Condition, IntCmp, TokenEq, make, merge
from core.errors import TccpValidationError, UnknownProcessError
from tccp.denotational import (
    agent_sem,
    bottom_interpretation,
    hide_sem,
    immediate_consequences,
    lfp_bounded,
    par_merge,
    prop,
    truncated,
    x_connected,
)
from tccp.interpretation import Interpretation
from tccp.sequences import BOX, EPSILON, Sequence, Step, Stutter, maximal, prefix_le
from tccp.syntax import Ask, Call, CallPattern, Hide, Now, Par, Skip, Tell, parse_program

ON = make([TokenEq("c", "on")])
OFF = make([TokenEq("c", "off")])
D = make([TokenEq("d", "on")])
EMPTY = Interpretation({})


def told(c):
    return Sequence((Step(TRIVIAL, TT, c),), True)


class TestSequences:
    def test_maximal_drops_prefixes(self):
        longer = Sequence((Step(TRIVIAL, TT, ON), Step(TRIVIAL, ON, ON)))
        shorter = Sequence(longer.tuples[:1])
        assert maximal({EPSILON, shorter, longer}) == frozenset({longer})

    def test_box_dominates_epsilon(self):
        assert maximal({EPSILON, BOX}) == frozenset({BOX})

    def test_open_prefix_of_closed(self):
        assert maximal({Sequence(told(ON).tuples), told(ON)}) == frozenset({told(ON)})

    def test_prefix_le(self):
        longer = Sequence((Step(TRIVIAL, TT, ON), Step(TRIVIAL, ON, ON)), True)
        shorter = Sequence(longer.tuples[:1])
        assert prefix_le({shorter}, {longer})
        assert not prefix_le({longer}, {shorter})
        assert not prefix_le({Sequence(longer.tuples[:1], True)}, {longer})

    def test_truncate_opens(self):
        s = Sequence((Step(TRIVIAL, TT, TT),) * 3, True)
        assert s.truncate(2) == Sequence(s.tuples[:2])
        assert s.truncate(3) == s


class TestOperators:
    def test_prop_strengthens_every_store(self):
        assert prop(D, told(ON)) == Sequence((Step(TRIVIAL, D, merge(D, ON)),), True)

    def test_prop_cuts_before_refuted_condition(self):
        s = Sequence((Step(Condition(TT, frozenset({ON})), TT, TT),), True)
        assert prop(ON, s) == EPSILON

    def test_prop_cuts_after_ff(self):
        s = Sequence((Step(TRIVIAL, TT, TT), Step(TRIVIAL, TT, TT)), True)
        assert prop(FF, s) == EPSILON
        assert prop(OFF, Sequence((Step(TRIVIAL, TT, ON),), True)) == Sequence((Step(TRIVIAL, OFF, FF),))

    def test_parallel_tells(self):
        assert par_merge(told(ON), told(D)) == told(merge(ON, D))

    def test_parallel_conflict_ends_in_ff(self):
        assert par_merge(told(ON), told(OFF)) == Sequence((Step(TRIVIAL, TT, FF),))

    def test_unfinished_side_keeps_result_open(self):
        assert par_merge(told(ON), EPSILON) == Sequence(told(ON).tuples)
        assert par_merge(told(ON), BOX) == told(ON)

    def test_stutter_against_step(self):
        stutter = Sequence((Stutter(frozenset({ON})),), True)
        merged = par_merge(told(D), stutter)
        assert merged == Sequence((Step(Condition(TT, frozenset({ON})), TT, D),), True)

    def test_x_connected(self):
        x = make([IntCmp("x", "=", 1)])
        assert x_connected(Sequence((Step(TRIVIAL, TT, x), Step(TRIVIAL, x, x))), "x")
        assert not x_connected(Sequence((Step(TRIVIAL, x, x),)), "x")
        assert not x_connected(Sequence((Step(TRIVIAL, TT, TT), Step(TRIVIAL, x, x))), "x")

    def test_hide_projects_connected_sequences(self):
        x = make([IntCmp("x", "=", 1)])
        inner = {Sequence((Step(TRIVIAL, TT, x),), True), Sequence((Step(TRIVIAL, x, x),), True)}
        assert hide_sem("x", inner) == frozenset({told(TT)})


class TestAgentSemantics:
    def test_skip_and_tell(self):
        assert agent_sem(Skip(), EMPTY, 3) == frozenset({BOX})
        assert agent_sem(Tell(ON), EMPTY, 3) == frozenset({told(ON)})

    def test_depth_zero(self):
        assert agent_sem(Tell(ON), EMPTY, 0) == frozenset({EPSILON})

    def test_ask_with_stutterings(self):
        guard = make([IntCmp("y", ">=", 0)])
        agent = Ask(((guard, Tell(make([IntCmp("z", "<=", 0)]))),))
        seqs = agent_sem(agent, EMPTY, 3)
        assert len(seqs) == 4
        stutter = Stutter(frozenset({guard}))
        assert Sequence((stutter,) * 3) in seqs
        assert sum(1 for s in seqs if s.closed) == 2

    def test_ask_tt_never_suspends(self):
        seqs = agent_sem(Ask(((TT, Skip()),)), EMPTY, 3)
        assert seqs == frozenset({Sequence((Step(Condition(TT), TT, TT),), True)})

    def test_now_skip_skip(self):
        seqs = agent_sem(Now(D, Skip(), Skip()), EMPTY, 3)
        assert seqs == frozenset(
            {
                Sequence((Step(Condition(D), D, D),), True),
                Sequence((Step(Condition(TT, frozenset({D})), TT, TT),), True),
            }
        )

    def test_now_else_transforms_first_step(self):
        seqs = agent_sem(Now(D, Skip(), Tell(ON)), EMPTY, 3)
        assert Sequence((Step(Condition(TT, frozenset({D})), TT, ON),), True) in seqs

    def test_hidden_tell_is_invisible(self):
        x = make([IntCmp("x", "=", 1)])
        assert agent_sem(Hide("x", Tell(x)), EMPTY, 3) == frozenset({told(TT)})

    def test_parallel(self):
        assert agent_sem(Par(Tell(ON), Tell(D)), EMPTY, 3) == frozenset({told(merge(ON, D))})

    def test_unknown_call(self):
        with pytest.raises(UnknownProcessError):
            agent_sem(Call("q"), EMPTY, 3)


class TestFixpoint:
    def test_divergent_call_fills_the_depth(self):
        program = parse_program("p :- p.")
        interp = lfp_bounded(program.declarations, 4)
        (s,) = interp[CallPattern("p")]
        assert s == Sequence((Step(TRIVIAL, TT, TT),) * 4)
        assert truncated(s, 4)

    def test_depth_must_be_positive(self):
        with pytest.raises(TccpValidationError):
            lfp_bounded(parse_program("p :- skip.").declarations, 0)

    def test_fixed_timeout(self, timeout_fixed):
        program, _spec = timeout_fixed
        interp = lfp_bounded(program.declarations, 6)
        key = interp.key_for(program.declarations[0].head)
        assert {str(s) for s in interp[key]} == {
            "<system = ok | {}> system = ok -> system = ok ; <tt | {}> system = ok -> alert = no, system = ok ; box",
            "<tt | {system = ok}> tt -> tt ; <tt | {}> tt -> alert = yes ; box",
        }
        assert not any(truncated(s, 6) for s in interp[key])

    def test_buggy_timeout_keeps_waiting(self, timeout_buggy):
        program, _spec = timeout_buggy
        interp = lfp_bounded(program.declarations, 6)
        key = interp.key_for(program.declarations[0].head)
        assert any(truncated(s, 6) for s in interp[key])
        assert not any("alert = yes" in str(s) for s in interp[key])

    def test_countdown_reaches_the_base_case(self, timeout_fixed):
        program, _spec = timeout_fixed
        interp = lfp_bounded(program.declarations, 8)
        key = interp.key_for(program.declarations[1].head)
        shown = {str(s) for s in interp[key]}
        assert (
            "<tt | {system = ok}> tt -> tt ; <n = 1 | {}> n = 1 -> n = 1 ; "
            "<tt | {system = ok}> n = 1 -> n = 1 ; <tt | {}> n = 1 -> alert = yes, n = 1 ; box"
        ) in shown
        assert any("<n = 2 | {}> n = 2 -> n = 2" in s for s in shown)
        assert all(len(s) <= 8 for s in interp[key])

    def test_arithmetic_call_splits_on_the_literal_head(self, timeout_fixed):
        program, _spec = timeout_fixed
        interp = lfp_bounded(program.declarations, 6)
        call = Call("time-out", (Arith("n", -1),))
        for s in agent_sem(call, interp, 6):
            head = s.tuples[0]
            assert head.cond.pos == make([IntCmp("n", "=", 1)]) or make([IntCmp("n", "=", 1)]) in head.cond.neg

    def test_immediate_consequences_use_bodies_only(self):
        program = parse_program("global alert : {no}.\np :- skip.\naction :- tell(alert = no).")
        interp = immediate_consequences(program.declarations, bottom_interpretation(program.declarations), 3)
        assert interp[CallPattern("p")] == frozenset({BOX})
        assert interp[CallPattern("action")] == frozenset({told(make([TokenEq("alert", "no")]))})

    def test_immediate_consequences_are_monotone(self, timeout_fixed):
        program, _spec = timeout_fixed
        decls = program.declarations
        low = immediate_consequences(decls, bottom_interpretation(decls), 4)
        high = immediate_consequences(decls, lfp_bounded(decls, 4), 4)
        for key in low.keys():
            assert prefix_le(low[key], high[key])
