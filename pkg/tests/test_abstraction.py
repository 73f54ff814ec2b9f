"""Abstract sequences, the alpha/gamma pair and the abstract agent semantics."""

import pytest
from hypothesis import given, settings, strategies as st

from core.constraints import TRIVIAL, TT, Condition, IntCmp, TokenEq, make
from core.errors import MissingSpecError, TccpValidationError, UnsupportedDomainError
from tccp.abstraction import (
    A_BOX,
    A_EPSILON,
    AbstractCondition,
    AbstractSequence,
    AStep,
    AStutter,
    abstract_agent_sem,
    abstract_immediate_consequences,
    abstract_le,
    abstract_maximal,
    abstract_par_merge,
    abstract_prefix,
    abstract_prop,
    abstract_spec,
    abstract_x_connected,
    alpha_seq,
    alpha_tuple,
    alpha_set,
    body,
    gamma_bounded,
    promote_infinite,
    show_abstract_set,
    show_sequence,
    within_horizon,
)
from tccp.domains import REVERSED_TABLE, STANDARD_TABLE, DepthDomain, IdentityDomain, IntervalDomain
from tccp.interpretation import Interpretation
from tccp.sequences import Sequence, Step, Stutter, prefix_le
from tccp.syntax import INF, Ask, Call, Now, Skip, Tell

IDENTITY = IdentityDomain()
INTERVAL = IntervalDomain(STANDARD_TABLE)
EMPTY = Interpretation({})

ON = make([TokenEq("c", "on")])
POSITIVE = make([IntCmp("x", ">", 0)])

IDLE = AStep(AbstractCondition(TT, frozenset()), TT, TT)
LIT = AStep(AbstractCondition(TT, frozenset()), TT, ON)

POOL = [Step(TRIVIAL, TT, ON), Step(TRIVIAL, ON, ON), Step(Condition(TT, frozenset({ON})), TT, TT), Stutter(frozenset({ON}))]
DEPTH = 5

sequences = st.builds(
    lambda tuples, closed: Sequence(tuple(tuples), closed),
    st.lists(st.sampled_from(POOL), max_size=DEPTH),
    st.booleans(),
)
sequence_sets = st.lists(sequences, min_size=1, max_size=4).map(frozenset)


def counted(t, n):
    return AStep(t.cond, t.pre, t.post, n)


class TestAbstractSequence:
    def test_build_fuses_equal_neighbours(self):
        s = AbstractSequence.build([IDLE, IDLE, counted(IDLE, 2), LIT], True)
        assert s.tuples == (counted(IDLE, 4), LIT)
        assert s.closed

    def test_build_stops_after_inf(self):
        s = AbstractSequence.build([counted(IDLE, INF), LIT], True)
        assert s.tuples == (counted(IDLE, INF),)
        assert not s.closed

    @pytest.mark.parametrize(
        "tuples, closed",
        [
            ((counted(IDLE, INF), LIT), False),
            ((counted(IDLE, INF),), True),
            ((counted(IDLE, 0),), False),
            ((counted(IDLE, 1.5),), False),
        ],
    )
    def test_invalid(self, tuples, closed):
        with pytest.raises(TccpValidationError):
            AbstractSequence(tuples, closed)

    def test_truncate_counts_repetitions(self):
        s = AbstractSequence((counted(IDLE, 3), LIT), True)
        assert s.truncate(2) == AbstractSequence((counted(IDLE, 2),))
        assert s.truncate(3) == AbstractSequence((counted(IDLE, 3),))
        assert s.truncate(4) == s

    def test_inf_is_never_cut(self):
        s = AbstractSequence((LIT, counted(IDLE, INF)))
        assert s.truncate(1) == s
        assert s.truncate(0) == A_EPSILON

    def test_printing(self):
        s = AbstractSequence((counted(IDLE, 3), LIT), True)
        assert show_sequence(s, IDENTITY) == "<tt | {}> tt -> tt ^3 ; <tt | {}> tt -> c = on ; box"
        assert show_sequence(A_EPSILON, IDENTITY) == "..."
        assert show_abstract_set([], IDENTITY) == "{}"


class TestOrder:
    def test_fewer_repetitions_is_a_prefix(self):
        longer = AbstractSequence((counted(IDLE, 3), LIT), True)
        assert abstract_prefix(AbstractSequence((counted(IDLE, 2),)), longer)
        assert not abstract_prefix(AbstractSequence((counted(IDLE, 4),)), longer)
        assert abstract_prefix(AbstractSequence((counted(IDLE, 7),)), AbstractSequence((counted(IDLE, INF),)))

    def test_closed_needs_equality(self):
        longer = AbstractSequence((counted(IDLE, 3), LIT), True)
        assert not abstract_prefix(AbstractSequence((counted(IDLE, 3),), True), longer)
        assert abstract_prefix(longer, longer)

    def test_maximal_and_le(self):
        longer = AbstractSequence((counted(IDLE, 3), LIT), True)
        shorter = AbstractSequence((IDLE,))
        assert abstract_maximal({A_EPSILON, shorter, longer}) == frozenset({longer})
        assert abstract_le({shorter}, {longer})
        assert not abstract_le({longer}, {shorter})

    @given(sequence_sets, sequence_sets)
    @settings(max_examples=500)
    def test_identity_order_is_the_prefix_order(self, r1, r2):
        assert abstract_le(alpha_set(r1, IDENTITY), alpha_set(r2, IDENTITY)) == prefix_le(r1, r2)


class TestAlpha:
    def test_alpha_tuple(self):
        assert alpha_tuple(Step(TRIVIAL, TT, ON), IDENTITY) == LIT
        assert alpha_tuple(Stutter(frozenset({ON})), IDENTITY) == AStutter(frozenset({ON}))
        pos = INTERVAL.tau_plus(POSITIVE)
        t = alpha_tuple(Step(Condition(POSITIVE), POSITIVE, POSITIVE), INTERVAL)
        assert t == AStep(AbstractCondition(pos, INTERVAL.tau_minus(frozenset())), pos, pos)

    def test_equal_steps_collapse(self):
        s = Sequence((Step(TRIVIAL, ON, ON),) * 3)
        assert alpha_seq(s, IDENTITY) == AbstractSequence((AStep(AbstractCondition(TT, frozenset()), ON, ON, 3),))

    @given(st.lists(st.tuples(st.sampled_from(POOL), st.integers(1, 20)), min_size=1, max_size=4))
    @settings(max_examples=300)
    def test_planted_runs_are_counted(self, runs):
        planted = []
        for t, k in runs:
            if planted and planted[-1][0] == t:
                continue
            planted.append((t, k))
        s = Sequence(tuple(t for t, k in planted for _ in range(k)))
        a = alpha_seq(s, IDENTITY)
        assert [t.count for t in a.tuples] == [k for _t, k in planted]
        assert all(body(x) != body(y) for x, y in zip(a.tuples, a.tuples[1:]))

    def test_interval_collapses_different_values(self):
        big = [make([IntCmp("x", ">", k)]) for k in (11, 20, 30)]
        s = Sequence(tuple(Step(Condition(c), c, c) for c in big))
        assert show_sequence(alpha_seq(s, INTERVAL), INTERVAL) == "<gt10(x) | {}> gt10(x) -> gt10(x) ^3 ; ..."

    def test_promote_infinite(self):
        tell, idle = Step(TRIVIAL, TT, ON), Step(TRIVIAL, ON, ON)
        cut = Sequence((tell, idle, idle), False)
        repeated = Sequence((tell, idle, idle, idle), False)
        assert promote_infinite(cut, {repeated}, IDENTITY) == AbstractSequence((LIT, counted(alpha_tuple(idle, IDENTITY), INF)))

    def test_promotion_needs_a_repeating_extension(self):
        tell, idle = Step(TRIVIAL, TT, ON), Step(TRIVIAL, ON, ON)
        cut = Sequence((tell, idle, idle), False)
        plain = alpha_seq(cut, IDENTITY)
        moved = Sequence((tell, idle, idle, Step(TRIVIAL, ON, make([TokenEq("c", "on"), IntCmp("x", ">", 0)]))), False)
        assert promote_infinite(cut, {moved}, IDENTITY) == plain
        assert promote_infinite(cut, set(), IDENTITY) == plain
        assert promote_infinite(cut, {Sequence((idle, idle, idle, idle), False)}, IDENTITY) == plain
        assert promote_infinite(Sequence((tell, idle), True), {Sequence((tell, idle, idle), False)}, IDENTITY).closed
        assert promote_infinite(Sequence((tell,), False), {Sequence((tell, idle), False)}, IDENTITY) == AbstractSequence((LIT,))

    def test_horizon_cuts_infinite_tuples(self):
        two = DepthDomain(2)
        looping = AbstractSequence((LIT, counted(IDLE, INF)))
        assert within_horizon(looping, two) == AbstractSequence((LIT, IDLE))
        assert within_horizon(looping, IDENTITY) == looping
        assert within_horizon(AbstractSequence((LIT,), True), two) == AbstractSequence((LIT,), True)

    def test_horizon_caps_the_semantics(self):
        two = DepthDomain(2)
        seqs = abstract_agent_sem(Ask(((ON, Skip()),)), EMPTY, two, 8)
        assert sorted(show_sequence(s, two) for s in seqs) == [
            "<c = on | {}> c = on -> c = on ; box",
            "stutt{c = on} ; <c = on | {}> c = on -> c = on ; ...",
            "stutt{c = on} ^2 ; ...",
        ]

    def test_gamma_expands_counts(self):
        s = AbstractSequence((LIT, counted(IDLE, INF)))
        (concrete,) = gamma_bounded({s}, IDENTITY, 3)
        assert len(concrete) == 3
        assert not concrete.closed

    def test_gamma_needs_concrete_values(self):
        with pytest.raises(UnsupportedDomainError):
            gamma_bounded({A_BOX}, INTERVAL, 3)

    @given(sequences)
    @settings(max_examples=500)
    def test_alpha_is_monotone(self, s):
        for k in range(len(s) + 1):
            assert abstract_prefix(alpha_seq(s.truncate(k), IDENTITY), alpha_seq(s, IDENTITY))

    @given(sequence_sets)
    @settings(max_examples=500)
    def test_gamma_alpha_is_extensive(self, seqs):
        assert prefix_le(seqs, gamma_bounded(alpha_set(seqs, IDENTITY), IDENTITY, DEPTH))

    @given(sequence_sets)
    @settings(max_examples=500)
    def test_alpha_gamma_is_reductive(self, seqs):
        abstract = alpha_set(seqs, IDENTITY)
        assert abstract_le(alpha_set(gamma_bounded(abstract, IDENTITY, DEPTH), IDENTITY), abstract)


class TestOperators:
    def test_prop_with_top_is_identity(self):
        s = AbstractSequence((LIT,), True)
        assert abstract_prop(TT, s, IDENTITY) == s

    def test_prop_keeps_counts(self):
        s = AbstractSequence((counted(IDLE, 2),), True)
        strengthened = abstract_prop(ON, s, IDENTITY)
        assert strengthened == AbstractSequence((AStep(AbstractCondition(TT, frozenset()), ON, ON, 2),), True)

    def test_par_merge_splits_counts(self):
        three = AbstractSequence((counted(IDLE, 3),), True)
        one = AbstractSequence((IDLE,), True)
        assert abstract_par_merge(three, one, IDENTITY) == three

    def test_par_merge_with_an_unfinished_side_is_open(self):
        three = AbstractSequence((counted(IDLE, 3),), True)
        assert abstract_par_merge(three, A_EPSILON, IDENTITY) == AbstractSequence((counted(IDLE, 3),))
        assert abstract_par_merge(A_EPSILON, three, IDENTITY) == AbstractSequence((counted(IDLE, 3),))
        assert abstract_par_merge(three, A_BOX, IDENTITY) == three

    def test_par_merge_refused_condition(self):
        guarded = AbstractSequence((AStep(AbstractCondition(TT, frozenset({ON})), TT, TT),), True)
        telling = AbstractSequence((LIT,), True)
        merged = abstract_par_merge(guarded, telling, IDENTITY)
        assert merged == AbstractSequence((AStep(AbstractCondition(TT, frozenset({ON})), TT, ON),), True)
        blocked = AbstractSequence((AStep(AbstractCondition(ON, frozenset({ON})), ON, ON),), True)
        assert abstract_par_merge(blocked, telling, IDENTITY) is None

    def test_x_connected(self):
        pos = INTERVAL.tau_plus(POSITIVE)
        free = AbstractCondition(INTERVAL.top(), frozenset())
        assert abstract_x_connected(AbstractSequence((AStep(free, INTERVAL.top(), pos), AStep(free, pos, pos))), "x", INTERVAL)
        assert not abstract_x_connected(AbstractSequence((AStep(free, pos, pos),)), "x", INTERVAL)


class TestAgentSemantics:
    def test_tell(self):
        seqs = abstract_agent_sem(Tell(POSITIVE), EMPTY, INTERVAL, 3)
        assert show_abstract_set(seqs, INTERVAL) == "{\n  <tt | {}> tt -> pos(x) ; box\n}"

    def test_ask_stutters_with_counts(self):
        seqs = abstract_agent_sem(Ask(((POSITIVE, Skip()),)), EMPTY, INTERVAL, 3)
        assert sorted(show_sequence(s, INTERVAL) for s in seqs) == [
            "<pos(x) | {}> pos(x) -> pos(x) ; box",
            "stutt{pos(x)} ; <pos(x) | {}> pos(x) -> pos(x) ; box",
            "stutt{pos(x)} ^2 ; <pos(x) | {}> pos(x) -> pos(x) ; box",
            "stutt{pos(x)} ^3 ; ...",
        ]

    def test_now_uses_the_complement(self):
        seqs = abstract_agent_sem(Now(POSITIVE, Skip(), Skip()), EMPTY, INTERVAL, 3)
        assert sorted(show_sequence(s, INTERVAL) for s in seqs) == [
            "<neg(x) | {}> neg(x) -> neg(x) ; box",
            "<pos(x) | {}> pos(x) -> pos(x) ; box",
        ]

    def test_now_without_complement(self):
        seqs = abstract_agent_sem(Now(POSITIVE, Skip(), Skip()), EMPTY, IDENTITY, 3)
        assert sorted(show_sequence(s, IDENTITY) for s in seqs) == [
            "<tt | {x > 0}> tt -> tt ; box",
            "<x > 0 | {}> x > 0 -> x > 0 ; box",
        ]

    def test_call_reads_the_interpretation(self):
        key_seq = AbstractSequence((LIT,), True)
        interp = Interpretation({Call("p").pattern: frozenset({key_seq})})
        seqs = abstract_agent_sem(Call("p"), interp, IDENTITY, 3)
        assert seqs == frozenset({AbstractSequence((IDLE, LIT), True)})

    def test_immediate_consequences_read_bodies(self, timeout_fixed):
        program, spec = timeout_fixed
        sz = abstract_spec(spec, IDENTITY)
        tp = abstract_immediate_consequences(program.declarations[2:], sz, IDENTITY, 8)
        (key,) = tp.keys()
        assert show_abstract_set(tp[key], IDENTITY) == "{\n  <tt | {}> tt -> alert = no ; box\n}"

    def test_missing_entry(self):
        with pytest.raises(MissingSpecError):
            abstract_agent_sem(Call("p"), EMPTY, IDENTITY, 3)


class TestSpecReading:
    def test_counter_spec_in_both_orientations(self, counter):
        _program, spec = counter
        standard = abstract_spec(spec, INTERVAL)
        (key,) = standard.keys()
        assert sorted(show_sequence(s, INTERVAL) for s in standard[key]) == [
            "<gt10(x) | {}> gt10(x) -> gt10(x) ^inf ; ...",
            "<neg(x) | {}> neg(x) -> neg(x) ^inf ; ...",
        ]
        reversed_table = IntervalDomain(REVERSED_TABLE)
        assert len(abstract_spec(spec, reversed_table)[key]) == 2
