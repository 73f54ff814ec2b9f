import re

import pytest

from core.errors import MissingSpecError
from tccp import diagnosis
from tccp.abstraction import abstract_spec, show_abstract_set, show_sequence
from tccp.diagnosis import check_incorrect, consequences_of, diagnose, find_uncovered
from tccp.domains import REVERSED_TABLE, STANDARD_TABLE, DepthDomain, IdentityDomain, IntervalDomain
from tccp.syntax import parse_program, parse_spec
from tests.conftest import load

IDENTITY = IdentityDomain()
ON_HOLD = "<tt | {system = ok}> tt -> tt ; <tt | {}> tt -> tt ;"
SIGNAL_FIRST = "<system = ok | {}> system = ok -> system = ok ; <tt | {}> system = ok -> alert = no, system = ok ; box"
SIGNAL_LATE = ON_HOLD + " <system = ok | {}> system = ok -> system = ok ; <tt | {}> system = ok -> alert = no, system = ok ; box"
WAIT_AGAIN = ON_HOLD + " <tt | {system = ok}> tt -> tt ; <tt | {}> tt -> alert = yes ; box"


def _verdicts(report):
    return {v.declaration.split(" :-")[0]: v for v in report.declarations}


def _without_countdown(program):
    text = re.sub(r"spec time-out\(n\) = \{.*?\}\.\n", "", load("timeout.spec"), flags=re.S)
    return parse_spec(text, program)


class TestTimeout:
    def test_buggy_base_case_is_incorrect(self, timeout_buggy):
        """
        The else branch of ``time-out(0)`` refuses ``system = ok`` on the ask
        instant, spends one more instant on the call and then behaves like
        any element of the specified ``time-out(0)``. The ask and call steps
        are both ``<tt | {}> tt -> tt``, so they fuse before the refusal lands
        on the first of them. Of the two sequences outside the specification,
        both four tuples long, the one where the signal arrives late prints first.

        A form that stutters twice and then tells ``alert = no`` cannot come out
        of the equations: an ask on ``tt`` never stutters, and every round of
        the else branch adds a call step.
        """
        program, spec = timeout_buggy
        report = diagnose(program, spec, IDENTITY, 8)
        verdicts = _verdicts(report)
        assert verdicts["time-out(0)"].verdict == "abstractly-incorrect"
        assert verdicts["time-out(0)"].witness == SIGNAL_LATE
        assert verdicts["time-out(0)"].key == "time-out(0)"
        assert verdicts["action"].verdict == "correct-so-far"
        assert report.summary == "incorrectness-warnings"
        assert report.exit_code == 1

    def test_buggy_base_case_consequences(self, timeout_buggy):
        program, spec = timeout_buggy
        key, produced = consequences_of(program.declarations[0], abstract_spec(spec, IDENTITY), IDENTITY, 8)
        assert str(key) == "time-out(0)"
        assert {show_sequence(s, IDENTITY) for s in produced} == {SIGNAL_FIRST, SIGNAL_LATE, WAIT_AGAIN}

    def test_countdown_declaration_is_checked(self, timeout_buggy):
        program, spec = timeout_buggy
        verdict = _verdicts(diagnose(program, spec, IDENTITY, 8))["time-out(n)"]
        assert verdict.key == "time-out(n)"
        assert verdict.verdict == "correct-so-far"

    def test_countdown_reaches_the_base_case(self, timeout_fixed):
        program, spec = timeout_fixed
        _key, produced = consequences_of(program.declarations[1], abstract_spec(spec, IDENTITY), IDENTITY, 8)
        shown = {show_sequence(s, IDENTITY) for s in produced}
        assert (
            "<tt | {system = ok}> tt -> tt ; <n = 1 | {}> n = 1 -> n = 1 ; "
            "<tt | {system = ok}> n = 1 -> n = 1 ; <tt | {}> n = 1 -> alert = yes, n = 1 ; box"
        ) in shown
        assert any(s.startswith("<tt | {system = ok}> tt -> tt ; <tt | {n = 1}> tt -> tt ;") for s in shown)

    def test_unspecified_declaration_is_unchecked(self, timeout_buggy):
        program, _spec = timeout_buggy
        verdict = _verdicts(diagnose(program, _without_countdown(program), IDENTITY, 8))["time-out(n)"]
        assert verdict.verdict == "unchecked"
        assert verdict.reason == "no specification entry for time-out(n)"

    def test_fixed_program_is_certified(self, timeout_fixed):
        program, spec = timeout_fixed
        report = diagnose(program, spec, IDENTITY, 8)
        assert [v.verdict for v in report.declarations] == ["correct-so-far"] * 3
        assert report.uncovered == []
        assert report.summary == "partially-correct-certified"
        assert report.exit_code == 0

    def test_check_incorrect(self, timeout_buggy, timeout_fixed):
        program, spec = timeout_buggy
        sz = abstract_spec(spec, IDENTITY)
        key, witness = check_incorrect(program.declarations[0], sz, IDENTITY)
        assert str(key) == "time-out(0)"
        assert show_sequence(witness, IDENTITY).startswith(ON_HOLD)
        fixed, fixed_spec = timeout_fixed
        assert check_incorrect(fixed.declarations[0], abstract_spec(fixed_spec, IDENTITY), IDENTITY) is None

    def test_consequences_need_a_key(self, timeout_buggy):
        program, _spec = timeout_buggy
        with pytest.raises(MissingSpecError):
            consequences_of(program.declarations[1], abstract_spec(_without_countdown(program), IDENTITY), IDENTITY, 8)

    def test_missing_intended_behavior(self, timeout_fixed):
        # the extra element refuses system = ok, which every caller of action has just entailed
        program, _spec = timeout_fixed
        extra = "<tt | {system = ok}> tt -> alert = yes ; box"
        text = load("timeout.spec").replace(
            "<tt | {}> tt -> alert = no ; box\n}", f"<tt | {{}}> tt -> alert = no ; box,\n  {extra}\n}}"
        )
        spec = parse_spec(text, program)
        report = diagnose(program, spec, IDENTITY, 8)
        assert [v.verdict for v in report.declarations] == ["correct-so-far"] * 3
        assert report.summary == "incomplete"
        assert report.exit_code == 1
        assert [(u.key, u.sequence) for u in report.uncovered] == [("action", extra)]
        uncovered = find_uncovered(program.declarations, abstract_spec(spec, IDENTITY), IDENTITY)
        assert [str(key) for key, _element in uncovered] == ["action"]

    def test_each_declaration_is_applied_once(self, timeout_buggy, monkeypatch):
        program, spec = timeout_buggy
        calls = []
        real = diagnosis.abstract_immediate_consequences

        def recording(declarations, sz, domain, depth):
            calls.append((tuple(declarations), sz))
            return real(declarations, sz, domain, depth)

        monkeypatch.setattr(diagnosis, "abstract_immediate_consequences", recording)
        diagnose(program, spec, IDENTITY, 8)
        assert [decls for decls, _sz in calls] == [(d,) for d in program.declarations]
        assert all(sz == abstract_spec(spec, IDENTITY) for _decls, sz in calls)

    def test_text_report(self, timeout_fixed):
        program, spec = timeout_fixed
        text = diagnose(program, spec, IDENTITY, 8).to_text()
        lines = text.splitlines()
        assert lines[:2] == ["domain: identity", "depth: 8"]
        assert any(line.startswith("[correct-so-far] time-out(n) :-") for line in lines)
        assert not any("reason:" in line for line in lines)
        assert lines[-1] == "summary: partially-correct-certified"


@pytest.mark.parametrize("table", [STANDARD_TABLE, REVERSED_TABLE], ids=lambda t: t.name)
class TestCounter:
    def test_positive_start_is_not_specified(self, counter, table):
        program, spec = counter
        report = diagnose(program, spec, IntervalDomain(table), 8)
        (verdict,) = report.declarations
        assert verdict.verdict == "abstractly-incorrect"
        assert verdict.witness.startswith("<pos(x) | {}> pos(x) -> pos(x)")
        assert report.summary == "incorrectness-warnings"

    def test_above_ten_is_never_reached_first(self, counter, table):
        program, spec = counter
        report = diagnose(program, spec, IntervalDomain(table), 8)
        assert [u.sequence for u in report.uncovered] == ["<gt10(x) | {}> gt10(x) -> gt10(x) ^inf ; ..."]


class TestCounterConsequences:
    def test_reversed_table_display(self, counter):
        program, spec = counter
        domain = IntervalDomain(REVERSED_TABLE)
        key, produced = consequences_of(program.declarations[0], abstract_spec(spec, domain), domain, 8)
        assert str(key) == "p(x)"
        assert show_abstract_set(produced, domain) == (
            "{\n"
            "  <neg(x) | {}> neg(x) -> neg(x) ^inf ; ...\n"
            "  <pos(x) | {}> pos(x) -> pos(x) ^inf ; ...\n"
            "}"
        )


class TestRange:
    def setup_method(self):
        self.program = parse_program(load("range.tccp"))
        self.spec = parse_spec(load("range.spec"), self.program)

    def test_identity_certifies(self):
        assert diagnose(self.program, self.spec, IDENTITY, 8).exit_code == 0

    def test_sign_domain_loses_the_range(self):
        report = diagnose(self.program, self.spec, IntervalDomain(STANDARD_TABLE), 8)
        (verdict,) = report.declarations
        assert verdict.witness == "<tt | {}> tt -> ff ; ..."
        assert report.summary == "incorrectness-warnings"


ALARM = "<failure = yes | {}> failure = yes -> failure = yes ; <tt | {}> failure = yes -> alarm = on, failure = yes ; box"


class TestControl:
    def test_certified_within_three_instants(self, control):
        program, spec = control
        report = diagnose(program, spec, DepthDomain(3), 8)
        assert [v.verdict for v in report.declarations] == ["correct-so-far"]
        assert report.uncovered == []
        assert report.summary == "partially-correct-certified"

    def test_consequences_within_three_instants(self, control):
        program, spec = control
        domain = DepthDomain(3)
        _key, seqs = consequences_of(program.declarations[0], abstract_spec(spec, domain), domain, 8)
        assert show_abstract_set(seqs, domain) == (
            "{\n"
            f"  {ALARM}\n"
            f"  stutt{{failure = yes}} ; {ALARM}\n"
            "  stutt{failure = yes} ^2 ; <failure = yes | {}> failure = yes -> failure = yes ; ...\n"
            "  stutt{failure = yes} ^3 ; ...\n"
            "}"
        )

    def test_unbounded_waiting_is_not_listed(self, control):
        program, spec = control
        (verdict,) = diagnose(program, spec, IDENTITY, 8).declarations
        assert verdict.verdict == "abstractly-incorrect"
        assert verdict.witness == "stutt{failure = yes} ^7 ; <failure = yes | {}> failure = yes -> failure = yes ; ..."

    def test_swallowed_failure_is_incorrect(self, control_buggy):
        program, spec = control_buggy
        report = diagnose(program, spec, DepthDomain(3), 8)
        (verdict,) = report.declarations
        assert verdict.verdict == "abstractly-incorrect"
        assert verdict.witness == "<failure = yes | {}> failure = yes -> failure = yes ; box"
        assert report.summary == "incorrectness-warnings"
