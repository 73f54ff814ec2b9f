"""
Abstract diagnosis: one application of the abstract immediate consequences
operator to each declaration, with the specification as interpretation.

A declaration is abstractly incorrect when it produces a sequence that is
not a prefix of any specified one. A specified sequence is uncovered when no
declaration produces a sequence sharing its first tuple.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Literal, Optional, Set, Tuple

from loguru import logger
from pydantic import BaseModel

from core import config
from core.errors import MissingSpecError
from tccp.abstraction import (
    A_EPSILON,
    AbstractSequence,
    AbstractSet,
    abstract_immediate_consequences,
    abstract_prefix,
    abstract_rename,
    abstract_spec,
    body,
    show_sequence,
)
from tccp.domains import AbstractDomain
from tccp.interpretation import Interpretation, head_renaming
from tccp.syntax import CallPattern, Declaration, Program, Specification

Verdict = Literal["correct-so-far", "abstractly-incorrect", "unchecked"]
Summary = Literal["partially-correct-certified", "incorrectness-warnings", "incomplete"]


class DeclarationVerdict(BaseModel):
    """
    Outcome of checking one declaration.

    Attributes:
        declaration (str): The declaration as printed source.
        key (str): Most general call the declaration was checked against.
        verdict (Verdict): correct-so-far, abstractly-incorrect or unchecked.
        witness (Optional[str]): Shortest produced sequence outside the specification.
        reason (Optional[str]): Why the declaration could not be checked.
    """

    declaration: str
    key: str
    verdict: Verdict
    witness: Optional[str] = None
    reason: Optional[str] = None


class UncoveredElement(BaseModel):
    key: str
    sequence: str


class DiagnosisReport(BaseModel):
    schema_version: str = config.SCHEMA_VERSION
    domain: str
    depth: int
    declarations: List[DeclarationVerdict]
    uncovered: List[UncoveredElement]
    summary: Summary

    @property
    def exit_code(self) -> int:
        return 0 if self.summary == "partially-correct-certified" else 1

    def to_text(self) -> str:
        lines = [f"domain: {self.domain}", f"depth: {self.depth}", ""]
        for item in self.declarations:
            lines.append(f"[{item.verdict}] {item.declaration}")
            if item.witness is not None:
                lines.append(f"    key: {item.key}")
                lines.append(f"    witness: {item.witness}")
            if item.reason is not None:
                lines.append(f"    reason: {item.reason}")
        if self.uncovered:
            lines += ["", "uncovered:"]
            lines += [f"    {u.key}: {u.sequence}" for u in self.uncovered]
        lines += ["", f"summary: {self.summary}"]
        return "\n".join(lines) + "\n"


def consequences_of(
    decl: Declaration, sz: Interpretation, domain: AbstractDomain, depth: int
) -> Tuple[CallPattern, AbstractSet]:
    """
    Abstract sequences one declaration yields with ``sz`` as interpretation,
    named after the specification key it belongs to.

    Raises:
        MissingSpecError: If the declaration itself or a process it calls is not specified.
    """
    key = sz.key_for(decl.head)
    if key is None:
        raise MissingSpecError(str(decl.head))
    produced = abstract_immediate_consequences([decl], sz, domain, depth)
    mapping = head_renaming(decl, key)
    seqs = frozenset(abstract_rename(s, mapping, domain) for s in produced[decl.head])
    return key, seqs


def _witness(
    produced: Iterable[AbstractSequence], expected: Iterable[AbstractSequence], domain: AbstractDomain
) -> Optional[AbstractSequence]:
    expected = list(expected)
    violators = [s for s in produced if not any(abstract_prefix(s, t) for t in expected)]
    if not violators:
        return None
    return min(violators, key=lambda s: (len(s.tuples), show_sequence(s, domain)))


def check_incorrect(
    decl: Declaration, sz: Interpretation, domain: AbstractDomain, depth: int = config.DEFAULT_DEPTH
) -> Optional[Tuple[CallPattern, AbstractSequence]]:
    """
    Key and witness when ``decl`` is abstractly incorrect, None when it passes.

    Raises:
        MissingSpecError: If ``decl`` or a process it calls has no specification.
    """
    key, produced = consequences_of(decl, sz, domain, depth)
    witness = _witness(produced, sz[key], domain)
    return None if witness is None else (key, witness)


def _covered(element: AbstractSequence, produced: Iterable[AbstractSequence]) -> bool:
    if not element.tuples:
        return element == A_EPSILON or element in set(produced)
    first = body(element.tuples[0])
    return any(s.tuples and body(s.tuples[0]) == first for s in produced)


def _uncovered_in(
    sz: Interpretation, produced: Dict[CallPattern, Set[AbstractSequence]], domain: AbstractDomain
) -> List[Tuple[CallPattern, AbstractSequence]]:
    out = []
    for key in sz.keys():
        if key not in produced:
            continue
        for element in sorted(sz[key], key=lambda s: show_sequence(s, domain)):
            if not _covered(element, produced[key]):
                out.append((key, element))
    return out


def find_uncovered(
    declarations: Iterable[Declaration], sz: Interpretation, domain: AbstractDomain, depth: int = config.DEFAULT_DEPTH
) -> List[Tuple[CallPattern, AbstractSequence]]:
    """
    Specified sequences no declaration starts like.

    Keys without declarations (external processes) and declarations that
    cannot be checked are left out.
    """
    produced: Dict[CallPattern, Set[AbstractSequence]] = {}
    for decl in declarations:
        try:
            key, seqs = consequences_of(decl, sz, domain, depth)
        except MissingSpecError as exc:
            logger.warning("skipping {} for coverage: {}", decl.head, exc.message)
            continue
        produced.setdefault(key, set()).update(seqs)
    return _uncovered_in(sz, produced, domain)


def diagnose(
    program: Program, spec: Specification, domain: AbstractDomain, depth: int = config.DEFAULT_DEPTH
) -> DiagnosisReport:
    """
    Check every declaration once and look for uncovered specified sequences.

    Args:
        program (Program): Declarations to diagnose.
        spec (Specification): Intended behavior per most general call.
        domain (AbstractDomain): Domain the specification is read in.
        depth (int): Bound on finite repetitions.

    Returns:
        DiagnosisReport: Verdicts, uncovered elements and the summary.
    """
    sz = abstract_spec(spec, domain)
    verdicts: List[DeclarationVerdict] = []
    produced: Dict[CallPattern, Set[AbstractSequence]] = {}
    for decl in program.declarations:
        try:
            key, seqs = consequences_of(decl, sz, domain, depth)
        except MissingSpecError as exc:
            logger.warning("{} is unchecked: {}", decl.head, exc.message)
            verdicts.append(DeclarationVerdict(declaration=str(decl), key=str(decl.head), verdict="unchecked", reason=exc.message))
            continue
        produced.setdefault(key, set()).update(seqs)
        witness = _witness(seqs, sz[key], domain)
        if witness is None:
            logger.info("{} is correct so far", decl.head)
            verdicts.append(DeclarationVerdict(declaration=str(decl), key=str(key), verdict="correct-so-far"))
        else:
            logger.info("{} is abstractly incorrect", decl.head)
            verdicts.append(
                DeclarationVerdict(
                    declaration=str(decl),
                    key=str(key),
                    verdict="abstractly-incorrect",
                    witness=show_sequence(witness, domain),
                )
            )
    uncovered = [
        UncoveredElement(key=str(key), sequence=show_sequence(element, domain))
        for key, element in _uncovered_in(sz, produced, domain)
    ]
    if any(v.verdict == "abstractly-incorrect" for v in verdicts):
        summary: Summary = "incorrectness-warnings"
    elif uncovered:
        summary = "incomplete"
    else:
        summary = "partially-correct-certified"
    return DiagnosisReport(
        domain=domain.name, depth=depth, declarations=verdicts, uncovered=uncovered, summary=summary
    )
