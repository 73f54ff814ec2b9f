"""Run configuration and command dispatch behind ``main.py``."""

from __future__ import annotations

import sys
from pathlib import Path
from typing import List, Literal, Optional

from loguru import logger
from pydantic import BaseModel, field_validator, model_validator

from core import config
from core.errors import TccpError, TccpValidationError
from tccp.abstraction import abstract_maximal, alpha_seq, promote_infinite, show_sequence
from tccp.denotational import lfp_bounded, truncated
from tccp.diagnosis import diagnose
from tccp.domains import DOMAINS, get_domain
from tccp.small_step import behaviors
from tccp.syntax import parse_agent, parse_constraint, parse_program, parse_spec

Command = Literal["check", "semantics", "abstract-semantics", "simulate"]
OutputFormat = Literal["text", "structured"]


class RunConfig(BaseModel):
    """
    Everything one CLI invocation needs.

    Attributes:
        command (Command): check, semantics, abstract-semantics or simulate.
        program (Path): Program file.
        spec (Optional[Path]): Specification file; required by ``check`` only.
        domain (str): Abstract domain name.
        depth (int): Depth bound, at least 1.
        format (OutputFormat): ``text`` or ``structured`` (JSON).
        agent (Optional[str]): Initial agent for ``simulate``; defaults to the program's ``init``.
        store (str): Initial store for ``simulate``.
    """

    command: Command
    program: Path
    spec: Optional[Path] = None
    domain: str = config.DEFAULT_DOMAIN
    depth: int = config.DEFAULT_DEPTH
    format: OutputFormat = "text"
    agent: Optional[str] = None
    store: str = "tt"

    @field_validator("depth")
    @classmethod
    def _positive_depth(cls, value: int) -> int:
        if value < 1:
            raise ValueError("depth must be at least 1")
        return value

    @field_validator("domain")
    @classmethod
    def _known_domain(cls, value: str) -> str:
        if value not in DOMAINS:
            raise ValueError(f"unknown domain {value!r}; choose one of {', '.join(DOMAINS)}")
        return value

    @model_validator(mode="after")
    def _spec_only_for_check(self) -> "RunConfig":
        if self.command == "check" and self.spec is None:
            raise ValueError("check needs a specification file")
        if self.command != "check" and self.spec is not None:
            raise ValueError(f"{self.command} does not take a specification file")
        return self


class SequenceEntry(BaseModel):
    sequence: str
    truncated: bool = False


class SemanticsEntry(BaseModel):
    key: str
    sequences: List[SequenceEntry]


class SemanticsReport(BaseModel):
    schema_version: str = config.SCHEMA_VERSION
    command: str
    domain: Optional[str] = None
    depth: int
    entries: List[SemanticsEntry]

    def to_text(self) -> str:
        lines = []
        for entry in self.entries:
            lines.append(f"{entry.key} = {{")
            for item in entry.sequences:
                mark = "   % truncated" if item.truncated else ""
                lines.append(f"  {item.sequence}{mark}")
            lines.append("}")
        return "\n".join(lines) + "\n"


class TraceReport(BaseModel):
    schema_version: str = config.SCHEMA_VERSION
    depth: int
    traces: List[List[str]]

    def to_text(self) -> str:
        return "".join(" ; ".join(trace) + "\n" for trace in self.traces)


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise TccpValidationError(f"cannot read {path}: {exc.strerror}") from None


def _semantics(cfg: RunConfig, program) -> SemanticsReport:
    interp = lfp_bounded(program.declarations, cfg.depth)
    entries = []
    for key in interp.keys():
        seqs = sorted(interp[key], key=str)
        items = [SequenceEntry(sequence=str(s), truncated=truncated(s, cfg.depth)) for s in seqs]
        cut = sum(item.truncated for item in items)
        if cut:
            logger.warning("{}: {} sequences cut at depth {}", key, cut, cfg.depth)
        entries.append(SemanticsEntry(key=str(key), sequences=items))
    return SemanticsReport(command=cfg.command, depth=cfg.depth, entries=entries)


def _abstract_semantics(cfg: RunConfig, program) -> SemanticsReport:
    domain = get_domain(cfg.domain)
    interp = lfp_bounded(program.declarations, cfg.depth)
    deeper = lfp_bounded(program.declarations, cfg.depth + 1)
    entries = []
    for key in interp.keys():
        collapsed = []
        for s in interp[key]:
            if truncated(s, cfg.depth):
                collapsed.append(promote_infinite(s, deeper[key], domain))
            else:
                collapsed.append(alpha_seq(s, domain))
        seqs = sorted(abstract_maximal(collapsed), key=lambda a: show_sequence(a, domain))
        items = [SequenceEntry(sequence=show_sequence(a, domain)) for a in seqs]
        entries.append(SemanticsEntry(key=str(key), sequences=items))
    return SemanticsReport(command=cfg.command, domain=domain.name, depth=cfg.depth, entries=entries)


def _simulate(cfg: RunConfig, program) -> TraceReport:
    if cfg.agent is not None:
        agent = parse_agent(cfg.agent, program)
    elif program.initial is not None:
        agent = program.initial
    else:
        raise TccpValidationError("no initial agent: pass --agent or add an init line to the program")
    store = parse_constraint(cfg.store, program)
    traces = behaviors(program, agent, store, cfg.depth)
    longest = [t for t in traces if t and not any(len(u) > len(t) and u[: len(t)] == t for u in traces)]
    rendered = sorted([str(c) for c in t] for t in longest)
    return TraceReport(depth=cfg.depth, traces=rendered)


def execute(cfg: RunConfig):
    """Build the report of one command; diagnosis reports also decide the exit code."""
    program = parse_program(_read(cfg.program))
    logger.debug("parsed {} declarations from {}", len(program.declarations), cfg.program)
    if cfg.command == "check":
        spec = parse_spec(_read(cfg.spec), program)
        return diagnose(program, spec, get_domain(cfg.domain), cfg.depth)
    if cfg.command == "semantics":
        return _semantics(cfg, program)
    if cfg.command == "abstract-semantics":
        return _abstract_semantics(cfg, program)
    return _simulate(cfg, program)


def run(cfg: RunConfig) -> int:
    """
    Execute one command and print its report to stdout.

    Returns:
        int: 0 when certified (or nothing to certify), 1 on warnings, 2 on errors.
    """
    try:
        report = execute(cfg)
    except TccpError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return exc.exit_code
    if cfg.format == "structured":
        print(report.model_dump_json(indent=2))
    else:
        sys.stdout.write(report.to_text())
    return getattr(report, "exit_code", 0)
