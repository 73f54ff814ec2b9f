import argparse
import sys

from pydantic import ValidationError

from core import config, log
from tccp.cli import RunConfig, run
from tccp.domains import DOMAINS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tccp-diagnose", description="Semantics and abstract diagnosis of tccp programs")
    parser.add_argument("--log-level", default=config.LOG_LEVEL, help="loguru level for stderr diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("program", help="program file")
        p.add_argument("--depth", type=int, default=config.DEFAULT_DEPTH, help="depth bound (default %(default)s)")
        p.add_argument("--format", choices=["text", "structured"], default="text", help="report format")

    check = sub.add_parser("check", help="diagnose a program against a specification")
    common(check)
    check.add_argument("spec", help="specification file")
    check.add_argument("--domain", choices=sorted(DOMAINS), default=config.DEFAULT_DOMAIN)

    common(sub.add_parser("semantics", help="print the bounded fixpoint semantics"))

    abstract = sub.add_parser("abstract-semantics", help="print the collapsed semantics in an abstract domain")
    common(abstract)
    abstract.add_argument("--domain", choices=sorted(DOMAINS), default=config.DEFAULT_DOMAIN)

    simulate = sub.add_parser("simulate", help="enumerate store traces with the small-step rules")
    common(simulate)
    simulate.add_argument("--agent", help="initial agent (defaults to the program's init line)")
    simulate.add_argument("--store", default="tt", help="initial store (default %(default)s)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    log.configure(args.log_level)
    fields = {k: v for k, v in vars(args).items() if k != "log_level" and v is not None}
    try:
        cfg = RunConfig(**fields)
    except ValidationError as exc:
        for error in exc.errors():
            print(f"error: {error['msg']}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
