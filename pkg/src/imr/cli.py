"""Command-line entry point: ``imr <command> ...``.

Exit codes: 0 success, 2 bad input (unreadable log, empty log, bad rule or
model file, usage errors), 3 strict-mode failure, 4 enumeration cap hit.
Every failure prints a single ``ERROR <code>: ...`` line on stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from fractions import Fraction

from . import __version__
from .conformance import fitness, rule_conformance
from .cuts import DEFAULT_ENUMERATION_CAP, EnumerationCapError
from .declare import load_rules, mine_rules, render_rules, rules_to_json, RuleSet
from .discovery import ImrConfig, StrictModeError, discover
from .log import LogFormatError, load_log
from .petri import to_dot as net_to_dot, to_petri_net, to_pnml
from .tree import bounded_language, parse_tree, render_tree, LanguageOverflowError

EXIT_INPUT, EXIT_STRICT, EXIT_CAP = 2, 3, 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_INPUT, f"{self.prog}: {message}")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _sha256(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _manifest(args, command: str, inputs: dict, config: dict, outputs: list) -> None:
    if args.output is None:
        return
    data = {
        "tool": "imr",
        "version": __version__,
        "command": command,
        "inputs": {k: {"path": v, "sha256": _sha256(v)} for k, v in inputs.items() if v},
        "config": config,
        "outputs": {os.path.basename(p): _sha256(p) for p in outputs},
    }
    _write(args.output + ".manifest.json", json.dumps(data, indent=2, sort_keys=True) + "\n")


def _load_log(args):
    try:
        log = load_log(args.log, case_column=args.case_column, activity_column=args.activity_column,
                       order_column=args.order_column)
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"cannot read {args.log}: {exc.strerror or exc}") from None
    except LogFormatError as exc:
        raise CliError(EXIT_INPUT, f"{args.log}: {exc}") from None
    if log.n == 0:
        raise CliError(EXIT_INPUT, "empty log")
    return log


def _load_rules(path):
    if path is None:
        return RuleSet()
    try:
        return load_rules(path)
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"cannot read {path}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise CliError(EXIT_INPUT, f"{path}: {exc}") from None


def _load_tree(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_tree(fh.read())
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"cannot read {path}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise CliError(EXIT_INPUT, f"{path}: {exc}") from None


def _log_config(args) -> dict:
    cfg = {}
    if args.log.lower().endswith(".csv"):
        cfg = {"case_column": args.case_column, "activity_column": args.activity_column,
               "order_column": args.order_column}
    return cfg


def cmd_mine_rules(args) -> None:
    log = _load_log(args)
    rules = mine_rules(log, args.min_confidence, args.min_support, workers=args.workers)
    _write(args.output, rules_to_json(rules) if args.json else render_rules(rules))
    _manifest(args, "mine-rules", {"log": args.log},
              {"min_confidence": str(args.min_confidence), "min_support": args.min_support,
               "json": args.json, **_log_config(args)},
              [args.output] if args.output else [])


def cmd_discover(args) -> None:
    if not 0 <= args.sup <= 1:
        raise CliError(EXIT_INPUT, f"--sup must lie in [0, 1], got {args.sup}")
    log = _load_log(args)
    rules = _load_rules(args.rules)
    config = ImrConfig(sup=args.sup, rules=rules, strict=args.strict, xor_slack=args.xor_slack,
                       enumeration_cap=args.cap)
    dump = open(args.dump_candidates, "w", encoding="utf-8", newline="") if args.dump_candidates else None
    try:
        report = discover(log, config, workers=args.workers, dump=dump)
    except StrictModeError as exc:
        raise CliError(EXIT_STRICT, str(exc)) from None
    except EnumerationCapError as exc:
        raise CliError(EXIT_CAP, str(exc)) from None
    finally:
        if dump is not None:
            dump.close()

    if args.format == "tree":
        text = render_tree(report.tree) + "\n"
    elif args.format == "pnml":
        text = to_pnml(to_petri_net(report.tree))
    else:
        text = net_to_dot(to_petri_net(report.tree)) if args.net else report.tree.to_dot()
    _write(args.output, text)
    outputs = []
    if args.output:
        sidecar = args.output + ".recursion.json"
        _write(sidecar, json.dumps(report.to_dict(), indent=2) + "\n")
        outputs = [args.output, sidecar]
        if args.dump_candidates:
            outputs.append(args.dump_candidates)
    _manifest(args, "discover", {"log": args.log, "rules": args.rules},
              {"sup": str(config.sup), "strict": config.strict, "xor_slack": str(config.xor_slack),
               "enumeration_cap": config.enumeration_cap, "format": args.format,
               "net": args.net, **_log_config(args)},
              outputs)


def cmd_eval(args) -> None:
    log = _load_log(args)
    tree = _load_tree(args.model)
    report = fitness(log, tree, workers=args.workers)
    _write(args.output, report.to_csv() if args.csv else report.to_text())
    _manifest(args, "eval", {"log": args.log, "model": args.model}, {"csv": args.csv, **_log_config(args)},
              [args.output] if args.output else [])


def cmd_check(args) -> None:
    log = _load_log(args)
    rules = _load_rules(args.rules)
    table = rule_conformance(log, rules)
    _write(args.output, table.to_csv() if args.csv else table.to_text())
    _manifest(args, "check", {"log": args.log, "rules": args.rules}, {"csv": args.csv, **_log_config(args)},
              [args.output] if args.output else [])


def cmd_lang(args) -> None:
    tree = _load_tree(args.model)
    try:
        traces = bounded_language(tree, args.max_len, args.max_loop)
    except LanguageOverflowError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None
    _write(args.output, "".join("<" + ",".join(t) + ">\n" for t in traces))
    _manifest(args, "lang", {"model": args.model}, {"max_len": args.max_len, "max_loop": args.max_loop},
              [args.output] if args.output else [])


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="imr", description="Rule-guided inductive process discovery.")
    p.add_argument("--version", action="version", version=f"imr {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, log=True):
        sp.add_argument("-o", "--output", help="output file (default: stdout)")
        sp.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                        help="worker threads; never changes results")
        if log:
            sp.add_argument("log", help="event log (.xes, .xes.gz or .csv)")
            sp.add_argument("--case-column", default="case")
            sp.add_argument("--activity-column", default="activity")
            sp.add_argument("--order-column", default=None)

    sp = sub.add_parser("mine-rules", help="mine Declare rules holding in every trace")
    common(sp)
    sp.add_argument("--min-confidence", type=_fraction, default=Fraction(1))
    sp.add_argument("--min-support", type=int, default=1)
    sp.add_argument("--json", action="store_true", help="write a JSON array instead of the text format")
    sp.set_defaults(func=cmd_mine_rules)

    sp = sub.add_parser("discover", help="discover a process tree")
    common(sp)
    sp.add_argument("--sup", type=_fraction, default=Fraction(1, 5))
    sp.add_argument("--rules", help="rule file (text or JSON)")
    sp.add_argument("--strict", action="store_true", help="fail instead of ignoring rules when all cuts are rejected")
    sp.add_argument("--xor-slack", type=_fraction, default=Fraction(0))
    sp.add_argument("--cap", type=int, default=DEFAULT_ENUMERATION_CAP, help="maximum alphabet size to enumerate")
    sp.add_argument("--format", choices=("tree", "pnml", "dot"), default="tree")
    sp.add_argument("--net", action="store_true", help="with --format dot, draw the Petri net instead of the tree")
    sp.add_argument("--dump-candidates", metavar="CSV", help="write every candidate cut of every recursion")
    sp.set_defaults(func=cmd_discover)

    sp = sub.add_parser("eval", help="fraction of traces accepted by a model")
    common(sp)
    sp.add_argument("model", help="process tree file")
    sp.add_argument("--csv", action="store_true")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("check", help="confidence of each rule on a log")
    common(sp)
    sp.add_argument("rules", help="rule file (text or JSON)")
    sp.add_argument("--csv", action="store_true")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("lang", help="list the bounded language of a model")
    common(sp, log=False)
    sp.add_argument("model", help="process tree file")
    sp.add_argument("--max-len", type=int, default=8)
    sp.add_argument("--max-loop", type=int, default=1)
    sp.set_defaults(func=cmd_lang)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("IMR_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
    except CliError as exc:
        msg = " ".join(str(exc).split())
        print(f"ERROR {exc.code}: {msg}", file=sys.stderr)
        return exc.code
    return 0


if __name__ == "__main__":
    sys.exit(main())
