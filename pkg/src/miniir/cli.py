"""Command-line drivers: mini-opt, mini-run and mini-match.

Exit codes: 0 success, 1 diagnostics (parse, verify or pass failure),
2 runtime trap, 64 bad usage, 66 unreadable input file.
"""

from __future__ import annotations

import argparse
import os
import sys

from miniir.diagnostics import render_all
from miniir.dialects import make_context
from miniir.interp import Trap, format_runtime_value, parse_runtime_value, run_function
from miniir.ir.equality import structural_equal
from miniir.passes import PassEnv, PipelineError, parse_pipeline, run_pipeline
from miniir.pdl import STAGES, matcher_stages, run_matcher
from miniir.rewrite import apply_patterns_greedily, parse_pattern_file
from miniir.textio import ParseError, parse_source, print_op
from miniir.verifier import verify

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_TRAP = 2
EXIT_USAGE = 64
EXIT_NOINPUT = 66


class _Exit(Exception):
    def __init__(self, code: int, message: str = ""):
        self.code = code
        self.message = message


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        raise _Exit(EXIT_USAGE, f"{self.format_usage()}{self.prog}: error: {message}")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise _Exit(EXIT_NOINPUT, f"error: cannot read {path}: {e.strerror}") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
    except OSError as e:
        raise _Exit(EXIT_NOINPUT, f"error: cannot write {path}: {e.strerror}") from None


def _parse_module(ctx, path: str):
    try:
        return parse_source(ctx, _read(path), "<stdin>" if path == "-" else path)
    except ParseError as e:
        raise _Exit(EXIT_DIAGNOSTICS, render_all(e.diagnostics)) from None


def _load_patterns(ctx, path: str):
    try:
        return parse_pattern_file(ctx, _read(path), path)
    except ParseError as e:
        raise _Exit(EXIT_DIAGNOSTICS, render_all(e.diagnostics)) from None


def _check(module) -> None:
    diags = verify(module)
    if diags:
        raise _Exit(EXIT_DIAGNOSTICS, render_all(diags))


def _default_threads() -> int:
    raw = os.environ.get("MINI_IR_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise _Exit(EXIT_USAGE, f"error: MINI_IR_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise _Exit(EXIT_USAGE, f"error: MINI_IR_THREADS must be a positive integer, got {raw!r}")
    return n


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return n


# -- mini-opt -------------------------------------------------------------------


def opt(argv: list[str]) -> int:
    ap = _ArgParser(prog="mini-opt", description="Parse, transform and print IR.")
    ap.add_argument("file", help="input file, or - for stdin")
    ap.add_argument("--pass-pipeline", required=True, metavar="SPEC")
    ap.add_argument("--patterns", metavar="FILE.pat", help="extra rewrite rules for canonicalize")
    ap.add_argument("--engine", choices=("direct", "fsm"), default="direct")
    ap.add_argument("--threads", type=_positive, default=None, help="default: $MINI_IR_THREADS or 1")
    ap.add_argument("--verify-each", action="store_true", help="verify after every pass")
    ap.add_argument("--emit", choices=("custom", "generic"), default="custom")
    ap.add_argument("--print-ir-after-all", action="store_true", help="dump each anchor to stderr after each pass")
    ap.add_argument("--timing", action="store_true", help="print a per-pass table to stderr")
    ap.add_argument("-o", dest="output", metavar="OUT")
    args = ap.parse_args(argv)
    threads = args.threads if args.threads is not None else _default_threads()
    try:
        spec = parse_pipeline(args.pass_pipeline)
    except PipelineError as e:
        raise _Exit(EXIT_USAGE, f"mini-opt: error: bad --pass-pipeline: {e.message} (at offset {e.pos})") from None

    ctx = make_context()
    env = PassEnv(engine=args.engine)
    if args.patterns:
        env.patterns = _load_patterns(ctx, args.patterns)
    if args.engine == "fsm":
        from miniir.pdl.compiler import compile_patterns_to_matcher, optimize_matcher
        from miniir.rewrite.pattern import PatternSet

        env.matcher = compile_patterns_to_matcher(ctx, env.patterns or PatternSet())
        optimize_matcher(env.matcher)
    module = _parse_module(ctx, args.file)
    _check(module)
    try:
        report = run_pipeline(
            module, spec, threads=threads, verify_each=args.verify_each, env=env,
            capture_ir=args.emit if args.print_ir_after_all else None,
        )
    except PipelineError as e:
        raise _Exit(EXIT_USAGE, f"mini-opt: error: {e.message}") from None
    if args.print_ir_after_all:
        for r in report.records:
            sys.stderr.write(f"// -----// after {r.pass_name} ({r.anchor})\n{r.ir_after}\n")
    if args.timing:
        sys.stderr.write(report.format_table() + "\n")
    if not report.ok:
        raise _Exit(EXIT_DIAGNOSTICS, render_all(report.diagnostics))
    _check(module)
    _write(args.output, print_op(module, args.emit) + "\n")
    return EXIT_OK


# -- mini-run -------------------------------------------------------------------


def split_literals(text: str) -> list[str]:
    """Split on whitespace outside brackets: ``[1, 2]:memref<2xi32> 3:i32``."""
    out, cur, depth = [], [], 0
    for ch in text:
        if ch in "[<":
            depth += 1
        elif ch in "]>":
            depth -= 1
        if ch.isspace() and depth == 0:
            if cur:
                out.append("".join(cur))
                cur = []
            continue
        cur.append(ch)
    if cur:
        out.append("".join(cur))
    return out


def run(argv: list[str]) -> int:
    ap = _ArgParser(prog="mini-run", description="Interpret a function and print its results.")
    ap.add_argument("file", help="input file, or - for stdin")
    ap.add_argument("--entry", required=True, metavar="NAME")
    ap.add_argument("--args", default="", metavar="LITERALS", help="e.g. '3:i32 [1,2]:memref<2xi32>'")
    ap.add_argument("--max-steps", type=_positive, default=None)
    args = ap.parse_args(argv)
    ctx = make_context()
    values = []
    for lit in split_literals(args.args):
        try:
            values.append(parse_runtime_value(ctx, lit)[0])
        except ParseError as e:
            raise _Exit(EXIT_USAGE, f"mini-run: error: bad argument {lit!r}: {e.diagnostics[0].message}") from None
    module = _parse_module(ctx, args.file)
    _check(module)
    from miniir.ir.symbols import lookup_symbol

    fn = lookup_symbol(module, args.entry.lstrip("@"))
    if fn is None or fn.name != "func.func":
        raise _Exit(EXIT_DIAGNOSTICS, f"error: no function named @{args.entry.lstrip('@')}")
    kwargs = {} if args.max_steps is None else {"max_steps": args.max_steps}
    try:
        results = run_function(module, args.entry.lstrip("@"), values, **kwargs)
    except Trap as e:
        raise _Exit(EXIT_TRAP, f"trap: {e}") from None
    types = fn.attributes["function_type"].type.results
    for v, t in zip(results, types):
        sys.stdout.write(format_runtime_value(v, t) + "\n")
    return EXIT_OK


# -- mini-match -----------------------------------------------------------------


def match(argv: list[str]) -> int:
    ap = _ArgParser(
        prog="mini-match",
        description="Compile rewrite rules to matcher programs; optionally apply them to a module.",
    )
    ap.add_argument("patterns", metavar="FILE.pat")
    ap.add_argument("--dump-matcher", choices=STAGES, metavar="STAGE",
                    help="print the matcher after a stage: " + ", ".join(STAGES))
    ap.add_argument("--stats", action="store_true", help="print per-stage matcher statistics")
    ap.add_argument("--input", metavar="FILE", help="module to rewrite with the matcher")
    ap.add_argument("--stage", choices=STAGES, default="final", help="matcher stage applied to --input")
    ap.add_argument("--emit", choices=("custom", "generic"), default="custom")
    ap.add_argument("-o", dest="output", metavar="OUT", help="where to write the rewritten module")
    args = ap.parse_args(argv)
    ctx = make_context()
    patterns = _load_patterns(ctx, args.patterns)
    stages = matcher_stages(ctx, patterns)
    for name, m in stages.items():
        diags = verify(m)
        if diags:
            raise _Exit(EXIT_DIAGNOSTICS, f"error: {name} matcher does not verify\n{render_all(diags)}")
    if args.dump_matcher:
        sys.stdout.write(print_op(stages[args.dump_matcher], args.emit) + "\n")

    rows = []
    if args.input:
        text = _read(args.input)
        fname = "<stdin>" if args.input == "-" else args.input

        def fresh():
            try:
                mod = parse_source(ctx, text, fname)
            except ParseError as e:
                raise _Exit(EXIT_DIAGNOSTICS, render_all(e.diagnostics)) from None
            _check(mod)
            return mod

        reference = fresh()
        apply_patterns_greedily(reference, patterns)
        chosen = None
        for name, m in stages.items():
            mod = fresh()
            _, st = run_matcher(m, mod, patterns)
            if not structural_equal(mod, reference):
                raise _Exit(EXIT_DIAGNOSTICS, f"error: {name} matcher disagrees with the direct engine")
            rows.append((name, _size(m), st.evaluations, st.matches, st.rewrites))
            if name == args.stage:
                chosen = mod
        if args.output or not (args.stats or args.dump_matcher):
            _write(args.output, print_op(chosen, args.emit) + "\n")
    else:
        rows = [(name, _size(m), "-", "-", "-") for name, m in stages.items()]
    if args.stats:
        header = ("stage", "ops", "evaluations", "matches", "rewrites")
        table = [header] + [tuple(map(str, r)) for r in rows]
        widths = [max(len(r[i]) for r in table) for i in range(len(header))]
        for r in table:
            sys.stdout.write("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")
    return EXIT_OK


def _size(m) -> int:
    return sum(1 for _ in m.walk()) - 1


# -- entry points ---------------------------------------------------------------

TOOLS = {"mini-opt": opt, "mini-run": run, "mini-match": match}


def _guard(fn, argv) -> int:
    try:
        return fn(argv)
    except _Exit as e:
        if e.message:
            sys.stderr.write(e.message.rstrip("\n") + "\n")
        return e.code
    except SystemExit as e:  # --help
        return e.code if isinstance(e.code, int) else EXIT_OK
    except BrokenPipeError:
        return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    """``argv[0]`` names the tool: mini-opt, mini-run or mini-match (the prefix is optional)."""
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        sys.stderr.write("usage: python -m miniir.cli {mini-opt,mini-run,mini-match} ...\n")
        return EXIT_USAGE
    name = argv[0] if argv[0].startswith("mini-") else f"mini-{argv[0]}"
    if name not in TOOLS:
        sys.stderr.write(f"error: unknown tool {argv[0]!r}; expected one of {', '.join(TOOLS)}\n")
        return EXIT_USAGE
    return _guard(TOOLS[name], argv[1:])


def opt_main() -> None:
    sys.exit(_guard(opt, sys.argv[1:]))


def run_main() -> None:
    sys.exit(_guard(run, sys.argv[1:]))


def match_main() -> None:
    sys.exit(_guard(match, sys.argv[1:]))


if __name__ == "__main__":
    sys.exit(main())
