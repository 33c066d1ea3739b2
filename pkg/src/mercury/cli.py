"""Command-line entry point.

One invocation runs one pipeline over one model file.  Subcommands:

  check      fragment + amenability report (exit 0 iff verifiable as-is)
  phases     list the computed phases
  cutoff     per-leaf amenability and the composed cutoff
  verify     full pipeline + bounded model check at the cutoff (or --n)
  translate  emit the core-language program or the counter-system JSON
  cover      unbounded-n backward coverability per spec leaf
  report     write report.csv and a phase-colored state diagram
  explain    print the rationale behind a diagnostic code

Exit codes: 0 safe/ok, 1 unsafe/coverable, 2 outside the verifiable
fragment, 3 input error, 4 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .analysis import compose_cutoff
from .core import core_to_program, lower_to_core
from .diagnostics import EXPLANATIONS, MercuryError, Severity
from .gsp import dump_json, rewrite
from .localts import build_local_ts
from .parser import parse_program
from .phasing import compute_phases
from .pretty import print_program
from .specs import parse_spec_file, to_cnf
from .validate import frontend_check
from .verify import PipelineResult, verify_parameterized
from .wsts import coverable, load_gsp_json

EXIT_SAFE, EXIT_UNSAFE, EXIT_FRAGMENT, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2, 3, 4


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        print(f"error: cannot read {path}: {e.strerror}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _spec_text(args) -> str:
    if args.spec:
        return _read(args.spec)
    sidecar = Path(args.model).with_suffix(".spec")
    if sidecar.exists():
        return _read(str(sidecar))
    print(f"error: no spec given and no sidecar {sidecar}", file=sys.stderr)
    raise SystemExit(EXIT_INPUT)


def _rejection_exit(e: MercuryError) -> int:
    sevs = {d.severity for d in e.diagnostics}
    return EXIT_FRAGMENT if sevs == {Severity.FRAGMENT} else EXIT_INPUT


def _print_diags(diags, fmt: str):
    if fmt == "json":
        print(json.dumps({"diagnostics": [d.to_json() for d in diags]},
                         ensure_ascii=False, indent=2))
    else:
        for d in diags:
            print(d.render())


def _front(args):
    """Parse + validate + lower + build; exits 3 on malformed input."""
    text = _read(args.model)
    try:
        prog = parse_program(text)
        frontend_check(prog)
        core = lower_to_core(prog)
        return build_local_ts(core)
    except MercuryError as e:
        _print_diags(e.diagnostics, args.format)
        raise SystemExit(_rejection_exit(e))


# ---------------------------------------------------------------------------
# subcommands


def cmd_check(args) -> int:
    ts = _front(args)
    specs = parse_spec_file(_spec_text(args))
    ph = compute_phases(ts)
    try:
        cut = compose_cutoff(ts, specs)
    except MercuryError as e:
        _print_diags(e.diagnostics, args.format)
        return _rejection_exit(e)
    diags = list(cut.diagnostics)
    for al in cut.per_leaf:
        diags += al.diagnostics
    if args.format == "json":
        print(json.dumps({
            "process": ts.core.name,
            "phases": len(ph.phases),
            "cutoff": cut.cutoff,
            "amenable": cut.ok,
            "per_leaf": [{"leaf": al.leaf.render(), "amenable": al.amenable,
                          "cutoff": al.cutoff} for al in cut.per_leaf],
            "diagnostics": [d.to_json() for d in diags],
        }, ensure_ascii=False, indent=2))
    else:
        for d in diags:
            print(d.render())
        print(f"phases: {len(ph.phases)}")
        if cut.ok:
            print(f"cutoff = {cut.cutoff}")
            print("verifiable: parameterized verification applies")
        else:
            print("not amenable: bounded verification only (use --n)")
    return EXIT_SAFE if cut.ok else EXIT_FRAGMENT


def cmd_phases(args) -> int:
    ts = _front(args)
    ph = compute_phases(ts)
    if args.format == "json":
        print(json.dumps({
            "process": ts.core.name,
            "phases": [[ts.render_state(s) for s in sorted(p)]
                       for p in ph.phases],
        }, ensure_ascii=False, indent=2))
    else:
        print(f"{len(ph.phases)} phases")
        for i, p in enumerate(ph.phases, 1):
            print(f"  phase {i}: " +
                  ", ".join(ts.render_state(s) for s in sorted(p)))
    return EXIT_SAFE


def cmd_cutoff(args) -> int:
    return cmd_check(args)


def cmd_verify(args) -> int:
    text = _read(args.model)
    spec = _spec_text(args)
    pr = verify_parameterized(text, spec, n_override=args.n,
                              max_states=args.max_states,
                              max_seconds=args.max_seconds)
    if args.format == "json":
        out = {
            "mode": pr.mode,
            "phases": pr.phases,
            "cutoff": pr.cutoff.cutoff if pr.cutoff else None,
            "verdict": pr.verdict.to_json(pr.sys) if pr.verdict else None,
            "diagnostics": [d.to_json() for d in pr.diagnostics],
        }
        print(json.dumps(out, ensure_ascii=False, indent=2))
        return pr.exit_code
    for d in pr.diagnostics:
        print(d.render())
    if pr.verdict is None:
        print("no verdict: model not amenable and no --n given")
        return pr.exit_code
    v = pr.verdict
    tag = {"safe": "SAFE", "unsafe": "UNSAFE",
           "resource_exceeded": "RESOURCE EXCEEDED"}[v.result]
    scope = "parameterized" if pr.mode == "parameterized" else f"n = {v.n}"
    print(f"phases: {pr.phases}, cutoff: "
          f"{pr.cutoff.cutoff if pr.cutoff and pr.cutoff.ok else '-'}, "
          f"result: {tag} ({scope})")
    print(f"states explored: {v.states_explored}, "
          f"wall time: {v.wall_seconds:.2f}s")
    if v.trace and (args.trace or v.result == "unsafe"):
        print("trace:")
        for act, q in v.trace:
            counts = {pr.sys.ts.render_state(i): c
                      for i, c in enumerate(q) if c}
            print(f"  {act}: {counts}")
    return pr.exit_code


def cmd_translate(args) -> int:
    ts = _front(args)
    if args.emit == "core":
        print(print_program(core_to_program(ts.core)))
        return EXIT_SAFE
    ph = compute_phases(ts)
    sys_ = rewrite(ts, ph)
    for d in sys_.warnings:
        print(d.render(), file=sys.stderr)
    print(dump_json(sys_))
    return EXIT_SAFE


def cmd_cover(args) -> int:
    if args.model.endswith(".json"):
        data = json.loads(_read(args.model))
        sys_ = load_gsp_json(data)
        for d in sys_.warnings:
            print(d.render(), file=sys.stderr)
        specs = parse_spec_file(_spec_text(args))
        ts = sys_.ts
    else:
        ts = _front(args)
        specs = parse_spec_file(_spec_text(args))
        ph = compute_phases(ts)
        sys_ = rewrite(ts, ph)
        for d in sys_.warnings:
            print(d.render(), file=sys.stderr)
    results = []
    worst = EXIT_SAFE
    for spec in specs:
        for clause in to_cnf(spec):
            for leaf in clause:
                try:
                    res = coverable(sys_, leaf, max_seconds=args.max_seconds)
                except MercuryError as e:
                    _print_diags(e.diagnostics, args.format)
                    return EXIT_INPUT
                results.append((leaf, res))
                if res.result == "coverable":
                    worst = max(worst, EXIT_UNSAFE)
                elif res.result == "resource_exceeded":
                    worst = max(worst, EXIT_RESOURCE)
    if args.format == "json":
        print(json.dumps({
            "results": [{
                "leaf": leaf.render(),
                "result": res.result,
                "iterations": res.iterations,
                "witness": ({ts.render_state(i): c
                             for i, c in enumerate(res.witness) if c}
                            if res.witness else None),
            } for leaf, res in results],
        }, ensure_ascii=False, indent=2))
        return worst
    for leaf, res in results:
        line = f"{leaf.render()}: {res.result.upper().replace('_', ' ')}"
        if res.witness:
            counts = {ts.render_state(i): c
                      for i, c in enumerate(res.witness) if c}
            line += f" from initial family {counts}"
        print(line)
    return worst


def cmd_report(args) -> int:
    from .report import write_report

    text = _read(args.model)
    spec = _spec_text(args)
    pr = verify_parameterized(text, spec, n_override=args.n,
                              max_states=args.max_states,
                              max_seconds=args.max_seconds)
    if pr.mode == "rejected":
        _print_diags(pr.diagnostics, args.format)
        return pr.exit_code
    ph = compute_phases(pr.ts)
    for p in write_report(pr, ph, args.out):
        print(f"wrote {p}")
    return pr.exit_code


def cmd_explain(args) -> int:
    text = EXPLANATIONS.get(args.code.upper())
    if text is None:
        print(f"unknown diagnostic code {args.code}", file=sys.stderr)
        return EXIT_INPUT
    print(f"{args.code.upper()}: {text}")
    return EXIT_SAFE


# ---------------------------------------------------------------------------
# argument plumbing


def _env_int(name: str, default: int) -> int:
    return int(os.environ.get(name, default))


def _env_float(name: str):
    v = os.environ.get(name)
    return float(v) if v is not None else None


def _add_common(p: argparse.ArgumentParser, spec: bool = True):
    p.add_argument("model", help="model file (.mer)")
    if spec:
        p.add_argument("--spec", help="spec file (default: sidecar .spec)")
    p.add_argument("--format", choices=("text", "json"), default="text")


def _add_caps(p: argparse.ArgumentParser):
    p.add_argument("--max-states", type=int,
                   default=_env_int("MERCURY_MAX_STATES", 5_000_000),
                   help="state cap for the bounded search")
    p.add_argument("--max-seconds", type=float,
                   default=_env_float("MERCURY_MAX_SECONDS"),
                   help="wall-clock cap")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mercury",
        description="Modeling and verification of distributed "
                    "agreement-based systems")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="fragment + amenability report")
    _add_common(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("phases", help="list computed phases")
    _add_common(p, spec=False)
    p.set_defaults(fn=cmd_phases)

    p = sub.add_parser("cutoff", help="per-leaf cutoffs (alias of check)")
    _add_common(p)
    p.set_defaults(fn=cmd_cutoff)

    p = sub.add_parser("verify", help="model check at the cutoff or --n")
    _add_common(p)
    p.add_argument("--n", type=int, help="override system size (bounded run)")
    p.add_argument("--trace", action="store_true",
                   help="print the trace even when not unsafe")
    _add_caps(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("translate", help="emit core program or counter JSON")
    _add_common(p, spec=False)
    p.add_argument("--emit", choices=("core", "gsp"), default="gsp")
    p.set_defaults(fn=cmd_translate)

    p = sub.add_parser("cover", help="unbounded-n backward coverability")
    _add_common(p)
    _add_caps(p)
    p.set_defaults(fn=cmd_cover)

    p = sub.add_parser("report", help="write report.csv and state diagram")
    _add_common(p)
    p.add_argument("--n", type=int, help="override system size")
    p.add_argument("-o", "--out", default="report",
                   help="output directory (default: ./report)")
    _add_caps(p)
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("explain", help="explain a diagnostic code")
    p.add_argument("code", help="diagnostic code, e.g. MER0301")
    p.set_defaults(fn=cmd_explain)

    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code = args.fn(args)
    except MercuryError as e:
        _print_diags(e.diagnostics, getattr(args, "format", "text"))
        code = _rejection_exit(e)
    except SystemExit as e:  # raised by input helpers with an exit code
        code = int(e.code or 0)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
