"""Bounded verification over the counter system, plus the full pipeline.

`verify` is a deterministic level-synchronous BFS from the initial counter
state with n processes; the first spec violation (in exploration order) is
returned with a replayable trace.  `verify_parameterized` runs the whole
chain — parse, validate, lower, build, phases, compatibility, cutoff — and
labels the verdict "parameterized" only when every check passed and the
bounded run used the computed cutoff.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .analysis import CutoffResult, compose_cutoff
from .core import lower_to_core
from .diagnostics import Diagnostic, MercuryError, Severity
from .gsp import Counter, GspSystem, counter_step, rewrite
from .localts import LocalTS, build_local_ts
from .parser import parse_program
from .phasing import compute_phases
from .specs import SpecExpr, eval_spec, parse_spec_file
from .validate import frontend_check

DEFAULT_MAX_STATES = 5_000_000


@dataclass
class Verdict:
    result: str                      # safe | unsafe | resource_exceeded
    n: int
    states_explored: int
    trace: list[tuple[str, Counter]] | None = None
    wall_seconds: float = 0.0

    @property
    def exit_code(self) -> int:
        return {"safe": 0, "unsafe": 1, "resource_exceeded": 4}[self.result]

    def to_json(self, sys: GspSystem | None = None) -> dict:
        out = {
            "result": self.result,
            "n": self.n,
            "states_explored": self.states_explored,
            "wall_seconds": round(self.wall_seconds, 3),
            "trace": None,
        }
        if self.trace is not None:
            out["trace"] = [
                {"action": act,
                 "counts": _counts(sys, q) if sys else list(q)}
                for act, q in self.trace
            ]
        return out


def _counts(sys: GspSystem, q: Counter) -> dict[str, int]:
    return {sys.ts.render_state(i): c for i, c in enumerate(q) if c}


def _holds(ts: LocalTS, specs: list[SpecExpr], q: Counter) -> bool:
    count_at = lambda states: sum(q[s] for s in states)
    return all(eval_spec(ts, spec, count_at) for spec in specs)


def verify(sys: GspSystem, specs: list[SpecExpr], n: int,
           max_states: int = DEFAULT_MAX_STATES,
           max_seconds: float | None = None) -> Verdict:
    ts = sys.ts
    t0 = time.monotonic()
    q0 = sys.initial(n)
    parent: dict[Counter, tuple[str, Counter] | None] = {q0: None}
    if not _holds(ts, specs, q0):
        return Verdict("unsafe", n, 1, [("initial", q0)],
                       time.monotonic() - t0)
    level = [q0]
    while level:
        next_level = []
        for q in level:
            for act, nq in counter_step(q, sys):
                if nq in parent:
                    continue
                parent[nq] = (act, q)
                if len(parent) > max_states or (
                        max_seconds is not None
                        and time.monotonic() - t0 > max_seconds):
                    return Verdict("resource_exceeded", n, len(parent),
                                   wall_seconds=time.monotonic() - t0)
                if not _holds(ts, specs, nq):
                    return Verdict("unsafe", n, len(parent),
                                   _trace(parent, q0, nq, act),
                                   time.monotonic() - t0)
                next_level.append(nq)
        level = next_level
    return Verdict("safe", n, len(parent), wall_seconds=time.monotonic() - t0)


def _trace(parent, q0: Counter, bad: Counter, last_act: str):
    steps = []
    q = bad
    while q != q0:
        act, prev = parent[q]
        steps.append((act, q))
        q = prev
    steps.append(("initial", q0))
    steps.reverse()
    return steps


# ---------------------------------------------------------------------------
# orchestration


@dataclass
class PipelineResult:
    mode: str                        # parameterized | bounded only | rejected
    verdict: Verdict | None
    cutoff: CutoffResult | None
    phases: int | None
    ts: LocalTS | None = None
    sys: GspSystem | None = None
    specs: list[SpecExpr] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        if self.mode == "rejected":
            worst = {d.severity for d in self.diagnostics}
            return 2 if worst == {Severity.FRAGMENT} else 3
        if self.verdict is None:
            return 2
        return self.verdict.exit_code


def build_pipeline(model_text: str, spec_text: str):
    """Shared front half: (ts, phases, specs, cutoff result)."""
    prog = parse_program(model_text)
    frontend_check(prog)
    core = lower_to_core(prog)
    ts = build_local_ts(core)
    specs = parse_spec_file(spec_text)
    ph = compute_phases(ts)
    cut = compose_cutoff(ts, specs)
    return ts, ph, specs, cut


def verify_parameterized(model_text: str, spec_text: str,
                         n_override: int | None = None,
                         max_states: int = DEFAULT_MAX_STATES,
                         max_seconds: float | None = None) -> PipelineResult:
    try:
        ts, ph, specs, cut = build_pipeline(model_text, spec_text)
    except MercuryError as e:
        return PipelineResult("rejected", None, None, None,
                              diagnostics=e.diagnostics)
    sys_ = rewrite(ts, ph)
    parameterized = cut.ok and n_override is None
    n = n_override if n_override is not None else cut.cutoff
    if n is None:
        return PipelineResult("bounded only", None, cut, len(ph.phases),
                              ts, sys_, specs, cut.diagnostics)
    verdict = verify(sys_, specs, n, max_states, max_seconds)
    mode = "parameterized" if parameterized else "bounded only"
    return PipelineResult(mode, verdict, cut, len(ph.phases), ts, sys_,
                          specs, cut.diagnostics)
