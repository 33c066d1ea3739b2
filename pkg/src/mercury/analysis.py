"""Cutoff analysis.

Decides whether a model + specification admit a verification cutoff, and
computes it.  Three layers:

  * phase compatibility -- the phase decomposition must cover every
    globally-synchronizing event coherently;
  * side conditions -- fixed state space, and at most one location
    receiving a given rendezvous action per phase;
  * amenability per specification leaf -- every path from the initial
    state into the leaf's error states must consist of effectively
    independent transitions (or the fallback condition must hold),
    in which case the leaf's quantifier count is the cutoff.

Leaf cutoffs compose through the CNF structure of the specification:
disjunction sums (with a path-disjointness requirement), conjunction
takes the maximum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import Diagnostic, MercuryError, Severity, Suggestion
from .localts import CRASH_LOC, Label, LocalTS, Transition
from .phasing import PhaseResult, compute_phases, firable
from .specs import Leaf, SpecExpr, resolve_leaf, st_of, to_cnf


def ev_render(ev: tuple[str, str]) -> str:
    kind, act = ev
    return {"br": f"broadcast {act}", "part": f"partition {act}",
            "cons": f"consensus {act}"}.get(kind, act)


def _render_edge(ts: LocalTS, src: int, label: str, dst: str) -> str:
    return f"{ts.render_state(src)}------{label}------>{dst}"


# ---------------------------------------------------------------------------
# phase compatibility


def _phase_path_exists(ts: LocalTS, phase: frozenset[int], start: int,
                       goal: set[int]) -> bool:
    """Path from `start` to some state in `goal`, staying inside `phase` and
    moving only over internal / rendezvous transitions."""
    if start in goal:
        return True
    seen = {start}
    work = [start]
    while work:
        s = work.pop()
        for t in ts.out[s]:
            if t.label.kind not in ("internal", "send_rz", "recv_rz"):
                continue
            if t.dst not in phase or t.dst in seen:
                continue
            if t.dst in goal:
                return True
            seen.add(t.dst)
            work.append(t.dst)
    return False


def check_phase_compat(ts: LocalTS, ph: PhaseResult) -> list[Diagnostic]:
    """The three phase-compatibility conditions:

    (1) every state with an acting transition on an event e also has a
        reacting transition on e;
    (2) after an internal step s→s' where s' can react to a firable event
        f, every state sharing s's phase can still reach (inside the
        phase, over internal/rendezvous steps) some state reacting to f;
    (3) when one initiation of e lands on a state reacting to an event f
        firable at e's destinations, (i) every other initiation of e must
        also land on a reacting-f state and (ii) every reaction to e must
        land on a state with a path to a reacting-f state.
    """
    diags: list[Diagnostic] = []

    # reacting-state index per event
    acting: dict[tuple[str, str], list[Transition]] = {}
    reacting: dict[tuple[str, str], set[int]] = {}
    for t in ts.transitions:
        key = t.label.event_key
        if key is None:
            continue
        if t.label.role == "acting":
            acting.setdefault(key, []).append(t)
        elif t.label.role == "reacting":
            reacting.setdefault(key, set()).add(t.src)

    # condition (1)
    flagged: set[tuple[int, tuple[str, str]]] = set()
    for ev, trs in sorted(acting.items()):
        for t in trs:
            if t.src in reacting.get(ev, set()) or (t.src, ev) in flagged:
                continue
            flagged.add((t.src, ev))
            diags.append(_cond1_diag(ts, ev, t))

    # condition (2)
    events = sorted(set(acting) | set(reacting))
    reported2: set[tuple[int, tuple[str, str]]] = set()
    for t in ts.transitions:
        if t.label.kind != "internal":
            continue
        for f in events:
            if t.dst not in reacting.get(f, set()):
                continue
            for phase in ph.phases:
                if t.src not in phase or t.dst not in phase:
                    continue
                if not firable(ts, f, phase):
                    continue
                goal = reacting[f] & phase
                for u in sorted(phase):
                    if _phase_path_exists(ts, phase, u, goal):
                        continue
                    if (u, f) in reported2:
                        continue
                    reported2.add((u, f))
                    diags.append(Diagnostic(
                        "MER0302",
                        f"{ts.render_state(u)} cannot reach a reacting "
                        f"transition on {f[1]} within its phase, but the "
                        f"internal step "
                        f"{_render_edge(ts, t.src, 'ε', ts.render_state(t.dst))}"
                        f" leads to one",
                        Severity.ERROR,
                        suggestions=[Suggestion(
                            f"add a handler reacting to {f[1]} reachable "
                            f"from {ts.render_state(u)}")]))

    # condition (3)
    reported3: set[tuple] = set()
    for ev, trs in sorted(acting.items()):
        dst_e = ph.dst.get(ev, frozenset())
        for f in events:
            if not firable(ts, f, dst_e):
                continue
            react_f = reacting.get(f, set())
            if not any(t.dst in react_f for t in trs):
                continue
            # (i) all other initiations of e land on reacting-f states
            for t in trs:
                if t.dst not in react_f and (ev, f, t.src, "i") not in reported3:
                    reported3.add((ev, f, t.src, "i"))
                    diags.append(Diagnostic(
                        "MER0303",
                        f"the initiation "
                        f"{_render_edge(ts, t.src, f'A({ev[1]})', ts.render_state(t.dst))}"
                        f" lands on a state without a reacting transition on "
                        f"{f[1]}, while other initiations of {ev[1]} do",
                        Severity.ERROR,
                        suggestions=[Suggestion(
                            f"add a handler reacting to {f[1]} at location "
                            f"{ts.states[t.dst][0]}")]))
            # (ii) reactions to e land on states with a path to reacting-f
            for t in ts.transitions:
                if t.label.event_key != ev or t.label.role != "reacting":
                    continue
                phase = ph.union_of_phases(t.dst)
                if _phase_path_exists(ts, phase, t.dst, react_f & phase):
                    continue
                if (ev, f, t.src, "ii") in reported3:
                    continue
                reported3.add((ev, f, t.src, "ii"))
                diags.append(Diagnostic(
                    "MER0303",
                    f"the reaction "
                    f"{_render_edge(ts, t.src, f'R({ev[1]})', ts.render_state(t.dst))}"
                    f" lands on a state with no path to a reacting "
                    f"transition on {f[1]}",
                    Severity.ERROR,
                    suggestions=[Suggestion(
                        f"add a handler reacting to {f[1]} reachable from "
                        f"{ts.render_state(t.dst)}")]))
    return diags


def _cond1_diag(ts: LocalTS, ev: tuple[str, str],
                t: Transition) -> Diagnostic:
    state = ts.render_state(t.src)
    mirror = ts.render_state(t.dst)
    sug = [
        Suggestion(f"add transition "
                   f"{_render_edge(ts, t.src, f'R({ev[1]})', mirror)}"),
        Suggestion(f"add transition "
                   f"{_render_edge(ts, t.src, f'R({ev[1]})', '(Anywhere!,{})')}"),
    ]
    return Diagnostic(
        "MER0301",
        f"{state} needs a corresponding reacting transition on {ev[1]}",
        Severity.ERROR, suggestions=sug)


# ---------------------------------------------------------------------------
# side conditions


def check_side_conditions(ts: LocalTS, ph: PhaseResult) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    # at most one receiving location per rendezvous action per phase
    rz_recv: dict[tuple[int, str], set[str]] = {}
    for t in ts.transitions:
        if t.label.kind == "recv_rz":
            src_loc = ts.states[t.src][0]
            for idx, phase in enumerate(ph.phases):
                if t.src in phase:
                    rz_recv.setdefault((idx, t.label.act), set()).add(src_loc)
    for (idx, act), locs in sorted(rz_recv.items()):
        if len(locs) > 1:
            diags.append(Diagnostic(
                "MER0305",
                f"rendezvous action {act} is received at several locations "
                f"({', '.join(sorted(locs))}) within phase {idx + 1}; the "
                f"analysis requires a unique receiving location per phase",
                Severity.ERROR,
                suggestions=[Suggestion(
                    f"split {act} into one action per receiving location")]))
    return diags


# ---------------------------------------------------------------------------
# effective independence and amenability


@dataclass
class Amenability:
    leaf: Leaf
    amenable: bool
    cutoff: int | None
    witness: list[Transition] | None = None
    diagnostics: list[Diagnostic] = field(default_factory=list)


def _effectively_independent(ts: LocalTS, ph: PhaseResult,
                             t: Transition) -> bool:
    lab = t.label
    if lab.independent or lab.env:
        return True
    # reacting transitions are harmless when their event is firable in
    # some phase containing the transition's source state
    key = lab.event_key
    if key is not None:
        for i in ph.phases_of(t.src):
            if firable(ts, key, ph.phases[i]):
                return True
    return False


def render_path(ts: LocalTS, path: list[Transition]) -> str:
    if not path:
        return ts.render_state(ts.init_idx)
    parts = [ts.render_state(path[0].src)]
    for t in path:
        parts.append(f"------{t.label.render()}------>")
        parts.append(ts.render_state(t.dst))
    return "".join(parts)


def _succ_map(ts: LocalTS) -> dict[int, list[Transition]]:
    succ: dict[int, list[Transition]] = {}
    for t in ts.transitions:
        succ.setdefault(t.src, []).append(t)
    return succ


def _reach_forward(succ, start: int) -> set[int]:
    seen = {start}
    work = [start]
    while work:
        s = work.pop()
        for t in succ.get(s, ()):
            if t.dst not in seen:
                seen.add(t.dst)
                work.append(t.dst)
    return seen


def _reach_backward(ts: LocalTS, targets: set[int]) -> set[int]:
    pred: dict[int, list[int]] = {}
    for t in ts.transitions:
        pred.setdefault(t.dst, []).append(t.src)
    seen = set(targets)
    work = list(targets)
    while work:
        s = work.pop()
        for p in pred.get(s, ()):
            if p not in seen:
                seen.add(p)
                work.append(p)
    return seen


def _dependent_witness(ts: LocalTS, ph: PhaseResult,
                       targets: set[int]) -> list[Transition] | None:
    """Path from the initial state into `targets` minimizing, in order,
    the number of dependent transitions, reacting transitions, and the
    length; None if unreachable."""
    import heapq

    succ = _succ_map(ts)
    start = ts.init_idx
    zero = (0, 0, 0)
    dist: dict[int, tuple[int, int, int]] = {start: zero}
    back: dict[int, Transition] = {}
    heap = [(zero, 0, start)]
    order = 1
    inf = (1 << 30,) * 3
    while heap:
        d, _, s = heapq.heappop(heap)
        if d > dist.get(s, inf):
            continue
        if s in targets:
            path = []
            while s != start:
                t = back[s]
                path.append(t)
                s = t.src
            return list(reversed(path))
        for t in succ.get(s, ()):
            dep = 0 if _effectively_independent(ts, ph, t) else 1
            react = 1 if t.label.role == "reacting" else 0
            nd = (d[0] + dep, d[1] + react, d[2] + 1)
            if nd < dist.get(t.dst, inf):
                dist[t.dst] = nd
                back[t.dst] = t
                heapq.heappush(heap, (nd, order, t.dst))
                order += 1
    return None


def check_amenability(ts: LocalTS, ph: PhaseResult, leaf: Leaf) -> Amenability:
    targets = set(st_of(ts, leaf))
    succ = _succ_map(ts)
    reach0 = _reach_forward(succ, ts.init_idx)
    live_targets = targets & reach0

    if not live_targets:
        # error states unreachable: the leaf holds vacuously for any n
        return Amenability(leaf, True, leaf.m, diagnostics=[Diagnostic(
            "MER0404",
            f"no reachable local state satisfies {leaf.render()}; the "
            f"property holds vacuously", Severity.WARNING)])

    # condition (1): every transition on a path s0 -> st(f) must be
    # effectively independent.  A transition lies on such a path iff its
    # source is reachable from s0 and its destination reaches st(f).
    co_reach = _reach_backward(ts, live_targets)
    offenders = [
        t for t in ts.transitions
        if t.src in reach0 and t.src in co_reach and t.dst in co_reach
        and not _effectively_independent(ts, ph, t)]

    if not offenders:
        return Amenability(leaf, True, leaf.m)

    # condition (2) fallback: dependent transitions are tolerable when
    # every state of st(f) is reachable via an all-independent path.
    indep_reach = {ts.init_idx}
    work = [ts.init_idx]
    while work:
        s = work.pop()
        for t in succ.get(s, ()):
            if t.dst not in indep_reach and _effectively_independent(ts, ph, t):
                indep_reach.add(t.dst)
                work.append(t.dst)
    if live_targets <= indep_reach:
        return Amenability(leaf, True, leaf.m)

    witness = _dependent_witness(ts, ph, live_targets - indep_reach)
    dep = [t for t in (witness or [])
           if not _effectively_independent(ts, ph, t)]
    flagged = "\n".join(
        _render_edge(ts, t.src, t.label.render(), ts.render_state(t.dst))
        for t in dep)
    diag = Diagnostic(
        "MER0401",
        f"Cutoff computation failed: on path\n"
        f"{render_path(ts, witness or [])}\n"
        f"the following transition(s) are not independent:\n{flagged}",
        Severity.ERROR)
    return Amenability(leaf, False, None, witness=witness, diagnostics=[diag])


# ---------------------------------------------------------------------------
# composition


@dataclass
class CutoffResult:
    cutoff: int | None
    per_leaf: list[Amenability]
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.cutoff is not None


def _leaf_zone(ts: LocalTS, leaf: Leaf, succ) -> set[int]:
    """States on some path s0 -> st(f): reachable from the initial state
    and co-reachable from the leaf's error states.  The initial state is
    on every such path and is excluded, since disjunct path sets are
    compared for disjointness and all of them start there."""
    targets = set(st_of(ts, leaf))
    reach0 = _reach_forward(succ, ts.init_idx)
    co = _reach_backward(ts, targets)
    return (reach0 & co) - {ts.init_idx}


def _zones_disjoint(ts: LocalTS, za: set[int], zb: set[int]) -> bool:
    """Clause summation is sound only when no non-internal transition
    connects the two zones (shared states are fine only if absent)."""
    if za & zb:
        return False
    for t in ts.transitions:
        if t.label.kind in ("internal", "crash"):
            continue
        if (t.src in za and t.dst in zb) or (t.src in zb and t.dst in za):
            return False
    return True


def compose_cutoff(ts: LocalTS, specs: list[SpecExpr]) -> CutoffResult:
    ph = compute_phases(ts)
    diags = check_phase_compat(ts, ph) + check_side_conditions(ts, ph)
    if any(d.severity is Severity.ERROR for d in diags):
        return CutoffResult(None, [], diags)

    clauses: list[list[Leaf]] = []
    for spec in specs:
        clauses.extend(to_cnf(spec))

    succ = _succ_map(ts)
    per_leaf: list[Amenability] = []
    clause_cutoffs: list[int] = []
    for clause in clauses:
        results = [check_amenability(ts, ph, leaf) for leaf in clause]
        per_leaf.extend(results)
        for r in results:
            diags.extend(r.diagnostics)
        if not all(r.amenable for r in results):
            return CutoffResult(None, per_leaf, diags)
        if len(clause) > 1:
            zones = [_leaf_zone(ts, leaf, succ) for leaf in clause]
            for i in range(len(zones)):
                for j in range(i + 1, len(zones)):
                    if not _zones_disjoint(ts, zones[i], zones[j]):
                        diags.append(Diagnostic(
                            "MER0402",
                            f"cannot sum cutoffs of {clause[i].render()} and "
                            f"{clause[j].render()}: their reachable regions "
                            f"share states or are linked by a communicating "
                            f"transition", Severity.ERROR))
                        return CutoffResult(None, per_leaf, diags)
        clause_cutoffs.append(sum(r.cutoff for r in results))

    cutoff = max(clause_cutoffs, default=1)
    return CutoffResult(cutoff, per_leaf, diags)
