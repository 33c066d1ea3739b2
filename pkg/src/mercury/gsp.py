"""Counter-system form of a local transition system.

Every communication construct is rewritten into a guarded global action over
process counters:

  * broadcast, per payload: a 1-sender action (send transitions fill the
    slot, receives form the receive map),
  * internal steps and crashes: 1-sender actions guarded by the phases of
    their source state, receivers stay put,
  * rendezvous, per payload: a 2-sender action (sender slot + receiver
    slot); environment rendezvous keeps only the system side as a 1-sender,
  * environment broadcasts with no system sender: 0-sender actions (the
    environment fires them at will),
  * a Partition of cardinality k: one k-maximal action whose slots are the
    win transitions and whose receive map is the lose transitions,
  * a Consensus: one action per decided tuple w and per subset D of w whose
    sole witnesses crash while deciding; the witnesses of D fill their slot
    by moving to the crash state, and a participant-count constraint
    (members >= 2|D|+1) keeps the surviving majority honest.

A fired action moves one process per slot, then pushes every remaining
process through the receive map; crashed processes absorb everything.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations, product

from . import syntax as ast
from .core import CConsensus
from .diagnostics import Diagnostic, MercuryError, Severity
from .localts import LocalTS
from .phasing import PhaseResult

Counter = tuple[int, ...]


@dataclass(frozen=True)
class GspAction:
    name: str
    kind: str                            # "sender" | "maximal"
    arity: int                           # number of slots (0 = env-fired)
    guard: frozenset[int]
    slots: tuple[tuple[tuple[int, int], ...], ...]   # per slot: (src, dst) options
    recv_map: dict[int, int]
    provenance: str = ""
    member_states: frozenset[int] | None = None      # agreement participants
    crash_slots: int = 0                 # consensus slots filled by crashing

    def sources(self) -> set[int]:
        return {s for slot in self.slots for s, _ in slot}

    def min_members(self) -> int:
        """Participant count needed at fire time (majority over the
        crashing witnesses)."""
        return 2 * self.crash_slots + 1 if self.crash_slots else 0


@dataclass
class GspSystem:
    ts: LocalTS
    actions: list[GspAction]
    warnings: list[Diagnostic] = field(default_factory=list)

    @property
    def n_states(self) -> int:
        return len(self.ts.states)

    @property
    def crash_idx(self) -> int:
        return self.ts.crash_idx

    @property
    def init_idx(self) -> int:
        return self.ts.init_idx

    def initial(self, n: int) -> Counter:
        q = [0] * self.n_states
        q[self.init_idx] = n
        return tuple(q)

    def to_json(self) -> dict:
        return {
            "process": self.ts.core.name,
            "states": [self.ts.render_state(i, full=True)
                       for i in range(self.n_states)],
            "initial": self.init_idx,
            "crash": self.crash_idx,
            "actions": [
                {
                    "name": a.name,
                    "kind": a.kind,
                    "arity": a.arity,
                    "guard": sorted(a.guard),
                    "slots": [sorted(slot) for slot in a.slots],
                    "recv_map": {str(s): d for s, d in sorted(a.recv_map.items())},
                    "provenance": a.provenance,
                    "member_states": (sorted(a.member_states)
                                      if a.member_states is not None else None),
                    "crash_slots": a.crash_slots,
                }
                for a in self.actions
            ],
        }


# ---------------------------------------------------------------------------
# rewrite


def _phase_guard(ph: PhaseResult, states: set[int], everything: frozenset[int],
                 crash: int) -> frozenset[int]:
    """Union of the phases containing any of the given states; everything
    when none of them is phased."""
    out: set[int] = set()
    for s in states:
        out |= ph.union_of_phases(s)
    if not out:
        return everything
    return frozenset(out | {crash})


def _group(trs, key):
    out: dict = {}
    for t in trs:
        out.setdefault(key(t), []).append(t)
    return out


class _Rewriter:
    def __init__(self, ts: LocalTS, ph: PhaseResult):
        self.ts = ts
        self.ph = ph
        self.crash = ts.crash_idx
        self.everything = frozenset(range(len(ts.states)))
        self.actions: list[GspAction] = []
        self.warnings: list[Diagnostic] = []

    def run(self) -> GspSystem:
        self._broadcasts()
        self._internals_and_crashes()
        self._rendezvous()
        self._partitions()
        self._consensuses()
        self.actions.sort(key=lambda a: a.name)
        sys = GspSystem(self.ts, self.actions, self.warnings)
        self.warnings.extend(check_well_behaved(sys))
        return sys

    def _emit(self, **kw) -> None:
        recv = dict(kw.pop("recv_map"))
        recv[self.crash] = self.crash
        self.actions.append(GspAction(recv_map=recv, **kw))

    # -- broadcasts -----------------------------------------------------------

    def _broadcasts(self) -> None:
        ts = self.ts
        br = [t for t in ts.transitions if t.label.kind in ("send_br", "recv_br")]
        for act, trs in sorted(_group(br, lambda t: t.label.act).items()):
            guard = frozenset(self.ph.src[("br", act)] | {self.crash})
            decl = ts.core.action(act)
            by_payload = _group(trs, lambda t: t.label.payload)
            for pv, ptrs in sorted(by_payload.items(),
                                   key=lambda kv: (kv[0] is None, kv[0])):
                tag = f"[{pv}]" if pv is not None else ""
                sends = [(t.src, t.dst) for t in ptrs
                         if t.label.kind == "send_br"]
                recvs = {t.src: t.dst for t in ptrs
                         if t.label.kind == "recv_br"}
                if sends:
                    self._emit(name=f"br#{act}{tag}", kind="sender", arity=1,
                               guard=guard, slots=(tuple(sorted(set(sends))),),
                               recv_map=recvs, provenance=f"broadcast {act}")
                if decl.env and recvs:
                    self._emit(name=f"env_br#{act}{tag}", kind="sender",
                               arity=0, guard=guard, slots=(),
                               recv_map=recvs,
                               provenance=f"environment broadcast {act}")

    # -- internal / crash -------------------------------------------------------

    def _internals_and_crashes(self) -> None:
        ts = self.ts
        for t in ts.transitions:
            if t.label.kind != "internal":
                continue
            guard = _phase_guard(self.ph, {t.src}, self.everything, self.crash)
            self._emit(name=f"tau#{t.src}->{t.dst}", kind="sender", arity=1,
                       guard=guard, slots=(((t.src, t.dst),),),
                       recv_map={s: s for s in guard},
                       provenance="internal step")
        for s in range(len(ts.states)):
            if s == self.crash:
                continue
            guard = _phase_guard(self.ph, {s}, self.everything, self.crash)
            self._emit(name=f"crash#{s}", kind="sender", arity=1,
                       guard=guard, slots=(((s, self.crash),),),
                       recv_map={t: t for t in guard}, provenance="crash")

    # -- rendezvous -----------------------------------------------------------

    def _rendezvous(self) -> None:
        ts = self.ts
        rz = [t for t in ts.transitions if t.label.kind in ("send_rz", "recv_rz")]
        for act, trs in sorted(_group(rz, lambda t: t.label.act).items()):
            decl = ts.core.action(act)
            srcs = {t.src for t in trs}
            guard = _phase_guard(self.ph, srcs, self.everything, self.crash)
            ident = {s: s for s in guard}
            for pv, ptrs in sorted(_group(trs, lambda t: t.label.payload).items(),
                                   key=lambda kv: (kv[0] is None, kv[0])):
                tag = f"[{pv}]" if pv is not None else ""
                sends = tuple(sorted({(t.src, t.dst) for t in ptrs
                                      if t.label.kind == "send_rz"}))
                recvs = tuple(sorted({(t.src, t.dst) for t in ptrs
                                      if t.label.kind == "recv_rz"}))
                if decl.env:
                    # only the system side of an env rendezvous moves
                    if sends:
                        self._emit(name=f"env_send#{act}{tag}", kind="sender",
                                   arity=1, guard=guard, slots=(sends,),
                                   recv_map=ident,
                                   provenance=f"send {act} to the environment")
                    if recvs:
                        self._emit(name=f"env_recv#{act}{tag}", kind="sender",
                                   arity=1, guard=guard, slots=(recvs,),
                                   recv_map=ident,
                                   provenance=f"receive {act} from the environment")
                elif sends and recvs:
                    self._emit(name=f"rz#{act}{tag}", kind="sender", arity=2,
                               guard=guard, slots=(sends, recvs),
                               recv_map=ident, provenance=f"rendezvous {act}")

    # -- agreements -------------------------------------------------------------

    def _members(self, participants: ast.Expr, src: frozenset[int],
                 ident: str) -> tuple[frozenset[int], frozenset[int]]:
        """(member states, guard) for an agreement's participant set."""
        members = frozenset(self.ts.member_states(participants))
        if not members:
            raise MercuryError([Diagnostic(
                "MER0501",
                f"the participant set of {ident!r} is never defined in any "
                f"reachable state", Severity.ERROR)])
        non_members = self.everything - members - {self.crash}
        return members, frozenset((src & members) | non_members | {self.crash})

    def _partitions(self) -> None:
        ts = self.ts
        for pid, info in sorted(ts.core.partitions.items()):
            src = self.ph.src[("part", pid)]
            members, guard = self._members(info.participants, src, pid)
            wins = tuple(sorted({(t.src, t.dst) for t in ts.transitions
                                 if t.label.kind == "part_win"
                                 and t.label.act == pid}))
            recvs = {t.src: t.dst for t in ts.transitions
                     if t.label.kind == "part_lose" and t.label.act == pid}
            for s in guard - set(recvs) - {self.crash}:
                recvs[s] = s             # bystanders outside the participant set
            self._emit(name=f"{pid}#partition", kind="maximal", arity=info.k,
                       guard=guard, slots=(wins,) * info.k, recv_map=recvs,
                       provenance=f"partition {pid}",
                       member_states=members & src)

    def _proposals(self, cid: str) -> dict[int, set[int]]:
        """Values each local state proposes for the given consensus id."""
        out: dict[int, set[int]] = {}
        for h in self.ts.core.handlers:
            if isinstance(h, CConsensus) and h.cid == cid and h.propose_var:
                slot = self.ts._slot_idx[h.propose_var]
                for i, (loc, vals) in enumerate(self.ts.states):
                    if loc == h.loc:
                        out.setdefault(i, set()).add(vals[slot])
        return out

    def _consensuses(self) -> None:
        ts = self.ts
        for cid, info in sorted(ts.core.consensuses.items()):
            src = self.ph.src[("cons", cid)]
            members, guard = self._members(info.participants, src, cid)
            proposals = self._proposals(cid)
            by_decided = _group(
                [t for t in ts.transitions
                 if t.label.kind == "cons" and t.label.act == cid],
                lambda t: t.label.decided)
            for w, trs in sorted(by_decided.items()):
                recvs: dict[int, int] = {}
                for t in trs:
                    if recvs.setdefault(t.src, t.dst) != t.dst:
                        raise MercuryError([Diagnostic(
                            "MER0203",
                            f"state {ts.render_state(t.src)} reacts to "
                            f"consensus {cid!r} deciding {w} in two different "
                            f"ways", Severity.ERROR)])
                witness = {e: sorted(s for s, vs in proposals.items()
                                     if e in vs and s in src)
                           for e in w}
                if any(not witness[e] for e in w):
                    continue             # some decided value nobody can propose
                wtag = f"{{{','.join(map(str, w))}}}"
                for d_size in range(len(w) + 1):
                    for dead in combinations(w, d_size):
                        slots = tuple(
                            tuple((s, self.crash if e in dead else recvs[s])
                                  for s in witness[e])
                            for e in w)
                        dtag = (f"#D={{{','.join(map(str, dead))}}}"
                                if dead else "")
                        self._emit(name=f"{cid}#w={wtag}{dtag}", kind="sender",
                                   arity=len(w), guard=guard, slots=slots,
                                   recv_map=recvs,
                                   provenance=f"consensus {cid} deciding {wtag}",
                                   member_states=members & src,
                                   crash_slots=len(dead))


def rewrite(ts: LocalTS, ph: PhaseResult) -> GspSystem:
    return _Rewriter(ts, ph).run()


# ---------------------------------------------------------------------------
# counter semantics


def alpha(states: tuple[int, ...] | list[int], n_states: int) -> Counter:
    """Occurrence counts of local states in an indexed global state."""
    q = [0] * n_states
    for s in states:
        q[s] += 1
    return tuple(q)


def supp(q: Counter) -> set[int]:
    return {i for i, c in enumerate(q) if c}


def _slot_fillings(action: GspAction, q: Counter):
    """Distinct (taken, produced) count-vector pairs over the slots,
    honoring per-state availability."""
    out = set()
    if action.kind == "sender":
        for choice in product(*action.slots):
            taken: dict[int, int] = {}
            for s, _ in choice:
                taken[s] = taken.get(s, 0) + 1
            if any(q[s] < c for s, c in taken.items()):
                continue
            produced: dict[int, int] = {}
            for _, d in choice:
                produced[d] = produced.get(d, 0) + 1
            out.add((tuple(sorted(taken.items())),
                     tuple(sorted(produced.items()))))
    else:
        options = action.slots[0] if action.slots else ()
        avail = sum(q[s] for s in {s for s, _ in options})
        m = min(action.arity, avail)
        if m == 0:
            return []
        for combo in combinations_with_counts(options, m, q):
            out.add(combo)
    return sorted(out)


def combinations_with_counts(options, m: int, q: Counter):
    """Multisets of m slot transitions limited by per-state availability."""
    per_state = _group(options, lambda o: o[0])
    states = sorted(per_state)

    def go(i: int, left: int, used: list[tuple[tuple[int, int], int]]):
        if left == 0:
            taken: dict[int, int] = {}
            produced: dict[int, int] = {}
            for (s, d), c in used:
                taken[s] = taken.get(s, 0) + c
                produced[d] = produced.get(d, 0) + c
            yield (tuple(sorted(taken.items())),
                   tuple(sorted(produced.items())))
            return
        if i == len(states):
            return
        s = states[i]
        cap = min(left, q[s])
        opts = per_state[s]
        for total in range(cap + 1):
            for split in _compositions(total, len(opts)):
                yield from go(i + 1, left - total,
                              used + [(opts[j], c)
                                      for j, c in enumerate(split) if c])

    yield from go(0, m, [])


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def fire(action: GspAction, q: Counter, taken, produced, *,
         enforce_floor: bool = True) -> Counter | None:
    """Apply one slot filling; None when the remainder cannot all receive."""
    rem = list(q)
    for s, c in taken:
        rem[s] -= c
    if enforce_floor and action.member_states is not None:
        t = sum(q[s] for s in action.member_states)
        if t < max(1, action.min_members()):
            return None
    out = [0] * len(q)
    for s, c in enumerate(rem):
        if not c:
            continue
        d = action.recv_map.get(s)
        if d is None:
            return None
        out[d] += c
    for d, c in produced:
        out[d] += c
    return tuple(out)


def enabled_fillings(action: GspAction, q: Counter):
    if not supp(q) <= action.guard:
        return []
    return _slot_fillings(action, q)


def counter_step(q: Counter, sys: GspSystem) -> list[tuple[str, Counter]]:
    """All successors, deterministically ordered by action name then state."""
    out: list[tuple[str, Counter]] = []
    seen = set()
    for a in sys.actions:
        for taken, produced in enabled_fillings(a, q):
            nq = fire(a, q, taken, produced)
            if nq is not None and (a.name, nq) not in seen:
                seen.add((a.name, nq))
                out.append((a.name, nq))
    out.sort()
    return out


def _can_fill(slots, q: Counter, i: int = 0, used: dict | None = None) -> bool:
    """Existence of one slot assignment within availability (early exit)."""
    if used is None:
        used = {}
    if i == len(slots):
        return True
    for s in {s for s, _ in slots[i]}:
        if q[s] - used.get(s, 0) > 0:
            used[s] = used.get(s, 0) + 1
            if _can_fill(slots, q, i + 1, used):
                used[s] -= 1
                return True
            used[s] -= 1
    return False


def can_fire(action: GspAction, q: Counter) -> bool:
    """Slot-assignment (and participant-count) feasibility, guard aside."""
    if action.arity == 0:
        ok = True
    elif action.kind == "maximal":
        ok = any(q[s] for s, _ in action.slots[0])
    else:
        ok = _can_fill(action.slots, q)
    if not ok:
        return False
    if action.member_states is not None:
        t = sum(q[s] for s in action.member_states)
        if t < max(1, action.min_members()):
            return False
    return True


# ---------------------------------------------------------------------------
# well-behavedness (soft check)


def check_well_behaved(sys: GspSystem) -> list[Diagnostic]:
    """Pairwise action compatibility: after a1 fires, every process the
    guard of a2 constrains can still get inside it.  Violations are
    warnings — the translation stays usable, coverability answers lose
    their general-n backing."""
    reach = _internal_reach(sys)
    out: list[Diagnostic] = []
    for a1 in sys.actions:
        landing = {d for slot in a1.slots for _, d in slot}
        m_img = {a1.recv_map[s] for s in a1.guard if s in a1.recv_map}
        for a2 in sys.actions:
            if not landing & a2.guard:
                continue
            if not (landing | m_img) & a2.sources():
                continue
            if landing <= a2.guard and all(
                    any(t in a2.guard for t in reach[a1.recv_map[s]])
                    for s in a1.guard if s in a1.recv_map):
                continue
            out.append(Diagnostic(
                "MER0602",
                f"actions {a1.name!r} and {a2.name!r} are not "
                f"well-behaved together", Severity.WARNING))
    return out


def _internal_reach(sys: GspSystem) -> list[set[int]]:
    adj: dict[int, set[int]] = {i: {i} for i in range(sys.n_states)}
    for a in sys.actions:
        if a.provenance in ("internal step", "crash") and a.slots:
            for s, d in a.slots[0]:
                adj[s].add(d)
    reach = []
    for s in range(sys.n_states):
        seen = {s}
        stack = [s]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        reach.append(seen)
    return reach


def dump_json(sys: GspSystem) -> str:
    return json.dumps(sys.to_json(), indent=2, ensure_ascii=False)
