"""Indexed global semantics: the differential oracle.

A global state is a tuple of per-process local states (indices into the
LocalTS) plus, when the model has process-to-process rendezvous, a register
per process remembering who sent the last received message of each action
(used to resolve `act.sID` targets).  The environment is a stateless extra
participant: it emits any environment action with any payload at any time
and absorbs anything sent to it.

Intended for small n only; the verifier proper works on counters.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .core import CConsensus
from .diagnostics import Diagnostic, MercuryError, Severity
from .localts import LocalTS

ENV = -1  # sender register value for the environment

Regs = tuple[tuple[tuple[str, int], ...], ...]


@dataclass(frozen=True)
class IndexedState:
    locals: tuple[int, ...]
    regs: Regs = ()

    def with_local(self, i: int, s: int) -> "IndexedState":
        ls = list(self.locals)
        ls[i] = s
        return IndexedState(tuple(ls), self.regs)


def _reg_get(regs: Regs, i: int, act: str) -> int | None:
    for a, sender in regs[i]:
        if a == act:
            return sender
    return None


def _reg_set(regs: Regs, i: int, act: str, sender: int) -> Regs:
    row = tuple(sorted([(a, s) for a, s in regs[i] if a != act]
                       + [(act, sender)]))
    return regs[:i] + (row,) + regs[i + 1:]


class Oracle:
    def __init__(self, ts: LocalTS):
        self.ts = ts
        self.crash = ts.crash_idx
        self.track_senders = any(
            t.label.kind in ("send_rz", "recv_rz") and not t.label.env
            for t in ts.transitions)
        self._by_kind: dict[str, list] = {}
        for t in ts.transitions:
            self._by_kind.setdefault(t.label.kind, []).append(t)
        self._out = ts.out
        self._proposals = self._collect_proposals()

    def initial(self, n: int) -> IndexedState:
        regs = tuple(() for _ in range(n)) if self.track_senders else ()
        return IndexedState((self.ts.init_idx,) * n, regs)

    # -- helpers ------------------------------------------------------------

    def _collect_proposals(self) -> dict[str, dict[int, set[int]]]:
        out: dict[str, dict[int, set[int]]] = {}
        for h in self.ts.core.handlers:
            if isinstance(h, CConsensus) and h.propose_var:
                slot = self.ts._slot_idx[h.propose_var]
                per = out.setdefault(h.cid, {})
                for i, (loc, vals) in enumerate(self.ts.states):
                    if loc == h.loc:
                        per.setdefault(i, set()).add(vals[slot])
        return out

    def _recv(self, s: int, kind: str, act: str, payload):
        for t in self._out[s]:
            if t.label.kind == kind and t.label.act == act \
                    and t.label.payload == payload:
                return t
        return None

    def _alive(self, q: IndexedState) -> list[int]:
        return [i for i, s in enumerate(q.locals) if s != self.crash]

    # -- step ---------------------------------------------------------------

    def step(self, q: IndexedState) -> list[tuple[str, IndexedState]]:
        out: list[tuple[str, IndexedState]] = []
        alive = self._alive(q)
        out += self._solo_steps(q, alive)
        out += self._broadcast_steps(q, alive)
        out += self._env_broadcast_steps(q, alive)
        out += self._rendezvous_steps(q, alive)
        out += self._agreement_steps(q, alive)
        return out

    def _solo_steps(self, q, alive):
        out = []
        for i in alive:
            s = q.locals[i]
            for t in self._out[s]:
                lbl = t.label
                if lbl.kind in ("internal", "crash"):
                    out.append((f"{lbl.render()}@{i}", q.with_local(i, t.dst)))
                elif lbl.kind == "send_rz" and lbl.env:
                    out.append((f"{lbl.render()}@{i}", q.with_local(i, t.dst)))
                elif lbl.kind == "recv_rz" and lbl.env:
                    nq = q.with_local(i, t.dst)
                    if self.track_senders:
                        nq = IndexedState(nq.locals,
                                          _reg_set(nq.regs, i, lbl.act, ENV))
                    out.append((f"{lbl.render()}@{i}", nq))
        return out

    def _broadcast_steps(self, q, alive):
        out = []
        for i in alive:
            for t in self._out[q.locals[i]]:
                lbl = t.label
                if lbl.kind != "send_br":
                    continue
                moves = {i: t.dst}
                for j in alive:
                    if j == i:
                        continue
                    r = self._recv(q.locals[j], "recv_br", lbl.act, lbl.payload)
                    if r is None:
                        break
                    moves[j] = r.dst
                else:
                    ls = list(q.locals)
                    for j, d in moves.items():
                        ls[j] = d
                    out.append((f"{lbl.render()}@{i}",
                                IndexedState(tuple(ls), q.regs)))
        return out

    def _env_broadcast_steps(self, q, alive):
        out = []
        if not alive:
            return out
        for decl in self.ts.core.actions:
            if not (decl.env and decl.kind == "br"):
                continue
            payloads = ([None] if decl.payload is None
                        else range(decl.payload[0], decl.payload[1] + 1))
            for pv in payloads:
                moves = {}
                for j in alive:
                    r = self._recv(q.locals[j], "recv_br", decl.name, pv)
                    if r is None:
                        break
                    moves[j] = r.dst
                else:
                    ls = list(q.locals)
                    for j, d in moves.items():
                        ls[j] = d
                    tag = f"[{pv}]" if pv is not None else ""
                    out.append((f"env!{decl.name}{tag}",
                                IndexedState(tuple(ls), q.regs)))
        return out

    def _rendezvous_steps(self, q, alive):
        out = []
        for i in alive:
            for t in self._out[q.locals[i]]:
                lbl = t.label
                if lbl.kind != "send_rz" or lbl.env:
                    continue
                if lbl.target_act is None:
                    continue
                j = _reg_get(q.regs, i, lbl.target_act) \
                    if self.track_senders else None
                if j in (None, ENV) or j == i or q.locals[j] == self.crash:
                    continue
                r = self._recv(q.locals[j], "recv_rz", lbl.act, lbl.payload)
                if r is None:
                    continue
                ls = list(q.locals)
                ls[i], ls[j] = t.dst, r.dst
                regs = _reg_set(q.regs, j, lbl.act, i) \
                    if self.track_senders else q.regs
                out.append((f"{lbl.render()}@{i}->{j}",
                            IndexedState(tuple(ls), regs)))
        return out

    # -- agreements -----------------------------------------------------------

    def _participants(self, q, alive, expr, src: set[int]) -> list[int] | None:
        members = self.ts.member_states(expr)
        gamma = [i for i in alive if q.locals[i] in members]
        if not gamma:
            return None
        if any(q.locals[i] not in src for i in gamma):
            return None  # C1: every participant at a source location
        return gamma

    def _agreement_steps(self, q, alive):
        out = []
        ts = self.ts
        for pid, info in sorted(ts.core.partitions.items()):
            src = {t.src for t in ts.transitions
                   if t.label.kind == "part_win" and t.label.act == pid}
            if not any(q.locals[i] in src for i in alive):
                continue
            gamma = self._participants(q, alive, info.participants, src)
            if gamma is None:
                continue
            wins = {t.src: t.dst for t in ts.transitions
                    if t.label.kind == "part_win" and t.label.act == pid}
            loses = {t.src: t.dst for t in ts.transitions
                     if t.label.kind == "part_lose" and t.label.act == pid}
            for f_size in range(len(gamma)):        # F strictly inside Γ
                for F in combinations(gamma, f_size):
                    live = [i for i in gamma if i not in F]
                    m = min(info.k, len(live))
                    for W in combinations(live, m):
                        ls = list(q.locals)
                        for i in F:
                            ls[i] = self.crash
                        for i in live:
                            ls[i] = (wins if i in W else loses)[q.locals[i]]
                        out.append((f"part!{pid} W={W} F={F}",
                                    IndexedState(tuple(ls), q.regs)))
        for cid, info in sorted(ts.core.consensuses.items()):
            src = {t.src for t in ts.transitions
                   if t.label.kind == "cons" and t.label.act == cid}
            if not any(q.locals[i] in src for i in alive):
                continue
            gamma = self._participants(q, alive, info.participants, src)
            if gamma is None:
                continue
            dests = {(t.src, t.label.decided): t.dst
                     for t in ts.transitions
                     if t.label.kind == "cons" and t.label.act == cid}
            proposals = self._proposals.get(cid, {})
            for f_size in range(len(gamma) // 2 + (len(gamma) % 2)):
                if len(gamma) - f_size <= f_size:
                    continue                          # |Γ\F| > |F|
                for F in combinations(gamma, f_size):
                    live = [i for i in gamma if i not in F]
                    pool = sorted({v for i in gamma
                                   for v in proposals.get(q.locals[i], ())})
                    for size in range(1, min(info.k, len(pool)) + 1):
                        for W in combinations(pool, size):
                            ls = list(q.locals)
                            for i in F:
                                ls[i] = self.crash
                            for i in live:
                                ls[i] = dests[(q.locals[i], W)]
                            out.append((f"cons!{cid} W={W} F={F}",
                                        IndexedState(tuple(ls), q.regs)))
        return out


def indexed_step(q: IndexedState, ts: LocalTS) -> list[tuple[str, IndexedState]]:
    return Oracle(ts).step(q)


def reachable_indexed(ts: LocalTS, n: int, max_states: int = 2_000_000,
                      canonical: bool = False) -> set[IndexedState]:
    """BFS closure of indexed_step.  With canonical=True only one
    representative per index permutation is kept (sound by full symmetry;
    unavailable when sender registers are tracked)."""
    oracle = Oracle(ts)
    canonical = canonical and not oracle.track_senders

    def canon(q: IndexedState) -> IndexedState:
        return IndexedState(tuple(sorted(q.locals)), q.regs)

    q0 = oracle.initial(n)
    if canonical:
        q0 = canon(q0)
    seen = {q0}
    frontier = [q0]
    while frontier:
        q = frontier.pop()
        for _, nq in oracle.step(q):
            if canonical:
                nq = canon(nq)
            if nq not in seen:
                if len(seen) >= max_states:
                    raise MercuryError([Diagnostic(
                        "MER0502",
                        f"indexed exploration exceeded {max_states} states",
                        Severity.ERROR)])
                seen.add(nq)
                frontier.append(nq)
    return seen


def permute(q: IndexedState, pi: list[int]) -> IndexedState:
    """Apply an index permutation: process i of the result is process pi[i]
    of the input; sender registers are renamed accordingly."""
    inv = {old: new for new, old in enumerate(pi)}
    locals_ = tuple(q.locals[pi[i]] for i in range(len(pi)))
    if not q.regs:
        return IndexedState(locals_)
    regs = tuple(
        tuple(sorted((a, ENV if s == ENV else inv[s]) for a, s in q.regs[pi[i]]))
        for i in range(len(pi)))
    return IndexedState(locals_, regs)
