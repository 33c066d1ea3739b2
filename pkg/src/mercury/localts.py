"""Local transition system of a core process.

States are (location, valuation) pairs.  The valuation assigns values to the
declared bounded-int variables plus derived agreement registers:

  * one decided-values register per Consensus id (a sorted tuple, or unset),
  * winner/loser tokens per Partition id (set after the partition fired),
  * a role register per Partition id whose winner/loser set is used as a
    participant set elsewhere (membership must be recoverable from the local
    state for those).

A distinguished absorbing crash state is reachable from every state.
Receive transitions are enumerated per concrete payload value; consensus
transitions are enumerated per decided tuple over the id's propose domain.
Out-of-range assignments saturate at the range bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import syntax as ast
from .core import (CConsensus, CInternal, CPartition, CRecv, CSend,
                   CoreProcess)
from .diagnostics import Diagnostic, MercuryError, Severity

CRASH_LOC = "⊥cr"
DEFAULT_MAX_STATES = 1_000_000

_BOT = None  # unset register reads


@dataclass(frozen=True)
class Label:
    kind: str                 # internal crash send_br recv_br send_rz recv_rz
                              # part_win part_lose cons
    act: str = ""             # action name or agreement id
    payload: int | None = None
    decided: tuple[int, ...] | None = None
    acting: bool = False      # consensus only: own proposal was decided
    env: bool = False
    target_act: str | None = None  # rendezvous send: act whose sID is targeted

    # -- classification -----------------------------------------------------

    @property
    def event_key(self) -> tuple[str, str] | None:
        """Identity of the globally-synchronizing event, payloads merged."""
        if self.kind in ("send_br", "recv_br"):
            return ("br", self.act)
        if self.kind == "part_win" or self.kind == "part_lose":
            return ("part", self.act)
        if self.kind == "cons":
            return ("cons", self.act)
        return None

    @property
    def rz_key(self) -> tuple[str, str] | None:
        if self.kind in ("send_rz", "recv_rz"):
            return ("rz", self.act)
        return None

    @property
    def role(self) -> str:
        """acting / reacting / neither."""
        if self.kind in ("send_br", "part_win") or (self.kind == "cons" and self.acting):
            return "acting"
        if self.kind in ("recv_br", "part_lose") or (self.kind == "cons" and not self.acting):
            return "reacting"
        return "neither"

    @property
    def independent(self) -> bool:
        """Whether a lone process can take this transition (no other system
        process required).  Environment interactions count as independent."""
        if self.role == "acting" or self.kind in ("internal", "crash"):
            return True
        if self.env and self.kind in ("send_rz", "recv_rz", "recv_br"):
            return True
        return False

    def render(self) -> str:
        name = self.act
        if self.payload is not None:
            name = f"{self.act}[{self.payload}]"
        if self.decided is not None:
            name = f"{self.act}={{{','.join(map(str, self.decided))}}}"
        if self.role == "acting":
            return f"A({name})"
        if self.role == "reacting":
            return f"R({name})"
        if self.kind == "internal":
            return "ε"
        if self.kind == "crash":
            return "crash"
        if self.kind == "send_rz":
            return f"S({name})"
        return f"Rz({name})"

    def sort_key(self):
        return (self.kind, self.act, self.payload if self.payload is not None else -1,
                self.decided or (), self.acting)


def classify(label: Label) -> tuple[str, bool]:
    """(role, independent) of a transition label."""
    return (label.role, label.independent)


@dataclass(frozen=True)
class Transition:
    src: int
    label: Label
    dst: int


@dataclass
class Slot:
    name: str
    kind: str  # int | dec | wtok | ltok | role
    init: object = None


class LocalTS:
    def __init__(self, core: CoreProcess, max_states: int = DEFAULT_MAX_STATES):
        self.core = core
        self.max_states = max_states
        self.slots: list[Slot] = []
        self._build_slots()
        self.states: list[tuple[str, tuple]] = []
        self._index: dict[tuple[str, tuple], int] = {}
        self.out: list[list[Transition]] = []
        self.transitions: list[Transition] = []
        self._build()

    # -- slots ----------------------------------------------------------------

    def _build_slots(self) -> None:
        core = self.core
        for v in core.int_vars:
            self.slots.append(Slot(v.name, "int", v.init))
        for cid in sorted(core.consensuses):
            self.slots.append(Slot(cid, "dec", _BOT))
        roles_needed = set()
        for h in core.handlers:
            if isinstance(h, (CPartition, CConsensus)):
                p = h.participants
                if isinstance(p, (ast.WinSet, ast.LoseSet)):
                    roles_needed.add(p.part)
        for pid in sorted(core.partitions):
            self.slots.append(Slot(f"{pid}.winS", "wtok", _BOT))
            self.slots.append(Slot(f"{pid}.loseS", "ltok", _BOT))
            if pid in roles_needed:
                self.slots.append(Slot(f"{pid}.role", "role", _BOT))
        self._slot_idx = {s.name: i for i, s in enumerate(self.slots)}
        self._int_ranges = {v.name: (v.lo, v.hi) for v in core.int_vars}

    # -- construction ------------------------------------------------------------

    def _intern(self, loc: str, vals: tuple) -> int:
        key = (loc, vals)
        idx = self._index.get(key)
        if idx is None:
            if len(self.states) >= self.max_states:
                raise MercuryError([Diagnostic(
                    "MER0502", f"state cap of {self.max_states} states exceeded",
                    Severity.ERROR)])
            idx = len(self.states)
            self.states.append(key)
            self._index[key] = idx
            self.out.append([])
        return idx

    def _build(self) -> None:
        self.crash_idx = self._intern(CRASH_LOC, ())
        init_vals = tuple(s.init for s in self.slots)
        self.init_idx = self._intern(self.core.initial, init_vals)
        frontier = [self.init_idx]
        seen = {self.crash_idx, self.init_idx}
        while frontier:
            idx = frontier.pop()
            for tr in self._expand(idx):
                self.out[tr.src].append(tr)
                self.transitions.append(tr)
                if tr.dst not in seen:
                    seen.add(tr.dst)
                    frontier.append(tr.dst)
        for outs in self.out:
            outs.sort(key=lambda t: (t.label.sort_key(), t.dst))
        self.transitions.sort(key=lambda t: (t.src, t.label.sort_key(), t.dst))

    # -- expression evaluation -----------------------------------------------

    def _eval(self, e: ast.Expr, vals: tuple, payload: int | None,
              loc: str) -> object:
        """Evaluate; returns int/bool or _BOT when an unset register is read."""
        match e:
            case ast.IntConst(v):
                return v
            case ast.BoolConst(v):
                return v
            case ast.VarRef(name):
                return vals[self._slot_idx[name]]
            case ast.PayloadRef():
                return payload
            case ast.DecVarRef(cons, idx):
                dec = vals[self._slot_idx[cons]]
                if dec is _BOT:
                    return _BOT
                return dec[idx - 1] if idx <= len(dec) else _BOT
            case ast.Arith(op, l, r):
                lv, rv = (self._eval(l, vals, payload, loc),
                          self._eval(r, vals, payload, loc))
                if lv is _BOT or rv is _BOT:
                    return _BOT
                return lv + rv if op == "+" else lv - rv if op == "-" else lv * rv
            case ast.Cmp(op, l, r):
                if isinstance(l, (ast.SelfId, ast.SenderId)) or \
                        isinstance(r, (ast.SelfId, ast.SenderId)):
                    raise MercuryError([Diagnostic(
                        "MER0104", f"identity comparisons in guards are outside "
                                   f"the fragment (location {loc!r})",
                        Severity.FRAGMENT)])
                lv, rv = (self._eval(l, vals, payload, loc),
                          self._eval(r, vals, payload, loc))
                if lv is _BOT or rv is _BOT:
                    return _BOT
                return {"=": lv == rv, "!=": lv != rv, "<": lv < rv,
                        "<=": lv <= rv, ">": lv > rv, ">=": lv >= rv}[op]
            case ast.BoolOp(op, l, r):
                lv = self._eval(l, vals, payload, loc)
                rv = self._eval(r, vals, payload, loc)
                if op == "&&":
                    if lv is False or rv is False:
                        return False
                    if lv is _BOT or rv is _BOT:
                        return _BOT
                    return True
                if lv is True or rv is True:
                    return True
                if lv is _BOT or rv is _BOT:
                    return _BOT
                return False
            case ast.Not(x):
                v = self._eval(x, vals, payload, loc)
                return _BOT if v is _BOT else not v
        raise MercuryError([Diagnostic(
            "MER0003", f"cannot evaluate {type(e).__name__} here", Severity.ERROR)])

    def _guard_true(self, guard: ast.Expr | None, vals: tuple,
                    payload: int | None, loc: str) -> bool:
        if guard is None:
            return True
        return self._eval(guard, vals, payload, loc) is True

    def _apply_updates(self, updates: list[ast.Assign], vals: tuple,
                       payload: int | None, loc: str) -> tuple:
        out = list(vals)
        for upd in updates:
            v = self._eval(upd.value, tuple(out), payload, loc)
            if v is _BOT:
                raise MercuryError([Diagnostic(
                    "MER0601",
                    f"update of {upd.var!r} in location {loc!r} reads an "
                    f"agreement register that is still unset", Severity.ERROR,
                    upd.span)])
            lo, hi = self._int_ranges[upd.var]
            out[self._slot_idx[upd.var]] = min(hi, max(lo, v))
        return tuple(out)

    # -- transition enumeration -------------------------------------------------

    def _payload_values(self, act: ast.ActionDecl) -> list[int | None]:
        if act.payload is None:
            return [None]
        return list(range(act.payload[0], act.payload[1] + 1))

    def _expand(self, idx: int) -> list[Transition]:
        loc, vals = self.states[idx]
        if loc == CRASH_LOC:
            return []
        trs: list[Transition] = [Transition(idx, Label("crash"), self.crash_idx)]
        for h in self.core.handlers_at(loc):
            match h:
                case CInternal(_, guard, updates, target):
                    if self._guard_true(guard, vals, None, loc):
                        nv = self._apply_updates(updates, vals, None, loc)
                        trs.append(Transition(idx, Label("internal"),
                                              self._intern(target, nv)))
                case CSend(_, guard, act, payload_var, rz_target, updates, target):
                    if not self._guard_true(guard, vals, None, loc):
                        continue
                    decl = self.core.action(act)
                    pv = (vals[self._slot_idx[payload_var]]
                          if payload_var is not None else None)
                    nv = self._apply_updates(updates, vals, None, loc)
                    if decl.kind == "br":
                        label = Label("send_br", act, pv, env=decl.env)
                    else:
                        tgt = (rz_target.act
                               if isinstance(rz_target, ast.SenderId) else None)
                        label = Label("send_rz", act, pv, env=decl.env,
                                      target_act=tgt)
                    trs.append(Transition(idx, label, self._intern(target, nv)))
                case CRecv(_, act, guard, updates, target):
                    decl = self.core.action(act)
                    kind = "recv_br" if decl.kind == "br" else "recv_rz"
                    for pv in self._payload_values(decl):
                        if not self._guard_true(guard, vals, pv, loc):
                            continue
                        nv = self._apply_updates(updates, vals, pv, loc)
                        trs.append(Transition(
                            idx, Label(kind, act, pv, env=decl.env),
                            self._intern(target, nv)))
                case CPartition(_, pid, _, k, win_t, lose_t):
                    for won, tgt in ((True, win_t), (False, lose_t)):
                        nv = list(vals)
                        nv[self._slot_idx[f"{pid}.winS"]] = f"winS({pid})"
                        nv[self._slot_idx[f"{pid}.loseS"]] = f"loseS({pid})"
                        ridx = self._slot_idx.get(f"{pid}.role")
                        if ridx is not None:
                            nv[ridx] = "win" if won else "lose"
                        kind = "part_win" if won else "part_lose"
                        trs.append(Transition(idx, Label(kind, pid),
                                              self._intern(tgt, tuple(nv))))
                case CConsensus(_, cid, _, k, propose, target):
                    info = self.core.consensuses[cid]
                    own = (vals[self._slot_idx[propose]]
                           if propose is not None else None)
                    for decided in _subsets(info.domain, k):
                        nv = list(vals)
                        nv[self._slot_idx[cid]] = decided
                        trs.append(Transition(
                            idx,
                            Label("cons", cid, decided=decided,
                                  acting=own is not None and own in decided),
                            self._intern(target, tuple(nv))))
        self._check_recv_determinism(idx, trs)
        return trs

    def _check_recv_determinism(self, idx: int, trs: list[Transition]) -> None:
        seen: dict[tuple[str, int | None], int] = {}
        for tr in trs:
            if tr.label.kind in ("recv_br", "recv_rz"):
                key = (tr.label.act, tr.label.payload)
                seen[key] = seen.get(key, 0) + 1
                if seen[key] > 1:
                    raise MercuryError([Diagnostic(
                        "MER0203",
                        f"state {self.render_state(idx)} has more than one "
                        f"enabled receive for action {tr.label.act!r}"
                        + (f" with payload {tr.label.payload}"
                           if tr.label.payload is not None else ""),
                        Severity.ERROR)])

    # -- queries ------------------------------------------------------------------

    def render_state(self, idx: int, full: bool = False) -> str:
        loc, vals = self.states[idx]
        if loc == CRASH_LOC:
            return f"({CRASH_LOC})"
        shown = []
        for slot, v in zip(self.slots, vals):
            if slot.kind == "int":
                shown.append(f"{slot.name}={v}")
            elif slot.kind == "dec":
                if v is _BOT:
                    shown.append(f"{slot.name}.decVar=⊥")
                else:
                    shown.append(f"{slot.name}.decVar=({','.join(map(str, v))})")
            elif full:
                shown.append(f"{slot.name}={'⊥' if v is _BOT else v}")
        return f"({loc},{{{','.join(shown)}}})"

    def loc_of(self, idx: int) -> str:
        return self.states[idx][0]

    def value_of(self, idx: int, name: str) -> object:
        return self.states[idx][1][self._slot_idx[name]]

    def states_at(self, locs: set[str]) -> list[int]:
        return [i for i, (loc, _) in enumerate(self.states) if loc in locs]

    def member_states(self, participants: ast.Expr) -> set[int]:
        """Local states whose occupants belong to the participant set."""
        match participants:
            case ast.AllSet():
                return {i for i in range(len(self.states)) if i != self.crash_idx}
            case ast.WinSet(p):
                role = self._slot_idx.get(f"{p}.role")
                return {i for i, (loc, vals) in enumerate(self.states)
                        if loc != CRASH_LOC and role is not None
                        and vals[role] == "win"}
            case ast.LoseSet(p):
                role = self._slot_idx.get(f"{p}.role")
                return {i for i, (loc, vals) in enumerate(self.states)
                        if loc != CRASH_LOC and role is not None
                        and vals[role] == "lose"}
        raise MercuryError([Diagnostic(
            "MER0104", "unsupported participant set", Severity.FRAGMENT)])

    @property
    def event_keys(self) -> list[tuple[str, str]]:
        """Globally-synchronizing events occurring in the reachable system."""
        return sorted({t.label.event_key for t in self.transitions} - {None})

    def to_json(self) -> dict:
        return {
            "process": self.core.name,
            "states": [self.render_state(i, full=True)
                       for i in range(len(self.states))],
            "initial": self.init_idx,
            "crash": self.crash_idx,
            "transitions": [
                {"src": t.src, "label": t.label.render(), "dst": t.dst,
                 "kind": t.label.kind, "role": t.label.role,
                 "independent": t.label.independent}
                for t in self.transitions
            ],
        }


def _subsets(domain: tuple[int, ...], k: int) -> list[tuple[int, ...]]:
    """All sorted tuples over `domain` with 1 <= size <= k."""
    from itertools import combinations
    out: list[tuple[int, ...]] = []
    for size in range(1, min(k, len(domain)) + 1):
        out.extend(combinations(domain, size))
    return out


def build_local_ts(core: CoreProcess,
                   max_states: int = DEFAULT_MAX_STATES) -> LocalTS:
    return LocalTS(core, max_states)
