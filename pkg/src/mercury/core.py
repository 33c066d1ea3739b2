"""Core (normalized) form of a Mercury process.

Core handlers come in exactly five shapes:

  * internal:   guard / updates / goto
  * send:       guard / one send / updates / goto   (send logically first)
  * receive:    action / guard / updates / goto
  * partition:  win-goto / lose-goto only
  * consensus:  goto only (decided values land in the id's decVar)

Surface handlers with if/else are split into several guarded core handlers
(path conditions are rewritten to pre-state expressions by substitution).
Partition/Consensus reactions beyond a bare goto move to fresh continuation
locations.  A send whose payload would be changed by updates preceding it is
hoisted when possible; inside continuation locations it is sequenced through
a further fresh location instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import syntax as ast
from .diagnostics import Diagnostic, MercuryError, Severity


# ---------------------------------------------------------------------------
# core handler shapes


@dataclass
class CoreHandler:
    loc: str


@dataclass
class CInternal(CoreHandler):
    guard: ast.Expr | None
    updates: list[ast.Assign]
    target: str


@dataclass
class CSend(CoreHandler):
    guard: ast.Expr | None
    act: str
    payload: str | None          # bounded-int variable, pre-state value
    rz_target: ast.Expr | None   # SenderId for rendezvous, None for broadcast
    updates: list[ast.Assign]
    target: str


@dataclass
class CRecv(CoreHandler):
    act: str
    guard: ast.Expr | None
    updates: list[ast.Assign]
    target: str


@dataclass
class CPartition(CoreHandler):
    pid: str
    participants: ast.Expr
    k: int
    win_target: str
    lose_target: str


@dataclass
class CConsensus(CoreHandler):
    cid: str
    participants: ast.Expr
    k: int
    propose_var: str | None
    target: str


@dataclass
class ConsensusInfo:
    cid: str
    k: int
    participants: ast.Expr
    domain: tuple[int, ...]  # union of the propose variables' ranges


@dataclass
class PartitionInfo:
    pid: str
    k: int
    participants: ast.Expr


@dataclass
class CoreProcess:
    name: str
    int_vars: list[ast.IntVarDecl]
    actions: list[ast.ActionDecl]
    locations: list[str]              # includes fresh continuation locations
    initial: str
    handlers: list[CoreHandler]
    partitions: dict[str, PartitionInfo]
    consensuses: dict[str, ConsensusInfo]

    def handlers_at(self, loc: str) -> list[CoreHandler]:
        return [h for h in self.handlers if h.loc == loc]

    def action(self, name: str) -> ast.ActionDecl:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)


# ---------------------------------------------------------------------------
# desugaring


def desugar(prog: ast.Program) -> ast.Program:
    """Expand `passive` declarations and `reply` statements."""
    parts, conss = {}, {}
    for loc in prog.locations:
        for h in loc.handlers:
            if isinstance(h.event, ast.PartitionEvent):
                parts[h.event.pid] = h.event
            elif isinstance(h.event, ast.ConsensusEvent):
                conss[h.event.cid] = h.event
    actions = {a.name: a for a in prog.actions}

    new_locations = []
    for loc in prog.locations:
        handlers = [
            replace(h, reaction=_expand_reply(h.reaction, h.event),
                    win=_expand_reply(h.win, h.event),
                    lose=_expand_reply(h.lose, h.event))
            for h in loc.handlers
        ]
        for p in loc.passives:
            for ev in p.events:
                back = ast.Goto(loc.name)
                if ev in actions:
                    handlers.append(ast.Handler(
                        ast.RecvEvent(ev), None, reaction=back, span=p.span))
                elif ev in parts:
                    tmpl = parts[ev]
                    handlers.append(ast.Handler(
                        ast.PartitionEvent(ev, tmpl.participants, tmpl.k),
                        None, win=back, lose=ast.Goto(loc.name), span=p.span))
                elif ev in conss:
                    tmpl = conss[ev]
                    handlers.append(ast.Handler(
                        ast.ConsensusEvent(ev, tmpl.participants, tmpl.k, None),
                        None, reaction=back, span=p.span))
                else:
                    raise MercuryError([Diagnostic(
                        "MER0002", f"passive references unknown event {ev!r}",
                        Severity.ERROR, p.span)])
        new_locations.append(ast.Location(loc.name, handlers, [], loc.span))
    return ast.Program(prog.name, prog.int_vars, prog.set_vars, prog.actions,
                       new_locations, prog.initial)


def _expand_reply(s: ast.Stmt | None, event: ast.Event) -> ast.Stmt | None:
    if s is None:
        return None
    match s:
        case ast.Reply(act, payload):
            if not isinstance(event, ast.RecvEvent):
                raise MercuryError([Diagnostic(
                    "MER0003", "reply(...) outside a recv handler",
                    Severity.ERROR, s.span)])
            return ast.SendRz(act, payload, ast.SenderId(event.act), span=s.span)
        case ast.Seq(stmts):
            return ast.Seq([_expand_reply(x, event) for x in stmts], span=s.span)
        case ast.If(cond, then, els):
            return ast.If(cond, _expand_reply(then, event),
                          _expand_reply(els, event), span=s.span)
        case _:
            return s


# ---------------------------------------------------------------------------
# path linearization


@dataclass
class _Path:
    cond: ast.Expr | None          # pre-state path condition
    pre_updates: list[ast.Assign]  # updates before the send (if any)
    send: ast.Stmt | None          # SendBr / SendRz
    post_updates: list[ast.Assign]
    target: str
    send_affected: bool = False    # payload changed by pre_updates


def _subst(e: ast.Expr, env: dict[str, ast.Expr]) -> ast.Expr:
    match e:
        case ast.VarRef(name) if name in env:
            return env[name]
        case ast.Arith(op, lhs, rhs):
            return ast.Arith(op, _subst(lhs, env), _subst(rhs, env))
        case ast.Cmp(op, lhs, rhs):
            return ast.Cmp(op, _subst(lhs, env), _subst(rhs, env))
        case ast.BoolOp(op, lhs, rhs):
            return ast.BoolOp(op, _subst(lhs, env), _subst(rhs, env))
        case ast.Not(x):
            return ast.Not(_subst(x, env))
        case _:
            return e


def _has_payload_ref(e: ast.Expr) -> bool:
    match e:
        case ast.PayloadRef():
            return True
        case ast.Arith(_, lhs, rhs) | ast.Cmp(_, lhs, rhs) | ast.BoolOp(_, lhs, rhs):
            return _has_payload_ref(lhs) or _has_payload_ref(rhs)
        case ast.Not(x):
            return _has_payload_ref(x)
        case _:
            return False


def _conj(a: ast.Expr | None, b: ast.Expr | None) -> ast.Expr | None:
    if a is None:
        return b
    if b is None:
        return a
    return ast.BoolOp("&&", a, b)


def _linearize(stmt: ast.Stmt | None, default_target: str) -> list[_Path]:
    """Flatten a reaction into guarded linear paths (pre-state conditions)."""
    paths: list[_Path] = []

    def go(items: list[ast.Stmt], cond, env: dict[str, ast.Expr],
           pre: list[ast.Assign], send, post: list[ast.Assign],
           affected: bool) -> None:
        if not items:
            paths.append(_Path(cond, pre, send, post, default_target, affected))
            return
        s, rest = items[0], items[1:]
        match s:
            case ast.Seq(stmts):
                go(stmts + rest, cond, env, pre, send, post, affected)
            case ast.Assign(var, value):
                value_pre = _subst(value, env)
                upd = ast.Assign(var, value_pre, span=s.span)
                new_env = dict(env)
                new_env[var] = value_pre
                if send is None:
                    go(rest, cond, new_env, pre + [upd], send, post, affected)
                else:
                    go(rest, cond, new_env, pre, send, post + [upd], affected)
            case ast.SendBr() | ast.SendRz():
                if send is not None:
                    raise MercuryError([Diagnostic(
                        "MER0201", "a reaction may contain at most one send",
                        Severity.ERROR, s.span)])
                payload = s.payload
                aff = payload is not None and payload in env
                go(rest, cond, env, pre, s, post, aff)
            case ast.Goto(loc):
                # anything after a goto on this path is unreachable
                paths.append(_Path(cond, pre, send, post, loc, affected))
            case ast.If(c, then, els):
                c_pre = _subst(c, env)
                go([then] + rest, _conj(cond, c_pre), dict(env),
                   list(pre), send, list(post), affected)
                neg = ast.Not(c_pre)
                if els is not None:
                    go([els] + rest, _conj(cond, neg), dict(env),
                       list(pre), send, list(post), affected)
                else:
                    go(rest, _conj(cond, neg), dict(env),
                       list(pre), send, list(post), affected)
            case ast.SetAdd() | ast.SetRemove():
                raise MercuryError([Diagnostic(
                    "MER0103", "idSet updates are outside the fragment",
                    Severity.FRAGMENT, s.span)])
            case _:
                raise MercuryError([Diagnostic(
                    "MER0003", f"cannot lower statement {type(s).__name__}",
                    Severity.ERROR, s.span)])

    items = [] if stmt is None else [stmt]
    go(items, None, {}, [], None, [], False)
    return paths


# ---------------------------------------------------------------------------
# lowering


class _Lowerer:
    def __init__(self, prog: ast.Program):
        self.prog = prog
        self.handlers: list[CoreHandler] = []
        self.locations: list[str] = [l.name for l in prog.locations]
        self.partitions: dict[str, PartitionInfo] = {}
        self.consensuses: dict[str, ConsensusInfo] = {}
        self._fresh = 0

    def fresh_loc(self, base: str) -> str:
        name = base
        while name in self.locations:
            self._fresh += 1
            name = f"{base}_{self._fresh}"
        self.locations.append(name)
        return name

    def run(self) -> CoreProcess:
        propose_ranges: dict[str, set[int]] = {}
        for loc in self.prog.locations:
            for h in loc.handlers:
                ev = h.event
                if isinstance(ev, ast.ConsensusEvent) and ev.propose_var:
                    v = self.prog.int_var(ev.propose_var)
                    propose_ranges.setdefault(ev.cid, set()).update(
                        range(v.lo, v.hi + 1))

        for loc in self.prog.locations:
            for h in loc.handlers:
                self.lower_handler(loc.name, h, propose_ranges)

        return CoreProcess(
            name=self.prog.name,
            int_vars=list(self.prog.int_vars),
            actions=list(self.prog.actions),
            locations=self.locations,
            initial=self.prog.initial,
            handlers=self.handlers,
            partitions=self.partitions,
            consensuses=self.consensuses,
        )

    # -- pieces ---------------------------------------------------------------

    def lower_handler(self, loc: str, h: ast.Handler,
                      propose_ranges: dict[str, set[int]]) -> None:
        ev = h.event
        match ev:
            case ast.PartitionEvent(pid, participants, k):
                win_t = self.branch_target(loc, h.win, f"{loc}__{pid}_win")
                lose_t = self.branch_target(loc, h.lose, f"{loc}__{pid}_lose")
                self.partitions.setdefault(
                    pid, PartitionInfo(pid, k, participants))
                self.handlers.append(CPartition(loc, pid, participants, k,
                                                win_t, lose_t))
            case ast.ConsensusEvent(cid, participants, k, propose):
                target = self.branch_target(loc, h.reaction, f"{loc}__{cid}")
                dom = tuple(sorted(propose_ranges.get(cid, set())))
                self.consensuses.setdefault(
                    cid, ConsensusInfo(cid, k, participants, dom))
                self.handlers.append(CConsensus(loc, cid, participants, k,
                                                propose, target))
            case ast.EmptyEvent():
                self.emit_paths(loc, h.guard, h.reaction, loc,
                                allow_split=False, recv=None)
            case ast.RecvEvent(act):
                self.emit_paths(loc, h.guard, h.reaction, loc,
                                allow_split=False, recv=act)

    def branch_target(self, loc: str, body: ast.Stmt | None, base: str) -> str:
        """Return the goto target for an agreement branch, creating a
        continuation location when the body is more than a goto."""
        if body is None or (isinstance(body, ast.Seq) and not body.stmts):
            return loc
        if isinstance(body, ast.Goto):
            return body.loc
        cont = self.fresh_loc(base)
        self.emit_paths(cont, None, body, loc, allow_split=True, recv=None)
        return cont

    def emit_paths(self, loc: str, guard: ast.Expr | None,
                   reaction: ast.Stmt | None, default_target: str,
                   allow_split: bool, recv: str | None) -> None:
        for path in _linearize(reaction, default_target):
            g = _conj(guard, path.cond)
            if path.send is None:
                if recv is not None:
                    self.handlers.append(CRecv(loc, recv, g,
                                               path.pre_updates, path.target))
                else:
                    self.handlers.append(CInternal(loc, g, path.pre_updates,
                                                   path.target))
                continue
            if recv is not None:
                # Core receive handlers cannot send: commit the receive (and
                # the updates before the send), then send from a fresh
                # location.  Payload references are gone by then.
                for upd in path.post_updates:
                    if _has_payload_ref(upd.value):
                        raise MercuryError([Diagnostic(
                            "MER0202",
                            f"in location {loc!r}: an update after the send "
                            f"still reads the received payload; move it "
                            f"before the send", Severity.ERROR, upd.span)])
                mid = self.fresh_loc(f"{loc}__send")
                self.handlers.append(CRecv(loc, recv, g, path.pre_updates, mid))
                self.handlers.append(self._send(mid, None, path.send,
                                                path.post_updates, path.target))
            elif path.send_affected:
                if not allow_split:
                    raise MercuryError([Diagnostic(
                        "MER0202",
                        f"in location {loc!r}: the payload of the send is "
                        f"changed by updates preceding it, so the send cannot "
                        f"be hoisted", Severity.ERROR,
                        getattr(path.send, "span", None))])
                # continuation location: apply the updates first, send after
                mid = self.fresh_loc(f"{loc}__send")
                self.handlers.append(CInternal(loc, g, path.pre_updates, mid))
                self.handlers.append(self._send(mid, None, path.send,
                                                path.post_updates, path.target))
            else:
                updates = path.pre_updates + path.post_updates
                self.handlers.append(
                    self._send(loc, g, path.send, updates, path.target))

    @staticmethod
    def _send(loc: str, guard: ast.Expr | None, send: ast.Stmt,
              updates: list[ast.Assign], target: str) -> CSend:
        if isinstance(send, ast.SendBr):
            return CSend(loc, guard, send.act, send.payload, None,
                         updates, target)
        assert isinstance(send, ast.SendRz)
        return CSend(loc, guard, send.act, send.payload, send.target,
                     updates, target)


def lower_to_core(prog: ast.Program) -> CoreProcess:
    """Desugar and normalize a validated program into core shape."""
    return _Lowerer(desugar(prog)).run()


def core_to_program(core: CoreProcess) -> ast.Program:
    """Render the core process back as a (parseable) surface program."""
    locs: dict[str, ast.Location] = {name: ast.Location(name)
                                     for name in core.locations}
    for h in core.handlers:
        loc = locs[h.loc]
        match h:
            case CInternal(_, guard, updates, target):
                body = ast.Seq(list(updates) + [ast.Goto(target)])
                loc.handlers.append(ast.Handler(ast.EmptyEvent(), guard,
                                                reaction=body))
            case CSend(_, guard, act, payload, rz_target, updates, target):
                if rz_target is None:
                    send: ast.Stmt = ast.SendBr(act, payload)
                else:
                    send = ast.SendRz(act, payload, rz_target)
                body = ast.Seq([send] + list(updates) + [ast.Goto(target)])
                loc.handlers.append(ast.Handler(ast.EmptyEvent(), guard,
                                                reaction=body))
            case CRecv(_, act, guard, updates, target):
                body = ast.Seq(list(updates) + [ast.Goto(target)])
                loc.handlers.append(ast.Handler(ast.RecvEvent(act), guard,
                                                reaction=body))
            case CPartition(_, pid, participants, k, win_t, lose_t):
                loc.handlers.append(ast.Handler(
                    ast.PartitionEvent(pid, participants, k), None,
                    win=ast.Goto(win_t), lose=ast.Goto(lose_t)))
            case CConsensus(_, cid, participants, k, propose, target):
                loc.handlers.append(ast.Handler(
                    ast.ConsensusEvent(cid, participants, k, propose), None,
                    reaction=ast.Goto(target)))
    ordered = [locs[name] for name in core.locations]
    return ast.Program(core.name, core.int_vars, [], core.actions,
                       ordered, core.initial)
