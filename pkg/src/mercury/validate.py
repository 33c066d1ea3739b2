"""Static checks on the parsed program.

`validate_symmetry` enforces the restrictions that keep the model fully
symmetric in process identities; `validate_wellformed` covers name/type
hygiene and the finite-state fragment restrictions.  Both return diagnostic
lists; callers decide whether to abort (see `frontend_check`).
"""

from __future__ import annotations

from dataclasses import dataclass

from . import syntax as ast
from .diagnostics import Diagnostic, MercuryError, Severity

_ID_EXPRS = (ast.SelfId, ast.SenderId)


def _walk_stmts(s: ast.Stmt):
    yield s
    match s:
        case ast.Seq(stmts):
            for sub in stmts:
                yield from _walk_stmts(sub)
        case ast.If(_, then, els):
            yield from _walk_stmts(then)
            if els is not None:
                yield from _walk_stmts(els)
        case _:
            pass


def _walk_exprs(e: ast.Expr):
    yield e
    match e:
        case ast.Arith(_, lhs, rhs) | ast.Cmp(_, lhs, rhs) | ast.BoolOp(_, lhs, rhs):
            yield from _walk_exprs(lhs)
            yield from _walk_exprs(rhs)
        case ast.Not(operand):
            yield from _walk_exprs(operand)
        case _:
            pass


def _handler_exprs(h: ast.Handler):
    if h.guard is not None:
        yield from _walk_exprs(h.guard)
    for body in (h.reaction, h.win, h.lose):
        if body is None:
            continue
        for s in _walk_stmts(body):
            match s:
                case ast.Assign(_, value):
                    yield from _walk_exprs(value)
                case ast.SetAdd(_, elem) | ast.SetRemove(_, elem):
                    yield from _walk_exprs(elem)
                case ast.SendRz(_, _, target):
                    yield from _walk_exprs(target)
                case ast.If(cond, _, _):
                    yield from _walk_exprs(cond)
                case _:
                    pass


def validate_symmetry(prog: ast.Program) -> list[Diagnostic]:
    """Identity values may only be compared for (dis)equality and rendezvous
    targets must be sender references."""
    diags: list[Diagnostic] = []
    for loc in prog.locations:
        for h in loc.handlers:
            for e in _handler_exprs(h):
                match e:
                    case ast.Cmp(op, lhs, rhs):
                        id_l = isinstance(lhs, _ID_EXPRS)
                        id_r = isinstance(rhs, _ID_EXPRS)
                        if (id_l or id_r) and op not in ("=", "!="):
                            diags.append(Diagnostic(
                                "MER0101",
                                f"identities can only be compared with = or != "
                                f"(location {loc.name})",
                                Severity.FRAGMENT, h.span))
                        if id_l != id_r:
                            diags.append(Diagnostic(
                                "MER0101",
                                f"comparison mixes an identity with a non-identity "
                                f"value (location {loc.name})",
                                Severity.FRAGMENT, h.span))
                    case ast.Arith(_, lhs, rhs):
                        if isinstance(lhs, _ID_EXPRS) or isinstance(rhs, _ID_EXPRS):
                            diags.append(Diagnostic(
                                "MER0101",
                                f"arithmetic on identity values (location {loc.name})",
                                Severity.FRAGMENT, h.span))
                    case _:
                        pass
            for body in (h.reaction, h.win, h.lose):
                if body is None:
                    continue
                for s in _walk_stmts(body):
                    if isinstance(s, ast.SendRz) and not isinstance(s.target, ast.SenderId):
                        diags.append(Diagnostic(
                            "MER0102",
                            f"rendezvous target must be a sender reference "
                            f"(act.sID), not {type(s.target).__name__} "
                            f"(location {loc.name})",
                            Severity.FRAGMENT, s.span))
    return diags


@dataclass
class _Ctx:
    prog: ast.Program
    diags: list[Diagnostic]

    def err(self, code: str, msg: str, span=None,
            severity: Severity = Severity.ERROR) -> None:
        self.diags.append(Diagnostic(code, msg, severity, span))


def _agreement_ids(prog: ast.Program):
    """Collect (partition ids, consensus ids) with their declaring events."""
    parts: dict[str, list[ast.PartitionEvent]] = {}
    conss: dict[str, list[ast.ConsensusEvent]] = {}
    for loc in prog.locations:
        for h in loc.handlers:
            if isinstance(h.event, ast.PartitionEvent):
                parts.setdefault(h.event.pid, []).append(h.event)
            elif isinstance(h.event, ast.ConsensusEvent):
                conss.setdefault(h.event.cid, []).append(h.event)
    return parts, conss


def validate_wellformed(prog: ast.Program) -> list[Diagnostic]:
    ctx = _Ctx(prog, [])
    int_vars = {v.name: v for v in prog.int_vars}
    set_vars = {v.name for v in prog.set_vars}
    actions = {a.name: a for a in prog.actions}
    locations = {l.name for l in prog.locations}

    for name, group in (("variable", list(int_vars) + sorted(set_vars)),
                        ("action", list(actions)), ("location", list(locations))):
        seen: set[str] = set()
        pool = ([v.name for v in prog.int_vars] + [v.name for v in prog.set_vars]
                if name == "variable" else
                [a.name for a in prog.actions] if name == "action" else
                [l.name for l in prog.locations])
        for n in pool:
            if n in seen:
                ctx.err("MER0002", f"duplicate {name} {n!r}")
            seen.add(n)

    for v in prog.int_vars:
        if v.lo > v.hi:
            ctx.err("MER0003", f"empty range int[{v.lo},{v.hi}] for {v.name!r}", v.span)
        elif not (v.lo <= v.init <= v.hi):
            ctx.err("MER0003", f"initial value {v.init} of {v.name!r} outside "
                               f"int[{v.lo},{v.hi}]", v.span)
    for a in prog.actions:
        if a.payload and a.payload[0] > a.payload[1]:
            ctx.err("MER0003", f"empty payload range on action {a.name!r}", a.span)

    parts, conss = _agreement_ids(prog)
    for pid in set(parts) & set(conss):
        ctx.err("MER0002", f"id {pid!r} used for both Partition and Consensus")
    for pid in set(parts) | set(conss):
        if pid in actions:
            ctx.err("MER0002", f"agreement id {pid!r} collides with an action name")

    def check_participants(exp: ast.Expr, what: str, span) -> None:
        match exp:
            case ast.AllSet():
                pass
            case ast.WinSet(p) | ast.LoseSet(p):
                if p not in parts:
                    ctx.err("MER0002", f"{what}: unknown Partition id {p!r}", span)
            case _:
                ctx.err("MER0104",
                        f"{what}: participant sets must be All or a Partition "
                        f"result (p.winS / p.loseS)", span, Severity.FRAGMENT)

    for pid, evs in parts.items():
        ks = {e.k for e in evs}
        if len(ks) > 1:
            ctx.err("MER0002", f"Partition id {pid!r} used with different k values")
        pps = {type(e.participants).__name__ +
               getattr(e.participants, "part", "") for e in evs}
        if len(pps) > 1:
            ctx.err("MER0002", f"Partition id {pid!r} used with different "
                               f"participant sets")
        if any(e.k < 1 for e in evs):
            ctx.err("MER0003", f"Partition id {pid!r} needs k >= 1")
    for cid, evs in conss.items():
        if len({e.k for e in evs}) > 1:
            ctx.err("MER0002", f"Consensus id {cid!r} used with different k values")
        pps = {type(e.participants).__name__ +
               getattr(e.participants, "part", "") for e in evs}
        if len(pps) > 1:
            ctx.err("MER0002", f"Consensus id {cid!r} used with different "
                               f"participant sets")
        if any(e.k < 1 for e in evs):
            ctx.err("MER0003", f"Consensus id {cid!r} needs k >= 1")
        if not any(e.propose_var for e in evs):
            ctx.err("MER0003", f"Consensus id {cid!r} has no proposing handler")
        for e in evs:
            if e.propose_var is not None and e.propose_var not in int_vars:
                ctx.err("MER0002", f"Consensus id {cid!r} proposes unknown "
                                   f"variable {e.propose_var!r}")

    def check_expr(e: ast.Expr, span, in_recv: str | None) -> None:
        for sub in _walk_exprs(e):
            match sub:
                case ast.VarRef(name):
                    if name not in int_vars:
                        ctx.err("MER0002", f"unknown variable {name!r}", span)
                case ast.PayloadRef(act):
                    if act not in actions:
                        ctx.err("MER0002", f"unknown action {act!r}", span)
                    elif actions[act].payload is None:
                        ctx.err("MER0003", f"action {act!r} carries no payload", span)
                    elif in_recv != act:
                        ctx.err("MER0003", f"{act}.payld is only available inside "
                                           f"a recv({act}) handler", span)
                case ast.SenderId(act):
                    if act not in actions:
                        ctx.err("MER0002", f"unknown action {act!r}", span)
                case ast.DecVarRef(cons, idx):
                    if cons not in conss:
                        ctx.err("MER0002", f"unknown Consensus id {cons!r}", span)
                    else:
                        k = conss[cons][0].k
                        if not (1 <= idx <= k):
                            ctx.err("MER0003", f"{cons}.decVar[{idx}] out of range "
                                               f"(k = {k})", span)
                case ast.Cmp(_, lhs, rhs):
                    for side in (lhs, rhs):
                        if isinstance(side, (ast.AllSet, ast.EmptySet, ast.SetVar,
                                             ast.WinSet, ast.LoseSet)):
                            ctx.err("MER0003", "idSet values cannot be compared", span)
                case _:
                    pass

    def check_stmt(s: ast.Stmt, span, in_recv: str | None) -> None:
        for sub in _walk_stmts(s):
            sp = sub.span or span
            match sub:
                case ast.Assign(var, value):
                    if var not in int_vars:
                        ctx.err("MER0002", f"assignment to unknown variable {var!r}", sp)
                    check_expr(value, sp, in_recv)
                case ast.SetAdd(var, _) | ast.SetRemove(var, _):
                    if var not in set_vars:
                        ctx.err("MER0002", f"unknown idSet {var!r}", sp)
                    ctx.err("MER0103", "idSet.add / idSet.remove are outside the "
                                       "verifiable fragment", sp, Severity.FRAGMENT)
                case ast.SendBr(act, payload):
                    _check_send(act, payload, "br", sp)
                case ast.SendRz(act, payload, target):
                    _check_send(act, payload, "rz", sp)
                    check_expr(target, sp, in_recv)
                case ast.Reply(act, payload):
                    _check_send(act, payload, "rz", sp)
                    if in_recv is None:
                        ctx.err("MER0003", "reply(...) is only valid inside a "
                                           "recv handler", sp)
                case ast.Goto(target):
                    if target not in locations:
                        ctx.err("MER0002", f"goto to unknown location {target!r}", sp)
                case ast.If(cond, _, _):
                    check_expr(cond, sp, in_recv)
                case _:
                    pass

    def _check_send(act: str, payload: str | None, kind: str, span) -> None:
        if act not in actions:
            ctx.err("MER0002", f"unknown action {act!r}", span)
            return
        decl = actions[act]
        if decl.kind != kind:
            ctx.err("MER0003", f"action {act!r} is declared {decl.kind!r}", span)
        if payload is None and decl.payload is not None:
            ctx.err("MER0003", f"action {act!r} needs a payload", span)
        if payload is not None:
            if decl.payload is None:
                ctx.err("MER0003", f"action {act!r} carries no payload", span)
            elif payload not in int_vars:
                ctx.err("MER0002", f"unknown payload variable {payload!r}", span)
            else:
                v = int_vars[payload]
                lo, hi = decl.payload
                if v.lo < lo or v.hi > hi:
                    ctx.err("MER0003",
                            f"payload variable {payload!r} (int[{v.lo},{v.hi}]) "
                            f"exceeds the payload range of {act!r} "
                            f"(int[{lo},{hi}])", span)

    for loc in prog.locations:
        for p in loc.passives:
            for ev in p.events:
                if ev not in actions and ev not in parts and ev not in conss:
                    ctx.err("MER0002", f"passive references unknown event {ev!r}",
                            p.span)
        for h in loc.handlers:
            in_recv: str | None = None
            match h.event:
                case ast.RecvEvent(act):
                    if act not in actions:
                        ctx.err("MER0002", f"recv of unknown action {act!r}", h.span)
                    in_recv = act
                case ast.PartitionEvent(pid, participants, _):
                    check_participants(participants, f"Partition<{pid}>", h.span)
                    if h.guard is not None:
                        ctx.err("MER0105", "guards are not allowed on Partition "
                                           "events", h.span, Severity.FRAGMENT)
                    if h.win is None or h.lose is None:
                        ctx.err("MER0003", "Partition handlers need win:/lose: "
                                           "branches", h.span)
                case ast.ConsensusEvent(cid, participants, _, _):
                    check_participants(participants, f"Consensus<{cid}>", h.span)
                    if h.guard is not None:
                        ctx.err("MER0105", "guards are not allowed on Consensus "
                                           "events", h.span, Severity.FRAGMENT)
                case _:
                    pass
            if h.win is not None and not isinstance(h.event, ast.PartitionEvent):
                ctx.err("MER0003", "win:/lose: branches are only valid on "
                                   "Partition events", h.span)
            if h.guard is not None:
                check_expr(h.guard, h.span, in_recv)
            for body in (h.reaction, h.win, h.lose):
                if body is not None:
                    check_stmt(body, h.span, in_recv)

    return ctx.diags


def frontend_check(prog: ast.Program) -> None:
    """Run both validators; raise MercuryError if anything is wrong."""
    diags = validate_wellformed(prog) + validate_symmetry(prog)
    if diags:
        raise MercuryError(diags)
