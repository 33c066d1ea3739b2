"""Pretty-printer for Mercury programs.

Printing a parsed program and re-parsing it yields an equivalent AST; this is
exercised by the test suite and used by `mercury translate --emit core`.
"""

from __future__ import annotations

from . import syntax as ast


def print_expr(e: ast.Expr) -> str:
    match e:
        case ast.IntConst(v):
            return str(v)
        case ast.VarRef(name):
            return name
        case ast.PayloadRef(act):
            return f"{act}.payld"
        case ast.DecVarRef(cons, idx):
            return f"{cons}.decVar[{idx}]"
        case ast.Arith(op, lhs, rhs):
            return f"({print_expr(lhs)} {op} {print_expr(rhs)})"
        case ast.BoolConst(v):
            return "true" if v else "false"
        case ast.Cmp(op, lhs, rhs):
            return f"{print_expr(lhs)} {op} {print_expr(rhs)}"
        case ast.BoolOp(op, lhs, rhs):
            return f"({print_expr(lhs)} {op} {print_expr(rhs)})"
        case ast.Not(operand):
            return f"!({print_expr(operand)})"
        case ast.SelfId():
            return "self"
        case ast.SenderId(act):
            return f"{act}.sID"
        case ast.AllSet():
            return "All"
        case ast.EmptySet():
            return "Empty"
        case ast.SetVar(name):
            return name
        case ast.WinSet(p):
            return f"{p}.winS"
        case ast.LoseSet(p):
            return f"{p}.loseS"
    raise TypeError(f"unprintable expression {e!r}")


def print_stmt(s: ast.Stmt, indent: int) -> list[str]:
    pad = "    " * indent
    match s:
        case ast.Assign(var, value):
            return [f"{pad}{var} := {print_expr(value)}"]
        case ast.SetAdd(var, elem):
            return [f"{pad}{var}.add({print_expr(elem)})"]
        case ast.SetRemove(var, elem):
            return [f"{pad}{var}.remove({print_expr(elem)})"]
        case ast.SendBr(act, payload):
            inner = f"{act}[{payload}]" if payload else act
            return [f"{pad}sendbr({inner})"]
        case ast.SendRz(act, payload, target):
            inner = f"{act}[{payload}]" if payload else act
            return [f"{pad}sendrz({inner}, {print_expr(target)})"]
        case ast.Reply(act, payload):
            inner = f"{act}[{payload}]" if payload else act
            return [f"{pad}reply({inner})"]
        case ast.Goto(loc):
            return [f"{pad}goto {loc}"]
        case ast.If(cond, then, els):
            lines = [f"{pad}if ({print_expr(cond)})"]
            lines += print_branch(then, indent + 1)
            if els is not None:
                lines.append(f"{pad}else")
                lines += print_branch(els, indent + 1)
            return lines
        case ast.Seq(stmts):
            out: list[str] = []
            for sub in stmts:
                out += print_stmt(sub, indent)
            return out
    raise TypeError(f"unprintable statement {s!r}")


def print_branch(s: ast.Stmt, indent: int) -> list[str]:
    """A branch of an if must stay a single statement when re-parsed."""
    if isinstance(s, ast.Seq):
        pad = "    " * (indent - 1)
        return [f"{pad}{{"] + print_stmt(s, indent) + [f"{pad}}}"]
    return print_stmt(s, indent)


def print_event(ev: ast.Event) -> str:
    match ev:
        case ast.EmptyEvent():
            return "_"
        case ast.RecvEvent(act):
            return f"recv({act})"
        case ast.PartitionEvent(pid, parts, k):
            return f"Partition<{pid}>({print_expr(parts)}, {k})"
        case ast.ConsensusEvent(cid, parts, k, propose):
            pv = propose if propose else "_"
            return f"Consensus<{cid}>({print_expr(parts)}, {k}, {pv})"
    raise TypeError(f"unprintable event {ev!r}")


def print_program(prog: ast.Program) -> str:
    lines = [f"process {prog.name}"]
    if prog.int_vars or prog.set_vars:
        lines.append("variables")
        for v in prog.int_vars:
            lines.append(f"    int[{v.lo},{v.hi}] {v.name} := {v.init}")
        for sv in prog.set_vars:
            lines.append(f"    idSet {sv.name}")
    if prog.actions:
        lines.append("actions")
        for envflag in (False, True):
            group = [a for a in prog.actions if a.env == envflag]
            if envflag and group:
                lines.append("    env")
            for a in group:
                ty = f"int[{a.payload[0]},{a.payload[1]}]" if a.payload else "unit"
                pad = "        " if envflag else "    "
                lines.append(f"{pad}{a.kind} {a.name} : {ty}")
    for loc in prog.locations:
        lines.append("")
        prefix = "initial " if loc.name == prog.initial else ""
        lines.append(f"{prefix}location {loc.name}")
        for h in loc.handlers:
            guard = f" where ({print_expr(h.guard)})" if h.guard is not None else ""
            if h.win is not None:
                lines.append(f"    on {print_event(h.event)}{guard}")
                lines.append("        win:")
                lines += print_branch(h.win, 3)
                lines.append("        lose:")
                lines += print_branch(h.lose, 3)
            else:
                lines.append(f"    on {print_event(h.event)}{guard} do")
                lines += print_stmt(h.reaction, 2)
        for p in loc.passives:
            lines.append(f"    passive {', '.join(p.events)}")
    return "\n".join(lines) + "\n"
