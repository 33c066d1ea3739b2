"""Abstract syntax for Mercury processes.

The surface grammar, roughly:

    process Name
    variables
        int[lo,hi] x := init
        idSet s
    actions
        br act : unit | int[lo,hi]
        rz act : unit | int[lo,hi]
        env
            ... (actions exchanged with the environment)
    initial location L
        on <event> [where (bexp)] do <stmts>
        on Partition<p>(participants, k) win: <stmt> lose: <stmt>
        on Consensus<c>(participants, k, proposeVar | _) do <stmts>
        passive e1, ..., en
    location M
        ...

Events are: `_` (spontaneous), `recv(act)`, `Partition<id>(...)` and
`Consensus<id>(...)`.  `passive` and `reply` are sugar handled in
`mercury.lowering`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import Span

# ---------------------------------------------------------------------------
# expressions


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class IntConst(Expr):
    value: int


@dataclass(frozen=True)
class VarRef(Expr):
    name: str


@dataclass(frozen=True)
class PayloadRef(Expr):
    """act.payld — the payload of the action being received."""

    act: str


@dataclass(frozen=True)
class DecVarRef(Expr):
    """c.decVar[i] — i-th smallest decided value of consensus id c (1-based)."""

    cons: str
    index: int


@dataclass(frozen=True)
class Arith(Expr):
    op: str  # + - *
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class BoolConst(Expr):
    value: bool


@dataclass(frozen=True)
class Cmp(Expr):
    op: str  # = != < <= > >=
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class BoolOp(Expr):
    op: str  # && ||
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Not(Expr):
    operand: Expr


# identity expressions -------------------------------------------------------


@dataclass(frozen=True)
class SelfId(Expr):
    pass


@dataclass(frozen=True)
class SenderId(Expr):
    """act.sID — the sender of the most recently received act."""

    act: str


# identity-set expressions ----------------------------------------------------


@dataclass(frozen=True)
class AllSet(Expr):
    pass


@dataclass(frozen=True)
class EmptySet(Expr):
    pass


@dataclass(frozen=True)
class SetVar(Expr):
    name: str


@dataclass(frozen=True)
class WinSet(Expr):
    part: str


@dataclass(frozen=True)
class LoseSet(Expr):
    part: str


# ---------------------------------------------------------------------------
# statements


@dataclass
class Stmt:
    span: Span | None = field(default=None, kw_only=True, compare=False)


@dataclass
class Assign(Stmt):
    var: str
    value: Expr


@dataclass
class SetAdd(Stmt):
    var: str
    elem: Expr


@dataclass
class SetRemove(Stmt):
    var: str
    elem: Expr


@dataclass
class SendBr(Stmt):
    act: str
    payload: str | None  # a bounded-int variable, or None for unit


@dataclass
class SendRz(Stmt):
    act: str
    payload: str | None
    target: Expr  # SelfId or SenderId


@dataclass
class Reply(Stmt):
    """reply(act[, v]) — sugar for sendrz back to the handled action's sender."""

    act: str
    payload: str | None


@dataclass
class Goto(Stmt):
    loc: str


@dataclass
class If(Stmt):
    cond: Expr
    then: Stmt
    els: Stmt | None


@dataclass
class Seq(Stmt):
    stmts: list[Stmt]


# ---------------------------------------------------------------------------
# events and handlers


@dataclass(frozen=True)
class Event:
    pass


@dataclass(frozen=True)
class EmptyEvent(Event):
    pass


@dataclass(frozen=True)
class RecvEvent(Event):
    act: str


@dataclass(frozen=True)
class PartitionEvent(Event):
    pid: str
    participants: Expr
    k: int


@dataclass(frozen=True)
class ConsensusEvent(Event):
    cid: str
    participants: Expr
    k: int
    propose_var: str | None  # None for a non-proposing participant (`_`)


@dataclass
class Handler:
    event: Event
    guard: Expr | None
    # Plain handlers use `reaction`; Partition handlers use win/lose.
    reaction: Stmt | None = None
    win: Stmt | None = None
    lose: Stmt | None = None
    span: Span | None = None


@dataclass
class PassiveDecl:
    """`passive e1, ..., en` — desugared in lowering."""

    events: list[str]
    span: Span | None = None


@dataclass
class Location:
    name: str
    handlers: list[Handler] = field(default_factory=list)
    passives: list[PassiveDecl] = field(default_factory=list)
    span: Span | None = None


# ---------------------------------------------------------------------------
# declarations


@dataclass
class IntVarDecl:
    name: str
    lo: int
    hi: int
    init: int
    span: Span | None = None


@dataclass
class SetVarDecl:
    name: str
    span: Span | None = None


@dataclass
class ActionDecl:
    name: str
    kind: str  # "br" | "rz"
    payload: tuple[int, int] | None  # bounded-int range or None for unit
    env: bool = False
    span: Span | None = None


@dataclass
class Program:
    name: str
    int_vars: list[IntVarDecl]
    set_vars: list[SetVarDecl]
    actions: list[ActionDecl]
    locations: list[Location]
    initial: str

    def location(self, name: str) -> Location:
        for loc in self.locations:
            if loc.name == name:
                return loc
        raise KeyError(name)

    def action(self, name: str) -> ActionDecl:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)

    def int_var(self, name: str) -> IntVarDecl:
        for v in self.int_vars:
            if v.name == name:
                return v
        raise KeyError(name)
