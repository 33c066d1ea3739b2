"""Recursive-descent parser producing `mercury.syntax.Program`.

If/else branches are single statements; use `{ ... }` to group several
statements in a branch.  Everywhere else, statements are simply juxtaposed
(optionally separated by `;`) and a reaction extends until the next
`on` / `passive` / `location` / `initial` / `win` / `lose` keyword.
"""

from __future__ import annotations

from . import syntax as ast
from .diagnostics import Diagnostic, MercuryError, Severity, Span
from .lexer import Token, tokenize

_STMT_TERMINATORS = {"on", "passive", "location", "initial", "win", "lose"}


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token plumbing ------------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind in ("kw", "sym")

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}, found {self.peek().text!r}")
        return self.advance()

    def expect_ident(self) -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            raise self.error(f"expected identifier, found {tok.text!r}")
        return self.advance()

    def expect_int(self) -> int:
        tok = self.peek()
        sign = 1
        if tok.kind == "sym" and tok.text == "-":
            self.advance()
            sign = -1
            tok = self.peek()
        if tok.kind != "int":
            raise self.error(f"expected integer, found {tok.text!r}")
        self.advance()
        return sign * int(tok.text)

    def error(self, msg: str) -> MercuryError:
        return MercuryError(
            [Diagnostic("MER0001", msg, Severity.ERROR, self.peek().span)]
        )

    def skip_semis(self) -> None:
        while self.at(";"):
            self.advance()

    # -- program structure ---------------------------------------------------

    def parse_program(self) -> ast.Program:
        self.expect("process")
        name = self.expect_ident().text

        int_vars: list[ast.IntVarDecl] = []
        set_vars: list[ast.SetVarDecl] = []
        if self.at("variables"):
            self.advance()
            while self.at("int") or self.at("idSet"):
                if self.at("int"):
                    int_vars.append(self.parse_int_var())
                else:
                    span = self.advance().span
                    set_vars.append(ast.SetVarDecl(self.expect_ident().text, span))

        actions: list[ast.ActionDecl] = []
        if self.at("actions"):
            self.advance()
            env_mode = False
            while True:
                if self.at("env"):
                    self.advance()
                    env_mode = True
                    continue
                if self.at("br") or self.at("rz"):
                    actions.append(self.parse_action(env_mode))
                    continue
                break

        locations: list[ast.Location] = []
        initial: str | None = None
        while self.at("initial") or self.at("location"):
            is_initial = False
            if self.at("initial"):
                self.advance()
                is_initial = True
            loc = self.parse_location()
            locations.append(loc)
            if is_initial:
                if initial is not None:
                    raise self.error("more than one initial location")
                initial = loc.name

        if self.peek().kind != "eof":
            raise self.error(f"unexpected {self.peek().text!r}")
        if not locations:
            raise self.error("a process needs at least one location")
        if initial is None:
            raise self.error("no initial location")
        return ast.Program(name, int_vars, set_vars, actions, locations, initial)

    def parse_int_var(self) -> ast.IntVarDecl:
        span = self.expect("int").span
        self.expect("[")
        lo = self.expect_int()
        self.expect(",")
        hi = self.expect_int()
        self.expect("]")
        name = self.expect_ident().text
        self.expect(":=")
        init = self.expect_int()
        return ast.IntVarDecl(name, lo, hi, init, span)

    def parse_action(self, env: bool) -> ast.ActionDecl:
        kind_tok = self.advance()
        name = self.expect_ident().text
        self.expect(":")
        payload: tuple[int, int] | None
        if self.at("unit"):
            self.advance()
            payload = None
        else:
            self.expect("int")
            self.expect("[")
            lo = self.expect_int()
            self.expect(",")
            hi = self.expect_int()
            self.expect("]")
            payload = (lo, hi)
        return ast.ActionDecl(name, kind_tok.text, payload, env, kind_tok.span)

    def parse_location(self) -> ast.Location:
        span = self.expect("location").span
        name = self.expect_ident().text
        loc = ast.Location(name, span=span)
        while True:
            if self.at("on"):
                loc.handlers.append(self.parse_handler())
            elif self.at("passive"):
                pspan = self.advance().span
                events = [self.expect_ident().text]
                while self.at(","):
                    self.advance()
                    events.append(self.expect_ident().text)
                loc.passives.append(ast.PassiveDecl(events, pspan))
            else:
                break
        return loc

    # -- handlers --------------------------------------------------------------

    def parse_handler(self) -> ast.Handler:
        span = self.expect("on").span
        event = self.parse_event()
        guard = None
        if self.at("where"):
            self.advance()
            self.expect("(")
            guard = self.parse_bexp()
            self.expect(")")
        if self.at("win"):
            self.advance()
            self.expect(":")
            win = self.parse_stmt()
            self.expect("lose")
            self.expect(":")
            lose = self.parse_stmt()
            return ast.Handler(event, guard, win=win, lose=lose, span=span)
        self.expect("do")
        reaction = self.parse_stmts()
        return ast.Handler(event, guard, reaction=reaction, span=span)

    def parse_event(self) -> ast.Event:
        if self.at("_"):
            self.advance()
            return ast.EmptyEvent()
        if self.at("recv"):
            self.advance()
            self.expect("(")
            act = self.expect_ident().text
            self.expect(")")
            return ast.RecvEvent(act)
        if self.at("Partition"):
            self.advance()
            self.expect("<")
            pid = self.expect_ident().text
            self.expect(">")
            self.expect("(")
            parts = self.parse_idset_exp()
            self.expect(",")
            k = self.expect_int()
            self.expect(")")
            return ast.PartitionEvent(pid, parts, k)
        if self.at("Consensus"):
            self.advance()
            self.expect("<")
            cid = self.expect_ident().text
            self.expect(">")
            self.expect("(")
            parts = self.parse_idset_exp()
            self.expect(",")
            k = self.expect_int()
            self.expect(",")
            if self.at("_"):
                self.advance()
                propose = None
            else:
                propose = self.expect_ident().text
            self.expect(")")
            return ast.ConsensusEvent(cid, parts, k, propose)
        raise self.error(f"expected an event, found {self.peek().text!r}")

    # -- statements --------------------------------------------------------------

    def at_stmt_end(self) -> bool:
        tok = self.peek()
        if tok.kind == "eof":
            return True
        if tok.kind == "kw" and tok.text in _STMT_TERMINATORS:
            return True
        return tok.kind == "sym" and tok.text in ("}", ) or (tok.kind == "kw" and tok.text == "else")

    def parse_stmts(self) -> ast.Stmt:
        stmts = []
        self.skip_semis()
        while not self.at_stmt_end():
            stmts.append(self.parse_stmt())
            self.skip_semis()
        if len(stmts) == 1:
            return stmts[0]
        return ast.Seq(stmts)

    def parse_stmt(self) -> ast.Stmt:
        tok = self.peek()
        span = tok.span
        if self.at("{"):
            self.advance()
            body = self.parse_stmts()
            self.expect("}")
            return body
        if self.at("goto"):
            self.advance()
            return ast.Goto(self.expect_ident().text, span=span)
        if self.at("if"):
            return self.parse_if()
        if self.at("sendbr"):
            self.advance()
            self.expect("(")
            act, payload = self.parse_act_payload()
            self.expect(")")
            return ast.SendBr(act, payload, span=span)
        if self.at("sendrz"):
            self.advance()
            self.expect("(")
            act, payload = self.parse_act_payload()
            if payload is None and self.at(","):
                # sendrz(act, v, target) three-argument form
                save = self.pos
                self.advance()
                if self.peek().kind == "ident" and self.peek(1).text == ",":
                    payload = self.expect_ident().text
                else:
                    self.pos = save
            self.expect(",")
            target = self.parse_id_exp()
            self.expect(")")
            return ast.SendRz(act, payload, target, span=span)
        if self.at("reply"):
            self.advance()
            self.expect("(")
            act, payload = self.parse_act_payload()
            if payload is None and self.at(","):
                self.advance()
                payload = self.expect_ident().text
            self.expect(")")
            return ast.Reply(act, payload, span=span)
        if tok.kind == "ident":
            name = self.advance().text
            if self.at(":="):
                self.advance()
                return ast.Assign(name, self.parse_int_exp(), span=span)
            if self.at("."):
                self.advance()
                method = self.expect_ident().text
                if method not in ("add", "remove"):
                    raise self.error(f"unknown idSet operation {method!r}")
                self.expect("(")
                elem = self.parse_id_exp()
                self.expect(")")
                cls = ast.SetAdd if method == "add" else ast.SetRemove
                return cls(name, elem, span=span)
            raise self.error(f"expected ':=' after {name!r}")
        raise self.error(f"expected a statement, found {tok.text!r}")

    def parse_if(self) -> ast.Stmt:
        span = self.expect("if").span
        self.expect("(")
        cond = self.parse_bexp()
        self.expect(")")
        then = self.parse_stmt()
        els = None
        if self.at("else"):
            self.advance()
            els = self.parse_stmt()
        return ast.If(cond, then, els, span=span)

    def parse_act_payload(self) -> tuple[str, str | None]:
        """Parse `act` or `act[payloadVar]`."""
        act = self.expect_ident().text
        payload = None
        if self.at("["):
            self.advance()
            payload = self.expect_ident().text
            self.expect("]")
        return act, payload

    # -- expressions --------------------------------------------------------------

    def parse_bexp(self) -> ast.Expr:
        lhs = self.parse_band()
        while self.at("||"):
            self.advance()
            lhs = ast.BoolOp("||", lhs, self.parse_band())
        return lhs

    def parse_band(self) -> ast.Expr:
        lhs = self.parse_batom()
        while self.at("&&"):
            self.advance()
            lhs = ast.BoolOp("&&", lhs, self.parse_batom())
        return lhs

    def parse_batom(self) -> ast.Expr:
        if self.at("!"):
            self.advance()
            return ast.Not(self.parse_batom())
        if self.at("true"):
            self.advance()
            return ast.BoolConst(True)
        if self.at("false"):
            self.advance()
            return ast.BoolConst(False)
        if self.at("("):
            # Either a parenthesized bexp or a parenthesized arithmetic lhs of
            # a comparison; backtrack on failure.
            save = self.pos
            self.advance()
            try:
                inner = self.parse_bexp()
                self.expect(")")
                return inner
            except MercuryError:
                self.pos = save
        lhs = self.parse_int_exp()
        op_tok = self.peek()
        if op_tok.text in ("=", "==", "!=", "<", "<=", ">", ">="):
            self.advance()
            rhs = self.parse_int_exp()
            op = "=" if op_tok.text in ("=", "==") else op_tok.text
            return ast.Cmp(op, lhs, rhs)
        raise self.error("expected a comparison operator")

    def parse_int_exp(self) -> ast.Expr:
        lhs = self.parse_term()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            lhs = ast.Arith(op, lhs, self.parse_term())
        return lhs

    def parse_term(self) -> ast.Expr:
        lhs = self.parse_atom()
        while self.at("*"):
            self.advance()
            lhs = ast.Arith("*", lhs, self.parse_atom())
        return lhs

    def parse_atom(self) -> ast.Expr:
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            return ast.IntConst(int(tok.text))
        if self.at("-") and self.peek(1).kind == "int":
            self.advance()
            return ast.IntConst(-int(self.advance().text))
        if self.at("self"):
            self.advance()
            return ast.SelfId()
        if self.at("("):
            self.advance()
            inner = self.parse_int_exp()
            self.expect(")")
            return inner
        if tok.kind == "ident":
            name = self.advance().text
            if self.at("."):
                return self.parse_dotted(name)
            return ast.VarRef(name)
        raise self.error(f"expected an expression, found {tok.text!r}")

    def parse_dotted(self, name: str) -> ast.Expr:
        self.expect(".")
        field = self.expect_ident().text
        if field == "payld":
            return ast.PayloadRef(name)
        if field == "sID":
            return ast.SenderId(name)
        if field == "decVar":
            self.expect("[")
            idx = self.expect_int()
            self.expect("]")
            return ast.DecVarRef(name, idx)
        if field == "winS":
            return ast.WinSet(name)
        if field == "loseS":
            return ast.LoseSet(name)
        raise self.error(f"unknown field {field!r}")

    def parse_id_exp(self) -> ast.Expr:
        if self.at("self"):
            self.advance()
            return ast.SelfId()
        tok = self.peek()
        if tok.kind == "ident" and self.peek(1).text == "." and self.peek(2).text == "sID":
            name = self.advance().text
            return self.parse_dotted(name)
        raise self.error("expected an identity expression (self or act.sID)")

    def parse_idset_exp(self) -> ast.Expr:
        if self.at("All"):
            self.advance()
            return ast.AllSet()
        if self.at("Empty"):
            self.advance()
            return ast.EmptySet()
        tok = self.peek()
        if tok.kind == "ident":
            name = self.advance().text
            if self.at("."):
                exp = self.parse_dotted(name)
                if not isinstance(exp, (ast.WinSet, ast.LoseSet)):
                    raise self.error("expected a participant-set expression")
                return exp
            return ast.SetVar(name)
        raise self.error("expected a participant-set expression")


def parse_program(source: str) -> ast.Program:
    """Parse Mercury source text into a Program AST."""
    return Parser(tokenize(source)).parse_program()
