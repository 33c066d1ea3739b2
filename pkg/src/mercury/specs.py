"""Safety specifications.

A spec file contains one specification per line (blank lines and `#`
comments ignored); the file as a whole is their conjunction.  Grammar:

    spec  := clause { '|' clause } | clause { '&' clause }   (with parens)
    leaf  := atmost(K, target)            -- forbid K+1 processes in target
           | forbid(target ; ... ; target) -- forbid distinct processes
                                             occupying all targets at once
    target := locset [':' bexp]  or  '{' locset ':' bexp '}'
    locset := Loc { '|' Loc }

`atmost(K, f)` forbids reaching a global state with K+1 or more processes
in st(f).  `forbid(f1; ...; fm)` forbids m *distinct* processes occupying
f1..fm simultaneously; it is the product form used for value-agreement
properties.  Both are "permissible" leaves with m quantified processes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import syntax as ast
from .diagnostics import Diagnostic, MercuryError, Severity
from .localts import LocalTS

# ---------------------------------------------------------------------------
# syntax


@dataclass(frozen=True)
class Target:
    locs: tuple[str, ...]
    cond: ast.Expr | None

    def render(self) -> str:
        locs = "|".join(self.locs)
        if self.cond is None:
            return locs
        from .pretty import print_expr
        return f"{locs}: {print_expr(self.cond)}"


@dataclass(frozen=True)
class Leaf:
    """Forbids `m` distinct processes occupying the targets (with
    multiplicity);  atmost(K, f) is m = K+1 copies of f."""

    targets: tuple[Target, ...]

    @property
    def m(self) -> int:
        return len(self.targets)

    def render(self) -> str:
        groups: dict[str, int] = {}
        for t in self.targets:
            groups[t.render()] = groups.get(t.render(), 0) + 1
        if len(groups) == 1:
            (t, n), = groups.items()
            return f"atmost({n - 1}, {t})"
        return "forbid(" + " ; ".join(t.render() for t in self.targets) + ")"


@dataclass(frozen=True)
class SpecAnd:
    parts: tuple["SpecExpr", ...]

    def render(self) -> str:
        return " & ".join(f"({p.render()})" if isinstance(p, SpecOr) else p.render()
                          for p in self.parts)


@dataclass(frozen=True)
class SpecOr:
    parts: tuple["SpecExpr", ...]

    def render(self) -> str:
        return " | ".join(f"({p.render()})" if isinstance(p, SpecAnd) else p.render()
                          for p in self.parts)


SpecExpr = Leaf | SpecAnd | SpecOr

MAX_CNF_CLAUSES = 64

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<sym>==|!=|<=|>=|&&|\|\||[()&|;:{},<>=!+\-*\[\]]))")


def _tokenize(line: str) -> list[tuple[str, str]]:
    toks = []
    pos = 0
    while pos < len(line):
        m = _TOKEN_RE.match(line, pos)
        if not m or m.end() == pos:
            if line[pos:].strip() == "":
                break
            raise MercuryError([Diagnostic(
                "MER0001", f"bad spec syntax near {line[pos:pos+10]!r}")])
        pos = m.end()
        for kind in ("int", "id", "sym"):
            if m.group(kind):
                toks.append((kind, m.group(kind)))
                break
    toks.append(("eof", ""))
    return toks


class _SpecParser:
    def __init__(self, line: str):
        self.toks = _tokenize(line)
        self.pos = 0

    def peek(self):
        return self.toks[self.pos]

    def eat(self, text: str | None = None):
        kind, tok = self.toks[self.pos]
        if text is not None and tok != text:
            raise MercuryError([Diagnostic(
                "MER0001", f"spec: expected {text!r}, found {tok!r}")])
        if kind != "eof":
            self.pos += 1
        return tok

    def parse(self) -> SpecExpr:
        e = self.parse_or()
        if self.peek()[0] != "eof":
            raise MercuryError([Diagnostic(
                "MER0001", f"spec: trailing input {self.peek()[1]!r}")])
        return e

    def parse_or(self) -> SpecExpr:
        parts = [self.parse_and()]
        while self.peek()[1] == "|":
            self.eat()
            parts.append(self.parse_and())
        return parts[0] if len(parts) == 1 else SpecOr(tuple(parts))

    def parse_and(self) -> SpecExpr:
        parts = [self.parse_atom()]
        while self.peek()[1] == "&":
            self.eat()
            parts.append(self.parse_atom())
        return parts[0] if len(parts) == 1 else SpecAnd(tuple(parts))

    def parse_atom(self) -> SpecExpr:
        kind, tok = self.peek()
        if tok == "(":
            self.eat()
            e = self.parse_or()
            self.eat(")")
            return e
        if tok == "atmost":
            self.eat()
            self.eat("(")
            if self.peek()[0] != "int":
                raise MercuryError([Diagnostic(
                    "MER0001",
                    f"spec: atmost needs a count, found {self.peek()[1]!r}")])
            k = int(self.eat())
            self.eat(",")
            target = self.parse_target()
            self.eat(")")
            return Leaf((target,) * (k + 1))
        if tok == "forbid":
            self.eat()
            self.eat("(")
            targets = [self.parse_target()]
            while self.peek()[1] == ";":
                self.eat()
                targets.append(self.parse_target())
            self.eat(")")
            return Leaf(tuple(targets))
        raise MercuryError([Diagnostic(
            "MER0001", f"spec: expected atmost/forbid, found {tok!r}")])

    def parse_target(self) -> Target:
        braced = False
        if self.peek()[1] == "{":
            braced = True
            self.eat()
        locs = [self.eat()]
        while self.peek()[1] == "|":
            self.eat()
            locs.append(self.eat())
        cond = None
        if self.peek()[1] == ":":
            self.eat()
            cond = self.parse_bexp()
        if braced:
            self.eat("}")
        return Target(tuple(locs), cond)

    def parse_bexp(self) -> ast.Expr:
        # reuse the program expression parser on the condition substring
        from .lexer import tokenize as lex
        from .parser import Parser

        depth = 0
        parts = []
        while True:
            kind, tok = self.peek()
            if kind == "eof":
                break
            if tok in ("(", "{", "["):
                depth += 1
            if tok in (")", "}", "]"):
                if depth == 0:
                    break
                depth -= 1
            if depth == 0 and tok in (";", ",", "&", "|") and tok not in ("&&", "||"):
                break
            parts.append(self.eat())
        text = " ".join(parts).replace("==", "=")
        sub = Parser(lex(text))
        e = sub.parse_bexp()
        if sub.peek().kind != "eof":
            raise MercuryError([Diagnostic(
                "MER0001", f"spec: bad condition {text!r}")])
        return e


def parse_spec_line(line: str) -> SpecExpr:
    return _SpecParser(line).parse()


def parse_spec_file(text: str) -> list[SpecExpr]:
    specs = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            specs.append(parse_spec_line(line))
    return specs


# ---------------------------------------------------------------------------
# CNF normalization (for cutoff composition)


def to_cnf(e: SpecExpr) -> list[list[Leaf]]:
    """Clauses of leaves; conjunction of disjunctions."""
    clauses = _cnf(e)
    if len(clauses) > MAX_CNF_CLAUSES:
        raise MercuryError([Diagnostic(
            "MER0403", f"specification expands to {len(clauses)} CNF clauses "
                       f"(cap {MAX_CNF_CLAUSES})", Severity.ERROR)])
    return clauses


def _cnf(e: SpecExpr) -> list[list[Leaf]]:
    match e:
        case Leaf():
            return [[e]]
        case SpecAnd(parts):
            out = []
            for p in parts:
                out.extend(_cnf(p))
            return out
        case SpecOr(parts):
            result: list[list[Leaf]] = [[]]
            for p in parts:
                sub = _cnf(p)
                result = [r + c for r in result for c in sub]
                if len(result) > MAX_CNF_CLAUSES:
                    raise MercuryError([Diagnostic(
                        "MER0403", "specification expands to more than "
                                   f"{MAX_CNF_CLAUSES} CNF clauses")])
            return result
    raise TypeError(e)


# ---------------------------------------------------------------------------
# resolution against a local transition system


@dataclass
class ResolvedLeaf:
    leaf: Leaf
    # distinct target groups: (state set, required process count)
    groups: list[tuple[frozenset[int], int]]

    @property
    def m(self) -> int:
        return self.leaf.m

    def violated(self, count_at) -> bool:
        """Hall-style check: can distinct processes fill every group?
        `count_at(states)` returns the number of processes in a state set."""
        n = len(self.groups)
        for mask in range(1, 1 << n):
            need = 0
            union: set[int] = set()
            for i in range(n):
                if mask & (1 << i):
                    union |= self.groups[i][0]
                    need += self.groups[i][1]
            if count_at(union) < need:
                return False
        return True


def resolve_leaf(ts: LocalTS, leaf: Leaf) -> ResolvedLeaf:
    known_locs = set(ts.core.locations)
    groups: dict[Target, int] = {}
    for t in leaf.targets:
        groups[t] = groups.get(t, 0) + 1
    resolved = []
    for target, count in groups.items():
        for loc in target.locs:
            if loc not in known_locs:
                raise MercuryError([Diagnostic(
                    "MER0002", f"spec references unknown location {loc!r}")])
        states = set()
        for i, (loc, vals) in enumerate(ts.states):
            if loc not in target.locs:
                continue
            if target.cond is None or ts._eval(target.cond, vals, None, loc) is True:
                states.add(i)
        resolved.append((frozenset(states), count))
    return ResolvedLeaf(leaf, resolved)


def st_of(ts: LocalTS, leaf: Leaf) -> frozenset[int]:
    """Union of the leaf's target state sets (error states of the leaf)."""
    rl = resolve_leaf(ts, leaf)
    out: set[int] = set()
    for states, _ in rl.groups:
        out |= states
    return frozenset(out)


def eval_spec(ts: LocalTS, spec: SpecExpr, count_at) -> bool:
    """True iff the spec holds for the global state described by
    `count_at` (a callable from state sets to process counts)."""
    match spec:
        case Leaf():
            return not resolve_leaf(ts, spec).violated(count_at)
        case SpecAnd(parts):
            return all(eval_spec(ts, p, count_at) for p in parts)
        case SpecOr(parts):
            return any(eval_spec(ts, p, count_at) for p in parts)
    raise TypeError(spec)
