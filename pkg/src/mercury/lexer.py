"""Tokenizer for the Mercury surface syntax.

Whitespace (including newlines) is insignificant; `/* ... */` and `//` line
comments are skipped.  Statement boundaries are recovered by the parser from
keywords, so no layout information is kept.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import Diagnostic, MercuryError, Severity, Span

KEYWORDS = {
    "process", "variables", "actions", "env", "br", "rz", "int", "idSet",
    "unit", "initial", "location", "on", "recv", "where", "do", "win", "lose",
    "goto", "if", "else", "sendrz", "sendbr", "passive", "reply", "Partition",
    "Consensus", "All", "Empty", "self", "true", "false",
}

# Longest first so that ":=", "<=", "&&" etc. win over their prefixes.
SYMBOLS = [
    ":=", "<=", ">=", "!=", "&&", "||", "==",
    "(", ")", "[", "]", "{", "}", "<", ">", "=", ",", ";", ":", ".",
    "+", "-", "*", "!", "_",
]


@dataclass(frozen=True)
class Token:
    kind: str  # "kw", "ident", "int", "sym", "eof"
    text: str
    span: Span


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)

    def err(msg: str) -> MercuryError:
        return MercuryError([Diagnostic("MER0001", msg, Severity.ERROR, Span(line, col))])

    while i < n:
        c = source[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end < 0:
                raise err("unterminated comment")
            skipped = source[i:end + 2]
            line += skipped.count("\n")
            col = len(skipped) - skipped.rfind("\n") if "\n" in skipped else col + len(skipped)
            i = end + 2
            continue
        if c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(Token("int", source[i:j], Span(line, col)))
            col += j - i
            i = j
            continue
        if c.isalpha():
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = "kw" if text in KEYWORDS else "ident"
            tokens.append(Token(kind, text, Span(line, col)))
            col += j - i
            i = j
            continue
        for sym in SYMBOLS:
            if source.startswith(sym, i):
                # `_` immediately followed by ident chars is part of an identifier
                if sym == "_" and i + 1 < n and (source[i + 1].isalnum() or source[i + 1] == "_"):
                    j = i
                    while j < n and (source[j].isalnum() or source[j] == "_"):
                        j += 1
                    tokens.append(Token("ident", source[i:j], Span(line, col)))
                    col += j - i
                    i = j
                    break
                tokens.append(Token("sym", sym, Span(line, col)))
                col += len(sym)
                i += len(sym)
                break
        else:
            raise err(f"unexpected character {c!r}")
    tokens.append(Token("eof", "", Span(line, col)))
    return tokens
