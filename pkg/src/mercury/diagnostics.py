"""Diagnostics shared by the frontend, lowering and analysis passes.

Every user-facing complaint is a Diagnostic carrying a stable code, a
severity, an optional source span and optional structured suggestions.
Codes are stable strings ("MER####") so that `mercury explain CODE` can
print the rationale behind the corresponding rule.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Severity(enum.Enum):
    ERROR = "error"          # malformed input: parse / type errors
    FRAGMENT = "fragment"    # well-formed but outside the verifiable fragment
    WARNING = "warning"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    end_line: int = 0
    end_col: int = 0

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


@dataclass
class Suggestion:
    """A ranked candidate repair, rendered under a diagnostic."""

    text: str
    rank: int = 0


@dataclass
class Diagnostic:
    code: str
    message: str
    severity: Severity = Severity.ERROR
    span: Span | None = None
    suggestions: list[Suggestion] = field(default_factory=list)

    def render(self) -> str:
        loc = f"{self.span} " if self.span else ""
        lines = [f"{loc}{self.severity}[{self.code}]: {self.message}"]
        if self.suggestions:
            lines.append("Suggestions to solve this:")
            for s in sorted(self.suggestions, key=lambda s: s.rank):
                lines.append(f" - {s.text}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "code": self.code,
            "severity": str(self.severity),
            "message": self.message,
            "span": [self.span.line, self.span.col] if self.span else None,
            "suggestions": [s.text for s in sorted(self.suggestions, key=lambda s: s.rank)],
        }


class MercuryError(Exception):
    """Raised when a pass cannot continue; carries the diagnostics so far."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(d.message for d in diagnostics))

    @property
    def worst(self) -> Severity:
        sevs = {d.severity for d in self.diagnostics}
        if Severity.ERROR in sevs:
            return Severity.ERROR
        if Severity.FRAGMENT in sevs:
            return Severity.FRAGMENT
        return Severity.WARNING


# Registry used by `mercury explain`.  Maps diagnostic codes to the design
# rule that produces them and why the rule exists.
EXPLANATIONS: dict[str, str] = {
    "MER0001": "Parse error: the input does not conform to the Mercury grammar.",
    "MER0002": "Unknown identifier: every variable, action, location and agreement id "
               "must be declared or introduced by a handler before use.",
    "MER0003": "Type error: bounded-int expressions, payload arities and guard types "
               "must match their declarations.",
    "MER0101": "Symmetry restriction: process identities may only be compared for "
               "equality/disequality. Arithmetic or ordering on identities would let "
               "processes distinguish each other and breaks the permutation symmetry "
               "the cutoff argument relies on.",
    "MER0102": "Symmetry restriction: rendezvous targets must be sender references "
               "(act.sID). Concrete process ids or self-targets would pin behavior to "
               "particular identities.",
    "MER0103": "Out of fragment: idSet.add / idSet.remove grow process-indexed state, "
               "so the local state space is no longer finite and independent of n. "
               "Participant sets must be All or the winner/loser set of a Partition.",
    "MER0104": "Out of fragment: participant sets other than All / p.winS / p.loseS "
               "are rejected for the same finite-state reason as MER0103.",
    "MER0105": "Guards on Partition/Consensus events are rejected: agreement events "
               "synchronize every participant, and a state-dependent guard would make "
               "enabledness diverge between participants that must move together.",
    "MER0201": "A reaction with two send statements is not expressible as a single "
               "core handler (one send per handler); split the protocol into two "
               "locations instead.",
    "MER0202": "A send whose payload or target is affected by updates preceding it in "
               "the same reaction cannot be hoisted to the front of the core handler "
               "without changing the transmitted value; reorder the reaction so the "
               "send comes first, or let it use pre-update values.",
    "MER0203": "Receive determinism: at most one receive per (state, action, payload) "
               "may be enabled, because the counter semantics moves every receiver "
               "through a functional receive map.",
    "MER0301": "Phase-compatibility: a state that can initiate a globally-synchronizing "
               "event must also be able to react to it, otherwise two processes racing "
               "to initiate block each other in a way that appears only at some system "
               "sizes.",
    "MER0302": "Phase-compatibility: after an internal step that enables a reaction, "
               "every other state of the phase must be able to reach a matching "
               "reaction, otherwise the event's enabledness depends on the system size.",
    "MER0303": "Phase-compatibility: if one initiation of an event lands where a "
               "second event can immediately be reacted to, all initiations and all "
               "reactions of the first event must lead to states that can still join "
               "the second event.",
    "MER0304": "Fixed-state-space side condition: see MER0103/MER0104.",
    "MER0305": "At most one location per phase may receive a given rendezvous action: "
               "the counter semantics forgets which process receives, which is only "
               "faithful when the receiver's location is determined by the phase.",
    "MER0401": "Cutoff computation failed: some path to the error states takes a "
               "transition that needs other processes (a reaction whose event nobody "
               "in the phase can initiate, or a rendezvous with another process), so "
               "adding processes can enable behavior the cutoff-size system lacks.",
    "MER0402": "Disjunctive specifications compose by summing cutoffs, which is only "
               "sound when the path sets of the disjuncts are connected by internal "
               "transitions alone; otherwise a single process could contribute to both "
               "disjuncts.",
    "MER0404": "Vacuous property: no reachable local state satisfies the leaf, so it "
               "holds for every system size; reported as a warning.",
    "MER0403": "CNF blow-up cap: specifications are normalized to CNF before cutoff "
               "composition; more than 64 clauses are rejected to keep analysis "
               "predictable.",
    "MER0501": "An agreement event whose participant token (p.winS / p.loseS) can "
               "never have been defined cannot fire; this usually indicates a missing "
               "Partition handler.",
    "MER0502": "Resource limit exceeded (state cap or time budget).",
    "MER0601": "Update reads an agreement variable (decVar / winS / loseS) that is "
               "still undefined in some reachable state. Guards treat undefined as "
               "false, but updates have no value to read.",
    "MER0602": "Hand-written counter-system inputs are accepted for coverability, but "
               "soundness of the backward analysis is only guaranteed for systems "
               "produced by the translator (well-behavedness is not re-derivable).",
}
