"""Unbounded-n backward coverability over the counter system.

Upward-closed sets of counter states are kept as finite bases of minimal
elements under the firability-aware order

    q ≾ p  ⟺  q ⪯ p (component-wise)  ∧  ready(q) ⊆ ready(p)

where ready(q) is the set of actions that pass both their guard and their
slot-assignment check at q.  The backward step inverts the counter update
q' = M·(q − v) + v' per action: choose a slot filling (v, v'), distribute
the still-missing target counts over receive-map preimages, then confirm
each candidate by actually firing the action into the current set (the
order is not component-wise, so candidates are validated, and padded
variants are tried when validation fails only for want of extra
bystanders).

Coverable means the fixpoint basis contains an element supported on the
initial state alone — some finite family of fresh processes reaches the
error set.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import product

from .diagnostics import Diagnostic, MercuryError, Severity
from .gsp import (Counter, GspAction, GspSystem, can_fire, counter_step,
                  enabled_fillings, fire, supp)
from .specs import Leaf, ResolvedLeaf, resolve_leaf

DEFAULT_STEP_CAP = 200_000


class Ready:
    """Memoized ready-set computation for one system."""

    def __init__(self, sys: GspSystem):
        self.sys = sys
        self._cache: dict[Counter, frozenset[str]] = {}

    def __call__(self, q: Counter) -> frozenset[str]:
        r = self._cache.get(q)
        if r is None:
            s = supp(q)
            r = frozenset(a.name for a in self.sys.actions
                          if s <= a.guard and can_fire(a, q))
            self._cache[q] = r
        return r


def wqo_leq(q: Counter, p: Counter, ready: Ready) -> bool:
    return all(qc <= pc for qc, pc in zip(q, p)) and ready(q) <= ready(p)


def _mask(q: Counter) -> int:
    m = 0
    for i, c in enumerate(q):
        if c:
            m |= 1 << i
    return m


def _sparse(q: Counter) -> tuple[tuple[int, int], ...]:
    return tuple((i, c) for i, c in enumerate(q) if c)


@dataclass
class UpwardClosedSet:
    """Basis-represented upward-closed set.  With a Ready the order is the
    firability-aware ≾; without one it degrades to component-wise ⪯ (used
    by the sound fast path for uncoverable answers)."""

    ready: Ready | None
    basis: list[Counter] = field(default_factory=list)

    def __post_init__(self):
        # (mask, total, sparse items) per basis element, for cheap rejects
        self._meta = [(_mask(b), sum(b), _sparse(b)) for b in self.basis]

    def _leq(self, i: int, q: Counter, q_mask: int, q_tot: int) -> bool:
        mask, tot, items = self._meta[i]
        if tot > q_tot or mask & ~q_mask:
            return False
        if any(c > q[s] for s, c in items):
            return False
        if self.ready is None:
            return True
        return self.ready(self.basis[i]) <= self.ready(q)

    def member(self, q: Counter) -> bool:
        q_mask, q_tot = _mask(q), sum(q)
        return any(self._leq(i, q, q_mask, q_tot)
                   for i in range(len(self.basis)))

    def _geq(self, i: int, q: Counter) -> bool:
        b = self.basis[i]
        if not all(qc <= bc for qc, bc in zip(q, b)):
            return False
        if self.ready is None:
            return True
        return self.ready(q) <= self.ready(b)

    def add(self, q: Counter) -> bool:
        """Insert q, keeping the basis a minimal antichain; False when q
        was already covered."""
        if self.member(q):
            return False
        keep = [i for i in range(len(self.basis)) if not self._geq(i, q)]
        self.basis = [self.basis[i] for i in keep]
        self._meta = [self._meta[i] for i in keep]
        self.basis.append(q)
        self._meta.append((_mask(q), sum(q), _sparse(q)))
        return True


class Coexistence:
    """Over-approximation of which local-state pairs can be occupied at
    once in some reachable configuration of any size.

    Two processes are tracked through the counter actions while every
    other process (and the participant-count floor) is ignored: under an
    action both must sit inside the guard and each must move, either
    through a slot or through the receive map.  Any pair of processes in
    any reachable configuration maps to a pair reachable here, so a
    backward-exploration candidate whose support needs a pair outside
    this set dominates no reachable configuration and can be dropped
    without changing the coverability answer."""

    def __init__(self, sys: GspSystem):
        moves: list[tuple[frozenset[int], dict[int, set[int]]]] = []
        for a in sys.actions:
            mv: dict[int, set[int]] = {}
            for slot in a.slots:
                for s, d in slot:
                    mv.setdefault(s, set()).add(d)
            for s, d in a.recv_map.items():
                mv.setdefault(s, set()).add(d)
            moves.append((a.guard, mv))

        init = sys.init_idx
        singles = {init}
        work = [init]
        while work:
            x = work.pop()
            for guard, mv in moves:
                if x not in guard:
                    continue
                for d in mv.get(x, ()):
                    if d not in singles:
                        singles.add(d)
                        work.append(d)
        self.singles = frozenset(singles)

        pairs = {(init, init)}
        pwork = [(init, init)]
        while pwork:
            x, y = pwork.pop()
            for guard, mv in moves:
                if x not in guard or y not in guard:
                    continue
                for dx in mv.get(x, ()):
                    for dy in mv.get(y, ()):
                        p = (dx, dy) if dx <= dy else (dy, dx)
                        if p not in pairs:
                            pairs.add(p)
                            pwork.append(p)
        self.pairs = frozenset(pairs)

    def feasible(self, q: Counter) -> bool:
        s = sorted(supp(q))
        if any(x not in self.singles for x in s):
            return False
        for i, x in enumerate(s):
            if q[x] >= 2 and (x, x) not in self.pairs:
                return False
            for y in s[i + 1:]:
                if (x, y) not in self.pairs:
                    return False
        return True


# ---------------------------------------------------------------------------
# backward step


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _abstract_fillings(action: GspAction):
    """Slot fillings ignoring availability (the candidate supplies it)."""
    out = set()
    if action.kind == "sender":
        for choice in product(*action.slots):
            taken: dict[int, int] = {}
            produced: dict[int, int] = {}
            for s, d in choice:
                taken[s] = taken.get(s, 0) + 1
                produced[d] = produced.get(d, 0) + 1
            out.add((tuple(sorted(taken.items())),
                     tuple(sorted(produced.items()))))
    else:
        options = sorted(set(action.slots[0])) if action.slots else []
        for m in range(1, action.arity + 1):
            for split in _compositions(m, len(options)):
                taken: dict[int, int] = {}
                produced: dict[int, int] = {}
                for (s, d), c in zip(options, split):
                    if c:
                        taken[s] = taken.get(s, 0) + c
                        produced[d] = produced.get(d, 0) + c
                if taken:
                    out.add((tuple(sorted(taken.items())),
                             tuple(sorted(produced.items()))))
    return sorted(out)


def _invert(action: GspAction, b: Counter, n_states: int):
    """Minimal candidate predecessors q with fire(q) ⪰ b component-wise."""
    preimg: dict[int, list[int]] = {}
    for s, d in action.recv_map.items():
        preimg.setdefault(d, []).append(s)
    for cands_taken, produced in _abstract_fillings(action) or [((), ())]:
        taken = dict(cands_taken)
        prod = dict(produced)
        need = [(t, b[t] - prod.get(t, 0)) for t in range(n_states)
                if b[t] - prod.get(t, 0) > 0]
        if any(t not in preimg for t, _ in need):
            continue
        pools = [sorted(preimg[t]) for t, _ in need]
        for splits in product(*[_compositions(r, len(pool))
                                for (_, r), pool in zip(need, pools)]):
            q = [0] * n_states
            for s, c in taken.items():
                q[s] += c
            for pool, split in zip(pools, splits):
                for s, c in zip(pool, split):
                    q[s] += c
            if not supp(tuple(q)) <= action.guard:
                continue
            yield tuple(q)


def _pad_variants(action: GspAction, q: Counter):
    """Padding candidates: every distribution of a participant-count
    deficit over receivable member states, else one extra bystander at
    each receivable guard state (for firability-order completeness)."""
    out = []
    if action.member_states:
        floor = max(1, action.min_members())
        have = sum(q[s] for s in action.member_states)
        if have < floor:
            pool = sorted(action.member_states & set(action.recv_map)
                          & action.guard)
            for split in _compositions(floor - have, len(pool)):
                nq = list(q)
                for s, c in zip(pool, split):
                    nq[s] += c
                out.append(tuple(nq))
            return out
    for s in sorted(set(action.recv_map) & action.guard):
        nq = list(q)
        nq[s] += 1
        out.append(tuple(nq))
    return out


def _fires_into(action: GspAction, q: Counter, target: UpwardClosedSet,
                enforce_floor: bool = True) -> bool:
    if not supp(q) <= action.guard:
        return False
    for taken, produced in enabled_fillings(action, q):
        nq = fire(action, q, taken, produced, enforce_floor=enforce_floor)
        if nq is not None and target.member(nq):
            return True
    return False


def pred(U: UpwardClosedSet, sys: GspSystem,
         frontier: list[Counter] | None = None,
         deadline: float | None = None,
         coarse: bool = False,
         coex: Coexistence | None = None) -> list[Counter]:
    """Verified one-step predecessors of U not already in U (candidates for
    basis insertion).  When given, only target elements in `frontier`.

    In coarse mode the participant-count floor is waived and no padding is
    tried: minimal candidates then over-approximate every true predecessor
    component-wise, which is what the first decision stage relies on.
    Candidates that the coexistence invariant rules out dominate no
    reachable configuration and are dropped.
    """
    targets = frontier if frontier is not None else list(U.basis)
    found: list[Counter] = []
    for action in sys.actions:
        if deadline is not None and time.monotonic() > deadline:
            raise TimeoutError
        for b in targets:
            for q in _invert(action, b, sys.n_states):
                if coex is not None and not coex.feasible(q):
                    continue
                if U.member(q):
                    continue
                if _fires_into(action, q, U, enforce_floor=not coarse):
                    found.append(q)
                    continue
                if coarse:
                    continue
                for p in _pad_variants(action, q):
                    if coex is not None and not coex.feasible(p):
                        continue
                    if not U.member(p) and _fires_into(action, p, U):
                        found.append(p)
                        break
    return found


# ---------------------------------------------------------------------------
# coverability


@dataclass
class CoverResult:
    result: str                       # coverable | uncoverable | resource_exceeded
    basis: list[Counter]
    witness: Counter | None = None    # initial-family basis element
    iterations: int = 0


def error_basis(sys: GspSystem, rl: ResolvedLeaf) -> list[Counter]:
    """Minimal counters placing the leaf's required processes."""
    out = set()
    group_choices = []
    for states, count in rl.groups:
        pool = sorted(states)
        choices = []
        for split in _compositions(count, len(pool)):
            choices.append(tuple((s, c) for s, c in zip(pool, split) if c))
        group_choices.append(choices)
    for combo in product(*group_choices):
        q = [0] * sys.n_states
        for placement in combo:
            for s, c in placement:
                q[s] += c
        out.add(tuple(q))
    return sorted(out)


def _fixpoint(sys: GspSystem, rl: ResolvedLeaf, ready: Ready | None,
              step_cap: int, deadline: float | None,
              coex: Coexistence | None = None) -> CoverResult:
    U = UpwardClosedSet(ready)
    frontier: list[Counter] = []
    for q in error_basis(sys, rl):
        if (coex is None or coex.feasible(q)) and U.add(q):
            frontier.append(q)
    if not frontier:
        return CoverResult("uncoverable", [])

    iterations = 0
    steps = 0
    while frontier:
        iterations += 1
        try:
            candidates = pred(U, sys, frontier, deadline,
                              coarse=ready is None, coex=coex)
        except TimeoutError:
            return CoverResult("resource_exceeded", U.basis,
                               iterations=iterations)
        fresh: list[Counter] = []
        for q in candidates:
            steps += 1
            if steps > step_cap:
                return CoverResult("resource_exceeded", U.basis,
                                   iterations=iterations)
            if U.add(q):
                fresh.append(q)
        frontier = fresh
        hit = _initial_hit(sys, U)
        if hit is not None:
            return CoverResult("coverable", U.basis, hit, iterations)
    hit = _initial_hit(sys, U)
    if hit is not None:
        return CoverResult("coverable", U.basis, hit, iterations)
    return CoverResult("uncoverable", U.basis, iterations=iterations)


def coverable(sys: GspSystem, leaf: Leaf,
              step_cap: int = DEFAULT_STEP_CAP,
              max_seconds: float | None = None) -> CoverResult:
    """Two-stage decision.  A component-wise pass over-approximates the
    backward closure (every true predecessor dominates one of its
    candidates, and dominance only grows the set), so its *uncoverable*
    answer stands.  A *coverable* claim from that pass may rest on states
    whose extra support disables a guard, so it is re-decided under the
    firability-aware order, whose candidates are all fire-verified.  Both
    passes prune candidates via the coexistence invariant."""
    rl = resolve_leaf(sys.ts, leaf)
    deadline = (time.monotonic() + max_seconds
                if max_seconds is not None else None)
    coex = Coexistence(sys)
    coarse = _fixpoint(sys, rl, None, step_cap, deadline, coex)
    if coarse.result == "uncoverable":
        return coarse
    return _fixpoint(sys, rl, Ready(sys), step_cap, deadline, coex)


def _initial_hit(sys: GspSystem, U: UpwardClosedSet) -> Counter | None:
    for b in U.basis:
        if supp(b) <= {sys.init_idx}:
            return b
    return None


def load_gsp_json(data: dict) -> GspSystem:
    """Rebuild a GspSystem from the JSON interchange form.  Hand-written
    inputs are accepted; coverability on them is not backed by the
    translation guarantees, so a warning is attached."""
    from .gsp import GspAction, GspSystem  # local import to avoid cycles

    class _Shell:
        """Just enough of a LocalTS for coverability on foreign input."""

        def __init__(self, d):
            self._names = d["states"]
            self.init_idx = d["initial"]
            self.crash_idx = d["crash"]
            # state names render as "(Loc,{...})"; spec leaves name the Loc
            locs = [n[1:-1].split(",", 1)[0] if n.startswith("(") else n
                    for n in self._names]
            self.states = [(loc, ()) for loc in locs]
            core = type("C", (), {})()
            core.name = d.get("process", "imported")
            core.locations = sorted(set(locs))
            self.core = core

        def render_state(self, i, full=False):
            return self._names[i]

        def _eval(self, *a, **k):
            raise MercuryError([Diagnostic(
                "MER0602", "imported counter systems carry no valuations; "
                           "use location-only spec leaves", Severity.ERROR)])

    ts = _Shell(data)
    actions = [
        GspAction(
            name=a["name"], kind=a["kind"], arity=a["arity"],
            guard=frozenset(a["guard"]),
            slots=tuple(tuple(tuple(t) for t in slot) for slot in a["slots"]),
            recv_map={int(s): d for s, d in a["recv_map"].items()},
            provenance=a.get("provenance", ""),
            member_states=(frozenset(a["member_states"])
                           if a.get("member_states") is not None else None),
            crash_slots=a.get("crash_slots", 0),
        )
        for a in data["actions"]
    ]
    warning = Diagnostic(
        "MER0602", "coverability on imported counter systems is not backed "
                   "by the translation's well-behavedness guarantee",
        Severity.WARNING)
    return GspSystem(ts, actions, [warning])  # type: ignore[arg-type]
