"""Phase computation.

A phase over-approximates the set of local states the processes can jointly
occupy between globally-synchronizing events (broadcasts, partitions,
consensuses).  Construction:

  1. initialization: the source and destination state sets of every
     globally-synchronizing event;
  2. expansion: close each set under the relation R, which links states
     connected by internal transitions or co-occurring around a rendezvous
     action;
  3. merge: union expanded sets that contain R-related states.

With no globally-synchronizing events the single phase is the whole
reachable state space (minus the crash state, which belongs to every phase
implicitly).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .localts import LocalTS

EventKey = tuple[str, str]


@dataclass
class PhaseResult:
    phases: list[frozenset[int]]
    src: dict[EventKey, frozenset[int]]
    dst: dict[EventKey, frozenset[int]]
    expanded: dict[str, frozenset[int]]   # labeled src/dst expansions
    r_adjacent: dict[int, set[int]]

    def phases_of(self, state: int) -> list[int]:
        return [i for i, ph in enumerate(self.phases) if state in ph]

    def union_of_phases(self, state: int) -> frozenset[int]:
        out: set[int] = set()
        for ph in self.phases:
            if state in ph:
                out |= ph
        return frozenset(out)


def src_dst_sets(ts: LocalTS) -> tuple[dict[EventKey, frozenset[int]],
                                       dict[EventKey, frozenset[int]]]:
    src: dict[EventKey, set[int]] = {}
    dst: dict[EventKey, set[int]] = {}
    for tr in ts.transitions:
        key = tr.label.event_key
        if key is None:
            continue
        src.setdefault(key, set()).add(tr.src)
        dst.setdefault(key, set()).add(tr.dst)
    return ({k: frozenset(v) for k, v in src.items()},
            {k: frozenset(v) for k, v in dst.items()})


def relation_r(ts: LocalTS) -> dict[int, set[int]]:
    """Symmetric adjacency of the phase relation R: internal neighbors plus
    all pairs inside each rendezvous action's source/destination zone."""
    adj: dict[int, set[int]] = {i: set() for i in range(len(ts.states))}
    zones: dict[str, set[int]] = {}
    for tr in ts.transitions:
        if tr.label.kind == "internal" and tr.src != tr.dst:
            adj[tr.src].add(tr.dst)
            adj[tr.dst].add(tr.src)
        elif tr.label.kind in ("send_rz", "recv_rz"):
            zone = zones.setdefault(tr.label.act, set())
            zone.add(tr.src)
            zone.add(tr.dst)
    for zone in zones.values():
        zone.discard(ts.crash_idx)
        for s in zone:
            adj[s] |= zone - {s}
    return adj


def _components(adj: dict[int, set[int]], nodes: set[int]) -> dict[int, int]:
    comp: dict[int, int] = {}
    cid = 0
    for start in sorted(nodes):
        if start in comp:
            continue
        stack = [start]
        comp[start] = cid
        while stack:
            s = stack.pop()
            for t in adj[s]:
                if t in nodes and t not in comp:
                    comp[t] = cid
                    stack.append(t)
        cid += 1
    return comp


def compute_phases(ts: LocalTS) -> PhaseResult:
    src, dst = src_dst_sets(ts)
    adj = relation_r(ts)
    all_states = {i for i in range(len(ts.states)) if i != ts.crash_idx}

    if not src:
        return PhaseResult([frozenset(all_states)], src, dst,
                           {"all": frozenset(all_states)}, adj)

    comp = _components(adj, all_states)
    comp_members: dict[int, set[int]] = {}
    for s, c in comp.items():
        comp_members.setdefault(c, set()).add(s)

    def expand(xs: frozenset[int]) -> frozenset[int]:
        out: set[int] = set()
        for s in xs:
            out |= comp_members[comp[s]]
        return frozenset(out)

    expanded_named: dict[str, frozenset[int]] = {}
    for key in sorted(src):
        name = f"{key[1]}"
        expanded_named[f"src({name})"] = expand(src[key])
        expanded_named[f"dst({name})"] = expand(dst[key])

    expanded = sorted(set(expanded_named.values()), key=sorted)

    # merge expanded sets containing R-related states: an R edge lies inside
    # one R-component, and expanded sets are component-closed, so two sets
    # merge iff they share a component that contains an R edge.
    def has_edge(states: set[int]) -> bool:
        return any(adj[s] & states for s in states)

    edgeful_comps = {c for c, members in comp_members.items()
                     if has_edge(members)}

    parent = list(range(len(expanded)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for c in edgeful_comps:
        holders = [i for i, xs in enumerate(expanded)
                   if comp_members[c] <= xs]
        for i in holders[1:]:
            parent[find(i)] = find(holders[0])

    groups: dict[int, set[int]] = {}
    for i, xs in enumerate(expanded):
        groups.setdefault(find(i), set()).update(xs)
    merged = [frozenset(g) for g in groups.values()]
    # a phase strictly contained in another is redundant: co-existence in
    # the smaller set is co-existence in the larger one
    phases = sorted((p for p in merged
                     if not any(p < q for q in merged)), key=sorted)
    return PhaseResult(phases, src, dst, expanded_named, adj)


def firable(ts: LocalTS, event: EventKey, states: frozenset[int] | set[int]) -> bool:
    """An event is firable in a state set if some member state can initiate
    (act on) it."""
    for tr in ts.transitions:
        if tr.src in states and tr.label.event_key == event \
                and tr.label.role == "acting":
            return True
    return False
