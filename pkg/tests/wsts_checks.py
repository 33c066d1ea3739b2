"""Order/compatibility checks shared by the wsts and acceptance suites."""

from __future__ import annotations

import random

from mercury.gsp import counter_step
from mercury.wsts import Ready, wqo_leq


def compatibility_trials(sys_, n_trials: int, seed: int = 12345,
                         depth: int = 4) -> tuple[int, int]:
    """Random (q ≾ p, q → q') trials; counts (checked, violations) of the
    simulation-compatibility property: forward search from p within
    `depth` steps finds p' with q' ≾ p'."""
    rng = random.Random(seed)
    ready = Ready(sys_)
    ns = sys_.n_states
    checked = violations = 0
    while checked < n_trials:
        q = tuple(rng.randint(0, 2) for _ in range(ns))
        if sum(q) == 0:
            continue
        p = tuple(c + rng.randint(0, 2) for c in q)
        if not wqo_leq(q, p, ready):
            continue
        steps = counter_step(q, sys_)
        if not steps:
            continue
        _, q2 = rng.choice(steps)
        checked += 1
        frontier, seen = {p}, {p}
        found = any(wqo_leq(q2, r, ready) for r in frontier)
        d = 0
        while not found and d < depth:
            d += 1
            nxt = set()
            for r in frontier:
                for _, r2 in counter_step(r, sys_):
                    if r2 not in seen:
                        seen.add(r2)
                        nxt.add(r2)
            frontier = nxt
            found = any(wqo_leq(q2, r, ready) for r in frontier)
        if not found:
            violations += 1
    return checked, violations
