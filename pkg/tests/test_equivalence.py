"""Differential check: the counter engine's reachable set must equal the
α-image of the indexed semantics, and both sides must agree on every
bundled specification.  (Small n here; the acceptance suite extends the
sweep to n = 4.)"""

from __future__ import annotations

import pytest

from mercury.gsp import alpha, counter_step
from mercury.oracle import reachable_indexed
from mercury.specs import eval_spec

from conftest import pipeline


def counter_reachable(sys_, n: int):
    seen = {sys_.initial(n)}
    work = [sys_.initial(n)]
    while work:
        q = work.pop()
        for _, nq in counter_step(q, sys_):
            if nq not in seen:
                seen.add(nq)
                work.append(nq)
    return seen


def spec_holds_everywhere(ts, specs, counters) -> bool:
    return all(
        eval_spec(ts, spec, lambda ss, q=q: sum(q[s] for s in ss))
        for q in counters for spec in specs)


@pytest.mark.parametrize("n", (1, 2, 3))
def test_alpha_image_equality(fragment_model, n):
    ts, _, specs, _, sys_ = pipeline(fragment_model)
    indexed = reachable_indexed(ts, n)
    image = {alpha(q.locals, sys_.n_states) for q in indexed}
    counters = counter_reachable(sys_, n)
    assert image == counters


@pytest.mark.parametrize("n", (1, 2, 3))
def test_spec_verdicts_agree(fragment_model, n):
    ts, _, specs, _, sys_ = pipeline(fragment_model)
    indexed = reachable_indexed(ts, n)
    image = {alpha(q.locals, sys_.n_states) for q in indexed}
    counters = counter_reachable(sys_, n)
    assert spec_holds_everywhere(ts, specs, image) == \
        spec_holds_everywhere(ts, specs, counters)
