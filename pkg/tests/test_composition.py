"""Cutoff composition on synthetic two-leaf models: conjunction takes the
max of the leaf cutoffs, disjunction sums them when the leaves' path
regions are disjoint, and disjunction is rejected when a communicating
transition links the regions."""

from __future__ import annotations

from mercury.verify import build_pipeline, verify_parameterized

TWO_BRANCH = """
process TwoBranch
initial location Root
  on _ do
    goto A1
  on _ do
    goto B1
location A1
  on _ do
    goto A2
location A2
location B1
  on _ do
    goto B2
location B2
"""

# same shape, but a broadcast lets the A-branch cross into the B-branch,
# so the two leaves' path regions are no longer independent
TWO_BRANCH_LINKED = """
process TwoBranchLinked
actions
  br cross : unit
initial location Root
  on _ do
    goto A1
  on _ do
    goto B1
location A1
  on _ do
    goto A2
location A2
  on recv(cross) do
    goto B2
location B1
  on _ do
    goto B2
  on _ do
    sendbr(cross)
    goto B2
  on recv(cross) do
    goto B2
location B2
  on recv(cross) do
    goto B2
"""


def test_conjunction_takes_max():
    ts, ph, specs, cut = build_pipeline(
        TWO_BRANCH, "atmost(1, A2) & atmost(2, B2)")
    assert cut.ok and cut.cutoff == 3
    assert sorted(al.cutoff for al in cut.per_leaf) == [2, 3]


def test_disjoint_disjunction_sums():
    ts, ph, specs, cut = build_pipeline(
        TWO_BRANCH, "atmost(1, A2) | atmost(2, B2)")
    assert cut.ok and cut.cutoff == 5


def test_linked_disjunction_rejected():
    ts, ph, specs, cut = build_pipeline(
        TWO_BRANCH_LINKED, "atmost(1, A2) | atmost(2, B2)")
    assert not cut.ok
    assert any(d.code == "MER0402" for d in cut.diagnostics)
    # per-leaf amenability itself is fine; only the composition fails
    assert all(al.amenable for al in cut.per_leaf)


def test_summed_cutoff_feeds_the_verifier():
    pr = verify_parameterized(TWO_BRANCH, "atmost(1, A2) | atmost(2, B2)")
    assert pr.mode == "parameterized" and pr.verdict.n == 5
    # the disjunction is falsifiable with 5 processes: 2 at A2, 3 at B2
    assert pr.verdict.result == "unsafe"


def test_max_rule_matches_single_leaf_verdicts():
    both = verify_parameterized(TWO_BRANCH, "atmost(1, A2) & atmost(2, B2)")
    a = verify_parameterized(TWO_BRANCH, "atmost(1, A2)")
    b = verify_parameterized(TWO_BRANCH, "atmost(2, B2)")
    assert both.verdict.n == max(a.verdict.n, b.verdict.n) == 3
    unsafe = {r.verdict.result for r in (a, b)}
    assert both.verdict.result == ("unsafe" if "unsafe" in unsafe else "safe")
