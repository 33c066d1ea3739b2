from __future__ import annotations

import pytest

from semantics_checks import (check_agreement_outcomes, check_c1_participants,
                              check_permutation_closure)

from conftest import pipeline

SIZES = (2, 3)


@pytest.mark.parametrize("n", SIZES)
def test_permutation_closure(fragment_model, n):
    ts, *_ = pipeline(fragment_model)
    assert check_permutation_closure(ts, n) == []


@pytest.mark.parametrize("n", SIZES)
def test_agreement_outcomes(fragment_model, n):
    ts, *_ = pipeline(fragment_model)
    assert check_agreement_outcomes(ts, n) == []


@pytest.mark.parametrize("n", SIZES)
def test_c1_participants(fragment_model, n):
    ts, *_ = pipeline(fragment_model)
    assert check_c1_participants(ts, n) == []
