from __future__ import annotations

from pathlib import Path

import pytest

from mercury.gsp import rewrite
from mercury.verify import build_pipeline

MODELS = Path(__file__).resolve().parent.parent / "models"

# every bundled model inside the verifiable fragment, with its cutoff
FRAGMENT_MODELS = {
    "fig1_store": 3,
    "fig1_store_mutant": 3,
    "fig5_serializer_final": 2,
    "lock_service": 2,
    "robot_planner": 2,
    "distributed_register": 2,
}


def model_path(name: str) -> Path:
    return MODELS / f"{name}.mer"


def load(name: str) -> tuple[str, str]:
    return (MODELS / f"{name}.mer").read_text(), \
           (MODELS / f"{name}.spec").read_text()


_cache: dict[str, tuple] = {}


def pipeline(name: str):
    """(ts, phases, specs, cutoff, gsp system) for a bundled model, cached."""
    if name not in _cache:
        text, spec = load(name)
        ts, ph, specs, cut = build_pipeline(text, spec)
        _cache[name] = (ts, ph, specs, cut, rewrite(ts, ph))
    return _cache[name]


@pytest.fixture(params=sorted(FRAGMENT_MODELS))
def fragment_model(request):
    return request.param
