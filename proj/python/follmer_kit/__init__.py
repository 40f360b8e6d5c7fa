"""Pathwise quadratic variation and Ito-Follmer checks on deterministic paths."""

import json

from . import _core
from ._core import (
    CadlagPath,
    ContractError,
    FactorizationError,
    PartitionSequence,
    commands,
    crossnorm_sandwich,
    discrete_scalar_qv,
    fixture_ids,
    scalar_qv,
    scaled_walk,
    taylor_remainder,
)

__all__ = [
    "CadlagPath",
    "ContractError",
    "FactorizationError",
    "PartitionSequence",
    "build_partition",
    "build_path",
    "commands",
    "crossnorm_sandwich",
    "discrete_scalar_qv",
    "fixture_ids",
    "run",
    "scalar_qv",
    "scaled_walk",
    "taylor_remainder",
]


def _dump(spec):
    return json.dumps(spec)


CadlagPath.to_json = lambda self: json.loads(self._to_json())


def build_path(spec, seed=42):
    return _core.build_path(_dump(spec), seed)


def build_partition(spec, horizon, path=None):
    return _core.build_partition(_dump(spec), horizon, path)


def run(command, config, n_max=None, seed=None):
    """Run one scenario; returns {"id", "csv", "report", "pass"} with the report decoded."""
    out = _core.run(command, _dump(config), n_max, seed)
    out["report"] = json.loads(out["report"])
    return out
