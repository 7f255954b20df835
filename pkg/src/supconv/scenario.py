"""JSON scenario files: a list of firms plus run defaults."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .errors import InputError
from .technology import Technology, common_dim, parse_technology

BUNDLED = ("fig1", "fig2", "fig3")
_KEYS = {"name", "description", "firms", "resolution", "seed", "probe", "tolerance", "trials"}


@dataclass(frozen=True, eq=False)
class Scenario:
    """Firms sharing one input dimension, with default run settings.

    ``resolution`` is the simplex grid resolution ``K`` (``None`` lets each
    engine choose), ``tolerance`` overrides the certification tolerance and
    ``probe`` is an optional default input vector for certificates.
    """

    firms: tuple[Technology, ...]
    name: str = "scenario"
    resolution: int | None = None
    seed: int = 0
    probe: np.ndarray | None = None
    tolerance: float | None = None
    trials: int = 200

    @property
    def dim(self) -> int:
        return common_dim(self.firms)

    @property
    def concave(self) -> bool:
        return all(t.concave for t in self.firms)


def _positive_int(record, key, default):
    value = record.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise InputError(f"scenario field {key!r} must be a positive integer")
    return value


def scenario_from_dict(record: Any, name: str = "scenario") -> Scenario:
    """Validate a decoded JSON object and build a :class:`Scenario`."""
    if not isinstance(record, dict):
        raise InputError("scenario must be a JSON object")
    unknown = sorted(set(record) - _KEYS)
    if unknown:
        raise InputError(f"unknown scenario field(s): {', '.join(unknown)}")
    firms = record.get("firms")
    if not isinstance(firms, list) or not firms:
        raise InputError("scenario needs a non-empty 'firms' list")
    techs = []
    for j, rec in enumerate(firms, start=1):
        try:
            techs.append(parse_technology(rec))
        except InputError as exc:
            raise InputError(f"firm {j}: {exc}") from None
    n = common_dim(techs)

    seed = record.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise InputError("scenario field 'seed' must be a nonnegative integer")
    probe = record.get("probe")
    if probe is not None:
        try:
            probe = np.asarray(probe, dtype=float)
        except (TypeError, ValueError):
            raise InputError("scenario field 'probe' must be a list of numbers") from None
        if probe.shape != (n,) or np.any(probe < 0) or not np.all(np.isfinite(probe)):
            raise InputError(f"scenario field 'probe' must be a nonnegative {n}-vector")
        probe.setflags(write=False)
    tol = record.get("tolerance")
    if tol is not None:
        if isinstance(tol, bool) or not isinstance(tol, (int, float)) or not 0 < tol < 1:
            raise InputError("scenario field 'tolerance' must be a number in (0, 1)")
        tol = float(tol)
    return Scenario(
        firms=tuple(techs),
        name=str(record.get("name", name)),
        resolution=_positive_int(record, "resolution", None),
        seed=seed,
        probe=probe,
        tolerance=tol,
        trials=_positive_int(record, "trials", 200),
    )


def load_scenario(source: str | Path) -> Scenario:
    """Read a scenario from a path, or a bundled one by name (``"fig2"``)."""
    source = str(source)
    path = Path(source)
    if not path.exists() and source in BUNDLED:
        text = resources.files("supconv.scenarios").joinpath(f"{source}.json").read_text()
    else:
        try:
            text = path.read_text()
        except OSError as exc:
            raise InputError(f"cannot read scenario {source!r}: {exc.strerror}") from None
    try:
        record = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(record, name=path.stem)
