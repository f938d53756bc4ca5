"""Frozen thresholds for finite-data verdicts and the order estimator.

The values live in data/calibration.json next to the oracle runs that fixed
them; verdict code reads them from here so no magic number hides in logic.
"""

from __future__ import annotations

import json
from importlib import resources


def _load() -> dict:
    with resources.files("eulercrop").joinpath("data/calibration.json").open() as fh:
        return json.load(fh)


CALIBRATION = _load()
