"""Elementwise consensus functions over selected components."""

from __future__ import annotations

from enum import Enum

import numpy as np

from .errors import EmptySelection, LengthMismatch


class ConsensusMethod(str, Enum):
    AVERAGE = "avg"
    MAXIMUM = "max"
    MINIMUM = "min"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"average": "avg", "mean": "avg", "maximum": "max", "minimum": "min"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"unknown consensus method {value!r}") from None


_REDUCERS = {
    ConsensusMethod.AVERAGE: np.mean,
    ConsensusMethod.MAXIMUM: np.max,
    ConsensusMethod.MINIMUM: np.min,
}


def aggregate(components, method=ConsensusMethod.AVERAGE):
    """Combine score vectors point by point.

    Parameters
    ----------
    components : sequence of array_like, or ndarray of shape (k, n)
    method : ConsensusMethod or str
        ``avg``, ``max`` or ``min``.

    Returns
    -------
    ndarray of shape (n,)
    """
    method = ConsensusMethod.parse(method)
    if isinstance(components, np.ndarray) and components.ndim == 2:
        stack = components.astype(np.float64, copy=False)
    else:
        rows = [np.asarray(c, dtype=np.float64) for c in components]
        if not rows:
            raise EmptySelection("no components to aggregate")
        lengths = {r.shape for r in rows}
        if len(lengths) != 1 or rows[0].ndim != 1:
            raise LengthMismatch(f"components differ in shape: {sorted(lengths)}")
        stack = np.vstack(rows)
    if stack.shape[0] == 0:
        raise EmptySelection("no components to aggregate")
    return _REDUCERS[method](stack, axis=0)
