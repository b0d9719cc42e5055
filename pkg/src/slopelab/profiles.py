"""Adapter describing a one-dimensional integrand for the measure engine.

A profile is a function of one real variable that is constant outside a
bounded interval.  The engine only needs pointwise values plus the structural
metadata below (plateau values, Lipschitz constant of the continuous part,
jump locations and sizes) to pick rigorous near-diagonal cutoffs and analytic
far-field tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Tuple

import numpy as np

Jump = Tuple[float, float]  # (location, |jump size|)


@dataclass(frozen=True)
class LineProfile:
    f: Callable[[np.ndarray], np.ndarray]
    lo: float                        # f is constant left of lo ...
    hi: float                        # ... and right of hi
    left: float                      # value on (-inf, lo]
    right: float                     # value on [hi, +inf)
    lipschitz: float                 # Lipschitz constant of the continuous part (inf if unknown)
    sup: float                       # sup |f|
    jumps: tuple[Jump, ...] = ()
    breakpoints: tuple[float, ...] = ()
    min_gap: float = field(init=False)

    def __post_init__(self):
        if self.hi < self.lo:
            raise ValueError("profile interval is empty")
        locs = sorted(loc for loc, _ in self.jumps)
        gap = math.inf
        for a, b in zip(locs, locs[1:]):
            gap = min(gap, b - a)
        object.__setattr__(self, "min_gap", gap)

    @property
    def span(self) -> float:
        return self.hi - self.lo

    @property
    def max_jump(self) -> float:
        return max((sz for _, sz in self.jumps), default=0.0)

    def grid_points(self) -> np.ndarray:
        """Sorted structural abscissae: endpoints, declared breakpoints, jumps."""
        pts = {self.lo, self.hi}
        pts.update(self.breakpoints)
        pts.update(loc for loc, _ in self.jumps)
        return np.array(sorted(pts))
