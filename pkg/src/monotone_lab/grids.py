"""Spatial grids on the unit interval, ring, and radial segment.

Every state in the package lives on a Grid. The spatial kinds discretize
second-order operators on [0, 1] (or a circumference-1 ring); the flat kind
carries coordinate-free states for explicitly given maps.

Node layouts:

* ``dirichlet``: n interior nodes x_i = (i+1) h, h = 1/(n+1). Boundary
  values u(0) = u(1) = 0 are eliminated from the state.
* ``neumann``: n vertex nodes x_i = i h, h = 1/(n-1), including both
  endpoints. Zero-flux conditions enter through mirrored ghost nodes.
* ``ring``: n nodes x_i = i h, h = 1/n, periodic wrap.
* ``radial``: n nodes r_i = i h, h = 1/n, on [0, 1). The node r = 0 is
  tracked (symmetry axis of a radially symmetric profile in ``dim`` space
  dimensions); the value at r = 1 is held at zero and eliminated.
* ``flat``: no spatial structure, plain vectors of length n.
"""

from dataclasses import dataclass

import numpy as np

from .errors import GridError

GRID_KINDS = ("flat", "dirichlet", "neumann", "ring", "radial")


@dataclass(frozen=True)
class Grid:
    """Discretization descriptor: kind, node count, and (for radial) space dimension.

    ``dim`` is the number of space dimensions represented by a radial
    profile; it is ignored by every other kind.
    """

    kind: str
    n: int
    dim: int = 1

    def __post_init__(self):
        if self.kind not in GRID_KINDS:
            raise GridError(f"unknown grid kind {self.kind!r}")
        if self.n < 1:
            raise GridError(f"node count must be positive, got {self.n}")
        if self.kind == "neumann" and self.n < 2:
            raise GridError("neumann grid needs at least 2 nodes")
        if self.kind == "radial" and self.dim < 2:
            raise GridError(f"radial profiles need space dimension >= 2, got {self.dim}")

    @property
    def h(self):
        """Mesh width. Nominal 1.0 on flat grids."""
        if self.kind == "dirichlet":
            return 1.0 / (self.n + 1)
        if self.kind == "neumann":
            return 1.0 / (self.n - 1)
        if self.kind in ("ring", "radial"):
            return 1.0 / self.n
        return 1.0

    def nodes(self):
        """Node coordinates in [0, 1]. Raises on flat grids."""
        if self.kind == "flat":
            raise GridError("flat grid has no spatial nodes")
        if self.kind == "dirichlet":
            return (np.arange(self.n) + 1.0) * self.h
        return np.arange(self.n) * self.h
