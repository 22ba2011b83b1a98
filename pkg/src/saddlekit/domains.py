"""Feasible domains with closed-form Euclidean projections.

Only balls and boxes are supported: their projections are exact, which
keeps the extragradient steps and cubic-Newton inner solves exact.
``FreeBall`` marks an effectively unconstrained block whose radius is
used solely for diameter bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadParams, DimensionMismatch
from .linalg import vector_norm


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise BadParams("ball radius must be positive")

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def project(self, p: np.ndarray) -> np.ndarray:
        if p.shape[0] != self.dim:
            raise DimensionMismatch(f"point dim {p.shape[0]} != domain dim {self.dim}")
        d = p - self.center
        r = vector_norm(d)
        if r <= self.radius:
            return p
        return self.center + d * (self.radius / r)

    def contains(self, p: np.ndarray, slack: float = 1e-12) -> bool:
        return vector_norm(p - self.center) <= self.radius * (1.0 + slack) + slack

    def strictly_inside(self, p: np.ndarray, margin: float) -> bool:
        return vector_norm(p - self.center) < self.radius - margin

    def diameter(self) -> float:
        return 2.0 * self.radius

    def sup_distance(self, p: np.ndarray) -> float:
        """sup over the domain of the distance to p."""
        return self.radius + vector_norm(p - self.center)


@dataclass(frozen=True)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        if self.lower.shape != self.upper.shape:
            raise BadParams("box bounds must have equal shapes")
        if np.any(self.lower > self.upper):
            raise BadParams("box requires lower <= upper componentwise")

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def project(self, p: np.ndarray) -> np.ndarray:
        if p.shape[0] != self.dim:
            raise DimensionMismatch(f"point dim {p.shape[0]} != domain dim {self.dim}")
        return np.minimum(np.maximum(p, self.lower), self.upper)

    def contains(self, p: np.ndarray, slack: float = 1e-12) -> bool:
        return bool(
            np.all(p >= self.lower - slack) and np.all(p <= self.upper + slack)
        )

    def strictly_inside(self, p: np.ndarray, margin: float) -> bool:
        return bool(
            np.all(p > self.lower + margin) and np.all(p < self.upper - margin)
        )

    def diameter(self) -> float:
        return vector_norm(self.upper - self.lower)

    def sup_distance(self, p: np.ndarray) -> float:
        far = np.maximum(np.abs(p - self.lower), np.abs(self.upper - p))
        return vector_norm(far)


@dataclass(frozen=True)
class FreeBall:
    """Unconstrained block; radius only feeds diameter bookkeeping."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise BadParams("free-ball radius must be positive")

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def project(self, p: np.ndarray) -> np.ndarray:
        if p.shape[0] != self.dim:
            raise DimensionMismatch(f"point dim {p.shape[0]} != domain dim {self.dim}")
        return p

    def contains(self, p: np.ndarray, slack: float = 1e-12) -> bool:
        return True

    def strictly_inside(self, p: np.ndarray, margin: float) -> bool:
        return True

    def diameter(self) -> float:
        return 2.0 * self.radius

    def sup_distance(self, p: np.ndarray) -> float:
        return self.radius + vector_norm(p - self.center)


Domain = Ball | Box | FreeBall


@dataclass(frozen=True)
class ProductDomain:
    """Cartesian product X x Y acting on concatenated points z = (x, y)."""

    dom_x: Domain
    dom_y: Domain

    @property
    def dx(self) -> int:
        return self.dom_x.dim

    @property
    def dim(self) -> int:
        return self.dom_x.dim + self.dom_y.dim

    def split(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return z[: self.dx], z[self.dx :]

    def project(self, z: np.ndarray) -> np.ndarray:
        if z.shape[0] != self.dim:
            raise DimensionMismatch(f"point dim {z.shape[0]} != domain dim {self.dim}")
        x, y = self.split(z)
        return np.concatenate([self.dom_x.project(x), self.dom_y.project(y)])

    def contains(self, z: np.ndarray, slack: float = 1e-12) -> bool:
        x, y = self.split(z)
        return self.dom_x.contains(x, slack) and self.dom_y.contains(y, slack)

    def strictly_inside(self, z: np.ndarray, margin: float) -> bool:
        x, y = self.split(z)
        return self.dom_x.strictly_inside(x, margin) and self.dom_y.strictly_inside(
            y, margin
        )

    def diameter(self) -> float:
        return float(np.hypot(self.dom_x.diameter(), self.dom_y.diameter()))

    def max_block_diameter(self) -> float:
        return max(self.dom_x.diameter(), self.dom_y.diameter())

    def sup_distance(self, z: np.ndarray) -> float:
        x, y = self.split(z)
        return float(
            np.hypot(self.dom_x.sup_distance(x), self.dom_y.sup_distance(y))
        )


def project(dom, p: np.ndarray) -> np.ndarray:
    """Euclidean projection onto a domain (idempotent, non-expansive)."""
    return dom.project(p)
