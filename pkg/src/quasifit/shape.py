"""Shape restrictions: curvature x monotonicity."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidParams
from .geometry import LOWER, PLAIN, UPPER

CURVATURES = ("quasiconvex", "quasiconcave")
MONOTONICITIES = ("decreasing", "increasing", "none")


@dataclass(frozen=True)
class ShapeSpec:
    curvature: str = "quasiconvex"
    monotone: str = "decreasing"

    def __post_init__(self):
        if self.curvature not in CURVATURES:
            raise InvalidParams(f"curvature must be one of {CURVATURES}, got {self.curvature!r}")
        if self.monotone not in MONOTONICITIES:
            raise InvalidParams(f"monotone must be one of {MONOTONICITIES}, got {self.monotone!r}")

    @classmethod
    def parse(cls, text: str) -> "ShapeSpec":
        """Parse forms like ``quasiconvex-decreasing`` or ``quasiconcave``."""
        parts = text.strip().lower().replace("_", "-").split("-")
        if len(parts) == 1:
            return cls(parts[0], "none")
        return cls(parts[0], parts[1])

    def __str__(self):
        return f"{self.curvature}-{self.monotone}"

    @property
    def is_convex(self) -> bool:
        return self.curvature == "quasiconvex"

    def negated(self) -> "ShapeSpec":
        """Shape of -f when f has this shape."""
        flip = {"decreasing": "increasing", "increasing": "decreasing", "none": "none"}
        curv = "quasiconcave" if self.is_convex else "quasiconvex"
        return ShapeSpec(curv, flip[self.monotone])

    @property
    def orthant(self) -> int:
        """Orthant used by the hull tests of a *quasiconvex* shape."""
        return {"decreasing": UPPER, "increasing": LOWER, "none": PLAIN}[self.monotone]

    def canonical(self) -> tuple[float, float, "ShapeSpec"]:
        """(y_sign, x_sign, canonical shape).

        Fitting this shape to (X, Y) equals ``y_sign *`` the canonical fit on
        ``(x_sign * X, y_sign * Y)``; the canonical shape is
        quasiconvex-decreasing or quasiconvex-none.
        """
        y_sign = 1.0 if self.is_convex else -1.0
        base = self if self.is_convex else self.negated()
        if base.monotone == "increasing":
            return y_sign, -1.0, ShapeSpec("quasiconvex", "decreasing")
        return y_sign, 1.0, base
