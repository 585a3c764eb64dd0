from __future__ import annotations

import enum
from dataclasses import dataclass


class Kind(enum.Enum):
    INSIDE = "inside"
    ON_EDGE = "edge"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class LocateResult:
    kind: Kind
    triangle: int | None = None
    face: int | None = None
    edge_slot: int | None = None
    exact_confirmed: bool = False

    def __post_init__(self):
        if (self.kind is Kind.OUTSIDE) != (self.triangle is None):
            raise ValueError("inside/edge results carry a triangle, outside results do not")
        if (self.kind is Kind.ON_EDGE) != (self.edge_slot is not None):
            raise ValueError("edge_slot is set exactly for on-edge results")

    def same_location(self, other: LocateResult) -> bool:
        return (self.kind, self.triangle, self.face, self.edge_slot) == (
            other.kind,
            other.triangle,
            other.face,
            other.edge_slot,
        )

    def to_line(self) -> str:
        if self.kind is Kind.INSIDE:
            return f"inside {self.face} {self.triangle}"
        if self.kind is Kind.ON_EDGE:
            return f"edge {self.face} {self.triangle} {self.edge_slot}"
        return "outside"


OUTSIDE = LocateResult(Kind.OUTSIDE)
