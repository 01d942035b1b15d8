"""The record emitted for every evaluated bound."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

# which infimum a bound estimates from below
TARGETS = ("L", "L^d", "L^com", "L^energy", "L^qc")


@dataclass(frozen=True)
class BoundReport:
    """One evaluated local lower bound.

    ``terms`` holds the signed additive contributions, so that
    ``sum(terms.values()) == raw_value``. ``aux`` carries the remaining
    intermediate scalars (``r_eps``, ``F_value``, ``tail_error``, ...).
    """

    bound_id: str
    epsilon: float
    raw_value: float
    terms: dict = field(default_factory=dict)
    aux: dict = field(default_factory=dict)
    target: str = "L"
    faithful: bool = True
    note: str = ""

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ValueError(f"unknown target {self.target!r}")

    @property
    def value(self) -> float:
        # every functional bounded here is nonnegative, so clamping stays sound
        return max(0.0, self.raw_value)

    @property
    def clamped(self) -> bool:
        return self.raw_value < 0.0

    def recompute(self) -> float:
        return math.fsum(self.terms.values())

    def to_dict(self, clamp: bool = True) -> dict:
        return {
            "bound_id": self.bound_id,
            "epsilon": self.epsilon,
            "value": self.value if clamp else self.raw_value,
            "raw_value": self.raw_value,
            "clamped": self.clamped,
            "target": self.target,
            "faithful": self.faithful,
            "terms": dict(self.terms),
            "aux": dict(self.aux),
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BoundReport":
        return cls(
            bound_id=data["bound_id"],
            epsilon=float(data["epsilon"]),
            raw_value=float(data["raw_value"]),
            terms={k: float(v) for k, v in data.get("terms", {}).items()},
            aux={k: float(v) for k, v in data.get("aux", {}).items()},
            target=data.get("target", "L"),
            faithful=bool(data.get("faithful", True)),
            note=data.get("note", ""),
        )


def make_report(bound_id: str, eps: float, terms: dict, *, aux=None,
                target: str = "L", faithful: bool = True, note: str = "") -> BoundReport:
    """Build a report whose raw value is the exact sum of ``terms``."""
    return BoundReport(
        bound_id=bound_id,
        epsilon=float(eps),
        raw_value=math.fsum(terms.values()),
        terms={k: float(v) for k, v in terms.items()},
        aux={k: float(v) for k, v in (aux or {}).items()},
        target=target,
        faithful=faithful,
        note=note,
    )


def by_id(reports) -> dict:
    return {r.bound_id: r for r in reports}
