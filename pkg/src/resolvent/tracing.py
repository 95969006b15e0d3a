"""Audit-trace records for every auxiliary equation solved along a reduction."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class TraceStage:
    """One auxiliary equation: what was solved, how big, how well."""

    name: str
    auxiliary_degree: int
    residual: float
    seed_used: int
    subspace_dims: tuple | None = None

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "auxiliary_degree": self.auxiliary_degree,
            "residual": self.residual,
            "seed_used": self.seed_used,
        }
        if self.subspace_dims is not None:
            out["subspace_dims"] = list(self.subspace_dims)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "TraceStage":
        dims = data.get("subspace_dims")
        return cls(
            name=data["name"],
            auxiliary_degree=int(data["auxiliary_degree"]),
            residual=float(data["residual"]),
            seed_used=int(data["seed_used"]),
            subspace_dims=tuple(dims) if dims is not None else None,
        )
