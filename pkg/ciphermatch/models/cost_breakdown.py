from __future__ import annotations

from dataclasses import dataclass, field

from ciphermatch.models.workload import Workload

PHASES: tuple[str, ...] = ("storage_read", "io_transfer", "dram_transfer", "compute", "index_gen")


@dataclass(slots=True, frozen=True)
class PhaseCost:
    latency_ns: float = 0.0
    energy_nj: float = 0.0


@dataclass(slots=True, frozen=True)
class CostBreakdown:
    system: str
    workload: Workload
    phases: dict[str, PhaseCost] = field(default_factory=dict)
    assumptions: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        unknown = set(self.phases) - set(PHASES)
        if unknown:
            raise ValueError(f"unknown cost phases: {', '.join(sorted(unknown))}")

        object.__setattr__(self, "phases", {name: self.phases.get(name, PhaseCost()) for name in PHASES})

    @property
    def total_latency_ns(self) -> float:
        return sum(p.latency_ns for p in self.phases.values())

    @property
    def total_energy_nj(self) -> float:
        return sum(p.energy_nj for p in self.phases.values())

    def as_dict(self) -> dict:
        return {
            "system": self.system,
            **self.workload.as_dict(),
            "phases": {name: {"latency_ns": p.latency_ns, "energy_nj": p.energy_nj} for name, p in self.phases.items()},
            "latency_ns": self.total_latency_ns,
            "energy_nj": self.total_energy_nj,
            "assumptions": list(self.assumptions),
        }
