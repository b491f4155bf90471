"""Run configuration shared by the builder, the verifiers and the CLI."""

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Config:
    k: int = 1
    stages: int = 3
    breakpoints: int = 8
    depth: int = 3
    count: int = 64
    min_hits: int = 3
    seed: int = 0
    horizon_cap: int | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.stages < 1:
            raise ValueError("stages must be >= 1")
        if self.breakpoints < 3:
            raise ValueError("breakpoints must be >= 3")
        if self.depth < 1 or self.count < 1:
            raise ValueError("closure depth and count must be >= 1")
        if self.min_hits < 1:
            raise ValueError("min_hits must be >= 1")

    def with_updates(self, **kw):
        return replace(self, **kw)

    def to_json(self):
        return {
            "k": self.k,
            "stages": self.stages,
            "breakpoints": self.breakpoints,
            "depth": self.depth,
            "count": self.count,
            "min_hits": self.min_hits,
            "seed": self.seed,
            "horizon_cap": self.horizon_cap,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            k=int(obj["k"]),
            stages=int(obj["stages"]),
            breakpoints=int(obj["breakpoints"]),
            depth=int(obj["depth"]),
            count=int(obj["count"]),
            min_hits=int(obj["min_hits"]),
            seed=int(obj["seed"]),
            horizon_cap=obj.get("horizon_cap"),
        )
