from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Plan:
    """One scheduled path per robot, all sharing the horizon ``T``."""

    paths: tuple

    def __post_init__(self):
        paths = tuple(tuple(int(v) for v in p) for p in self.paths)
        if paths and len({len(p) for p in paths}) != 1:
            raise ValueError("all robot paths must share one horizon")
        if any(len(p) == 0 for p in paths):
            raise ValueError("paths need at least the t=0 vertex")
        object.__setattr__(self, "paths", paths)

    @property
    def n(self) -> int:
        return len(self.paths)

    @property
    def horizon(self) -> int:
        return len(self.paths[0]) - 1 if self.paths else 0

    def at(self, t: int) -> tuple[int, ...]:
        return tuple(p[t] for p in self.paths)

    def arrival_times(self) -> list[int]:
        """Stabilisation time of each robot: first t after which it never leaves p(T)."""
        out = []
        for p in self.paths:
            t = len(p) - 1
            while t > 0 and p[t - 1] == p[-1]:
                t -= 1
            out.append(t)
        return out

    def lengths(self) -> list[int]:
        return [sum(1 for a, b in zip(p, p[1:]) if a != b) for p in self.paths]

    def trimmed(self) -> "Plan":
        """Drop trailing steps in which nobody moves."""
        T = max(self.arrival_times(), default=0)
        return Plan(tuple(p[: T + 1] for p in self.paths))

    def padded(self, T: int) -> "Plan":
        if T < self.horizon:
            raise ValueError("cannot pad to a shorter horizon")
        return Plan(tuple(p + (p[-1],) * (T - self.horizon) for p in self.paths))

    def concat(self, other: "Plan") -> "Plan":
        """Glue ``other`` after this plan; its first configuration must match our last."""
        if self.at(self.horizon) != other.at(0):
            raise ValueError("stage plans do not join up")
        return Plan(tuple(a + b[1:] for a, b in zip(self.paths, other.paths)))

    @classmethod
    def from_configs(cls, configs) -> "Plan":
        configs = list(configs)
        n = len(configs[0])
        return cls(tuple(tuple(c[i] for c in configs) for i in range(n)))
