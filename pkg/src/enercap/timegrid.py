"""Multi-resolution temporal indexing.

Carriers are balanced at different temporal resolutions; the grid maps base
timesteps onto each carrier's contiguous, equal-length blocks.  Horizons
must be divisible by every configured resolution so that balance blocks stay
uniform.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class TimeGrid:
    horizon_hours: int
    resolutions: dict[str, int] = field(default_factory=dict)
    base_step_hours: int = 1

    def block_hours(self, carrier: str) -> int:
        return self.resolutions[carrier]

    def block_count(self, carrier: str) -> int:
        return self.horizon_hours // self.resolutions[carrier]

    def block_of(self, carrier: str, timestep: int) -> int:
        if not 0 <= timestep < self.horizon_hours:
            raise IndexError(f"timestep {timestep} outside [0, {self.horizon_hours})")
        return timestep // self.resolutions[carrier]

    def block_span(self, carrier: str, block: int) -> tuple[int, int]:
        """Half-open [start, stop) range of base timesteps in a block."""
        res = self.resolutions[carrier]
        if not 0 <= block < self.block_count(carrier):
            raise IndexError(f"block {block} outside [0, {self.block_count(carrier)})")
        return block * res, (block + 1) * res


def build(horizon_hours: int, carrier_resolutions: dict[str, int]) -> TimeGrid:
    """Construct a grid; rejects resolutions that do not divide the horizon."""
    if horizon_hours < 1:
        raise ValueError(f"horizon must be >= 1 hour, got {horizon_hours}")
    for carrier, res in carrier_resolutions.items():
        if res < 1:
            raise ValueError(f"carrier {carrier}: resolution must be >= 1 hour, got {res}")
        if horizon_hours % res != 0:
            raise ValueError(
                f"carrier {carrier}: resolution {res} does not divide horizon {horizon_hours}"
            )
    return TimeGrid(horizon_hours, dict(carrier_resolutions))


def block_of(grid: TimeGrid, carrier: str, timestep: int) -> int:
    return grid.block_of(carrier, timestep)
