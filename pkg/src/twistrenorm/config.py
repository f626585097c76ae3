"""Run configuration and the single table of numerical tolerances.

Modules read their defaults from :data:`TOL` so that every threshold used
anywhere in the package can be inspected (and overridden from a config
file) in one place.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

# Uniform contraction bound for the two rescalings of the microscope.
THETA = 0.272


@dataclass(frozen=True)
class Tolerances:
    # fixed point solver gates
    residual: float = 1e-10
    gauge: float = 1e-12
    truncation: float = 1e-10
    # midpoint equation
    midpoint_newton: float = 1e-13
    midpoint_grid: float = 1e-11
    singular_derivative: float = 1e-8
    # normalizations
    z_normalization: float = 1e-6
    mu_identity: float = 1e-9
    # implicit map solve
    map_newton: float = 1e-12
    singular_twist: float = 1e-10
    bisection_width: float = 1e-3
    determinant: float = 1e-9
    reversibility: float = 1e-9
    roundtrip: float = 1e-10
    fd_relative: float = 1e-5
    # microscope and curves
    contraction_slack: float = 1e-3
    hull_inflation: float = 1e-9
    lipschitz_slack: float = 1e-9
    # tip derivative chain and cones
    chain_relative: float = 1e-6
    sign_margin: float = 1e-3
    cone_margin: float = 0.10
    clash_angle_deg: float = 5.0

    def positive(self) -> bool:
        return all(v > 0 for v in dataclasses.asdict(self).values())


TOL = Tolerances()


@dataclass(frozen=True)
class SeedScan:
    """Seed family for the low-degree solve.

    The seed is a quadratic generating function ``x - 1 + b X + c X**2 +
    cross * x X`` whose ``b, c`` are tuned to the guessed scalings; ``cross``
    is scanned over ``cross_values`` until Gauss-Newton converges.
    """

    lam0: float = -0.25
    mu0: float = 0.0625
    cross_values: tuple = (0.0, -0.5, 0.5, -1.0, 1.0, -1.5, 1.5, -2.0, 2.0)


@dataclass(frozen=True)
class RunConfig:
    degree_schedule: tuple = (6, 10, 14, 20)
    trusted_domain: tuple = (-1.2, 1.2)
    tolerances: Tolerances = field(default_factory=Tolerances)
    max_level: int = 24
    box_level: int = 10
    cloud_level: int = 12
    curve_iters: int = 12
    clash_depth: int = 20
    seed_params: SeedScan = field(default_factory=SeedScan)

    def __post_init__(self):
        sched = tuple(self.degree_schedule)
        if not sched or any(b <= a for a, b in zip(sched, sched[1:])):
            raise ValueError(f"degree schedule must be non-empty and increasing: {sched}")
        lo, hi = self.trusted_domain
        if not lo < hi:
            raise ValueError("trusted domain must satisfy lo < hi")
        if not self.tolerances.positive():
            raise ValueError("all tolerances must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        if "tolerances" in data:
            data["tolerances"] = Tolerances(**data["tolerances"])
        if "seed_params" in data:
            sp = dict(data["seed_params"])
            if "cross_values" in sp:
                sp["cross_values"] = tuple(sp["cross_values"])
            data["seed_params"] = SeedScan(**sp)
        for key in ("degree_schedule", "trusted_domain"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)
