"""Glue: from a run configuration to a solved fixed point and its microscope."""
from __future__ import annotations

from dataclasses import dataclass

from .config import RunConfig
from .errors import DomainEscape
from .ifs import (BaseRegion, Scalings, WeightedMetric, base_region, fit_metric,
                  microscope)
from .renorm import degree_continuation
from .twistmap import ImplicitMap

DOMAIN_GROWTH = 1.25
DOMAIN_RETRIES = 2


def solve(config=None):
    """Degree continuation under ``config``.

    If a midpoint function leaves the trusted square, the square is enlarged
    by ``DOMAIN_GROWTH`` and the continuation rerun, at most
    ``DOMAIN_RETRIES`` times.  Returns ``(gen, report, path)`` where
    ``path`` lists the ``(gen, report)`` pair of every degree.
    """
    config = RunConfig() if config is None else config
    lo, hi = config.trusted_domain
    for attempt in range(DOMAIN_RETRIES + 1):
        try:
            path = degree_continuation(config.degree_schedule, config.seed_params,
                                       config.tolerances, (lo, hi))
            return path[-1][0], path[-1][1], path
        except DomainEscape:
            if attempt == DOMAIN_RETRIES:
                raise
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo) * DOMAIN_GROWTH
            lo, hi = mid - half, mid + half


@dataclass(frozen=True)
class Microscope:
    """Everything the geometric stages need about a solved fixed point."""

    gen: object
    scal: Scalings
    m: ImplicitMap
    region: BaseRegion
    metric: WeightedMetric

    @property
    def diam(self):
        """Diameter of the base region in the adapted metric."""
        return self.region.diameter(self.metric)

    @property
    def untranslated(self):
        return ImplicitMap(self.gen)


def prepare(gen, base_level=6, pad=0.2, grid=12):
    scal, m = microscope(gen)
    region = base_region(scal, m, base_level, pad, grid)
    metric = fit_metric(scal, m, region.sample())
    return Microscope(gen, scal, m, region, metric)
