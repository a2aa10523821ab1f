"""
Provincial reduction allocation from business-as-usual vs decarbonization peaks.

A province's decarbonization potential is the (non-negative) gap between a
BAU peak measure and a decarbonization peak measure.  Allocations either hand
each province its own potential or rescale potentials to a national target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .distribution import PeakDistribution
from .emission_core import Peak, ValidationError
from .scenario import RegionMapping

BASES = ("dynamic_mean_vs_dec_static", "static_vs_static", "dynamic_mean_vs_dynamic_mean")
STRATEGIES = ("potential_raw", "potential_proportional")
DEFAULT_BASIS = "dynamic_mean_vs_dec_static"
DEFAULT_STRATEGY = "potential_raw"


@dataclass
class ProvincePeakSummary:
    province: str
    bau_static_peak: Peak
    dec_static_peak: Peak
    bau_dynamic: PeakDistribution | None = None
    dec_dynamic: PeakDistribution | None = None

    def __post_init__(self):
        for name in ("bau_static_peak", "dec_static_peak"):
            if getattr(self, name).value < 0:
                raise ValidationError(f"{self.province}: {name} must be >= 0")
        for name in ("bau_dynamic", "dec_dynamic"):
            d = getattr(self, name)
            if d is not None and d.mean_value < 0:
                raise ValidationError(f"{self.province}: {name} mean must be >= 0")


def decarbonization_potential(
    summary: ProvincePeakSummary, basis: str = DEFAULT_BASIS
) -> float:
    """BAU peak measure minus decarbonization peak measure, floored at 0."""
    if basis == "static_vs_static":
        bau, dec = summary.bau_static_peak.value, summary.dec_static_peak.value
    elif basis == "dynamic_mean_vs_dec_static":
        if summary.bau_dynamic is None:
            raise ValidationError(f"{summary.province}: basis {basis!r} needs bau_dynamic")
        bau, dec = summary.bau_dynamic.mean_value, summary.dec_static_peak.value
    elif basis == "dynamic_mean_vs_dynamic_mean":
        for name in ("bau_dynamic", "dec_dynamic"):
            if getattr(summary, name) is None:
                raise ValidationError(f"{summary.province}: basis {basis!r} needs {name}")
        bau, dec = summary.bau_dynamic.mean_value, summary.dec_dynamic.mean_value
    else:
        raise ValidationError(f"basis must be one of {BASES}, got {basis!r}")
    return max(0.0, bau - dec)


@dataclass(frozen=True)
class RegionRollup:
    total: float
    mean: float | None
    provinces: int


@dataclass
class AllocationScheme:
    strategy: str
    basis: str
    potentials: dict[str, float]
    reductions: dict[str, float]
    national_target: float | None = None
    regional: dict[str, RegionRollup] = field(default_factory=dict)

    def ranked(self) -> list[tuple[str, float]]:
        """Provinces by descending reduction, ties broken by name."""
        return sorted(self.reductions.items(), key=lambda kv: (-kv[1], kv[0]))

    @property
    def total(self) -> float:
        return math.fsum(self.reductions.values())


def regional_rollup(scheme: AllocationScheme, region_map: RegionMapping, regions=None):
    """Per-region total, mean and member count of allocated reductions.

    ``regions`` lists labels to report; labels without members get a total of
    0 and no mean.
    """
    members: dict[str, list[float]] = {r: [] for r in (regions or region_map.regions())}
    for province, amount in scheme.reductions.items():
        members.setdefault(region_map.region_of(province), []).append(amount)
    out = {}
    for region in sorted(members):
        vals = members[region]
        total = math.fsum(vals)
        out[region] = RegionRollup(total, total / len(vals) if vals else None, len(vals))
    return out


def allocate(
    summaries,
    strategy: str = DEFAULT_STRATEGY,
    national_target: float | None = None,
    region_map: RegionMapping | None = None,
    basis: str = DEFAULT_BASIS,
) -> AllocationScheme:
    """Allocate reductions across provinces.

    ``potential_raw`` gives each province its own potential and takes no
    target.  ``potential_proportional`` rescales the potentials so they sum
    to ``national_target`` while keeping their ratios.
    """
    if strategy not in STRATEGIES:
        raise ValidationError(f"strategy must be one of {STRATEGIES}, got {strategy!r}")
    by_name = {}
    for s in summaries:
        if s.province in by_name:
            raise ValidationError(f"duplicate summary for province {s.province!r}")
        by_name[s.province] = s
    if region_map is not None:
        missing = sorted(set(region_map.provinces) - set(by_name))
        if missing:
            raise ValidationError(f"no peak summary for provinces {missing}")
        for p in by_name:
            region_map.region_of(p)
    potentials = {p: decarbonization_potential(by_name[p], basis) for p in sorted(by_name)}

    if strategy == "potential_raw":
        if national_target is not None:
            raise ValidationError("potential_raw does not take a national target")
        reductions = dict(potentials)
    else:
        if national_target is None:
            raise ValidationError("potential_proportional needs a national target")
        if not national_target >= 0:
            raise ValidationError(f"national target must be >= 0, got {national_target!r}")
        total = math.fsum(potentials.values())
        if total <= 0:
            raise ValidationError("all decarbonization potentials are zero; cannot meet a target")
        reductions = {p: national_target * v / total for p, v in potentials.items()}

    scheme = AllocationScheme(strategy, basis, potentials, reductions, national_target)
    if region_map is not None:
        scheme.regional = regional_rollup(scheme, region_map)
    return scheme
