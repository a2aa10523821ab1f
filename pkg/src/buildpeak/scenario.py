"""
Scenario definitions and static projections.

A scenario fixes, for every region, a short list of (year, value) anchors
for each Kaya parameter.  :func:`expand` turns the anchors into dense yearly
series and :func:`project_static` evaluates energy and emissions on them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .emission_core import (
    BIPG_SCOPES,
    SHARE_TOLERANCE,
    EmissionFactors,
    EmissionTrajectory,
    EnergyMix,
    KayaInputs,
    KG_PER_MT,
    Peak,
    ValidationError,
    composite_intensity,
    detect_peak,
)

MIN_YEAR = 2000
MAX_YEAR = 2060

#: Parameters every region must define, grouped by Kaya factor.
PARAMETER_FAMILIES = {
    "population": ("population",),
    "floor_area": ("floor_area_per_capita",),
    "energy_intensity": ("energy_intensity",),
    "mix": (
        "electrification_rate",
        "coal_share",
        "gas_share",
        "self_generation_share",
    ),
    "factors": ("ef_electricity", "ef_coal", "ef_gas"),
}
PARAMETERS = tuple(p for group in PARAMETER_FAMILIES.values() for p in group)
SHARE_PARAMETERS = frozenset(PARAMETER_FAMILIES["mix"])

#: Units of each parameter column in anchor files.
PARAMETER_UNITS = {
    "population": "persons",
    "floor_area_per_capita": "m2/person",
    "energy_intensity": "kgce/m2/yr",
    "electrification_rate": "fraction",
    "coal_share": "fraction",
    "gas_share": "fraction",
    "self_generation_share": "fraction",
    "ef_electricity": "kgCO2/kgce",
    "ef_coal": "kgCO2/kgce",
    "ef_gas": "kgCO2/kgce",
}

SCENARIO_KINDS = ("BAU", "decarbonization")
INTERPOLATIONS = ("linear", "compound-growth")

REGION_LABELS = (
    "North",
    "Northeast",
    "East",
    "Central",
    "South",
    "Southwest",
    "Northwest",
)


@dataclass(frozen=True)
class ParameterAnchor:
    year: int
    value: float

    def __post_init__(self):
        if not MIN_YEAR <= self.year <= MAX_YEAR:
            raise ValidationError(
                f"anchor year {self.year} outside [{MIN_YEAR}, {MAX_YEAR}]"
            )


@dataclass
class RegionMapping:
    """Province -> region label.  Labels are free-form strings."""

    provinces: dict[str, str]

    def __post_init__(self):
        self.provinces = dict(sorted(self.provinces.items()))

    def region_of(self, province: str) -> str:
        try:
            return self.provinces[province]
        except KeyError:
            raise ValidationError(
                f"province {province!r} is not in the region map"
            ) from None

    def regions(self) -> list[str]:
        return sorted(set(self.provinces.values()))

    def members(self, region: str) -> list[str]:
        return sorted(p for p, r in self.provinces.items() if r == region)

    def __contains__(self, province):
        return province in self.provinces

    def __len__(self):
        return len(self.provinces)


@dataclass
class ScenarioSpec:
    """A named scenario: per-region anchor lists plus interpolation rules.

    ``anchors`` maps region -> parameter -> anchors in increasing year order.
    ``interpolation_overrides`` optionally switches individual parameters to a
    different interpolation mode than the scenario default (useful when a
    share anchored at zero rules out compound growth).
    """

    name: str
    kind: str
    horizon: tuple[int, int]
    anchors: dict[str, dict[str, tuple[ParameterAnchor, ...]]]
    interpolation: str = "linear"
    bipg_scope: str = "coal_only"
    interpolation_overrides: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.horizon = (int(self.horizon[0]), int(self.horizon[1]))
        self.anchors = {
            region: {p: tuple(a) for p, a in params.items()}
            for region, params in sorted(self.anchors.items())
        }
        problems = scenario_problems(self)
        if problems:
            raise ValidationError("; ".join(problems))

    @property
    def regions(self) -> list[str]:
        return list(self.anchors)

    @property
    def years(self) -> np.ndarray:
        return np.arange(self.horizon[0], self.horizon[1] + 1)

    def mode_for(self, parameter: str) -> str:
        return self.interpolation_overrides.get(parameter, self.interpolation)


def scenario_problems(spec: ScenarioSpec) -> list[str]:
    """Every invariant violation of a scenario, as human-readable strings."""
    out = []
    first, last = spec.horizon
    if spec.kind not in SCENARIO_KINDS:
        out.append(f"kind must be one of {SCENARIO_KINDS}, got {spec.kind!r}")
    if not (MIN_YEAR <= first <= last <= MAX_YEAR):
        out.append(
            f"horizon must satisfy {MIN_YEAR} <= first <= last <= {MAX_YEAR}, "
            f"got {spec.horizon}"
        )
    if spec.bipg_scope not in BIPG_SCOPES:
        out.append(f"bipg_scope must be one of {BIPG_SCOPES}, got {spec.bipg_scope!r}")
    for mode in (spec.interpolation, *spec.interpolation_overrides.values()):
        if mode not in INTERPOLATIONS:
            out.append(f"interpolation must be one of {INTERPOLATIONS}, got {mode!r}")
    for p in spec.interpolation_overrides:
        if p not in PARAMETERS:
            out.append(f"interpolation_overrides names unknown parameter {p!r}")
    if not spec.anchors:
        out.append("scenario defines no regions")
    for region, params in spec.anchors.items():
        for p in PARAMETERS:
            if not params.get(p):
                out.append(f"region {region!r}: parameter {p!r} has no anchors")
        for p, anchors in params.items():
            where = f"region {region!r}, parameter {p!r}"
            if p not in PARAMETERS:
                out.append(f"{where}: unknown parameter")
                continue
            years = [a.year for a in anchors]
            if any(b <= a for a, b in zip(years, years[1:])):
                out.append(f"{where}: anchor years must be strictly increasing")
            for a in anchors:
                if not first <= a.year <= last:
                    out.append(
                        f"{where}: anchor year {a.year} outside horizon {spec.horizon}"
                    )
                if not np.isfinite(a.value) or a.value < 0:
                    out.append(f"{where}, year {a.year}: value must be >= 0")
                elif p in SHARE_PARAMETERS and a.value > 1:
                    out.append(f"{where}, year {a.year}: share must lie in [0, 1]")
                if spec.mode_for(p) == "compound-growth" and not a.value > 0:
                    out.append(
                        f"{where}, year {a.year}: compound-growth interpolation "
                        "requires strictly positive anchors"
                    )
    return out


def interpolate(anchors, years, mode: str = "linear") -> np.ndarray:
    """Evaluate an anchor list on integer ``years``.

    Values between two anchors follow a straight line (``linear``) or a
    constant growth rate (``compound-growth``).  Outside the anchored range
    the nearest anchor value is held.  Anchor years map to their anchor value
    exactly.
    """
    years = np.asarray(years)
    ay = np.array([a.year for a in anchors], dtype=float)
    av = np.array([a.value for a in anchors], dtype=float)
    out = np.empty(years.shape, dtype=float)
    out[years <= ay[0]] = av[0]
    out[years >= ay[-1]] = av[-1]
    for (y0, v0), (y1, v1) in zip(zip(ay, av), zip(ay[1:], av[1:])):
        inside = (years > y0) & (years < y1)
        if not inside.any():
            continue
        frac = (years[inside] - y0) / (y1 - y0)
        if mode == "linear":
            seg = v0 + (v1 - v0) * frac
        elif mode == "compound-growth":
            seg = v0 * (v1 / v0) ** frac
        else:
            raise ValidationError(f"unknown interpolation mode {mode!r}")
        # rounding must never push a value past its bracketing anchors
        out[inside] = np.clip(seg, min(v0, v1), max(v0, v1))
    for y, v in zip(ay, av):
        out[years == y] = v
    return out


class ParameterTrajectory:
    """Dense yearly Kaya inputs for one region."""

    def __init__(self, region: str, start_year: int, series: Mapping[str, np.ndarray]):
        self.region = region
        self.start_year = int(start_year)
        missing = [p for p in PARAMETERS if p not in series]
        if missing:
            raise ValidationError(f"region {region!r}: missing series {missing}")
        self.series = {}
        for p in PARAMETERS:
            arr = np.array(series[p], dtype=float)
            arr.setflags(write=False)
            self.series[p] = arr
        n = {arr.size for arr in self.series.values()}
        if len(n) != 1:
            raise ValidationError(f"region {region!r}: series lengths differ")
        self._check()

    def _check(self):
        years = self.years
        for p, arr in self.series.items():
            bad = ~(arr >= 0)
            if p in SHARE_PARAMETERS:
                bad |= arr > 1
            if bad.any():
                raise ValidationError(
                    f"region {self.region!r}, parameter {p!r}, year "
                    f"{int(years[bad.argmax()])}: value {float(arr[bad.argmax()])!r} out of range"
                )
        s = self.series
        total = s["electrification_rate"] + s["coal_share"] + s["gas_share"]
        over = total > 1 + SHARE_TOLERANCE
        if over.any():
            raise ValidationError(
                f"region {self.region!r}, parameter 'mix', year "
                f"{int(years[over.argmax()])}: electricity + coal + gas shares "
                f"sum to {float(total[over.argmax()])!r} > 1"
            )

    @property
    def years(self) -> np.ndarray:
        return np.arange(self.start_year, self.start_year + len(self))

    def __len__(self):
        return self.series["population"].size

    def inputs_at(self, year: int) -> KayaInputs:
        i = year - self.start_year
        if not 0 <= i < len(self):
            raise KeyError(year)
        s = {p: float(v[i]) for p, v in self.series.items()}
        return KayaInputs(
            population=s["population"],
            floor_area_per_capita=s["floor_area_per_capita"],
            energy_intensity=s["energy_intensity"],
            mix=EnergyMix(
                s["electrification_rate"],
                s["coal_share"],
                s["gas_share"],
                s["self_generation_share"],
            ),
            factors=EmissionFactors(s["ef_electricity"], s["ef_coal"], s["ef_gas"]),
        )

    def energy(self) -> np.ndarray:
        """Yearly energy use in Mtce."""
        s = self.series
        return s["population"] * s["floor_area_per_capita"] * s["energy_intensity"] / KG_PER_MT

    def intensity(self, bipg_scope: str = "coal_only") -> np.ndarray:
        s = self.series
        return composite_intensity(
            s["electrification_rate"],
            s["coal_share"],
            s["gas_share"],
            s["self_generation_share"],
            s["ef_electricity"],
            s["ef_coal"],
            s["ef_gas"],
            bipg_scope,
        )

    def emissions(self, bipg_scope: str = "coal_only") -> np.ndarray:
        """Yearly emissions in MtCO2."""
        return self.energy() * self.intensity(bipg_scope)


def expand(spec: ScenarioSpec) -> dict[str, ParameterTrajectory]:
    """Dense yearly parameter series for every region, keyed in sorted order."""
    years = spec.years
    out = {}
    for region in sorted(spec.anchors):
        params = spec.anchors[region]
        series = {p: interpolate(params[p], years, spec.mode_for(p)) for p in PARAMETERS}
        out[region] = ParameterTrajectory(region, spec.horizon[0], series)
    return out


@dataclass
class StaticProjection:
    scenario: str
    kind: str
    emissions: dict[str, EmissionTrajectory]
    energy: dict[str, EmissionTrajectory]
    national_emissions: EmissionTrajectory
    national_energy: EmissionTrajectory

    @property
    def regions(self) -> list[str]:
        return list(self.emissions)

    @property
    def start_year(self) -> int:
        return self.national_emissions.start_year

    @property
    def peaks(self) -> dict[str, Peak]:
        return {r: detect_peak(t) for r, t in self.emissions.items()}

    @property
    def energy_peaks(self) -> dict[str, Peak]:
        return {r: detect_peak(t) for r, t in self.energy.items()}

    @property
    def national_peak(self) -> Peak:
        return detect_peak(self.national_emissions)

    @property
    def national_energy_peak(self) -> Peak:
        return detect_peak(self.national_energy)


def project_static(spec: ScenarioSpec) -> StaticProjection:
    """Static energy and emission trajectories, per region and national."""
    trajectories = expand(spec)
    first = spec.horizon[0]
    emissions, energy = {}, {}
    national_c = np.zeros(len(spec.years))
    national_e = np.zeros(len(spec.years))
    for region, traj in trajectories.items():
        c = traj.emissions(spec.bipg_scope)
        e = traj.energy()
        emissions[region] = EmissionTrajectory(first, c, "MtCO2")
        energy[region] = EmissionTrajectory(first, e, "Mtce")
        national_c += c
        national_e += e
    return StaticProjection(
        scenario=spec.name,
        kind=spec.kind,
        emissions=emissions,
        energy=energy,
        national_emissions=EmissionTrajectory(first, national_c, "MtCO2"),
        national_energy=EmissionTrajectory(first, national_e, "Mtce"),
    )
