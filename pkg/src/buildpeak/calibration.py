"""
Synthetic 30-province calibration bundle.

The bundle is built so that the national static peaks land on the headline
figures 890 MtCO2 in 2028 (BAU) and 850 MtCO2 before 2025
(decarbonization).  Construction:

1. Every province gets a target emission curve per scenario: compound growth
   from 40% of its 2020 level in 2000, a power-law rise to its peak, and a
   power-law decline to a 2060 level.  Peak values, peak years and
   BAU-minus-decarbonization gaps are set per province from the table below.
2. All levels are multiplied by one common scale chosen in closed form so
   the national BAU sum equals 890 in 2028 (the curves are linear in their
   levels, so this does not move any peak year).
3. The decarbonization rise exponent is solved with Brent's method so the
   national decarbonization maximum equals 850.
4. Population, floor area, energy mix and emission factors use a few
   plausible anchors.  Energy intensity is anchored every year and solved
   from ``e = C / (P f K)`` so the Kaya product reproduces each target curve.
5. Rounding in the provincial products leaves the national peaks a few ulps
   off; the largest province's energy-intensity anchor in the peak year is
   stepped one ulp at a time until the national sum is exact.

Regenerate the shipped files with ``python -m buildpeak.calibration DIR``.
"""

from __future__ import annotations

import sys
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .data_io import DatasetBundle, write_bundle
from .emission_core import KG_PER_MT, composite_intensity
from .monte_carlo import UncertaintyConfig
from .scenario import (
    ParameterAnchor,
    RegionMapping,
    ScenarioSpec,
    interpolate,
    project_static,
)

FIRST_YEAR, LAST_YEAR = 2000, 2060
BAU_TARGET = (2028, 890.0)
DEC_TARGET_VALUE = 850.0
DEC_PEAK_BEFORE = 2025

BAU_RISE, BAU_FALL = 3.0, 1.2
DEC_FALL = 1.2
HISTORY_RATIO = 0.4  # 2000 level relative to 2020
BASE_FRACTION = 0.9  # 2020 level relative to the decarbonization peak
BAU_2060_FRACTION = 0.7
DEC_2060_FRACTION = 0.15
GAP_FACTOR = 0.75

# province, region, population 2020 (million), floor area 2020 (m2/person),
# BAU peak (MtCO2), BAU peak year, BAU-DEC gap before GAP_FACTOR, DEC peak year
PROVINCES = [
    ("Beijing", "North", 21.9, 18.0, 38.0, 2025, 1.5, 2022),
    ("Tianjin", "North", 13.9, 12.0, 22.0, 2026, 1.0, 2022),
    ("Hebei", "North", 74.6, 9.0, 61.0, 2027, 3.2, 2023),
    ("Shanxi", "North", 34.9, 9.0, 24.0, 2022, 1.2, 2021),
    ("Inner Mongolia", "North", 24.0, 9.0, 18.0, 2022, 0.3, 2021),
    ("Liaoning", "Northeast", 42.6, 9.0, 32.0, 2023, 1.4, 2021),
    ("Jilin", "Northeast", 24.1, 9.0, 15.0, 2023, 0.2, 2021),
    ("Heilongjiang", "Northeast", 31.9, 9.0, 21.0, 2030, 1.1, 2025),
    ("Shanghai", "East", 24.9, 16.0, 36.0, 2023, 2.0, 2021),
    ("Jiangsu", "East", 84.7, 11.0, 58.0, 2030, 3.6, 2024),
    ("Zhejiang", "East", 64.6, 11.0, 50.0, 2031, 3.0, 2024),
    ("Anhui", "East", 61.0, 9.0, 30.0, 2033, 1.9, 2025),
    ("Fujian", "East", 41.5, 9.0, 27.0, 2032, 1.3, 2023),
    ("Jiangxi", "East", 45.2, 9.0, 19.0, 2039, 1.5, 2025),
    ("Shandong", "East", 101.5, 9.0, 68.9, 2029, 4.8, 2024),
    ("Henan", "Central", 99.4, 9.0, 45.0, 2036, 4.7, 2025),
    ("Hubei", "Central", 57.8, 9.0, 30.0, 2028, 1.4, 2022),
    ("Hunan", "Central", 66.4, 9.0, 29.0, 2034, 1.7, 2025),
    ("Guangdong", "South", 126.0, 10.0, 62.5, 2022, 1.1, 2021),
    ("Guangxi", "South", 50.1, 9.0, 21.0, 2033, 1.2, 2025),
    ("Hainan", "South", 10.1, 9.0, 9.0, 2040, 0.8, 2025),
    ("Chongqing", "Southwest", 32.1, 9.0, 20.0, 2030, 1.0, 2022),
    ("Sichuan", "Southwest", 83.7, 9.0, 40.0, 2035, 2.5, 2022),
    ("Guizhou", "Southwest", 38.6, 9.0, 17.0, 2046, 1.6, 2021),
    ("Yunnan", "Southwest", 47.2, 9.0, 20.0, 2036, 1.3, 2021),
    ("Shaanxi", "Northwest", 39.5, 9.0, 24.0, 2029, 1.3, 2023),
    ("Gansu", "Northwest", 25.0, 9.0, 12.0, 2031, 0.8, 2022),
    ("Qinghai", "Northwest", 5.9, 9.0, 6.4, 2029, 0.4, 2024),
    ("Ningxia", "Northwest", 7.2, 9.0, 5.9, 2027, 0.3, 2023),
    ("Xinjiang", "Northwest", 25.9, 9.0, 22.0, 2040, 5.6, 2024),
]

# (year, value) anchors shared by every province
POPULATION_PROFILE = [(2000, 0.92), (2020, 1.0), (2035, 0.99), (2060, 0.88)]
FLOOR_AREA_PROFILE = [(2000, 0.45), (2020, 1.0), (2060, 1.45)]
MIX = {
    "BAU": {
        "electrification_rate": [(2000, 0.45), (2020, 0.62), (2060, 0.80)],
        "coal_share": [(2000, 0.30), (2020, 0.15), (2060, 0.05)],
        "gas_share": [(2000, 0.08), (2020, 0.13), (2060, 0.10)],
        "self_generation_share": [(2000, 0.0), (2020, 0.01), (2060, 0.06)],
        "ef_electricity": [(2000, 3.4), (2020, 2.6), (2060, 1.9)],
        "ef_coal": [(2000, 2.66)],
        "ef_gas": [(2000, 1.63)],
    },
    "decarbonization": {
        "electrification_rate": [(2000, 0.45), (2020, 0.62), (2060, 0.95)],
        "coal_share": [(2000, 0.30), (2020, 0.15), (2035, 0.02), (2060, 0.0)],
        "gas_share": [(2000, 0.08), (2020, 0.13), (2060, 0.04)],
        "self_generation_share": [(2000, 0.0), (2020, 0.01), (2060, 0.25)],
        "ef_electricity": [(2000, 3.4), (2020, 2.6), (2060, 0.35)],
        "ef_coal": [(2000, 2.66)],
        "ef_gas": [(2000, 1.63)],
    },
}

UNCERTAINTY = dict(
    seed=20250601,
    mode="aggregate",
    sigma_c=0.25,
    sigma_P=0.03,
    sigma_f=0.05,
    sigma_e=0.05,
    sigma_K=0.08,
    draws=100_000,
)

METADATA = {
    "name": "synthetic-30-province-calibration",
    "source_notes": (
        "Synthetic provincial anchors constructed so national static peaks hit "
        "890 MtCO2 in 2028 (BAU) and 850 MtCO2 before 2025 (decarbonization). "
        "Not observed data."
    ),
    "created": "2026-10-14T00:00:00Z",
}

YEARS = np.arange(FIRST_YEAR, LAST_YEAR + 1)


def target_curve(v2020, peak_year, peak, v2060, rise, fall) -> np.ndarray:
    t = YEARS.astype(float)
    out = np.empty_like(t)
    hist = t <= 2020
    out[hist] = v2020 * HISTORY_RATIO ** ((2020 - t[hist]) / 20)
    up = (t > 2020) & (t <= peak_year)
    out[up] = peak - (peak - v2020) * ((peak_year - t[up]) / (peak_year - 2020)) ** rise
    down = t > peak_year
    out[down] = peak - (peak - v2060) * ((t[down] - peak_year) / (2060 - peak_year)) ** fall
    return out


def _levels(scale):
    for name, region, _, _, bau_peak, bau_year, gap, dec_year in PROVINCES:
        bau = bau_peak * scale
        dec = bau - GAP_FACTOR * gap * scale
        yield name, bau, bau_year, dec, dec_year, BASE_FRACTION * dec


def target_curves(scale: float, dec_rise: float):
    bau, dec = {}, {}
    for name, bp, by, dp, dy, v20 in _levels(scale):
        bau[name] = target_curve(v20, by, bp, BAU_2060_FRACTION * bp, BAU_RISE, BAU_FALL)
        dec[name] = target_curve(v20, dy, dp, DEC_2060_FRACTION * dp, dec_rise, DEC_FALL)
    return bau, dec


def _national(curves) -> np.ndarray:
    total = np.zeros(YEARS.size)
    for name in sorted(curves):
        total += curves[name]
    return total


def solve_targets():
    """Return ``(scale, dec_rise, bau_curves, dec_curves)`` hitting both targets."""
    year, value = BAU_TARGET
    bau1, _ = target_curves(1.0, 2.0)
    nat = _national(bau1)
    if YEARS[nat.argmax()] != year:
        raise RuntimeError("BAU target shapes do not peak nationally in the target year")
    scale = value / nat[year - FIRST_YEAR]

    def dec_gap(rise):
        _, dec = target_curves(scale, rise)
        return _national(dec).max() - DEC_TARGET_VALUE

    rise = brentq(dec_gap, 1.0, 8.0, xtol=1e-14, rtol=1e-15)
    bau, dec = target_curves(scale, rise)
    nd = _national(dec)
    if YEARS[nd.argmax()] >= DEC_PEAK_BEFORE:
        raise RuntimeError("decarbonization target peaks too late")
    return scale, rise, bau, dec


def _anchors(pairs, factor=1.0):
    return tuple(ParameterAnchor(y, v * factor) for y, v in pairs)


def _polish(spec: ScenarioSpec, year: int, value: float, max_steps: int = 200) -> ScenarioSpec:
    prov = max(PROVINCES, key=lambda p: p[4])[0]
    for _ in range(max_steps):
        proj = project_static(spec)
        got = proj.national_emissions.value_at(year)
        if got == value:
            return spec
        anchors = list(spec.anchors[prov]["energy_intensity"])
        i = year - anchors[0].year
        e = anchors[i].value
        anchors[i] = ParameterAnchor(year, float(np.nextafter(e, np.inf if got < value else -np.inf)))
        spec.anchors[prov]["energy_intensity"] = tuple(anchors)
    raise RuntimeError(f"could not polish {spec.name} to {value} in {year}")


def build_calibration_bundle() -> DatasetBundle:
    _, _, bau_t, dec_t = solve_targets()
    region_map = RegionMapping({p[0]: p[1] for p in PROVINCES})
    scenarios = {}
    for name, kind, targets in (("bau", "BAU", bau_t), ("decarbonization", "decarbonization", dec_t)):
        mix = MIX[kind]
        anchors = {}
        for prov, _, pop, floor, *_ in PROVINCES:
            a = {
                "population": _anchors(POPULATION_PROFILE, pop * 1e6),
                "floor_area_per_capita": _anchors(FLOOR_AREA_PROFILE, floor),
            }
            for p, pairs in mix.items():
                a[p] = _anchors(pairs)
            s = {p: interpolate(v, YEARS) for p, v in a.items()}
            k = composite_intensity(
                s["electrification_rate"], s["coal_share"], s["gas_share"],
                s["self_generation_share"], s["ef_electricity"], s["ef_coal"], s["ef_gas"],
            )
            e = targets[prov] * KG_PER_MT / (s["population"] * s["floor_area_per_capita"] * k)
            a["energy_intensity"] = tuple(ParameterAnchor(int(y), float(v)) for y, v in zip(YEARS, e))
            anchors[prov] = a
        scenarios[name] = ScenarioSpec(
            name=name,
            kind=kind,
            horizon=(FIRST_YEAR, LAST_YEAR),
            anchors=anchors,
            interpolation="linear",
            bipg_scope="coal_only",
        )
    scenarios["bau"] = _polish(scenarios["bau"], *BAU_TARGET)
    dec_year = project_static(scenarios["decarbonization"]).national_peak.year
    scenarios["decarbonization"] = _polish(scenarios["decarbonization"], dec_year, DEC_TARGET_VALUE)
    return DatasetBundle(
        schema_version=1,
        metadata=dict(METADATA),
        region_map=region_map,
        uncertainty=UncertaintyConfig(**UNCERTAINTY),
        scenarios=scenarios,
    )


def calibration_bundle_path() -> Path:
    """Directory of the shipped calibration bundle."""
    return Path(str(resources.files("buildpeak") / "data" / "calibration"))


if __name__ == "__main__":
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else calibration_bundle_path()
    print(write_bundle(build_calibration_bundle(), out))
