"""
Kaya-identity arithmetic for commercial building operations.

Emissions are decomposed as

    C = P * f * e * K

with P the population, f the commercial floor area per capita (m2/person),
e the energy intensity (kgce/m2/yr) and K the composite carbon intensity of
the energy mix (kgCO2/kgce).  Inputs are carried in base units; results are
reported in Mtce and MtCO2.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

KG_PER_MT = 1e9
SHARE_TOLERANCE = 1e-9

BIPG_SCOPES = ("coal_only", "coal_and_gas", "all_fuels")


class ValidationError(ValueError):
    """Raised when model inputs violate a documented invariant."""


def _check_share(name, value):
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"{name} must lie in [0, 1], got {value!r}")


def _check_nonnegative(name, value):
    if not value >= 0.0:
        raise ValidationError(f"{name} must be >= 0, got {value!r}")


@dataclass(frozen=True)
class EnergyMix:
    """Shares of end-use energy by carrier.

    Whatever is left after electricity, coal and gas is treated as
    zero-emission "other" energy.
    """

    electrification_rate: float
    coal_share: float
    gas_share: float
    self_generation_share: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            _check_share(f.name, getattr(self, f.name))
        total = self.electrification_rate + self.coal_share + self.gas_share
        if total > 1.0 + SHARE_TOLERANCE:
            raise ValidationError(
                "electrification_rate + coal_share + gas_share must not exceed 1, "
                f"got {total!r}"
            )


@dataclass(frozen=True)
class EmissionFactors:
    """Carbon emission factors in kgCO2 per kgce."""

    electricity: float
    coal: float
    gas: float

    def __post_init__(self):
        for f in fields(self):
            _check_nonnegative(f"factors.{f.name}", getattr(self, f.name))

    def scaled(self, factor: float) -> "EmissionFactors":
        return EmissionFactors(
            self.electricity * factor, self.coal * factor, self.gas * factor
        )


@dataclass(frozen=True)
class KayaInputs:
    population: float
    floor_area_per_capita: float
    energy_intensity: float
    mix: EnergyMix
    factors: EmissionFactors

    def __post_init__(self):
        _check_nonnegative("population", self.population)
        _check_nonnegative("floor_area_per_capita", self.floor_area_per_capita)
        _check_nonnegative("energy_intensity", self.energy_intensity)


def composite_intensity(
    electrification_rate,
    coal_share,
    gas_share,
    self_generation_share,
    ef_electricity,
    ef_coal,
    ef_gas,
    bipg_scope: str = "coal_only",
):
    """Composite carbon intensity for scalars or broadcastable arrays.

    ``bipg_scope`` selects which fuel terms are offset by the self-generated
    share:

    ``coal_only`` (default)
        ``el + (1 - self_gen)*coal + gas``
    ``coal_and_gas``
        ``el + (1 - self_gen)*(coal + gas)``
    ``all_fuels``
        ``(1 - self_gen)*(el + coal + gas)``

    where each fuel term is its emission factor times its share.
    """
    el = ef_electricity * electrification_rate
    coal = ef_coal * coal_share
    gas = ef_gas * gas_share
    offset = 1.0 - self_generation_share
    if bipg_scope == "coal_only":
        return el + offset * coal + gas
    if bipg_scope == "coal_and_gas":
        return el + offset * (coal + gas)
    if bipg_scope == "all_fuels":
        return offset * (el + coal + gas)
    raise ValidationError(
        f"bipg_scope must be one of {BIPG_SCOPES}, got {bipg_scope!r}"
    )


def carbon_intensity(
    mix: EnergyMix, factors: EmissionFactors, bipg_scope: str = "coal_only"
) -> float:
    """Composite carbon intensity K (kgCO2/kgce) of an energy mix."""
    return composite_intensity(
        mix.electrification_rate,
        mix.coal_share,
        mix.gas_share,
        mix.self_generation_share,
        factors.electricity,
        factors.coal,
        factors.gas,
        bipg_scope,
    )


def annual_energy(inputs: KayaInputs) -> float:
    """Operational energy use in Mtce."""
    return (
        inputs.population * inputs.floor_area_per_capita * inputs.energy_intensity
    ) / KG_PER_MT


def annual_emissions(inputs: KayaInputs, bipg_scope: str = "coal_only") -> float:
    """Operational emissions in MtCO2."""
    return annual_energy(inputs) * carbon_intensity(
        inputs.mix, inputs.factors, bipg_scope
    )


@dataclass(frozen=True)
class Peak:
    year: int
    value: float


class EmissionTrajectory:
    """A contiguous yearly series of non-negative annual totals.

    Parameters
    ----------
    start_year : int
        Calendar year of ``values[0]``.
    values : array_like
        Annual totals, one per year.
    unit : str
        ``"MtCO2"`` for emissions, ``"Mtce"`` for energy.
    """

    def __init__(self, start_year: int, values, unit: str = "MtCO2"):
        arr = np.array(values, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValidationError("trajectory values must be a non-empty 1-d series")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("trajectory values must be finite")
        if np.any(arr < 0):
            raise ValidationError("trajectory values must be >= 0")
        arr.setflags(write=False)
        self.start_year = int(start_year)
        self.values = arr
        self.unit = unit

    @property
    def years(self) -> np.ndarray:
        return np.arange(self.start_year, self.start_year + self.values.size)

    @property
    def end_year(self) -> int:
        return self.start_year + self.values.size - 1

    def value_at(self, year: int) -> float:
        idx = year - self.start_year
        if not 0 <= idx < self.values.size:
            raise KeyError(year)
        return float(self.values[idx])

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, EmissionTrajectory):
            return NotImplemented
        return (
            self.start_year == other.start_year
            and self.unit == other.unit
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return (
            f"EmissionTrajectory(start_year={self.start_year}, "
            f"n={self.values.size}, unit={self.unit!r})"
        )


def detect_peak(trajectory: EmissionTrajectory) -> Peak:
    """Global maximum of a trajectory; ties resolve to the earliest year."""
    if len(trajectory) == 0:
        raise ValidationError("cannot detect the peak of an empty trajectory")
    # argmax returns the first occurrence of the maximum
    idx = int(np.argmax(trajectory.values))
    return Peak(trajectory.start_year + idx, float(trajectory.values[idx]))


def peak_indices(values: np.ndarray) -> np.ndarray:
    """Row-wise peak positions of a (draws, years) block, earliest on ties."""
    return np.argmax(values, axis=-1)
