import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from buildpeak.emission_core import (
    BIPG_SCOPES,
    EmissionFactors,
    EmissionTrajectory,
    EnergyMix,
    KayaInputs,
    Peak,
    ValidationError,
    annual_emissions,
    annual_energy,
    carbon_intensity,
    composite_intensity,
    detect_peak,
)

WORKED_MIX = EnergyMix(electrification_rate=0.5, coal_share=0.3, gas_share=0.2, self_generation_share=0.1)
WORKED_FACTORS = EmissionFactors(electricity=0.6, coal=2.66, gas=2.09)


def _exact(scope):
    # independent rational-arithmetic oracle
    el, coal, gas, rb = Fraction("0.5"), Fraction("0.3"), Fraction("0.2"), Fraction("0.1")
    kel, kcoal, kgas = Fraction("0.6"), Fraction("2.66"), Fraction("2.09")
    if scope == "coal_only":
        return kel * el + (1 - rb) * kcoal * coal + kgas * gas
    if scope == "coal_and_gas":
        return kel * el + (1 - rb) * (kcoal * coal + kgas * gas)
    return (1 - rb) * (kel * el + kcoal * coal + kgas * gas)


class TestCarbonIntensity:
    def test_worked_example_literal_grouping(self):
        assert carbon_intensity(WORKED_MIX, WORKED_FACTORS) == 1.4362
        assert _exact("coal_only") == Fraction("1.4362")

    @pytest.mark.parametrize(
        "scope, expected", [("coal_only", 1.4362), ("coal_and_gas", 1.3944), ("all_fuels", 1.3644)]
    )
    def test_scopes(self, scope, expected):
        assert float(_exact(scope)) == expected
        assert carbon_intensity(WORKED_MIX, WORKED_FACTORS, scope) == expected

    def test_scopes_distinct(self):
        vals = {carbon_intensity(WORKED_MIX, WORKED_FACTORS, s) for s in BIPG_SCOPES}
        assert len(vals) == 3

    def test_empty_mix_is_zero(self):
        assert carbon_intensity(EnergyMix(0, 0, 0, 0), EmissionFactors(5, 6, 7)) == 0.0

    def test_pure_electricity(self):
        assert carbon_intensity(EnergyMix(1, 0, 0, 0), EmissionFactors(0.8, 2.66, 2.09)) == 0.8

    def test_unknown_scope(self):
        with pytest.raises(ValidationError, match="bipg_scope"):
            carbon_intensity(WORKED_MIX, WORKED_FACTORS, "grid")

    def test_vectorized_matches_scalar(self):
        rel = np.array([0.5, 0.2])
        out = composite_intensity(rel, 0.3, 0.2, 0.1, 0.6, 2.66, 2.09)
        assert out[0] == 1.4362
        assert out[1] == pytest.approx(0.6 * 0.2 + 0.9 * 0.798 + 0.418, rel=1e-15)


class TestValidation:
    @pytest.mark.parametrize("field", ["electrification_rate", "coal_share", "gas_share", "self_generation_share"])
    @pytest.mark.parametrize("bad", [-0.1, 1.2, float("nan")])
    def test_share_bounds(self, field, bad):
        kw = dict(electrification_rate=0.1, coal_share=0.1, gas_share=0.1, self_generation_share=0.0)
        kw[field] = bad
        with pytest.raises(ValidationError, match=field):
            EnergyMix(**kw)

    def test_shares_over_one(self):
        with pytest.raises(ValidationError, match="must not exceed 1"):
            EnergyMix(0.6, 0.3, 0.2)

    def test_remainder_is_other_energy(self):
        EnergyMix(0.2, 0.1, 0.1)  # 60% zero-emission remainder is fine

    def test_negative_factor(self):
        with pytest.raises(ValidationError, match="coal"):
            EmissionFactors(1, -1, 1)

    @pytest.mark.parametrize("field", ["population", "floor_area_per_capita", "energy_intensity"])
    def test_negative_kaya_input(self, field):
        kw = dict(population=1, floor_area_per_capita=1, energy_intensity=1, mix=WORKED_MIX, factors=WORKED_FACTORS)
        kw[field] = -1
        with pytest.raises(ValidationError, match=field):
            KayaInputs(**kw)


def _inputs(P, f, e, mix=WORKED_MIX, factors=WORKED_FACTORS):
    return KayaInputs(P, f, e, mix, factors)


class TestEnergyAndEmissions:
    def test_energy_examples(self):
        assert annual_energy(_inputs(1e7, 2, 10)) == 0.2
        assert annual_energy(_inputs(0, 3, 4)) == 0.0
        assert annual_energy(_inputs(1e9, 1, 1)) == 1.0

    def test_emissions_example(self):
        k2 = EmissionFactors(2.0, 0, 0)
        assert annual_emissions(_inputs(1e7, 2, 10, EnergyMix(1, 0, 0), k2)) == 0.4

    def test_zero_mix(self):
        assert annual_emissions(_inputs(1e7, 2, 10, EnergyMix(0, 0, 0))) == 0.0

    def test_doubling_population(self):
        base = annual_emissions(_inputs(3.7e7, 11.3, 27.1))
        assert annual_emissions(_inputs(2 * 3.7e7, 11.3, 27.1)) == 2 * base


shares = st.floats(0, 1, allow_nan=False)
positive = st.floats(0, 1e9, allow_nan=False, allow_infinity=False)
factor = st.floats(0, 5, allow_nan=False)


@st.composite
def kaya_inputs(draw):
    el = draw(shares)
    coal = draw(st.floats(0, 1 - el))
    gas = draw(st.floats(0, max(0.0, 1 - el - coal)))
    mix = EnergyMix(el, coal, gas, draw(shares))
    return KayaInputs(
        draw(positive), draw(st.floats(0, 100)), draw(st.floats(0, 500)), mix,
        EmissionFactors(draw(factor), draw(factor), draw(factor)),
    )


@given(kaya_inputs(), st.sampled_from(["population", "floor_area_per_capita", "energy_intensity"]),
       st.floats(0, 1e3, allow_nan=False))
def test_homogeneity(inputs, field, alpha):
    from dataclasses import replace

    base = annual_emissions(inputs)
    scaled = annual_emissions(replace(inputs, **{field: getattr(inputs, field) * alpha}))
    assert math.isclose(scaled, alpha * base, rel_tol=1e-12, abs_tol=1e-300)


@given(kaya_inputs(), st.sampled_from(BIPG_SCOPES))
def test_non_negative_and_consistent(inputs, scope):
    e = annual_energy(inputs)
    c = annual_emissions(inputs, scope)
    assert e >= 0 and c >= 0
    assert math.isclose(c, e * carbon_intensity(inputs.mix, inputs.factors, scope), rel_tol=1e-12, abs_tol=1e-300)


class TestPeakDetection:
    def test_unimodal(self):
        assert detect_peak(EmissionTrajectory(2020, [1, 3, 2])) == Peak(2021, 3.0)

    def test_tie_takes_earliest(self):
        assert detect_peak(EmissionTrajectory(2020, [5, 5, 4])) == Peak(2020, 5.0)

    def test_monotone(self):
        vals = np.arange(2020, 2061, dtype=float)
        assert detect_peak(EmissionTrajectory(2020, vals)) == Peak(2060, 2060.0)

    @pytest.mark.parametrize("vals", [[], [1, float("nan")], [1, -1], [float("inf")]])
    def test_rejects_bad_trajectories(self, vals):
        with pytest.raises(ValidationError):
            EmissionTrajectory(2020, vals)

    def test_trajectory_is_read_only(self):
        t = EmissionTrajectory(2020, [1.0, 2.0])
        with pytest.raises(ValueError):
            t.values[0] = 3.0


@given(st.lists(st.integers(0, 20).map(float), min_size=1, max_size=60), st.integers(2000, 2040))
def test_peak_property(values, start):
    pk = detect_peak(EmissionTrajectory(start, values))
    i = pk.year - start
    assert all(v <= pk.value for v in values)
    assert values[i] == pk.value
    assert all(v < pk.value for v in values[:i])
