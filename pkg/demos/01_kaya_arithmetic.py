# %% [markdown]
# # Kaya arithmetic for one province-year
#
# Emissions are population x floor area per capita x energy intensity x the
# carbon intensity of the energy mix.  The intensity depends on how the
# self-generated share is allowed to offset fuel use (`bipg_scope`).

# %%
from buildpeak.emission_core import (
    BIPG_SCOPES,
    EmissionFactors,
    EnergyMix,
    KayaInputs,
    annual_emissions,
    annual_energy,
    carbon_intensity,
)

mix = EnergyMix(electrification_rate=0.5, coal_share=0.3, gas_share=0.2, self_generation_share=0.1)
factors = EmissionFactors(electricity=0.6, coal=2.66, gas=2.09)

for scope in BIPG_SCOPES:
    print(f"{scope:13s} K = {carbon_intensity(mix, factors, scope):.4f} kgCO2/kgce")

# %% [markdown]
# A province of 10 million people with 2 m2 of commercial floor area each,
# using 10 kgce per m2 a year:

# %%
inputs = KayaInputs(1e7, 2.0, 10.0, mix, factors)
print(f"energy    {annual_energy(inputs):.3f} Mtce")
print(f"emissions {annual_emissions(inputs):.4f} MtCO2")

# %% [markdown]
# Emissions are linear in each activity factor: doubling floor area doubles them.

# %%
from dataclasses import replace

doubled = replace(inputs, floor_area_per_capita=4.0)
print(annual_emissions(doubled) / annual_emissions(inputs))
