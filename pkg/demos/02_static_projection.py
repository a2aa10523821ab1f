# %% [markdown]
# # Static projections from the calibration bundle
#
# A bundle holds anchor values per province and parameter.  Expanding them
# gives dense yearly inputs; the Kaya product turns those into energy and
# emission trajectories that are summed to a national series.

# %%
from buildpeak.calibration import calibration_bundle_path
from buildpeak.data_io import load_bundle
from buildpeak.scenario import expand, interpolate, ParameterAnchor, project_static

bundle = load_bundle(calibration_bundle_path())
print(bundle.metadata["name"], "-", len(bundle.region_map), "provinces")

# %% [markdown]
# Interpolation between anchors is linear or compound-growth; values are
# held constant outside the anchored years.

# %%
import numpy as np

anchors = [ParameterAnchor(2020, 100.0), ParameterAnchor(2060, 400.0)]
years = np.array([2010, 2020, 2040, 2060])
print("linear         ", interpolate(anchors, years, "linear"))
print("compound-growth", interpolate(anchors, years, "compound-growth"))

# %%
for name in ("bau", "decarbonization"):
    proj = project_static(bundle.scenario(name))
    pk, epk = proj.national_peak, proj.national_energy_peak
    print(f"{name:16s} emissions peak {pk.value:7.2f} MtCO2 in {pk.year}; "
          f"energy peak {epk.value:6.1f} Mtce in {epk.year}")

# %% [markdown]
# Provincial peaks, largest first, with the gap between the two scenarios.

# %%
bau = project_static(bundle.scenario("bau")).peaks
dec = project_static(bundle.scenario("decarbonization")).peaks
print(f"{'province':15s} {'BAU':>14s} {'decarb.':>14s} {'gap':>6s}")
for p in sorted(bau, key=lambda p: -bau[p].value)[:10]:
    print(f"{p:15s} {bau[p].value:7.2f} ({bau[p].year}) {dec[p].value:7.2f} ({dec[p].year}) "
          f"{bau[p].value - dec[p].value:6.2f}")

# %% [markdown]
# Inspect one province's expanded inputs.

# %%
traj = expand(bundle.scenario("bau"))["Shandong"]
for year in (2000, 2020, 2029, 2060):
    i = traj.inputs_at(year)
    print(year, f"P={i.population / 1e6:6.1f}M f={i.floor_area_per_capita:5.2f} e={i.energy_intensity:6.2f}",
          f"electrified={i.mix.electrification_rate:.2f}")
