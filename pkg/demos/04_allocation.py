# %% [markdown]
# # Provincial reduction allocation
#
# A province's decarbonization potential is its BAU peak measure minus its
# decarbonization peak measure, floored at zero.  The default basis compares
# the mean simulated BAU peak with the static decarbonization peak.

# %%
from dataclasses import replace

from buildpeak.allocation import ProvincePeakSummary, allocate
from buildpeak.calibration import calibration_bundle_path
from buildpeak.data_io import load_bundle
from buildpeak.distribution import summarize
from buildpeak.monte_carlo import run_mc
from buildpeak.scenario import project_static

bundle = load_bundle(calibration_bundle_path())
rmap = bundle.region_map
mc = run_mc(bundle.scenario("bau"), replace(bundle.uncertainty, draws=50_000), scope="province")
dec = project_static(bundle.scenario("decarbonization")).peaks

summaries = [
    ProvincePeakSummary(p, mc.static_peaks[p], dec[p], summarize(mc.samples[p]))
    for p in rmap.provinces
]

# %% [markdown]
# `potential_raw` hands each province its own potential.

# %%
raw = allocate(summaries, "potential_raw", region_map=rmap)
for rank, (p, r) in enumerate(raw.ranked()[:5], 1):
    print(f"{rank}. {p:10s} {r:5.2f} MtCO2")
print(f"total {raw.total:.2f} MtCO2")

# %%
print(f"{'region':10s} {'total':>6s} {'mean':>6s} n")
for region, roll in raw.regional.items():
    print(f"{region:10s} {roll.total:6.2f} {roll.mean:6.2f} {roll.provinces}")

# %% [markdown]
# `potential_proportional` rescales the same potentials to a national
# target, keeping their ratios.

# %%
prop = allocate(summaries, "potential_proportional", 40.0, rmap)
for p, r in prop.ranked()[:3]:
    print(f"{p:10s} {r:5.2f} (raw {prop.potentials[p]:.2f})")

# %% [markdown]
# Comparing static peaks only gives a different, simulation-free basis.

# %%
alt = allocate(summaries, basis="static_vs_static", region_map=rmap)
print([p for p, _ in alt.ranked()[:3]])
