# %% [markdown]
# # Peak uncertainty by Monte Carlo
#
# Each draw multiplies the static trajectory by `1 + omega * ramp(T)`, where
# `omega ~ N(0, sigma_c)` and the ramp climbs from 0 in 2020 to 1 in 2060.
# The peak of every perturbed trajectory is recorded.

# %%
from dataclasses import replace

from buildpeak.calibration import calibration_bundle_path
from buildpeak.data_io import load_bundle
from buildpeak.distribution import (
    prob_peak_by_year,
    prob_peak_in_interval,
    summarize,
    uncertainty_bands,
)
from buildpeak.monte_carlo import run_mc
from buildpeak.scenario import project_static

bundle = load_bundle(calibration_bundle_path())
bau = bundle.scenario("bau")
cfg = bundle.uncertainty
print(cfg)

# %%
result = run_mc(bau, cfg)
d = summarize(result.samples["national"])
print(f"peak value {d.mean_value:.1f} +/- {d.sd_value:.1f} MtCO2, 2.5-97.5%: "
      f"{d.value_percentiles['p2.5']:.1f}-{d.value_percentiles['p97.5']:.1f}")
print(f"peak year  {d.mean_year:.2f} +/- {d.sd_year:.2f}")

# %% [markdown]
# How likely is the peak to have happened by a given year?

# %%
for year in (2025, 2028, 2030, 2035):
    print(year, f"{prob_peak_by_year(result.samples['national'], year):.3f}")

# %% [markdown]
# Probability that the peak lands in a value window, optionally by a year.

# %%
s = result.samples["national"]
print(f"P(850 <= peak <= 900)            = {prob_peak_in_interval(s, (850, 900)):.4f}")
print(f"P(850 <= peak <= 900, by 2027)   = {prob_peak_in_interval(s, (850, 900), 2027):.4f}")

# %% [markdown]
# Lower bands of the decarbonization trajectory at -1, -2 and -3 SD.  The
# attached masses are one-sided Gaussian probabilities.

# %%
static = project_static(bundle.scenario("decarbonization")).national_emissions
for band in uncertainty_bands(static, cfg.sigma_c):
    print(f"k={band.k}: mass {100 * band.mass:.1f}%  2060 value {band.lower.value_at(2060):6.1f}"
          f" (static {static.value_at(2060):.1f})")

# %% [markdown]
# Province-scope runs perturb every province independently; the national
# sum then varies much less because provincial deviations partly cancel.

# %%
prov = run_mc(bau, replace(cfg, draws=20_000), scope="province")
dn = summarize(prov.samples["national"])
print(f"national sum of independent provinces: {dn.mean_value:.1f} +/- {dn.sd_value:.1f}")
