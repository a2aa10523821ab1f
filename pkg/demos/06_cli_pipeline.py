# %% [markdown]
# # The file-mediated command-line pipeline
#
# validate -> project -> simulate -> allocate.  Each stage writes reports the
# next one reads, so allocation strategies can be compared without
# re-simulating.

# %%
import subprocess
import sys
import tempfile
from pathlib import Path

from buildpeak.calibration import calibration_bundle_path

bundle = str(calibration_bundle_path())
runs = Path(tempfile.mkdtemp(prefix="buildpeak-"))


def buildpeak(*args):
    cmd = [sys.executable, "-m", "buildpeak.cli", *map(str, args)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    print("$ buildpeak", " ".join(map(str, args)), "->", proc.returncode)
    return proc


buildpeak("validate", "--bundle", bundle)
buildpeak("project", "--bundle", bundle, "--scenario", "decarbonization", "--out", runs / "dec")
buildpeak("simulate", "--bundle", bundle, "--scenario", "bau", "--scope", "province",
          "--draws", 20000, "--workers", 2, "--out", runs / "bau")
buildpeak("allocate", "--bundle", bundle, "--bau-results", runs / "bau", "--dec-results", runs / "dec",
          "--out", runs / "alloc")

# %%
print((runs / "alloc" / "allocation.csv").read_text().splitlines()[:8])
print((runs / "bau" / "manifest.json").read_text()[:400])

# %% [markdown]
# A bad bundle exits with status 1 and lists every problem.

# %%
import json
import shutil

broken = runs / "broken"
shutil.copytree(bundle, broken)
doc = json.loads((broken / "bundle.json").read_text())
doc["uncertainty"]["sigma_c"] = -1
del doc["uncertainty"]["seed"]
(broken / "bundle.json").write_text(json.dumps(doc))
print(buildpeak("validate", "--bundle", broken).stdout)
