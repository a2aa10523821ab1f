from __future__ import annotations

from pathlib import Path

import pytest

from buildpeak.calibration import calibration_bundle_path
from buildpeak.scenario import PARAMETERS, ParameterAnchor, ScenarioSpec

FIXTURES = Path(__file__).resolve().parent / "fixtures"
TOY = FIXTURES / "toy"
SPIKE = FIXTURES / "spike"
MALFORMED = sorted(p for p in (FIXTURES / "malformed").iterdir() if p.is_dir())
CALIBRATION = Path(calibration_bundle_path())

PURE_ELECTRIC = {
    "electrification_rate": 1.0,
    "coal_share": 0.0,
    "gas_share": 0.0,
    "self_generation_share": 0.0,
    "ef_electricity": 1.0,
    "ef_coal": 2.66,
    "ef_gas": 1.63,
}


def make_spec(regions, name="s", kind="BAU", horizon=(2020, 2060), interpolation="linear", **kw):
    """Build a spec from ``{region: {parameter: value | [(year, value), ...]}}``.

    Missing parameters default to a pure-electric mix with unit emission
    factor, so emissions equal energy in Mtce.
    """
    anchors = {}
    for region, params in regions.items():
        full = {"population": 1e6, "floor_area_per_capita": 10.0, "energy_intensity": 100.0}
        full.update(PURE_ELECTRIC)
        full.update(params)
        anchors[region] = {}
        for p in PARAMETERS:
            v = full[p]
            pts = [(horizon[0], v)] if isinstance(v, (int, float)) else v
            anchors[region][p] = tuple(ParameterAnchor(int(y), float(x)) for y, x in pts)
    return ScenarioSpec(name, kind, horizon, anchors, interpolation, **kw)


def energy_series_spec(series_by_region, start=2020, **kw):
    """A spec whose yearly emissions (MtCO2) equal the given series exactly.

    Population carries the series (floor area 1, intensity 1e9, unit factor).
    """
    regions = {}
    for r, values in series_by_region.items():
        regions[r] = {
            "population": [(start + i, float(v)) for i, v in enumerate(values)],
            "floor_area_per_capita": 1.0,
            "energy_intensity": 1e9,
        }
    end = start + len(next(iter(series_by_region.values()))) - 1
    return make_spec(regions, horizon=(start, end), **kw)


@pytest.fixture(scope="session")
def calibration_bundle():
    from buildpeak.data_io import load_bundle

    return load_bundle(CALIBRATION)


# acceptance criteria report: one PASS/FAIL line per criterion after the run
_CRITERIA: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    number, title = mark.args
    entry = _CRITERIA.setdefault(number, [title, True])
    entry[1] = entry[1] and rep.passed  # skips and errors count against the criterion


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}")
