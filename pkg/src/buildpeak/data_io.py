"""
Bundle files and report files.

A dataset bundle is a directory holding one ``bundle.json`` document plus
delimited files it references::

    bundle.json          schema_version, metadata, uncertainty config,
                         region map file name, scenario list
    regions.csv          province,region
    <scenario>.csv       province,parameter,year,value  (one per scenario)

Anchor values are plain decimals in the unit listed in
:data:`buildpeak.scenario.PARAMETER_UNITS`; anchors for one
(province, parameter) pair must appear in strictly increasing year order.

Reports are written either as sectioned CSV (``tabular-text``) or JSON
(``structured-text``).  Floats are rendered with 6 significant digits and
years as integers so identical results give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .distribution import PERCENTILES, Histogram, PeakDistribution, percentile_key
from .emission_core import BIPG_SCOPES, Peak, ValidationError
from .monte_carlo import MODES, UncertaintyConfig
from .scenario import (
    INTERPOLATIONS,
    MAX_YEAR,
    MIN_YEAR,
    PARAMETERS,
    SCENARIO_KINDS,
    SHARE_PARAMETERS,
    ParameterAnchor,
    RegionMapping,
    ScenarioSpec,
    expand,
)

SCHEMA_VERSION = 1
BUNDLE_FILE = "bundle.json"
REGION_COLUMNS = ["province", "region"]
ANCHOR_COLUMNS = ["province", "parameter", "year", "value"]
FORMATS = ("tabular-text", "structured-text")
EXTENSIONS = {"tabular-text": ".csv", "structured-text": ".json"}

_UNCERTAINTY_FIELDS = {f.name for f in fields(UncertaintyConfig)}
_INT_FIELDS = {"seed", "draws", "ramp_base_year", "ramp_end_year", "histogram_bins"}


class BundleValidationError(ValidationError):
    """A bundle failed validation; ``errors`` lists every problem found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__(f"{len(self.errors)} validation error(s):\n" + "\n".join(self.errors))


@dataclass
class DatasetBundle:
    schema_version: int
    metadata: dict
    region_map: RegionMapping
    uncertainty: UncertaintyConfig
    scenarios: dict[str, ScenarioSpec]

    def scenario(self, name: str) -> ScenarioSpec:
        try:
            return self.scenarios[name]
        except KeyError:
            raise ValidationError(
                f"unknown scenario {name!r}; bundle defines {sorted(self.scenarios)}"
            ) from None


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _parse_decimal(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ValueError(text)
    return v


def _read_csv(path: Path, columns: list[str], errors: list[str]):
    """Yield ``(line_number, row_dict)``; header problems go to ``errors``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != columns:
            errors.append(f"{path.name}:1: header must be {','.join(columns)}, got {header}")
            return
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(columns):
                errors.append(f"{path.name}:{line}: expected {len(columns)} fields, got {len(row)}")
                continue
            yield line, dict(zip(columns, (c.strip() for c in row)))


def _load_region_map(path: Path, errors: list[str]) -> RegionMapping:
    provinces: dict[str, str] = {}
    for line, row in _read_csv(path, REGION_COLUMNS, errors):
        where = f"{path.name}:{line}"
        if not row["province"]:
            errors.append(f"{where}: province: empty identifier")
            continue
        if not row["region"]:
            errors.append(f"{where}: region: empty label for province {row['province']!r}")
            continue
        if row["province"] in provinces:
            errors.append(
                f"{where}: province: {row['province']!r} mapped more than once"
            )
            continue
        provinces[row["province"]] = row["region"]
    if not provinces:
        errors.append(f"{path.name}: region map lists no provinces")
    return RegionMapping(provinces)


def _load_uncertainty(doc, errors: list[str]) -> UncertaintyConfig | None:
    where = f"{BUNDLE_FILE}: uncertainty"
    if not isinstance(doc, dict):
        errors.append(f"{where}: must be an object")
        return None
    n_before = len(errors)
    for key in sorted(set(doc) - _UNCERTAINTY_FIELDS):
        errors.append(f"{where}.{key}: unknown field")
    if "seed" not in doc:
        errors.append(f"{where}.seed: required (no implicit seed)")
    for key, v in sorted(doc.items()):
        if key not in _UNCERTAINTY_FIELDS:
            continue
        if key == "mode":
            if v not in MODES:
                errors.append(f"{where}.mode: must be one of {MODES}, got {v!r}")
        elif key in _INT_FIELDS:
            if not _is_int(v):
                errors.append(f"{where}.{key}: must be an integer, got {v!r}")
            elif key == "seed" and not 0 <= v < 2**64:
                errors.append(f"{where}.seed: must fit in 64 unsigned bits, got {v!r}")
            elif key in ("draws", "histogram_bins") and v < 1:
                errors.append(f"{where}.{key}: must be >= 1, got {v!r}")
        elif not _is_number(v) or v < 0:
            errors.append(f"{where}.{key}: must be a finite number >= 0, got {v!r}")
    if len(errors) > n_before:
        return None
    try:
        return UncertaintyConfig(**doc)
    except ValidationError as exc:
        errors.append(f"{where}: {exc}")
        return None


def _load_anchors(path: Path, meta: dict, region_map: RegionMapping, errors: list[str]):
    first, last = meta["horizon"]
    overrides = meta["interpolation_overrides"]
    anchors: dict[str, dict[str, list[ParameterAnchor]]] = {}
    n_before = len(errors)
    for line, row in _read_csv(path, ANCHOR_COLUMNS, errors):
        where = f"{path.name}:{line}"
        province, param = row["province"], row["parameter"]
        ok = True
        if province not in region_map:
            errors.append(f"{where}: province: unknown province {province!r} (not in region map)")
            ok = False
        if param not in PARAMETERS:
            errors.append(f"{where}: parameter: unknown parameter {param!r}")
            ok = False
        try:
            year = int(row["year"])
        except ValueError:
            errors.append(f"{where}: year: not an integer: {row['year']!r}")
            continue
        try:
            value = _parse_decimal(row["value"])
        except ValueError:
            errors.append(f"{where}: value: not a finite decimal: {row['value']!r}")
            continue
        if not MIN_YEAR <= year <= MAX_YEAR:
            errors.append(f"{where}: year: {year} outside [{MIN_YEAR}, {MAX_YEAR}]")
            ok = False
        elif not first <= year <= last:
            errors.append(f"{where}: year: {year} outside scenario horizon [{first}, {last}]")
            ok = False
        if value < 0:
            errors.append(f"{where}: {param}: value {value!r} must be >= 0")
            ok = False
        elif param in SHARE_PARAMETERS and value > 1:
            errors.append(f"{where}: {param}: share {value!r} outside [0, 1]")
            ok = False
        if overrides.get(param, meta["interpolation"]) == "compound-growth" and value <= 0:
            errors.append(
                f"{where}: {param}: compound-growth interpolation needs values > 0, got {value!r}"
            )
            ok = False
        if not ok:
            continue
        series = anchors.setdefault(province, {}).setdefault(param, [])
        if series and year <= series[-1].year:
            errors.append(
                f"{where}: year: non-monotone anchor years for {province!r}/{param!r} "
                f"({year} after {series[-1].year})"
            )
            continue
        series.append(ParameterAnchor(year, value))
    if len(errors) > n_before:
        # rows were dropped; gaps they leave would only repeat those errors
        return anchors
    for province in region_map.provinces:
        if province not in anchors:
            errors.append(f"{path.name}: province: {province!r} from the region map has no anchors")
            continue
        for param in PARAMETERS:
            if param not in anchors[province]:
                errors.append(f"{path.name}: {param}: no anchors for province {province!r}")
    return anchors


def _scenario_meta(i: int, doc, errors: list[str]):
    where = f"{BUNDLE_FILE}: scenarios[{i}]"
    if not isinstance(doc, dict):
        errors.append(f"{where}: must be an object")
        return None
    n_before = len(errors)
    allowed = {"name", "kind", "horizon", "interpolation", "interpolation_overrides", "bipg_scope", "anchors"}
    for key in sorted(set(doc) - allowed):
        errors.append(f"{where}.{key}: unknown field")
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        errors.append(f"{where}.name: required non-empty string")
    if doc.get("kind") not in SCENARIO_KINDS:
        errors.append(f"{where}.kind: must be one of {SCENARIO_KINDS}, got {doc.get('kind')!r}")
    horizon = doc.get("horizon")
    if not (
        isinstance(horizon, list)
        and len(horizon) == 2
        and all(_is_int(y) for y in horizon)
        and MIN_YEAR <= horizon[0] <= horizon[1] <= MAX_YEAR
    ):
        errors.append(
            f"{where}.horizon: must be [first, last] with {MIN_YEAR} <= first <= last <= {MAX_YEAR}, got {horizon!r}"
        )
    interp = doc.get("interpolation", "linear")
    if interp not in INTERPOLATIONS:
        errors.append(f"{where}.interpolation: must be one of {INTERPOLATIONS}, got {interp!r}")
    overrides = doc.get("interpolation_overrides", {})
    if not isinstance(overrides, dict):
        errors.append(f"{where}.interpolation_overrides: must be an object")
        overrides = {}
    for p, m in overrides.items():
        if p not in PARAMETERS:
            errors.append(f"{where}.interpolation_overrides.{p}: unknown parameter")
        if m not in INTERPOLATIONS:
            errors.append(f"{where}.interpolation_overrides.{p}: must be one of {INTERPOLATIONS}, got {m!r}")
    scope = doc.get("bipg_scope", "coal_only")
    if scope not in BIPG_SCOPES:
        errors.append(f"{where}.bipg_scope: must be one of {BIPG_SCOPES}, got {scope!r}")
    if not isinstance(doc.get("anchors"), str) or not doc.get("anchors"):
        errors.append(f"{where}.anchors: required file name")
    if len(errors) > n_before:
        return None
    return {
        "name": name,
        "kind": doc["kind"],
        "horizon": tuple(horizon),
        "interpolation": interp,
        "interpolation_overrides": dict(overrides),
        "bipg_scope": scope,
        "anchors": doc["anchors"],
    }


def bundle_file(path) -> Path:
    p = Path(path)
    return p / BUNDLE_FILE if p.is_dir() else p


def load_bundle(path) -> DatasetBundle:
    """Load and fully validate a bundle directory (or its ``bundle.json``).

    Raises
    ------
    OSError
        A file is missing or unreadable.
    BundleValidationError
        Any schema or consistency problem; every problem found is listed.
    """
    doc_path = bundle_file(path)
    root = doc_path.parent
    text = doc_path.read_text(encoding="utf-8")
    errors: list[str] = []
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BundleValidationError([f"{doc_path.name}:{exc.lineno}: invalid JSON: {exc.msg}"]) from None
    if not isinstance(doc, dict):
        raise BundleValidationError([f"{doc_path.name}: top level must be an object"])

    version = doc.get("schema_version")
    if version is None:
        errors.append(f"{doc_path.name}: schema_version: required field missing")
    elif version != SCHEMA_VERSION:
        errors.append(
            f"{doc_path.name}: schema_version: unsupported version {version!r} (expected {SCHEMA_VERSION})"
        )
    metadata = doc.get("metadata")
    if not isinstance(metadata, dict) or not isinstance(metadata.get("name"), str):
        errors.append(f"{doc_path.name}: metadata.name: required string")
        metadata = metadata if isinstance(metadata, dict) else {}

    region_map = RegionMapping({})
    n_before_map = len(errors)
    rm_name = doc.get("region_map")
    if not isinstance(rm_name, str):
        errors.append(f"{doc_path.name}: region_map: required file name")
    else:
        region_map = _load_region_map(root / rm_name, errors)
    # anchor cross-references against a broken map would only echo its errors
    map_ok = len(errors) == n_before_map

    uncertainty = _load_uncertainty(doc.get("uncertainty"), errors)

    scenarios: dict[str, ScenarioSpec] = {}
    docs = doc.get("scenarios")
    if not isinstance(docs, list) or not docs:
        errors.append(f"{doc_path.name}: scenarios: must be a non-empty list")
        docs = []
    for i, sdoc in enumerate(docs):
        meta = _scenario_meta(i, sdoc, errors)
        if meta is None:
            continue
        if meta["name"] in scenarios:
            errors.append(f"{doc_path.name}: scenarios[{i}].name: duplicate scenario {meta['name']!r}")
            continue
        if not map_ok:
            continue
        n_before = len(errors)
        anchor_path = root / meta["anchors"]
        anchors = _load_anchors(anchor_path, meta, region_map, errors)
        if len(errors) > n_before:
            continue
        try:
            spec = ScenarioSpec(
                name=meta["name"],
                kind=meta["kind"],
                horizon=meta["horizon"],
                anchors=anchors,
                interpolation=meta["interpolation"],
                bipg_scope=meta["bipg_scope"],
                interpolation_overrides=meta["interpolation_overrides"],
            )
            expand(spec)
        except ValidationError as exc:
            errors.append(f"{anchor_path.name}: {exc}")
            continue
        if uncertainty is not None and spec.horizon[1] > uncertainty.ramp_end_year:
            errors.append(
                f"{doc_path.name}: scenarios[{i}].horizon: ends after uncertainty.ramp_end_year"
            )
            continue
        scenarios[spec.name] = spec

    if errors:
        raise BundleValidationError(errors)
    return DatasetBundle(version, dict(metadata), region_map, uncertainty, scenarios)


def validate_bundle(path) -> list[str]:
    """All validation errors of a bundle; empty when it is valid."""
    try:
        load_bundle(path)
    except BundleValidationError as exc:
        return exc.errors
    return []


def _anchor_file_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name) + "_anchors.csv"


def write_bundle(bundle: DatasetBundle, directory) -> Path:
    """Write ``bundle`` as a bundle directory; returns the ``bundle.json`` path."""
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    with open(root / "regions.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REGION_COLUMNS)
        for province, region in bundle.region_map.provinces.items():
            w.writerow([province, region])
    scen_docs = []
    for name, spec in bundle.scenarios.items():
        fname = _anchor_file_name(name)
        with open(root / fname, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(ANCHOR_COLUMNS)
            for region, params in spec.anchors.items():
                for p in PARAMETERS:
                    for a in params[p]:
                        w.writerow([region, p, a.year, repr(float(a.value))])
        entry = {
            "name": name,
            "kind": spec.kind,
            "horizon": list(spec.horizon),
            "interpolation": spec.interpolation,
            "bipg_scope": spec.bipg_scope,
            "anchors": fname,
        }
        if spec.interpolation_overrides:
            entry["interpolation_overrides"] = dict(sorted(spec.interpolation_overrides.items()))
        scen_docs.append(entry)
    unc = {f.name: getattr(bundle.uncertainty, f.name) for f in fields(UncertaintyConfig)}
    doc = {
        "schema_version": bundle.schema_version,
        "metadata": bundle.metadata,
        "region_map": "regions.csv",
        "uncertainty": unc,
        "scenarios": scen_docs,
    }
    out = root / BUNDLE_FILE
    out.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return out


# --------------------------------------------------------------------------
# reports


@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[list]


@dataclass
class Report:
    title: str
    tables: list[Table]

    def table(self, name: str) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)

    def records(self, name: str) -> list[dict]:
        t = self.table(name)
        return [dict(zip(t.columns, row)) for row in t.rows]


def _scalar(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def _fmt_text(v) -> str:
    v = _scalar(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, ".6g")
    return str(v)


def _fmt_json(v):
    v = _scalar(v)
    if isinstance(v, float):
        return float(format(v, ".6g"))
    return v


def render_report(report: Report, fmt: str) -> str:
    if fmt == "structured-text":
        doc = {
            "title": report.title,
            "tables": [
                {
                    "name": t.name,
                    "columns": list(t.columns),
                    "rows": [[_fmt_json(v) for v in row] for row in t.rows],
                }
                for t in report.tables
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"
    if fmt == "tabular-text":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        buf.write(f"# title: {report.title}\n")
        for t in report.tables:
            buf.write(f"# table: {t.name}\n")
            w.writerow(t.columns)
            for row in t.rows:
                w.writerow([_fmt_text(v) for v in row])
            buf.write("\n")
        return buf.getvalue()
    raise ValidationError(f"format must be one of {FORMATS}, got {fmt!r}")


def write_report(report: Report, fmt: str, path) -> Path:
    """Write a report; identical reports always produce identical bytes."""
    text = render_report(report, fmt)
    p = Path(path)
    with open(p, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)
    return p


_INT_RE = re.compile(r"^-?\d+$")


def _parse_cell(text: str):
    if text == "":
        return None
    if _INT_RE.match(text):
        return int(text)
    try:
        return float(text)
    except ValueError:
        return text


def read_report(path) -> Report:
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    if p.suffix == ".json":
        doc = json.loads(text)
        return Report(
            doc["title"],
            [Table(t["name"], t["columns"], t["rows"]) for t in doc["tables"]],
        )
    title, tables, current = "", [], None
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        line = lines[i]
        if line.startswith("# title: "):
            title = line[len("# title: "):]
        elif line.startswith("# table: "):
            header = next(csv.reader([lines[i + 1]]))
            current = Table(line[len("# table: "):], header, [])
            tables.append(current)
            i += 1
        elif line and current is not None:
            current.rows.append([_parse_cell(c) for c in next(csv.reader([line]))])
        i += 1
    return Report(title, tables)


def find_report(directory, stem: str) -> Path:
    """The report ``stem`` in ``directory`` in whichever format it was written."""
    for ext in (".json", ".csv"):
        p = Path(directory) / (stem + ext)
        if p.exists():
            return p
    raise FileNotFoundError(Path(directory) / stem)


def peak_rows(peaks: dict[str, Peak], energy_peaks: dict[str, Peak] | None = None) -> Table:
    cols = ["unit", "peak_year", "peak_value"]
    if energy_peaks is not None:
        cols += ["energy_peak_year", "energy_peak_value"]
    rows = []
    for unit, pk in peaks.items():
        row = [unit, pk.year, pk.value]
        if energy_peaks is not None:
            ep = energy_peaks[unit]
            row += [ep.year, ep.value]
        rows.append(row)
    return Table("peaks", cols, rows)


def peaks_from_report(report: Report) -> dict[str, Peak]:
    return {r["unit"]: Peak(int(r["peak_year"]), float(r["peak_value"])) for r in report.records("peaks")}


DIST_COLUMNS = (
    ["unit", "quantity", "n", "static_peak_year", "static_peak_value", "mean_value", "sd_value"]
    + [f"value_{percentile_key(p)}" for p in PERCENTILES]
    + ["mean_year", "sd_year"]
    + [f"year_{percentile_key(p)}" for p in PERCENTILES]
)


def distribution_table(dists: dict[str, PeakDistribution], static_peaks: dict[str, Peak], quantity: str) -> Table:
    rows = []
    for unit, d in dists.items():
        sp = static_peaks[unit]
        rows.append(
            [unit, quantity, d.n, sp.year, sp.value, d.mean_value, d.sd_value]
            + [d.value_percentiles[percentile_key(p)] for p in PERCENTILES]
            + [d.mean_year, d.sd_year]
            + [d.year_percentiles[percentile_key(p)] for p in PERCENTILES]
        )
    return Table("distributions", list(DIST_COLUMNS), rows)


def histogram_table(dists: dict[str, PeakDistribution], quantity: str) -> Table:
    rows = []
    for unit, d in dists.items():
        for var, h in (("value", d.value_histogram), ("year", d.year_histogram)):
            for b, count in enumerate(h.counts):
                rows.append([unit, quantity, var, b, float(h.edges[b]), float(h.edges[b + 1]), int(count)])
    return Table(
        "histograms",
        ["unit", "quantity", "variable", "bin", "lower_edge", "upper_edge", "count"],
        rows,
    )


def distributions_from_report(report: Report, histograms: Report | None = None, quantity: str = "emissions"):
    """Rebuild :class:`PeakDistribution` objects from simulation reports."""
    hist: dict[tuple[str, str], list] = {}
    if histograms is not None:
        for r in histograms.records("histograms"):
            if r["quantity"] == quantity:
                hist.setdefault((r["unit"], r["variable"]), []).append(r)

    def build(unit, var):
        rows = sorted(hist.get((unit, var), []), key=lambda r: r["bin"])
        if not rows:
            return Histogram(np.array([]), np.array([], dtype=np.int64))
        edges = [float(r["lower_edge"]) for r in rows] + [float(rows[-1]["upper_edge"])]
        return Histogram(np.array(edges), np.array([int(r["count"]) for r in rows]))

    out = {}
    for r in report.records("distributions"):
        if r["quantity"] != quantity:
            continue
        u = r["unit"]
        out[u] = PeakDistribution(
            n=int(r["n"]),
            mean_value=float(r["mean_value"]),
            sd_value=float(r["sd_value"]),
            mean_year=float(r["mean_year"]),
            sd_year=float(r["sd_year"]),
            value_percentiles={percentile_key(p): float(r[f"value_{percentile_key(p)}"]) for p in PERCENTILES},
            year_percentiles={percentile_key(p): float(r[f"year_{percentile_key(p)}"]) for p in PERCENTILES},
            value_histogram=build(u, "value"),
            year_histogram=build(u, "year"),
        )
    return out
