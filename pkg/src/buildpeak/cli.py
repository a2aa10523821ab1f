"""Command-line front end: validate, project, simulate and allocate.

Every stage writes plain-text reports that the next stage reads back, so an
allocation can be recomputed with a different strategy without re-running
the simulation.  Exit status is 0 on success, 1 on a validation or domain
error and 2 on an I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .allocation import BASES, DEFAULT_BASIS, DEFAULT_STRATEGY, STRATEGIES, ProvincePeakSummary, allocate
from .data_io import (
    EXTENSIONS,
    FORMATS,
    BundleValidationError,
    Report,
    Table,
    bundle_file,
    distribution_table,
    distributions_from_report,
    find_report,
    histogram_table,
    load_bundle,
    peak_rows,
    peaks_from_report,
    read_report,
    write_report,
)
from .distribution import prob_peak_in_interval, prob_peak_by_year, summarize, uncertainty_bands
from .emission_core import ValidationError
from .monte_carlo import NATIONAL, QUANTITIES, SCOPES, RedrawLimitError, run_mc
from .scenario import project_static

log = logging.getLogger("buildpeak")

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2
MANIFEST_FILE = "manifest.json"


class CommandError(Exception):
    """A domain error detected by a command; maps to exit status 1."""


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _bundle_digest(path) -> dict[str, str]:
    doc_path = bundle_file(path)
    doc = json.loads(doc_path.read_text(encoding="utf-8"))
    files = [doc_path.name, doc.get("region_map")] + [s.get("anchors") for s in doc.get("scenarios", [])]
    return {f: _sha256(doc_path.parent / f) for f in files if isinstance(f, str)}


def _write_manifest(out: Path, args, argv, scenarios, seed, draws, started: float) -> Path:
    options = {
        k: v for k, v in sorted(vars(args).items()) if k not in ("func", "verbose", "argv") and v is not None
    }
    manifest = {
        "command": args.command,
        "argv": list(argv),
        "options": {k: (str(v) if isinstance(v, Path) else v) for k, v in options.items()},
        "bundle": str(Path(args.bundle).resolve()),
        "bundle_sha256": _bundle_digest(args.bundle),
        "scenarios": list(scenarios),
        "seed": seed,
        "draws": draws,
        "workers": getattr(args, "workers", None),
        "output_directory": str(out.resolve()),
        "engine_version": __version__,
        "python": sys.version.split()[0],
        "duration_seconds": round(time.perf_counter() - started, 3),
    }
    path = out / MANIFEST_FILE
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _scenario(bundle, name):
    if name is None:
        if len(bundle.scenarios) != 1:
            raise CommandError(f"--scenario is required; bundle defines {sorted(bundle.scenarios)}")
        name = next(iter(bundle.scenarios))
    return bundle.scenario(name)


def _emit(report: Report, fmt: str, out: Path, stem: str) -> Path:
    path = write_report(report, fmt, out / (stem + EXTENSIONS[fmt]))
    print(path)
    return path


def cmd_validate(args) -> int:
    errors = []
    try:
        load_bundle(args.bundle)
    except BundleValidationError as exc:
        errors = exc.errors
    for e in errors:
        print(e)
    if errors:
        return EXIT_INVALID
    print(f"{bundle_file(args.bundle)}: valid")
    return EXIT_OK


def _series_table(proj) -> Table:
    rows = []
    units = [(p, proj.emissions[p], proj.energy[p]) for p in proj.regions]
    units.append((NATIONAL, proj.national_emissions, proj.national_energy))
    for unit, em, en in units:
        for year, c, e in zip(em.years, em.values, en.values):
            rows.append([unit, int(year), float(c), float(e)])
    return Table("series", ["unit", "year", "emissions_mtco2", "energy_mtce"], rows)


def cmd_project(args) -> int:
    started = time.perf_counter()
    bundle = load_bundle(args.bundle)
    spec = _scenario(bundle, args.scenario)
    proj = project_static(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    em_peaks, en_peaks = proj.peaks, proj.energy_peaks
    em_peaks[NATIONAL] = proj.national_peak
    en_peaks[NATIONAL] = proj.national_energy_peak
    _emit(Report("static peaks", [peak_rows(em_peaks, en_peaks)]), args.format, out, "static_peaks")
    _emit(Report("static trajectories", [_series_table(proj)]), args.format, out, "static_series")
    _write_manifest(out, args, args.argv, [spec.name], None, None, started)
    pk = proj.national_peak
    log.info("national static peak %s: %.6g in %d", spec.name, pk.value, pk.year)
    return EXIT_OK


def _config(bundle, args):
    if bundle.uncertainty is None:
        raise CommandError("bundle has no uncertainty configuration")
    cfg = bundle.uncertainty
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.draws is not None:
        changes["draws"] = args.draws
    return dataclasses.replace(cfg, **changes) if changes else cfg


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    bundle = load_bundle(args.bundle)
    spec = _scenario(bundle, args.scenario)
    cfg = _config(bundle, args)
    result = run_mc(spec, cfg, scope=args.scope, quantity=args.quantity, workers=args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    dists = {u: summarize(s, cfg.histogram_bins) for u, s in result.samples.items()}
    static_peaks = result.static_peaks
    _emit(
        Report("peak distribution", [distribution_table(dists, static_peaks, args.quantity)]),
        args.format, out, "peak_distribution",
    )
    _emit(Report("peak histograms", [histogram_table(dists, args.quantity)]), args.format, out, "histograms")

    first, last = spec.horizon
    rows = [
        [u, y, prob_peak_by_year(s, y)]
        for u, s in result.samples.items()
        for y in range(first, last + 1)
    ]
    _emit(
        Report("probability of peaking by year", [Table("prob_peak_by_year", ["unit", "year", "probability"], rows)]),
        args.format, out, "prob_peak_by_year",
    )

    band_rows, masses = [], []
    for u, static in result.static.items():
        bands = uncertainty_bands(static, cfg.sigma_c, base=cfg.ramp_base_year, end=cfg.ramp_end_year)
        masses = [[b.k, b.mass] for b in bands]
        for i, year in enumerate(static.years):
            band_rows.append([u, int(year), float(static.values[i])] + [float(b.lower.values[i]) for b in bands])
    band_cols = ["unit", "year", "static"] + [f"lower_{k}sd" for k, _ in masses]
    _emit(
        Report(
            "uncertainty bands",
            [Table("bands", band_cols, band_rows), Table("band_masses", ["k", "one_sided_mass"], masses)],
        ),
        args.format, out, "bands",
    )
    _emit(Report("static peaks", [peak_rows(static_peaks)]), args.format, out, "static_peaks")

    if args.peak_interval is not None:
        lo, hi = args.peak_interval
        rows = [[u, lo, hi, args.year_bound, prob_peak_in_interval(s, (lo, hi), args.year_bound)]
                for u, s in result.samples.items()]
        _emit(
            Report(
                "peak interval probability",
                [Table("interval", ["unit", "lower", "upper", "year_bound", "probability"], rows)],
            ),
            args.format, out, "peak_interval",
        )
    _write_manifest(out, args, args.argv, [spec.name], cfg.seed, cfg.draws, started)
    if result.redraws:
        log.warning("%d rejected draws were redrawn", result.redraws)
    return EXIT_OK


def _load_results(directory, label):
    d = Path(directory)
    if not d.is_dir():
        raise CommandError(f"{label}: results directory {d} does not exist")
    try:
        static = peaks_from_report(read_report(find_report(d, "static_peaks")))
    except FileNotFoundError:
        raise CommandError(f"{label}: no static_peaks report in {d}") from None
    dynamic = {}
    try:
        path = find_report(d, "peak_distribution")
    except FileNotFoundError:
        pass
    else:
        dynamic = distributions_from_report(read_report(path), quantity="emissions")
    return static, dynamic


def cmd_allocate(args) -> int:
    started = time.perf_counter()
    bundle = load_bundle(args.bundle)
    bau_static, bau_dyn = _load_results(args.bau_results, "--bau-results")
    dec_static, dec_dyn = _load_results(args.dec_results, "--dec-results")
    needs_bau_dyn = args.basis != "static_vs_static"
    needs_dec_dyn = args.basis == "dynamic_mean_vs_dynamic_mean"

    summaries = []
    for p in bundle.region_map.provinces:
        missing = [
            label
            for label, ok in (
                ("BAU static peak", p in bau_static),
                ("decarbonization static peak", p in dec_static),
                ("BAU peak distribution", p in bau_dyn or not needs_bau_dyn),
                ("decarbonization peak distribution", p in dec_dyn or not needs_dec_dyn),
            )
            if not ok
        ]
        if missing:
            raise CommandError(
                f"province {p!r}: missing {', '.join(missing)} (simulate with --scope province)"
            )
        summaries.append(ProvincePeakSummary(p, bau_static[p], dec_static[p], bau_dyn.get(p), dec_dyn.get(p)))
    scheme = allocate(summaries, args.strategy, args.target, bundle.region_map, args.basis)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = [
        [rank, p, bundle.region_map.region_of(p), scheme.potentials[p], amount]
        for rank, (p, amount) in enumerate(scheme.ranked(), start=1)
    ]
    regions = [[r, v.total, v.mean, v.provinces] for r, v in scheme.regional.items()]
    settings = [
        ["strategy", scheme.strategy],
        ["basis", scheme.basis],
        ["national_target", scheme.national_target],
        ["total_reduction", scheme.total],
    ]
    report = Report(
        "reduction allocation",
        [
            Table("allocation", ["rank", "province", "region", "potential", "reduction"], rows),
            Table("regions", ["region", "total", "mean", "provinces"], regions),
            Table("settings", ["key", "value"], settings),
        ],
    )
    _emit(report, args.format, out, "allocation")
    _write_manifest(out, args, args.argv, [], None, None, started)
    return EXIT_OK


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="buildpeak", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--bundle", required=True, help="bundle directory or its bundle.json")
        if out:
            p.add_argument("--out", required=True, help="output directory")
            p.add_argument("--format", choices=FORMATS, default="tabular-text")

    p = sub.add_parser("validate", help="check a bundle and list every problem")
    common(p, out=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("project", help="static trajectories and peaks")
    common(p)
    p.add_argument("--scenario")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("simulate", help="Monte Carlo peak distributions, probabilities and bands")
    common(p)
    p.add_argument("--scenario")
    p.add_argument("--seed", type=_seed, help="overrides the bundle seed")
    p.add_argument("--draws", type=_positive_int, help="overrides the bundle draw count")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--scope", choices=SCOPES, default="national")
    p.add_argument("--quantity", choices=QUANTITIES, default="emissions")
    p.add_argument("--peak-interval", type=float, nargs=2, metavar=("LOW", "HIGH"))
    p.add_argument("--year-bound", type=int, help="with --peak-interval, also require peaking by this year")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("allocate", help="allocate reductions from BAU and decarbonization results")
    common(p)
    p.add_argument("--bau-results", required=True, help="output directory of a BAU project/simulate run")
    p.add_argument("--dec-results", required=True, help="output directory of a decarbonization run")
    p.add_argument("--strategy", choices=STRATEGIES, default=DEFAULT_STRATEGY)
    p.add_argument("--basis", choices=BASES, default=DEFAULT_BASIS)
    p.add_argument("--target", type=float, help="national reduction target (proportional strategy)")
    p.set_defaults(func=cmd_allocate)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except BundleValidationError as exc:
        for e in exc.errors:
            print(e, file=sys.stderr)
        return EXIT_INVALID
    except (ValidationError, CommandError, RedrawLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
