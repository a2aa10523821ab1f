"""
Dynamic scenario simulation.

Each draw perturbs a static projection with Gaussian multipliers whose effect
grows linearly from zero at the ramp base year to full strength at the ramp
end year::

    dynamic(T) = static(T) * (1 + omega * ramp(T)),   ramp(T) = (T - base) / (end - base)

Two modes are supported.  In ``aggregate`` mode a single ``omega_c`` scales
the whole trajectory.  In ``per-parameter`` mode population, floor area,
energy intensity and composite carbon intensity each get their own ramped
multiplier and emissions are recomposed through the Kaya product.

Draws whose multiplier would turn non-positive anywhere on the horizon are
rejected and redrawn from the next counter attempt; see :mod:`buildpeak.rng`.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from .emission_core import (
    EmissionTrajectory,
    KayaInputs,
    Peak,
    ValidationError,
    detect_peak,
)
from .rng import normal_block
from .scenario import ScenarioSpec, project_static

log = logging.getLogger(__name__)

MODES = ("aggregate", "per-parameter")
SCOPES = ("national", "province")
QUANTITIES = ("emissions", "energy")
NATIONAL = "national"

#: Draws per work unit.  Fixed so results never depend on the worker count.
CHUNK_SIZE = 4096
REDRAW_FACTOR = 1000


class NegativeDrawError(ValidationError):
    """A perturbation would make a parameter or trajectory non-positive."""


class RedrawLimitError(RuntimeError):
    """Rejection sampling needed more than ``REDRAW_FACTOR * draws`` redraws."""


@dataclass(frozen=True)
class UncertaintyConfig:
    seed: int
    mode: str = "aggregate"
    sigma_c: float = 0.0
    sigma_P: float = 0.0
    sigma_f: float = 0.0
    sigma_e: float = 0.0
    sigma_K: float = 0.0
    draws: int = 100_000
    ramp_base_year: int = 2020
    ramp_end_year: int = 2060
    histogram_bins: int = 100

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}")
        for name in ("sigma_c", "sigma_P", "sigma_f", "sigma_e", "sigma_K"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ValidationError(f"{name} must be a finite value >= 0, got {v!r}")
        if int(self.draws) != self.draws or self.draws < 1:
            raise ValidationError(f"draws must be an integer >= 1, got {self.draws!r}")
        if not 0 <= int(self.seed) < 2**64 or int(self.seed) != self.seed:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if not self.ramp_base_year < self.ramp_end_year:
            raise ValidationError("ramp_base_year must precede ramp_end_year")
        if int(self.histogram_bins) != self.histogram_bins or self.histogram_bins < 1:
            raise ValidationError("histogram_bins must be an integer >= 1")

    @property
    def sigmas(self) -> np.ndarray:
        """Per-block scale of the four normals for the configured mode."""
        if self.mode == "aggregate":
            return np.array([self.sigma_c, 0.0, 0.0, 0.0])
        return np.array([self.sigma_P, self.sigma_f, self.sigma_e, self.sigma_K])


def ramp(years, base: int = 2020, end: int = 2060) -> np.ndarray:
    """Linear time weight, 0 at or before ``base`` and 1 at ``end``."""
    years = np.asarray(years, dtype=float)
    return np.clip((years - base) / (end - base), 0.0, None)


def perturb_parameters(
    inputs: KayaInputs,
    omega_P: float = 0.0,
    omega_f: float = 0.0,
    omega_e: float = 0.0,
    omega_K: float = 0.0,
    ramp_weight: float = 1.0,
) -> KayaInputs:
    """Apply ramped multiplicative perturbations to one year's inputs.

    The carbon-intensity multiplier is applied to all three emission factors,
    which scales the composite intensity by the same amount whatever the
    ``bipg_scope``.
    """
    mult = {}
    for name, omega in (("P", omega_P), ("f", omega_f), ("e", omega_e), ("K", omega_K)):
        m = 1.0 + omega * ramp_weight
        if not m > 0:
            raise NegativeDrawError(f"omega_{name}={omega!r} gives multiplier {m!r}")
        mult[name] = m
    return replace(
        inputs,
        population=inputs.population * mult["P"],
        floor_area_per_capita=inputs.floor_area_per_capita * mult["f"],
        energy_intensity=inputs.energy_intensity * mult["e"],
        factors=inputs.factors.scaled(mult["K"]),
    )


def dynamic_trajectory(
    static: EmissionTrajectory, omega_c: float, base: int = 2020, end: int = 2060
) -> EmissionTrajectory:
    if static.end_year > end:
        raise ValidationError(f"trajectory runs past the ramp end year {end}")
    w = ramp(static.years, base, end)
    if not 1.0 + omega_c * w.max() > 0:
        raise NegativeDrawError(f"omega_c={omega_c!r} makes the trajectory negative")
    return EmissionTrajectory(static.start_year, static.values * (1.0 + omega_c * w), static.unit)


@dataclass(frozen=True)
class PeakSample:
    draw_index: int
    peak_year: int
    peak_value: float


@dataclass
class PeakSamples:
    """Column-oriented collection of per-draw peaks, sorted by draw index."""

    draw_index: np.ndarray
    peak_year: np.ndarray
    peak_value: np.ndarray

    @classmethod
    def from_pairs(cls, pairs) -> "PeakSamples":
        pairs = list(pairs)
        years = np.array([int(y) for y, _ in pairs], dtype=np.int64)
        values = np.array([float(v) for _, v in pairs], dtype=float)
        return cls(np.arange(len(pairs)), years, values)

    def __len__(self):
        return self.draw_index.size

    def __iter__(self) -> Iterator[PeakSample]:
        for d, y, v in zip(self.draw_index, self.peak_year, self.peak_value):
            yield PeakSample(int(d), int(y), float(v))

    def __eq__(self, other):
        if not isinstance(other, PeakSamples):
            return NotImplemented
        return (
            np.array_equal(self.draw_index, other.draw_index)
            and np.array_equal(self.peak_year, other.peak_year)
            and np.array_equal(self.peak_value, other.peak_value)
        )


def as_samples(samples) -> PeakSamples:
    """Accept PeakSamples, PeakSample objects or (year, value) pairs."""
    if isinstance(samples, PeakSamples):
        return samples
    items = list(samples)
    if items and isinstance(items[0], PeakSample):
        items = sorted(items, key=lambda s: s.draw_index)
        return PeakSamples(
            np.array([s.draw_index for s in items], dtype=np.int64),
            np.array([s.peak_year for s in items], dtype=np.int64),
            np.array([s.peak_value for s in items], dtype=float),
        )
    return PeakSamples.from_pairs(items)


@dataclass
class MonteCarloResult:
    scenario: str
    scope: str
    quantity: str
    config: UncertaintyConfig
    start_year: int
    static: dict[str, EmissionTrajectory]
    samples: dict[str, PeakSamples]
    redraws: int = 0
    trajectories: dict[str, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)

    @property
    def units(self) -> list[str]:
        return list(self.samples)

    @property
    def static_peaks(self) -> dict[str, Peak]:
        return {u: detect_peak(t) for u, t in self.static.items()}


@dataclass
class _Work:
    """Everything a worker needs to evaluate a block of draws."""

    seed: int
    mode: str
    quantity: str
    sigmas: np.ndarray
    ramp: np.ndarray
    units: list[str]
    static: np.ndarray  # (units, years): static series of the quantity
    national_sum: bool
    redraw_limit: int
    keep: np.ndarray


def _draw_omegas(work: _Work, draws: np.ndarray, unit: int):
    """Accepted perturbations for a block of draws, plus the redraw count."""
    sig = work.sigmas
    rmax = work.ramp.max() if work.ramp.size else 0.0
    attempt = np.zeros(draws.size, dtype=np.uint64)
    omega = normal_block(work.seed, draws, unit, attempt) * sig
    bad = np.any(1.0 + omega * rmax <= 0, axis=1)
    redraws = 0
    while bad.any():
        idx = np.flatnonzero(bad)
        redraws += idx.size
        if redraws > work.redraw_limit:
            raise RedrawLimitError(
                f"more than {work.redraw_limit} redraws; sigma values {sig.tolist()} "
                "are too large for the rejection policy"
            )
        attempt[idx] += 1
        omega[idx] = normal_block(work.seed, draws[idx], unit, attempt[idx]) * sig
        bad[idx] = np.any(1.0 + omega[idx] * rmax <= 0, axis=1)
    return omega, redraws


def _unit_block(work: _Work, u: int, omega: np.ndarray) -> np.ndarray:
    r = work.ramp[None, :]
    static = work.static[u][None, :]
    if work.mode == "aggregate":
        return static * (1.0 + omega[:, :1] * r)
    # P' f' e' K' = P f e K * mP mf me mK, so the Kaya product is recomposed
    # by scaling the static series with the ramped multipliers
    mult = (1.0 + omega[:, 0:1] * r) * (1.0 + omega[:, 1:2] * r) * (1.0 + omega[:, 2:3] * r)
    if work.quantity == "emissions":
        mult = mult * (1.0 + omega[:, 3:4] * r)
    return static * mult


def _run_chunk(args):
    work, lo, hi = args
    draws = np.arange(lo, hi, dtype=np.uint64)
    n = draws.size
    out_year, out_value, kept = {}, {}, {}
    redraws = 0
    national = None
    keep = work.keep[(work.keep >= lo) & (work.keep < hi)] - lo
    for u, name in enumerate(work.units):
        omega, rd = _draw_omegas(work, draws, u)
        redraws += rd
        block = _unit_block(work, u, omega)
        idx = np.argmax(block, axis=1)
        out_year[name] = idx
        out_value[name] = block[np.arange(n), idx]
        if keep.size:
            kept[name] = block[keep]
        if work.national_sum:
            national = block.copy() if national is None else national + block
    if work.national_sum:
        idx = np.argmax(national, axis=1)
        out_year[NATIONAL] = idx
        out_value[NATIONAL] = national[np.arange(n), idx]
        if keep.size:
            kept[NATIONAL] = national[keep]
    return lo, out_year, out_value, kept, redraws


def run_mc(
    spec: ScenarioSpec,
    config: UncertaintyConfig,
    scope: str = "national",
    quantity: str = "emissions",
    workers: int = 1,
    keep_trajectories: int = 0,
) -> MonteCarloResult:
    """Simulate ``config.draws`` dynamic trajectories and record their peaks.

    Parameters
    ----------
    scope : {"national", "province"}
        ``national`` perturbs the national aggregate with one set of
        multipliers per draw.  ``province`` draws independent multipliers for
        every province and also reports the national sum of the perturbed
        provincial trajectories under the key ``"national"``.
    quantity : {"emissions", "energy"}
        Which series is perturbed.  In aggregate mode the same ramped
        multiplier is applied to the static energy series; in per-parameter
        mode energy ignores the carbon-intensity multiplier.
    workers : int
        Process count.  Results are bit-identical for any value.
    keep_trajectories : int
        Number of evenly spaced draws whose full trajectories are retained.
    """
    if scope not in SCOPES:
        raise ValidationError(f"scope must be one of {SCOPES}, got {scope!r}")
    if quantity not in QUANTITIES:
        raise ValidationError(f"quantity must be one of {QUANTITIES}, got {quantity!r}")
    first, last = spec.horizon
    if last > config.ramp_end_year:
        raise ValidationError(
            f"horizon ends {last}, after the ramp end year {config.ramp_end_year}"
        )
    years = spec.years
    proj = project_static(spec)

    if scope == "national":
        units = [NATIONAL]
        source = {NATIONAL: proj.national_emissions if quantity == "emissions" else proj.national_energy}
        static = dict(source)
    else:
        units = proj.regions
        source = proj.emissions if quantity == "emissions" else proj.energy
        static = dict(source)
        static[NATIONAL] = proj.national_emissions if quantity == "emissions" else proj.national_energy
    static_arr = np.stack([source[u].values for u in units])

    draws = int(config.draws)
    keep = np.array([], dtype=np.int64)
    if keep_trajectories:
        keep = np.unique(np.linspace(0, draws - 1, keep_trajectories).astype(np.int64))
    work = _Work(
        seed=int(config.seed),
        mode=config.mode,
        quantity=quantity,
        sigmas=config.sigmas,
        ramp=ramp(years, config.ramp_base_year, config.ramp_end_year),
        units=units,
        static=static_arr,
        national_sum=scope == "province",
        redraw_limit=REDRAW_FACTOR * draws,
        keep=keep,
    )
    chunks = [(work, lo, min(lo + CHUNK_SIZE, draws)) for lo in range(0, draws, CHUNK_SIZE)]
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, chunks))
    else:
        parts = [_run_chunk(c) for c in chunks]
    parts.sort(key=lambda p: p[0])

    redraws = sum(p[4] for p in parts)
    if redraws > work.redraw_limit:
        raise RedrawLimitError(f"{redraws} redraws exceed the limit of {work.redraw_limit}")
    if redraws:
        log.info("scenario %s: %d rejected draws were redrawn", spec.name, redraws)

    names = units + ([NATIONAL] if scope == "province" else [])
    index = np.arange(draws, dtype=np.int64)
    samples = {}
    for name in names:
        yidx = np.concatenate([p[1][name] for p in parts])
        vals = np.concatenate([p[2][name] for p in parts])
        samples[name] = PeakSamples(index, first + yidx.astype(np.int64), vals)
    kept = {}
    if keep.size:
        for name in names:
            kept[name] = (keep, np.concatenate([p[3][name] for p in parts if name in p[3]]))
    return MonteCarloResult(
        scenario=spec.name,
        scope=scope,
        quantity=quantity,
        config=config,
        start_year=first,
        static={n: static[n] for n in names},
        samples=samples,
        redraws=redraws,
        trajectories=kept,
    )
