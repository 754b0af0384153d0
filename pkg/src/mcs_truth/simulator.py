"""Synthetic crowdsensing world.

Ground truth has a daily cycle on top of spatially smooth per-region
levels, plus slowly varying noise. A clean pre-task history precedes the
task so that forecasters have something to learn from. Normal MUs report
the truth; malicious MUs report ``G * (1 + e)`` with ``e ~ N(mu, sigma^2)``.

Every random stream is spawned from the scenario seed, so turning one
injector on or off leaves the other draws unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .core import DomainError, MeanVector, RegionGrid, SensingReport, SlotBatch, flatten, group_batches
from .io import TRUTH_HEADER, write_rows

SEASON = 48
AMPLITUDE = 0.4


@dataclass(frozen=True)
class GroundTruthSeries:
    """True values for slots ``first_slot .. first_slot + len(values) - 1``.

    ``values[k, n - 1]`` is the truth of region ``n`` at slot ``first_slot + k``.
    Slots ``<= 0`` form the pre-task history.
    """

    values: np.ndarray
    first_slot: int = 1

    @property
    def n_regions(self) -> int:
        return self.values.shape[1]

    @property
    def slots(self) -> range:
        return range(self.first_slot, self.first_slot + len(self.values))

    @property
    def task(self) -> np.ndarray:
        return self.values[max(0, 1 - self.first_slot):]

    @property
    def task_slots(self) -> range:
        return range(max(1, self.first_slot), self.first_slot + len(self.values))

    @property
    def history(self) -> np.ndarray:
        return self.values[:max(0, 1 - self.first_slot)]

    def at(self, slot: int, region: int) -> float:
        return float(self.values[slot - self.first_slot, region - 1])

    def history_means(self) -> list[MeanVector]:
        return [MeanVector(self.first_slot + k, row.copy()) for k, row in enumerate(self.history)]

    def to_csv(self, path, task_only: bool = False) -> None:
        first = 1 if task_only else self.first_slot
        rows = ((t, n + 1, float(self.values[t - self.first_slot, n]))
                for t in range(first, self.first_slot + len(self.values)) for n in range(self.n_regions))
        write_rows(path, TRUTH_HEADER, rows)


def _base_levels(grid: RegionGrid, rng: np.random.Generator, level: float = 100.0,
                 max_step: float = np.log(1.2)) -> np.ndarray:
    """Smooth log-level field; adjacent cells differ by less than ``max_step`` in log space."""
    n_waves = 3
    hh, ww = np.meshgrid(np.arange(grid.height), np.arange(grid.width), indexing="ij")
    field_ = np.zeros((grid.height, grid.width))
    freqs = rng.uniform(0.15, 0.6, size=(n_waves, 2)) * rng.choice([-1, 1], size=(n_waves, 2))
    phases = rng.uniform(0, 2 * np.pi, size=n_waves)
    # |d field / d step| <= sum(amp * |freq|) <= 0.9 * max_step along either axis
    amp = 0.9 * max_step / (n_waves * np.abs(freqs).max())
    for (fh, fw), ph in zip(freqs, phases):
        field_ += amp * np.sin(fh * hh + fw * ww + ph)
    return (level * np.exp(field_)).ravel()


def generate_truth(T: int, N: int, seed: int, history_slots: int = 7 * SEASON,
                   noise: float = 0.02, amplitude: float = AMPLITUDE, season: int = SEASON,
                   ar: float = 0.9) -> GroundTruthSeries:
    """Synthetic ground truth for ``T`` task slots preceded by ``history_slots``.

    ``G = base_n * (1 + amplitude * sin(2 pi t / season + phi_n)) + base_n * z``
    where ``z`` is a per-region AR(1) process with stationary standard
    deviation ``noise``. Values are clamped to at least 5% of the base level.
    """
    if T < 1 or N < 1:
        raise DomainError("T and N must be >= 1")
    rng = np.random.default_rng(seed)
    grid = RegionGrid.for_regions(N)
    base = _base_levels(grid, rng)
    phi = rng.normal(0.0, 0.3, size=N)
    total = history_slots + T
    t = np.arange(1 - history_slots, T + 1)
    z = np.empty((total, N))
    z[0] = rng.normal(0.0, noise, size=N)
    innov = rng.normal(0.0, noise * np.sqrt(1 - ar * ar), size=(total, N))
    for k in range(1, total):
        z[k] = ar * z[k - 1] + innov[k]
    cycle = 1.0 + amplitude * np.sin(2 * np.pi * t[:, None] / season + phi[None, :])
    values = base[None, :] * (cycle + z)
    values = np.maximum(values, 0.05 * base[None, :])
    return GroundTruthSeries(values, 1 - history_slots)


@dataclass(frozen=True)
class ScenarioConfig:
    n_mus: int = 100
    malicious_fraction: float = 0.1
    k: int = 30
    T: int = 120
    N: int = 32
    mu: float = 0.3
    sigma: float = 0.1
    normal_noise: float = 0.0
    seed: int = 0
    history_slots: int = 7 * SEASON
    truth_noise: float = 0.02
    bursty: bool = False
    bursty_sets: int = 3
    bursty_slots: int = 7
    bursty_regions: int = 4
    bursty_factor: float = 0.5
    sparsity: float = 1.0
    clean_fraction: float = 1.0
    history_noise: float = 0.1
    low_noise_mu: float | None = None

    def __post_init__(self):
        if self.n_mus < 1:
            raise DomainError("n_mus must be >= 1")
        if not 0 < self.k < self.T:
            raise DomainError("need 0 < k < T")
        if not 0 <= self.malicious_fraction < 0.5:
            raise DomainError("malicious_fraction must lie in [0, 0.5)")
        if self.N < 1:
            raise DomainError("N must be >= 1")
        if self.mu < 0 or self.sigma < 0 or self.normal_noise < 0:
            raise DomainError("error parameters must be >= 0")
        if not 0 < self.sparsity <= 1:
            raise DomainError("sparsity must lie in (0, 1]")
        if not 0 <= self.clean_fraction <= 1:
            raise DomainError("clean_fraction must lie in [0, 1]")
        if self.low_noise_mu is not None and self.low_noise_mu < 0:
            raise DomainError("low_noise_mu must be >= 0")
        if self.bursty and (self.bursty_slots > self.T or self.bursty_regions > self.N):
            raise DomainError("bursty window larger than the task")

    @property
    def n_malicious(self) -> int:
        return int(np.floor(self.n_mus * self.malicious_fraction + 1e-9))

    @property
    def effective_mu(self) -> float:
        return self.mu if self.low_noise_mu is None else self.low_noise_mu


@dataclass(frozen=True)
class MuProfile:
    id: int
    is_malicious: bool
    schedule: tuple[tuple[int, int], ...]


# (rng, mu_id, slot, n_regions) -> region
Placement = Callable[[np.random.Generator, int, int, int], int]


def uniform_placement(rng: np.random.Generator, mu: int, slot: int, n_regions: int) -> int:
    return int(rng.integers(1, n_regions + 1))


def _streams(seed: int) -> dict[str, np.random.Generator]:
    names = ("truth", "population", "errors", "bursty", "sparsity", "history")
    seqs = np.random.SeedSequence(seed).spawn(len(names))
    return {name: np.random.default_rng(s) for name, s in zip(names, seqs)}


def build_population(cfg: ScenarioConfig, rng: np.random.Generator | None = None,
                     placement: Placement = uniform_placement) -> list[MuProfile]:
    if rng is None:
        rng = _streams(cfg.seed)["population"]
    malicious = set((rng.permutation(cfg.n_mus)[:cfg.n_malicious] + 1).tolist())
    profiles = []
    for i in range(1, cfg.n_mus + 1):
        slots = np.sort(rng.choice(cfg.T, size=cfg.k, replace=False) + 1)
        schedule = tuple((int(t), placement(rng, i, int(t), cfg.N)) for t in slots)
        profiles.append(MuProfile(i, i in malicious, schedule))
    return profiles


def emit_reports(truth: GroundTruthSeries, profiles: Sequence[MuProfile], cfg: ScenarioConfig,
                 rng: np.random.Generator | None = None) -> list[SlotBatch]:
    """One batch per task slot. Malicious errors are drawn with mean ``cfg.mu``."""
    if rng is None:
        rng = _streams(cfg.seed)["errors"]
    reports = []
    for prof in profiles:
        for t, n in prof.schedule:
            g = truth.at(t, n)
            if prof.is_malicious:
                v = g * (1.0 + rng.normal(cfg.mu, cfg.sigma))
            elif cfg.normal_noise > 0:
                v = g * (1.0 + rng.normal(0.0, cfg.normal_noise))
            else:
                v = g
            reports.append(SensingReport(prof.id, t, n, float(v)))
    return group_batches(reports, cfg.T)


def draw_bursty_windows(cfg: ScenarioConfig, rng: np.random.Generator,
                        max_tries: int = 10_000) -> list[tuple[int, int]]:
    """``(first_slot, first_region)`` of each burst window, pairwise disjoint."""
    windows: list[tuple[int, int]] = []
    tries = 0
    while len(windows) < cfg.bursty_sets:
        tries += 1
        if tries > max_tries:
            raise DomainError("could not place disjoint bursty windows")
        t0 = int(rng.integers(1, cfg.T - cfg.bursty_slots + 2))
        n0 = int(rng.integers(1, cfg.N - cfg.bursty_regions + 2))
        clash = any(abs(t0 - t1) < cfg.bursty_slots and abs(n0 - n1) < cfg.bursty_regions
                    for t1, n1 in windows)
        if not clash:
            windows.append((t0, n0))
    return windows


def bursty_cells(cfg: ScenarioConfig, windows: Sequence[tuple[int, int]]) -> set[tuple[int, int]]:
    return {(t, n) for t0, n0 in windows
            for t in range(t0, t0 + cfg.bursty_slots) for n in range(n0, n0 + cfg.bursty_regions)}


def inject_scenarios(truth: GroundTruthSeries, batches: Sequence[SlotBatch], cfg: ScenarioConfig,
                     profiles: Sequence[MuProfile] = (), streams: dict | None = None):
    """Apply the configured perturbations to an emitted scenario.

    Returns ``(truth, batches, history, info)``. ``history`` is the list of
    pre-task :class:`MeanVector` after the noisy-history perturbation;
    ``info`` records burst windows.
    """
    if streams is None:
        streams = _streams(cfg.seed)
    info: dict = {}
    reports = flatten(batches)

    if cfg.low_noise_mu is not None and cfg.low_noise_mu != cfg.mu:
        # same draws, shifted mean: e' = e - mu + mu'
        bad = {p.id for p in profiles if p.is_malicious}
        shift = cfg.low_noise_mu - cfg.mu
        reports = [SensingReport(r.mu, r.slot, r.region, r.value + truth.at(r.slot, r.region) * shift)
                   if r.mu in bad else r for r in reports]

    if cfg.bursty:
        windows = draw_bursty_windows(cfg, streams["bursty"])
        cells = bursty_cells(cfg, windows)
        values = truth.values.copy()
        for t, n in cells:
            values[t - truth.first_slot, n - 1] *= cfg.bursty_factor
        truth = GroundTruthSeries(values, truth.first_slot)
        reports = [SensingReport(r.mu, r.slot, r.region, r.value * cfg.bursty_factor)
                   if (r.slot, r.region) in cells else r for r in reports]
        info["bursty_windows"] = windows

    if cfg.sparsity < 1.0:
        keep = int(round(cfg.sparsity * len(reports)))
        idx = np.sort(streams["sparsity"].choice(len(reports), size=keep, replace=False))
        reports = [reports[i] for i in idx]

    history = truth.history_means()
    if cfg.clean_fraction < 1.0 and history:
        rng = streams["history"]
        hist = np.stack([m.means for m in history])
        n_noisy = int(round((1.0 - cfg.clean_fraction) * hist.size))
        flat = rng.choice(hist.size, size=n_noisy, replace=False)
        xi = rng.normal(0.0, cfg.history_noise, size=n_noisy)
        hist.ravel()[flat] *= 1.0 + xi
        history = [MeanVector(m.slot, hist[k]) for k, m in enumerate(history)]

    return truth, group_batches(reports, cfg.T), history, info


@dataclass
class Scenario:
    config: ScenarioConfig
    truth: GroundTruthSeries
    profiles: list[MuProfile]
    batches: list[SlotBatch]
    history: list[MeanVector]
    info: dict = field(default_factory=dict)

    @property
    def malicious(self) -> np.ndarray:
        return np.array([p.is_malicious for p in self.profiles])

    @property
    def reports(self) -> list[SensingReport]:
        return flatten(self.batches)


def simulate(cfg: ScenarioConfig, placement: Placement = uniform_placement) -> Scenario:
    streams = _streams(cfg.seed)
    truth = generate_truth(cfg.T, cfg.N, int(streams["truth"].integers(2**63)),
                           history_slots=cfg.history_slots, noise=cfg.truth_noise)
    profiles = build_population(cfg, streams["population"], placement)
    batches = emit_reports(truth, profiles, cfg, streams["errors"])
    truth, batches, history, info = inject_scenarios(truth, batches, cfg, profiles, streams)
    return Scenario(cfg, truth, profiles, batches, history, info)


def with_overrides(cfg: ScenarioConfig, **kw) -> ScenarioConfig:
    return replace(cfg, **kw)
