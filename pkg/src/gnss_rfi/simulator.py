"""Synthetic helicopter flights with optional common-mode GNSS jamming.

Each tracked satellite's C/No is a nominal level plus a slow sinusoidal
drift, an attitude coupling term ``gain_roll * roll + gain_pitch * pitch``
(radians, per-satellite gains of either sign), and clipped Gaussian noise.
A jamming event subtracts the same trapezoidal depth profile from every
tracked channel; samples pushed below the tracking floor are dropped.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .recording import (
    DENSE_COLUMNS,
    N_CHANNELS,
    N_CNO,
    Dataset,
    FlightRecording,
    quantize,
    write_flight_csv,
    write_manifest,
)

_RANGE_FIELDS = (
    "duration_range",
    "tracked_satellites_range",
    "nominal_cno_range",
    "attitude_gain_range",
    "drift_amplitude_range",
    "drift_period_range",
    "jam_depth_range",
    "jam_ramp_range",
    "jam_plateau_range",
    "maneuver_count_range",
    "maneuver_duration_range",
)


@dataclass(frozen=True)
class SimulationConfig:
    seed: int = 0
    n_flights: int = 100
    jam_prevalence: float = 0.15
    duration_range: tuple = (600, 2800)
    tracked_satellites_range: tuple = (8, 12)
    nominal_cno_range: tuple = (38.0, 45.0)
    noise_sigma: float = 0.7
    attitude_gain_range: tuple = (-3.0, 3.0)  # dB per radian
    drift_amplitude_range: tuple = (0.0, 0.5)  # dB, <= 2
    drift_period_range: tuple = (3600.0, 7200.0)  # s, >= 300
    jam_depth_range: tuple = (3.0, 10.0)
    jam_ramp_range: tuple = (10, 60)
    jam_plateau_range: tuple = (30, 600)
    jam_guard: int = 180  # maneuver-free seconds before a jam
    maneuver_count_range: tuple = (0, 3)
    maneuver_amplitude_max: float = 30.0  # degrees
    maneuver_duration_range: tuple = (20, 60)
    loss_of_track: float = 28.0

    def __post_init__(self):
        for name in _RANGE_FIELDS:
            value = getattr(self, name)
            if len(value) != 2:
                raise ValueError(f"{name} must be a (min, max) pair")
            lo, hi = value
            if not lo < hi and name not in ("maneuver_count_range",):
                raise ValueError(f"{name} must be non-degenerate, got {value}")
            object.__setattr__(self, name, (lo, hi))
        if not 0.0 <= self.jam_prevalence <= 1.0:
            raise ValueError("jam_prevalence must be in [0, 1]")
        if self.duration_range[0] < 60:
            raise ValueError("minimum duration must be at least 60 s")
        if self.n_flights < 1:
            raise ValueError("n_flights must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        lo, hi = self.tracked_satellites_range
        if not 1 <= lo <= hi <= N_CNO:
            raise ValueError(f"tracked_satellites_range must lie within [1, {N_CNO}]")
        lo, hi = self.jam_depth_range
        if lo <= 0:
            raise ValueError("jam depths must be positive")
        if self.jam_ramp_range[0] < 1:
            raise ValueError("jam ramp must be >= 1 s")
        if self.drift_amplitude_range[1] > 2.0 or self.drift_period_range[0] < 300:
            raise ValueError("drift must stay within 2 dB amplitude and 300 s minimum period")
        if self.maneuver_count_range[0] > self.maneuver_count_range[1]:
            raise ValueError("maneuver_count_range must be ordered")


@dataclass(frozen=True)
class JammingEvent:
    """Trapezoidal common-mode C/No drop: ramp down, hold, ramp back up.

    The release takes as long as the onset and is truncated at the end of
    the flight.
    """

    start: int
    ramp: int
    plateau: int
    depth: float

    def __post_init__(self):
        if self.ramp < 1:
            raise ValueError("ramp must be >= 1")
        if self.plateau < 0 or self.start < 0:
            raise ValueError("start and plateau must be non-negative")
        if not self.depth > 0:
            raise ValueError("depth must be positive")

    @property
    def plateau_slice(self) -> slice:
        s = self.start + self.ramp
        return slice(s, s + self.plateau)

    @property
    def end(self) -> int:
        """Epoch index one past the release."""
        return self.start + 2 * self.ramp + self.plateau

    def check_fits(self, n_epochs: int) -> None:
        if self.start + self.ramp + self.plateau > n_epochs:
            raise ValueError(
                f"jam window start+ramp+plateau={self.start + self.ramp + self.plateau} "
                f"exceeds flight length {n_epochs}")

    def profile(self, n_epochs: int) -> np.ndarray:
        t = np.arange(n_epochs, dtype=np.float64)
        onset = np.clip((t - self.start + 1) / self.ramp, 0.0, 1.0)
        release = np.clip((self.end - t) / self.ramp, 0.0, 1.0)
        return self.depth * np.minimum(onset, release)


def flight_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for flight ``index``; order of generation does not matter."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def draw_duration(config: SimulationConfig, rng: np.random.Generator) -> int:
    lo, hi = config.duration_range
    return int(rng.integers(int(lo), int(hi) + 1))


def draw_jam(config: SimulationConfig, rng: np.random.Generator, n_epochs: int) -> JammingEvent:
    """Uniform jam parameters, shrunk where needed so the event fits the flight."""
    ramp = int(rng.integers(config.jam_ramp_range[0], config.jam_ramp_range[1] + 1))
    plateau = int(rng.integers(config.jam_plateau_range[0], config.jam_plateau_range[1] + 1))
    depth = float(rng.uniform(*config.jam_depth_range))
    ramp = min(ramp, max(1, n_epochs // 4))
    plateau = max(1, min(plateau, n_epochs - ramp - config.jam_guard))
    earliest = min(config.jam_guard, n_epochs - ramp - plateau)
    start = int(rng.integers(earliest, n_epochs - ramp - plateau + 1))
    return JammingEvent(start=start, ramp=ramp, plateau=plateau, depth=depth)


def _raised_cosine(n_epochs, center, width, amplitude):
    t = np.arange(n_epochs, dtype=np.float64)
    x = (t - center) / (width / 2.0)
    pulse = np.where(np.abs(x) < 1.0, 0.5 * (1.0 + np.cos(np.pi * x)), 0.0)
    return amplitude * pulse


def _attitude(config, rng, n_epochs, exclusion):
    roll = np.zeros(n_epochs)
    pitch = np.full(n_epochs, float(rng.uniform(-3.0, 3.0)))
    # AHRS jitter, degrees
    roll += rng.normal(0.0, 0.5, n_epochs)
    pitch += rng.normal(0.0, 0.3, n_epochs)

    lo, hi = config.maneuver_count_range
    for _ in range(int(rng.integers(lo, hi + 1))):
        width = float(rng.uniform(*config.maneuver_duration_range))
        amp_roll = float(rng.uniform(-1.0, 1.0)) * config.maneuver_amplitude_max
        amp_pitch = float(rng.uniform(-0.5, 0.5)) * config.maneuver_amplitude_max
        for _attempt in range(20):
            center = float(rng.uniform(width / 2, n_epochs - width / 2))
            if exclusion is None:
                break
            a, b = exclusion
            if center + width / 2 < a or center - width / 2 > b:
                break
        else:
            continue
        roll += _raised_cosine(n_epochs, center, width, amp_roll)
        pitch += _raised_cosine(n_epochs, center, width, amp_pitch)
    return np.clip(roll, -180.0, 180.0), np.clip(pitch, -90.0, 90.0)


def simulate_flight(
    config: SimulationConfig,
    rng: np.random.Generator,
    jam: JammingEvent | None = None,
    duration: int | None = None,
    flight_id: str = "SIM",
) -> FlightRecording:
    """Draw one flight from ``rng``; label is 1 exactly when ``jam`` is given."""
    n = draw_duration(config, rng) if duration is None else int(duration)
    if n < 1:
        raise ValueError("duration must be >= 1")
    if jam is not None:
        jam.check_fits(n)
    t = np.arange(n, dtype=np.float64)

    lo, hi = config.tracked_satellites_range
    n_tracked = int(rng.integers(lo, hi + 1))
    sats = np.sort(rng.choice(N_CNO, size=n_tracked, replace=False))
    nominal = rng.uniform(*config.nominal_cno_range, size=n_tracked)
    drift_amp = rng.uniform(*config.drift_amplitude_range, size=n_tracked)
    drift_period = rng.uniform(*config.drift_period_range, size=n_tracked)
    drift_phase = rng.uniform(0.0, 2 * np.pi, size=n_tracked)
    gains = rng.uniform(*config.attitude_gain_range, size=(n_tracked, 2))

    exclusion = None
    if jam is not None:
        exclusion = (jam.start - config.jam_guard, jam.end)
    roll, pitch = _attitude(config, rng, n, exclusion)

    drift = drift_amp[None, :] * np.sin(2 * np.pi * t[:, None] / drift_period[None, :]
                                        + drift_phase[None, :])
    coupling = (np.radians(roll)[:, None] * gains[None, :, 0]
                + np.radians(pitch)[:, None] * gains[None, :, 1])
    sigma = config.noise_sigma
    noise = np.clip(rng.normal(0.0, 1.0, size=(n, n_tracked)), -3.0, 3.0) * sigma
    cno = nominal[None, :] + drift + coupling + noise
    if jam is not None:
        cno -= jam.profile(n)[:, None]
    cno = quantize(cno)
    cno[cno < config.loss_of_track] = np.nan
    cno = np.clip(cno, 0.0, 60.0)

    heading0 = float(rng.uniform(0.0, 360.0))
    heading = np.mod(heading0 + np.cumsum(rng.normal(0.0, 0.5, n)), 360.0)
    tas_base = float(rng.uniform(30.0, 70.0))
    wander = np.cumsum(rng.normal(0.0, 0.2, n))
    tas = np.clip(tas_base + np.clip(wander, -10.0, 10.0), 0.0, None)
    wind = float(rng.uniform(-10.0, 10.0))
    gs = np.clip(tas + wind + np.clip(rng.normal(0.0, 0.5, n), -1.5, 1.5), 0.0, None)

    channels = np.full((n, N_CHANNELS), np.nan)
    channels[:, sats] = cno
    dense = {
        "heading_deg": np.mod(quantize(heading), 360.0),
        "roll_deg": quantize(roll),
        "pitch_deg": quantize(pitch),
        "gs_mps": quantize(gs),
        "tas_mps": quantize(tas),
    }
    for k, name in enumerate(DENSE_COLUMNS):
        channels[:, N_CNO + k] = dense[name]
    return FlightRecording(flight_id, np.arange(n), channels, int(jam is not None))


def jammed_count(config: SimulationConfig) -> int:
    return int(math.floor(config.jam_prevalence * config.n_flights + 0.5))


def jammed_indices(config: SimulationConfig) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([int(config.seed)]))
    order = rng.permutation(config.n_flights)
    return np.sort(order[: jammed_count(config)])


def simulate_one(config: SimulationConfig, index: int, jammed: bool) -> tuple[FlightRecording, JammingEvent | None]:
    rng = flight_rng(config.seed, index)
    n = draw_duration(config, rng)
    jam = draw_jam(config, rng, n) if jammed else None
    rec = simulate_flight(config, rng, jam, duration=n, flight_id=f"F{index:05d}")
    return rec, jam


def simulate_dataset(config: SimulationConfig) -> Dataset:
    """In-memory equivalent of :func:`generate_dataset`."""
    jammed = set(jammed_indices(config).tolist())
    recs = [simulate_one(config, i, i in jammed)[0] for i in range(config.n_flights)]
    return Dataset(tuple(recs))


def generate_dataset(config: SimulationConfig, out_dir) -> Dataset:
    """Write ``flights/F#####.csv`` files and ``manifest.csv`` under ``out_dir``."""
    out = Path(out_dir)
    (out / "flights").mkdir(parents=True, exist_ok=True)
    dataset = simulate_dataset(config)
    entries = []
    for rec in dataset:
        rel = f"flights/{rec.flight_id}.csv"
        write_flight_csv(rec, out / rel)
        entries.append((rec.flight_id, rel, rec.label))
    write_manifest(entries, out / "manifest.csv")
    return Dataset(dataset.recordings, str(out / "manifest.csv"))


def _parse_value(raw: str, default):
    if isinstance(default, tuple):
        parts = [p for p in raw.replace("[", "").replace("]", "").split(",") if p.strip()]
        if len(parts) != 2:
            raise ValueError(f"expected 'min, max', got {raw!r}")
        kind = type(default[0])
        return tuple(kind(float(p)) if kind is int else float(p) for p in parts)
    if isinstance(default, int):
        return int(raw)
    return float(raw)


def load_config(path=None, **overrides) -> SimulationConfig:
    """Read a flat ``key = value`` file (``#`` comments, ranges as ``min, max``)."""
    defaults = SimulationConfig()
    values = {}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, raw = line.partition("=")
            key = key.strip()
            if not sep or not hasattr(defaults, key):
                raise ValueError(f"{path}:{lineno}: unknown or malformed setting {line!r}")
            try:
                values[key] = _parse_value(raw.strip(), getattr(defaults, key))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    return dataclasses.replace(defaults, **values)


def dump_config(config: SimulationConfig) -> str:
    lines = []
    for f in dataclasses.fields(config):
        v = getattr(config, f.name)
        lines.append(f"{f.name} = {', '.join(map(str, v)) if isinstance(v, tuple) else v}")
    return "\n".join(lines) + "\n"
