"""Seeded Monte Carlo sampler of single-frame detection events.

Frames are drawn from the exact analytic outcome distribution (inverse CDF
over the finite outcome list) rather than by re-simulating amplitudes; the
sampler exists to exercise dark counts, the one-click-per-frame logic and
the statistics pipeline against the analytic module.

Randomness comes from a counter-based Philox stream keyed by the master
seed, with each trial consuming a fixed block of variates. Results are a
pure function of (config, n_trials, master_seed), independent of chunking
or evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .cavity import CavityConfig, Port, full_outcome_distribution, theta_for_outcome
from .imperfections import DarkCountModel
from .states import TimeBinState, check_mub_index, mub_state

_CODE_D1, _CODE_D2, _CODE_BACK, _CODE_NONE = 0, 1, 2, 3
_PORT_BY_CODE = (Port.D1, Port.D2, Port.BACK, Port.NONE)
# Per-trial variate block: setting, outcome, dark bin, dark detector,
# dual-dark pick, photon/dark tie break.
_DRAWS_PER_TRIAL = 6
_DEFAULT_CHUNK = 262_144


@dataclass(frozen=True)
class TrialRecord:
    """One simulated frame: which detector fired (if any), when, and why."""

    port: Port
    time_bin: Optional[int]
    dark: bool
    setting_m: Optional[int] = None
    prepared_k: Optional[int] = None

    def __post_init__(self):
        if self.dark and self.port not in (Port.D1, Port.D2):
            raise ValueError("dark clicks can only fire a physical detector")
        if (self.port is Port.NONE) != (self.time_bin is None):
            raise ValueError("exactly the no-click frames carry no bin")


@dataclass
class EmpiricalStats:
    """Aggregated frame counts plus the derived empirical estimators."""

    n_trials: int
    master_seed: int
    dim: int
    n_prime: int
    bin_cap: int
    prepared_k: Optional[int]
    counts: Dict[Tuple[Port, int], int] = field(default_factory=dict)
    dark_clicks: int = 0
    accepted_total: int = 0
    setting_frames: Dict[int, int] = field(default_factory=dict)
    setting_accepted: Dict[int, int] = field(default_factory=dict)

    def frequency(self, port: Port, time_bin: int) -> float:
        return self.counts.get((port, time_bin), 0) / self.n_trials

    def port_frequency(self, port: Port) -> float:
        return (
            sum(c for (prt, _), c in self.counts.items() if prt is port)
            / self.n_trials
        )

    def d2_window_frequency(self) -> float:
        """Fraction of frames with a D2 click inside the accepted window."""
        return self.accepted_total / self.n_trials

    def p_hat(self, m: int) -> float:
        """Empirical windowed acceptance for setting m (discrimination runs)."""
        frames = self.setting_frames.get(m, 0)
        if frames == 0:
            return 0.0
        return self.setting_accepted.get(m, 0) / frames

    def p_e_hat(self) -> float:
        """Empirical discrimination error: mismatched share of accepted clicks."""
        if self.prepared_k is None or not self.setting_frames:
            raise ValueError("error estimate requires a discrimination run")
        if self.accepted_total == 0:
            raise ValueError("no accepted events; error estimate undefined")
        mismatched = sum(
            c for m, c in self.setting_accepted.items() if m != self.prepared_k
        )
        return mismatched / self.accepted_total


@dataclass(frozen=True)
class _OutcomeTable:
    ports: np.ndarray
    bins: np.ndarray
    cdf: np.ndarray


def _outcome_table(
    cfg: CavityConfig, state: TimeBinState, bin_cap: int
) -> _OutcomeTable:
    dist = full_outcome_distribution(cfg, state, bin_cap)
    ports: List[int] = []
    bins: List[int] = []
    probs: List[float] = []
    for (port, b), p in dist.sorted_entries():
        ports.append(_PORT_BY_CODE.index(port))
        bins.append(b)
        probs.append(p)
    ports.append(_CODE_NONE)
    bins.append(0)
    probs.append(dist.residual)
    cdf = np.cumsum(np.asarray(probs))
    cdf[-1] = 1.0  # total mass is 1 to ~1e-15; pin it so lookups stay in range
    return _OutcomeTable(
        ports=np.asarray(ports, dtype=np.int64),
        bins=np.asarray(bins, dtype=np.int64),
        cdf=cdf,
    )


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & ((1 << 128) - 1)))


def _sample_photon(
    tables: List[_OutcomeTable],
    settings: Optional[np.ndarray],
    u_outcome: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    n = u_outcome.shape[0]
    ports = np.empty(n, dtype=np.int64)
    bins = np.empty(n, dtype=np.int64)
    if settings is None:
        table = tables[0]
        idx = np.minimum(
            np.searchsorted(table.cdf, u_outcome, side="right"),
            table.cdf.size - 1,
        )
        ports[:] = table.ports[idx]
        bins[:] = table.bins[idx]
    else:
        for m, table in enumerate(tables):
            mask = settings == m
            if not mask.any():
                continue
            idx = np.minimum(
                np.searchsorted(table.cdf, u_outcome[mask], side="right"),
                table.cdf.size - 1,
            )
            ports[mask] = table.ports[idx]
            bins[mask] = table.bins[idx]
    return ports, bins


def _merge_dark(
    ports: np.ndarray,
    bins: np.ndarray,
    u: np.ndarray,
    p_dc: float,
    bin_cap: int,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Apply per-bin Bernoulli dark clicks; the earliest click wins a frame."""
    if p_dc == 0.0:
        return ports, bins, np.zeros(ports.shape, dtype=bool)
    u_bin, u_det, u_both, u_tie = u[:, 2], u[:, 3], u[:, 4], u[:, 5]
    no_dark_per_bin = (1.0 - p_dc) ** 2  # two detectors per bin
    first_dark = (
        np.floor(np.log1p(-u_bin) / math.log(no_dark_per_bin)).astype(np.int64) + 1
    )
    has_dark = first_dark <= bin_cap
    any_dark = 1.0 - no_dark_per_bin
    p_one_detector = p_dc * (1.0 - p_dc) / any_dark
    dark_detector = np.where(
        u_det < p_one_detector,
        _CODE_D1,
        np.where(
            u_det < 2.0 * p_one_detector,
            _CODE_D2,
            np.where(u_both < 0.5, _CODE_D1, _CODE_D2),
        ),
    )
    photon_clicked = ports <= _CODE_D2
    dark_wins = has_dark & (
        ~photon_clicked
        | (first_dark < bins)
        | ((first_dark == bins) & (u_tie < 0.5))
    )
    merged_ports = np.where(dark_wins, dark_detector, ports)
    merged_bins = np.where(dark_wins, first_dark, bins)
    return merged_ports, merged_bins, dark_wins


def _run(
    tables: List[_OutcomeTable],
    dim: int,
    n_prime: int,
    bin_cap: int,
    p_dc: float,
    n_trials: int,
    master_seed: int,
    prepared_k: Optional[int],
    random_settings: bool,
    chunk_size: Optional[int],
) -> EmpiricalStats:
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    chunk = chunk_size or _DEFAULT_CHUNK
    rng = _generator(master_seed)

    count_vec = np.zeros(4 * (bin_cap + 1), dtype=np.int64)
    setting_frames = np.zeros(dim, dtype=np.int64)
    setting_accepted = np.zeros(dim, dtype=np.int64)
    dark_total = 0
    accepted_total = 0

    done = 0
    while done < n_trials:
        take = min(chunk, n_trials - done)
        u = rng.random((take, _DRAWS_PER_TRIAL))
        if random_settings:
            settings = np.minimum((u[:, 0] * dim).astype(np.int64), dim - 1)
        else:
            settings = None
        ports, bins = _sample_photon(tables, settings, u[:, 1])
        ports, bins, dark = _merge_dark(ports, bins, u, p_dc, bin_cap)

        codes = ports * (bin_cap + 1) + bins
        count_vec += np.bincount(codes, minlength=count_vec.size)
        dark_total += int(dark.sum())
        accepted = (ports == _CODE_D2) & (bins >= dim) & (bins <= n_prime)
        accepted_total += int(accepted.sum())
        if settings is not None:
            setting_frames += np.bincount(settings, minlength=dim)
            setting_accepted += np.bincount(settings[accepted], minlength=dim)
        done += take

    counts: Dict[Tuple[Port, int], int] = {}
    for flat in np.flatnonzero(count_vec):
        port = _PORT_BY_CODE[flat // (bin_cap + 1)]
        counts[(port, int(flat % (bin_cap + 1)))] = int(count_vec[flat])

    return EmpiricalStats(
        n_trials=n_trials,
        master_seed=master_seed,
        dim=dim,
        n_prime=n_prime,
        bin_cap=bin_cap,
        prepared_k=prepared_k,
        counts=counts,
        dark_clicks=dark_total,
        accepted_total=accepted_total,
        setting_frames={
            int(m): int(c) for m, c in enumerate(setting_frames) if c
        },
        setting_accepted={
            int(m): int(c) for m, c in enumerate(setting_accepted) if c
        },
    )


def sample_frame(
    cfg: CavityConfig,
    state: TimeBinState,
    dark: DarkCountModel,
    seed: int,
    bin_cap: Optional[int] = None,
    setting_m: Optional[int] = None,
    prepared_k: Optional[int] = None,
) -> TrialRecord:
    """Draw one frame outcome; deterministic for a given seed.

    The photon branch is sampled from the exact outcome distribution, then
    merged with per-bin dark clicks on both detectors: the earliest click
    is the one counted, with a fair tie break.
    """
    cap = cfg.n_prime if bin_cap is None else bin_cap
    table = _outcome_table(cfg, state, cap)
    u = _generator(seed).random((1, _DRAWS_PER_TRIAL))
    ports, bins = _sample_photon([table], None, u[:, 1])
    ports, bins, dark_flags = _merge_dark(ports, bins, u, dark.p_dc, cap)
    port = _PORT_BY_CODE[int(ports[0])]
    return TrialRecord(
        port=port,
        time_bin=None if port is Port.NONE else int(bins[0]),
        dark=bool(dark_flags[0]),
        setting_m=setting_m,
        prepared_k=prepared_k,
    )


def run_trials(
    cfg: CavityConfig,
    state: TimeBinState,
    dark: DarkCountModel,
    n_trials: int,
    master_seed: int,
    bin_cap: Optional[int] = None,
    chunk_size: Optional[int] = None,
) -> EmpiricalStats:
    """Sample many frames at the config's fixed phase setting.

    Trial i consumes the i-th fixed-size block of the Philox stream keyed
    by ``master_seed``, so the aggregate is independent of chunking and of
    the order chunks are evaluated in.
    """
    cap = cfg.n_prime if bin_cap is None else bin_cap
    table = _outcome_table(cfg, state, cap)
    return _run(
        tables=[table],
        dim=cfg.dim,
        n_prime=cfg.n_prime,
        bin_cap=cap,
        p_dc=dark.p_dc,
        n_trials=n_trials,
        master_seed=master_seed,
        prepared_k=None,
        random_settings=False,
        chunk_size=chunk_size,
    )


def run_discrimination(
    d: int,
    r1_sq: float,
    r2_sq: float,
    n_prime: int,
    prepared_k: int,
    dark: DarkCountModel,
    n_trials: int,
    master_seed: int,
    bin_cap: Optional[int] = None,
    chunk_size: Optional[int] = None,
) -> EmpiricalStats:
    """Simulate the state-discrimination experiment.

    Each frame carries one photon prepared in Fourier state ``prepared_k``;
    the receiver dials a uniformly random setting m and accepts the frame
    when D2 fires inside [d, n_prime]. The per-setting acceptance counts
    estimate the windowed click probabilities, and the mismatched share of
    accepted clicks estimates the discrimination error.
    """
    check_mub_index(d, prepared_k)
    cap = n_prime if bin_cap is None else bin_cap
    prepared = mub_state(d, prepared_k)
    tables = [
        _outcome_table(
            CavityConfig(
                dim=d,
                r1_sq=r1_sq,
                r2_sq=r2_sq,
                theta=theta_for_outcome(d, m),
                n_prime=n_prime,
            ),
            prepared,
            cap,
        )
        for m in range(d)
    ]
    return _run(
        tables=tables,
        dim=d,
        n_prime=n_prime,
        bin_cap=cap,
        p_dc=dark.p_dc,
        n_trials=n_trials,
        master_seed=master_seed,
        prepared_k=prepared_k,
        random_settings=True,
        chunk_size=chunk_size,
    )
