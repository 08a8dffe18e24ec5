"""Exact analytic model of the recirculating Mach-Zehnder measurement stage.

A photon entering the device either reflects off the first beam splitter
(detector D1, time-of-arrival information), or enters a loop formed by the
two splitters where each circulation takes exactly one time-bin duration and
multiplies the amplitude by r * e^{i phi}, with r = |R1||R2| and
phi = theta + pi (phase-shifter setting plus the two reflection phases).
Light leaving the loop through the second splitter reaches detector D2; a
D2 click in bin N >= d acts as a projection onto an unnormalized state
that approaches the Fourier basis state as r -> 1.

Everything in this module is a pure function of immutable configs/states.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, Tuple

import numpy as np

from .states import (
    TimeBinState,
    check_dimension,
    check_mub_index,
    fidelity,
    inner_product,
    mub_state,
)

TWO_PI = 2.0 * math.pi


class Port(Enum):
    """Exit channels of the measurement stage (NONE = still circulating)."""

    D1 = "D1"
    D2 = "D2"
    BACK = "BACK"
    NONE = "NONE"


@dataclass(frozen=True)
class CavityConfig:
    """Splitter reflectivities, phase setting and accepted detection window.

    ``r1_sq`` / ``r2_sq`` are intensity reflectivities in [0, 1); the
    splitters are lossless, so |T_i|^2 = 1 - |R_i|^2. ``n_prime`` is the
    last time bin in which a D2 click still counts as a basis measurement.
    """

    dim: int
    r1_sq: float
    r2_sq: float
    theta: float
    n_prime: int

    def __post_init__(self):
        check_dimension(self.dim)
        for name, value in (("r1_sq", self.r1_sq), ("r2_sq", self.r2_sq)):
            if not 0.0 <= value < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {value}")
        if self.n_prime < self.dim:
            raise ValueError(
                f"n_prime ({self.n_prime}) must be >= dim ({self.dim})"
            )

    @property
    def r1(self) -> float:
        return math.sqrt(self.r1_sq)

    @property
    def r2(self) -> float:
        return math.sqrt(self.r2_sq)

    @property
    def t1(self) -> float:
        return math.sqrt(1.0 - self.r1_sq)

    @property
    def t2(self) -> float:
        return math.sqrt(1.0 - self.r2_sq)

    def round_trip(self) -> "RoundTripFactor":
        return RoundTripFactor.from_config(self)

    def for_outcome(self, m: int) -> "CavityConfig":
        """Copy of this config with the phase dialled to target outcome m."""
        return replace(self, theta=theta_for_outcome(self.dim, m))


@dataclass(frozen=True)
class RoundTripFactor:
    """Amplitude survival r = |R1||R2| and total phase per circulation."""

    r: float
    phi: float

    @classmethod
    def from_config(cls, cfg: CavityConfig) -> "RoundTripFactor":
        return cls(
            r=math.sqrt(cfg.r1_sq * cfg.r2_sq),
            phi=(cfg.theta + math.pi) % TWO_PI,
        )


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities over (exit port, time bin) plus still-circulating mass.

    For a normalized input the entry masses and the residual sum to one
    exactly (the underlying map is an isometry). D2 entries at bins below
    ``dim`` are inconclusive clicks: the photon left before every input
    slot had entered the loop.
    """

    dim: int
    entries: Dict[Tuple[Port, int], float]
    residual: float

    def probability(self, port: Port, time_bin: int) -> float:
        return self.entries.get((port, time_bin), 0.0)

    def port_total(self, port: Port) -> float:
        return math.fsum(
            p for (prt, _), p in self.entries.items() if prt is port
        )

    def total_mass(self) -> float:
        return math.fsum(self.entries.values()) + self.residual

    def inconclusive_d2_mass(self) -> float:
        """Mass of D2 clicks arriving before bin d (not a basis measurement)."""
        return math.fsum(
            p
            for (prt, b), p in self.entries.items()
            if prt is Port.D2 and b < self.dim
        )

    def sorted_entries(self):
        """Entries in a deterministic (port, bin) order."""
        return sorted(self.entries.items(), key=lambda kv: (kv[0][0].value, kv[0][1]))


def phase_for_outcome(d: int, m: int) -> float:
    """Round-trip phase 2 pi m / d that targets Fourier-basis outcome m."""
    check_dimension(d)
    check_mub_index(d, m)
    return TWO_PI * m / d


def theta_for_outcome(d: int, m: int) -> float:
    """Phase-shifter setting whose round-trip phase targets outcome m.

    The two reflections contribute pi per circulation, so theta must be
    2 pi m / d - pi.
    """
    return phase_for_outcome(d, m) - math.pi


def gamma_state(cfg: CavityConfig, N: int) -> TimeBinState:
    """Unnormalized state a windowed D2 click at bin N projects onto.

    The amplitude on ket |d - n> is |T1||T2| r^(N-d+n) e^{i (N-d+n) phi}
    for n = 0..d-1: the slot that entered earliest has circulated the most
    and carries the largest power of r. Requires N >= d; every input slot
    must already be inside the loop.
    """
    d = cfg.dim
    if N < d:
        raise ValueError(
            f"bin {N} precedes the measurement window (first accepted bin is {d})"
        )
    rt = cfg.round_trip()
    n = np.arange(d)
    trips = N - d + n
    amps = np.zeros(d, dtype=np.complex128)
    amps[d - 1 - n] = (
        cfg.t1 * cfg.t2 * rt.r ** trips * np.exp(1j * trips * rt.phi)
    )
    return TimeBinState(amps, normalized=False)


def truncated_gamma_state(cfg: CavityConfig, N: int) -> TimeBinState:
    """Projection state for a D2 click at any bin N >= 1.

    For N >= d this coincides with :func:`gamma_state`; for earlier bins
    only the slots that have already entered the loop contribute, which is
    what makes such clicks inconclusive for the basis measurement.
    """
    d = cfg.dim
    if N < 1:
        raise ValueError(f"bin {N} out of range (bins start at 1)")
    rt = cfg.round_trip()
    slots = np.arange(1, min(d, N) + 1)
    trips = N - slots
    amps = np.zeros(d, dtype=np.complex128)
    amps[slots - 1] = cfg.t1 * cfg.t2 * rt.r ** trips * np.exp(1j * trips * rt.phi)
    return TimeBinState(amps, normalized=False)


def _require_normalized(state: TimeBinState) -> None:
    if not state.normalized:
        raise ValueError("input state must be normalized")


def d2_bin_probability(cfg: CavityConfig, state: TimeBinState, N: int) -> float:
    """Probability of a D2 click at bin N (N >= d) for the given input."""
    _require_normalized(state)
    return float(abs(inner_product(gamma_state(cfg, N), state)) ** 2)


def d1_bin_probability(cfg: CavityConfig, state: TimeBinState, n: int) -> float:
    """Probability of the immediate-reflection D1 click at bin n.

    First-reflection model: |R1|^2 |<n|state>|^2 for n in 1..d. Backward
    leakage on later circulations exits toward the source instead and is
    accounted as the BACK port of :func:`full_outcome_distribution`.
    """
    _require_normalized(state)
    if not 1 <= n <= cfg.dim:
        raise ValueError(f"bin {n} outside the arrival window 1..{cfg.dim}")
    return float(cfg.r1_sq * abs(state.amps[n - 1]) ** 2)


def p_m_given_k(cfg: CavityConfig, k: int) -> float:
    """Windowed D2 click probability for prepared Fourier state k.

    Direct summation of the per-bin projections over the accepted window
    [d, n_prime]; the config's phase is normally dialled with
    :meth:`CavityConfig.for_outcome` to target some outcome m.
    """
    check_mub_index(cfg.dim, k)
    prepared = mub_state(cfg.dim, k)
    return math.fsum(
        d2_bin_probability(cfg, prepared, N)
        for N in range(cfg.dim, cfg.n_prime + 1)
    )


def total_error(cfg: CavityConfig, k: int = 0) -> float:
    """Discrimination error over all settings, by brute-force summation.

    Ratio of the mismatched-setting acceptance to the total acceptance,
    with each setting m evaluated at phase 2 pi m / d and the same window.
    The window length and the prepared index cancel in the ratio, which is
    enforced by tests rather than assumed.
    """
    check_mub_index(cfg.dim, k)
    probs = [p_m_given_k(cfg.for_outcome(m), k) for m in range(cfg.dim)]
    total = math.fsum(probs)
    if total == 0.0:
        raise ValueError("zero total acceptance; error ratio is undefined")
    return (total - probs[k]) / total


def total_error_closed_form(r: float, d: int) -> float:
    """Geometric-series reduction of the discrimination error.

    Summing |1 - r e^{2 pi i j / d}|^{-2} over j collapses the double sum
    behind :func:`total_error` to

        1 - (1 + r)(1 - r^d) / [ d (1 - r)(1 + r^d) ].

    Valid for 0 <= r < 1; see :func:`total_error_limit` for r -> 1.
    """
    check_dimension(d)
    if not 0.0 <= r < 1.0:
        raise ValueError(
            f"round-trip factor must lie in [0, 1), got {r}; "
            "the r -> 1 limit is available via total_error_limit"
        )
    r_d = r**d
    return 1.0 - (1.0 + r) * (1.0 - r_d) / (d * (1.0 - r) * (1.0 + r_d))


def total_error_limit(d: int) -> float:
    """r -> 1 limit of the discrimination error (perfect projection)."""
    check_dimension(d)
    return 0.0


def d2_total_probability(
    cfg: CavityConfig, state: TimeBinState, include_early: bool = False
) -> float:
    """Total D2 detection probability for the given input.

    By default sums the per-bin click probabilities over the accepted
    window [d, n_prime] only. With ``include_early=True`` the inconclusive
    bins 1..d-1 are counted as well, giving the full mass the detector
    sees up to bin n_prime.
    """
    _require_normalized(state)
    first = 1 if include_early else cfg.dim
    return math.fsum(
        abs(inner_product(truncated_gamma_state(cfg, N), state)) ** 2
        for N in range(first, cfg.n_prime + 1)
    )


def projection_fidelity(cfg: CavityConfig, N: int, k: int) -> float:
    """How closely the bin-N projection state matches Fourier state k.

    Independent of N (the N-dependence of the projection state is a global
    scalar) and approaches 1 as the round-trip factor approaches 1 with the
    phase dialled to 2 pi k / d.
    """
    check_mub_index(cfg.dim, k)
    return fidelity(gamma_state(cfg, N), mub_state(cfg.dim, k))


def full_outcome_distribution(
    cfg: CavityConfig, state: TimeBinState, bin_cap: int
) -> OutcomeDistribution:
    """Exit probabilities over D1, D2 and the backward port up to bin_cap.

    Evolves the input bin-by-bin through the two splitters with the
    symmetric phase convention (every reflection contributes pi/2), so the
    map from input amplitudes to exit amplitudes is an isometry and the
    reported masses plus the still-circulating residual sum to one exactly.
    The loop phase is applied with the sign that makes the per-bin D2
    masses equal the literal projection-state probabilities.

    Ports are labelled by provenance: the immediate first reflection of
    slot n appears as (D1, n); backward leakage through the first splitter
    appears as (BACK, bin). When both reach the same bin (superposition
    inputs, bins 2..d) they exit on the same physical line, and their
    coherent combined mass is reported under D1 as an arrival-window click.
    """
    _require_normalized(state)
    if state.dim != cfg.dim:
        raise ValueError(f"dimension mismatch: {state.dim} vs {cfg.dim}")
    if bin_cap < cfg.n_prime:
        raise ValueError(
            f"bin_cap ({bin_cap}) must cover the accepted window "
            f"(n_prime = {cfg.n_prime})"
        )
    d = cfg.dim
    r1, r2, t1, t2 = cfg.r1, cfg.r2, cfg.t1, cfg.t2
    loop = r1 * r2 * cmath.exp(-1j * (cfg.theta + math.pi))
    leak_coefficient = 1j * t1 * r2 * cmath.exp(-1j * cfg.theta)

    entries: Dict[Tuple[Port, int], float] = {}
    circulating = 0j
    for b in range(1, bin_cap + 1):
        injected = complex(state.amps[b - 1]) if b <= d else 0j
        leak = leak_coefficient * circulating
        circulating = t1 * injected + loop * circulating
        d2_mass = abs(t2 * circulating) ** 2
        if d2_mass > 0.0:
            entries[(Port.D2, b)] = d2_mass
        if injected != 0 and r1 > 0.0:
            upstream = abs(1j * r1 * injected + leak) ** 2
            if upstream > 0.0:
                entries[(Port.D1, b)] = upstream
        else:
            back = abs(leak) ** 2
            if back > 0.0:
                entries[(Port.BACK, b)] = back
    residual = (r2 * abs(circulating)) ** 2
    return OutcomeDistribution(dim=d, entries=entries, residual=residual)
