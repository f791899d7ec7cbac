"""Clustered Rician channel generation for FDD MU-MIMO OFDM links.

Synthetic uplink/downlink frequency-domain channels are built from a small
set of scatterer clusters per user. Uplink and downlink of one user share
the cluster geometry (delays, powers, departure angles) but draw the
per-cluster phases independently, which yields the weak FDD reciprocity
the rest of the pipeline relies on: correlated magnitudes, independent
phases. Everything is deterministic given (scenario, seed).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT_M_S = 299_792_458.0


@dataclass(frozen=True)
class ScenarioConfig:
    """Propagation scenario and array/grid geometry for channel generation."""

    name: str
    n_clusters: int = 17
    rician_k: float = 0.3
    delay_spread_s: float = 363e-9
    angle_spread_deg: float = 15.0
    carrier_dl_hz: float = 1.9e9
    carrier_ul_hz: float = 2.1e9
    bandwidth_hz: float = 1e7
    n_subcarriers: int = 96
    n_tx_antennas: int = 32
    k_max: int = 6

    def __post_init__(self):
        if self.n_clusters < 1:
            raise ValueError("n_clusters must be >= 1")
        if self.rician_k < 0:
            raise ValueError("rician_k must be >= 0")
        if self.n_subcarriers < 1 or self.n_tx_antennas < 1 or self.k_max < 1:
            raise ValueError("n_subcarriers, n_tx_antennas and k_max must be >= 1")
        if self.carrier_dl_hz == self.carrier_ul_hz:
            raise ValueError("FDD requires distinct uplink/downlink carriers")
        if self.delay_spread_s <= 0 or self.bandwidth_hz <= 0:
            raise ValueError("delay_spread_s and bandwidth_hz must be positive")


def uma_like(**overrides) -> ScenarioConfig:
    """Urban-macro-flavoured preset: long delays, mostly diffuse scattering."""
    base = dict(name="uma-like", n_clusters=17, rician_k=0.3,
                delay_spread_s=363e-9, angle_spread_deg=15.0)
    base.update(overrides)
    return ScenarioConfig(**base)


def umi_like(**overrides) -> ScenarioConfig:
    """Urban-micro-flavoured preset: shorter delays, stronger specular part."""
    base = dict(name="umi-like", n_clusters=17, rician_k=1.5,
                delay_spread_s=129e-9, angle_spread_deg=22.0)
    base.update(overrides)
    return ScenarioConfig(**base)


@dataclass(frozen=True)
class ClusterSet:
    """Scatterer cluster geometry plus one set of per-cluster phases.

    Delays are sorted ascending so ``delays_s[0]`` doubles as the specular
    (line-of-sight) delay; powers are normalized to sum to one.
    """

    delays_s: np.ndarray
    powers: np.ndarray
    angles_rad: np.ndarray
    phases_rad: np.ndarray
    los_angle_rad: float

    def __post_init__(self):
        n = len(self.delays_s)
        if not (len(self.powers) == len(self.angles_rad) == len(self.phases_rad) == n):
            raise ValueError("cluster arrays must have equal length")
        if np.any(self.delays_s < 0):
            raise ValueError("cluster delays must be non-negative")
        if abs(self.powers.sum() - 1.0) > 1e-9:
            raise ValueError("cluster powers must sum to 1")


@dataclass(frozen=True)
class ChannelRealization:
    """One multi-user draw of downlink and uplink frequency responses.

    ``h_down`` and ``h_up`` are complex64 tensors of shape
    [k_max, n_subcarriers, n_tx_antennas], each user/link normalized to
    unit mean squared entry magnitude.
    """

    h_down: np.ndarray
    h_up: np.ndarray
    seed: int
    scenario: str


def _user_rng(seed: int, user_index: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(user_index), stream]))


def sample_clusters(scenario: ScenarioConfig, user_index: int, seed: int) -> ClusterSet:
    """Draw a deterministic cluster geometry for one user.

    Delays follow an exponential profile with the scenario delay spread and
    are sorted ascending; powers decay exponentially in delay and are
    normalized; departure angles are uniform in a band of
    ``angle_spread_deg`` centred on a user-specific mean direction.
    """
    rng = _user_rng(seed, user_index, stream=0)
    c = scenario.n_clusters
    delays = np.sort(rng.exponential(scenario.delay_spread_s, size=c))
    powers = np.exp(-delays / scenario.delay_spread_s)
    powers = powers / powers.sum()
    mean_angle = rng.uniform(-np.pi / 3, np.pi / 3)
    half_spread = np.deg2rad(scenario.angle_spread_deg) / 2
    angles = mean_angle + rng.uniform(-half_spread, half_spread, size=c)
    phases = rng.uniform(0.0, 2 * np.pi, size=c)
    return ClusterSet(delays_s=delays, powers=powers, angles_rad=angles,
                      phases_rad=phases, los_angle_rad=float(mean_angle))


def steering_vector(angle_rad: float, n_antennas: int, carrier_hz: float,
                    spacing_ref_hz: float | None = None) -> np.ndarray:
    """Uniform-linear-array response at half-wavelength spacing.

    The element spacing is half a wavelength at ``spacing_ref_hz`` (the
    carrier itself by default), so uplink and downlink of an FDD pair see
    slightly different electrical spacings on the same physical array.
    """
    ref = carrier_hz if spacing_ref_hz is None else spacing_ref_hz
    ant = np.arange(n_antennas)
    return np.exp(-1j * np.pi * (carrier_hz / ref) * ant * np.sin(angle_rad))


def subcarrier_frequencies(n_subcarriers: int, bandwidth_hz: float) -> np.ndarray:
    """Baseband frequency of each subcarrier, centred on the carrier."""
    spacing = bandwidth_hz / n_subcarriers
    return (np.arange(n_subcarriers) - (n_subcarriers - 1) / 2) * spacing


def frequency_response(clusters: ClusterSet, carrier_hz: float, n_subcarriers: int,
                       n_tx_antennas: int, bandwidth_hz: float, rician_k: float,
                       spacing_ref_hz: float | None = None) -> np.ndarray:
    """Frequency response [n_subcarriers, n_tx_antennas] of a cluster set.

    Diffuse part: sum over clusters of sqrt(power) * exp(j*phase) *
    steering(angle) * exp(-2j*pi*f*delay), scaled by sqrt(1/(K_R+1)).
    Specular part: steering at the mean departure angle with the first
    arrival's delay, scaled by sqrt(K_R/(K_R+1)).
    """
    freqs = subcarrier_frequencies(n_subcarriers, bandwidth_hz)
    delay_phase = np.exp(-2j * np.pi * np.outer(freqs, clusters.delays_s))  # [Nc, C]
    steer = np.stack([steering_vector(a, n_tx_antennas, carrier_hz, spacing_ref_hz)
                      for a in clusters.angles_rad])  # [C, Nt]
    gains = np.sqrt(clusters.powers) * np.exp(1j * clusters.phases_rad)  # [C]
    nlos = (delay_phase * gains) @ steer  # [Nc, Nt]
    los_steer = steering_vector(clusters.los_angle_rad, n_tx_antennas, carrier_hz, spacing_ref_hz)
    los = np.exp(-2j * np.pi * freqs * clusters.delays_s[0])[:, None] * los_steer[None, :]
    k = rician_k
    return np.sqrt(1.0 / (k + 1.0)) * nlos + np.sqrt(k / (k + 1.0)) * los


def normalize_unit_power(h: np.ndarray) -> np.ndarray:
    """Scale a channel so the mean squared entry magnitude is exactly one."""
    energy = np.sum(np.abs(h) ** 2)
    if energy == 0:
        raise ValueError("degenerate channel: all-zero response")
    return h * np.sqrt(h.size / energy)


def generate_realization(scenario: ScenarioConfig, seed: int) -> ChannelRealization:
    """Generate one multi-user channel draw.

    Each user's uplink reuses the downlink cluster geometry but redraws the
    per-cluster phases, and both links are normalized to unit mean entry
    power before the cast to complex64 storage precision.
    """
    nc, nt, k_max = scenario.n_subcarriers, scenario.n_tx_antennas, scenario.k_max
    h_down = np.empty((k_max, nc, nt), dtype=np.complex64)
    h_up = np.empty((k_max, nc, nt), dtype=np.complex64)
    for k in range(k_max):
        geo = sample_clusters(scenario, k, seed)
        ul_phases = _user_rng(seed, k, stream=1).uniform(0.0, 2 * np.pi, size=scenario.n_clusters)
        geo_ul = dataclasses.replace(geo, phases_rad=ul_phases)
        hd = frequency_response(geo, scenario.carrier_dl_hz, nc, nt,
                                scenario.bandwidth_hz, scenario.rician_k,
                                spacing_ref_hz=scenario.carrier_dl_hz)
        hu = frequency_response(geo_ul, scenario.carrier_ul_hz, nc, nt,
                                scenario.bandwidth_hz, scenario.rician_k,
                                spacing_ref_hz=scenario.carrier_dl_hz)
        h_down[k] = normalize_unit_power(hd).astype(np.complex64)
        h_up[k] = normalize_unit_power(hu).astype(np.complex64)
    return ChannelRealization(h_down=h_down, h_up=h_up, seed=int(seed), scenario=scenario.name)


def derive_sample_seed(base_seed: int, sample_index: int) -> int:
    """Collision-resistant per-sample seed from a base seed and an index."""
    return int(np.random.SeedSequence([int(base_seed), int(sample_index)]).generate_state(1)[0])
