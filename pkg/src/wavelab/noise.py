"""Non-white Gaussian noise profiles and whitening metrics.

Noise is modeled in the frequency domain with a diagonal covariance
sigma_w^2 * Gamma_f; the per-bin gains gamma_n^2 on the diagonal are held
in a :class:`NoiseProfile`, trace-normalized to N so that total noise
power is the same for every profile and SNR comparisons stay fair.

The whitening capability of a demodulation matrix is quantified by the
standard deviation of the demodulated per-subcarrier noise variance: a
flat output profile (std 0) means the matrix fully whitened the input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError, DimensionError

WHITE = "white"
IMPULSE = "impulse"
INTERFERER = "interferer"
EQUALIZED = "equalized"
PROFILE_KINDS = (WHITE, IMPULSE, INTERFERER, EQUALIZED)

# Fixed channel draw behind the default "equalized" profile.
DEFAULT_EQUALIZED_SEED = 7
# Clip on 1/|H_f|^2 so near-null bins do not dominate the trace.
DEFAULT_GAIN_CAP = 1e4
DEFAULT_POWER_FRACTION = 0.9

TRACE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class NoiseProfile:
    """Diagonal frequency-domain covariance gains gamma_n^2, trace N."""

    gains: np.ndarray
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        gains = np.array(self.gains, dtype=float)
        if gains.ndim != 1 or gains.size < 1:
            raise DimensionError(f"gains must be a nonempty 1-D vector, got {gains.shape}")
        if np.any(gains < 0):
            raise ConfigError("noise gains must be nonnegative")
        n = gains.size
        if abs(gains.sum() - n) > TRACE_TOL * n:
            raise ConfigError(
                f"noise gains must be trace-normalized to N={n}, got {gains.sum():.6g}"
            )
        gains.setflags(write=False)
        object.__setattr__(self, "gains", gains)

    @property
    def N(self) -> int:
        return self.gains.size


@dataclass(frozen=True, eq=False)
class NoiseSample:
    """One frequency-domain draw w_f = Gamma_f^{1/2} w_w."""

    w_f: np.ndarray
    sigma_w: float


def _normalized(gains: np.ndarray, kind: str, params: dict) -> NoiseProfile:
    total = gains.sum()
    if total <= 0:
        raise ConfigError("noise profile has no power")
    return NoiseProfile(gains * (gains.size / total), kind, params)


def make_profile(
    kind: str,
    n: int,
    *,
    spikes: int | None = None,
    spike_offset: int = 0,
    width: int | None = None,
    start: int = 0,
    power_fraction: float = DEFAULT_POWER_FRACTION,
    num_taps: int = 4,
    gain_cap: float = DEFAULT_GAIN_CAP,
    seed: int = DEFAULT_EQUALIZED_SEED,
) -> NoiseProfile:
    """Build one of the stock per-bin variance profiles.

    white:       flat gains, gamma_n^2 = 1.
    impulse:     ``spikes`` isolated bins, evenly spaced starting at
                 ``spike_offset``, carry ``power_fraction`` of the power;
                 the rest is spread uniformly. Default spike count is
                 max(1, N // 32).
    interferer:  one contiguous block of ``width`` bins starting at
                 ``start`` carries ``power_fraction`` of the power.
                 Default width is N // 8 + 1; a width that is a multiple
                 of a demodulator's row-support spacing would be averaged
                 perfectly and collapse whitening comparisons to a tie.
    equalized:   gains proportional to min(1/|H_f|^2, gain_cap) for a
                 seeded random ``num_taps``-tap uniform-profile channel,
                 mimicking white noise shaped by zero-forcing equalization.

    All profiles are trace-normalized to N.
    """
    if kind not in PROFILE_KINDS:
        raise ConfigError(f"unknown noise profile kind {kind!r}")
    if n < 1:
        raise ConfigError(f"profile length must be >= 1, got {n}")
    if not 0.0 <= power_fraction <= 1.0:
        raise ConfigError(f"power fraction must be in [0, 1], got {power_fraction}")

    if kind == WHITE:
        return NoiseProfile(np.ones(n), WHITE, {"n": n})

    if kind == IMPULSE:
        p = max(1, n // 32) if spikes is None else spikes
        if not 1 <= p <= n:
            raise ConfigError(f"spike count must be in [1, {n}], got {p}")
        gains = np.full(n, (1.0 - power_fraction) * n / (n - p) if p < n else 0.0)
        idx = (spike_offset + (np.arange(p) * n) // p) % n
        gains[idx] = power_fraction * n / p
        return _normalized(
            gains,
            IMPULSE,
            {"n": n, "spikes": p, "spike_offset": spike_offset,
             "power_fraction": power_fraction},
        )

    if kind == INTERFERER:
        w = (n // 8 + 1) if width is None else width
        if not 1 <= w <= n:
            raise ConfigError(f"interferer width must be in [1, {n}], got {w}")
        gains = np.full(n, (1.0 - power_fraction) * n / (n - w) if w < n else 0.0)
        gains[(start + np.arange(w)) % n] = power_fraction * n / w
        return _normalized(
            gains,
            INTERFERER,
            {"n": n, "width": w, "start": start, "power_fraction": power_fraction},
        )

    # equalized
    if num_taps < 1:
        raise ConfigError(f"equalized profile needs >= 1 tap, got {num_taps}")
    rng = np.random.default_rng(seed)
    taps = (rng.standard_normal(num_taps) + 1j * rng.standard_normal(num_taps))
    taps /= np.sqrt(2 * num_taps)
    h_f = np.fft.fft(taps, n)
    gains = np.minimum(1.0 / np.abs(h_f) ** 2, gain_cap)
    return _normalized(
        gains,
        EQUALIZED,
        {"n": n, "num_taps": num_taps, "gain_cap": gain_cap, "seed": seed},
    )


def sample_noise(
    profile: NoiseProfile, sigma_w: float, rng: np.random.Generator
) -> NoiseSample:
    """Draw w_f with E{w_f w_f^H} = sigma_w^2 * diag(profile.gains)."""
    if sigma_w < 0:
        raise ConfigError(f"sigma_w must be >= 0, got {sigma_w}")
    n = profile.N
    white = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * (
        sigma_w / np.sqrt(2.0)
    )
    return NoiseSample(np.sqrt(profile.gains) * white, sigma_w)


def demod_noise_variance(q_inv, profile, sigma_w: float = 1.0) -> np.ndarray:
    """Analytic per-subcarrier variance of the demodulated noise.

    Computes v_m = sigma_w^2 * sum_v |Q^{-1}_{m,v}|^2 * gamma_v^2, the
    diagonal of sigma_w^2 * Q^{-1} Gamma_f Q^{-H} for diagonal Gamma_f.
    ``profile`` may be a NoiseProfile or a raw gains vector.
    """
    q_inv = np.asarray(q_inv, dtype=complex)
    gains = profile.gains if isinstance(profile, NoiseProfile) else np.asarray(profile, float)
    if q_inv.ndim != 2 or q_inv.shape[0] != q_inv.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {q_inv.shape}")
    if gains.shape != (q_inv.shape[1],):
        raise DimensionError(
            f"gains shape {gains.shape} does not match matrix size {q_inv.shape[1]}"
        )
    return sigma_w**2 * ((np.abs(q_inv) ** 2) @ gains)


def whitening_std(v) -> float:
    """Population standard deviation of the demodulated variance vector."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise DimensionError(f"expected a nonempty 1-D vector, got shape {v.shape}")
    return float(np.sqrt(np.mean((v - v.mean()) ** 2)))


@dataclass(frozen=True, eq=False)
class WhiteningReport:
    """Per-subcarrier demodulated noise variances with summary stats."""

    variances: np.ndarray
    mean: float
    std: float
    label: str

    @classmethod
    def from_variances(cls, v, label: str) -> "WhiteningReport":
        v = np.array(np.asarray(v, dtype=float))
        v.setflags(write=False)
        return cls(v, float(v.mean()), whitening_std(v), label)
