"""Seeded Monte-Carlo bit-error-rate engine.

Each frame draws a channel realization, random data bits, and colored
frequency-domain noise, runs the transmit / channel / equalize /
demodulate pipeline, and counts bit errors. Per-frame random streams are
derived from (master seed, SNR-point index, frame index), so results are
bit-identical regardless of worker count, and waveforms compared under
the same config share channel, data, and noise draws (paired comparison).

SNR is defined as E_s / sigma_w^2 with unit average symbol energy, unit
expected channel power, and noise profiles trace-normalized to N.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import (
    ChannelGenerator,
    ChannelSpec,
    apply_channel,
    build_channel,
    frequency_response,
    realize_random_channel,
)
from .exceptions import ConfigError, EqualizationError
from .fdma import BlockLayout, compose_fdma, split_frequency
from .noise import NoiseProfile, sample_noise
from .qam import QAM_ORDERS, qam_demap, qam_map
from .waveform import WaveformConfig, apply_inverse_precoder, modulate

MIN_BITS_PER_POINT = 10_000
EQUALIZERS = ("mmse", "zf")

# Per-bin zero-forcing refuses channels with |H| dynamic range beyond this.
ZF_BIN_CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class SimConfig:
    """Full description of one BER experiment.

    Exactly one of ``waveforms`` (compared under shared draws) or
    ``layout`` (a multi-waveform FDMA grid, quasi-static channels only)
    must be provided. ``channel`` is either a ChannelGenerator (redrawn
    every frame, block fading) or a fixed ChannelSpec.
    """

    channel: ChannelGenerator | ChannelSpec
    profile: NoiseProfile
    waveforms: tuple[WaveformConfig, ...] = ()
    layout: BlockLayout | None = None
    qam_order: int = 16
    snr_db: tuple[float, ...] = (25.0,)
    bits_per_point: int = 200_000
    seed: int = 0
    equalizer: str = "mmse"
    # documentation metadata only; the discrete-time model is dimensionless
    subcarrier_spacing_hz: float = 30_000.0

    def __post_init__(self):
        object.__setattr__(self, "waveforms", tuple(self.waveforms))
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        if (len(self.waveforms) == 0) == (self.layout is None):
            raise ConfigError("provide either waveforms or a block layout, not both")
        if self.qam_order not in QAM_ORDERS:
            raise ConfigError(f"QAM order must be one of {QAM_ORDERS}")
        if len(self.snr_db) == 0:
            raise ConfigError("need at least one SNR point")
        if self.bits_per_point < MIN_BITS_PER_POINT:
            raise ConfigError(
                f"bit budget per point must be >= {MIN_BITS_PER_POINT}, "
                f"got {self.bits_per_point}"
            )
        if self.equalizer not in EQUALIZERS:
            raise ConfigError(f"equalizer must be one of {EQUALIZERS}")
        if self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        n = self.n
        for target in self.targets():
            if _target_n(target) != n:
                raise ConfigError("all waveforms must share one subcarrier count")
        if self.profile.N != n:
            raise ConfigError(
                f"noise profile length {self.profile.N} does not match N={n}"
            )
        if isinstance(self.channel, ChannelGenerator):
            if self.channel.num_taps > n:
                raise ConfigError("channel has more taps than subcarriers")
            doppler = self.channel.max_doppler
        else:
            if self.channel.max_delay >= n:
                raise ConfigError("channel delay spread exceeds the block length")
            doppler = 0.0 if self.channel.is_quasi_static() else 1.0
        if self.layout is not None and doppler != 0.0:
            raise ConfigError(
                "FDMA layouts support quasi-static channels only; "
                "Doppler breaks block independence"
            )

    @property
    def n(self) -> int:
        return _target_n(self.targets()[0])

    def targets(self) -> tuple:
        return self.waveforms if self.layout is None else (self.layout,)

    @property
    def bits_per_frame(self) -> int:
        return self.n * int(np.log2(self.qam_order))

    @property
    def frames_per_point(self) -> int:
        return math.ceil(self.bits_per_point / self.bits_per_frame)


@dataclass(frozen=True)
class BerPoint:
    """Error counts at one SNR point; BER is exactly errors / bits."""

    snr_db: float
    bits: int
    errors: int
    skipped_frames: int = 0

    @property
    def ber(self) -> float:
        return self.errors / self.bits

    @property
    def stderr(self) -> float:
        # binomial standard error of the BER estimate
        p = self.ber
        return math.sqrt(p * (1.0 - p) / self.bits)


@dataclass(frozen=True)
class BerCurve:
    label: str
    points: tuple[BerPoint, ...]
    seed: int
    config_digest: str


@dataclass(frozen=True)
class ParamSweep:
    """BER at a fixed SNR as a function of one waveform parameter."""

    param: str
    values: tuple[float, ...]
    labels: tuple[str, ...]
    points: tuple[BerPoint, ...]
    snr_db: float
    seed: int
    config_digest: str


def _target_n(target) -> int:
    return target.N


def _target_label(target) -> str:
    if isinstance(target, BlockLayout):
        return "FDMA[" + "+".join(b.config.label for b in target.blocks) + "]"
    return target.label


def config_fingerprint(cfg: SimConfig) -> str:
    """Stable digest of everything that determines the results."""
    if isinstance(cfg.channel, ChannelGenerator):
        channel = {
            "generator": {
                "num_taps": cfg.channel.num_taps,
                "max_doppler": cfg.channel.max_doppler,
            }
        }
    else:
        channel = {
            "taps": [
                [t.delay, t.gain.real, t.gain.imag, t.doppler]
                for t in cfg.channel.taps
            ]
        }
    doc = {
        "targets": [_describe_target(t) for t in cfg.targets()],
        "channel": channel,
        "profile": {"kind": cfg.profile.kind, "gains": [repr(g) for g in cfg.profile.gains]},
        "qam_order": cfg.qam_order,
        "snr_db": list(cfg.snr_db),
        "bits_per_point": cfg.bits_per_point,
        "seed": cfg.seed,
        "equalizer": cfg.equalizer,
    }
    payload = json.dumps(doc, sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


def _describe_target(target) -> dict:
    if isinstance(target, BlockLayout):
        return {"layout": [_describe_target(b.config) for b in target.blocks]}
    return {
        "kind": target.kind,
        "N": target.N,
        "K": target.K,
        "L": target.L,
        "q": target.q,
        "alpha": target.alpha,
    }


def frame_rng(seed: int, point_index: int, frame_index: int) -> np.random.Generator:
    """Counter-derived stream: independent of worker count and waveform."""
    return np.random.default_rng([seed, point_index, frame_index])


def _per_bin_gains(h_f: np.ndarray, rho: float, equalizer: str) -> np.ndarray:
    mags = np.abs(h_f)
    if equalizer == "zf":
        condition = float(mags.max() / max(mags.min(), np.finfo(float).tiny))
        if condition > ZF_BIN_CONDITION_LIMIT:
            raise EqualizationError(
                f"per-bin channel dynamic range {condition:.3e} exceeds "
                f"{ZF_BIN_CONDITION_LIMIT:.0e}",
                condition,
            )
        return 1.0 / h_f
    return h_f.conj() / (mags**2 + rho)


def _dense_equalizer_matrix(h: np.ndarray, rho: float, equalizer: str) -> np.ndarray:
    n = h.shape[0]
    if equalizer == "zf":
        condition = float(np.linalg.cond(h))
        if not np.isfinite(condition) or condition > ZF_BIN_CONDITION_LIMIT:
            raise EqualizationError(
                f"channel condition number {condition:.3e} exceeds "
                f"{ZF_BIN_CONDITION_LIMIT:.0e}",
                condition,
            )
        rho = 0.0
    return np.linalg.solve(h.conj().T @ h + rho * np.eye(n), h.conj().T)


def _transmit(target, symbols: np.ndarray) -> np.ndarray:
    if isinstance(target, BlockLayout):
        parts = []
        offset = 0
        for block in target.blocks:
            parts.append(symbols[offset : offset + block.width])
            offset += block.width
        return compose_fdma(target, parts)
    return modulate(target, symbols).values


def _receive(target, r_f: np.ndarray) -> np.ndarray:
    if isinstance(target, BlockLayout):
        return np.concatenate(split_frequency(r_f, target))
    return apply_inverse_precoder(target, r_f)


def _simulate_frame(
    target,
    channel,
    profile: NoiseProfile,
    qam_order: int,
    sigma_w: float,
    equalizer: str,
    rng: np.random.Generator,
):
    """One frame; returns (tx_bits, rx_bits). Draw order is fixed:
    channel, data bits, noise."""
    n = _target_n(target)
    if isinstance(channel, ChannelGenerator):
        spec = realize_random_channel(channel, rng)
    else:
        spec = channel
    bits = rng.integers(0, 2, size=n * int(np.log2(qam_order)), dtype=np.uint8)
    noise = sample_noise(profile, sigma_w, rng)

    symbols = qam_map(bits, qam_order)
    x = _transmit(target, symbols)
    y = apply_channel(spec, x) + np.fft.ifft(noise.w_f, norm="ortho")

    rho = sigma_w**2
    if spec.is_quasi_static():
        gains = _per_bin_gains(frequency_response(spec, n), rho, equalizer)
        r_f = gains * np.fft.fft(y, norm="ortho")
    else:
        g = _dense_equalizer_matrix(build_channel(spec, n).H, rho, equalizer)
        r_f = np.fft.fft(g @ y, norm="ortho")

    rx_bits = qam_demap(_receive(target, r_f), qam_order)
    return bits, rx_bits


def run_frame(cfg: SimConfig, rng: np.random.Generator, target=None, snr_db=None):
    """Run a single frame of ``cfg`` with an explicit generator.

    Defaults to the first configured waveform (or the layout) and the
    first SNR point. Returns (tx_bits, rx_bits).
    """
    if target is None:
        target = cfg.targets()[0]
    if snr_db is None:
        snr_db = cfg.snr_db[0]
    sigma_w = 10.0 ** (-float(snr_db) / 20.0)
    return _simulate_frame(
        target, cfg.channel, cfg.profile, cfg.qam_order, sigma_w, cfg.equalizer, rng
    )


def _run_point(cfg: SimConfig, target, point_index: int, snr_db: float, threads: int) -> BerPoint:
    sigma_w = 10.0 ** (-snr_db / 20.0)
    frames = cfg.frames_per_point

    def one_frame(frame_index: int):
        rng = frame_rng(cfg.seed, point_index, frame_index)
        try:
            tx, rx = _simulate_frame(
                target, cfg.channel, cfg.profile, cfg.qam_order, sigma_w,
                cfg.equalizer, rng,
            )
        except EqualizationError:
            return 0, 0, 1
        return int(np.count_nonzero(tx != rx)), tx.size, 0

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one_frame, range(frames)))
    else:
        results = [one_frame(f) for f in range(frames)]

    errors = sum(r[0] for r in results)
    bits = sum(r[1] for r in results)
    skipped = sum(r[2] for r in results)
    if bits == 0:
        raise EqualizationError(
            f"all {frames} frames at {snr_db} dB were skipped as unequalizable", 0.0
        )
    return BerPoint(snr_db=snr_db, bits=bits, errors=errors, skipped_frames=skipped)


def run_ber(cfg: SimConfig, threads: int = 1) -> list[BerCurve]:
    """Accumulate frames over the bit budget at every SNR point.

    Returns one curve per configured waveform (a single curve for a
    layout). Deterministic for fixed (config, seed) at any thread count.
    """
    digest = config_fingerprint(cfg)
    curves = []
    for target in cfg.targets():
        points = tuple(
            _run_point(cfg, target, pi, snr, threads)
            for pi, snr in enumerate(cfg.snr_db)
        )
        curves.append(
            BerCurve(
                label=_target_label(target),
                points=points,
                seed=cfg.seed,
                config_digest=digest,
            )
        )
    return curves


def _single_point_template(cfg: SimConfig) -> float:
    if len(cfg.snr_db) != 1:
        raise ConfigError("parameter sweeps need a template with exactly one SNR point")
    return cfg.snr_db[0]


def sweep_l(cfg: SimConfig, l_values, threads: int = 1) -> ParamSweep:
    """BER versus the OTFS Doppler-grid size L at a fixed SNR.

    Every L shares the same per-frame channel, bits, and noise draws, so
    differences reflect the precoder alone. Each L must divide N.
    """
    snr = _single_point_template(cfg)
    n = cfg.n
    configs = []
    for l in l_values:
        l = int(l)
        if l < 1 or n % l != 0:
            raise ConfigError(f"L={l} does not divide N={n}")
        configs.append(WaveformConfig.otfs(n // l, l))
    points = tuple(_run_point(cfg, wf, 0, snr, threads) for wf in configs)
    return ParamSweep(
        param="L",
        values=tuple(float(c.L) for c in configs),
        labels=tuple(c.label for c in configs),
        points=points,
        snr_db=snr,
        seed=cfg.seed,
        config_digest=config_fingerprint(cfg),
    )


def sweep_q(cfg: SimConfig, q_values, alpha: float = 0.1, threads: int = 1) -> ParamSweep:
    """BER versus the AFDM chirp rate q at a fixed SNR (alpha held fixed)."""
    snr = _single_point_template(cfg)
    n = cfg.n
    configs = []
    for q in q_values:
        q = float(q)
        if q == 0.0:
            raise ConfigError("q=0 degenerates to OFDM; sweep values must be nonzero")
        configs.append(WaveformConfig.afdm(n, q, alpha))
    points = tuple(_run_point(cfg, wf, 0, snr, threads) for wf in configs)
    return ParamSweep(
        param="q",
        values=tuple(c.q for c in configs),
        labels=tuple(c.label for c in configs),
        points=points,
        snr_db=snr,
        seed=cfg.seed,
        config_digest=config_fingerprint(cfg),
    )
