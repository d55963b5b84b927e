"""Tests for multi-waveform FDMA composition and decomposition."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

import wavelab as wl
from wavelab.exceptions import ConfigError, DimensionError


def mixed_layout():
    return wl.BlockLayout.from_configs(
        [
            wl.WaveformConfig.ofdm(12),
            wl.WaveformConfig.afdm(12, -4.0, 0.1),
            wl.WaveformConfig.otfs(4, 3),
            wl.WaveformConfig.otfs(3, 4),
        ]
    )


def random_blocks(layout, seed=0):
    rng = np.random.default_rng(seed)
    return [
        (rng.standard_normal(b.width) + 1j * rng.standard_normal(b.width)) / np.sqrt(2)
        for b in layout.blocks
    ]


class TestLayout:
    def test_gap_rejected(self):
        blocks = (
            wl.Block(wl.WaveformConfig.ofdm(4), 0),
            wl.Block(wl.WaveformConfig.ofdm(4), 6),
        )
        with pytest.raises(ConfigError):
            wl.BlockLayout(blocks)

    def test_overlap_rejected(self):
        blocks = (
            wl.Block(wl.WaveformConfig.ofdm(4), 0),
            wl.Block(wl.WaveformConfig.ofdm(4), 2),
        )
        with pytest.raises(ConfigError):
            wl.BlockLayout(blocks)

    def test_empty_rejected(self):
        with pytest.raises(ConfigError):
            wl.BlockLayout(())

    def test_total_width(self):
        assert mixed_layout().N == 48


class TestCompose:
    def test_single_block_equals_modulate(self):
        cfg = wl.WaveformConfig.afdm(16, -4.0, 0.1)
        layout = wl.BlockLayout.from_configs([cfg])
        rng = np.random.default_rng(1)
        c = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        assert_allclose(
            wl.compose_fdma(layout, [c]), wl.modulate(cfg, c).values, atol=1e-12
        )

    def test_two_ofdm_halves_equal_full_ofdm(self):
        n = 16
        layout = wl.BlockLayout.from_configs(
            [wl.WaveformConfig.ofdm(n // 2), wl.WaveformConfig.ofdm(n // 2)]
        )
        rng = np.random.default_rng(2)
        c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        combined = wl.compose_fdma(layout, [c[: n // 2], c[n // 2 :]])
        direct = wl.modulate(wl.WaveformConfig.ofdm(n), c).values
        assert_allclose(combined, direct, atol=1e-12)

    def test_afdm_block_energy_confined(self):
        layout = wl.BlockLayout.from_configs(
            [wl.WaveformConfig.ofdm(12), wl.WaveformConfig.afdm(12, -4.0, 0.1)]
        )
        data = [np.zeros(12, complex), random_blocks(layout, 3)[1]]
        x = wl.compose_fdma(layout, data)
        spectrum = np.abs(np.fft.fft(x, norm="ortho")) ** 2
        outside = spectrum[:12].sum()
        assert outside < 1e-20 * spectrum.sum()

    def test_block_count_mismatch(self):
        with pytest.raises(DimensionError):
            wl.compose_fdma(mixed_layout(), [np.zeros(12, complex)])

    def test_block_length_mismatch(self):
        layout = wl.BlockLayout.from_configs([wl.WaveformConfig.ofdm(8)])
        with pytest.raises(DimensionError):
            wl.compose_fdma(layout, [np.zeros(7, complex)])


class TestDecompose:
    def test_mixed_roundtrip(self):
        layout = mixed_layout()
        data = random_blocks(layout, 4)
        recovered = wl.decompose_fdma(wl.compose_fdma(layout, data), layout)
        for sent, got in zip(data, recovered):
            assert np.abs(got - sent).max() < 1e-10

    def test_narrowband_blocks_roundtrip(self):
        # 12-bin resource blocks
        layout = wl.BlockLayout.from_configs(
            [
                wl.WaveformConfig.afdm(12, -4.0, 0.1),
                wl.WaveformConfig.otfs(6, 2),
                wl.WaveformConfig.ofdm(12),
            ]
        )
        data = random_blocks(layout, 5)
        recovered = wl.decompose_fdma(wl.compose_fdma(layout, data), layout)
        for sent, got in zip(data, recovered):
            assert np.abs(got - sent).max() < 1e-10

    def test_cross_block_leakage(self):
        layout = mixed_layout()
        data = random_blocks(layout, 6)
        for active in range(len(layout.blocks)):
            alone = [np.zeros(b.width, complex) for b in layout.blocks]
            alone[active] = data[active]
            recovered = wl.decompose_fdma(wl.compose_fdma(layout, alone), layout)
            for i, got in enumerate(recovered):
                if i != active:
                    assert np.abs(got).max() < 1e-12

    def test_per_bin_equalizer_roundtrip(self):
        layout = mixed_layout()
        n = layout.N
        rng = np.random.default_rng(7)
        spec = wl.realize_random_channel(wl.ChannelGenerator(num_taps=4), rng)
        data = random_blocks(layout, 8)
        y = wl.apply_channel(spec, wl.compose_fdma(layout, data))
        gains = 1.0 / wl.frequency_response(spec, n)
        recovered = wl.decompose_fdma(y, layout, freq_gains=gains)
        for sent, got in zip(data, recovered):
            assert np.abs(got - sent).max() < 1e-8

    def test_wrong_gain_length(self):
        layout = mixed_layout()
        y = np.zeros(layout.N, complex)
        with pytest.raises(DimensionError):
            wl.decompose_fdma(y, layout, freq_gains=np.ones(7))


class TestBlockNoise:
    def test_confined_jammer_leaves_other_blocks_unchanged(self):
        layout = mixed_layout()
        n = layout.N
        flat = np.ones(n)
        jammed = flat.copy()
        target = layout.blocks[1]
        jammed[target.start : target.stop] += 50.0
        for i, block in enumerate(layout.blocks):
            q_inv = wl.build_precoder(block.config).Q_inv
            sl = slice(block.start, block.stop)
            v_clean = wl.demod_noise_variance(q_inv, flat[sl])
            v_jam = wl.demod_noise_variance(q_inv, jammed[sl])
            if i == 1:
                assert (v_jam > v_clean).all()
            else:
                assert np.array_equal(v_clean, v_jam)

    def test_afdm_block_whitens_better_than_ofdm_block(self):
        # identical impulse shape inside same-width blocks
        width = 12
        local = np.ones(width)
        local[width // 2] += 40.0
        q_ofdm = wl.build_precoder(wl.WaveformConfig.ofdm(width)).Q_inv
        q_afdm = wl.build_precoder(wl.WaveformConfig.afdm(width, -4.0, 0.1)).Q_inv
        s_ofdm = wl.whitening_std(wl.demod_noise_variance(q_ofdm, local))
        s_afdm = wl.whitening_std(wl.demod_noise_variance(q_afdm, local))
        assert s_afdm < s_ofdm
