"""Tests for the command-line interface: configs, outputs, exit codes."""

import csv
import json
from pathlib import Path

import numpy as np
import pytest
import yaml

import wavelab as wl
from wavelab.cli import main


def run_cli(*argv):
    return main(list(argv))


def write_yaml(path: Path, doc: dict) -> str:
    path.write_text(yaml.safe_dump(doc))
    return str(path)


def read_csv(path: Path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


@pytest.fixture(scope="module")
def out_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("analyze")
    assert run_cli("analyze-noise", "--out", str(out)) == 0
    return out


class TestAnalyzeNoise:

    def test_emits_nine_curves_and_summary(self, out_dir):
        curves = sorted(p.name for p in out_dir.glob("variance_*.csv"))
        assert len(curves) == 9
        assert (out_dir / "summary.csv").exists()
        assert (out_dir / "manifest.json").exists()

    def test_summary_ordering_per_profile(self, out_dir):
        header, rows = read_csv(out_dir / "summary.csv")
        idx = {name: header.index(name) for name in ("waveform", "profile", "std")}
        by_profile = {}
        for row in rows:
            by_profile.setdefault(row[idx["profile"]], {})[row[idx["waveform"]]] = float(
                row[idx["std"]]
            )
        for profile, stds in by_profile.items():
            afdm = next(v for k, v in stds.items() if k.startswith("AFDM"))
            otfs = next(v for k, v in stds.items() if k.startswith("OTFS"))
            ofdm = stds["OFDM"]
            assert afdm < otfs < ofdm, profile

    def test_summary_recomputable_from_curves(self, out_dir):
        header, rows = read_csv(out_dir / "summary.csv")
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert sorted(manifest["outputs"]) == manifest["outputs"]
        slug_to_label = {
            wf.slug: wf.label
            for wf in (
                wl.WaveformConfig.ofdm(64),
                wl.WaveformConfig.otfs(8, 8),
                wl.WaveformConfig.afdm(64, -4.0, 0.1),
            )
        }
        summary = {(row[0], row[1]): (float(row[2]), float(row[3])) for row in rows}
        checked = 0
        for curve_file in out_dir.glob("variance_*.csv"):
            _, curve_rows = read_csv(curve_file)
            variances = np.array([float(r[1]) for r in curve_rows])
            slug, profile = curve_file.stem.replace("variance_", "").rsplit("_", 1)
            mean, std = summary[(slug_to_label[slug], profile)]
            assert abs(std - wl.whitening_std(variances)) < 1e-12
            assert abs(mean - variances.mean()) < 1e-12
            checked += 1
        assert checked == 9

    def test_white_profile_is_already_white(self, tmp_path):
        config = write_yaml(
            tmp_path / "cfg.yaml",
            {"n": 32, "profiles": [{"kind": "white"}]},
        )
        out = tmp_path / "out"
        assert run_cli("analyze-noise", "--config", config, "--out", str(out)) == 0
        _, rows = read_csv(out / "summary.csv")
        assert len(rows) == 3
        assert all(float(row[3]) < 1e-9 for row in rows)


class TestSparsity:
    def test_reports_otfs_row_count(self, tmp_path):
        config = write_yaml(
            tmp_path / "cfg.yaml",
            {"entries": [{"kind": "otfs", "n": 64, "k": 8, "l": 8}]},
        )
        out = tmp_path / "out"
        assert run_cli("sparsity", "--config", config, "--out", str(out)) == 0
        doc = json.loads((out / "sparsity.json").read_text())
        (report,) = doc["reports"]
        assert report["nonzeros_per_row_min"] == 8
        assert report["nonzeros_per_row_max"] == 8
        assert report["density"] == pytest.approx(8 / 64)


class TestBer:
    def small_config(self, tmp_path, seed=5):
        return write_yaml(
            tmp_path / "ber.yaml",
            {
                "n": 60,
                "waveforms": [{"kind": "ofdm"}, {"kind": "afdm", "q": -4.0, "alpha": 0.1}],
                "channel": {"num_taps": 4},
                "noise": {"kind": "white"},
                "snr_db": [10.0, 20.0],
                "bits_per_point": 10_000,
                "seed": seed,
            },
        )

    def test_runs_and_emits_curves(self, tmp_path):
        config = self.small_config(tmp_path)
        out = tmp_path / "out"
        assert run_cli("ber", "--config", config, "--out", str(out)) == 0
        header, rows = read_csv(out / "ber_ofdm.csv")
        assert header == ["snr_db", "bits", "errors", "ber", "stderr"]
        assert len(rows) == 2
        for row in rows:
            assert int(row[1]) >= 10_000
            assert float(row[3]) == int(row[2]) / int(row[1])

    def test_zero_bit_budget_is_config_error(self, tmp_path):
        config = write_yaml(
            tmp_path / "bad.yaml",
            {
                "n": 60,
                "waveforms": [{"kind": "ofdm"}],
                "channel": {"num_taps": 4},
                "bits_per_point": 0,
            },
        )
        assert run_cli("ber", "--config", config, "--out", str(tmp_path / "o")) == 2

    def test_missing_config_file(self, tmp_path):
        missing = str(tmp_path / "nope.yaml")
        assert run_cli("ber", "--config", missing, "--out", str(tmp_path / "o")) == 2

    def test_invalid_yaml(self, tmp_path):
        bad = tmp_path / "broken.yaml"
        bad.write_text("waveforms: [unclosed\n")
        assert run_cli("ber", "--config", str(bad), "--out", str(tmp_path / "o")) == 2

    def test_unknown_key_rejected(self, tmp_path):
        config = write_yaml(
            tmp_path / "typo.yaml",
            {
                "n": 60,
                "waveformz": [{"kind": "ofdm"}],
                "channel": {"num_taps": 4},
            },
        )
        assert run_cli("ber", "--config", config, "--out", str(tmp_path / "o")) == 2

    def test_seed_flag_overrides_config(self, tmp_path):
        config = self.small_config(tmp_path, seed=5)
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        assert run_cli("ber", "--config", config, "--out", str(out_a), "--seed", "9") == 0
        assert run_cli("ber", "--config", config, "--out", str(out_b)) == 0
        bytes_a = (out_a / "ber_ofdm.csv").read_bytes()
        bytes_b = (out_b / "ber_ofdm.csv").read_bytes()
        assert bytes_a != bytes_b
        manifest = json.loads((out_a / "manifest.json").read_text())
        assert manifest["seed"] == 9

    def test_byte_identical_across_threads(self, tmp_path):
        config = self.small_config(tmp_path)
        out_a = tmp_path / "t1"
        out_b = tmp_path / "t4"
        assert run_cli("ber", "--config", config, "--out", str(out_a), "--threads", "1") == 0
        assert run_cli("ber", "--config", config, "--out", str(out_b), "--threads", "4") == 0
        for name in ("ber_ofdm.csv", "ber_afdm_qm4_a0p1.csv"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_dry_run_writes_nothing(self, tmp_path, capsys):
        config = self.small_config(tmp_path)
        out = tmp_path / "dry"
        assert run_cli("ber", "--config", config, "--out", str(out), "--dry-run") == 0
        assert not out.exists()
        assert "config OK" in capsys.readouterr().out


class TestSweeps:
    def test_sweep_l_csv(self, tmp_path):
        config = write_yaml(
            tmp_path / "sl.yaml",
            {
                "n": 12,
                "l_values": [1, 3, 12],
                "waveforms": [{"kind": "ofdm"}],
                "channel": {"num_taps": 4},
                "snr_db": [20.0],
                "bits_per_point": 10_000,
                "seed": 2,
            },
        )
        out = tmp_path / "out"
        assert run_cli("sweep-l", "--config", config, "--out", str(out)) == 0
        header, rows = read_csv(out / "sweep_l.csv")
        assert header[0] == "l"
        assert [float(r[0]) for r in rows] == [1.0, 3.0, 12.0]

    def test_sweep_q_csv(self, tmp_path):
        config = write_yaml(
            tmp_path / "sq.yaml",
            {
                "n": 12,
                "q_values": [-4.0, 2.0],
                "alpha": 0.1,
                "waveforms": [{"kind": "ofdm"}],
                "channel": {"num_taps": 4},
                "snr_db": [20.0],
                "bits_per_point": 10_000,
                "seed": 2,
            },
        )
        out = tmp_path / "out"
        assert run_cli("sweep-q", "--config", config, "--out", str(out)) == 0
        header, rows = read_csv(out / "sweep_q.csv")
        assert header[0] == "q"
        assert len(rows) == 2


class TestFdmaDemo:
    def test_outputs_and_containment(self, tmp_path):
        out = tmp_path / "out"
        assert run_cli("fdma-demo", "--out", str(out)) == 0
        _, roundtrip = read_csv(out / "roundtrip.csv")
        assert all(float(row[2]) < 1e-10 for row in roundtrip)
        _, leakage = read_csv(out / "leakage.csv")
        assert all(float(row[2]) < 1e-12 for row in leakage)
        _, variances = read_csv(out / "jammer_variance.csv")
        for row in variances:
            block, clean, jammed = int(row[0]), float(row[3]), float(row[4])
            if block != 1:
                assert clean == jammed
            # jammed block rows must show strictly raised variance
        jammed_rows = [row for row in variances if int(row[0]) == 1]
        assert all(float(r[4]) > float(r[3]) for r in jammed_rows)

    def test_block_whitening_favors_afdm(self, tmp_path):
        out = tmp_path / "out"
        assert run_cli("fdma-demo", "--out", str(out)) == 0
        _, rows = read_csv(out / "block_whitening.csv")
        stds = {row[1]: float(row[2]) for row in rows}
        afdm = next(v for k, v in stds.items() if k.startswith("AFDM"))
        assert afdm < stds["OFDM"]


class TestConfigSerialization:
    def test_channel_round_trip(self):
        from wavelab.configio import channel_to_dict, parse_channel

        spec = wl.ChannelSpec(
            taps=(
                wl.ChannelTap(0, 0.6 - 0.2j, 0.0),
                wl.ChannelTap(3, 0.1 + 0.4j, 0.25),
            )
        )
        assert parse_channel(channel_to_dict(spec)) == spec
        gen = wl.ChannelGenerator(num_taps=8, max_doppler=0.3)
        assert parse_channel(channel_to_dict(gen)) == gen

    def test_waveform_round_trip(self):
        from wavelab.configio import parse_waveform, waveform_to_dict

        for cfg in (
            wl.WaveformConfig.ofdm(12),
            wl.WaveformConfig.otfs(4, 3),
            wl.WaveformConfig.afdm(12, -4.0, 0.1),
        ):
            assert parse_waveform(waveform_to_dict(cfg)) == cfg

    def test_profile_round_trip(self):
        from wavelab.configio import parse_profile, profile_to_dict

        prof = wl.make_profile("impulse", 64, spikes=3, spike_offset=1)
        again = parse_profile(profile_to_dict(prof), 64)
        assert np.array_equal(prof.gains, again.gains)

    def test_sim_round_trip(self):
        from wavelab.configio import parse_sim, sim_to_dict

        cfg = wl.SimConfig(
            channel=wl.ChannelGenerator(num_taps=8),
            profile=wl.make_profile("interferer", 120),
            waveforms=(wl.WaveformConfig.otfs(12, 10),),
            snr_db=(10.0, 20.0),
            bits_per_point=10_000,
            seed=3,
        )
        again = parse_sim(sim_to_dict(cfg))
        assert again.waveforms == cfg.waveforms
        assert again.channel == cfg.channel
        assert np.array_equal(again.profile.gains, cfg.profile.gains)
        assert wl.config_fingerprint(again) == wl.config_fingerprint(cfg)

    def test_explicit_tap_list_channel(self, tmp_path):
        # a fixed identity channel expressed as a tap list in the config
        config = write_yaml(
            tmp_path / "taps.yaml",
            {
                "n": 32,
                "waveforms": [{"kind": "ofdm"}],
                "channel": {"taps": [{"delay": 0, "gain_re": 1.0}]},
                "snr_db": [300.0],
                "bits_per_point": 10_000,
                "seed": 0,
            },
        )
        out = tmp_path / "out"
        assert run_cli("ber", "--config", config, "--out", str(out)) == 0
        _, rows = read_csv(out / "ber_ofdm.csv")
        assert int(rows[0][2]) == 0  # noiseless identity channel: no errors


class TestVerifyAppendix:
    def test_default_grid_passes(self, tmp_path):
        out = tmp_path / "out"
        assert run_cli("verify-appendix", "--out", str(out)) == 0
        doc = json.loads((out / "verify_appendix.json").read_text())
        assert doc["failures"] == 0
        assert all(rec["ok"] for rec in doc["decimation_identity"])
        assert doc["sparse_special_case"]["support"] == [0, 4]

    def test_unattainable_tolerance_exits_3(self, tmp_path):
        config = write_yaml(
            tmp_path / "strict.yaml", {"decimation_tol": 1e-30}
        )
        out = tmp_path / "out"
        assert run_cli("verify-appendix", "--config", config, "--out", str(out)) == 3
        doc = json.loads((out / "verify_appendix.json").read_text())
        assert doc["failures"] > 0
