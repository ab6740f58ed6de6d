import json
import math

import numpy as np
import pytest

from etchwarp.core import load_dataset, save_dataset
from etchwarp.features import detect_stage_split
from etchwarp.synth import (
    RATE_BASE,
    RATE_NOISE_STD,
    SynthConfig,
    generate,
    meta_path,
    write_meta,
)


def test_default_config_values():
    cfg = SynthConfig()
    assert cfg.n_wafers == 200
    assert cfg.n_channels == 11
    assert cfg.ticks == 57
    assert cfg.stage_split_tick == 20
    assert cfg.jitter_max == 3
    assert cfg.tail_effect > 0


def test_config_validation():
    with pytest.raises(ValueError):
        SynthConfig(n_wafers=0)
    with pytest.raises(ValueError):
        SynthConfig(stage_split_tick=3)
    with pytest.raises(ValueError):
        SynthConfig(stage_split_tick=54)  # > ticks-4
    with pytest.raises(ValueError):
        SynthConfig(jitter_max=20)  # >= stage_split_tick
    with pytest.raises(ValueError):
        SynthConfig(noise_std=-0.1)
    with pytest.raises(ValueError):
        SynthConfig(signal_channels=(11,))


def test_same_seed_identical():
    cfg = SynthConfig(n_wafers=12, n_channels=2, seed=42)
    assert generate(cfg) == generate(cfg)


def test_different_seed_differs():
    a = generate(SynthConfig(n_wafers=5, n_channels=2, seed=1))
    b = generate(SynthConfig(n_wafers=5, n_channels=2, seed=2))
    assert a != b


def test_all_variation_off_channel0_identical():
    cfg = SynthConfig(
        n_wafers=8, n_channels=3, noise_std=0.0, jitter_max=0, tail_effect=0.0, seed=9
    )
    ds = generate(cfg)
    wl0 = ds.channel_order[0]
    first = ds.wafers[0].channels[wl0].samples
    for w in ds.wafers[1:]:
        assert w.channels[wl0].samples == first
    rates = np.array(ds.etch_rates)
    assert rates.std() > 0  # only the planted rate noise remains
    assert np.all(np.abs(rates - RATE_BASE) < 6 * RATE_NOISE_STD)


def test_rate_positive_and_finite():
    ds = generate(SynthConfig(n_wafers=50, n_channels=2, seed=3))
    for r in ds.etch_rates:
        assert math.isfinite(r) and r > 0


def test_planted_slope_correlates_with_rate():
    cfg = SynthConfig()
    ds = generate(cfg)
    tail_start = cfg.ticks - cfg.tail_length
    slopes = []
    for w in ds.wafers:
        x = np.array(w.channels[400.0].samples)
        # locate the stage edge independently, then fit the descent ramp
        shift = int(np.argmax(np.diff(x))) + 1 - cfg.stage_split_tick
        lo = tail_start + shift
        seg = x[lo : lo + cfg.ramp_length]
        slopes.append(-np.polyfit(np.arange(len(seg)), seg, 1)[0])
    corr = np.corrcoef(slopes, ds.etch_rates)[0, 1]
    assert corr > 0.9


def test_split_detection_exact_without_jitter_or_noise():
    cfg = SynthConfig(n_wafers=20, jitter_max=0, noise_std=0.0, seed=7)
    ds = generate(cfg)
    for w in ds.wafers:
        for wl in ds.channel_order:
            assert detect_stage_split(w.channels[wl]) == cfg.stage_split_tick


def test_generated_dataset_round_trips(tmp_path):
    ds = generate(SynthConfig(n_wafers=6, n_channels=2, seed=11))
    path = tmp_path / "synth.csv"
    save_dataset(ds, path)
    loaded = load_dataset(path)
    assert loaded.wafer_ids == ds.wafer_ids
    assert loaded.channel_order == ds.channel_order
    for a, b in zip(loaded.wafers, ds.wafers):
        assert a == b


def test_meta_sidecar(tmp_path):
    cfg = SynthConfig(n_wafers=4, n_channels=2, seed=13)
    out = tmp_path / "d.csv"
    write_meta(cfg, out)
    sidecar = meta_path(out)
    assert sidecar.name == "d.meta.json"
    doc = json.loads(sidecar.read_text())
    assert doc["config"]["n_wafers"] == 4
    assert doc["config"]["seed"] == 13
    assert "PCG64" in doc["prng"]
    assert doc["numpy_version"] == np.__version__
    assert doc["generator_version"]


def test_dataset_meta_embedded():
    cfg = SynthConfig(n_wafers=4, n_channels=2, seed=13)
    ds = generate(cfg)
    assert ds.meta["config"]["seed"] == 13


def test_channel_count_and_wavelengths():
    ds = generate(SynthConfig(n_wafers=3, n_channels=4, seed=1))
    assert ds.channel_order == (400.0, 425.0, 450.0, 475.0)
    for w in ds.wafers:
        assert set(w.channels) == set(ds.channel_order)
        for s in w.channels.values():
            assert len(s) == 57


def test_jitter_shifts_edge():
    cfg = SynthConfig(n_wafers=40, n_channels=1, noise_std=0.0, seed=21)
    ds = generate(cfg)
    edges = set()
    for w in ds.wafers:
        x = np.array(w.channels[400.0].samples)
        edges.add(int(np.argmax(np.diff(x))) + 1)
    lo = cfg.stage_split_tick - cfg.jitter_max
    hi = cfg.stage_split_tick + cfg.jitter_max
    assert edges <= set(range(lo, hi + 1))
    assert len(edges) > 1
