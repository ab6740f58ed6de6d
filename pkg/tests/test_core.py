import json

import pytest

from etchwarp.core import (
    ChannelSeries,
    DataError,
    Dataset,
    WaferRecord,
    dataset_from_wafers,
    load_dataset,
    save_dataset,
)

from conftest import make_dataset, make_wafer


def test_channel_series_validation():
    with pytest.raises(DataError):
        ChannelSeries(400.0, ())
    with pytest.raises(DataError, match="non-finite"):
        ChannelSeries(400.0, (1.0, float("inf")))
    with pytest.raises(DataError):
        ChannelSeries(-1.0, (1.0,))
    s = ChannelSeries(400.0, (1, 2, 3))
    assert s.samples == (1.0, 2.0, 3.0)
    assert s.sample_rate_hz == 1.3


def test_wafer_record_validation():
    with pytest.raises(DataError, match="etch_rate must be positive"):
        make_wafer("A", 0.0, {400: [1, 2]})
    with pytest.raises(DataError, match="etch_rate must be positive"):
        make_wafer("A", -3.0, {400: [1, 2]})
    with pytest.raises(DataError, match="unequal lengths"):
        make_wafer("A", 1.0, {400: [1, 2], 500: [1, 2, 3]})


def test_dataset_requires_shared_channels():
    a = make_wafer("A", 1.0, {400: [1, 2], 500: [3, 4]})
    b = make_wafer("B", 2.0, {400: [1, 2]})
    with pytest.raises(DataError, match="B.*500"):
        Dataset((a, b), (400.0, 500.0))


def test_dataset_duplicate_ids_rejected():
    a = make_wafer("A", 1.0, {400: [1, 2]})
    a2 = make_wafer("A", 2.0, {400: [3, 4]})
    with pytest.raises(DataError, match="duplicate"):
        Dataset((a, a2), (400.0,))


def test_series_lengths_may_differ_across_wafers():
    ds = make_dataset(
        {
            "A": (1.0, {400: [1, 2, 3]}),
            "B": (2.0, {400: [1, 2, 3, 4, 5]}),
        }
    )
    assert len(ds.wafers[0].channels[400.0]) == 3
    assert len(ds.wafers[1].channels[400.0]) == 5


@pytest.mark.parametrize("fmt,suffix", [("long-csv", ".csv"), ("json", ".json")])
def test_round_trip(tmp_path, tiny_dataset, fmt, suffix):
    path = tmp_path / f"ds{suffix}"
    save_dataset(tiny_dataset, path, fmt)
    loaded = load_dataset(path, fmt)
    assert loaded == tiny_dataset


def test_round_trip_full_precision(tmp_path):
    ds = make_dataset(
        {"A": (0.1 + 0.2, {400: [1 / 3, 2 / 7, 1e-17, 123456.789012345]})}
    )
    for fmt, name in (("long-csv", "p.csv"), ("json", "p.json")):
        path = tmp_path / name
        save_dataset(ds, path, fmt)
        assert load_dataset(path, fmt) == ds


def test_load_is_deterministic(tmp_path, tiny_dataset):
    path = tmp_path / "ds.csv"
    save_dataset(tiny_dataset, path)
    d1 = load_dataset(path)
    d2 = load_dataset(path)
    assert d1 == d2
    assert d1.wafer_ids == d2.wafer_ids


def test_load_sorts_rows_and_wafers(tmp_path):
    path = tmp_path / "shuffled.csv"
    rows = [
        "wafer_id,etch_rate,wavelength_nm,tick,intensity",
        "B,2.0,400.0,1,21.0",
        "A,1.0,400.0,0,10.0",
        "B,2.0,400.0,0,20.0",
        "A,1.0,400.0,1,11.0",
    ]
    path.write_text("\n".join(rows) + "\n")
    ds = load_dataset(path)
    assert ds.wafer_ids == ("A", "B")
    assert ds.wafers[0].channels[400.0].samples == (10.0, 11.0)
    assert ds.wafers[1].channels[400.0].samples == (20.0, 21.0)


def test_load_reports_line_numbers(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(
        "wafer_id,etch_rate,wavelength_nm,tick,intensity\n"
        "A,1.0,400.0,0,1.0\n"
        "A,1.0,400.0,x,2.0\n"
    )
    with pytest.raises(DataError, match="bad.csv:3"):
        load_dataset(path)


def test_load_rejects_non_finite_with_location(tmp_path):
    path = tmp_path / "nan.csv"
    path.write_text(
        "wafer_id,etch_rate,wavelength_nm,tick,intensity\n"
        "A,1.0,400.0,0,nan\n"
    )
    with pytest.raises(DataError, match="nan.csv:2.*non-finite"):
        load_dataset(path)


def test_load_rejects_zero_etch_rate(tmp_path):
    path = tmp_path / "zero.csv"
    path.write_text(
        "wafer_id,etch_rate,wavelength_nm,tick,intensity\n"
        "A,0.0,400.0,0,1.0\n"
    )
    with pytest.raises(DataError, match="etch_rate must be positive"):
        load_dataset(path)


def test_load_rejects_missing_channel(tmp_path):
    path = tmp_path / "missing.csv"
    path.write_text(
        "wafer_id,etch_rate,wavelength_nm,tick,intensity\n"
        "A,1.0,400.0,0,1.0\n"
        "A,1.0,500.0,0,2.0\n"
        "B,2.0,400.0,0,3.0\n"
    )
    with pytest.raises(DataError, match="B.*500"):
        load_dataset(path)


def test_load_rejects_conflicting_rate(tmp_path):
    path = tmp_path / "conflict.csv"
    path.write_text(
        "wafer_id,etch_rate,wavelength_nm,tick,intensity\n"
        "A,1.0,400.0,0,1.0\n"
        "A,2.0,400.0,1,1.0\n"
    )
    with pytest.raises(DataError, match="conflicting etch_rate"):
        load_dataset(path)


def test_load_rejects_duplicate_tick(tmp_path):
    path = tmp_path / "dup.csv"
    path.write_text(
        "wafer_id,etch_rate,wavelength_nm,tick,intensity\n"
        "A,1.0,400.0,0,1.0\n"
        "A,1.0,400.0,0,2.0\n"
    )
    with pytest.raises(DataError, match="duplicate tick"):
        load_dataset(path)


def test_load_rejects_gap_in_ticks(tmp_path):
    path = tmp_path / "gap.csv"
    path.write_text(
        "wafer_id,etch_rate,wavelength_nm,tick,intensity\n"
        "A,1.0,400.0,0,1.0\n"
        "A,1.0,400.0,2,2.0\n"
    )
    with pytest.raises(DataError, match="not contiguous"):
        load_dataset(path)


def test_load_bad_header(tmp_path):
    path = tmp_path / "hdr.csv"
    path.write_text("id,rate\nA,1\n")
    with pytest.raises(DataError, match="hdr.csv:1"):
        load_dataset(path)


def test_load_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(DataError):
        load_dataset(path)


def test_json_schema_shape(tmp_path, tiny_dataset):
    path = tmp_path / "ds.json"
    save_dataset(tiny_dataset, path)
    doc = json.loads(path.read_text())
    assert set(doc) == {"wafers"}
    first = doc["wafers"][0]
    assert set(first) == {"wafer_id", "etch_rate", "channels"}
    assert set(first["channels"]) == {"400.0", "500.0"}


def test_json_parse_error_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"wafers": [\n  {"wafer_id" "oops"}\n]}')
    with pytest.raises(DataError, match="bad.json:2"):
        load_dataset(path)


def test_save_requires_wafers():
    with pytest.raises(DataError):
        Dataset((), (400.0,))
    with pytest.raises(DataError):
        dataset_from_wafers([])


def test_single_wafer_csv_shape(tmp_path):
    ds = make_dataset({"A": (1.5, {400: [1, 2, 3]})})
    path = tmp_path / "one.csv"
    save_dataset(ds, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "wafer_id,etch_rate,wavelength_nm,tick,intensity"
    assert len(lines) == 1 + 3


def test_format_inference(tmp_path, tiny_dataset):
    csv_path = tmp_path / "ds.csv"
    json_path = tmp_path / "ds.json"
    save_dataset(tiny_dataset, csv_path)
    save_dataset(tiny_dataset, json_path)
    assert load_dataset(csv_path) == load_dataset(json_path) == tiny_dataset


def test_unknown_format_rejected(tmp_path, tiny_dataset):
    with pytest.raises(DataError, match="unknown dataset format"):
        save_dataset(tiny_dataset, tmp_path / "x.bin", "parquet")
