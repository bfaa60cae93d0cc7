import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gnss_rfi.recording import (
    CHANNEL_NAMES,
    HEADER,
    N_CHANNELS,
    N_CNO,
    FlightRecording,
    RecordingError,
    load_dataset_manifest,
    parse_flight_csv,
    write_flight_csv,
    write_manifest,
)

from conftest import make_recording


def _write_rows(path, rows, header=HEADER):
    lines = [",".join(header)] + [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _full_row(t, cno="40.5"):
    return [t] + [cno] * N_CNO + ["90.0", "1.5", "-2.0", "45.0", "47.0"]


def test_schema_has_37_channels():
    assert N_CHANNELS == 37
    assert HEADER[0] == "t" and HEADER[1] == "cno_01" and HEADER[32] == "cno_32"
    assert HEADER[33:] == ("heading_deg", "roll_deg", "pitch_deg", "gs_mps", "tas_mps")


def test_parse_three_full_rows(tmp_path):
    p = tmp_path / "f.csv"
    _write_rows(p, [_full_row(t) for t in range(3)])
    rec = parse_flight_csv(p)
    assert rec.n_epochs == 3
    assert rec.present.all()
    assert rec.flight_id == "f"
    np.testing.assert_array_equal(rec.channel("cno_01"), [40.5, 40.5, 40.5])
    np.testing.assert_array_equal(rec.channel("gs_mps"), [45.0] * 3)


def test_empty_cno_column_is_absent_not_zero(tmp_path):
    p = tmp_path / "f.csv"
    rows = [_full_row(t) for t in range(4)]
    for row in rows:
        row[7] = ""  # cno_07
    _write_rows(p, rows)
    rec = parse_flight_csv(p)
    j = CHANNEL_NAMES.index("cno_07")
    assert not rec.present[:, j].any()
    assert np.isnan(rec.channels[:, j]).all()
    others = np.delete(rec.present, j, axis=1)
    assert others.all()


@pytest.mark.parametrize("bad", ["NaN", "", "nan"])
def test_dense_gap_is_an_error(tmp_path, bad):
    p = tmp_path / "f.csv"
    rows = [_full_row(t) for t in range(3)]
    rows[1][33] = bad  # heading
    _write_rows(p, rows)
    with pytest.raises(RecordingError, match="gap") as err:
        parse_flight_csv(p)
    assert err.value.row == 3 and err.value.column == "heading_deg"


def test_malformed_header(tmp_path):
    p = tmp_path / "f.csv"
    header = list(HEADER)
    header[5] = "cno_xx"
    _write_rows(p, [_full_row(0)], header=header)
    with pytest.raises(RecordingError, match="header"):
        parse_flight_csv(p)


def test_non_numeric_cell_names_row_and_column(tmp_path):
    p = tmp_path / "f.csv"
    rows = [_full_row(t) for t in range(3)]
    rows[2][3] = "abc"
    _write_rows(p, rows)
    with pytest.raises(RecordingError) as err:
        parse_flight_csv(p)
    assert err.value.row == 4
    assert err.value.column == "cno_03"
    assert "non-numeric" in str(err.value)


def test_zero_rows_rejected(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text(",".join(HEADER) + "\n")
    with pytest.raises(RecordingError, match="T = 0"):
        parse_flight_csv(p)


def test_empty_file_rejected(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("")
    with pytest.raises(RecordingError):
        parse_flight_csv(p)


def test_cno_out_of_range_rejected(tmp_path):
    p = tmp_path / "f.csv"
    rows = [_full_row(t) for t in range(2)]
    rows[0][1] = "61.0"
    _write_rows(p, rows)
    with pytest.raises(RecordingError, match="outside"):
        parse_flight_csv(p)


def test_cno_nan_literal_rejected(tmp_path):
    p = tmp_path / "f.csv"
    rows = [_full_row(t) for t in range(2)]
    rows[0][1] = "NaN"
    _write_rows(p, rows)
    with pytest.raises(RecordingError, match="empty"):
        parse_flight_csv(p)


def test_epochs_must_increase(tmp_path):
    p = tmp_path / "f.csv"
    _write_rows(p, [_full_row(0), _full_row(0)])
    with pytest.raises(RecordingError, match="increasing"):
        parse_flight_csv(p)


def test_ragged_row(tmp_path):
    p = tmp_path / "f.csv"
    rows = [_full_row(0), _full_row(1)[:-1]]
    _write_rows(p, rows)
    with pytest.raises(RecordingError, match="fields") as err:
        parse_flight_csv(p)
    assert err.value.row == 3


def test_round_trip_with_absent_cells(tmp_path):
    rec = make_recording(n=20, absent=(3, 17), label=1)
    ch = rec.channels.copy()
    ch[5:9, 0] = np.nan  # partial loss of track
    rec = FlightRecording("X9", rec.epochs, ch, 1)
    p = tmp_path / "x.csv"
    write_flight_csv(rec, p)
    back = parse_flight_csv(p)
    assert back == rec
    np.testing.assert_array_equal(back.present, rec.present)
    line = p.read_text().splitlines()[2]
    assert ",," in line


def test_single_epoch_round_trip(tmp_path):
    rec = make_recording(n=1)
    p = tmp_path / "one.csv"
    write_flight_csv(rec, p)
    assert len(p.read_text().splitlines()) == 3  # metadata, header, one row
    assert parse_flight_csv(p) == rec


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(1, 30),
    seed=st.integers(0, 2**32 - 1),
    label=st.sampled_from([0, 1]),
    absent_frac=st.floats(0.0, 1.0),
)
def test_round_trip_property(tmp_path_factory, n, seed, label, absent_frac):
    rng = np.random.default_rng(seed)
    ch = np.empty((n, N_CHANNELS))
    ch[:, :N_CNO] = np.round(rng.uniform(0, 60, (n, N_CNO)), 4)
    ch[:, :N_CNO][rng.random((n, N_CNO)) < absent_frac] = np.nan
    ch[:, 32] = np.round(rng.uniform(0, 359.9999, n), 4)
    ch[:, 33] = np.round(rng.uniform(-180, 180, n), 4)
    ch[:, 34] = np.round(rng.uniform(-90, 90, n), 4)
    ch[:, 35:] = np.round(rng.uniform(0, 300, (n, 2)), 4)
    epochs = np.cumsum(rng.integers(1, 3, n))
    rec = FlightRecording(f"H{seed}", epochs, ch, label)
    p = tmp_path_factory.mktemp("rt") / "h.csv"
    write_flight_csv(rec, p)
    back = parse_flight_csv(p)
    assert back == rec
    assert back.label == label


def test_recording_is_immutable(recording):
    with pytest.raises(ValueError):
        recording.channels[0, 0] = 1.0
    with pytest.raises(AttributeError):
        recording.label = 1


def test_constructor_rejects_bad_label():
    with pytest.raises(RecordingError):
        make_recording(label=2)


def _manifest_fixture(tmp_path, labels=("0", "1"), ids=("A", "B")):
    for fid in set(ids):
        write_flight_csv(make_recording(n=4, flight_id=fid), tmp_path / f"{fid}.csv")
    lines = ["flight_id,relative_path,label"] + [f"{i},{i}.csv,{lab}" for i, lab in zip(ids, labels)]
    m = tmp_path / "manifest.csv"
    m.write_text("\n".join(lines) + "\n")
    return m


def test_manifest_two_flights(tmp_path):
    ds = load_dataset_manifest(_manifest_fixture(tmp_path))
    assert len(ds) == 2
    assert ds.flight_ids == ["A", "B"]
    assert ds.prevalence == 0.5
    assert list(ds.labels) == [0, 1]


def test_manifest_label_overrides_file_metadata(tmp_path):
    ds = load_dataset_manifest(_manifest_fixture(tmp_path, labels=("1", "1")))
    assert list(ds.labels) == [1, 1]


def test_manifest_duplicate_id(tmp_path):
    with pytest.raises(RecordingError, match="duplicate"):
        load_dataset_manifest(_manifest_fixture(tmp_path, ids=("A", "A")))


def test_manifest_label_domain(tmp_path):
    with pytest.raises(RecordingError, match="label"):
        load_dataset_manifest(_manifest_fixture(tmp_path, labels=("0", "2")))


def test_manifest_missing_file(tmp_path):
    m = tmp_path / "manifest.csv"
    m.write_text("Z,nowhere.csv,0\n")
    with pytest.raises(RecordingError, match="missing"):
        load_dataset_manifest(m)


def test_write_manifest_round_trip(tmp_path):
    for fid in ("A", "B", "C"):
        write_flight_csv(make_recording(n=3, flight_id=fid), tmp_path / f"{fid}.csv")
    write_manifest([("C", "C.csv", 1), ("A", "A.csv", 0), ("B", "B.csv", 0)], tmp_path / "m.csv")
    ds = load_dataset_manifest(tmp_path / "m.csv")
    assert ds.flight_ids == ["C", "A", "B"]
    assert list(ds.labels) == [1, 0, 0]
