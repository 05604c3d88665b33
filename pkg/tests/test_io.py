import csv
import json

import numpy as np
import pytest

from xcorr_rom import io as rom_io
from xcorr_rom.errors import FormatError
from xcorr_rom.pipeline import offline, predict
from xcorr_rom.reduction import compute_pod
from xcorr_rom.registration import register_set
from xcorr_rom.snapshots import VortexParams, generate_vortex


def test_snapshot_round_trip(tmp_path, wave):
    path = rom_io.write_snapshots(tmp_path / "wave.snap", wave)
    back = rom_io.read_snapshots(path)
    assert back.grid == wave.grid
    np.testing.assert_array_equal(back.times, wave.times)
    np.testing.assert_array_equal(back.data, wave.data)
    assert back.field_name == "amplitude"
    assert back.params["case"] == "gaussian_wave"
    assert rom_io.sidecar_path(path).name == "wave.meta.json"


def test_snapshot_layout_is_snapshot_contiguous(tmp_path):
    s = generate_vortex(VortexParams(sizes=(6, 4), n_times=3))
    path = rom_io.write_snapshots(tmp_path / "v.snap", s)
    raw = path.read_bytes()
    header = 8 + 8 + 2 * 8 + 2 * 16 + 8 + 3 * 8
    assert len(raw) == header + 8 * 24 * 3
    first = np.frombuffer(raw, "<f8", count=24, offset=header)
    np.testing.assert_array_equal(first, s.data[:, 0])
    back = rom_io.read_snapshots(path)
    np.testing.assert_array_equal(back.field(2), s.field(2))


def test_reads_without_sidecar(tmp_path, wave):
    path = rom_io.write_snapshots(tmp_path / "w.snap", wave)
    rom_io.sidecar_path(path).unlink()
    assert rom_io.read_snapshots(path).field_name == "field"


@pytest.mark.parametrize("cut", [4, 20, 1000])
def test_truncated_file_names_offset(tmp_path, wave, cut):
    path = rom_io.write_snapshots(tmp_path / "w.snap", wave)
    path.write_bytes(path.read_bytes()[:cut])
    with pytest.raises(FormatError, match="byte offset"):
        rom_io.read_snapshots(path)


def test_bad_magic_and_trailing_bytes(tmp_path, wave):
    path = rom_io.write_snapshots(tmp_path / "w.snap", wave)
    raw = path.read_bytes()
    path.write_bytes(b"NOTASNAP" + raw[8:])
    with pytest.raises(FormatError, match="bad magic .* byte offset 0"):
        rom_io.read_snapshots(path)
    path.write_bytes(raw + b"\0")
    with pytest.raises(FormatError, match="trailing"):
        rom_io.read_snapshots(path)


def test_registered_round_trip(tmp_path, wave_split, wave_reference):
    reg = register_set(wave_split[0], wave_reference)
    rom_io.write_registered(tmp_path / "reg.snap", reg)
    back = rom_io.read_registered(tmp_path / "reg.snap")
    np.testing.assert_array_equal(back.shifts, reg.shifts)
    np.testing.assert_array_equal(back.snapshots.data, reg.snapshots.data)
    assert back.reference_index == wave_reference
    doc = json.loads((tmp_path / "shifts.json").read_text())
    assert doc["shifts"][0]["lags"] == [int(reg.shifts[0, 0])]


def test_basis_round_trip(tmp_path, rng):
    b = compute_pod(rng.standard_normal((20, 7)), rank=3)
    rom_io.write_basis(tmp_path / "b.bin", b)
    back = rom_io.read_basis(tmp_path / "b.bin")
    np.testing.assert_array_equal(back.modes, b.modes)
    np.testing.assert_array_equal(back.singular_values, b.singular_values)
    assert back.energy_captured == pytest.approx(b.energy_captured, rel=1e-15)


def test_energy_csv(tmp_path):
    b = compute_pod(np.diag([2.0, 1.0]), rank=1)
    rom_io.write_energy_csv(tmp_path / "e.csv", b)
    rows = list(csv.reader(open(tmp_path / "e.csv")))
    assert rows[0] == ["mode_index", "sigma", "energy_cumulative"]
    assert [float(v) for v in rows[1]] == pytest.approx([1, 2, 0.8])
    assert [float(v) for v in rows[2]] == pytest.approx([2, 1, 1.0])


@pytest.mark.parametrize("register", [True, False])
def test_model_round_trip_predicts_identically(tmp_path, wave_split, wave_reference, register):
    tr, te = wave_split
    m = offline(tr, wave_reference, register=register, rank=None if register else 10)
    rom_io.save_model(tmp_path / "m", m, extra={"note": "x"})
    back = rom_io.load_model(tmp_path / "m")
    assert back.rank == m.rank
    assert back.registration_enabled == register
    np.testing.assert_array_equal(back.shifts, m.shifts)
    t = np.concatenate([tr.times[::7], te.times[::7]])
    np.testing.assert_allclose(predict(back, t), predict(m, t), rtol=0, atol=1e-13)
    assert json.loads((tmp_path / "m" / "meta.json").read_text())["extra"] == {"note": "x"}


def test_missing_model_files_listed(tmp_path, wave_split, wave_reference):
    rom_io.save_model(tmp_path / "m", offline(wave_split[0], wave_reference))
    (tmp_path / "m" / "basis.bin").unlink()
    (tmp_path / "m" / "shifts.json").unlink()
    with pytest.raises(FormatError, match="basis.bin, shifts.json"):
        rom_io.load_model(tmp_path / "m")
