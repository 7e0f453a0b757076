import math
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfflab import io, lattice, spectral
from gfflab.config import SUBCOMMANDS, RunConfig
from gfflab.exceptions import InvalidConfigError


# --- GFFB ------------------------------------------------------------------------

def test_spectral_round_trip(tmp_path):
    f = spectral.sample_spectral(32, 2**63 + 5)
    io.write_gffb(tmp_path / "f.gffb", f)
    g = io.read_gffb(tmp_path / "f.gffb")
    assert isinstance(g, spectral.SpectralField)
    assert (g.cutoff, g.seed) == (32, 2**63 + 5)
    assert g.alpha.tobytes() == f.alpha.tobytes()


def test_lattice_round_trip(tmp_path):
    f = lattice.sample_dgff(16, 3)
    io.write_gffb(tmp_path / "l.gffb", f)
    g = io.read_gffb(tmp_path / "l.gffb")
    assert isinstance(g, lattice.LatticeField)
    assert (g.n, g.seed) == (16, 3)
    assert g.values.tobytes() == f.values.tobytes()


def test_header_layout(tmp_path):
    io.write_gffb(tmp_path / "f.gffb", spectral.sample_spectral(4, 42))
    data = (tmp_path / "f.gffb").read_bytes()
    assert data[:4] == b"GFFB"
    assert struct.unpack("<H", data[4:6])[0] == 1
    assert data[6] == 0 and data[7] == 0
    assert struct.unpack("<I", data[8:12])[0] == 4
    assert struct.unpack("<Q", data[12:20])[0] == 42
    assert len(data) == 20 + 8 * 16


@pytest.mark.parametrize("mutate", [
    lambda d: b"GFFX" + d[4:],
    lambda d: d[:4] + struct.pack("<H", 2) + d[6:],
    lambda d: d[:6] + bytes([7]) + d[7:],
    lambda d: d[:7] + bytes([1]) + d[8:],
    lambda d: d[:-8],
    lambda d: d[:10],
])
def test_corrupt_files_rejected(tmp_path, mutate):
    path = tmp_path / "f.gffb"
    io.write_gffb(path, spectral.sample_spectral(4, 1))
    path.write_bytes(mutate(path.read_bytes()))
    with pytest.raises(InvalidConfigError):
        io.read_gffb(path)


def test_write_rejects_other_objects(tmp_path):
    with pytest.raises(InvalidConfigError):
        io.write_gffb(tmp_path / "x.gffb", np.zeros(3))


# --- CSV / JSON / SVG --------------------------------------------------------------

def test_format_value_round_trips_floats():
    for v in (0.1, 1 / 3, 1e-300, -2.5e17, math.pi):
        assert float(io.format_value(v)) == v
    assert io.format_value(np.int64(7)) == "7"
    assert io.format_value(True) == "true"


def test_highpoints_csv_round_trip(tmp_path):
    rows = [(64, 1.0, 2.3462, 12, 2**64 - 1), (128, 0.5, 1 / 3, 0, 5)]
    io.write_highpoints_csv(tmp_path / "hp.csv", rows)
    assert (tmp_path / "hp.csv").read_text().splitlines()[0] == "N,a,threshold,count,seed"
    assert io.read_highpoints_csv(tmp_path / "hp.csv") == rows


def test_highpoints_csv_missing_column(tmp_path):
    io.write_csv(tmp_path / "bad.csv", ["N", "a"], [(64, 1.0)])
    with pytest.raises(InvalidConfigError):
        io.read_highpoints_csv(tmp_path / "bad.csv")


def test_json_handles_numpy_and_nonfinite():
    text = io.dumps_json({"b": np.float64(0.5), "a": np.arange(3), "c": math.inf, "d": 1 + 2j})
    assert text.index('"a"') < text.index('"b"')
    assert '"inf"' in text and "[\n    1.0,\n    2.0\n  ]" in text


def test_svg_outputs(tmp_path):
    io.write_points_svg(tmp_path / "p.svg", [[0.1, 0.2], [0.5, 0.5]])
    assert (tmp_path / "p.svg").read_text().count("<circle") == 2
    square = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    io.write_overlay_svg(tmp_path / "o.svg", [square, 0.5 * square])
    assert (tmp_path / "o.svg").read_text().count("<polygon") == 2


# --- RunConfig -------------------------------------------------------------------

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)
configs = st.builds(
    RunConfig,
    subcommand=st.sampled_from(SUBCOMMANDS),
    seed=st.integers(0, 2**64 - 1),
    trials=st.integers(1, 10**6),
    workers=st.none() | st.integers(1, 64),
    cutoff=st.integers(1, 8192),
    radii=st.lists(st.floats(1e-6, 0.5), max_size=5),
    a=st.lists(finite, max_size=4),
    gamma=finite,
    map=st.text(max_size=20),
    out=st.none() | st.text(max_size=10),
)


@given(configs)
@settings(max_examples=100, deadline=None)
def test_config_round_trip(cfg):
    assert RunConfig.from_json(cfg.to_json()) == cfg


def test_config_file_round_trip(tmp_path):
    cfg = RunConfig(subcommand="highpoints", grid=[64, 128], a=[0.5, 1.0], csv="hp.csv")
    cfg.dump(tmp_path / "c.json")
    assert RunConfig.load(tmp_path / "c.json") == cfg


def test_unknown_keys_rejected():
    with pytest.raises(InvalidConfigError, match="unknown config keys"):
        RunConfig.from_dict({"seed": 1, "colour": "red"})


@pytest.mark.parametrize("text", ["[1, 2]", "{not json", '{"subcommand": "explode"}'])
def test_bad_config_text_rejected(text):
    with pytest.raises(InvalidConfigError):
        RunConfig.from_json(text)


def test_missing_config_file(tmp_path):
    with pytest.raises(InvalidConfigError):
        RunConfig.load(tmp_path / "nope.json")
