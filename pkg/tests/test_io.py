import json

import numpy as np
import pytest

from tomobss import SimulationConfig, default_geometry
from tomobss.errors import InvalidInputError
from tomobss.io import (load_scene, load_simulation_config, read_matrix, save_simulation_config,
                        write_matrix)

from conftest import random_stack, two_scatterers


def test_matrix_round_trip(tmp_path, rng):
    A = random_stack(rng, n=4, m=7)
    write_matrix(tmp_path / "a.bin", A)
    np.testing.assert_array_equal(read_matrix(tmp_path / "a.bin"), A)


def test_matrix_layout(tmp_path):
    write_matrix(tmp_path / "a.bin", np.array([[1 + 2j, 3.0]]))
    raw = (tmp_path / "a.bin").read_bytes()
    assert np.frombuffer(raw[:16], "<u8").tolist() == [1, 2]
    assert np.frombuffer(raw[16:], "<f8").tolist() == [1.0, 2.0, 3.0, 0.0]


@pytest.mark.parametrize("payload", [b"", b"\x01" * 10, np.array([2, 2], "<u8").tobytes() + b"\0" * 8])
def test_malformed_matrix(tmp_path, payload):
    (tmp_path / "bad.bin").write_bytes(payload)
    with pytest.raises(InvalidInputError):
        read_matrix(tmp_path / "bad.bin")


def test_write_rejects_vectors(tmp_path):
    with pytest.raises(InvalidInputError):
        write_matrix(tmp_path / "v.bin", np.ones(3))


def test_config_round_trip(tmp_path):
    g = default_geometry()
    cfg = SimulationConfig(g, tuple(two_scatterers(g, 1.5)), noise_power=0.3, looks=77, seed=2 ** 63)
    save_simulation_config(tmp_path / "c.json", cfg)
    assert load_simulation_config(str(tmp_path / "c.json")) == cfg


def test_scene_defaults_and_overrides():
    geom, sc = load_scene({"scatterers": [{"elevation_m": 5.0}]})
    assert geom == default_geometry()
    assert sc[0].amplitude == 1.0
    cfg = load_simulation_config({"looks": 10}, looks=20, seed=None)
    assert cfg.looks == 20 and cfg.seed == 0


def test_deformation_entries():
    doc = {"scatterers": [{"elevation_m": 1.0, "deformation": [{"coefficient": 0.01, "basis": [0.0] * 9}]}]}
    _, sc = load_scene(doc)
    assert sc[0].deformation[0].coefficient == 0.01


@pytest.mark.parametrize("doc", [{"scatterers": [{"amplitude": 1.0}]},
                                 {"baselines_m": [0, 1], "range_m": 1.0},
                                 {"baselines_m": [5, 5], "wavelength_m": 1.0, "range_m": 1.0}])
def test_bad_scene(doc):
    with pytest.raises(InvalidInputError):
        load_scene(doc)


def test_bad_json(tmp_path):
    (tmp_path / "x.json").write_text("{nope")
    with pytest.raises(InvalidInputError):
        load_scene(str(tmp_path / "x.json"))
