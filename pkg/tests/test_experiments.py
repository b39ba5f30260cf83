import csv
import json

import numpy as np
import pytest

from tomobss import ScattererParams, SimulationConfig, default_geometry
from tomobss.errors import InvalidInputError
from tomobss.experiments import (COLUMNS, FIGURES, ExperimentSpec, emit_figure_data, figure3_rows,
                                 grid_seed, noise_for_msnr, read_rows, run_experiment,
                                 spec_from_dict, truth_order)


def small(kind, **kw):
    kw.setdefault("runs", 4)
    kw.setdefault("base", SimulationConfig(looks=60, seed=3))
    return ExperimentSpec(kind, **kw)


@pytest.mark.parametrize("kw", [dict(estimators=()), dict(runs=0), dict(estimators=("ica",))])
def test_spec_validation(kw):
    with pytest.raises(InvalidInputError):
        small("sweep-amplitude", **kw)


def test_default_grid():
    spec = small("sweep-amplitude")
    assert spec.grid[0] == 1.0 and spec.grid[-1] == 2.0


def test_unknown_kind():
    with pytest.raises(InvalidInputError):
        ExperimentSpec("sweep-looks")


def test_kernel_sweep_rejects_pca():
    with pytest.raises(InvalidInputError):
        small("sweep-kernel", estimators=("pca",))


def test_default_ratios():
    assert small("sweep-kernel", estimators=("kpca-poly",)).amplitude_ratio == 1.2
    assert small("sweep-distance").amplitude_ratio == 1.0


def test_noise_for_msnr():
    sc = (ScattererParams(0.0, 2.0), ScattererParams(1.0, 1.0))
    # looks * SNR = 30 dB at 100 looks is SNR = 10, so noise = 5 / (9 * 10)
    assert noise_for_msnr(sc, 9, 100, 30.0) == pytest.approx(5 / 90)


def test_truth_order():
    sc = [ScattererParams(50.0, 1.0), ScattererParams(10.0, 2.0), ScattererParams(5.0, 1.0)]
    assert truth_order(sc) == [1, 2, 0]


def test_grid_seed_distinct():
    assert grid_seed(1, 0) != grid_seed(1, 1)
    assert grid_seed(1, 0) == grid_seed(1, 0)


def test_amplitude_sweep_rows(tmp_path):
    spec = small("sweep-amplitude", grid=(1.0, 2.0), out=str(tmp_path))
    rows = run_experiment(spec)
    assert len(rows) == 2 * 2 * 2
    with open(tmp_path / "sweep-amplitude.csv") as fh:
        header = next(csv.reader(fh))
    assert header == COLUMNS
    side = json.loads((tmp_path / "sweep-amplitude.json").read_text())
    assert side["grid"] == [1.0, 2.0] and side["base"]["looks"] == 60
    r = rows[0]
    assert r["amplitude_ratio"] == 1.0 and r["distance_rayleigh"] == 1.0 and r["looks"] == 60


def test_csv_is_byte_identical(tmp_path):
    for d in ("a", "b"):
        run_experiment(small("sweep-distance", grid=(0.5, 1.0), out=str(tmp_path / d)))
    a = (tmp_path / "a" / "sweep-distance.csv").read_bytes()
    b = (tmp_path / "b" / "sweep-distance.csv").read_bytes()
    assert a == b


def test_snr_sweep_defaults_to_100_looks():
    spec = spec_from_dict({}, "sweep-snr", runs=2, grid=[10.0])
    assert spec.base.looks == 100
    row = run_experiment(spec, write=False)[0]
    assert row["msnr_db"] == 10.0
    assert row["noise_power"] == pytest.approx(2 / (9 * 0.1))


def test_kernel_sweep_reports_coherence():
    rows = run_experiment(small("sweep-kernel", grid=(1.3,), estimators=("kpca-poly",)), write=False)
    assert len(rows) == 1
    assert 0 < rows[0]["mean_coherence"] <= 1
    assert rows[0]["kernel_param"] == 1.3


def test_single_scene_one_scatterer():
    base = SimulationConfig(default_geometry(), (ScattererParams(40.0, 1.0),), looks=50)
    rows = run_experiment(ExperimentSpec("single-scene", base=base, runs=3, estimators=("kpca-gaussian",)),
                          write=False)
    assert len(rows) == 1
    assert rows[0]["mean_bias_deg"] < 1e-6


def test_single_scene_needs_scatterers():
    with pytest.raises(InvalidInputError):
        run_experiment(ExperimentSpec("single-scene", runs=1), write=False)


def test_failure_flag(monkeypatch):
    from tomobss import experiments

    def broken(*a, **k):
        def est(G):
            raise RuntimeError("no")
        return est

    monkeypatch.setattr(experiments, "make_estimator", broken)
    rows = run_experiment(small("sweep-amplitude", grid=(1.0,), estimators=("pca",)), write=False)
    assert all(r["flagged"] == 1 and r["failures"] == 4 for r in rows)


def test_spec_from_dict_errors():
    with pytest.raises(InvalidInputError):
        spec_from_dict({"colour": "red"}, "sweep-amplitude")
    with pytest.raises(InvalidInputError):
        spec_from_dict({})


def test_figure3_rows():
    rows = figure3_rows()
    assert len(rows) == 18
    a2 = [r for r in rows if r["alpha"] == 2.0]
    assert max(abs(r["bias_first_deg"]) for r in a2) == pytest.approx(4.0, abs=2.0)
    assert set(FIGURES["fig3"]) <= set(rows[0])


def test_figure_data(tmp_path):
    rows = run_experiment(small("sweep-distance", grid=(1.0,)), write=False)
    paths = emit_figure_data(rows, tmp_path)
    assert set(paths) == {"fig3", "fig5", "fig6", "fig7", "fig9"}
    fig6 = read_rows(paths["fig6"])
    assert len(fig6) == 4 and "mean_relative_bias" in fig6[0]
    assert (tmp_path / "fig5.csv").read_text().strip() == ",".join(FIGURES["fig5"])
