import json
import math

import numpy as np
import pytest

from fairbreak.classifiers import (
    LinearClassifier,
    LookupClassifier,
    ThresholdClassifier,
    constant_classifier,
    dumps_model,
    loads_model,
)
from fairbreak.dataset import LabeledDataset, load_dataset_csv, save_dataset_csv
from fairbreak.errors import DimensionError, FormatError
from fairbreak.experiment import (
    CellResult,
    ExperimentConfig,
    summarize,
    table_csv,
    table_text,
    worker_count,
)


@pytest.mark.parametrize(
    "h",
    [
        LinearClassifier((0.5, -1.25), 0.1),
        ThresholdClassifier(2.5, "le"),
        ThresholdClassifier(-math.inf, "ge", dim=3, feature=1),
    ],
)
def test_model_round_trip(h):
    assert loads_model(dumps_model(h)) == h


def test_model_parse_errors():
    with pytest.raises(FormatError):
        loads_model("kind=mystery")
    with pytest.raises(FormatError):
        loads_model("weights=1.0,x; bias=0")
    with pytest.raises(TypeError):
        dumps_model(LookupClassifier.from_points(np.array([[0.0]]), [1]))


def test_lookup_default():
    h = LookupClassifier.from_points(np.array([[0.0, 1.0], [2.0, 3.0]]), [1, 0], default=1)
    assert h.predict(np.array([[0.0, 1.0], [2.0, 3.0], [9.0, 9.0]])).tolist() == [1, 0, 1]


def test_linear_boundary_is_positive():
    h = LinearClassifier((1.0,), -2.0)
    assert h.predict(np.array([[1.9], [2.0], [2.1]])).tolist() == [0, 1, 1]
    assert constant_classifier(2, 0).predict(np.zeros((3, 2))).tolist() == [0, 0, 0]
    with pytest.raises(DimensionError):
        h.predict(np.zeros((2, 2)))


def test_dataset_csv_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    d = LabeledDataset(rng.normal(size=(20, 3)), rng.integers(0, 2, 20), rng.integers(0, 2, 20))
    path = tmp_path / "d.csv"
    save_dataset_csv(d, path)
    assert load_dataset_csv(path) == d


def test_dataset_validation():
    with pytest.raises(ValueError):
        LabeledDataset(np.zeros((2, 1)), [0, 2], [0, 1])
    with pytest.raises(DimensionError):
        LabeledDataset(np.zeros((2, 1)), [0], [0, 1])


def test_experiment_config(tmp_path):
    path = tmp_path / "e.json"
    path.write_text(json.dumps({"seeds": [3], "learners": ["erm"], "data": {"n_samples": 100}}))
    cfg = ExperimentConfig.from_json(path)
    assert cfg.seeds == (3,) and cfg.learners == ("erm",) and cfg.data.n_samples == 100
    with pytest.raises(ValueError):
        ExperimentConfig(attacks=("bogus",))
    with pytest.raises(ValueError):
        ExperimentConfig(seeds=())


def test_worker_count(monkeypatch):
    monkeypatch.setenv("FAIRBREAK_THREADS", "3")
    assert worker_count(10) == 3
    assert worker_count(2) == 2
    monkeypatch.setenv("FAIRBREAK_THREADS", "1")
    assert worker_count(10) == 1


def test_summary_uses_population_std():
    cfg = ExperimentConfig(seeds=(0, 1), attacks=("none",), learners=("erm",))
    results = [CellResult(0, "none", "erm", 0.8, 0.1, 0.0), CellResult(1, "none", "erm", 0.9, 0.3, 0.0)]
    (row,) = summarize(results, cfg)
    assert row.acc_mean == pytest.approx(0.85) and row.acc_std == pytest.approx(0.05)
    assert row.gap_std == pytest.approx(0.1)
    assert table_csv([row]).splitlines()[1].startswith("none,erm,2,0.850000")
    assert "0.850 ± 0.050" in table_text([row], cfg)
