import math

import pytest
from hypothesis import given, settings, strategies as st

from smallworld import experiments
from smallworld.experiments import (
    BOUNDARY,
    CSV_HEADER,
    SweepConfig,
    cell_parameters,
    format_csv,
    parse_config,
    region_of,
    run_sweep,
)
from smallworld.graph import InvalidParameters

LABELS = {"impossible", "hard", "easy", "reconstructable", "reconstructable_prime", "boundary"}


@pytest.mark.parametrize(
    "x,y,label",
    [
        (0.9, 0.8, "impossible"),
        (0.6, 0.05, "reconstructable"),
        (0.95, 0.29, "reconstructable_prime"),
        (0.3, 0.8, "impossible"),
        (0.6, 0.4, "hard"),
        (0.6, 0.27, "easy"),
        (0.3, 0.1, "reconstructable"),
        (0.3, 0.2, "hard"),
        (0.5, 0.5, "boundary"),
        (0.4, 0.2, "boundary"),
        (0.8, 0.25, "boundary"),
    ],
)
def test_region_examples(x, y, label):
    assert region_of(x, y) == label


def test_region_invalid():
    for x, y in [(0, 0.5), (0.5, 1), (1.2, 0.3)]:
        with pytest.raises(InvalidParameters):
            region_of(x, y)


@settings(max_examples=300, deadline=None)
@given(st.floats(1e-6, 1 - 1e-6), st.floats(1e-6, 1 - 1e-6))
def test_region_partition(x, y):
    label = region_of(x, y)
    assert label in LABELS
    detect = min(0.5, x)
    if label == "impossible":
        assert y > detect
    elif label == "hard":
        assert x / 2 < y <= detect
    elif label == "reconstructable":
        assert y < detect / 2
    elif label == "reconstructable_prime":
        assert x > 7 / 8 and y < 4 * x - 3.5 and detect / 2 <= y <= x / 2
    elif label == "easy":
        assert detect / 2 <= y <= x / 2


def test_cell_parameters():
    assert cell_parameters(2000, 0.3, 0.8) == (10, pytest.approx(1 - 2000**-0.8))
    k, beta = cell_parameters(100, 0.01, 0.5)
    assert k == 2
    k, _ = cell_parameters(10, 0.999, 0.5)
    assert k == 8 and k < 10 - 1
    for n in (50, 101, 2000):
        for x in (0.1, 0.5, 0.9):
            k, beta = cell_parameters(n, x, 0.3)
            assert k % 2 == 0 and 2 <= k < n - 1 and 0 <= beta <= 1


def test_config_validation():
    base = dict(n=50, x_grid=[0.5], y_grid=[0.5], trials=1, methods=["correlation"])
    SweepConfig(**base)
    for change in [
        {"trials": 0},
        {"x_grid": []},
        {"y_grid": [1.0]},
        {"methods": ["bogus"]},
        {"methods": ["ml_test"]},
        {"alpha": 0.0},
    ]:
        with pytest.raises(InvalidParameters):
            SweepConfig(**{**base, **change})
    SweepConfig(**{**base, "n": 8, "methods": ["ml_test"]})


def test_parse_config():
    cfg = parse_config(
        "# sweep\n"
        "n = 60\n"
        "x_grid = 0.3, 0.6\n"
        "y_grid = 0.1\n"
        "trials = 4  # per cell\n"
        "methods = spectral_test, correlation\n"
        "alpha = 0.1\n"
        "base_seed = 12\n"
    )
    assert cfg.n == 60 and cfg.x_grid == [0.3, 0.6] and cfg.y_grid == [0.1]
    assert cfg.methods == ["spectral_test", "correlation"] and cfg.base_seed == 12
    assert cfg.n_calibration == 4
    with pytest.raises(InvalidParameters):
        parse_config("n = 60\nwhat = 1\n")
    with pytest.raises(InvalidParameters):
        parse_config("n = 60\n")


def test_noiseless_cell_has_zero_error():
    # y tiny makes beta ~ 1e-12, so the sample is the hidden lattice
    cfg = SweepConfig(n=60, x_grid=[0.5], y_grid=[1e-12], trials=1, methods=["correlation"])
    (cell,) = run_sweep(cfg)
    assert cell.metrics["correlation"] == {"mean_error": 0.0, "max_error": 0.0}


def test_csv_layout_and_determinism(tmp_path):
    cfg = SweepConfig(
        n=40, x_grid=[0.4, 0.7], y_grid=[0.2, 0.6], trials=3,
        methods=["spectral_test", "correlation", "spectral_ordering"], calibration_trials=10,
    )
    run_sweep(cfg, out=tmp_path / "a.csv")
    run_sweep(cfg, workers=2, out=tmp_path / "b.csv")
    a = (tmp_path / "a.csv").read_bytes()
    assert a == (tmp_path / "b.csv").read_bytes()
    lines = a.decode().splitlines()
    assert lines[0] == CSV_HEADER
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) == 4 * (3 + 2 + 2)
    assert [(r[0], r[1]) for r in rows[::7]] == [("0.4", "0.2"), ("0.4", "0.6"), ("0.7", "0.2"), ("0.7", "0.6")]
    for r in rows:
        value = float(r[7])
        if r[6] in ("power", "type1"):
            assert 0 <= value <= 1
        if r[6].endswith("_error"):
            assert 0 <= value <= 2


def test_ml_cells():
    cfg = SweepConfig(n=7, x_grid=[0.4], y_grid=[0.5], trials=3, methods=["ml_test"])
    (cell,) = run_sweep(cfg)
    assert set(cell.metrics["ml_test"]) == {"threshold", "power", "type1"}


def test_failures_recorded_in_row(monkeypatch):
    def boom(*args, **kwargs):
        raise RuntimeError("no luck")

    monkeypatch.setattr(experiments, "spectral_order", boom)
    cfg = SweepConfig(n=30, x_grid=[0.5], y_grid=[0.3], trials=2, methods=["spectral_ordering", "correlation"])
    cells = run_sweep(cfg)
    assert cells[0].metrics["spectral_ordering"]["failed"] == 2.0
    assert math.isnan(cells[0].metrics["spectral_ordering"]["max_error"])
    assert "spectral_ordering,failed,2.0" in format_csv(cells)
    assert cells[0].metrics["correlation"]["max_error"] >= 0


def test_fixed_constant_skips_calibration():
    cfg = SweepConfig(n=40, x_grid=[0.5], y_grid=[0.5], trials=2, methods=["spectral_test"], spectral_const=2.5)
    (cell,) = run_sweep(cfg)
    assert cell.metrics["spectral_test"]["const"] == 2.5
