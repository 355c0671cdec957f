import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agrf.field import Hyperparameters, ObservationError, ObservationSet
from agrf.inference import MULTI_DELTA, NOISELESS, condition, predict_arrays
from agrf.io import (
    ConfigError,
    ModelFileError,
    ParseError,
    RunConfig,
    config_from_dict,
    fmt,
    jitter_schedule,
    load_config,
    load_model,
    model_to_dict,
    parse_grid,
    parse_orders,
    read_observations,
    read_predictions,
    read_truth,
    save_model,
    write_observations,
    write_truth,
)
from agrf.kernel import PolynomialMean

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


class TestObservationFile:
    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 4), finite, finite), min_size=1, max_size=20))
    def test_round_trip_is_exact(self, tmp_path_factory, rows):
        path = tmp_path_factory.mktemp("obs") / "obs.csv"
        obs = ObservationSet(*zip(*rows))
        write_observations(path, obs)
        back = read_observations(path)
        for i in range(obs.max_order + 1):
            assert np.array_equal(back.locations[i], obs.locations[i])
            assert np.array_equal(back.values[i], obs.values[i])
        write_observations(path.with_suffix(".2"), back)
        assert path.read_text() == path.with_suffix(".2").read_text()

    def test_seventeen_digits(self):
        assert float(fmt(0.1)) == 0.1
        assert fmt(1 / 3) == "0.33333333333333331"

    def test_header_and_blank_lines(self, tmp_path):
        p = tmp_path / "o.csv"
        p.write_text("order,x,value\n0,0.5,1.0\n\n2, 0.25 ,-3\n")
        obs = read_observations(p)
        assert obs.counts == (1, 0, 1)
        assert obs.values[2].tolist() == [-3.0]

    @pytest.mark.parametrize("text", [
        "x,order,value\n0,0,0\n",
        "order,x,value\n0,0\n",
        "order,x,value\n0,abc,1\n",
    ])
    def test_malformed_is_parse_error(self, tmp_path, text):
        p = tmp_path / "o.csv"
        p.write_text(text)
        with pytest.raises(ParseError):
            read_observations(p)

    @pytest.mark.parametrize("text", ["", "order,x,value\n", "order,x,value\n1.5,0,0\n",
                                      "order,x,value\n-1,0,0\n"])
    def test_invalid_is_observation_error(self, tmp_path, text):
        p = tmp_path / "o.csv"
        p.write_text(text)
        with pytest.raises(ObservationError):
            read_observations(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            read_observations(tmp_path / "nope.csv")

    def test_truth_round_trip(self, tmp_path):
        grid = np.linspace(0, 1, 5)
        truth = {0: np.sin(grid), 2: -np.sin(grid)}
        write_truth(tmp_path / "t.csv", grid, truth)
        back = read_truth(tmp_path / "t.csv")
        assert sorted(back) == [0, 2]
        assert np.array_equal(back[2][1], truth[2])


class TestConfig:
    def test_defaults(self):
        cfg = config_from_dict({})
        assert cfg == RunConfig()
        fc = cfg.fit_config()
        assert (fc.mode, fc.restarts, fc.max_evals, fc.xatol) == (NOISELESS, 8, 2000, 1e-8)

    def test_full_document(self, tmp_path):
        doc = {"mode": "noisy-multi-delta", "mean": [1.0, 0.5],
               "optimizer": {"restarts": 3, "max_evals": 500, "xatol": 1e-6, "seed": 9},
               "jitter": {"start": 1e-10, "stop": 1e-8, "factor": 10},
               "max_order": 6, "grid": "0:2:11", "orders": [0, 2]}
        p = tmp_path / "c.json"
        p.write_text(json.dumps(doc))
        cfg = load_config(p)
        assert cfg.mode == MULTI_DELTA
        assert cfg.mean_function == PolynomialMean((1.0, 0.5))
        assert cfg.jitter_steps == pytest.approx((1e-10, 1e-9, 1e-8))
        assert cfg.fit_config(seed=4).seed == 4
        assert cfg.fit_config().seed == 9
        assert config_from_dict(cfg.to_dict()) == cfg

    @pytest.mark.parametrize("doc", [
        {"bogus": 1},
        {"optimizer": {"restart": 3}},
        {"jitter": {"begin": 1e-12}},
        {"mode": "noisy"},
        {"optimizer": {"restarts": 0}},
        {"optimizer": {"restarts": 2.5}},
        {"optimizer": {"seed": True}},
        {"mean": "zero"},
        {"orders": []},
        {"jitter": {"start": 1e-6, "stop": 1e-8}},
    ])
    def test_rejected(self, doc):
        with pytest.raises(ConfigError):
            config_from_dict(doc)

    def test_invalid_json_is_parse_error(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text("{mode: 1")
        with pytest.raises(ParseError):
            load_config(p)

    def test_jitter_schedule(self):
        assert jitter_schedule(1e-12, 1e-6, 10) == pytest.approx(
            (1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6))


class TestGridAndOrders:
    def test_grid(self):
        assert parse_grid("0:1:3").tolist() == [0.0, 0.5, 1.0]

    @pytest.mark.parametrize("spec,err", [("0:1", ParseError), ("a:1:3", ParseError),
                                          ("0:1:0", ConfigError), ("0:inf:3", ConfigError)])
    def test_bad_grid(self, spec, err):
        with pytest.raises(err):
            parse_grid(spec)

    def test_orders(self):
        assert parse_orders("0,1,2") == [0, 1, 2]
        with pytest.raises(ParseError):
            parse_orders("0,x")
        with pytest.raises(ConfigError):
            parse_orders("-1")


class TestModelFile:
    @pytest.fixture
    def model(self):
        obs = ObservationSet([0, 0, 1, 2, 2], [0.0, 0.6, 0.3, 0.2, 0.9],
                             [0.1, -0.4, 2.0, 5.0, -1.0])
        hp = Hyperparameters(0.8123456789012345, 0.1987654321, (0.01, 0.2, 0.3))
        return condition(obs, hp, PolynomialMean((0.5,)), MULTI_DELTA,
                         report={"best_restart": 2})

    def test_round_trip(self, tmp_path, model):
        save_model(tmp_path / "m.json", model)
        back = load_model(tmp_path / "m.json")
        assert back.hyper == model.hyper
        assert back.mode == model.mode
        assert back.mean == model.mean
        assert back.report == {"best_restart": 2}
        assert back.obs == model.obs
        grid = np.linspace(-0.5, 1.5, 41)
        for q in range(4):
            m1, v1, _ = predict_arrays(model, grid, q)
            m2, v2, _ = predict_arrays(back, grid, q)
            np.testing.assert_allclose(m2, m1, rtol=1e-12, atol=1e-12)
            np.testing.assert_allclose(v2, v1, rtol=1e-12, atol=1e-12)

    def test_document_fields(self, model):
        doc = model_to_dict(model)
        assert doc["format"] == "agrf-model" and doc["version"] == 1
        assert len(doc["spot_checks"]) == 5 * 3
        json.dumps(doc)

    def test_tampered_data_detected(self, tmp_path, model):
        doc = model_to_dict(model)
        doc["data"]["value"][0] += 1.0
        (tmp_path / "m.json").write_text(json.dumps(doc))
        with pytest.raises(ModelFileError, match="checksum"):
            load_model(tmp_path / "m.json")

    def test_tampered_spot_check_detected(self, tmp_path, model):
        doc = model_to_dict(model)
        doc["spot_checks"][3]["mean"] += 1e-6
        (tmp_path / "m.json").write_text(json.dumps(doc))
        with pytest.raises(ModelFileError, match="spot check"):
            load_model(tmp_path / "m.json")
        load_model(tmp_path / "m.json", verify=False)

    @pytest.mark.parametrize("edit", [
        lambda d: d.update(format="other"),
        lambda d: d.update(version=99),
        lambda d: d.pop("hyperparameters"),
    ])
    def test_malformed(self, tmp_path, model, edit):
        doc = model_to_dict(model)
        edit(doc)
        (tmp_path / "m.json").write_text(json.dumps(doc))
        with pytest.raises(ModelFileError):
            load_model(tmp_path / "m.json")


def test_prediction_file_reader(tmp_path):
    p = tmp_path / "p.csv"
    p.write_text("order,x,mean,variance,lo95,hi95\n0,0,1,0,1,1\n1,0,2,0,2,2\n")
    pred = read_predictions(p)
    assert pred[1][1].tolist() == [2.0]
