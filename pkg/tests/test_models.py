import json

import numpy as np
import pytest

from swarmlab.errors import InvalidArgumentError, ModelError, ModelFormatError
from swarmlab.models import (
    ClassifierModel,
    Layer,
    load_model,
    model_to_dict,
    planted_model,
    save_model,
    softmax,
)


def _single_layer(bias=None) -> ClassifierModel:
    bias = np.zeros(10) if bias is None else np.asarray(bias, dtype=float)
    return ClassifierModel((Layer(np.zeros((10, 784)), bias, "softmax"),))


def _two_layer(rng) -> ClassifierModel:
    return ClassifierModel(
        (
            Layer(rng.normal(0, 0.05, (16, 784)), rng.normal(0, 0.1, 16), "relu"),
            Layer(rng.normal(0, 0.5, (10, 16)), rng.normal(0, 0.1, 10), "softmax"),
        )
    )


def _write(path, document) -> None:
    path.write_text(json.dumps(document), encoding="utf-8")


def test_zero_weights_give_uniform_confidences():
    probs = _single_layer().forward(np.ones((2, 784)))
    assert np.allclose(probs, 0.1)


def test_dominant_bias_wins():
    bias = np.zeros(10)
    bias[0] = 10.0
    probs = _single_layer(bias).forward(np.zeros((1, 784)))[0]
    assert probs[0] > 0.999
    assert probs.sum() == pytest.approx(1.0)


def test_softmax_is_stable_for_large_logits():
    probs = softmax(np.array([[1000.0, 1000.0, -1000.0]]))
    assert np.allclose(probs, [[0.5, 0.5, 0.0]])


def test_layer_is_read_only():
    layer = Layer(np.zeros((10, 784)), np.zeros(10), "softmax")
    with pytest.raises(ValueError):
        layer.weights[0, 0] = 1.0


def test_model_dimension_checks():
    with pytest.raises(ModelError):
        ClassifierModel((Layer(np.zeros((10, 783)), np.zeros(10), "softmax"),))
    with pytest.raises(ModelError):
        ClassifierModel((Layer(np.zeros((10, 784)), np.zeros(10), "relu"),))
    with pytest.raises(ModelError):
        ClassifierModel(
            (
                Layer(np.zeros((16, 784)), np.zeros(16), "relu"),
                Layer(np.zeros((10, 15)), np.zeros(10), "softmax"),
            )
        )
    with pytest.raises(ModelError):
        Layer(np.zeros((10, 784)), np.zeros(9), "softmax")
    with pytest.raises(ModelError):
        Layer(np.zeros((10, 784)), np.zeros(10), "tanh")
    with pytest.raises(ModelError):
        _single_layer().forward(np.zeros((1, 783)))


def test_save_and_load_keep_weights(tmp_path, rng):
    model = _two_layer(rng)
    path = save_model(model, tmp_path / "mlp.json")
    loaded = load_model(path)
    assert len(loaded.layers) == 2
    for a, b in zip(model.layers, loaded.layers):
        assert np.array_equal(a.weights, b.weights)
        assert np.array_equal(a.bias, b.bias)
        assert a.activation == b.activation
    x = rng.integers(0, 2, (4, 784))
    assert np.array_equal(model.forward(x), loaded.forward(x))


def test_file_layout_is_row_major(tmp_path):
    weights = np.zeros((10, 784))
    weights[1, 2] = 5.0
    document = model_to_dict(ClassifierModel((Layer(weights, np.zeros(10), "softmax"),)))
    layer = document["layers"][0]
    assert document["version"] == 1
    assert (layer["rows"], layer["cols"]) == (10, 784)
    assert layer["weights"][1 * 784 + 2] == 5.0


def test_syntax_error_reports_byte_offset(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"version": 1,,}', encoding="utf-8")
    with pytest.raises(ModelFormatError) as exc_info:
        load_model(path)
    assert exc_info.value.offset == 14
    assert exc_info.value.exit_code == 3


def test_syntax_error_offset_counts_utf8_bytes(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"é": 1,,}', encoding="utf-8")
    with pytest.raises(ModelFormatError) as exc_info:
        load_model(path)
    assert exc_info.value.offset == 9


def test_non_utf8_reports_offset(tmp_path):
    path = tmp_path / "latin.json"
    path.write_bytes(b'{"a": "\xff"}')
    with pytest.raises(ModelFormatError) as exc_info:
        load_model(path)
    assert exc_info.value.offset == 7


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.update(version=2),
        lambda d: d.update(layers=[]),
        lambda d: d["layers"][0].update(weights=[0.0] * 10),
        lambda d: d["layers"][0].update(bias=[0.0]),
        lambda d: d["layers"][0].update(activation="relu"),
        lambda d: d["layers"][0].update(cols=783, weights=[0.0] * 7830),
        lambda d: d["layers"][0].pop("rows"),
        lambda d: d["layers"][0].update(weights=["x"] * 7840),
    ],
)
def test_malformed_documents(tmp_path, mutate):
    document = model_to_dict(_single_layer())
    mutate(document)
    path = tmp_path / "bad.json"
    _write(path, document)
    with pytest.raises(ModelFormatError):
        load_model(path)


def test_missing_weights_file(tmp_path):
    with pytest.raises(ModelFormatError):
        load_model(tmp_path / "missing.json")


def test_planted_model_scores_pattern_agreement(planted_pattern, make_planted):
    model = make_planted(3)
    layer = model.layers[0]
    assert layer.pre_activation(planted_pattern[np.newaxis, :].astype(float))[0, 3] == pytest.approx(78.4)
    assert layer.pre_activation((1 - planted_pattern)[np.newaxis, :].astype(float))[0, 3] == pytest.approx(0.0)

    flipped = planted_pattern.copy()
    flipped[:10] ^= 1
    assert layer.pre_activation(flipped[np.newaxis, :].astype(float))[0, 3] == pytest.approx(77.4)

    probs = model.forward(planted_pattern[np.newaxis, :])[0]
    assert probs[3] > 0.999


def test_planted_model_rival_logit(planted_pattern, make_planted):
    model = make_planted(0, rival_logit=5.0)
    assert model.layers[0].bias[1:].tolist() == [5.0] * 9


def test_planted_model_validation(planted_pattern):
    with pytest.raises(InvalidArgumentError):
        planted_model(planted_pattern[:100], 0)
    with pytest.raises(InvalidArgumentError):
        planted_model(planted_pattern, 10)
    with pytest.raises(InvalidArgumentError):
        planted_model(planted_pattern, 0, weight=0.0)
