import math

import numpy as np
import pytest

from conceptminer.errors import DegenerateTaskError
from conceptminer.model import (
    ModelConfig,
    evaluate,
    evaluate_bottleneck,
    forward,
    gradients,
    init_model,
    intervene,
    joint_loss,
    load_checkpoint,
    make_synthetic,
    rank_auc,
    save_checkpoint,
    train,
    train_concept_classifier,
)
from tests.conftest import GOLDEN_MATRIX

SMALL = ModelConfig(n_features=5, hidden=4, n_concepts=3, attn_dim=3, n_labels=3, beta=0.7, seed=11)


def small_batch(rng, n=6, config=SMALL):
    X = rng.normal(size=(n, config.n_features))
    y = rng.integers(0, config.n_labels, size=n)
    C = rng.integers(0, 2, size=(n, config.n_concepts)).astype(float)
    return X, y, C


def relative_gradient_error(model, X, y, C, step=1e-4):
    grads, *_ = gradients(model, X, y, C)
    worst = 0.0
    for name, grad in grads.items():
        param = model.params[name]
        it = np.nditer(param, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            original = param[idx]
            param[idx] = original + step
            up, *_ = joint_loss(model, X, y, C)
            param[idx] = original - step
            down, *_ = joint_loss(model, X, y, C)
            param[idx] = original
            numeric = (up - down) / (2 * step)
            denom = max(1e-6, abs(numeric), abs(grad[idx]))
            worst = max(worst, abs(numeric - grad[idx]) / denom)
            it.iternext()
    return worst


# --- forward ------------------------------------------------------------------


def test_attention_singleton_is_one(rng):
    config = ModelConfig(n_features=4, hidden=3, n_concepts=1, attn_dim=2, n_labels=2, seed=0)
    model = init_model(config)
    _, alpha, _, _ = forward(model, rng.normal(size=4))
    assert alpha.tolist() == [1.0]


def test_forward_simplex_and_prob_sums(rng):
    model = init_model(SMALL)
    _, alpha, probs, _ = forward(model, rng.normal(size=(50, 5)))
    assert np.all(alpha >= 0)
    assert np.abs(alpha.sum(axis=1) - 1.0).max() < 1e-9
    assert np.abs(probs.sum(axis=1) - 1.0).max() < 1e-9


def test_forward_zero_weights_uniform():
    model = init_model(SMALL)
    for name in model.params:
        model.params[name] = np.zeros_like(model.params[name])
    chat, alpha, probs, _ = forward(model, np.zeros(5))
    assert np.allclose(chat, 0.5)
    assert np.allclose(probs, 1.0 / 3.0)
    assert np.allclose(alpha, 1.0 / 3.0)


def test_forward_shape_error():
    model = init_model(SMALL)
    with pytest.raises(ValueError, match="features"):
        forward(model, np.zeros(7))


# --- loss -----------------------------------------------------------------------


def test_loss_uniform_prediction_is_log_m():
    config = ModelConfig(n_features=5, hidden=4, n_concepts=3, attn_dim=3, n_labels=4, seed=0)
    model = init_model(config)
    for name in model.params:
        model.params[name] = np.zeros_like(model.params[name])
    X = np.zeros((8, 5))
    y = np.zeros(8, dtype=int)
    C = np.zeros((8, 3))
    _, l_y, l_c = joint_loss(model, X, y, C, beta=1.0)
    assert l_y == pytest.approx(math.log(4), abs=1e-12)
    assert l_c == pytest.approx(3 * math.log(2), abs=1e-12)


def test_loss_decomposition_and_beta_monotonicity(rng):
    model = init_model(SMALL)
    X, y, C = small_batch(rng)
    total1, l_y, l_c = joint_loss(model, X, y, C, beta=0.5)
    assert total1 == pytest.approx(l_y + 0.5 * l_c, abs=1e-12)
    total2, _, _ = joint_loss(model, X, y, C, beta=1.5)
    assert total2 - total1 == pytest.approx(1.0 * l_c, abs=1e-9)


def test_loss_perfect_prediction_goes_to_zero():
    config = ModelConfig(n_features=2, hidden=2, n_concepts=1, attn_dim=2, n_labels=2, seed=0)
    model = init_model(config)
    for name in model.params:
        model.params[name] = np.zeros_like(model.params[name])
    model.params["bc"] = np.array([30.0, -30.0])
    X, y, C = np.zeros((4, 2)), np.zeros(4, dtype=int), np.full((4, 1), 0.5)
    _, l_y, _ = joint_loss(model, X, y, C, beta=1.0)
    assert l_y < 1e-9


# --- gradients --------------------------------------------------------------------


def test_gradients_match_finite_differences(rng):
    model = init_model(SMALL)
    X, y, C = small_batch(rng)
    assert relative_gradient_error(model, X, y, C) < 1e-4


# --- training -----------------------------------------------------------------------


def test_zero_epochs_leaves_parameters_at_init(rng):
    X, y, C = small_batch(rng, n=8)
    result = train(SMALL, X, y, C, epochs=0)
    fresh = init_model(SMALL)
    for name in fresh.params:
        assert np.array_equal(result.model.params[name], fresh.params[name])


def test_same_seed_identical_trajectory(rng):
    X, y, C = small_batch(rng, n=16)
    first = train(SMALL, X, y, C, epochs=5, batch_size=4)
    second = train(SMALL, X, y, C, epochs=5, batch_size=4)
    assert first.losses == second.losses
    for name in first.model.params:
        assert np.array_equal(first.model.params[name], second.model.params[name])


def test_nan_loss_aborts_with_diagnostic(rng):
    X, y, C = small_batch(rng, n=8)
    X = X.copy()
    X[0, 0] = np.nan
    with pytest.raises(FloatingPointError, match="non-finite"):
        train(SMALL, X, y, C, epochs=1, batch_size=8)


# --- concept-only classifiers ----------------------------------------------------------


def test_a1_matrix_classifiers_fit_training_set():
    C = np.array(GOLDEN_MATRIX, dtype=float)
    y = np.array([0, 1, 2, 3])
    for kind in ("linear", "mlp"):
        clf = train_concept_classifier(kind, C, y, epochs=600, lr=0.1, seed=0)
        assert (clf.predict(C) == y).all(), kind


def test_all_zero_matrix_predicts_majority():
    C = np.zeros((8, 3))
    y = np.array([0, 0, 0, 0, 0, 1, 1, 2])
    clf = train_concept_classifier("linear", C, y, epochs=400, lr=0.1, seed=0)
    accuracy = (clf.predict(C) == y).mean()
    assert accuracy == pytest.approx(5 / 8)


def test_xor_separability_gap():
    patterns = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
    C = np.tile(patterns, (25, 1))
    y = np.logical_xor(C[:, 0], C[:, 1]).astype(int)
    mlp = train_concept_classifier("mlp", C, y, hidden=8, epochs=800, lr=0.05, seed=1)
    linear = train_concept_classifier("linear", C, y, epochs=800, lr=0.05, seed=1)
    assert (mlp.predict(C) == y).mean() == 1.0
    assert (linear.predict(C) == y).mean() <= 0.75 + 1e-12


def test_single_class_labels_degenerate():
    with pytest.raises(DegenerateTaskError):
        train_concept_classifier("linear", np.zeros((4, 2)), np.zeros(4, dtype=int))


# --- intervention ------------------------------------------------------------------------


def test_intervene_empty_override_matches_forward(rng):
    model = init_model(SMALL)
    x = rng.normal(size=5)
    _, _, probs, _ = forward(model, x)
    assert np.array_equal(intervene(model, x, {}), probs)


def test_intervene_forced_zero_single_concept(rng):
    config = ModelConfig(n_features=4, hidden=3, n_concepts=1, attn_dim=2, n_labels=3, seed=2)
    model = init_model(config)
    x = rng.normal(size=4)
    probs = intervene(model, x, {0: 0.0})
    expected = np.exp(model.params["bc"]) / np.exp(model.params["bc"]).sum()
    # tanh(ba)=0 at zero bias either way; context collapses to zero
    assert np.allclose(probs, expected, atol=1e-12)


def test_intervene_domain_checks(rng):
    model = init_model(SMALL)
    x = rng.normal(size=5)
    with pytest.raises(ValueError):
        intervene(model, x, {0: 1.5})
    with pytest.raises(ValueError):
        intervene(model, x, {7: 0.5})


# --- evaluation ---------------------------------------------------------------------------


def test_evaluate_perfect_predictions():
    metrics = evaluate([0, 1, 2], [0, 1, 2])
    assert metrics.accuracy == 1.0 and metrics.f1 == 1.0


def test_auc_fixture():
    assert rank_auc([0.9, 0.8, 0.4, 0.3], [1, 0, 1, 0]) == pytest.approx(0.75)


def test_auc_perfect_ranking():
    assert rank_auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0


def test_constant_concept_columns_excluded():
    scores = np.array([[0.9, 0.4], [0.2, 0.6]])
    targets = np.array([[1, 1], [0, 1]])
    metrics = evaluate([0, 1], [0, 1], scores, targets)
    assert metrics.excluded_concepts == (1,)
    assert metrics.concept_auc == 1.0


def test_evaluation_permutation_invariant(rng):
    y = rng.integers(0, 3, size=40)
    pred = rng.integers(0, 3, size=40)
    scores = rng.random((40, 4))
    targets = rng.integers(0, 2, size=(40, 4))
    base = evaluate(y, pred, scores, targets)
    perm = rng.permutation(40)
    shuffled = evaluate(y[perm], pred[perm], scores[perm], targets[perm])
    assert shuffled == base


# --- checkpoints -----------------------------------------------------------------------------


def test_checkpoint_roundtrip(tmp_path, rng):
    model = init_model(SMALL)
    path = tmp_path / "model.json"
    save_checkpoint(model, path)
    loaded = load_checkpoint(path)
    assert loaded.config == model.config
    x = rng.normal(size=(3, 5))
    _, _, p1, _ = forward(model, x)
    _, _, p2, _ = forward(loaded, x)
    assert np.array_equal(p1, p2)


# --- synthetic end-to-end (small; the full-size run lives in acceptance) ---------------------


def test_synthetic_quick_learnability():
    X, y, C = make_synthetic(600, 32, 6, 4, seed=3)
    config = ModelConfig(n_features=32, hidden=32, n_concepts=6, attn_dim=16, n_labels=4, seed=3)
    result = train(config, X[:480], y[:480], C[:480], epochs=50, lr=1e-3)
    metrics = evaluate_bottleneck(result.model, X[480:], y[480:], C[480:])
    assert metrics.accuracy >= 0.9
    assert metrics.concept_auc >= 0.9
