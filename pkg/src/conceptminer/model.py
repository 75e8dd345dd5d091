"""Concept-bottleneck network and concept-only classifiers, in plain numpy.

The bottleneck maps features to concept probabilities through one hidden
layer, scales learned per-concept embeddings by those probabilities, scores
each scaled embedding with additive attention, and classifies the
attention-weighted context:

    h   = relu(W1 x + b1)
    s_k = (W2 h + b2)_k          chat_k = sigmoid(s_k)
    v_k = chat_k * u_k
    e_k = w_att . tanh(Wa v_k + ba)      alpha = softmax(e)
    g   = sum_k alpha_k v_k
    p   = softmax(Wc g + bc)

Training minimizes the joint loss (1/N) sum_n (L_Y + beta * L_C) where L_Y is
categorical cross-entropy and L_C sums binary cross-entropy over concepts.
Gradients are analytic (verified against central finite differences in the
test suite) and optimization is minibatch Adam with the standard moment
constants. Everything is float64 and single-threaded, so a fixed seed gives
bit-identical parameters across runs on one platform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateTaskError

EPS = 1e-12
_ADAM_B1, _ADAM_B2, _ADAM_EPS = 0.9, 0.999, 1e-8


@dataclass(frozen=True)
class ModelConfig:
    n_features: int = 64
    hidden: int = 32
    n_concepts: int = 8
    attn_dim: int = 16
    n_labels: int = 4
    beta: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.beta <= 0:
            raise ConfigError(f"beta must be > 0, got {self.beta}")
        for name in ("n_features", "hidden", "n_concepts", "attn_dim", "n_labels"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")


@dataclass
class BottleneckModel:
    config: ModelConfig
    params: dict[str, np.ndarray]


def init_model(config: ModelConfig) -> BottleneckModel:
    rng = np.random.default_rng(config.seed)
    df, h, k, a, m = (
        config.n_features, config.hidden, config.n_concepts, config.attn_dim, config.n_labels,
    )

    def dense(rows, cols):
        return rng.normal(0.0, 1.0 / np.sqrt(cols), size=(rows, cols))

    params = {
        "W1": dense(h, df), "b1": np.zeros(h),
        "W2": dense(k, h), "b2": np.zeros(k),
        "U": dense(k, a), "Wa": dense(a, a), "ba": np.zeros(a),
        # near-zero scorer keeps attention ~uniform at the start; premature
        # concentration on one concept starves the class head of gradient
        "wa": 0.01 * dense(1, a)[0],
        "Wc": dense(m, a), "bc": np.zeros(m),
    }
    return BottleneckModel(config, params)


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def forward(model: BottleneckModel, x: np.ndarray, overrides: dict[int, float] | None = None):
    """Concept probabilities, attention weights and class probabilities.

    ``x`` may be one sample (1-d) or a batch (2-d). ``overrides`` replaces
    chosen concept activations before attention (test-time intervention).
    """
    p = model.params
    squeeze = x.ndim == 1
    X = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if X.shape[1] != model.config.n_features:
        raise ValueError(
            f"expected {model.config.n_features} features, got {X.shape[1]}"
        )
    A1 = X @ p["W1"].T + p["b1"]
    H1 = np.maximum(A1, 0.0)
    S = H1 @ p["W2"].T + p["b2"]
    Chat = _sigmoid(S)
    if overrides:
        k = model.config.n_concepts
        for idx, val in overrides.items():
            if not 0 <= idx < k:
                raise ValueError(f"override index {idx} outside 0..{k - 1}")
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"override value {val} outside [0, 1]")
            Chat = Chat.copy()
            Chat[:, idx] = val
    Hk = Chat[:, :, None] * p["U"][None, :, :]
    T = np.tanh(Hk @ p["Wa"].T + p["ba"])
    E = T @ p["wa"]
    alpha = _softmax(E)
    G = (alpha[:, :, None] * Hk).sum(axis=1)
    Z = G @ p["Wc"].T + p["bc"]
    P = _softmax(Z)
    cache = {"X": X, "A1": A1, "H1": H1, "Chat": Chat, "Hk": Hk, "T": T, "alpha": alpha, "G": G, "P": P}
    if squeeze:
        return Chat[0], alpha[0], P[0], cache
    return Chat, alpha, P, cache


def joint_loss(model: BottleneckModel, X, y, concepts, beta: float | None = None):
    """Mean joint loss and its two components ``(L, L_Y, L_C)``."""
    beta = model.config.beta if beta is None else beta
    Chat, _, P, _ = forward(model, np.atleast_2d(X))
    return _loss_from_outputs(P, Chat, np.asarray(y), np.atleast_2d(concepts), beta)


def _loss_from_outputs(P, Chat, y, Ctrue, beta):
    n = P.shape[0]
    p_true = np.clip(P[np.arange(n), y], EPS, 1.0)
    l_y = float(-np.log(p_true).mean())
    c = np.clip(Chat, EPS, 1.0 - EPS)
    bce = -(Ctrue * np.log(c) + (1.0 - Ctrue) * np.log(1.0 - c))
    l_c = float(bce.sum(axis=1).mean())
    return l_y + beta * l_c, l_y, l_c


def gradients(model: BottleneckModel, X, y, Ctrue, beta: float | None = None):
    """Analytic gradients of the mean joint loss for every parameter."""
    beta = model.config.beta if beta is None else beta
    p = model.params
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Ctrue = np.atleast_2d(np.asarray(Ctrue, dtype=np.float64))
    y = np.asarray(y)
    n = X.shape[0]
    Chat, alpha, P, cache = forward(model, X)
    loss, l_y, l_c = _loss_from_outputs(P, Chat, y, Ctrue, beta)

    Hk, T, G, H1, A1 = cache["Hk"], cache["T"], cache["G"], cache["H1"], cache["A1"]
    onehot = np.zeros_like(P)
    onehot[np.arange(n), y] = 1.0
    dZ = (P - onehot) / n
    grads = {
        "Wc": dZ.T @ G,
        "bc": dZ.sum(axis=0),
    }
    dG = dZ @ p["Wc"]
    dAlpha = np.einsum("na,nka->nk", dG, Hk)
    dHk = alpha[:, :, None] * dG[:, None, :]
    dE = alpha * (dAlpha - (alpha * dAlpha).sum(axis=1, keepdims=True))
    dT = dE[:, :, None] * p["wa"][None, None, :]
    grads["wa"] = np.einsum("nka,nk->a", T, dE)
    dPre = dT * (1.0 - T * T)
    grads["Wa"] = np.einsum("nka,nkb->ab", dPre, Hk)
    grads["ba"] = dPre.sum(axis=(0, 1))
    dHk = dHk + dPre @ p["Wa"]
    grads["U"] = np.einsum("nka,nk->ka", dHk, Chat)
    dC_path = np.einsum("nka,ka->nk", dHk, p["U"])
    dS = dC_path * Chat * (1.0 - Chat) + (beta / n) * (Chat - Ctrue)
    grads["W2"] = dS.T @ H1
    grads["b2"] = dS.sum(axis=0)
    dH1 = dS @ p["W2"]
    dA1 = dH1 * (A1 > 0)
    grads["W1"] = dA1.T @ X
    grads["b1"] = dA1.sum(axis=0)
    return grads, loss, l_y, l_c


@dataclass
class TrainResult:
    model: BottleneckModel
    losses: list[float] = field(default_factory=list)


_ATTN_PARAMS = ("wa", "Wa", "ba")


def train(
    config: ModelConfig,
    X,
    y,
    concepts,
    epochs: int = 30,
    lr: float = 1e-3,
    batch_size: int = 32,
    attn_warmup: float = 0.5,
) -> TrainResult:
    """Minibatch Adam on the joint loss; deterministic under config.seed.

    For the first ``attn_warmup`` fraction of epochs the attention scorer is
    frozen (its init keeps attention near uniform), so the class head learns
    to read every concept before attention is allowed to concentrate. Without
    the warm-up, softmax attention can zero out a decisive concept early and
    its score gradient vanishes with it.
    """
    model = init_model(config)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    concepts = np.asarray(concepts, dtype=np.float64)
    rng = np.random.default_rng(config.seed + 1)
    opt = AdamState(model.params)
    losses: list[float] = []
    n = X.shape[0]
    warmup_epochs = int(epochs * attn_warmup)
    for epoch in range(epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            grads, loss, _, _ = gradients(model, X[idx], y[idx], concepts[idx])
            if not np.isfinite(loss):
                raise FloatingPointError(
                    f"training aborted: non-finite loss {loss} at step {opt.t}"
                )
            if epoch < warmup_epochs:
                for name in _ATTN_PARAMS:
                    grads[name] = np.zeros_like(grads[name])
            opt.step(model.params, grads, lr)
            epoch_loss += loss * len(idx)
        losses.append(epoch_loss / n)
    return TrainResult(model, losses)


class AdamState:
    def __init__(self, params: dict[str, np.ndarray]):
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads, lr):
        self.t += 1
        b1t = 1.0 - _ADAM_B1 ** self.t
        b2t = 1.0 - _ADAM_B2 ** self.t
        for key, g in grads.items():
            self.m[key] = _ADAM_B1 * self.m[key] + (1.0 - _ADAM_B1) * g
            self.v[key] = _ADAM_B2 * self.v[key] + (1.0 - _ADAM_B2) * g * g
            mhat = self.m[key] / b1t
            vhat = self.v[key] / b2t
            params[key] -= lr * mhat / (np.sqrt(vhat) + _ADAM_EPS)


def intervene(model: BottleneckModel, x, overrides: dict[int, float]) -> np.ndarray:
    """Class probabilities with chosen concept activations forced."""
    _, _, class_probs, _ = forward(model, x, overrides=overrides)
    return class_probs


# --- concept-only classifiers ------------------------------------------------


@dataclass
class ConceptClassifier:
    kind: str  # linear | mlp
    params: dict[str, np.ndarray]
    n_labels: int

    def predict_proba(self, C) -> np.ndarray:
        C = np.atleast_2d(np.asarray(C, dtype=np.float64))
        if self.kind == "linear":
            return _softmax(C @ self.params["W"].T + self.params["b"])
        H = np.maximum(C @ self.params["W1"].T + self.params["b1"], 0.0)
        return _softmax(H @ self.params["W2"].T + self.params["b2"])

    def predict(self, C) -> np.ndarray:
        return self.predict_proba(C).argmax(axis=1)


def train_concept_classifier(
    kind: str,
    matrix,
    labels,
    hidden: int = 16,
    epochs: int = 300,
    lr: float = 0.05,
    seed: int = 0,
) -> ConceptClassifier:
    """Softmax regression or a one-hidden-layer MLP on the concept matrix."""
    if kind not in ("linear", "mlp"):
        raise ConfigError(f"unknown classifier kind {kind!r}")
    C = np.asarray(matrix, dtype=np.float64)
    y = np.asarray(labels)
    classes = np.unique(y)
    if classes.size < 2:
        raise DegenerateTaskError("concept classifier needs at least two classes")
    m = int(y.max()) + 1
    rng = np.random.default_rng(seed)
    k = C.shape[1]
    if kind == "linear":
        params = {"W": rng.normal(0, 1.0 / np.sqrt(max(k, 1)), (m, k)), "b": np.zeros(m)}
    else:
        params = {
            "W1": rng.normal(0, 1.0 / np.sqrt(max(k, 1)), (hidden, k)), "b1": np.zeros(hidden),
            "W2": rng.normal(0, 1.0 / np.sqrt(hidden), (m, hidden)), "b2": np.zeros(m),
        }
    clf = ConceptClassifier(kind, params, m)
    opt = AdamState(params)
    n = C.shape[0]
    onehot = np.zeros((n, m))
    onehot[np.arange(n), y] = 1.0
    for _ in range(epochs):
        if kind == "linear":
            P = clf.predict_proba(C)
            dZ = (P - onehot) / n
            grads = {"W": dZ.T @ C, "b": dZ.sum(axis=0)}
        else:
            A1 = C @ params["W1"].T + params["b1"]
            H = np.maximum(A1, 0.0)
            P = _softmax(H @ params["W2"].T + params["b2"])
            dZ = (P - onehot) / n
            dH = dZ @ params["W2"]
            dA1 = dH * (A1 > 0)
            grads = {
                "W2": dZ.T @ H, "b2": dZ.sum(axis=0),
                "W1": dA1.T @ C, "b1": dA1.sum(axis=0),
            }
        opt.step(params, grads, lr)
    return clf


# --- evaluation ---------------------------------------------------------------


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    f1: float
    concept_auc: float | None
    excluded_concepts: tuple[int, ...] = ()


def _macro_f1(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    scores = []
    for cls in np.unique(y_true):
        tp = int(((y_pred == cls) & (y_true == cls)).sum())
        fp = int(((y_pred == cls) & (y_true != cls)).sum())
        fn = int(((y_pred != cls) & (y_true == cls)).sum())
        if tp == 0:
            scores.append(0.0)
            continue
        precision = tp / (tp + fp)
        recall = tp / (tp + fn)
        scores.append(2 * precision * recall / (precision + recall))
    return float(np.mean(scores))


def rank_auc(scores, targets) -> float:
    """Mann-Whitney AUC with midranks for ties."""
    scores = np.asarray(scores, dtype=np.float64)
    targets = np.asarray(targets)
    pos = int(targets.sum())
    neg = targets.size - pos
    if pos == 0 or neg == 0:
        raise ValueError("AUC undefined for a constant target column")
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(scores.size, dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    rank_sum = float(ranks[targets == 1].sum())
    return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg)


def evaluate(y_true, y_pred, concept_scores=None, concept_true=None) -> Metrics:
    """Accuracy, macro-F1 and (when concept outputs exist) macro concept AUC.

    Concept columns constant in the eval split are excluded from the AUC
    average and recorded in the result.
    """
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.size == 0:
        raise DegenerateTaskError("cannot evaluate an empty split")
    accuracy = float((y_true == y_pred).mean())
    f1 = _macro_f1(y_true, y_pred)
    if concept_scores is None or concept_true is None:
        return Metrics(accuracy, f1, None)
    concept_scores = np.atleast_2d(np.asarray(concept_scores, dtype=np.float64))
    concept_true = np.atleast_2d(np.asarray(concept_true))
    aucs, excluded = [], []
    for k in range(concept_true.shape[1]):
        col = concept_true[:, k]
        if col.min() == col.max():
            excluded.append(k)
            continue
        aucs.append(rank_auc(concept_scores[:, k], col))
    auc = float(np.mean(aucs)) if aucs else None
    return Metrics(accuracy, f1, auc, tuple(excluded))


def evaluate_bottleneck(model: BottleneckModel, X, y, concepts) -> Metrics:
    Chat, _, P, _ = forward(model, np.atleast_2d(X))
    return evaluate(y, P.argmax(axis=1), Chat, concepts)


# --- explanation reports ------------------------------------------------------


def explain(model: BottleneckModel, X, top: int = 3):
    """Per sample: predicted label, concepts predicted present (chat >= 0.5),
    the top of those by attention score, and the aggregated remainder mass."""
    Chat, alpha, P, _ = forward(model, np.atleast_2d(X))
    reports = []
    for i in range(Chat.shape[0]):
        present = [int(k) for k in np.flatnonzero(Chat[i] >= 0.5)]
        ranked = sorted(present, key=lambda k: -alpha[i, k])[:top]
        top_list = [(int(k), float(alpha[i, k])) for k in ranked]
        reports.append(
            {
                "predicted": int(P[i].argmax()),
                "present": present,
                "top_concepts": top_list,
                "others": float(max(0.0, 1.0 - sum(a for _, a in top_list))),
            }
        )
    return reports


# --- checkpoints ----------------------------------------------------------------


def save_checkpoint(model: BottleneckModel, path) -> None:
    payload = {
        "config": {
            "n_features": model.config.n_features,
            "hidden": model.config.hidden,
            "n_concepts": model.config.n_concepts,
            "attn_dim": model.config.attn_dim,
            "n_labels": model.config.n_labels,
            "beta": model.config.beta,
            "seed": model.config.seed,
        },
        "params": {k: v.tolist() for k, v in model.params.items()},
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path) -> BottleneckModel:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    config = ModelConfig(**payload["config"])
    params = {k: np.asarray(v, dtype=np.float64) for k, v in payload["params"].items()}
    return BottleneckModel(config, params)


# --- synthetic data -------------------------------------------------------------


def make_synthetic(
    n: int = 2000,
    n_features: int = 64,
    n_concepts: int = 8,
    n_labels: int = 4,
    noise: float = 0.05,
    margin: float = 0.3,
    seed: int = 0,
):
    """Separable synthetic data: concepts are noisy linear threshold functions
    of gaussian features and the label is a deterministic rule on the first
    two true concepts (y = 2*c0 + c1).

    The two label-deciding concepts are kept ``margin`` away from their
    decision boundary (rejection sampling), which is what makes the task
    learnable to high accuracy from a finite sample; the remaining concepts
    stay margin-free and noisy.
    """
    if n_labels != 4:
        raise ConfigError("the synthetic rule encodes 4 labels from two concepts")
    rng = np.random.default_rng(seed)
    W = rng.normal(size=(n_concepts, n_features)) / np.sqrt(n_features)
    rows, concept_rows = [], []
    while sum(len(r) for r in rows) < n:
        X = rng.normal(size=(4 * n, n_features))
        logits = X @ W.T + noise * rng.normal(size=(4 * n, n_concepts))
        ok = (np.abs(logits[:, 0]) >= margin) & (np.abs(logits[:, 1]) >= margin)
        rows.append(X[ok])
        concept_rows.append((logits[ok] > 0).astype(np.float64))
    X = np.concatenate(rows)[:n]
    C = np.concatenate(concept_rows)[:n]
    y = (2 * C[:, 0] + C[:, 1]).astype(np.int64)
    return X, y, C
