"""The gated multi-granularity network and its baseline head arrangements.

The model stacks linear classification heads of increasing granularity:
a 2-way sentence head with sigmoid activation, then a 19-way token head
scored with softmax cross-entropy. A trainable gate projects the
sentence head's output to one scalar weight that multiplies every token
logit, so a sentence the coarse head is confident about (weight 0 under
a relu gate) produces exactly-zero token outputs and contributes zero
token loss and zero token-head gradient.

Four head arrangements share this module:

* ``bert_single`` / ``bert_joint``: independent sentence and token
  heads. With frozen embedding providers the two arrangements share
  forward semantics and differ only in how training weighs the losses.
* ``bert_granularity``: the sentence head's output is concatenated to
  each token's logits and an extra 19-way layer predicts from the pair.
* ``mgn``: the gated arrangement described above.

All gradients are computed analytically in :func:`backward`; the test
suite verifies them against central finite differences for every
arrangement and both gate activations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

MODE_SINGLE = "bert_single"
MODE_JOINT = "bert_joint"
MODE_GRANULARITY = "bert_granularity"
MODE_MGN = "mgn"
ARCHITECTURE_MODES = (MODE_SINGLE, MODE_JOINT, MODE_GRANULARITY, MODE_MGN)

GATE_ACTIVATIONS = ("relu", "sigmoid")

SENTENCE_CLASSES = 2


def stable_sigmoid(x: np.ndarray | float) -> np.ndarray | float:
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


@dataclass
class GranularityLayer:
    """Linear projection to class scores plus its activation kind.

    ``sigmoid`` layers emit independent per-class probabilities;
    ``softmax`` layers emit raw scores that are normalized inside the
    loss (and by the decoder), so gating can scale them directly.
    """

    weight: np.ndarray  # (classes, in_dim)
    bias: np.ndarray  # (classes,)
    activation: str

    def __post_init__(self) -> None:
        if self.activation not in ("sigmoid", "softmax"):
            raise ValueError(f"unknown layer activation {self.activation!r}")
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise ValueError("layer weight/bias shapes are inconsistent")

    @property
    def classes(self) -> int:
        return self.weight.shape[0]

    @property
    def in_dim(self) -> int:
        return self.weight.shape[1]

    def linear(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weight.T + self.bias


@dataclass
class Gate:
    """Projection of a layer output to one scalar weight.

    A relu gate emits weights in [0, inf) and can shut the next
    granularity off exactly; a sigmoid gate emits (0, 1) and only
    softly down-weights it.
    """

    weight: np.ndarray  # (in_dim,)
    bias: np.ndarray  # (1,)
    activation: str

    def __post_init__(self) -> None:
        if self.activation not in GATE_ACTIVATIONS:
            raise ValueError(f"unknown gate activation {self.activation!r}")
        if self.weight.ndim != 1 or self.bias.shape != (1,):
            raise ValueError("gate weight/bias shapes are inconsistent")

    def pre_activation(self, output: np.ndarray) -> float:
        return float(output @ self.weight + self.bias[0])

    def __call__(self, output: np.ndarray) -> float:
        u = self.pre_activation(output)
        if self.activation == "relu":
            return max(0.0, u)
        return float(stable_sigmoid(u))


@dataclass
class MgnModel:
    """Ordered granularity layers with gates between consecutive pairs.

    The standard instance is two layers (sentence head, token head).
    ``concat_layer`` exists only in the ``bert_granularity``
    arrangement; ``gates`` is non-empty only for ``mgn``.
    """

    mode: str
    layers: list[GranularityLayer]
    gates: list[Gate] = field(default_factory=list)
    concat_layer: GranularityLayer | None = None
    alpha: float = 0.9
    positive_weight: float = 1.0

    def __post_init__(self) -> None:
        if self.mode not in ARCHITECTURE_MODES:
            raise ValueError(
                f"unknown architecture mode {self.mode!r}; expected one of "
                f"{ARCHITECTURE_MODES}"
            )
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.mode == MODE_MGN and len(self.gates) != len(self.layers) - 1:
            raise ValueError("mgn mode needs a gate between every consecutive layer pair")
        if self.mode == MODE_GRANULARITY and self.concat_layer is None:
            raise ValueError("bert_granularity mode needs the extra concatenation layer")

    @property
    def dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def token_classes(self) -> int:
        return self.layers[-1].classes

    @property
    def gate_activation(self) -> str | None:
        return self.gates[0].activation if self.gates else None

    def parameters(self) -> dict[str, np.ndarray]:
        """Named parameter arrays; mutating them mutates the model."""
        params: dict[str, np.ndarray] = {}
        for k, layer in enumerate(self.layers):
            params[f"g{k + 1}.weight"] = layer.weight
            params[f"g{k + 1}.bias"] = layer.bias
        for k, gate in enumerate(self.gates):
            params[f"gate{k + 1}.weight"] = gate.weight
            params[f"gate{k + 1}.bias"] = gate.bias
        if self.concat_layer is not None:
            params["concat.weight"] = self.concat_layer.weight
            params["concat.bias"] = self.concat_layer.bias
        return params

    def copy_parameters(self) -> dict[str, np.ndarray]:
        return {name: arr.copy() for name, arr in self.parameters().items()}

    def load_parameters(self, values: dict[str, np.ndarray]) -> None:
        params = self.parameters()
        if set(values) != set(params):
            raise ValueError("parameter name sets do not match")
        for name, arr in params.items():
            if values[name].shape != arr.shape:
                raise ValueError(f"shape mismatch for parameter {name}")
            arr[...] = values[name]


def build_model(
    mode: str,
    dim: int,
    gate_activation: str = "sigmoid",
    alpha: float = 0.9,
    positive_weight: float = 1.0,
    token_classes: int = 19,
    seed: int = 0,
    init_scale: float = 0.1,
) -> MgnModel:
    """Two-level model with randomly initialized weights and zero biases."""
    rng = np.random.default_rng(seed)

    def layer(classes: int, in_dim: int, activation: str) -> GranularityLayer:
        return GranularityLayer(
            weight=rng.normal(0.0, init_scale, size=(classes, in_dim)),
            bias=np.zeros(classes),
            activation=activation,
        )

    g1 = layer(SENTENCE_CLASSES, dim, "sigmoid")
    g2 = layer(token_classes, dim, "softmax")
    gates: list[Gate] = []
    concat: GranularityLayer | None = None
    if mode == MODE_MGN:
        gates = [
            Gate(
                weight=rng.normal(0.0, init_scale, size=(SENTENCE_CLASSES,)),
                bias=np.zeros(1),
                activation=gate_activation,
            )
        ]
    elif mode == MODE_GRANULARITY:
        concat = layer(token_classes, SENTENCE_CLASSES + token_classes, "softmax")
    return MgnModel(
        mode=mode,
        layers=[g1, g2],
        gates=gates,
        concat_layer=concat,
        alpha=alpha,
        positive_weight=positive_weight,
    )


@dataclass(frozen=True)
class ForwardPass:
    """Everything the loss, the decoder and backward need from one sentence."""

    sentence_vec: np.ndarray  # (dim,)
    token_vecs: np.ndarray  # (n, dim)
    sentence_pre: np.ndarray  # (2,)
    sentence_probs: np.ndarray  # (2,)
    token_linear: np.ndarray  # (n, classes), ungated
    token_outputs: np.ndarray  # (n, classes), after gating / concatenation
    gate_pre: float | None = None
    gate_weight: float | None = None
    concat_inputs: np.ndarray | None = None  # (n, 2 + classes)


def _check_embeddings(model: MgnModel, embeddings: np.ndarray) -> np.ndarray:
    embeddings = np.asarray(embeddings, dtype=np.float64)
    if embeddings.ndim != 2:
        raise ValueError("embeddings must be a 2-d matrix")
    if embeddings.shape[0] < 2:
        raise ValueError(
            "embeddings need a sentence row plus at least one token row, "
            f"got {embeddings.shape[0]} rows"
        )
    if embeddings.shape[1] != model.dim:
        raise ValueError(
            f"embedding dimension {embeddings.shape[1]} does not match "
            f"model dimension {model.dim}"
        )
    if not np.all(np.isfinite(embeddings)):
        raise ValueError("embeddings contain non-finite values")
    return embeddings


def forward(model: MgnModel, embeddings: np.ndarray) -> ForwardPass:
    """Run the two-level model on one sentence.

    Row 0 of ``embeddings`` is the sentence-level vector; the remaining
    rows are per-token vectors. Token outputs are gated linear scores
    in ``mgn`` mode (weight times logits), plain logits otherwise.
    """
    if len(model.layers) != 2:
        raise ValueError("forward() expects the two-level model; use forward_stack")
    embeddings = _check_embeddings(model, embeddings)
    sentence_vec = embeddings[0]
    token_vecs = embeddings[1:]

    g1, g2 = model.layers
    sentence_pre = g1.linear(sentence_vec)
    sentence_probs = stable_sigmoid(sentence_pre)
    token_linear = g2.linear(token_vecs)

    gate_pre = gate_weight = None
    concat_inputs = None
    if model.mode == MODE_MGN:
        gate = model.gates[0]
        gate_pre = gate.pre_activation(sentence_probs)
        gate_weight = gate(sentence_probs)
        token_outputs = gate_weight * token_linear
    elif model.mode == MODE_GRANULARITY:
        concat_inputs = np.hstack(
            [np.tile(sentence_probs, (token_linear.shape[0], 1)), token_linear]
        )
        token_outputs = model.concat_layer.linear(concat_inputs)
    else:
        token_outputs = token_linear

    return ForwardPass(
        sentence_vec=sentence_vec,
        token_vecs=token_vecs,
        sentence_pre=sentence_pre,
        sentence_probs=sentence_probs,
        token_linear=token_linear,
        token_outputs=token_outputs,
        gate_pre=gate_pre,
        gate_weight=gate_weight,
        concat_inputs=concat_inputs,
    )


def forward_stack(
    layers: Sequence[GranularityLayer],
    gates: Sequence[Gate],
    representations: Sequence[np.ndarray],
    parents: Sequence[np.ndarray],
) -> list[np.ndarray]:
    """Generalized K-level gated forward pass.

    ``representations[k]`` holds one row per unit of granularity k
    (sentences, then tokens, then finer units); ``parents[k][j]`` names
    the level-k unit that owns level-(k+1) unit j. Each unit's gate
    weight multiplies all outputs of its child units, so a zero weight
    at any level zeroes every level below it.
    """
    if len(gates) != len(layers) - 1:
        raise ValueError("need exactly one gate per consecutive layer pair")
    if len(representations) != len(layers) or len(parents) != len(layers) - 1:
        raise ValueError("representations/parents do not match the layer count")
    outputs: list[np.ndarray] = []
    weights: np.ndarray | None = None
    for k, layer in enumerate(layers):
        rep = np.atleast_2d(np.asarray(representations[k], dtype=np.float64))
        out = layer.linear(rep)
        if layer.activation == "sigmoid":
            out = stable_sigmoid(out)
        if k > 0:
            parent = np.asarray(parents[k - 1], dtype=int)
            if parent.shape[0] != out.shape[0]:
                raise ValueError(f"parent map at level {k} does not cover all units")
            out = out * weights[parent][:, None]
        if k < len(layers) - 1:
            gate = gates[k]
            weights = np.array([gate(row) for row in out])
        outputs.append(out)
    return outputs


@dataclass(frozen=True)
class TrainingExample:
    """One labeled sentence: embedding rows, binary label, token classes."""

    embeddings: np.ndarray  # (n + 1, dim)
    sentence_label: int
    token_classes: np.ndarray  # (n,), values in [0, token_classes)


@dataclass(frozen=True)
class LossParts:
    total: float
    sentence_loss: float  # before alpha weighting
    token_loss: float  # before (1 - alpha) weighting
    masks: tuple[float, ...]  # per-example token-loss mask


def _token_loss_mask(model: MgnModel, fwd: ForwardPass) -> float:
    """Factor multiplying one sentence's mean token loss.

    Relu gates mask with the indicator of a positive weight, which is
    piecewise constant, so the loss stays differentiable wherever it is
    defined and drops to exactly zero for shut-off sentences. Sigmoid
    gates weight softly by the gate value itself (which never reaches
    zero). Ungated arrangements use 1.
    """
    if model.mode != MODE_MGN:
        return 1.0
    if model.gate_activation == "relu":
        return 1.0 if fwd.gate_weight > 0.0 else 0.0
    return fwd.gate_weight


def _sentence_loss_terms(
    pre: np.ndarray, label: int, positive_weight: float
) -> tuple[float, np.ndarray]:
    """Weighted 2-way sigmoid cross-entropy and its gradient w.r.t. ``pre``."""
    targets = np.array([1.0 - label, float(label)])
    loss = float(np.sum(targets * softplus(-pre) + (1.0 - targets) * softplus(pre)))
    grad = stable_sigmoid(pre) - targets
    weight = positive_weight if label == 1 else 1.0
    return weight * loss, weight * grad


def _token_ce(outputs: np.ndarray, classes: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean softmax cross-entropy over tokens and its gradient w.r.t. outputs."""
    n = outputs.shape[0]
    logp = log_softmax(outputs)
    mean_ce = float(-logp[np.arange(n), classes].mean())
    grad = np.exp(logp)
    grad[np.arange(n), classes] -= 1.0
    grad /= n
    return mean_ce, grad


def _check_targets(model: MgnModel, example: TrainingExample) -> np.ndarray:
    classes = np.asarray(example.token_classes, dtype=int)
    if example.sentence_label not in (0, 1):
        raise ValueError(f"sentence label must be 0 or 1, got {example.sentence_label}")
    if classes.shape != (example.embeddings.shape[0] - 1,):
        raise ValueError("token class count does not match token row count")
    if classes.size and (classes.min() < 0 or classes.max() >= model.token_classes):
        raise ValueError(
            f"token classes must lie in [0, {model.token_classes}), "
            f"got range [{classes.min()}, {classes.max()}]"
        )
    return classes


def joint_loss(
    model: MgnModel,
    fwd: ForwardPass,
    sentence_label: int,
    token_classes: np.ndarray,
    alpha: float | None = None,
    positive_weight: float | None = None,
) -> float:
    """Alpha-weighted sum of the sentence loss and the masked token loss."""
    example = TrainingExample(
        embeddings=np.vstack([fwd.sentence_vec, fwd.token_vecs]),
        sentence_label=sentence_label,
        token_classes=np.asarray(token_classes, dtype=int),
    )
    classes = _check_targets(model, example)
    a = model.alpha if alpha is None else alpha
    pw = model.positive_weight if positive_weight is None else positive_weight
    if not 0.0 <= a <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    l1, _ = _sentence_loss_terms(fwd.sentence_pre, sentence_label, pw)
    mean_ce, _ = _token_ce(fwd.token_outputs, classes)
    l2 = _token_loss_mask(model, fwd) * mean_ce
    return a * l1 + (1.0 - a) * l2


def batch_loss(model: MgnModel, batch: Sequence[TrainingExample]) -> LossParts:
    """Mean joint loss over a batch, with its unweighted components."""
    if not batch:
        raise ValueError("batch must not be empty")
    total_l1 = total_l2 = 0.0
    masks = []
    for example in batch:
        classes = _check_targets(model, example)
        fwd = forward(model, example.embeddings)
        l1, _ = _sentence_loss_terms(
            fwd.sentence_pre, example.sentence_label, model.positive_weight
        )
        mean_ce, _ = _token_ce(fwd.token_outputs, classes)
        mask = _token_loss_mask(model, fwd)
        total_l1 += l1
        total_l2 += mask * mean_ce
        masks.append(mask)
    b = len(batch)
    l1 = total_l1 / b
    l2 = total_l2 / b
    return LossParts(
        total=model.alpha * l1 + (1.0 - model.alpha) * l2,
        sentence_loss=l1,
        token_loss=l2,
        masks=tuple(masks),
    )


def backward(
    model: MgnModel, batch: Sequence[TrainingExample]
) -> tuple[LossParts, dict[str, np.ndarray]]:
    """Exact reverse-mode gradients of the batch joint loss.

    Returns the loss parts and a dict aligned with
    :meth:`MgnModel.parameters`.
    """
    if not batch:
        raise ValueError("batch must not be empty")
    grads = {name: np.zeros_like(arr) for name, arr in model.parameters().items()}

    b = len(batch)
    alpha = model.alpha
    total_l1 = total_l2 = 0.0
    masks = []

    for example in batch:
        classes = _check_targets(model, example)
        fwd = forward(model, example.embeddings)
        l1, d_pre_raw = _sentence_loss_terms(
            fwd.sentence_pre, example.sentence_label, model.positive_weight
        )
        mean_ce, d_out_raw = _token_ce(fwd.token_outputs, classes)
        mask = _token_loss_mask(model, fwd)
        total_l1 += l1
        total_l2 += mask * mean_ce
        masks.append(mask)

        # d loss / d sentence pre-activation, starting with the g1 term
        d_a = (alpha / b) * d_pre_raw
        sig_prime = fwd.sentence_probs * (1.0 - fwd.sentence_probs)

        scale = (1.0 - alpha) / b
        if model.mode == MODE_MGN:
            gate = model.gates[0]
            w = fwd.gate_weight
            d_out = scale * mask * d_out_raw  # d loss / d gated outputs
            d_z = w * d_out
            d_w = float(np.sum(d_out * fwd.token_linear))
            if gate.activation == "sigmoid":
                # soft mask: the w factor in front of the token loss is live
                d_w += scale * mean_ce
                act_prime = w * (1.0 - w)
            else:
                act_prime = 1.0 if fwd.gate_pre > 0.0 else 0.0
            d_u = d_w * act_prime
            grads["gate1.weight"] += d_u * fwd.sentence_probs
            grads["gate1.bias"][0] += d_u
            d_a = d_a + (d_u * gate.weight) * sig_prime
        elif model.mode == MODE_GRANULARITY:
            d_out = scale * d_out_raw
            grads["concat.weight"] += d_out.T @ fwd.concat_inputs
            grads["concat.bias"] += d_out.sum(axis=0)
            d_concat = d_out @ model.concat_layer.weight
            d_z = d_concat[:, SENTENCE_CLASSES:]
            d_p = d_concat[:, :SENTENCE_CLASSES].sum(axis=0)
            d_a = d_a + d_p * sig_prime
        else:
            d_z = scale * d_out_raw

        grads["g2.weight"] += d_z.T @ fwd.token_vecs
        grads["g2.bias"] += d_z.sum(axis=0)
        grads["g1.weight"] += np.outer(d_a, fwd.sentence_vec)
        grads["g1.bias"] += d_a

    l1 = total_l1 / b
    l2 = total_l2 / b
    parts = LossParts(
        total=alpha * l1 + (1.0 - alpha) * l2,
        sentence_loss=l1,
        token_loss=l2,
        masks=tuple(masks),
    )
    return parts, grads


def predict_token_classes(model: MgnModel, fwd: ForwardPass) -> np.ndarray:
    """Per-token class decisions.

    A gate weight of exactly zero means no token may carry a technique,
    so every token decodes to the none class; otherwise the arg-max of
    the (gated) scores decides, with ties resolved toward the lowest
    class id.
    """
    if model.mode == MODE_MGN and fwd.gate_weight == 0.0:
        return np.zeros(fwd.token_outputs.shape[0], dtype=int)
    return np.argmax(fwd.token_outputs, axis=1)


def predict_sentence_label(fwd: ForwardPass) -> int:
    """1 iff the positive-class probability is at least the negative one."""
    return int(fwd.sentence_probs[1] >= fwd.sentence_probs[0])
