"""The gated multi-granularity classifier, inspected piece by piece.

Shows the sentence head, the gate, the token head, the exactly-zero
behavior of a closed relu gate, a finite-difference check of the
analytic gradients, and the generalized three-level stack.
"""

import numpy as np

from propspan.embeddings import HashEmbeddings
from propspan.nn import (
    Gate,
    GranularityLayer,
    TrainingExample,
    backward,
    batch_loss,
    build_model,
    forward,
    forward_stack,
)

rng = np.random.default_rng(0)

##############################################################################
# Embeddings enter as one matrix per sentence: row 0 is the sentence
# vector, the rest are token vectors. The toy provider hashes token
# strings to fixed pseudo-random vectors.

provider = HashEmbeddings(dimension=12)
embeddings = provider.encode(["voters", "deserve", "better", "roads"])
print("embedding matrix:", embeddings.shape, "(sentence row + 4 tokens)")

##############################################################################
# The gated model: a 2-way sentence head feeds a 1-dimensional gate
# whose weight multiplies every 19-way token score.

model = build_model("mgn", dim=12, gate_activation="sigmoid", alpha=0.9, seed=3)
fwd = forward(model, embeddings)
print("sentence probabilities:", np.round(fwd.sentence_probs, 4))
print("gate weight:", round(fwd.gate_weight, 4))
print("token scores scaled by the gate:",
      np.allclose(fwd.token_outputs, fwd.gate_weight * fwd.token_linear))

##############################################################################
# A relu gate with a negative pre-activation closes completely: every
# token output is exactly zero, the sentence's token loss is masked to
# zero, and no gradient reaches the token head from this sentence.

closed = build_model("mgn", dim=12, gate_activation="relu", seed=3)
closed.gates[0].weight[:] = 0.0
closed.gates[0].bias[:] = -2.0
fwd_closed = forward(closed, embeddings)
print("\nclosed gate: weight", fwd_closed.gate_weight,
      "| all token outputs zero:", bool(np.all(fwd_closed.token_outputs == 0.0)))

example = TrainingExample(embeddings, 1, np.zeros(4, dtype=int))
parts, grads = backward(closed, [example])
print("masked token loss:", parts.token_loss,
      "| token-head gradient all zero:", bool(np.all(grads["g2.weight"] == 0.0)))

##############################################################################
# Analytic gradients match central finite differences. This is the same
# check the acceptance suite runs over every architecture mode.

model = build_model("bert_granularity", dim=5, token_classes=6, seed=1, init_scale=0.4)
batch = [
    TrainingExample(rng.normal(size=(n + 1, 5)), int(rng.integers(2)),
                    rng.integers(0, 6, size=n))
    for n in (2, 3)
]
_, analytic = backward(model, batch)
h, worst = 1e-5, 0.0
for name, arr in model.parameters().items():
    flat = arr.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        up = batch_loss(model, batch).total
        flat[i] = orig - h
        down = batch_loss(model, batch).total
        flat[i] = orig
        fd = (up - down) / (2 * h)
        an = analytic[name].ravel()[i]
        worst = max(worst, abs(fd - an) / max(abs(fd) + abs(an), 1e-3))
print(f"\nworst finite-difference relative error: {worst:.2e}")

##############################################################################
# The wiring generalizes to deeper granularity stacks: a closed gate at
# any level zeroes everything below it.

layers = [
    GranularityLayer(rng.normal(size=(2, 6)), np.zeros(2), "sigmoid"),
    GranularityLayer(rng.normal(size=(3, 6)), np.zeros(3), "sigmoid"),
    GranularityLayer(rng.normal(size=(5, 6)), np.zeros(5), "softmax"),
]
gates = [
    Gate(np.zeros(2), np.zeros(1), "relu"),  # pre-activation 0 -> weight 0
    Gate(rng.normal(size=(3,)), np.zeros(1), "relu"),
]
reps = [rng.normal(size=(1, 6)), rng.normal(size=(3, 6)), rng.normal(size=(7, 6))]
parents = [np.zeros(3, dtype=int), np.array([0, 0, 1, 1, 2, 2, 2])]
outputs = forward_stack(layers, gates, reps, parents)
print("three-level stack with the first gate closed:",
      "level-2 all zero:", bool(np.all(outputs[1] == 0.0)),
      "| level-3 all zero:", bool(np.all(outputs[2] == 0.0)))
