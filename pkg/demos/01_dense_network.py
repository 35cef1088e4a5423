"""The dense-network engine: forward pass, exact gradients, Adam.

Builds a tiny ReLU network, checks its analytic gradients against central
finite differences, and fits a toy regression target with Adam.
"""

import numpy as np

from passagerank.nn import (
    MlpSpec,
    Mode,
    adam_step,
    init_adam_state,
    init_params,
    mlp_backward,
    mlp_forward,
)

rng = np.random.default_rng(0)

# --- a 4 -> 8 -> 2 network with dropout on the hidden layer -----------------
spec = MlpSpec((4, 8, 2), dropout_p=0.5)
params = init_params(spec, seed=42)
x = rng.normal(size=4)

out, tape = mlp_forward(spec, params, x)            # Eval mode: deterministic
print("eval output:", out)

train_out, _ = mlp_forward(spec, params, x, Mode.TRAIN, rng)
print("train output (dropout active):", train_out)

# --- gradients match finite differences -------------------------------------
probe = rng.normal(size=2)
_, tape = mlp_forward(spec, params, x)
grads, input_grad = mlp_backward(spec, params, tape, probe)

eps = 1e-5
w = params[0].weights
orig = w[3, 1]
w[3, 1] = orig + eps
up, _ = mlp_forward(spec, params, x)
w[3, 1] = orig - eps
down, _ = mlp_forward(spec, params, x)
w[3, 1] = orig
fd = float(probe @ (up - down)) / (2 * eps)
print(f"analytic dL/dW[3,1] = {grads[0][0][3, 1]:.10f}, finite diff = {fd:.10f}")

# --- Adam drives a scalar regression loss to zero ---------------------------
spec = MlpSpec((3, 16, 1))
params = init_params(spec, seed=7)
state = init_adam_state(params, learning_rate=0.01)
target_w = rng.normal(size=3)

for step in range(1, 501):
    xi = rng.normal(size=3)
    target = float(target_w @ xi)
    pred, tape = mlp_forward(spec, params, xi)
    err = float(pred[0]) - target
    grads, _ = mlp_backward(spec, params, tape, np.array([2 * err]))
    adam_step(state, params, grads)
    if step % 100 == 0:
        print(f"step {step:4d}  squared error {err * err:.6f}")

print("optimizer steps taken:", state.step_count)
