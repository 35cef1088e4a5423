"""Minimal trainable dense-network engine.

Parameter storage, forward pass with ReLU and inverted dropout, exact
reverse-mode gradients, bias-corrected Adam updates, and a versioned binary
checkpoint container. All math runs at double precision.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import Enum
from typing import BinaryIO

import numpy as np


class Mode(Enum):
    """Train mode enables dropout; Eval mode is deterministic."""

    TRAIN = "train"
    EVAL = "eval"


@dataclass
class MlpSpec:
    """Architecture of a feed-forward stack: affine layers with ReLU between
    them, no activation after the final layer.

    layer_sizes lists the input dimension followed by each layer's output
    dimension. dropout_p is applied to hidden-layer outputs only.
    """

    layer_sizes: tuple[int, ...]
    dropout_p: float = 0.0

    def __post_init__(self):
        self.layer_sizes = tuple(int(s) for s in self.layer_sizes)
        if len(self.layer_sizes) < 2:
            raise ValueError("layer_sizes needs an input dim and at least one layer")
        if any(s <= 0 for s in self.layer_sizes):
            raise ValueError(f"layer sizes must be positive: {self.layer_sizes}")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError(f"dropout_p must be in [0, 1): {self.dropout_p}")

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_dim(self) -> int:
        return self.layer_sizes[-1]

    @property
    def num_layers(self) -> int:
        return len(self.layer_sizes) - 1


@dataclass
class DenseLayerParams:
    """One affine layer: weights (out_units x in_units) and bias (out_units)."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.bias.ndim != 1:
            raise ValueError("weights must be 2-D and bias 1-D")
        if self.weights.shape[0] != self.bias.shape[0]:
            raise ValueError(
                f"bias length {self.bias.shape[0]} does not match "
                f"{self.weights.shape[0]} output units"
            )
        if not (np.isfinite(self.weights).all() and np.isfinite(self.bias).all()):
            raise ValueError("layer parameters must be finite")

    def copy(self) -> "DenseLayerParams":
        return DenseLayerParams(self.weights.copy(), self.bias.copy())


def init_params(spec: MlpSpec, seed: int) -> list[DenseLayerParams]:
    """Initialize layer parameters deterministically from a seed.

    Weights are uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)]; biases are zero.
    """
    rng = np.random.default_rng(seed)
    params = []
    for fan_in, fan_out in zip(spec.layer_sizes[:-1], spec.layer_sizes[1:]):
        limit = 1.0 / np.sqrt(fan_in)
        weights = rng.uniform(-limit, limit, size=(fan_out, fan_in))
        params.append(DenseLayerParams(weights, np.zeros(fan_out)))
    return params


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


@dataclass
class ForwardTape:
    """Intermediates recorded by mlp_forward for exact backprop.

    inputs[i] is the (batch, in_i) input to layer i; pre_activations[i] its
    affine output before ReLU; masks[i] the inverted-dropout mask applied to
    hidden layer i's activation (None when dropout was inactive).
    """

    inputs: list[np.ndarray]
    pre_activations: list[np.ndarray]
    masks: list[np.ndarray | None]
    squeeze: bool


def _check_params(spec: MlpSpec, params: list[DenseLayerParams]) -> None:
    if len(params) != spec.num_layers:
        raise ValueError(f"expected {spec.num_layers} layers, got {len(params)}")
    for i, (layer, fan_in, fan_out) in enumerate(
        zip(params, spec.layer_sizes[:-1], spec.layer_sizes[1:])
    ):
        if layer.weights.shape != (fan_out, fan_in):
            raise ValueError(
                f"layer {i} weights {layer.weights.shape} do not match spec "
                f"({fan_out}, {fan_in})"
            )


def mlp_forward(
    spec: MlpSpec,
    params: list[DenseLayerParams],
    x: np.ndarray,
    mode: Mode = Mode.EVAL,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, ForwardTape]:
    """Run the network on a vector or a (batch, dim) matrix of rows.

    In Train mode each hidden activation is zeroed with probability dropout_p
    and survivors are scaled by 1/(1 - dropout_p), so Eval needs no rescaling.
    Returns the output (shaped like the input) and the tape for mlp_backward.
    """
    _check_params(spec, params)
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    h = np.atleast_2d(x)
    if h.shape[1] != spec.input_dim:
        raise ValueError(f"input dim {h.shape[1]} does not match spec {spec.input_dim}")
    if mode is Mode.TRAIN and spec.dropout_p > 0.0 and rng is None:
        raise ValueError("Train mode with dropout requires an rng")

    inputs, pre_acts, masks = [], [], []
    for i, layer in enumerate(params):
        inputs.append(h)
        z = h @ layer.weights.T + layer.bias
        pre_acts.append(z)
        if i == spec.num_layers - 1:
            h = z
        else:
            a = relu(z)
            if mode is Mode.TRAIN and spec.dropout_p > 0.0:
                keep = rng.random(a.shape) >= spec.dropout_p
                mask = keep / (1.0 - spec.dropout_p)
                a = a * mask
                masks.append(mask)
            else:
                masks.append(None)
            h = a

    out = h[0] if squeeze else h
    return out, ForwardTape(inputs, pre_acts, masks, squeeze)


def mlp_backward(
    spec: MlpSpec,
    params: list[DenseLayerParams],
    tape: ForwardTape,
    output_gradient: np.ndarray,
) -> tuple[list[tuple[np.ndarray, np.ndarray]], np.ndarray]:
    """Exact reverse-mode gradients of mlp_forward.

    The dropout mask recorded on the tape is treated as a constant. Returns
    per-layer (weight_grad, bias_grad) pairs and the gradient with respect to
    the input (summed over the batch for parameters, per-row for the input).
    """
    _check_params(spec, params)
    if len(tape.inputs) != spec.num_layers:
        raise ValueError("tape does not match spec")
    g = np.atleast_2d(np.asarray(output_gradient, dtype=np.float64))
    if g.shape != tape.pre_activations[-1].shape:
        raise ValueError(
            f"output_gradient shape {g.shape} does not match forward output "
            f"{tape.pre_activations[-1].shape}"
        )

    grads: list[tuple[np.ndarray, np.ndarray] | None] = [None] * spec.num_layers
    for i in range(spec.num_layers - 1, -1, -1):
        grads[i] = (g.T @ tape.inputs[i], g.sum(axis=0))
        g = g @ params[i].weights
        if i > 0:
            mask = tape.masks[i - 1]
            if mask is not None:
                g = g * mask
            g = g * (tape.pre_activations[i - 1] > 0)

    input_grad = g[0] if tape.squeeze else g
    return grads, input_grad


@dataclass
class AdamState:
    """Per-parameter first/second moments plus step count and hyperparameters."""

    first_moment: list[tuple[np.ndarray, np.ndarray]]
    second_moment: list[tuple[np.ndarray, np.ndarray]]
    step_count: int = 0
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


def init_adam_state(
    params: list[DenseLayerParams],
    learning_rate: float = 0.001,
    beta1: float = 0.9,
    beta2: float = 0.999,
    epsilon: float = 1e-8,
) -> AdamState:
    """Zero-initialized moments matching the parameter shapes."""
    zeros = lambda layer: (np.zeros_like(layer.weights), np.zeros_like(layer.bias))
    return AdamState(
        first_moment=[zeros(p) for p in params],
        second_moment=[zeros(p) for p in params],
        step_count=0,
        learning_rate=learning_rate,
        beta1=beta1,
        beta2=beta2,
        epsilon=epsilon,
    )


def adam_step(
    state: AdamState,
    params: list[DenseLayerParams],
    gradients: list[tuple[np.ndarray, np.ndarray]],
) -> tuple[list[DenseLayerParams], AdamState]:
    """One bias-corrected Adam update, applied elementwise in place."""
    if len(gradients) != len(params) or len(state.first_moment) != len(params):
        raise ValueError("params, gradients and optimizer state must align")
    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    for layer, (gw, gb), m, v in zip(params, gradients, state.first_moment, state.second_moment):
        if gw.shape != layer.weights.shape or gb.shape != layer.bias.shape:
            raise ValueError("gradient shapes do not match parameters")
        for value, grad, m_arr, v_arr in (
            (layer.weights, gw, m[0], v[0]),
            (layer.bias, gb, m[1], v[1]),
        ):
            m_arr *= b1
            m_arr += (1.0 - b1) * grad
            v_arr *= b2
            v_arr += (1.0 - b2) * grad * grad
            m_hat = m_arr / (1.0 - b1**t)
            v_hat = v_arr / (1.0 - b2**t)
            value -= state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return params, state


# ---------------------------------------------------------------------------
# Checkpoint container
#
# Binary layout (all integers little-endian; see docs/formats.md):
#   magic "NNCK", version byte 0x01,
#   u16 model_kind length + UTF-8 bytes, u64 seed,
#   u16 extras count, per extra: u16 key length + UTF-8 key, f64 value,
#   u32 block count, per block:
#     u16 name length + UTF-8 name, f64 dropout_p,
#     u32 layer_sizes count, that many u32 sizes,
#     per layer: f64 weights row-major then f64 bias,
#     u8 has_adam; if set: u64 step_count, f64 lr/beta1/beta2/epsilon,
#       per layer: f64 m_weights, m_bias, v_weights, v_bias.
# ---------------------------------------------------------------------------

CHECKPOINT_MAGIC = b"NNCK"
CHECKPOINT_VERSION = 1


@dataclass
class CheckpointBlock:
    name: str
    spec: MlpSpec
    params: list[DenseLayerParams]
    adam: AdamState | None = None


@dataclass
class Checkpoint:
    model_kind: str
    seed: int
    blocks: list[CheckpointBlock]
    extras: dict[str, float] = field(default_factory=dict)

    def block(self, name: str) -> CheckpointBlock:
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(f"checkpoint has no block named {name!r}")


def _write_str(fh: BinaryIO, s: str) -> None:
    data = s.encode("utf-8")
    if len(data) > 0xFFFF:
        raise ValueError("string too long for checkpoint format")
    fh.write(struct.pack("<H", len(data)))
    fh.write(data)


def _read_str(fh: BinaryIO) -> str:
    (n,) = struct.unpack("<H", _read_exact(fh, 2))
    return _read_exact(fh, n).decode("utf-8")


def _write_array(fh: BinaryIO, arr: np.ndarray) -> None:
    fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def _read_array(fh: BinaryIO, shape: tuple[int, ...]) -> np.ndarray:
    count = int(np.prod(shape)) if shape else 1
    data = _read_exact(fh, count * 8)
    return np.frombuffer(data, dtype="<f8").reshape(shape).astype(np.float64)


def _read_exact(fh: BinaryIO, n: int) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise ValueError("truncated checkpoint file")
    return data


def save_checkpoint(
    path,
    model_kind: str,
    seed: int,
    blocks: list[CheckpointBlock],
    extras: dict[str, float] | None = None,
) -> None:
    """Write a versioned checkpoint holding one or more named networks."""
    extras = extras or {}
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<B", CHECKPOINT_VERSION))
        _write_str(fh, model_kind)
        fh.write(struct.pack("<Q", seed))
        fh.write(struct.pack("<H", len(extras)))
        for key in sorted(extras):
            _write_str(fh, key)
            fh.write(struct.pack("<d", float(extras[key])))
        fh.write(struct.pack("<I", len(blocks)))
        for block in blocks:
            _check_params(block.spec, block.params)
            _write_str(fh, block.name)
            fh.write(struct.pack("<d", block.spec.dropout_p))
            fh.write(struct.pack("<I", len(block.spec.layer_sizes)))
            fh.write(struct.pack(f"<{len(block.spec.layer_sizes)}I", *block.spec.layer_sizes))
            for layer in block.params:
                _write_array(fh, layer.weights)
                _write_array(fh, layer.bias)
            fh.write(struct.pack("<B", 1 if block.adam is not None else 0))
            if block.adam is not None:
                adam = block.adam
                fh.write(struct.pack("<Q", adam.step_count))
                fh.write(
                    struct.pack(
                        "<dddd", adam.learning_rate, adam.beta1, adam.beta2, adam.epsilon
                    )
                )
                for m, v in zip(adam.first_moment, adam.second_moment):
                    _write_array(fh, m[0])
                    _write_array(fh, m[1])
                    _write_array(fh, v[0])
                    _write_array(fh, v[1])


def load_checkpoint(path) -> Checkpoint:
    """Read a checkpoint written by save_checkpoint."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"not a checkpoint file (magic {magic!r})")
        (version,) = struct.unpack("<B", _read_exact(fh, 1))
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        model_kind = _read_str(fh)
        (seed,) = struct.unpack("<Q", _read_exact(fh, 8))
        (n_extras,) = struct.unpack("<H", _read_exact(fh, 2))
        extras = {}
        for _ in range(n_extras):
            key = _read_str(fh)
            (extras[key],) = struct.unpack("<d", _read_exact(fh, 8))
        (n_blocks,) = struct.unpack("<I", _read_exact(fh, 4))
        blocks = []
        for _ in range(n_blocks):
            name = _read_str(fh)
            (dropout_p,) = struct.unpack("<d", _read_exact(fh, 8))
            (n_sizes,) = struct.unpack("<I", _read_exact(fh, 4))
            sizes = struct.unpack(f"<{n_sizes}I", _read_exact(fh, 4 * n_sizes))
            spec = MlpSpec(sizes, dropout_p)
            params = []
            for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
                weights = _read_array(fh, (fan_out, fan_in))
                bias = _read_array(fh, (fan_out,))
                params.append(DenseLayerParams(weights, bias))
            (has_adam,) = struct.unpack("<B", _read_exact(fh, 1))
            adam = None
            if has_adam:
                (step_count,) = struct.unpack("<Q", _read_exact(fh, 8))
                lr, b1, b2, eps = struct.unpack("<dddd", _read_exact(fh, 32))
                first, second = [], []
                for layer in params:
                    mw = _read_array(fh, layer.weights.shape)
                    mb = _read_array(fh, layer.bias.shape)
                    vw = _read_array(fh, layer.weights.shape)
                    vb = _read_array(fh, layer.bias.shape)
                    first.append((mw, mb))
                    second.append((vw, vb))
                adam = AdamState(first, second, step_count, lr, b1, b2, eps)
            blocks.append(CheckpointBlock(name, spec, params, adam))
        leftover = fh.read(1)
        if leftover:
            raise ValueError("trailing bytes after checkpoint payload")
    return Checkpoint(model_kind, seed, blocks, extras)
