"""Compact convolutional actor-critic with hand-derived gradients.

The architecture family is fixed: a stack of 3x3 stride-1 same-padding
conv layers with ReLU, one dense ReLU layer, and two linear heads
(6-way softmax policy, scalar value). Gradients of the A3C and
planner-imitation losses are computed analytically, so the only numeric
dependency is numpy. An Adam optimizer with L2-into-gradient weight
decay and a binary checkpoint format live here too.
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

PROB_FLOOR = 1e-8
GRAD_CLIP_NORM = 40.0


class NonFiniteGradientError(Exception):
    def __init__(self, name: str):
        super().__init__(f"non-finite gradient in parameter block {name!r}")
        self.name = name


@dataclass(frozen=True)
class NetworkArch:
    in_channels: int = 28
    board_size: int = 8
    conv_filters: tuple[int, ...] = (32, 32, 32, 32)
    kernel: int = 3
    dense_units: int = 128
    n_actions: int = 6

    @classmethod
    def desk_scale(cls, board_size: int = 6) -> "NetworkArch":
        """Small preset for fast tests and desk-scale training."""
        return cls(board_size=board_size, conv_filters=(16, 16), dense_units=64)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["conv_filters"] = list(self.conv_filters)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkArch":
        d = dict(d)
        d["conv_filters"] = tuple(d["conv_filters"])
        return cls(**d)


def param_shapes(arch: NetworkArch) -> dict[str, tuple[int, ...]]:
    shapes: dict[str, tuple[int, ...]] = {}
    c_in = arch.in_channels
    k = arch.kernel
    for i, f in enumerate(arch.conv_filters):
        shapes[f"conv{i}_w"] = (f, c_in, k, k)
        shapes[f"conv{i}_b"] = (f,)
        c_in = f
    flat = c_in * arch.board_size * arch.board_size
    shapes["dense_w"] = (flat, arch.dense_units)
    shapes["dense_b"] = (arch.dense_units,)
    shapes["policy_w"] = (arch.dense_units, arch.n_actions)
    shapes["policy_b"] = (arch.n_actions,)
    shapes["value_w"] = (arch.dense_units, 1)
    shapes["value_b"] = (1,)
    return shapes


def init_params(arch: NetworkArch, seed: int = 0,
                head_init: str = "zeros") -> dict[str, np.ndarray]:
    """Fan-in-scaled uniform trunk weights; zero biases. With the default
    head_init both output heads start at zero, so the initial policy is
    exactly uniform and all value estimates are 0."""
    rng = np.random.default_rng(seed)
    params: dict[str, np.ndarray] = {}
    for name, shape in param_shapes(arch).items():
        if name.endswith("_b"):
            params[name] = np.zeros(shape)
        elif name in ("policy_w", "value_w") and head_init == "zeros":
            params[name] = np.zeros(shape)
        else:
            fan_in = int(np.prod(shape[1:])) if name.startswith("conv") else shape[0]
            bound = 1.0 / math.sqrt(fan_in)
            params[name] = rng.uniform(-bound, bound, shape)
    return params


# ---------------------------------------------------------------------------
# Forward / backward

def _im2col(x: np.ndarray, k: int, pad: int) -> np.ndarray:
    n, c, h, w = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    cols = np.empty((n, c, k, k, h, w))
    for i in range(k):
        for j in range(k):
            cols[:, :, i, j] = xp[:, :, i:i + h, j:j + w]
    return cols.reshape(n, c * k * k, h * w)


def _col2im(dcols: np.ndarray, x_shape: tuple, k: int, pad: int) -> np.ndarray:
    n, c, h, w = x_shape
    d6 = dcols.reshape(n, c, k, k, h, w)
    dxp = np.zeros((n, c, h + 2 * pad, w + 2 * pad))
    for i in range(k):
        for j in range(k):
            dxp[:, :, i:i + h, j:j + w] += d6[:, :, i, j]
    return dxp[:, :, pad:pad + h, pad:pad + w]


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def forward_batch(params: dict, arch: NetworkArch, obs: np.ndarray):
    """Forward pass over a batch (T, C, H, W). Returns (probs, values, cache)."""
    x = np.asarray(obs, dtype=np.float64)
    if x.ndim == 3:
        x = x[None]
    t, c, h, w = x.shape
    if (c, h, w) != (arch.in_channels, arch.board_size, arch.board_size):
        raise ValueError(
            f"observation shape {(c, h, w)} does not match arch "
            f"{(arch.in_channels, arch.board_size, arch.board_size)}")
    pad = arch.kernel // 2
    cache: dict = {"inputs": [], "cols": [], "pre": []}
    for i, f in enumerate(arch.conv_filters):
        cache["inputs"].append(x)
        cols = _im2col(x, arch.kernel, pad)
        wmat = params[f"conv{i}_w"].reshape(f, -1)
        pre = np.einsum("fk,nkl->nfl", wmat, cols).reshape(t, f, h, w) \
            + params[f"conv{i}_b"][None, :, None, None]
        cache["cols"].append(cols)
        cache["pre"].append(pre)
        x = np.maximum(pre, 0.0)
    flat = x.reshape(t, -1)
    dense_pre = flat @ params["dense_w"] + params["dense_b"]
    hidden = np.maximum(dense_pre, 0.0)
    logits = hidden @ params["policy_w"] + params["policy_b"]
    values = (hidden @ params["value_w"] + params["value_b"])[:, 0]
    probs = _softmax(logits)
    cache.update(flat=flat, dense_pre=dense_pre, hidden=hidden,
                 conv_out=x, logits=logits)
    return probs, values, cache


def backward_batch(params: dict, arch: NetworkArch, cache: dict,
                   dlogits: np.ndarray, dvalues: np.ndarray) -> dict[str, np.ndarray]:
    """Exact gradients of a loss whose logit/value gradients are given."""
    grads: dict[str, np.ndarray] = {}
    hidden = cache["hidden"]
    grads["policy_w"] = hidden.T @ dlogits
    grads["policy_b"] = dlogits.sum(axis=0)
    dv = dvalues[:, None]
    grads["value_w"] = hidden.T @ dv
    grads["value_b"] = dv.sum(axis=0)
    dhidden = dlogits @ params["policy_w"].T + dv @ params["value_w"].T
    dhidden *= cache["dense_pre"] > 0
    grads["dense_w"] = cache["flat"].T @ dhidden
    grads["dense_b"] = dhidden.sum(axis=0)
    dx = (dhidden @ params["dense_w"].T).reshape(cache["conv_out"].shape)
    pad = arch.kernel // 2
    for i in reversed(range(len(arch.conv_filters))):
        f = arch.conv_filters[i]
        dpre = dx * (cache["pre"][i] > 0)
        t = dpre.shape[0]
        dflat = dpre.reshape(t, f, -1)
        grads[f"conv{i}_w"] = np.einsum("nfl,nkl->fk", dflat, cache["cols"][i]) \
            .reshape(params[f"conv{i}_w"].shape)
        grads[f"conv{i}_b"] = dpre.sum(axis=(0, 2, 3))
        wmat = params[f"conv{i}_w"].reshape(f, -1)
        dcols = np.einsum("fk,nfl->nkl", wmat, dflat)
        dx = _col2im(dcols, cache["inputs"][i].shape, arch.kernel, pad)
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradientError(name)
    return grads


def forward(params: dict, arch: NetworkArch, obs: np.ndarray) -> dict:
    """Single-observation forward: {'policy': 6 probs, 'value': float}."""
    probs, values, _ = forward_batch(params, arch, obs)
    return {"policy": probs[0], "value": float(values[0])}


# ---------------------------------------------------------------------------
# Losses

@dataclass
class LossWeights:
    value: float = 0.5
    policy: float = 1.0
    entropy: float = 0.01
    imitation: float = 0.0


@dataclass
class LossParts:
    total: float
    value: float
    policy: float
    entropy: float
    imitation: float


def _flog(p: np.ndarray) -> np.ndarray:
    return np.log(np.maximum(p, PROB_FLOOR))


def _loss_parts(probs, values, actions, returns, advantages, onehots,
                weights: LossWeights) -> LossParts:
    t = len(actions)
    logp = _flog(probs)
    l_pol = -float(np.sum(logp[np.arange(t), actions] * advantages))
    l_val = float(np.sum((returns - values) ** 2))
    entropy = float(np.mean(-np.sum(probs * logp, axis=1)))
    l_imit = 0.0
    if onehots is not None:
        l_imit = -float(np.sum(onehots * logp) / t)
    total = (weights.value * l_val + weights.policy * l_pol
             - weights.entropy * entropy + weights.imitation * l_imit)
    return LossParts(total, l_val, l_pol, entropy, l_imit)


def a3c_loss(params: dict, arch: NetworkArch, segment,
             weights: LossWeights | None = None) -> LossParts:
    """Composed loss over a trajectory segment: weighted value error plus
    advantage-scaled policy loss minus mean entropy (advantages and return
    targets are treated as constants)."""
    weights = weights or LossWeights()
    obs, actions, returns, advantages, onehots = _segment_arrays(segment)
    if len(actions) == 0:
        raise ValueError("empty segment")
    probs, values, _ = forward_batch(params, arch, obs)
    return _loss_parts(probs, values, actions, returns, advantages,
                       onehots if weights.imitation else None, weights)


def planner_imitation_loss(demonstrator_onehots, network_policies) -> float:
    """Mean cross-entropy between one-hot demonstrator actions and the
    network's action distribution."""
    onehots = np.asarray(demonstrator_onehots, dtype=np.float64)
    probs = np.asarray(network_policies, dtype=np.float64)
    if onehots.shape != probs.shape or len(onehots) == 0:
        raise ValueError("demonstrator and policy lists must have equal nonzero length")
    return -float(np.sum(onehots * _flog(probs)) / len(onehots))


def _segment_arrays(segment):
    obs = np.asarray(segment.observations, dtype=np.float64)
    actions = np.asarray(segment.actions, dtype=np.int64)
    returns = np.asarray(segment.returns, dtype=np.float64)
    advantages = np.asarray(segment.advantages, dtype=np.float64)
    onehots = getattr(segment, "demonstrator_onehots", None)
    if onehots is not None:
        onehots = np.asarray(onehots, dtype=np.float64)
    return obs, actions, returns, advantages, onehots


def backward(params: dict, arch: NetworkArch, segment,
             weights: LossWeights | None = None) -> tuple[LossParts, dict[str, np.ndarray]]:
    """Exact analytic gradients of the composed segment loss."""
    weights = weights or LossWeights()
    obs, actions, returns, advantages, onehots = _segment_arrays(segment)
    t = len(actions)
    if t == 0:
        raise ValueError("empty segment")
    probs, values, cache = forward_batch(params, arch, obs)
    use_imit = onehots is not None and weights.imitation != 0.0
    parts = _loss_parts(probs, values, actions, returns, advantages,
                        onehots if use_imit else None, weights)

    logp = _flog(probs)
    dlogits = np.zeros_like(probs)
    onehot_taken = np.zeros_like(probs)
    onehot_taken[np.arange(t), actions] = 1.0
    dlogits += weights.policy * advantages[:, None] * (probs - onehot_taken)
    ent = -np.sum(probs * logp, axis=1, keepdims=True)
    dlogits += (weights.entropy / t) * probs * (logp + ent)
    if use_imit:
        dlogits += (weights.imitation / t) * (probs - onehots)
    dvalues = weights.value * 2.0 * (values - returns)
    grads = backward_batch(params, arch, cache, dlogits, dvalues)
    return parts, grads


def clip_gradients(grads: dict[str, np.ndarray],
                   max_norm: float = GRAD_CLIP_NORM) -> tuple[dict[str, np.ndarray], float]:
    """Global-norm clipping; returns (possibly rescaled grads, pre-clip norm)."""
    norm = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if norm > max_norm > 0:
        scale = max_norm / norm
        grads = {k: g * scale for k, g in grads.items()}
    return grads, norm


# ---------------------------------------------------------------------------
# Adam with classic L2 weight decay

@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0

    @classmethod
    def for_params(cls, params: dict[str, np.ndarray]) -> "AdamState":
        return cls(m={k: np.zeros_like(p) for k, p in params.items()},
                   v={k: np.zeros_like(p) for k, p in params.items()})


def adam_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
              state: AdamState, lr: float = 1e-4, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-5,
              weight_decay: float = 1e-5) -> None:
    """In-place Adam update with bias correction; weight decay enters the
    gradient as a classic L2 term."""
    state.step += 1
    t = state.step
    for k, p in params.items():
        if grads[k].shape != p.shape:
            raise ValueError(f"gradient shape mismatch for {k}")
        g = grads[k] + weight_decay * p
        state.m[k] = beta1 * state.m[k] + (1 - beta1) * g
        state.v[k] = beta2 * state.v[k] + (1 - beta2) * g * g
        m_hat = state.m[k] / (1 - beta1 ** t)
        v_hat = state.v[k] / (1 - beta2 ** t)
        p -= lr * m_hat / (np.sqrt(v_hat) + eps)


# ---------------------------------------------------------------------------
# Serialization

_MAGIC = b"POMMERLAB-CKPT v1\n"


def params_to_bytes(params: dict[str, np.ndarray], arch: NetworkArch,
                    step: int = 0) -> bytes:
    names = sorted(params)
    header = {
        "arch": arch.to_dict(),
        "step": step,
        "tensors": [{"name": n, "shape": list(params[n].shape)} for n in names],
    }
    buf = io.BytesIO()
    buf.write(_MAGIC)
    hdr = json.dumps(header).encode()
    buf.write(len(hdr).to_bytes(8, "little"))
    buf.write(hdr)
    for n in names:
        buf.write(np.ascontiguousarray(params[n], dtype="<f8").tobytes())
    return buf.getvalue()


def params_from_bytes(data: bytes) -> tuple[dict[str, np.ndarray], NetworkArch, int]:
    if not data.startswith(_MAGIC):
        raise ValueError("not a pommerlab checkpoint")
    off = len(_MAGIC)
    hlen = int.from_bytes(data[off:off + 8], "little")
    off += 8
    header = json.loads(data[off:off + hlen].decode())
    off += hlen
    arch = NetworkArch.from_dict(header["arch"])
    params: dict[str, np.ndarray] = {}
    for spec in header["tensors"]:
        shape = tuple(spec["shape"])
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(data, dtype="<f8", count=count, offset=off).reshape(shape)
        params[spec["name"]] = arr.copy()
        off += count * 8
    return params, arch, header["step"]


def save_checkpoint(path, params: dict, arch: NetworkArch, step: int = 0) -> None:
    with open(path, "wb") as fh:
        fh.write(params_to_bytes(params, arch, step))


def load_checkpoint(path) -> tuple[dict[str, np.ndarray], NetworkArch, int]:
    with open(path, "rb") as fh:
        return params_from_bytes(fh.read())


# ---------------------------------------------------------------------------

class ActorCritic:
    """Parameter bundle with convenience inference methods."""

    def __init__(self, arch: NetworkArch, params: dict[str, np.ndarray] | None = None,
                 seed: int = 0):
        self.arch = arch
        self.params = params if params is not None else init_params(arch, seed)

    def forward(self, obs: np.ndarray) -> tuple[np.ndarray, float]:
        probs, values, _ = forward_batch(self.params, self.arch, obs)
        return probs[0], float(values[0])

    def action_probs(self, obs: np.ndarray) -> np.ndarray:
        return self.forward(obs)[0]

    def value(self, obs: np.ndarray) -> float:
        return self.forward(obs)[1]

    def sync(self, params: dict[str, np.ndarray]) -> None:
        self.params = {k: p.copy() for k, p in params.items()}
