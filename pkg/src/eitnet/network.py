"""Fully-connected tanh networks with exact derivatives.

A :class:`DenseNet` maps R^2 -> R through tanh hidden layers and a linear
output layer.  Two differentiation mechanisms are built in, both closed form:

* forward propagation of (value, gradient, Hessian) jets through the layers,
  giving exact derivatives of the output with respect to the *input* point
  (tanh' = 1 - tanh^2, tanh'' = -2 tanh (1 - tanh^2));
* reverse accumulation over that jet computation, giving the exact gradient
  of any scalar objective built from values/gradients/Hessians with respect
  to every *parameter* (this includes third-order mixed derivatives of the
  network).

Everything is float64; no external autodiff is involved.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ConfigurationError, DataError, NumericalOverflowError
from .rng import STREAM_INIT, CounterRng


class Jet2(NamedTuple):
    """Value, gradient and symmetric Hessian of a scalar map at one point."""

    value: float
    grad: np.ndarray  # (2,)
    hess: np.ndarray  # (2, 2)


class JetBatch(NamedTuple):
    """Jets over a batch of points. ``hesses`` is None when not computed."""

    values: np.ndarray  # (n,)
    grads: np.ndarray  # (n, 2)
    hesses: np.ndarray | None  # (n, 2, 2)


# An objective maps a JetBatch to (loss, d_values, d_grads, d_hesses); the
# cotangent arrays may be None when the objective does not use that output.
Objective = Callable[
    [JetBatch],
    tuple[float, np.ndarray | None, np.ndarray | None, np.ndarray | None],
]


@dataclass
class DenseNet:
    """Parameters of a tanh MLP with 2 inputs and 1 output.

    weights[l] has shape (layer_sizes[l+1], layer_sizes[l]); biases[l] has
    shape (layer_sizes[l+1],).  All hidden layers are tanh, the last layer
    is an affine map (with bias).
    """

    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self):
        self.layer_sizes = tuple(int(s) for s in self.layer_sizes)
        _validate_layer_sizes(self.layer_sizes)
        if len(self.weights) != len(self.layer_sizes) - 1 or len(self.biases) != len(self.weights):
            raise ConfigurationError("weights/biases do not match layer_sizes")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            want = (self.layer_sizes[l + 1], self.layer_sizes[l])
            if w.shape != want or b.shape != (want[0],):
                raise ConfigurationError(f"layer {l}: expected W{want}, got W{w.shape}, b{b.shape}")
        if not all(np.isfinite(w).all() for w in self.weights) or not all(
            np.isfinite(b).all() for b in self.biases
        ):
            raise ConfigurationError("network parameters must be finite")

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self) -> "DenseNet":
        return DenseNet(
            self.layer_sizes,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
        )

    def to_vector(self) -> np.ndarray:
        """All parameters flattened: W0 rows, b0, W1 rows, b1, ..."""
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts.append(w.ravel())
            parts.append(b)
        return np.concatenate(parts)

    def from_vector(self, vec: np.ndarray) -> None:
        """Overwrite parameters from a flat vector (inverse of to_vector)."""
        vec = np.asarray(vec, dtype=float)
        if vec.size != self.n_params:
            raise ConfigurationError(f"expected {self.n_params} values, got {vec.size}")
        pos = 0
        for w, b in zip(self.weights, self.biases):
            w[...] = vec[pos : pos + w.size].reshape(w.shape)
            pos += w.size
            b[...] = vec[pos : pos + b.size]
            pos += b.size


@dataclass
class ParamGradient:
    """Per-parameter gradient, shape-congruent with a DenseNet."""

    d_weights: list[np.ndarray]
    d_biases: list[np.ndarray]

    @classmethod
    def zeros(cls, net: DenseNet) -> "ParamGradient":
        return cls(
            [np.zeros_like(w) for w in net.weights],
            [np.zeros_like(b) for b in net.biases],
        )

    def add_(self, other: "ParamGradient", scale: float = 1.0) -> "ParamGradient":
        for dw, ow in zip(self.d_weights, other.d_weights):
            dw += scale * ow
        for db, ob in zip(self.d_biases, other.d_biases):
            db += scale * ob
        return self

    def add_params_(self, net: DenseNet, scale: float) -> "ParamGradient":
        """Accumulate scale * parameters (weight-decay contribution)."""
        for dw, w in zip(self.d_weights, net.weights):
            dw += scale * w
        for db, b in zip(self.d_biases, net.biases):
            db += scale * b
        return self

    def scale_(self, scale: float) -> "ParamGradient":
        for dw in self.d_weights:
            dw *= scale
        for db in self.d_biases:
            db *= scale
        return self

    def to_vector(self) -> np.ndarray:
        parts = []
        for dw, db in zip(self.d_weights, self.d_biases):
            parts.append(dw.ravel())
            parts.append(db)
        return np.concatenate(parts)

    def norm(self) -> float:
        return float(np.sqrt(sum(float((dw * dw).sum()) for dw in self.d_weights)
                             + sum(float((db * db).sum()) for db in self.d_biases)))

    def isfinite(self) -> bool:
        return all(np.isfinite(dw).all() for dw in self.d_weights) and all(
            np.isfinite(db).all() for db in self.d_biases
        )


def _validate_layer_sizes(sizes: Sequence[int]) -> None:
    if len(sizes) < 2:
        raise ConfigurationError("layer_sizes needs at least input and output")
    if sizes[0] != 2:
        raise ConfigurationError(f"input dimension must be 2, got {sizes[0]}")
    if sizes[-1] != 1:
        raise ConfigurationError(f"output dimension must be 1, got {sizes[-1]}")
    if any(s < 1 for s in sizes):
        raise ConfigurationError("all layer sizes must be >= 1")


def init_network(layer_sizes: Sequence[int], seed: int) -> DenseNet:
    """Scaled-uniform init: W ~ U(-1,1)/sqrt(fan_in), biases zero.

    The same seed always produces a bit-identical network.
    """
    sizes = tuple(int(s) for s in layer_sizes)
    _validate_layer_sizes(sizes)
    rng = CounterRng(seed, STREAM_INIT)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        u = rng.uniform(fan_out * fan_in).reshape(fan_out, fan_in)
        weights.append((2.0 * u - 1.0) / np.sqrt(fan_in))
        biases.append(np.zeros(fan_out))
    return DenseNet(sizes, weights, biases)


def _as_points(x) -> np.ndarray:
    pts = np.ascontiguousarray(x, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DataError(f"expected points of shape (n, 2), got {pts.shape}")
    if not np.isfinite(pts).all():
        bad = int(np.argwhere(~np.isfinite(pts).all(axis=1))[0, 0])
        raise DataError(f"non-finite point at index {bad}")
    return pts


class _JetTape(NamedTuple):
    """Intermediates of a jet forward pass, consumed by the reverse pass."""

    inputs: list[tuple]  # per layer: (A_in, G_in, H_in)
    hidden: list[tuple]  # per hidden layer: (T, T1, T2, GZ, HZ)
    need_hess: bool


def _forward_jets(net: DenseNet, pts: np.ndarray, need_hess: bool):
    n = pts.shape[0]
    a = pts
    g = np.tile(np.eye(2), (n, 1, 1))  # dA/dx at the input: identity
    h = np.zeros((n, 2, 2, 2)) if need_hess else None
    inputs, hidden = [], []
    last = net.n_layers - 1
    for l, (w, b) in enumerate(zip(net.weights, net.biases)):
        inputs.append((a, g, h))
        z = a @ w.T + b
        gz = np.einsum("jk,nkd->njd", w, g)
        hz = np.einsum("jk,nkde->njde", w, h) if need_hess else None
        if l == last:
            a, g, h = z, gz, hz
        else:
            t = np.tanh(z)
            t1 = 1.0 - t * t
            t2 = -2.0 * t * t1
            a = t
            g = t1[:, :, None] * gz
            if need_hess:
                h = (
                    t2[:, :, None, None] * gz[:, :, :, None] * gz[:, :, None, :]
                    + t1[:, :, None, None] * hz
                )
            hidden.append((t, t1, t2, gz, hz))
    values = a[:, 0]
    grads = g[:, 0, :]
    hesses = h[:, 0, :, :] if need_hess else None
    return JetBatch(values, grads, hesses), _JetTape(inputs, hidden, need_hess)


def _backward_jets(
    net: DenseNet,
    tape: _JetTape,
    d_values: np.ndarray | None,
    d_grads: np.ndarray | None,
    d_hesses: np.ndarray | None,
) -> ParamGradient:
    n = tape.inputs[0][0].shape[0]
    dz = np.zeros((n, 1)) if d_values is None else np.asarray(d_values, float).reshape(n, 1)
    dgz = np.zeros((n, 1, 2)) if d_grads is None else np.asarray(d_grads, float).reshape(n, 1, 2)
    if tape.need_hess:
        dhz = (
            np.zeros((n, 1, 2, 2))
            if d_hesses is None
            else np.asarray(d_hesses, float).reshape(n, 1, 2, 2)
        )
    else:
        dhz = None
    grad = ParamGradient.zeros(net)
    for l in range(net.n_layers - 1, -1, -1):
        w = net.weights[l]
        a_in, g_in, h_in = tape.inputs[l]
        grad.d_weights[l] += np.einsum("nj,nk->jk", dz, a_in)
        grad.d_weights[l] += np.einsum("njd,nkd->jk", dgz, g_in)
        grad.d_biases[l] += dz.sum(axis=0)
        if dhz is not None:
            grad.d_weights[l] += np.einsum("njde,nkde->jk", dhz, h_in)
        if l == 0:
            break
        da = dz @ w
        dg = np.einsum("njd,jk->nkd", dgz, w)
        dh = np.einsum("njde,jk->nkde", dhz, w) if dhz is not None else None
        # Reverse through the tanh jet update of layer l-1 (hidden layer).
        t, t1, t2, gz, hz = tape.hidden[l - 1]
        dt1 = (dg * gz).sum(axis=-1)
        dgz = t1[:, :, None] * dg
        if dh is not None:
            dt2 = np.einsum("njde,njd,nje->nj", dh, gz, gz)
            dgz += t2[:, :, None] * (
                np.einsum("njde,nje->njd", dh, gz) + np.einsum("njed,nje->njd", dh, gz)
            )
            dt1 += np.einsum("njde,njde->nj", dh, hz)
            dhz = t1[:, :, None, None] * dh
        else:
            dt2 = 0.0
        dz = da * t1 + dt1 * t2 + dt2 * (6.0 * t * t - 2.0) * t1
    return grad


def eval_jets(net: DenseNet, points, need_hess: bool = True) -> JetBatch:
    """Network value, input gradient and input Hessian over a point batch."""
    pts = _as_points(points)
    jets, _ = _forward_jets(net, pts, need_hess)
    return jets


def eval_jet(net: DenseNet, point) -> Jet2:
    """Single-point convenience wrapper around :func:`eval_jets`."""
    jets = eval_jets(net, np.asarray(point, float).reshape(1, 2))
    return Jet2(float(jets.values[0]), jets.grads[0].copy(), jets.hesses[0].copy())


def eval_values(net: DenseNet, points) -> np.ndarray:
    """Plain forward pass, values only."""
    pts = _as_points(points)
    a = pts
    last = net.n_layers - 1
    for l, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w.T + b
        a = z if l == last else np.tanh(z)
    return a[:, 0]


def _check_jets_finite(jets: JetBatch) -> None:
    ok = np.isfinite(jets.values)
    ok &= np.isfinite(jets.grads).all(axis=(1,))
    if jets.hesses is not None:
        ok &= np.isfinite(jets.hesses).all(axis=(1, 2))
    if not ok.all():
        bad = int(np.argwhere(~ok)[0, 0])
        raise NumericalOverflowError(f"non-finite network output at point index {bad}", bad)


def param_gradient(
    net: DenseNet,
    points,
    objective: Objective,
    need_hess: bool = True,
) -> tuple[float, ParamGradient]:
    """Exact parameter gradient of a scalar objective of the network's jets.

    The objective receives the JetBatch at ``points`` and returns the loss
    plus its partial derivatives with respect to values, gradients and
    Hessians (any of which may be None).  Contributions flowing through the
    gradient and Hessian outputs are accumulated exactly.
    """
    pts = _as_points(points)
    jets, tape = _forward_jets(net, pts, need_hess)
    _check_jets_finite(jets)
    loss, d_values, d_grads, d_hesses = objective(jets)
    if not np.isfinite(loss):
        for name, cot in (("values", d_values), ("grads", d_grads), ("hesses", d_hesses)):
            if cot is not None and not np.isfinite(cot).all():
                bad = int(np.argwhere(~np.isfinite(cot).reshape(len(pts), -1).all(axis=1))[0, 0])
                raise NumericalOverflowError(
                    f"non-finite objective cotangent ({name}) at point index {bad}", bad
                )
        raise NumericalOverflowError("non-finite objective value", None)
    if d_hesses is not None and not need_hess:
        raise ConfigurationError("objective returned Hessian cotangents but need_hess=False")
    grad = _backward_jets(net, tape, d_values, d_grads, d_hesses)
    return float(loss), grad


def value_param_gradient(
    net: DenseNet,
    points,
    objective: Callable[[np.ndarray], tuple[float, np.ndarray]],
) -> tuple[float, ParamGradient]:
    """Like :func:`param_gradient` for objectives of the values alone.

    Skips the jet machinery entirely (plain MLP backprop); used for boundary
    terms where only u(x_b) enters the cost.
    """
    pts = _as_points(points)
    acts = [pts]
    a = pts
    last = net.n_layers - 1
    for l, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w.T + b
        a = z if l == last else np.tanh(z)
        acts.append(a)
    values = a[:, 0]
    if not np.isfinite(values).all():
        bad = int(np.argwhere(~np.isfinite(values))[0, 0])
        raise NumericalOverflowError(f"non-finite network output at point index {bad}", bad)
    loss, d_values = objective(values)
    if not np.isfinite(loss):
        raise NumericalOverflowError("non-finite objective value", None)
    grad = ParamGradient.zeros(net)
    dz = np.asarray(d_values, float).reshape(-1, 1)
    for l in range(net.n_layers - 1, -1, -1):
        if l != net.n_layers - 1:
            t = acts[l + 1]
            dz = dz * (1.0 - t * t)
        grad.d_weights[l] += dz.T @ acts[l]
        grad.d_biases[l] += dz.sum(axis=0)
        dz = dz @ net.weights[l]
    return float(loss), grad
