"""Dense feed-forward network with hand-derived reverse-mode gradients.

The architecture is fixed by design: dense layers, ELU on every layer
except the last, Glorot-uniform weights, zero initial biases, float64
throughout.  ``forward`` returns a cache that ``backward`` consumes to
produce exact parameter gradients for any upstream output gradient.
"""

import numpy as np


class NumericOverflowError(FloatingPointError):
    """A forward pass produced a non-finite intermediate value."""


def elu(x):
    """Exponential linear unit: x for x > 0, exp(x) - 1 otherwise."""
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, x, np.expm1(np.minimum(x, 0.0)))


def elu_grad(x):
    """Derivative of :func:`elu`; equals 1 at the origin (both limits agree)."""
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, 1.0, np.exp(np.minimum(x, 0.0)))


def glorot_uniform_init(fan_in, fan_out, rng):
    """(fan_out, fan_in) matrix of Uniform(-L, L) entries, L = sqrt(6/(fan_in+fan_out))."""
    if fan_in < 1 or fan_out < 1:
        raise ValueError(f"fans must be >= 1, got ({fan_in}, {fan_out})")
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


class DenseLayer:
    """One dense layer: weights (out_units, in_units) and biases (out_units,)."""

    def __init__(self, weights, biases):
        weights = np.asarray(weights, dtype=float)
        biases = np.asarray(biases, dtype=float)
        if weights.ndim != 2 or biases.ndim != 1:
            raise ValueError("weights must be 2D and biases 1D")
        if weights.shape[0] != biases.shape[0]:
            raise ValueError(
                f"bias length {biases.shape[0]} does not match {weights.shape[0]} output units"
            )
        if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(biases))):
            raise ValueError("layer parameters must be finite")
        self.weights = weights
        self.biases = biases

    @property
    def in_units(self):
        return self.weights.shape[1]

    @property
    def out_units(self):
        return self.weights.shape[0]


class MlpModel:
    """Ordered dense layers; ELU after each layer except the last."""

    def __init__(self, layers):
        layers = list(layers)
        if not layers:
            raise ValueError("model needs at least one layer")
        for a, b in zip(layers, layers[1:]):
            if a.out_units != b.in_units:
                raise ValueError(
                    f"layer shapes do not compose: {a.out_units} -> {b.in_units}"
                )
        self.layers = layers

    @property
    def input_dim(self):
        return self.layers[0].in_units

    @property
    def output_dim(self):
        return self.layers[-1].out_units

    def parameters(self):
        """Flat parameter list [W1, b1, W2, b2, ...]; arrays are live views."""
        params = []
        for layer in self.layers:
            params.append(layer.weights)
            params.append(layer.biases)
        return params

    @classmethod
    def build(cls, input_dim, units, layer_count, rng, output_dim=None):
        """Fresh model: Glorot-uniform weights, zero biases.

        `layer_count` dense layers; hidden widths are `units`, the last
        layer maps to `output_dim` (defaults to `input_dim`).
        """
        if input_dim < 1 or units < 1 or layer_count < 1:
            raise ValueError("input_dim, units and layer_count must be >= 1")
        output_dim = input_dim if output_dim is None else int(output_dim)
        sizes = [int(input_dim)] + [int(units)] * (layer_count - 1) + [output_dim]
        layers = []
        for fan_in, fan_out in zip(sizes, sizes[1:]):
            weights = glorot_uniform_init(fan_in, fan_out, rng)
            layers.append(DenseLayer(weights, np.zeros(fan_out)))
        return cls(layers)


class ForwardCache:
    """Per-layer inputs and pre-activations from one forward pass."""

    __slots__ = ("model", "inputs", "preacts")

    def __init__(self, model, inputs, preacts):
        self.model = model
        self.inputs = inputs
        self.preacts = preacts


def forward(model, inputs):
    """Batched forward pass; returns (outputs, cache).

    inputs is (batch, input_dim); outputs is (batch, output_dim).
    """
    x = np.asarray(inputs, dtype=float)
    if x.ndim != 2 or x.shape[1] != model.input_dim:
        raise ValueError(
            f"inputs must be (batch, {model.input_dim}), got {x.shape}"
        )
    if not np.all(np.isfinite(x)):
        raise ValueError("inputs must be finite")
    last = len(model.layers) - 1
    layer_inputs = []
    preacts = []
    a = x
    for k, layer in enumerate(model.layers):
        layer_inputs.append(a)
        z = a @ layer.weights.T + layer.biases
        if not np.all(np.isfinite(z)):
            raise NumericOverflowError(f"non-finite pre-activation in layer {k}")
        preacts.append(z)
        a = elu(z) if k < last else z
    return a, ForwardCache(model, layer_inputs, preacts)


def backward(model, cache, d_outputs):
    """Exact parameter gradients given dL/dOutputs from a matching forward.

    Returns one (dW, db) pair per layer, in model order.
    """
    if cache.model is not model or len(cache.preacts) != len(model.layers):
        raise ValueError("cache does not belong to this model")
    d = np.asarray(d_outputs, dtype=float)
    if d.shape != cache.preacts[-1].shape:
        raise ValueError(
            f"d_outputs must be {cache.preacts[-1].shape}, got {d.shape}"
        )
    last = len(model.layers) - 1
    grads = [None] * len(model.layers)
    for k in range(last, -1, -1):
        dz = d if k == last else d * elu_grad(cache.preacts[k])
        grads[k] = (dz.T @ cache.inputs[k], dz.sum(axis=0))
        if k:
            d = dz @ model.layers[k].weights
    return grads
