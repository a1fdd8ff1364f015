"""Training loop: input generation, forward/loss/backward/step, checkpoints.

The training budget is counted the way the experiments state it: for an
input dimension of one, ``total_inputs`` counts scalar input values; for
wider models it counts input vectors.  Either way one optimizer step
consumes ``batch_rows`` input vectors, so the step count is
``total_inputs // batch_rows``.
"""

from dataclasses import dataclass, field

import numpy as np

from .grids import EvalGrid, EvalGrid2d
from .loss import KdeConfig, total_loss, total_loss_2d
from .nn import DenseLayer, MlpModel, forward, backward
from .optim import AdamState, adam_step
from .targets import make_target, tabulate

CHECKPOINT_MAGIC = "NNSAMPLER"
CHECKPOINT_VERSION = "v1"


class CheckpointError(ValueError):
    """Malformed checkpoint file."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint written by an unsupported format version."""


class TrainingDivergedError(FloatingPointError):
    """The loss became non-finite; carries the offending step index."""

    def __init__(self, step):
        self.step = step
        super().__init__(f"non-finite loss at step {step}")


@dataclass
class TrainConfig:
    input_dim: int = 1
    layer_count: int = 5
    units: int = 64
    target_name: str = "laplace"
    target_params: dict = field(default_factory=dict)
    batch_rows: int = 32
    total_inputs: int = 100_000
    seed: int = 0
    grid_lo: float = -10.0
    grid_hi: float = 10.0
    grid_points: int = 401
    kde: KdeConfig = field(default_factory=KdeConfig)
    well_slope: float = 1.0
    adam_lr: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    output_dim: int | None = None
    checkpoint_path: str | None = None
    log_every: int = 1

    def __post_init__(self):
        if self.input_dim < 1:
            raise ValueError("input_dim must be >= 1")
        if self.layer_count < 1:
            raise ValueError("layer_count must be >= 1")
        if not self.total_inputs >= self.batch_rows >= 1:
            raise ValueError("need total_inputs >= batch_rows >= 1")
        if self.log_every < 1:
            raise ValueError("log_every must be >= 1")

    def steps(self):
        return self.total_inputs // self.batch_rows


def make_input_batch(m, n, rng):
    """(m, n) batch of i.i.d. Uniform(-1, 1) input values."""
    if m < 1 or n < 1:
        raise ValueError(f"batch shape must be positive, got ({m}, {n})")
    return rng.uniform(-1.0, 1.0, size=(m, n))


def train(cfg):
    """Train a fresh model per the config; returns (model, history).

    history is a list of (step, LossBreakdown) pairs recorded every
    ``log_every`` steps plus the final step, with the loss measured before
    the parameter update.  If ``checkpoint_path`` is set the final model is
    saved there.
    """
    target = make_target(cfg.target_name, **cfg.target_params)
    if target.dim == 1:
        grid = EvalGrid(cfg.grid_lo, cfg.grid_hi, cfg.grid_points)
        loss_fn = total_loss
    else:
        if cfg.input_dim % 2:
            raise ValueError("2D targets need an even input_dim (coordinate pairs)")
        grid = EvalGrid2d.square(cfg.grid_lo, cfg.grid_hi, cfg.grid_points)
        loss_fn = total_loss_2d
    tab = tabulate(target, grid)

    rng = np.random.default_rng(cfg.seed)
    output_dim = cfg.input_dim if cfg.output_dim is None else cfg.output_dim
    model = MlpModel.build(cfg.input_dim, cfg.units, cfg.layer_count, rng, output_dim)
    state = AdamState.init(
        model.parameters(),
        lr=cfg.adam_lr,
        beta1=cfg.adam_beta1,
        beta2=cfg.adam_beta2,
        eps_hat=cfg.adam_eps,
    )

    history = []
    n_steps = cfg.steps()
    for step in range(1, n_steps + 1):
        x = make_input_batch(cfg.batch_rows, cfg.input_dim, rng)
        y, cache = forward(model, x)
        breakdown, d_y = loss_fn(y, tab, grid, cfg.kde, cfg.well_slope)
        if not np.isfinite(breakdown.total):
            raise TrainingDivergedError(step)
        grads_pairs = backward(model, cache, d_y)
        flat_grads = [g for pair in grads_pairs for g in pair]
        adam_step(state, model.parameters(), flat_grads)
        if step % cfg.log_every == 0 or step == n_steps:
            history.append((step, breakdown))

    if cfg.checkpoint_path:
        save_checkpoint(model, cfg.checkpoint_path)
    return model, history


def write_history_csv(history, path):
    """Loss history as CSV: step,row_term,col_term,well_term,total."""
    lines = ["step,row_term,col_term,well_term,total"]
    for step, bd in history:
        lines.append(
            f"{step},{bd.row_term:.17g},{bd.col_term:.17g},"
            f"{bd.well_term:.17g},{bd.total:.17g}"
        )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def save_checkpoint(model, path):
    """Versioned plain-text checkpoint; 17 significant digits round-trip
    float64 exactly."""
    lines = [f"{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}", f"layers {len(model.layers)}"]
    for layer in model.layers:
        rows, cols = layer.weights.shape
        lines.append(f"{rows} {cols}")
        for row in layer.weights:
            lines.append(" ".join(f"{v:.17g}" for v in row))
        lines.append(" ".join(f"{v:.17g}" for v in layer.biases))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


class _TokenReader:
    """Whitespace tokens with line numbers, for parse errors that point
    somewhere useful."""

    def __init__(self, text):
        self.tokens = []
        for line_no, line in enumerate(text.splitlines(), start=1):
            for tok in line.split():
                self.tokens.append((line_no, tok))
        self.pos = 0
        self.last_line = 1

    def next(self, what):
        if self.pos >= len(self.tokens):
            raise CheckpointError(
                f"line {self.last_line}: truncated checkpoint, expected {what}"
            )
        line_no, tok = self.tokens[self.pos]
        self.pos += 1
        self.last_line = line_no
        return line_no, tok

    def next_int(self, what):
        line_no, tok = self.next(what)
        try:
            return int(tok)
        except ValueError:
            raise CheckpointError(f"line {line_no}: expected {what}, got {tok!r}") from None

    def next_float(self, what):
        line_no, tok = self.next(what)
        try:
            return float(tok)
        except ValueError:
            raise CheckpointError(f"line {line_no}: expected {what}, got {tok!r}") from None

    def exhausted(self):
        return self.pos >= len(self.tokens)


def load_checkpoint(path):
    """Load a checkpoint written by :func:`save_checkpoint` (bit-exact)."""
    with open(path) as fh:
        text = fh.read()
    reader = _TokenReader(text)
    if reader.exhausted():
        raise CheckpointError("line 1: empty checkpoint file")
    line_no, magic = reader.next("header magic")
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError(f"line {line_no}: bad header magic {magic!r}")
    line_no, version = reader.next("format version")
    if version != CHECKPOINT_VERSION:
        raise CheckpointVersionError(
            f"line {line_no}: unsupported checkpoint version {version!r}"
        )
    line_no, tok = reader.next("'layers'")
    if tok != "layers":
        raise CheckpointError(f"line {line_no}: expected 'layers', got {tok!r}")
    n_layers = reader.next_int("layer count")
    if n_layers < 1:
        raise CheckpointError(f"line {reader.last_line}: layer count must be >= 1")
    layers = []
    for _ in range(n_layers):
        rows = reader.next_int("row count")
        cols = reader.next_int("column count")
        if rows < 1 or cols < 1:
            raise CheckpointError(f"line {reader.last_line}: layer dims must be positive")
        weights = np.empty((rows, cols))
        for r in range(rows):
            for c in range(cols):
                weights[r, c] = reader.next_float("weight")
        biases = np.empty(rows)
        for r in range(rows):
            biases[r] = reader.next_float("bias")
        layers.append(DenseLayer(weights, biases))
    if not reader.exhausted():
        line_no, tok = reader.next("end of file")
        raise CheckpointError(f"line {line_no}: trailing data {tok!r}")
    return MlpModel(layers)


def sample_model(model, count, rng, pairs=False, batch_limit=4096):
    """Draw samples by pushing fresh uniform inputs through the model.

    Feeds ceil(count / values_per_vector) input vectors, concatenates the
    outputs row-major and truncates.  With ``pairs=True`` consecutive
    output values form (y1, y2) points and `count` counts points.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    out_dim = model.output_dim
    per_vector = out_dim // 2 if pairs else out_dim
    if pairs and (out_dim % 2 or per_vector == 0):
        raise ValueError("pair sampling needs an even output dimension >= 2")
    n_vectors = -(-count // per_vector)
    chunks = []
    remaining = n_vectors
    while remaining > 0:
        batch = min(remaining, batch_limit)
        x = rng.uniform(-1.0, 1.0, size=(batch, model.input_dim))
        y, _ = forward(model, x)
        chunks.append(y.reshape(-1))
        remaining -= batch
    flat = np.concatenate(chunks)
    if pairs:
        return flat.reshape(-1, 2)[:count]
    return flat[:count]
