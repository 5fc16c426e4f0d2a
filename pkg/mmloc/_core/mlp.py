# Copyright 2026 mmloc contributors
#
# Description:
# mmloc Fully connected network
#
# ReLU hidden layers, sigmoid output, mean squared error loss, ADAM updates.
# Samples are rows: a layer maps (batch, n_in) to (batch, n_out) as x @ W + b.

import os
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import ConfigError, DimensionError, DivergenceError
from .log import Log

# Smallest feature range used for normalisation
RANGE_FLOOR = 1e-9

# Fraction of the observed range added on each side so training targets stay off the sigmoid asymptotes
RANGE_MARGIN = 0.05


@dataclass(frozen=True, eq=False)
class NormalizationSpec:
    """
    Per-feature min/max scaling of inputs and targets to [0, 1].
    """

    in_min: np.ndarray
    in_max: np.ndarray
    out_min: np.ndarray
    out_max: np.ndarray

    def __post_init__(self) -> None:
        for lo, hi, name in ((self.in_min, self.in_max, "input"), (self.out_min, self.out_max, "output")):
            if np.shape(lo) != np.shape(hi):
                raise DimensionError(f"{name} min/max shapes differ: {np.shape(lo)} vs {np.shape(hi)}")
            if not np.all(np.asarray(hi) > np.asarray(lo)):
                raise DimensionError(f"{name} max must exceed min for every feature")

    @staticmethod
    def _range(v: np.ndarray, margin: float) -> tuple[np.ndarray, np.ndarray]:
        lo = v.min(axis=0)
        hi = v.max(axis=0)
        width = np.maximum(hi - lo, RANGE_FLOOR * np.maximum(1.0, np.abs(lo)))
        mid = 0.5 * (hi + lo)
        half = 0.5 * width * (1.0 + 2.0 * margin)
        return mid - half, mid + half

    @staticmethod
    def fit(inputs: np.ndarray, targets: np.ndarray) -> "NormalizationSpec":
        """
        Ranges from training data. Degenerate (constant) features get a tiny symmetric range;
        target ranges are widened by RANGE_MARGIN on each side.

        :param inputs: (samples, d) array.
        :param targets: (samples, d') array.
        :rtype: NormalizationSpec
        """
        in_min, in_max = NormalizationSpec._range(np.atleast_2d(inputs), 0.0)
        out_min, out_max = NormalizationSpec._range(np.atleast_2d(targets), RANGE_MARGIN)
        return NormalizationSpec(in_min=in_min, in_max=in_max, out_min=out_min, out_max=out_max)

    def normalize_inputs(self, v: np.ndarray) -> np.ndarray:
        return (v - self.in_min) / (self.in_max - self.in_min)

    def denormalize_inputs(self, v: np.ndarray) -> np.ndarray:
        return v * (self.in_max - self.in_min) + self.in_min

    def normalize_targets(self, v: np.ndarray) -> np.ndarray:
        return (v - self.out_min) / (self.out_max - self.out_min)

    def denormalize_targets(self, v: np.ndarray) -> np.ndarray:
        return v * (self.out_max - self.out_min) + self.out_min


@dataclass(frozen=True, eq=False)
class MlpParams:
    """
    Trained network. ``kind`` records what the outputs mean (``residual``, ``mapping`` or ``fp``).
    """

    layer_sizes: tuple[int, ...]
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    norm: NormalizationSpec | None = None
    kind: str = "residual"

    def __post_init__(self) -> None:
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 2:
            raise DimensionError(f"need at least an input and an output layer, got {sizes}")
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise DimensionError(f"{len(self.weights)} weight and {len(self.biases)} bias arrays for layer sizes {sizes}")
        for k, (w, b) in enumerate(zip(self.weights, self.biases, strict=True)):
            if w.shape != (sizes[k], sizes[k + 1]):
                raise DimensionError(f"layer {k}: weight shape {w.shape}, expected {(sizes[k], sizes[k + 1])}")
            if b.shape != (sizes[k + 1],):
                raise DimensionError(f"layer {k}: bias shape {b.shape}, expected {(sizes[k + 1],)}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise DivergenceError(f"layer {k} has non-finite parameters")
        if self.norm is not None and (self.norm.in_min.shape != (sizes[0],) or self.norm.out_min.shape != (sizes[-1],)):
            raise DimensionError(f"normalisation does not match layer sizes {sizes}")
        object.__setattr__(self, "layer_sizes", sizes)
        object.__setattr__(self, "weights", tuple(self.weights))
        object.__setattr__(self, "biases", tuple(self.biases))

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.layer_sizes[-1]

    @staticmethod
    def initialize(layer_sizes: list[int] | tuple[int, ...], seed: int = 0, kind: str = "residual") -> "MlpParams":
        """
        He-initialised weights, zero biases.
        """
        rng = np.random.default_rng(seed)
        ws = []
        bs = []
        for n_in, n_out in zip(layer_sizes[:-1], layer_sizes[1:], strict=True):
            ws.append(rng.standard_normal((n_in, n_out)) * np.sqrt(2.0 / n_in))
            bs.append(np.zeros(n_out))
        return MlpParams(layer_sizes=tuple(layer_sizes), weights=tuple(ws), biases=tuple(bs), kind=kind)

    def with_values(self, weights: list[np.ndarray], biases: list[np.ndarray], norm: NormalizationSpec | None = None) -> "MlpParams":
        return MlpParams(
            layer_sizes=self.layer_sizes,
            weights=tuple(w.copy() for w in weights),
            biases=tuple(b.copy() for b in biases),
            norm=self.norm if norm is None else norm,
            kind=self.kind,
        )


def _check_input(params: MlpParams, x: np.ndarray) -> np.ndarray:
    x2 = np.atleast_2d(np.asarray(x, dtype=float))
    if x2.shape[1] != params.n_inputs:
        raise DimensionError(f"network expects {params.n_inputs} inputs, got {x2.shape[1]}")
    return x2


def _forward_cache(weights: tuple[np.ndarray, ...] | list[np.ndarray], biases: tuple[np.ndarray, ...] | list[np.ndarray], x: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
    acts = [x]
    pre = []
    last = len(weights) - 1
    for k, (w, b) in enumerate(zip(weights, biases, strict=True)):
        z = acts[-1] @ w + b
        pre.append(z)
        acts.append(expit(z) if k == last else np.maximum(z, 0.0))
    return acts, pre


def mlp_forward(params: MlpParams, x: np.ndarray) -> np.ndarray:
    """
    Network output for normalised inputs.

    :param params: Network.
    :type params: MlpParams
    :param x: One input vector or a (batch, d) array, already normalised.
    :raises DimensionError: wrong input width
    :return: Outputs in (0, 1), shaped like the input (vector in, vector out).
    :rtype: numpy.ndarray
    """
    x2 = _check_input(params, x)
    acts, _ = _forward_cache(params.weights, params.biases, x2)
    out = acts[-1]
    return out[0] if np.ndim(x) == 1 else out


def predict(params: MlpParams, x: np.ndarray) -> np.ndarray:
    """
    Raw inputs to raw outputs through the stored normalisation.

    :raises ConfigError: the network carries no normalisation
    """
    if params.norm is None:
        raise ConfigError("network has no normalisation spec")
    y = mlp_forward(params, params.norm.normalize_inputs(np.asarray(x, dtype=float)))
    return params.norm.denormalize_targets(y)


def loss_and_grad(params: MlpParams, x: np.ndarray, y: np.ndarray) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """
    Loss (1/T) sum ||y_hat - y||^2 and its gradients by backpropagation.

    :param x: (T, d) normalised inputs.
    :param y: (T, d') normalised targets.
    :return: (loss, weight gradients, bias gradients)
    :rtype: tuple[float, list[numpy.ndarray], list[numpy.ndarray]]
    """
    x2 = _check_input(params, x)
    y2 = np.atleast_2d(y)
    acts, pre = _forward_cache(params.weights, params.biases, x2)
    return _backprop(params.weights, acts, pre, y2)


def _backprop(weights: tuple[np.ndarray, ...] | list[np.ndarray], acts: list[np.ndarray], pre: list[np.ndarray], y: np.ndarray) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    n = y.shape[0]
    out = acts[-1]
    diff = out - y
    loss = float(np.sum(diff * diff) / n)

    delta = (2.0 / n) * diff * out * (1.0 - out)
    gw: list[np.ndarray] = [np.empty(0)] * len(weights)
    gb: list[np.ndarray] = [np.empty(0)] * len(weights)
    for k in range(len(weights) - 1, -1, -1):
        gw[k] = acts[k].T @ delta
        gb[k] = delta.sum(axis=0)
        if k > 0:
            delta = (delta @ weights[k].T) * (pre[k - 1] > 0.0)
    return loss, gw, gb


@dataclass(frozen=True)
class TrainingConfig:
    epochs: int = 500
    batch_size: int = 128
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    patience: int = 50
    seed: int = 0
    log_interval: int = 50

    def __post_init__(self) -> None:
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError(f"epochs and batch_size must be >= 1, got {self.epochs}, {self.batch_size}")
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")


@dataclass(frozen=True, eq=False)
class TrainResult:
    params: MlpParams
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    best_epoch: int = 0


def train_mlp(
    inputs: np.ndarray,
    targets: np.ndarray,
    layer_sizes: list[int] | tuple[int, ...],
    cfg: TrainingConfig,
    val: tuple[np.ndarray, np.ndarray] | None = None,
    kind: str = "residual",
) -> TrainResult:
    """
    Fit a network with mini-batch ADAM.

    The normalisation is fitted on ``inputs``/``targets`` only and frozen. With a validation pair the
    parameters of the epoch with the lowest validation loss are returned and training stops after
    ``cfg.patience`` epochs without improvement.

    :param inputs: Raw training inputs (T, d).
    :param targets: Raw training targets (T, d').
    :param layer_sizes: Sizes from input to output layer.
    :param cfg: Optimiser settings; ``cfg.seed`` fixes initial weights and batch order.
    :type cfg: TrainingConfig
    :param val: Raw validation inputs and targets.
    :raises DivergenceError: non-finite loss
    :rtype: TrainResult
    """
    x = np.atleast_2d(np.asarray(inputs, dtype=float))
    y = np.atleast_2d(np.asarray(targets, dtype=float))
    if x.shape[0] != y.shape[0] or x.shape[0] < 1:
        raise DimensionError(f"inputs and targets must have the same non-zero number of rows, got {x.shape[0]} and {y.shape[0]}")
    if layer_sizes[0] != x.shape[1] or layer_sizes[-1] != y.shape[1]:
        raise DimensionError(f"layer sizes {list(layer_sizes)} do not match data widths {x.shape[1]} -> {y.shape[1]}")

    norm = NormalizationSpec.fit(x, y)
    xn = norm.normalize_inputs(x)
    yn = norm.normalize_targets(y)
    if val is not None:
        xv = norm.normalize_inputs(np.atleast_2d(val[0]))
        yv = norm.normalize_targets(np.atleast_2d(val[1]))

    init = MlpParams.initialize(layer_sizes, seed=cfg.seed, kind=kind)
    weights = [w.copy() for w in init.weights]
    biases = [b.copy() for b in init.biases]
    mw = [np.zeros_like(w) for w in weights]
    vw = [np.zeros_like(w) for w in weights]
    mb = [np.zeros_like(b) for b in biases]
    vb = [np.zeros_like(b) for b in biases]

    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(0xBA,)))
    n = x.shape[0]
    step = 0
    train_hist: list[float] = []
    val_hist: list[float] = []
    best = (float("inf"), 0, [w.copy() for w in weights], [b.copy() for b in biases])

    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            acts, pre = _forward_cache(weights, biases, xn[idx])
            loss, gw, gb = _backprop(weights, acts, pre, yn[idx])
            if not np.isfinite(loss):
                raise DivergenceError(f"non-finite training loss at epoch {epoch}")
            total += loss * idx.size
            step += 1
            c1 = 1.0 - cfg.beta1**step
            c2 = 1.0 - cfg.beta2**step
            for p, g, m, v in zip(weights + biases, gw + gb, mw + mb, vw + vb, strict=True):
                m *= cfg.beta1
                m += (1.0 - cfg.beta1) * g
                v *= cfg.beta2
                v += (1.0 - cfg.beta2) * g * g
                p -= cfg.learning_rate * (m / c1) / (np.sqrt(v / c2) + cfg.eps)

        train_hist.append(total / n)
        if val is not None:
            vl = float(np.mean(np.sum((_forward_cache(weights, biases, xv)[0][-1] - yv) ** 2, axis=1)))
            if not np.isfinite(vl):
                raise DivergenceError(f"non-finite validation loss at epoch {epoch}")
            val_hist.append(vl)
            if vl < best[0]:
                best = (vl, epoch, [w.copy() for w in weights], [b.copy() for b in biases])
            elif epoch - best[1] >= cfg.patience:
                Log.info(f"early stop at epoch {epoch}, best validation loss {best[0]:.4e} at epoch {best[1]}", group="mmloc.nn")
                break

        if cfg.log_interval > 0 and epoch % cfg.log_interval == 0:
            msg = f"epoch {epoch}: train {train_hist[-1]:.4e}"
            if val_hist:
                msg += f", val {val_hist[-1]:.4e}"
            Log.info(msg, group="mmloc.nn")

    if val is not None:
        _, best_epoch, weights, biases = best
    else:
        best_epoch = len(train_hist) - 1
    params = init.with_values(weights, biases, norm=norm)
    return TrainResult(params=params, train_loss=train_hist, val_loss=val_hist, best_epoch=best_epoch)


def save_network(path: str, params: MlpParams) -> None:
    """
    Store a network as a ``.npz`` archive with arrays W0.., b0.., layer_sizes, in_min, in_max,
    out_min, out_max and kind.
    """
    arrays: dict[str, np.ndarray] = {"layer_sizes": np.asarray(params.layer_sizes, dtype=np.int64), "kind": np.array(params.kind)}
    for k, (w, b) in enumerate(zip(params.weights, params.biases, strict=True)):
        arrays[f"W{k}"] = w
        arrays[f"b{k}"] = b
    if params.norm is not None:
        arrays["in_min"] = params.norm.in_min
        arrays["in_max"] = params.norm.in_max
        arrays["out_min"] = params.norm.out_min
        arrays["out_max"] = params.norm.out_max
    with open(path, "wb") as f:
        np.savez(f, **arrays)


def load_network(path: str) -> MlpParams:
    """
    :raises ConfigError: missing file or archive without the expected arrays
    :rtype: MlpParams
    """
    if not os.path.exists(path):
        raise ConfigError(f"Network file {path} does not exist")
    with np.load(path, allow_pickle=False) as z:
        try:
            sizes = tuple(int(s) for s in z["layer_sizes"])
            weights = tuple(z[f"W{k}"] for k in range(len(sizes) - 1))
            biases = tuple(z[f"b{k}"] for k in range(len(sizes) - 1))
            kind = str(z["kind"])
        except KeyError as e:
            raise ConfigError(f"{path} is not a network archive: {e}") from e
        norm = None
        if "in_min" in z.files:
            norm = NormalizationSpec(in_min=z["in_min"], in_max=z["in_max"], out_min=z["out_min"], out_max=z["out_max"])
    return MlpParams(layer_sizes=sizes, weights=weights, biases=biases, norm=norm, kind=kind)


__all__ = [
    "RANGE_FLOOR",
    "RANGE_MARGIN",
    "NormalizationSpec",
    "MlpParams",
    "mlp_forward",
    "predict",
    "loss_and_grad",
    "TrainingConfig",
    "TrainResult",
    "train_mlp",
    "save_network",
    "load_network",
]
