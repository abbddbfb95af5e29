"""Three-layer feed-forward network with tan-sigmoid units, trained by back-propagation.

Everything here is plain numpy: forward pass, analytic gradients of the batch
MSE, and full-batch gradient descent with momentum and validation-based early
stopping.  Batches are 2-D arrays with one sample per row.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

SATURATION = 20.0
ACTIVATIONS = ("tansig", "linear")


def tansig(n):
    """Symmetric sigmoid 2/(1+exp(-2n)) - 1, exactly odd and clamped to ±1 past |n| > 20."""
    n = np.asarray(n, dtype=float)
    a = np.abs(n)
    with np.errstate(over="ignore"):
        out = 2.0 / (1.0 + np.exp(-2.0 * np.minimum(a, SATURATION))) - 1.0
    out = np.where(a > SATURATION, 1.0, out)
    out = np.copysign(out, n)
    return float(out) if out.ndim == 0 else out


def tansig_prime(a):
    """Derivative of tansig expressed through its output ``a``."""
    a = np.asarray(a, dtype=float)
    out = 1.0 - a * a
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class NetworkSpec:
    n_in: int = 12
    n_hidden: int = 20
    n_out: int = 1
    output_activation: str = "tansig"

    def __post_init__(self) -> None:
        if min(self.n_in, self.n_hidden, self.n_out) < 1:
            raise ValueError("layer sizes must be >= 1")
        if self.output_activation not in ACTIVATIONS:
            raise ValueError(f"output_activation must be one of {ACTIVATIONS}")

    @property
    def hidden_activation(self) -> str:
        return "tansig"


@dataclass
class Network:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    spec: NetworkSpec

    def __post_init__(self) -> None:
        s = self.spec
        self.W1 = np.asarray(self.W1, dtype=float).reshape(s.n_hidden, s.n_in)
        self.b1 = np.asarray(self.b1, dtype=float).reshape(s.n_hidden)
        self.W2 = np.asarray(self.W2, dtype=float).reshape(s.n_out, s.n_hidden)
        self.b2 = np.asarray(self.b2, dtype=float).reshape(s.n_out)
        if not all(np.isfinite(p).all() for p in self.params()):
            raise ValueError("network parameters must be finite")

    def params(self) -> tuple[np.ndarray, ...]:
        return (self.W1, self.b1, self.W2, self.b2)

    def copy(self) -> "Network":
        return Network(*(p.copy() for p in self.params()), spec=self.spec)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return self.spec == other.spec and all(
            np.array_equal(a, b) for a, b in zip(self.params(), other.params())
        )


@dataclass
class Gradients:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray

    def arrays(self) -> tuple[np.ndarray, ...]:
        return (self.W1, self.b1, self.W2, self.b2)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    momentum: float = 0.9
    max_iterations: int = 1000
    mse_goal: float = 0.0
    patience: int = 6
    validation_fraction: float = 0.0
    seed: int = 42

    def __post_init__(self) -> None:
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must lie in [0, 1)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.mse_goal < 0:
            raise ValueError("mse_goal must be non-negative")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must lie in [0, 1)")


STOP_REASONS = ("goal_reached", "patience_exhausted", "max_iterations")


@dataclass
class TrainReport:
    train_mse: list[float] = field(default_factory=list)
    val_mse: list[float] = field(default_factory=list)
    stop_reason: str = "max_iterations"
    stopped_at_epoch: int = 0
    best_epoch: int = 0

    def to_csv(self) -> str:
        lines = ["epoch,train_mse,val_mse"]
        for i, tr in enumerate(self.train_mse):
            va = repr(self.val_mse[i]) if i < len(self.val_mse) else ""
            lines.append(f"{i + 1},{tr!r},{va}")
        return "\n".join(lines) + "\n"


def init_network(spec: NetworkSpec, seed: Union[int, np.random.SeedSequence] = 42) -> Network:
    rng = np.random.default_rng(seed)
    r1 = 1.0 / np.sqrt(spec.n_in)
    r2 = 1.0 / np.sqrt(spec.n_hidden)
    W1 = rng.uniform(-r1, r1, size=(spec.n_hidden, spec.n_in))
    W2 = rng.uniform(-r2, r2, size=(spec.n_out, spec.n_hidden))
    return Network(W1, np.zeros(spec.n_hidden), W2, np.zeros(spec.n_out), spec)


def _as_batch(x, width: int, what: str) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.ndim != 2 or arr.shape[1] != width:
        raise ValueError(f"{what} width {arr.shape[-1]} does not match network ({width})")
    return arr, single


def _out_act(z: np.ndarray, spec: NetworkSpec) -> np.ndarray:
    return tansig(z) if spec.output_activation == "tansig" else z


def forward(net: Network, x) -> tuple[np.ndarray, np.ndarray]:
    """Return (outputs, hidden activations) for one sample or a batch of rows."""
    X, single = _as_batch(x, net.spec.n_in, "input")
    H = np.atleast_2d(tansig(X @ net.W1.T + net.b1))
    Y = np.atleast_2d(_out_act(H @ net.W2.T + net.b2, net.spec))
    if single:
        return Y[0], H[0]
    return Y, H


def predict(net: Network, x) -> np.ndarray:
    return forward(net, x)[0]


def mse(outputs, targets) -> float:
    Y = np.asarray(outputs, dtype=float)
    T = np.asarray(targets, dtype=float)
    if Y.shape != T.shape:
        raise ValueError(f"shape mismatch: outputs {Y.shape} vs targets {T.shape}")
    if Y.size == 0:
        raise ValueError("mse of an empty batch")
    return float(np.mean((Y - T) ** 2))


def backprop_gradients(net: Network, X, T) -> Gradients:
    """Exact gradient of the batch MSE with respect to every weight and bias."""
    X, _ = _as_batch(X, net.spec.n_in, "input")
    T, _ = _as_batch(T, net.spec.n_out, "target")
    if X.shape[0] != T.shape[0]:
        raise ValueError("inputs and targets differ in sample count")
    if X.shape[0] == 0:
        raise ValueError("empty batch")
    Y, H = forward(net, X)
    dY = 2.0 * (Y - T) / Y.size
    dZ2 = dY * tansig_prime(Y) if net.spec.output_activation == "tansig" else dY
    dZ1 = (dZ2 @ net.W2) * tansig_prime(H)
    return Gradients(dZ1.T @ X, dZ1.sum(axis=0), dZ2.T @ H, dZ2.sum(axis=0))


def _holdout(n: int, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    n_val = int(round(fraction * n))
    n_val = min(n_val, n - 1)
    order = np.random.default_rng(seed).permutation(n)
    return np.sort(order[n_val:]), np.sort(order[:n_val])


def train(net: Network, X, T, config: TrainConfig = TrainConfig()) -> tuple[Network, TrainReport]:
    """Full-batch gradient descent with momentum; one update per epoch.

    Stops when the training MSE reaches ``mse_goal`` (if positive), when the
    validation MSE has not improved for ``patience`` epochs (the best-epoch
    weights are returned), or after ``max_iterations`` epochs.
    """
    X, _ = _as_batch(X, net.spec.n_in, "input")
    T, _ = _as_batch(T, net.spec.n_out, "target")
    if X.shape[0] == 0:
        raise ValueError("empty training set")
    if X.shape[0] != T.shape[0]:
        raise ValueError("inputs and targets differ in sample count")

    tr_idx, va_idx = _holdout(X.shape[0], config.validation_fraction, config.seed)
    Xt, Tt = X[tr_idx], T[tr_idx]
    Xv, Tv = X[va_idx], T[va_idx]
    use_val = len(va_idx) > 0

    net = net.copy()
    params = net.params()
    velocity = [np.zeros_like(p) for p in params]
    report = TrainReport()
    best_val = np.inf
    best_params: Optional[tuple[np.ndarray, ...]] = None
    stale = 0

    for epoch in range(1, config.max_iterations + 1):
        grads = backprop_gradients(net, Xt, Tt).arrays()
        for p, v, g in zip(params, velocity, grads):
            v *= config.momentum
            v -= config.learning_rate * g
            p += v
        train_err = mse(forward(net, Xt)[0], Tt)
        if not np.isfinite(train_err):
            raise FloatingPointError(f"training diverged at epoch {epoch}")
        report.train_mse.append(train_err)
        report.stopped_at_epoch = epoch

        if use_val:
            val_err = mse(forward(net, Xv)[0], Tv)
            report.val_mse.append(val_err)
            if val_err < best_val:
                best_val = val_err
                best_params = tuple(p.copy() for p in params)
                report.best_epoch = epoch
                stale = 0
            else:
                stale += 1
        elif train_err <= min(report.train_mse):
            report.best_epoch = epoch

        if config.mse_goal > 0 and train_err <= config.mse_goal:
            report.stop_reason = "goal_reached"
            break
        if use_val and stale >= config.patience:
            report.stop_reason = "patience_exhausted"
            for p, b in zip(params, best_params):
                p[...] = b
            break
    else:
        report.stop_reason = "max_iterations"

    return net, report


# -- model file --------------------------------------------------------------


def _row(values: np.ndarray) -> str:
    return ",".join(repr(float(v)) for v in values)


def network_to_text(net: Network) -> str:
    s = net.spec
    lines = [f"mlpv1,{s.n_in},{s.n_hidden},{s.n_out},{s.output_activation}"]
    lines.extend(_row(r) for r in net.W1)
    lines.append(_row(net.b1))
    lines.extend(_row(r) for r in net.W2)
    lines.append(_row(net.b2))
    return "\n".join(lines) + "\n"


def network_line_count(header: str) -> int:
    """Lines occupied by a model block, header included."""
    _, _, n_hidden, n_out, _ = _parse_header(header)
    return 1 + n_hidden + 1 + n_out + 1


def _parse_header(line: str) -> tuple[str, int, int, int, str]:
    parts = line.strip().split(",")
    if len(parts) != 5 or parts[0] != "mlpv1":
        raise ValueError(f"not an mlpv1 header: {line!r}")
    return parts[0], int(parts[1]), int(parts[2]), int(parts[3]), parts[4]


def network_from_lines(lines: Sequence[str]) -> Network:
    _, n_in, n_hidden, n_out, act = _parse_header(lines[0])
    spec = NetworkSpec(n_in, n_hidden, n_out, act)
    rows = [np.array([float(v) for v in ln.strip().split(",")]) for ln in lines[1:]]
    if len(rows) != n_hidden + n_out + 2:
        raise ValueError("truncated model block")
    W1 = np.vstack(rows[:n_hidden])
    b1 = rows[n_hidden]
    W2 = np.vstack(rows[n_hidden + 1 : n_hidden + 1 + n_out])
    b2 = rows[-1]
    return Network(W1, b1, W2, b2, spec)


def network_from_text(text: str) -> Network:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    return network_from_lines(lines)


def save_network(net: Network, path: Union[str, os.PathLike]) -> int:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        return fh.write(network_to_text(net))


def load_network(path: Union[str, os.PathLike]) -> Network:
    with open(path, "r", encoding="ascii") as fh:
        return network_from_text(fh.read())
