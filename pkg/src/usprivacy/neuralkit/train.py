"""Training loop and gradient checking for the neural kit.

Adam updates happen in place so parameter sharing across networks (the
transfer path) survives training. Frozen nodes are excluded from the
optimizer state entirely, which keeps their arrays bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..util import rng_for
from .network import Network


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 32
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    val_fraction: float = 0.1
    patience: int = 5
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ConfigError(
                f"val_fraction must be in [0, 1), got {self.val_fraction}"
            )
        if self.patience < 1:
            raise ConfigError(f"patience must be >= 1, got {self.patience}")


@dataclass
class AdamState:
    lr: float
    beta1: float
    beta2: float
    eps: float
    step: int = 0
    m: dict[tuple[str, str], np.ndarray] = field(default_factory=dict)
    v: dict[tuple[str, str], np.ndarray] = field(default_factory=dict)

    @classmethod
    def for_config(cls, cfg: TrainConfig) -> "AdamState":
        return cls(lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps)


def adam_step(state: AdamState, net: Network,
              grads: dict[str, dict[str, np.ndarray]]) -> None:
    """One in-place Adam update with bias correction (epsilon outside sqrt)."""
    state.step += 1
    t = state.step
    c1 = 1.0 - state.beta1 ** t
    c2 = 1.0 - state.beta2 ** t
    for node, pname, arr in net.parameters(trainable_only=True):
        g = grads.get(node, {}).get(pname)
        if g is None:
            continue
        key = (node, pname)
        if key not in state.m:
            state.m[key] = np.zeros_like(arr)
            state.v[key] = np.zeros_like(arr)
        m = state.m[key]
        v = state.v[key]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        arr -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)


@dataclass
class TrainResult:
    epochs_run: int
    train_losses: list[float]
    val_losses: list[float]
    best_epoch: int
    stopped_early: bool


def _slice_batch(batch: dict[str, np.ndarray], idx: np.ndarray):
    return {k: v[idx] for k, v in batch.items()}


def train_network(net: Network, batch: dict[str, np.ndarray],
                  y: np.ndarray, cfg: TrainConfig) -> TrainResult:
    """Mini-batch Adam on mean BCE with optional early stopping.

    A validation slice of ceil(val_fraction * n) samples is held out when
    both sides end up non-empty; otherwise every epoch runs on the full
    data and early stopping is disabled. On early stop the best-epoch
    parameters are restored in place.
    """
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    if n == 0:
        raise ConfigError("cannot train on an empty batch")

    perm = rng_for(cfg.seed, "val").permutation(n)
    n_val = int(np.ceil(cfg.val_fraction * n)) if cfg.val_fraction > 0 else 0
    use_val = 0 < n_val < n
    if use_val:
        val_idx, train_idx = perm[:n_val], perm[n_val:]
    else:
        val_idx, train_idx = perm[:0], perm
    train_batch = _slice_batch(batch, train_idx)
    train_y = y[train_idx]
    val_batch = _slice_batch(batch, val_idx)
    val_y = y[val_idx]
    n_train = train_y.shape[0]

    state = AdamState.for_config(cfg)
    train_losses: list[float] = []
    val_losses: list[float] = []
    best_val = np.inf
    best_epoch = 0
    best_params: list[np.ndarray] | None = None
    bad_epochs = 0
    stopped = False
    epochs_run = 0

    net.set_mode("train")
    for epoch in range(cfg.epochs):
        epochs_run = epoch + 1
        net.reseed_dropout(epoch)
        if cfg.shuffle:
            order = rng_for(cfg.seed, "epoch", epoch).permutation(n_train)
        else:
            order = np.arange(n_train)
        epoch_loss = 0.0
        for start in range(0, n_train, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss, grads = net.backward_bce(
                _slice_batch(train_batch, idx), train_y[idx])
            adam_step(state, net, grads)
            epoch_loss += loss * idx.shape[0]
        train_losses.append(epoch_loss / n_train)

        if use_val:
            p = net.predict_proba(val_batch)
            vloss = net.loss_bce(p, val_y)
            val_losses.append(vloss)
            if vloss < best_val - 1e-12:
                best_val = vloss
                best_epoch = epoch
                best_params = [arr.copy() for _, _, arr in net.parameters()]
                bad_epochs = 0
            else:
                bad_epochs += 1
                if bad_epochs >= cfg.patience:
                    stopped = True
                    break

    if use_val and best_params is not None:
        # restore in place so shared/frozen references stay valid
        for (_, _, arr), saved in zip(net.parameters(), best_params):
            arr[...] = saved
    else:
        best_epoch = epochs_run - 1
    net.set_mode("eval")
    return TrainResult(epochs_run, train_losses, val_losses, best_epoch, stopped)


def check_gradients(net: Network, batch: dict[str, np.ndarray], y: np.ndarray,
                    h: float = 1e-5, tol: float = 1e-4,
                    max_coords_per_param: int = 6) -> float:
    """Compares analytic BCE gradients against central differences.

    The dropout stream is reseeded before every forward pass so all
    evaluations see identical masks. Coordinates where both gradients
    are below 1e-6 in magnitude are skipped (relative error is
    meaningless near zero). Returns the worst relative error seen and
    raises ConfigError when it exceeds `tol`.
    """
    y = np.asarray(y, dtype=np.float64)
    net.set_mode("train")
    net.reseed_dropout(0)
    _, grads = net.backward_bce(batch, y)

    def loss_at() -> float:
        net.reseed_dropout(0)
        loss, _ = net.backward_bce(batch, y)
        return loss

    worst = 0.0
    for node, pname, arr in net.parameters(trainable_only=True):
        analytic = grads.get(node, {}).get(pname)
        if analytic is None:
            continue
        flat = arr.reshape(-1)
        aflat = analytic.reshape(-1)
        count = min(max_coords_per_param, flat.shape[0])
        stride = max(1, flat.shape[0] // count)
        for j in range(0, count * stride, stride):
            orig = flat[j]
            flat[j] = orig + h
            up = loss_at()
            flat[j] = orig - h
            down = loss_at()
            flat[j] = orig
            numeric = (up - down) / (2.0 * h)
            scale = max(abs(aflat[j]), abs(numeric))
            if scale < 1e-6:
                continue
            rel = abs(aflat[j] - numeric) / scale
            if rel > worst:
                worst = rel
            if rel > tol:
                net.set_mode("eval")
                raise ConfigError(
                    f"gradient check failed at {node}.{pname}[{j}]: "
                    f"analytic {aflat[j]:.3e}, numeric {numeric:.3e}, "
                    f"relative error {rel:.3e}"
                )
    net.set_mode("eval")
    return worst
