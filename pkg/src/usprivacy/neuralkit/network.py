"""Feed-forward DAG of named nodes over named inputs.

Nodes are added in topological order (inputs must already exist), so the
insertion order doubles as the evaluation order. Per-sample shapes are
inferred at add() time and a bad wiring fails fast with the node name.
A network built as a classifier ends in a width-1 sigmoid Dense and
exposes a fused binary cross-entropy backward pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DataError
from ..util import rng_for
from .checkpoint import MAGIC_NETWORK, read_container, write_container
from .layers import LAYER_REGISTRY, Dense, Dropout, Layer


@dataclass(frozen=True)
class _InputSpec:
    shape: tuple[int, ...]
    dtype: str  # "float" or "int"


@dataclass
class _Node:
    name: str
    layer: Layer
    inputs: tuple[str, ...]
    shape: tuple[int, ...]


class Network:
    def __init__(self, name: str, seed: int):
        self.name = name
        self.seed = int(seed)
        self.inputs: dict[str, _InputSpec] = {}
        self.nodes: dict[str, _Node] = {}
        self.order: list[str] = []
        self.output: str | None = None
        self.classifier = False
        self.frozen: set[str] = set()
        self._final = False
        self._init_rng = rng_for(self.seed, "init")
        self._dropout_rng = rng_for(self.seed, "dropout", 0)
        self.mode = "eval"

    # -- construction --------------------------------------------------

    def add_input(self, name: str, shape: tuple[int, ...], dtype: str = "float"):
        if self._final:
            raise ConfigError("network is finalized")
        if name in self.inputs or name in self.nodes:
            raise ConfigError(f"duplicate node name {name!r}")
        if dtype not in ("float", "int"):
            raise ConfigError(f"input dtype must be 'float' or 'int', got {dtype!r}")
        self.inputs[name] = _InputSpec(tuple(int(d) for d in shape), dtype)

    def add(self, name: str, layer: Layer, inputs) -> None:
        if self._final:
            raise ConfigError("network is finalized")
        if name in self.inputs or name in self.nodes:
            raise ConfigError(f"duplicate node name {name!r}")
        if isinstance(inputs, str):
            inputs = (inputs,)
        inputs = tuple(inputs)
        in_shapes = []
        for src in inputs:
            if src in self.nodes:
                in_shapes.append(self.nodes[src].shape)
            elif src in self.inputs:
                in_shapes.append(self.inputs[src].shape)
            else:
                raise ConfigError(f"node {name!r} reads unknown input {src!r}")
        try:
            shape = layer.out_shape(in_shapes)
        except ValueError as exc:
            raise ConfigError(f"node {name!r}: {exc}") from None
        if not layer.params:
            layer.init_params(self._init_rng)
        self.nodes[name] = _Node(name, layer, inputs, tuple(shape))
        self.order.append(name)

    def finalize(self, output: str | None = None, classifier: bool = True):
        if not self.order:
            raise ConfigError("network has no nodes")
        if output is None:
            output = self.order[-1]
        if output not in self.nodes:
            raise ConfigError(f"unknown output node {output!r}")
        if classifier:
            node = self.nodes[output]
            layer = node.layer
            if not (isinstance(layer, Dense) and layer.out_dim == 1
                    and layer.activation == "sigmoid"):
                raise ConfigError(
                    f"classifier output {output!r} must be a width-1 sigmoid dense layer"
                )
        self.output = output
        self.classifier = classifier
        self._final = True
        return self

    # -- execution -----------------------------------------------------

    def set_mode(self, mode: str) -> None:
        if mode not in ("train", "eval"):
            raise ConfigError(f"unknown mode {mode!r}")
        self.mode = mode

    def reseed_dropout(self, k: int) -> None:
        """Pin the dropout stream; identical k gives identical masks."""
        self._dropout_rng = rng_for(self.seed, "dropout", int(k))

    def _check_batch(self, batch: dict[str, np.ndarray]) -> int:
        sizes = set()
        for name, spec in self.inputs.items():
            if name not in batch:
                raise DataError(f"batch is missing input {name!r}")
            arr = batch[name]
            if arr.shape[1:] != spec.shape:
                raise DataError(
                    f"input {name!r} expects per-sample shape {spec.shape}, "
                    f"got {arr.shape[1:]}"
                )
            sizes.add(arr.shape[0])
        if len(sizes) != 1:
            raise DataError("batch inputs disagree on batch size")
        return sizes.pop()

    def forward(self, batch: dict[str, np.ndarray], want_ctx: bool = False):
        if not self._final:
            raise ConfigError("network is not finalized")
        self._check_batch(batch)
        acts: dict[str, np.ndarray] = dict(batch)
        ctxs: dict[str, object] = {}
        train = self.mode == "train"
        for name in self.order:
            node = self.nodes[name]
            xs = [acts[src] for src in node.inputs]
            out, ctx = node.layer.forward(xs, train, self._dropout_rng)
            acts[name] = out
            if want_ctx:
                ctxs[name] = ctx
        if want_ctx:
            return acts, ctxs
        return acts[self.output]

    def predict_proba(self, batch: dict[str, np.ndarray]) -> np.ndarray:
        mode = self.mode
        self.set_mode("eval")
        try:
            out = self.forward(batch)
        finally:
            self.mode = mode
        return out[:, 0]

    # -- loss / gradients ----------------------------------------------

    @staticmethod
    def loss_bce(p: np.ndarray, y: np.ndarray) -> float:
        p = np.clip(p, 1e-12, 1.0 - 1e-12)
        return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))

    def backward_bce(self, batch, y):
        """Mean-BCE forward/backward; returns (loss, grads by node name).

        The sigmoid output and the loss are fused: the gradient injected
        at the output Dense pre-activation is (p - y) / B. Frozen nodes
        contribute zero parameter gradients.
        """
        if not self.classifier:
            raise ConfigError("loss requires a classifier network")
        acts, ctxs = self.forward(batch, want_ctx=True)
        p = acts[self.output][:, 0]
        y = np.asarray(y, dtype=np.float64)
        loss = self.loss_bce(p, y)

        gacts: dict[str, np.ndarray] = {}
        grads: dict[str, dict[str, np.ndarray]] = {}
        dz = ((p - y) / y.shape[0])[:, None]
        for name in reversed(self.order):
            node = self.nodes[name]
            if name == self.output:
                gins, pgrads = node.layer.backward_from_preact(dz, ctxs[name])
            else:
                gout = gacts.pop(name, None)
                if gout is None:
                    continue
                gins, pgrads = node.layer.backward(gout, ctxs[name])
            if name in self.frozen:
                pgrads = {k: np.zeros_like(v) for k, v in pgrads.items()}
            if pgrads:
                grads[name] = pgrads
            for src, g in zip(node.inputs, gins):
                if g is None or src in self.inputs:
                    continue
                if src in gacts:
                    gacts[src] = gacts[src] + g
                else:
                    gacts[src] = g
        return loss, grads

    # -- parameters ----------------------------------------------------

    def parameters(self, trainable_only: bool = False):
        """Yields (node_name, param_name, array) in topological order."""
        for name in self.order:
            if trainable_only and name in self.frozen:
                continue
            for pname, arr in sorted(self.nodes[name].layer.params.items()):
                yield name, pname, arr

    def parameter_count(self, trainable_only: bool = False) -> int:
        return sum(arr.size for _, _, arr in self.parameters(trainable_only))

    def freeze(self, *names: str) -> None:
        for name in names:
            if name not in self.nodes:
                raise ConfigError(f"cannot freeze unknown node {name!r}")
            self.frozen.add(name)

    def unfreeze(self, *names: str) -> None:
        for name in names:
            self.frozen.discard(name)

    # -- surgery ---------------------------------------------------------

    def truncate_after(self, name: str) -> "Network":
        """New network ending at `name`, sharing layer objects (and so params).

        The kept subgraph is the ancestors of `name`; the cut point must be
        rank 1 per sample so the result can feed a Concatenate.
        """
        if name not in self.nodes:
            raise ConfigError(f"cannot truncate at unknown node {name!r}")
        if len(self.nodes[name].shape) != 1:
            raise ConfigError(
                f"truncation point {name!r} must be rank 1 per sample, "
                f"got shape {self.nodes[name].shape}"
            )
        keep: set[str] = set()
        stack = [name]
        while stack:
            cur = stack.pop()
            if cur in keep or cur in self.inputs:
                continue
            keep.add(cur)
            stack.extend(self.nodes[cur].inputs)

        net = Network(f"{self.name}@{name}", self.seed)
        used_inputs = {
            src for node_name in keep
            for src in self.nodes[node_name].inputs if src in self.inputs
        }
        for src in self.inputs:
            if src in used_inputs:
                net.add_input(src, self.inputs[src].shape, self.inputs[src].dtype)
        for node_name in self.order:
            if node_name in keep:
                node = self.nodes[node_name]
                net.add(node_name, node.layer, node.inputs)
        net.finalize(output=name, classifier=False)
        net.frozen = {n for n in self.frozen if n in keep}
        return net

    # -- persistence -----------------------------------------------------

    def manifest(self) -> dict:
        return {
            "name": self.name,
            "seed": self.seed,
            "inputs": {
                n: {"shape": list(s.shape), "dtype": s.dtype}
                for n, s in self.inputs.items()
            },
            "nodes": [
                {
                    "name": n,
                    "kind": self.nodes[n].layer.kind,
                    "config": self.nodes[n].layer.config(),
                    "inputs": list(self.nodes[n].inputs),
                }
                for n in self.order
            ],
            "output": self.output,
            "classifier": self.classifier,
            "frozen": sorted(self.frozen),
            "params": [
                {"node": n, "param": p, "shape": list(a.shape)}
                for n, p, a in self.parameters()
            ],
        }

    def save(self, path) -> None:
        if not self._final:
            raise ConfigError("cannot save an unfinalized network")
        blocks = [arr for _, _, arr in self.parameters()]
        write_container(path, MAGIC_NETWORK, self.manifest(), blocks)

    @classmethod
    def load(cls, path) -> "Network":
        meta, blocks = read_container(path, MAGIC_NETWORK)
        net = cls(meta["name"], meta["seed"])
        for iname, spec in meta["inputs"].items():
            net.add_input(iname, tuple(spec["shape"]), spec["dtype"])
        for rec in meta["nodes"]:
            kind = rec["kind"]
            if kind not in LAYER_REGISTRY:
                raise DataError(f"checkpoint uses unknown layer kind {kind!r}")
            layer = LAYER_REGISTRY[kind](**rec["config"])
            net.add(rec["name"], layer, tuple(rec["inputs"]))
        expected = meta["params"]
        if len(expected) != len(blocks):
            raise DataError(
                f"checkpoint declares {len(expected)} parameter blocks, "
                f"found {len(blocks)}"
            )
        for rec, arr in zip(expected, blocks):
            node = rec["node"]
            if node not in net.nodes:
                raise DataError(f"checkpoint parameter for unknown node {node!r}")
            params = net.nodes[node].layer.params
            if rec["param"] not in params:
                raise DataError(
                    f"checkpoint parameter {rec['param']!r} not in node {node!r}"
                )
            if tuple(rec["shape"]) != arr.shape:
                raise DataError("checkpoint parameter shape mismatch")
            if params[rec["param"]].shape != arr.shape:
                raise DataError(
                    f"parameter {node}.{rec['param']} shape mismatch: "
                    f"built {params[rec['param']].shape}, stored {arr.shape}"
                )
            params[rec["param"]][...] = arr
        net.finalize(output=meta["output"], classifier=meta["classifier"])
        net.frozen = set(meta["frozen"])
        return net

    def dropout_nodes(self) -> list[str]:
        return [n for n in self.order if isinstance(self.nodes[n].layer, Dropout)]
