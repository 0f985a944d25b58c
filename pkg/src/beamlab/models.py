"""Beam-selection models.

Two classifiers map a user pose (location + array orientation) to per-beam
probabilities: a message-passing network that runs over the beam graph of
each array, and a dense baseline that scores every beam pair directly. Both
sides of the graph model share one architecture but keep independent
weights. Complexity counters for the inference multiplication and
trainable-parameter budgets live here as well.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import nn
from .channel import ArrayGeometry
from .codebook import Codebook, dft_codebook
from .geometry import Orientation, Vec3
from .graph import BeamGraph, build_graph
from .nn import Mlp, Tensor

TILT_SCALE = math.pi / 4.0


@dataclass(frozen=True)
class NormBounds:
    """Axis-aligned location bounds used to scale coordinates into [-1, 1]."""

    lo: np.ndarray
    hi: np.ndarray

    def normalize(self, locations: np.ndarray) -> np.ndarray:
        locations = np.atleast_2d(np.asarray(locations, dtype=np.float64))
        span = self.hi - self.lo
        safe = np.where(span > 0.0, span, 1.0)
        scaled = 2.0 * (locations - self.lo) / safe - 1.0
        return np.where(span > 0.0, scaled, 0.0)


@dataclass(frozen=True)
class UeContext:
    """One user pose as consumed by the models."""

    location: Vec3
    orientation: Orientation


@dataclass(frozen=True)
class GnnHyperparams:
    feature_dim: int = 16     # node feature width
    message_dim: int = 16     # edge message width
    rounds: int = 1           # message-passing iterations
    hidden_layers: int = 1    # hidden layers inside the edge/node MLPs
    hidden_dim: int = 32      # neurons per hidden layer


@dataclass(frozen=True)
class DnnHyperparams:
    hidden_layers: int = 3
    hidden_dim: int = 256


def context_matrix(locations: np.ndarray, orientations: np.ndarray,
                   bounds: NormBounds, planar: bool) -> np.ndarray:
    """Shared pose features: scaled coordinates plus sin/cos of each active angle."""
    locations = np.atleast_2d(locations)
    orientations = np.atleast_2d(orientations)
    cols = [bounds.normalize(locations)]
    n_angles = 3 if planar else 1
    for k in range(n_angles):
        cols.append(np.sin(orientations[:, k:k + 1]))
        cols.append(np.cos(orientations[:, k:k + 1]))
    return np.concatenate(cols, axis=1)


def dnn_context_matrix(locations: np.ndarray, orientations: np.ndarray,
                       bounds: NormBounds, planar: bool) -> np.ndarray:
    """Dense-baseline inputs: scaled coordinates plus scaled raw angles."""
    locations = np.atleast_2d(locations)
    orientations = np.atleast_2d(orientations)
    cols = [bounds.normalize(locations), orientations[:, 0:1] / math.pi - 1.0]
    if planar:
        cols.append(orientations[:, 1:2] / TILT_SCALE)
        cols.append(orientations[:, 2:3] / TILT_SCALE)
    return np.concatenate(cols, axis=1)


class GnnModel:
    """Message-passing classifier over one array's beam graph.

    Every node embeds the user pose together with its own pointing angles.
    Each round recomputes all edge messages from the current node features
    (initial messages are zero and are overwritten by the first update),
    sums the two incoming messages per node, and updates the node features;
    a per-node readout followed by softmax yields beam probabilities.
    """

    def __init__(self, codebook: Codebook, graph: BeamGraph, bounds: NormBounds,
                 hp: GnnHyperparams, rng: np.random.Generator, planar_ctx: bool):
        self.graph = graph
        self.bounds = bounds
        self.hp = hp
        self.planar_ctx = planar_ctx
        n = graph.node_count
        # Per-node angle features, scaled to [-1, 1].
        feats = [codebook.azimuths / math.pi]
        if planar_ctx:
            feats.append(codebook.elevations / math.pi)
        self.node_feats = np.stack(feats, axis=1)
        ctx_dim = 3 + (6 if planar_ctx else 2)
        hidden = [hp.hidden_dim] * hp.hidden_layers
        self.embed = Mlp([ctx_dim + self.node_feats.shape[1], hp.feature_dim], rng)
        self.f_message = Mlp([2 * hp.feature_dim] + hidden + [hp.message_dim], rng)
        self.f_node = Mlp([hp.feature_dim + hp.message_dim] + hidden + [hp.feature_dim], rng)
        self.readout = Mlp([hp.feature_dim, 1], rng)
        # Edge endpoints grouped by destination: rows (i, k) -> in_neighbors[i][k].
        self.dst_base = np.repeat(np.arange(n), 2)
        self.src_base = graph.in_neighbors.ravel()

    def logits(self, ctx: np.ndarray) -> Tensor:
        """Per-beam scores for a batch of context rows; shape (batch, n_beams)."""
        batch = ctx.shape[0]
        n = self.graph.node_count
        node_in = np.concatenate(
            [np.repeat(ctx, n, axis=0), np.tile(self.node_feats, (batch, 1))], axis=1)
        h = self.embed(Tensor(node_in))
        offsets = np.repeat(np.arange(batch) * n, 2 * n)
        src = np.tile(self.src_base, batch) + offsets
        dst = np.tile(self.dst_base, batch) + offsets
        for _ in range(self.hp.rounds):
            pair = nn.concat([nn.gather_rows(h, src), nn.gather_rows(h, dst)], axis=1)
            messages = self.f_message(pair)
            stacked = nn.reshape(messages, (batch * n, 2, self.hp.message_dim))
            aggregated = nn.sum_axis(stacked, axis=1)
            h = self.f_node(nn.concat([h, aggregated], axis=1))
        return nn.reshape(self.readout(h), (batch, n))

    def parameters(self) -> list:
        return (self.embed.parameters() + self.f_message.parameters()
                + self.f_node.parameters() + self.readout.parameters())

    def modules(self) -> dict:
        return {"embed": self.embed, "f_message": self.f_message,
                "f_node": self.f_node, "readout": self.readout}


def gnn_forward(model: GnnModel, ctx: UeContext) -> np.ndarray:
    """Probability over one array's beams for a single user pose."""
    features = context_matrix(np.asarray(ctx.location)[None, :],
                              ctx.orientation.as_array()[None, :],
                              model.bounds, model.planar_ctx)
    return nn.softmax(model.logits(features).value, axis=1)[0]


def pair_probabilities(p_tx: np.ndarray, p_rx: np.ndarray) -> np.ndarray:
    """Outer product of the two per-beam distributions; sums to one."""
    return np.outer(p_tx, p_rx)


def top_nb_candidates(pair_probs: np.ndarray, n_b: int) -> list:
    """The ``n_b`` most probable (tx, rx) beam pairs in descending order.

    Ties resolve toward the lower flat index (tx-major), matching the label
    convention.
    """
    n_pairs = pair_probs.size
    if not 1 <= n_b <= n_pairs:
        raise ValueError(f"n_b must be in [1, {n_pairs}]")
    flat = pair_probs.ravel()
    order = np.argsort(-flat, kind="stable")[:n_b]
    n_r = pair_probs.shape[1]
    return [(int(ix) // n_r, int(ix) % n_r) for ix in order]


class GnnBeamSelector:
    """TX and RX graph models with independent weights, trained jointly."""

    kind = "gnn"

    def __init__(self, tx_geom: ArrayGeometry, rx_geom: ArrayGeometry,
                 bounds: NormBounds, hp: GnnHyperparams, seed: int):
        from .seeding import make_rng
        self.tx_geom, self.rx_geom = tx_geom, rx_geom
        self.bounds = bounds
        self.hp = hp
        self.seed = seed
        self.planar = tx_geom.is_planar or rx_geom.is_planar
        tx_cb = dft_codebook(tx_geom)
        rx_cb = dft_codebook(rx_geom)
        self.tx_model = GnnModel(tx_cb, build_graph(tx_cb), bounds, hp,
                                 make_rng(seed, "tx"), self.planar)
        self.rx_model = GnnModel(rx_cb, build_graph(rx_cb), bounds, hp,
                                 make_rng(seed, "rx"), self.planar)

    def parameters(self) -> list:
        return self.tx_model.parameters() + self.rx_model.parameters()

    def _context(self, locations, orientations) -> np.ndarray:
        return context_matrix(locations, orientations, self.bounds, self.planar)

    def loss(self, locations, orientations, labels: np.ndarray) -> Tensor:
        """Sum of the TX and RX cross-entropies for a batch of samples."""
        ctx = self._context(locations, orientations)
        loss_tx = nn.softmax_cross_entropy(self.tx_model.logits(ctx), labels[:, 0])
        loss_rx = nn.softmax_cross_entropy(self.rx_model.logits(ctx), labels[:, 1])
        return nn.add(loss_tx, loss_rx)

    def pair_probabilities_batch(self, locations, orientations) -> np.ndarray:
        """(batch, n_tx_beams, n_rx_beams) joint probabilities."""
        ctx = self._context(locations, orientations)
        p_tx = nn.softmax(self.tx_model.logits(ctx).value, axis=1)
        p_rx = nn.softmax(self.rx_model.logits(ctx).value, axis=1)
        return np.einsum("bp,bq->bpq", p_tx, p_rx)

    def named_parameters(self) -> list:
        out = []
        for side, model in (("tx", self.tx_model), ("rx", self.rx_model)):
            for mod_name, mod in model.modules().items():
                for i, (w, b) in enumerate(zip(mod.weights, mod.biases)):
                    out.append((f"{side}.{mod_name}.w{i}", w))
                    out.append((f"{side}.{mod_name}.b{i}", b))
        return out


class DnnBeamSelector:
    """Dense baseline: pose in, one softmax over all beam pairs out."""

    kind = "dnn"

    def __init__(self, tx_geom: ArrayGeometry, rx_geom: ArrayGeometry,
                 bounds: NormBounds, hp: DnnHyperparams, seed: int):
        from .seeding import make_rng
        self.tx_geom, self.rx_geom = tx_geom, rx_geom
        self.bounds = bounds
        self.hp = hp
        self.seed = seed
        self.planar = tx_geom.is_planar or rx_geom.is_planar
        in_dim = 6 if self.planar else 4
        sizes = [in_dim] + [hp.hidden_dim] * hp.hidden_layers + [tx_geom.size * rx_geom.size]
        self.mlp = Mlp(sizes, make_rng(seed, "dnn"))

    def parameters(self) -> list:
        return self.mlp.parameters()

    def _context(self, locations, orientations) -> np.ndarray:
        return dnn_context_matrix(locations, orientations, self.bounds, self.planar)

    def loss(self, locations, orientations, labels: np.ndarray) -> Tensor:
        flat_labels = labels[:, 0] * self.rx_geom.size + labels[:, 1]
        logits = self.mlp(Tensor(self._context(locations, orientations)))
        return nn.softmax_cross_entropy(logits, flat_labels)

    def pair_probabilities_batch(self, locations, orientations) -> np.ndarray:
        logits = self.mlp(Tensor(self._context(locations, orientations))).value
        probs = nn.softmax(logits, axis=1)
        return probs.reshape(-1, self.tx_geom.size, self.rx_geom.size)

    def named_parameters(self) -> list:
        return [(f"dnn.{kind}{i}", t)
                for i, (w, b) in enumerate(zip(self.mlp.weights, self.mlp.biases))
                for kind, t in (("w", w), ("b", b))]


def dnn_forward(model: DnnBeamSelector, ctx: UeContext) -> np.ndarray:
    """Flat probability vector over all beam pairs for a single pose."""
    probs = model.pair_probabilities_batch(np.asarray(ctx.location)[None, :],
                                           ctx.orientation.as_array()[None, :])
    return probs[0].ravel()


# ---------------------------------------------------------------------------
# Complexity accounting


def count_gnn_multiplications(n_t: int, n_r: int, feature_dim: int, message_dim: int,
                              rounds: int, hidden_layers: int, hidden_dim: int) -> int:
    """Inference multiplications of the graph model (weights only, no biases).

    Per node: a 6-wide pose embedding, then per round the two incoming edge
    MLPs plus the node-update MLP. Reported for the linear-array input
    width regardless of array kind.
    """
    per_round = (6 * feature_dim * hidden_dim
                 + 3 * (hidden_layers - 1) * hidden_dim ** 2
                 + 3 * message_dim * hidden_dim)
    return (n_t + n_r) * (6 * feature_dim + rounds * per_round)


def count_dnn_multiplications(n_t: int, n_r: int, hidden_layers: int,
                              hidden_dim: int) -> int:
    """Inference multiplications of the dense baseline (weights only)."""
    return (4 * hidden_dim
            + (hidden_layers - 1) * hidden_dim ** 2
            + hidden_dim * n_t * n_r)


def count_gnn_parameters(feature_dim: int, message_dim: int, hidden_layers: int,
                         hidden_dim: int) -> int:
    """Trainable weights of both graph models, excluding biases and readout."""
    per_model = (6 * feature_dim
                 + 4 * feature_dim * hidden_dim
                 + 2 * (hidden_layers - 1) * hidden_dim ** 2
                 + 2 * message_dim * hidden_dim)
    return 2 * per_model


def count_model_parameters(selector) -> int:
    """Actual trainable scalars in a built model, biases and readout included."""
    return sum(t.value.size for _, t in selector.named_parameters())


# ---------------------------------------------------------------------------
# Persistence


def save_model(selector, path, extra_meta: dict | None = None) -> None:
    meta = {
        "kind": selector.kind,
        "tx_geom": [selector.tx_geom.n_h, selector.tx_geom.n_v],
        "rx_geom": [selector.rx_geom.n_h, selector.rx_geom.n_v],
        "bounds_lo": [float(x) for x in selector.bounds.lo],
        "bounds_hi": [float(x) for x in selector.bounds.hi],
        "hyperparams": asdict(selector.hp),
        "seed": selector.seed,
    }
    if extra_meta:
        meta.update(extra_meta)
    named = [(name, t.value) for name, t in selector.named_parameters()]
    nn.save_tensors(path, named, meta)


def load_model(path):
    """Rebuild a selector from a checkpoint; the kind comes from the metadata."""
    arrays, meta = nn.load_tensors(path)
    tx_geom = ArrayGeometry(*meta["tx_geom"])
    rx_geom = ArrayGeometry(*meta["rx_geom"])
    bounds = NormBounds(lo=np.array(meta["bounds_lo"]), hi=np.array(meta["bounds_hi"]))
    if meta["kind"] == "gnn":
        hp = GnnHyperparams(**meta["hyperparams"])
        selector = GnnBeamSelector(tx_geom, rx_geom, bounds, hp, meta["seed"])
    elif meta["kind"] == "dnn":
        hp = DnnHyperparams(**meta["hyperparams"])
        selector = DnnBeamSelector(tx_geom, rx_geom, bounds, hp, meta["seed"])
    else:
        raise ValueError(f"unknown model kind {meta['kind']!r}")
    for name, tensor in selector.named_parameters():
        if name not in arrays:
            raise ValueError(f"checkpoint missing parameter {name}")
        if arrays[name].shape != tensor.value.shape:
            raise ValueError(f"checkpoint parameter {name} has shape "
                             f"{arrays[name].shape}, expected {tensor.value.shape}")
        tensor.value[...] = arrays[name]
    return selector, meta
