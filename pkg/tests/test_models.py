import math

import numpy as np
import pytest

from beamlab.channel import ArrayGeometry
from beamlab.codebook import Codebook, dft_codebook
from beamlab.geometry import Orientation
from beamlab.graph import build_graph
from beamlab.models import (
    DnnBeamSelector,
    DnnHyperparams,
    GnnBeamSelector,
    GnnHyperparams,
    GnnModel,
    NormBounds,
    UeContext,
    context_matrix,
    count_dnn_multiplications,
    count_gnn_multiplications,
    count_gnn_parameters,
    count_model_parameters,
    dnn_forward,
    gnn_forward,
    load_model,
    pair_probabilities,
    save_model,
    top_nb_candidates,
)
from beamlab.nn import softmax
from beamlab.seeding import make_rng

BOUNDS = NormBounds(lo=np.array([1.5, -3.5, 0.0]), hi=np.array([5.5, 3.5, 0.0]))
CTX = UeContext(location=np.array([3.0, 1.0, 0.0]), orientation=Orientation(1.2))


def small_gnn(seed=5, **kw):
    hp = GnnHyperparams(**{"feature_dim": 4, "message_dim": 4, "hidden_dim": 8, **kw})
    cb = dft_codebook(ArrayGeometry(6))
    return GnnModel(cb, build_graph(cb), BOUNDS, hp, make_rng(seed), planar_ctx=False)


def test_gnn_forward_probability_contract():
    model = small_gnn()
    probs = gnn_forward(model, CTX, None)
    assert probs.shape == (6,)
    assert np.all(probs > 0.0)
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_gnn_zero_parameters_uniform():
    model = small_gnn()
    for p in model.parameters():
        p.value[...] = 0.0
    probs = gnn_forward(model, CTX, None)
    np.testing.assert_allclose(probs, np.full(6, 1.0 / 6.0), atol=1e-15)


def naive_message_passing(model: GnnModel, ctx_row: np.ndarray) -> np.ndarray:
    """Per-node/per-edge reference implementation with explicit loops."""

    def run_mlp(mlp, x):
        out = np.asarray(x, dtype=float)
        last = len(mlp.weights) - 1
        for li, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
            out = out @ w.value + b.value
            if li < last:
                out = np.maximum(out, 0.0)
        return out

    n = model.graph.node_count
    h = {}
    for i in range(n):
        node_input = np.concatenate([ctx_row, model.node_feats[i]])
        h[i] = run_mlp(model.embed, node_input)
    for _ in range(model.hp.rounds):
        messages = {}
        for i in range(n):
            for j in model.graph.in_neighbors[i]:
                messages[(int(j), i)] = run_mlp(model.f_message,
                                                np.concatenate([h[int(j)], h[i]]))
        new_h = {}
        for i in range(n):
            agg = np.zeros(model.hp.message_dim)
            for j in model.graph.in_neighbors[i]:
                agg = agg + messages[(int(j), i)]
            new_h[i] = run_mlp(model.f_node, np.concatenate([h[i], agg]))
        h = new_h
    scores = np.array([run_mlp(model.readout, h[i])[0] for i in range(n)])
    return softmax(scores)


@pytest.mark.parametrize("rounds", [0, 1, 2, 3])
def test_gnn_matches_naive_trace(rounds):
    hp = GnnHyperparams(feature_dim=2, message_dim=2, rounds=rounds,
                        hidden_layers=1, hidden_dim=2)
    cb = dft_codebook(ArrayGeometry(4))
    model = GnnModel(cb, build_graph(cb), BOUNDS, hp, make_rng(77), planar_ctx=False)
    ctx_row = context_matrix(CTX.location[None, :], CTX.orientation.as_array()[None, :],
                             BOUNDS, planar=False)[0]
    expected = naive_message_passing(model, ctx_row)
    got = gnn_forward(model, CTX, None)
    np.testing.assert_allclose(got, expected, atol=1e-12)


def test_gnn_batch_matches_single():
    selector = GnnBeamSelector(ArrayGeometry(5), ArrayGeometry(4), BOUNDS,
                               GnnHyperparams(feature_dim=4, message_dim=4,
                                              hidden_dim=8), seed=3)
    rng = np.random.default_rng(8)
    locs = np.column_stack([rng.uniform(1.5, 5.5, 3), rng.uniform(-3.5, 3.5, 3),
                            np.zeros(3)])
    oris = np.column_stack([rng.uniform(0, 2 * math.pi, 3), np.zeros(3), np.zeros(3)])
    batch = selector.pair_probabilities_batch(locs, oris)
    for i in range(3):
        single = selector.pair_probabilities_batch(locs[i:i + 1], oris[i:i + 1])[0]
        np.testing.assert_allclose(batch[i], single, atol=1e-12)


def test_gnn_permutation_equivariance():
    hp = GnnHyperparams(feature_dim=3, message_dim=3, hidden_dim=4)
    cb = dft_codebook(ArrayGeometry(7))
    perm = np.array([4, 0, 6, 2, 1, 5, 3])
    cb_perm = Codebook(weights=cb.weights[perm], azimuths=cb.azimuths[perm],
                       elevations=cb.elevations[perm], geometry=cb.geometry)
    base = GnnModel(cb, build_graph(cb), BOUNDS, hp, make_rng(21), planar_ctx=False)
    permuted = GnnModel(cb_perm, build_graph(cb_perm), BOUNDS, hp, make_rng(21),
                        planar_ctx=False)
    for p_dst, p_src in zip(permuted.parameters(), base.parameters()):
        p_dst.value[...] = p_src.value
    probs_base = gnn_forward(base, CTX, None)
    probs_perm = gnn_forward(permuted, CTX, None)
    np.testing.assert_allclose(probs_perm, probs_base[perm], atol=1e-12)


def test_planar_context_width():
    hp = GnnHyperparams(feature_dim=4, message_dim=4, hidden_dim=8)
    selector = GnnBeamSelector(ArrayGeometry(4, 2), ArrayGeometry(2, 2), BOUNDS,
                               hp, seed=1)
    assert selector.tx_model.embed.layer_sizes[0] == 11
    dnn = DnnBeamSelector(ArrayGeometry(4, 2), ArrayGeometry(2, 2), BOUNDS,
                          DnnHyperparams(hidden_layers=1, hidden_dim=8), seed=1)
    assert dnn.mlp.layer_sizes[0] == 6
    linear = DnnBeamSelector(ArrayGeometry(4), ArrayGeometry(2), BOUNDS,
                             DnnHyperparams(hidden_layers=1, hidden_dim=8), seed=1)
    assert linear.mlp.layer_sizes[0] == 4


def test_pair_probabilities_outer_product():
    one_hot = pair_probabilities(np.array([0.0, 1.0]), np.array([1.0, 0.0, 0.0]))
    expected = np.zeros((2, 3))
    expected[1, 0] = 1.0
    np.testing.assert_allclose(one_hot, expected, atol=1e-15)
    uniform = pair_probabilities(np.full(4, 0.25), np.full(2, 0.5))
    np.testing.assert_allclose(uniform, np.full((4, 2), 0.125), atol=1e-15)
    mixed = pair_probabilities(np.array([0.25, 0.75]), np.array([0.5, 0.5]))
    np.testing.assert_allclose(mixed, [[0.125, 0.125], [0.375, 0.375]], atol=1e-15)
    assert mixed.sum() == pytest.approx(1.0, abs=1e-12)


def test_top_candidates_ordering():
    probs = np.array([[0.4, 0.3], [0.2, 0.1]])
    assert top_nb_candidates(probs, 2) == [(0, 0), (0, 1)]
    assert top_nb_candidates(probs, 4) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    one_hot = np.zeros((3, 3))
    one_hot[2, 1] = 1.0
    assert top_nb_candidates(one_hot, 1) == [(2, 1)]


def test_top_candidates_tie_break_low_flat_index():
    flat_tie = np.full((2, 2), 0.25)
    assert top_nb_candidates(flat_tie, 3) == [(0, 0), (0, 1), (1, 0)]


def test_top_candidates_range_check():
    probs = np.full((2, 2), 0.25)
    with pytest.raises(ValueError):
        top_nb_candidates(probs, 0)
    with pytest.raises(ValueError):
        top_nb_candidates(probs, 5)


def test_top1_factorizes_over_outer_product():
    rng = np.random.default_rng(17)
    for _ in range(50):
        p_tx = softmax(rng.standard_normal(6))
        p_rx = softmax(rng.standard_normal(4))
        top = top_nb_candidates(pair_probabilities(p_tx, p_rx), 1)[0]
        assert top == (int(np.argmax(p_tx)), int(np.argmax(p_rx)))


def test_dnn_uniform_when_zeroed():
    dnn = DnnBeamSelector(ArrayGeometry(4), ArrayGeometry(2), BOUNDS,
                          DnnHyperparams(hidden_layers=2, hidden_dim=16), seed=2)
    for p in dnn.parameters():
        p.value[...] = 0.0
    probs = dnn_forward(dnn, CTX)
    np.testing.assert_allclose(probs, np.full(8, 1.0 / 8.0), atol=1e-15)


def test_dnn_output_contract():
    dnn = DnnBeamSelector(ArrayGeometry(4), ArrayGeometry(2), BOUNDS,
                          DnnHyperparams(hidden_layers=2, hidden_dim=16), seed=2)
    probs = dnn_forward(dnn, CTX)
    assert probs.shape == (8,)
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_complexity_headline_numbers():
    assert count_gnn_multiplications(64, 16, 16, 16, 1, 1, 32) == 376_320
    assert count_dnn_multiplications(64, 16, 3, 256) == 394_240
    assert count_gnn_parameters(16, 16, 1, 32) == 6_336


def test_complexity_reductions():
    # No message passing leaves only the embedding term.
    assert count_gnn_multiplications(8, 4, 16, 16, 0, 1, 32) == (8 + 4) * 6 * 16
    # Small case worked by hand: 6 nodes, F=2, one hidden layer of 2.
    assert count_gnn_multiplications(4, 2, 2, 2, 1, 1, 2) == 288
    # The dense baseline's weight count equals its multiplication count.
    assert count_dnn_multiplications(64, 16, 3, 256) == 4 * 256 + 2 * 256 ** 2 + 256 * 1024


def test_introspective_count_exceeds_formula():
    selector = GnnBeamSelector(ArrayGeometry(8), ArrayGeometry(4), BOUNDS,
                               GnnHyperparams(), seed=4)
    actual = count_model_parameters(selector)
    formula = count_gnn_parameters(16, 16, 1, 32)
    # Biases and the readout layer are real parameters the formula omits.
    assert actual > formula
    per_side = (6 * 16 + 16) + (32 * 32 + 32 + 32 * 16 + 16) * 2 + (16 + 1)
    assert actual == 2 * per_side


def test_dnn_parameter_count():
    dnn = DnnBeamSelector(ArrayGeometry(8), ArrayGeometry(4), BOUNDS,
                          DnnHyperparams(), seed=4)
    expected = (4 * 256 + 256) + (256 * 256 + 256) * 2 + (256 * 32 + 32)
    assert count_model_parameters(dnn) == expected


@pytest.mark.parametrize("kind", ["gnn", "dnn"])
def test_model_save_load_roundtrip(tmp_path, kind):
    if kind == "gnn":
        selector = GnnBeamSelector(ArrayGeometry(5), ArrayGeometry(4), BOUNDS,
                                   GnnHyperparams(feature_dim=4, message_dim=4,
                                                  hidden_dim=8), seed=6)
    else:
        selector = DnnBeamSelector(ArrayGeometry(5), ArrayGeometry(4), BOUNDS,
                                   DnnHyperparams(hidden_layers=1, hidden_dim=8),
                                   seed=6)
    path = tmp_path / f"{kind}.ckpt"
    save_model(selector, path, extra_meta={"epochs_trained": 3})
    loaded, meta = load_model(path)
    assert meta["kind"] == kind
    assert meta["epochs_trained"] == 3
    locs = CTX.location[None, :]
    oris = CTX.orientation.as_array()[None, :]
    np.testing.assert_array_equal(
        selector.pair_probabilities_batch(locs, oris),
        loaded.pair_probabilities_batch(locs, oris))
