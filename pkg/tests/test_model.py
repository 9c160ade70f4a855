import numpy as np
import pytest

from causaldg import model as M
from causaldg import nn


def tiny_cfg(**kw):
    base = dict(
        num_domains=3,
        vocab_size=11,
        embed_dim=6,
        hidden_dim=7,
        rep_dim=5,
        domain_embed_dim=4,
        seed=0,
    )
    base.update(kw)
    return M.ModelConfig(**base)


def token_batch(rng, cfg, n=4, seq=5):
    ids = rng.integers(0, cfg.vocab_size, size=(n, seq))
    return M.Batch(ids=ids, mask=np.ones((n, seq)))


def test_config_requires_exactly_one_input_mode():
    with pytest.raises(nn.NNError):
        M.ModelConfig(num_domains=2)
    with pytest.raises(nn.NNError):
        M.ModelConfig(num_domains=2, vocab_size=5, feature_dim=3)


def test_build_params_shapes_and_determinism():
    cfg = tiny_cfg()
    p1 = M.build_params(cfg)
    p2 = M.build_params(cfg)
    assert p1.keys() == p2.keys()
    for k in p1:
        np.testing.assert_array_equal(p1[k].data, p2[k].data)
    assert p1["back_w"].shape == (cfg.rep_dim + cfg.domain_embed_dim, 2)
    assert p1["domain_embed"].shape == (cfg.num_domains, cfg.domain_embed_dim)
    # encoder branches are disjoint parameter sets
    assert not any(k.startswith("inv") and k.startswith("spc") for k in p1)


def test_encode_permutation_invariance():
    cfg = tiny_cfg()
    params = M.build_params(cfg)
    rng = np.random.default_rng(0)
    ids = rng.integers(0, cfg.vocab_size, size=(1, 6))
    h1 = M.encode(params, cfg, M.Batch(ids=ids, mask=np.ones((1, 6))))
    perm = rng.permutation(6)
    h2 = M.encode(params, cfg, M.Batch(ids=ids[:, perm], mask=np.ones((1, 6))))
    np.testing.assert_allclose(h1, h2, atol=1e-12)


def test_encode_identical_tokens():
    cfg = tiny_cfg()
    params = M.build_params(cfg)
    ids = np.full((1, 4), 3)
    h = M.encode(params, cfg, M.Batch(ids=ids, mask=np.ones((1, 4))))
    row = params["embed"].data[3][None, :]
    expected = np.tanh(row @ params["pool_w"].data + params["pool_b"].data)
    np.testing.assert_allclose(h, expected, atol=1e-12)


def test_encode_zero_embedding_table():
    cfg = tiny_cfg()
    params = M.build_params(cfg)
    params["embed"].data[:] = 0.0
    ids = np.array([[1, 2, 3]])
    h = M.encode(params, cfg, M.Batch(ids=ids, mask=np.ones((1, 3))))
    np.testing.assert_allclose(h, np.tanh(params["pool_b"].data)[None, :], atol=1e-12)


def test_forward_probability_outputs():
    cfg = tiny_cfg()
    params = M.build_params(cfg)
    rng = np.random.default_rng(1)
    out, _ = M.forward(params, cfg, token_batch(rng, cfg, n=6))
    for probs in (out.probs_classification, out.probs_joint, out.probs_specific,
                  out.probs_backdoor_mixture):
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-9)
        assert np.all(probs >= 0)
    assert out.m_inv.shape == (6, cfg.rep_dim)
    assert out.m_spc.shape == (6, cfg.rep_dim)


def test_forward_identical_inputs_identical_rows():
    cfg = tiny_cfg()
    params = M.build_params(cfg)
    ids = np.tile(np.array([[1, 4, 2]]), (3, 1))
    out, _ = M.forward(params, cfg, M.Batch(ids=ids, mask=np.ones((3, 3))))
    for row in range(1, 3):
        np.testing.assert_array_equal(out.probs_joint[0], out.probs_joint[row])


def test_forward_empty_batch_rejected():
    cfg = tiny_cfg()
    params = M.build_params(cfg)
    with pytest.raises(nn.NNError, match="empty"):
        M.forward(params, cfg, M.Batch(ids=np.zeros((0, 3), dtype=int), mask=np.zeros((0, 3))))


def test_mixture_prescribed_head_outputs():
    """Two domains engineered to emit [0.8, 0.2] and [0.4, 0.6] -> mean [0.6, 0.4]."""
    cfg = tiny_cfg(num_domains=2)
    params = M.build_params(cfg)
    params["back_w"].data[:] = 0.0
    params["back_b"].data[:] = 0.0
    # only the first domain-embedding coordinate feeds the logit gap
    params["back_w"].data[cfg.rep_dim, 0] = 1.0
    gap_08 = np.log(0.8 / 0.2)
    gap_04 = np.log(0.4 / 0.6)
    params["domain_embed"].data[:] = 0.0
    params["domain_embed"].data[0, 0] = gap_08
    params["domain_embed"].data[1, 0] = gap_04
    rng = np.random.default_rng(2)
    out, _ = M.forward(params, cfg, token_batch(rng, cfg, n=3))
    np.testing.assert_allclose(out.domain_head_probs[0], np.tile([0.8, 0.2], (3, 1)), atol=1e-12)
    np.testing.assert_allclose(out.domain_head_probs[1], np.tile([0.4, 0.6], (3, 1)), atol=1e-12)
    np.testing.assert_allclose(out.probs_backdoor_mixture, np.tile([0.6, 0.4], (3, 1)), atol=1e-12)


def test_mixture_single_domain_equals_head():
    cfg = tiny_cfg(num_domains=1)
    params = M.build_params(cfg)
    rng = np.random.default_rng(3)
    out, _ = M.forward(params, cfg, token_batch(rng, cfg))
    np.testing.assert_allclose(out.probs_backdoor_mixture, out.domain_head_probs[0], atol=1e-12)


def test_mixture_identical_embeddings_collapse():
    cfg = tiny_cfg(num_domains=3)
    params = M.build_params(cfg)
    params["domain_embed"].data[:] = params["domain_embed"].data[0]
    rng = np.random.default_rng(4)
    out, _ = M.forward(params, cfg, token_batch(rng, cfg))
    np.testing.assert_allclose(out.probs_backdoor_mixture, out.domain_head_probs[0], atol=1e-12)


def test_mixture_invariant_under_domain_permutation():
    cfg = tiny_cfg(num_domains=3)
    params = M.build_params(cfg)
    rng = np.random.default_rng(5)
    batch = token_batch(rng, cfg)
    out1, _ = M.forward(params, cfg, batch)
    params["domain_embed"].data[:] = params["domain_embed"].data[[2, 0, 1]]
    out2, _ = M.forward(params, cfg, batch)
    np.testing.assert_allclose(out1.probs_backdoor_mixture, out2.probs_backdoor_mixture, atol=1e-12)


def test_branch_parameter_disjointness():
    cfg = tiny_cfg()
    params = M.build_params(cfg)
    rng = np.random.default_rng(6)
    batch = token_batch(rng, cfg)
    out_before, _ = M.forward(params, cfg, batch)
    for k in params:
        if k.startswith("inv_"):
            params[k].data += 0.37
    out_after, _ = M.forward(params, cfg, batch)
    np.testing.assert_array_equal(out_before.m_spc, out_after.m_spc)
    assert np.abs(out_before.m_inv - out_after.m_inv).max() > 0
    for k in params:
        if k.startswith("spc_"):
            params[k].data -= 0.21
    out_final, _ = M.forward(params, cfg, batch)
    np.testing.assert_array_equal(out_after.m_inv, out_final.m_inv)


def test_predict_matches_joint_argmax_and_tie_break():
    cfg = tiny_cfg()
    params = M.build_params(cfg)
    rng = np.random.default_rng(7)
    batch = token_batch(rng, cfg, n=8)
    labels, probs = M.predict(params, cfg, batch)
    out, _ = M.forward(params, cfg, batch)
    np.testing.assert_array_equal(probs, out.probs_joint)
    np.testing.assert_array_equal(labels, (out.probs_joint[:, 1] > out.probs_joint[:, 0]).astype(int))
    # exact tie goes to class 0: force identical logits
    params["joint_w"].data[:] = 0.0
    params["joint_b"].data[:] = 0.0
    labels, probs = M.predict(params, cfg, batch)
    np.testing.assert_allclose(probs, 0.5)
    assert np.all(labels == 0)


def test_fresh_init_is_roughly_balanced():
    """Mean predicted probabilities near 0.5 across 100 init seeds."""
    rng = np.random.default_rng(8)
    cfg0 = tiny_cfg()
    ids = rng.integers(0, cfg0.vocab_size, size=(32, 5))
    batch = M.Batch(ids=ids, mask=np.ones((32, 5)))
    means = []
    for seed in range(100):
        cfg = tiny_cfg(seed=seed)
        params = M.build_params(cfg)
        out, _ = M.forward(params, cfg, batch)
        means.append(out.probs_joint[:, 1].mean())
    assert abs(np.mean(means) - 0.5) < 0.1


def test_feature_mode_forward():
    cfg = M.ModelConfig(num_domains=2, feature_dim=9, embed_dim=6, hidden_dim=7,
                        rep_dim=5, domain_embed_dim=4, seed=0)
    params = M.build_params(cfg)
    feats = np.random.default_rng(9).normal(size=(4, 9))
    out, _ = M.forward(params, cfg, M.Batch(features=feats))
    assert out.probs_joint.shape == (4, 2)
