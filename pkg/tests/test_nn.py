import numpy as np
import pytest

from causaldg import nn


def rel_err(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-6)


# ---------------------------------------------------------------------------
# linear / relu / embedding / mean_pool
# ---------------------------------------------------------------------------


def test_linear_identity():
    w = nn.Param(np.eye(3))
    b = nn.Param(np.zeros(3))
    x = np.arange(6, dtype=float).reshape(2, 3)
    y, _ = nn.linear(x, w, b)
    np.testing.assert_array_equal(y, x)


def test_linear_zero_input_gives_bias():
    w = nn.Param(np.ones((3, 2)))
    b = nn.Param([1.5, -2.0])
    y, _ = nn.linear(np.zeros((4, 3)), w, b)
    np.testing.assert_array_equal(y, np.tile([1.5, -2.0], (4, 1)))


def test_linear_shape_error_reports_both_shapes():
    w = nn.Param(np.ones((3, 2)))
    with pytest.raises(nn.NNError, match=r"\(2, 4\).*\(3, 2\)"):
        nn.linear(np.zeros((2, 4)), w, nn.Param(np.zeros(2)))


def test_linear_backward_matches_finite_differences():
    rng = np.random.default_rng(0)
    w = nn.Param(rng.normal(size=(4, 2)))
    b = nn.Param(rng.normal(size=2))
    x = rng.normal(size=(3, 4))
    g_out = rng.normal(size=(3, 2))

    def f():
        y, _ = nn.linear(x, w, b)
        return float((y * g_out).sum())

    y, back = nn.linear(x, w, b)
    back(g_out)
    report = nn.grad_check(f, {"w": w, "b": b}, h=1e-5, tol=1e-6)
    assert report.passed, report.per_param


def test_relu_values_and_subgradient():
    y, back = nn.relu(np.array([[-1.0, 0.0, 2.0]]))
    np.testing.assert_array_equal(y, [[0.0, 0.0, 2.0]])
    g = back(np.ones((1, 3)))
    np.testing.assert_array_equal(g, [[0.0, 0.0, 1.0]])


def test_embedding_repeated_id_accumulates():
    table = nn.Param(np.zeros((5, 3)))
    rows, back = nn.embedding(table, np.array([[2, 2]]))
    back(np.ones((1, 2, 3)))
    np.testing.assert_array_equal(table.grad[2], [2.0, 2.0, 2.0])
    np.testing.assert_array_equal(table.grad[0], [0.0, 0.0, 0.0])


def test_embedding_out_of_range():
    table = nn.Param(np.zeros((5, 3)))
    with pytest.raises(nn.NNError, match="out of range"):
        nn.embedding(table, np.array([[7]]))


def test_mean_pool_identical_rows():
    row = np.array([1.0, 2.0, 3.0])
    rows = np.tile(row, (1, 4, 1))
    pooled, _ = nn.mean_pool(rows)
    np.testing.assert_allclose(pooled[0], row)


def test_mean_pool_mask():
    rows = np.stack([np.array([[1.0, 1.0], [5.0, 5.0], [9.0, 9.0]])])
    mask = np.array([[1.0, 1.0, 0.0]])
    pooled, back = nn.mean_pool(rows, mask)
    np.testing.assert_allclose(pooled[0], [3.0, 3.0])
    g = back(np.ones((1, 2)))
    np.testing.assert_allclose(g[0, 2], [0.0, 0.0])  # masked slot gets nothing


def test_mean_pool_empty_sequence_rejected():
    with pytest.raises(nn.NNError, match="empty"):
        nn.mean_pool(np.zeros((1, 3, 2)), np.zeros((1, 3)))


# ---------------------------------------------------------------------------
# softmax cross-entropy
# ---------------------------------------------------------------------------


def test_softmax_ce_uniform_logits():
    for c in (2, 3, 7):
        losses, probs, _ = nn.softmax_ce(np.zeros((1, c)), np.array([0]))
        assert losses[0] == pytest.approx(np.log(c))
        np.testing.assert_allclose(probs, np.full((1, c), 1.0 / c))


def test_softmax_ce_confident_logits():
    logits = np.array([[1000.0, 0.0]])
    losses, _, _ = nn.softmax_ce(logits, np.array([0]))
    assert losses[0] == pytest.approx(0.0, abs=1e-12)


def test_softmax_ce_gradient_is_probs_minus_onehot():
    rng = np.random.default_rng(1)
    logits = rng.normal(size=(4, 3))
    targets = np.array([0, 2, 1, 1])
    losses, probs, back = nn.softmax_ce(logits, targets)
    g = back(np.ones(4))
    expected = probs.copy()
    expected[np.arange(4), targets] -= 1.0
    np.testing.assert_allclose(g, expected)


def test_softmax_ce_backward_matches_finite_differences():
    rng = np.random.default_rng(2)
    p = nn.Param(rng.normal(size=(3, 4)))
    targets = np.array([1, 3, 0])

    def f():
        losses, _, _ = nn.softmax_ce(p.data, targets)
        return float(losses.mean())

    _, _, back = nn.softmax_ce(p.data, targets)
    p.grad += back(np.full(3, 1.0 / 3.0))
    report = nn.grad_check(f, {"logits": p}, tol=1e-6)
    assert report.passed, report.max_rel_error


def test_softmax_ce_target_out_of_range():
    with pytest.raises(nn.NNError, match="target"):
        nn.softmax_ce(np.zeros((1, 2)), np.array([2]))


def test_softmax_ce_loss_nonnegative_property():
    rng = np.random.default_rng(3)
    for _ in range(50):
        logits = rng.normal(scale=5.0, size=(8, 3))
        targets = rng.integers(0, 3, size=8)
        losses, _, _ = nn.softmax_ce(logits, targets)
        assert np.all(losses >= 0)


# ---------------------------------------------------------------------------
# ce_on_probs
# ---------------------------------------------------------------------------


def test_ce_on_probs_values():
    losses, _ = nn.ce_on_probs(np.array([[0.5, 0.5]]), np.array([0]))
    assert losses[0] == pytest.approx(np.log(2))
    losses, _ = nn.ce_on_probs(np.array([[0.0, 1.0]]), np.array([1]))
    assert losses[0] == pytest.approx(0.0)


def test_ce_on_probs_mixture_of_identical_distributions():
    p = np.array([[0.3, 0.7]])
    mix = 0.5 * p + 0.5 * p
    a, _ = nn.ce_on_probs(p, np.array([1]))
    b, _ = nn.ce_on_probs(mix, np.array([1]))
    assert a[0] == pytest.approx(b[0])


def test_ce_on_probs_clamp_counter():
    counter = nn.ClampCounter()
    probs = np.array([[1.0, 0.0], [0.5, 0.5]])
    losses, back = nn.ce_on_probs(probs, np.array([1, 0]), counter)
    assert counter.events == 1
    assert np.isfinite(losses).all()
    g = back(np.ones(2))
    assert np.isfinite(g).all()


def test_ce_on_probs_rejects_non_distribution():
    with pytest.raises(nn.NNError, match="distribution"):
        nn.ce_on_probs(np.array([[0.9, 0.3]]), np.array([0]))


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------


def test_adam_first_step_is_signwise_lr():
    p = nn.Param(np.array([1.0, -2.0, 3.0]))
    p.grad[:] = np.array([0.3, -4.0, 1e-3])
    state = nn.AdamState.for_params({"p": p})
    before = p.data.copy()
    nn.adam_step({"p": p}, state, lr=0.1)
    step = p.data - before
    np.testing.assert_allclose(step, -0.1 * np.sign(p.grad), atol=1e-5)


def test_adam_zero_grad_no_update():
    p = nn.Param(np.array([1.0, 2.0]))
    state = nn.AdamState.for_params({"p": p})
    nn.adam_step({"p": p}, state, lr=0.1)
    np.testing.assert_array_equal(p.data, [1.0, 2.0])


def test_adam_quadratic_bowl_convergence():
    p = nn.Param(np.ones(8))
    state = nn.AdamState.for_params({"p": p})
    for _ in range(500):
        p.zero_grad()
        p.grad += p.data  # gradient of 0.5 * ||w||^2
        nn.adam_step({"p": p}, state, lr=1e-2)
    assert np.linalg.norm(p.data) < 1e-3


def test_adam_rejects_non_finite_gradient():
    p = nn.Param(np.array([1.0]))
    p.grad[:] = np.nan
    state = nn.AdamState.for_params({"p": p})
    with pytest.raises(nn.NonFiniteGradientError, match="'p'"):
        nn.adam_step({"p": p}, state, lr=0.1)


def test_adam_deterministic():
    def run():
        p = nn.Param(np.array([1.0, -1.0]))
        state = nn.AdamState.for_params({"p": p})
        for i in range(10):
            p.zero_grad()
            p.grad += np.array([0.5, -0.25]) * (i + 1)
            nn.adam_step({"p": p}, state, lr=1e-2)
        return p.data.copy()

    np.testing.assert_array_equal(run(), run())


# ---------------------------------------------------------------------------
# grad_check
# ---------------------------------------------------------------------------


def test_grad_check_sum_of_squares():
    p = nn.Param(np.array([0.5, -1.5, 2.0]))
    p.grad += 2.0 * p.data

    report = nn.grad_check(lambda: float((p.data**2).sum()), {"p": p}, tol=1e-8)
    assert report.passed and report.max_rel_error < 1e-8


def test_grad_check_catches_wrong_gradient():
    p = nn.Param(np.array([0.5, -1.5]))
    p.grad += 3.0 * p.data  # wrong on purpose
    report = nn.grad_check(lambda: float((p.data**2).sum()), {"p": p}, tol=1e-6)
    assert not report.passed


def test_per_layer_gradients_random_seeds():
    """Every layer's analytic backward matches central differences, 50 seeds."""
    worst = 0.0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        w = nn.Param(rng.normal(size=(5, 3)))
        b = nn.Param(rng.normal(size=3))
        table = nn.Param(rng.normal(size=(7, 5)))
        ids = rng.integers(0, 7, size=(2, 4))
        mask = np.ones((2, 4))
        targets = rng.integers(0, 3, size=2)
        params = {"w": w, "b": b, "table": table}

        def f():
            rows, _ = nn.embedding(table, ids)
            pooled, _ = nn.mean_pool(rows, mask)
            z, _ = nn.linear(pooled, w, b)
            a, _ = nn.tanh_act(z)
            r, _ = nn.relu(a + 0.05)  # nudge away from the kink
            losses, _, _ = nn.softmax_ce(r, targets)
            return float(losses.mean())

        rows, back_e = nn.embedding(table, ids)
        pooled, back_p = nn.mean_pool(rows, mask)
        z, back_l = nn.linear(pooled, w, b)
        a, back_t = nn.tanh_act(z)
        r, back_r = nn.relu(a + 0.05)
        losses, probs, back_ce = nn.softmax_ce(r, targets)
        g = back_ce(np.full(2, 0.5))
        g = back_l(back_t(back_r(g)))
        back_e(back_p(g))

        report = nn.grad_check(f, params, h=1e-5, tol=1e-6)
        worst = max(worst, report.max_rel_error)
        assert report.passed, (seed, report.per_param)
    assert worst < 1e-6


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------


def test_checkpoint_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    params = {"a": nn.Param(rng.normal(size=(3, 2))), "b": nn.Param(rng.normal(size=4))}
    path = tmp_path / "model.ckpt"
    nn.save_checkpoint(path, params, meta={"note": "x"})
    arrays, meta = nn.load_checkpoint(path)
    assert meta == {"note": "x"}
    np.testing.assert_array_equal(arrays["a"], params["a"].data)
    np.testing.assert_array_equal(arrays["b"], params["b"].data)


def test_checkpoint_bytes_deterministic(tmp_path):
    params = {"a": nn.Param(np.linspace(0, 1, 6).reshape(2, 3))}
    p1, p2 = tmp_path / "c1", tmp_path / "c2"
    nn.save_checkpoint(p1, params)
    nn.save_checkpoint(p2, params)
    assert p1.read_bytes() == p2.read_bytes()


def test_checkpoint_shape_mismatch_rejected(tmp_path):
    path = tmp_path / "model.ckpt"
    nn.save_checkpoint(path, {"a": nn.Param(np.zeros((2, 2)))})
    target = {"a": nn.Param(np.zeros((3, 2)))}
    with pytest.raises(nn.CheckpointError, match="shape mismatch"):
        nn.load_into(target, path)
    with pytest.raises(nn.CheckpointError, match="names differ"):
        nn.load_into({"b": nn.Param(np.zeros((2, 2)))}, path)


def test_checkpoint_bad_magic(tmp_path):
    path = tmp_path / "junk"
    path.write_bytes(b"nope")
    with pytest.raises(nn.CheckpointError, match="magic"):
        nn.load_checkpoint(path)
