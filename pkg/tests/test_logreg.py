import numpy as np
import pytest

from posmine.data import NEGATIVE, POSITIVE
from posmine.logreg import (
    LrBaselineConfig,
    LrHyper,
    loss_and_grad,
    predict_proba,
    run_lr_baseline,
    train_logistic,
)
from posmine.oracle import TruthOracle

from conftest import clustered_corpus, make_corpus


def separable_fixture(n=40, margin=2.0, rng_seed=0):
    rng = np.random.default_rng(rng_seed)
    half = n // 2
    neg = rng.standard_normal((half, 2)) - margin
    pos = rng.standard_normal((half, 2)) + margin
    X = np.vstack([neg, pos])
    y = np.array([0.0] * half + [1.0] * half)
    return X, y


class TestTrainLogistic:
    def test_separable_fixture_perfect_accuracy(self):
        X, y = separable_fixture()
        model = train_logistic(X, y)
        preds = (predict_proba(model, X) > 0.5).astype(float)
        assert np.array_equal(preds, y)

    def test_single_class_rejected(self):
        X = np.random.default_rng(0).standard_normal((10, 3))
        with pytest.raises(ValueError, match="both classes"):
            train_logistic(X, np.ones(10))

    def test_duplicated_dataset_same_model(self):
        X, y = separable_fixture()
        a = train_logistic(X, y)
        b = train_logistic(np.vstack([X, X]), np.concatenate([y, y]))
        np.testing.assert_allclose(a.weights, b.weights, atol=1e-12)
        assert a.bias == pytest.approx(b.bias, abs=1e-12)

    def test_loss_nonincreasing(self):
        X, y = separable_fixture()
        model = train_logistic(X, y)
        diffs = np.diff(model.losses)
        assert np.all(diffs <= 1e-12)

    def test_deterministic(self):
        X, y = separable_fixture()
        a, b = train_logistic(X, y), train_logistic(X, y)
        np.testing.assert_array_equal(a.weights, b.weights)

    def test_warm_start_resumes_from_given_weights(self):
        X, y = separable_fixture()
        cold = train_logistic(X, y, LrHyper(epochs=50))
        warm = train_logistic(X, y, LrHyper(epochs=50), init=(cold.weights, cold.bias))
        full = train_logistic(X, y, LrHyper(epochs=100))
        np.testing.assert_allclose(warm.weights, full.weights, atol=1e-12)
        assert warm.losses[0] == pytest.approx(full.losses[50], abs=1e-12)


class TestPredictProba:
    def test_zero_weights_half(self):
        model = train_logistic(*separable_fixture(), LrHyper(epochs=1, learning_rate=0.0))
        p = predict_proba(model, np.random.default_rng(1).standard_normal((5, 2)))
        np.testing.assert_allclose(p, 0.5)

    def test_huge_logit_saturates(self):
        X, y = separable_fixture()
        model = train_logistic(X, y)
        model.weights[:] = [1000.0, 1000.0]
        model.bias = 0.0
        p = predict_proba(model, np.array([[10.0, 10.0]]))
        assert p[0] >= 1.0 - 1e-9
        assert p[0] < 1.0

    def test_hand_computed_sigmoid(self):
        X, y = separable_fixture()
        model = train_logistic(X, y)
        model.weights[:] = [0.5, -0.25]
        model.bias = 0.1
        x = np.array([[2.0, 4.0]])
        z = 0.5 * 2.0 - 0.25 * 4.0 + 0.1  # = 0.1
        assert predict_proba(model, x)[0] == pytest.approx(1 / (1 + np.exp(-z)))

    def test_dimension_mismatch(self):
        model = train_logistic(*separable_fixture())
        with pytest.raises(ValueError, match="mismatch"):
            predict_proba(model, np.zeros((2, 3)))


class TestGradient:
    def test_matches_central_finite_differences(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            n, dim = int(rng.integers(4, 20)), int(rng.integers(2, 6))
            X = rng.standard_normal((n, dim))
            y = rng.integers(0, 2, size=n).astype(float)
            if y.min() == y.max():
                y[0] = 1.0 - y[0]
            w = rng.standard_normal(dim)
            b = float(rng.standard_normal())
            l2 = 10.0 ** rng.uniform(-5, -2)
            _, grad_w, grad_b = loss_and_grad(w, b, X, y, l2)
            h = 1e-6
            for k in range(dim):
                wp, wm = w.copy(), w.copy()
                wp[k] += h
                wm[k] -= h
                lp, _, _ = loss_and_grad(wp, b, X, y, l2)
                lm, _, _ = loss_and_grad(wm, b, X, y, l2)
                fd = (lp - lm) / (2 * h)
                denom = max(abs(fd), abs(grad_w[k]), 1e-8)
                assert abs(fd - grad_w[k]) / denom < 1e-5
            lp, _, _ = loss_and_grad(w, b + h, X, y, l2)
            lm, _, _ = loss_and_grad(w, b - h, X, y, l2)
            fd_b = (lp - lm) / (2 * h)
            assert abs(fd_b - grad_b) / max(abs(fd_b), abs(grad_b), 1e-8) < 1e-5


def lr_world(rng_seed=0):
    labels = [POSITIVE, NEGATIVE, NEGATIVE]
    pool = clustered_corpus(3, 60, 8, 0.3, rng_seed=rng_seed,
                            labels=labels)
    seeds = clustered_corpus(1, 6, 8, 0.3, rng_seed=rng_seed + 1, prefix="s")
    # synthetic positives: re-embed near the positive cluster
    rng = np.random.default_rng(rng_seed)
    basis, _ = np.linalg.qr(rng.standard_normal((8, 3)))
    vecs = basis[:, 0][None, :] + 0.3 * rng.standard_normal((6, 8)) / np.sqrt(8)
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    seeds = make_corpus(vecs, ids=[f"s{i}" for i in range(6)], source="synthetic")
    return pool, seeds


class TestRunLrBaseline:
    def test_budget_accounting_exact(self):
        pool, seeds = lr_world()
        cfg = LrBaselineConfig(budget=50, k0=10, rounds=4, n_init_negatives=5, rng_seed=3)
        log = run_lr_baseline(pool, seeds, cfg, TruthOracle(pool))
        for scored, rec in zip(log.extra["scored_per_round"], log.iterations):
            assert scored <= 50
            assert len(rec.batch_ids) <= 100  # k_max default 10*k0
        assert log.extra["scored_per_round"][0] == 50

    def test_unbudgeted_scores_whole_pool(self):
        pool, seeds = lr_world()
        cfg = LrBaselineConfig(budget=None, k0=10, rounds=2, n_init_negatives=5, rng_seed=3)
        log = run_lr_baseline(pool, seeds, cfg, TruthOracle(pool))
        expected_first = len(pool) - 5  # init negatives are excluded
        assert log.extra["scored_per_round"][0] == expected_first

    def test_unbudgeted_dominates_budgeted(self):
        # 10 paired trials: scoring everything is at least as good as a
        # tight budget at every round, on average
        from posmine.metrics import evaluate

        wins = 0
        for t in range(10):
            pool, seeds = lr_world(rng_seed=t)
            oracle = TruthOracle(pool)
            unb = run_lr_baseline(
                pool, seeds,
                LrBaselineConfig(budget=None, k0=8, rounds=4, n_init_negatives=4, rng_seed=t),
                oracle,
            )
            bud = run_lr_baseline(
                pool, seeds,
                LrBaselineConfig(budget=12, k0=8, rounds=4, n_init_negatives=4, rng_seed=t),
                oracle,
            )
            unb_recall = evaluate(unb, pool)[-1].recall_cum
            bud_recall = evaluate(bud, pool)[-1].recall_cum
            wins += unb_recall >= bud_recall - 1e-9
        assert wins >= 8

    def test_init_negatives_logged_and_excluded(self):
        pool, seeds = lr_world()
        cfg = LrBaselineConfig(budget=None, k0=10, rounds=3, n_init_negatives=7, rng_seed=1)
        log = run_lr_baseline(pool, seeds, cfg, TruthOracle(pool))
        init = log.extra["init_negative_ids"]
        assert len(init) == 7
        assert all(pool.record(i).truth_label == NEGATIVE for i in init)
        assert not set(init) & set(log.labeled_ids())

    def test_budget_equal_k0_takes_whole_sample(self):
        # boundary: B = K0 makes the candidate set the entire random sample
        pool, seeds = lr_world()
        cfg = LrBaselineConfig(budget=10, k0=10, rounds=1, n_init_negatives=5, rng_seed=2)
        log = run_lr_baseline(pool, seeds, cfg, TruthOracle(pool))
        assert log.extra["scored_per_round"] == [10]
        assert len(log.iterations[0].batch_ids) == 10

    def test_budget_below_k0_rejected(self):
        pool, seeds = lr_world()
        with pytest.raises(ValueError, match="budget"):
            run_lr_baseline(
                pool, seeds,
                LrBaselineConfig(budget=5, k0=10, rounds=1), TruthOracle(pool),
            )

    def test_deterministic(self):
        pool, seeds = lr_world()
        cfg = LrBaselineConfig(budget=40, k0=10, rounds=3, n_init_negatives=5, rng_seed=9)
        a = run_lr_baseline(pool, seeds, cfg, TruthOracle(pool))
        b = run_lr_baseline(pool, seeds, cfg, TruthOracle(pool))
        assert [r.batch_ids for r in a.iterations] == [r.batch_ids for r in b.iterations]
