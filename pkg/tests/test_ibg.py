import numpy as np
import pytest

from posmine.data import CorpusError, POSITIVE, NEGATIVE
from posmine.ibg import IbgConfig, run_ibg
from posmine.oracle import OracleError, TruthOracle

from conftest import make_corpus


def _unit(v):
    v = np.asarray(v, dtype=np.float64)
    return v / np.linalg.norm(v)


def seven_node_fixture():
    """One seed next to two positives and one negative; three more positives
    one hop further. All pairwise cosines hand-checked:

        s-a, s-b, s-c:  1/sqrt(1.25)      ~ 0.894  (> 0.8)
        s-d, s-e:       1/sqrt(2.21)      ~ 0.673  (< 0.8)
        s-f:            1/sqrt(4.24)      ~ 0.486  (< 0.8)
        a-d, b-e:       1.55/sqrt(1.25*2.21) ~ 0.933 (> 0.8)
        a-f:            1.9/sqrt(1.25*4.24)  ~ 0.825 (> 0.8)
        a-b:            1/1.25 = 0.8      (not > 0.8, irrelevant)
    """
    e = np.eye(4)
    seed = make_corpus([_unit(e[0])], ids=["s0"], source="synthetic")
    pool = make_corpus(
        [
            _unit(e[0] + 0.5 * e[1]),   # pa, positive
            _unit(e[0] + 0.5 * e[2]),   # pb, positive
            _unit(e[0] - 0.5 * e[1]),   # nc, negative
            _unit(e[0] + 1.1 * e[1]),   # pd, positive (reachable via pa)
            _unit(e[0] + 1.1 * e[2]),   # pe, positive (reachable via pb)
            _unit(e[0] + 1.8 * e[1]),   # pf, positive (reachable via pa)
        ],
        ids=["pa", "pb", "nc", "pd", "pe", "pf"],
        labels=[POSITIVE, POSITIVE, NEGATIVE, POSITIVE, POSITIVE, POSITIVE],
    )
    return pool, seed


class TestSevenNodeFixture:
    def test_exact_two_iteration_sequence(self):
        pool, seed = seven_node_fixture()
        log = run_ibg(pool, seed, IbgConfig(tau=0.8, d_max=10, T=2), TruthOracle(pool))
        assert len(log.iterations) == 2
        assert log.iterations[0].batch_ids == ["nc", "pa", "pb"]
        assert log.iterations[0].batch_precision == pytest.approx(2 / 3)
        assert log.iterations[1].batch_ids == ["pd", "pe", "pf"]
        assert log.iterations[1].batch_precision == 1.0
        assert log.positives() == ["pa", "pb", "pd", "pe", "pf"]

    def test_t1_is_single_shot(self):
        pool, seed = seven_node_fixture()
        log = run_ibg(pool, seed, IbgConfig(tau=0.8, d_max=10, T=1), TruthOracle(pool))
        assert len(log.iterations) == 1
        assert log.iterations[0].batch_ids == ["nc", "pa", "pb"]

    def test_tau_above_everything_stops_empty(self):
        pool, seed = seven_node_fixture()
        log = run_ibg(pool, seed, IbgConfig(tau=0.99, d_max=10, T=3), TruthOracle(pool))
        assert log.iterations == []
        assert log.labeled_ids() == []

    def test_plateau_no_new_positives_means_next_batch_empty(self):
        # make every first-hop neighbor negative: iteration 1 finds no
        # positives, so iteration 2 must have nothing new to query
        e = np.eye(4)
        seed = make_corpus([_unit(e[0])], ids=["s0"], source="synthetic")
        pool = make_corpus(
            [
                _unit(e[0] + 0.5 * e[1]),
                _unit(e[0] - 0.5 * e[1]),
                _unit(e[0] + 1.1 * e[1]),  # second hop, never reached
            ],
            ids=["na", "nb", "pc"],
            labels=[NEGATIVE, NEGATIVE, POSITIVE],
        )
        log = run_ibg(pool, seed, IbgConfig(tau=0.8, d_max=10, T=5), TruthOracle(pool))
        assert len(log.iterations) == 1
        assert log.iterations[0].batch_ids == ["na", "nb"]

    def test_degree_cap_respected_each_iteration(self):
        pool, seed = seven_node_fixture()
        log = run_ibg(pool, seed, IbgConfig(tau=0.8, d_max=2, T=4), TruthOracle(pool))
        for rec in log.iterations:
            assert len(rec.batch_ids) <= 2 * (1 + len(log.positives()))


class TestRunInvariants:
    def _random_fixture(self, rng_seed):
        rng = np.random.default_rng(rng_seed)
        pool_vecs = rng.standard_normal((60, 8))
        labels = [POSITIVE if rng.random() < 0.3 else NEGATIVE for _ in range(60)]
        pool = make_corpus(pool_vecs, labels=labels)
        seed = make_corpus(rng.standard_normal((3, 8)),
                           ids=[f"s{i}" for i in range(3)], source="synthetic")
        return pool, seed

    @pytest.mark.parametrize("rng_seed", [0, 1, 2])
    def test_batches_disjoint_and_queried_once(self, rng_seed):
        pool, seed = self._random_fixture(rng_seed)
        log = run_ibg(pool, seed, IbgConfig(tau=0.2, d_max=5, T=6), TruthOracle(pool))
        all_ids = log.labeled_ids()
        assert len(all_ids) == len(set(all_ids))

    def test_reproducible(self):
        pool, seed = self._random_fixture(7)
        cfg = IbgConfig(tau=0.3, d_max=4, T=4)
        a = run_ibg(pool, seed, cfg, TruthOracle(pool))
        b = run_ibg(pool, seed, cfg, TruthOracle(pool))
        assert [r.batch_ids for r in a.iterations] == [r.batch_ids for r in b.iterations]
        assert [r.labels for r in a.iterations] == [r.labels for r in b.iterations]

    def test_oracle_failure_preserves_log(self):
        pool, seed = seven_node_fixture()

        class Failing:
            name = "truth"

            def __init__(self):
                self.calls = 0

            def label(self, batch):
                self.calls += 1
                if self.calls > 1:
                    raise OracleError("down")
                return TruthOracle(pool).label(batch)

        log = run_ibg(pool, seed, IbgConfig(tau=0.8, d_max=10, T=3), Failing())
        assert log.failure == "down"
        assert len(log.iterations) == 1

    def test_seed_pool_overlap_rejected(self):
        pool, _ = seven_node_fixture()
        bad_seed = make_corpus([[1.0, 0.0, 0.0, 0.0]], ids=["pa"], source="synthetic")
        with pytest.raises(CorpusError, match="overlap"):
            run_ibg(pool, bad_seed, IbgConfig(), TruthOracle(pool))
