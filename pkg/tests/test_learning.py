import json

import numpy as np
import pytest

from reconfig import learning
from reconfig.learning import (DivergenceError, TrainingBatch, TrainSpec,
                               gradient_check, train_configuration)
from reconfig.pathway import (FeedForwardNetwork, MultiplexedPathway,
                              pathway_to_dict, random_network, random_pathway)


class TestClosedForm:
    def test_single_linear_step(self):
        m0 = np.array([[0.5, -0.2], [0.1, 0.3]])
        path = MultiplexedPathway([
            FeedForwardNetwork([m0.copy()], ["identity"]),
            FeedForwardNetwork([np.eye(2)], ["identity"]),
        ])
        x = np.array([1.0, 2.0])
        t = np.array([0.0, 1.0])
        lr = 0.1
        train_configuration(path, 0, TrainingBatch([x], [t]),
                            TrainSpec(learning_rate=lr, epochs=1))
        want = m0 - lr * np.outer(m0 @ x - t, x)
        np.testing.assert_allclose(path.banks[0].layers[0], want, rtol=1e-12)

    def test_zero_learning_rate(self):
        rng = np.random.default_rng(0)
        path = random_pathway(rng, 2, [2, 3, 2], "logistic-sigmoid")
        before = [m.copy() for m in path.banks[0].layers]
        batch = TrainingBatch(rng.standard_normal((4, 2)),
                              rng.uniform(0, 1, (4, 2)))
        losses = train_configuration(path, 0, batch,
                                     TrainSpec(learning_rate=0.0, epochs=5))
        for m, b in zip(path.banks[0].layers, before):
            assert np.array_equal(m, b)
        assert np.all(losses == losses[0])


class TestGradientCheck:
    def test_linear_squared_error(self):
        rng = np.random.default_rng(1)
        net = random_network(rng, [3, 2], "identity")
        batch = TrainingBatch(rng.standard_normal((5, 3)),
                              rng.standard_normal((5, 2)))
        assert gradient_check(net, batch, "squared-error") < 1e-9

    def test_zero_weight_sigmoid(self):
        net = FeedForwardNetwork([np.zeros((2, 2)), np.zeros((2, 2))],
                                 ["logistic-sigmoid"] * 2)
        batch = TrainingBatch(np.array([[1.0, -1.0]]), np.array([[1.0, 0.0]]))
        err = gradient_check(net, batch, "squared-error")
        assert np.isfinite(err) and err < 1e-5

    def test_two_layer_sigmoid_finite_differences(self):
        rng = np.random.default_rng(9)
        net = random_network(rng, [3, 4, 2], "logistic-sigmoid")
        batch = TrainingBatch(rng.standard_normal((6, 3)),
                              rng.uniform(0.1, 0.9, (6, 2)))
        assert gradient_check(net, batch, "squared-error") < 1e-5

    def test_three_layer_random(self):
        rng = np.random.default_rng(13)
        net = random_network(rng, [4, 5, 5, 3], "logistic-sigmoid")
        batch = TrainingBatch(rng.standard_normal((4, 4)),
                              rng.uniform(0.1, 0.9, (4, 3)))
        assert gradient_check(net, batch, "squared-error") < 1e-5

    def test_cross_entropy_sigmoid(self):
        rng = np.random.default_rng(14)
        net = random_network(rng, [3, 4, 2], "logistic-sigmoid", scale=0.5)
        batch = TrainingBatch(rng.standard_normal((5, 3)),
                              rng.integers(0, 2, (5, 2)).astype(float))
        assert gradient_check(net, batch, "cross-entropy-with-sigmoid") < 1e-5

    def test_xent_requires_sigmoid_output(self):
        rng = np.random.default_rng(15)
        net = random_network(rng, [2, 2], "identity")
        batch = TrainingBatch(np.ones((1, 2)), np.ones((1, 2)))
        with pytest.raises(ValueError, match="sigmoid"):
            gradient_check(net, batch, "cross-entropy-with-sigmoid")

    def test_normalize_layer(self):
        rng = np.random.default_rng(16)
        net = FeedForwardNetwork(
            [rng.standard_normal((4, 3)), rng.standard_normal((2, 4))],
            ["euclidean-normalize", "identity"])
        batch = TrainingBatch(rng.standard_normal((3, 3)),
                              rng.standard_normal((3, 2)))
        assert gradient_check(net, batch, "squared-error") < 1e-5


class TestIsolation:
    def test_other_banks_byte_identical(self):
        rng = np.random.default_rng(2)
        path = random_pathway(rng, 4, [3, 4, 2], "logistic-sigmoid")
        batch = TrainingBatch(rng.standard_normal((8, 3)),
                              rng.uniform(0.1, 0.9, (8, 2)))

        def snapshot(r):
            return json.dumps(pathway_to_dict(path)["banks"][r])

        before = [snapshot(r) for r in range(4)]
        train_configuration(path, 1, batch,
                            TrainSpec(learning_rate=0.1, epochs=20))
        after = [snapshot(r) for r in range(4)]
        assert after[1] != before[1]
        for r in (0, 2, 3):
            assert after[r] == before[r]


class TestDescentAndDivergence:
    def test_loss_non_increasing_with_halving(self):
        rng = np.random.default_rng(3)
        path = random_pathway(rng, 1, [3, 6, 2], "logistic-sigmoid")
        batch = TrainingBatch(rng.standard_normal((10, 3)),
                              rng.uniform(0.1, 0.9, (10, 2)))
        losses = train_configuration(
            path, 0, batch,
            TrainSpec(learning_rate=2.0, epochs=30, halve_on_increase=True))
        assert np.all(np.diff(losses) <= 0)

    def test_divergence_names_epoch(self):
        path = MultiplexedPathway(
            [FeedForwardNetwork([np.array([[1.0]])], ["identity"])])
        batch = TrainingBatch([[1.0]], [[100.0]])
        with pytest.raises(DivergenceError) as exc:
            train_configuration(path, 0, batch,
                                TrainSpec(learning_rate=1e12, epochs=500))
        assert exc.value.epoch >= 1

    def test_loss_curve_csv(self, tmp_path):
        f = tmp_path / "loss.csv"
        learning.write_loss_curve(f, [1.5, 0.75])
        assert f.read_text() == "epoch,loss\n0,1.5\n1,0.75\n"
