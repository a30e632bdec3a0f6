import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import exhaustive_wcss_1d, mlp_gradcheck_worst
from synwatch.classifiers import (KMeansModel, LgrModel, MlpModel, TrainConfig,
                                  elbow_curve, kmeans_assign, kmeans_best, kmeans_fit,
                                  lgr_fit, lgr_predict, map_clusters_to_labels, mlp_fit,
                                  mlp_predict)
from synwatch.errors import ConfigError, ContractViolation, TrainingError
from synwatch.scaling import Scaler


def _identity_scaler(d):
    return Scaler(mean=np.zeros(d), std=np.ones(d))


# --------------------------------------------------------------------------
# logistic regression


def test_zero_model_predicts_half():
    model = LgrModel(weights=np.zeros(3), bias=0.0, scaler=_identity_scaler(3))
    probs, labels = lgr_predict(model, np.arange(6.0).reshape(2, 3))
    assert np.all(probs == 0.5)
    assert np.all(labels == 1)  # ties break toward attack


def test_lgr_separates_1d_toy():
    X = np.array([[0.0], [1.0], [10.0], [11.0]])
    y = np.array([0, 0, 1, 1])
    model = lgr_fit(X, y)
    _, labels = lgr_predict(model, np.array([[0.5], [10.5], [11.0]]))
    assert labels.tolist() == [0, 1, 1]


def test_lgr_loss_monotone():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(60, 3))
    y = (X[:, 0] + 0.3 * rng.normal(size=60) > 0).astype(int)
    history = []
    lgr_fit(X, y, TrainConfig(learning_rate=0.5, max_epochs=300), loss_history=history)
    diffs = np.diff(history)
    assert (diffs <= 1e-12).all()


def test_lgr_rejects_single_class():
    with pytest.raises(TrainingError):
        lgr_fit(np.ones((4, 1)), np.zeros(4, dtype=int))


def test_lgr_rejects_non_finite():
    X = np.array([[0.0], [np.nan]])
    with pytest.raises(ContractViolation):
        lgr_fit(X, np.array([0, 1]))


def test_lgr_scaler_standardizes_training_data():
    rng = np.random.default_rng(5)
    X = rng.normal(loc=40.0, scale=9.0, size=(200, 2))
    y = (X[:, 0] > 40.0).astype(int)
    model = lgr_fit(X, y)
    Xs = model.scaler.transform(X)
    assert np.abs(Xs.mean(axis=0)).max() < 1e-9
    assert np.abs(Xs.std(axis=0) - 1.0).max() < 1e-9


def test_lgr_predict_arity_mismatch():
    model = LgrModel(weights=np.zeros(2), bias=0.0, scaler=_identity_scaler(2))
    with pytest.raises(ContractViolation):
        lgr_predict(model, np.zeros((3, 1)))


@settings(max_examples=20, deadline=None)
@given(st.randoms(use_true_random=False))
def test_lgr_labels_row_order_invariant(rnd):
    X = np.array([[0.0], [1.0], [9.0], [12.0]])
    y = np.array([0, 0, 1, 1])
    model = lgr_fit(X, y)
    queries = [[0.2], [5.6], [10.4], [0.9], [11.8]]
    order = list(range(len(queries)))
    rnd.shuffle(order)
    _, direct = lgr_predict(model, np.array(queries))
    _, shuffled = lgr_predict(model, np.array([queries[i] for i in order]))
    assert direct[order].tolist() == shuffled.tolist()


# --------------------------------------------------------------------------
# multilayer perceptron


def test_zero_weight_mlp_outputs_half():
    model = MlpModel(W1=np.zeros((6, 12)), b1=np.zeros(6), W2=np.zeros((1, 6)), b2=0.0,
                     scaler=_identity_scaler(12))
    probs, _ = mlp_predict(model, np.random.default_rng(0).normal(size=(4, 12)))
    assert np.all(probs == 0.5)


def test_hand_built_single_unit_network():
    # one pass-through hidden unit at activation 1: output sigmoid(10*1 - 5)
    W1 = np.zeros((6, 3))
    W1[0, 0] = 1.0
    W2 = np.zeros((1, 6))
    W2[0, 0] = 10.0
    model = MlpModel(W1=W1, b1=np.zeros(6), W2=W2, b2=-5.0, scaler=_identity_scaler(3))
    probs, labels = mlp_predict(model, np.array([[1.0, 0.0, 0.0]]))
    assert probs[0] == pytest.approx(0.9933071490757153, abs=1e-12)
    assert labels[0] == 1


def test_mlp_gradients_match_finite_differences():
    assert mlp_gradcheck_worst(seed=0) <= 1e-4


def test_mlp_learns_separable_training_set():
    rng = np.random.default_rng(8)
    X = np.vstack([rng.poisson(50, size=(120, 12)), rng.poisson(500, size=(120, 12))])
    y = np.array([0] * 120 + [1] * 120)
    model = mlp_fit(X, y, TrainConfig(seed=1), with_sigma=False)
    _, labels = mlp_predict(model, X)
    assert (labels == y).mean() >= 0.99


def test_mlp_arity_enforced_with_sigma_flag():
    X = np.random.default_rng(0).normal(size=(40, 12))
    y = np.array([0, 1] * 20)
    with pytest.raises(ConfigError):
        mlp_fit(X, y, with_sigma=True)
    mlp_fit(X, y, TrainConfig(max_epochs=1), with_sigma=False)  # 12 columns: fine


def test_mlp_deterministic_per_seed():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(64, 4))
    y = (X[:, 0] > 0).astype(int)
    a = mlp_fit(X, y, TrainConfig(seed=7, max_epochs=5))
    b = mlp_fit(X, y, TrainConfig(seed=7, max_epochs=5))
    assert np.array_equal(a.W1, b.W1) and np.array_equal(a.W2, b.W2)


def test_mlp_labels_row_order_invariant():
    rng = np.random.default_rng(12)
    X = rng.normal(size=(48, 3))
    y = (X.sum(axis=1) > 0).astype(int)
    model = mlp_fit(X, y, TrainConfig(seed=2, max_epochs=20))
    queries = rng.normal(size=(15, 3))
    order = rng.permutation(15)
    _, direct = mlp_predict(model, queries)
    _, shuffled = mlp_predict(model, queries[order])
    assert np.array_equal(direct[order], shuffled)


# --------------------------------------------------------------------------
# K-Means


def test_kmeans_all_identical_points():
    X = np.full((6, 1), 3.0)
    model = kmeans_fit(X, 2, TrainConfig(seed=0))
    assert model.wcss == 0.0
    assert np.allclose(model.centroids, 3.0)


def test_kmeans_two_pairs():
    X = np.array([[0.0], [1.0], [10.0], [11.0]])
    model = kmeans_fit(X, 2, TrainConfig(seed=0))
    assert sorted(model.centroids.ravel().tolist()) == [0.5, 10.5]
    assert model.wcss == pytest.approx(1.0, abs=1e-12)


def test_kmeans_needs_enough_points():
    with pytest.raises(TrainingError):
        kmeans_fit(np.zeros((1, 1)), 2)


def test_kmeans_wcss_monotone_and_fixed_point():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(200, 2))
    history = []
    model = kmeans_fit(X, 3, TrainConfig(seed=2), wcss_history=history)
    assert all(b <= a + 1e-9 for a, b in zip(history, history[1:]))
    assign = kmeans_assign(model, X)
    again = kmeans_assign(model, X)
    assert np.array_equal(assign, again)
    for c in range(3):
        members = X[assign == c]
        assert np.allclose(members.mean(axis=0), model.centroids[c], atol=1e-9)


def test_kmeans_matches_exhaustive_partitions():
    rng = np.random.default_rng(7)
    for _ in range(12):
        n = int(rng.integers(2, 9))
        vals = rng.uniform(0.0, 100.0, size=n)
        model = kmeans_best(vals.reshape(-1, 1), 2,
                            TrainConfig(seed=int(rng.integers(0, 2 ** 31))), restarts=20)
        assert model.wcss == pytest.approx(exhaustive_wcss_1d(vals), abs=1e-9)


def test_assign_tie_goes_to_lowest_id():
    model = KMeansModel(centroids=np.array([[0.0], [2.0]]), k=2, wcss=0.0)
    assert kmeans_assign(model, np.array([[1.0]])).tolist() == [0]
    assert kmeans_assign(model, np.array([[0.0]])).tolist() == [0]
    assert kmeans_assign(model, np.array([[0.4]])).tolist() == [0]


def test_assign_arity_mismatch():
    model = KMeansModel(centroids=np.zeros((2, 2)), k=2, wcss=0.0)
    with pytest.raises(ContractViolation):
        kmeans_assign(model, np.zeros((1, 3)))


# --------------------------------------------------------------------------
# elbow and label mapping


def test_elbow_kmax_one():
    X = np.arange(10.0).reshape(-1, 1)
    curve, chosen = elbow_curve(X, 1)
    assert len(curve) == 1
    assert chosen == 1


def test_elbow_two_separated_clusters():
    rng = np.random.default_rng(13)
    vals = np.concatenate([rng.normal(50.0, 5.0, 300), rng.normal(500.0, 20.0, 100)])
    curve, chosen = elbow_curve(vals.reshape(-1, 1), 6)
    assert chosen == 2
    wcss = [w for _, w in curve]
    assert all(b <= a + 1e-9 for a, b in zip(wcss, wcss[1:]))


def test_map_clusters_high_mean_is_attack():
    model = KMeansModel(centroids=np.array([[5.0], [500.0]]), k=2, wcss=0.0)
    mapped = map_clusters_to_labels(model)
    assert mapped.label_map == {1: 1, 0: 0}
    flipped = map_clusters_to_labels(
        KMeansModel(centroids=np.array([[500.0], [5.0]]), k=2, wcss=0.0))
    assert flipped.label_map == {0: 1, 1: 0}


def test_map_clusters_tie_prefers_cluster_one():
    model = KMeansModel(centroids=np.array([[7.0], [7.0]]), k=2, wcss=0.0)
    assert map_clusters_to_labels(model).label_map == {1: 1, 0: 0}


def test_map_clusters_requires_k2():
    model = KMeansModel(centroids=np.zeros((3, 1)), k=3, wcss=0.0)
    with pytest.raises(ConfigError):
        map_clusters_to_labels(model)


def test_mapping_maximizes_agreement_on_separable_data():
    rng = np.random.default_rng(23)
    counts = np.concatenate([rng.poisson(50, 400), rng.poisson(500, 100)]).astype(float)
    truth = np.array([0] * 400 + [1] * 100)
    model = map_clusters_to_labels(kmeans_fit(counts.reshape(-1, 1), 2, TrainConfig(seed=1)))
    mapping = np.array([model.label_map[0], model.label_map[1]])
    predicted = mapping[kmeans_assign(model, counts.reshape(-1, 1))]
    agreement = (predicted == truth).mean()
    flipped = (1 - predicted == truth).mean()
    assert agreement >= flipped
    assert agreement == 1.0
