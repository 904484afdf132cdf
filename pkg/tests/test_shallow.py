"""Shallow model tests: oracles, worked splits, persistence."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from usprivacy.encode import build_vocab, encode_corpus
from usprivacy.errors import ConfigError, DataError
from usprivacy.shallow import (DecisionTree, GaussianNaiveBayes,
                               KNearestNeighbors, LinearSVM,
                               LogisticRegression, RandomForest,
                               dictionary_features, labels_of, load_model,
                               pool_labels_of, text_features)
from usprivacy.util import rng_for


def blobs(n: int = 40, gap: float = 4.0, seed: int = 1):
    r = rng_for(seed, "blobs")
    half = n // 2
    x0 = r.normal(0.0, 1.0, size=(half, 3))
    x1 = r.normal(gap, 1.0, size=(n - half, 3))
    X = np.vstack([x0, x1])
    y = np.concatenate([np.zeros(half), np.ones(n - half)])
    perm = r.permutation(n)
    return X[perm], y[perm]


# -- features ----------------------------------------------------------------

@pytest.fixture(scope="module")
def encoded_five(small_corpus_module, site_member_module, seed_dict_module):
    stories = list(small_corpus_module.stories) + [site_member_module]
    tok = build_vocab(stories, "token")
    dep = build_vocab(stories, "dep")
    samples = encode_corpus(stories, tok, dep, seed_dict_module)
    return stories, tok, dep, samples


@pytest.fixture(scope="module")
def small_corpus_module():
    from usprivacy.corpus import load_corpus
    from pathlib import Path
    return load_corpus(Path(__file__).parent / "data" / "stories_small.jsonl")


@pytest.fixture(scope="module")
def site_member_module():
    from usprivacy.corpus import load_corpus
    from pathlib import Path
    corpus = load_corpus(
        Path(__file__).parent / "data" / "story_site_member.jsonl")
    return corpus.stories[0]


@pytest.fixture(scope="module")
def seed_dict_module():
    from usprivacy.lexicon import load_seed_dictionary
    return load_seed_dictionary()


class TestTextFeatures:
    def test_width_covers_all_views(self, encoded_five):
        _, tok, dep, samples = encoded_five
        fm = text_features(samples, tok, dep)
        assert fm.width == (tok.size - 1) + (dep.size - 1) + 37
        assert fm.X.shape == (5, fm.width)
        assert fm.ids[4] == "site-0001"

    def test_token_counts_worked(self, encoded_five):
        _, tok, dep, samples = encoded_five
        fm = text_features(samples, tok, dep)
        row = fm.X[4]
        col = {name: i for i, name in enumerate(fm.names)}
        assert row[col["tok:to"]] == 2.0
        assert row[col["tok:PERSON"]] == 2.0
        assert row[col["tok:ORG"]] == 1.0
        assert row[col["tok:my"]] == 1.0

    def test_pad_not_counted(self, encoded_five):
        _, tok, dep, samples = encoded_five
        fm = text_features(samples, tok, dep)
        tok_width = tok.size - 1
        for sample, row in zip(samples, fm.X):
            assert row[:tok_width].sum() == (sample.token_ids != 0).sum()

    def test_dep_fractions_worked(self, encoded_five):
        stories, tok, dep, samples = encoded_five
        fm = text_features(samples, tok, dep)
        col = {name: i for i, name in enumerate(fm.names)}
        assert fm.X[4, col["dep:prep"]] == pytest.approx(4 / 24, abs=0)
        # generic oracle: fractions must match direct counting
        for story, row in zip(stories, fm.X):
            total = len(story.annotation.dep)
            for label in set(story.annotation.dep):
                expected = story.annotation.dep.count(label) / total
                assert row[col[f"dep:{label}"]] == pytest.approx(
                    expected, abs=1e-15)

    def test_oov_is_counted(self, small_corpus_module, site_member_module,
                            seed_dict_module):
        tok = build_vocab(small_corpus_module.stories, "token")
        dep = build_vocab(small_corpus_module.stories, "dep")
        samples = encode_corpus(
            [site_member_module], tok, dep, seed_dict_module)
        fm = text_features(samples, tok, dep)
        oov_col = fm.names.index("tok:<oov>")
        assert fm.X[0, oov_col] > 0

    def test_aux_passthrough(self, encoded_five):
        _, tok, dep, samples = encoded_five
        fm = text_features(samples, tok, dep)
        assert np.array_equal(fm.X[4, -37:], samples[4].aux)


class TestDictionaryFeatures:
    def test_site_member_fraction(self, encoded_five, seed_dict_module):
        _, _, _, samples = encoded_five
        fm = dictionary_features(samples, seed_dict_module)
        assert fm.width == 8
        col = fm.names.index("pw:OpenVisible")
        assert fm.X[4, col] == float(Fraction(2, 24))
        assert fm.X[4].sum() == fm.X[4, col]

    def test_labels_and_pool_labels(self, encoded_five):
        _, _, _, samples = encoded_five
        assert labels_of(samples).tolist() == [0.0, 0.0, 1.0, 1.0, 1.0]
        # only stories that both match the dictionary and disclose count
        assert pool_labels_of(samples).tolist() == [0.0, 0.0, 1.0, 0.0, 1.0]


# -- logistic regression -------------------------------------------------------

class TestLogisticRegression:
    def test_fit_beats_zero_weights(self):
        X, y = blobs(seed=2)
        model = LogisticRegression().fit(X, y)
        zero = LogisticRegression()
        zero.w = np.zeros(X.shape[1])
        assert model.loss(X, y) < zero.loss(X, y)

    def test_zero_loss_is_log_two(self):
        X, y = blobs(seed=3)
        zero = LogisticRegression()
        zero.w = np.zeros(X.shape[1])
        assert zero.loss(X, y) == pytest.approx(np.log(2), abs=1e-12)

    def test_separable_accuracy(self):
        X, y = blobs(seed=4)
        model = LogisticRegression().fit(X, y)
        assert (model.predict(X) == y).mean() == 1.0

    def test_deterministic(self):
        X, y = blobs(seed=5)
        a = LogisticRegression().fit(X, y)
        b = LogisticRegression().fit(X, y)
        assert np.array_equal(a.w, b.w) and a.b == b.b

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000))
    def test_fit_never_loses_to_zero(self, seed):
        r = rng_for(seed, "lr-prop")
        X = r.normal(size=(12, 3))
        y = r.integers(0, 2, size=12).astype(np.float64)
        model = LogisticRegression(max_iter=200).fit(X, y)
        zero = LogisticRegression()
        zero.w = np.zeros(3)
        assert model.loss(X, y) <= zero.loss(X, y) + 1e-12

    def test_unfitted_predict_rejected(self):
        with pytest.raises(ConfigError, match="not fitted"):
            LogisticRegression().predict_score(np.zeros((1, 2)))


class TestLinearSVM:
    def test_separable_accuracy(self):
        # subgradient steps leave a few margin violations; near-perfect
        # separation is all a finite Pegasos run guarantees
        X, y = blobs(seed=6)
        model = LinearSVM(seed=1).fit(X, y)
        assert (model.predict(X) == y).mean() >= 0.9

    def test_scores_in_unit_interval(self):
        X, y = blobs(seed=7)
        s = LinearSVM(seed=2).fit(X, y).predict_score(X)
        assert ((s >= 0) & (s <= 1)).all()

    def test_deterministic_given_seed(self):
        X, y = blobs(seed=8)
        a = LinearSVM(seed=3).fit(X, y)
        b = LinearSVM(seed=3).fit(X, y)
        assert np.array_equal(a.w, b.w) and a.b == b.b


class TestGaussianNB:
    def test_symmetric_point_scores_half(self):
        model = GaussianNaiveBayes().fit(
            np.array([[0.0], [2.0]]), np.array([0.0, 1.0]))
        s = model.predict_score(np.array([[1.0], [0.1], [1.9]]))
        assert s[0] == pytest.approx(0.5, abs=1e-12)
        assert s[1] < 0.5 < s[2]
        assert model.predict(np.array([[1.0]]))[0] == 0

    def test_posteriors_sum_to_one(self):
        X, y = blobs(seed=9)
        direct = GaussianNaiveBayes().fit(X, y).predict_score(X)
        flipped = GaussianNaiveBayes().fit(X, 1.0 - y).predict_score(X)
        assert np.abs(direct + flipped - 1.0).max() < 1e-12

    def test_single_class_training(self):
        X = rng_for(10, "x").normal(size=(5, 2))
        model = GaussianNaiveBayes().fit(X, np.ones(5))
        assert model.predict_score(X).tolist() == [1.0] * 5
        model0 = GaussianNaiveBayes().fit(X, np.zeros(5))
        assert model0.predict_score(X).tolist() == [0.0] * 5

    def test_constant_features_do_not_crash(self):
        X = np.ones((6, 3))
        y = np.array([0.0, 1.0, 0.0, 1.0, 0.0, 1.0])
        s = GaussianNaiveBayes().fit(X, y).predict_score(X)
        assert np.isfinite(s).all()

    def test_separable_accuracy(self):
        X, y = blobs(seed=11)
        model = GaussianNaiveBayes().fit(X, y)
        assert (model.predict(X) == y).mean() == 1.0


# -- k-nearest neighbors --------------------------------------------------------

def knn_oracle(train_X, train_y, queries, k):
    """Independent exhaustive scan with the same per-row arithmetic."""
    k = min(k, train_X.shape[0])
    out = []
    for q in queries:
        d2 = [float(((row - q) ** 2).sum()) for row in train_X]
        order = sorted(range(len(d2)), key=lambda i: (d2[i], i))[:k]
        out.append(sum(train_y[i] for i in order) / k)
    return np.array(out)


class TestKNN:
    def test_matches_exhaustive_oracle(self):
        r = rng_for(12, "knn")
        X = r.normal(size=(30, 4))
        y = r.integers(0, 2, size=30).astype(np.float64)
        Q = r.normal(size=(10, 4))
        model = KNearestNeighbors(k=5).fit(X, y)
        assert np.array_equal(model.predict_score(Q), knn_oracle(X, y, Q, 5))

    def test_tie_goes_to_lower_index(self):
        X = np.array([[0.0], [0.0], [2.0]])
        y = np.array([1.0, 0.0, 0.0])
        model = KNearestNeighbors(k=1).fit(X, y)
        # both index 0 and 1 are at distance zero; stable sort keeps 0
        assert model.predict_score(np.array([[0.0]]))[0] == 1.0

    def test_duplicate_rows_match_oracle(self):
        r = rng_for(13, "knn-dup")
        base = r.normal(size=(8, 3))
        X = np.vstack([base, base, base])
        y = r.integers(0, 2, size=24).astype(np.float64)
        Q = np.vstack([base[:4], r.normal(size=(4, 3))])
        model = KNearestNeighbors(k=5).fit(X, y)
        assert np.array_equal(model.predict_score(Q), knn_oracle(X, y, Q, 5))

    def test_k_capped_at_train_size(self):
        X = np.array([[0.0], [1.0]])
        y = np.array([1.0, 1.0])
        model = KNearestNeighbors(k=5).fit(X, y)
        assert model.predict_score(np.array([[0.5]]))[0] == 1.0

    def test_even_k_tie_predicts_zero(self):
        X = np.array([[0.0], [1.0]])
        y = np.array([0.0, 1.0])
        model = KNearestNeighbors(k=2).fit(X, y)
        assert model.predict_score(np.array([[0.5]]))[0] == 0.5
        assert model.predict(np.array([[0.5]]))[0] == 0

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000), st.integers(1, 7))
    def test_oracle_property(self, seed, k):
        r = rng_for(seed, "knn-prop")
        X = np.round(r.normal(size=(12, 2)), 1)  # rounding forces ties
        y = r.integers(0, 2, size=12).astype(np.float64)
        Q = np.round(r.normal(size=(5, 2)), 1)
        model = KNearestNeighbors(k=k).fit(X, y)
        assert np.array_equal(model.predict_score(Q), knn_oracle(X, y, Q, k))


# -- decision tree ----------------------------------------------------------------

class TestDecisionTree:
    def test_threshold_is_midpoint(self):
        model = DecisionTree().fit(np.array([[0.0], [1.0]]),
                                   np.array([0.0, 1.0]))
        assert model.threshold[0] == 0.5
        assert model.predict(np.array([[0.25], [0.75]])).tolist() == [0, 1]

    def test_xor_needs_zero_gain_split(self):
        X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        y = np.array([0.0, 1.0, 1.0, 0.0])
        model = DecisionTree().fit(X, y)
        assert (model.predict(X) == y).all()
        assert model.depth() == 2

    def test_consistent_data_memorized(self):
        r = rng_for(14, "dt")
        X = r.normal(size=(50, 4))
        y = r.integers(0, 2, size=50).astype(np.float64)
        model = DecisionTree().fit(X, y)
        assert (model.predict(X) == y).mean() == 1.0

    def test_tie_breaks_to_lowest_feature(self):
        col = np.array([0.0, 1.0, 0.0, 1.0])
        X = np.column_stack([col, col])
        y = np.array([0.0, 1.0, 0.0, 1.0])
        model = DecisionTree().fit(X, y)
        assert model.feature[0] == 0

    def test_max_depth_zero_is_single_leaf(self):
        X, y = blobs(seed=15)
        model = DecisionTree(max_depth=0).fit(X, y)
        assert model.node_count == 1
        assert model.predict_score(X[:3]).tolist() == [y.mean()] * 3

    def test_conflicting_duplicates_give_half_leaf(self):
        X = np.zeros((2, 1))
        y = np.array([0.0, 1.0])
        model = DecisionTree().fit(X, y)
        assert model.node_count == 1
        assert model.predict_score(X)[0] == 0.5
        assert model.predict(X)[0] == 0  # exact tie goes to class 0

    def test_min_samples_split(self):
        X = np.array([[0.0], [1.0]])
        y = np.array([0.0, 1.0])
        model = DecisionTree(min_samples_split=3).fit(X, y)
        assert model.node_count == 1


class TestRandomForest:
    def test_single_full_tree_equals_decision_tree(self):
        r = rng_for(16, "rf")
        X = r.normal(size=(40, 5))
        y = r.integers(0, 2, size=40).astype(np.float64)
        forest = RandomForest(n_trees=1, bootstrap=False,
                              features_per_node=5, seed=9).fit(X, y)
        tree = DecisionTree().fit(X, y)
        Q = r.normal(size=(20, 5))
        assert np.array_equal(forest.predict(Q), tree.predict(Q))
        only = forest.trees[0]
        assert np.array_equal(only.feature, tree.feature)
        assert np.array_equal(only.threshold, tree.threshold)

    def test_votes_are_fractions_of_trees(self):
        X, y = blobs(n=30, gap=1.0, seed=17)
        forest = RandomForest(n_trees=8, seed=3).fit(X, y)
        s = forest.predict_score(X)
        assert ((s * 8) == np.round(s * 8)).all()
        assert ((s >= 0) & (s <= 1)).all()

    def test_deterministic_given_seed(self):
        r = rng_for(18, "rf-det")
        X = r.normal(size=(30, 4))
        y = r.integers(0, 2, size=30).astype(np.float64)
        a = RandomForest(n_trees=5, seed=7).fit(X, y).predict_score(X)
        b = RandomForest(n_trees=5, seed=7).fit(X, y).predict_score(X)
        assert np.array_equal(a, b)
        c = RandomForest(n_trees=5, seed=8).fit(X, y).predict_score(X)
        assert not np.array_equal(a, c)

    def test_forest_beats_chance_on_blobs(self):
        X, y = blobs(seed=19)
        forest = RandomForest(n_trees=15, seed=1).fit(X, y)
        assert (forest.predict(X) == y).mean() == 1.0


# -- persistence -------------------------------------------------------------------

ALL_MODELS = [
    ("logreg", lambda: LogisticRegression()),
    ("svm", lambda: LinearSVM(seed=4)),
    ("gnb", lambda: GaussianNaiveBayes()),
    ("knn", lambda: KNearestNeighbors(k=3)),
    ("tree", lambda: DecisionTree(max_depth=4)),
    ("forest", lambda: RandomForest(n_trees=5, seed=5)),
]


class TestPersistence:
    @pytest.mark.parametrize("kind,factory", ALL_MODELS)
    def test_round_trip_scores(self, tmp_path, kind, factory):
        X, y = blobs(seed=20)
        model = factory().fit(X, y)
        path = tmp_path / f"{kind}.model"
        model.save(path)
        loaded = load_model(path)
        assert loaded.kind == kind
        assert np.array_equal(model.predict_score(X), loaded.predict_score(X))

    def test_unfitted_save_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="unfitted"):
            LogisticRegression().save(tmp_path / "m.model")

    def test_wrong_magic_rejected(self, tmp_path):
        from usprivacy.neuralkit import Network, Dense
        net = Network("n", 0)
        net.add_input("x", (2,))
        net.add("d", Dense(2, 1, "sigmoid"), "x")
        net.finalize()
        path = tmp_path / "net.ckpt"
        net.save(path)
        with pytest.raises(DataError, match="bad magic"):
            load_model(path)


class TestInputValidation:
    def test_bad_labels_rejected(self):
        with pytest.raises(DataError, match="labels must be 0 or 1"):
            LogisticRegression().fit(np.zeros((2, 1)), np.array([0.0, 2.0]))

    def test_empty_matrix_rejected(self):
        with pytest.raises(DataError, match="empty"):
            DecisionTree().fit(np.zeros((0, 2)), np.zeros(0))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(DataError, match="does not match"):
            GaussianNaiveBayes().fit(np.zeros((3, 2)), np.zeros(2))
