import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lingeo.corpus import Vocabulary, count_matrix
from lingeo.geometry import (CombinationWeights, DiagonalWeights, GeometryParams,
                             ManualGeometrySpec, MarkovMatrix, SimilarityMatrix,
                             SoftScoreSpec, TransformMatrix, WordClustering,
                             build_manual_D, build_manual_R, build_manual_geometry,
                             build_soft_D, build_soft_R, compose_H, convex_combination,
                             distance, factorize_T, geometry_spec_to_json,
                             parse_geometry_spec, similarity_from_transform,
                             transform, tree_pair_affinities)
from lingeo.matrixio import read_matrix, write_matrix

V5 = Vocabulary(["v1", "v2", "v3", "v4", "v5"])
FIG_R = np.array([
    [0.8, 0.1, 0.1, 0.0, 0.0],
    [0.1, 0.8, 0.1, 0.0, 0.0],
    [0.1, 0.1, 0.8, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.9, 0.1],
    [0.0, 0.0, 0.0, 0.1, 0.9],
])
FIG_D = np.array([5.0, 5.0, 5.0, 3.0, 3.0])


def fig_setup():
    clustering = WordClustering.from_word_lists(
        V5, {"c1": ["v1", "v2", "v3"], "c2": ["v4", "v5"]})
    params = GeometryParams(
        rho_self={"c1": 0.8, "c2": 0.9},
        rho_pair={("c1", "c1"): 0.1, ("c2", "c2"): 0.1},
        importance={"c1": 5.0, "c2": 3.0},
    )
    return clustering, params


class TestManualR:
    def test_two_cluster_worked_example_exact(self):
        clustering, params = fig_setup()
        R = build_manual_R(clustering, params)
        assert np.array_equal(R.matrix, FIG_R)

    def test_self_map_only(self):
        c = WordClustering.from_word_lists(Vocabulary(["a", "b"]), {"c": ["a", "b"]})
        p = GeometryParams(rho_self={"c": 1.0}, rho_pair={}, importance={"c": 1.0})
        assert np.array_equal(build_manual_R(c, p).matrix, np.eye(2))

    def test_uniform_blend_two_words(self):
        c = WordClustering.from_word_lists(Vocabulary(["a", "b"]), {"c": ["a", "b"]})
        p = GeometryParams(rho_self={"c": 1.0}, rho_pair={("c", "c"): 1.0},
                           importance={"c": 1.0})
        assert np.array_equal(build_manual_R(c, p).matrix, np.full((2, 2), 0.5))

    def test_isolated_word_column(self):
        c = WordClustering.from_word_lists(Vocabulary(["a", "b"]),
                                           {"c1": ["a"], "c2": ["b"]})
        p = GeometryParams(rho_self={"c1": 1.0, "c2": 0.0}, rho_pair={},
                           importance={"c1": 1.0, "c2": 1.0})
        with pytest.raises(ValueError, match="isolated word column.*'b'"):
            build_manual_R(c, p)


class TestManualD:
    def test_worked_example(self):
        clustering, params = fig_setup()
        assert np.array_equal(build_manual_D(clustering, params).weights, FIG_D)

    def test_unit_importance(self):
        clustering, params = fig_setup()
        params = GeometryParams(params.rho_self, params.rho_pair,
                                {"c1": 1.0, "c2": 1.0})
        assert np.array_equal(build_manual_D(clustering, params).weights, np.ones(5))

    def test_zero_importance_annihilates(self):
        clustering, params = fig_setup()
        params = GeometryParams(params.rho_self, params.rho_pair,
                                {"c1": 5.0, "c2": 0.0})
        H = compose_H(build_manual_R(clustering, params),
                      build_manual_D(clustering, params))
        assert np.array_equal(H.matrix[:, 3:], np.zeros((5, 2)))


class TestSoftR:
    def test_identical_vectors_blend(self):
        vocab = Vocabulary(["a", "b"])
        spec = SoftScoreSpec(cluster_names=("x", "y"),
                             scores={"a": (2.0, 1.0), "b": (2.0, 1.0)},
                             importance={"a": 1.0, "b": 1.0}, rho_self=1.0)
        R = build_soft_R(spec, vocab)
        assert np.allclose(R.matrix, np.full((2, 2), 0.5))

    def test_orthogonal_vectors_identity(self):
        vocab = Vocabulary(["a", "b"])
        spec = SoftScoreSpec(cluster_names=("x", "y"),
                             scores={"a": (2.0, 0.0), "b": (0.0, 2.0)},
                             importance={}, rho_self=1.0)
        assert np.allclose(build_soft_R(spec, vocab).matrix, np.eye(2))

    def test_zero_score_word_is_self_indicator(self):
        vocab = Vocabulary(["a", "b", "c"])
        spec = SoftScoreSpec(cluster_names=("x",),
                             scores={"a": (1.0,), "b": (1.0,), "c": (0.0,)},
                             importance={}, rho_self=1.0)
        R = build_soft_R(spec, vocab)
        assert np.allclose(R.matrix[:, 2], [0.0, 0.0, 1.0])

    def test_degenerate_table(self):
        vocab = Vocabulary(["a", "b"])
        spec = SoftScoreSpec(cluster_names=("x",), scores={"a": (0.0,)},
                             importance={}, rho_self=1.0)
        with pytest.raises(ValueError, match="degenerate score table"):
            build_soft_R(spec, vocab)

    def test_importance_to_diagonal(self):
        vocab = Vocabulary(["a", "b"])
        spec = SoftScoreSpec(cluster_names=("x",), scores={"a": (1.0,)},
                             importance={"a": 3.0}, rho_self=1.0)
        assert np.array_equal(build_soft_D(spec, vocab).weights, [3.0, 0.0])

    def test_score_range_validated(self):
        with pytest.raises(ValueError, match="outside"):
            SoftScoreSpec(cluster_names=("x",), scores={"a": (2.5,)},
                          importance={}, rho_self=1.0)


class TestComposeH:
    def test_worked_example_scaling(self):
        clustering, params = fig_setup()
        H = compose_H(build_manual_R(clustering, params),
                      build_manual_D(clustering, params))
        assert np.allclose(H.matrix[:, :3], 5.0 * FIG_R[:, :3])
        assert np.allclose(H.matrix[:, 3:], 3.0 * FIG_R[:, 3:])

    def test_identity_weights(self):
        R = MarkovMatrix(FIG_R)
        assert np.array_equal(compose_H(R, DiagonalWeights(np.ones(5))).matrix, FIG_R)

    def test_diagonal_only(self):
        H = compose_H(MarkovMatrix(np.eye(2)), DiagonalWeights([2.0, 3.0]))
        assert np.array_equal(H.matrix, np.diag([2.0, 3.0]))


class TestFactorize:
    def test_identity(self):
        H = factorize_T(SimilarityMatrix(np.eye(3)))
        assert np.allclose(H.matrix.T @ H.matrix, np.eye(3), atol=1e-12)
        assert np.allclose(np.abs(H.matrix) @ np.abs(H.matrix.T), np.eye(3), atol=1e-12)

    def test_reconstruction_from_known_factor(self):
        rng = np.random.default_rng(42)
        H0 = rng.normal(size=(3, 5))
        T = SimilarityMatrix(H0.T @ H0)
        H = factorize_T(T)
        rel = np.linalg.norm(H.matrix.T @ H.matrix - T.matrix) / np.linalg.norm(T.matrix)
        assert rel <= 1e-6
        assert H.shape == (3, 5)  # zero eigenvalue rows dropped

    def test_indefinite_clamped(self):
        T = SimilarityMatrix(np.array([[1.0, 2.0], [2.0, 1.0]]))
        H = factorize_T(T)
        assert np.allclose(H.matrix.T @ H.matrix, np.full((2, 2), 1.5), atol=1e-12)

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError, match="asymmetric similarity matrix"):
            SimilarityMatrix(np.array([[1.0, 0.5], [0.0, 1.0]]))


class TestConvexCombination:
    def test_vertex(self):
        H1 = TransformMatrix(np.arange(6.0).reshape(2, 3))
        H2 = TransformMatrix(np.ones((2, 3)))
        out = convex_combination([H1, H2], CombinationWeights([1.0, 0.0]))
        assert np.array_equal(out.matrix, H1.matrix)

    def test_fixed_point(self):
        H1 = TransformMatrix(np.arange(6.0).reshape(2, 3))
        out = convex_combination([H1, H1, H1], CombinationWeights([0.2, 0.5, 0.3]))
        assert np.allclose(out.matrix, H1.matrix)

    def test_entrywise_arithmetic(self):
        out = convex_combination(
            [TransformMatrix(np.eye(2)), TransformMatrix(2.0 * np.eye(2))],
            CombinationWeights([0.5, 0.5]))
        assert np.allclose(out.matrix, 1.5 * np.eye(2))

    def test_row_padding(self):
        H1 = TransformMatrix(np.ones((1, 3)))
        H2 = TransformMatrix(np.ones((2, 3)))
        out = convex_combination([H1, H2], CombinationWeights([0.5, 0.5]))
        assert out.shape == (2, 3)
        assert np.allclose(out.matrix[0], 1.0)
        assert np.allclose(out.matrix[1], 0.5)

    def test_column_mismatch(self):
        with pytest.raises(ValueError, match="vocabulary size"):
            convex_combination([TransformMatrix(np.ones((2, 3))),
                                TransformMatrix(np.ones((2, 4)))],
                               CombinationWeights([0.5, 0.5]))

    def test_weights_validated(self):
        with pytest.raises(ValueError, match="sum to 1"):
            CombinationWeights([0.5, 0.6])
        with pytest.raises(ValueError, match="nonnegative"):
            CombinationWeights([1.5, -0.5])


class TestTransform:
    def test_identity_passthrough(self):
        dm = count_matrix([["v1", "v2"], ["v2"]], Vocabulary(["v1", "v2"]))
        out = transform(TransformMatrix.identity(2), dm.terms)
        assert np.allclose(out, [[0.5, 0.5], [0.0, 1.0]])

    def test_zero_column_annihilates_word(self):
        dm = count_matrix([["v1"], ["v2"]], Vocabulary(["v1", "v2"]))
        H = TransformMatrix(np.array([[1.0, 0.0], [0.0, 0.0]]))
        out = transform(H, dm.terms)
        assert np.allclose(out[1], 0.0)

    def test_worked_example_basis_vector(self):
        clustering, params = fig_setup()
        H = compose_H(build_manual_R(clustering, params),
                      build_manual_D(clustering, params))
        dm = count_matrix([["v1"]], V5)
        out = transform(H, dm.terms)
        assert np.allclose(out[0], 5.0 * np.array([0.8, 0.1, 0.1, 0.0, 0.0]))

    def test_raw_counts_switch(self):
        dm = count_matrix([["v1", "v1"]], Vocabulary(["v1", "v2"]))
        out = transform(TransformMatrix.identity(2), dm.terms, normalize=False)
        assert np.allclose(out, [[2.0, 0.0]])


class TestDistance:
    def test_coincident(self):
        T = SimilarityMatrix(np.eye(2), psd_certified=True)
        x = np.array([1.0, 2.0])
        assert distance(T, x, x) == 0.0

    def test_euclidean_case(self):
        T = SimilarityMatrix(np.eye(3), psd_certified=True)
        assert np.isclose(distance(T, np.array([1.0, 1.0, 0.0]), np.zeros(3)),
                          np.sqrt(2.0))

    def test_quadratic_form(self):
        T = SimilarityMatrix(np.diag([4.0, 1.0]), psd_certified=True)
        assert np.isclose(distance(T, np.array([1.0, 1.0]), np.zeros(2)), np.sqrt(5.0))

    def test_not_psd_rejected(self):
        T = SimilarityMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
        with pytest.raises(ValueError, match="T not PSD"):
            distance(T, np.array([1.0, -1.0]), np.zeros(2))
        assert not T.certify_psd()


# --- property suites --------------------------------------------------------

@st.composite
def random_clustering_params(draw):
    n_clusters = draw(st.integers(1, 4))
    sizes = [draw(st.integers(1, 4)) for _ in range(n_clusters)]
    words = [f"w{i}" for i in range(sum(sizes))]
    vocab = Vocabulary(words)
    names = [f"c{i}" for i in range(n_clusters)]
    clusters, k = {}, 0
    for name, size in zip(names, sizes):
        clusters[name] = words[k:k + size]
        k += size
    rho_self = {n: draw(st.floats(0.1, 2.0)) for n in names}
    rho_pair = {}
    for i, a in enumerate(names):
        for b in names[i:]:
            if draw(st.booleans()):
                rho_pair[(a, b)] = draw(st.floats(0.0, 1.0))
    importance = {n: draw(st.floats(0.0, 5.0)) for n in names}
    clustering = WordClustering.from_word_lists(vocab, clusters)
    return clustering, GeometryParams(rho_self, rho_pair, importance)


@given(random_clustering_params())
@settings(max_examples=60, deadline=None)
def test_markov_columns_sum_to_one(cp):
    clustering, params = cp
    R = build_manual_R(clustering, params)
    assert np.abs(R.matrix.sum(axis=0) - 1.0).max() <= 1e-9
    assert R.matrix.min() >= 0.0


@given(st.integers(0, 2 ** 31 - 1))
@settings(max_examples=40, deadline=None)
def test_metric_matches_factorized_euclidean(seed):
    rng = np.random.default_rng(seed)
    n = rng.integers(2, 8)
    H0 = rng.normal(size=(rng.integers(1, n + 1), n))
    T = SimilarityMatrix(H0.T @ H0)
    H = factorize_T(T)
    x = np.where(rng.random(n) < 0.5, rng.normal(size=n), 0.0)
    y = np.where(rng.random(n) < 0.5, rng.normal(size=n), 0.0)
    lhs = distance(T, x, y)
    rhs = np.linalg.norm(H.matrix @ x - H.matrix @ y)
    assert abs(lhs - rhs) <= 1e-6 * (1.0 + np.linalg.norm(x - y))


@given(st.integers(0, 2 ** 31 - 1))
@settings(max_examples=40, deadline=None)
def test_pseudometric_triangle_inequality(seed):
    rng = np.random.default_rng(seed)
    n = rng.integers(2, 6)
    H0 = rng.normal(size=(n, n))
    T = SimilarityMatrix(H0.T @ H0, psd_certified=True)
    x, y, z = rng.normal(size=(3, n))
    dxy, dyz, dxz = distance(T, x, y), distance(T, y, z), distance(T, x, z)
    assert dxy >= 0.0
    assert np.isclose(dxy, distance(T, y, x))
    assert dxz <= dxy + dyz + 1e-9


def test_block_diagonal_when_no_cross_affinity():
    clustering, params = fig_setup()  # rho_12 absent, defaults to 0
    R = build_manual_R(clustering, params)
    assert np.array_equal(R.matrix[3:, :3], np.zeros((2, 3)))
    assert np.array_equal(R.matrix[:3, 3:], np.zeros((3, 2)))


@given(st.integers(0, 2 ** 31 - 1))
@settings(max_examples=30, deadline=None)
def test_combination_between_entrywise_extremes(seed):
    rng = np.random.default_rng(seed)
    mats = [TransformMatrix(rng.normal(size=(3, 4))) for _ in range(3)]
    w = rng.random(3)
    alpha = CombinationWeights(w / w.sum())
    out = convex_combination(mats, alpha).matrix
    stack = np.stack([m.matrix for m in mats])
    assert (out >= stack.min(axis=0) - 1e-12).all()
    assert (out <= stack.max(axis=0) + 1e-12).all()


# --- spec files and serialization -------------------------------------------

def test_manual_spec_roundtrip_and_build():
    spec = ManualGeometrySpec(
        clusters={"c1": ("v1", "v2", "v3"), "c2": ("v4", "v5")},
        rho_self={"c1": 0.8, "c2": 0.9},
        importance={"c1": 5.0, "c2": 3.0},
        rho_pairs={("c1", "c1"): 0.1, ("c2", "c2"): 0.1},
    )
    back = parse_geometry_spec(geometry_spec_to_json(spec))
    assert back == spec
    H = build_manual_geometry(spec, V5)
    assert np.allclose(H.matrix, FIG_R * FIG_D[None, :])
    assert H.provenance == "manual"


def test_soft_spec_roundtrip():
    spec = SoftScoreSpec(cluster_names=("x", "y"),
                         scores={"a": (2.0, 0.0), "b": (1.0, 1.0)},
                         importance={"a": 3.0, "b": 1.0}, rho_self=0.5)
    assert parse_geometry_spec(geometry_spec_to_json(spec)) == spec


def test_tree_derived_affinities():
    tree = {"name": "root", "children": [
        {"name": "left", "children": [{"name": "a"}, {"name": "b"}]},
        {"name": "c"},
    ]}
    pairs = tree_pair_affinities(tree, ("a", "b", "c"), beta=0.5)
    assert pairs[("a", "b")] == 0.25       # two edges through "left"
    assert pairs[("a", "c")] == 0.125      # three edges through root
    spec = parse_geometry_spec({
        "clusters": [{"name": "a", "words": ["v1"], "rho_self": 1, "importance": 1},
                     {"name": "b", "words": ["v2"], "rho_self": 1, "importance": 1},
                     {"name": "c", "words": ["v3"], "rho_self": 1, "importance": 1}],
        "tree": tree, "beta": 0.5,
    })
    params = spec.params()
    assert params.pair("a", "b") == 0.25
    # explicit pairs override the tree
    spec2 = parse_geometry_spec({
        "clusters": [{"name": "a", "words": ["v1"], "rho_self": 1, "importance": 1},
                     {"name": "b", "words": ["v2"], "rho_self": 1, "importance": 1},
                     {"name": "c", "words": ["v3"], "rho_self": 1, "importance": 1}],
        "rho_pairs": [{"a": "a", "b": "b", "value": 0.9}],
        "tree": tree, "beta": 0.5,
    })
    assert spec2.params().pair("a", "b") == 0.9


def test_partition_enforced_without_default():
    with pytest.raises(ValueError, match="not covered"):
        WordClustering.from_word_lists(V5, {"c1": ["v1"]})
    c = WordClustering.from_word_lists(V5, {"c1": ["v1"], "rest": []}, default="rest")
    assert list(c.members("rest")) == [1, 2, 3, 4]


def test_matrix_file_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    m = rng.normal(size=(4, 6))
    dense = tmp_path / "d.mat"
    write_matrix(dense, m, mode="dense")
    assert dense.read_text().splitlines()[0] == "lingeo-matrix v1 4 6 dense"
    assert np.array_equal(read_matrix(dense), m)
    sparse = tmp_path / "s.mat"
    ms = np.where(np.abs(m) > 0.8, m, 0.0)
    write_matrix(sparse, ms, mode="sparse")
    assert sparse.read_text().splitlines()[0] == "lingeo-matrix v1 4 6 sparse"
    assert np.array_equal(read_matrix(sparse), ms)


def test_similarity_from_transform_certified():
    H = TransformMatrix(np.array([[1.0, 2.0, 0.0]]))
    T = similarity_from_transform(H)
    assert T.psd_certified
    assert np.allclose(T.matrix, H.matrix.T @ H.matrix)
