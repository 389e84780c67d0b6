import numpy as np
import pytest

from lingeo.corpus import Vocabulary, count_matrix
from lingeo.geometry import TransformMatrix, transform
from lingeo.reduce import (Embedding2D, PointCloud, TsneConfig, _joint_p,
                           _kl_divergence, _kl_gradient, _student_q, pca,
                           perplexity_calibration, read_embedding_csv, tsne,
                           write_embedding_csv)


def cloud(X, prefix="p"):
    return PointCloud(ids=tuple(f"{prefix}{i}" for i in range(len(X))),
                      X=np.asarray(X, dtype=float))


class TestPca:
    def test_rank_one_line(self):
        t = np.linspace(0.0, 5.0, 40)
        emb = pca(cloud(np.column_stack([t, 2.0 * t])))
        assert np.abs(emb.coords[:, 1]).max() <= 1e-9
        total_var = np.var(emb.coords[:, 0])
        input_var = np.var(t) + np.var(2 * t)
        assert np.isclose(total_var, input_var, rtol=1e-9)

    def test_axis_aligned_input_unrotated(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(200, 2)) * np.array([3.0, 1.0])
        emb = pca(cloud(X))
        Xc = X - X.mean(axis=0)
        # loadings must be the coordinate axes up to sign; signs are fixed positive
        assert np.allclose(np.abs(emb.components), np.eye(2), atol=0.15)
        assert np.allclose(emb.coords, Xc @ emb.components, atol=1e-12)

    def test_zero_mean(self):
        rng = np.random.default_rng(2)
        emb = pca(cloud(rng.normal(size=(30, 6))))
        assert np.abs(emb.coords.mean(axis=0)).max() <= 1e-9

    def test_zero_variance_input(self):
        emb = pca(cloud(np.ones((5, 3))))
        assert np.array_equal(emb.coords, np.zeros((5, 2)))

    def test_orthonormal_components_and_variance_order(self):
        rng = np.random.default_rng(3)
        emb = pca(cloud(rng.normal(size=(50, 8))))
        W = emb.components
        assert np.allclose(W.T @ W, np.eye(2), atol=1e-9)
        v = emb.provenance["explained_variance"]
        assert v[0] >= v[1] >= 0.0

    def test_embedded_variance_bounded_by_input(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(40, 7))
        emb = pca(cloud(X))
        assert np.var(emb.coords, axis=0).sum() <= np.var(X, axis=0).sum() + 1e-9
        # equality when rank <= 2
        X2 = rng.normal(size=(40, 2)) @ rng.normal(size=(2, 7))
        emb2 = pca(cloud(X2))
        assert np.isclose(np.var(emb2.coords, axis=0).sum(),
                          np.var(X2, axis=0).sum(), rtol=1e-9)

    def test_gram_trick_matches_covariance_path(self):
        rng = np.random.default_rng(5)
        base = rng.normal(size=(12, 9))
        wide = np.hstack([base, np.zeros((12, 11))])   # m=20 > n=12: Gram path
        e1 = pca(cloud(base))
        e2 = pca(cloud(wide))
        assert np.allclose(np.abs(e1.coords), np.abs(e2.coords), atol=1e-8)

    def test_needs_two_points(self):
        with pytest.raises(ValueError, match="at least 2"):
            pca(cloud(np.ones((1, 3))))


class TestPerplexityCalibration:
    def test_equidistant_uniform(self):
        row, _ = perplexity_calibration(np.full(5, 2.0), 5.0)
        assert np.allclose(row, 0.2, atol=1e-12)
        entropy = -np.sum(row * np.log(row))
        assert np.isclose(np.exp(entropy), 5.0, atol=1e-9)

    def test_target_one_concentrates(self):
        d = np.array([0.01] + [10.0] * 9)
        row, _ = perplexity_calibration(d, 1.0)
        assert row[0] >= 0.99

    def test_row_sums_to_one(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            row, _ = perplexity_calibration(rng.random(12) * 5, 4.0)
            assert np.isclose(row.sum(), 1.0, atol=1e-9)

    def test_degenerate_equal_distances_low_target(self):
        row, _ = perplexity_calibration(np.full(6, 3.0), 2.0)
        assert np.allclose(row, 1 / 6)  # uniform, no error

    def test_hits_stated_tolerance(self):
        rng = np.random.default_rng(8)
        d = rng.random(30) * 4
        row, _ = perplexity_calibration(d, 10.0)
        perp = np.exp(-np.sum(row * np.log(row)))
        assert abs(perp - 10.0) <= 1e-3


def blob_cloud(seed=0):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(c, 1.0, (20, 5)) for c in (0.0, 10.0, 20.0)])
    labels = tuple(l for l in "abc" for _ in range(20))
    return cloud(X), labels


class TestTsne:
    def test_seed_determinism_bit_exact(self):
        pc, _ = blob_cloud()
        cfg = TsneConfig(perplexity=10.0, iterations=400, seed=11)
        e1 = tsne(pc, cfg)
        e2 = tsne(pc, cfg)
        assert np.array_equal(e1.coords, e2.coords)

    def test_blobs_preserve_neighborhoods(self):
        from lingeo.evaluate import LabeledEmbedding, knn_accuracy
        pc, labels = blob_cloud()
        emb = tsne(pc, TsneConfig(perplexity=10.0, iterations=1000, seed=3))
        acc = knn_accuracy(LabeledEmbedding(embedding=emb, labels=labels), k=1)
        assert acc == 1.0

    def test_kl_decreases_after_exaggeration(self):
        pc, _ = blob_cloud(seed=5)
        emb = tsne(pc, TsneConfig(perplexity=10.0, iterations=1000, seed=2))
        trace = {int(k): v for k, v in emb.provenance["kl_trace"].items()}
        assert trace[1000] <= trace[300]
        assert emb.provenance["final_kl"] == trace[1000]

    def test_p_matrix_properties(self):
        rng = np.random.default_rng(9)
        P = _joint_p(rng.normal(size=(12, 4)), perplexity=5.0)
        assert np.allclose(P, P.T, atol=1e-15)
        assert P.min() >= 0.0
        assert abs(P.sum() - 1.0) <= 1e-6
        assert (np.diag(P) == 0.0).all()

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(10)
        X = rng.normal(size=(5, 3))
        P = _joint_p(X, perplexity=2.0)
        Y = rng.normal(size=(5, 2))
        analytic = _kl_gradient(P, Y)
        eps = 1e-6
        numeric = np.zeros_like(Y)
        for i in range(5):
            for d in range(2):
                up, down = Y.copy(), Y.copy()
                up[i, d] += eps
                down[i, d] -= eps
                numeric[i, d] = (_kl_divergence(P, _student_q(up)[0])
                                 - _kl_divergence(P, _student_q(down)[0])) / (2 * eps)
        denom = max(np.abs(numeric).max(), 1e-12)
        assert np.abs(analytic - numeric).max() / denom <= 1e-4

    def test_preconditions(self):
        pc = cloud(np.random.default_rng(0).normal(size=(4, 3)))
        with pytest.raises(ValueError, match="at least 5"):
            tsne(pc, TsneConfig(perplexity=2.0))
        pc5 = cloud(np.random.default_rng(0).normal(size=(6, 3)))
        with pytest.raises(ValueError, match="perplexity"):
            tsne(pc5, TsneConfig(perplexity=6.0))

    def test_divergence_reported(self):
        import warnings
        pc = cloud(np.random.default_rng(0).normal(size=(10, 3)))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            with pytest.raises(ValueError, match="divergence; reduce learning rate"):
                tsne(pc, TsneConfig(perplexity=3.0, iterations=10,
                                    learning_rate=1e300, seed=0))

    def test_config_validation(self):
        with pytest.raises(ValueError, match="positive"):
            TsneConfig(perplexity=-1.0)


def test_identity_geometry_is_plumbing_noop():
    vocab = Vocabulary(["a", "b", "c"])
    dm = count_matrix([["a", "a", "b"], ["b", "c"], ["a", "c", "c"],
                       ["b"], ["a", "b", "c"], ["c"]], vocab)
    raw = dm.terms.relative().toarray()
    through = transform(TransformMatrix.identity(3), dm.terms)
    assert np.array_equal(raw, through)
    e1 = pca(PointCloud(ids=dm.ids, X=raw))
    e2 = pca(PointCloud(ids=dm.ids, X=through))
    assert np.array_equal(e1.coords, e2.coords)
    c = TsneConfig(perplexity=3.0, iterations=120, seed=1)
    t1 = tsne(PointCloud(ids=dm.ids, X=raw), c)
    t2 = tsne(PointCloud(ids=dm.ids, X=through), c)
    assert np.array_equal(t1.coords, t2.coords)


class TestEmbeddingCsv:
    def test_roundtrip_with_labels(self, tmp_path):
        rng = np.random.default_rng(12)
        emb = Embedding2D(ids=("a", "b", "c"), coords=rng.normal(size=(3, 2)),
                          provenance={"reducer": "tsne", "geometry": "manual",
                                      "seed": 42, "config": {"perplexity": 30.0}})
        path = tmp_path / "emb.csv"
        write_embedding_csv(emb, path, labels=("x", "y", "x"))
        back, labels = read_embedding_csv(path)
        assert back.ids == emb.ids
        assert labels == ("x", "y", "x")
        assert np.array_equal(back.coords, emb.coords)  # repr round-trips exactly
        assert back.provenance["reducer"] == "tsne"
        assert back.provenance["geometry"] == "manual"
        assert back.provenance["seed"] == 42
        assert back.provenance["config"] == {"perplexity": 30.0}

    def test_roundtrip_without_labels(self, tmp_path):
        emb = Embedding2D(ids=("a",), coords=np.array([[0.5, -1.25]]),
                          provenance={"reducer": "pca"})
        path = tmp_path / "emb.csv"
        write_embedding_csv(emb, path)
        back, labels = read_embedding_csv(path)
        assert labels is None
        assert np.array_equal(back.coords, emb.coords)

    def test_header_comment_lines(self, tmp_path):
        emb = Embedding2D(ids=("a",), coords=np.zeros((1, 2)),
                          provenance={"reducer": "pca", "geometry": "identity"})
        path = tmp_path / "emb.csv"
        write_embedding_csv(emb, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "# reducer: pca"
        assert lines[1] == "# geometry: identity"
        assert lines[4] == "id,x,y"
