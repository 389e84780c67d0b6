import pytest

from lingeo.synth import sentiment_world, topical_world, write_world


@pytest.fixture(scope="session")
def tiny_world_paths(tmp_path_factory):
    """Small sentiment world on disk, shared by pipeline/service tests."""
    world = sentiment_world(n_docs=40, n_estimation=40, n_background=30,
                            pool_size=8, bg_tokens=20, class_tokens=10,
                            active_bg=5, seed=99)
    outdir = tmp_path_factory.mktemp("tiny-world")
    paths = write_world(world, outdir)
    paths["dir"] = str(outdir)
    return paths


@pytest.fixture(scope="session")
def sentiment_paths(tmp_path_factory):
    world = sentiment_world()
    outdir = tmp_path_factory.mktemp("sentiment-world")
    paths = write_world(world, outdir)
    paths["dir"] = str(outdir)
    return paths


@pytest.fixture(scope="session")
def topical_paths(tmp_path_factory):
    world = topical_world()
    outdir = tmp_path_factory.mktemp("topical-world")
    paths = write_world(world, outdir)
    paths["dir"] = str(outdir)
    return paths
