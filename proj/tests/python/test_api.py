import math

import numpy as np
import pytest

import geoclust as gc


@pytest.fixture(scope="module")
def benchmark():
    return gc.make_benchmark(1, seed=4)


@pytest.fixture(scope="module")
def dataset(benchmark):
    return gc.make_dataset(benchmark["coords"], benchmark["times"], benchmark["values"], z=8)


def test_basis_and_gram():
    b = gc.build_basis(0.0, 1.0, 8)
    w = gc.gram_matrix(b)
    assert w.shape == (8, 8)
    assert math.isclose(w.sum(), 1.0, rel_tol=1e-12)
    assert np.allclose(b.evaluate(0.37).sum(), 1.0)
    with pytest.raises(gc.GeoclustError):
        gc.build_basis(0.0, 1.0, 3)
    with pytest.raises(ValueError):
        gc.build_basis(0.0, 1.0, 3)


def test_benchmark_shape(benchmark):
    assert benchmark["values"].shape == (300, 30)
    assert benchmark["coords"].shape == (300, 2)
    assert sorted(set(benchmark["labels"])) == [1, 2, 3]


def test_variogram_pipeline(dataset):
    assert len(dataset) == 300
    lags = gc.build_lag_structure(dataset.coords, 15)
    emp = gc.empirical_trace_variogram(dataset, lags)
    assert len(emp.semivariance) == 15
    fit = gc.fit_model(emp, "exponential")
    assert fit.objective <= min(fit.start_objectives)
    model = fit.model
    assert model(0.0) == 0.0
    assert gc.practical_range(model) == pytest.approx(3 * model.range)


def test_clustering_is_deterministic(dataset, benchmark):
    a = gc.dc_cluster(dataset, k=3, seed=2, restarts=2)
    b = gc.dc_cluster(dataset, k=3, seed=2, restarts=2)
    assert a.labels == b.labels
    assert a.criterion == b.criterion
    assert set(a.labels) == {0, 1, 2}
    assert all(x >= y for x, y in zip(a.criterion_trace, a.criterion_trace[1:]))
    ri = gc.rand_index(a.labels, list(benchmark["labels"]))
    assert 0.0 <= ri <= 1.0


def test_rand_index_example():
    assert gc.rand_index([1, 1, 2, 2], [1, 2, 1, 2]) == pytest.approx(2 / 6)


def test_covariances():
    assert gc.temporal_cov(1.0, a=1.0, alpha=0.1) == pytest.approx(0.5)
    assert gc.spatial_cov(0.0, c=3.0) == 1.0
    assert gc.spatial_cov(1.0, c=3.0) == pytest.approx(math.exp(-3.0))


def test_selection(dataset):
    chosen, table = gc.select_family(dataset, ["exponential", "spherical"], k=3, seed=1, restarts=1)
    assert chosen in table
    assert table[chosen] == min(table.values())
    k, crit = gc.select_k(dataset, [2, 3], seed=1, restarts=1)
    assert k in crit
