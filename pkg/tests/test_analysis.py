import numpy as np
import pytest

from graphviewpoints import constants as cnst
from graphviewpoints.analysis import (
    aggregate,
    correlation_matrix,
    first_component_accuracy,
    importance_table,
    pca_analysis,
    score_histograms,
)
from graphviewpoints.exceptions import DomainException
from graphviewpoints.fitting import LabeledSample, WeightVector, solve_max_separation
from graphviewpoints.pipeline import ScoreVector


def _sample(values, label=1, graph_id="g1", layout_class="energy", size_class="S", participant="p1"):
    return LabeledSample(ScoreVector.from_array(graph_id, values), label, layout_class, size_class, participant)


def _random_samples(seed, n=40):
    rng = np.random.default_rng(seed)
    samples = []
    for i in range(n):
        label = i % 2
        values = rng.uniform(0, 1, 21)
        values[:3] = np.clip(values[:3] + 0.3 * (label - 0.5), 0.0, 1.0)
        samples.append(_sample(values, label))
    return samples


def test_pca_on_a_line():
    rng = np.random.default_rng(1)
    direction = rng.uniform(0, 1, 21)
    direction /= np.linalg.norm(direction)
    base = np.full(21, 0.2)
    samples = [_sample(base + t * 0.3 * direction) for t in rng.uniform(0, 1, 10)]
    pca = pca_analysis(samples)
    assert pca.explained_variance_ratio["PC1"] == pytest.approx(1.0)
    np.testing.assert_allclose(np.abs(pca.components.loc["PC1"].to_numpy()), direction, atol=1e-9)


def test_pca_components_orthonormal():
    pca = pca_analysis(_random_samples(2))
    components = pca.components.to_numpy()
    np.testing.assert_allclose(components @ components.T, np.eye(21), atol=1e-9)
    assert pca.explained_variance_ratio.sum() == pytest.approx(1.0)
    assert list(pca.components.columns) == list(cnst.MEASURE_IDS)


def test_pca_matches_covariance_eigenvalues():
    samples = _random_samples(3, n=60)
    x = np.array([s.scores.as_array() for s in samples])
    expected = np.sort(np.linalg.eigvalsh(np.cov(x, rowvar=False)))[::-1]
    pca = pca_analysis(samples)
    np.testing.assert_allclose(pca.explained_variance_ratio.to_numpy(), expected / expected.sum(), atol=1e-8)

    # Projections reproduce the centred data
    reconstructed = pca.mean.to_numpy() + pca.projections.to_numpy() @ pca.components.to_numpy()
    np.testing.assert_allclose(reconstructed, x, atol=1e-9)


def test_pca_sign_convention():
    pca = pca_analysis(_random_samples(4))
    for _, component in pca.components.iterrows():
        values = component.to_numpy()
        assert values[np.argmax(np.abs(values))] > 0


def test_pca_of_identical_samples():
    samples = [_sample(np.full(21, 0.5), label) for label in (1, 0, 1)]
    pca = pca_analysis(samples)
    assert (pca.explained_variance_ratio == 0.0).all()
    assert (pca.projections.to_numpy() == 0.0).all()
    np.testing.assert_allclose(pca.mean.to_numpy(), 0.5)


def test_pca_needs_two_samples():
    with pytest.raises(DomainException):
        pca_analysis([_sample(np.zeros(21))])


def test_first_component_separates_shifted_classes():
    samples = []
    rng = np.random.default_rng(5)
    for i in range(80):
        label = i % 2
        values = np.clip(rng.normal(0.5, 0.05, 21), 0, 1)
        values[:5] = 0.8 if label else 0.2
        samples.append(_sample(values, label))
    assert first_component_accuracy(samples) > 0.9


def test_correlation_duplicate_and_mirror_columns():
    rng = np.random.default_rng(6)
    samples = []
    for _ in range(30):
        values = rng.uniform(0, 1, 21)
        values[1] = values[0]
        values[2] = 1.0 - values[0]
        samples.append(_sample(values))
    corr = correlation_matrix(samples)
    assert corr.loc[cnst.CR, cnst.ST] == pytest.approx(1.0)
    assert corr.loc[cnst.CR, cnst.CAR] == pytest.approx(-1.0)
    np.testing.assert_allclose(corr.to_numpy(), corr.to_numpy().T)
    np.testing.assert_allclose(np.diag(corr.to_numpy()), 1.0)


def test_correlation_constant_measure():
    rng = np.random.default_rng(7)
    samples = []
    for _ in range(10):
        values = rng.uniform(0, 1, 21)
        values[-1] = 1.0
        samples.append(_sample(values))
    corr = correlation_matrix(samples)
    assert corr.attrs["constant_measures"] == [cnst.ISO]
    assert corr.loc[cnst.ISO, cnst.ISO] == 1.0
    assert (corr.loc[cnst.ISO].drop(cnst.ISO) == 0.0).all()
    assert not corr.isna().any().any()


def test_correlation_of_independent_columns():
    rng = np.random.default_rng(8)
    samples = [_sample(values) for values in rng.uniform(0, 1, size=(10_000, 21))]
    corr = correlation_matrix(samples).to_numpy()
    off_diagonal = corr[~np.eye(21, dtype=bool)]
    assert np.abs(off_diagonal).max() < 0.1


def test_aggregate_single_best_sample():
    result = aggregate([_sample(np.ones(21))])
    assert list(result.index) == [(cnst.ALL_STRATUM_LABEL, cnst.BEST)]
    assert (result.loc[(cnst.ALL_STRATUM_LABEL, cnst.BEST)] == 1.0).all()


def test_aggregate_mean_of_two():
    result = aggregate([_sample(np.zeros(21)), _sample(np.ones(21))])
    np.testing.assert_allclose(result.to_numpy(), 0.5)


def test_aggregate_layout_strata_in_reporting_order():
    samples = [
        _sample(np.full(21, 0.1), 1, layout_class="energy"),
        _sample(np.full(21, 0.2), 0, layout_class="energy"),
        _sample(np.full(21, 0.3), 1, layout_class="semantic"),
        _sample(np.full(21, 0.4), 1, layout_class="layered"),
    ]
    result = aggregate(samples, cnst.STRATA_LAYOUT)
    assert list(result.index) == [("S", cnst.BEST), ("L", cnst.BEST), ("E", cnst.BEST), ("E", cnst.WORST)]
    assert list(result.columns) == list(cnst.MEASURE_IDS)
    assert result.loc[("L", cnst.BEST), cnst.CR] == pytest.approx(0.4)


def test_aggregate_size_strata_and_combined_columns():
    samples = [
        _sample(np.full(21, 0.5), 1, size_class="XL"),
        _sample(np.full(21, 0.25), 0, size_class="M"),
    ]
    lr = WeightVector.from_active(cnst.MEASURE_IDS, np.full(21, 1 / 21), cnst.NORMALIZATION_SUM)
    sqp = WeightVector.from_active([cnst.CR], [1.0], cnst.NORMALIZATION_L2)
    result = aggregate(samples, cnst.STRATA_SIZE, lr, sqp)
    assert [label for label, _ in result.index] == ["M", "XL"]
    assert list(result.columns)[-2:] == [cnst.C_LR, cnst.C_SQP]
    assert result.loc[("XL", cnst.BEST), cnst.C_LR] == pytest.approx(0.5)
    assert result.loc[("M", cnst.WORST), cnst.C_SQP] == pytest.approx(0.25)


def test_aggregate_by_graph_keeps_first_seen_order():
    samples = [_sample(np.ones(21), 1, graph_id="b"), _sample(np.ones(21), 1, graph_id="a")]
    result = aggregate(samples, cnst.STRATA_GRAPH)
    assert [label for label, _ in result.index] == ["b", "a"]


def test_aggregate_rejects_bad_input():
    with pytest.raises(DomainException):
        aggregate([])
    with pytest.raises(DomainException):
        aggregate([_sample(np.ones(21))], "by-colour")


def test_importance_table_layout():
    samples = _random_samples(9, n=60)
    table = importance_table(samples, sizes=(21, 3))
    assert table.index.names == [cnst.STRATUM_KIND_FIELD_NAME, cnst.STRATUM_FIELD_NAME, "method", "k"]
    # One energy/S stratum of each kind, two methods, two sizes
    assert len(table) == 3 * 2 * 2
    assert (table.to_numpy() >= 0).all()
    for (_, _, method, k), row in table.iterrows():
        assert (row > 0).sum() <= k
        if method == cnst.METHOD_LR:
            assert row.sum() == pytest.approx(1.0)
        else:
            assert np.linalg.norm(row.to_numpy()) == pytest.approx(1.0)


def test_importance_table_skips_single_class_strata():
    samples = _random_samples(10, n=40)
    samples.append(_sample(np.full(21, 0.5), 1, layout_class="semantic"))
    table = importance_table(samples, sizes=(3,))
    assert "S" not in table.index.get_level_values(cnst.STRATUM_FIELD_NAME)[
        table.index.get_level_values(cnst.STRATUM_KIND_FIELD_NAME) == cnst.STRATA_LAYOUT]


def test_score_histograms():
    samples = [_sample(np.full(21, v), label) for v, label in ((0.0, 1), (0.3, 1), (1.0, 1), (0.6, 0))]
    sqp = solve_max_separation(samples).weights
    result = score_histograms(samples, bins=4, sqp_weights=sqp)
    assert list(result.columns) == ["0.00-0.25", "0.25-0.50", "0.50-0.75", "0.75-1.00"]
    assert list(result.loc[(cnst.CR, cnst.BEST)]) == [1, 1, 0, 1]
    assert list(result.loc[(cnst.CR, cnst.WORST)]) == [0, 0, 1, 0]
    assert result.loc[(cnst.C_SQP, cnst.BEST)].sum() == 3
    assert list(result.loc[(cnst.C_SQP, cnst.BEST)]) == [1, 1, 0, 1]


def test_score_histograms_bins_checked():
    with pytest.raises(DomainException):
        score_histograms([_sample(np.ones(21))], bins=0)
