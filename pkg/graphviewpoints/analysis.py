# -*- coding: utf-8 -*-
"""
Descriptive analyses of labelled score tables: PCA, measure correlations,
stratified means, importance tables and score histograms.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from . import constants as cnst
from .exceptions import DomainException
from .fitting import (
    LabeledSample,
    WeightVector,
    combined_scores,
    samples_to_frame,
    select_subset,
)
from .utilities import sorted_eigenpairs


@dataclass(frozen=True, eq=False)
class PcaResult:
    """
    Principal components of the score vectors.

    components has one row per component (PC1 first) and one column per
    measure; projections has one row per sample.
    """

    mean: pd.Series
    components: pd.DataFrame
    explained_variance_ratio: pd.Series
    projections: pd.DataFrame


def pca_analysis(samples: Sequence[LabeledSample]) -> PcaResult:
    """
    Mean-centred PCA of the 21-dimensional score vectors.

    Args:
        samples: At least two labelled samples.

    Returns:
        Components, explained variance fractions and per-sample projections.
        The fractions are all zero when every score vector is the same.
    """
    x = _score_matrix(samples, minimum=2)
    mean = x.mean(axis=0)
    centred = x - mean
    covariance = centred.T @ centred / (len(x) - 1)
    vectors, values = sorted_eigenpairs(covariance)

    total = values.sum()
    if total > 0:
        ratio = values / total
    else:
        logging.warning("All score vectors are identical, explained variance is undefined")
        ratio = np.zeros_like(values)

    names = [f"PC{i + 1}" for i in range(len(values))]
    return PcaResult(
        mean=pd.Series(mean, index=list(cnst.MEASURE_IDS)),
        components=pd.DataFrame(vectors.T, index=names, columns=list(cnst.MEASURE_IDS)),
        explained_variance_ratio=pd.Series(ratio, index=names),
        projections=pd.DataFrame(centred @ vectors, columns=names),
    )


def first_component_accuracy(samples: Sequence[LabeledSample], pca: Optional[PcaResult] = None) -> float:
    """
    Accuracy of classifying best/worst by thresholding PC1 at the midpoint of the class means.
    """
    pca = pca or pca_analysis(samples)
    labels = np.array([s.label for s in samples])
    if labels.min() == labels.max():
        raise DomainException("both best and worst samples are required")
    first = pca.projections["PC1"].to_numpy()
    best_mean, worst_mean = first[labels == 1].mean(), first[labels == 0].mean()
    midpoint = (best_mean + worst_mean) / 2.0
    predicted = first >= midpoint if best_mean >= worst_mean else first <= midpoint
    return float((predicted == (labels == 1)).mean())


def correlation_matrix(samples: Sequence[LabeledSample]) -> pd.DataFrame:
    """
    Pearson correlations between measures.

    Constant measures correlate 0 with everything else (diagonal stays 1);
    their ids are listed in the result's attrs["constant_measures"].
    """
    x = _score_matrix(samples, minimum=2)
    constant = x.std(axis=0) < cnst.DEGENERATE_RANGE_EPS
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.corrcoef(x, rowvar=False)
    corr[constant, :] = 0.0
    corr[:, constant] = 0.0
    np.fill_diagonal(corr, 1.0)
    corr = np.clip(corr, -1.0, 1.0)

    frame = pd.DataFrame(corr, index=list(cnst.MEASURE_IDS), columns=list(cnst.MEASURE_IDS))
    flagged = [m for m, c in zip(cnst.MEASURE_IDS, constant) if c]
    if flagged:
        logging.warning(f"Constant measures have no defined correlation: {flagged}")
    frame.attrs["constant_measures"] = flagged
    return frame


def aggregate(samples: Sequence[LabeledSample],
              strata: str = cnst.STRATA_ALL,
              lr_weights: Optional[WeightVector] = None,
              sqp_weights: Optional[WeightVector] = None) -> pd.DataFrame:
    """
    Mean score per stratum, polarity and measure.

    Args:
        samples:        Labelled samples.
        strata:         all, by-layout-class, by-size-class, by-graph or by-participant.
        lr_weights:     Weights for the C-LR column.
        sqp_weights:    Weights for the C-SQP column.

    Returns:
        DataFrame indexed by (stratum, polarity), measures in registry order
        followed by the combined columns for the weights supplied. Empty
        strata are left out.
    """
    if not len(samples):
        raise DomainException("aggregate needs at least one sample")
    frame = _with_combined(samples_to_frame(samples), lr_weights, sqp_weights)
    columns = [c for c in list(cnst.MEASURE_IDS) + [cnst.C_LR, cnst.C_SQP] if c in frame.columns]

    rows, index = [], []
    for label, mask in _strata(frame, strata):
        for polarity in cnst.POLARITIES:
            part = frame.loc[mask & (frame[cnst.POLARITY_FIELD_NAME] == polarity), columns]
            if part.empty:
                logging.warning(f"Stratum {label} has no {polarity} samples, row omitted")
                continue
            rows.append(part.mean(axis=0))
            index.append((label, polarity))

    result = pd.DataFrame(rows, columns=columns)
    result.index = _multi_index(index, [cnst.STRATUM_FIELD_NAME, cnst.POLARITY_FIELD_NAME])
    return result


def importance_table(samples: Sequence[LabeledSample],
                     sizes: Sequence[int] = cnst.DEFAULT_SUBSET_SIZES,
                     l2: float = cnst.DEFAULT_L2,
                     renormalize: bool = False) -> pd.DataFrame:
    """
    Fitted weights for every stratum, method and subset size.

    Strata are All, each layout class and each size class. Strata that cannot
    be fitted (a missing class or too few samples) are skipped with a warning.

    Returns:
        DataFrame indexed by (stratum_kind, stratum, method, k) with one
        weight column per measure.
    """
    frame = samples_to_frame(samples)
    rows, index = [], []
    for kind in (cnst.STRATA_ALL, cnst.STRATA_LAYOUT, cnst.STRATA_SIZE):
        for label, mask in _strata(frame, kind):
            subset = [s for s, keep in zip(samples, mask) if keep]
            for method in (cnst.METHOD_LR, cnst.METHOD_SQP):
                for k in sizes:
                    try:
                        report = select_subset(subset, k, method, l2=l2, renormalize=renormalize)
                    except DomainException as e:
                        logging.warning(f"Skipping {method} k={k} fit for stratum {label}: {e}")
                        continue
                    rows.append(report.weights.as_array())
                    index.append((kind, label, method, k))

    result = pd.DataFrame(rows, columns=list(cnst.MEASURE_IDS))
    result.index = _multi_index(index, [cnst.STRATUM_KIND_FIELD_NAME, cnst.STRATUM_FIELD_NAME, "method", "k"])
    return result


def score_histograms(samples: Sequence[LabeledSample],
                     bins: int = 10,
                     lr_weights: Optional[WeightVector] = None,
                     sqp_weights: Optional[WeightVector] = None) -> pd.DataFrame:
    """
    Counts of best and worst scores in equal-width bins over [0, 1].

    C-SQP values are divided by the weight sum so they share the [0, 1] scale.

    Returns:
        DataFrame indexed by (measure, polarity) with one column per bin.
    """
    if bins < 1:
        raise DomainException(f"bins must be positive, got {bins}")
    frame = _with_combined(samples_to_frame(samples), lr_weights, sqp_weights)
    if cnst.C_SQP in frame.columns:
        frame[cnst.C_SQP] = frame[cnst.C_SQP] / sqp_weights.as_array().sum()
    columns = [c for c in list(cnst.MEASURE_IDS) + [cnst.C_LR, cnst.C_SQP] if c in frame.columns]

    edges = np.linspace(0.0, 1.0, bins + 1)
    labels = [f"{lo:.2f}-{hi:.2f}" for lo, hi in zip(edges[:-1], edges[1:])]
    rows, index = [], []
    for column in columns:
        for polarity in cnst.POLARITIES:
            values = frame.loc[frame[cnst.POLARITY_FIELD_NAME] == polarity, column].to_numpy(dtype=float)
            counts, _ = np.histogram(np.clip(values, 0.0, 1.0), bins=edges)
            rows.append(counts)
            index.append((column, polarity))

    result = pd.DataFrame(rows, columns=labels)
    result.index = pd.MultiIndex.from_tuples(index, names=[cnst.RANGE_MEASURE_FIELD_NAME, cnst.POLARITY_FIELD_NAME])
    return result


# Private utility functions
def _score_matrix(samples: Sequence[LabeledSample], minimum: int) -> np.ndarray:
    if len(samples) < minimum:
        logging.error(f"Analysis on {len(samples)} samples, needs {minimum}")
        raise DomainException(f"at least {minimum} samples are required, got {len(samples)}")
    return np.array([s.scores.as_array() for s in samples])


def _multi_index(index: list, names: List[str]) -> pd.MultiIndex:
    if not index:
        return pd.MultiIndex.from_arrays([[] for _ in names], names=names)
    return pd.MultiIndex.from_tuples(index, names=names)


def _with_combined(frame: pd.DataFrame,
                   lr_weights: Optional[WeightVector],
                   sqp_weights: Optional[WeightVector]) -> pd.DataFrame:
    if lr_weights is not None:
        frame[cnst.C_LR] = combined_scores(lr_weights, frame)
    if sqp_weights is not None:
        frame[cnst.C_SQP] = combined_scores(sqp_weights, frame)
    return frame


def _strata(frame: pd.DataFrame, kind: str) -> List[Tuple[str, pd.Series]]:
    """(label, row mask) per nonempty stratum, in reporting order."""
    if kind == cnst.STRATA_ALL:
        return [(cnst.ALL_STRATUM_LABEL, pd.Series(True, index=frame.index))]
    if kind == cnst.STRATA_LAYOUT:
        candidates = [(cnst.LAYOUT_CLASS_LABELS[c], frame[cnst.LAYOUT_CLASS_FIELD_NAME] == c)
                      for c in cnst.LAYOUT_CLASSES]
    elif kind == cnst.STRATA_SIZE:
        candidates = [(s, frame[cnst.SIZE_CLASS_FIELD_NAME] == s) for s in cnst.SIZE_CLASSES]
    elif kind == cnst.STRATA_GRAPH:
        candidates = [(g, frame[cnst.GRAPH_FIELD_NAME] == g) for g in dict.fromkeys(frame[cnst.GRAPH_FIELD_NAME])]
    elif kind == cnst.STRATA_PARTICIPANT:
        column = frame[cnst.PARTICIPANT_FIELD_NAME]
        candidates = [(p, column == p) for p in dict.fromkeys(column)]
    else:
        raise DomainException(f"unknown strata '{kind}'")

    strata = []
    for label, mask in candidates:
        if not mask.any():
            logging.warning(f"Stratum {label} ({kind}) is empty, omitted")
            continue
        strata.append((label, mask))
    return strata
