# -*- coding: utf-8 -*-
"""
Linear combinations of measure scores fitted to best/worst selections.

Two fits are offered. Logistic regression gives signed coefficients whose
positive part, scaled to unit sum, is read as measure importance (C-LR).
The separation fit maximises summed best scores minus summed worst scores
over nonnegative weight vectors of unit Euclidean norm (C-SQP); its optimum
has the closed form c+ / |c+|.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import minimize
from scipy.special import expit

from . import constants as cnst
from . import utilities
from .exceptions import DomainException
from .pipeline import ScoreVector

SOLVER_CLOSED_FORM = "closed-form"
SOLVER_SLSQP = "slsqp"

FLAG_NO_POSITIVE_WEIGHT = "no-positive-weight"
FLAG_NOT_CONVERGED = "not-converged"
FLAG_SOLVER_POLISHED = "solver-polished"

_SEPARATION_TOL = 1e-9
_NORMALIZATION_TOL = 1e-9
_LINE_SEARCH_MIN_STEP = 1e-12


@dataclass(frozen=True, eq=False)
class LabeledSample:
    """One selected viewpoint's scores with its best/worst label and strata."""

    scores: ScoreVector
    label: int
    layout_class: str = ""
    size_class: str = ""
    participant_id: str = ""

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise DomainException(f"label must be 0 (worst) or 1 (best), got {self.label}")

    @property
    def graph_id(self) -> str:
        return self.scores.graph_id


@dataclass(frozen=True, eq=False)
class WeightVector:
    """
    Nonnegative measure weights, zero outside the active set.

    normalization is either unit-euclidean-norm or unit-sum and holds over the
    active set within 1e-9.
    """

    weights: Dict[str, float]
    normalization: str
    active_set: Tuple[str, ...]
    flags: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        unknown = set(self.active_set) - set(cnst.MEASURE_IDS)
        if unknown:
            raise DomainException(f"unknown measures in active set: {sorted(unknown)}")
        full = {m: float(self.weights.get(m, 0.0)) for m in cnst.MEASURE_IDS}
        if any(w < 0 for w in full.values()):
            raise DomainException("weights must be nonnegative")
        outside = [m for m in cnst.MEASURE_IDS if m not in self.active_set and full[m] != 0.0]
        if outside:
            raise DomainException(f"weights outside the active set must be 0: {outside}")

        active = np.array([full[m] for m in self.active_set])
        if self.normalization == cnst.NORMALIZATION_L2:
            total = float(np.sqrt((active * active).sum()))
        elif self.normalization == cnst.NORMALIZATION_SUM:
            total = float(active.sum())
        else:
            raise DomainException(f"unknown normalization '{self.normalization}'")
        if abs(total - 1.0) > _NORMALIZATION_TOL:
            raise DomainException(f"{self.normalization} weights do not normalise to 1 (got {total})")

        object.__setattr__(self, "weights", full)
        object.__setattr__(self, "active_set", tuple(m for m in cnst.MEASURE_IDS if m in self.active_set))

    def __getitem__(self, measure_id: str) -> float:
        return self.weights[measure_id]

    def as_array(self) -> np.ndarray:
        return np.array([self.weights[m] for m in cnst.MEASURE_IDS])

    @classmethod
    def from_active(cls, active_set: Sequence[str], values: Sequence[float], normalization: str,
                    flags: Sequence[str] = ()) -> "WeightVector":
        return cls(dict(zip(active_set, (float(v) for v in values))), normalization, tuple(active_set), tuple(flags))

    def to_json(self, filename: str, config_hash: str = "") -> None:
        utilities.write_json({
            "weights": self.weights,
            "normalization": self.normalization,
            "active_set": list(self.active_set),
            "flags": list(self.flags),
        }, filename, config_hash)

    @classmethod
    def from_json(cls, filename: str) -> "WeightVector":
        document = utilities.read_json(filename)
        try:
            weights = {m: float(w) for m, w in document["weights"].items()}
            normalization = document["normalization"]
        except (KeyError, AttributeError, TypeError, ValueError) as e:
            logging.error(f"Malformed weight file {filename}: {e}")
            raise DomainException(f"{filename} is not a weight vector file: {e}")
        active = document.get("active_set", [m for m, w in weights.items() if w != 0.0])
        return cls(weights, normalization, tuple(active), tuple(document.get("flags", ())))


@dataclass(frozen=True, eq=False)
class FitReport:
    """Outcome of one fit. intercept and coefficients are set for logistic fits only."""

    method: str
    weights: WeightVector
    accuracy: float
    mean_separation: float
    best_count: int
    worst_count: int
    intercept: Optional[float] = None
    coefficients: Optional[Dict[str, float]] = None
    objective: float = math.nan
    converged: bool = True
    iterations: int = 0
    flags: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def k(self) -> int:
        return len(self.weights.active_set)

    def probabilities(self, frame: pd.DataFrame) -> pd.Series:
        """
        Sigmoid form of C-LR: fitted probability that each row is a best view.
        """
        if self.coefficients is None or self.intercept is None:
            raise DomainException(f"{self.method} fits have no logistic coefficients")
        active = list(self.weights.active_set)
        coefficients = np.array([self.coefficients[m] for m in active])
        z = self.intercept + frame.loc[:, active].to_numpy(dtype=float) @ coefficients
        return pd.Series(expit(z), index=frame.index, name=cnst.C_LR)

    def to_frame(self) -> pd.DataFrame:
        """Per-measure weights (and signed coefficients) in registry order."""
        coefficients = self.coefficients or {}
        return pd.DataFrame({
            cnst.RANGE_MEASURE_FIELD_NAME: list(cnst.MEASURE_IDS),
            "weight": [self.weights[m] for m in cnst.MEASURE_IDS],
            "coefficient": [coefficients.get(m, math.nan) for m in cnst.MEASURE_IDS],
            "active": [m in self.weights.active_set for m in cnst.MEASURE_IDS],
        })

    def summary(self) -> dict:
        return {
            "method": self.method,
            "k": self.k,
            "intercept": self.intercept,
            "accuracy": self.accuracy,
            "mean_separation": self.mean_separation,
            "objective": None if math.isnan(self.objective) else self.objective,
            "best_count": self.best_count,
            "worst_count": self.worst_count,
            "converged": self.converged,
            "iterations": self.iterations,
            "flags": list(self.flags),
        }


def samples_to_frame(samples: Sequence[LabeledSample]) -> pd.DataFrame:
    """Flatten samples into the labelled score table layout."""
    rows = []
    for s in samples:
        row = {
            cnst.PARTICIPANT_FIELD_NAME: s.participant_id,
            cnst.GRAPH_FIELD_NAME: s.graph_id,
            cnst.POLARITY_FIELD_NAME: cnst.BEST if s.label == 1 else cnst.WORST,
            cnst.LABEL_FIELD_NAME: s.label,
            cnst.LAYOUT_CLASS_FIELD_NAME: s.layout_class,
            cnst.SIZE_CLASS_FIELD_NAME: s.size_class,
        }
        row.update(s.scores.scores)
        rows.append(row)
    return pd.DataFrame(rows, columns=_SAMPLE_COLUMNS)


def samples_from_frame(frame: pd.DataFrame) -> List[LabeledSample]:
    """
    Rebuild samples from a labelled score table (as written by the score command).
    """
    missing = [m for m in cnst.MEASURE_IDS + (cnst.LABEL_FIELD_NAME, cnst.GRAPH_FIELD_NAME) if m not in frame.columns]
    if missing:
        logging.error(f"Score table is missing columns {missing}")
        raise DomainException(f"score table is missing columns {missing}")

    def text(row, column):
        value = row.get(column, "")
        return "" if pd.isna(value) else str(value)

    samples = []
    for _, row in frame.iterrows():
        viewpoint = None
        if all(c in frame.columns for c in cnst.VIEW_FIELD_NAMES):
            viewpoint = row[list(cnst.VIEW_FIELD_NAMES)].to_numpy(dtype=float)
        scores = ScoreVector.from_array(str(row[cnst.GRAPH_FIELD_NAME]),
                                        row[list(cnst.MEASURE_IDS)].to_numpy(dtype=float), viewpoint)
        samples.append(LabeledSample(scores, int(row[cnst.LABEL_FIELD_NAME]),
                                     text(row, cnst.LAYOUT_CLASS_FIELD_NAME),
                                     text(row, cnst.SIZE_CLASS_FIELD_NAME),
                                     text(row, cnst.PARTICIPANT_FIELD_NAME)))
    return samples


def fit_logistic(samples: Sequence[LabeledSample],
                 l2: float = cnst.DEFAULT_L2,
                 active: Optional[Sequence[str]] = None,
                 renormalize: bool = False) -> FitReport:
    """
    L2-penalised logistic regression of the label on the scores.

    Args:
        samples:        Labelled samples, both classes present, at least 4.
        l2:             Penalty on the non-intercept coefficients.
        active:         Measures to fit on; all registry measures by default.
        renormalize:    Rescale each measure to [0, 1] over these samples first.

    Returns:
        Report with signed coefficients, intercept and the clamped unit-sum
        importance weights.
    """
    if l2 < 0:
        raise DomainException(f"l2 must be nonnegative, got {l2}")
    if len(samples) < 4:
        logging.error(f"Logistic fit on {len(samples)} samples")
        raise DomainException(f"logistic regression needs at least 4 samples, got {len(samples)}")
    active = _resolve_active(active)
    x, y = _design(samples, active, renormalize)

    theta, converged, iterations, _ = _logistic_newton(x, y, l2)
    intercept, coefficients = float(theta[0]), theta[1:]
    if not converged:
        logging.warning(f"Logistic regression did not converge in {iterations} iterations")

    positive = np.clip(coefficients, 0.0, None)
    flags = [] if converged else [FLAG_NOT_CONVERGED]
    if positive.sum() > 0:
        importance = positive / positive.sum()
    else:
        logging.warning("No measure has a positive logistic coefficient, using uniform importance")
        importance = np.full(len(active), 1.0 / len(active))
        flags.append(FLAG_NO_POSITIVE_WEIGHT)
    weights = WeightVector.from_active(active, importance, cnst.NORMALIZATION_SUM, flags)

    predicted = expit(intercept + x @ coefficients) >= 0.5
    return FitReport(
        method=cnst.METHOD_LR,
        weights=weights,
        accuracy=float((predicted == (y == 1)).mean()),
        mean_separation=_mean_separation(x @ importance, y),
        best_count=int(y.sum()),
        worst_count=int(len(y) - y.sum()),
        intercept=intercept,
        coefficients=dict(zip(active, coefficients.tolist())),
        converged=converged,
        iterations=iterations,
        flags=tuple(flags),
    )


def max_separation_weights(c: np.ndarray) -> Tuple[np.ndarray, bool]:
    """
    Closed-form maximiser of w . c over nonnegative unit-norm w.

    Args:
        c:  Per-measure best-minus-worst score sums.

    Returns:
        (w, flagged): c+ / |c+|, or the uniform vector 1/sqrt(k) with
        flagged=True when no component of c is positive.
    """
    c = np.asarray(c, dtype=float)
    positive = np.clip(c, 0.0, None)
    norm = np.linalg.norm(positive)
    if norm == 0:
        return np.full(len(c), 1.0 / math.sqrt(len(c))), True
    return positive / norm, False


def solve_max_separation(samples: Sequence[LabeledSample],
                         active: Optional[Sequence[str]] = None,
                         solver: str = SOLVER_CLOSED_FORM,
                         renormalize: bool = False) -> FitReport:
    """
    Maximise the separation between best and worst viewpoints.

    Args:
        samples:        Labelled samples, both classes present.
        active:         Measures to weight; all registry measures by default.
        solver:         "closed-form", or "slsqp" for the sequential quadratic
                        programming solver certified against the closed form.
        renormalize:    Rescale each measure to [0, 1] over these samples first.

    Returns:
        Report with unit-Euclidean-norm weights and the attained objective.
    """
    if solver not in (SOLVER_CLOSED_FORM, SOLVER_SLSQP):
        raise DomainException(f"solver must be '{SOLVER_CLOSED_FORM}' or '{SOLVER_SLSQP}', got '{solver}'")
    active = _resolve_active(active)
    x, y = _design(samples, active, renormalize)

    c = x[y == 1].sum(axis=0) - x[y == 0].sum(axis=0)
    w, flagged = max_separation_weights(c)
    flags = []
    if flagged:
        logging.warning("No measure separates best from worst, using the uniform weight vector")
        flags.append(FLAG_NO_POSITIVE_WEIGHT)
    elif solver == SOLVER_SLSQP:
        w, polished = _slsqp_separation(c, w)
        if polished:
            flags.append(FLAG_SOLVER_POLISHED)

    combined = x @ w
    return FitReport(
        method=cnst.METHOD_SQP,
        weights=WeightVector.from_active(active, w, cnst.NORMALIZATION_L2, flags),
        accuracy=_midpoint_accuracy(combined, y),
        mean_separation=_mean_separation(combined, y),
        best_count=int(y.sum()),
        worst_count=int(len(y) - y.sum()),
        objective=float(w @ c),
        flags=tuple(flags),
    )


def select_subset(samples: Sequence[LabeledSample],
                  k: int,
                  method: str,
                  l2: float = cnst.DEFAULT_L2,
                  exhaustive: bool = False,
                  renormalize: bool = False) -> FitReport:
    """
    Pick k measures by recursive backward elimination and fit on them.

    Each round fits on the active set and drops the least important measure
    (smallest clamped coefficient or smallest weight; ties drop the later
    measure in registry order).

    Args:
        samples:        Labelled samples.
        k:              Number of measures to keep.
        method:         "lr" or "sqp".
        l2:             Logistic penalty.
        exhaustive:     Search every k-subset instead (slow; for cross-checks).
        renormalize:    Rescale each measure over these samples first.

    Returns:
        The fit on the surviving k measures.
    """
    if method not in (cnst.METHOD_LR, cnst.METHOD_SQP):
        raise DomainException(f"method must be '{cnst.METHOD_LR}' or '{cnst.METHOD_SQP}', got '{method}'")
    if not 1 <= k <= len(cnst.MEASURE_IDS):
        raise DomainException(f"k must lie in [1, {len(cnst.MEASURE_IDS)}], got {k}")

    def fit(active: Sequence[str]) -> FitReport:
        if method == cnst.METHOD_LR:
            return fit_logistic(samples, l2, active, renormalize)
        return solve_max_separation(samples, active, renormalize=renormalize)

    if exhaustive:
        return fit(_exhaustive_subset(samples, k, method, l2, renormalize))

    active = list(cnst.MEASURE_IDS)
    report = fit(active)
    while len(active) > k:
        importance = np.array([report.weights[m] for m in active])
        # Last occurrence of the minimum, so ties drop the later measure
        drop = len(active) - 1 - int(np.argmin(importance[::-1]))
        logging.debug(f"Backward elimination drops {active[drop]} ({importance[drop]:.3g})")
        del active[drop]
        report = fit(active)
    return report


def combined_score(weights: WeightVector, scores: ScoreVector) -> float:
    """Weighted sum of scores over the active set."""
    return float(sum(weights[m] * scores[m] for m in weights.active_set))


def combined_scores(weights: WeightVector, frame: pd.DataFrame, name: str = "") -> pd.Series:
    """combined_score for every row of a score table."""
    active = list(weights.active_set)
    values = frame.loc[:, active].to_numpy(dtype=float) @ np.array([weights[m] for m in active])
    return pd.Series(values, index=frame.index, name=name or None)


# Private utility functions
_SAMPLE_COLUMNS = [
    cnst.PARTICIPANT_FIELD_NAME,
    cnst.GRAPH_FIELD_NAME,
    cnst.POLARITY_FIELD_NAME,
    cnst.LABEL_FIELD_NAME,
    cnst.LAYOUT_CLASS_FIELD_NAME,
    cnst.SIZE_CLASS_FIELD_NAME,
] + list(cnst.MEASURE_IDS)


def _resolve_active(active: Optional[Sequence[str]]) -> List[str]:
    if active is None:
        return list(cnst.MEASURE_IDS)
    unknown = [m for m in active if m not in cnst.MEASURE_IDS]
    if unknown or not active:
        raise DomainException(f"active set must be a nonempty subset of the registry, got {list(active)}")
    return [m for m in cnst.MEASURE_IDS if m in set(active)]


def _design(samples: Sequence[LabeledSample], active: Sequence[str], renormalize: bool):
    y = np.array([s.label for s in samples], dtype=float)
    if not len(y) or y.min() == y.max():
        logging.error("Fit requested with a single label class")
        raise DomainException("both best and worst samples are required")
    x = np.array([[s.scores[m] for m in active] for s in samples], dtype=float)
    if renormalize:
        lo, hi = x.min(axis=0), x.max(axis=0)
        span = hi - lo
        degenerate = span < cnst.DEGENERATE_RANGE_EPS
        x = np.where(degenerate, 1.0, (x - lo) / np.where(degenerate, 1.0, span))
    return x, y


def _logistic_newton(x: np.ndarray, y: np.ndarray, l2: float):
    """Damped Newton iterations on the mean penalised negative log-likelihood."""
    n = len(y)
    design = np.column_stack([np.ones(n), x])
    penalty = np.full(design.shape[1], l2)
    penalty[0] = 0.0

    def loss(theta):
        z = design @ theta
        return float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * (penalty * theta * theta).sum())

    theta = np.zeros(design.shape[1])
    current = loss(theta)
    for iteration in range(cnst.LOGISTIC_MAX_ITERATIONS):
        p = expit(design @ theta)
        gradient = design.T @ (p - y) / n + penalty * theta
        if np.abs(gradient).max() < cnst.LOGISTIC_GRADIENT_TOL:
            return theta, True, iteration, current

        hessian = design.T @ (design * (p * (1.0 - p))[:, None]) / n + np.diag(penalty)
        try:
            step = np.linalg.solve(hessian, gradient)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hessian, gradient, rcond=None)[0]

        # Backtracking (Armijo) line search
        size, slope = 1.0, float(gradient @ step)
        while size >= _LINE_SEARCH_MIN_STEP:
            candidate = theta - size * step
            candidate_loss = loss(candidate)
            if candidate_loss <= current - 1e-4 * size * slope:
                break
            size *= 0.5
        else:
            return theta, False, iteration, current
        theta, current = candidate, candidate_loss
    return theta, False, cnst.LOGISTIC_MAX_ITERATIONS, current


def _slsqp_separation(c: np.ndarray, closed_form: np.ndarray) -> Tuple[np.ndarray, bool]:
    k = len(c)
    result = minimize(
        lambda w: -float(w @ c),
        np.full(k, 1.0 / math.sqrt(k)),
        jac=lambda w: -c,
        method="SLSQP",
        bounds=[(0.0, None)] * k,
        constraints=[{"type": "eq", "fun": lambda w: float(w @ w) - 1.0, "jac": lambda w: 2.0 * w}],
        options={"ftol": 1e-14, "maxiter": 1000},
    )
    w = np.clip(result.x, 0.0, None)
    norm = np.linalg.norm(w)
    optimum = float(closed_form @ c)
    if norm == 0 or optimum - float(w @ c) / norm > _SEPARATION_TOL * max(1.0, abs(optimum)):
        logging.warning(f"SLSQP stopped short of the separation optimum ({result.message}), "
                        f"using the closed form")
        return closed_form, True
    return w / norm, False


def _exhaustive_subset(samples, k, method, l2, renormalize) -> List[str]:
    x, y = _design(samples, cnst.MEASURE_IDS, renormalize)
    c = x[y == 1].sum(axis=0) - x[y == 0].sum(axis=0)
    best, best_value = None, -math.inf
    for subset in itertools.combinations(range(len(cnst.MEASURE_IDS)), k):
        columns = list(subset)
        if method == cnst.METHOD_SQP:
            value = float(np.linalg.norm(np.clip(c[columns], 0.0, None)))
        else:
            value = -_logistic_newton(x[:, columns], y, l2)[3]
        # Strict improvement keeps the lexicographically first subset on ties
        if value > best_value:
            best, best_value = columns, value
    logging.debug(f"Exhaustive search over {k}-subsets picked {[cnst.MEASURE_IDS[i] for i in best]}")
    return [cnst.MEASURE_IDS[i] for i in best]


def _mean_separation(combined: np.ndarray, y: np.ndarray) -> float:
    return float(combined[y == 1].mean() - combined[y == 0].mean())


def _midpoint_accuracy(combined: np.ndarray, y: np.ndarray) -> float:
    best_mean, worst_mean = combined[y == 1].mean(), combined[y == 0].mean()
    midpoint = (best_mean + worst_mean) / 2.0
    predicted = combined >= midpoint if best_mean >= worst_mean else combined <= midpoint
    return float((predicted == (y == 1)).mean())
