"""Stepwise linear discriminant analysis (SWLDA).

Labels are coded +1 (target) / -1 (non-target) and regressed on the
features by least squares. Features enter the regression one at a time by
forward selection on the partial F-test and leave by backward elimination,
the classical stepwise procedure used for P300 classification:

1. among the features not yet in the model, add the one with the smallest
   partial-F p-value, provided it is below ``p_enter``;
2. while some selected feature has a p-value above ``p_remove``, drop the
   worst one;
3. repeat until nothing changes or ``max_features`` is reached.

The final discriminant is the least-squares fit on the surviving features.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

P_ENTER = 0.10
P_REMOVE = 0.15
MAX_FEATURES = 60
MIN_VARIANCE = 1e-12
# Residual sums of squares below this fraction of the total are exact fits.
_RSS_RTOL = 1e-12
# Candidates whose residual norm after projection is below this fraction
# of their own norm are collinear with the current model.
_COLLINEAR_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=float).ravel()
        if X.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {X.shape}")
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"{X.shape[0]} feature rows but {y.shape[0]} labels")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise ValueError("labels must be +1 (target) or -1 (non-target)")
        if not (np.all(np.isfinite(X))):
            raise ValueError("features contain non-finite values")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_targets(self) -> int:
        return int(np.sum(self.labels > 0))


@dataclass(frozen=True, eq=False)
class SwldaModel:
    selected: tuple
    weights: tuple
    intercept: float
    p_enter: float = P_ENTER
    p_remove: float = P_REMOVE
    max_features: int = MAX_FEATURES
    feature_dim: int = 160

    def __post_init__(self):
        selected = tuple(int(i) for i in self.selected)
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "selected", selected)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "intercept", float(self.intercept))
        if len(selected) != len(weights):
            raise ValueError("one weight per selected feature is required")
        if len(set(selected)) != len(selected):
            raise ValueError("selected feature indices must be unique")
        if any(not 0 <= i < self.feature_dim for i in selected):
            raise ValueError(f"selected indices must be < feature_dim={self.feature_dim}")
        if len(selected) > self.max_features:
            raise ValueError("more selected features than max_features")
        if not np.all(np.isfinite(weights)) or not np.isfinite(self.intercept):
            raise ValueError("weights and intercept must be finite")

    def __eq__(self, other):
        if not isinstance(other, SwldaModel):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def to_dict(self) -> dict:
        return {
            "selected": list(self.selected),
            "weights": list(self.weights),
            "intercept": self.intercept,
            "p_enter": self.p_enter,
            "p_remove": self.p_remove,
            "max_features": self.max_features,
            "feature_dim": self.feature_dim,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SwldaModel":
        return cls(selected=d["selected"], weights=d["weights"], intercept=d["intercept"],
                   p_enter=d["p_enter"], p_remove=d["p_remove"],
                   max_features=d["max_features"], feature_dim=d["feature_dim"])


def partial_f_pvalue(residual_ss_reduced: float, residual_ss_full: float, df_full: int) -> float:
    """Upper-tail p-value of the one-parameter partial F statistic.

    F = (ss_reduced - ss_full) / (ss_full / df_full) with (1, df_full)
    degrees of freedom. The survival function of F(1, d) at f equals the
    regularized incomplete beta ``I_{d/(d+f)}(d/2, 1/2)``.
    """
    if df_full < 1:
        raise ValueError(f"df_full must be >= 1, got {df_full}")
    if residual_ss_full < 0 or residual_ss_reduced < residual_ss_full:
        raise ValueError("need residual_ss_reduced >= residual_ss_full >= 0")
    if residual_ss_reduced == residual_ss_full:
        return 1.0
    if residual_ss_full == 0:
        return 0.0
    f = (residual_ss_reduced - residual_ss_full) / (residual_ss_full / df_full)
    return float(special.betainc(df_full / 2.0, 0.5, df_full / (df_full + f)))


class _Stepper:
    """Residual bookkeeping for one stepwise run on centred data."""

    def __init__(self, X: np.ndarray, y: np.ndarray):
        self.n = X.shape[0]
        self.X = X - X.mean(axis=0)
        self.y = y - y.mean()
        self.tss = float(self.y @ self.y)
        self.col_ss = np.sum(self.X ** 2, axis=0)

    def _snap(self, ss: float) -> float:
        return 0.0 if ss < _RSS_RTOL * self.tss else ss

    def fit(self, selected: list):
        """Orthonormal basis, residual sum of squares and per-feature removal
        increments for the model on ``selected``."""
        if not selected:
            return np.empty((self.n, 0)), self._snap(self.tss), np.empty(0)
        Q, R = np.linalg.qr(self.X[:, selected])
        qy = Q.T @ self.y
        resid = self.y - Q @ qy
        rss = self._snap(float(resid @ resid))
        coef = np.linalg.solve(R, qy)
        r_inv = np.linalg.solve(R, np.eye(len(selected)))
        # Dropping feature s raises the RSS by b_s^2 / [(X'X)^-1]_ss.
        increments = coef ** 2 / np.sum(r_inv ** 2, axis=1)
        return Q, rss, increments

    def entry_pvalues(self, selected: list, eligible: np.ndarray):
        Q, rss, _ = self.fit(selected)
        df_full = self.n - len(selected) - 2
        pvals = np.full(self.X.shape[1], np.inf)
        if df_full < 1:
            return pvals
        resid = self.y - Q @ (Q.T @ self.y)
        cand = np.flatnonzero(eligible)
        Z = self.X[:, cand] - Q @ (Q.T @ self.X[:, cand])
        z_ss = np.sum(Z ** 2, axis=0)
        for j, zz, zr in zip(cand, z_ss, Z.T @ resid):
            if zz <= _COLLINEAR_RTOL * self.col_ss[j]:
                continue
            ss_full = self._snap(max(rss - zr * zr / zz, 0.0))
            pvals[j] = partial_f_pvalue(rss, min(ss_full, rss), df_full)
        return pvals

    def removal_pvalues(self, selected: list) -> np.ndarray:
        _, rss, increments = self.fit(selected)
        df_full = self.n - len(selected) - 1
        return np.array([partial_f_pvalue(self._snap(rss + inc), rss, df_full)
                         for inc in increments])


def stepwise_select(X: np.ndarray, y: np.ndarray, p_enter: float = P_ENTER,
                    p_remove: float = P_REMOVE, max_features: int = MAX_FEATURES) -> list:
    """Run the entry/removal loop and return selected feature indices in
    order of entry (survivors only)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    step = _Stepper(X, y)
    eligible_base = X.var(axis=0) >= MIN_VARIANCE
    selected: list = []
    seen = {frozenset()}
    max_iter = max(1, max_features) * X.shape[1] + 1

    for _ in range(max_iter):
        changed = False
        if len(selected) < max_features:
            eligible = eligible_base.copy()
            eligible[selected] = False
            pvals = step.entry_pvalues(selected, eligible)
            best = int(np.argmin(pvals))  # first minimum -> lowest index on ties
            if pvals[best] < p_enter:
                selected.append(best)
                changed = True
        while selected:
            pvals = step.removal_pvalues(selected)
            # largest p-value; ties resolved towards the lowest feature index
            worst = max(range(len(selected)), key=lambda k: (pvals[k], -selected[k]))
            if pvals[worst] > p_remove:
                selected.pop(worst)
                changed = True
            else:
                break
        state = frozenset(selected)
        if not changed or state in seen:
            break
        seen.add(state)
    return selected


def train(data: Dataset, p_enter: float = P_ENTER, p_remove: float = P_REMOVE,
          max_features: int = MAX_FEATURES) -> SwldaModel:
    """Fit an SWLDA model to ``data``.

    Raises ``ValueError`` for a single-class dataset. When no feature can
    enter (e.g. every feature is constant) the model has an empty selection
    and its intercept is the label mean.
    """
    if not 0 < p_enter <= p_remove < 1:
        raise ValueError("need 0 < p_enter <= p_remove < 1")
    if max_features < 0:
        raise ValueError("max_features must be >= 0")
    if data.n < 12:
        raise ValueError(f"need at least 12 observations, got {data.n}")
    if data.n_targets in (0, data.n):
        raise ValueError("dataset must contain both target and non-target epochs")

    X, y = data.features, data.labels
    selected = stepwise_select(X, y, p_enter, p_remove, max_features)
    if selected:
        design = np.column_stack([np.ones(data.n), X[:, selected]])
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        intercept, weights = coef[0], coef[1:]
    else:
        intercept, weights = y.mean(), np.empty(0)
    return SwldaModel(tuple(selected), tuple(weights), intercept, p_enter, p_remove,
                      max_features, data.n_features)


def score(model: SwldaModel, fv) -> float:
    """Discriminant value of one feature vector; larger is more target-like."""
    values = np.asarray(getattr(fv, "values", fv), dtype=float).ravel()
    if values.shape[0] != model.feature_dim:
        raise ValueError(f"feature vector has {values.shape[0]} values, "
                         f"model expects {model.feature_dim}")
    if not model.selected:
        return model.intercept
    return float(model.intercept + np.dot(model.weights, values[list(model.selected)]))


def score_matrix(model: SwldaModel, features: np.ndarray) -> np.ndarray:
    """Vectorised :func:`score` over the rows of ``features``."""
    features = np.asarray(features, dtype=float)
    if features.ndim != 2 or features.shape[1] != model.feature_dim:
        raise ValueError(f"expected (n, {model.feature_dim}) features, got {features.shape}")
    if not model.selected:
        return np.full(features.shape[0], model.intercept)
    return model.intercept + features[:, list(model.selected)] @ np.asarray(model.weights)


def training_accuracy(model: SwldaModel, data: Dataset, threshold: Optional[float] = 0.0) -> float:
    """Fraction of epochs whose score sign matches their label."""
    predicted = np.where(score_matrix(model, data.features) > threshold, 1.0, -1.0)
    return float(np.mean(predicted == data.labels))
