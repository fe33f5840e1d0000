"""The three evaluation families: recognition performance (DET/EER/FNMR@FMR),
unlinkability from mated/non-mated score distributions, and irreversibility
as mutual information between reduced unprotected and protected template sets
under a multivariate Gaussian approximation. All entropies and mutual
informations are in nats."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, Scenario
from .errors import InvalidArgumentError
from .numerics import covariance, default_ridge, gaussian_entropy, pca_fit, pca_transform
from .protocol import KeyPolicy, ScoreSet, derive_key
from .schemes import TransformInstance, instantiate, protect

__all__ = [
    "DetCurve",
    "compute_det",
    "eer",
    "fnmr_at_fmr",
    "UnlinkabilityReport",
    "unlinkability",
    "IrreversibilityReport",
    "mutual_information",
    "protected_matrix",
]

# per-feature shared information beyond this many nats means the residual
# variance sits at the ridge floor: the protected set is effectively a
# deterministic function of the unprotected one
_NEAR_DETERMINISTIC_NATS_PER_DIM = 3.0


@dataclass
class DetCurve:
    """Detection error tradeoff: false match and false non-match rates at
    each candidate threshold, thresholds ascending. fmr is non-increasing and
    fnmr non-decreasing along the curve."""

    thresholds: np.ndarray
    fmr: np.ndarray
    fnmr: np.ndarray

    def __len__(self) -> int:
        return self.thresholds.shape[0]


def compute_det(scores: ScoreSet) -> DetCurve:
    """Trace the DET curve over every decision-relevant threshold.

    Candidate thresholds are the midpoints between consecutive distinct
    pooled scores plus one sentinel below the minimum and one above the
    maximum; fmr(t) counts non-mated scores >= t, fnmr(t) mated scores < t.
    """
    mated, nonmated = scores.mated, scores.nonmated
    if mated.size == 0 or nonmated.size == 0:
        raise InvalidArgumentError("both score lists must be non-empty")
    pooled = np.unique(np.concatenate([mated, nonmated]))
    thresholds = np.concatenate(
        [[pooled[0] - 1.0], (pooled[:-1] + pooled[1:]) / 2.0, [pooled[-1] + 1.0]]
    )
    # score arrays are stored sorted, so counts come from binary search
    fnmr = np.searchsorted(mated, thresholds, side="left") / mated.size
    fmr = (nonmated.size - np.searchsorted(nonmated, thresholds, side="left")) / nonmated.size
    return DetCurve(thresholds=thresholds, fmr=fmr, fnmr=fnmr)


def eer(curve: DetCurve) -> float:
    """Equal error rate: (fmr + fnmr) / 2 at the threshold minimizing
    |fmr - fnmr|, ties resolved to the lowest threshold."""
    i = int(np.argmin(np.abs(curve.fmr - curve.fnmr)))
    return float((curve.fmr[i] + curve.fnmr[i]) / 2.0)


def fnmr_at_fmr(curve: DetCurve, target_fmr: float) -> float:
    """FNMR at the smallest threshold whose FMR is at most the target (the
    conservative operating point)."""
    if not 0.0 < target_fmr < 1.0:
        raise InvalidArgumentError(f"target_fmr must be in (0, 1), got {target_fmr}")
    # fmr is non-increasing in the threshold: take the first qualifying point
    i = int(np.argmax(curve.fmr <= target_fmr))
    return float(curve.fnmr[i])


@dataclass
class UnlinkabilityReport:
    """System unlinkability measure with its per-bin local curve. d_sys is 0
    for indistinguishable mated/non-mated score distributions and 1 for fully
    separated ones."""

    d_sys: float
    bin_centers: np.ndarray
    local_d: np.ndarray
    bin_count: int
    degenerate_range: bool = False


def unlinkability(scores: ScoreSet, bins: int = 100) -> UnlinkabilityReport:
    """Posterior-difference unlinkability over shared equal-width score bins.

    Requires scores generated under sample-specific keys. Per bin, with equal
    priors, the local measure is max(0, (pm - pnm) / (pm + pnm)) where pm and
    pnm are the per-bin probabilities of the mated and non-mated scores; the
    system measure is the expectation of the local measure over mated mass.
    The raw posterior difference can dip negative, so it is clipped to keep
    the declared [0, 1] range.
    """
    if scores.scenario is not Scenario.SAMPLE_SPECIFIC:
        raise InvalidArgumentError(
            "unlinkability requires scores generated under the sample-specific scenario"
        )
    if bins < 10:
        raise InvalidArgumentError(f"bins must be >= 10, got {bins}")
    mated, nonmated = scores.mated, scores.nonmated
    if mated.size == 0 or nonmated.size == 0:
        raise InvalidArgumentError("both score lists must be non-empty")
    lo = min(mated[0], nonmated[0])
    hi = max(mated[-1], nonmated[-1])
    if hi == lo:
        # all scores identical: one degenerate bin, no separation at all
        return UnlinkabilityReport(
            d_sys=0.0,
            bin_centers=np.array([lo]),
            local_d=np.array([0.0]),
            bin_count=bins,
            degenerate_range=True,
        )
    edges = np.linspace(lo, hi, bins + 1)
    p_m = np.histogram(mated, bins=edges)[0] / mated.size
    p_nm = np.histogram(nonmated, bins=edges)[0] / nonmated.size
    total = p_m + p_nm
    diff = np.divide(p_m - p_nm, total, out=np.zeros_like(total), where=total > 0)
    local = np.clip(diff, 0.0, None)
    d_sys = float(np.sum(p_m * local))
    return UnlinkabilityReport(
        d_sys=d_sys,
        bin_centers=(edges[:-1] + edges[1:]) / 2.0,
        local_d=local,
        bin_count=bins,
    )


@dataclass
class IrreversibilityReport:
    """Mutual information between the reduced unprotected and protected sets,
    with the three entropy terms it decomposes into (all nats)."""

    mi: float
    h_x: float
    h_y: float
    h_joint: float
    r_used: int
    near_deterministic: bool = False


def mutual_information(x: np.ndarray, y: np.ndarray, r: int = 100) -> IrreversibilityReport:
    """MI(X_r, Y_r) = H(X_r) + H(Y_r) - H(X_r, Y_r) under a Gaussian fit.

    Both matrices are reduced to r_used = min(r, rows-1, cols(x), cols(y))
    principal components, fitted separately. Each marginal covariance gets
    its trace-scaled default ridge and the joint covariance the matching
    block-diagonal ridge. That keeps the regularized joint's marginals exact,
    so the estimate is a genuine Gaussian MI: non-negative up to rounding and
    exactly invariant when either input is rescaled by a positive constant.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2:
        raise InvalidArgumentError("expected 2-D matrices")
    if x.shape[0] != y.shape[0]:
        raise InvalidArgumentError(f"row counts differ: {x.shape[0]} vs {y.shape[0]}")
    rows = x.shape[0]
    if rows < 3:
        raise InvalidArgumentError(f"need at least 3 rows, got {rows}")
    r_used = min(r, rows - 1, x.shape[1], y.shape[1])
    if r_used < 1:
        raise InvalidArgumentError("no usable components (empty input?)")

    x_r = pca_transform(pca_fit(x, r_used), x)
    y_r = pca_transform(pca_fit(y, r_used), y)

    cov_x = covariance(x_r)
    cov_y = covariance(y_r)
    cov_joint = covariance(np.hstack([x_r, y_r]))
    ridge_x = default_ridge(cov_x)
    ridge_y = default_ridge(cov_y)
    block_ridge = np.concatenate([np.full(r_used, ridge_x), np.full(r_used, ridge_y)])

    h_x = gaussian_entropy(cov_x, ridge_x)
    h_y = gaussian_entropy(cov_y, ridge_y)
    h_joint = gaussian_entropy(cov_joint + np.diag(block_ridge))
    mi = h_x + h_y - h_joint
    if -1e-9 <= mi < 0.0:
        mi = 0.0
    return IrreversibilityReport(
        mi=mi,
        h_x=h_x,
        h_y=h_y,
        h_joint=h_joint,
        r_used=r_used,
        near_deterministic=mi >= _NEAR_DETERMINISTIC_NATS_PER_DIM * r_used,
    )


def protected_matrix(ds: Dataset, policy: KeyPolicy) -> np.ndarray:
    """Protect the whole dataset under the policy and stack the payloads as
    real-valued rows (bits as 0/1, codes as integers, Bloom blocks
    concatenated): the attacker's view of the protected database."""
    instances: dict[int, TransformInstance] = {}
    rows = []
    for t in ds.templates:
        key = derive_key(policy, t.subject_id, t.sample_id)
        inst = instances.get(key.seed)
        if inst is None:
            inst = instantiate(key, ds.dimension)
            instances[key.seed] = inst
        rows.append(protect(t, inst).to_real_vector())
    return np.vstack(rows)
