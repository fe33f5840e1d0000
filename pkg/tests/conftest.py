"""Shared oracles and fixtures.

The oracles here deliberately take the dumbest correct path (dense
eigendecompositions, exhaustive threshold sweeps with direct counting) so
they stay independent of the library's faster implementations.
"""

import time

import numpy as np
import pytest

from cbbench.core import Dataset, Scenario, SchemeId, SchemeParams, Template
from cbbench.metrics import mutual_information, protected_matrix
from cbbench.protocol import KeyPolicy, run_scenario
from cbbench.synthdata import STANDARD_CONFIG, generate


def oracle_threshold_sweep(mated: np.ndarray, nonmated: np.ndarray):
    """Exhaustive DET sweep by direct comparison counting at every candidate
    threshold (midpoints of consecutive distinct pooled scores plus
    sentinels). Counts come from broadcast comparisons, chunked to bound
    memory. Returns (thresholds, fmr, fnmr) arrays."""
    mated = np.asarray(mated, dtype=float)
    nonmated = np.asarray(nonmated, dtype=float)
    pooled = np.unique(np.concatenate([mated, nonmated]))
    thresholds = np.concatenate(
        [[pooled[0] - 1.0], (pooled[:-1] + pooled[1:]) / 2.0, [pooled[-1] + 1.0]]
    )
    fmr = np.empty(thresholds.size)
    fnmr = np.empty(thresholds.size)
    for start in range(0, thresholds.size, 512):
        chunk = thresholds[start : start + 512, None]
        fmr[start : start + 512] = (nonmated[None, :] >= chunk).sum(axis=1) / nonmated.size
        fnmr[start : start + 512] = (mated[None, :] < chunk).sum(axis=1) / mated.size
    return thresholds, fmr, fnmr


def oracle_eer(mated: np.ndarray, nonmated: np.ndarray) -> float:
    """EER from the exhaustive sweep: halve fmr+fnmr where |fmr - fnmr| is
    minimal, first (lowest) threshold wins ties."""
    _, fmr, fnmr = oracle_threshold_sweep(mated, nonmated)
    best_gap, best_value = None, None
    for m, nm in zip(fmr, fnmr):
        gap = abs(m - nm)
        if best_gap is None or gap < best_gap:
            best_gap, best_value = gap, (m + nm) / 2.0
    return best_value


def oracle_fnmr_at_fmr(mated: np.ndarray, nonmated: np.ndarray, target: float) -> float:
    """FNMR at the first (lowest) threshold of the exhaustive sweep whose FMR
    is at most the target."""
    _, fmr, fnmr = oracle_threshold_sweep(mated, nonmated)
    for m, nm in zip(fmr, fnmr):
        if m <= target:
            return nm
    raise AssertionError("top sentinel always has fmr == 0")


def make_dataset(features_by_subject: dict[str, list]) -> Dataset:
    """Hand-build a dataset from {subject_id: [feature vectors]}."""
    templates = [
        Template(subject_id=s, sample_id=str(i), features=np.asarray(f, dtype=float))
        for s, feats in features_by_subject.items()
        for i, f in enumerate(feats)
    ]
    return Dataset.from_templates(templates)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


# knobs of the reference benchmark, sized to its 300-sample dataset
# (see cbbench.io.standard_benchmark_config)
STANDARD_BINS = 50
STANDARD_MI_COMPONENTS = 16


@pytest.fixture(scope="session")
def standard_battery():
    """Run the full six-scheme battery on the standard synthetic benchmark
    once per session: score sets for all three scenarios plus the
    irreversibility estimates for normal/stolen."""
    start = time.perf_counter()
    ds = generate(STANDARD_CONFIG)
    x = ds.feature_matrix()
    scores = {}
    mi = {}
    for scheme in SchemeId:
        params = SchemeParams()
        for scenario in Scenario:
            policy = KeyPolicy(42, scenario, scheme, params)
            scores[(scheme, scenario)] = run_scenario(ds, policy)
        for scenario in (Scenario.NORMAL, Scenario.STOLEN_TOKEN):
            policy = KeyPolicy(42, scenario, scheme, params)
            y = protected_matrix(ds, policy)
            mi[(scheme, scenario)] = mutual_information(x, y, STANDARD_MI_COMPONENTS)
    elapsed = time.perf_counter() - start
    return {"dataset": ds, "scores": scores, "mi": mi, "elapsed_s": elapsed}
