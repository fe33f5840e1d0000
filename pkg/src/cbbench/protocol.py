"""Key-derivation policy per scenario and mated/non-mated score generation.

Pairing convention: unordered pairs throughout. Mated comparisons take all
sample pairs within each subject; non-mated comparisons take all subject
pairs using each subject's first sample. Every comparator is symmetric, so an
ordered convention would only duplicate scores without moving any metric.
"""

from __future__ import annotations

import hashlib
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, Scenario, SchemeId, SchemeKey, SchemeParams, Template
from .errors import InvalidArgumentError
from .schemes import TransformInstance, compare, instantiate, protect

__all__ = ["KeyPolicy", "ScoreSet", "derive_key", "mated_pairs", "nonmated_pairs", "run_scenario"]

_STOLEN_LABEL = b"stolen-token"
_ID_SEPARATOR = b"\x1f"  # keeps ("ab", "c") distinct from ("a", "bc")


def _hash64(parts: list[bytes]) -> int:
    """Fixed 64-bit mix of the byte concatenation (BLAKE2b-64, big endian);
    stable across platforms and releases by construction."""
    return int.from_bytes(hashlib.blake2b(b"".join(parts), digest_size=8).digest(), "big")


@dataclass(frozen=True)
class KeyPolicy:
    """How per-template keys derive from the master seed in one scenario."""

    master_seed: int
    scenario: Scenario
    scheme_id: SchemeId
    params: SchemeParams = field(default_factory=SchemeParams)


def derive_key(policy: KeyPolicy, subject_id: str, sample_id: str = "") -> SchemeKey:
    """Derive the scheme key a template is protected with.

    Stolen-token ignores identity entirely (one disclosed key for everyone),
    normal keys on the subject only, and sample-specific keys on both subject
    and sample.
    """
    material = [int(policy.master_seed).to_bytes(8, "big")]
    if policy.scenario is Scenario.STOLEN_TOKEN:
        material.append(_STOLEN_LABEL)
    elif policy.scenario is Scenario.NORMAL:
        material.append(subject_id.encode("utf-8"))
    else:
        material.append(subject_id.encode("utf-8"))
        material.append(_ID_SEPARATOR)
        material.append(sample_id.encode("utf-8"))
    return SchemeKey(seed=_hash64(material), scheme_id=policy.scheme_id, params=policy.params)


def mated_pairs(ds: Dataset) -> list[tuple[Template, Template]]:
    """All unordered within-subject sample pairs, in dataset order."""
    by_subject: dict[str, list[Template]] = {}
    for t in ds.templates:
        by_subject.setdefault(t.subject_id, []).append(t)
    pairs: list[tuple[Template, Template]] = []
    for templates in by_subject.values():
        pairs.extend(itertools.combinations(templates, 2))
    return pairs


def nonmated_pairs(ds: Dataset) -> list[tuple[Template, Template]]:
    """All unordered subject pairs, first sample of each subject."""
    firsts: dict[str, Template] = {}
    for t in ds.templates:
        firsts.setdefault(t.subject_id, t)
    return list(itertools.combinations(firsts.values(), 2))


@dataclass
class ScoreSet:
    """Mated and non-mated similarity scores for one (scheme, scenario) run.

    Score arrays are stored sorted ascending so that any evaluation order
    (serial or parallel) produces a bit-identical value.
    """

    mated: np.ndarray
    nonmated: np.ndarray
    scheme_id: SchemeId | None
    scenario: Scenario | None

    def __post_init__(self) -> None:
        self.mated = np.sort(np.asarray(self.mated, dtype=np.float64))
        self.nonmated = np.sort(np.asarray(self.nonmated, dtype=np.float64))
        for name, arr in (("mated", self.mated), ("nonmated", self.nonmated)):
            if arr.ndim != 1:
                raise InvalidArgumentError(f"{name} scores must be 1-D")
            if arr.size and (not np.isfinite(arr).all() or arr.min() < 0 or arr.max() > 1):
                raise InvalidArgumentError(f"{name} scores must be finite and within [0, 1]")


def run_scenario(ds: Dataset, policy: KeyPolicy, workers: int = 1) -> ScoreSet:
    """Protect every template once under its scenario-derived key and score
    the mated and non-mated pair lists.

    Transform instances are cached per derived seed and protected templates
    per (subject, sample); with ``workers > 1`` comparisons run on a thread
    pool. Results are identical either way.
    """
    instances: dict[int, TransformInstance] = {}
    protected: dict[tuple[str, str], object] = {}

    for t in ds.templates:
        key = derive_key(policy, t.subject_id, t.sample_id)
        inst = instances.get(key.seed)
        if inst is None:
            inst = instantiate(key, ds.dimension)
            instances[key.seed] = inst
        protected[(t.subject_id, t.sample_id)] = protect(t, inst)

    def score(pair: tuple[Template, Template]) -> float:
        a, b = pair
        return compare(
            protected[(a.subject_id, a.sample_id)],
            protected[(b.subject_id, b.sample_id)],
        )

    m_pairs = mated_pairs(ds)
    nm_pairs = nonmated_pairs(ds)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            mated = list(pool.map(score, m_pairs, chunksize=64))
            nonmated = list(pool.map(score, nm_pairs, chunksize=64))
    else:
        mated = [score(p) for p in m_pairs]
        nonmated = [score(p) for p in nm_pairs]
    return ScoreSet(
        mated=np.array(mated), nonmated=np.array(nonmated),
        scheme_id=policy.scheme_id, scenario=policy.scenario,
    )
