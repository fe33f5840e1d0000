"""Domain types shared by every module: templates, keys, protected payloads,
scores and scenario tags."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "SchemeId",
    "Scenario",
    "SchemeParams",
    "SchemeKey",
    "Template",
    "Dataset",
    "BitString",
    "CodeVector",
    "BloomSet",
    "ProtectedTemplate",
    "validate_dataset",
    "as_score",
]


class SchemeId(enum.Enum):
    """The six keyed template-protection transforms."""

    BIOHASH = "biohash"
    MLP_HASH = "mlp-hash"
    BLOOM_FILTER = "bloom"
    IOM_GRP = "iom-grp"
    IOM_URP = "iom-urp"
    RAND_HASH = "rand-hash"

    @classmethod
    def from_name(cls, name: str) -> "SchemeId":
        for member in cls:
            if member.value == name:
                return member
        known = ", ".join(m.value for m in cls)
        raise InvalidArgumentError(f"unknown scheme name {name!r} (known: {known})")


class Scenario(enum.Enum):
    """Key-management scenario under which templates are protected."""

    NORMAL = "normal"  # one secret key per subject
    STOLEN_TOKEN = "stolen"  # a single disclosed key for everyone
    SAMPLE_SPECIFIC = "sample-specific"  # a fresh key per sample (unlinkability runs)

    @classmethod
    def from_name(cls, name: str) -> "Scenario":
        for member in cls:
            if member.value == name:
                return member
        known = ", ".join(m.value for m in cls)
        raise InvalidArgumentError(f"unknown scenario name {name!r} (known: {known})")


@dataclass(frozen=True)
class SchemeParams:
    """Transform hyperparameters. ``output_length`` is the common protected
    length: binary schemes emit that many bits, the index-of-max schemes that
    many codes; the Bloom scheme's storage length follows from its block
    structure instead."""

    output_length: int = 256
    iom_k: int = 16
    iom_p: int = 2
    mlp_layers: int = 2
    bloom_word_bits: int = 4
    bloom_block_cols: int = 16

    def __post_init__(self) -> None:
        if self.output_length < 8:
            raise InvalidArgumentError(f"output_length must be >= 8, got {self.output_length}")
        if self.iom_k < 2:
            raise InvalidArgumentError(f"iom_k must be >= 2, got {self.iom_k}")
        if self.iom_p < 1:
            raise InvalidArgumentError(f"iom_p must be >= 1, got {self.iom_p}")
        if self.mlp_layers < 1:
            raise InvalidArgumentError(f"mlp_layers must be >= 1, got {self.mlp_layers}")
        if not 2 <= self.bloom_word_bits <= 16:
            raise InvalidArgumentError(
                f"bloom_word_bits must be in [2, 16], got {self.bloom_word_bits}"
            )
        if self.bloom_block_cols < 1:
            raise InvalidArgumentError(
                f"bloom_block_cols must be >= 1, got {self.bloom_block_cols}"
            )


@dataclass(frozen=True)
class SchemeKey:
    """Seed plus parameters; equal keys induce identical transforms."""

    seed: int
    scheme_id: SchemeId
    params: SchemeParams = field(default_factory=SchemeParams)

    def __post_init__(self) -> None:
        if not 0 <= self.seed < 2**64:
            raise InvalidArgumentError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass
class Template:
    """An unprotected real-valued feature vector with subject/sample identity."""

    subject_id: str
    sample_id: str
    features: np.ndarray

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 1:
            raise InvalidArgumentError("features must be a 1-D vector")

    @property
    def dimension(self) -> int:
        return self.features.shape[0]


@dataclass
class Dataset:
    """Ordered collection of templates of one common dimension."""

    templates: list[Template]
    dimension: int

    @classmethod
    def from_templates(cls, templates: list[Template]) -> "Dataset":
        if not templates:
            raise InvalidArgumentError("dataset needs at least one template")
        return cls(templates=list(templates), dimension=templates[0].dimension)

    def __len__(self) -> int:
        return len(self.templates)

    def subjects(self) -> list[str]:
        """Distinct subject ids in first-appearance order."""
        seen: dict[str, None] = {}
        for t in self.templates:
            seen.setdefault(t.subject_id, None)
        return list(seen)

    def feature_matrix(self) -> np.ndarray:
        """Stack all feature vectors into a (samples x dimension) matrix."""
        return np.vstack([t.features for t in self.templates])


def validate_dataset(ds: Dataset) -> list[str]:
    """Collect every invariant violation; an empty list means the dataset is valid.

    Checks: at least 2 feature dimensions, a single consistent dimension,
    finite values (named per subject/sample/index), unique (subject, sample)
    pairs, and at least two samples per subject (needed for mated pairs).
    """
    issues: list[str] = []
    if ds.dimension < 2:
        issues.append(f"dimension must be >= 2, got {ds.dimension}")
    seen: set[tuple[str, str]] = set()
    per_subject: dict[str, int] = {}
    for t in ds.templates:
        ident = (t.subject_id, t.sample_id)
        if ident in seen:
            issues.append(f"duplicate (subject, sample) pair {ident}")
        seen.add(ident)
        per_subject[t.subject_id] = per_subject.get(t.subject_id, 0) + 1
        if t.dimension != ds.dimension:
            issues.append(
                f"subject {t.subject_id} sample {t.sample_id}: dimension "
                f"{t.dimension} != dataset dimension {ds.dimension}"
            )
        bad = np.flatnonzero(~np.isfinite(t.features))
        for idx in bad:
            issues.append(
                f"subject {t.subject_id} sample {t.sample_id}: non-finite feature "
                f"at index {int(idx)}"
            )
    for subject, count in per_subject.items():
        if count < 2:
            issues.append(f"subject {subject} has only {count} sample(s); need >= 2")
    return issues


def as_score(value: float) -> float:
    """Validate a similarity score. Out-of-range values are an error, never a
    clamp: a score outside [0, 1] means a comparator is broken."""
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise InvalidArgumentError(f"score {value!r} outside [0, 1]")
    return value


@dataclass(frozen=True)
class BitString:
    """Binary protected payload (entries 0/1, length = output_length)."""

    bits: np.ndarray

    def __post_init__(self) -> None:
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.ndim != 1:
            raise InvalidArgumentError("bits must be a 1-D array")
        if bits.size and bits.max() > 1:
            raise InvalidArgumentError("bits must be 0/1")
        object.__setattr__(self, "bits", bits)

    def __len__(self) -> int:
        return self.bits.shape[0]


@dataclass(frozen=True)
class CodeVector:
    """Index-of-max protected payload: integer codes, each in [0, k)."""

    codes: np.ndarray
    k: int

    def __post_init__(self) -> None:
        codes = np.asarray(self.codes, dtype=np.int64)
        if codes.ndim != 1:
            raise InvalidArgumentError("codes must be a 1-D array")
        if self.k < 2:
            raise InvalidArgumentError(f"k must be >= 2, got {self.k}")
        if codes.size and (codes.min() < 0 or codes.max() >= self.k):
            raise InvalidArgumentError(f"codes must lie in [0, {self.k})")
        object.__setattr__(self, "codes", codes)

    def __len__(self) -> int:
        return self.codes.shape[0]


@dataclass(frozen=True)
class BloomSet:
    """Bloom protected payload: B filter blocks of 2**word_bits bits each,
    stored as a (B, 2**word_bits) 0/1 array."""

    blocks: np.ndarray

    def __post_init__(self) -> None:
        blocks = np.asarray(self.blocks, dtype=np.uint8)
        if blocks.ndim != 2:
            raise InvalidArgumentError("blocks must be a 2-D array")
        if blocks.size and blocks.max() > 1:
            raise InvalidArgumentError("block entries must be 0/1")
        object.__setattr__(self, "blocks", blocks)

    @property
    def n_blocks(self) -> int:
        return self.blocks.shape[0]

    @property
    def filter_bits(self) -> int:
        return self.blocks.shape[1]


_PAYLOAD_FOR_SCHEME = {
    SchemeId.BIOHASH: BitString,
    SchemeId.MLP_HASH: BitString,
    SchemeId.RAND_HASH: BitString,
    SchemeId.IOM_GRP: CodeVector,
    SchemeId.IOM_URP: CodeVector,
    SchemeId.BLOOM_FILTER: BloomSet,
}


@dataclass(frozen=True)
class ProtectedTemplate:
    """Scheme output. The payload variant must match the scheme: binary
    schemes carry a BitString, index-of-max schemes a CodeVector and the
    Bloom scheme a BloomSet."""

    scheme_id: SchemeId
    payload: BitString | CodeVector | BloomSet

    def __post_init__(self) -> None:
        expected = _PAYLOAD_FOR_SCHEME[self.scheme_id]
        if not isinstance(self.payload, expected):
            raise InvalidArgumentError(
                f"scheme {self.scheme_id.value} requires a {expected.__name__} payload, "
                f"got {type(self.payload).__name__}"
            )

    def to_real_vector(self) -> np.ndarray:
        """Flatten the payload to a real vector (bits and codes as floats,
        Bloom blocks concatenated)."""
        if isinstance(self.payload, BitString):
            return self.payload.bits.astype(np.float64)
        if isinstance(self.payload, CodeVector):
            return self.payload.codes.astype(np.float64)
        return self.payload.blocks.astype(np.float64).ravel()
