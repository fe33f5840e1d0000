"""The six keyed template-protection transforms and their comparators.

Every transform is a pure function of (key, input dimension, template):
``instantiate`` materializes all key-derived randomness up front, and the
per-scheme ``*_protect`` functions never draw randomness themselves. All six
constructions are sign/argmax based, so protecting c*x for any c > 0 yields
exactly the same protected template as protecting x.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    BitString,
    BloomSet,
    CodeVector,
    ProtectedTemplate,
    SchemeId,
    SchemeKey,
    Template,
    as_score,
)
from .errors import InvalidArgumentError
from .numerics import derive_stream, gaussian_matrix, gram_schmidt

__all__ = [
    "TransformInstance",
    "BioHashInstance",
    "MlpHashInstance",
    "BloomInstance",
    "IomGrpInstance",
    "IomUrpInstance",
    "RandHashInstance",
    "instantiate",
    "protect",
    "biohash_protect",
    "mlphash_protect",
    "bloom_protect",
    "iom_grp_protect",
    "iom_urp_protect",
    "randhash_protect",
    "compare",
    "chance_level",
]

# slope of the negative branch of the leaky ramp nonlinearity; positively
# homogeneous, so sign patterns are exactly invariant under positive scaling
_LEAKY_SLOPE = 0.01


@dataclass(frozen=True)
class TransformInstance:
    """Key-derived transform parameters for one scheme at one input dimension.

    Instances carry materialized arrays only; shapes define the output
    length, which keeps hand-built instances usable in tests.
    """

    scheme_id: SchemeId
    dim: int


@dataclass(frozen=True)
class BioHashInstance(TransformInstance):
    projection: np.ndarray  # (L, dim), rows orthonormal per block


@dataclass(frozen=True)
class MlpHashInstance(TransformInstance):
    layers: tuple[np.ndarray, ...]  # (L, dim) then (L, L) weight matrices


@dataclass(frozen=True)
class BloomInstance(TransformInstance):
    word_bits: int
    block_cols: int
    masks: np.ndarray  # (n_words,) int64, one XOR mask per column word

    @property
    def padded_bits(self) -> int:
        return self.masks.shape[0] * self.word_bits

    @property
    def n_blocks(self) -> int:
        return self.masks.shape[0] // self.block_cols


@dataclass(frozen=True)
class IomGrpInstance(TransformInstance):
    directions: np.ndarray  # (m, k, dim) Gaussian projection directions


@dataclass(frozen=True)
class IomUrpInstance(TransformInstance):
    perms: np.ndarray  # (m, p, dim) permutation index arrays
    k: int


@dataclass(frozen=True)
class RandHashInstance(TransformInstance):
    perm: np.ndarray  # (dim,) permutation indices
    scales: np.ndarray  # (dim,) positive scales
    signs: np.ndarray  # (dim,) entries in {-1, +1}
    pad_bits: np.ndarray  # (max(0, L - dim),) key-derived fixed bits
    output_length: int


def _block_orthonormal(stream, n_rows: int, dim: int) -> np.ndarray:
    """Stack of ``n_rows`` Gaussian rows, orthonormalized in blocks of
    min(n_rows, dim) rows each. When n_rows > dim, full dim x dim blocks are
    orthonormalized independently and the concatenation truncated."""
    if n_rows <= dim:
        return gram_schmidt(gaussian_matrix(stream, n_rows, dim))
    n_blocks = -(-n_rows // dim)  # ceil
    blocks = [gram_schmidt(gaussian_matrix(stream, dim, dim)) for _ in range(n_blocks)]
    return np.vstack(blocks)[:n_rows]


def instantiate(key: SchemeKey, d: int) -> TransformInstance:
    """Materialize all key-derived parameters of a transform for dimension d.

    Every random quantity comes from streams labelled by scheme and role, so
    equal keys reproduce identical parameters and different components of one
    scheme never share randomness.
    """
    if d < 2:
        raise InvalidArgumentError(f"input dimension must be >= 2, got {d}")
    params = key.params
    length = params.output_length
    scheme = key.scheme_id

    if scheme is SchemeId.BIOHASH:
        stream = derive_stream(key.seed, b"biohash.projection")
        return BioHashInstance(scheme, d, projection=_block_orthonormal(stream, length, d))

    if scheme is SchemeId.MLP_HASH:
        layers = []
        in_dim = d
        for i in range(params.mlp_layers):
            stream = derive_stream(key.seed, b"mlphash.layer%d" % i)
            layers.append(_block_orthonormal(stream, length, in_dim))
            in_dim = length
        return MlpHashInstance(scheme, d, layers=tuple(layers))

    if scheme is SchemeId.BLOOM_FILTER:
        w = params.bloom_word_bits
        cols = params.bloom_block_cols
        block_bits = w * cols
        n_blocks = -(-d // block_bits)
        n_words = n_blocks * cols
        stream = derive_stream(key.seed, b"bloom.masks")
        masks = stream.integers(n_words, 2**w)
        return BloomInstance(scheme, d, word_bits=w, block_cols=cols, masks=masks)

    if scheme is SchemeId.IOM_GRP:
        stream = derive_stream(key.seed, b"iom-grp.directions")
        directions = stream.normals(length * params.iom_k * d).reshape(length, params.iom_k, d)
        return IomGrpInstance(scheme, d, directions=directions)

    if scheme is SchemeId.IOM_URP:
        if params.iom_k > d:
            raise InvalidArgumentError(
                f"iom_k={params.iom_k} exceeds the input dimension {d}"
            )
        stream = derive_stream(key.seed, b"iom-urp.perms")
        perms = np.empty((length, params.iom_p, d), dtype=np.int64)
        for m in range(length):
            for p in range(params.iom_p):
                perms[m, p] = stream.permutation(d)
        return IomUrpInstance(scheme, d, perms=perms, k=params.iom_k)

    if scheme is SchemeId.RAND_HASH:
        perm = derive_stream(key.seed, b"randhash.perm").permutation(d)
        # log-uniform on [0.5, 2]: positive, centered on 1 in log space
        u = derive_stream(key.seed, b"randhash.scale").uniforms(d)
        scales = np.exp(np.log(0.5) + u * (np.log(2.0) - np.log(0.5)))
        signs = np.where(derive_stream(key.seed, b"randhash.sign").uniforms(d) < 0.5, -1.0, 1.0)
        n_pad = max(0, length - d)
        pad_bits = (
            (derive_stream(key.seed, b"randhash.pad").uniforms(n_pad) < 0.5).astype(np.uint8)
            if n_pad
            else np.zeros(0, dtype=np.uint8)
        )
        return RandHashInstance(
            scheme, d, perm=perm, scales=scales, signs=signs,
            pad_bits=pad_bits, output_length=length,
        )

    raise InvalidArgumentError(f"unsupported scheme {scheme!r}")


def _check_input(t: Template, inst: TransformInstance, expected: type) -> np.ndarray:
    if not isinstance(inst, expected):
        raise InvalidArgumentError(
            f"instance is {type(inst).__name__}, expected {expected.__name__}"
        )
    if t.dimension != inst.dim:
        raise InvalidArgumentError(
            f"template dimension {t.dimension} != instance dimension {inst.dim}"
        )
    return t.features


def biohash_protect(t: Template, inst: TransformInstance) -> ProtectedTemplate:
    """Project onto the orthonormalized random rows and threshold at zero."""
    x = _check_input(t, inst, BioHashInstance)
    bits = (inst.projection @ x > 0).astype(np.uint8)
    return ProtectedTemplate(SchemeId.BIOHASH, BitString(bits))


def mlphash_protect(t: Template, inst: TransformInstance) -> ProtectedTemplate:
    """Pass through the random orthonormal layers with a leaky ramp between
    them, then threshold the final activations at zero."""
    x = _check_input(t, inst, MlpHashInstance)
    h = x
    for w in inst.layers:
        z = w @ h
        h = np.where(z > 0, z, _LEAKY_SLOPE * z)
    bits = (h > 0).astype(np.uint8)
    return ProtectedTemplate(SchemeId.MLP_HASH, BitString(bits))


def bloom_protect(t: Template, inst: TransformInstance) -> ProtectedTemplate:
    """Sign-binarize, split into key-masked column words and populate one
    filter block per group of columns."""
    x = _check_input(t, inst, BloomInstance)
    bits = (x > 0).astype(np.uint8)
    padded = np.zeros(inst.padded_bits, dtype=np.uint8)
    padded[: bits.shape[0]] = bits
    # consecutive w-bit runs form column words, most significant bit first
    weights = 1 << np.arange(inst.word_bits - 1, -1, -1, dtype=np.int64)
    words = padded.reshape(-1, inst.word_bits) @ weights
    masked = words ^ inst.masks
    blocks = np.zeros((inst.n_blocks, 2**inst.word_bits), dtype=np.uint8)
    per_block = masked.reshape(inst.n_blocks, inst.block_cols)
    for b in range(inst.n_blocks):
        blocks[b, per_block[b]] = 1
    return ProtectedTemplate(SchemeId.BLOOM_FILTER, BloomSet(blocks))


def iom_grp_protect(t: Template, inst: TransformInstance) -> ProtectedTemplate:
    """For each hash, record which of its k Gaussian projections is largest."""
    x = _check_input(t, inst, IomGrpInstance)
    projections = inst.directions @ x  # (m, k)
    codes = np.argmax(projections, axis=1)  # ties resolve to the lowest index
    return ProtectedTemplate(SchemeId.IOM_GRP, CodeVector(codes, k=inst.directions.shape[1]))


def iom_urp_protect(t: Template, inst: TransformInstance) -> ProtectedTemplate:
    """For each hash, multiply p independently permuted copies of the input
    elementwise and record the argmax among the first k entries."""
    x = _check_input(t, inst, IomUrpInstance)
    products = np.prod(x[inst.perms], axis=1)  # (m, dim)
    codes = np.argmax(products[:, : inst.k], axis=1)
    return ProtectedTemplate(SchemeId.IOM_URP, CodeVector(codes, k=inst.k))


def randhash_protect(t: Template, inst: TransformInstance) -> ProtectedTemplate:
    """Scale, sign-flip and permute, then binarize at zero. Output is
    truncated to the requested length, or padded with key-derived fixed bits
    when the length exceeds the input dimension."""
    x = _check_input(t, inst, RandHashInstance)
    y = (x * inst.signs * inst.scales)[inst.perm]
    data_bits = (y > 0).astype(np.uint8)
    if inst.output_length <= inst.dim:
        bits = data_bits[: inst.output_length]
    else:
        bits = np.concatenate([data_bits, inst.pad_bits])
    return ProtectedTemplate(SchemeId.RAND_HASH, BitString(bits))


_PROTECT_FOR_SCHEME = {
    SchemeId.BIOHASH: biohash_protect,
    SchemeId.MLP_HASH: mlphash_protect,
    SchemeId.BLOOM_FILTER: bloom_protect,
    SchemeId.IOM_GRP: iom_grp_protect,
    SchemeId.IOM_URP: iom_urp_protect,
    SchemeId.RAND_HASH: randhash_protect,
}


def protect(t: Template, inst: TransformInstance) -> ProtectedTemplate:
    """Apply the transform the instance was built for."""
    return _PROTECT_FOR_SCHEME[inst.scheme_id](t, inst)


def compare(a: ProtectedTemplate, b: ProtectedTemplate) -> float:
    """Similarity in [0, 1] between two protected templates of one scheme.

    BitString: 1 - Hamming distance / length. CodeVector: fraction of equal
    codes. BloomSet: 1 - mean over blocks of |A xor B| / (|A| + |B|) with
    popcounts; an empty block pair contributes dissimilarity 0.
    """
    if a.scheme_id is not b.scheme_id:
        raise InvalidArgumentError(
            f"cannot compare {a.scheme_id.value} against {b.scheme_id.value}"
        )
    pa, pb = a.payload, b.payload
    if isinstance(pa, BitString) and isinstance(pb, BitString):
        if len(pa) != len(pb):
            raise InvalidArgumentError(f"bit lengths differ: {len(pa)} vs {len(pb)}")
        hamming = int(np.count_nonzero(pa.bits != pb.bits))
        return as_score(1.0 - hamming / len(pa))
    if isinstance(pa, CodeVector) and isinstance(pb, CodeVector):
        if len(pa) != len(pb) or pa.k != pb.k:
            raise InvalidArgumentError("code vectors have mismatched shape or alphabet")
        return as_score(int(np.count_nonzero(pa.codes == pb.codes)) / len(pa))
    if isinstance(pa, BloomSet) and isinstance(pb, BloomSet):
        if pa.blocks.shape != pb.blocks.shape:
            raise InvalidArgumentError("bloom block shapes differ")
        sym_diff = np.count_nonzero(pa.blocks != pb.blocks, axis=1).astype(np.float64)
        total = (pa.blocks.sum(axis=1) + pb.blocks.sum(axis=1)).astype(np.float64)
        dissim = np.divide(sym_diff, total, out=np.zeros_like(sym_diff), where=total > 0)
        return as_score(1.0 - float(dissim.mean()))
    raise InvalidArgumentError("payload variants differ")


def chance_level(scheme_id: SchemeId, params) -> float | None:
    """Expected cross-key similarity: 0.5 for bit schemes, 1/k for
    index-of-max schemes; None for Bloom, whose level depends on fill rate."""
    if scheme_id in (SchemeId.BIOHASH, SchemeId.MLP_HASH, SchemeId.RAND_HASH):
        return 0.5
    if scheme_id in (SchemeId.IOM_GRP, SchemeId.IOM_URP):
        return 1.0 / params.iom_k
    return None
