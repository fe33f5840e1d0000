"""File formats: template CSVs, DET-point CSVs, benchmark configs and the
JSON benchmark report. All text files are UTF-8 with LF line endings; reals
are rendered with shortest-round-trip precision so every writer/reader pair
is lossless at the value level."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import Dataset, SchemeId, SchemeParams, Template, validate_dataset
from .errors import CbBenchError, InvalidArgumentError, ParseError
from .metrics import DetCurve
from .synthdata import STANDARD_CONFIG, SynthConfig

__all__ = [
    "read_templates",
    "write_templates",
    "write_det_points",
    "read_det_points",
    "write_report",
    "SchemeSpec",
    "BenchmarkConfig",
    "load_config",
    "standard_benchmark_config",
]


def _fmt(value: float) -> str:
    """Shortest decimal that round-trips to the same float."""
    return repr(float(value))


def _open_write(path: Path):
    try:
        return open(path, "w", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise CbBenchError(f"cannot write {path}: {exc}") from exc


def read_templates(path: str | Path) -> Dataset:
    """Read a template CSV (header ``subject_id,sample_id,f0,...``).

    Raises ParseError naming the offending line for malformed headers, rows
    of the wrong width, unparseable or non-finite values, and for datasets
    violating the core invariants (duplicate ids, subjects with one sample).
    """
    path = Path(path)
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise ParseError(f"cannot read templates from {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        if len(header) < 4 or header[0] != "subject_id" or header[1] != "sample_id":
            raise ParseError(f"{path}:1: expected header subject_id,sample_id,f0,...")
        d = len(header) - 2
        expected_features = [f"f{i}" for i in range(d)]
        if header[2:] != expected_features:
            raise ParseError(f"{path}:1: feature columns must be named f0..f{d - 1}")
        templates: list[Template] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != d + 2:
                raise ParseError(
                    f"{path}:{lineno}: expected {d + 2} fields, got {len(row)}"
                )
            try:
                features = np.array([float(v) for v in row[2:]], dtype=np.float64)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
            if not np.isfinite(features).all():
                raise ParseError(f"{path}:{lineno}: non-finite feature value")
            templates.append(Template(subject_id=row[0], sample_id=row[1], features=features))
    if not templates:
        raise ParseError(f"{path}: no template rows")
    ds = Dataset(templates=templates, dimension=d)
    issues = validate_dataset(ds)
    if issues:
        raise ParseError(f"{path}: invalid dataset: " + "; ".join(issues))
    return ds


def write_templates(ds: Dataset, path: str | Path) -> None:
    """Write a dataset as a template CSV readable by :func:`read_templates`."""
    path = Path(path)
    with _open_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["subject_id", "sample_id"] + [f"f{i}" for i in range(ds.dimension)])
        for t in ds.templates:
            writer.writerow([t.subject_id, t.sample_id] + [_fmt(v) for v in t.features])


def write_det_points(curve: DetCurve, path: str | Path) -> None:
    """Emit ``threshold,fmr,fnmr`` rows sorted by threshold ascending."""
    path = Path(path)
    order = np.argsort(curve.thresholds)
    with _open_write(path) as fh:
        fh.write("threshold,fmr,fnmr\n")
        for i in order:
            fh.write(f"{_fmt(curve.thresholds[i])},{_fmt(curve.fmr[i])},{_fmt(curve.fnmr[i])}\n")


def read_det_points(path: str | Path) -> DetCurve:
    """Read back a DET-point CSV written by :func:`write_det_points`."""
    path = Path(path)
    thresholds, fmr, fnmr = [], [], []
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise ParseError(f"cannot read DET points from {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["threshold", "fmr", "fnmr"]:
            raise ParseError(f"{path}:1: expected header threshold,fmr,fnmr")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            try:
                thresholds.append(float(row[0]))
                fmr.append(float(row[1]))
                fnmr.append(float(row[2]))
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
    return DetCurve(
        thresholds=np.array(thresholds), fmr=np.array(fmr), fnmr=np.array(fnmr)
    )


def write_report(report: dict, path: str | Path) -> None:
    """Serialize a benchmark report as pretty-printed JSON with sorted keys
    (deterministic apart from whatever timestamp the caller put in)."""
    path = Path(path)
    with _open_write(path) as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True)
class SchemeSpec:
    """One scheme to benchmark, with its own parameter set."""

    scheme_id: SchemeId
    params: SchemeParams = field(default_factory=SchemeParams)


@dataclass
class BenchmarkConfig:
    """Full benchmark description.

    ``scenarios`` selects the performance/irreversibility grid (normal and/or
    stolen); the sample-specific unlinkability pass always runs once per
    scheme. Input is either a synthetic config or a template CSV path.
    """

    schemes: list[SchemeSpec]
    scenarios: list[str]
    master_seed: int = 42
    unlinkability_bins: int = 100
    mi_components: int = 100
    synthetic: SynthConfig | None = None
    templates_path: str | None = None
    output_dir: str = "."

    def __post_init__(self) -> None:
        if not self.schemes:
            raise InvalidArgumentError("config needs at least one scheme")
        if not self.scenarios:
            raise InvalidArgumentError("config needs at least one scenario")
        for s in self.scenarios:
            if s not in ("normal", "stolen"):
                raise InvalidArgumentError(
                    f"unknown scenario {s!r} in config (use 'normal' and/or 'stolen'; "
                    "the sample-specific unlinkability pass always runs)"
                )
        if (self.synthetic is None) == (self.templates_path is None):
            raise InvalidArgumentError(
                "config needs exactly one input source: 'synthetic' or 'templates'"
            )
        if self.unlinkability_bins < 10:
            raise InvalidArgumentError("unlinkability_bins must be >= 10")
        if self.mi_components < 1:
            raise InvalidArgumentError("mi_components must be >= 1")


def standard_benchmark_config(output_dir: str = ".") -> BenchmarkConfig:
    """The reference desk-scale benchmark: all six schemes with default
    parameters on the standard synthetic dataset, normal and stolen scenarios.

    The estimator knobs are sized to the 300-sample dataset: 50 histogram
    bins keep ~15 mated scores per occupied bin, and 16 reduced features keep
    ~9 samples per joint Gaussian dimension. Larger values overfit at this
    scale (the sample canonical correlations saturate), drowning the
    normal-vs-stolen irreversibility ordering in estimation noise.
    """
    return BenchmarkConfig(
        schemes=[SchemeSpec(scheme) for scheme in SchemeId],
        scenarios=["normal", "stolen"],
        master_seed=42,
        unlinkability_bins=50,
        mi_components=16,
        synthetic=STANDARD_CONFIG,
        output_dir=output_dir,
    )


_PARAM_KEYS = {
    "output_length", "iom_k", "iom_p", "mlp_layers", "bloom_word_bits", "bloom_block_cols",
}


def _parse_params(data: dict, where: str) -> SchemeParams:
    unknown = set(data) - _PARAM_KEYS
    if unknown:
        raise ParseError(f"{where}: unknown parameter(s) {sorted(unknown)}")
    return SchemeParams(**data)


def load_config(path: str | Path) -> BenchmarkConfig:
    """Parse and validate a JSON benchmark config.

    Scheme entries are either a bare name ("biohash") or an object
    {"name": ..., "params": {...}}; a top-level "params" object supplies
    defaults for schemes without their own.
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ParseError(f"{path}: config must be a JSON object")

    known_keys = {
        "schemes", "scenarios", "params", "master_seed", "unlinkability_bins",
        "mi_components", "synthetic", "templates", "output_dir",
    }
    unknown = set(data) - known_keys
    if unknown:
        raise ParseError(f"{path}: unknown config key(s) {sorted(unknown)}")

    base_params = _parse_params(data.get("params", {}), f"{path}: params")

    schemes: list[SchemeSpec] = []
    for entry in data.get("schemes", []):
        if isinstance(entry, str):
            schemes.append(SchemeSpec(SchemeId.from_name(entry), base_params))
        elif isinstance(entry, dict) and "name" in entry:
            overrides = dict(entry.get("params", {}))
            merged = _parse_params(
                {**{k: getattr(base_params, k) for k in _PARAM_KEYS}, **overrides},
                f"{path}: scheme {entry['name']}",
            )
            schemes.append(SchemeSpec(SchemeId.from_name(entry["name"]), merged))
        else:
            raise ParseError(f"{path}: scheme entries must be names or objects with 'name'")

    synthetic = None
    if "synthetic" in data:
        syn = data["synthetic"]
        try:
            synthetic = SynthConfig(
                subjects=syn["subjects"],
                samples_per_subject=syn["samples_per_subject"],
                dimension=syn["dimension"],
                noise_sigma=syn["noise_sigma"],
                seed=syn.get("seed", data.get("master_seed", 42)),
            )
        except KeyError as exc:
            raise ParseError(f"{path}: synthetic config missing key {exc}") from None

    return BenchmarkConfig(
        schemes=schemes,
        scenarios=list(data.get("scenarios", [])),
        master_seed=int(data.get("master_seed", 42)),
        unlinkability_bins=int(data.get("unlinkability_bins", 100)),
        mi_components=int(data.get("mi_components", 100)),
        synthetic=synthetic,
        templates_path=data.get("templates"),
        output_dir=str(data.get("output_dir", ".")),
    )
