"""Command-line driver: dataset synthesis, single-metric evaluations and the
full benchmark battery.

Exit codes: 0 on success, 2 for usage errors, 1 for runtime failures (the
diagnostic names the failing cell and cause; partially written outputs are
removed)."""

from __future__ import annotations

import argparse
import csv
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .core import Dataset, Scenario, SchemeId, SchemeParams
from .errors import CbBenchError
from .io import (
    BenchmarkConfig,
    _open_write,
    load_config,
    read_templates,
    write_det_points,
    write_report,
    write_templates,
)
from .metrics import (
    compute_det,
    eer,
    fnmr_at_fmr,
    mutual_information,
    protected_matrix,
    unlinkability,
)
from .protocol import KeyPolicy, run_scenario
from .synthdata import SynthConfig, generate, unprotected_scores

__all__ = ["main", "run_benchmark"]


def _param_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("scheme parameters")
    group.add_argument("--length", type=int, default=256, help="protected output length")
    group.add_argument("--iom-k", type=int, default=16, help="index-of-max alphabet size")
    group.add_argument("--iom-p", type=int, default=2, help="permutation factors (iom-urp)")
    group.add_argument("--mlp-layers", type=int, default=2, help="mlp-hash layer count")
    group.add_argument("--bloom-word-bits", type=int, default=4, help="bits per bloom column")
    group.add_argument("--bloom-block-cols", type=int, default=16, help="columns per bloom block")


def _params_from_args(args: argparse.Namespace) -> SchemeParams:
    return SchemeParams(
        output_length=args.length,
        iom_k=args.iom_k,
        iom_p=args.iom_p,
        mlp_layers=args.mlp_layers,
        bloom_word_bits=args.bloom_word_bits,
        bloom_block_cols=args.bloom_block_cols,
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cbbench",
        description="Benchmark keyed biometric template protection schemes.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic template CSV")
    p.add_argument("--subjects", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)

    p = sub.add_parser("protect", help="protect a template CSV under one scheme/scenario")
    p.add_argument("--templates", required=True)
    p.add_argument("--scheme", required=True)
    p.add_argument("--scenario", default="normal", choices=[s.value for s in Scenario])
    p.add_argument("--master-seed", type=int, default=42)
    p.add_argument("--out", required=True)
    _param_flags(p)

    p = sub.add_parser("eval-perf", help="EER / FNMR@FMR / DET for one scheme and scenario")
    p.add_argument("--templates", required=True)
    p.add_argument("--scheme", required=True)
    p.add_argument("--scenario", default="normal", choices=["normal", "stolen"])
    p.add_argument("--master-seed", type=int, default=42)
    p.add_argument("--out-dir", default=".")
    _param_flags(p)

    p = sub.add_parser("eval-unlink", help="unlinkability for one scheme (sample-specific keys)")
    p.add_argument("--templates", required=True)
    p.add_argument("--scheme", required=True)
    p.add_argument("--scenario", default="sample-specific",
                   choices=[s.value for s in Scenario])
    p.add_argument("--master-seed", type=int, default=42)
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--out-dir", default=".")
    _param_flags(p)

    p = sub.add_parser("eval-irrev", help="mutual information for one scheme and scenario")
    p.add_argument("--templates", required=True)
    p.add_argument("--scheme", required=True)
    p.add_argument("--scenario", default="normal", choices=["normal", "stolen"])
    p.add_argument("--master-seed", type=int, default=42)
    p.add_argument("--r", type=int, default=100, help="reduced feature count for both sets")
    p.add_argument("--out-dir", default=".")
    _param_flags(p)

    p = sub.add_parser("bench", help="run the full benchmark described by a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=None, help="override the config output_dir")
    p.add_argument("--seed", type=int, default=None, help="override the config master_seed")

    return parser


def _load_dataset(config: BenchmarkConfig) -> Dataset:
    if config.synthetic is not None:
        return generate(config.synthetic)
    return read_templates(config.templates_path)


def _perf_block(scores) -> dict:
    curve = compute_det(scores)
    return {
        "curve": curve,
        "eer": eer(curve),
        "fnmr_at_fmr_1pct": fnmr_at_fmr(curve, 0.01),
        "fnmr_at_fmr_0p1pct": fnmr_at_fmr(curve, 0.001),
    }


_LENGTH_UNIT = {
    SchemeId.BIOHASH: "bits",
    SchemeId.MLP_HASH: "bits",
    SchemeId.RAND_HASH: "bits",
    SchemeId.IOM_GRP: "codes",
    SchemeId.IOM_URP: "codes",
    SchemeId.BLOOM_FILTER: "bits",
}


def _config_echo(config: BenchmarkConfig) -> dict:
    echo: dict = {
        "schemes": [
            {"name": spec.scheme_id.value, "params": vars(spec.params)}
            for spec in config.schemes
        ],
        "scenarios": list(config.scenarios),
        "master_seed": config.master_seed,
        "unlinkability_bins": config.unlinkability_bins,
        "mi_components": config.mi_components,
        "output_dir": config.output_dir,
    }
    if config.synthetic is not None:
        echo["synthetic"] = vars(config.synthetic)
    else:
        echo["templates"] = config.templates_path
    return echo


def run_benchmark(config: BenchmarkConfig, out_dir: str | Path) -> tuple[dict, list[Path]]:
    """Run every benchmark cell and return (report dict, written DET paths).

    Per scheme: DET/EER/FNMR and mutual information for each configured
    scenario (normal/stolen), plus one sample-specific unlinkability pass.
    On failure, files written so far are removed and the raised error names
    the failing cell.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        return _run_benchmark_cells(config, out_dir, written), written
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise


def _run_benchmark_cells(
    config: BenchmarkConfig, out_dir: Path, written: list[Path]
) -> dict:
    ds = _load_dataset(config)
    x = ds.feature_matrix()

    baseline = _perf_block(unprotected_scores(ds))
    cells = []
    unlink_rows = []

    for spec in config.schemes:
        scheme = spec.scheme_id
        for scenario_name in config.scenarios:
            scenario = Scenario.from_name(scenario_name)
            try:
                policy = KeyPolicy(config.master_seed, scenario, scheme, spec.params)
                scores = run_scenario(ds, policy)
                perf = _perf_block(scores)
                y = protected_matrix(ds, policy)
                irrev = mutual_information(x, y, config.mi_components)
                det_path = out_dir / f"det_{scheme.value}_{scenario.value}.csv"
                write_det_points(perf["curve"], det_path)
                written.append(det_path)
            except Exception as exc:
                raise CbBenchError(
                    f"cell (scheme={scheme.value}, scenario={scenario.value}): "
                    f"{type(exc).__module__}.{type(exc).__name__}: {exc}"
                ) from exc
            cell = {
                "scheme": scheme.value,
                "scenario": scenario.value,
                "eer": perf["eer"],
                "fnmr_at_fmr_1pct": perf["fnmr_at_fmr_1pct"],
                "fnmr_at_fmr_0p1pct": perf["fnmr_at_fmr_0p1pct"],
                "mi": irrev.mi,
                "h_x": irrev.h_x,
                "h_y": irrev.h_y,
                "h_joint": irrev.h_joint,
                "r_used": irrev.r_used,
                "near_deterministic": irrev.near_deterministic,
                "realized_length": int(y.shape[1]),
                "length_unit": _LENGTH_UNIT[scheme],
                "det_csv": det_path.name,
            }
            if scheme is SchemeId.RAND_HASH:
                # entropy-bearing bits cap at the input dimension
                cell["effective_entropy_length"] = min(ds.dimension, spec.params.output_length)
            cells.append(cell)

        try:
            policy = KeyPolicy(
                config.master_seed, Scenario.SAMPLE_SPECIFIC, scheme, spec.params
            )
            scores = run_scenario(ds, policy)
            ul = unlinkability(scores, config.unlinkability_bins)
        except Exception as exc:
            raise CbBenchError(
                f"cell (scheme={scheme.value}, scenario=sample-specific): "
                f"{type(exc).__module__}.{type(exc).__name__}: {exc}"
            ) from exc
        unlink_rows.append(
            {
                "scheme": scheme.value,
                "d_sys": ul.d_sys,
                "bins": ul.bin_count,
                "degenerate_range": ul.degenerate_range,
            }
        )

    cells.sort(key=lambda c: (c["scheme"], c["scenario"]))
    unlink_rows.sort(key=lambda u: u["scheme"])
    return {
        "toolkit_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config": _config_echo(config),
        "dataset": {
            "subjects": len(ds.subjects()),
            "templates": len(ds),
            "dimension": ds.dimension,
            "source": "synthetic" if config.synthetic is not None else config.templates_path,
        },
        "unprotected_baseline": {
            "eer": baseline["eer"],
            "fnmr_at_fmr_1pct": baseline["fnmr_at_fmr_1pct"],
            "fnmr_at_fmr_0p1pct": baseline["fnmr_at_fmr_0p1pct"],
        },
        "cells": cells,
        "unlinkability": unlink_rows,
    }


def _cmd_synth(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    try:
        cfg = SynthConfig(
            subjects=args.subjects,
            samples_per_subject=args.samples,
            dimension=args.dim,
            noise_sigma=args.sigma,
            seed=args.seed,
        )
    except CbBenchError as exc:
        parser.error(str(exc))
    ds = generate(cfg)
    write_templates(ds, args.out)
    print(
        f"wrote {args.out}: {cfg.subjects} subjects x {cfg.samples_per_subject} samples, "
        f"dimension {cfg.dimension}"
    )
    return 0


def _cmd_protect(args: argparse.Namespace) -> int:
    ds = read_templates(args.templates)
    policy = KeyPolicy(
        args.master_seed,
        Scenario.from_name(args.scenario),
        SchemeId.from_name(args.scheme),
        _params_from_args(args),
    )
    y = protected_matrix(ds, policy)
    with _open_write(Path(args.out)) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["subject_id", "sample_id"] + [f"p{i}" for i in range(y.shape[1])])
        for t, row in zip(ds.templates, y):
            writer.writerow([t.subject_id, t.sample_id] + [repr(float(v)) for v in row])
    print(f"wrote {args.out}: {y.shape[0]} protected templates of length {y.shape[1]}")
    return 0


def _cmd_eval_perf(args: argparse.Namespace) -> int:
    ds = read_templates(args.templates)
    policy = KeyPolicy(
        args.master_seed,
        Scenario.from_name(args.scenario),
        SchemeId.from_name(args.scheme),
        _params_from_args(args),
    )
    perf = _perf_block(run_scenario(ds, policy))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    det_path = out_dir / f"det_{args.scheme}_{args.scenario}.csv"
    write_det_points(perf["curve"], det_path)
    print(f"EER {perf['eer']:.4f}")
    print(f"FNMR@FMR=1% {perf['fnmr_at_fmr_1pct']:.4f}")
    print(f"FNMR@FMR=0.1% {perf['fnmr_at_fmr_0p1pct']:.4f}")
    print(f"DET points written to {det_path}")
    return 0


def _cmd_eval_unlink(args: argparse.Namespace) -> int:
    scenario = Scenario.from_name(args.scenario)
    if scenario is not Scenario.SAMPLE_SPECIFIC:
        print(
            f"error: unlinkability requires the sample-specific scenario, got {args.scenario!r}",
            file=sys.stderr,
        )
        return 1
    ds = read_templates(args.templates)
    policy = KeyPolicy(
        args.master_seed, scenario, SchemeId.from_name(args.scheme), _params_from_args(args)
    )
    report = unlinkability(run_scenario(ds, policy), args.bins)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    curve_path = out_dir / f"unlink_{args.scheme}.csv"
    with _open_write(curve_path) as fh:
        fh.write("bin_center,local_d\n")
        for c, d in zip(report.bin_centers, report.local_d):
            fh.write(f"{repr(float(c))},{repr(float(d))}\n")
    print(f"D_sys {report.d_sys:.4f}")
    if report.degenerate_range:
        print("warning: degenerate score range (all scores identical)", file=sys.stderr)
    print(f"local curve written to {curve_path}")
    return 0


def _cmd_eval_irrev(args: argparse.Namespace) -> int:
    ds = read_templates(args.templates)
    policy = KeyPolicy(
        args.master_seed,
        Scenario.from_name(args.scenario),
        SchemeId.from_name(args.scheme),
        _params_from_args(args),
    )
    x = ds.feature_matrix()
    y = protected_matrix(ds, policy)
    report = mutual_information(x, y, args.r)
    if report.r_used < args.r:
        print(
            f"warning: r reduced from {args.r} to {report.r_used} "
            f"(limited by samples/features)",
            file=sys.stderr,
        )
    print(f"MI {report.mi:.4f}")
    print(f"H(X) {report.h_x:.4f}  H(Y) {report.h_y:.4f}  H(X,Y) {report.h_joint:.4f}")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    artifact = out_dir / f"irrev_{args.scheme}_{args.scenario}.json"
    write_report(
        {
            "scheme": args.scheme,
            "scenario": args.scenario,
            "mi": report.mi,
            "h_x": report.h_x,
            "h_y": report.h_y,
            "h_joint": report.h_joint,
            "r_used": report.r_used,
            "near_deterministic": report.near_deterministic,
        },
        artifact,
    )
    print(f"report written to {artifact}")
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config.master_seed = args.seed
    out_dir = Path(args.out_dir if args.out_dir is not None else config.output_dir)
    written: list[Path] = []
    try:
        report, written = run_benchmark(config, out_dir)
        report_path = out_dir / "report.json"
        write_report(report, report_path)
        written.append(report_path)
    except CbBenchError as exc:
        for path in written:
            path.unlink(missing_ok=True)
        print(f"error: bench: {exc}", file=sys.stderr)
        return 1
    for cell in report["cells"]:
        print(
            f"{cell['scheme']:12s} {cell['scenario']:8s} eer={cell['eer']:.4f} "
            f"mi={cell['mi']:.2f}"
        )
    for row in report["unlinkability"]:
        print(f"{row['scheme']:12s} sample-specific d_sys={row['d_sys']:.4f}")
    print(f"report written to {report_path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "synth":
            return _cmd_synth(args, parser)
        if args.command == "protect":
            return _cmd_protect(args)
        if args.command == "eval-perf":
            return _cmd_eval_perf(args)
        if args.command == "eval-unlink":
            return _cmd_eval_unlink(args)
        if args.command == "eval-irrev":
            return _cmd_eval_irrev(args)
        if args.command == "bench":
            return _cmd_bench(args)
    except (CbBenchError, OSError) as exc:
        print(f"error: {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
