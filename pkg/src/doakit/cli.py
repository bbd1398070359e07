"""Command-line front end.

Subcommands: simulate, estimate, dataset export, osap combine-refine,
bench rmse, bench flops.  Every command emits CSV by default or JSON with
--json, to stdout or to --out.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .arrays import (
    ArrayConfig,
    SourceScene,
    plan_subarrays,
    sample_covariance,
    synthesize,
)
from .dataset import export_dataset, load_dataset_dir
from .estimators import ApSettings, GridSpec, ap_refine, ml_grid_search, root_music
from .exceptions import DoakitError, ValidationError
from .metrics import rmse
from .opsc import opsc_estimate
from .osap import blocks_for_dataset, combine_and_refine, combine_predictions
from .sweeps import (
    SweepConfig,
    format_rows_csv,
    run_complexity_sweep,
    run_rmse_sweep,
)

SNR_HELP = ("SNR in dB under the unit-power-per-source convention "
            "(noise power = Q / 10^(SNR/10)); 'inf' disables noise")


def _angles_arg(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad angle list: {text!r}")


def _floats_arg(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list: {text!r}")


def _ints_arg(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list: {text!r}")


def _snr_arg(text: str) -> float:
    if text.lower() in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad SNR: {text!r}")


def _emit(rows: list[dict], args) -> None:
    if args.json:
        text = json.dumps(rows, indent=2) + "\n"
    else:
        text = format_rows_csv(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--json", action="store_true",
                        help="emit JSON instead of CSV")
    parser.add_argument("--out", help="write output to this path")


def _cmd_simulate(args) -> None:
    config = ArrayConfig(args.n, args.spacing)
    scene = SourceScene(angles_deg=args.angles, snr_db=args.snr,
                        n_snapshots=args.snaps, seed=args.seed,
                        source_model=args.model)
    block = synthesize(config, scene)
    cov = sample_covariance(block)
    rows = [{"row": i, "col": j,
             "re": float(cov.entries[i, j].real),
             "im": float(cov.entries[i, j].imag)}
            for i in range(cov.n_elements) for j in range(cov.n_elements)]
    _emit(rows, args)


def _cmd_estimate(args) -> None:
    config = ArrayConfig(args.n, args.spacing)
    scene = SourceScene(angles_deg=args.angles, snr_db=args.snr,
                        n_snapshots=args.snaps, seed=args.seed,
                        source_model=args.model)
    block = synthesize(config, scene)
    q = scene.n_sources

    if args.estimator == "opsc":
        if args.m is None or args.m0 is None:
            raise ValidationError("opsc needs --m and --m0")
        plan = plan_subarrays(config, args.m, args.m0)
        est = opsc_estimate(block, plan, q, sigma=args.sigma, h=args.h,
                            p=args.p, spacing_ratio=args.spacing)
    elif args.estimator == "ml-ap":
        grid = GridSpec(-90.0, 90.0, args.sigma)
        settings = ApSettings(max_iters=30, tol_deg=args.sigma / 2,
                              init="sequential")
        est = ap_refine(sample_covariance(block), None, [grid] * q, settings,
                        args.spacing)
    elif args.estimator == "ml-grid":
        grid = GridSpec(-90.0, 90.0, args.sigma)
        est = ml_grid_search(sample_covariance(block), grid, q, args.spacing)
    else:
        est = root_music(sample_covariance(block), q, args.spacing)

    row = {"estimator": args.estimator}
    for i, angle in enumerate(est.angles_deg):
        row[f"angle_{i + 1}_deg"] = angle
    row["rmse_deg"] = rmse([est], [scene.angles_deg])
    row["converged"] = est.converged
    _emit([row], args)


def _cmd_dataset_export(args) -> None:
    config = ArrayConfig(args.n, args.spacing)
    plan = plan_subarrays(config, args.m, args.m0)
    manifest = export_dataset(config, plan, args.k, args.q, args.grid,
                              args.range, args.snr, args.snaps, args.seed,
                              args.out_dir, source_model=args.model)
    rows = [{"out_dir": args.out_dir, "subarray_index": manifest.subarray_index,
             "count_per_snr": manifest.count,
             "snr_levels": len(manifest.snr_db),
             "m_elements": manifest.m_elements}]
    _emit(rows, args)


def _cmd_osap_combine_refine(args) -> None:
    manifest = load_dataset_dir(args.data)
    plan_k = (manifest.n_elements - manifest.m_overlap) \
        // (manifest.m_elements - manifest.m_overlap)
    given = dict(args.pred)
    missing = [str(k) for k in range(plan_k) if k not in given]
    if missing:
        raise ValidationError("missing predictions for subarray k="
                              + ",".join(missing))
    paths = [given[k] for k in sorted(given)]
    ids, _ = combine_predictions(paths)
    blocks = blocks_for_dataset(manifest, args.snr_index, ids, args.spacing)
    refined = combine_and_refine(paths, blocks, args.sigma, args.h, args.p,
                                 spacing_ratio=args.spacing)
    rows = []
    for sid, est in zip(ids, refined):
        row = {"sample_id": int(sid)}
        for i, angle in enumerate(est.angles_deg):
            row[f"angle_{i + 1}_deg"] = angle
        row["converged"] = est.converged
        rows.append(row)
    _emit(rows, args)


def _cmd_bench_rmse(args) -> None:
    config = SweepConfig(
        snr_points_db=args.snr, trials=args.trials, angles_deg=args.angles,
        n_elements=args.n, n_snapshots=args.snaps, m_elements=args.m,
        overlap=args.m0, estimators=tuple(args.estimators.split(",")),
        master_seed=args.seed, source_model=args.model,
        spacing_ratio=args.spacing, sigma_deg=args.sigma, h=args.h, p=args.p)
    _emit(run_rmse_sweep(config), args)


def _cmd_bench_flops(args) -> None:
    rows = run_complexity_sweep(args.n_list, math.radians(args.sigma),
                                q_sources=args.q, q=args.ap_q,
                                l_snapshots=args.snaps, h=args.h, p=args.p)
    _emit(rows, args)


def _pred_arg(text: str) -> tuple[int, str]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(
            f"predictions are given as k=path, got {text!r}")
    k, path = text.split("=", 1)
    try:
        return int(k), path
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad subarray index in {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="doakit",
        description="DOA estimation toolkit for large uniform linear arrays")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="synthesize snapshots, emit covariance")
    sim.add_argument("--n", type=int, required=True, help="array elements")
    sim.add_argument("--angles", type=_angles_arg, required=True,
                     help="true source angles, comma separated degrees")
    sim.add_argument("--snr", type=_snr_arg, required=True, help=SNR_HELP)
    sim.add_argument("--snaps", type=int, default=1000, help="snapshots J")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--model", default="uncorrelated-gaussian",
                     choices=("uncorrelated-gaussian", "coherent"))
    sim.add_argument("--spacing", type=float, default=0.5,
                     help="element spacing over wavelength")
    _add_common(sim)
    sim.set_defaults(func=_cmd_simulate)

    est = sub.add_parser("estimate", help="run one estimator on one scene")
    est.add_argument("--estimator", required=True,
                     choices=("ml-grid", "ml-ap", "root-music", "opsc"))
    est.add_argument("--n", type=int, required=True)
    est.add_argument("--m", type=int, help="subarray size (opsc)")
    est.add_argument("--m0", type=int, help="subarray overlap (opsc)")
    est.add_argument("--angles", type=_angles_arg, required=True)
    est.add_argument("--snaps", type=int, default=1000)
    est.add_argument("--snr", type=_snr_arg, required=True, help=SNR_HELP)
    est.add_argument("--seed", type=int, default=0)
    est.add_argument("--sigma", type=float, default=1.0,
                     help="grid step / candidate base step, degrees")
    est.add_argument("--h", type=int, default=2, help="candidate half-width steps")
    est.add_argument("--p", type=int, default=10, help="candidate refine factor")
    est.add_argument("--model", default="uncorrelated-gaussian",
                     choices=("uncorrelated-gaussian", "coherent"))
    est.add_argument("--spacing", type=float, default=0.5)
    _add_common(est)
    est.set_defaults(func=_cmd_estimate)

    dataset = sub.add_parser("dataset", help="training data operations")
    dataset_sub = dataset.add_subparsers(dest="dataset_command", required=True)
    export = dataset_sub.add_parser("export", help="export one subarray's set")
    export.add_argument("--n", type=int, required=True)
    export.add_argument("--m", type=int, required=True)
    export.add_argument("--m0", type=int, required=True)
    export.add_argument("--k", type=int, required=True, help="subarray index")
    export.add_argument("--q", type=int, required=True, help="sources per sample")
    export.add_argument("--grid", type=float, required=True,
                        help="label grid step g, degrees")
    export.add_argument("--range", type=float, required=True,
                        help="angle range theta: labels span [-theta, theta]")
    export.add_argument("--snr", type=_floats_arg, required=True,
                        help="comma-separated SNR levels in dB")
    export.add_argument("--snaps", type=int, default=200)
    export.add_argument("--seed", type=int, default=0)
    export.add_argument("--model", default="uncorrelated-gaussian",
                        choices=("uncorrelated-gaussian", "coherent"))
    export.add_argument("--spacing", type=float, default=0.5)
    export.add_argument("--out-dir", required=True)
    _add_common(export)
    export.set_defaults(func=_cmd_dataset_export)

    osap = sub.add_parser("osap", help="learned-pipeline plumbing")
    osap_sub = osap.add_subparsers(dest="osap_command", required=True)
    refine = osap_sub.add_parser(
        "combine-refine",
        help="average per-subarray predictions and AP-refine each sample")
    refine.add_argument("--pred", type=_pred_arg, action="append", required=True,
                        metavar="K=PATH", help="prediction CSV for subarray K")
    refine.add_argument("--data", required=True,
                        help="dataset directory (manifest supplies geometry)")
    refine.add_argument("--snr-index", type=int, default=0,
                        help="which manifest SNR level the predictions cover")
    refine.add_argument("--sigma", type=float, default=1.0)
    refine.add_argument("--h", type=int, default=2)
    refine.add_argument("--p", type=int, default=10)
    refine.add_argument("--spacing", type=float, default=0.5)
    _add_common(refine)
    refine.set_defaults(func=_cmd_osap_combine_refine)

    bench = sub.add_parser("bench", help="benchmark tables")
    bench_sub = bench.add_subparsers(dest="bench_command", required=True)

    brmse = bench_sub.add_parser("rmse", help="Monte Carlo RMSE vs SNR")
    brmse.add_argument("--n", type=int, required=True)
    brmse.add_argument("--m", type=int)
    brmse.add_argument("--m0", type=int)
    brmse.add_argument("--angles", type=_angles_arg, required=True)
    brmse.add_argument("--snr", type=_floats_arg, required=True,
                       help="comma-separated SNR points in dB")
    brmse.add_argument("--trials", type=int, default=200)
    brmse.add_argument("--snaps", type=int, default=1000)
    brmse.add_argument("--seed", type=int, default=0)
    brmse.add_argument("--estimators", default="opsc",
                       help="comma-separated subset of opsc,ml-ap,root-music,ml-grid")
    brmse.add_argument("--sigma", type=float, default=1.0)
    brmse.add_argument("--h", type=int, default=2)
    brmse.add_argument("--p", type=int, default=10)
    brmse.add_argument("--model", default="uncorrelated-gaussian",
                       choices=("uncorrelated-gaussian", "coherent"))
    brmse.add_argument("--spacing", type=float, default=0.5)
    _add_common(brmse)
    brmse.set_defaults(func=_cmd_bench_rmse)

    bflops = bench_sub.add_parser("flops", help="closed-form complexity sweep")
    bflops.add_argument("--n-list", type=_ints_arg, required=True,
                        help="comma-separated element counts (each divisible by 8)")
    bflops.add_argument("--sigma", type=float, default=0.1,
                        help="ML-AP grid step in DEGREES (converted internally)")
    bflops.add_argument("--q", type=int, default=2, help="source count Q")
    bflops.add_argument("--ap-q", type=int, default=2,
                        help="AP multiplier q in the ML-AP formula")
    bflops.add_argument("--snaps", type=int, default=1000)
    bflops.add_argument("--h", type=int, default=2)
    bflops.add_argument("--p", type=int, default=10)
    _add_common(bflops)
    bflops.set_defaults(func=_cmd_bench_flops)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except DoakitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
