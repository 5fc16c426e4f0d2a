#!/usr/bin/env python3

import argparse
import json
import logging
import os
import sys
from typing import Any

import numpy as np
import pandas as pd
import tabulate

from mmloc import (
    ConfigError,
    EnsembleConfig,
    Factory,
    Log,
    MappingFailure,
    MmlocError,
    NoiseModel,
    RunConfig,
    Scenario,
    WlsNetConfig,
    bench_timing,
    build_scenario_family,
    compare_family,
    crlb_joint,
    crlb_mapping,
    emit_report,
    estimate_joint,
    ewlsnet_estimate,
    fp_estimate,
    generate_dataset,
    generate_mapping_dataset,
    joint_covariance,
    load_network,
    lsnet_estimate,
    map_environment,
    mapping_covariance,
    monte_carlo,
    read_mapping_measurements,
    read_measurements,
    save_network,
    street_canyon_scenario,
    sweep_na,
    sweep_rho,
    synthesize_mapping_measurement,
    synthesize_measurements,
    train_ensemble,
    train_fp_net,
    train_residual_net,
    trial_rng,
    wlsnet_estimate,
    write_dataset,
    write_mapping_measurements,
    write_measurements,
    write_point_cloud,
)


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _set(path: str, value: Any) -> None:
    if value is not None:
        Factory.set_variable(path, value, allow_override=True)


def _emit_records(records: list[dict[str, Any]], out: str | None, fmt: str) -> None:
    df = pd.DataFrame(records)
    if out is None:
        if fmt == "csv":
            print(df.to_csv(index=False), end="")
        else:
            print(json.dumps(records if len(records) != 1 else records[0], indent=1))
    elif fmt == "csv":
        df.to_csv(out, index=False)
    else:
        df.to_json(out, orient="records", indent=1, double_precision=15)


def _estimate_records(ests: list[Any]) -> list[dict[str, Any]]:
    return [dict(row=i, **e.to_dict()) for i, e in enumerate(ests)]


def _load_members(directory: str) -> list[Any]:
    if not os.path.isdir(directory):
        raise ConfigError(f"Member directory {directory} does not exist")
    files = sorted(f for f in os.listdir(directory) if f.endswith(".npz"))
    if not files:
        raise ConfigError(f"No .npz networks in {directory}")
    return [load_network(os.path.join(directory, f)) for f in files]


def _read_ue(text: str) -> np.ndarray:
    """
    A UE position from ``x,y,z`` or from a JSON file written by ``estimate``.
    """
    if os.path.exists(text):
        with open(text) as f:
            doc = json.load(f)
        if isinstance(doc, list):
            doc = doc[0]
        return np.asarray(doc["u"], dtype=float)
    return np.asarray(_floats(text), dtype=float)


def cmd_simulate(args: argparse.Namespace) -> None:
    if args.compare:
        if args.family is None:
            raise ConfigError("--compare needs --family")
        reports = compare_family(
            args.family,
            Scenario.from_config(),
            na=int(Factory.get_variable("run.na", 6)),
            samples=int(Factory.get_variable("dataset.samples", 10000)),
            nn=WlsNetConfig.from_config(),
            members=int(Factory.get_variable("ensemble.members", 10)),
            seed=int(Factory.get_variable("run.seed", 0)),
        )
        emit_report(reports, args.out or "report.csv", args.format)
        return

    cfg = RunConfig.from_config()
    if args.measurements:
        noise = cfg.noise.scaled(cfg.rho)
        if cfg.estimator == "mapping":
            rows = []
            for i in range(args.measurements):
                rng = trial_rng(cfg.seed, i)
                rows += [synthesize_mapping_measurement(cfg.scenario, n, noise, rng) for n in cfg.scenario.scatterer_indices()]
            write_mapping_measurements(args.out or "mapping.csv", rows)
        else:
            sets = [synthesize_measurements(cfg.scenario, noise, cfg.na, trial_rng(cfg.seed, i)) for i in range(args.measurements)]
            write_measurements(args.out or "measurements.csv", sets)
        return

    if args.sweep_rho:
        reports = sweep_rho(cfg, _floats(args.sweep_rho))
    elif args.sweep_na:
        reports = sweep_na(cfg, _ints(args.sweep_na))
    else:
        reports = [monte_carlo(cfg)]
    if args.out:
        emit_report(reports, args.out, args.format)
    else:
        rows = [r.to_row() for r in reports]
        print(tabulate.tabulate([list(r.values()) for r in rows], headers=list(rows[0].keys()), tablefmt="grid"))


def cmd_estimate(args: argparse.Namespace) -> None:
    scenario = Scenario.from_config()
    noise = NoiseModel.from_config()
    iterations = int(Factory.get_variable("wls.iterations", 5))
    ests = [estimate_joint(m, scenario.rrhs, iterations=iterations) for m in read_measurements(args.input, noise)]
    _emit_records(_estimate_records(ests), args.out, args.format)


def cmd_map(args: argparse.Namespace) -> None:
    iterations = int(Factory.get_variable("mapping.iterations", 5))
    noise = NoiseModel.from_config()
    if args.street_canyon:
        scenario = street_canyon_scenario(count=args.street_canyon, seed=int(Factory.get_variable("run.seed", 0)))
        rng = trial_rng(int(Factory.get_variable("run.seed", 0)), 0)
        meas = synthesize_measurements(scenario, noise, scenario.n_rrh, rng)
        u_est = scenario.ue_pos if args.truth_ue else estimate_joint(meas, scenario.rrhs).u
        batch = [synthesize_mapping_measurement(scenario, n, noise, rng) for n in scenario.scatterer_indices()]
    else:
        if args.input is None or args.ue is None:
            raise ConfigError("map needs --input and --ue, or --street-canyon")
        scenario = Scenario.from_config()
        batch = read_mapping_measurements(args.input, noise)
        u_est = _read_ue(args.ue)
    results = map_environment(batch, scenario.rrhs, u_est, iterations=iterations)
    write_point_cloud(args.out or "point_cloud.csv", results)
    failed = [r for r in results if isinstance(r, MappingFailure)]
    Log.info(f"mapped {len(results) - len(failed)} of {len(results)} scatterers", group="mmloc.cli")


def cmd_crlb(args: argparse.Namespace) -> None:
    cfg = RunConfig.from_config()
    noise = cfg.noise.scaled(cfg.rho)
    if args.scatterer is not None:
        res = crlb_mapping(cfg.scenario, args.scatterer, mapping_covariance(noise.gaussian_stds()))
    else:
        res = crlb_joint(cfg.scenario, joint_covariance(cfg.na, noise.gaussian_stds()), cfg.na)
    _emit_records([res.to_dict()], args.out, args.format)


def cmd_train(args: argparse.Namespace) -> None:
    scenario = Scenario.from_config()
    seed = int(Factory.get_variable("run.seed", 0))
    noise = build_scenario_family(args.family, seed=seed) if args.family else NoiseModel.from_config()
    nn = WlsNetConfig.from_config()
    samples = int(Factory.get_variable("dataset.samples", 10000))
    fractions = {
        "train_fraction": float(Factory.get_variable("dataset.train_fraction", 0.6)),
        "val_fraction": float(Factory.get_variable("dataset.val_fraction", 0.2)),
    }
    if args.mapping:
        n = int(Factory.get_variable("mapping.rrh_index", 1))
        data = generate_mapping_dataset(scenario, noise, samples, n=n, seed=seed, **fractions)
    else:
        data = generate_dataset(
            scenario,
            noise,
            int(Factory.get_variable("run.na", 6)),
            samples,
            area_halfwidth=float(Factory.get_variable("dataset.area_halfwidth", 50.0)),
            speed_halfwidth=float(Factory.get_variable("dataset.speed_halfwidth", 5.0)),
            seed=seed,
            **fractions,
        )
        if args.dataset_out:
            write_dataset(args.dataset_out, data)

    out = args.out or ("network.npz" if args.members == 1 else "members")
    if args.fp:
        save_network(out, train_fp_net(data, nn))
    elif args.members > 1:
        os.makedirs(out, exist_ok=True)
        for k, params in enumerate(train_ensemble(data, nn, l=args.members)):
            save_network(os.path.join(out, f"member_{k:02d}.npz"), params)
    else:
        save_network(out, train_residual_net(data, nn))
    Log.info(f"networks written to {out}", group="mmloc.cli")


def cmd_ensemble(args: argparse.Namespace) -> None:
    scenario = Scenario.from_config()
    members = _load_members(args.members_dir)
    ens = EnsembleConfig.from_config() if Factory.has_variable("ensemble.r_a") else EnsembleConfig(l=len(members))
    nn = WlsNetConfig.from_config()
    ests = [ewlsnet_estimate(m, members, ens, nn, scenario.rrhs) for m in read_measurements(args.input, NoiseModel.from_config())]
    _emit_records(_estimate_records(ests), args.out, args.format)


def cmd_infer(args: argparse.Namespace) -> None:
    scenario = Scenario.from_config()
    params = load_network(args.network)
    nn = WlsNetConfig.from_config()
    method = args.method or ("fp" if params.kind == "fp" else "wlsnet")
    ests = []
    for m in read_measurements(args.input, NoiseModel.from_config()):
        if method == "fp":
            ests.append(fp_estimate(m, params))
        elif method == "lsnet":
            ests.append(lsnet_estimate(m, params, scenario.rrhs))
        else:
            ests.append(wlsnet_estimate(m, params, nn, scenario.rrhs))
    _emit_records(_estimate_records(ests), args.out, args.format)


def cmd_bench(args: argparse.Namespace) -> None:
    members = _load_members(args.members_dir)
    base = RunConfig.from_config()
    ens = base.ensemble if base.ensemble is not None else EnsembleConfig(l=len(members))
    cfg = RunConfig(scenario=base.scenario, noise=base.noise, rho=base.rho, na=(members[0].n_inputs + 2) // 4, seed=base.seed, members=tuple(members), nn=base.nn, ensemble=ens)
    res = bench_timing(cfg, repetitions=args.repetitions)
    _emit_records([res.to_dict()], args.out, args.format)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="YAML configuration file.")
    common.add_argument("--seed", type=int, default=None, help="Master seed.")
    common.add_argument("--out", type=str, default=None, help="Output path.")
    common.add_argument("--format", type=str, choices=["csv", "json"], default="json", help="Output format.")
    common.add_argument("--logfile", type=str, default=None, help="Log file (.csv, .json, .yml, .txt, .md, .rst).")
    common.add_argument("--verbose", action="store_true", help="Log per-iteration detail.")

    parser = argparse.ArgumentParser(prog="mmloc", description="Hybrid TDoA/FDoA/AoA localisation and environment mapping")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="Synthesize measurements or run Monte Carlo experiments.")
    p.add_argument("--estimator", type=str, default=None, help="wls, wlsnet, lsnet, fp, ewlsnet or mapping.")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--rho", type=float, default=None, help="Noise scaling factor.")
    p.add_argument("--rho-db", type=float, default=None, help="Noise scaling factor in dB.")
    p.add_argument("--na", type=int, default=None, help="Number of RRHs used.")
    p.add_argument("--family", type=str, default=None, help="Error family D0..D4 or P1..P4.")
    p.add_argument("--sweep-rho", type=str, default=None, help="Comma separated noise scales.")
    p.add_argument("--sweep-na", type=str, default=None, help="Comma separated RRH counts.")
    p.add_argument("--compare", action="store_true", help="Train and compare every estimator on --family.")
    p.add_argument("--measurements", type=int, default=0, help="Write this many synthesized measurement rows instead of running trials.")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", parents=[common], help="Joint position and velocity estimate per measurement row.")
    p.add_argument("--input", type=str, required=True, help="Measurement CSV.")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("map", parents=[common], help="Scatterer point cloud from NLoS measurements.")
    p.add_argument("--input", type=str, default=None, help="Mapping measurement CSV.")
    p.add_argument("--ue", type=str, default=None, help="UE position x,y,z or an estimate JSON file.")
    p.add_argument("--street-canyon", type=int, default=0, help="Synthesize and map a street scene with this many scatterers.")
    p.add_argument("--truth-ue", action="store_true", help="Use the true UE position for the street scene.")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("crlb", parents=[common], help="Cramer-Rao bounds for the configured scenario.")
    p.add_argument("--na", type=int, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--scatterer", type=int, default=None, help="Bound for the scatterer of this RRH instead.")
    p.set_defaults(func=cmd_crlb)

    p = sub.add_parser("train", parents=[common], help="Train residual or FP networks.")
    p.add_argument("--family", type=str, default=None)
    p.add_argument("--members", type=int, default=1, help="Ensemble size; more than one writes a directory.")
    p.add_argument("--fp", action="store_true", help="Train the direct regression network.")
    p.add_argument("--mapping", action="store_true", help="Train sub-Net 2 on a mapping dataset.")
    p.add_argument("--dataset-out", type=str, default=None, help="Also write the dataset CSV.")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("ensemble", parents=[common], help="Fused eWLS-Net estimate per measurement row.")
    p.add_argument("--members-dir", type=str, required=True)
    p.add_argument("--input", type=str, required=True)
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("infer", parents=[common], help="Run a stored network on a measurement file.")
    p.add_argument("--network", type=str, required=True)
    p.add_argument("--input", type=str, required=True)
    p.add_argument("--method", type=str, choices=["wlsnet", "lsnet", "fp"], default=None)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("bench", parents=[common], help="Median time per estimate for WLS, WLS-Net and eWLS-Net.")
    p.add_argument("--members-dir", type=str, required=True)
    p.add_argument("--repetitions", type=int, default=1000)
    p.set_defaults(func=cmd_bench)
    return parser


def _apply_overrides(args: argparse.Namespace) -> None:
    if args.config:
        Factory.load_config(args.config)
    _set("run.seed", args.seed)
    for name, path in (("estimator", "run.estimator"), ("trials", "run.trials"), ("rho", "run.rho"), ("rho_db", "run.rho_db"), ("na", "run.na"), ("family", "noise.family")):
        _set(path, getattr(args, name, None))


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.logfile:
            try:
                Log.set_logfile(args.logfile)
            except ValueError as e:
                raise ConfigError(str(e)) from e
        if args.verbose:
            Log.set_level(logging.DEBUG)
        _apply_overrides(args)
        args.func(args)
    except MmlocError as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e)}), file=sys.stderr)
        return 2
    except Exception as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e)}), file=sys.stderr)
        return 1
    finally:
        Log._flush_log()
    return 0


if __name__ == "__main__":
    sys.exit(main())
