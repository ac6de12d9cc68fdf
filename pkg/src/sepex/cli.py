"""Command-line entry point.

Utility subcommands (partition, sample, decompose, entropy) expose the core
objects directly; the check-* subcommands run the configured bound
experiment and report pass/fail through the exit code: 0 success, 1 check
failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import kernels
from .errors import CheckFailure, ConfigError
from .fclass import EmpiricalMeasure, entropy_profile_empirical, entropy_profile_vc
from .harness import (
    TAG_MEASURE,
    build_class,
    build_model,
    config_from_dict,
    default_config,
    ensure_vc,
    load_config,
    run_check,
)
from .hoeffding import decompose
from .lattice import EVector, Shape, transversal_partition
from .sampler import marginal_draws, sample_array


def _parse_shape(text):
    try:
        dims = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise ConfigError(f"bad shape {text!r}; expected comma-separated integers like 8,8")
    return Shape(dims)


def _parse_direction(text):
    if not text or set(text) - {"0", "1"}:
        raise ConfigError(f"bad direction {text!r}; expected a bit-string like 10 or 011")
    return EVector.from_bitstring(text)


def _parse_seed(text):
    try:
        seed = int(text, 0)
    except ValueError:
        raise ConfigError(f"seed must be an integer, got {text!r}")
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must fit in an unsigned 64-bit integer")
    return seed


def _emit(text, out_dir, filename):
    if out_dir is None:
        sys.stdout.write(text)
        return
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, filename)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    print(path)


def _csv_text(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def _get_config(args, check=None):
    seed = _parse_seed(args.seed) if args.seed is not None else None
    if args.config is not None:
        return load_config(args.config, check=check, seed=seed)
    if check is not None:
        return default_config(check, seed=seed if seed is not None else 0)
    return config_from_dict({"check": "global", "seed": seed if seed is not None else 0})


def _cmd_partition(args):
    shape = _parse_shape(args.shape)
    e = _parse_direction(args.e)
    if args.format == "csv":
        raise ConfigError("partition output is JSON only")
    part = transversal_partition(shape, e)
    _emit(part.to_json(indent=2) + "\n", args.out, "partition.json")
    return 0


def _cmd_sample(args):
    config = _get_config(args)
    shape = _parse_shape(args.shape)
    model = build_model(config)
    if model.K != shape.K:
        raise ConfigError(f"model K={model.K} does not match shape K={shape.K}")
    sample = sample_array(model, shape, config.seed)
    if args.format == "json":
        payload = {
            "shape": list(shape.dims),
            "seed": config.seed,
            "model": sample.description,
            "values": sample.values.tolist(),
        }
        _emit(json.dumps(payload, indent=2) + "\n", args.out, "sample.json")
    else:
        buf = io.StringIO()
        sample.to_csv(buf)
        _emit(buf.getvalue(), args.out, "sample.csv")
    return 0


def _cmd_decompose(args):
    config = _get_config(args)
    shape = _parse_shape(args.shape)
    model = build_model(config)
    fclass = build_class(config, model)
    # middle of the skeleton: the edge atoms of a threshold class are degenerate
    f = fclass.fns[len(fclass.fns) // 2]
    cmap = decompose(model, f, shape, config.seed, inner_draws=config.inner_draws)
    payload = cmap.to_json_dict()
    if args.format == "csv":
        rows = [["e", "value"]] + [[key, f"{val:.12g}"] for key, val in payload.items()]
        _emit(_csv_text(rows), args.out, "components.csv")
    else:
        _emit(json.dumps(payload, indent=2) + "\n", args.out, "components.json")
    return 0


def _cmd_entropy(args):
    config = _get_config(args)
    model = build_model(config)
    fclass = build_class(config, model)
    deltas = np.geomspace(0.02, 1.0, 25)
    rows = []
    if args.method in ("vc", "both"):
        A, v = ensure_vc(fclass, model, config.seed)
        for d, val, method in entropy_profile_vc(A, v, args.k, deltas).csv_rows():
            rows.append([f"{d:.12g}", f"{val:.12g}", method])
    if args.method in ("empirical", "both"):
        measures = [
            EmpiricalMeasure(marginal_draws(model, 400, kernels.derive(config.seed, TAG_MEASURE, i)))
            for i in range(3)
        ]
        profile = entropy_profile_empirical(fclass, measures, args.k, deltas)
        for d, val, method in profile.csv_rows():
            rows.append([f"{d:.12g}", f"{val:.12g}", method])
    if args.format == "json":
        payload = [{"delta": float(r[0]), "value": float(r[1]), "method": r[2]} for r in rows]
        _emit(json.dumps(payload, indent=2) + "\n", args.out, "entropy.json")
    else:
        _emit(_csv_text([["delta", "value", "method"]] + rows), args.out, "entropy.csv")
    return 0


def _cmd_check(args, check):
    config = _get_config(args, check=check)
    report = run_check(config)
    if args.format == "csv":
        _emit(_csv_text(report.csv_rows()), args.out, f"{check}_report.csv")
    else:
        _emit(report.to_json(), args.out, f"{check}_report.json")
    return 0 if report.passed else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sepex",
        description="Sampling, decomposition and bound checks for multi-index empirical processes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_format="json"):
        p.add_argument("--config", help="TOML configuration file")
        p.add_argument("--seed", help="unsigned 64-bit seed (overrides the config)")
        p.add_argument("--out", help="directory for output files (default: stdout)")
        p.add_argument("--format", choices=("json", "csv"), default=default_format)

    p = sub.add_parser("partition", help="transversal partition of an index set")
    p.add_argument("--shape", required=True, help="comma-separated dimensions, e.g. 3,2")
    p.add_argument("--e", required=True, help="direction bit-string, e.g. 11")
    common(p)

    p = sub.add_parser("sample", help="realize one array and export it")
    p.add_argument("--shape", required=True)
    common(p, default_format="csv")

    p = sub.add_parser("decompose", help="component decomposition of one realized array")
    p.add_argument("--shape", required=True)
    common(p)

    p = sub.add_parser("entropy", help="entropy-integral profile of the configured class")
    p.add_argument("--method", choices=("vc", "empirical", "both"), default="both")
    p.add_argument("--k", type=int, default=1, help="direction weight k in the exponent k/2")
    common(p, default_format="csv")

    for check in ("global", "local", "vc", "iid", "lemmas"):
        p = sub.add_parser(f"check-{check}", help=f"run the {check} bound check")
        common(p)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "partition":
            return _cmd_partition(args)
        if args.command == "sample":
            return _cmd_sample(args)
        if args.command == "decompose":
            return _cmd_decompose(args)
        if args.command == "entropy":
            return _cmd_entropy(args)
        if args.command.startswith("check-"):
            return _cmd_check(args, args.command.removeprefix("check-"))
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    except CheckFailure as err:
        print(f"check failed: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
