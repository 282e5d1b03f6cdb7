"""Command line front end.

Usage: mcslab <kind> [--config path.json] [--out dir] [--seed u64]
[--threads n] [--no-figures].  Exit status 0 on success, 2 on a config
problem (one line-anchored message per issue on stderr), 3 when a
run-level check fails.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .errors import ConfigError, McslabError
from .experiments import KINDS, default_config, run, validate_config

_KIND_HELP = {
    "embed-demo": "project the signal curve to 3-D and dump the embedded points",
    "embedding-sweep": "measure embedding distortion across measurement counts",
    "recovery": "run noisy recovery trials against the error bounds",
    "toolbox-suite": "check the geometric property suite on a manifold sample",
    "bounds": "evaluate the closed-form measurement count",
    "certificate": "evaluate the chaining failure-probability certificate",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcslab",
        description="desk-scale laboratory for manifold-based compressive sensing",
    )
    sub = parser.add_subparsers(dest="kind", required=True, metavar="kind")
    for kind in KINDS:
        p = sub.add_parser(kind, help=_KIND_HELP[kind])
        p.add_argument("--config", help="JSON experiment config (defaults apply if omitted)")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, help="64-bit seed (overrides the config)")
        p.add_argument(
            "--threads",
            type=int,
            help="worker threads for trial sweeps (default MCSLAB_THREADS or 1)",
        )
        p.add_argument(
            "--no-figures",
            action="store_true",
            help="skip PNG rendering, keep only delimited artifacts",
        )
    return parser


def _headline(kind: str, summary: dict) -> Optional[str]:
    if kind == "bounds":
        return str(summary["m_min"])
    if kind == "certificate":
        return f"total {summary['total']:.6g} (informative: {summary['informative']})"
    if kind == "embed-demo":
        return (
            f"gap ratio {summary['gap_ratio']:.3f} "
            f"(continuous: {summary['continuous']})"
        )
    if kind == "embedding-sweep":
        meds = ", ".join(f"{k}: {v:.4f}" for k, v in summary["medians"].items())
        return f"median distortion by M: {meds}"
    if kind == "recovery":
        return (
            f"pass rates det {summary['deterministic_pass_rate']:.2f} "
            f"prob {summary['probabilistic_pass_rate']:.2f} "
            f"geo {summary['geodesic_pass_rate']:.2f}"
        )
    if kind == "toolbox-suite":
        return f"worst slack {summary['worst_slack']:.3e} (all passed: {summary['all_passed']})"
    return None


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            config = validate_config(args.config, kind=args.kind)
        else:
            config = default_config(args.kind)
        if args.seed is not None:
            config = config.with_overrides(seed=args.seed)
        result = run(
            config,
            out=args.out,
            threads=args.threads,
            figures=not args.no_figures,
        )
    except ConfigError as exc:
        for issue in exc.issues:
            print(issue, file=sys.stderr)
        return 2
    except McslabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    line = _headline(args.kind, result.summary)
    if line:
        print(line)
    print(f"artifacts in {result.out_dir} (manifest: {result.manifest_path.name})")
    return result.status


if __name__ == "__main__":
    sys.exit(main())
