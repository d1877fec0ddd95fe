"""Command line entry point: ``invlimit <command> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys

from .. import __version__
from .config import ConfigError, ExperimentConfig, apply_overrides, load_config
from .config import MAX_SEED

log = logging.getLogger("invlimit")

# per-command defaults applied before the config file and overrides
COMMAND_DEFAULTS = {
    "attractor": {},
    "tongues": {"n": 2000, "grid_res": 1024},
    "rotation": {"kind": "standard", "params": (2.0, 0.3)},
    "continuity": {"transient": 200},
    "periodic": {"params": (2.0,)},
    "entropy": {},
}


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v <= MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat key=value config file")
    common.add_argument("--out", metavar="DIR", help="output directory (output.dir)")
    common.add_argument("--seed", type=_seed, metavar="U64", help="rng seed (rng.seed)")
    common.add_argument("--threads", type=_positive, default=1, metavar="N",
                        help="worker threads for data-parallel steps")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key; repeatable")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="invlimit",
        description="Attractors of fattened interval and circle maps.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "attractor": "sample an attractor cloud (and optional box cover)",
        "tongues": "rasterise an Arnold tongue T_r as P6 + CSV",
        "rotation": "rotation interval and orbit rotation numbers of the annulus map",
        "continuity": "Hausdorff distances between clouds along a parameter grid",
        "periodic": "match tent periodic points with periodic points of the fattened map",
        "entropy": "tent entropy estimates from exact periodic-point counts",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    v = sub.add_parser("verify", parents=[common], help="run invariant and acceptance checks",
                       description="Run invariant and acceptance checks; exit 1 on failure.")
    v.add_argument("--skip-invariants", action="store_true")
    return parser


def resolve_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig(name=args.command, **COMMAND_DEFAULTS[args.command])
    if args.config:
        defaults = {k: getattr(cfg, k) for k in COMMAND_DEFAULTS[args.command]}
        cfg = load_config(args.config, name=args.command, **defaults)
        if cfg.name != args.command:
            raise ConfigError(f"experiment.name: config is for {cfg.name!r}, "
                              f"not {args.command!r}")
    items = list(args.set)
    if args.out is not None:
        items.append(("output.dir", args.out))
    if args.seed is not None:
        items.append(("rng.seed", args.seed))
    return apply_overrides(cfg, items).validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "verify":
        from .acceptance import run_all

        results = run_all(not args.skip_invariants, threads=args.threads, echo=print)
        failed = [r for r in results if not r.passed and not r.advisory]
        print(f"{len(results) - len(failed)}/{len(results)} checks passed")
        return 1 if failed else 0

    from .commands import COMMANDS

    try:
        cfg = resolve_config(args)
        log.info("running %s with seed %d", cfg.name, cfg.seed)
        manifest = COMMANDS[args.command](cfg, threads=args.threads)
    except (ConfigError, ValueError) as exc:
        print(f"invlimit {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"invlimit {args.command}: I/O error: {exc}", file=sys.stderr)
        return 3
    for k, val in manifest.items():
        if k.startswith("result."):
            print(f"{k[7:]}={val}")
    print(f"wrote {cfg.out_dir}/manifest.txt")
    return 0


if __name__ == "__main__":
    sys.exit(main())
