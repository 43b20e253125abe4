"""Command-line driver.

Subcommands map one-to-one onto experiment kinds:

    cgolab norms | mult-decay | cauchy-selftest | cgo-build | rate-fit |
           reconstruct | alessandrini-check | dn-map
           [--config PATH] [--out DIR] [--threads K] [--seed S] [key=value ...]

Flags override config-file values, trailing ``key=value`` pairs override
both.  Exit code is 0 iff every configured acceptance check passes.
"""

from __future__ import annotations

import argparse
import sys

from .config import DEFAULTS, config_from_mapping, parse_config_file
from .experiments import run_experiment
from .grid import set_fft_workers

_SUBCOMMANDS = {
    "norms": "norms",
    "mult-decay": "mult-decay",
    "cauchy-selftest": "cauchy-selftest",
    "cgo-build": "cgo",
    "rate-fit": "rate-fit",
    "reconstruct": "reconstruct",
    "alessandrini-check": "alessandrini",
    "dn-map": "dn",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cgolab",
        description="Spectral laboratory for CGO construction, multiplier decay "
        "rates, reconstruction, and DN-map checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, kind in _SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"run the '{kind}' experiment")
        p.add_argument("--config", default=None, help="flat key = value config file")
        p.add_argument("--out", default=f"out-{kind}", help="output directory")
        p.add_argument("--threads", type=int, default=None, help="worker count")
        p.add_argument("--seed", type=int, default=None, help="RNG seed")
        p.add_argument(
            "overrides",
            nargs="*",
            metavar="key=value",
            help=f"config overrides (keys: {', '.join(sorted(DEFAULTS))})",
        )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)

    raw: dict[str, str] = {}
    if args.config:
        raw.update(parse_config_file(args.config))
    for item in args.overrides:
        if "=" not in item:
            print(f"error: override {item!r} is not key=value", file=sys.stderr)
            return 2
        key, value = item.split("=", 1)
        raw[key.strip()] = value.strip()
    raw["kind"] = _SUBCOMMANDS[args.command]
    if args.threads is not None:
        raw["threads"] = str(args.threads)
    if args.seed is not None:
        raw["seed"] = str(args.seed)

    try:
        cfg = config_from_mapping(raw)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    set_fft_workers(1 if cfg.threads > 1 else max(1, cfg.threads))
    try:
        result = run_experiment(cfg, args.out)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for line in result.summary_lines():
        print(line)
    print(f"reports in {result.out_dir}")
    return 0 if result.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
