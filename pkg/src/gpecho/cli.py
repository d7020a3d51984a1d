"""Command line: ``gpecho run | list | sweep``."""
from __future__ import annotations

import argparse
import logging
import sys

from .config import load_config, parse_config
from .errors import GPEchoError
from .scenarios import list_scenarios


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gpecho", description="Gravitational photon echo simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list preset scenarios")
    for name, helptext in (("run", "run one scenario"), ("sweep", "run a parameter grid")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", help="YAML run configuration")
        sp.add_argument("--scenario", help="preset name (overrides the config's scenario)")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--format", choices=("csv", "json"),
                        help="csv tables only, or csv plus a json mirror")
        if name == "sweep":
            sp.add_argument("--workers", type=int, help="concurrent sweep points")
    return p


def _resolve(args):
    data = {}
    if args.config:
        data = load_config(args.config).model_dump(mode="json", exclude_none=True)
    if args.scenario:
        data.pop("inline", None)
        data["scenario"] = args.scenario
    output = data.setdefault("output", {})
    if args.out:
        output["dir"] = args.out
    if args.format:
        output["formats"] = ["csv"] if args.format == "csv" else ["csv", "json"]
    if getattr(args, "workers", None) is not None:
        data["workers"] = args.workers
    return parse_config(data)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    from . import runner

    try:
        if args.command == "list":
            for name, desc in list_scenarios():
                print(f"{name:24s} {desc}")
            return 0
        config = _resolve(args)
        if args.command == "run":
            manifest = runner.run(config)
            for w in manifest.warnings:
                print(f"warning: {w}", file=sys.stderr)
            for row in manifest.metrics:
                print("echo {m}: window=({a_m:g}, {b_m:g}) s tau={tau_m:.3f} s "
                      "R={R_m:.4f} F={F_m:.4f}".format(**row))
            print(f"wrote {len(manifest.outputs)} files to {config.output.dir} [{manifest.status}]")
            return manifest.exit_code
        if not config.sweep:
            print("error: sweep needs a 'sweep' mapping in the config", file=sys.stderr)
            return 2
        rows = runner.sweep(config)
        for row in rows:
            print(row)
        return 0
    except GPEchoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
