"""Command-line interface.

    scramblelab analyze --unitary scrambler --d 3
    scramblelab experiment prop2 --ds 3 --d-max 24
    scramblelab oto --unitary haar --d 3 --seed 7
    scramblelab list

Exit codes: 0 success, 1 a check inside an experiment failed, 2 configuration error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .analysis import ExtractionError, NonIntegerDims, NotMinimal, classify, extract_crisscross
from .experiments import (OTO_CAP, REGISTRY, UNITARIES, ConfigError, ExperimentConfig,
                          ExperimentResult, build_unitary, run_experiment, run_oto)

OUT_DIR_ENV = "SCRAMBLELAB_OUT_DIR"

# CLI flag -> experiment parameter
PARAM_FLAGS = {"d": "d", "ds": "d_s", "d0": "d0", "d_min": "d_min", "d_max": "d_max",
               "d_values": "d_values", "n": "n", "trials": "trials", "epsilon": "epsilon",
               "samples": "samples", "unitary": "unitary"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def _global_flags(suppress: bool = False) -> argparse.ArgumentParser:
    # subcommand copies suppress their defaults so flags given before the subcommand survive
    none = argparse.SUPPRESS if suppress else None
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=none, help="PRNG seed (unsigned 64-bit)")
    p.add_argument("--out", default=none, help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=none)
    p.add_argument("--config", default=none, help="file of key=value lines overriding flags")
    p.add_argument("--unsafe-large", action="store_true",
                   default=argparse.SUPPRESS if suppress else False, help="lift the desk-scale size caps")
    return p


def _unitary_flags(p: argparse.ArgumentParser):
    p.add_argument("--unitary", choices=UNITARIES, default="scrambler")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--ds", type=int, default=None, help="scrambling block size (counter)")
    p.add_argument("--d0", type=int, default=None, help="block boundary (capacity_gap)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scramblelab", description="Tripartite-information scrambling laboratory",
                     parents=[_global_flags()])
    g = _global_flags(suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    an = sub.add_parser("analyze", parents=[g], help="info report and verdict for one unitary")
    _unitary_flags(an)
    an.add_argument("--normal-form", action="store_true", help="also extract the criss-cross form")

    ex = sub.add_parser("experiment", parents=[g], help="run a named experiment")
    ex.add_argument("name", choices=sorted(REGISTRY))
    ex.add_argument("--unitary", choices=UNITARIES, default=None)
    for flag, typ in (("d", int), ("ds", int), ("d0", int), ("d-min", int), ("d-max", int),
                      ("n", int), ("trials", int), ("epsilon", float), ("samples", int)):
        ex.add_argument(f"--{flag}", type=typ, default=None)
    ex.add_argument("--d-values", default=None, help="space or comma separated list (prop4)")

    ot = sub.add_parser("oto", parents=[g], help="averaged OTO correlators")
    _unitary_flags(ot)

    sub.add_parser("list", parents=[g], help="list experiments and unitaries")
    return parser


def read_config(path: str) -> dict:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    for k, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{k}: expected key=value")
        key, val = (x.strip() for x in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def _parse_value(v: str):
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    low = v.lower()
    if low in ("true", "false"):
        return low == "true"
    return v


def _apply_config(args):
    if not args.config:
        return
    for key, raw in read_config(args.config).items():
        if not hasattr(args, key) and key not in PARAM_FLAGS.values():
            raise ConfigError(f"unknown config key {key!r}")
        flag = next((f for f, p in PARAM_FLAGS.items() if p == key), key)
        if key == "unsafe_large":
            args.unsafe_large = bool(_parse_value(raw))
        elif key == "d_values":
            args.d_values = raw
        else:
            setattr(args, flag, _parse_value(raw))


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    base = os.environ.get(OUT_DIR_ENV)
    if base and not os.path.isabs(out):
        out = os.path.join(base, out)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _report_failures(res: ExperimentResult) -> int:
    for c in res.failures():
        print(f"check failed: {c.name}: {c.measured:.12g} {c.direction} {c.bound:.12g}", file=sys.stderr)
    return 0 if res.passed else 1


def _unitary_kwargs(args) -> dict:
    kw = {"d": args.d, "seed": args.seed or 0, "unsafe_large": args.unsafe_large}
    if args.ds is not None:
        kw["d_s"] = args.ds
    if args.d0 is not None:
        kw["d0"] = args.d0
    return kw


def _cmd_analyze(args) -> int:
    u = build_unitary(args.unitary, **_unitary_kwargs(args))
    verdict = classify(u)
    doc = {"unitary": args.unitary, "d": args.d, **verdict.to_dict()}
    if args.normal_form:
        try:
            doc["normal_form"] = extract_crisscross(u).to_dict()
        except (NotMinimal, NonIntegerDims, ExtractionError) as e:
            doc["normal_form"] = None
            doc["normal_form_error"] = f"{type(e).__name__}: {e}"
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return 0


def _cmd_oto(args) -> int:
    if args.d > OTO_CAP and not args.unsafe_large:
        raise ConfigError(f"OTO runs are capped at d <= {OTO_CAP} (use --unsafe-large)")
    res = run_oto(args.unitary, **_unitary_kwargs(args))
    fmt = args.format or "json"
    _emit(res.render(fmt), args.out)
    return 0


def _cmd_experiment(args) -> int:
    params = {}
    for flag, key in PARAM_FLAGS.items():
        v = getattr(args, flag, None)
        if v is not None:
            params[key] = v
    if args.seed is not None:
        params["seed"] = args.seed
    cfg = ExperimentConfig(args.name, params, args.out, args.format or "csv", args.unsafe_large)
    try:
        res = run_experiment(cfg)
    except TypeError as e:
        raise ConfigError(str(e)) from e
    _emit(res.render(cfg.format), args.out)
    return _report_failures(res)


def _cmd_list(args) -> int:
    lines = ["experiments:"]
    for name, spec in sorted(REGISTRY.items()):
        params = ", ".join(f"{k}={v}" for k, v in spec.defaults.items())
        lines.append(f"  {name:<16}{spec.doc} [{params}]")
    lines.append("unitaries: " + ", ".join(UNITARIES))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        _apply_config(args)
        cmd = {"analyze": _cmd_analyze, "experiment": _cmd_experiment, "oto": _cmd_oto,
               "list": _cmd_list}[args.command]
        return cmd(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
