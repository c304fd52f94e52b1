"""Command-line entry point: ``bosonic-nogo verify | sweep | power``.

Sweep parameters come from a JSON config (``--config``) and/or per-parameter
flags such as ``--kappa 0.1,0.5,0.9``; flags win. Exit status is 0 only when
every check or row passed, 1 when something failed, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigParseError, NoGoError
from .power import power_calc
from .scenarios import SCENARIOS, fmt_value, parse_config, render, run_scenario, to_csv, to_json
from .verify import verify_all


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _parse_range(name: str, text: str) -> list[float]:
    parts = [t for t in text.replace(" ", "").split(",") if t]
    if not parts:
        raise ConfigParseError(f"parameter {name!r} has an empty range")
    try:
        return [float(t) for t in parts]
    except ValueError as e:
        raise ConfigParseError(f"parameter {name!r}: {e}") from e


def _extra_params(tokens: list[str]) -> dict[str, list[float]]:
    params, i = {}, 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--"):
            raise ConfigParseError(f"unexpected argument {tok!r}")
        if "=" in tok:
            name, value = tok[2:].split("=", 1)
            i += 1
        else:
            if i + 1 >= len(tokens):
                raise ConfigParseError(f"flag {tok} needs a value")
            name, value = tok[2:], tokens[i + 1]
            i += 2
        params[name] = _parse_range(name, value)
    return params


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigParseError(f"cannot read config {path}: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigParseError("config file must hold a JSON object")
    return raw


def cmd_sweep(args, extra) -> int:
    raw = _load_config(args.config)
    if args.scenario:
        raw["scenario"] = args.scenario
    params = dict(raw.get("params") or {})
    params.update(_extra_params(extra))
    raw["params"] = params
    for key in ("cutoff", "spacing", "out", "format", "seed", "workers"):
        val = getattr(args, key)
        if val is not None:
            raw[key] = val
    cfg = parse_config(raw)
    result = run_scenario(cfg)
    _emit(render(result, cfg.format), cfg.out)
    s = result.summary()
    print(f"{cfg.scenario}: {s['points']} points, {s['failed']} failed", file=sys.stderr)
    return 0 if result.passed else 1


def cmd_verify(args, extra) -> int:
    if extra:
        raise ConfigParseError(f"unexpected arguments {extra}")
    echo = (lambda line: print(line, file=sys.stderr)) if args.out is None else print
    report = verify_all(seed=args.seed or 0, echo=echo)
    if args.out is not None or args.format:
        rows = [{"criterion": c.criterion, "name": c.name, "passed": c.passed,
                 "measured": json.dumps(c.measured, default=fmt_value, sort_keys=True)} for c in report.checks]
        if (args.format or "json") == "json":
            text = json.dumps({"config": {"seed": args.seed or 0}, **report.to_dict()}, indent=2, default=fmt_value) + "\n"
        else:
            text = to_csv(rows)
        _emit(text, args.out)
    return 0 if report.passed else 1


def cmd_power(args, extra) -> int:
    if extra:
        raise ConfigParseError(f"unexpected arguments {extra}")
    r = power_calc(args.Ns, args.W, wavelength=args.wavelength, omega0=args.omega0, Nmax=args.Nmax, Pmax=args.Pmax)
    row = r.to_dict()
    fmt = args.format or "json"
    text = to_csv([row]) if fmt == "csv" else to_json({"scenario": "power"}, [row], {"within_limits": r.within_limits})
    _emit(text, args.out)
    return 0 if r.within_limits is not False else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bosonic-nogo", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--seed", type=int)

    v = sub.add_parser("verify", help="run the acceptance checks")
    common(v)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="run a parameter sweep; extra --NAME v1,v2 flags set ranges")
    s.add_argument("scenario", nargs="?", choices=sorted(SCENARIOS))
    s.add_argument("--config", help="JSON config file")
    s.add_argument("--workers", type=int)
    s.add_argument("--cutoff", type=int)
    s.add_argument("--spacing", type=float, help="phase-space grid spacing override")
    common(s)
    s.set_defaults(func=cmd_sweep)

    w = sub.add_parser("power", help="transmitted power for Ns photons per mode")
    w.add_argument("--Ns", type=float, required=True)
    w.add_argument("--W", type=float, required=True, help="bandwidth in Hz")
    carrier = w.add_mutually_exclusive_group(required=True)
    carrier.add_argument("--wavelength", type=float, help="metres")
    carrier.add_argument("--omega0", type=float, help="rad/s")
    w.add_argument("--Nmax", type=float)
    w.add_argument("--Pmax", type=float, help="watts")
    common(w)
    w.set_defaults(func=cmd_power)
    return p


_SWEEP_FLAGS = {"--config", "--workers", "--cutoff", "--spacing", "--out", "--format", "--seed", "-h", "--help"}


def _split_sweep_argv(argv: list[str]) -> tuple[list[str], list[str]]:
    """Pull scenario parameter flags out of a sweep command line.

    argparse would otherwise hand the value of an unknown flag to the
    optional ``scenario`` positional.
    """
    known, extra, i = [], [], 0
    while i < len(argv):
        tok = argv[i]
        name = tok.split("=", 1)[0]
        if tok.startswith("--") and name not in _SWEEP_FLAGS:
            step = 1 if "=" in tok or i + 1 >= len(argv) else 2
            extra += argv[i:i + step]
            i += step
        else:
            known.append(tok)
            i += 1
    return known, extra


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = []
    if argv and argv[0] == "sweep":
        argv, pre = _split_sweep_argv(argv)
    args, extra = parser.parse_known_args(argv)
    extra = pre + extra
    try:
        return args.func(args, extra)
    except NoGoError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
