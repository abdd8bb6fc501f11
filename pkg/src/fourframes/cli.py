"""Command line front end: ``fourframes list`` and ``fourframes verify``.

Exit codes: 0 all selected checks pass, 1 some check fails, 2 configuration error,
3 evaluation error (the message carries the offending chart points).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

from . import models as M
from . import verify as V

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_EVAL = 0, 1, 2, 3
DEFAULT_SAMPLES = 200
DEFAULT_SEED = 42
SEED_ENV = "FOURFRAMES_SEED"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    model: str
    params: dict = field(default_factory=dict)
    checks: str = "all"
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    tol: object = None
    format: str = "text"
    output: str | None = None
    timestamp: bool = False


def parse_params(text):
    """``"a=1,b=0"`` -> ``{"a": "1", "b": "0"}`` (values are coerced by the model)."""
    if isinstance(text, dict):
        return {str(k): v for k, v in text.items()}
    out = {}
    for item in (p.strip() for p in (text or "").split(",")):
        if not item:
            continue
        key, sep, val = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"bad parameter {item!r}; expected name=value")
        if key.strip() in out:
            raise ConfigError(f"parameter {key.strip()} given twice")
        out[key.strip()] = val.strip()
    return out


def parse_tol(text):
    """A single number (all checks) or ``id=value`` pairs."""
    if text is None or isinstance(text, (int, float, dict)):
        return text
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        pass
    out = {}
    for key, val in parse_params(text).items():
        try:
            out[key] = float(val)
        except ValueError:
            raise ConfigError(f"tolerance for {key} is not a number: {val!r}") from None
    return out


def _int(value, name):
    try:
        out = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be an integer, got {value!r}") from None
    if isinstance(value, float) and value != out:
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    return out


MANIFEST_KEYS = {"model", "params", "checks", "samples", "seed", "tol", "format", "output", "timestamp"}


def load_manifest(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read manifest {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"manifest {path} is not valid JSON: {e}") from None
    if not isinstance(data, dict):
        raise ConfigError("manifest must be a JSON object")
    extra = set(data) - MANIFEST_KEYS
    if extra:
        raise ConfigError(f"unknown manifest key(s): {', '.join(sorted(extra))}")
    return data


def build_config(args, environ=None):
    """Merge flags, the optional manifest and ``FOURFRAMES_SEED``; flags win."""
    environ = os.environ if environ is None else environ
    man = load_manifest(args.manifest) if args.manifest else {}

    def pick(name):
        val = getattr(args, name)
        return val if val is not None else man.get(name)

    model = pick("model")
    if not model:
        raise ConfigError("no model given (use --model or a manifest)")
    seed = pick("seed")
    if seed is None and environ.get(SEED_ENV):
        seed = environ[SEED_ENV]
    samples = pick("samples")
    fmt = pick("format") or "text"
    if fmt not in ("json", "text"):
        raise ConfigError(f"format must be json or text, got {fmt!r}")
    cfg = RunConfig(
        model=model,
        params=parse_params(pick("params")),
        checks=pick("checks") or "all",
        samples=DEFAULT_SAMPLES if samples is None else _int(samples, "samples"),
        seed=DEFAULT_SEED if seed is None else _int(seed, "seed"),
        tol=parse_tol(pick("tol")),
        format=fmt,
        output=pick("output"),
        timestamp=bool(args.timestamp or man.get("timestamp", False)),
    )
    if cfg.samples < 1:
        raise ConfigError("samples must be at least 1")
    return cfg


def cmd_verify(cfg, out=None, err=None):
    """Run a verification; returns ``(exit status, report or None)``."""
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        inst = M.build(cfg.model, cfg.params)
        checks = V.select(inst, cfg.checks)
        V.resolve_tolerances(cfg.tol, checks)
    except (M.ModelError, V.CheckConfigError, ConfigError) as e:
        print(f"error: {e}", file=err)
        return EXIT_CONFIG, None
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds") if cfg.timestamp else None
    try:
        report = V.run_checks(inst, checks, cfg.samples, cfg.seed, cfg.tol, timestamp=stamp)
    except V.EvaluationError as e:
        print(f"evaluation error: {e}", file=err)
        return EXIT_EVAL, None
    text = report.to_json() if cfg.format == "json" else report.to_text()
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    return (EXIT_OK if report.passed else EXIT_FAIL), report


def _param_line(name, default, choices):
    if choices is None:
        return f"    {name} (number, default {default:g})"
    return f"    {name} ({' | '.join(choices)}, default {default})"


def cmd_list(model=None, out=None):
    """Print the model registry and the check registry with anchors."""
    out = out or sys.stdout
    ids = M.MODEL_IDS if model is None else (model,)
    if model is not None and model not in M.PARAM_SPECS:
        raise ConfigError(f"unknown model {model!r}; choose from {', '.join(M.MODEL_IDS)}")
    lines = ["models:"]
    for mid in ids:
        lines.append(f"  {mid}")
        for name, (default, choices) in M.PARAM_SPECS[mid].items():
            lines.append(_param_line(name, default, choices))
        lines.append(f"    variants: {M.VARIANT_NOTES[mid]}")
    if model is None:
        checks = V.registry()
        lines.append(f"checks ({len(checks)}):")
    else:
        checks = V.applicable(M.build(model, {}))
        lines.append(f"checks applicable with default parameters ({len(checks)}):")
    for c in checks:
        extra = f" [{c.kind}]" if c.kind != "identity" else ""
        alias = f" (alias {', '.join(c.aliases)})" if c.aliases else ""
        lines.append(f"  {c.id}{alias}{extra}  tol {c.default_tol:.0e}  needs {{{', '.join(sorted(c.requires))}}}")
        lines.append(f"      {c.anchor}")
        if c.negative_control:
            lines.append(f"      negative control: {c.negative_control}")
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def make_parser():
    p = argparse.ArgumentParser(
        prog="fourframes",
        description="Build 4-dimensional model geometries and verify curvature identities at sampled points.",
        epilog=f"Exit codes: 0 pass, 1 check failure, 2 configuration error, 3 evaluation error. "
        f"{SEED_ENV} sets the default seed (--seed wins).",
    )
    sub = p.add_subparsers(dest="command", required=True)

    pl = sub.add_parser("list", help="list models, their parameters and the check registry")
    pl.add_argument("--model", help="show only this model and the checks that apply to it")

    pv = sub.add_parser("verify", help="run checks on a model and print a report")
    pv.add_argument("--model", help=f"model id: {', '.join(M.MODEL_IDS)}")
    pv.add_argument("--params", help="model parameters as name=value[,name=value...]")
    pv.add_argument("--checks", help='"all" (default), a glob such as "frame_*", or a comma-separated list')
    pv.add_argument("--samples", help=f"number of sample points (default {DEFAULT_SAMPLES})")
    pv.add_argument("--seed", help=f"sampling seed (default {DEFAULT_SEED}, or ${SEED_ENV})")
    pv.add_argument("--tol", help="tolerance for every check, or id=value[,id=value...] overrides")
    pv.add_argument("--format", choices=("json", "text"), help="report format (default text)")
    pv.add_argument("--output", help="write the report to this file instead of stdout")
    pv.add_argument("--manifest", help="JSON run configuration; flags given on the command line win")
    pv.add_argument("--timestamp", action="store_true", default=None, help="include a UTC timestamp in the report")
    return p


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        if args.command == "list":
            return cmd_list(args.model)
        cfg = build_config(args)
    except (ConfigError, M.ModelError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    status, _ = cmd_verify(cfg)
    return status


if __name__ == "__main__":
    sys.exit(main())
