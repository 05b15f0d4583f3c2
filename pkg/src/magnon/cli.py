"""magnonctl: encode | figure | check | sweep.

Configuration is a JSON document (schema: ``CONFIG_SCHEMA``). Command-line
flags override config fields; unset fields fall back to the figure preset.
The default output root comes from ``$MAGNONCTL_OUT`` (else ``./runs``).

Exit codes: 0 pass, 1 check failure, 2 config error, 3 runtime alarm.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import jsonschema

from . import experiments as ex
from .analysis import export_run, write_manifest
from .chain import InvariantAlarm, save_snapshot
from .encoder import EncodingSubspace, coefficients, diffusion_eigenvalue, max_diffusion_state

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_ALARM = 0, 1, 2, 3
OUT_ENV = "MAGNONCTL_OUT"

_num = {"type": "number"}
_int = {"type": "integer"}
CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "chain": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"N": {"type": "integer", "minimum": 2}, "J": _num, "T0": _num, "n0": _int, "B": _num},
        },
        "encoder": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"m0": _int, "offsets": {"type": "array", "items": _int, "minItems": 1}},
        },
        "timeline": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "t1": _num,
                "t2": _num,
                "C": _num,
                "M": {"type": "integer", "minimum": 1},
                "kicks": {"type": "integer", "minimum": 1},
                "captures": {"type": "array", "items": _int},
                "convention": {"enum": ["kick-then-free", "symmetric-half-step"]},
            },
        },
        "check": {"type": "object"},
        "output": {"type": "string"},
        "format": {"enum": ["csv", "json"]},
    },
}

SWEEP_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["runs"],
    "properties": {
        "workers": {"type": "integer", "minimum": 1},
        "runs": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["command"],
                "properties": {
                    "command": {"enum": ["encode", "figure", "check"]},
                    "which": {"type": "string"},
                    "config": CONFIG_SCHEMA,
                },
            },
        },
    },
}


class ConfigError(ValueError):
    pass


def load_config(path: str | None, schema=CONFIG_SCHEMA) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    validate(doc, schema)
    return doc


def validate(doc: dict, schema=CONFIG_SCHEMA):
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from exc


def figure_params(which: str, config: dict) -> ex.FigureParams:
    """Preset for ``which`` with config fields applied on top."""
    base = ex.PRESETS.get(which, ex.FigureParams())
    chain = config.get("chain", {})
    changes = {}
    for key in ("N", "J", "n0"):
        if key in chain:
            changes[key] = chain[key]
    J = chain.get("J", base.J)
    if "T0" in chain:
        changes["kick_strength"] = 2 * J * chain["T0"]
    enc = config.get("encoder", {})
    if "m0" in enc:
        changes["m0"] = enc["m0"]
    if "offsets" in enc:
        changes["offsets"] = tuple(enc["offsets"])
    for key, val in config.get("timeline", {}).items():
        if key == "convention":
            continue
        changes[key] = tuple(val) if key == "captures" else val
    try:
        params = replace(base, **changes)
        _ = (params.chain, params.subspace)  # validate eagerly
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return params


def out_dir(config: dict, flag: str | None, default_name: str) -> Path:
    if flag:
        return Path(flag)
    if "output" in config:
        return Path(config["output"])
    return Path(os.environ.get(OUT_ENV, "runs")) / default_name


def _hash(doc: dict) -> str:
    body = {k: v for k, v in doc.items() if k not in ("meta", "content_sha256")}
    return hashlib.sha256(json.dumps(body, sort_keys=True, default=float).encode()).hexdigest()


def _finish_manifest(path: Path):
    doc = json.loads(path.read_text())
    doc["content_sha256"] = _hash(doc)
    doc["meta"] = {"created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# -- commands ----------------------------------------------------------------

def cmd_encode(config: dict, out: Path, fmt: str = "csv") -> int:
    enc = config.get("encoder", {})
    chain = config.get("chain", {})
    try:
        sub = EncodingSubspace(
            enc.get("m0", 101), chain.get("N", 201), tuple(enc.get("offsets", (-4, -2, 0, 2, 4)))
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    state = max_diffusion_state(sub)
    beta = coefficients(state, sub)
    out.mkdir(parents=True, exist_ok=True)
    save_snapshot(state, out / "encoder_state.json")
    if fmt == "csv":
        lines = ["offset,site,beta"] + [f"{o},{sub.m0 + o},{b:.17e}" for o, b in beta.items()]
        (out / "beta.csv").write_text("\n".join(lines) + "\n")
    manifest = {
        "command": "encode",
        "chain": {"N": sub.N},
        "encoder": {"m0": sub.m0, "offsets": list(sub.offsets)},
        "beta": {str(o): b for o, b in beta.items()},
        "diffusion_eigenvalue": diffusion_eigenvalue(sub),
        "snapshot": "encoder_state.json",
    }
    write_manifest(manifest, out / "manifest.json")
    _finish_manifest(out / "manifest.json")
    for o, b in beta.items():
        print(f"beta[{o:+d}] = {b:.4f}   (site {sub.m0 + o})")
    return EXIT_OK


def cmd_figure(which: str, config: dict, out: Path, fmt: str = "csv") -> int:
    params = figure_params(which, config)
    convention = config.get("timeline", {}).get("convention", "kick-then-free")
    if which == "3":
        run = ex.figure_3(params, convention=convention)
    else:
        run = ex.run_figure(which, params)
    extra = {"figure": which, "parameters": params.to_dict(), "metrics": run.metrics}
    export_run(run.record, out, fmt, extra)
    _finish_manifest(out / "manifest.json")
    print(json.dumps({"figure": which, "out": str(out), "metrics": _headline(run)}, default=float))
    if which == "3" and run.metrics["restoration_infidelity"] > 1e-12:
        raise InvariantAlarm(
            f"restoration infidelity {run.metrics['restoration_infidelity']:.3e} exceeds 1e-12"
        )
    return EXIT_OK


def _headline(run) -> dict:
    return {k: v for k, v in run.metrics.items() if k != "centroids"}


def cmd_check(which: str, config: dict) -> int:
    if which not in ex.CHECKS:
        raise ConfigError(f"unknown check {which!r}; choose from {sorted(ex.CHECKS)}")
    try:
        verdict = ex.CHECKS[which](**config.get("check", {}))
    except TypeError as exc:
        raise ConfigError(f"bad check parameters: {exc}") from exc
    print(json.dumps(verdict, sort_keys=True, default=float))
    return EXIT_OK if verdict["passed"] else EXIT_CHECK


def _run_one(job: tuple[int, dict, str]) -> tuple[int, int]:
    i, run, root = job
    which = run.get("which", "")
    out = Path(root) / f"run_{i:03d}_{run['command']}{'_' + which if which else ''}"
    cfg = run.get("config", {})
    fmt = cfg.get("format", "csv")
    return i, _dispatch(run["command"], which, cfg, out, fmt)


def cmd_sweep(sweep: dict, root: Path, workers: int | None = None) -> int:
    jobs = [(i, run, str(root)) for i, run in enumerate(sweep["runs"])]
    workers = workers or sweep.get("workers", 1)
    root.mkdir(parents=True, exist_ok=True)
    if workers == 1:
        results = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    codes = dict(results)
    (root / "sweep.json").write_text(json.dumps({str(i): c for i, c in sorted(codes.items())}, indent=2) + "\n")
    return max(codes.values(), default=EXIT_OK)


def _dispatch(command: str, which: str, config: dict, out: Path, fmt: str) -> int:
    try:
        if command == "encode":
            return cmd_encode(config, out, fmt)
        if command == "figure":
            return cmd_figure(which, config, out, fmt)
        return cmd_check(which, config)
    except ConfigError as exc:
        print(f"magnonctl: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantAlarm as exc:
        print(f"magnonctl: runtime alarm: {exc}", file=sys.stderr)
        return EXIT_ALARM


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="magnonctl", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output directory (overrides config 'output')")
        p.add_argument("--format", choices=["csv", "json"], help="profile output format")

    p = sub.add_parser("encode", help="write the max-diffusion encoding state")
    common(p)
    p.add_argument("--m0", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--offsets", type=int, nargs="+")

    p = sub.add_parser("figure", help="reproduce a figure run")
    p.add_argument("which", choices=sorted(ex.PRESETS))
    common(p)

    p = sub.add_parser("check", help="run an identity or oracle check")
    p.add_argument("which", choices=sorted(ex.CHECKS))
    common(p)

    p = sub.add_parser("sweep", help="run several configs concurrently")
    common(p)
    p.add_argument("--workers", type=int)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sweep":
            if not args.config:
                raise ConfigError("sweep needs --config")
            sweep = load_config(args.config, SWEEP_SCHEMA)
            root = Path(args.out) if args.out else Path(os.environ.get(OUT_ENV, "runs")) / "sweep"
            return cmd_sweep(sweep, root, args.workers)
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"magnonctl: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "encode":
        for key, val in (("m0", args.m0), ("offsets", args.offsets)):
            if val is not None:
                config.setdefault("encoder", {})[key] = val
        if args.N is not None:
            config.setdefault("chain", {})["N"] = args.N
    fmt = args.format or config.get("format", "csv")
    which = getattr(args, "which", "")
    name = f"{args.command}_{which}" if which else args.command
    return _dispatch(args.command, which, config, out_dir(config, args.out, name), fmt)


if __name__ == "__main__":
    sys.exit(main())
