"""Command-line front door: validate a JSON config, dispatch one experiment.

Exit codes: 0 all checks passed; 1 checks ran and some failed (the manifest
says which); 2 invalid config (schema violation, unknown experiment or
parameter key, nonpositive tolerance, model kind mismatch); 3 runtime error
inside a runner.

The config is a single JSON document; there is no flags-only mode because
experiments carry too many parameters for a command line and files are what
make reruns reproducible.  ``model.params``, ``parameters`` and
``tolerances`` all merge into the experiment's defaults (later sections
win), and every key must exist in those defaults.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import jsonschema

from .fpkstudy import EXPERIMENTS, ExperimentSuite, list_experiments, resolve_params, run_suite

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["experiment", "output"],
    "properties": {
        "model": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["sde", "mehler", "control", "kernel"]},
                "params": {"type": "object"},
            },
        },
        "experiment": {"enum": list(EXPERIMENTS)},
        "parameters": {"type": "object"},
        "output": {"type": "string", "minLength": 1},
        "master_seed": {"type": "integer", "minimum": 0},
        "tolerances": {
            "type": "object",
            "additionalProperties": {"type": "number", "exclusiveMinimum": 0},
        },
    },
}

# what run_suite emits; every run re-validates its own manifest against this
MANIFEST_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["suite", "git-describe", "seed", "experiments"],
    "properties": {
        "suite": {"type": "string"},
        "git-describe": {"type": "string"},
        "seed": {"type": "integer"},
        "experiments": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "params", "metrics", "pass"],
                "properties": {
                    "name": {"type": "string"},
                    "params": {"type": "object"},
                    "metrics": {"type": "object"},
                    "pass": {"type": "boolean"},
                    "error": {"type": "string"},
                },
            },
        },
    },
}


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _run(config_path: str) -> int:
    try:
        raw = Path(config_path).read_text()
    except OSError as e:
        return _fail(2, f"cannot read config: {e}")
    try:
        config = json.loads(raw)
    except json.JSONDecodeError as e:
        return _fail(2, f"config is not valid JSON: {e}")
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        return _fail(2, f"config rejected: {e.message}")

    name = config["experiment"]
    model = config.get("model")
    if model is not None and model["kind"] != EXPERIMENTS[name].model_kind:
        return _fail(
            2,
            f"experiment {name!r} expects model kind {EXPERIMENTS[name].model_kind!r}, "
            f"config says {model['kind']!r}",
        )
    overrides = {}
    if model is not None:
        overrides.update(model.get("params", {}))
    overrides.update(config.get("parameters", {}))
    overrides.update(config.get("tolerances", {}))
    try:
        resolve_params(name, overrides)
    except ValueError as e:
        return _fail(2, str(e))

    suite = ExperimentSuite(
        name=name,
        out_dir=config["output"],
        master_seed=int(config.get("master_seed", 0)),
        experiments=((name, overrides),),
    )
    manifest = run_suite(suite)
    try:
        jsonschema.validate(manifest, MANIFEST_SCHEMA)
    except jsonschema.ValidationError as e:
        return _fail(3, f"emitted manifest failed re-validation: {e.message}")

    record = manifest["experiments"][0]
    out = Path(suite.out_dir) / "manifest.json"
    if "error" in record:
        print(f"{name}: runtime error ({record['error']}); manifest at {out}", file=sys.stderr)
        return 3
    verdict = "pass" if record["pass"] else "FAIL"
    print(f"{name}: {verdict}; manifest at {out}")
    return 0 if record["pass"] else 1


def _list() -> int:
    for name, description in list_experiments():
        print(f"{name:22s} {description}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="markovlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="validate a config and run its experiment")
    run_p.add_argument("--config", required=True, help="path to a JSON experiment config")
    sub.add_parser("list", help="print the experiment registry")
    args = parser.parse_args(argv)
    if args.command == "list":
        return _list()
    return _run(args.config)


if __name__ == "__main__":
    sys.exit(main())
