"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import config as cfg
from . import experiments


def _load_document(path: str) -> dict:
    text = Path(path).read_text()
    return cfg.loads(text)


def _fail(code: str, message: str) -> None:
    print(json.dumps({"error": code, "message": message}), file=sys.stderr)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cpnli-sim",
        description="Simulate a reflective common-path nonlinear interferometer "
                    "and its polarization/frequency measurement chain.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment from a config document")
    p_run.add_argument("--config", required=True, help="path to the JSON run configuration")
    p_run.add_argument("--experiment", choices=cfg.EXPERIMENTS, help="override the configured experiment")
    p_run.add_argument("--seed", type=int, help="override the tomography seed")
    p_run.add_argument("--out", default="cpnli-out", help="output directory (default: cpnli-out)")

    p_val = sub.add_parser("validate", help="report configuration violations")
    p_val.add_argument("--config", required=True)

    p_pre = sub.add_parser("presets", help="print the case1/case2 preset configurations")
    p_pre.add_argument("--name", choices=sorted(cfg.preset_configs()), help="print a single preset")

    args = parser.parse_args(argv)

    if args.command == "presets":
        presets = cfg.preset_configs()
        doc = presets[args.name] if args.name else presets
        print(cfg.dumps(doc), end="")
        return 0

    try:
        document = _load_document(args.config)
    except (OSError, json.JSONDecodeError) as exc:
        _fail("CONFIG_UNREADABLE", str(exc))
        return 2

    violations = cfg.validate(document)

    if args.command == "validate":
        print(json.dumps(violations, indent=2))
        return 0 if not violations else 2

    if args.command == "run":
        if args.experiment:
            document["experiment"] = args.experiment
            violations = cfg.validate(document)
        if args.seed is not None:
            document.setdefault("tomography", {})["seed"] = args.seed
            violations = cfg.validate(document)
        if violations:
            _fail("CONFIG_INVALID", "; ".join(violations))
            return 2
        try:
            run_config = cfg.from_dict(document)
            summary = experiments.run(run_config, args.out)
        except Exception as exc:  # surface, but with the documented exit code
            _fail("RUNTIME_ERROR", f"{type(exc).__name__}: {exc}")
            return 3
        print(json.dumps({"out": str(Path(args.out)), "outputs": summary["outputs"] + ["summary.json"]}))
        return 0

    return 2


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
