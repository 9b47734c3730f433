"""Command-line experiment runner.

    trotter-oracle run <config.json> [--jobs N] [--output DIR]
    trotter-oracle describe <experiment>
    trotter-oracle gen-hamiltonian --n N --l L --seed S --out FILE
    trotter-oracle verify <manifest.json>

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import hashlib
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .dynamics import NonUnitaryError
from .experiments import CATALOG, ConfigError, describe, resolve_config
from .hamiltonians import HamiltonianFileError, random_pauli_hamiltonian, save_hamiltonian

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
MANIFEST_NAME = "manifest.json"


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return "%.17g" % v
    if hasattr(v, "item"):  # numpy scalar
        return format_value(v.item())
    return str(v)


def render_csv(columns: list[str], rows: list[list]) -> bytes:
    buf = io.StringIO(newline="")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        if len(row) != len(columns):
            raise RuntimeError(f"row width {len(row)} does not match {len(columns)} columns")
        buf.write(",".join(format_value(v) for v in row) + "\n")
    return buf.getvalue().encode("utf-8")


def _execute(args: tuple[dict, dict]) -> list[list]:
    config, task = args
    return CATALOG[config["experiment"]].run_task(config, task)


def load_config_file(path: str | Path) -> dict:
    """Read a config, or the resolved config stored in a run manifest."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if isinstance(raw, dict) and "resolved_config" in raw and "tool_version" in raw:
        return raw["resolved_config"]
    return raw


def run_experiment(raw: dict, output: str | Path | None = None, jobs: int = 1) -> Path:
    """Run a config end to end; returns the manifest path."""
    config = resolve_config(raw)
    if output is not None:
        config["output_dir"] = str(output)
    exp = CATALOG[config["experiment"]]
    tasks = exp.expand(config)
    started = time.perf_counter()
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_execute, [(config, t) for t in tasks]))
    else:
        chunks = [_execute((config, t)) for t in tasks]
    elapsed = time.perf_counter() - started
    rows = [row for chunk in chunks for row in chunk]

    out_dir = Path(config["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_name = f"{exp.name}.csv"
    data = render_csv(exp.columns, rows)
    (out_dir / csv_name).write_bytes(data)
    manifest = {
        "tool_version": __version__,
        "experiment": exp.name,
        "resolved_config": config,
        "tasks": tasks,
        "wall_clock_seconds": elapsed,
        "outputs": {csv_name: {"sha256": hashlib.sha256(data).hexdigest(), "rows": len(rows),
                               "columns": exp.columns}},
    }
    path = out_dir / MANIFEST_NAME
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def verify_manifest(path: str | Path, output: str | Path, jobs: int = 1) -> list[str]:
    """Re-run a manifest into ``output``; returns the names of outputs whose digest changed."""
    original = json.loads(Path(path).read_text(encoding="utf-8"))
    new = json.loads(run_experiment(original["resolved_config"], output, jobs).read_text(encoding="utf-8"))
    return [name for name, meta in original["outputs"].items()
            if new["outputs"].get(name, {}).get("sha256") != meta["sha256"]]


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="trotter-oracle", description="Trotter-error experiments.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config (or re-run a manifest)")
    run.add_argument("config")
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--output", default=None, help="output directory (overrides output_dir)")

    desc = sub.add_parser("describe", help="print config keys, defaults and output columns")
    desc.add_argument("experiment")

    gen = sub.add_parser("gen-hamiltonian", help="write a random Pauli Hamiltonian as JSON")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--l", type=int, default=None, help="number of terms (default N^2)")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    ver = sub.add_parser("verify", help="re-run a manifest and compare output digests")
    ver.add_argument("manifest")
    ver.add_argument("--output", required=True)
    ver.add_argument("--jobs", type=int, default=1)
    return ap


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "describe":
            if args.experiment not in CATALOG:
                return _fail(EXIT_CONFIG, f"unknown experiment {args.experiment!r}; choose from {sorted(CATALOG)}")
            sys.stdout.write(describe(args.experiment))
            return EXIT_OK
        if args.command == "gen-hamiltonian":
            if args.n < 1:
                return _fail(EXIT_CONFIG, "--n must be positive")
            try:
                h = random_pauli_hamiltonian(args.n, args.l, args.seed)
            except ValueError as exc:
                return _fail(EXIT_CONFIG, str(exc))
            save_hamiltonian(h, args.out, {"generator": "random_pauli", "n": args.n, "l": len(h), "seed": args.seed})
            return EXIT_OK
        if args.jobs < 1:
            return _fail(EXIT_CONFIG, "--jobs must be >= 1")
        if args.command == "verify":
            changed = verify_manifest(args.manifest, args.output, args.jobs)
            if changed:
                return _fail(EXIT_NUMERIC, f"digest mismatch for {', '.join(changed)}")
            print("all output digests match")
            return EXIT_OK
        manifest = run_experiment(load_config_file(args.config), args.output, args.jobs)
        print(manifest)
        return EXIT_OK
    except (ConfigError, HamiltonianFileError) as exc:
        return _fail(EXIT_CONFIG, str(exc))
    except (ArithmeticError, NonUnitaryError, FloatingPointError) as exc:
        return _fail(EXIT_NUMERIC, f"numerical failure: {exc}")
    except OSError as exc:
        return _fail(EXIT_IO, f"I/O failure: {exc}")


if __name__ == "__main__":
    sys.exit(main())
