"""Command line entry points: generate, validate, and inspect datasets.

Exit codes: 0 success, 1 usage problems, 2 failed validation or broken
generation invariants, 3 I/O trouble. The master seed comes from --seed,
falling back to the QSF_SEED environment variable, then 0.
"""

from __future__ import annotations

import argparse
import base64
import hashlib
import json
import os
import shutil
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields as dataclass_fields
from pathlib import Path
from typing import Optional

import numpy as np

from .datasetio import (
    ContainerError,
    DatasetArchive,
    DatasetConfig,
    DatasetNameError,
    MissingExampleError,
    SCHEMA_FIELDS,
    dataset_name,
    entry_name,
    enumerate_standard,
    package_dataset,
    parse_name,
    write_example,
)
from .noise import NoiseSettings
from .pipeline import generate_example
from .pulses import FilterSettings
from .validate import validate_archive

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_IO = 3

PRESETS = {
    "desk": {"num_ex": 10, "n_steps": 256, "n_realizations": 100},
    "paper": {"num_ex": 10000, "n_steps": 1024, "n_realizations": 2000},
}


def _master_seed(value: Optional[int]) -> int:
    if value is not None:
        return value
    env = os.environ.get("QSF_SEED")
    return int(env) if env else 0


def _settings_from_kv(cls, entries: list[str], label: str):
    """Build a settings dataclass from repeated key=value overrides."""
    allowed = {f.name: f.type for f in dataclass_fields(cls)}
    kwargs = {}
    for entry in entries or []:
        key, sep, value = entry.partition("=")
        if not sep or key not in allowed:
            raise DatasetNameError(
                f"bad {label} override {entry!r}; known keys: {sorted(allowed)}"
            )
        kwargs[key] = int(value) if key == "order" else float(value)
    return cls(**kwargs)


def _worker(args: tuple) -> int:
    cfg, index, seed, nset, fset, staging, record_timing = args
    record = generate_example(
        cfg,
        index,
        seed,
        noise_settings=nset,
        filter_settings=fset,
        record_timing=record_timing,
    )
    write_example(record, Path(staging) / entry_name(index))
    return index


def _package_partial(cfg: DatasetConfig, staging: Path, out: Path, error: str) -> None:
    import zipfile

    from .datasetio import _zip_write, config_to_dict

    done = sorted(staging.glob("ex_*.qex"))
    manifest = {
        "name": dataset_name(cfg),
        "partial": True,
        "error": error,
        "num_examples": len(done),
        "config": config_to_dict(cfg),
    }
    with zipfile.ZipFile(out, "w") as zf:
        _zip_write(zf, "manifest.json", json.dumps(manifest, indent=2).encode())
        for f in done:
            _zip_write(zf, f.name, f.read_bytes())


def _cmd_generate(args: argparse.Namespace) -> int:
    seed = _master_seed(args.seed)
    try:
        nset = _settings_from_kv(NoiseSettings, args.noise_param, "noise")
        fset = _settings_from_kv(FilterSettings, args.filter_param, "filter")
        if args.dataset == "all-52":
            configs = enumerate_standard()
        else:
            configs = [parse_name(args.dataset)]
    except DatasetNameError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    preset = PRESETS[args.preset]
    overrides = dict(preset)
    if args.num_ex is not None:
        overrides["num_ex"] = args.num_ex
    if args.steps is not None:
        overrides["n_steps"] = args.steps
    if args.realizations is not None:
        overrides["n_realizations"] = args.realizations
    configs = [cfg.with_params(**overrides) for cfg in configs]

    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output dir: {exc}", file=sys.stderr)
        return EXIT_IO

    if args.validate_only:
        code = EXIT_OK
        for cfg in configs:
            path = out_dir / f"{dataset_name(cfg)}.zip"
            report = validate_archive(path)
            status = "PASS" if report.passed else "FAIL"
            print(f"{path}: {status}")
            if not report.passed:
                code = EXIT_VALIDATION
        return code

    failures: list[str] = []
    for cfg in configs:
        name = dataset_name(cfg)
        staging = out_dir / f".staging-{name}"
        if staging.exists():
            shutil.rmtree(staging)
        staging.mkdir(parents=True)
        tasks = [
            (cfg, i, seed, nset, fset, str(staging), args.record_timing)
            for i in range(cfg.params.num_ex)
        ]
        try:
            if args.workers > 1:
                with ProcessPoolExecutor(max_workers=args.workers) as pool:
                    list(pool.map(_worker, tasks))
            else:
                for task in tasks:
                    _worker(task)
            archive = package_dataset(
                cfg,
                staging,
                out_path=out_dir / f"{name}.zip",
                extra_meta={"master_seed": seed},
            )
        except (MissingExampleError, ContainerError, ValueError, AssertionError) as exc:
            partial = out_dir / f"{name}.zip.partial"
            _package_partial(cfg, staging, partial, str(exc))
            shutil.rmtree(staging)
            failures.append(f"{name}: {exc} (partial kept at {partial.name})")
            print(f"FAIL {name}: {exc}", file=sys.stderr)
            continue
        shutil.rmtree(staging)
        line = f"ok {name}: {cfg.params.num_ex} examples -> {archive}"
        if not args.no_validate:
            report = validate_archive(archive)
            line += f" [validate: {'PASS' if report.passed else 'FAIL'}]"
            if not report.passed:
                failures.append(f"{name}: post-generation validation failed")
        print(line)
    if failures:
        print(f"{len(failures)} dataset(s) failed:", file=sys.stderr)
        for f in failures:
            print(f"  {f}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    code = EXIT_OK
    reports = []
    for path in args.archives:
        p = Path(path)
        if not p.exists():
            print(f"error: no such archive: {p}", file=sys.stderr)
            return EXIT_IO
        report = validate_archive(p)
        reports.append(report)
        if not report.passed:
            code = EXIT_VALIDATION
        if not args.json:
            print(f"{p}: {'PASS' if report.passed else 'FAIL'}")
            for check in report.checks:
                if not check.passed:
                    print(f"  FAIL {check.code}: {check.detail}")
    if args.json:
        print(json.dumps([r.to_dict() for r in reports], indent=2))
    return code


def _field_dump(arr: np.ndarray) -> dict:
    code = "c128" if np.issubdtype(arr.dtype, np.complexfloating) else "f64"
    raw = np.ascontiguousarray(
        arr, dtype="<c16" if code == "c128" else "<f8"
    ).tobytes()
    return {
        "dtype": code,
        "shape": list(arr.shape),
        "sha256": hashlib.sha256(raw).hexdigest(),
        "data_b64": base64.b64encode(raw).decode(),
    }


def _cmd_inspect(args: argparse.Namespace) -> int:
    path = Path(args.archive)
    if not path.exists():
        print(f"error: no such archive: {path}", file=sys.stderr)
        return EXIT_IO
    try:
        archive = DatasetArchive(path)
    except (ContainerError, OSError) as exc:
        print(f"error: cannot open archive: {exc}", file=sys.stderr)
        return EXIT_IO
    with archive:
        if not 0 <= args.index < archive.num_examples:
            print(
                f"error: index {args.index} out of range "
                f"(archive holds {archive.num_examples})",
                file=sys.stderr,
            )
            return EXIT_USAGE
        try:
            rec = archive.read(args.index)
        except ContainerError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_VALIDATION

        meta = rec.simulation_parameters
        print(f"dataset : {meta.get('name', archive.manifest.get('name', '?'))}")
        print(f"example : {args.index} of {archive.num_examples}")
        print(
            "system  : dim={dim} T={T} M={M} K={K} pulses={num_pulses} "
            "shape={pulse_shape} distortion={distortion}".format(**meta)
        )
        arrays = rec.arrays()
        print("fields  :")
        for key in SCHEMA_FIELDS:
            if key == "simulation_parameters":
                n_keys = len(meta)
                print(f"  {key:<18} dict[{n_keys} keys + operator arrays]")
                continue
            arr = arrays[key]
            code = "c128" if np.issubdtype(arr.dtype, np.complexfloating) else "f64"
            print(f"  {key:<18} {code}{list(arr.shape)}")
        print("pulse parameters (amplitude, position, width) per channel:")
        for c, channel in enumerate(rec.pulse_parameters):
            rows = ", ".join(
                f"({a:+.4g}, {b:.6g}, {w:.4g})" for a, b, w in channel
            )
            print(f"  ch{c}: {rows}")
        e = rec.e_o
        print(
            f"E_O     : min={e.min():+.6f} max={e.max():+.6f} "
            f"mean={e.mean():+.6f} count={e.size}"
        )
        d = rec.vo_operator.shape[-1]
        eye = np.eye(d)
        defects = np.linalg.norm(
            rec.vo_operator.reshape(-1, d, d) - eye, axis=(1, 2)
        )
        print("||V_O - I||_F per observable:")
        for i, val in enumerate(defects):
            print(f"  obs[{i:02d}]: {val:.3e}")

        if args.dump:
            payload = {
                "meta": meta,
                "elapsed_time": rec.elapsed_time,
                "fields": {key: _field_dump(arr) for key, arr in arrays.items()},
            }
            text = json.dumps(payload, sort_keys=True, indent=1)
            if args.dump == "-":
                print(text)
            else:
                Path(args.dump).write_text(text)
                print(f"dump    : {args.dump}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsf",
        description="Monte Carlo qubit dynamics dataset factory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate one dataset or all 52")
    gen.add_argument("dataset", help="dataset name or 'all-52'")
    gen.add_argument("--num-ex", type=int, default=None)
    gen.add_argument("--steps", "-M", "--M", dest="steps", type=int, default=None)
    gen.add_argument(
        "--realizations", "-K", "--K", dest="realizations", type=int, default=None
    )
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--out", default="qdata")
    gen.add_argument("--workers", type=int, default=1)
    gen.add_argument("--preset", choices=sorted(PRESETS), default="desk")
    gen.add_argument("--noise-param", action="append", metavar="KEY=VALUE")
    gen.add_argument("--filter-param", action="append", metavar="KEY=VALUE")
    gen.add_argument("--record-timing", action="store_true")
    gen.add_argument("--no-validate", action="store_true")
    gen.add_argument("--validate-only", action="store_true")
    gen.set_defaults(func=_cmd_generate)

    val = sub.add_parser("validate", help="re-check archives")
    val.add_argument("archives", nargs="+")
    val.add_argument("--json", action="store_true")
    val.set_defaults(func=_cmd_validate)

    ins = sub.add_parser("inspect", help="summarize one example")
    ins.add_argument("archive")
    ins.add_argument("--index", type=int, default=0)
    ins.add_argument("--dump", metavar="PATH", help="write a bit-exact JSON dump ('-' for stdout)")
    ins.set_defaults(func=_cmd_inspect)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
