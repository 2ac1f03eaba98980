"""Regenerate the golden fixtures for the TypeScript client tests.

Uses only the primary package's public surfaces: the CLI for generation,
inspection dumps and the validator verdicts; plain zip editing for the
corrupted variants. Run from the repository root:

    python3 client/scripts/make_fixtures.py
"""

from __future__ import annotations

import json
import shutil
import struct
import zipfile
from pathlib import Path

from qsf.cli import main
from qsf.validate import validate_archive

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
NAMES = ["G_1q_X", "G_1q_X_Z_N2", "G_2q_IX-XI_IZ-ZI_N1-N6"]
SEED = 424242
SIZES = ["--num-ex", "2", "-M", "32", "-K", "8"]


def flip_field_byte(path: Path, entry: str, field: str) -> None:
    with zipfile.ZipFile(path) as zf:
        entries = {i.filename: zf.read(i.filename) for i in zf.infolist()}
    blob = bytearray(entries[entry])
    _magic, _version, manifest_len = struct.unpack_from("<4sIQ", blob, 0)
    manifest = json.loads(blob[16 : 16 + manifest_len].decode())
    fld = next(f for f in manifest["fields"] if f["name"] == field)
    start = 16 + manifest_len + fld["offset"]
    inner = fld["nbytes"] // 2
    blob[start + inner - (inner % 8) + 7] ^= 0x7F
    entries[entry] = bytes(blob)
    _rewrite(path, entries)


def truncate_entry(path: Path, entry: str, cut: int) -> None:
    with zipfile.ZipFile(path) as zf:
        entries = {i.filename: zf.read(i.filename) for i in zf.infolist()}
    entries[entry] = entries[entry][:-cut]
    _rewrite(path, entries)


def _rewrite(path: Path, entries: dict[str, bytes]) -> None:
    with zipfile.ZipFile(path, "w", zipfile.ZIP_DEFLATED) as zf:
        for name, data in entries.items():
            zf.writestr(name, data)


def run() -> None:
    clean = FIXTURES / "clean"
    corrupt = FIXTURES / "corrupt"
    dumps = FIXTURES / "dumps"
    for d in (clean, corrupt, dumps):
        if d.exists():
            shutil.rmtree(d)
        d.mkdir(parents=True)

    for name in NAMES:
        code = main(
            ["generate", name, *SIZES, "--seed", str(SEED), "--out", str(clean)]
        )
        assert code == 0, f"generation failed for {name}"
        code = main(
            [
                "inspect",
                str(clean / f"{name}.zip"),
                "--index",
                "0",
                "--dump",
                str(dumps / f"{name}.json"),
            ]
        )
        assert code == 0, f"dump failed for {name}"
        shutil.copyfile(clean / f"{name}.zip", corrupt / f"{name}.zip")

    flip_field_byte(corrupt / "G_1q_X.zip", "ex_00000.qex", "U0")
    flip_field_byte(corrupt / "G_1q_X_Z_N2.zip", "ex_00000.qex", "E_O")
    truncate_entry(corrupt / "G_2q_IX-XI_IZ-ZI_N1-N6.zip", "ex_00001.qex", 64)

    verdicts = {}
    expected_failures = {
        "corrupt/G_1q_X.zip": "physics/unitarity",
        "corrupt/G_1q_X_Z_N2.zip": "physics/expectation-bounds",
        "corrupt/G_2q_IX-XI_IZ-ZI_N1-N6.zip": "format/container",
    }
    for sub in ("clean", "corrupt"):
        for name in NAMES:
            rel = f"{sub}/{name}.zip"
            report = validate_archive(FIXTURES / rel)
            verdicts[rel] = report.passed
            if rel in expected_failures:
                failing = {c.code for c in report.checks if not c.passed}
                assert expected_failures[rel] in failing, (rel, failing)
    assert all(verdicts[f"clean/{n}.zip"] for n in NAMES)
    assert not any(verdicts[f"corrupt/{n}.zip"] for n in NAMES)
    (FIXTURES / "verdicts.json").write_text(json.dumps(verdicts, indent=2))
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    run()
