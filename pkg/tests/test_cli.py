import json
import struct
import zipfile
from pathlib import Path

import numpy as np
import pytest

from qsf.cli import EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, main
from qsf.datasetio import entry_name, read_example
from qsf.pipeline import example_seed, generate_example
from qsf.datasetio import parse_name
from qsf.validate import validate_archive


def run(args):
    return main(args)


def gen(tmp_path, name="G_1q_X_Z_N1", extra=(), m=16, k=4, num_ex=2, seed=7):
    out = tmp_path / "data"
    code = run(
        [
            "generate",
            name,
            "--num-ex",
            str(num_ex),
            "-M",
            str(m),
            "-K",
            str(k),
            "--seed",
            str(seed),
            "--out",
            str(out),
            *extra,
        ]
    )
    return code, out / f"{name}.zip"


def test_generate_single_dataset_repeatable(tmp_path):
    code1, path1 = gen(tmp_path / "a", num_ex=3)
    code2, path2 = gen(tmp_path / "b", num_ex=3)
    assert code1 == EXIT_OK and code2 == EXIT_OK
    assert path1.read_bytes() == path2.read_bytes()


def test_worker_count_does_not_change_bytes(tmp_path):
    code1, path1 = gen(tmp_path / "w1")
    code2, path2 = gen(tmp_path / "w2", extra=["--workers", "2"])
    assert code1 == code2 == EXIT_OK
    assert path1.read_bytes() == path2.read_bytes()


def test_generate_rejects_bad_name(tmp_path):
    code = run(["generate", "NOT_A_NAME", "--out", str(tmp_path)])
    assert code == EXIT_USAGE


def test_generate_usage_error_exit_code():
    assert run(["generate"]) == EXIT_USAGE
    assert run(["frobnicate"]) == EXIT_USAGE
    assert run(["--help"]) == EXIT_OK


def test_seed_env_fallback(tmp_path, monkeypatch):
    out1 = tmp_path / "a"
    monkeypatch.setenv("QSF_SEED", "7")
    code = run(
        ["generate", "G_1q_X", "--num-ex", "1", "-M", "16", "-K", "2",
         "--out", str(out1)]
    )
    assert code == EXIT_OK
    monkeypatch.delenv("QSF_SEED")
    _, path2 = gen(tmp_path / "b", name="G_1q_X", m=16, k=2, num_ex=1, seed=7)
    assert (out1 / "G_1q_X.zip").read_bytes() == path2.read_bytes()


def test_generated_archive_validates(tmp_path):
    code, path = gen(tmp_path)
    assert code == EXIT_OK
    report = validate_archive(path)
    assert report.passed, [c.to_dict() for c in report.checks if not c.passed]
    assert run(["validate", str(path)]) == EXIT_OK


def test_validate_json_output(tmp_path, capsys):
    _, path = gen(tmp_path, name="G_1q_XY", m=16, k=2)
    capsys.readouterr()
    code = run(["validate", str(path), "--json"])
    assert code == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload[0]["passed"] is True
    codes = {c["code"] for c in payload[0]["checks"]}
    assert "physics/noiseless-identity" in codes
    assert "physics/distortion-passthrough" in codes


def test_validate_missing_file_is_io_error(tmp_path):
    assert run(["validate", str(tmp_path / "nope.zip")]) == EXIT_IO


def _flip_byte_in_field(path: Path, index: int, field: str) -> None:
    """Corrupt one payload byte of a named field inside one zip entry."""
    with zipfile.ZipFile(path) as zf:
        entries = {info.filename: zf.read(info.filename) for info in zf.infolist()}
    blob = bytearray(entries[entry_name(index)])
    magic, version, manifest_len = struct.unpack_from("<4sIQ", blob, 0)
    manifest = json.loads(blob[16 : 16 + manifest_len].decode())
    fld = next(f for f in manifest["fields"] if f["name"] == field)
    field_start = 16 + manifest_len + fld["offset"]
    inner = fld["nbytes"] // 2
    # hit a float's top byte (offset 7 within the 8-byte word) so the
    # exponent changes drastically
    target = field_start + inner - (inner % 8) + 7
    blob[target] ^= 0x7F
    entries[entry_name(index)] = bytes(blob)
    with zipfile.ZipFile(path, "w") as zf:
        for name, data in entries.items():
            zf.writestr(name, data)


def test_corrupted_u0_fails_unitarity_check(tmp_path):
    _, path = gen(tmp_path, num_ex=1)
    _flip_byte_in_field(path, 0, "U0")
    report = validate_archive(path)
    assert not report.passed
    failing = {c.code for c in report.checks if not c.passed}
    assert "physics/unitarity" in failing
    assert run(["validate", str(path)]) == EXIT_VALIDATION


def test_corrupted_expectations_fail_bounds_check(tmp_path):
    _, path = gen(tmp_path, num_ex=1)
    _flip_byte_in_field(path, 0, "E_O")
    report = validate_archive(path)
    failing = {c.code for c in report.checks if not c.passed}
    assert "physics/expectation-bounds" in failing


def test_explicit_n0_archive_checks_identity(tmp_path):
    code, path = gen(tmp_path, name="G_1q_X_Z_N0", m=16, k=3, num_ex=1)
    assert code == EXIT_OK
    report = validate_archive(path)
    assert report.passed
    assert any(
        c.code == "physics/noiseless-identity" and c.passed for c in report.checks
    )


def test_inspect_summary(tmp_path, capsys):
    _, path = gen(tmp_path, name="G_1q_X", m=16, k=2, num_ex=2)
    capsys.readouterr()
    assert run(["inspect", str(path), "--index", "0"]) == EXIT_OK
    out = capsys.readouterr().out
    # all 14 schema fields are listed
    for field in (
        "simulation_parameters",
        "pulse_parameters",
        "time_range",
        "pulses",
        "distorted_pulses",
        "expectations",
        "V_O_operator",
        "noise",
        "H0",
        "H1",
        "U0",
        "U_I",
        "V_O",
        "E_O",
    ):
        assert field in out
    # noiseless: reported defects are tiny
    defects = [
        float(line.split(":")[1]) for line in out.splitlines() if "obs[" in line
    ]
    assert defects and max(defects) < 1e-9


def test_inspect_two_qubit_counts(tmp_path, capsys):
    _, path = gen(
        tmp_path, name="G_2q_IX-XI_IZ-ZI_N1-N6", m=16, k=2, num_ex=1
    )
    capsys.readouterr()
    assert run(["inspect", str(path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "count=540" in out
    assert "E_O                f64[540]" in out


def test_inspect_out_of_range_index(tmp_path, capsys):
    _, path = gen(tmp_path, name="G_1q_X", m=16, k=2, num_ex=1)
    assert run(["inspect", str(path), "--index", "5"]) == EXIT_USAGE
    assert run(["inspect", str(tmp_path / "ghost.zip")]) == EXIT_IO


def test_inspect_dump_is_bit_exact(tmp_path, capsys):
    _, path = gen(tmp_path, name="G_1q_X_Z_N2", m=16, k=3, num_ex=1, seed=21)
    dump_path = tmp_path / "dump.json"
    assert run(["inspect", str(path), "--dump", str(dump_path)]) == EXIT_OK
    payload = json.loads(dump_path.read_text())
    import base64
    import hashlib

    cfg = parse_name("G_1q_X_Z_N2").with_params(
        n_steps=16, n_realizations=3, num_ex=1
    )
    rec = generate_example(cfg, 0, master_seed=21)
    for key, arr in rec.arrays().items():
        entry = payload["fields"][key]
        code = "c128" if np.iscomplexobj(arr) else "f64"
        raw = np.ascontiguousarray(
            arr, dtype="<c16" if code == "c128" else "<f8"
        ).tobytes()
        assert entry["dtype"] == code
        assert tuple(entry["shape"]) == arr.shape
        assert entry["sha256"] == hashlib.sha256(raw).hexdigest()
        assert base64.b64decode(entry["data_b64"]) == raw


def test_partial_output_on_failure(tmp_path, monkeypatch):
    # sabotage one example to verify the .partial retention path
    import qsf.cli as cli_mod

    real_worker = cli_mod._worker

    def flaky(args):
        if args[1] == 1:  # second example
            raise ValueError("synthetic generation fault")
        return real_worker(args)

    monkeypatch.setattr(cli_mod, "_worker", flaky)
    out = tmp_path / "data"
    code = run(
        ["generate", "G_1q_X", "--num-ex", "3", "-M", "16", "-K", "2",
         "--seed", "1", "--out", str(out)]
    )
    assert code == EXIT_VALIDATION
    partial = out / "G_1q_X.zip.partial"
    assert partial.exists()
    with zipfile.ZipFile(partial) as zf:
        manifest = json.loads(zf.read("manifest.json"))
        assert manifest["partial"] is True
        assert entry_name(0) in zf.namelist()
    assert not (out / "G_1q_X.zip").exists()


def test_master_seed_hash_is_stable():
    assert example_seed(0, "G_1q_X", 0) == example_seed(0, "G_1q_X", 0)
    assert example_seed(0, "G_1q_X", 0) != example_seed(0, "G_1q_X", 1)
    assert example_seed(0, "G_1q_X", 0) != example_seed(1, "G_1q_X", 0)
    assert example_seed(0, "G_1q_X", 0) != example_seed(0, "S_1q_X", 0)


def test_record_timing_flag_controls_elapsed(tmp_path):
    cfg = parse_name("G_1q_X").with_params(n_steps=16, n_realizations=2, num_ex=1)
    rec = generate_example(cfg, 0, master_seed=1)
    assert rec.elapsed_time == 0.0
    rec_timed = generate_example(cfg, 0, master_seed=1, record_timing=True)
    assert rec_timed.elapsed_time > 0.0


def test_validate_only_mode(tmp_path):
    out = tmp_path / "data"
    code, path = gen(tmp_path, name="G_1q_X", m=16, k=2, num_ex=1)
    # note: gen() writes under tmp_path/"data"
    assert code == EXIT_OK
    assert (
        run(
            ["generate", "G_1q_X", "--validate-only", "--out", str(tmp_path / "data")]
        )
        == EXIT_OK
    )
    assert (
        run(["generate", "G_1q_XY", "--validate-only", "--out", str(tmp_path / "data")])
        == EXIT_VALIDATION
    )
