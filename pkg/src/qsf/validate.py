"""Post-hoc archive validation: container integrity and physics invariants.

Check codes are namespaced "format/..." for file-format problems and
"physics/..." for violated simulation invariants, so callers can tell
corruption from bad numerics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .datasetio import (
    ContainerError,
    DatasetArchive,
    DatasetConfig,
    DatasetNameError,
    config_to_dict,
    field_shapes,
    parse_name,
)

EXPECTATION_TOL = 1e-9
UNITARITY_TOL = 1e-8
HERMITICITY_TOL = 1e-9
IDENTITY_TOL = 1e-9


@dataclass
class CheckResult:
    code: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"code": self.code, "passed": self.passed, "detail": self.detail}


@dataclass
class ValidationReport:
    path: str
    name: str = ""
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, code: str, passed: bool, detail: str = "") -> None:
        self.checks.append(CheckResult(code, bool(passed), detail))

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "name": self.name,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }


def _unitarity_defect(u: np.ndarray) -> float:
    mats = u.reshape(-1, u.shape[-2], u.shape[-1])
    eye = np.eye(u.shape[-1])
    gram = np.einsum("kji,kjl->kil", mats.conj(), mats)
    return float(np.linalg.norm(gram - eye, axis=(1, 2)).max())


def _hermiticity_defect(h: np.ndarray) -> float:
    if h.size == 0:
        return 0.0
    mats = h.reshape(-1, h.shape[-2], h.shape[-1])
    return float(np.linalg.norm(mats - np.conj(np.swapaxes(mats, 1, 2)), axis=(1, 2)).max())


def _check_example(report: ValidationReport, cfg: DatasetConfig, rec, idx: int) -> None:
    declared = field_shapes(cfg)
    arrays = rec.arrays()
    bad = [
        f"{key}: {arrays[key].shape} != {shape}"
        for key, (_code, shape) in declared.items()
        if tuple(arrays[key].shape) != shape
    ]
    report.add(
        "format/shapes",
        not bad,
        f"example {idx}: {'; '.join(bad)}" if bad else f"example {idx}",
    )

    worst = max(
        float(np.abs(rec.expectations).max(initial=0.0)),
        float(np.abs(rec.e_o).max(initial=0.0)),
        float(np.abs(rec.vo_expectations).max(initial=0.0)),
    )
    report.add(
        "physics/expectation-bounds",
        worst <= 1.0 + EXPECTATION_TOL,
        f"example {idx}: max |E| = {worst:.12g}",
    )

    u_defect = max(_unitarity_defect(rec.u0), _unitarity_defect(rec.u_i))
    report.add(
        "physics/unitarity",
        u_defect < UNITARITY_TOL,
        f"example {idx}: max ||U^dag U - I||_F = {u_defect:.3e}",
    )

    h_defect = max(_hermiticity_defect(rec.h0), _hermiticity_defect(rec.h1))
    report.add(
        "physics/hermiticity",
        h_defect < HERMITICITY_TOL,
        f"example {idx}: max ||H - H^dag||_F = {h_defect:.3e}",
    )

    if not cfg.noisy or all(p == "N0" for p in cfg.profiles):
        d = cfg.dim
        eye = np.eye(d)
        vo = rec.vo_operator.reshape(-1, d, d)
        defect = float(np.linalg.norm(vo - eye, axis=(1, 2)).max())
        report.add(
            "physics/noiseless-identity",
            defect < IDENTITY_TOL,
            f"example {idx}: max ||V_O - I||_F = {defect:.3e}",
        )

    if not cfg.distortion:
        same = np.array_equal(rec.pulses, rec.distorted_pulses)
        report.add(
            "physics/distortion-passthrough",
            same,
            f"example {idx}: distorted_pulses == pulses is {same}",
        )


def validate_archive(path: Union[str, Path]) -> ValidationReport:
    """Re-check one packaged dataset archive; never raises on bad content."""
    path = Path(path)
    report = ValidationReport(path=str(path))
    try:
        archive = DatasetArchive(path)
    except ContainerError as exc:
        report.add("format/archive", False, str(exc))
        return report
    except Exception as exc:  # zipfile.BadZipFile and friends
        report.add("format/archive", False, f"unreadable archive: {exc}")
        return report
    with archive:
        report.add("format/archive", True, "manifest.json parsed")
        manifest_name = archive.manifest.get("name", "")
        report.name = manifest_name
        stem = path.name.removesuffix(".zip")
        try:
            cfg = archive.config()
            parsed = parse_name(manifest_name, params=cfg.params)
            consistent = (
                config_to_dict(parsed) == config_to_dict(cfg) and stem == manifest_name
            )
            report.add(
                "format/name",
                consistent,
                f"archive stem {stem!r}, manifest name {manifest_name!r}",
            )
        except (DatasetNameError, KeyError, TypeError, ValueError) as exc:
            report.add("format/name", False, f"manifest config unusable: {exc!r}")
            return report

        indices = archive.example_indices()
        try:
            want = list(range(archive.num_examples))
        except (KeyError, TypeError, ValueError) as exc:
            report.add("format/entries", False, f"bad example count: {exc}")
            return report
        report.add(
            "format/entries",
            indices == want,
            f"{len(indices)} entries, expected {len(want)}",
        )
        if indices != want:
            return report

        for idx in indices:
            try:
                rec = archive.read(idx)
            except ContainerError as exc:
                report.add(
                    "format/container", False, f"example {idx}: {type(exc).__name__}: {exc}"
                )
                continue
            report.add("format/container", True, f"example {idx}")
            _check_example(report, cfg, rec, idx)
    return report
