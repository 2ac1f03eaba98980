"""Dataset naming, the 52 standard configurations, and the portable container.

Names have up to six underscore-separated parts: waveform letter (G or
S), system size (1q or 2q), control token, optional noise-axes token,
optional profile token (present exactly when the noise token is), and an
optional trailing D for distorted controls. Profile tokens concatenate
for one qubit ("N1N5") and hyphenate for two ("N1-N6").

Each example serializes to a .qex entry: the magic "QDS1", a version
word, a JSON manifest (scalar metadata plus a field table of name,
dtype, shape, offset, byte length), then the raw little-endian payload.
Real arrays are 8-byte IEEE754; complex arrays interleave real/imag
8-byte pairs; layout is row-major in the declared shape order. Archives
are plain zip files holding ex_<5 digits>.qex entries plus a dataset
manifest.json, with timestamps zeroed so equal inputs give equal bytes.
"""

from __future__ import annotations

import io
import json
import re
import struct
import zipfile
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import BinaryIO, Optional, Sequence, Union

import numpy as np

from .noise import NoiseProfile

MAGIC = b"QDS1"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIQ")  # magic, version, manifest byte length

ENTRY_PATTERN = re.compile(r"ex_(\d{5})\.qex$")


class ContainerError(Exception):
    """Base for container format failures."""


class CorruptManifestError(ContainerError):
    pass


class TruncatedPayloadError(ContainerError):
    pass


class UnknownVersionError(ContainerError):
    pass


class MissingExampleError(Exception):
    """Packaging found gaps in the example sequence."""

    def __init__(self, missing: Sequence[int]):
        self.missing = list(missing)
        super().__init__(f"missing example indices: {self.missing}")


class DatasetNameError(ValueError):
    """Malformed dataset name; position is a character offset."""

    def __init__(self, message: str, position: int = 0):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


# ---------------------------------------------------------------------------
# Configurations and naming


@dataclass(frozen=True)
class SimParams:
    """Generation parameters echoed into every example."""

    total_time: float = 1.0
    n_steps: int = 1024
    n_realizations: int = 2000
    omega: tuple[float, ...] = (12.0,)
    n_pulses: int = 5
    amp_min: float = -100.0
    amp_max: float = 100.0
    sigma: Optional[float] = None
    num_ex: int = 10000
    batch_size: int = 50


CONTROL_TOKEN = {1: "X", 2: "XY", 3: "IX-XI", 4: "IX-XI-XX"}
NOISE_TOKEN = {1: "Z", 2: "XZ", 3: "IZ-ZI", 4: "IZ-ZI"}
_CATEGORY_BY_CONTROL = {
    (1, "X"): 1,
    (1, "XY"): 2,
    (2, "IX-XI"): 3,
    (2, "IX-XI-XX"): 4,
}
_N_QUBITS = {1: 1, 2: 1, 3: 2, 4: 2}
_PROFILE_RE = re.compile(r"N[0-6]")


@dataclass(frozen=True)
class DatasetConfig:
    """One dataset: waveform kind, system category, noise profiles, distortion."""

    waveform: str  # "G" or "S"
    category: int
    profiles: tuple[str, ...] = ()
    distortion: bool = False
    params: SimParams = field(default_factory=SimParams)

    def __post_init__(self):
        if self.waveform not in ("G", "S"):
            raise ValueError(f"waveform must be 'G' or 'S', got {self.waveform!r}")
        if self.category not in CONTROL_TOKEN:
            raise ValueError(f"category must be 1..4, got {self.category}")
        n_axes = len(_split_axes(NOISE_TOKEN[self.category], _N_QUBITS[self.category]))
        if self.profiles and len(self.profiles) != n_axes:
            raise ValueError(
                f"category {self.category} carries {n_axes} noise axes, "
                f"got profiles {self.profiles!r}"
            )
        for p in self.profiles:
            if not _PROFILE_RE.fullmatch(p):
                raise ValueError(f"bad noise profile {p!r}")
        if len(self.params.omega) != self.n_qubits:
            raise ValueError(
                f"need {self.n_qubits} energy gap(s), got {self.params.omega!r}"
            )

    @property
    def n_qubits(self) -> int:
        return _N_QUBITS[self.category]

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def noisy(self) -> bool:
        return bool(self.profiles)

    @property
    def control_token(self) -> str:
        return CONTROL_TOKEN[self.category]

    @property
    def noise_token(self) -> Optional[str]:
        return NOISE_TOKEN[self.category] if self.noisy else None

    @property
    def profile_token(self) -> Optional[str]:
        if not self.noisy:
            return None
        sep = "-" if self.n_qubits == 2 else ""
        return sep.join(self.profiles)

    @property
    def n_channels(self) -> int:
        return len(_split_axes(self.control_token, self.n_qubits))

    @property
    def n_noise_axes(self) -> int:
        return len(self.profiles)

    def noise_profiles(self) -> list[NoiseProfile]:
        """Profile objects with N6 wired to the first non-N6 axis."""
        base = next((i for i, p in enumerate(self.profiles) if p != "N6"), None)
        return [
            NoiseProfile(p, base_axis=base if p == "N6" else None)
            for p in self.profiles
        ]

    def with_params(self, **kwargs) -> "DatasetConfig":
        return replace(self, params=replace(self.params, **kwargs))


def _split_axes(token: str, n_qubits: int) -> list[str]:
    if n_qubits == 2:
        return token.split("-")
    return list(token)


def dataset_name(cfg: DatasetConfig) -> str:
    parts = [cfg.waveform, f"{cfg.n_qubits}q", cfg.control_token]
    if cfg.noisy:
        parts.extend([cfg.noise_token, cfg.profile_token])
    if cfg.distortion:
        parts.append("D")
    return "_".join(parts)


def _parse_profiles(token: str, n_qubits: int, n_axes: int, pos: int) -> tuple[str, ...]:
    if n_qubits == 2:
        profs = token.split("-")
    else:
        profs = _PROFILE_RE.findall(token)
        if "".join(profs) != token:
            raise DatasetNameError(f"bad profile token {token!r}", pos)
    for p in profs:
        if not _PROFILE_RE.fullmatch(p):
            raise DatasetNameError(f"bad profile token {token!r}", pos)
    if len(profs) != n_axes:
        raise DatasetNameError(
            f"profile token {token!r} must list {n_axes} profiles", pos
        )
    return tuple(profs)


def parse_name(name: str, params: Optional[SimParams] = None) -> DatasetConfig:
    """Inverse of dataset_name; raises DatasetNameError with the bad offset."""
    parts = name.split("_")
    offsets = []
    off = 0
    for p in parts:
        offsets.append(off)
        off += len(p) + 1
    if len(parts) < 3:
        raise DatasetNameError("name needs at least waveform, size and control", 0)
    waveform, size_tok, control = parts[0], parts[1], parts[2]
    if waveform not in ("G", "S"):
        raise DatasetNameError(f"bad waveform letter {waveform!r}", offsets[0])
    if size_tok not in ("1q", "2q"):
        raise DatasetNameError(f"bad system size {size_tok!r}", offsets[1])
    n_qubits = int(size_tok[0])
    category = _CATEGORY_BY_CONTROL.get((n_qubits, control))
    if category is None:
        raise DatasetNameError(f"unknown control token {control!r}", offsets[2])
    rest = parts[3:]
    rest_offsets = offsets[3:]
    distortion = False
    if rest and rest[-1] == "D":
        distortion = True
        rest = rest[:-1]
        rest_offsets = rest_offsets[:-1]
    profiles: tuple[str, ...] = ()
    if rest:
        if len(rest) != 2:
            raise DatasetNameError(
                "noise axes and profiles must appear together", rest_offsets[0]
            )
        axes_tok, prof_tok = rest
        if axes_tok != NOISE_TOKEN[category]:
            raise DatasetNameError(
                f"category {category} noise axes are {NOISE_TOKEN[category]!r}, "
                f"got {axes_tok!r}",
                rest_offsets[0],
            )
        n_axes = len(_split_axes(axes_tok, n_qubits))
        profiles = _parse_profiles(prof_tok, n_qubits, n_axes, rest_offsets[1])
    if params is None:
        omega = (12.0,) if n_qubits == 1 else (12.0, 10.0)
        params = SimParams(omega=omega)
    return DatasetConfig(
        waveform=waveform,
        category=category,
        profiles=profiles,
        distortion=distortion,
        params=params,
    )


_STANDARD_BASE: list[tuple[int, tuple[str, ...]]] = [
    (1, ()),
    (1, ("N1",)),
    (1, ("N2",)),
    (1, ("N3",)),
    (1, ("N4",)),
    (2, ()),
    (2, ("N1", "N5")),
    (2, ("N1", "N6")),
    (2, ("N3", "N6")),
    (3, ("N1", "N6")),
    (4, ()),
    (4, ("N1", "N5")),
    (4, ("N1", "N6")),
]


def enumerate_standard() -> list[DatasetConfig]:
    """The 52 published configurations: 13 bases x 2 waveforms x 2 distortions."""
    out = []
    for waveform in ("G", "S"):
        for category, profiles in _STANDARD_BASE:
            for distortion in (False, True):
                omega = (12.0,) if _N_QUBITS[category] == 1 else (12.0, 10.0)
                out.append(
                    DatasetConfig(
                        waveform=waveform,
                        category=category,
                        profiles=profiles,
                        distortion=distortion,
                        params=SimParams(omega=omega),
                    )
                )
    return out


# ---------------------------------------------------------------------------
# Shape contract

_DTYPE_CODES = {"f64": np.dtype("<f8"), "c128": np.dtype("<c16")}


def field_shapes(cfg: DatasetConfig) -> dict[str, tuple[str, tuple[int, ...]]]:
    """Declared dtype and shape of every array field of an example."""
    p = cfg.params
    m, k = p.n_steps, p.n_realizations
    d = cfg.dim
    c = cfg.n_channels
    a = cfg.n_noise_axes
    n_obs = 3 if cfg.n_qubits == 1 else 15
    n_states = 6 if cfg.n_qubits == 1 else 36
    n_pairs = n_states * n_obs
    return {
        "pulse_parameters": ("f64", (c, p.n_pulses, 3)),
        "time_range": ("f64", (1, m)),
        "pulses": ("f64", (1, m, c)),
        "distorted_pulses": ("f64", (1, m, c)),
        "expectations": ("f64", (n_pairs,)),
        "V_O_operator": ("c128", (n_obs, 1, d, d)),
        "noise": ("f64", (1, m, k, a)),
        "H0": ("c128", (1, m, d, d)),
        "H1": ("c128", (1, m, k, d, d)),
        "U0": ("c128", (1, m, d, d)),
        "U_I": ("c128", (1, 1, k, d, d)),
        "V_O": ("f64", (n_pairs, k)),
        "E_O": ("f64", (n_pairs,)),
        "simulation_parameters.static_operators": ("c128", (1, d, d)),
        "simulation_parameters.dynamic_operators": ("c128", (c, d, d)),
        "simulation_parameters.noise_operators": ("c128", (a, d, d)),
        "simulation_parameters.measurement_operators": ("c128", (n_obs, d, d)),
        "simulation_parameters.initial_states": ("c128", (n_states, d, d)),
    }


SCHEMA_FIELDS = (
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
)


@dataclass
class ExampleRecord:
    """All serialized fields of one example.

    simulation_parameters holds the JSON-able scalars; its operator lists
    are the five dedicated arrays below.
    """

    simulation_parameters: dict
    static_operators: np.ndarray
    dynamic_operators: np.ndarray
    noise_operators: np.ndarray
    measurement_operators: np.ndarray
    initial_states: np.ndarray
    pulse_parameters: np.ndarray
    time_range: np.ndarray
    pulses: np.ndarray
    distorted_pulses: np.ndarray
    expectations: np.ndarray
    vo_operator: np.ndarray
    noise: np.ndarray
    h0: np.ndarray
    h1: np.ndarray
    u0: np.ndarray
    u_i: np.ndarray
    vo_expectations: np.ndarray
    e_o: np.ndarray
    elapsed_time: float = 0.0

    def arrays(self) -> dict[str, np.ndarray]:
        return {
            "pulse_parameters": self.pulse_parameters,
            "time_range": self.time_range,
            "pulses": self.pulses,
            "distorted_pulses": self.distorted_pulses,
            "expectations": self.expectations,
            "V_O_operator": self.vo_operator,
            "noise": self.noise,
            "H0": self.h0,
            "H1": self.h1,
            "U0": self.u0,
            "U_I": self.u_i,
            "V_O": self.vo_expectations,
            "E_O": self.e_o,
            "simulation_parameters.static_operators": self.static_operators,
            "simulation_parameters.dynamic_operators": self.dynamic_operators,
            "simulation_parameters.noise_operators": self.noise_operators,
            "simulation_parameters.measurement_operators": self.measurement_operators,
            "simulation_parameters.initial_states": self.initial_states,
        }


_ARRAY_TO_ATTR = {
    "pulse_parameters": "pulse_parameters",
    "time_range": "time_range",
    "pulses": "pulses",
    "distorted_pulses": "distorted_pulses",
    "expectations": "expectations",
    "V_O_operator": "vo_operator",
    "noise": "noise",
    "H0": "h0",
    "H1": "h1",
    "U0": "u0",
    "U_I": "u_i",
    "V_O": "vo_expectations",
    "E_O": "e_o",
    "simulation_parameters.static_operators": "static_operators",
    "simulation_parameters.dynamic_operators": "dynamic_operators",
    "simulation_parameters.noise_operators": "noise_operators",
    "simulation_parameters.measurement_operators": "measurement_operators",
    "simulation_parameters.initial_states": "initial_states",
}


def _dtype_code(arr: np.ndarray) -> str:
    if np.issubdtype(arr.dtype, np.complexfloating):
        return "c128"
    if np.issubdtype(arr.dtype, np.floating):
        return "f64"
    raise ValueError(f"unsupported array dtype {arr.dtype}")


def write_example(record: ExampleRecord, sink: Union[str, Path, BinaryIO]) -> None:
    """Serialize one example; see the module docstring for the layout.

    When the metadata names a dataset, the arrays are checked against the
    declared shape table before anything is written.
    """
    arrays = record.arrays()
    name = record.simulation_parameters.get("name")
    if name:
        cfg = parse_name(name, params=_params_from_meta(record.simulation_parameters))
        declared = field_shapes(cfg)
        for key, (code, shape) in declared.items():
            arr = arrays[key]
            if tuple(arr.shape) != shape or _dtype_code(arr) != code:
                raise ValueError(
                    f"field {key!r} violates the shape contract: "
                    f"got {_dtype_code(arr)}{arr.shape}, want {code}{shape}"
                )
    fields = []
    payload = io.BytesIO()
    offset = 0
    for key, arr in arrays.items():
        code = _dtype_code(arr)
        raw = np.ascontiguousarray(arr, dtype=_DTYPE_CODES[code]).tobytes()
        fields.append(
            {
                "name": key,
                "dtype": code,
                "shape": list(arr.shape),
                "offset": offset,
                "nbytes": len(raw),
            }
        )
        payload.write(raw)
        offset += len(raw)
    manifest = {
        "meta": dict(record.simulation_parameters),
        "elapsed_time": record.elapsed_time,
        "fields": fields,
    }
    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode()
    close = False
    if isinstance(sink, (str, Path)):
        fh: BinaryIO = open(sink, "wb")
        close = True
    else:
        fh = sink
    try:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, len(blob)))
        fh.write(blob)
        fh.write(payload.getvalue())
    finally:
        if close:
            fh.close()


def _params_from_meta(meta: dict) -> SimParams:
    return SimParams(
        total_time=meta["T"],
        n_steps=meta["M"],
        n_realizations=meta["K"],
        omega=tuple(meta["Omega"]),
        n_pulses=meta["num_pulses"],
        amp_min=meta["amp_min"],
        amp_max=meta["amp_max"],
        sigma=meta.get("sigma"),
        num_ex=meta["num_ex"],
        batch_size=meta["batch_size"],
    )


def read_example(source: Union[str, Path, BinaryIO, bytes]) -> ExampleRecord:
    """Parse a .qex blob, validating the manifest before materializing."""
    if isinstance(source, bytes):
        data = source
    elif isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    else:
        data = source.read()
    if len(data) < _HEADER.size:
        raise TruncatedPayloadError("shorter than the fixed header")
    magic, version, manifest_len = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise CorruptManifestError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise UnknownVersionError(f"unsupported container version {version}")
    header_end = _HEADER.size + manifest_len
    if len(data) < header_end:
        raise TruncatedPayloadError("manifest extends past end of file")
    try:
        manifest = json.loads(data[_HEADER.size : header_end].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptManifestError(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(manifest, dict) or "fields" not in manifest:
        raise CorruptManifestError("manifest lacks a field table")
    payload = data[header_end:]
    expected = 0
    arrays: dict[str, np.ndarray] = {}
    for entry in manifest["fields"]:
        try:
            key, code = entry["name"], entry["dtype"]
            shape = tuple(int(x) for x in entry["shape"])
            off, nbytes = int(entry["offset"]), int(entry["nbytes"])
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptManifestError(f"malformed field entry: {entry}") from exc
        if code not in _DTYPE_CODES:
            raise CorruptManifestError(f"unknown dtype code {code!r}")
        if any(s < 0 for s in shape):
            raise CorruptManifestError(f"negative dimension in {key!r}")
        itemsize = _DTYPE_CODES[code].itemsize
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        if count * itemsize != nbytes:
            raise CorruptManifestError(
                f"{key!r}: shape {shape} disagrees with {nbytes} bytes"
            )
        if off != expected:
            raise CorruptManifestError(f"{key!r}: offset {off}, expected {expected}")
        expected += nbytes
        if off + nbytes > len(payload):
            raise TruncatedPayloadError(
                f"{key!r} needs bytes up to {off + nbytes}, payload has {len(payload)}"
            )
        arrays[key] = np.frombuffer(
            payload, dtype=_DTYPE_CODES[code], count=count, offset=off
        ).reshape(shape)
    if expected != len(payload):
        raise CorruptManifestError(
            f"payload has {len(payload)} bytes, manifest covers {expected}"
        )
    missing = set(_ARRAY_TO_ATTR) - set(arrays)
    if missing:
        raise CorruptManifestError(f"missing fields: {sorted(missing)}")
    kwargs = {attr: arrays[key] for key, attr in _ARRAY_TO_ATTR.items()}
    return ExampleRecord(
        simulation_parameters=manifest.get("meta", {}),
        elapsed_time=float(manifest.get("elapsed_time", 0.0)),
        **kwargs,
    )


# ---------------------------------------------------------------------------
# Archives

_ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)


def entry_name(index: int) -> str:
    return f"ex_{index:05d}.qex"


def _zip_write(zf: zipfile.ZipFile, name: str, data: bytes) -> None:
    info = zipfile.ZipInfo(name, date_time=_ZIP_EPOCH)
    info.compress_type = zipfile.ZIP_DEFLATED
    info.external_attr = 0o644 << 16
    zf.writestr(info, data, compresslevel=6)


def package_dataset(
    cfg: DatasetConfig,
    examples_dir: Union[str, Path],
    out_path: Optional[Union[str, Path]] = None,
    extra_meta: Optional[dict] = None,
    suffix: str = ".zip",
) -> Path:
    """Bundle all num_ex staged examples plus a manifest into one archive."""
    examples_dir = Path(examples_dir)
    name = dataset_name(cfg)
    expected = cfg.params.num_ex
    missing = [
        i for i in range(expected) if not (examples_dir / entry_name(i)).exists()
    ]
    if missing:
        raise MissingExampleError(missing)
    out = Path(out_path) if out_path else examples_dir.parent / f"{name}{suffix}"
    manifest = {
        "format": MAGIC.decode(),
        "version": FORMAT_VERSION,
        "name": name,
        "num_examples": expected,
        "config": config_to_dict(cfg),
    }
    if extra_meta:
        manifest.update(extra_meta)
    blob = json.dumps(manifest, sort_keys=True, indent=2).encode()
    with zipfile.ZipFile(out, "w") as zf:
        _zip_write(zf, "manifest.json", blob)
        for i in range(expected):
            _zip_write(zf, entry_name(i), (examples_dir / entry_name(i)).read_bytes())
    return out


def config_to_dict(cfg: DatasetConfig) -> dict:
    return {
        "waveform": cfg.waveform,
        "category": cfg.category,
        "n_qubits": cfg.n_qubits,
        "control": cfg.control_token,
        "noise_axes": cfg.noise_token,
        "profiles": list(cfg.profiles),
        "distortion": cfg.distortion,
        "T": cfg.params.total_time,
        "M": cfg.params.n_steps,
        "K": cfg.params.n_realizations,
        "Omega": list(cfg.params.omega),
        "num_pulses": cfg.params.n_pulses,
        "amp_min": cfg.params.amp_min,
        "amp_max": cfg.params.amp_max,
        "sigma": cfg.params.sigma,
        "num_ex": cfg.params.num_ex,
        "batch_size": cfg.params.batch_size,
    }


def config_from_dict(d: dict) -> DatasetConfig:
    params = SimParams(
        total_time=d["T"],
        n_steps=d["M"],
        n_realizations=d["K"],
        omega=tuple(d["Omega"]),
        n_pulses=d["num_pulses"],
        amp_min=d["amp_min"],
        amp_max=d["amp_max"],
        sigma=d.get("sigma"),
        num_ex=d["num_ex"],
        batch_size=d["batch_size"],
    )
    return DatasetConfig(
        waveform=d["waveform"],
        category=d["category"],
        profiles=tuple(d["profiles"]),
        distortion=d["distortion"],
        params=params,
    )


class DatasetArchive:
    """Read access to a packaged dataset."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self._zf = zipfile.ZipFile(self.path, "r")
        try:
            self.manifest = json.loads(self._zf.read("manifest.json"))
        except KeyError as exc:
            raise CorruptManifestError("archive lacks manifest.json") from exc
        except json.JSONDecodeError as exc:
            raise CorruptManifestError(f"bad archive manifest: {exc}") from exc

    def close(self) -> None:
        self._zf.close()

    def __enter__(self) -> "DatasetArchive":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    @property
    def num_examples(self) -> int:
        return int(self.manifest["num_examples"])

    def example_indices(self) -> list[int]:
        out = []
        for info in self._zf.infolist():
            m = ENTRY_PATTERN.fullmatch(info.filename)
            if m:
                out.append(int(m.group(1)))
        return sorted(out)

    def read(self, index: int) -> ExampleRecord:
        try:
            raw = self._zf.read(entry_name(index))
        except KeyError as exc:
            raise IndexError(f"example {index} not in {self.path.name}") from exc
        return read_example(raw)

    def read_bytes(self, index: int) -> bytes:
        return self._zf.read(entry_name(index))

    def config(self) -> DatasetConfig:
        return config_from_dict(self.manifest["config"])
