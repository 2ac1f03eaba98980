"""Dense complex linear algebra for one- and two-qubit systems.

Matrices are plain ``numpy`` complex128 arrays of shape (2, 2) or (4, 4).
Pauli labels are the strings "I", "X", "Y", "Z" for a single qubit, or an
ordered pair of those strings for two qubits (left factor acts on the
first qubit).

Conventions: the +1 eigenstate of Z is |0> = (1, 0); states are density
matrices; hbar = 1 so a step generator h evolves a state by exp(-i*h*dt).
"""

from __future__ import annotations

from typing import Iterable, Sequence, Tuple, Union

import numpy as np

PauliLabel = Union[str, Tuple[str, str]]

SIGMA = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

PAULI_AXES = ("X", "Y", "Z")


class NonHermitianError(ValueError):
    """Raised when an operation requires a Hermitian input and got none."""


class CorruptedStateError(ValueError):
    """Raised when an expectation value has a non-negligible imaginary part."""


def frob(a: np.ndarray) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(a))


def is_hermitian(a: np.ndarray, tol: float = 1e-10) -> bool:
    return frob(a - a.conj().T) <= tol


def is_unitary(a: np.ndarray, tol: float = 1e-10) -> bool:
    return frob(a.conj().T @ a - np.eye(a.shape[0])) <= tol


def is_density(a: np.ndarray, tol: float = 1e-8) -> bool:
    """Hermitian, unit trace and positive semidefinite within tol."""
    if not is_hermitian(a, tol):
        return False
    if abs(np.trace(a).real - 1.0) > tol or abs(np.trace(a).imag) > tol:
        return False
    eigs = np.linalg.eigvalsh(a)
    return bool(eigs.min() >= -tol)


def pauli_matrix(label: PauliLabel) -> np.ndarray:
    """Matrix for a single-qubit Pauli label or a two-qubit label pair."""
    if isinstance(label, str):
        if label not in SIGMA:
            raise ValueError(f"unknown Pauli label {label!r}")
        return SIGMA[label].copy()
    a, b = label
    return tensor_product(pauli_matrix(a), pauli_matrix(b))


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two single-qubit operators, `a` acting first."""
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise ValueError(
            f"tensor_product expects two 2x2 factors, got {a.shape} and {b.shape}"
        )
    return np.kron(a, b)


def pauli_eigenstates(axis: str) -> tuple[np.ndarray, np.ndarray]:
    """The two projectors (I +/- sigma_axis)/2, returned (plus, minus)."""
    if axis not in PAULI_AXES:
        raise ValueError(f"axis must be one of {PAULI_AXES}, got {axis!r}")
    s = SIGMA[axis]
    eye = np.eye(2, dtype=np.complex128)
    return (eye + s) / 2, (eye - s) / 2


def _step_dim2(h: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i*h*dt) for batched 2x2 Hermitian h via the su(2) closed form.

    h = a0*I + a.sigma; exp(-i*h*dt) = e^{-i*a0*dt} (cos(r*dt) I - i sin(r*dt) n.sigma)
    with r = |a| and n = a/r.
    """
    h00 = h[..., 0, 0]
    h11 = h[..., 1, 1]
    h01 = h[..., 0, 1]
    a0 = (h00 + h11).real / 2.0
    az = (h00 - h11).real / 2.0
    ax = h01.real
    ay = -h01.imag
    r = np.sqrt(ax * ax + ay * ay + az * az)
    theta = r * dt
    c = np.cos(theta)
    s = np.sin(theta)
    # sin(theta)/r -> dt as r -> 0
    sinc = np.where(r > 0, s / np.where(r > 0, r, 1.0), dt)
    phase = np.exp(-1j * a0 * dt)
    u = np.empty(h.shape, dtype=np.complex128)
    u[..., 0, 0] = phase * (c - 1j * sinc * az)
    u[..., 0, 1] = phase * (-1j * sinc * ax - sinc * ay)
    u[..., 1, 0] = phase * (-1j * sinc * ax + sinc * ay)
    u[..., 1, 1] = phase * (c + 1j * sinc * az)
    return u


def _step_eigh(h: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i*h*dt) for batched Hermitian h via eigendecomposition."""
    w, v = np.linalg.eigh(h)
    phases = np.exp(-1j * w * dt)
    return np.einsum("...ij,...j,...kj->...ik", v, phases, v.conj())


def step_unitaries(h: np.ndarray, dt: float) -> np.ndarray:
    """Batched exp(-i*h*dt); h has shape (..., d, d) and must be Hermitian.

    No hermiticity check here (callers validate once); dim 2 uses the
    closed form, other dims an eigendecomposition.
    """
    if h.shape[-1] == 2:
        return _step_dim2(h, dt)
    return _step_eigh(h, dt)


def unitary_step(h: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i*h*dt) for a single Hermitian matrix h and dt > 0."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not is_hermitian(h, 1e-10):
        raise NonHermitianError("unitary_step requires a Hermitian generator")
    return step_unitaries(h, dt)


def expectation(rho: np.ndarray, obs: np.ndarray) -> float:
    """Re Tr(rho @ obs) with validation of the inputs and the trace.

    The imaginary part of the trace is asserted tiny; a large imaginary
    part signals a corrupted state and raises.
    """
    if not is_density(rho, 1e-8):
        raise ValueError("rho is not a density matrix within 1e-8")
    if not is_hermitian(obs, 1e-10):
        raise NonHermitianError("observable must be Hermitian")
    tr = np.trace(rho @ obs)
    if abs(tr.imag) >= 1e-6:
        raise CorruptedStateError(
            f"expectation trace has imaginary part {tr.imag:.3e}"
        )
    assert abs(tr.imag) < 1e-9, f"imaginary residue {tr.imag:.3e}"
    return float(tr.real)


def matmul_chain(mats: Iterable[np.ndarray]) -> np.ndarray:
    """Ordered product with later factors applied on the left: Mn ... M1 M0."""
    acc = None
    for m in mats:
        acc = m.copy() if acc is None else m @ acc
    if acc is None:
        raise ValueError("empty product")
    return acc


def two_qubit_pauli_labels() -> list[tuple[str, str]]:
    """All 15 ordered Pauli pairs excluding (I, I), row-major in (I, X, Y, Z)."""
    order = ("I", "X", "Y", "Z")
    return [(a, b) for a in order for b in order if not (a == "I" and b == "I")]


def single_qubit_pauli_labels() -> list[str]:
    return list(PAULI_AXES)


def label_text(label: PauliLabel) -> str:
    if isinstance(label, str):
        return label
    return "".join(label)


def paulis_for(labels: Sequence[PauliLabel]) -> np.ndarray:
    """Stack of Pauli matrices for a label sequence, shape (n, d, d)."""
    return np.stack([pauli_matrix(lb) for lb in labels])
