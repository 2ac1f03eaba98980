"""Hamiltonian assembly and time-ordered evolution for the four system layouts.

Layout categories:

1. one qubit, x control, z noise;
2. one qubit, x and y control, x and z noise;
3. two qubits, local x control on each, local z noise on each;
4. category 3 plus an interacting xx control channel.

Per step j the generator is H(t_j) = H_drift + sum_c f_c(t_j) G_c +
sum_a beta_a(t_j) G_a, where local channels carry G = sigma/2 and the
interacting xx channel carries the bare sigma_x (x) sigma_x. Evolution is a
left-ordered product of per-step exponentials; the interaction factor of
each noisy trajectory is split off against the noise-free product.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .qcore import SIGMA, frob, step_unitaries, tensor_product

CATEGORY_TABLE: dict[int, tuple[int, tuple[str, ...], tuple[str, ...]]] = {
    1: (1, ("X",), ("Z",)),
    2: (1, ("X", "Y"), ("X", "Z")),
    3: (2, ("X1", "1X"), ("Z1", "1Z")),
    4: (2, ("X1", "1X", "XX"), ("Z1", "1Z")),
}


def _axis_generator(token: str) -> np.ndarray:
    """Coupling operator for a channel/axis token, halving factor included."""
    if token in ("X", "Y", "Z"):
        return SIGMA[token] / 2.0
    if len(token) == 2 and token.endswith("1"):
        return tensor_product(SIGMA[token[0]], SIGMA["I"]) / 2.0
    if len(token) == 2 and token.startswith("1"):
        return tensor_product(SIGMA["I"], SIGMA[token[1]]) / 2.0
    if token == "XX":
        return tensor_product(SIGMA["X"], SIGMA["X"])
    raise ValueError(f"unknown axis token {token!r}")


@dataclass(frozen=True)
class SystemSpec:
    """System layout: category, energy gap(s), and the implied axes."""

    category: int
    omega: Union[float, Tuple[float, float]] = 12.0

    def __post_init__(self):
        if self.category not in CATEGORY_TABLE:
            raise ValueError(f"category must be 1..4, got {self.category}")
        n_qubits = CATEGORY_TABLE[self.category][0]
        gaps = self.omega if isinstance(self.omega, tuple) else (self.omega,)
        if len(gaps) != n_qubits:
            raise ValueError(
                f"category {self.category} needs {n_qubits} energy gap(s), "
                f"got {self.omega!r}"
            )

    @property
    def n_qubits(self) -> int:
        return CATEGORY_TABLE[self.category][0]

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def control_axes(self) -> tuple[str, ...]:
        return CATEGORY_TABLE[self.category][1]

    @property
    def noise_axes(self) -> tuple[str, ...]:
        return CATEGORY_TABLE[self.category][2]

    @property
    def omegas(self) -> tuple[float, ...]:
        return self.omega if isinstance(self.omega, tuple) else (self.omega,)

    def drift(self) -> np.ndarray:
        """Static part: (omega/2) sigma_z per qubit."""
        if self.n_qubits == 1:
            return self.omegas[0] * SIGMA["Z"] / 2.0
        return self.omegas[0] * _axis_generator("Z1") + self.omegas[1] * _axis_generator(
            "1Z"
        )

    def control_generators(self) -> np.ndarray:
        return np.stack([_axis_generator(tok) for tok in self.control_axes])

    def noise_generators(self) -> np.ndarray:
        return np.stack([_axis_generator(tok) for tok in self.noise_axes])


def assemble_hamiltonians(
    spec: SystemSpec,
    waveforms: np.ndarray,
    noise: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-step generators from waveforms (M, C) and noise (A, K, M).

    Returns (h0, h1) with shapes (M, d, d) and (K, M, d, d). A zero-axis
    noise array (A=0) still fixes K through its shape.
    """
    m_steps, n_channels = waveforms.shape
    if n_channels != len(spec.control_axes):
        raise ValueError(
            f"expected {len(spec.control_axes)} waveform channels, got {n_channels}"
        )
    if noise.ndim != 3 or noise.shape[2] != m_steps:
        raise ValueError("noise must have shape (n_axes, K, M) matching waveforms")
    if noise.shape[0] not in (0, len(spec.noise_axes)):
        raise ValueError(
            f"expected {len(spec.noise_axes)} (or zero) noise axes, got {noise.shape[0]}"
        )
    h0 = spec.drift()[None, :, :] + np.einsum(
        "mc,cij->mij", waveforms, spec.control_generators()
    )
    gens = (
        spec.noise_generators()[: noise.shape[0]]
        if noise.shape[0]
        else np.zeros((0, spec.dim, spec.dim), dtype=np.complex128)
    )
    h1 = np.einsum("akm,aij->kmij", noise, gens)
    return h0, h1


@dataclass
class TrajectorySet:
    """Noise-free and per-realization evolution products for one example.

    u0_seq[j] accumulates steps 0..j of the noise-free generator; u_full
    holds each realization's final unitary, ui_final the interaction
    factors U(T) @ U0(T)^dagger. ui_seq (K, M, d, d) is kept only on
    request since it dominates memory.
    """

    dt: float
    h0_seq: np.ndarray
    h1_seq: np.ndarray
    u0_seq: np.ndarray
    u_full: np.ndarray
    ui_final: np.ndarray
    ui_seq: Optional[np.ndarray] = None

    @property
    def n_steps(self) -> int:
        return self.h0_seq.shape[0]

    @property
    def n_realizations(self) -> int:
        return self.h1_seq.shape[0]

    @property
    def u0_final(self) -> np.ndarray:
        return self.u0_seq[-1]


def _check_hermitian_batch(h: np.ndarray, tol: float, what: str) -> None:
    err = np.abs(h - np.conj(np.swapaxes(h, -1, -2))).max() if h.size else 0.0
    if err > tol:
        raise ValueError(f"{what} not Hermitian (max deviation {err:.3e})")


def _check_unitary_batch(u: np.ndarray, tol: float, what: str) -> None:
    eye = np.eye(u.shape[-1])
    gram = np.einsum("...ji,...jk->...ik", u.conj(), u)
    err = np.linalg.norm(gram - eye, axis=(-2, -1)).max()
    if err > tol:
        raise ValueError(f"{what} lost unitarity (max deviation {err:.3e})")


def evolve(
    spec: SystemSpec,
    h0_seq: np.ndarray,
    h1_seq: np.ndarray,
    dt: float,
    keep_interaction_steps: bool = False,
) -> TrajectorySet:
    """Accumulate left-ordered step products for all noise realizations.

    When the noise term vanishes identically the per-realization results
    are exact copies of the noise-free ones (interaction factor exactly
    the identity), skipping the realization loop.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    m = h0_seq.shape[0]
    k = h1_seq.shape[0]
    _check_hermitian_batch(h0_seq, 1e-9, "h0_seq")
    _check_hermitian_batch(h1_seq, 1e-9, "h1_seq")

    steps0 = step_unitaries(h0_seq, dt)
    u0_seq = np.empty_like(steps0)
    acc = steps0[0]
    u0_seq[0] = acc
    for j in range(1, m):
        acc = steps0[j] @ acc
        u0_seq[j] = acc
    u0_final = u0_seq[-1]
    _check_unitary_batch(u0_seq, 1e-8, "u0_seq")

    eye = np.eye(spec.dim, dtype=np.complex128)
    noiseless = not np.any(h1_seq)
    if noiseless:
        u_full = np.broadcast_to(u0_final, (k, spec.dim, spec.dim)).copy()
        ui_final = np.broadcast_to(eye, (k, spec.dim, spec.dim)).copy()
        ui_seq = None
        if keep_interaction_steps:
            ui_seq = np.broadcast_to(eye, (k, m, spec.dim, spec.dim)).copy()
        return TrajectorySet(dt, h0_seq, h1_seq, u0_seq, u_full, ui_final, ui_seq)

    steps = step_unitaries(h0_seq[None, :, :, :] + h1_seq, dt)
    ui_seq = (
        np.empty((k, m, spec.dim, spec.dim), dtype=np.complex128)
        if keep_interaction_steps
        else None
    )
    acc_k = steps[:, 0]
    if ui_seq is not None:
        ui_seq[:, 0] = acc_k @ u0_seq[0].conj().T
    for j in range(1, m):
        acc_k = steps[:, j] @ acc_k
        if ui_seq is not None:
            ui_seq[:, j] = acc_k @ u0_seq[j].conj().T
    u_full = acc_k
    _check_unitary_batch(u_full, 1e-8, "u_full")
    ui_final = u_full @ u0_final.conj().T
    return TrajectorySet(dt, h0_seq, h1_seq, u0_seq, u_full, ui_final, ui_seq)


def _observable_inverse(obs: np.ndarray) -> np.ndarray:
    """Inverse of a measurement operator; Pauli-like operators self-invert."""
    eye = np.eye(obs.shape[0])
    if frob(obs @ obs - eye) < 1e-9:
        return obs
    try:
        return np.linalg.inv(obs)
    except np.linalg.LinAlgError as exc:
        raise ValueError("observable is singular; no interaction operator") from exc


def noise_operator(ui_final: np.ndarray, obs: np.ndarray) -> np.ndarray:
    """Per-realization operator O^-1 Ui^dagger O Ui for one observable.

    Captures how a single noise realization reshapes measurements of O;
    the identity when the interaction factor commutes with O.
    """
    inv = _observable_inverse(obs)
    return inv @ ui_final.conj().T @ obs @ ui_final


def average_noise_operator(wo_set: np.ndarray) -> np.ndarray:
    """Entrywise mean over the realization axis of a (K, d, d) stack."""
    if wo_set.ndim != 3 or wo_set.shape[0] < 1:
        raise ValueError("expected a non-empty (K, d, d) stack")
    return wo_set.mean(axis=0)


@dataclass
class NoiseOperatorSet:
    """Per-observable noise operators: all realizations and their mean."""

    per_realization: np.ndarray  # (n_obs, K, d, d)
    averaged: np.ndarray  # (n_obs, d, d)


def noise_operators(
    ui_final: np.ndarray, observables: Sequence[np.ndarray] | np.ndarray
) -> NoiseOperatorSet:
    """Noise operators for every observable over a (K, d, d) interaction stack."""
    obs_stack = np.asarray(observables)
    ui_dag = np.conj(np.swapaxes(ui_final, -1, -2))
    per = np.empty(
        (obs_stack.shape[0],) + ui_final.shape, dtype=np.complex128
    )
    for i, obs in enumerate(obs_stack):
        per[i] = _observable_inverse(obs) @ ui_dag @ obs @ ui_final
    return NoiseOperatorSet(per_realization=per, averaged=per.mean(axis=1))


def refine_steps(spec: SystemSpec, h_of_t, total_time: float, m: int) -> np.ndarray:
    """Noise-free final unitary for a generator callable sampled at midpoints.

    Convergence-study helper: h_of_t maps an array of times to (M, d, d).
    """
    t = (np.arange(m) + 0.5) * (total_time / m)
    h_seq = h_of_t(t)
    steps = step_unitaries(h_seq, total_time / m)
    acc = steps[0]
    for j in range(1, m):
        acc = steps[j] @ acc
    return acc
