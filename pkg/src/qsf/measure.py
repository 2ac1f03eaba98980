"""Initial-state/observable enumeration and noise-averaged Pauli expectations.

Ordering contract (serialization depends on it): states run over the
Pauli eigenstates in axis order x, y, z, plus sign before minus sign;
two-qubit states are products with the second qubit varying fastest.
Observables run X, Y, Z for one qubit and row-major over (I, X, Y, Z)
pairs minus the identity pair for two qubits. Flattened (state,
observable) grids iterate observables fastest.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .evolve import NoiseOperatorSet
from .qcore import (
    CorruptedStateError,
    pauli_eigenstates,
    paulis_for,
    single_qubit_pauli_labels,
    two_qubit_pauli_labels,
)

_STATE_AXES = ("x", "y", "z")


def _single_qubit_states() -> tuple[list[str], np.ndarray]:
    labels: list[str] = []
    mats = []
    for axis in _STATE_AXES:
        plus, minus = pauli_eigenstates(axis.upper())
        labels.extend([f"{axis}+", f"{axis}-"])
        mats.extend([plus, minus])
    return labels, np.stack(mats)


@dataclass
class MeasurementPlan:
    """The fixed grid of initial states and observables for one system size."""

    n_qubits: int
    state_labels: list[str]
    states: np.ndarray  # (n_states, d, d)
    observable_labels: list[str]
    observables: np.ndarray  # (n_obs, d, d)

    @property
    def n_states(self) -> int:
        return self.states.shape[0]

    @property
    def n_observables(self) -> int:
        return self.observables.shape[0]

    @property
    def n_pairs(self) -> int:
        return self.n_states * self.n_observables


def build_plan(n_qubits: int) -> MeasurementPlan:
    """6 states x 3 observables for one qubit; 36 x 15 for two."""
    if n_qubits not in (1, 2):
        raise ValueError(f"only 1- and 2-qubit plans exist, got {n_qubits}")
    labels1, states1 = _single_qubit_states()
    if n_qubits == 1:
        obs_labels = single_qubit_pauli_labels()
        return MeasurementPlan(
            n_qubits=1,
            state_labels=labels1,
            states=states1,
            observable_labels=obs_labels,
            observables=paulis_for(obs_labels),
        )
    state_labels = [f"{a}{b}" for a in labels1 for b in labels1]
    states = np.stack(
        [np.kron(sa, sb) for sa in states1 for sb in states1]
    )
    pair_labels = two_qubit_pauli_labels()
    return MeasurementPlan(
        n_qubits=2,
        state_labels=state_labels,
        states=states,
        observable_labels=["".join(p) for p in pair_labels],
        observables=paulis_for(pair_labels),
    )


@dataclass
class ExpectationTensor:
    """Noise-averaged expectations plus the optional per-realization grid."""

    averaged: np.ndarray  # (n_states, n_obs)
    per_realization: Optional[np.ndarray] = None  # (n_states, n_obs, K)

    def flat(self) -> np.ndarray:
        """Averaged values flattened with observables fastest."""
        return self.averaged.reshape(-1)

    def flat_per_realization(self) -> np.ndarray:
        if self.per_realization is None:
            raise ValueError("per-realization grid was not computed")
        s, o, k = self.per_realization.shape
        return self.per_realization.reshape(s * o, k)


def _real_with_check(values: np.ndarray) -> np.ndarray:
    worst = float(np.abs(values.imag).max()) if values.size else 0.0
    if worst >= 1e-6:
        raise CorruptedStateError(
            f"expectation trace has imaginary part {worst:.3e}"
        )
    assert worst < 1e-9, f"imaginary residue {worst:.3e}"
    return values.real


def expectations(
    plan: MeasurementPlan,
    u0_final: np.ndarray,
    operators: Optional[NoiseOperatorSet],
    per_realization: bool = False,
) -> ExpectationTensor:
    """Tr(U0 rho U0^dagger O V_O) over the plan grid.

    operators=None means noiseless (V_O is the identity). With
    per_realization=True the same contraction is evaluated against each
    realization's operator instead of the average.
    """
    evolved = np.einsum("ij,sjk,lk->sil", u0_final, plan.states, u0_final.conj())
    if operators is None:
        weighted = plan.observables
    else:
        weighted = np.einsum("oij,ojk->oik", plan.observables, operators.averaged)
    avg = _real_with_check(np.einsum("sij,oji->so", evolved, weighted))
    per = None
    if per_realization:
        if operators is None:
            raise ValueError("per-realization grid needs noise operators")
        weighted_k = np.einsum(
            "oij,okjl->okil", plan.observables, operators.per_realization
        )
        per = _real_with_check(np.einsum("sij,okji->sok", evolved, weighted_k))
    return ExpectationTensor(averaged=avg, per_realization=per)


def expectations_direct(
    plan: MeasurementPlan,
    u_full: np.ndarray,
    per_realization: bool = False,
) -> ExpectationTensor:
    """Monte Carlo average of Tr(U rho U^dagger O) over the realizations.

    Oracle route: agrees with expectations() by linearity of trace and
    mean; kept as an independently computed fallback.
    """
    evolved = np.einsum("kij,sjl,kml->ksim", u_full, plan.states, u_full.conj())
    per_k = _real_with_check(
        np.einsum("ksij,oji->kso", evolved, plan.observables)
    )
    avg = per_k.mean(axis=0)
    per = np.moveaxis(per_k, 0, -1) if per_realization else None
    return ExpectationTensor(averaged=avg, per_realization=per)
